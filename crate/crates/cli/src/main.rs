//! Command-line driver: every pipeline of the library behind reproducible
//! seeds and machine-readable JSON reports.
//!
//! Exit codes: 0 for a certified outcome (or a verified certificate), 2
//! for an honest Unknown, 1 for errors. Reports carry a schema version and
//! no timestamps: identical configuration and seed give byte-identical
//! files, independent of `--jobs`.

mod verify;

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};
use num_bigint::BigInt;
use serde::Serialize;

use padic_forms::diagonal::{self, DiagonalInstance};
use padic_forms::forms::{builtin_form, parse_form, parse_forms_text, AnyForm};
use padic_forms::leep::{self, FfQuadForm};
use padic_forms::quad::{self, QuadSystem};
use padic_forms::search::{
    self, Outcome, QuarticScanOptions, SolveOptions, CERTIFICATE_SCHEMA_VERSION,
};
use padic_forms::{exec, selftest};

#[derive(Parser)]
#[command(
    name = "padic-forms",
    version,
    about = "Decide, search and certify solubility of forms over p-adic fields"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Worker threads for parallel enumeration (default: all cores).
    #[arg(long, global = true)]
    jobs: Option<usize>,
    /// Write the JSON report to this path.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Master seed for randomized searches and harnesses.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// p-adic working precision K (certificates live mod p^K).
    #[arg(long, global = true, default_value_t = 32)]
    prec: u32,
    /// Deepest search level m (certificates enumerate mod p^m).
    #[arg(long, global = true, default_value_t = 16)]
    level_max: u32,
    /// Evaluated-point budget per search task.
    #[arg(long, global = true, default_value_t = 1 << 22)]
    budget: u64,
}

#[derive(Subcommand)]
enum Command {
    /// Decide one form over Q_p and emit a certificate.
    Solve {
        #[arg(long)]
        p: u64,
        /// Form text, e.g. "x1^2 - 17*x2^2".
        #[arg(long, conflicts_with_all = ["file", "builtin"])]
        form: Option<String>,
        /// File with one form (forms grammar, # comments).
        #[arg(long, conflicts_with = "builtin")]
        file: Option<PathBuf>,
        /// Builtin name: terjanian-G, terjanian-F, quartic-H(A,B,C,D,E,F).
        #[arg(long)]
        builtin: Option<String>,
    },
    /// Certify that the 18-variable Terjanian quartic has only the trivial
    /// zero over Q_2 (split convolution modulo 16).
    Terjanian,
    /// Rank-stratified zero-count reports for quadratic systems over F_p.
    Count2 {
        #[arg(long)]
        p: u64,
        /// Verify the bound on this many random hypothesis-satisfying systems.
        #[arg(long, conflicts_with = "file")]
        random: Option<u64>,
        /// Largest number of forms per random system.
        #[arg(long, default_value_t = 2)]
        max_r: usize,
        /// Largest variable count per random system.
        #[arg(long, default_value_t = 6)]
        max_n: usize,
        /// File with one system (one form per line).
        #[arg(long)]
        file: Option<PathBuf>,
    },
    /// Solve diagonal equations c_1 x_1^d + ... + c_m x_m^d = 0 over Q_p.
    Diagonal {
        #[arg(long)]
        p: u64,
        #[arg(long)]
        d: u32,
        /// Comma-separated integer coefficients, e.g. "1,-5,25".
        #[arg(long, conflicts_with = "harness")]
        coeffs: Option<String>,
        /// Run the random-instance harness at m = d^2 + 1 variables.
        #[arg(long)]
        harness: bool,
        #[arg(long, default_value_t = 100)]
        trials: u64,
    },
    /// Decide isotropy of a quadratic form over Q_p.
    Isotropy {
        #[arg(long)]
        p: u64,
        /// Comma-separated diagonal entries, e.g. "1,1,1,1".
        #[arg(long, conflicts_with_all = ["form", "file", "random"])]
        diag: Option<String>,
        /// Quadratic form text.
        #[arg(long, conflicts_with_all = ["file", "random"])]
        form: Option<String>,
        /// File with one quadratic form.
        #[arg(long, conflicts_with = "random")]
        file: Option<PathBuf>,
        /// Decide this many random nondegenerate forms.
        #[arg(long)]
        random: Option<u64>,
        /// Variable count for --random.
        #[arg(long, default_value_t = 5)]
        n: usize,
    },
    /// Solve the three-variable quartic H for every admissible coefficient
    /// tuple mod p and tally the outcomes.
    QuarticScan {
        #[arg(long)]
        p: u64,
    },
    /// Compile a quadratic form over Q_p(t_1..t_k) into a quadratic system
    /// over Q_p; optionally solve and reconstruct.
    Leep {
        #[arg(long)]
        p: u64,
        /// Input file: header "n k d", then upper-triangle coefficient
        /// polynomials in t1..tk, one per line.
        #[arg(long)]
        file: PathBuf,
        /// Override the substitution degree D (default: minimal with N > 4R).
        #[arg(long)]
        d_sub: Option<u32>,
        /// Solve the compiled system and reconstruct X_1..X_n.
        #[arg(long)]
        solve: bool,
    },
    /// Run the built-in oracle-equivalence suites.
    Selftest {
        /// Smaller trial counts.
        #[arg(long)]
        quick: bool,
    },
    /// Re-verify an emitted certificate, sharing no solver code with the
    /// producer beyond form parsing and evaluation.
    Verify {
        #[arg(long)]
        file: PathBuf,
    },
}

/// Wrapper adding the envelope fields every report shares.
#[derive(Serialize)]
struct Report<T: Serialize> {
    schema_version: u32,
    kind: &'static str,
    seed: u64,
    #[serde(flatten)]
    body: T,
}

fn to_json<T: Serialize>(kind: &'static str, seed: u64, body: T) -> String {
    let mut s = serde_json::to_string_pretty(&Report {
        schema_version: CERTIFICATE_SCHEMA_VERSION,
        kind,
        seed,
        body,
    })
    .expect("serializable report");
    s.push('\n');
    s
}

struct CommandResult {
    pub(crate) exit: u8,
    pub(crate) json: String,
}

fn solve_options(cli: &Cli) -> SolveOptions {
    SolveOptions {
        precision: cli.prec,
        level_max: cli.level_max,
        budget: cli.budget,
        seed: cli.seed,
        guards: search::Guards::default(),
    }
}

fn parse_coeff_list(text: &str) -> Result<Vec<BigInt>> {
    text.split(',')
        .map(|w| {
            w.trim()
                .parse::<BigInt>()
                .with_context(|| format!("bad coefficient {w:?}"))
        })
        .collect()
}

fn outcome_exit(outcome: &Outcome) -> u8 {
    if outcome.is_certified() {
        0
    } else {
        2
    }
}

fn describe_outcome(outcome: &Outcome) {
    match outcome {
        Outcome::Soluble(cert) => {
            println!(
                "soluble over Q_{}: zero mod {}^{} from seed {:?} (e = {})",
                cert.p, cert.p, cert.level, cert.witness.seed, cert.witness.e
            );
        }
        Outcome::Insoluble(cert) => {
            println!(
                "insoluble over Q_{}: no primitive zero mod {} ({}, level {})",
                cert.p, cert.modulus, cert.method, cert.level
            );
        }
        Outcome::Unknown(report) => {
            println!(
                "unknown after level {} with budget {}:",
                report.level, report.budget
            );
            for line in &report.trace {
                println!("  {line}");
            }
        }
    }
}

fn cmd_solve(cli: &Cli, p: u64, form: AnyForm) -> Result<CommandResult> {
    let outcome = search::solve(&form, p, &solve_options(cli))?;
    describe_outcome(&outcome);
    Ok(CommandResult {
        exit: outcome_exit(&outcome),
        json: outcome.to_json(),
    })
}

#[derive(Serialize)]
struct TerjanianReport {
    p: u64,
    certificate: search::InsolubilityCertificate,
    /// per-block value histograms modulo 4 (the descent cross-check)
    histograms_mod_4: Vec<search::ValueHistogram>,
}

fn cmd_terjanian(cli: &Cli) -> Result<CommandResult> {
    let split = padic_forms::forms::terjanian_f();
    let guards = search::Guards::default();
    let outcome = search::certify_insoluble(&AnyForm::Split(split.clone()), 2, 4, &guards)?;
    let cert = match outcome {
        search::InsolubilityOutcome::Certified(cert) => cert,
        search::InsolubilityOutcome::Refuted { .. } => {
            bail!("internal error: the Terjanian form was refuted")
        }
    };
    let mod4: Vec<search::ValueHistogram> = split
        .blocks()
        .iter()
        .map(|b| search::value_distribution(&b.form, 2, 2, &guards))
        .collect::<search::Result<_>>()?;
    println!(
        "insoluble: primitive zeros of the 18-variable quartic modulo 16 = {} ({})",
        cert.primitive_zero_count, cert.method
    );
    for (i, hist) in mod4.iter().enumerate() {
        println!(
            "block {}: histogram mod 4 has value 1 x {}, value 0 x {}",
            i + 1,
            hist.all[1],
            hist.all[0]
        );
    }
    let report = TerjanianReport {
        p: 2,
        certificate: cert,
        histograms_mod_4: mod4,
    };
    Ok(CommandResult {
        exit: 0,
        json: to_json("terjanian", cli.seed, report),
    })
}

fn cmd_count2(
    cli: &Cli,
    p: u64,
    random: Option<u64>,
    max_r: usize,
    max_n: usize,
    file: Option<PathBuf>,
) -> Result<CommandResult> {
    let guards = search::Guards::default();
    match (random, file) {
        (Some(trials), None) => {
            let report = quad::count_bound_harness(&[p], trials, max_r, max_n, cli.seed, &guards)?;
            println!(
                "bound held: {}/{} (resampled {} hypothesis failures)",
                report.held, report.trials, report.discarded
            );
            let exit = u8::from(report.held != report.trials);
            Ok(CommandResult {
                exit,
                json: to_json("count2-harness", cli.seed, report),
            })
        }
        (None, Some(path)) => {
            let text = std::fs::read_to_string(&path)
                .with_context(|| format!("reading {}", path.display()))?;
            let forms: Vec<_> = parse_forms_text(&text)?
                .into_iter()
                .map(|(_, f)| f)
                .collect();
            let system = QuadSystem::new(forms)?;
            let report = quad::verify_count_bound(&system, p, &guards)?;
            println!(
                "N = {}, center = {}, deviation = {}, bound = {}: {}",
                report.common_zeros,
                report.center,
                report.deviation,
                report.bound,
                if report.holds { "holds" } else { "VIOLATED" }
            );
            let exit = u8::from(!report.holds);
            Ok(CommandResult {
                exit,
                json: to_json("count2", cli.seed, report),
            })
        }
        _ => bail!("count2 needs exactly one of --random N or --file PATH"),
    }
}

fn cmd_diagonal(
    cli: &Cli,
    p: u64,
    d: u32,
    coeffs: Option<String>,
    harness: bool,
    trials: u64,
) -> Result<CommandResult> {
    if harness {
        let report = diagonal::dl_property_harness(d, p, trials, cli.seed, &solve_options(cli))?;
        println!(
            "soluble: {}/{} (insoluble {}, unknown {}, re-verify failures {})",
            report.soluble,
            report.trials,
            report.insoluble,
            report.unknown,
            report.reverify_failures
        );
        let clean = report.soluble == report.trials && report.reverify_failures == 0;
        Ok(CommandResult {
            exit: u8::from(!clean) * 2,
            json: to_json("diagonal-harness", cli.seed, report),
        })
    } else {
        let text = coeffs.context("diagonal needs --coeffs or --harness")?;
        let coefficients = parse_coeff_list(&text)?;
        if coefficients.iter().any(num_traits::Zero::is_zero) {
            bail!("diagonal coefficients must be nonzero");
        }
        if d < 2 {
            bail!("diagonal degree must be at least 2");
        }
        let inst = DiagonalInstance::new(coefficients, d, p);
        let outcome = diagonal::solve_diagonal(&inst, &solve_options(cli))?;
        describe_outcome(&outcome);
        Ok(CommandResult {
            exit: outcome_exit(&outcome),
            json: outcome.to_json(),
        })
    }
}

fn cmd_isotropy(
    cli: &Cli,
    p: u64,
    diag: Option<String>,
    form: Option<String>,
    file: Option<PathBuf>,
    random: Option<u64>,
    n: usize,
) -> Result<CommandResult> {
    let opts = quad::IsotropyOptions {
        precision: cli.prec,
        witness_budget: cli.budget,
        witness_level_max: cli.level_max.min(8),
        seed: cli.seed,
        guards: search::Guards::default(),
    };
    if let Some(trials) = random {
        let report = quad::u_invariant_harness(p, n, trials, 9, cli.seed, &opts)?;
        println!(
            "isotropic {}/{} (anisotropic {}, witness exhausted {}, witness failures {})",
            report.isotropic,
            report.trials,
            report.anisotropic,
            report.witness_exhausted,
            report.witness_failures
        );
        Ok(CommandResult {
            exit: u8::from(report.witness_failures != 0),
            json: to_json("isotropy-harness", cli.seed, report),
        })
    } else {
        let q = if let Some(text) = diag {
            let entries = parse_coeff_list(&text)?;
            quad::QuadForm::from_diagonal(&entries)
        } else {
            let text = match (form, file) {
                (Some(t), None) => t,
                (None, Some(path)) => std::fs::read_to_string(&path)
                    .with_context(|| format!("reading {}", path.display()))?,
                _ => bail!("isotropy needs one of --diag, --form, --file, --random"),
            };
            quad::QuadForm::from_form(&parse_form(text.trim())?)?
        };
        let decision = quad::isotropic_qp(&q, p, &opts)?;
        println!(
            "{} over Q_{} ({})",
            if decision.isotropic {
                "isotropic"
            } else {
                "anisotropic"
            },
            p,
            decision.reason
        );
        if decision.witness_exhausted {
            println!("witness search exhausted; the decision stands");
        }
        Ok(CommandResult {
            exit: 0,
            json: to_json("isotropy", cli.seed, decision),
        })
    }
}

fn cmd_quartic_scan(cli: &Cli, p: u64) -> Result<CommandResult> {
    let opts = QuarticScanOptions {
        solve: solve_options(cli),
        ..QuarticScanOptions::default()
    };
    let report = search::quartic_lemma_scan(p, &opts)?;
    println!(
        "p = {}: {} of {} tuples soluble, {} insoluble, {} unknown",
        report.p,
        report.soluble,
        report.total,
        report.insoluble.len(),
        report.unknown.len()
    );
    let exit = u8::from(report.soluble != report.total) * 2;
    Ok(CommandResult {
        exit,
        json: to_json("quartic-scan", cli.seed, report),
    })
}

fn cmd_leep(
    cli: &Cli,
    p: u64,
    file: PathBuf,
    d_sub: Option<u32>,
    solve: bool,
) -> Result<CommandResult> {
    let text =
        std::fs::read_to_string(&file).with_context(|| format!("reading {}", file.display()))?;
    let q = FfQuadForm::parse(&text)?;
    let opts = solve_options(cli);
    if !solve {
        let substitution_degree = match d_sub {
            Some(d) => d,
            None => {
                leep::choose_min_d(q.n() as u64, q.d() as u64, q.k() as u64).ok_or_else(|| {
                    anyhow::anyhow!(
                        "no substitution degree D makes N > 4R for n = {}, k = {}, d = {}",
                        q.n(),
                        q.k(),
                        q.d()
                    )
                })? as u32
            }
        };
        let reduction = leep::reduce(&q, substitution_degree);
        let report = leep_report(&q, p, &reduction, None, None, None);
        println!(
            "reduced: D = {}, N = {}, R = {} ({} nonzero constraints)",
            substitution_degree,
            reduction.n_unknowns,
            reduction.r_constraints,
            reduction.nonzero_constraints().len()
        );
        return Ok(CommandResult {
            exit: 0,
            json: to_json("leep", cli.seed, report),
        });
    }
    let result = leep::solve_ff_quadratic(&q, p, &opts, d_sub)?;
    let solved = result.is_solved();
    println!(
        "D = {}, N = {}, R = {}: {}",
        result.reduction.substitution_degree,
        result.reduction.n_unknowns,
        result.reduction.r_constraints,
        if solved {
            "solved and reconstructed"
        } else {
            "system not solved (unknown)"
        }
    );
    if let Some(rec) = &result.reconstruction {
        for (i, x) in rec.x_polys.iter().enumerate() {
            println!("X{} = {}", i + 1, x);
        }
    }
    let certificate = match &result.system_outcome {
        padic_forms::quad::SystemOutcome::Soluble(cert) => Some(cert.clone()),
        padic_forms::quad::SystemOutcome::Unknown(_) => None,
    };
    let report = leep_report(
        &q,
        p,
        &result.reduction,
        Some(result.system_outcome.kind().to_string()),
        certificate,
        result
            .reconstruction
            .as_ref()
            .map(|r| r.x_polys.iter().map(|x| x.to_string()).collect()),
    );
    Ok(CommandResult {
        exit: if solved { 0 } else { 2 },
        json: to_json("leep", cli.seed, report),
    })
}

fn leep_report(
    q: &FfQuadForm,
    p: u64,
    reduction: &leep::ReductionResult,
    system_kind: Option<String>,
    certificate: Option<padic_forms::quad::SystemCertificate>,
    x_polys: Option<Vec<String>>,
) -> leep::LeepReport {
    leep::LeepReport {
        schema_version: CERTIFICATE_SCHEMA_VERSION,
        kind: "leep".to_string(),
        p,
        n: q.n(),
        k: q.k(),
        d: q.d(),
        substitution_degree: reduction.substitution_degree,
        n_unknowns: reduction.n_unknowns,
        r_constraints: reduction.r_constraints,
        nonzero_constraints: reduction.nonzero_constraints().len(),
        coefficients: q.render_entries(),
        coeff_index: reduction.coeff_index.clone(),
        system_kind: system_kind.unwrap_or_else(|| "not-attempted".to_string()),
        certificate,
        x_polys,
        trace: reduction
            .constraints
            .iter()
            .zip(&reduction.t_monomials)
            .map(|(f, m)| format!("t-monomial {m:?}: {f}"))
            .collect(),
    }
}

fn cmd_selftest(cli: &Cli, quick: bool) -> Result<CommandResult> {
    let report = selftest::run(cli.seed, quick);
    for suite in &report.suites {
        println!(
            "{}: {} ({} cases, {} failures)",
            if suite.failures == 0 { "pass" } else { "FAIL" },
            suite.name,
            suite.cases,
            suite.failures
        );
    }
    Ok(CommandResult {
        exit: u8::from(!report.all_passed),
        json: to_json("selftest", cli.seed, report),
    })
}

fn run(cli: Cli) -> Result<CommandResult> {
    match &cli.command {
        Command::Solve {
            p,
            form,
            file,
            builtin,
        } => {
            let any = if let Some(name) = builtin {
                builtin_form(name)?
            } else if let Some(text) = form {
                AnyForm::Single(parse_form(text)?)
            } else if let Some(path) = file {
                let text = std::fs::read_to_string(path)
                    .with_context(|| format!("reading {}", path.display()))?;
                let forms = parse_forms_text(&text)?;
                let [(_, f)] = forms.as_slice() else {
                    bail!("solve expects exactly one form in {}", path.display());
                };
                AnyForm::Single(f.clone())
            } else {
                bail!("solve needs one of --form, --file, --builtin");
            };
            cmd_solve(&cli, *p, any)
        }
        Command::Terjanian => cmd_terjanian(&cli),
        Command::Count2 {
            p,
            random,
            max_r,
            max_n,
            file,
        } => cmd_count2(&cli, *p, *random, *max_r, *max_n, file.clone()),
        Command::Diagonal {
            p,
            d,
            coeffs,
            harness,
            trials,
        } => cmd_diagonal(&cli, *p, *d, coeffs.clone(), *harness, *trials),
        Command::Isotropy {
            p,
            diag,
            form,
            file,
            random,
            n,
        } => cmd_isotropy(
            &cli,
            *p,
            diag.clone(),
            form.clone(),
            file.clone(),
            *random,
            *n,
        ),
        Command::QuarticScan { p } => cmd_quartic_scan(&cli, *p),
        Command::Leep {
            p,
            file,
            d_sub,
            solve,
        } => cmd_leep(&cli, *p, file.clone(), *d_sub, *solve),
        Command::Selftest { quick } => cmd_selftest(&cli, *quick),
        Command::Verify { file } => verify::cmd_verify(file),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // keep exit code 1 for usage errors; 2 is reserved for Unknown
            if e.use_stderr() {
                eprint!("{e}");
                return ExitCode::from(1);
            }
            print!("{e}");
            return ExitCode::SUCCESS;
        }
    };
    let jobs = cli.jobs;
    let out = cli.out.clone();
    let result = exec::with_jobs(jobs, move || run(cli));
    match result {
        Ok(CommandResult { exit, json }) => {
            if let Some(path) = out {
                if let Err(e) = std::fs::write(&path, &json) {
                    eprintln!("error: writing {}: {e}", path.display());
                    return ExitCode::from(1);
                }
            }
            ExitCode::from(exit)
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
