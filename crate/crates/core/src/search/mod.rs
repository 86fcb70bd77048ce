//! Primitive-zero search, insolubility certification, and the solve
//! pipeline.
//!
//! `solve` classifies a form over `Q_p` by escalating levels m = 1, 2, 4,
//! ...: at each level it streams the primitive zeros mod p^m looking for a
//! Hensel-liftable seed (solubility route) and, in parallel, counts the
//! primitive zeros mod p^m (insolubility route, by split convolution when
//! the form decomposes into blocks, by direct enumeration otherwise). The
//! first certificate wins; if budgets and guards run out first, the answer
//! is an explicit `Unknown`, never a guess.

mod certificate;
mod enumerate;
mod histogram;
mod quartic;

pub use certificate::{
    BlockHistogramJson, ConvolutionLedgerJson, InsolubilityCertificate, NormalizationJson, Outcome,
    SolubilityCertificate, UnknownReport, WitnessJson, CERTIFICATE_SCHEMA_VERSION,
};
pub(crate) use enumerate::{find_liftable_system_seed, SeedSearch, SystemSeedSearch};
pub use enumerate::{primitive_zero_search, SearchOutcome};
pub use histogram::{
    count_primitive_zeros_direct, split_zero_count, split_zero_count_detailed,
    split_zero_count_seq, value_distribution, value_distribution_seq, SplitCount, ValueHistogram,
};
pub use quartic::{quartic_lemma_scan, QuarticScanOptions, QuarticScanReport};

use num_bigint::BigUint;
use num_traits::Zero;
use thiserror::Error;

use crate::arith::{ArithError, PadicContext};
use crate::forms::{
    detect_split, normalize_content_detailed, AnyForm, Form, FormsError, NormalizedForm, SplitForm,
};
use crate::lifting::{hensel_lift, LiftError};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SearchError {
    #[error(transparent)]
    Forms(#[from] FormsError),
    #[error(transparent)]
    Arith(#[from] ArithError),
    #[error(transparent)]
    Lift(#[from] LiftError),
    #[error("guard exceeded: {0}")]
    GuardExceeded(String),
    #[error("zero counts overflowed 128 bits")]
    CountOverflow,
    #[error("empty system of forms")]
    EmptySystem,
    #[error("forms in a system must share one variable count")]
    MixedArity,
    #[error("modulus overflow: {p}^{m} does not fit in 64 bits")]
    ModulusOverflow { p: u64, m: u32 },
}

pub type Result<T> = std::result::Result<T, SearchError>;

/// Hard limits for exhaustive work. Results that would require exceeding a
/// guard are reported as errors or traced as skipped, never approximated.
#[derive(Debug, Clone)]
pub struct Guards {
    /// Maximum evaluated points per enumeration task.
    pub max_points: u64,
    /// Maximum histogram length (the modulus p^m).
    pub max_modulus: u64,
    /// Maximum multiply-adds per convolution.
    pub max_conv_ops: u128,
}

impl Default for Guards {
    fn default() -> Self {
        Guards {
            max_points: 1 << 40,
            max_modulus: 1 << 22,
            max_conv_ops: 1 << 36,
        }
    }
}

/// Knobs for the solve pipeline. Defaults are desk-scale: precision 32,
/// levels up to 16, about 4M evaluated points per search task.
#[derive(Debug, Clone)]
pub struct SolveOptions {
    pub precision: u32,
    pub level_max: u32,
    pub budget: u64,
    pub seed: u64,
    pub guards: Guards,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions {
            precision: crate::arith::DEFAULT_PRECISION,
            level_max: 16,
            budget: 1 << 22,
            seed: 0,
            guards: Guards::default(),
        }
    }
}

/// Result of an insolubility check at one level.
#[derive(Debug, Clone)]
#[allow(clippy::large_enum_variant)]
pub enum InsolubilityOutcome {
    Certified(InsolubilityCertificate),
    /// Primitive zeros exist mod p^m; the caller must attempt lifting.
    /// The vector, when present, is such a zero (not yet a Q_p zero).
    Refuted {
        count: Option<u128>,
        zero: Option<Vec<u64>>,
    },
}

enum InsolEvidence {
    Direct { points: u128 },
    Split { count: SplitCount },
}

fn modulus_string(p: u64, m: u32) -> String {
    BigUint::from(p).pow(m).to_string()
}

fn build_insolubility_certificate(
    form_text: String,
    normalization: Option<NormalizationJson>,
    split: Option<&SplitForm>,
    p: u64,
    m: u32,
    evidence: InsolEvidence,
    trace: Vec<String>,
) -> InsolubilityCertificate {
    let (method, points_checked, ledger, block_histograms) = match evidence {
        InsolEvidence::Direct { points } => (
            "direct-enumeration".to_string(),
            Some(points.to_string()),
            None,
            None,
        ),
        InsolEvidence::Split { count } => {
            let split = split.expect("split evidence carries a split form");
            (
                "split-convolution".to_string(),
                None,
                Some(certificate::ledger_json(&count)),
                Some(certificate::block_histograms_json(split, &count)),
            )
        }
    };
    InsolubilityCertificate {
        schema_version: CERTIFICATE_SCHEMA_VERSION,
        kind: "insoluble".to_string(),
        p,
        level: m,
        modulus: modulus_string(p, m),
        form: form_text,
        method,
        primitive_zero_count: "0".to_string(),
        points_checked,
        ledger,
        block_histograms,
        normalization,
        trace,
    }
}

/// Check whether `flat` (with optional split structure) has any primitive
/// zero mod p^m; count exactly via convolution when split, by exhaustive
/// enumeration within `max_points` otherwise.
/// Count (when present) and example zero of a refuted level.
type Refutation = (Option<u128>, Option<Vec<u64>>);

fn insolubility_evidence(
    flat: &Form,
    split: Option<&SplitForm>,
    p: u64,
    m: u32,
    budget_cap: Option<u64>,
    guards: &Guards,
) -> Result<std::result::Result<InsolEvidence, Refutation>> {
    if let Some(split) = split {
        let count = histogram::split_zero_count_detailed(split, p, m, guards)?;
        if count.primitive_zeros == 0 {
            return Ok(Ok(InsolEvidence::Split { count }));
        }
        // a found zero helps diagnostics; keep the search bounded
        let witness_budget = budget_cap.unwrap_or(1 << 22).min(guards.max_points);
        let zero = match enumerate::primitive_zero_search(
            std::slice::from_ref(flat),
            p,
            m,
            witness_budget,
            0,
            guards,
        )? {
            SearchOutcome::Found(v) => Some(v),
            _ => None,
        };
        return Ok(Err((Some(count.primitive_zeros), zero)));
    }
    let cap = budget_cap.map_or(guards.max_points, |b| b.min(guards.max_points));
    let representatives = enumerate::PrimitiveSpace::new(flat.n(), p, m)?.total();
    if representatives > cap as u128 {
        return Err(SearchError::GuardExceeded(format!(
            "direct certification needs {representatives} representatives, above the cap {cap}"
        )));
    }
    match enumerate::primitive_zero_search(std::slice::from_ref(flat), p, m, cap, 0, guards)? {
        SearchOutcome::ExhaustedNone => Ok(Ok(InsolEvidence::Direct {
            points: representatives,
        })),
        SearchOutcome::Found(v) => Ok(Err((None, Some(v)))),
        SearchOutcome::BudgetExceeded => Err(SearchError::GuardExceeded(
            "search truncated before exhausting the space".into(),
        )),
    }
}

/// Certify that `form` has no primitive zero mod p^m (hence, being
/// homogeneous, no nontrivial zero over `Q_p`), or refute with a found
/// primitive zero mod p^m.
pub fn certify_insoluble(
    form: &AnyForm,
    p: u64,
    m: u32,
    guards: &Guards,
) -> Result<InsolubilityOutcome> {
    let flat = form.to_form();
    if flat.is_zero() {
        let mut e1 = vec![0u64; flat.n()];
        e1[0] = 1;
        return Ok(InsolubilityOutcome::Refuted {
            count: None,
            zero: Some(e1),
        });
    }
    let owned_split = match form {
        AnyForm::Split(s) => Some(s.clone()),
        AnyForm::Single(f) => detect_split(f),
    };
    match insolubility_evidence(&flat, owned_split.as_ref(), p, m, None, guards)? {
        Ok(evidence) => {
            let trace = vec![format!("level {m}: primitive zero count 0")];
            Ok(InsolubilityOutcome::Certified(
                build_insolubility_certificate(
                    flat.to_string(),
                    None,
                    owned_split.as_ref(),
                    p,
                    m,
                    evidence,
                    trace,
                ),
            ))
        }
        Err((count, zero)) => Ok(InsolubilityOutcome::Refuted { count, zero }),
    }
}

fn normalization_json(norm: &NormalizedForm) -> Option<NormalizationJson> {
    if norm.is_trivial() {
        None
    } else {
        Some(NormalizationJson {
            normalized_form: norm.form.to_string(),
            shift_total: norm.shift_total,
            variable_scales: norm.variable_scales.clone(),
        })
    }
}

/// Decide the solubility of `form` over `Q_p`, producing a re-verifiable
/// certificate either way, or an `Unknown` report with the attempted trace.
pub fn solve(form: &AnyForm, p: u64, opts: &SolveOptions) -> Result<Outcome> {
    let ctx = PadicContext::new(p, opts.precision)?;
    let original = form.to_form();
    if original.is_zero() {
        return Err(FormsError::ZeroForm.into());
    }
    let original_text = original.to_string();
    let norm = normalize_content_detailed(&original, p)?;
    let g = norm.form.clone();
    let split = detect_split(&g);
    let mut trace: Vec<String> = Vec::new();
    if !norm.is_trivial() {
        trace.push(format!(
            "normalized model: shift {} (total {}), variable scales {:?}",
            norm.shift, norm.shift_total, norm.variable_scales
        ));
    }
    if let Some(s) = &split {
        trace.push(format!("split structure: {} blocks", s.blocks().len()));
    }
    let target_modulus = ctx.modulus();
    let mut level = 1u32;
    let mut insol_dead = false;
    loop {
        match enumerate::find_liftable_seed(&g, p, level, opts.budget, opts.seed, &opts.guards)? {
            SeedSearch::Found(witness) => {
                let lifted = hensel_lift(&g, &witness, &ctx, opts.precision)?;
                let vector = norm.map_zero_back(p, &lifted, &target_modulus);
                // the certificate must re-verify against the input form
                let check = crate::forms::evaluate_big(&original, &vector, &target_modulus)?;
                if !check.is_zero() || vector.iter().all(|c| c.is_zero()) {
                    return Err(LiftError::VerificationFailed.into());
                }
                trace.push(format!(
                    "level {level}: liftable seed {:?} (e = {}, index {})",
                    witness.seed, witness.derivative_valuation, witness.index
                ));
                let cert = SolubilityCertificate {
                    schema_version: CERTIFICATE_SCHEMA_VERSION,
                    kind: "soluble".to_string(),
                    p,
                    level: opts.precision,
                    modulus: target_modulus.to_string(),
                    form: original_text,
                    vector: vector.iter().map(|c| c.to_string()).collect(),
                    witness: WitnessJson::from(&witness),
                    method: "primitive-search+hensel".to_string(),
                    normalization: normalization_json(&norm),
                    trace,
                    vector_residues: vector,
                };
                return Ok(Outcome::Soluble(cert));
            }
            SeedSearch::ExhaustedNone => {
                trace.push(format!("level {level}: no liftable seed (exhaustive)"));
            }
            SeedSearch::Inconclusive => {
                trace.push(format!("level {level}: no liftable seed within budget"));
            }
        }
        if !insol_dead {
            match insolubility_evidence(
                &g,
                split.as_ref(),
                p,
                level,
                Some(opts.budget),
                &opts.guards,
            ) {
                Ok(Ok(evidence)) => {
                    trace.push(format!("level {level}: primitive zero count 0"));
                    let cert = build_insolubility_certificate(
                        original_text,
                        normalization_json(&norm),
                        split.as_ref(),
                        p,
                        level,
                        evidence,
                        trace,
                    );
                    return Ok(Outcome::Insoluble(cert));
                }
                Ok(Err((count, _zero))) => match count {
                    Some(c) => trace.push(format!("level {level}: {c} primitive zeros remain")),
                    None => trace.push(format!("level {level}: primitive zeros remain")),
                },
                Err(SearchError::GuardExceeded(msg)) => {
                    trace.push(format!("level {level}: insolubility check skipped ({msg})"));
                    insol_dead = true;
                }
                Err(e) => return Err(e),
            }
        }
        if level >= opts.level_max {
            break;
        }
        level = (level * 2).min(opts.level_max);
    }
    trace.push("budget and level ceiling reached without a certificate".to_string());
    Ok(Outcome::Unknown(UnknownReport {
        schema_version: CERTIFICATE_SCHEMA_VERSION,
        kind: "unknown".to_string(),
        p,
        level: opts.level_max,
        form: original_text,
        budget: opts.budget,
        trace,
    }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::forms::{builtin_form, parse_form, terjanian_f};

    fn opts() -> SolveOptions {
        SolveOptions::default()
    }

    #[test]
    fn solve_finds_two_adic_square_root() {
        let f = AnyForm::Single(parse_form("x1^2 - 17*x2^2").unwrap());
        match solve(&f, 2, &opts()).unwrap() {
            Outcome::Soluble(cert) => {
                assert_eq!(cert.witness.seed, vec![1, 1]);
                assert_eq!(cert.witness.seed_valuation, Some(4));
                assert_eq!(cert.level, 32);
            }
            other => panic!("expected soluble, got {}", other.kind()),
        }
    }

    #[test]
    fn solve_certifies_terjanian_f_insoluble() {
        let f = AnyForm::Split(terjanian_f());
        match solve(&f, 2, &opts()).unwrap() {
            Outcome::Insoluble(cert) => {
                assert_eq!(cert.level, 4);
                assert_eq!(cert.modulus, "16");
                assert_eq!(cert.method, "split-convolution");
                assert_eq!(cert.primitive_zero_count, "0");
            }
            other => panic!("expected insoluble, got {}", other.kind()),
        }
    }

    #[test]
    fn solve_sum_of_three_cubes_mod_7() {
        let f = AnyForm::Single(parse_form("x1^3 + x2^3 + x3^3").unwrap());
        match solve(&f, 7, &opts()).unwrap() {
            Outcome::Soluble(cert) => {
                // re-verify independently of the pipeline
                let modulus = BigUint::from(7u32).pow(32);
                let val = crate::forms::evaluate_big(
                    &parse_form("x1^3 + x2^3 + x3^3").unwrap(),
                    &cert.vector_residues,
                    &modulus,
                )
                .unwrap();
                assert!(val.is_zero());
            }
            other => panic!("expected soluble, got {}", other.kind()),
        }
    }

    #[test]
    fn certify_examples() {
        // x^2 - 5 y^2 mod 25: p | x forces p | y
        let f = AnyForm::Single(parse_form("x1^2 - 5*x2^2").unwrap());
        match certify_insoluble(&f, 5, 2, &Guards::default()).unwrap() {
            InsolubilityOutcome::Certified(cert) => {
                assert_eq!(cert.level, 2);
                assert_eq!(cert.modulus, "25");
            }
            other => panic!("expected certificate, got {other:?}"),
        }
        // x^2 + y^2 + z^2 has the zero (1,2,3) mod 7
        let g = AnyForm::Single(parse_form("x1^2 + x2^2 + x3^2").unwrap());
        match certify_insoluble(&g, 7, 1, &Guards::default()).unwrap() {
            InsolubilityOutcome::Refuted { zero, .. } => {
                assert_eq!(zero, Some(vec![1, 2, 3]));
            }
            other => panic!("expected refutation, got {other:?}"),
        }
        // terjanian-F at level 4
        let t = builtin_form("terjanian-F").unwrap();
        assert!(matches!(
            certify_insoluble(&t, 2, 4, &Guards::default()).unwrap(),
            InsolubilityOutcome::Certified(_)
        ));
    }

    #[test]
    fn scaled_forms_solve_the_same() {
        // unit scaling must not change the classification
        let f = AnyForm::Single(parse_form("x1^2 + x2^2").unwrap());
        let g = AnyForm::Single(parse_form("3*x1^2 + 3*x2^2").unwrap());
        let a = solve(&f, 2, &opts()).unwrap();
        let b = solve(&g, 2, &opts()).unwrap();
        assert_eq!(a.kind(), b.kind());
        assert_eq!(a.kind(), "insoluble");
    }

    #[test]
    fn normalized_certificates_verify_against_the_input() {
        // 4 x^2 + 8 y^2: content normalization produces a model; the final
        // vector must still zero the *input* form mod p^K
        let f = parse_form("4*x1^2 - 68*x2^2").unwrap(); // 4(x^2 - 17 y^2)
        match solve(&AnyForm::Single(f.clone()), 2, &opts()).unwrap() {
            Outcome::Soluble(cert) => {
                let modulus = BigUint::from(2u32).pow(32);
                let val = crate::forms::evaluate_big(&f, &cert.vector_residues, &modulus).unwrap();
                assert!(val.is_zero());
                assert!(cert.normalization.is_some());
            }
            other => panic!("expected soluble, got {}", other.kind()),
        }
    }

    #[test]
    fn unknown_is_reported_honestly() {
        // (x1 - x2)^2 expanded: every zero mod p^m is singular, the form is
        // soluble over Q_p but the witness machinery cannot certify it;
        // small budgets must yield Unknown, not a wrong certificate.
        let f = AnyForm::Single(parse_form("x1^2 - 2*x1*x2 + x2^2").unwrap());
        let mut o = opts();
        o.level_max = 4;
        match solve(&f, 3, &o).unwrap() {
            Outcome::Unknown(report) => {
                assert_eq!(report.level, 4);
                assert!(!report.trace.is_empty());
            }
            other => panic!("expected unknown, got {}", other.kind()),
        }
    }
}
