//! Independent certificate verification.
//!
//! This deliberately shares no solver code with the producer path: beyond
//! form parsing and evaluation, everything here is re-derived with plain
//! odometer loops and direct convolution sums. A certificate that passes
//! `verify` stands on the embedded data alone.

use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_traits::{ToPrimitive, Zero};
use serde::Serialize;
use serde_json::Value;

use padic_forms::forms::{self, parse_form, Form, LinearSubstitution};

use crate::CommandResult;

/// Hard ceilings for the verifier's own enumeration work.
const MAX_VERIFY_POINTS: u128 = 1 << 26;
const MAX_VERIFY_MODULUS: u64 = 1 << 22;

#[derive(Serialize)]
struct Check {
    name: String,
    pass: bool,
    detail: String,
}

#[derive(Serialize)]
struct VerifyReport {
    schema_version: u32,
    kind: String,
    target_kind: String,
    checks: Vec<Check>,
    verified: bool,
}

struct Checks(Vec<Check>);

impl Checks {
    fn push(&mut self, name: &str, pass: bool, detail: String) {
        self.0.push(Check {
            name: name.to_string(),
            pass,
            detail,
        });
    }

    fn all_pass(&self) -> bool {
        self.0.iter().all(|c| c.pass)
    }
}

fn field<'v>(value: &'v Value, name: &str) -> Result<&'v Value> {
    value
        .get(name)
        .with_context(|| format!("certificate is missing the {name:?} field"))
}

fn field_u64(value: &Value, name: &str) -> Result<u64> {
    field(value, name)?
        .as_u64()
        .with_context(|| format!("{name:?} is not an integer"))
}

fn field_str<'v>(value: &'v Value, name: &str) -> Result<&'v str> {
    field(value, name)?
        .as_str()
        .with_context(|| format!("{name:?} is not a string"))
}

fn parse_biguint(text: &str) -> Result<BigUint> {
    text.parse::<BigUint>()
        .with_context(|| format!("bad residue {text:?}"))
}

fn vector_field(value: &Value, name: &str) -> Result<Vec<BigUint>> {
    field(value, name)?
        .as_array()
        .with_context(|| format!("{name:?} is not an array"))?
        .iter()
        .map(|v| {
            v.as_str()
                .context("vector entries are decimal strings")
                .and_then(parse_biguint)
        })
        .collect()
}

/// Check the normalization relation `form(p^{s_i} x_i) = p^shift * model`
/// symbolically, returning the model form to run enumeration against.
fn resolve_model(cert: &Value, form: &Form, p: u64, checks: &mut Checks) -> Result<Form> {
    let Some(norm) = cert.get("normalization").filter(|v| !v.is_null()) else {
        return Ok(form.clone());
    };
    let model_text = field_str(norm, "normalized_form")?;
    let model = parse_form(model_text)?.extend_to(form.n());
    let shift = field_u64(norm, "shift_total")? as u32;
    let scales: Vec<u32> = field(norm, "variable_scales")?
        .as_array()
        .context("variable_scales is an array")?
        .iter()
        .map(|v| v.as_u64().context("scale").map(|s| s as u32))
        .collect::<Result<_>>()?;
    if scales.len() != form.n() {
        bail!("variable_scales length mismatch");
    }
    let n = form.n();
    let mut entries = vec![BigInt::zero(); n * n];
    for (i, &s) in scales.iter().enumerate() {
        entries[i * n + i] = BigInt::from(p).pow(s);
    }
    let substituted = forms::substitute(form, &LinearSubstitution::new(n, n, entries))?;
    let scale = BigInt::from(p).pow(shift);
    let rescaled = Form::from_terms(
        n,
        model.degree(),
        model
            .terms()
            .map(|(m, c)| (m.exponents().to_vec(), c * &scale)),
    );
    checks.push(
        "normalization-relation",
        substituted == rescaled,
        format!("form(p^s x) == p^{shift} * model"),
    );
    Ok(model)
}

fn verify_soluble(cert: &Value, checks: &mut Checks) -> Result<()> {
    let p = field_u64(cert, "p")?;
    let level = field_u64(cert, "level")? as u32;
    let form = parse_form(field_str(cert, "form")?)?;
    let vector = vector_field(cert, "vector")?;
    let modulus = BigUint::from(p).pow(level);
    checks.push(
        "vector-length",
        vector.len() == form.n(),
        format!("{} coordinates for n = {}", vector.len(), form.n()),
    );
    let nonzero = !vector.iter().all(|c| (c % &modulus).is_zero());
    checks.push("vector-nontrivial", nonzero, "vector != 0 mod p^K".into());
    if vector.len() == form.n() {
        let value = forms::evaluate_big(&form, &vector, &modulus)?;
        checks.push(
            "zero-mod-p^K",
            value.is_zero(),
            format!("f(vector) mod {p}^{level} = {value}"),
        );
    }
    // audit the witness against the solved model
    let model = resolve_model(cert, &form, p, checks)?;
    if let Some(witness) = cert.get("witness").filter(|v| !v.is_null()) {
        let seed: Vec<i64> = field(witness, "seed")?
            .as_array()
            .context("witness seed array")?
            .iter()
            .map(|v| v.as_i64().context("seed entry"))
            .collect::<Result<_>>()?;
        let index = field_u64(witness, "index")? as usize;
        let e = field_u64(witness, "e")? as u32;
        if seed.len() == model.n() && index < model.n() {
            let primitive = seed.iter().any(|&c| c.unsigned_abs() % p != 0);
            checks.push("seed-primitive", primitive, format!("{seed:?} mod {p}"));
            let seed_big: Vec<BigInt> = seed.iter().map(|&v| BigInt::from(v)).collect();
            let value = forms::evaluate_exact(&model, &seed_big)?;
            let grad = forms::gradient_exact(&model, &seed_big)?;
            let vp = |x: &BigInt| -> Option<u64> {
                if x.is_zero() {
                    return None;
                }
                let p_big = BigInt::from(p);
                let mut v = 0u64;
                let mut rest = x.clone();
                while (&rest % &p_big).is_zero() {
                    rest /= &p_big;
                    v += 1;
                }
                Some(v)
            };
            let e_actual = vp(&grad[index]);
            checks.push(
                "witness-derivative-valuation",
                e_actual == Some(e as u64),
                format!("v_p(df/dx_{}) = {e_actual:?}, claimed {e}", index + 1),
            );
            let v_actual = vp(&value);
            let claimed = witness.get("seed_valuation").and_then(|v| v.as_u64());
            checks.push(
                "witness-seed-valuation",
                v_actual == claimed,
                format!("v_p(f(seed)) = {v_actual:?}, claimed {claimed:?}"),
            );
            let deep_enough = match v_actual {
                None => true,
                Some(v) => v > 2 * e as u64,
            };
            checks.push(
                "witness-hensel-criterion",
                deep_enough,
                format!("v(f) >= 2e+1 with e = {e}"),
            );
        } else {
            checks.push(
                "seed-shape",
                false,
                "seed length or index out of range".into(),
            );
        }
    }
    Ok(())
}

/// Count primitive zeros of `f` mod `modulus` (a power of p) by a plain
/// odometer walk over all vectors.
fn naive_primitive_zeros(f: &Form, p: u64, modulus: u64) -> Result<u128> {
    let n = f.n();
    let space = (modulus as u128)
        .checked_pow(n as u32)
        .filter(|&s| s <= MAX_VERIFY_POINTS)
        .context("space too large for the verifier")?;
    let _ = space;
    let big_mod = BigUint::from(modulus);
    let mut coords = vec![0u64; n];
    let mut count = 0u128;
    loop {
        if coords.iter().any(|&c| c % p != 0) {
            let x: Vec<BigUint> = coords.iter().map(|&c| BigUint::from(c)).collect();
            if forms::evaluate_big(f, &x, &big_mod)?.is_zero() {
                count += 1;
            }
        }
        let mut done = true;
        for i in (0..n).rev() {
            coords[i] += 1;
            if coords[i] == modulus {
                coords[i] = 0;
            } else {
                done = false;
                break;
            }
        }
        if done {
            return Ok(count);
        }
    }
}

fn verify_insoluble(cert: &Value, checks: &mut Checks) -> Result<()> {
    let p = field_u64(cert, "p")?;
    let level = field_u64(cert, "level")? as u32;
    let form = parse_form(field_str(cert, "form")?)?;
    let method = field_str(cert, "method")?;
    let modulus_claim = parse_biguint(field_str(cert, "modulus")?)?;
    let modulus = BigUint::from(p).pow(level);
    checks.push(
        "modulus-consistent",
        modulus == modulus_claim,
        format!("p^level = {modulus}"),
    );
    let modulus_u = modulus.to_u64().context("verifier needs modulus in u64")?;
    if modulus_u > MAX_VERIFY_MODULUS {
        bail!("modulus too large for the verifier");
    }
    let model = resolve_model(cert, &form, p, checks)?;
    match method {
        "direct-enumeration" => {
            let count = naive_primitive_zeros(&model, p, modulus_u)?;
            checks.push(
                "no-primitive-zero",
                count == 0,
                format!("naive enumeration found {count} primitive zeros mod {modulus_u}"),
            );
        }
        "split-convolution" => {
            verify_split_convolution(cert, &model, p, modulus_u, checks)?;
        }
        other => bail!("unknown insolubility method {other:?}"),
    }
    Ok(())
}

/// Recompute the block histograms naively, re-assemble the weighted block
/// sum symbolically, redo the convolution with plain loops, and check that
/// the primitive zero count is zero.
fn verify_split_convolution(
    cert: &Value,
    model: &Form,
    p: u64,
    modulus: u64,
    checks: &mut Checks,
) -> Result<()> {
    let blocks = field(cert, "block_histograms")?
        .as_array()
        .context("block_histograms is an array")?;
    // 1. blocks partition the variables and reproduce the model form
    let mut assembled = Form::zero(model.n(), model.degree());
    let mut covered = vec![false; model.n()];
    let mut parsed_blocks = Vec::new();
    for b in blocks {
        let vars: Vec<usize> = field(b, "variables")?
            .as_array()
            .context("variables array")?
            .iter()
            .map(|v| v.as_u64().context("variable index").map(|x| x as usize - 1))
            .collect::<Result<_>>()?;
        let weight: BigInt = field_str(b, "weight")?
            .parse()
            .context("weight is a decimal integer")?;
        let block_form = parse_form(field_str(b, "block_form")?)?.extend_to(vars.len());
        for &v in &vars {
            if v >= covered.len() || covered[v] {
                bail!("blocks do not partition the variables");
            }
            covered[v] = true;
        }
        for (mono, c) in block_form.terms() {
            let mut exps = vec![0u32; model.n()];
            for (local, &e) in mono.exponents().iter().enumerate() {
                exps[vars[local]] = e;
            }
            assembled.add_term(exps, c * &weight);
        }
        parsed_blocks.push((vars, weight, block_form));
    }
    checks.push(
        "blocks-cover-variables",
        covered.iter().all(|&c| c),
        "every variable appears in exactly one block".into(),
    );
    checks.push(
        "blocks-reassemble-model",
        assembled == *model,
        "sum of weighted blocks equals the certified form".into(),
    );
    // 2. recompute histograms and convolve, value 0 only
    let mut conv_all: Vec<u128> = vec![0; modulus as usize];
    let mut conv_div: Vec<u128> = vec![0; modulus as usize];
    conv_all[0] = 1;
    conv_div[0] = 1;
    let big_mod = BigUint::from(modulus);
    for (vars, weight, block_form) in &parsed_blocks {
        let space = (modulus as u128)
            .checked_pow(vars.len() as u32)
            .filter(|&s| s <= MAX_VERIFY_POINTS)
            .context("block space too large for the verifier")?;
        let _ = space;
        let mut all = vec![0u64; modulus as usize];
        let mut divisible = vec![0u64; modulus as usize];
        let w_red = weight.mod_floor(&BigInt::from(modulus)).to_u64().unwrap();
        let mut coords = vec![0u64; vars.len()];
        loop {
            let x: Vec<BigUint> = coords.iter().map(|&c| BigUint::from(c)).collect();
            let v = forms::evaluate_big(block_form, &x, &big_mod)?
                .to_u64()
                .unwrap();
            all[v as usize] += 1;
            if coords.iter().all(|&c| c % p == 0) {
                // f(x) with x = p*y, y running over residues mod p^{m-1};
                // each such x is hit once in this walk
                divisible[v as usize] += 1;
            }
            let mut done = true;
            for i in (0..coords.len()).rev() {
                coords[i] += 1;
                if coords[i] == modulus {
                    coords[i] = 0;
                } else {
                    done = false;
                    break;
                }
            }
            if done {
                break;
            }
        }
        let convolve = |acc: &[u128], hist: &[u64]| -> Vec<u128> {
            let mut out = vec![0u128; modulus as usize];
            for (u, &count) in hist.iter().enumerate() {
                if count == 0 {
                    continue;
                }
                let shift = (w_red as u128 * u as u128 % modulus as u128) as u64;
                for (v, &base) in acc.iter().enumerate() {
                    let w = (v as u64 + shift) % modulus;
                    out[w as usize] += base * count as u128;
                }
            }
            out
        };
        conv_all = convolve(&conv_all, &all);
        conv_div = convolve(&conv_div, &divisible);
    }
    let primitive = conv_all[0] - conv_div[0];
    checks.push(
        "no-primitive-zero",
        primitive == 0,
        format!(
            "independent convolution: all {} minus divisible {} = {primitive}",
            conv_all[0], conv_div[0]
        ),
    );
    // 3. cross-check against the embedded ledger
    if let Some(ledger) = cert.get("ledger").filter(|v| !v.is_null()) {
        let claimed_all = field_str(ledger, "all_zeros")?.parse::<u128>()?;
        let claimed_div = field_str(ledger, "divisible_zeros")?.parse::<u128>()?;
        checks.push(
            "ledger-matches",
            claimed_all == conv_all[0] && claimed_div == conv_div[0],
            format!(
                "recomputed ({}, {}) vs embedded ({claimed_all}, {claimed_div})",
                conv_all[0], conv_div[0]
            ),
        );
    }
    Ok(())
}

fn verify_system_soluble(cert: &Value, checks: &mut Checks) -> Result<()> {
    let p = field_u64(cert, "p")?;
    let level = field_u64(cert, "level")? as u32;
    let modulus = BigUint::from(p).pow(level);
    let forms_list: Vec<Form> = field(cert, "forms")?
        .as_array()
        .context("forms array")?
        .iter()
        .map(|v| {
            v.as_str()
                .context("form strings")
                .and_then(|t| parse_form(t).map_err(Into::into))
        })
        .collect::<Result<_>>()?;
    let n = forms_list.iter().map(Form::n).max().unwrap_or(0);
    let vector = vector_field(cert, "vector")?;
    checks.push(
        "vector-length",
        vector.len() >= n,
        format!("{} coordinates for n = {n}", vector.len()),
    );
    let nonzero = !vector.iter().all(|c| (c % &modulus).is_zero());
    checks.push("vector-nontrivial", nonzero, "vector != 0 mod p^K".into());
    for (j, f) in forms_list.iter().enumerate() {
        let value = forms::evaluate_big(&f.extend_to(vector.len()), &vector, &modulus)?;
        checks.push(
            &format!("zero-of-form-{}", j + 1),
            value.is_zero(),
            format!("f_{}(vector) mod p^{level} = {value}", j + 1),
        );
    }
    Ok(())
}

pub(crate) fn cmd_verify(path: &PathBuf) -> Result<CommandResult> {
    let text =
        std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let mut cert: Value = serde_json::from_str(&text).context("certificate is not valid JSON")?;
    // reports like `terjanian` wrap the certificate they produced
    if let Some(inner) = cert.get("certificate").filter(|v| v.get("kind").is_some()) {
        cert = inner.clone();
    }
    let kind = field_str(&cert, "kind")?.to_string();
    let mut checks = Checks(Vec::new());
    let verdict = match kind.as_str() {
        "soluble" => {
            verify_soluble(&cert, &mut checks)?;
            None
        }
        "insoluble" => {
            verify_insoluble(&cert, &mut checks)?;
            None
        }
        "system-soluble" => {
            verify_system_soluble(&cert, &mut checks)?;
            None
        }
        "unknown" => Some((2u8, "nothing to verify: the report is Unknown".to_string())),
        other => Some((2u8, format!("no verifier for reports of kind {other:?}"))),
    };
    if let Some((exit, message)) = verdict {
        println!("{message}");
        let report = VerifyReport {
            schema_version: padic_forms::search::CERTIFICATE_SCHEMA_VERSION,
            kind: "verify".to_string(),
            target_kind: kind,
            checks: Vec::new(),
            verified: false,
        };
        return Ok(CommandResult {
            exit,
            json: serde_json::to_string_pretty(&report)? + "\n",
        });
    }
    let verified = checks.all_pass();
    for check in &checks.0 {
        println!(
            "{}: {} ({})",
            if check.pass { "pass" } else { "FAIL" },
            check.name,
            check.detail
        );
    }
    println!(
        "certificate {}",
        if verified { "verified" } else { "REJECTED" }
    );
    let report = VerifyReport {
        schema_version: padic_forms::search::CERTIFICATE_SCHEMA_VERSION,
        kind: "verify".to_string(),
        target_kind: kind,
        checks: checks.0,
        verified,
    };
    Ok(CommandResult {
        exit: u8::from(!verified),
        json: serde_json::to_string_pretty(&report)? + "\n",
    })
}
