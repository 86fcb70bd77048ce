//! Diagonal equations `c_1 x_1^d + ... + c_m x_m^d = 0` over `Q_p`.
//!
//! Instances are normalized by valuation classes before solving: common
//! p-content is divided out, then each coefficient's exponent is reduced
//! into `[0, d)` (the substitution `x_i -> p^t x_i` moves exponents by
//! multiples of d, so solubility is preserved). The solve itself is the
//! generic search-and-lift pipeline, with a documented escalation ceiling
//! `gamma = 2 v_p(d) + 1 + d * ceil(max_exponent / d)` on the level before
//! the honest Unknown.

use num_bigint::BigInt;
use num_traits::Zero;
use serde::Serialize;

use crate::arith::{self, Valuation};
use crate::forms::Form;
use crate::search::{self, Outcome, SearchError, SolveOptions};

pub type Result<T> = std::result::Result<T, SearchError>;

/// `c_1 x_1^d + ... + c_m x_m^d = 0` over `Q_p`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DiagonalInstance {
    pub coefficients: Vec<BigInt>,
    pub degree: u32,
    pub p: u64,
}

impl DiagonalInstance {
    pub fn new(coefficients: Vec<BigInt>, degree: u32, p: u64) -> Self {
        assert!(!coefficients.is_empty(), "need at least one coefficient");
        assert!(degree >= 2, "diagonal instances have degree >= 2");
        assert!(
            coefficients.iter().all(|c| !c.is_zero()),
            "coefficients must be nonzero"
        );
        DiagonalInstance {
            coefficients,
            degree,
            p,
        }
    }

    pub fn m(&self) -> usize {
        self.coefficients.len()
    }

    /// The form `sum c_i x_i^d`.
    pub fn to_form(&self) -> Form {
        let m = self.m();
        let mut f = Form::zero(m, self.degree);
        for (i, c) in self.coefficients.iter().enumerate() {
            let mut exps = vec![0u32; m];
            exps[i] = self.degree;
            f.add_term(exps, c.clone());
        }
        f
    }
}

/// A normalized instance: exponents in `[0, d)`, no common p-content, with
/// the index classes recorded.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct NormalizedDiagonal {
    #[serde(serialize_with = "serialize_bigints")]
    pub coefficients: Vec<BigInt>,
    pub degree: u32,
    pub p: u64,
    /// exponent v_p(c_i) after normalization, in [0, d)
    pub exponents: Vec<u32>,
    /// indices grouped by exponent class 0..d-1
    pub classes: Vec<Vec<usize>>,
    /// common p-content removed up front
    pub content_removed: u32,
    /// k_i: the substitution `x_i -> x_i / p^{k_i}` that reduced each
    /// exponent into its class (beyond the common content)
    pub downscales: Vec<u32>,
}

fn serialize_bigints<S: serde::Serializer>(
    v: &[BigInt],
    s: S,
) -> std::result::Result<S::Ok, S::Error> {
    use serde::ser::SerializeSeq;
    let mut seq = s.serialize_seq(Some(v.len()))?;
    for c in v {
        seq.serialize_element(&c.to_string())?;
    }
    seq.end()
}

impl NormalizedDiagonal {
    pub fn instance(&self) -> DiagonalInstance {
        DiagonalInstance::new(self.coefficients.clone(), self.degree, self.p)
    }
}

/// Write each `c_i = p^{a_i} u_i`, divide out the common content, and
/// rescale every exponent into its class `a_i mod d`. Solubility is
/// preserved by construction.
pub fn normalize(inst: &DiagonalInstance) -> NormalizedDiagonal {
    let p = inst.p;
    let d = inst.degree;
    let vals: Vec<u64> = inst
        .coefficients
        .iter()
        .map(|c| match arith::valuation(c, p) {
            Valuation::Finite(v) => v,
            Valuation::Infinite => unreachable!("nonzero coefficients"),
        })
        .collect();
    let common = *vals.iter().min().unwrap();
    let p_big = BigInt::from(p);
    let mut coefficients = Vec::with_capacity(inst.m());
    let mut exponents = Vec::with_capacity(inst.m());
    let mut downscales = Vec::with_capacity(inst.m());
    let mut classes = vec![Vec::new(); d as usize];
    for (i, c) in inst.coefficients.iter().enumerate() {
        let a = vals[i] - common;
        let reduced = (a % d as u64) as u32;
        // divide away the content and the multiples of d in the exponent
        let strip = (common + a - reduced as u64) as u32;
        coefficients.push(c / p_big.pow(strip));
        exponents.push(reduced);
        downscales.push(((a - reduced as u64) / d as u64) as u32);
        classes[reduced as usize].push(i);
    }
    NormalizedDiagonal {
        coefficients,
        degree: d,
        p,
        exponents,
        classes,
        content_removed: common as u32,
        downscales,
    }
}

/// The level ceiling before Unknown: deep enough to expose a liftable seed
/// for any unit-coefficient coordinate, and to cover the valuation classes
/// the instance actually has.
fn escalation_ceiling(norm: &NormalizedDiagonal) -> u32 {
    let d = norm.degree;
    let vp_d = arith::valuation(&BigInt::from(d), norm.p)
        .finite()
        .unwrap_or(0) as u32;
    let max_exp = norm.exponents.iter().copied().max().unwrap_or(0);
    2 * vp_d + 1 + d * max_exp.div_ceil(d)
}

/// Solve a diagonal instance: normalize, run the generic pipeline on the
/// normalized model with the diagonal escalation ceiling, then map the
/// certificate back to the input instance (composing the two
/// normalizations: `f(p^{s_i} x_i) = p^{shift} * model(x)`).
pub fn solve_diagonal(inst: &DiagonalInstance, opts: &SolveOptions) -> Result<Outcome> {
    let norm = normalize(inst);
    let gamma = escalation_ceiling(&norm);
    let mut solve_opts = opts.clone();
    solve_opts.level_max = gamma.max(1);
    let form = norm.instance().to_form();
    let inner = search::solve(&crate::forms::AnyForm::Single(form), inst.p, &solve_opts)?;
    remap_to_original(inst, &norm, inner)
}

/// Compose the diagonal exponent-class normalization with whatever
/// normalization the generic solve applied, and restate the outcome in
/// terms of the original instance.
fn remap_to_original(
    inst: &DiagonalInstance,
    norm: &NormalizedDiagonal,
    inner: Outcome,
) -> Result<Outcome> {
    use crate::search::NormalizationJson;
    let p = inst.p;
    let max_k = norm.downscales.iter().copied().max().unwrap_or(0);
    let outer_scales: Vec<u32> = norm.downscales.iter().map(|&k| max_k - k).collect();
    let outer_shift = norm.content_removed + inst.degree * max_k;
    let outer_trivial = outer_shift == 0 && outer_scales.iter().all(|&s| s == 0);
    if outer_trivial {
        return Ok(inner);
    }
    let original_form = inst.to_form();
    let original_text = original_form.to_string();
    let compose = |inner_norm: Option<NormalizationJson>, fallback_model: &str| {
        let (model, inner_shift, inner_scales) = match inner_norm {
            Some(nj) => (nj.normalized_form, nj.shift_total, nj.variable_scales),
            None => (fallback_model.to_string(), 0, vec![0u32; inst.m()]),
        };
        NormalizationJson {
            normalized_form: model,
            shift_total: outer_shift + inner_shift,
            variable_scales: outer_scales
                .iter()
                .zip(&inner_scales)
                .map(|(a, b)| a + b)
                .collect(),
        }
    };
    match inner {
        Outcome::Soluble(mut cert) => {
            let modulus = num_bigint::BigUint::from(p).pow(cert.level);
            let mapped: Vec<num_bigint::BigUint> = cert
                .vector_residues
                .iter()
                .zip(&outer_scales)
                .map(|(c, &s)| (c * num_bigint::BigUint::from(p).pow(s)) % &modulus)
                .collect();
            let check = crate::forms::evaluate_big(&original_form, &mapped, &modulus)?;
            if !check.is_zero() || mapped.iter().all(|c| c.is_zero()) {
                return Err(crate::lifting::LiftError::VerificationFailed.into());
            }
            let fallback = cert.form.clone();
            cert.normalization = Some(compose(cert.normalization.take(), &fallback));
            cert.trace.push(format!(
                "diagonal normalization: content p^{}, downscales {:?}",
                norm.content_removed, norm.downscales
            ));
            cert.vector = mapped.iter().map(|c| c.to_string()).collect();
            cert.vector_residues = mapped;
            cert.form = original_text;
            Ok(Outcome::Soluble(cert))
        }
        Outcome::Insoluble(mut cert) => {
            let fallback = cert.form.clone();
            cert.normalization = Some(compose(cert.normalization.take(), &fallback));
            cert.trace.push(format!(
                "diagonal normalization: content p^{}, downscales {:?}",
                norm.content_removed, norm.downscales
            ));
            cert.form = original_text;
            Ok(Outcome::Insoluble(cert))
        }
        Outcome::Unknown(mut report) => {
            report.form = original_text;
            Ok(Outcome::Unknown(report))
        }
    }
}

/// Outcome counters for the random-instance harness at `m = d^2 + 1`.
#[derive(Debug, Clone, Serialize)]
pub struct DiagonalHarnessReport {
    pub degree: u32,
    pub p: u64,
    pub trials: u64,
    pub soluble: u64,
    pub insoluble: u64,
    pub unknown: u64,
    /// coefficient vectors of non-soluble trials (expected empty)
    pub failures: Vec<Vec<String>>,
    /// certificates that failed independent re-evaluation (expected 0)
    pub reverify_failures: u64,
}

/// Solve `trials` random instances with `m = d^2 + 1` variables and
/// coefficients uniform in `[-p^3, p^3] \ {0}`; every certificate is
/// re-verified independently. All instances are expected soluble.
pub fn dl_property_harness(
    degree: u32,
    p: u64,
    trials: u64,
    seed: u64,
    opts: &SolveOptions,
) -> Result<DiagonalHarnessReport> {
    assert!(degree <= 4 && p <= 13, "desk guard: d <= 4, p <= 13");
    let m = (degree * degree + 1) as usize;
    let bound = (p as i64).pow(3);
    struct Acc {
        soluble: u64,
        insoluble: u64,
        unknown: u64,
        failures: Vec<(u64, Vec<String>)>,
        reverify_failures: u64,
        error: Option<SearchError>,
    }
    let mut acc = crate::exec::map_reduce(
        trials,
        |range| {
            let mut a = Acc {
                soluble: 0,
                insoluble: 0,
                unknown: 0,
                failures: Vec::new(),
                reverify_failures: 0,
                error: None,
            };
            for trial in range {
                let mut rng = crate::gen::rng_for_trial(seed, trial);
                let coeffs: Vec<BigInt> = (0..m)
                    .map(|_| BigInt::from(crate::gen::random_nonzero(bound, &mut rng)))
                    .collect();
                let inst = DiagonalInstance::new(coeffs.clone(), degree, p);
                match solve_diagonal(&inst, opts) {
                    Ok(Outcome::Soluble(cert)) => {
                        a.soluble += 1;
                        // independent re-check of the certificate vector
                        let modulus = num_bigint::BigUint::from(p).pow(cert.level);
                        let ok = crate::forms::evaluate_big(
                            &inst.to_form(),
                            &cert.vector_residues,
                            &modulus,
                        )
                        .map(|v| v.is_zero())
                        .unwrap_or(false);
                        if !ok {
                            a.reverify_failures += 1;
                        }
                    }
                    Ok(Outcome::Insoluble(_)) => {
                        a.insoluble += 1;
                        a.failures
                            .push((trial, coeffs.iter().map(|c| c.to_string()).collect()));
                    }
                    Ok(Outcome::Unknown(_)) => {
                        a.unknown += 1;
                        a.failures
                            .push((trial, coeffs.iter().map(|c| c.to_string()).collect()));
                    }
                    Err(e) => {
                        a.error = Some(e);
                        break;
                    }
                }
            }
            a
        },
        || Acc {
            soluble: 0,
            insoluble: 0,
            unknown: 0,
            failures: Vec::new(),
            reverify_failures: 0,
            error: None,
        },
        |mut a, mut b| {
            a.soluble += b.soluble;
            a.insoluble += b.insoluble;
            a.unknown += b.unknown;
            a.failures.append(&mut b.failures);
            a.reverify_failures += b.reverify_failures;
            if a.error.is_none() {
                a.error = b.error;
            }
            a
        },
    );
    if let Some(e) = acc.error {
        return Err(e);
    }
    acc.failures.sort_unstable();
    Ok(DiagonalHarnessReport {
        degree,
        p,
        trials,
        soluble: acc.soluble,
        insoluble: acc.insoluble,
        unknown: acc.unknown,
        failures: acc.failures.into_iter().map(|(_, c)| c).collect(),
        reverify_failures: acc.reverify_failures,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn inst(coeffs: &[i64], d: u32, p: u64) -> DiagonalInstance {
        DiagonalInstance::new(coeffs.iter().map(|&c| BigInt::from(c)).collect(), d, p)
    }

    #[test]
    fn normalize_examples() {
        // [1, p^2, p^4] at d = 2: all exponents even, everything class 0
        let n = normalize(&inst(&[1, 25, 625], 2, 5));
        assert_eq!(n.exponents, vec![0, 0, 0]);
        assert_eq!(n.coefficients, vec![BigInt::from(1); 3]);
        assert_eq!(n.classes[0], vec![0, 1, 2]);

        // [1, p] at d = 2 stays split across classes 0 and 1
        let n = normalize(&inst(&[1, 5], 2, 5));
        assert_eq!(n.exponents, vec![0, 1]);
        assert_eq!(n.classes[0], vec![0]);
        assert_eq!(n.classes[1], vec![1]);

        // [4, 8] at d = 3, p = 2: common content 4 removed, then 8 = 2^3
        // has exponent 1 left... exponents (0, 1)
        let n = normalize(&inst(&[4, 8], 3, 2));
        assert_eq!(n.content_removed, 2);
        assert_eq!(n.exponents, vec![0, 1]);
        assert_eq!(n.coefficients, vec![BigInt::from(1), BigInt::from(2)]);
    }

    #[test]
    fn normalization_is_idempotent() {
        let n = normalize(&inst(&[18, -12, 7], 3, 3));
        let again = normalize(&n.instance());
        assert_eq!(n.coefficients, again.coefficients);
        assert_eq!(n.exponents, again.exponents);
    }

    #[test]
    fn three_squares_mod_5_soluble() {
        match solve_diagonal(&inst(&[1, 1, 1], 2, 5), &SolveOptions::default()).unwrap() {
            Outcome::Soluble(cert) => {
                // the canonical first seed is (1, 0, 2): 1 + 4 = 5
                assert_eq!(cert.witness.seed, vec![1, 0, 2]);
            }
            other => panic!("expected soluble, got {}", other.kind()),
        }
    }

    #[test]
    fn rescaled_instances_map_certificates_back() {
        // [1, p^2, p^4] normalizes to [1, 1, 1]; the certificate must zero
        // the original instance
        let raw = inst(&[1, 25, 625], 2, 5);
        match solve_diagonal(&raw, &SolveOptions::default()).unwrap() {
            Outcome::Soluble(cert) => {
                let modulus = num_bigint::BigUint::from(5u32).pow(cert.level);
                let v = crate::forms::evaluate_big(&raw.to_form(), &cert.vector_residues, &modulus)
                    .unwrap();
                assert!(v.is_zero());
                let norm = cert.normalization.expect("composed normalization");
                assert_eq!(norm.variable_scales, vec![2, 1, 0]);
                assert_eq!(norm.shift_total, 4);
            }
            other => panic!("expected soluble, got {}", other.kind()),
        }
    }

    #[test]
    fn x2_minus_p_y2_insoluble() {
        for p in [3u64, 5, 7] {
            match solve_diagonal(&inst(&[1, -(p as i64)], 2, p), &SolveOptions::default()).unwrap()
            {
                Outcome::Insoluble(cert) => {
                    assert_eq!(cert.level, 2, "p = {p}");
                }
                other => panic!("expected insoluble at p = {p}, got {}", other.kind()),
            }
        }
    }

    #[test]
    fn five_fourth_powers_insoluble_mod_16() {
        // odd^4 = 1 mod 16; five odd terms cannot cancel mod 16
        match solve_diagonal(&inst(&[1, 1, 1, 1, 1], 4, 2), &SolveOptions::default()).unwrap() {
            Outcome::Insoluble(cert) => {
                assert_eq!(cert.level, 4);
                assert_eq!(cert.modulus, "16");
                assert_eq!(cert.method, "split-convolution");
            }
            other => panic!("expected insoluble, got {}", other.kind()),
        }
    }

    #[test]
    fn normalize_preserves_classification() {
        let raw = inst(&[45, -5, 10, 15], 2, 5); // content 5
        let normed = normalize(&raw).instance();
        let a = solve_diagonal(&raw, &SolveOptions::default()).unwrap();
        let b = solve_diagonal(&normed, &SolveOptions::default()).unwrap();
        assert_eq!(a.kind(), b.kind());
    }

    #[test]
    fn small_harness_runs_clean() {
        let report = dl_property_harness(2, 3, 10, 42, &SolveOptions::default()).unwrap();
        assert_eq!(report.soluble, 10);
        assert_eq!(report.reverify_failures, 0);
        assert!(report.failures.is_empty());
    }
}
