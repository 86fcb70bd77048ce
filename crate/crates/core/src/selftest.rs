//! Built-in oracle-equivalence suites, runnable from the CLI.
//!
//! Each suite pits a fast route against an independently coded slow one:
//! split convolution against a naive full enumerator, Hilbert-symbol
//! formulas against primitive-zero counting, lift outputs against direct
//! evaluation, and the quadratic count bound against brute force. The
//! naive enumerators here are deliberately simple and share nothing with
//! the production enumeration kernels.

use num_bigint::{BigInt, BigUint};
use num_traits::{ToPrimitive, Zero};
use serde::Serialize;

use crate::arith;
use crate::diagonal::{self, DiagonalInstance};
use crate::forms::{AnyForm, Form};
use crate::quad;
use crate::search::{self, Guards, Outcome, SolveOptions};

#[derive(Debug, Clone, Serialize)]
pub struct SuiteResult {
    pub name: String,
    pub cases: u64,
    pub failures: u64,
    pub detail: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct SelftestReport {
    pub schema_version: u32,
    pub kind: String,
    pub seed: u64,
    pub suites: Vec<SuiteResult>,
    pub all_passed: bool,
}

/// Naive primitive-zero counter: walks all p^{m n} vectors with per-point
/// big-integer evaluation. Slow on purpose; keep the spaces small.
pub fn naive_primitive_zero_count(f: &Form, p: u64, m: u32) -> u128 {
    let modulus_u = arith::checked_pow_u64(p, m).expect("small modulus");
    let modulus = BigUint::from(modulus_u);
    let n = f.n();
    let mut coords = vec![0u64; n];
    let mut count = 0u128;
    loop {
        if coords.iter().any(|&c| c % p != 0) {
            let x: Vec<BigUint> = coords.iter().map(|&c| BigUint::from(c)).collect();
            let v = crate::forms::evaluate_big(f, &x, &modulus).unwrap();
            if v.is_zero() {
                count += 1;
            }
        }
        // odometer
        let mut pos = n;
        for i in (0..n).rev() {
            coords[i] += 1;
            if coords[i] == modulus_u {
                coords[i] = 0;
            } else {
                pos = i;
                break;
            }
        }
        if pos == n {
            return count;
        }
    }
}

fn split_vs_direct(seed: u64, trials: u64) -> SuiteResult {
    let guards = Guards::default();
    let mut failures = 0;
    for trial in 0..trials {
        let mut rng = crate::gen::rng_for_trial(seed ^ 0x5157, trial);
        let (split, p, m) = crate::gen::random_split_form(3u128.pow(8), &mut rng);
        let flat = split.to_form();
        let conv = search::split_zero_count(&split, p, m, &guards).unwrap();
        let direct = naive_primitive_zero_count(&flat, p, m);
        if conv != direct {
            failures += 1;
        }
    }
    SuiteResult {
        name: "split-convolution vs naive enumeration".into(),
        cases: trials,
        failures,
        detail: format!("{trials} random split forms, total space <= 3^8"),
    }
}

fn hilbert_vs_search(limit: i64) -> SuiteResult {
    let mut cases = 0;
    let mut failures = 0;
    for p in [2u64, 3, 5, 7] {
        for a in -limit..=limit {
            for b in -limit..=limit {
                if a == 0 || b == 0 {
                    continue;
                }
                cases += 1;
                if !hilbert_case_agrees(a, b, p) {
                    failures += 1;
                }
            }
        }
    }
    SuiteResult {
        name: "hilbert symbol vs primitive-zero search".into(),
        cases,
        failures,
        detail: format!("all pairs |a|,|b| <= {limit}, p in {{2,3,5,7}}"),
    }
}

/// Compare the Hilbert-symbol formula against primitive-zero counting for
/// `a x^2 + b y^2 - z^2`. Square factors of p are stripped first (the
/// symbol and isotropy only depend on square classes); the level is then
/// 2v+3 for p = 2 and 3 for odd p, which is deep enough that anisotropic
/// ternaries with unit-or-p coefficients have no primitive zero.
pub fn hilbert_case_agrees(a: i64, b: i64, p: u64) -> bool {
    let strip = |mut v: i64| {
        let pp = (p * p) as i64;
        while v % pp == 0 {
            v /= pp;
        }
        v
    };
    let (a_red, b_red) = (strip(a), strip(b));
    let symbol = arith::hilbert_symbol(&BigInt::from(a), &BigInt::from(b), p).unwrap();
    let m = if p == 2 {
        let v = [a_red, b_red]
            .iter()
            .map(|&c| arith::valuation(&BigInt::from(c), p).finite().unwrap() as u32)
            .max()
            .unwrap();
        2 * v + 3
    } else {
        3
    };
    let text = format!("{a_red}*x1^2 + {b_red}*x2^2 - x3^2").replace("+ -", "- ");
    let f = crate::forms::parse_form(&text).unwrap();
    let split = crate::forms::detect_split(&f);
    let count = match split {
        Some(s) => search::split_zero_count(&s, p, m, &Guards::default()).unwrap(),
        None => search::count_primitive_zeros_direct(&f, p, m, &Guards::default()).unwrap(),
    };
    (symbol == 1) == (count > 0)
}

fn lift_reverify(seed: u64, trials: u64) -> SuiteResult {
    use rand::Rng;
    let mut failures = 0;
    let opts = SolveOptions::default();
    for trial in 0..trials {
        let mut rng = crate::gen::rng_for_trial(seed ^ 0x11f7, trial);
        let p = [3u64, 5, 7][rng.gen_range(0..3)];
        let n = rng.gen_range(3..=5);
        let d = rng.gen_range(2..=3u32);
        let coeffs: Vec<BigInt> = (0..n)
            .map(|_| BigInt::from(crate::gen::random_nonzero(9, &mut rng)))
            .collect();
        let inst = DiagonalInstance::new(coeffs, d, p);
        match diagonal::solve_diagonal(&inst, &opts) {
            Ok(Outcome::Soluble(cert)) => {
                let modulus = BigUint::from(p).pow(cert.level);
                let ok =
                    crate::forms::evaluate_big(&inst.to_form(), &cert.vector_residues, &modulus)
                        .map(|v| v.is_zero() && !cert.vector_residues.iter().all(|c| c.is_zero()))
                        .unwrap_or(false);
                if !ok {
                    failures += 1;
                }
            }
            Ok(_) => {}
            Err(_) => failures += 1,
        }
    }
    SuiteResult {
        name: "lift outputs re-verify".into(),
        cases: trials,
        failures,
        detail: format!("{trials} random diagonal instances"),
    }
}

fn count_bound_quick(seed: u64, trials: u64) -> SuiteResult {
    let report =
        quad::count_bound_harness(&[3, 5], trials, 2, 5, seed ^ 0xcb, &Guards::default()).unwrap();
    SuiteResult {
        name: "rank-stratified count bound".into(),
        cases: trials,
        failures: trials - report.held,
        detail: format!(
            "{} hypothesis-satisfying systems, {} resampled",
            report.trials, report.discarded
        ),
    }
}

fn diagonal_vs_isotropy(seed: u64, trials: u64) -> SuiteResult {
    use rand::Rng;
    let mut failures = 0;
    for trial in 0..trials {
        let mut rng = crate::gen::rng_for_trial(seed ^ 0xd1a6, trial);
        let p = [2u64, 3, 5, 7][rng.gen_range(0..4)];
        let n = rng.gen_range(1..=4);
        let entries: Vec<BigInt> = (0..n)
            .map(|_| BigInt::from(crate::gen::random_nonzero(10, &mut rng)))
            .collect();
        let inst = DiagonalInstance::new(entries.clone(), 2, p);
        let q = quad::QuadForm::from_diagonal(&entries);
        let solve_side = diagonal::solve_diagonal(&inst, &SolveOptions::default()).unwrap();
        let iso_side = quad::isotropic_qp(&q, p, &quad::IsotropyOptions::default()).unwrap();
        let agree = match solve_side.kind() {
            "soluble" => iso_side.isotropic,
            "insoluble" => !iso_side.isotropic,
            _ => false, // Unknown counts as failure at these sizes
        };
        if !agree {
            failures += 1;
        }
    }
    SuiteResult {
        name: "diagonal d=2 vs quadratic isotropy".into(),
        cases: trials,
        failures,
        detail: format!("{trials} random diagonal quadratics, coeffs in [-10,10]"),
    }
}

/// Run the oracle-equivalence suites (reduced sizes; the full versions run
/// in the test suite). `quick` halves the trial counts.
pub fn run(seed: u64, quick: bool) -> SelftestReport {
    let scale = if quick { 1 } else { 2 };
    let suites = vec![
        split_vs_direct(seed, 15 * scale),
        hilbert_vs_search(6),
        lift_reverify(seed, 20 * scale),
        count_bound_quick(seed, 30 * scale),
        diagonal_vs_isotropy(seed, 25 * scale),
    ];
    let all_passed = suites.iter().all(|s| s.failures == 0);
    SelftestReport {
        schema_version: search::CERTIFICATE_SCHEMA_VERSION,
        kind: "selftest".into(),
        seed,
        suites,
        all_passed,
    }
}

/// Naive verification helper shared with the certificate tests: recompute
/// a value histogram by direct odometer enumeration.
pub fn naive_value_histogram(f: &Form, p: u64, m: u32) -> Vec<u64> {
    let modulus = arith::checked_pow_u64(p, m).expect("small modulus");
    let n = f.n();
    let mut hist = vec![0u64; modulus as usize];
    let mut coords = vec![0u64; n];
    let big_mod = BigUint::from(modulus);
    loop {
        let x: Vec<BigUint> = coords.iter().map(|&c| BigUint::from(c)).collect();
        let v = crate::forms::evaluate_big(f, &x, &big_mod).unwrap();
        hist[v.to_u64().unwrap() as usize] += 1;
        let mut pos = n;
        for i in (0..n).rev() {
            coords[i] += 1;
            if coords[i] == modulus {
                coords[i] = 0;
            } else {
                pos = i;
                break;
            }
        }
        if pos == n {
            return hist;
        }
    }
}

/// Classify a form by brute force at a fixed level: used by tests as a
/// second, independently coded enumerator.
pub fn naive_has_primitive_zero(f: &AnyForm, p: u64, m: u32) -> bool {
    naive_primitive_zero_count(&f.to_form(), p, m) > 0
}
