//! Systems of quadratic forms: rank distributions of linear combinations
//! over F_p (p odd), exact common-zero counts, the rank-stratified count
//! bound, and a nonsingular-seed solver over Z_p.
//!
//! The count bound reads: with N common zeros over F_p, N_R the number of
//! u in F_p^r whose combination has Gram rank R, and the hypothesis that
//! only u = 0 gives the zero combination,
//! `|N - p^{n-r}| <= sum_{1 <= t <= n/2} p^{n-r-t} N_{2t}`, evaluated in
//! exact rational arithmetic (the exponent can be negative).

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::Serialize;

use super::{QuadError, Result};
use crate::arith::PadicContext;
use crate::exec;
use crate::forms::{CompiledForm, Form};
use crate::lifting::{system_lift, SystemLiftWitness};
use crate::linalg;
use crate::search::{self, Guards, SolveOptions, CERTIFICATE_SCHEMA_VERSION};

/// r quadratic forms on n shared variables, with exact integer
/// coefficients (read over F_p or Z_p depending on the operation).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QuadSystem {
    n: usize,
    forms: Vec<Form>,
}

impl QuadSystem {
    pub fn new(forms: Vec<Form>) -> Result<Self> {
        if forms.is_empty() {
            return Err(QuadError::Search(search::SearchError::EmptySystem));
        }
        let n = forms.iter().map(Form::n).max().unwrap();
        let forms = forms
            .into_iter()
            .map(|f| {
                if f.degree() != 2 {
                    return Err(QuadError::NotQuadratic(f.degree()));
                }
                Ok(f.extend_to(n))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(QuadSystem { n, forms })
    }

    /// The empty system on `n` variables (every vector is a common zero).
    pub fn empty(n: usize) -> Self {
        QuadSystem {
            n,
            forms: Vec::new(),
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn r(&self) -> usize {
        self.forms.len()
    }

    pub fn forms(&self) -> &[Form] {
        &self.forms
    }

    /// Gram matrix of form `idx` over F_p (cross coefficients halved);
    /// requires p odd.
    pub fn gram_mod_p(&self, idx: usize, p: u64) -> Result<Vec<Vec<u64>>> {
        if p == 2 {
            return Err(QuadError::EvenCharacteristic);
        }
        let inv2 = linalg::inv_mod_p(2 % p, p);
        let n = self.n;
        let mut gram = vec![vec![0u64; n]; n];
        let p_big = BigInt::from(p);
        for (mono, c) in self.forms[idx].terms() {
            let c_red = num_integer::Integer::mod_floor(c, &p_big).to_u64().unwrap();
            let vars: Vec<(usize, u32)> = mono
                .exponents()
                .iter()
                .enumerate()
                .filter(|(_, &e)| e > 0)
                .map(|(i, &e)| (i, e))
                .collect();
            match vars.as_slice() {
                [(i, 2)] => gram[*i][*i] = c_red % p,
                [(i, 1), (j, 1)] => {
                    let half = crate::arith::mul_mod_u64(c_red, inv2, p);
                    gram[*i][*j] = half;
                    gram[*j][*i] = half;
                }
                _ => unreachable!("degree-2 monomials"),
            }
        }
        Ok(gram)
    }
}

/// Rank over F_p of the Gram matrix of `sum u_i Q_i` (p odd).
pub fn rank_mod_p(sys: &QuadSystem, u: &[u64], p: u64) -> Result<usize> {
    if p == 2 {
        return Err(QuadError::EvenCharacteristic);
    }
    assert_eq!(u.len(), sys.r(), "combination length");
    let n = sys.n();
    let mut acc = vec![vec![0u64; n]; n];
    for (idx, &coeff) in u.iter().enumerate() {
        if coeff % p == 0 {
            continue;
        }
        let gram = sys.gram_mod_p(idx, p)?;
        for i in 0..n {
            for j in 0..n {
                acc[i][j] = (acc[i][j] + crate::arith::mul_mod_u64(coeff % p, gram[i][j], p)) % p;
            }
        }
    }
    Ok(linalg::rank_mod(&acc, p))
}

/// `counts[R]` = number of u in F_p^r whose combination has rank R.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RankDistribution {
    pub p: u64,
    pub r: usize,
    pub n: usize,
    /// index R = 0..=n
    pub counts: Vec<u64>,
    /// the count-bound hypothesis: only u = 0 yields the zero combination
    pub only_zero_vanishes: bool,
}

/// Exact rank counts by enumeration of all p^r combinations (p odd).
pub fn rank_distribution(sys: &QuadSystem, p: u64, guards: &Guards) -> Result<RankDistribution> {
    if p == 2 {
        return Err(QuadError::EvenCharacteristic);
    }
    let r = sys.r();
    let n = sys.n();
    let total = (p as u128)
        .checked_pow(r as u32)
        .filter(|&t| t <= guards.max_points as u128);
    let Some(total) = total else {
        return Err(QuadError::GuardExceeded(format!(
            "{p}^{r} combinations exceed the guard"
        )));
    };
    // precompute the Gram matrices once
    let grams: Vec<Vec<Vec<u64>>> = (0..r)
        .map(|idx| sys.gram_mod_p(idx, p))
        .collect::<Result<_>>()?;
    let counts = exec::map_reduce(
        total as u64,
        |range| {
            let mut local = vec![0u64; n + 1];
            let mut u = vec![0u64; r];
            for flat in range {
                let mut rest = flat;
                for slot in u.iter_mut().rev() {
                    *slot = rest % p;
                    rest /= p;
                }
                let mut acc = vec![vec![0u64; n]; n];
                for (idx, &coeff) in u.iter().enumerate() {
                    if coeff == 0 {
                        continue;
                    }
                    for i in 0..n {
                        for j in 0..n {
                            acc[i][j] = (acc[i][j]
                                + crate::arith::mul_mod_u64(coeff, grams[idx][i][j], p))
                                % p;
                        }
                    }
                }
                local[linalg::rank_mod(&acc, p)] += 1;
            }
            local
        },
        || vec![0u64; n + 1],
        |mut a, b| {
            for (x, y) in a.iter_mut().zip(&b) {
                *x += y;
            }
            a
        },
    );
    Ok(RankDistribution {
        p,
        r,
        n,
        only_zero_vanishes: counts[0] == 1,
        counts,
    })
}

/// Exact number of common zeros of the system over F_p (including the
/// origin). The empty system counts the whole space.
pub fn count_common_zeros(sys: &QuadSystem, p: u64, guards: &Guards) -> Result<u64> {
    let n = sys.n();
    let total = (p as u128)
        .checked_pow(n as u32)
        .filter(|&t| t <= guards.max_points as u128);
    let Some(total) = total else {
        return Err(QuadError::GuardExceeded(format!(
            "{p}^{n} points exceed the guard"
        )));
    };
    if sys.r() == 0 {
        return Ok(total as u64);
    }
    let compiled: Vec<CompiledForm> = sys.forms.iter().map(|f| CompiledForm::new(f, p)).collect();
    let count = exec::map_reduce(
        total as u64,
        |range| {
            let mut coords = vec![0u64; n];
            let mut rest = range.start;
            for slot in coords.iter_mut().rev() {
                *slot = rest % p;
                rest /= p;
            }
            let mut local = 0u64;
            let mut idx = range.start;
            loop {
                if compiled.iter().all(|c| c.eval(&coords) == 0) {
                    local += 1;
                }
                idx += 1;
                if idx >= range.end {
                    break;
                }
                for c in coords.iter_mut().rev() {
                    *c += 1;
                    if *c == p {
                        *c = 0;
                    } else {
                        break;
                    }
                }
            }
            local
        },
        || 0u64,
        |a, b| a + b,
    );
    Ok(count)
}

fn pow_rational(p: u64, exp: i64) -> BigRational {
    let base = BigInt::from(p);
    if exp >= 0 {
        BigRational::from(base.pow(exp as u32))
    } else {
        BigRational::new(BigInt::one(), base.pow((-exp) as u32))
    }
}

fn rational_string(r: &BigRational) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// The count bound at one system, with every intermediate quantity.
#[derive(Debug, Clone, Serialize)]
pub struct CountBoundReport {
    pub p: u64,
    pub n: usize,
    pub r: usize,
    pub common_zeros: u64,
    /// p^{n-r}, exact rational
    pub center: String,
    /// |N - p^{n-r}|
    pub deviation: String,
    /// sum over t of p^{n-r-t} N_{2t}
    pub bound: String,
    pub holds: bool,
    pub rank_counts: Vec<u64>,
}

/// Evaluate the rank-stratified count bound. Errors with
/// `HypothesisFailed` when a nonzero combination vanishes.
pub fn verify_count_bound(sys: &QuadSystem, p: u64, guards: &Guards) -> Result<CountBoundReport> {
    let dist = rank_distribution(sys, p, guards)?;
    if !dist.only_zero_vanishes {
        return Err(QuadError::HypothesisFailed {
            vanishing: dist.counts[0],
        });
    }
    let zeros = count_common_zeros(sys, p, guards)?;
    let n = sys.n() as i64;
    let r = sys.r() as i64;
    let center = pow_rational(p, n - r);
    let deviation = (BigRational::from(BigInt::from(zeros)) - &center).abs();
    let mut bound = BigRational::zero();
    for t in 1..=(sys.n() / 2) {
        let count = dist.counts[2 * t];
        if count == 0 {
            continue;
        }
        bound += pow_rational(p, n - r - t as i64) * BigRational::from(BigInt::from(count));
    }
    Ok(CountBoundReport {
        p,
        n: sys.n(),
        r: sys.r(),
        common_zeros: zeros,
        center: rational_string(&center),
        deviation: rational_string(&deviation),
        holds: deviation <= bound,
        bound: rational_string(&bound),
        rank_counts: dist.counts,
    })
}

/// Outcome counters of a randomized count-bound harness run.
#[derive(Debug, Clone, Serialize)]
pub struct CountBoundHarnessReport {
    pub trials: u64,
    pub held: u64,
    /// systems sampled and discarded for failing the hypothesis
    pub discarded: u64,
    /// reports for any trials where the bound failed (expected empty)
    pub failures: Vec<CountBoundReport>,
}

/// Run the count bound on `trials` seeded random hypothesis-satisfying
/// systems with p drawn from `primes`, r <= max_r, n <= max_n.
pub fn count_bound_harness(
    primes: &[u64],
    trials: u64,
    max_r: usize,
    max_n: usize,
    seed: u64,
    guards: &Guards,
) -> Result<CountBoundHarnessReport> {
    use rand::Rng;
    struct Acc {
        held: u64,
        discarded: u64,
        failures: Vec<CountBoundReport>,
        error: Option<QuadError>,
    }
    let mut acc = exec::map_reduce(
        trials,
        |range| {
            let mut a = Acc {
                held: 0,
                discarded: 0,
                failures: Vec::new(),
                error: None,
            };
            'trial: for trial in range {
                let mut rng = crate::gen::rng_for_trial(seed, trial);
                loop {
                    let p = primes[rng.gen_range(0..primes.len())];
                    let r = rng.gen_range(1..=max_r);
                    let n = rng.gen_range(2..=max_n);
                    let sys = crate::gen::random_quad_system_mod_p(n, r, p, &mut rng);
                    match verify_count_bound(&sys, p, guards) {
                        Ok(report) => {
                            if report.holds {
                                a.held += 1;
                            } else {
                                a.failures.push(report);
                            }
                            continue 'trial;
                        }
                        Err(QuadError::HypothesisFailed { .. }) => {
                            a.discarded += 1;
                            continue; // resample within the same trial
                        }
                        Err(e) => {
                            a.error = Some(e);
                            break 'trial;
                        }
                    }
                }
            }
            a
        },
        || Acc {
            held: 0,
            discarded: 0,
            failures: Vec::new(),
            error: None,
        },
        |mut a, mut b| {
            a.held += b.held;
            a.discarded += b.discarded;
            a.failures.append(&mut b.failures);
            if a.error.is_none() {
                a.error = b.error;
            }
            a
        },
    );
    if let Some(e) = acc.error {
        return Err(e);
    }
    acc.failures
        .sort_by(|a, b| (a.p, a.n, a.r, a.common_zeros).cmp(&(b.p, b.n, b.r, b.common_zeros)));
    Ok(CountBoundHarnessReport {
        trials,
        held: acc.held,
        discarded: acc.discarded,
        failures: acc.failures,
    })
}

/// A lifted common zero of a quadratic system over Z_p.
#[derive(Debug, Clone, Serialize)]
pub struct SystemCertificate {
    pub schema_version: u32,
    pub kind: String,
    pub p: u64,
    /// precision K: the vector is a common zero mod p^K
    pub level: u32,
    pub modulus: String,
    pub forms: Vec<String>,
    pub vector: Vec<String>,
    pub pivot_columns: Vec<usize>,
    pub seed: Vec<i64>,
    pub trace: Vec<String>,
    #[serde(skip)]
    pub vector_residues: Vec<BigUint>,
}

#[derive(Debug, Clone, Serialize)]
pub struct SystemUnknown {
    pub schema_version: u32,
    pub kind: String,
    pub p: u64,
    pub forms: Vec<String>,
    pub budget: u64,
    pub trace: Vec<String>,
}

#[derive(Debug, Clone, Serialize)]
#[serde(untagged)]
pub enum SystemOutcome {
    Soluble(SystemCertificate),
    Unknown(SystemUnknown),
}

impl SystemOutcome {
    pub fn kind(&self) -> &str {
        match self {
            SystemOutcome::Soluble(_) => "system-soluble",
            SystemOutcome::Unknown(_) => "system-unknown",
        }
    }

    pub fn is_certified(&self) -> bool {
        matches!(self, SystemOutcome::Soluble(_))
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("serializable report");
        s.push('\n');
        s
    }
}

/// Best-effort solve of a quadratic system over Z_p: search F_p^n for a
/// common zero with rank-r Jacobian, lift it with the multivariate Newton
/// step, and re-verify. The search budget escalates twice before giving
/// up; an exhaustive search with no nonsingular seed is conclusive for
/// this method and reported Unknown immediately.
pub fn solve_system_qp(sys: &QuadSystem, p: u64, opts: &SolveOptions) -> Result<SystemOutcome> {
    let ctx = PadicContext::new(p, opts.precision)?;
    let mut trace: Vec<String> = Vec::new();
    // content normalization per form keeps Jacobian rows meaningful mod p
    let forms: Vec<Form> = sys
        .forms
        .iter()
        .map(|f| {
            let (g, shift) = crate::forms::normalize_content(f, p)?;
            if shift > 0 {
                trace.push(format!("divided p^{shift} out of {f}"));
            }
            Ok(g)
        })
        .collect::<Result<_>>()?;
    let forms_text: Vec<String> = sys.forms.iter().map(|f| f.to_string()).collect();
    let mut budget = opts.budget;
    for round in 0..3 {
        match crate::search::find_liftable_system_seed(
            &forms,
            p,
            1,
            budget,
            opts.seed,
            &opts.guards,
        )? {
            crate::search::SystemSeedSearch::Found(witness) => {
                let lifted = system_lift(&forms, &witness, &ctx, opts.precision)?;
                let modulus = ctx.modulus();
                for f in sys.forms.iter() {
                    let v = crate::forms::evaluate_big(f, &lifted, &modulus)?;
                    if !v.is_zero() {
                        return Err(QuadError::DecisionConflict);
                    }
                }
                trace.push(format!(
                    "nonsingular seed {:?} with pivots {:?}",
                    witness.seed, witness.pivot_columns
                ));
                return Ok(SystemOutcome::Soluble(build_system_certificate(
                    p,
                    opts.precision,
                    &modulus,
                    forms_text,
                    lifted,
                    &witness,
                    trace,
                )));
            }
            crate::search::SystemSeedSearch::ExhaustedNone => {
                trace.push("exhaustive: no common zero mod p with full-rank Jacobian".to_string());
                break;
            }
            crate::search::SystemSeedSearch::Inconclusive => {
                trace.push(format!("round {round}: no seed within budget {budget}"));
                budget = budget.saturating_mul(4);
            }
        }
    }
    Ok(SystemOutcome::Unknown(SystemUnknown {
        schema_version: CERTIFICATE_SCHEMA_VERSION,
        kind: "system-unknown".to_string(),
        p,
        forms: forms_text,
        budget,
        trace,
    }))
}

fn build_system_certificate(
    p: u64,
    precision: u32,
    modulus: &BigUint,
    forms_text: Vec<String>,
    vector: Vec<BigUint>,
    witness: &SystemLiftWitness,
    trace: Vec<String>,
) -> SystemCertificate {
    SystemCertificate {
        schema_version: CERTIFICATE_SCHEMA_VERSION,
        kind: "system-soluble".to_string(),
        p,
        level: precision,
        modulus: modulus.to_string(),
        forms: forms_text,
        vector: vector.iter().map(|c| c.to_string()).collect(),
        pivot_columns: witness.pivot_columns.clone(),
        seed: witness.seed.clone(),
        trace,
        vector_residues: vector,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::forms::parse_form;

    fn sys(texts: &[&str]) -> QuadSystem {
        QuadSystem::new(texts.iter().map(|t| parse_form(t).unwrap()).collect()).unwrap()
    }

    fn guards() -> Guards {
        Guards::default()
    }

    #[test]
    fn rank_examples() {
        let s = sys(&["x1^2 + x2^2"]);
        assert_eq!(rank_mod_p(&s, &[1], 3).unwrap(), 2);
        assert_eq!(rank_mod_p(&s, &[0], 3).unwrap(), 0);
        // Gram of x1*x2 over F_5 is [[0, 3], [3, 0]], rank 2
        let s2 = sys(&["x1^2", "x1*x2"]);
        assert_eq!(rank_mod_p(&s2, &[0, 1], 5).unwrap(), 2);
        assert!(matches!(
            rank_mod_p(&s2, &[0, 1], 2),
            Err(QuadError::EvenCharacteristic)
        ));
    }

    #[test]
    fn rank_distribution_examples() {
        let s = sys(&["x1^2 + x2^2"]);
        let dist = rank_distribution(&s, 3, &guards()).unwrap();
        assert_eq!(dist.counts, vec![1, 0, 2]);
        assert!(dist.only_zero_vanishes);
        assert_eq!(dist.counts.iter().sum::<u64>(), 3);
    }

    #[test]
    fn count_examples() {
        // only the origin: -1 is a non-residue mod 3
        assert_eq!(
            count_common_zeros(&sys(&["x1^2 + x2^2"]), 3, &guards()).unwrap(),
            1
        );
        // pairs with a zero coordinate
        assert_eq!(
            count_common_zeros(&sys(&["x1*x2"]), 3, &guards()).unwrap(),
            5
        );
        // empty system: the whole plane
        assert_eq!(
            count_common_zeros(&QuadSystem::empty(2), 3, &guards()).unwrap(),
            9
        );
    }

    #[test]
    fn worked_count_bound_is_tight() {
        // |1 - 3| = 2 and the bound is 3^{2-1-1} * N_2 = 2: equality
        let report = verify_count_bound(&sys(&["x1^2 + x2^2"]), 3, &guards()).unwrap();
        assert_eq!(report.common_zeros, 1);
        assert_eq!(report.center, "3");
        assert_eq!(report.deviation, "2");
        assert_eq!(report.bound, "2");
        assert!(report.holds);
    }

    #[test]
    fn hypothesis_failure_is_detected() {
        // duplicated form: u = (1, -1) gives the zero combination
        let s = sys(&["x1^2 + x2^2", "x1^2 + x2^2"]);
        assert!(matches!(
            verify_count_bound(&s, 3, &guards()),
            Err(QuadError::HypothesisFailed { .. })
        ));
    }

    #[test]
    fn solve_pair_in_nine_variables() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        let mut forms = Vec::new();
        for _ in 0..2 {
            let mut f = Form::zero(9, 2);
            for i in 0..9 {
                for j in i..9 {
                    let c = rng.gen_range(-9i64..=9);
                    if c != 0 {
                        let mut exps = vec![0u32; 9];
                        exps[i] += 1;
                        exps[j] += 1;
                        f.add_term(exps, BigInt::from(c));
                    }
                }
            }
            forms.push(f);
        }
        let system = QuadSystem::new(forms).unwrap();
        match solve_system_qp(&system, 5, &SolveOptions::default()).unwrap() {
            SystemOutcome::Soluble(cert) => {
                assert_eq!(cert.vector.len(), 9);
                let modulus = BigUint::from(5u32).pow(32);
                for f in system.forms() {
                    let v = crate::forms::evaluate_big(f, &cert.vector_residues, &modulus).unwrap();
                    assert!(v.is_zero());
                }
            }
            SystemOutcome::Unknown(u) => panic!("expected a certificate: {:?}", u.trace),
        }
    }

    #[test]
    fn rigid_system_reports_unknown() {
        // {x1^2, x2^2} has only the origin as common zero
        let s = sys(&["x1^2", "x2^2"]);
        match solve_system_qp(&s, 5, &SolveOptions::default()).unwrap() {
            SystemOutcome::Unknown(u) => {
                assert!(u.trace.iter().any(|t| t.contains("exhaustive")));
            }
            SystemOutcome::Soluble(_) => panic!("no nontrivial common zero exists"),
        }
    }
}
