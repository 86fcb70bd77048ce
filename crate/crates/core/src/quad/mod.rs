//! Quadratic-form theory: diagonalization over the rationals, isotropy
//! decisions over `Q_p` via square classes and Hilbert symbols, and (in
//! [`system`]) rank stratification, zero counting and best-effort solving
//! of quadratic systems.
//!
//! Isotropy is decided exactly by the classical case analysis on a rational
//! diagonalization: dimension 1 never; dimension 2 iff `-d1 d2` is a
//! square; dimension 3 by a Hilbert condition; dimension 4 by discriminant
//! and Hasse invariant; dimension >= 5 always (u(Q_p) = 4); degenerate
//! forms via the radical. Witnesses come from a separately budgeted
//! search-and-lift pass, so the decision is exact even when the witness
//! times out.

mod system;

pub use system::{
    count_bound_harness, count_common_zeros, rank_distribution, rank_mod_p, solve_system_qp,
    verify_count_bound, CountBoundHarnessReport, CountBoundReport, QuadSystem, RankDistribution,
    SystemCertificate, SystemOutcome, SystemUnknown,
};

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::Serialize;
use thiserror::Error;

use crate::arith::{self, ArithError};
use crate::forms::{Form, FormsError};
use crate::lifting::LiftError;
use crate::search::{self, Outcome, SearchError, SolveOptions};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum QuadError {
    #[error(transparent)]
    Forms(#[from] FormsError),
    #[error(transparent)]
    Arith(#[from] ArithError),
    #[error(transparent)]
    Lift(#[from] LiftError),
    #[error(transparent)]
    Search(#[from] SearchError),
    #[error("expected a quadratic form, got degree {0}")]
    NotQuadratic(u32),
    #[error("rank operations over F_2 are not defined (Gram/rank correspondence breaks)")]
    EvenCharacteristic,
    #[error("guard exceeded: {0}")]
    GuardExceeded(String),
    #[error(
        "hypothesis failed: {vanishing} linear combinations vanish (need exactly the zero vector)"
    )]
    HypothesisFailed { vanishing: u64 },
    #[error("the symbolic decision and the search disagree; this is a bug")]
    DecisionConflict,
}

pub type Result<T> = std::result::Result<T, QuadError>;

/// A quadratic form as a symmetric rational Gram matrix plus its exact
/// integer source form: `Q(x) = x^T Gram x`, entry (i,j) being half the
/// cross coefficient.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadForm {
    n: usize,
    gram: Vec<BigRational>,
    source: Form,
}

impl QuadForm {
    pub fn from_form(f: &Form) -> Result<Self> {
        if f.degree() != 2 {
            return Err(QuadError::NotQuadratic(f.degree()));
        }
        let n = f.n();
        let mut gram = vec![BigRational::zero(); n * n];
        let half = BigRational::new(BigInt::one(), BigInt::from(2));
        for (mono, c) in f.terms() {
            let vars: Vec<(usize, u32)> = mono
                .exponents()
                .iter()
                .enumerate()
                .filter(|(_, &e)| e > 0)
                .map(|(i, &e)| (i, e))
                .collect();
            match vars.as_slice() {
                [(i, 2)] => gram[i * n + i] = BigRational::from(c.clone()),
                [(i, 1), (j, 1)] => {
                    let v = BigRational::from(c.clone()) * &half;
                    gram[i * n + j] = v.clone();
                    gram[j * n + i] = v;
                }
                _ => unreachable!("degree-2 monomials"),
            }
        }
        Ok(QuadForm {
            n,
            gram,
            source: f.clone(),
        })
    }

    /// Diagonal form `sum d_i x_i^2`.
    pub fn from_diagonal(entries: &[BigInt]) -> Self {
        let n = entries.len();
        let mut f = Form::zero(n, 2);
        for (i, d) in entries.iter().enumerate() {
            let mut exps = vec![0u32; n];
            exps[i] = 2;
            f.add_term(exps, d.clone());
        }
        QuadForm::from_form(&f).expect("diagonal quadratic")
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn gram(&self, i: usize, j: usize) -> &BigRational {
        &self.gram[i * self.n + j]
    }

    pub fn source_form(&self) -> &Form {
        &self.source
    }
}

/// Result of symmetric Gaussian elimination: `transform^T Gram transform`
/// is diagonal, exactly, over the rationals.
#[derive(Debug, Clone, PartialEq)]
pub struct Diagonalization {
    pub diagonal: Vec<BigRational>,
    /// n x n invertible, row-major; columns are the new basis vectors.
    pub transform: Vec<BigRational>,
}

struct RatMat {
    n: usize,
    a: Vec<BigRational>,
}

impl RatMat {
    fn identity(n: usize) -> Self {
        let mut a = vec![BigRational::zero(); n * n];
        for i in 0..n {
            a[i * n + i] = BigRational::one();
        }
        RatMat { n, a }
    }

    fn at(&self, i: usize, j: usize) -> &BigRational {
        &self.a[i * self.n + j]
    }

    fn set(&mut self, i: usize, j: usize, v: BigRational) {
        self.a[i * self.n + j] = v;
    }

    fn swap_cols(&mut self, i: usize, j: usize) {
        for r in 0..self.n {
            self.a.swap(r * self.n + i, r * self.n + j);
        }
    }

    fn add_col(&mut self, dst: usize, src: usize, factor: &BigRational) {
        for r in 0..self.n {
            let v = self.at(r, dst) + self.at(r, src) * factor;
            self.set(r, dst, v);
        }
    }
}

/// Diagonalize by congruence (degenerate forms allowed; zero rows yield
/// zero diagonal entries). Deterministic pivoting: first nonzero diagonal
/// entry, else the first column move that creates one.
pub fn diagonalize(q: &QuadForm) -> Diagonalization {
    let n = q.n;
    let mut g = RatMat {
        n,
        a: q.gram.clone(),
    };
    let mut t = RatMat::identity(n);
    let sym_swap = |g: &mut RatMat, i: usize, j: usize| {
        g.swap_cols(i, j);
        for c in 0..g.n {
            g.a.swap(i * g.n + c, j * g.n + c);
        }
    };
    let sym_add = |g: &mut RatMat, dst: usize, src: usize, factor: &BigRational| {
        g.add_col(dst, src, factor);
        for c in 0..g.n {
            let v = g.at(dst, c) + g.at(src, c) * factor;
            g.set(dst, c, v);
        }
    };
    for k in 0..n {
        if g.at(k, k).is_zero() {
            if let Some(l) = (k + 1..n).find(|&l| !g.at(l, l).is_zero()) {
                sym_swap(&mut g, k, l);
                t.swap_cols(k, l);
            } else {
                // no diagonal pivot; look for an off-diagonal entry and
                // fold it onto the diagonal: b_i += b_j gives 2 g_ij
                let mut found = None;
                'outer: for i in k..n {
                    for j in i + 1..n {
                        if !g.at(i, j).is_zero() {
                            found = Some((i, j));
                            break 'outer;
                        }
                    }
                }
                let Some((i, j)) = found else {
                    break; // remaining block is identically zero
                };
                let one = BigRational::one();
                sym_add(&mut g, i, j, &one);
                t.add_col(i, j, &one);
                if i != k {
                    sym_swap(&mut g, k, i);
                    t.swap_cols(k, i);
                }
            }
        }
        let pivot = g.at(k, k).clone();
        if pivot.is_zero() {
            continue;
        }
        for l in k + 1..n {
            if g.at(k, l).is_zero() {
                continue;
            }
            let factor = -(g.at(k, l) / &pivot);
            sym_add(&mut g, l, k, &factor);
            t.add_col(l, k, &factor);
        }
    }
    let diagonal = (0..n).map(|i| g.at(i, i).clone()).collect();
    Diagonalization {
        diagonal,
        transform: t.a,
    }
}

/// Integer representative of the square class of a nonzero rational:
/// numerator times denominator.
fn square_class_rep(r: &BigRational) -> BigInt {
    r.numer() * r.denom()
}

#[derive(Debug, Clone)]
pub struct IsotropyOptions {
    pub precision: u32,
    pub witness_budget: u64,
    pub witness_level_max: u32,
    pub seed: u64,
    pub guards: search::Guards,
}

impl Default for IsotropyOptions {
    fn default() -> Self {
        IsotropyOptions {
            precision: crate::arith::DEFAULT_PRECISION,
            witness_budget: 1 << 20,
            witness_level_max: 8,
            seed: 0,
            guards: search::Guards::default(),
        }
    }
}

/// An exact isotropy decision, with a re-verified witness vector mod p^K
/// when one was found within budget. `witness_exhausted` marks isotropy
/// decisions whose witness search timed out: the decision stands.
#[derive(Debug, Clone, Serialize)]
pub struct IsotropyDecision {
    pub p: u64,
    pub n: usize,
    pub isotropic: bool,
    /// which case of the classification decided
    pub reason: String,
    pub precision: u32,
    pub witness: Option<Vec<String>>,
    pub witness_exhausted: bool,
    #[serde(skip)]
    pub witness_residues: Option<Vec<BigUint>>,
}

fn radical_witness(q: &QuadForm, diag: &Diagonalization, idx: usize) -> Vec<BigInt> {
    // column idx of the transform is a nonzero vector in the radical;
    // clear denominators and divide out the content
    let n = q.n;
    let col: Vec<BigRational> = (0..n)
        .map(|r| diag.transform[r * n + idx].clone())
        .collect();
    let mut lcm = BigInt::one();
    for c in &col {
        lcm = lcm.lcm(c.denom());
    }
    let mut ints: Vec<BigInt> = col.iter().map(|c| (c * &lcm).to_integer()).collect();
    let mut gcd = BigInt::zero();
    for v in &ints {
        gcd = gcd.gcd(v);
    }
    if !gcd.is_zero() && !gcd.is_one() {
        for v in &mut ints {
            *v /= &gcd;
        }
    }
    ints
}

/// Decide whether `q` has a nontrivial zero over `Q_p`.
pub fn isotropic_qp(q: &QuadForm, p: u64, opts: &IsotropyOptions) -> Result<IsotropyDecision> {
    let ctx = arith::PadicContext::new(p, opts.precision)?;
    let diag = diagonalize(q);
    let zero_index = diag.diagonal.iter().position(|d| d.is_zero());

    // Degenerate: the radical provides an exact nontrivial zero.
    if let Some(idx) = zero_index {
        let witness_int = radical_witness(q, &diag, idx);
        let modulus = ctx.modulus();
        let witness: Vec<BigUint> = witness_int
            .iter()
            .map(|v| {
                v.mod_floor(&BigInt::from(modulus.clone()))
                    .to_biguint()
                    .unwrap()
            })
            .collect();
        let value = crate::forms::evaluate_big(&q.source, &witness, &modulus)?;
        if !value.is_zero() || witness.iter().all(|c| c.is_zero()) {
            return Err(QuadError::DecisionConflict);
        }
        return Ok(IsotropyDecision {
            p,
            n: q.n,
            isotropic: true,
            reason: "degenerate: radical vector".to_string(),
            precision: opts.precision,
            witness: Some(witness.iter().map(|c| c.to_string()).collect()),
            witness_exhausted: false,
            witness_residues: Some(witness),
        });
    }

    let reps: Vec<BigInt> = diag.diagonal.iter().map(square_class_rep).collect();
    let (isotropic, reason) = match q.n {
        0 => (false, "no variables".to_string()),
        1 => (false, "nondegenerate in one variable".to_string()),
        2 => {
            let m = -(&reps[0] * &reps[1]);
            let sq = arith::is_square(&m, p)?;
            (sq, format!("binary case: -d1*d2 square = {sq}"))
        }
        3 => {
            let a = -(&reps[0] * &reps[2]);
            let b = -(&reps[1] * &reps[2]);
            let h = arith::hilbert_symbol(&a, &b, p)?;
            (h == 1, format!("ternary Hilbert condition = {h}"))
        }
        4 => {
            let disc: BigInt = reps.iter().product();
            if !arith::is_square(&disc, p)? {
                (true, "quaternary: discriminant not a square".to_string())
            } else {
                let mut hasse = 1i32;
                for i in 0..4 {
                    for j in i + 1..4 {
                        hasse *= arith::hilbert_symbol(&reps[i], &reps[j], p)?;
                    }
                }
                let minus_one = BigInt::from(-1);
                let target = arith::hilbert_symbol(&minus_one, &minus_one, p)?;
                (
                    hasse == target,
                    format!("quaternary: square discriminant, hasse {hasse} vs (-1,-1) {target}"),
                )
            }
        }
        _ => (true, "five or more variables: u(Q_p) = 4".to_string()),
    };

    if !isotropic {
        return Ok(IsotropyDecision {
            p,
            n: q.n,
            isotropic: false,
            reason,
            precision: opts.precision,
            witness: None,
            witness_exhausted: false,
            witness_residues: None,
        });
    }

    // Witness: bounded primitive-zero search plus Hensel lifting on the
    // exact source form; the budget is separate from the decision.
    let solve_opts = SolveOptions {
        precision: opts.precision,
        level_max: opts.witness_level_max,
        budget: opts.witness_budget,
        seed: opts.seed,
        guards: opts.guards.clone(),
    };
    match search::solve(
        &crate::forms::AnyForm::Single(q.source.clone()),
        p,
        &solve_opts,
    )? {
        Outcome::Soluble(cert) => Ok(IsotropyDecision {
            p,
            n: q.n,
            isotropic: true,
            reason,
            precision: opts.precision,
            witness: Some(cert.vector.clone()),
            witness_exhausted: false,
            witness_residues: Some(cert.vector_residues),
        }),
        Outcome::Insoluble(_) => Err(QuadError::DecisionConflict),
        Outcome::Unknown(_) => Ok(IsotropyDecision {
            p,
            n: q.n,
            isotropic: true,
            reason,
            precision: opts.precision,
            witness: None,
            witness_exhausted: true,
            witness_residues: None,
        }),
    }
}

/// Outcome counters for the u-invariant harness: random nondegenerate
/// forms in `n` variables over `Q_p`, decided and (when isotropic)
/// witnessed.
#[derive(Debug, Clone, Serialize)]
pub struct UInvariantReport {
    pub p: u64,
    pub n: usize,
    pub trials: u64,
    pub isotropic: u64,
    pub anisotropic: u64,
    /// isotropy decisions whose witness search timed out (decision stands)
    pub witness_exhausted: u64,
    /// witnesses that failed independent re-evaluation (expected 0)
    pub witness_failures: u64,
}

/// Decide `trials` seeded random nondegenerate n-variable forms over Q_p
/// and re-verify every witness by independent evaluation.
pub fn u_invariant_harness(
    p: u64,
    n: usize,
    trials: u64,
    coeff_bound: i64,
    seed: u64,
    opts: &IsotropyOptions,
) -> Result<UInvariantReport> {
    struct Acc {
        isotropic: u64,
        anisotropic: u64,
        witness_exhausted: u64,
        witness_failures: u64,
        error: Option<QuadError>,
    }
    let acc = crate::exec::map_reduce(
        trials,
        |range| {
            let mut a = Acc {
                isotropic: 0,
                anisotropic: 0,
                witness_exhausted: 0,
                witness_failures: 0,
                error: None,
            };
            for trial in range {
                let mut rng = crate::gen::rng_for_trial(seed, trial);
                let q = crate::gen::random_nondegenerate_quad_form(n, coeff_bound, &mut rng);
                match isotropic_qp(&q, p, opts) {
                    Ok(dec) => {
                        if dec.isotropic {
                            a.isotropic += 1;
                            match dec.witness_residues {
                                Some(w) => {
                                    let modulus = BigUint::from(p).pow(opts.precision);
                                    let ok =
                                        crate::forms::evaluate_big(q.source_form(), &w, &modulus)
                                            .map(|v| v.is_zero() && !w.iter().all(|c| c.is_zero()))
                                            .unwrap_or(false);
                                    if !ok {
                                        a.witness_failures += 1;
                                    }
                                }
                                None => a.witness_exhausted += 1,
                            }
                        } else {
                            a.anisotropic += 1;
                        }
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
            isotropic: 0,
            anisotropic: 0,
            witness_exhausted: 0,
            witness_failures: 0,
            error: None,
        },
        |mut a, b| {
            a.isotropic += b.isotropic;
            a.anisotropic += b.anisotropic;
            a.witness_exhausted += b.witness_exhausted;
            a.witness_failures += b.witness_failures;
            if a.error.is_none() {
                a.error = b.error;
            }
            a
        },
    );
    if let Some(e) = acc.error {
        return Err(e);
    }
    Ok(UInvariantReport {
        p,
        n,
        trials,
        isotropic: acc.isotropic,
        anisotropic: acc.anisotropic,
        witness_exhausted: acc.witness_exhausted,
        witness_failures: acc.witness_failures,
    })
}
