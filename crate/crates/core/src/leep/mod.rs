//! Compilation of a quadratic form over `Q_p(t_1..t_k)` with polynomial
//! coefficients into a system of quadratic forms over `Q_p`.
//!
//! Substituting `X_i = sum_{|alpha| <= D} c_{i,alpha} t^alpha` turns
//! `Q(X_1..X_n) = 0` into the requirement that every t-monomial coefficient
//! of the expansion vanishes. There are `N = n * C(D+k, k)` scalar unknowns
//! and `R = C(2D+d+k, k)` constraints, each a quadratic form in the c's;
//! `N/R` tends to `n / 2^k` as D grows, so when `n > 2^{k+2}` some D makes
//! `N > 4R` and the compiled system falls to the quadratic-system solver.
//! Solving over extensions of `Q_p` (which the general theory needs when
//! the residue field is small) is out of scope: instances whose base-field
//! solve fails are reported Unknown rather than escalated.

mod tpoly;

pub use tpoly::{monomials_up_to, TPoly};

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_traits::{One, Zero};
use serde::Serialize;
use thiserror::Error;

use crate::forms::{Form, FormsError};
use crate::quad::{solve_system_qp, QuadError, QuadSystem, SystemOutcome};
use crate::search::{SearchError, SolveOptions};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum LeepError {
    #[error(transparent)]
    Forms(#[from] FormsError),
    #[error(transparent)]
    Quad(#[from] QuadError),
    #[error(transparent)]
    Search(#[from] SearchError),
    #[error("no substitution degree D can make N > 4R for n = {n}, d = {d}, k = {k}")]
    NoFeasibleD { n: u64, d: u64, k: u64 },
    #[error("solution vector is zero mod p")]
    ZeroSolution,
    #[error("reconstructed solution fails at t-monomial {monomial}")]
    VerificationFailed { monomial: String },
    #[error("invalid input: {0}")]
    BadInput(String),
}

pub type Result<T> = std::result::Result<T, LeepError>;

fn binomial(top: u64, k: u64) -> u128 {
    // exact stepwise evaluation: each prefix product is divisible by i!
    let mut acc: u128 = 1;
    for i in 1..=k {
        acc = acc
            .checked_mul((top - k + i) as u128)
            .expect("binomial fits in u128");
        acc /= i as u128;
    }
    acc
}

/// `N = n (D+k)...(D+1) / k!`: the number of scalar unknowns when each X_i
/// is a polynomial of total degree at most D in k parameters.
pub fn count_n(n: u64, substitution_degree: u64, k: u64) -> u128 {
    n as u128 * binomial(substitution_degree + k, k)
}

/// `R = (2D+d+k)...(2D+d+1) / k!`: the number of t-monomial coefficients
/// that must vanish.
pub fn count_r(substitution_degree: u64, d: u64, k: u64) -> u128 {
    binomial(2 * substitution_degree + d + k, k)
}

/// Cutoff for the minimal-D scan; validated by the accompanying tests.
fn choose_cutoff(d: u64, k: u64) -> u64 {
    4 * (d + 1) * (1u64 << k)
}

/// Minimal `D >= 0` with `N > 4R`, or `None` when the limit `n / 2^k <= 4`
/// makes the inequality unachievable.
pub fn choose_min_d(n: u64, d: u64, k: u64) -> Option<u64> {
    (0..=choose_cutoff(d, k)).find(|&big_d| count_n(n, big_d, k) > 4 * count_r(big_d, d, k))
}

fn cross_slot(n: usize, i: usize, j: usize) -> usize {
    debug_assert!(i < j && j < n);
    i * (2 * n - i - 1) / 2 + (j - i - 1)
}

/// A quadratic form over `Q_p(t_1..t_k)` whose coefficients are integer
/// polynomials in the parameters, of total degree at most `d`. Stored as
/// the diagonal coefficients and the (unhalved) cross coefficients, so
/// everything stays integral.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FfQuadForm {
    n: usize,
    k: usize,
    d: u32,
    diag: Vec<TPoly>,
    cross: Vec<TPoly>,
}

impl FfQuadForm {
    /// Build from the upper-triangle entries in row-major order:
    /// (1,1), (1,2), ..., (1,n), (2,2), ..., (n,n).
    pub fn new(n: usize, k: usize, d: u32, upper: Vec<TPoly>) -> Result<Self> {
        if n == 0 || k == 0 {
            return Err(LeepError::BadInput("need n >= 1 and k >= 1".into()));
        }
        if upper.len() != n * (n + 1) / 2 {
            return Err(LeepError::BadInput(format!(
                "expected {} upper-triangle entries, got {}",
                n * (n + 1) / 2,
                upper.len()
            )));
        }
        let mut diag = Vec::with_capacity(n);
        let mut cross = Vec::with_capacity(n * (n - 1) / 2);
        let mut it = upper.into_iter();
        for i in 0..n {
            for j in i..n {
                let poly = it.next().unwrap();
                if poly.k() != k {
                    return Err(LeepError::BadInput("entry arity mismatch".into()));
                }
                if poly.total_degree() > d {
                    return Err(LeepError::BadInput(format!(
                        "entry ({}, {}) has degree {} > d = {}",
                        i + 1,
                        j + 1,
                        poly.total_degree(),
                        d
                    )));
                }
                if i == j {
                    diag.push(poly);
                } else {
                    cross.push(poly);
                }
            }
        }
        Ok(FfQuadForm {
            n,
            k,
            d,
            diag,
            cross,
        })
    }

    /// Parse the file format: a header line `n k d`, then one coefficient
    /// polynomial per line for each upper-triangle entry (1,1), (1,2), ...
    /// UTF-8, `#` comments, blank lines ignored.
    pub fn parse(text: &str) -> Result<Self> {
        let mut lines = text.lines().filter_map(|line| {
            let body = match line.find('#') {
                Some(cut) => &line[..cut],
                None => line,
            };
            let trimmed = body.trim();
            (!trimmed.is_empty()).then_some(trimmed.to_string())
        });
        let header = lines
            .next()
            .ok_or_else(|| LeepError::BadInput("missing header line `n k d`".into()))?;
        let parts: Vec<u64> = header
            .split_whitespace()
            .map(|w| {
                w.parse::<u64>()
                    .map_err(|_| LeepError::BadInput(format!("bad header field {w:?}")))
            })
            .collect::<Result<_>>()?;
        let [n, k, d] = parts.as_slice() else {
            return Err(LeepError::BadInput("header must be `n k d`".into()));
        };
        let (n, k, d) = (*n as usize, *k as usize, *d as u32);
        let expected = n * (n + 1) / 2;
        let mut entries = Vec::with_capacity(expected);
        for line in lines {
            entries.push(TPoly::parse(&line, k)?);
        }
        if entries.len() != expected {
            return Err(LeepError::BadInput(format!(
                "expected {expected} coefficient lines, got {}",
                entries.len()
            )));
        }
        FfQuadForm::new(n, k, d, entries)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn d(&self) -> u32 {
        self.d
    }

    /// Coefficient of `X_i X_j` (i <= j, 0-based): diagonal or cross.
    pub fn entry(&self, i: usize, j: usize) -> &TPoly {
        if i == j {
            &self.diag[i]
        } else {
            let (i, j) = (i.min(j), i.max(j));
            &self.cross[cross_slot(self.n, i, j)]
        }
    }

    /// Upper-triangle entries in file order, rendered.
    pub fn render_entries(&self) -> Vec<String> {
        let mut out = Vec::new();
        for i in 0..self.n {
            for j in i..self.n {
                out.push(self.entry(i, j).to_string());
            }
        }
        out
    }
}

/// Where one scalar unknown came from: the coefficient of `t^monomial` in
/// `X_{x_var + 1}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CoeffIndex {
    pub x_var: usize,
    pub t_monomial: Vec<u32>,
}

/// The compiled system plus the index maps needed to reconstruct
/// function-field solutions.
#[derive(Debug, Clone)]
pub struct ReductionResult {
    pub substitution_degree: u32,
    pub n_unknowns: usize,
    pub r_constraints: usize,
    /// one quadratic form per t-monomial of degree <= 2D+d, aligned with
    /// `t_monomials`; identically-zero constraints are kept
    pub constraints: Vec<Form>,
    pub t_monomials: Vec<Vec<u32>>,
    /// the X-monomial basis of degree <= D (graded order)
    pub basis: Vec<Vec<u32>>,
    pub coeff_index: Vec<CoeffIndex>,
}

impl ReductionResult {
    /// The solvable part: constraints that are not identically zero.
    pub fn nonzero_constraints(&self) -> Vec<Form> {
        self.constraints
            .iter()
            .filter(|f| !f.is_zero())
            .cloned()
            .collect()
    }
}

/// Substitute `X_i = sum_alpha c_{i,alpha} t^alpha` over monomials of
/// degree <= D and collect the coefficient of every t-monomial of
/// `Q(X_1..X_n)` as a quadratic form in the c's.
pub fn reduce(q: &FfQuadForm, substitution_degree: u32) -> ReductionResult {
    let basis = monomials_up_to(q.k, substitution_degree);
    let b = basis.len();
    let n_unknowns = q.n * b;
    let t_monomials = monomials_up_to(q.k, 2 * substitution_degree + q.d);
    let t_index: std::collections::BTreeMap<&Vec<u32>, usize> = t_monomials
        .iter()
        .enumerate()
        .map(|(idx, m)| (m, idx))
        .collect();
    let mut constraints = vec![Form::zero(n_unknowns, 2); t_monomials.len()];
    for i in 0..q.n {
        for j in i..q.n {
            let source = q.entry(i, j);
            if source.is_zero() {
                continue;
            }
            for (mu, coef) in source.terms() {
                for (ai, alpha) in basis.iter().enumerate() {
                    for (bi, beta) in basis.iter().enumerate() {
                        let gamma: Vec<u32> = mu
                            .iter()
                            .zip(alpha.iter().zip(beta))
                            .map(|(m, (a, bb))| m + a + bb)
                            .collect();
                        let slot = t_index[&gamma];
                        let a_var = i * b + ai;
                        let b_var = j * b + bi;
                        let mut exps = vec![0u32; n_unknowns];
                        exps[a_var] += 1;
                        exps[b_var] += 1;
                        constraints[slot].add_term(exps, coef.clone());
                    }
                }
            }
        }
    }
    let coeff_index = (0..q.n)
        .flat_map(|i| {
            basis.iter().map(move |m| CoeffIndex {
                x_var: i,
                t_monomial: m.clone(),
            })
        })
        .collect();
    ReductionResult {
        substitution_degree,
        n_unknowns,
        r_constraints: t_monomials.len(),
        constraints,
        t_monomials,
        basis,
        coeff_index,
    }
}

/// A reconstructed function-field solution, verified coefficient by
/// coefficient mod p^K.
#[derive(Debug, Clone)]
pub struct Reconstruction {
    pub x_polys: Vec<TPoly>,
    /// number of t-monomials checked to vanish
    pub verified_monomials: usize,
    /// some X_i is nonzero mod p
    pub nontrivial: bool,
}

/// Assemble `X_i(t)` from a solution vector mod p^K and verify that
/// `Q(X_1..X_n)` vanishes identically mod p^K, by direct polynomial
/// arithmetic (an independent route from the compiled system).
pub fn reconstruct(
    solution: &[BigUint],
    reduction: &ReductionResult,
    q: &FfQuadForm,
    p: u64,
    precision: u32,
) -> Result<Reconstruction> {
    if solution.len() != reduction.n_unknowns {
        return Err(LeepError::BadInput(format!(
            "solution length {} does not match N = {}",
            solution.len(),
            reduction.n_unknowns
        )));
    }
    let p_big = BigInt::from(p);
    if solution
        .iter()
        .all(|c| BigInt::from(c.clone()).mod_floor(&p_big).is_zero())
    {
        return Err(LeepError::ZeroSolution);
    }
    let modulus = BigInt::from(p).pow(precision);
    let b = reduction.basis.len();
    let x_polys: Vec<TPoly> = (0..q.n)
        .map(|i| {
            let mut poly = TPoly::zero(q.k);
            for (ai, alpha) in reduction.basis.iter().enumerate() {
                let c = BigInt::from(solution[i * b + ai].clone()).mod_floor(&modulus);
                poly.add_term(alpha.clone(), c);
            }
            poly
        })
        .collect();
    let mut value = TPoly::zero(q.k);
    for i in 0..q.n {
        for j in i..q.n {
            let source = q.entry(i, j);
            if source.is_zero() {
                continue;
            }
            let prod = x_polys[i].mul(&x_polys[j]).reduce_mod(&modulus);
            value = value.add(&source.mul(&prod)).reduce_mod(&modulus);
        }
    }
    if let Some((monomial, _)) = value.terms().find(|(_, c)| !c.is_zero()) {
        let rendered = monomial
            .iter()
            .enumerate()
            .filter(|(_, &e)| e > 0)
            .map(|(i, &e)| format!("t{}^{e}", i + 1))
            .collect::<Vec<_>>()
            .join("*");
        return Err(LeepError::VerificationFailed {
            monomial: if rendered.is_empty() {
                "1".to_string()
            } else {
                rendered
            },
        });
    }
    let nontrivial = x_polys
        .iter()
        .any(|x| x.terms().any(|(_, c)| !c.mod_floor(&p_big).is_zero()));
    Ok(Reconstruction {
        x_polys,
        verified_monomials: reduction.r_constraints,
        nontrivial,
    })
}

/// JSON-facing summary of a pipeline run.
#[derive(Debug, Clone, Serialize)]
pub struct LeepReport {
    pub schema_version: u32,
    pub kind: String,
    pub p: u64,
    pub n: usize,
    pub k: usize,
    pub d: u32,
    pub substitution_degree: u32,
    pub n_unknowns: usize,
    pub r_constraints: usize,
    pub nonzero_constraints: usize,
    pub coefficients: Vec<String>,
    pub coeff_index: Vec<CoeffIndex>,
    pub system_kind: String,
    /// the compiled system's certificate, when the solve succeeded
    #[serde(skip_serializing_if = "Option::is_none")]
    pub certificate: Option<crate::quad::SystemCertificate>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub x_polys: Option<Vec<String>>,
    pub trace: Vec<String>,
}

/// Full pipeline result: the reduction, the quadratic-system outcome, and
/// the verified reconstruction when a solution was found.
#[derive(Debug, Clone)]
pub struct LeepSolveResult {
    pub reduction: ReductionResult,
    pub system_outcome: SystemOutcome,
    pub reconstruction: Option<Reconstruction>,
}

impl LeepSolveResult {
    pub fn is_solved(&self) -> bool {
        self.reconstruction.as_ref().is_some_and(|r| r.nontrivial)
    }
}

/// Reduce at the minimal feasible D (or `d_override`), solve the compiled
/// system over `Z_p`, and reconstruct + verify the function-field solution.
pub fn solve_ff_quadratic(
    q: &FfQuadForm,
    p: u64,
    opts: &SolveOptions,
    d_override: Option<u32>,
) -> Result<LeepSolveResult> {
    let substitution_degree = match d_override {
        Some(d) => d,
        None => choose_min_d(q.n as u64, q.d as u64, q.k as u64).ok_or(LeepError::NoFeasibleD {
            n: q.n as u64,
            d: q.d as u64,
            k: q.k as u64,
        })? as u32,
    };
    let reduction = reduce(q, substitution_degree);
    let nonzero = reduction.nonzero_constraints();
    if nonzero.is_empty() {
        // Q is the zero form: any constant nonzero X works; handled as a
        // degenerate reconstruction from the all-ones vector
        let ones = vec![BigUint::one(); reduction.n_unknowns];
        let rec = reconstruct(&ones, &reduction, q, p, opts.precision)?;
        return Ok(LeepSolveResult {
            reduction,
            system_outcome: SystemOutcome::Unknown(crate::quad::SystemUnknown {
                schema_version: crate::search::CERTIFICATE_SCHEMA_VERSION,
                kind: "system-unknown".to_string(),
                p,
                forms: Vec::new(),
                budget: 0,
                trace: vec!["no nonzero constraints".to_string()],
            }),
            reconstruction: Some(rec),
        });
    }
    let system = QuadSystem::new(nonzero)?;
    let system_outcome = solve_system_qp(&system, p, opts)?;
    let reconstruction = match &system_outcome {
        SystemOutcome::Soluble(cert) => Some(reconstruct(
            &cert.vector_residues,
            &reduction,
            q,
            p,
            opts.precision,
        )?),
        SystemOutcome::Unknown(_) => None,
    };
    Ok(LeepSolveResult {
        reduction,
        system_outcome,
        reconstruction,
    })
}
