//! Hensel lifting of approximate zeros to prescribed p-adic precision.
//!
//! Single forms use one Newton coordinate with the generalized criterion
//! `v_p(f(x)) >= 2e + 1`, where `e` is the smallest valuation of a partial
//! derivative at `x`; the 2-adic and small-p pipelines need seeds that are
//! singular mod p, so `e = 0` is not assumed. Systems require a common zero
//! mod p whose Jacobian has full rank r; the update then solves an r x r
//! unit system per level.

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_traits::{ToPrimitive, Zero};
use serde::Serialize;
use thiserror::Error;

use crate::arith::{self, ArithError, PadicContext, Valuation};
use crate::forms::{self, Form, FormsError};
use crate::linalg;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum LiftError {
    #[error(transparent)]
    Forms(#[from] FormsError),
    #[error(transparent)]
    Arith(#[from] ArithError),
    #[error("newton iteration stalled before reaching the target precision")]
    IterationStalled,
    #[error("lift output failed re-verification")]
    VerificationFailed,
    #[error("witness does not match the given system")]
    BadWitness,
}

pub type Result<T> = std::result::Result<T, LiftError>;

/// Why a seed cannot be lifted, with the achieved valuations for
/// diagnostics.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub enum NotLiftableReason {
    /// Every coordinate of the seed is divisible by p.
    NotPrimitive,
    /// All partial derivatives vanish at the seed.
    ZeroGradient,
    /// `v(f) < 2e + 1` at the best coordinate.
    InsufficientValuation {
        value_valuation: Option<u64>,
        derivative_valuation: u32,
        required: u64,
    },
}

/// A seed that Hensel lifting is guaranteed to refine: `f(seed) = 0 mod
/// p^level` with `level >= 2e + 1`, where `e` is the valuation of the
/// chosen partial derivative.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct LiftWitness {
    pub seed: Vec<i64>,
    /// Exact `v_p(f(seed))`; `None` when the seed is an exact integer zero.
    pub level: Option<u64>,
    /// Newton coordinate (smallest index among those of minimal valuation).
    pub index: usize,
    /// `e = v_p(df/dx_index(seed))`.
    pub derivative_valuation: u32,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LiftCheck {
    Liftable(LiftWitness),
    NotLiftable(NotLiftableReason),
}

impl LiftCheck {
    pub fn witness(self) -> Option<LiftWitness> {
        match self {
            LiftCheck::Liftable(w) => Some(w),
            LiftCheck::NotLiftable(_) => None,
        }
    }
}

fn seed_to_bigint(seed: &[i64]) -> Vec<BigInt> {
    seed.iter().map(|&v| BigInt::from(v)).collect()
}

fn is_primitive(seed: &[i64], p: u64) -> bool {
    seed.iter().any(|&v| v.unsigned_abs() % p != 0)
}

/// Decide liftability of `x` for `f`, picking the coordinate that
/// minimizes the derivative valuation (ties: smallest index, so
/// certificates are deterministic).
pub fn liftability_check(f: &Form, x: &[i64], p: u64) -> Result<LiftCheck> {
    if x.len() != f.n() {
        return Err(FormsError::DimensionMismatch {
            expected: f.n(),
            got: x.len(),
        }
        .into());
    }
    if !is_primitive(x, p) {
        return Ok(LiftCheck::NotLiftable(NotLiftableReason::NotPrimitive));
    }
    let x_big = seed_to_bigint(x);
    let value = forms::evaluate_exact(f, &x_big)?;
    let grad = forms::gradient_exact(f, &x_big)?;
    let mut best: Option<(u32, usize)> = None;
    for (i, g) in grad.iter().enumerate() {
        if let Valuation::Finite(e) = arith::valuation(g, p) {
            let e = e as u32;
            if best.is_none_or(|(be, _)| e < be) {
                best = Some((e, i));
            }
        }
    }
    let Some((e, index)) = best else {
        return Ok(LiftCheck::NotLiftable(NotLiftableReason::ZeroGradient));
    };
    let required = 2 * e as u64 + 1;
    let v = arith::valuation(&value, p);
    if v.at_least(required) {
        Ok(LiftCheck::Liftable(LiftWitness {
            seed: x.to_vec(),
            level: v.finite(),
            index,
            derivative_valuation: e,
        }))
    } else {
        Ok(LiftCheck::NotLiftable(
            NotLiftableReason::InsufficientValuation {
                value_valuation: v.finite(),
                derivative_valuation: e,
                required,
            },
        ))
    }
}

fn reduce_seed(seed: &[i64], modulus: &BigUint) -> Vec<BigUint> {
    let m = BigInt::from(modulus.clone());
    seed.iter()
        .map(|&v| BigInt::from(v).mod_floor(&m).to_biguint().unwrap())
        .collect()
}

fn partial_derivative_big(f: &Form, index: usize, x: &[BigUint], modulus: &BigUint) -> BigUint {
    let m = BigInt::from(modulus.clone());
    let mut acc = BigInt::zero();
    for (mono, c) in f.terms() {
        let e = mono.exponents()[index];
        if e == 0 {
            continue;
        }
        let mut t = (c * BigInt::from(e)).mod_floor(&m);
        for (j, &ej) in mono.exponents().iter().enumerate() {
            let mut rem = ej;
            if j == index {
                rem -= 1;
            }
            let xj = BigInt::from(x[j].clone());
            for _ in 0..rem {
                t = (t * &xj).mod_floor(&m);
            }
        }
        acc = (acc + t).mod_floor(&m);
    }
    acc.to_biguint().unwrap()
}

fn residue_valuation(r: &BigUint, p: u64) -> Option<u64> {
    arith::valuation(&BigInt::from(r.clone()), p).finite()
}

/// Newton iteration on coordinate `w.index`, fixing every other
/// coordinate. Converges quadratically in the level; the output satisfies
/// `f(y) = 0 mod p^target` and `y = seed mod p^{e+1}`, both re-verified.
pub fn hensel_lift(
    f: &Form,
    w: &LiftWitness,
    ctx: &PadicContext,
    target: u32,
) -> Result<Vec<BigUint>> {
    let target_modulus = ctx.modulus_at(target)?;
    if w.seed.len() != f.n() {
        return Err(LiftError::BadWitness);
    }
    let p = ctx.p();
    if let Some(level) = w.level {
        if level >= target as u64 {
            return Ok(reduce_seed(&w.seed, &target_modulus));
        }
    } else {
        // exact integer zero: nothing to refine
        return Ok(reduce_seed(&w.seed, &target_modulus));
    }
    let e = w.derivative_valuation;
    // Work with headroom so divisions by p^e never eat into the target
    // precision. Iterating until v(f(y)) >= target + e pins y modulo
    // p^target uniquely (the unique Z_p root congruent to the seed mod
    // p^{e+1}), so lifts taken to different precisions agree.
    let goal = target as u64 + e as u64;
    let work_exp = target + 2 * e + 2;
    let work = BigUint::from(p).pow(work_exp);
    let p_big = BigUint::from(p);
    let mut y = reduce_seed(&w.seed, &work);
    let max_iters = target as usize + e as usize + 4;
    let mut done = false;
    for _ in 0..max_iters {
        let value = forms::evaluate_big(f, &y, &work)?;
        let v = match residue_valuation(&value, p) {
            None => {
                done = true;
                break;
            }
            Some(v) => v,
        };
        if v >= goal {
            done = true;
            break;
        }
        let deriv = partial_derivative_big(f, w.index, &y, &work);
        let dv = residue_valuation(&deriv, p).ok_or(LiftError::IterationStalled)?;
        if dv != e as u64 {
            return Err(LiftError::IterationStalled);
        }
        let alpha = &value / p_big.pow(v as u32);
        let beta = &deriv / p_big.pow(e);
        let beta_inv =
            arith::inverse_mod_biguint(&beta, &work).ok_or(LiftError::IterationStalled)?;
        let step = (p_big.pow((v - e as u64) as u32) * alpha * beta_inv) % &work;
        // y_index += -step (mod work)
        let delta = (&work - step) % &work;
        y[w.index] = (&y[w.index] + delta) % &work;
    }
    if !done {
        // the loop bound is generous; reaching it means the witness lied
        let value = forms::evaluate_big(f, &y, &work)?;
        if !residue_valuation(&value, p).is_none_or(|v| v >= goal) {
            return Err(LiftError::IterationStalled);
        }
    }
    let result: Vec<BigUint> = y.into_iter().map(|c| c % &target_modulus).collect();
    // Re-verify: the certificate must stand on its own.
    let check = forms::evaluate_big(f, &result, &target_modulus)?;
    if !check.is_zero() {
        return Err(LiftError::VerificationFailed);
    }
    let stay = BigUint::from(p).pow((e + 1).min(target));
    let seed_red = reduce_seed(&w.seed, &stay);
    for (a, b) in result.iter().zip(&seed_red) {
        if a % &stay != *b {
            return Err(LiftError::VerificationFailed);
        }
    }
    Ok(result)
}

/// Why a system seed cannot be lifted.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub enum SystemNotLiftableReason {
    NotPrimitive,
    /// Some form does not vanish at the seed mod p.
    NonZeroValue {
        form_index: usize,
    },
    /// Jacobian rank over F_p is below the number of forms.
    RankDeficient {
        rank: usize,
        required: usize,
    },
}

/// A common zero mod p whose r x n Jacobian has rank r; `pivot_columns`
/// index an invertible r x r minor.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SystemLiftWitness {
    pub seed: Vec<i64>,
    pub pivot_columns: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SystemLiftCheck {
    Liftable(SystemLiftWitness),
    NotLiftable(SystemNotLiftableReason),
}

impl SystemLiftCheck {
    pub fn witness(self) -> Option<SystemLiftWitness> {
        match self {
            SystemLiftCheck::Liftable(w) => Some(w),
            SystemLiftCheck::NotLiftable(_) => None,
        }
    }
}

/// Check a common-zero seed for a system of forms: all values zero mod p
/// and Jacobian rank r (Gaussian elimination over F_p).
pub fn system_liftability_check(fs: &[Form], x: &[i64], p: u64) -> Result<SystemLiftCheck> {
    let r = fs.len();
    for f in fs {
        if x.len() != f.n() {
            return Err(FormsError::DimensionMismatch {
                expected: f.n(),
                got: x.len(),
            }
            .into());
        }
    }
    if !is_primitive(x, p) {
        return Ok(SystemLiftCheck::NotLiftable(
            SystemNotLiftableReason::NotPrimitive,
        ));
    }
    for (j, f) in fs.iter().enumerate() {
        if forms::evaluate(f, x, p)? != 0 {
            return Ok(SystemLiftCheck::NotLiftable(
                SystemNotLiftableReason::NonZeroValue { form_index: j },
            ));
        }
    }
    let mut jac: Vec<Vec<u64>> = fs
        .iter()
        .map(|f| forms::gradient(f, x, p))
        .collect::<forms::Result<_>>()?;
    let (rank, pivots) = linalg::row_reduce(&mut jac, p);
    if rank < r {
        return Ok(SystemLiftCheck::NotLiftable(
            SystemNotLiftableReason::RankDeficient { rank, required: r },
        ));
    }
    Ok(SystemLiftCheck::Liftable(SystemLiftWitness {
        seed: x.to_vec(),
        pivot_columns: pivots,
    }))
}

/// Level-by-level multivariate Newton on the pivot coordinates: at each
/// level the update solves the unit r x r Jacobian minor mod p. Output
/// satisfies `f_j(y) = 0 mod p^target` for every j, re-verified.
pub fn system_lift(
    fs: &[Form],
    w: &SystemLiftWitness,
    ctx: &PadicContext,
    target: u32,
) -> Result<Vec<BigUint>> {
    let target_modulus = ctx.modulus_at(target)?;
    let p = ctx.p();
    let r = fs.len();
    if w.pivot_columns.len() != r {
        return Err(LiftError::BadWitness);
    }
    // Jacobian pivot minor at the seed, inverted once mod p (it only
    // depends on the seed mod p).
    let jac: Vec<Vec<u64>> = fs
        .iter()
        .map(|f| forms::gradient(f, &w.seed, p))
        .collect::<forms::Result<_>>()?;
    let minor: Vec<Vec<u64>> = jac
        .iter()
        .map(|row| w.pivot_columns.iter().map(|&c| row[c]).collect())
        .collect();
    let minor_inv = linalg::invert_mod(&minor, p).ok_or(LiftError::BadWitness)?;
    let mut y = reduce_seed(&w.seed, &target_modulus);
    let p_big = BigUint::from(p);
    for level in 1..target {
        let step_modulus = p_big.pow(level + 1);
        let scale = p_big.pow(level);
        let mut residual = vec![0u64; r];
        let mut flat = true;
        for (j, f) in fs.iter().enumerate() {
            let val = forms::evaluate_big(f, &y, &step_modulus)?;
            let quotient = &val / &scale;
            debug_assert!((&val % &scale).is_zero(), "previous level not satisfied");
            residual[j] = (quotient % &p_big).to_u64().unwrap();
            flat &= residual[j] == 0;
        }
        if flat {
            continue;
        }
        let correction = linalg::mat_vec(&minor_inv, &residual, p);
        for (k, &col) in w.pivot_columns.iter().enumerate() {
            if correction[k] == 0 {
                continue;
            }
            // y_col -= p^level * correction mod target modulus
            let dec = (&scale * BigUint::from(correction[k])) % &target_modulus;
            y[col] = (&y[col] + (&target_modulus - dec)) % &target_modulus;
        }
    }
    for f in fs {
        if !forms::evaluate_big(f, &y, &target_modulus)?.is_zero() {
            return Err(LiftError::VerificationFailed);
        }
    }
    Ok(y)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::forms::parse_form;

    fn ctx(p: u64, k: u32) -> PadicContext {
        PadicContext::new(p, k).unwrap()
    }

    #[test]
    fn liftability_examples() {
        // 1 - 17 = -16: v = 4 >= 2*1 + 1
        let f = parse_form("x1^2 - 17*x2^2").unwrap();
        match liftability_check(&f, &[1, 1], 2).unwrap() {
            LiftCheck::Liftable(w) => {
                assert_eq!(w.index, 0);
                assert_eq!(w.derivative_valuation, 1);
                assert_eq!(w.level, Some(4));
            }
            other => panic!("expected witness, got {other:?}"),
        }

        // 14 = 0 mod 7, gradient (2,4,6) nonzero
        let g = parse_form("x1^2 + x2^2 + x3^2").unwrap();
        match liftability_check(&g, &[1, 2, 3], 7).unwrap() {
            LiftCheck::Liftable(w) => {
                assert_eq!(w.derivative_valuation, 0);
                assert_eq!(w.level, Some(1));
            }
            other => panic!("expected witness, got {other:?}"),
        }

        // v(f) = 1 < 3
        let h = parse_form("x1^2 + x2^2").unwrap();
        match liftability_check(&h, &[1, 1], 2).unwrap() {
            LiftCheck::NotLiftable(NotLiftableReason::InsufficientValuation {
                value_valuation,
                derivative_valuation,
                required,
            }) => {
                assert_eq!(value_valuation, Some(1));
                assert_eq!(derivative_valuation, 1);
                assert_eq!(required, 3);
            }
            other => panic!("expected insufficient valuation, got {other:?}"),
        }

        match liftability_check(&h, &[2, 4], 2).unwrap() {
            LiftCheck::NotLiftable(NotLiftableReason::NotPrimitive) => {}
            other => panic!("expected not-primitive, got {other:?}"),
        }
    }

    #[test]
    fn lift_two_adic_sqrt_17() {
        let f = parse_form("x1^2 - 17*x2^2").unwrap();
        let w = liftability_check(&f, &[1, 1], 2)
            .unwrap()
            .witness()
            .unwrap();
        let y = hensel_lift(&f, &w, &ctx(2, 12), 10).unwrap();
        let m = BigUint::from(1024u32);
        assert!(forms::evaluate_big(&f, &y, &m).unwrap().is_zero());
        // independent oracle: x^2 = 17 mod 2^10 is solvable by search
        let sq17 = (0u64..1024).find(|x| (x * x) % 1024 == 17);
        assert!(sq17.is_some());
    }

    #[test]
    fn lift_mod_7_to_high_precision() {
        let f = parse_form("x1^2 + x2^2 + x3^2").unwrap();
        let w = liftability_check(&f, &[1, 2, 3], 7)
            .unwrap()
            .witness()
            .unwrap();
        let y = hensel_lift(&f, &w, &ctx(7, 8), 6).unwrap();
        let m = BigUint::from(7u32).pow(6);
        assert!(forms::evaluate_big(&f, &y, &m).unwrap().is_zero());
        // y = seed mod p^{e+1} = mod 7
        assert_eq!(y[0].clone() % 7u32, BigUint::from(1u32));
        assert_eq!(y[1].clone() % 7u32, BigUint::from(2u32));
        assert_eq!(y[2].clone() % 7u32, BigUint::from(3u32));
    }

    #[test]
    fn lift_at_seed_level_returns_seed() {
        let f = parse_form("x1^2 - 17*x2^2").unwrap();
        let w = liftability_check(&f, &[1, 1], 2)
            .unwrap()
            .witness()
            .unwrap();
        let y = hensel_lift(&f, &w, &ctx(2, 12), 4).unwrap();
        assert_eq!(y, vec![BigUint::from(1u32), BigUint::from(1u32)]);
    }

    #[test]
    fn lift_is_idempotent_across_precisions() {
        let f = parse_form("x1^2 - 17*x2^2").unwrap();
        let w = liftability_check(&f, &[1, 1], 2)
            .unwrap()
            .witness()
            .unwrap();
        let y10 = hensel_lift(&f, &w, &ctx(2, 16), 10).unwrap();
        let y14 = hensel_lift(&f, &w, &ctx(2, 16), 14).unwrap();
        let m10 = BigUint::from(1u32) << 10;
        assert_eq!(y10[0].clone() % &m10, y14[0].clone() % &m10);
        assert_eq!(y10[1].clone() % &m10, y14[1].clone() % &m10);
    }

    #[test]
    fn precision_exhausted_is_reported() {
        let f = parse_form("x1^2 - 17*x2^2").unwrap();
        let w = liftability_check(&f, &[1, 1], 2)
            .unwrap()
            .witness()
            .unwrap();
        assert!(matches!(
            hensel_lift(&f, &w, &ctx(2, 8), 10),
            Err(LiftError::Arith(ArithError::PrecisionExhausted { .. }))
        ));
    }

    #[test]
    fn exact_zero_seed_passes_through() {
        let f = parse_form("x1^2 - x2^2").unwrap();
        let w = liftability_check(&f, &[1, 1], 5)
            .unwrap()
            .witness()
            .unwrap();
        assert_eq!(w.level, None);
        let y = hensel_lift(&f, &w, &ctx(5, 6), 6).unwrap();
        assert_eq!(y, vec![BigUint::from(1u32), BigUint::from(1u32)]);
    }

    #[test]
    fn system_witness_and_lift() {
        // values (0,0) at (1,1,1) mod 5; Jacobian rows (1,-2,1), (2,-1,-1)
        let f1 = parse_form("x1*x3 - x2^2").unwrap();
        let f2 = parse_form("x1^2 - x2*x3").unwrap();
        let fs = vec![f1, f2];
        let w = match system_liftability_check(&fs, &[1, 1, 1], 5).unwrap() {
            SystemLiftCheck::Liftable(w) => w,
            other => panic!("expected witness, got {other:?}"),
        };
        assert_eq!(w.pivot_columns.len(), 2);
        let y = system_lift(&fs, &w, &ctx(5, 6), 4).unwrap();
        let m = BigUint::from(625u32);
        for f in &fs {
            assert!(forms::evaluate_big(f, &y, &m).unwrap().is_zero());
        }
    }

    #[test]
    fn duplicate_forms_are_rank_deficient() {
        let f1 = parse_form("x1^2 - x2*x3").unwrap();
        let fs = vec![f1.clone(), f1];
        match system_liftability_check(&fs, &[1, 1, 1], 5).unwrap() {
            SystemLiftCheck::NotLiftable(SystemNotLiftableReason::RankDeficient {
                rank,
                required,
            }) => {
                assert_eq!(rank, 1);
                assert_eq!(required, 2);
            }
            other => panic!("expected rank-deficient, got {other:?}"),
        }
    }

    #[test]
    fn system_lift_at_level_one_returns_seed() {
        let f1 = parse_form("x1*x3 - x2^2").unwrap();
        let f2 = parse_form("x1^2 - x2*x3").unwrap();
        let fs = vec![f1, f2];
        let w = system_liftability_check(&fs, &[1, 1, 1], 5)
            .unwrap()
            .witness()
            .unwrap();
        let y = system_lift(&fs, &w, &ctx(5, 6), 1).unwrap();
        assert_eq!(y, vec![BigUint::from(1u32); 3]);
    }

    #[test]
    fn planted_diagonal_systems_lift_and_reverify() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(42);
        let p = 7u64;
        let context = ctx(p, 8);
        let mut successes = 0;
        for _ in 0..100 {
            // diagonal quadratic pair with a planted nonsingular zero
            let n = 5usize;
            let zero: Vec<i64> = (0..n).map(|_| rng.gen_range(1..p as i64)).collect();
            let mut fs = Vec::new();
            for _ in 0..2 {
                let mut coeffs: Vec<i64> = (0..n).map(|_| rng.gen_range(1..p as i64)).collect();
                // adjust the last coefficient so the planted point is a zero mod p
                let partial: i64 = coeffs[..n - 1]
                    .iter()
                    .zip(&zero)
                    .map(|(c, z)| c * z * z)
                    .sum();
                let zn2 = zero[n - 1] * zero[n - 1];
                let zn2_inv = crate::linalg::inv_mod_p((zn2 % p as i64) as u64, p);
                let needed = ((p as i64 - partial.rem_euclid(p as i64)) % p as i64) as u64;
                coeffs[n - 1] = crate::arith::mul_mod_u64(needed, zn2_inv, p) as i64;
                if coeffs[n - 1] == 0 {
                    coeffs[n - 1] = p as i64;
                }
                let text: Vec<String> = coeffs
                    .iter()
                    .enumerate()
                    .map(|(i, c)| format!("{}*x{}^2", c, i + 1))
                    .collect();
                fs.push(parse_form(&text.join(" + ")).unwrap());
            }
            if let SystemLiftCheck::Liftable(w) = system_liftability_check(&fs, &zero, p).unwrap() {
                let y = system_lift(&fs, &w, &context, 6).unwrap();
                let m = BigUint::from(p).pow(6);
                for f in &fs {
                    assert!(forms::evaluate_big(f, &y, &m).unwrap().is_zero());
                }
                successes += 1;
            }
        }
        // most random diagonal pairs give independent gradient rows
        assert!(successes >= 80, "only {successes} witnesses found");
    }
}
