//! Exact arithmetic foundations: primality, p-adic valuations, residues
//! modulo prime powers, square classes and Hilbert symbols.
//!
//! All user-facing coefficients are exact integers; rational inputs are
//! cleared to integers by the callers (multiplying a form through by a
//! denominator does not change its zero set). Hilbert symbols are computed
//! by the classical case formulas over square classes, never by search.

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ArithError {
    #[error("{0} is not prime")]
    NotPrime(u64),
    #[error("precision must be at least 1")]
    InvalidPrecision,
    #[error("argument is divisible by p, hence not a unit")]
    NotAUnit,
    #[error("operation requires an odd prime")]
    UnsupportedPrime,
    #[error("zero input where a nonzero value is required")]
    ZeroInput,
    #[error("requested precision {requested} exceeds the context bound {available}")]
    PrecisionExhausted { requested: u32, available: u32 },
}

pub type Result<T> = std::result::Result<T, ArithError>;

/// Deterministic Miller-Rabin for u64 (the witness set below is exact for
/// all 64-bit integers).
pub fn is_prime_u64(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    for &q in &[2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        if n == q {
            return true;
        }
        if n.is_multiple_of(q) {
            return false;
        }
    }
    let mut d = n - 1;
    let mut s = 0u32;
    while d.is_multiple_of(2) {
        d /= 2;
        s += 1;
    }
    'witness: for &a in &[2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        let mut x = pow_mod_u64(a % n, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mul_mod_u64(x, x, n);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

#[inline]
pub(crate) fn mul_mod_u64(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

pub(crate) fn pow_mod_u64(mut base: u64, mut exp: u64, m: u64) -> u64 {
    if m == 1 {
        return 0;
    }
    let mut acc = 1u64;
    base %= m;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = mul_mod_u64(acc, base, m);
        }
        exp >>= 1;
        base = mul_mod_u64(base, base, m);
    }
    acc
}

/// `p^k` as a `u64`, or `None` on overflow.
pub(crate) fn checked_pow_u64(p: u64, k: u32) -> Option<u64> {
    let mut acc = 1u64;
    for _ in 0..k {
        acc = acc.checked_mul(p)?;
    }
    Some(acc)
}

/// A prime together with a working precision: computations in this context
/// take place in `Z/p^K`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PadicContext {
    p: u64,
    precision: u32,
}

pub const DEFAULT_PRECISION: u32 = 32;

impl PadicContext {
    /// Checks primality deterministically; `precision` must be >= 1.
    pub fn new(p: u64, precision: u32) -> Result<Self> {
        if !is_prime_u64(p) {
            return Err(ArithError::NotPrime(p));
        }
        if precision == 0 {
            return Err(ArithError::InvalidPrecision);
        }
        Ok(PadicContext { p, precision })
    }

    pub fn with_default_precision(p: u64) -> Result<Self> {
        Self::new(p, DEFAULT_PRECISION)
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn precision(&self) -> u32 {
        self.precision
    }

    /// `p^K`.
    pub fn modulus(&self) -> BigUint {
        BigUint::from(self.p).pow(self.precision)
    }

    /// `p^k`, checking `k` against the context precision.
    pub fn modulus_at(&self, k: u32) -> Result<BigUint> {
        if k > self.precision {
            return Err(ArithError::PrecisionExhausted {
                requested: k,
                available: self.precision,
            });
        }
        Ok(BigUint::from(self.p).pow(k))
    }
}

/// The p-adic valuation of an integer; `Infinite` only for zero.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Valuation {
    Finite(u64),
    Infinite,
}

impl Valuation {
    pub fn finite(self) -> Option<u64> {
        match self {
            Valuation::Finite(v) => Some(v),
            Valuation::Infinite => None,
        }
    }

    pub fn is_infinite(self) -> bool {
        matches!(self, Valuation::Infinite)
    }

    /// `self >= other` in the order where `Infinite` dominates everything.
    pub fn at_least(self, bound: u64) -> bool {
        match self {
            Valuation::Finite(v) => v >= bound,
            Valuation::Infinite => true,
        }
    }
}

/// Largest `e` with `p^e | a`; `a = 0` reports `Infinite` rather than a
/// number.
pub fn valuation(a: &BigInt, p: u64) -> Valuation {
    if a.is_zero() {
        return Valuation::Infinite;
    }
    let p_big = BigInt::from(p);
    let mut rest = a.abs();
    let mut v = 0u64;
    loop {
        let (q, r) = rest.div_rem(&p_big);
        if !r.is_zero() {
            return Valuation::Finite(v);
        }
        rest = q;
        v += 1;
    }
}

/// Inverse of `a` modulo `p^K`. Errors with `NotAUnit` when `p | a`.
pub fn inverse_mod_prime_power(a: &BigInt, p: u64, precision: u32) -> Result<BigUint> {
    let modulus = BigInt::from(p).pow(precision);
    let a_red = a.mod_floor(&modulus);
    if (&a_red % BigInt::from(p)).is_zero() {
        return Err(ArithError::NotAUnit);
    }
    let ext = a_red.extended_gcd(&modulus);
    debug_assert!(ext.gcd.is_one());
    let inv = ext.x.mod_floor(&modulus);
    Ok(inv.to_biguint().expect("reduced residue is nonnegative"))
}

pub(crate) fn inverse_mod_biguint(a: &BigUint, modulus: &BigUint) -> Option<BigUint> {
    let a = BigInt::from(a.clone());
    let m = BigInt::from(modulus.clone());
    let ext = a.extended_gcd(&m);
    if !ext.gcd.is_one() {
        return None;
    }
    Some(ext.x.mod_floor(&m).to_biguint().unwrap())
}

/// Legendre symbol `(a|p)` for an odd prime, in `{-1, 0, +1}`.
pub fn legendre(a: &BigInt, p: u64) -> Result<i32> {
    if p == 2 {
        return Err(ArithError::UnsupportedPrime);
    }
    if !is_prime_u64(p) {
        return Err(ArithError::NotPrime(p));
    }
    let p_big = BigUint::from(p);
    let a_red = a.mod_floor(&BigInt::from(p)).to_biguint().unwrap();
    if a_red.is_zero() {
        return Ok(0);
    }
    let sym = a_red.modpow(&((&p_big - 1u32) / 2u32), &p_big);
    Ok(if sym.is_one() { 1 } else { -1 })
}

/// The unit part of a square class: a quadratic-residue bit for odd `p`,
/// the residue of the unit modulo 8 for `p = 2`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum UnitClass {
    QuadraticResidue,
    NonResidue,
    /// Unit residue mod 8, one of 1, 3, 5, 7.
    Mod8(u8),
}

/// Square class of a nonzero element of `Q_p*`: invariant under
/// multiplication by nonzero squares.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct SquareClass {
    pub p: u64,
    /// Valuation mod 2.
    pub parity: u8,
    pub unit_class: UnitClass,
}

impl SquareClass {
    pub fn is_square(&self) -> bool {
        self.parity == 0
            && matches!(
                self.unit_class,
                UnitClass::QuadraticResidue | UnitClass::Mod8(1)
            )
    }
}

/// Square class of a nonzero integer in `Q_p*`.
pub fn square_class(a: &BigInt, p: u64) -> Result<SquareClass> {
    if a.is_zero() {
        return Err(ArithError::ZeroInput);
    }
    if !is_prime_u64(p) {
        return Err(ArithError::NotPrime(p));
    }
    let v = match valuation(a, p) {
        Valuation::Finite(v) => v,
        Valuation::Infinite => unreachable!("nonzero input"),
    };
    let unit = a / BigInt::from(p).pow(v as u32);
    let unit_class = if p == 2 {
        let r = unit.mod_floor(&BigInt::from(8)).to_u8().unwrap();
        UnitClass::Mod8(r)
    } else if legendre(&unit, p)? == 1 {
        UnitClass::QuadraticResidue
    } else {
        UnitClass::NonResidue
    };
    Ok(SquareClass {
        p,
        parity: (v % 2) as u8,
        unit_class,
    })
}

/// Companion predicate: is `a` a square in `Q_p*`?
pub fn is_square(a: &BigInt, p: u64) -> Result<bool> {
    Ok(square_class(a, p)?.is_square())
}

fn half_parity(x: &BigInt) -> u32 {
    // epsilon(x) = (x - 1)/2 mod 2 for odd x.
    let r = x.mod_floor(&BigInt::from(4)).to_u32().unwrap();
    ((r + 3) / 2) % 2 // r in {1, 3}: 1 -> 0, 3 -> 1
}

fn omega(x: &BigInt) -> u32 {
    // omega(x) = (x^2 - 1)/8 mod 2 for odd x; depends on x mod 8.
    let r = x.mod_floor(&BigInt::from(8)).to_u32().unwrap();
    match r {
        1 | 7 => 0,
        3 | 5 => 1,
        _ => unreachable!("odd residue"),
    }
}

/// Hilbert symbol `(a, b)_p` in `{-1, +1}`: `+1` iff `z^2 = a x^2 + b y^2`
/// has a nontrivial solution over `Q_p`. Computed by the standard case
/// formulas over square classes.
pub fn hilbert_symbol(a: &BigInt, b: &BigInt, p: u64) -> Result<i32> {
    if a.is_zero() || b.is_zero() {
        return Err(ArithError::ZeroInput);
    }
    if !is_prime_u64(p) {
        return Err(ArithError::NotPrime(p));
    }
    let p_big = BigInt::from(p);
    let alpha = valuation(a, p).finite().unwrap();
    let beta = valuation(b, p).finite().unwrap();
    let u = a / p_big.pow(alpha as u32);
    let v = b / p_big.pow(beta as u32);
    if p == 2 {
        let exponent = half_parity(&u) * half_parity(&v)
            + (alpha as u32 % 2) * omega(&v)
            + (beta as u32 % 2) * omega(&u);
        Ok(if exponent.is_multiple_of(2) { 1 } else { -1 })
    } else {
        let eps = ((p - 1) / 2 % 2) as u32;
        let mut sign = if (alpha as u32 % 2) * (beta as u32 % 2) * eps % 2 == 1 {
            -1
        } else {
            1
        };
        if beta % 2 == 1 {
            sign *= legendre(&u, p)?;
        }
        if alpha % 2 == 1 {
            sign *= legendre(&v, p)?;
        }
        Ok(sign)
    }
}

/// A residue modulo `p^K` with its tracked valuation (`None` = infinite,
/// i.e. the residue is zero to working precision).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PadicApprox {
    context: PadicContext,
    residue: BigUint,
    valuation: Option<u32>,
}

impl PadicApprox {
    pub fn from_bigint(context: PadicContext, value: &BigInt) -> Self {
        let modulus = BigInt::from(context.modulus());
        let residue = value.mod_floor(&modulus).to_biguint().unwrap();
        Self::from_residue(context, residue)
    }

    pub fn from_residue(context: PadicContext, residue: BigUint) -> Self {
        let residue = residue % context.modulus();
        let valuation = if residue.is_zero() {
            None
        } else {
            let v = valuation(&BigInt::from(residue.clone()), context.p)
                .finite()
                .unwrap() as u32;
            debug_assert!(v < context.precision);
            Some(v)
        };
        PadicApprox {
            context,
            residue,
            valuation,
        }
    }

    pub fn context(&self) -> &PadicContext {
        &self.context
    }

    pub fn residue(&self) -> &BigUint {
        &self.residue
    }

    /// `None` means the residue vanishes to the full working precision.
    pub fn valuation(&self) -> Option<u32> {
        self.valuation
    }

    pub fn is_unit(&self) -> bool {
        self.valuation == Some(0)
    }

    pub fn add(&self, other: &Self) -> Self {
        debug_assert_eq!(self.context, other.context);
        Self::from_residue(self.context, &self.residue + &other.residue)
    }

    pub fn mul(&self, other: &Self) -> Self {
        debug_assert_eq!(self.context, other.context);
        Self::from_residue(self.context, &self.residue * &other.residue)
    }

    /// Multiplicative inverse; errors with `NotAUnit` unless the valuation
    /// is zero.
    pub fn invert(&self) -> Result<Self> {
        if !self.is_unit() {
            return Err(ArithError::NotAUnit);
        }
        let inv = inverse_mod_biguint(&self.residue, &self.context.modulus())
            .expect("unit residues are invertible");
        Ok(Self::from_residue(self.context, inv))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn primality_spot_checks() {
        assert!(is_prime_u64(2));
        assert!(is_prime_u64(3));
        assert!(is_prime_u64(101));
        assert!(is_prime_u64(2_147_483_629));
        assert!(!is_prime_u64(1));
        assert!(!is_prime_u64(561)); // Carmichael
        assert!(!is_prime_u64(1_000_000));
    }

    #[test]
    fn context_rejects_bad_input() {
        assert_eq!(
            PadicContext::new(10, 8).unwrap_err(),
            ArithError::NotPrime(10)
        );
        assert_eq!(
            PadicContext::new(7, 0).unwrap_err(),
            ArithError::InvalidPrecision
        );
        let ctx = PadicContext::new(7, 4).unwrap();
        assert_eq!(ctx.modulus(), BigUint::from(2401u32));
        assert!(matches!(
            ctx.modulus_at(5),
            Err(ArithError::PrecisionExhausted { .. })
        ));
    }

    #[test]
    fn valuation_examples() {
        // 48 = 16 * 3
        assert_eq!(valuation(&BigInt::from(48), 2), Valuation::Finite(4));
        assert_eq!(valuation(&BigInt::from(7), 7), Valuation::Finite(1));
        assert_eq!(valuation(&BigInt::from(100), 3), Valuation::Finite(0));
        assert_eq!(valuation(&BigInt::from(0), 5), Valuation::Infinite);
        assert_eq!(valuation(&BigInt::from(-48), 2), Valuation::Finite(4));
    }

    #[test]
    fn inverse_examples() {
        // 3 * 11 = 33 = 2*16 + 1
        assert_eq!(
            inverse_mod_prime_power(&BigInt::from(3), 2, 4).unwrap(),
            BigUint::from(11u32)
        );
        assert_eq!(
            inverse_mod_prime_power(&BigInt::from(1), 5, 6).unwrap(),
            BigUint::from(1u32)
        );
        // 4 * 2 = 8 = 7 + 1
        assert_eq!(
            inverse_mod_prime_power(&BigInt::from(4), 7, 1).unwrap(),
            BigUint::from(2u32)
        );
        assert_eq!(
            inverse_mod_prime_power(&BigInt::from(14), 7, 3).unwrap_err(),
            ArithError::NotAUnit
        );
    }

    #[test]
    fn legendre_examples() {
        // 3^2 = 9 = 2 mod 7
        assert_eq!(legendre(&BigInt::from(2), 7).unwrap(), 1);
        // squares mod 3 are {0, 1}
        assert_eq!(legendre(&BigInt::from(2), 3).unwrap(), -1);
        assert_eq!(legendre(&BigInt::from(9), 3).unwrap(), 0);
        assert_eq!(
            legendre(&BigInt::from(3), 2).unwrap_err(),
            ArithError::UnsupportedPrime
        );
    }

    #[test]
    fn square_class_examples() {
        // 17 = 1 mod 8 is a 2-adic square.
        assert!(is_square(&BigInt::from(17), 2).unwrap());
        let five = square_class(&BigInt::from(5), 2).unwrap();
        assert_eq!(five.parity, 0);
        assert_eq!(five.unit_class, UnitClass::Mod8(5));
        assert!(!five.is_square());
        // v_3(12) = 1
        let twelve = square_class(&BigInt::from(12), 3).unwrap();
        assert_eq!(twelve.parity, 1);
        assert!(!twelve.is_square());
        assert_eq!(
            square_class(&BigInt::from(0), 3).unwrap_err(),
            ArithError::ZeroInput
        );
    }

    #[test]
    fn two_adic_squares_match_direct_search() {
        // x^2 = a solvable mod 2^k for k <= 10 iff the class test says so,
        // for odd a (unit case; the only subtle one at p = 2).
        for a in (1i64..200).step_by(2) {
            let predicted = is_square(&BigInt::from(a), 2).unwrap();
            let m = 1u64 << 10;
            let solvable = (0..m).any(|x| mul_mod_u64(x, x, m) == (a as u64) % m);
            assert_eq!(predicted, solvable, "a = {a}");
        }
    }

    #[test]
    fn hilbert_examples() {
        // (1, b)_p = +1 via (x, y, z) = (1, 0, 1).
        for &(b, p) in &[(5i64, 2u64), (-3, 3), (7, 7), (10, 5)] {
            assert_eq!(
                hilbert_symbol(&BigInt::from(1), &BigInt::from(b), p).unwrap(),
                1
            );
        }
        // x^2 + y^2 + z^2 has no primitive zero mod 8.
        assert_eq!(
            hilbert_symbol(&BigInt::from(-1), &BigInt::from(-1), 2).unwrap(),
            -1
        );
        // (1, 2, 0): -1 - 4 = -5 = 0 mod 5, Hensel-liftable.
        assert_eq!(
            hilbert_symbol(&BigInt::from(-1), &BigInt::from(-1), 5).unwrap(),
            1
        );
        assert_eq!(
            hilbert_symbol(&BigInt::from(0), &BigInt::from(1), 5).unwrap_err(),
            ArithError::ZeroInput
        );
    }

    #[test]
    fn padic_approx_tracks_valuation() {
        let ctx = PadicContext::new(5, 6).unwrap();
        let a = PadicApprox::from_bigint(ctx, &BigInt::from(50));
        assert_eq!(a.valuation(), Some(2));
        let zero = PadicApprox::from_bigint(ctx, &BigInt::from(5u64.pow(6)));
        assert_eq!(zero.valuation(), None);
        let unit = PadicApprox::from_bigint(ctx, &BigInt::from(-7));
        let inv = unit.invert().unwrap();
        assert!(unit.mul(&inv).residue().is_one());
        assert_eq!(a.invert().unwrap_err(), ArithError::NotAUnit);
    }

    proptest! {
        #[test]
        fn inverse_round_trips(a in 1i64..100_000, pi in 0usize..4, k in 1u32..8) {
            let p = [2u64, 3, 5, 7][pi];
            prop_assume!(a.unsigned_abs() % p != 0);
            let inv = inverse_mod_prime_power(&BigInt::from(a), p, k).unwrap();
            let modulus = BigInt::from(p).pow(k);
            let prod = (BigInt::from(a) * BigInt::from(inv)).mod_floor(&modulus);
            prop_assert!(prod.is_one());
        }

        #[test]
        fn square_class_ignores_square_factors(a in -500i64..500, t in 1i64..40, pi in 0usize..4) {
            let p = [2u64, 3, 5, 7][pi];
            prop_assume!(a != 0);
            let lhs = square_class(&BigInt::from(a), p).unwrap();
            let rhs = square_class(&BigInt::from(a * t * t), p).unwrap();
            prop_assert_eq!(lhs, rhs);
        }

        #[test]
        fn hilbert_symmetric_and_bimultiplicative(
            a in -60i64..60, b in -60i64..60, c in -60i64..60, pi in 0usize..4
        ) {
            let p = [2u64, 3, 5, 7][pi];
            prop_assume!(a != 0 && b != 0 && c != 0);
            let (a, b, c) = (BigInt::from(a), BigInt::from(b), BigInt::from(c));
            let ab = hilbert_symbol(&a, &b, p).unwrap();
            prop_assert_eq!(ab, hilbert_symbol(&b, &a, p).unwrap());
            let ac = hilbert_symbol(&a, &c, p).unwrap();
            let a_bc = hilbert_symbol(&a, &(&b * &c), p).unwrap();
            prop_assert_eq!(a_bc, ab * ac);
        }
    }
}
