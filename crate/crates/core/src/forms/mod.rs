//! Sparse homogeneous forms with exact integer coefficients.
//!
//! A [`Form`] is a map from monomials (exponent vectors of fixed total
//! degree) to nonzero `BigInt` coefficients, kept in a `BTreeMap` so the
//! lexicographic monomial order gives deterministic rendering and hashing.
//! Split forms (weighted sums of forms on disjoint variable blocks, like
//! Terjanian's 18-variable quartic) live in [`split`].

mod builtin;
mod parse;
mod split;

pub use builtin::{builtin_form, quartic_h, terjanian_f, terjanian_g};
pub(crate) use parse::parse_poly_generic;
pub use parse::{parse_form, parse_forms_text};
pub use split::{detect_split, AnyForm, SplitBlock, SplitForm};

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use std::collections::BTreeMap;
use std::fmt;
use thiserror::Error;

use crate::arith::{self, Valuation};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FormsError {
    #[error("syntax error at byte {position}: {message}")]
    Syntax { position: usize, message: String },
    #[error("form is not homogeneous: monomial degrees {degrees:?}")]
    Inhomogeneous { degrees: Vec<u32> },
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("modulus must be at least 2")]
    InvalidModulus,
    #[error("the zero form is not a valid input here")]
    ZeroForm,
    #[error("unknown builtin form {0:?}")]
    UnknownName(String),
    #[error("invalid split structure: {0}")]
    InvalidSplit(String),
}

pub type Result<T> = std::result::Result<T, FormsError>;

/// Exponent vector of a single monomial. The derived `Ord` is lexicographic
/// on the exponents, which is the canonical term order of this crate.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Monomial {
    exponents: Vec<u32>,
}

impl Monomial {
    pub fn new(exponents: Vec<u32>) -> Self {
        Monomial { exponents }
    }

    pub fn exponents(&self) -> &[u32] {
        &self.exponents
    }

    pub fn total_degree(&self) -> u32 {
        self.exponents.iter().sum()
    }
}

/// A homogeneous polynomial of degree `d` in `n` variables, with exact
/// integer coefficients. The zero form (no terms) is representable; every
/// stored coefficient is nonzero.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Form {
    n: usize,
    degree: u32,
    terms: BTreeMap<Monomial, BigInt>,
}

impl Form {
    pub fn zero(n: usize, degree: u32) -> Self {
        assert!(n >= 1 && degree >= 1, "forms need n >= 1 and d >= 1");
        Form {
            n,
            degree,
            terms: BTreeMap::new(),
        }
    }

    pub fn from_terms<I>(n: usize, degree: u32, terms: I) -> Self
    where
        I: IntoIterator<Item = (Vec<u32>, BigInt)>,
    {
        let mut f = Form::zero(n, degree);
        for (exponents, coeff) in terms {
            f.add_term(exponents, coeff);
        }
        f
    }

    /// Accumulate `coeff * x^exponents`; cancellation to zero removes the
    /// term.
    pub fn add_term(&mut self, exponents: Vec<u32>, coeff: BigInt) {
        assert_eq!(exponents.len(), self.n, "exponent vector length");
        let mono = Monomial::new(exponents);
        assert_eq!(
            mono.total_degree(),
            self.degree,
            "monomial degree must match the form degree"
        );
        if coeff.is_zero() {
            return;
        }
        let entry = self.terms.entry(mono);
        match entry {
            std::collections::btree_map::Entry::Vacant(v) => {
                v.insert(coeff);
            }
            std::collections::btree_map::Entry::Occupied(mut o) => {
                *o.get_mut() += coeff;
                if o.get().is_zero() {
                    o.remove();
                }
            }
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn degree(&self) -> u32 {
        self.degree
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn terms(&self) -> impl DoubleEndedIterator<Item = (&Monomial, &BigInt)> {
        self.terms.iter()
    }

    pub fn coeff(&self, exponents: &[u32]) -> BigInt {
        self.terms
            .get(&Monomial::new(exponents.to_vec()))
            .cloned()
            .unwrap_or_else(BigInt::zero)
    }

    fn map_coeffs(&self, f: impl Fn(&BigInt) -> BigInt) -> Form {
        let mut out = Form::zero(self.n, self.degree);
        for (mono, c) in &self.terms {
            out.add_term(mono.exponents.clone(), f(c));
        }
        out
    }

    /// Content as a positive integer gcd of the coefficients (zero form: 0).
    pub fn content(&self) -> BigInt {
        let mut g = BigInt::zero();
        for c in self.terms.values() {
            g = g.gcd(c);
        }
        g
    }

    /// The same form viewed on `n >= self.n()` variables (the new trailing
    /// variables do not occur).
    pub fn extend_to(&self, n: usize) -> Form {
        assert!(n >= self.n);
        let mut out = Form::zero(n, self.degree);
        for (mono, c) in &self.terms {
            let mut exps = mono.exponents.clone();
            exps.resize(n, 0);
            out.add_term(exps, c.clone());
        }
        out
    }
}

fn check_dims(f: &Form, x_len: usize) -> Result<()> {
    if x_len != f.n {
        return Err(FormsError::DimensionMismatch {
            expected: f.n,
            got: x_len,
        });
    }
    Ok(())
}

/// A form compiled against a fixed u64 modulus, for enumeration kernels.
#[derive(Debug, Clone)]
pub(crate) struct CompiledForm {
    modulus: u64,
    terms: Vec<(u64, Vec<(usize, u32)>)>,
}

impl CompiledForm {
    pub(crate) fn new(f: &Form, modulus: u64) -> Self {
        let m_big = BigInt::from(modulus);
        let terms = f
            .terms
            .iter()
            .map(|(mono, c)| {
                let c_red = c.mod_floor(&m_big).to_u64().unwrap();
                let sparse: Vec<(usize, u32)> = mono
                    .exponents
                    .iter()
                    .enumerate()
                    .filter(|(_, &e)| e > 0)
                    .map(|(i, &e)| (i, e))
                    .collect();
                (c_red, sparse)
            })
            .filter(|(c, _)| *c != 0)
            .collect();
        CompiledForm { modulus, terms }
    }

    #[inline]
    pub(crate) fn eval(&self, x: &[u64]) -> u64 {
        let m = self.modulus;
        let mut acc: u64 = 0;
        for (c, sparse) in &self.terms {
            let mut t = *c;
            for &(var, exp) in sparse {
                let base = x[var] % m;
                for _ in 0..exp {
                    t = arith::mul_mod_u64(t, base, m);
                }
            }
            acc = (acc + t) % m;
        }
        acc
    }
}

fn reduce_i64(x: i64, m: u64) -> u64 {
    (((x as i128 % m as i128) + m as i128) % m as i128) as u64
}

/// `f(x) mod m` with exact reduction of the (possibly negative) inputs.
pub fn evaluate(f: &Form, x: &[i64], m: u64) -> Result<u64> {
    check_dims(f, x.len())?;
    if m < 2 {
        return Err(FormsError::InvalidModulus);
    }
    let xr: Vec<u64> = x.iter().map(|&v| reduce_i64(v, m)).collect();
    Ok(CompiledForm::new(f, m).eval(&xr))
}

/// `f(x)` as an exact integer.
pub fn evaluate_exact(f: &Form, x: &[BigInt]) -> Result<BigInt> {
    check_dims(f, x.len())?;
    let mut acc = BigInt::zero();
    for (mono, c) in &f.terms {
        let mut t = c.clone();
        for (i, &e) in mono.exponents.iter().enumerate() {
            for _ in 0..e {
                t *= &x[i];
            }
        }
        acc += t;
    }
    Ok(acc)
}

/// `f(x) mod modulus` over big residues (lifting targets like `p^32`).
pub fn evaluate_big(f: &Form, x: &[BigUint], modulus: &BigUint) -> Result<BigUint> {
    check_dims(f, x.len())?;
    let m = BigInt::from(modulus.clone());
    let mut acc = BigInt::zero();
    for (mono, c) in &f.terms {
        let mut t = c.mod_floor(&m);
        for (i, &e) in mono.exponents.iter().enumerate() {
            let xi = BigInt::from(x[i].clone());
            for _ in 0..e {
                t = (t * &xi).mod_floor(&m);
            }
        }
        acc = (acc + t).mod_floor(&m);
    }
    Ok(acc.to_biguint().unwrap())
}

fn gradient_term_iter<'a>(f: &'a Form) -> impl Iterator<Item = (usize, Vec<u32>, BigInt)> + 'a {
    // Yields (variable, reduced exponent vector, e * coeff) for each formal
    // partial derivative contribution.
    f.terms.iter().flat_map(|(mono, c)| {
        let exps = mono.exponents.clone();
        let c = c.clone();
        (0..exps.len()).filter_map(move |i| {
            if exps[i] == 0 {
                return None;
            }
            let mut reduced = exps.clone();
            reduced[i] -= 1;
            Some((i, reduced, BigInt::from(exps[i]) * &c))
        })
    })
}

/// Formal partial derivatives evaluated at `x`, modulo `m`.
pub fn gradient(f: &Form, x: &[i64], m: u64) -> Result<Vec<u64>> {
    check_dims(f, x.len())?;
    if m < 2 {
        return Err(FormsError::InvalidModulus);
    }
    let m_big = BigInt::from(m);
    let xr: Vec<u64> = x.iter().map(|&v| reduce_i64(v, m)).collect();
    let mut out = vec![0u64; f.n];
    for (i, reduced, c) in gradient_term_iter(f) {
        let mut t = c.mod_floor(&m_big).to_u64().unwrap();
        for (j, &e) in reduced.iter().enumerate() {
            for _ in 0..e {
                t = arith::mul_mod_u64(t, xr[j], m);
            }
        }
        out[i] = (out[i] + t) % m;
    }
    Ok(out)
}

/// Exact gradient vector at an integer point.
pub fn gradient_exact(f: &Form, x: &[BigInt]) -> Result<Vec<BigInt>> {
    check_dims(f, x.len())?;
    let mut out = vec![BigInt::zero(); f.n];
    for (i, reduced, c) in gradient_term_iter(f) {
        let mut t = c;
        for (j, &e) in reduced.iter().enumerate() {
            for _ in 0..e {
                t *= &x[j];
            }
        }
        out[i] += t;
    }
    Ok(out)
}

/// Gradient modulo a big modulus.
pub fn gradient_big(f: &Form, x: &[BigUint], modulus: &BigUint) -> Result<Vec<BigUint>> {
    check_dims(f, x.len())?;
    let m = BigInt::from(modulus.clone());
    let mut out = vec![BigInt::zero(); f.n];
    for (i, reduced, c) in gradient_term_iter(f) {
        let mut t = c.mod_floor(&m);
        for (j, &e) in reduced.iter().enumerate() {
            let xj = BigInt::from(x[j].clone());
            for _ in 0..e {
                t = (t * &xj).mod_floor(&m);
            }
        }
        out[i] = (&out[i] + t).mod_floor(&m);
    }
    Ok(out.into_iter().map(|v| v.to_biguint().unwrap()).collect())
}

/// An integer matrix describing the substitution `x = M * lambda`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LinearSubstitution {
    rows: usize,
    cols: usize,
    entries: Vec<BigInt>,
}

impl LinearSubstitution {
    pub fn new(rows: usize, cols: usize, entries: Vec<BigInt>) -> Self {
        assert_eq!(entries.len(), rows * cols);
        LinearSubstitution {
            rows,
            cols,
            entries,
        }
    }

    pub fn from_rows(rows: &[Vec<i64>]) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, |row| row.len());
        let entries = rows
            .iter()
            .flat_map(|row| {
                assert_eq!(row.len(), c);
                row.iter().map(|&v| BigInt::from(v))
            })
            .collect();
        LinearSubstitution::new(r, c, entries)
    }

    pub fn identity(n: usize) -> Self {
        let mut entries = vec![BigInt::zero(); n * n];
        for i in 0..n {
            entries[i * n + i] = BigInt::from(1);
        }
        LinearSubstitution::new(n, n, entries)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn entry(&self, i: usize, j: usize) -> &BigInt {
        &self.entries[i * self.cols + j]
    }

    /// `M * lambda` over exact integers.
    pub fn apply(&self, lambda: &[BigInt]) -> Vec<BigInt> {
        assert_eq!(lambda.len(), self.cols);
        (0..self.rows)
            .map(|i| {
                (0..self.cols)
                    .map(|j| self.entry(i, j) * &lambda[j])
                    .sum::<BigInt>()
            })
            .collect()
    }
}

type RawPoly = BTreeMap<Vec<u32>, BigInt>;

fn raw_mul(a: &RawPoly, b: &RawPoly) -> RawPoly {
    let mut out = RawPoly::new();
    for (ea, ca) in a {
        for (eb, cb) in b {
            let exps: Vec<u32> = ea.iter().zip(eb).map(|(x, y)| x + y).collect();
            let c = ca * cb;
            let slot = out.entry(exps).or_insert_with(BigInt::zero);
            *slot += c;
            // zero entries are stripped when the result is collected
        }
    }
    out.retain(|_, c| !c.is_zero());
    out
}

/// The expanded form `g(lambda) = f(M * lambda)`; the degree is preserved
/// (the result may be the zero form of that degree).
pub fn substitute(f: &Form, s: &LinearSubstitution) -> Result<Form> {
    if s.rows != f.n {
        return Err(FormsError::DimensionMismatch {
            expected: f.n,
            got: s.rows,
        });
    }
    let cols = s.cols;
    // Linear polynomials L_i(lambda) = row i of M.
    let linear: Vec<RawPoly> = (0..f.n)
        .map(|i| {
            let mut poly = RawPoly::new();
            for j in 0..cols {
                let c = s.entry(i, j).clone();
                if !c.is_zero() {
                    let mut exps = vec![0u32; cols];
                    exps[j] = 1;
                    poly.insert(exps, c);
                }
            }
            poly
        })
        .collect();
    let mut result = Form::zero(cols.max(1), f.degree);
    if cols == 0 {
        return Ok(result);
    }
    for (mono, coeff) in &f.terms {
        let mut acc: RawPoly = RawPoly::new();
        acc.insert(vec![0u32; cols], coeff.clone());
        for (i, &e) in mono.exponents.iter().enumerate() {
            for _ in 0..e {
                acc = raw_mul(&acc, &linear[i]);
                if acc.is_empty() {
                    break;
                }
            }
            if acc.is_empty() {
                break;
            }
        }
        for (exps, c) in acc {
            result.add_term(exps, c);
        }
    }
    Ok(result)
}

fn coeff_valuation_sum(f: &Form, p: u64) -> u64 {
    f.terms
        .values()
        .map(|c| match arith::valuation(c, p) {
            Valuation::Finite(v) => v,
            Valuation::Infinite => unreachable!("stored coefficients are nonzero"),
        })
        .sum()
}

fn min_coeff_valuation(f: &Form, p: u64) -> u32 {
    f.terms
        .values()
        .map(|c| arith::valuation(c, p).finite().unwrap() as u32)
        .min()
        .expect("nonzero form")
}

fn divide_coeffs(f: &Form, p: u64, k: u32) -> Form {
    if k == 0 {
        return f.clone();
    }
    let divisor = BigInt::from(p).pow(k);
    f.map_coeffs(|c| c / &divisor)
}

fn scale_variable(f: &Form, var: usize, p: u64) -> Form {
    // x_var -> p * x_var: multiply each coefficient by p^{e_var}.
    let p_big = BigInt::from(p);
    let mut out = Form::zero(f.n, f.degree);
    for (mono, c) in &f.terms {
        let e = mono.exponents[var];
        out.add_term(mono.exponents.clone(), c * p_big.pow(e));
    }
    out
}

/// A normalized model of a form and its relation to the input:
/// `f(p^{scales[0]} x_1, ..., p^{scales[n-1]} x_n) = p^{shift_total} * form`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NormalizedForm {
    pub form: Form,
    /// p-exponent of the content divided out up front.
    pub shift: u32,
    /// Cumulative variable-scaling exponents.
    pub variable_scales: Vec<u32>,
    /// Total p-exponent divided out (content plus scaling moves).
    pub shift_total: u32,
}

impl NormalizedForm {
    pub fn is_trivial(&self) -> bool {
        self.shift_total == 0 && self.variable_scales.iter().all(|&s| s == 0)
    }

    /// Map a zero of the normalized model back to a zero of the input form
    /// (coordinates multiplied by `p^{scales[i]}`).
    pub fn map_zero_back(&self, p: u64, x: &[BigUint], modulus: &BigUint) -> Vec<BigUint> {
        x.iter()
            .zip(&self.variable_scales)
            .map(|(c, &s)| (c * BigUint::from(p).pow(s)) % modulus)
            .collect()
    }
}

/// Divide out the p-content of `f` (recording the removed exponent), then
/// greedily try variable scalings `x_i -> p * x_i` followed by division by
/// the highest possible power of `p`, accepting moves that strictly
/// decrease the total coefficient valuation. Every move is invertible over
/// `Q_p`, so solubility is preserved; this is a heuristic fragment of
/// p-adic minimization, not the full theory. Terminates because the
/// valuation sum is a nonnegative integer that strictly decreases.
#[allow(clippy::needless_range_loop)]
pub fn normalize_content_detailed(f: &Form, p: u64) -> Result<NormalizedForm> {
    if f.is_zero() {
        return Err(FormsError::ZeroForm);
    }
    let shift = min_coeff_valuation(f, p);
    let mut g = divide_coeffs(f, p, shift);
    let mut scales = vec![0u32; f.n];
    let mut shift_total = shift;
    loop {
        let current = coeff_valuation_sum(&g, p);
        let mut improved = false;
        for i in 0..g.n {
            let scaled = scale_variable(&g, i, p);
            let c = min_coeff_valuation(&scaled, p);
            if c == 0 {
                continue;
            }
            let candidate = divide_coeffs(&scaled, p, c);
            if coeff_valuation_sum(&candidate, p) < current {
                g = candidate;
                scales[i] += 1;
                shift_total += c;
                improved = true;
                break;
            }
        }
        if !improved {
            return Ok(NormalizedForm {
                form: g,
                shift,
                variable_scales: scales,
                shift_total,
            });
        }
    }
}

/// The normalized form and the content exponent divided out.
pub fn normalize_content(f: &Form, p: u64) -> Result<(Form, u32)> {
    let norm = normalize_content_detailed(f, p)?;
    Ok((norm.form, norm.shift))
}

fn render_monomial(mono: &Monomial, out: &mut String) {
    let mut first = true;
    for (i, &e) in mono.exponents().iter().enumerate() {
        if e == 0 {
            continue;
        }
        if !first {
            out.push('*');
        }
        first = false;
        out.push('x');
        out.push_str(&(i + 1).to_string());
        if e > 1 {
            out.push('^');
            out.push_str(&e.to_string());
        }
    }
}

impl fmt::Display for Form {
    /// Canonical rendering: terms in descending lexicographic monomial
    /// order; `parse_form` round-trips this exactly.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let mut out = String::new();
        for (idx, (mono, c)) in self.terms.iter().rev().enumerate() {
            let neg = c.is_negative();
            let abs = c.abs();
            if idx == 0 {
                if neg {
                    out.push('-');
                }
            } else {
                out.push_str(if neg { " - " } else { " + " });
            }
            if !abs.is_one() {
                out.push_str(&abs.to_string());
                out.push('*');
            }
            render_monomial(mono, &mut out);
        }
        write!(f, "{out}")
    }
}
