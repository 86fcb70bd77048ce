//! Sparse multivariate polynomials in the parameters t_1..t_k (not
//! necessarily homogeneous), used for the coefficients of function-field
//! quadratic forms and for reconstructed solutions.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::Zero;
use std::collections::BTreeMap;
use std::fmt;

use crate::forms::{parse_poly_generic, FormsError};

/// Polynomial in k parameters with exact integer coefficients; keys are
/// exponent vectors of length k.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TPoly {
    k: usize,
    terms: BTreeMap<Vec<u32>, BigInt>,
}

impl TPoly {
    pub fn zero(k: usize) -> Self {
        TPoly {
            k,
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(k: usize, c: BigInt) -> Self {
        let mut p = TPoly::zero(k);
        p.add_term(vec![0; k], c);
        p
    }

    pub fn add_term(&mut self, exponents: Vec<u32>, coeff: BigInt) {
        assert_eq!(exponents.len(), self.k);
        if coeff.is_zero() {
            return;
        }
        let slot = self.terms.entry(exponents).or_insert_with(BigInt::zero);
        *slot += coeff;
        if slot.is_zero() {
            self.terms.retain(|_, c| !c.is_zero());
        }
    }

    /// Parse in the forms grammar with variables `t1..tk`; bare integer
    /// constants (including `0`) are allowed.
    pub fn parse(text: &str, k: usize) -> Result<Self, FormsError> {
        let (terms, max_var) = parse_poly_generic(text, 't', true)?;
        if max_var > k {
            return Err(FormsError::Syntax {
                position: 0,
                message: format!("variable t{max_var} exceeds the declared k = {k}"),
            });
        }
        let mut poly = TPoly::zero(k);
        for (factors, coeff) in terms {
            let mut exps = vec![0u32; k];
            for (var, e) in factors {
                exps[var] += e;
            }
            poly.add_term(exps, coeff);
        }
        Ok(poly)
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Vec<u32>, &BigInt)> {
        self.terms.iter()
    }

    pub fn total_degree(&self) -> u32 {
        self.terms.keys().map(|e| e.iter().sum()).max().unwrap_or(0)
    }

    pub fn add(&self, other: &TPoly) -> TPoly {
        assert_eq!(self.k, other.k);
        let mut out = self.clone();
        for (e, c) in &other.terms {
            out.add_term(e.clone(), c.clone());
        }
        out
    }

    pub fn mul(&self, other: &TPoly) -> TPoly {
        assert_eq!(self.k, other.k);
        let mut out = TPoly::zero(self.k);
        for (ea, ca) in &self.terms {
            for (eb, cb) in &other.terms {
                let exps: Vec<u32> = ea.iter().zip(eb).map(|(a, b)| a + b).collect();
                out.add_term(exps, ca * cb);
            }
        }
        out
    }

    pub fn scale(&self, c: &BigInt) -> TPoly {
        let mut out = TPoly::zero(self.k);
        for (e, coeff) in &self.terms {
            out.add_term(e.clone(), coeff * c);
        }
        out
    }

    /// Reduce every coefficient into `[0, modulus)`.
    pub fn reduce_mod(&self, modulus: &BigInt) -> TPoly {
        let mut out = TPoly::zero(self.k);
        for (e, coeff) in &self.terms {
            out.add_term(e.clone(), coeff.mod_floor(modulus));
        }
        out
    }

    pub fn coeff(&self, exponents: &[u32]) -> BigInt {
        self.terms
            .get(exponents)
            .cloned()
            .unwrap_or_else(BigInt::zero)
    }
}

impl fmt::Display for TPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        use num_traits::{One, Signed};
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let mut out = String::new();
        for (idx, (exps, c)) in self.terms.iter().rev().enumerate() {
            let neg = c.is_negative();
            let abs = c.abs();
            if idx == 0 {
                if neg {
                    out.push('-');
                }
            } else {
                out.push_str(if neg { " - " } else { " + " });
            }
            let is_constant = exps.iter().all(|&e| e == 0);
            if !abs.is_one() || is_constant {
                out.push_str(&abs.to_string());
                if !is_constant {
                    out.push('*');
                }
            }
            let mut first = true;
            for (i, &e) in exps.iter().enumerate() {
                if e == 0 {
                    continue;
                }
                if !first {
                    out.push('*');
                }
                first = false;
                out.push('t');
                out.push_str(&(i + 1).to_string());
                if e > 1 {
                    out.push('^');
                    out.push_str(&e.to_string());
                }
            }
        }
        write!(f, "{out}")
    }
}

/// All exponent vectors in k variables with total degree <= bound, in
/// graded order (degree ascending, lexicographic within a degree). The
/// count is C(bound + k, k).
pub fn monomials_up_to(k: usize, bound: u32) -> Vec<Vec<u32>> {
    let mut out = Vec::new();
    for degree in 0..=bound {
        let mut current = vec![0u32; k];
        fill_degree(k, degree, 0, &mut current, &mut out);
    }
    out
}

fn fill_degree(
    k: usize,
    remaining: u32,
    pos: usize,
    current: &mut Vec<u32>,
    out: &mut Vec<Vec<u32>>,
) {
    if pos == k - 1 {
        current[pos] = remaining;
        out.push(current.clone());
        current[pos] = 0;
        return;
    }
    for e in (0..=remaining).rev() {
        current[pos] = e;
        fill_degree(k, remaining - e, pos + 1, current, out);
        current[pos] = 0;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_and_render() {
        let p = TPoly::parse("1 + 2*t1 - t1*t2^2", 2).unwrap();
        assert_eq!(p.coeff(&[0, 0]), BigInt::from(1));
        assert_eq!(p.coeff(&[1, 0]), BigInt::from(2));
        assert_eq!(p.coeff(&[1, 2]), BigInt::from(-1));
        assert_eq!(p.total_degree(), 3);
        let back = TPoly::parse(&p.to_string(), 2).unwrap();
        assert_eq!(back, p);
        assert!(TPoly::parse("0", 2).unwrap().is_zero());
        assert!(TPoly::parse("t3", 2).is_err());
    }

    #[test]
    fn arithmetic() {
        let a = TPoly::parse("1 + t1", 1).unwrap();
        let b = TPoly::parse("1 - t1", 1).unwrap();
        let prod = a.mul(&b);
        assert_eq!(prod, TPoly::parse("1 - t1^2", 1).unwrap());
        let sum = a.add(&b);
        assert_eq!(sum, TPoly::parse("2", 1).unwrap());
    }

    #[test]
    fn monomial_bases_have_binomial_size() {
        // C(D + k, k)
        assert_eq!(monomials_up_to(1, 0), vec![vec![0]]);
        assert_eq!(monomials_up_to(1, 3).len(), 4);
        assert_eq!(monomials_up_to(2, 2).len(), 6);
        assert_eq!(monomials_up_to(3, 4).len(), 35);
        // graded: degrees ascend
        let ms = monomials_up_to(2, 3);
        let degs: Vec<u32> = ms.iter().map(|m| m.iter().sum()).collect();
        let mut sorted = degs.clone();
        sorted.sort_unstable();
        assert_eq!(degs, sorted);
    }
}
