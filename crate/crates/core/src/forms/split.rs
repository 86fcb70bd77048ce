//! Block-decomposed forms: weighted sums of forms on disjoint variable
//! sets, and detection of that structure in a flat form.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{Signed, Zero};

use super::{evaluate, Form, FormsError, Result};

/// One block of a split form: a form on its own (local) variables, the
/// global variable indices it occupies, and its integer weight.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SplitBlock {
    /// Global 0-based variable indices, ascending.
    pub variables: Vec<usize>,
    /// Form on `variables.len()` local variables, with content 1.
    pub form: Form,
    /// Nonzero weight applied to the block's value.
    pub weight: BigInt,
}

/// A form `sum_j c_j * G_j(block_j)` over pairwise disjoint variable
/// blocks covering all `n` variables.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SplitForm {
    n: usize,
    degree: u32,
    blocks: Vec<SplitBlock>,
}

impl SplitForm {
    pub fn new(n: usize, blocks: Vec<SplitBlock>) -> Result<Self> {
        if blocks.is_empty() {
            return Err(FormsError::InvalidSplit("no blocks".into()));
        }
        let mut seen = vec![false; n];
        let mut degree = None;
        for block in &blocks {
            if block.weight.is_zero() {
                return Err(FormsError::InvalidSplit("zero block weight".into()));
            }
            if block.form.n() != block.variables.len() {
                return Err(FormsError::InvalidSplit(
                    "block form arity does not match its variable set".into(),
                ));
            }
            match degree {
                None => degree = Some(block.form.degree()),
                Some(d) if d == block.form.degree() => {}
                Some(_) => {
                    return Err(FormsError::InvalidSplit(
                        "blocks must share one degree".into(),
                    ))
                }
            }
            for &v in &block.variables {
                if v >= n || seen[v] {
                    return Err(FormsError::InvalidSplit(
                        "blocks must be disjoint and inside 1..n".into(),
                    ));
                }
                seen[v] = true;
            }
        }
        if !seen.iter().all(|&s| s) {
            return Err(FormsError::InvalidSplit(
                "blocks must cover all variables".into(),
            ));
        }
        Ok(SplitForm {
            n,
            degree: degree.unwrap(),
            blocks,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn degree(&self) -> u32 {
        self.degree
    }

    pub fn blocks(&self) -> &[SplitBlock] {
        &self.blocks
    }

    /// Reassemble the flat form on all `n` variables.
    pub fn to_form(&self) -> Form {
        let mut out = Form::zero(self.n, self.degree);
        for block in &self.blocks {
            for (mono, c) in block.form.terms() {
                let mut exps = vec![0u32; self.n];
                for (local, &e) in mono.exponents().iter().enumerate() {
                    exps[block.variables[local]] = e;
                }
                out.add_term(exps, c * &block.weight);
            }
        }
        out
    }

    /// `sum_j c_j G_j(x|block_j) mod m`.
    pub fn evaluate(&self, x: &[i64], m: u64) -> Result<u64> {
        if x.len() != self.n {
            return Err(FormsError::DimensionMismatch {
                expected: self.n,
                got: x.len(),
            });
        }
        let mut acc = 0u64;
        let m_big = BigInt::from(m);
        for block in &self.blocks {
            let local: Vec<i64> = block.variables.iter().map(|&v| x[v]).collect();
            let value = evaluate(&block.form, &local, m)?;
            let w = block.weight.mod_floor(&m_big);
            let w64 = u64::try_from(&w).unwrap();
            acc = (acc + crate::arith::mul_mod_u64(w64, value, m)) % m;
        }
        Ok(acc)
    }
}

/// Either representation of a form, as produced by the builtin table or by
/// split detection.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum AnyForm {
    Single(Form),
    Split(SplitForm),
}

impl AnyForm {
    pub fn n(&self) -> usize {
        match self {
            AnyForm::Single(f) => f.n(),
            AnyForm::Split(s) => s.n(),
        }
    }

    pub fn degree(&self) -> u32 {
        match self {
            AnyForm::Single(f) => f.degree(),
            AnyForm::Split(s) => s.degree(),
        }
    }

    /// The flat form on all variables.
    pub fn to_form(&self) -> Form {
        match self {
            AnyForm::Single(f) => f.clone(),
            AnyForm::Split(s) => s.to_form(),
        }
    }

    pub fn as_split(&self) -> Option<&SplitForm> {
        match self {
            AnyForm::Split(s) => Some(s),
            AnyForm::Single(_) => None,
        }
    }
}

struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        UnionFind {
            parent: (0..n).collect(),
        }
    }

    fn find(&mut self, i: usize) -> usize {
        if self.parent[i] != i {
            let root = self.find(self.parent[i]);
            self.parent[i] = root;
        }
        self.parent[i]
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            self.parent[ra.max(rb)] = ra.min(rb);
        }
    }
}

/// Partition the variables into connected components of the "co-occur in a
/// monomial" graph. Returns `None` for single-component (non-split) forms.
/// Block weights are the extracted contents, signed so that each block's
/// leading coefficient is positive; variables that occur in no monomial are
/// attached to the first block.
#[allow(clippy::needless_range_loop)]
pub fn detect_split(f: &Form) -> Option<SplitForm> {
    if f.is_zero() {
        return None;
    }
    let n = f.n();
    let mut uf = UnionFind::new(n);
    let mut used = vec![false; n];
    for (mono, _) in f.terms() {
        let vars: Vec<usize> = mono
            .exponents()
            .iter()
            .enumerate()
            .filter(|(_, &e)| e > 0)
            .map(|(i, _)| i)
            .collect();
        for &v in &vars {
            used[v] = true;
            uf.union(vars[0], v);
        }
    }
    // Group used variables by component root, ordered by smallest member.
    let mut components: Vec<Vec<usize>> = Vec::new();
    let mut root_slot: std::collections::BTreeMap<usize, usize> = Default::default();
    for v in 0..n {
        if !used[v] {
            continue;
        }
        let root = uf.find(v);
        let slot = *root_slot.entry(root).or_insert_with(|| {
            components.push(Vec::new());
            components.len() - 1
        });
        components[slot].push(v);
    }
    if components.len() <= 1 {
        return None;
    }
    // Unused variables do not affect values; keep the cover invariant by
    // attaching them to the first block.
    let unused: Vec<usize> = (0..n).filter(|&v| !used[v]).collect();
    if !unused.is_empty() {
        components[0].extend(unused);
        components[0].sort_unstable();
    }
    let blocks = components
        .into_iter()
        .map(|vars| {
            let mut local_index = vec![usize::MAX; n];
            for (local, &v) in vars.iter().enumerate() {
                local_index[v] = local;
            }
            let mut form = Form::zero(vars.len(), f.degree());
            for (mono, c) in f.terms() {
                if mono
                    .exponents()
                    .iter()
                    .enumerate()
                    .any(|(v, &e)| e > 0 && local_index[v] != usize::MAX)
                {
                    let mut exps = vec![0u32; vars.len()];
                    for (v, &e) in mono.exponents().iter().enumerate() {
                        if e > 0 {
                            exps[local_index[v]] = e;
                        }
                    }
                    form.add_term(exps, c.clone());
                }
            }
            let mut weight = form.content();
            debug_assert!(!weight.is_zero());
            // sign: make the leading (lexicographically largest) local
            // coefficient positive
            if let Some((_, lead)) = form.terms().next_back() {
                if lead.is_negative() {
                    weight = -weight;
                }
            }
            let inv_weight = weight.clone();
            let form = Form::from_terms(
                vars.len(),
                f.degree(),
                form.terms()
                    .map(|(m, c)| (m.exponents().to_vec(), c / &inv_weight)),
            );
            SplitBlock {
                variables: vars,
                form,
                weight,
            }
        })
        .collect();
    Some(SplitForm::new(n, blocks).expect("components form a valid split"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::forms::{parse_form, terjanian_f};

    #[test]
    fn terjanian_f_detects_as_six_blocks() {
        let flat = terjanian_f().to_form();
        let split = detect_split(&flat).expect("F splits");
        assert_eq!(split.blocks().len(), 6);
        let weights: Vec<i64> = split
            .blocks()
            .iter()
            .map(|b| i64::try_from(&b.weight).unwrap())
            .collect();
        assert_eq!(weights, vec![1, 1, 1, 4, 4, 4]);
        assert_eq!(split.to_form(), flat);
    }

    #[test]
    fn two_singleton_blocks() {
        let f = parse_form("x1^2 + x2^2").unwrap();
        let split = detect_split(&f).unwrap();
        assert_eq!(split.blocks().len(), 2);
        assert_eq!(split.blocks()[0].variables, vec![0]);
        assert_eq!(split.blocks()[1].variables, vec![1]);
    }

    #[test]
    fn connected_forms_do_not_split() {
        let f = parse_form("x1*x2").unwrap();
        assert!(detect_split(&f).is_none());
    }

    #[test]
    fn unused_variable_is_attached_to_first_block() {
        let f = parse_form("x1^2 + x3^2").unwrap();
        let split = detect_split(&f).unwrap();
        assert_eq!(split.blocks().len(), 2);
        assert_eq!(split.blocks()[0].variables, vec![0, 1]);
        assert_eq!(split.to_form(), f);
    }

    #[test]
    fn split_evaluation_matches_flat_evaluation() {
        let flat = terjanian_f().to_form();
        let split = terjanian_f();
        let mut x = vec![0i64; 18];
        for (i, v) in x.iter_mut().enumerate() {
            *v = (i as i64 * 7 - 5) % 9;
        }
        for m in [4u64, 16, 81] {
            assert_eq!(
                split.evaluate(&x, m).unwrap(),
                crate::forms::evaluate(&flat, &x, m).unwrap()
            );
        }
    }

    #[test]
    fn negative_blocks_get_signed_weights() {
        let f = parse_form("-2*x1^2 + 6*x2^2").unwrap();
        let split = detect_split(&f).unwrap();
        assert_eq!(split.blocks()[0].weight, BigInt::from(-2));
        assert_eq!(split.blocks()[0].form.to_string(), "x1^2");
        assert_eq!(split.blocks()[1].weight, BigInt::from(6));
        assert_eq!(split.to_form(), f);
    }
}
