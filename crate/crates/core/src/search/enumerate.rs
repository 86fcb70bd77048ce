//! Enumeration of primitive vectors modulo p^m, up to unit scaling.
//!
//! Representatives normalize the first unit coordinate to 1: for a pivot
//! position `i`, coordinates before `i` run over multiples of p and
//! coordinates after `i` run over all residues. This covers every primitive
//! vector exactly once up to units, cutting the space by the unit-group
//! factor. The canonical enumeration order is: pivot position ascending,
//! then the remaining coordinates lexicographically (last coordinate
//! fastest), which gives every search a deterministic "first" result with
//! O(1) random access for parallel chunking.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{Guards, SearchError};
use crate::arith::checked_pow_u64;
use crate::exec;
use crate::forms::{CompiledForm, Form};
use crate::lifting::{self, LiftCheck, LiftWitness};

/// The space of normalized primitive vectors mod p^m, flat-indexable.
#[derive(Debug, Clone)]
pub(crate) struct PrimitiveSpace {
    n: usize,
    p: u64,
    modulus: u64,
    prefix_radix: u64,  // p^{m-1}
    offsets: Vec<u128>, // offsets[i] = first flat index of segment i; last = total
}

impl PrimitiveSpace {
    pub(crate) fn new(n: usize, p: u64, m: u32) -> Result<Self, SearchError> {
        assert!(m >= 1 && n >= 1);
        let modulus = checked_pow_u64(p, m).ok_or(SearchError::ModulusOverflow { p, m })?;
        let prefix_radix = modulus / p;
        let mut offsets = Vec::with_capacity(n + 1);
        let mut acc: u128 = 0;
        for i in 0..n {
            offsets.push(acc);
            let mut size: u128 = 1;
            for _ in 0..i {
                size = size.saturating_mul(prefix_radix as u128);
            }
            for _ in i + 1..n {
                size = size.saturating_mul(modulus as u128);
            }
            acc = acc.saturating_add(size);
        }
        offsets.push(acc);
        Ok(PrimitiveSpace {
            n,
            p,
            modulus,
            prefix_radix,
            offsets,
        })
    }

    pub(crate) fn total(&self) -> u128 {
        *self.offsets.last().unwrap()
    }

    pub(crate) fn modulus(&self) -> u64 {
        self.modulus
    }

    fn segment_of(&self, flat: u128) -> usize {
        (0..self.n)
            .rfind(|&i| self.offsets[i] <= flat)
            .expect("flat index within total")
    }

    /// Decode a flat index into (pivot, coordinates).
    pub(crate) fn decode(&self, flat: u64) -> (usize, Vec<u64>) {
        let flat = flat as u128;
        let pivot = self.segment_of(flat);
        let mut within = flat - self.offsets[pivot];
        let mut coords = vec![0u64; self.n];
        coords[pivot] = 1;
        for j in (0..self.n).rev() {
            if j == pivot {
                continue;
            }
            if j < pivot {
                let digit = (within % self.prefix_radix as u128) as u64;
                within /= self.prefix_radix as u128;
                coords[j] = digit * self.p;
            } else {
                let digit = (within % self.modulus as u128) as u64;
                within /= self.modulus as u128;
                coords[j] = digit;
            }
        }
        (pivot, coords)
    }

    /// Visit `range` in order; `visit` returns `true` to stop early.
    pub(crate) fn scan(
        &self,
        range: std::ops::Range<u64>,
        mut visit: impl FnMut(u64, &[u64]) -> bool,
    ) {
        let mut idx = range.start;
        if idx >= range.end {
            return;
        }
        let (mut pivot, mut coords) = self.decode(idx);
        loop {
            if visit(idx, &coords) {
                return;
            }
            idx += 1;
            if idx >= range.end {
                return;
            }
            if (idx as u128) == self.offsets[pivot + 1] {
                let (np, nc) = self.decode(idx);
                pivot = np;
                coords = nc;
                continue;
            }
            // odometer step: last coordinate fastest, skipping the pivot
            for j in (0..self.n).rev() {
                if j == pivot {
                    continue;
                }
                let step = if j < pivot { self.p } else { 1 };
                coords[j] += step;
                if coords[j] >= self.modulus {
                    coords[j] = 0;
                } else {
                    break;
                }
            }
        }
    }
}

/// Result of a primitive-zero search.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SearchOutcome {
    /// A primitive common zero mod p^m (normalized representative).
    Found(Vec<u64>),
    /// The whole space was enumerated and holds no zero: certificate-grade.
    ExhaustedNone,
    /// The budget ran out before the space did: NOT certificate-grade.
    BudgetExceeded,
}

fn compile_all(fs: &[Form], modulus: u64) -> Result<Vec<CompiledForm>, SearchError> {
    if fs.is_empty() {
        return Err(SearchError::EmptySystem);
    }
    let n = fs[0].n();
    if fs.iter().any(|f| f.n() != n) {
        return Err(SearchError::MixedArity);
    }
    Ok(fs.iter().map(|f| CompiledForm::new(f, modulus)).collect())
}

fn is_zero_of_all(compiled: &[CompiledForm], x: &[u64]) -> bool {
    compiled.iter().all(|c| c.eval(x) == 0)
}

/// Search for a primitive common zero of `fs` modulo p^m.
///
/// Exhaustive mode (space within both the guard and the budget) enumerates
/// every normalized representative and returns the first zero in canonical
/// order, or the certificate-grade `ExhaustedNone`. Larger spaces fall back
/// to seeded uniform sampling of `budget` primitive vectors;
/// `BudgetExceeded` is then an honest "don't know".
pub fn primitive_zero_search(
    fs: &[Form],
    p: u64,
    m: u32,
    budget: u64,
    seed: u64,
    guards: &Guards,
) -> Result<SearchOutcome, SearchError> {
    let n = fs.first().ok_or(SearchError::EmptySystem)?.n();
    let space = PrimitiveSpace::new(n, p, m)?;
    let compiled = compile_all(fs, space.modulus())?;
    let total = space.total();
    if total <= guards.max_points as u128 && total <= budget as u128 {
        let hit = exec::find_first(total as u64, |range| {
            let mut found = None;
            space.scan(range, |idx, coords| {
                if is_zero_of_all(&compiled, coords) {
                    found = Some((idx, coords.to_vec()));
                    true
                } else {
                    false
                }
            });
            found
        });
        Ok(match hit {
            Some((_, coords)) => SearchOutcome::Found(coords),
            None => SearchOutcome::ExhaustedNone,
        })
    } else {
        let modulus = space.modulus();
        let hit = exec::find_first(budget, |range| {
            let mut rng =
                ChaCha8Rng::seed_from_u64(seed ^ range.start.wrapping_mul(0x9E37_79B9_7F4A_7C15));
            for offset in range.clone() {
                let coords: Vec<u64> = (0..n).map(|_| rng.gen_range(0..modulus)).collect();
                if coords.iter().all(|&c| c % p == 0) {
                    continue;
                }
                if is_zero_of_all(&compiled, &coords) {
                    return Some((offset, coords));
                }
            }
            None
        });
        Ok(match hit {
            Some((_, coords)) => SearchOutcome::Found(coords),
            None => SearchOutcome::BudgetExceeded,
        })
    }
}

/// How a seed search ended.
#[derive(Debug, Clone)]
pub(crate) enum SeedSearch {
    Found(LiftWitness),
    /// Full enumeration found no liftable seed at this level.
    ExhaustedNone,
    /// Truncated or sampled search found nothing; inconclusive.
    Inconclusive,
}

/// Stream the primitive zeros of `f` mod p^m in canonical order and return
/// the first one that passes the liftability check.
pub(crate) fn find_liftable_seed(
    f: &Form,
    p: u64,
    m: u32,
    budget: u64,
    seed: u64,
    guards: &Guards,
) -> Result<SeedSearch, SearchError> {
    let space = PrimitiveSpace::new(f.n(), p, m)?;
    let compiled = compile_all(std::slice::from_ref(f), space.modulus())?;
    let total = space.total();
    let exhaustive = total <= guards.max_points as u128 && total <= budget as u128;
    if exhaustive {
        let hit: Option<Result<(u64, LiftWitness), SearchError>> =
            exec::find_first(total as u64, |range| {
                let mut found = None;
                space.scan(range, |idx, coords| {
                    if !is_zero_of_all(&compiled, coords) {
                        return false;
                    }
                    let x: Vec<i64> = coords.iter().map(|&c| c as i64).collect();
                    match lifting::liftability_check(f, &x, p) {
                        Ok(LiftCheck::Liftable(w)) => {
                            found = Some(Ok((idx, w)));
                            true
                        }
                        Ok(LiftCheck::NotLiftable(_)) => false,
                        Err(e) => {
                            found = Some(Err(SearchError::from(e)));
                            true
                        }
                    }
                });
                found
            });
        match hit {
            Some(Ok((_, w))) => Ok(SeedSearch::Found(w)),
            Some(Err(e)) => Err(e),
            None => Ok(SeedSearch::ExhaustedNone),
        }
    } else {
        let modulus = space.modulus();
        let n = f.n();
        let hit: Option<Result<(u64, LiftWitness), SearchError>> =
            exec::find_first(budget, |range| {
                let mut rng = ChaCha8Rng::seed_from_u64(
                    seed ^ range.start.wrapping_mul(0x9E37_79B9_7F4A_7C15),
                );
                for offset in range.clone() {
                    let coords: Vec<u64> = (0..n).map(|_| rng.gen_range(0..modulus)).collect();
                    if coords.iter().all(|&c| c % p == 0) {
                        continue;
                    }
                    if !is_zero_of_all(&compiled, &coords) {
                        continue;
                    }
                    let x: Vec<i64> = coords.iter().map(|&c| c as i64).collect();
                    match lifting::liftability_check(f, &x, p) {
                        Ok(LiftCheck::Liftable(w)) => return Some(Ok((offset, w))),
                        Ok(LiftCheck::NotLiftable(_)) => {}
                        Err(e) => return Some(Err(SearchError::from(e))),
                    }
                }
                None
            });
        match hit {
            Some(Ok((_, w))) => Ok(SeedSearch::Found(w)),
            Some(Err(e)) => Err(e),
            None => Ok(SeedSearch::Inconclusive),
        }
    }
}

/// How a system seed search ended.
#[derive(Debug, Clone)]
pub(crate) enum SystemSeedSearch {
    Found(lifting::SystemLiftWitness),
    /// Full enumeration: no common zero with full-rank Jacobian exists at
    /// this level (conclusive for the nonsingular-seed method).
    ExhaustedNone,
    Inconclusive,
}

/// Stream the primitive common zeros of `fs` mod p^m in canonical order and
/// return the first with a rank-r Jacobian.
pub(crate) fn find_liftable_system_seed(
    fs: &[Form],
    p: u64,
    m: u32,
    budget: u64,
    seed: u64,
    guards: &Guards,
) -> Result<SystemSeedSearch, SearchError> {
    let n = fs.first().ok_or(SearchError::EmptySystem)?.n();
    let space = PrimitiveSpace::new(n, p, m)?;
    let compiled = compile_all(fs, space.modulus())?;
    let total = space.total();
    let check = |coords: &[u64]| -> Result<Option<lifting::SystemLiftWitness>, SearchError> {
        if !is_zero_of_all(&compiled, coords) {
            return Ok(None);
        }
        let x: Vec<i64> = coords.iter().map(|&c| c as i64).collect();
        match lifting::system_liftability_check(fs, &x, p)? {
            lifting::SystemLiftCheck::Liftable(w) => Ok(Some(w)),
            lifting::SystemLiftCheck::NotLiftable(_) => Ok(None),
        }
    };
    if total <= guards.max_points as u128 && total <= budget as u128 {
        let hit = exec::find_first(total as u64, |range| {
            let mut found = None;
            space.scan(range, |idx, coords| match check(coords) {
                Ok(Some(w)) => {
                    found = Some(Ok((idx, w)));
                    true
                }
                Ok(None) => false,
                Err(e) => {
                    found = Some(Err(e));
                    true
                }
            });
            found
        });
        match hit {
            Some(Ok((_, w))) => Ok(SystemSeedSearch::Found(w)),
            Some(Err(e)) => Err(e),
            None => Ok(SystemSeedSearch::ExhaustedNone),
        }
    } else {
        let modulus = space.modulus();
        let hit = exec::find_first(budget, |range| {
            let mut rng =
                ChaCha8Rng::seed_from_u64(seed ^ range.start.wrapping_mul(0x9E37_79B9_7F4A_7C15));
            for offset in range.clone() {
                let coords: Vec<u64> = (0..n).map(|_| rng.gen_range(0..modulus)).collect();
                if coords.iter().all(|&c| c % p == 0) {
                    continue;
                }
                match check(&coords) {
                    Ok(Some(w)) => return Some(Ok((offset, w))),
                    Ok(None) => {}
                    Err(e) => return Some(Err(e)),
                }
            }
            None
        });
        match hit {
            Some(Ok((_, w))) => Ok(SystemSeedSearch::Found(w)),
            Some(Err(e)) => Err(e),
            None => Ok(SystemSeedSearch::Inconclusive),
        }
    }
}
