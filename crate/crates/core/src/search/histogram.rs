//! Exact value distributions of forms modulo p^m, and their convolution
//! across the blocks of a split form.
//!
//! For a block G on n variables, histogram (a) counts `G(x) mod p^m` over
//! all x mod p^m, and histogram (b) counts the values contributed by
//! vectors divisible by p, via the identity `G(p y) = p^d G(y)` with y
//! running mod p^{m-1} (each such vector counted once). Convolving the (a)
//! histograms of all blocks (weights folded into the values) counts all
//! zeros of the split form; convolving the (b) histograms counts the zeros
//! with every block divisible by p; the difference is the primitive zero
//! count.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::ToPrimitive;
use serde::Serialize;

use super::{Guards, SearchError};
use crate::arith::{checked_pow_u64, mul_mod_u64};
use crate::exec;
use crate::forms::{CompiledForm, Form, SplitForm};

/// Exact value counts of one block modulo p^m.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ValueHistogram {
    pub p: u64,
    pub level: u32,
    /// p^m; histogram vectors have this length.
    pub modulus: u64,
    /// counts over all vectors mod p^m (total p^{m n}).
    pub all: Vec<u64>,
    /// counts over vectors divisible by p, each counted once as p*y with
    /// y mod p^{m-1} (total p^{(m-1) n}).
    pub divisible: Vec<u64>,
}

fn radix_decode(mut flat: u64, radix: u64, coords: &mut [u64]) {
    for c in coords.iter_mut().rev() {
        *c = flat % radix;
        flat /= radix;
    }
}

fn histogram_scan(
    compiled: &CompiledForm,
    n: usize,
    radix: u64,
    modulus: u64,
    scale: u64,
    total: u64,
    sequential: bool,
) -> Vec<u64> {
    // one histogram slot per residue; chunks are kept large relative to the
    // modulus so per-chunk allocation stays cheap
    exec::map_reduce_min_chunk(
        total,
        modulus / 16,
        sequential,
        |range| {
            let mut local = vec![0u64; modulus as usize];
            let mut coords = vec![0u64; n];
            radix_decode(range.start, radix, &mut coords);
            let mut idx = range.start;
            loop {
                let value = compiled.eval(&coords);
                let value = if scale == 1 {
                    value
                } else {
                    mul_mod_u64(scale, value, modulus)
                };
                local[value as usize] += 1;
                idx += 1;
                if idx >= range.end {
                    break;
                }
                for c in coords.iter_mut().rev() {
                    *c += 1;
                    if *c == radix {
                        *c = 0;
                    } else {
                        break;
                    }
                }
            }
            local
        },
        || vec![0u64; modulus as usize],
        |mut a, b| {
            for (x, y) in a.iter_mut().zip(&b) {
                *x += y;
            }
            a
        },
    )
}

fn value_distribution_impl(
    block: &Form,
    p: u64,
    m: u32,
    guards: &Guards,
    sequential: bool,
) -> Result<ValueHistogram, SearchError> {
    assert!(m >= 1);
    let modulus = checked_pow_u64(p, m).ok_or(SearchError::ModulusOverflow { p, m })?;
    if modulus > guards.max_modulus {
        return Err(SearchError::GuardExceeded(format!(
            "histogram modulus {modulus} exceeds the guard {}",
            guards.max_modulus
        )));
    }
    let n = block.n();
    let space = (modulus as u128)
        .checked_pow(n as u32)
        .filter(|&s| s <= guards.max_points as u128);
    let Some(space) = space else {
        return Err(SearchError::GuardExceeded(format!(
            "{modulus}^{n} points exceed the enumeration guard"
        )));
    };
    let compiled = CompiledForm::new(block, modulus);
    let all = histogram_scan(&compiled, n, modulus, modulus, 1, space as u64, sequential);

    // divisible-by-p vectors: value p^d * G(y) with y mod p^{m-1}
    let prefix = modulus / p;
    let div_total = (prefix as u128).pow(n as u32) as u64;
    let mut scale = 1u64;
    for _ in 0..block.degree() {
        scale = mul_mod_u64(scale, p % modulus, modulus);
    }
    let divisible = if scale == 0 {
        // d >= m: p^d annihilates everything mod p^m
        let mut hist = vec![0u64; modulus as usize];
        hist[0] = div_total;
        hist
    } else {
        histogram_scan(
            &compiled,
            n,
            prefix.max(1),
            modulus,
            scale,
            div_total,
            sequential,
        )
    };
    Ok(ValueHistogram {
        p,
        level: m,
        modulus,
        all,
        divisible,
    })
}

/// Exact value histograms of `block` modulo p^m, by full enumeration.
pub fn value_distribution(
    block: &Form,
    p: u64,
    m: u32,
    guards: &Guards,
) -> Result<ValueHistogram, SearchError> {
    value_distribution_impl(block, p, m, guards, false)
}

/// Sequential reference path for [`value_distribution`] (identical output).
pub fn value_distribution_seq(
    block: &Form,
    p: u64,
    m: u32,
    guards: &Guards,
) -> Result<ValueHistogram, SearchError> {
    value_distribution_impl(block, p, m, guards, true)
}

fn fill_convolution(
    out: &mut [u128],
    acc: &[u128],
    support: &[(u64, u64)],
    modulus: u64,
    base: u64,
) -> Result<(), SearchError> {
    for (k, slot) in out.iter_mut().enumerate() {
        let w = base + k as u64;
        let mut sum: u128 = 0;
        for &(offset, count) in support {
            let src = (w + modulus - offset) % modulus;
            let term = acc[src as usize]
                .checked_mul(count as u128)
                .ok_or(SearchError::CountOverflow)?;
            sum = sum.checked_add(term).ok_or(SearchError::CountOverflow)?;
        }
        *slot = sum;
    }
    Ok(())
}

/// `new[(v + weight * u) mod p^m] += acc[v] * hist[u]`, as exact u128
/// counts.
fn convolve_weighted(
    acc: &[u128],
    hist: &[u64],
    weight: u64,
    modulus: u64,
    guards: &Guards,
    sequential: bool,
) -> Result<Vec<u128>, SearchError> {
    let support: Vec<(u64, u64)> = hist
        .iter()
        .enumerate()
        .filter(|(_, &c)| c != 0)
        .map(|(u, &c)| (mul_mod_u64(weight, u as u64, modulus), c))
        .collect();
    let ops = modulus as u128 * support.len() as u128;
    if ops > guards.max_conv_ops {
        return Err(SearchError::GuardExceeded(format!(
            "convolution cost {ops} exceeds the guard {}",
            guards.max_conv_ops
        )));
    }
    let mut out = vec![0u128; modulus as usize];
    let run_parallel = cfg!(feature = "parallel") && !sequential;
    if run_parallel {
        #[cfg(feature = "parallel")]
        {
            use rayon::prelude::*;
            let chunk = (modulus as usize).div_ceil(256).max(1024);
            out.par_chunks_mut(chunk)
                .enumerate()
                .try_for_each(|(ci, slice)| {
                    fill_convolution(slice, acc, &support, modulus, (ci * chunk) as u64)
                })?;
        }
    } else {
        fill_convolution(&mut out, acc, &support, modulus, 0)?;
    }
    Ok(out)
}

fn weight_mod(weight: &BigInt, modulus: u64) -> u64 {
    weight.mod_floor(&BigInt::from(modulus)).to_u64().unwrap()
}

/// Full accounting of a split-convolution zero count.
#[derive(Debug, Clone, Serialize)]
pub struct SplitCount {
    pub p: u64,
    pub level: u32,
    pub modulus: u64,
    /// zeros over all vectors mod p^m (including the origin)
    pub all_zeros: u128,
    /// zeros with every coordinate divisible by p
    pub divisible_zeros: u128,
    /// all_zeros - divisible_zeros
    pub primitive_zeros: u128,
    /// per-block histograms, in block order
    pub histograms: Vec<ValueHistogram>,
}

fn split_zero_count_impl(
    sf: &SplitForm,
    p: u64,
    m: u32,
    guards: &Guards,
    sequential: bool,
) -> Result<SplitCount, SearchError> {
    let modulus = checked_pow_u64(p, m).ok_or(SearchError::ModulusOverflow { p, m })?;
    let mut acc_all: Vec<u128> = vec![0; modulus as usize];
    acc_all[0] = 1;
    let mut acc_div = acc_all.clone();
    let mut histograms = Vec::with_capacity(sf.blocks().len());
    for block in sf.blocks() {
        let hist = value_distribution_impl(&block.form, p, m, guards, sequential)?;
        let w = weight_mod(&block.weight, modulus);
        acc_all = convolve_weighted(&acc_all, &hist.all, w, modulus, guards, sequential)?;
        acc_div = convolve_weighted(&acc_div, &hist.divisible, w, modulus, guards, sequential)?;
        histograms.push(hist);
    }
    let all_zeros = acc_all[0];
    let divisible_zeros = acc_div[0];
    debug_assert!(all_zeros >= divisible_zeros);
    Ok(SplitCount {
        p,
        level: m,
        modulus,
        all_zeros,
        divisible_zeros,
        primitive_zeros: all_zeros - divisible_zeros,
        histograms,
    })
}

/// Count the primitive zeros of a split form mod p^m by per-block
/// histogram convolution, with the full inclusion-exclusion ledger.
pub fn split_zero_count_detailed(
    sf: &SplitForm,
    p: u64,
    m: u32,
    guards: &Guards,
) -> Result<SplitCount, SearchError> {
    split_zero_count_impl(sf, p, m, guards, false)
}

/// Primitive-zero count of a split form mod p^m.
pub fn split_zero_count(
    sf: &SplitForm,
    p: u64,
    m: u32,
    guards: &Guards,
) -> Result<u128, SearchError> {
    Ok(split_zero_count_detailed(sf, p, m, guards)?.primitive_zeros)
}

/// Sequential reference path for [`split_zero_count`] (identical output).
pub fn split_zero_count_seq(
    sf: &SplitForm,
    p: u64,
    m: u32,
    guards: &Guards,
) -> Result<u128, SearchError> {
    Ok(split_zero_count_impl(sf, p, m, guards, true)?.primitive_zeros)
}

/// Direct primitive-zero count of a flat form mod p^m, by enumeration of
/// all p^{m n} vectors. The convolution route must agree with this.
pub fn count_primitive_zeros_direct(
    f: &Form,
    p: u64,
    m: u32,
    guards: &Guards,
) -> Result<u128, SearchError> {
    let modulus = checked_pow_u64(p, m).ok_or(SearchError::ModulusOverflow { p, m })?;
    let n = f.n();
    let space = (modulus as u128)
        .checked_pow(n as u32)
        .filter(|&s| s <= guards.max_points as u128)
        .ok_or_else(|| {
            SearchError::GuardExceeded(format!("{modulus}^{n} points exceed the guard"))
        })?;
    let compiled = CompiledForm::new(f, modulus);
    let count = exec::map_reduce(
        space as u64,
        |range| {
            let mut coords = vec![0u64; n];
            radix_decode(range.start, modulus, &mut coords);
            let mut idx = range.start;
            let mut local: u128 = 0;
            loop {
                if compiled.eval(&coords) == 0 && coords.iter().any(|&c| c % p != 0) {
                    local += 1;
                }
                idx += 1;
                if idx >= range.end {
                    break;
                }
                for c in coords.iter_mut().rev() {
                    *c += 1;
                    if *c == modulus {
                        *c = 0;
                    } else {
                        break;
                    }
                }
            }
            local
        },
        || 0u128,
        |a, b| a + b,
    );
    Ok(count)
}
