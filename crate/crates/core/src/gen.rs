//! Seeded random instance generators for harnesses, self-tests and the
//! CLI's `--random` modes. Trials derive their RNG deterministically from
//! a master seed and the trial index, so harnesses are reproducible and
//! order-independent under any parallel schedule.

use num_bigint::BigInt;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::forms::Form;
use crate::quad::QuadSystem;

/// Deterministic per-trial RNG: mixing the index with a 64-bit odd
/// constant keeps nearby trials uncorrelated.
pub fn rng_for_trial(master_seed: u64, trial: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(
        master_seed ^ trial.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15),
    )
}

/// A random quadratic form on `n` variables with coefficients in
/// `[-bound, bound]`; resamples until nonzero.
pub fn random_quadratic_form(n: usize, bound: i64, rng: &mut ChaCha8Rng) -> Form {
    loop {
        let mut f = Form::zero(n, 2);
        for i in 0..n {
            for j in i..n {
                let c = rng.gen_range(-bound..=bound);
                if c != 0 {
                    let mut exps = vec![0u32; n];
                    exps[i] += 1;
                    exps[j] += 1;
                    f.add_term(exps, BigInt::from(c));
                }
            }
        }
        if !f.is_zero() {
            return f;
        }
    }
}

/// A random system of `r` quadratic forms over F_p (coefficients in
/// `[0, p)`), each form nonzero mod p.
pub fn random_quad_system_mod_p(n: usize, r: usize, p: u64, rng: &mut ChaCha8Rng) -> QuadSystem {
    let forms = (0..r)
        .map(|_| loop {
            let mut f = Form::zero(n, 2);
            for i in 0..n {
                for j in i..n {
                    let c = rng.gen_range(0..p) as i64;
                    if c != 0 {
                        let mut exps = vec![0u32; n];
                        exps[i] += 1;
                        exps[j] += 1;
                        f.add_term(exps, BigInt::from(c));
                    }
                }
            }
            if !f.is_zero() {
                return f;
            }
        })
        .collect();
    QuadSystem::new(forms).expect("nonzero quadratic forms")
}

/// A random system of `r` integer quadratic forms with coefficients in
/// `[-bound, bound]`.
pub fn random_quad_system(n: usize, r: usize, bound: i64, rng: &mut ChaCha8Rng) -> QuadSystem {
    let forms = (0..r)
        .map(|_| random_quadratic_form(n, bound, rng))
        .collect();
    QuadSystem::new(forms).expect("nonzero quadratic forms")
}

/// A random *nondegenerate* quadratic form (rational Gram rank n), for the
/// u-invariant harness.
pub fn random_nondegenerate_quad_form(
    n: usize,
    bound: i64,
    rng: &mut ChaCha8Rng,
) -> crate::quad::QuadForm {
    loop {
        let f = random_quadratic_form(n, bound, rng);
        let q = crate::quad::QuadForm::from_form(&f).expect("degree 2");
        let diag = crate::quad::diagonalize(&q);
        if diag.diagonal.iter().all(|d| !num_traits::Zero::is_zero(d)) {
            return q;
        }
    }
}

/// Random nonzero integer in `[-bound, bound]`.
pub fn random_nonzero(bound: i64, rng: &mut ChaCha8Rng) -> i64 {
    loop {
        let c = rng.gen_range(-bound..=bound);
        if c != 0 {
            return c;
        }
    }
}

/// A random function-field quadratic form: n variables, k parameters,
/// coefficient polynomials of total degree <= d with integer coefficients
/// in `[-bound, bound]`. Resamples until some diagonal entry is nonzero.
pub fn random_ff_quad_form(
    n: usize,
    k: usize,
    d: u32,
    bound: i64,
    rng: &mut ChaCha8Rng,
) -> crate::leep::FfQuadForm {
    use crate::leep::{monomials_up_to, TPoly};
    let basis = monomials_up_to(k, d);
    loop {
        let mut entries = Vec::with_capacity(n * (n + 1) / 2);
        for _ in 0..n * (n + 1) / 2 {
            let mut poly = TPoly::zero(k);
            for mono in &basis {
                let c = rng.gen_range(-bound..=bound);
                if c != 0 {
                    poly.add_term(mono.clone(), BigInt::from(c));
                }
            }
            entries.push(poly);
        }
        let q = crate::leep::FfQuadForm::new(n, k, d, entries).expect("sized entries");
        if (0..n).any(|i| !q.entry(i, i).is_zero()) {
            return q;
        }
    }
}

/// A random split form within a total-space bound: blocks of 1..=2
/// variables, random sparse homogeneous block forms, nonzero weights.
/// Returns the form together with (p, m) chosen so that p^{m * n} stays
/// at or below `max_space`.
pub fn random_split_form(
    max_space: u128,
    rng: &mut ChaCha8Rng,
) -> (crate::forms::SplitForm, u64, u32) {
    use crate::forms::{Form, SplitBlock, SplitForm};
    loop {
        let p: u64 = *[2u64, 3].get(rng.gen_range(0..2)).unwrap();
        let degree = rng.gen_range(2..=4u32);
        let num_blocks = rng.gen_range(2..=4usize);
        let sizes: Vec<usize> = (0..num_blocks).map(|_| rng.gen_range(1..=2)).collect();
        let n: usize = sizes.iter().sum();
        // largest m with p^{m n} <= max_space
        let mut m = 0u32;
        while (p as u128)
            .checked_pow((m + 1) * n as u32)
            .is_some_and(|s| s <= max_space)
        {
            m += 1;
        }
        if m == 0 {
            continue;
        }
        let m = rng.gen_range(1..=m);
        let mut blocks = Vec::with_capacity(num_blocks);
        let mut next_var = 0usize;
        for &size in &sizes {
            let vars: Vec<usize> = (next_var..next_var + size).collect();
            next_var += size;
            let mut form = Form::zero(size, degree);
            for _ in 0..rng.gen_range(1..=3) {
                let mut exps = vec![0u32; size];
                let mut remaining = degree;
                for slot in exps.iter_mut().take(size - 1) {
                    let e = rng.gen_range(0..=remaining);
                    *slot = e;
                    remaining -= e;
                }
                exps[size - 1] += remaining;
                form.add_term(exps, BigInt::from(rng.gen_range(-5i64..=5)));
            }
            if form.is_zero() {
                let mut exps = vec![0u32; size];
                exps[0] = degree;
                form.add_term(exps, BigInt::from(random_nonzero(5, rng)));
            }
            blocks.push(SplitBlock {
                variables: vars,
                form,
                weight: BigInt::from(random_nonzero(3, rng)),
            });
        }
        return (
            SplitForm::new(n, blocks).expect("blocks partition the variables"),
            p,
            m,
        );
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn trial_rngs_are_reproducible_and_distinct() {
        let a: u64 = rng_for_trial(7, 0).gen();
        let b: u64 = rng_for_trial(7, 0).gen();
        let c: u64 = rng_for_trial(7, 1).gen();
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn nondegenerate_forms_have_full_rank() {
        let mut rng = rng_for_trial(3, 0);
        for _ in 0..5 {
            let q = random_nondegenerate_quad_form(4, 5, &mut rng);
            let d = crate::quad::diagonalize(&q);
            assert!(d.diagonal.iter().all(|x| !num_traits::Zero::is_zero(x)));
        }
    }
}
