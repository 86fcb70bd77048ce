//! Oracle-equivalence suites: every fast route must agree with an
//! independently coded slow one on a fixed seeded corpus.

use num_bigint::BigInt;
use padic_forms::arith;
use padic_forms::diagonal::{self, DiagonalInstance};
use padic_forms::forms::{detect_split, parse_form};
use padic_forms::quad::{self, IsotropyOptions, QuadForm};
use padic_forms::search::{self, Guards, Outcome, SolveOptions};
use padic_forms::selftest;

/// Hilbert symbol vs primitive-zero search for all |a|, |b| <= 20 and
/// p in {2, 3, 5, 7}: zero disagreements.
#[test]
fn hilbert_symbol_matches_search_oracle_up_to_20() {
    let mut cases = 0u64;
    for p in [2u64, 3, 5, 7] {
        for a in -20i64..=20 {
            for b in -20i64..=20 {
                if a == 0 || b == 0 {
                    continue;
                }
                cases += 1;
                assert!(
                    selftest::hilbert_case_agrees(a, b, p),
                    "disagreement at a = {a}, b = {b}, p = {p}"
                );
            }
        }
    }
    assert_eq!(cases, 4 * 40 * 40);
}

/// Split convolution vs naive full enumeration on 250 seeded random split
/// forms with total space <= 3^8.
#[test]
fn split_convolution_matches_naive_enumeration() {
    let guards = Guards::default();
    for trial in 0..250u64 {
        let mut rng = padic_forms::gen::rng_for_trial(0xace, trial);
        let (split, p, m) = padic_forms::gen::random_split_form(3u128.pow(8), &mut rng);
        let conv = search::split_zero_count(&split, p, m, &guards).unwrap();
        let seq = search::split_zero_count_seq(&split, p, m, &guards).unwrap();
        assert_eq!(conv, seq, "parallel vs sequential at trial {trial}");
        let direct = selftest::naive_primitive_zero_count(&split.to_form(), p, m);
        assert_eq!(conv, direct, "trial {trial}: p = {p}, m = {m}");
    }
}

/// Isotropy decisions vs the enumeration oracle for all diagonal forms
/// with entries in {-1, 1, -2, 2, -p, p} and n <= 4, p in {2, 3, 5, 7}.
///
/// Oracle level: for odd p, anisotropic diagonal forms with unit-or-p
/// entries have no primitive zero mod p^3 already (two-step descent); for
/// p = 2 the level 2v+3 = 5 is used.
#[test]
fn isotropy_matches_enumeration_oracle() {
    let guards = Guards::default();
    let opts = IsotropyOptions {
        witness_budget: 1 << 16,
        witness_level_max: 6,
        ..IsotropyOptions::default()
    };
    for p in [2u64, 3, 5, 7] {
        let entries = [1i64, -1, 2, -2, p as i64, -(p as i64)];
        let m = if p == 2 { 5 } else { 3 };
        for n in 1..=4usize {
            let mut index = vec![0usize; n];
            loop {
                let diag: Vec<BigInt> = index.iter().map(|&i| BigInt::from(entries[i])).collect();
                let q = QuadForm::from_diagonal(&diag);
                let decision = quad::isotropic_qp(&q, p, &opts).unwrap();
                let form = q.source_form();
                let count = match detect_split(form) {
                    Some(split) => search::split_zero_count(&split, p, m, &guards).unwrap(),
                    None => search::count_primitive_zeros_direct(form, p, m, &guards).unwrap(),
                };
                assert_eq!(
                    decision.isotropic,
                    count > 0,
                    "p = {p}, diagonal {diag:?}: decision vs count {count} at level {m}"
                );
                // advance the odometer over entry choices
                let mut done = true;
                for slot in index.iter_mut().rev() {
                    *slot += 1;
                    if *slot == entries.len() {
                        *slot = 0;
                    } else {
                        done = false;
                        break;
                    }
                }
                if done {
                    break;
                }
            }
        }
    }
}

/// For d = 2 the diagonal solver and the quadratic isotropy decision are
/// two routes to the same answer.
#[test]
fn diagonal_degree_two_matches_isotropy() {
    for trial in 0..120u64 {
        let mut rng = padic_forms::gen::rng_for_trial(0xd2, trial);
        use rand::Rng;
        let p = [2u64, 3, 5, 7][rng.gen_range(0..4)];
        let n = rng.gen_range(1..=4);
        let entries: Vec<BigInt> = (0..n)
            .map(|_| BigInt::from(padic_forms::gen::random_nonzero(10, &mut rng)))
            .collect();
        let inst = DiagonalInstance::new(entries.clone(), 2, p);
        let outcome = diagonal::solve_diagonal(&inst, &SolveOptions::default()).unwrap();
        let decision = quad::isotropic_qp(
            &QuadForm::from_diagonal(&entries),
            p,
            &IsotropyOptions::default(),
        )
        .unwrap();
        match outcome {
            Outcome::Soluble(_) => assert!(decision.isotropic, "trial {trial}"),
            Outcome::Insoluble(_) => assert!(!decision.isotropic, "trial {trial}"),
            Outcome::Unknown(_) => {
                panic!("trial {trial}: no Unknowns expected at these sizes")
            }
        }
    }
}

/// Certificates survive unit scaling of the form (solve classification is
/// a function of the zero set).
#[test]
fn solve_classification_is_scaling_invariant() {
    for (text, p) in [
        ("x1^2 + x2^2", 2u64),
        ("x1^2 - 17*x2^2", 2),
        ("x1^2 + x2^2 + x3^2", 7),
        ("x1^4 + x2^4 + x3^4", 3),
    ] {
        let f = parse_form(text).unwrap();
        let scaled = padic_forms::forms::Form::from_terms(
            f.n(),
            f.degree(),
            f.terms()
                .map(|(m, c)| (m.exponents().to_vec(), c * BigInt::from(3))),
        );
        let a = search::solve(
            &padic_forms::forms::AnyForm::Single(f),
            p,
            &SolveOptions::default(),
        )
        .unwrap();
        let b = search::solve(
            &padic_forms::forms::AnyForm::Single(scaled),
            p,
            &SolveOptions::default(),
        )
        .unwrap();
        assert_eq!(a.kind(), b.kind(), "{text} at p = {p}");
    }
}

/// The square-class predicate agrees with direct square search mod p^k for
/// every |a| <= 60.
#[test]
fn square_class_matches_direct_search() {
    for p in [2u64, 3, 5, 7] {
        let k = if p == 2 { 10 } else { 5 };
        let modulus = p.pow(k);
        for a in 1i64..=60 {
            let predicted = arith::is_square(&BigInt::from(a), p).unwrap();
            // squares stabilize well below these levels for this range
            let found = (0..modulus).any(|x| (x * x) % modulus == (a as u64) % modulus);
            assert_eq!(predicted, found, "a = {a}, p = {p}");
        }
    }
}
