//! Named forms: Terjanian's quartics G and F, and the three-variable
//! quartic H(A,B,C,D,E,F) used by the coefficient scan.

use num_bigint::BigInt;

use super::split::{AnyForm, SplitBlock, SplitForm};
use super::{Form, FormsError, Result};

/// `G(x1,x2,x3) = x1^4 + x2^4 + x3^4 - (x1^2 x2^2 + x1^2 x3^2 + x2^2 x3^2)
/// - x1 x2 x3 (x1 + x2 + x3)`.
pub fn terjanian_g() -> Form {
    let t = |e: [u32; 3], c: i64| (e.to_vec(), BigInt::from(c));
    Form::from_terms(
        3,
        4,
        vec![
            t([4, 0, 0], 1),
            t([0, 4, 0], 1),
            t([0, 0, 4], 1),
            t([2, 2, 0], -1),
            t([2, 0, 2], -1),
            t([0, 2, 2], -1),
            t([2, 1, 1], -1),
            t([1, 2, 1], -1),
            t([1, 1, 2], -1),
        ],
    )
}

/// Terjanian's 18-variable quartic `F = G + G + G + 4G + 4G + 4G` on six
/// disjoint triples of variables; it has only the trivial zero over `Q_2`.
pub fn terjanian_f() -> SplitForm {
    let g = terjanian_g();
    let blocks = (0..6)
        .map(|b| SplitBlock {
            variables: (3 * b..3 * b + 3).collect(),
            form: g.clone(),
            weight: BigInt::from(if b < 3 { 1 } else { 4 }),
        })
        .collect();
    SplitForm::new(18, blocks).expect("terjanian blocks are disjoint")
}

/// `H(x,y,z) = A x^4 + B x y^3 + C y^4 + D x z^3 + E y z^3 + F z^4`.
///
/// Each variable carries a unit fourth power when A, C, F are units, which
/// is what the coefficient scan relies on.
pub fn quartic_h(a: i64, b: i64, c: i64, d: i64, e: i64, f: i64) -> Form {
    let t = |exp: [u32; 3], coeff: i64| (exp.to_vec(), BigInt::from(coeff));
    Form::from_terms(
        3,
        4,
        vec![
            t([4, 0, 0], a),
            t([1, 3, 0], b),
            t([0, 4, 0], c),
            t([1, 0, 3], d),
            t([0, 1, 3], e),
            t([0, 0, 4], f),
        ],
    )
}

/// Look up a builtin by name: `terjanian-G`, `terjanian-F`, or
/// `quartic-H(A,B,C,D,E,F)` with integer parameters.
pub fn builtin_form(name: &str) -> Result<AnyForm> {
    let trimmed = name.trim();
    match trimmed {
        "terjanian-G" => return Ok(AnyForm::Single(terjanian_g())),
        "terjanian-F" => return Ok(AnyForm::Split(terjanian_f())),
        _ => {}
    }
    if let Some(rest) = trimmed.strip_prefix("quartic-H(") {
        if let Some(args) = rest.strip_suffix(')') {
            let parsed: std::result::Result<Vec<i64>, _> =
                args.split(',').map(|s| s.trim().parse::<i64>()).collect();
            if let Ok(v) = parsed {
                if v.len() == 6 {
                    return Ok(AnyForm::Single(quartic_h(
                        v[0], v[1], v[2], v[3], v[4], v[5],
                    )));
                }
            }
        }
        return Err(FormsError::UnknownName(trimmed.to_string()));
    }
    Err(FormsError::UnknownName(trimmed.to_string()))
}
