//! Solubility of homogeneous forms and quadratic systems over p-adic fields.
//!
//! The crate decides, searches and *certifies* whether a form of degree `d`
//! in `n` variables has a nontrivial zero over `Q_p`, at desk scale and with
//! exact integer arithmetic throughout:
//!
//! * [`arith`] — prime fields, bounded-precision p-adic integers, square
//!   classes and Hilbert symbols;
//! * [`forms`] — sparse homogeneous forms: parsing, evaluation, linear
//!   substitution, content normalization and block-split detection;
//! * [`lifting`] — Hensel lifting of approximate zeros, for single forms
//!   (including singular-mod-p seeds via the `v(f) >= 2e + 1` criterion)
//!   and for systems with full-rank Jacobian;
//! * [`search`] — exhaustive primitive-zero enumeration, value-histogram
//!   convolution for split forms, the solve pipeline and its certificates,
//!   and the quartic coefficient scan;
//! * [`quad`] — quadratic-form theory: diagonalization and isotropy over
//!   `Q_p`, rank distributions and common-zero counts over `F_p`, and
//!   best-effort solving of quadratic systems over `Z_p`;
//! * [`diagonal`] — diagonal equations `c_1 x_1^d + ... + c_m x_m^d = 0`;
//! * [`leep`] — compiling a quadratic form over `Q_p(t_1..t_k)` with
//!   polynomial coefficients into a system of quadratic forms over `Q_p`,
//!   and reconstructing function-field solutions.
//!
//! Certified outcomes (soluble with a Hensel-liftable witness, or insoluble
//! with an exhaustively verified empty primitive-zero set modulo `p^m`) are
//! always distinguished from `Unknown`; no probabilistic claim is ever
//! emitted as a certificate.
//!
//! With the default `parallel` feature the enumeration kernels run on rayon;
//! results are bit-identical to the sequential fallback because every
//! parallel merge is associative and commutative over exact integers.

pub mod arith;
pub mod diagonal;
pub mod exec;
pub mod forms;
pub mod gen;
pub mod leep;
pub mod lifting;
pub(crate) mod linalg;
pub mod quad;
pub mod search;
pub mod selftest;
