//! Simple multiple zeros of square polynomial systems.
//!
//! Given a polynomial system `f` and an approximate isolated zero whose
//! Jacobian has corank one, this crate computes the breadth-one local dual
//! basis and multiplicity, the higher-order condition invariants `γ_μ`, a
//! local separation bound, a Rouché-style certificate that a ball contains
//! exactly `μ` zeros counted with multiplicity, and refines the approximate
//! zero with modified Newton iterations that converge quadratically.
//!
//! Modules, bottom-up:
//! - [`polycore`]: sparse complex polynomials, derivative tensors, jets and
//!   unitary changes of coordinates evaluated by the chain rule.
//! - [`numkit`]: SVD, linear solves, tensor norms, scalar root finding.
//! - [`dualspace`]: dual basis recursion and multiplicity detection.
//! - [`gamma`]: the invariants `γ̂_μ`, `γ_{μ,n}` and `γ_μ`.
//! - [`certify`]: separation constants, bounds and cluster certificates.
//! - [`newton`]: modified Newton iterations and their threshold constants.
//! - [`cli`]: the command-line front end used by the `mzero` binary.

// Negated float comparisons are deliberate: they reject NaN along with
// out-of-range values. Index loops mirror the componentwise formulas.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod certify;
pub mod cli;
pub mod dualspace;
pub mod error;
pub mod gamma;
pub mod newton;
pub mod numkit;
pub mod polycore;

/// Double-precision complex scalar used throughout.
pub type C64 = num_complex::Complex64;

pub use error::{MzError, Result};
