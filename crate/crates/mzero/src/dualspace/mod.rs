//! Breadth-one local dual spaces: differential functionals, the `Δ_k`/`Λ_k`
//! recursion, multiplicity detection, and the tensor-only evaluation of
//! `Δ_k(g)` used by the refinement and certification code.

mod basis;
mod chainrule;
mod functional;

pub use basis::{
    closedness_residual, compute_dual_basis, corank_one_check, next_delta, solve_lambda_coeffs,
    solve_lambda_coeffs_from, CorankReport, DualBasis, DualOptions, LambdaCoeffs, DEFAULT_DELTA_ZERO_TOL,
    DEFAULT_DUALITY_TOL, DEFAULT_GAP_TOL, DEFAULT_MAX_ORDER, MEMBERSHIP_FLOOR,
};
pub use chainrule::{chainrule_lk, ChainRuleDeltas};
pub use functional::DualFunctional;
