//! Sparse multivariate complex polynomials: representation, parsing,
//! evaluation, derivative tensors, Taylor jets, basepoint shifts and unitary
//! changes of coordinates evaluated by the chain rule.

mod frame;
mod jet;
mod monomial;
mod parse;
mod poly;
mod tensor;

pub use frame::{mat_vec, svd_frame, unitarity_defect, unitary_pullback, NormalizedFrame, UNITARY_TOL};
pub use jet::{apply_functional, Jet, LocalModel};
pub use monomial::{binomial, factorial, Monomial};
pub use parse::{parse_complex, parse_point, parse_point_lines, parse_system};
pub use poly::{eval_system, shift_basepoint, vec_norm, CPoint, Poly, PolySystem};
pub use tensor::{derivative_tensor, derivative_tensor_scaled, poly_derivative_tensor, CTensor};
