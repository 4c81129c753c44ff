//! Dense complex linear algebra, tensor operator norms and scalar root
//! bracketing.

mod linalg;
mod roots;
mod tensornorm;

pub use linalg::{inverse, least_squares, matrix_spectral_norm, solve_linear, solve_vec, svd, SvdResult};
pub use roots::{smallest_positive_root, SCAN_STEPS};
pub use tensornorm::{
    hopm, hopm_seed, tensor_norm, NormMode, NormRequest, TensorNorm, DEFAULT_HOPM_SEED, HOPM_ITERS, HOPM_RESTARTS,
    HOPM_TOL, SYMMETRY_TOL,
};
