//! Error type shared by every module of the crate.

use thiserror::Error;

/// Errors reported by the library.
///
/// Every variant is classified either as an *input* error (malformed text,
/// mismatched dimensions, invalid arguments) or as a *numerical-domain* error
/// (singular matrices, failed root finding, a point that is not a simple
/// multiple zero). The command-line front end maps the two classes to exit
/// codes 2 and 3 respectively; see [`MzError::is_input_error`].
#[derive(Debug, Clone, Error, PartialEq)]
pub enum MzError {
    /// The system text could not be parsed.
    #[error("syntax error at line {line}, column {column}: {message}")]
    Syntax {
        /// 1-based line number.
        line: usize,
        /// 1-based column number.
        column: usize,
        /// Human-readable description.
        message: String,
    },
    /// The number of polynomials does not equal the number of variables.
    #[error("non-square system: {polys} polynomials in {vars} variables")]
    NonSquare {
        /// Number of polynomials declared.
        polys: usize,
        /// Number of variables declared.
        vars: usize,
    },
    /// Two objects that must share a dimension do not.
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch {
        /// Expected dimension.
        expected: usize,
        /// Dimension actually supplied.
        got: usize,
    },
    /// A caller-supplied argument is outside its valid range.
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    /// A point coordinate is NaN or infinite.
    #[error("point has a non-finite coordinate at index {0}")]
    NonFinitePoint(usize),
    /// A matrix expected to be unitary is not, within tolerance.
    #[error("matrix is not unitary: deviation {deviation:.3e}")]
    NotUnitary {
        /// Spectral norm of `Q*Q - I`.
        deviation: f64,
    },
    /// A linear system is singular to working precision.
    #[error("singular matrix: smallest singular value {sigma_min:.3e} (largest {sigma_max:.3e})")]
    Singular {
        /// Smallest singular value.
        sigma_min: f64,
        /// Largest singular value.
        sigma_max: f64,
    },
    /// An iterative kernel hit its iteration cap.
    #[error("no convergence: {0}")]
    NoConvergence(String),
    /// The scalar root finder did not find a sign change.
    #[error("no sign change of the function on [{lo}, {hi}]")]
    NoSignChange {
        /// Left end of the scanned interval.
        lo: f64,
        /// Right end of the scanned interval.
        hi: f64,
    },
    /// The Jacobian does not have a numerically one-dimensional kernel.
    #[error("Jacobian is not corank one at the point (singular values {singular_values:?})")]
    NotCorankOne {
        /// Singular values of the Jacobian, descending.
        singular_values: Vec<f64>,
    },
    /// The point is not normalized and the operation requires it.
    #[error("system is not in normalized form at the point: {0}")]
    NotNormalized(String),
    /// The dual-basis recursion did not terminate within the order cap.
    #[error("multiplicity exceeds cap {cap} or point is not a simple multiple zero")]
    MultiplicityCap {
        /// Maximum order that was tried.
        cap: usize,
    },
    /// A user-supplied multiplicity disagrees with the detected one.
    #[error("multiplicity mismatch: requested {requested}, detected {detected}")]
    MultiplicityMismatch {
        /// Value supplied by the caller.
        requested: usize,
        /// Value found by the recursion (0 if none within the requested order).
        detected: usize,
    },
    /// A quantity that must be nonzero vanished numerically.
    #[error("degenerate quantity: {0}")]
    Degenerate(String),
    /// A rational function was evaluated at or beyond its first pole.
    #[error("argument {u} is outside the pole-free range [0, {limit})")]
    OutsideDomain {
        /// Argument supplied.
        u: f64,
        /// First pole.
        limit: f64,
    },
    /// A point lies outside the admissible radius of a bound.
    #[error("distance {distance:.6e} exceeds the admissible radius {radius:.6e}")]
    OutsideRadius {
        /// Distance from the center.
        distance: f64,
        /// Admissible radius.
        radius: f64,
    },
}

impl MzError {
    /// Whether this error is caused by malformed or inconsistent input (as
    /// opposed to a numerical-domain failure).
    pub fn is_input_error(&self) -> bool {
        matches!(
            self,
            MzError::Syntax { .. }
                | MzError::NonSquare { .. }
                | MzError::DimensionMismatch { .. }
                | MzError::InvalidArgument(_)
                | MzError::NonFinitePoint(_)
        )
    }

    /// Process exit code associated with the error class: 2 for input
    /// errors, 3 for numerical-domain errors.
    pub fn exit_code(&self) -> i32 {
        if self.is_input_error() {
            2
        } else {
            3
        }
    }
}

/// Convenience alias used throughout the crate.
pub type Result<T> = std::result::Result<T, MzError>;
