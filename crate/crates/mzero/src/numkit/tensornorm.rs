//! Operator norms of symmetric derivative tensors.
//!
//! For a symmetric multilinear map `T : (ℂⁿ)^k → ℂ^m` the operator norm is
//! `sup ‖T(v_1, …, v_k)‖` over unit vectors. Order-one maps and scalar-valued
//! order-two maps are handled exactly by the SVD. In general the Frobenius
//! norm of the full array is a certified upper bound (by Cauchy–Schwarz,
//! `‖T(v_1…v_k)‖ ≤ ‖T‖_F Π‖v_i‖`), and a symmetric higher-order power
//! iteration (HOPM) with deterministic restarts provides a lower estimate
//! that is typically sharp.

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::linalg::{matrix_spectral_norm, svd};
use crate::error::{MzError, Result};
use crate::polycore::{vec_norm, CTensor};
use crate::C64;

/// Default HOPM seed; overridable through the `MZERO_SEED` environment
/// variable.
pub const DEFAULT_HOPM_SEED: u64 = 0x5EED;
/// Number of HOPM restarts.
pub const HOPM_RESTARTS: usize = 16;
/// Iterations per HOPM restart.
pub const HOPM_ITERS: usize = 200;
/// Relative stopping tolerance of HOPM.
pub const HOPM_TOL: f64 = 1e-12;
/// Largest accepted relative asymmetry of an input tensor.
pub const SYMMETRY_TOL: f64 = 1e-12;

/// How a tensor norm was obtained (and which value downstream code uses).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum NormMode {
    /// Exact operator norm via the SVD (order one, or order two with a
    /// single output row).
    ExactSpectral,
    /// Certified Frobenius upper bound.
    Frobenius,
    /// Higher-order power-method estimate (a lower bound on the true norm).
    Hopm,
}

impl NormMode {
    /// Stable lower-case name used in reports.
    pub fn as_str(self) -> &'static str {
        match self {
            NormMode::ExactSpectral => "exact-spectral",
            NormMode::Frobenius => "frobenius",
            NormMode::Hopm => "hopm",
        }
    }
}

/// Which value the caller wants to use.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum NormRequest {
    /// Exact when available, otherwise the HOPM estimate.
    Auto,
    /// Exact when available, otherwise the Frobenius bound.
    Certified,
    /// Exact when available, otherwise the HOPM estimate.
    Estimate,
}

/// Norm of a tensor: a certified upper bound, an estimate, and the mode
/// selecting which of the two [`TensorNorm::value`] returns.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TensorNorm {
    /// Upper bound on the operator norm (exact in `ExactSpectral` mode).
    pub certified_upper: f64,
    /// Estimate of the operator norm, never above `certified_upper`.
    pub estimate: f64,
    /// Mode used.
    pub mode: NormMode,
}

impl TensorNorm {
    /// The value selected by the mode.
    pub fn value(&self) -> f64 {
        match self.mode {
            NormMode::ExactSpectral | NormMode::Hopm => self.estimate,
            NormMode::Frobenius => self.certified_upper,
        }
    }
}

/// The HOPM seed: `MZERO_SEED` (decimal or `0x` hexadecimal) if set and
/// valid, otherwise [`DEFAULT_HOPM_SEED`].
pub fn hopm_seed() -> u64 {
    std::env::var("MZERO_SEED")
        .ok()
        .and_then(|s| {
            let s = s.trim();
            match s.strip_prefix("0x").or_else(|| s.strip_prefix("0X")) {
                Some(h) => u64::from_str_radix(h, 16).ok(),
                None => s.parse().ok(),
            }
        })
        .unwrap_or(DEFAULT_HOPM_SEED)
}

/// Operator norm of a symmetric tensor.
///
/// Order-one tensors (matrices) and order-two tensors with one output row
/// are exact. Otherwise `certified_upper` is the Frobenius norm and
/// `estimate` the best HOPM value over [`HOPM_RESTARTS`] restarts; the mode
/// is `Frobenius` for [`NormRequest::Certified`] and `Hopm` otherwise.
pub fn tensor_norm(t: &CTensor, request: NormRequest) -> Result<TensorNorm> {
    let defect = t.symmetry_defect();
    if defect > SYMMETRY_TOL {
        return Err(MzError::InvalidArgument(format!("tensor is not symmetric (relative defect {defect:.3e})")));
    }
    if t.rows() == 0 || t.dim() == 0 || t.max_abs() == 0.0 {
        let mode = if t.order() == 1 || (t.order() == 2 && t.rows() <= 1) {
            NormMode::ExactSpectral
        } else if request == NormRequest::Certified {
            NormMode::Frobenius
        } else {
            NormMode::Hopm
        };
        return Ok(TensorNorm { certified_upper: 0.0, estimate: 0.0, mode });
    }
    if t.order() == 1 {
        let v = matrix_spectral_norm(&t.flatten())?;
        return Ok(TensorNorm { certified_upper: v, estimate: v, mode: NormMode::ExactSpectral });
    }
    if t.order() == 2 && t.rows() == 1 {
        let v = matrix_spectral_norm(&t.as_form_matrix(0))?;
        return Ok(TensorNorm { certified_upper: v, estimate: v, mode: NormMode::ExactSpectral });
    }
    let fro = t.frobenius();
    let est = hopm(t, HOPM_RESTARTS, HOPM_ITERS, HOPM_TOL, hopm_seed())?.min(fro);
    let mode = if request == NormRequest::Certified { NormMode::Frobenius } else { NormMode::Hopm };
    Ok(TensorNorm { certified_upper: fro, estimate: est, mode })
}

fn normalize(v: &mut [C64]) -> bool {
    let nv = vec_norm(v);
    if nv == 0.0 || !nv.is_finite() {
        return false;
    }
    for c in v.iter_mut() {
        *c /= nv;
    }
    true
}

/// Value `‖T(u, …, u)‖` and the gradient direction for one HOPM step.
fn hopm_step(t: &CTensor, u: &[C64]) -> (f64, Vec<C64>) {
    let m = t.apply_all_but_one(u); // rows × dim: T(u…u, ·)
    let val: Vec<C64> = (0..t.rows()).map(|r| (0..t.dim()).map(|j| m[(r, j)] * u[j]).sum()).collect();
    let nval = vec_norm(&val);
    // Scalarize with w = T(u^k)/‖T(u^k)‖ (or the first row if zero), then
    // ascend |w*·T(u^k)|: new direction ∝ f·conj(s), s_j = w*·T(u…u, e_j).
    let w: Vec<C64> = if nval > 0.0 {
        val.iter().map(|c| c / nval).collect()
    } else {
        let mut w = vec![C64::new(0.0, 0.0); t.rows()];
        w[0] = C64::new(1.0, 0.0);
        w
    };
    let f: C64 = w.iter().zip(&val).map(|(a, b)| a.conj() * b).sum();
    let s: Vec<C64> = (0..t.dim()).map(|j| (0..t.rows()).map(|r| w[r].conj() * m[(r, j)]).sum()).collect();
    let phase = if f.norm() > 0.0 { f / f.norm() } else { C64::new(1.0, 0.0) };
    let dir: Vec<C64> = s.iter().map(|sj| phase * sj.conj()).collect();
    (nval, dir)
}

/// Symmetric higher-order power method with deterministic restarts.
/// Returns the best `‖T(u, …, u)‖` found over unit vectors `u`, which is a
/// lower bound on the operator norm.
pub fn hopm(t: &CTensor, restarts: usize, iters: usize, tol: f64, seed: u64) -> Result<f64> {
    let n = t.dim();
    if n == 0 || t.rows() == 0 {
        return Ok(0.0);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut best: f64 = 0.0;
    // First start: dominant right singular vector of the mode-1 unfolding.
    let unfold = DMatrix::from_fn(t.rows() * n.pow(t.order() as u32 - 1), n, |r, j| {
        let row = r / n.pow(t.order() as u32 - 1);
        let rest = r % n.pow(t.order() as u32 - 1);
        t.data()[row * n.pow(t.order() as u32) + j * n.pow(t.order() as u32 - 1) + rest]
    });
    let mut starts: Vec<Vec<C64>> = Vec::with_capacity(restarts);
    if let Ok(s) = svd(&unfold) {
        starts.push((0..n).map(|i| s.v[(i, 0)].conj()).collect());
    }
    while starts.len() < restarts.max(1) {
        let v: Vec<C64> = (0..n).map(|_| C64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5)).collect();
        starts.push(v);
    }
    for mut u in starts {
        if !normalize(&mut u) {
            continue;
        }
        let mut prev = -1.0;
        for _ in 0..iters {
            let (val, mut dir) = hopm_step(t, &u);
            best = best.max(val);
            if prev >= 0.0 && (val - prev).abs() <= tol * val.max(f64::MIN_POSITIVE) {
                break;
            }
            prev = val;
            if !normalize(&mut dir) {
                break;
            }
            u = dir;
        }
        let (val, _) = hopm_step(t, &u);
        best = best.max(val);
    }
    Ok(best)
}
