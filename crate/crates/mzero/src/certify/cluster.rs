//! Separation bound, residual lower bound and the cluster certificate.

use std::f64::consts::SQRT_2;
use std::sync::Arc;

use nalgebra::DMatrix;

use super::table::{separation_constant, SeparationConstant};
use crate::dualspace::{chainrule_lk, compute_dual_basis, DualOptions};
use crate::error::{MzError, Result};
use crate::gamma::{check_normalized, gamma_mu, gamma_mu_unchecked, GammaReport, NORMALIZATION_TOL};
use crate::numkit::{inverse, matrix_spectral_norm, NormRequest};
use crate::polycore::{svd_frame, vec_norm, NormalizedFrame, Poly, PolySystem};
use crate::C64;

/// Relative tolerance under which a certificate keeps the caller's
/// coordinates: the off-block Jacobian entries are absorbed by `H₁`.
pub const CERTIFY_NEAR_NORMAL_TOL: f64 = 1e-4;

/// Which coordinates an operation works in.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Coordinates {
    /// The caller's coordinates.
    Given,
    /// The SVD frame `U*·f(W·X)` with `W = (v_n, v_1, …, v_{n−1})`.
    SvdFrame,
}

impl Coordinates {
    /// Stable lower-case name used in reports.
    pub fn as_str(self) -> &'static str {
        match self {
            Coordinates::Given => "given",
            Coordinates::SvdFrame => "svd-frame",
        }
    }
}

/// How to choose coordinates.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum CoordinatePolicy {
    /// Keep the given coordinates when the Jacobian's first column and the
    /// last row (without its first entry) are below `tol·‖Df(x)‖`,
    /// otherwise use the SVD frame.
    Auto(f64),
    /// Always the given coordinates.
    Given,
    /// Always the SVD frame.
    SvdFrame,
}

/// A system expressed in the chosen coordinates.
#[derive(Clone, Debug)]
pub struct NormalizedCoordinates {
    /// The explicit system in the chosen coordinates.
    pub system: PolySystem,
    /// The point in the chosen coordinates.
    pub point: Vec<C64>,
    /// The frame, when the SVD frame was chosen.
    pub frame: Option<NormalizedFrame>,
    /// Which coordinates were chosen.
    pub kind: Coordinates,
}

impl NormalizedCoordinates {
    /// Maps a point from the chosen coordinates back to the caller's.
    pub fn to_original(&self, y: &[C64]) -> Vec<C64> {
        match &self.frame {
            Some(fr) => fr.to_base(y),
            None => y.to_vec(),
        }
    }
}

fn near_normal(jac: &DMatrix<C64>, tol: f64) -> Result<bool> {
    let n = jac.nrows();
    let scale = matrix_spectral_norm(jac)?;
    let col: f64 = (0..n).map(|i| jac[(i, 0)].norm_sqr()).sum::<f64>().sqrt();
    let row: f64 = (1..n).map(|j| jac[(n - 1, j)].norm_sqr()).sum::<f64>().sqrt();
    Ok(scale > 0.0 && col <= tol * scale && row <= tol * scale)
}

/// Expresses `f` at `x` in coordinates chosen by `policy`.
pub fn normalized_coordinates(f: &PolySystem, x: &[C64], policy: CoordinatePolicy) -> Result<NormalizedCoordinates> {
    f.check_point(x)?;
    let given = match policy {
        CoordinatePolicy::Given => true,
        CoordinatePolicy::SvdFrame => false,
        CoordinatePolicy::Auto(tol) => near_normal(&f.jacobian(x)?, tol)?,
    };
    if given {
        return Ok(NormalizedCoordinates { system: f.clone(), point: x.to_vec(), frame: None, kind: Coordinates::Given });
    }
    let (frame, y) = svd_frame(Arc::new(f.clone()), x)?;
    Ok(NormalizedCoordinates { system: frame.materialize(), point: y, frame: Some(frame), kind: Coordinates::SvdFrame })
}

/// Local separation bound at a simple multiple zero.
#[derive(Clone, Debug)]
pub struct SeparationResult {
    /// Multiplicity.
    pub mu: usize,
    /// `d`, `d₁`, `d₂`, `d₃`.
    pub constant: SeparationConstant,
    /// `γ_μ` at the zero (normalized coordinates).
    pub gamma: GammaReport,
    /// `d/(2γ_μ^μ)`: no other zero lies closer to `x`.
    pub bound: f64,
    /// Coordinates used.
    pub coordinates: Coordinates,
}

/// `d/(2γ_μ^μ)` at a simple zero `x` of multiplicity `μ`.
///
/// The point is put in normalized coordinates (the SVD frame unless the
/// given coordinates are normalized within the `γ` tolerance), `μ` is
/// confirmed by the dual basis recursion, and `γ_μ` is computed with the
/// requested norm policy.
pub fn separation_bound(f: &PolySystem, x: &[C64], mu: usize, request: NormRequest) -> Result<SeparationResult> {
    let nc = normalized_coordinates(f, x, CoordinatePolicy::Auto(NORMALIZATION_TOL))?;
    let opts = DualOptions { mu: Some(mu), normalized: true, ..DualOptions::default() };
    compute_dual_basis(&nc.system, &nc.point, &opts)?;
    let gamma = gamma_mu(&nc.system, &nc.point, mu, request)?;
    let constant = separation_constant(mu)?;
    let bound = constant.d / (2.0 * gamma.gamma.powi(mu as i32));
    Ok(SeparationResult { mu, constant, gamma, bound, coordinates: nc.kind })
}

fn a_inverse_norm(jac: &DMatrix<C64>, delta_mu: C64) -> Result<f64> {
    let n = jac.nrows();
    if !(delta_mu.norm() > 0.0) {
        return Err(MzError::Degenerate("Δ_μ(f_n) vanishes".into()));
    }
    let inv_part = if n > 1 {
        let dfh = jac.view((0, 1), (n - 1, n - 1)).into_owned();
        matrix_spectral_norm(&inverse(&dfh)?)? / SQRT_2
    } else {
        0.0
    };
    Ok(inv_part.max(SQRT_2 / delta_mu.norm()))
}

/// `d·‖y − x‖^μ / (2‖𝒜⁻¹‖)`, a lower bound on `‖f(y)‖` for
/// `‖y − x‖ ≤ d/(4γ_μ^μ)`, where `𝒜 = diag(√2·Df̂(x), Δ_μ(f_n)/√2)`.
///
/// Errors with [`MzError::OutsideRadius`] when `y` is farther than
/// `d/(4γ_μ^μ)` from `x`.
pub fn residual_lower_bound(f: &PolySystem, x: &[C64], mu: usize, y: &[C64], request: NormRequest) -> Result<f64> {
    f.check_point(y)?;
    let nc = normalized_coordinates(f, x, CoordinatePolicy::Auto(NORMALIZATION_TOL))?;
    check_normalized(&nc.system, &nc.point, NORMALIZATION_TOL)?;
    let gamma = gamma_mu(&nc.system, &nc.point, mu, request)?;
    let d = separation_constant(mu)?.d;
    let radius = d / (4.0 * gamma.gamma.powi(mu as i32));
    let diff: Vec<C64> = y.iter().zip(x).map(|(a, b)| a - b).collect();
    let dist = vec_norm(&diff);
    if dist > radius {
        return Err(MzError::OutsideRadius { distance: dist, radius });
    }
    let ainv = a_inverse_norm(&nc.system.jacobian(&nc.point)?, gamma.delta_mu)?;
    Ok(d * dist.powi(mu as i32) / (2.0 * ainv))
}

/// Options of [`certify_cluster`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CertifyOptions {
    /// Norm policy for `γ_μ(g, x)`.
    pub request: NormRequest,
    /// Coordinate choice.
    pub policy: CoordinatePolicy,
}

impl Default for CertifyOptions {
    fn default() -> Self {
        CertifyOptions { request: NormRequest::Estimate, policy: CoordinatePolicy::Auto(CERTIFY_NEAR_NORMAL_TOL) }
    }
}

/// A Rouché-style certificate that a ball contains `μ` zeros.
#[derive(Clone, Debug)]
pub struct ClusterCertificate {
    /// Center (the approximate zero, caller's coordinates).
    pub center: Vec<C64>,
    /// `d/(4γ_μ(g,x)^μ)`.
    pub radius: f64,
    /// Multiplicity.
    pub mu: usize,
    /// `‖f(x)‖ + Σ_k ‖H_k‖·radius^k`.
    pub lhs: f64,
    /// `d^{μ+1} / (2(4γ^μ)^μ·‖𝒜⁻¹‖)`.
    pub rhs: f64,
    /// `lhs < rhs`: `f` has exactly `μ` zeros, counted with multiplicity,
    /// in the ball.
    pub holds: bool,
    /// `‖H_1‖, ‖H_2‖, …, ‖H_{μ−1}‖` (for `k ≥ 2`, `‖H_k‖ = |Δ_k(f_n)|`).
    pub h_norms: Vec<f64>,
    /// `Δ_k(f_n)` for `k = 2 … μ−1` at the center.
    pub h_deltas: Vec<C64>,
    /// `‖𝒜⁻¹‖`.
    pub a_inv_norm: f64,
    /// `‖f(x)‖`.
    pub residual_norm: f64,
    /// `γ_μ` of the truncated system `g`.
    pub gamma_on_g: GammaReport,
    /// Separation constant `d`.
    pub d: f64,
    /// Coordinates used.
    pub coordinates: Coordinates,
    /// Largest `|Δ_k(g_n)|`, `k < μ`, of the truncated system (should
    /// vanish to rounding).
    pub truncation_residual: f64,
}

/// Certificate that the ball of radius `d/(4γ_μ(g,x)^μ)` around `x`
/// contains exactly `μ` zeros of `f`, counted with multiplicity.
///
/// In coordinates where `Df̂(x)` (rows `1…n−1`, columns `2…n`) is
/// invertible, `H₁` collects the Jacobian entries outside the normalized
/// block structure (`∂f̂/∂X₁`, `∂f_n/∂X₁`, `∂f_n/∂X̂`) and `H_k`
/// (`2 ≤ k < μ`) is `Δ_k(f_n)·(X₁ − x₁)^k` in the last component. The
/// truncated system `g = f − f(x) − Σ_k H_k(X − x)^k` has an exact simple
/// zero of multiplicity `μ` structure at `x`; `γ_μ(g, x)` (not
/// `γ_μ(f, x)`) enters the radius.
pub fn certify_cluster(f: &PolySystem, x: &[C64], mu: usize, opts: &CertifyOptions) -> Result<ClusterCertificate> {
    if mu < 2 {
        return Err(MzError::InvalidArgument(format!("multiplicity must be at least 2, got {mu}")));
    }
    let nc = normalized_coordinates(f, x, opts.policy)?;
    let sys = &nc.system;
    let y = &nc.point;
    let n = sys.nvars();
    let fy = sys.eval(y)?;
    let jac = sys.jacobian(y)?;

    // H1: entries of Df(y) outside the normalized block structure.
    let mut h1 = DMatrix::<C64>::zeros(n, n);
    for i in 0..n {
        h1[(i, 0)] = jac[(i, 0)];
    }
    for j in 1..n {
        h1[(n - 1, j)] = jac[(n - 1, j)];
    }
    let h1_norm = matrix_spectral_norm(&h1)?;

    // f~ = f − f(y) − H1·(X − y): exact normalized Jacobian at y.
    let shifted_vars: Vec<Poly> = (0..n).map(|j| &Poly::var(n, j) - &Poly::constant(n, y[j])).collect();
    let mut polys: Vec<Poly> = Vec::with_capacity(n);
    for i in 0..n {
        let mut p = &sys.polys()[i] - &Poly::constant(n, fy[i]);
        for j in 0..n {
            if h1[(i, j)] != C64::new(0.0, 0.0) {
                p = &p - &shifted_vars[j].scale(h1[(i, j)]);
            }
        }
        polys.push(p);
    }
    let ftilde = sys.with_polys(polys);

    // Δ_k(f_n), k = 2 … μ−1, and the higher H_k.
    let mut h_deltas = Vec::new();
    if mu > 2 {
        let cr = chainrule_lk(&ftilde, y, mu - 1)?;
        for k in 2..mu {
            h_deltas.push(cr.delta(k, n - 1));
        }
    }
    let mut gpolys = ftilde.polys().to_vec();
    for (idx, dk) in h_deltas.iter().enumerate() {
        let k = idx as u32 + 2;
        gpolys[n - 1] = &gpolys[n - 1] - &shifted_vars[0].pow(k).scale(*dk);
    }
    let g = sys.with_polys(gpolys);

    let trunc = if mu > 2 {
        let cr = chainrule_lk(&g, y, mu - 1)?;
        (2..mu).map(|k| cr.delta(k, n - 1).norm()).fold(0.0, f64::max)
    } else {
        0.0
    };
    let gamma = gamma_mu_unchecked(&g, y, mu, opts.request)?;
    let d = separation_constant(mu)?.d;
    let gmu = gamma.gamma.powi(mu as i32);
    let radius = d / (4.0 * gmu);

    let residual_norm = vec_norm(&fy);
    let mut h_norms = vec![h1_norm];
    h_norms.extend(h_deltas.iter().map(|c| c.norm()));
    let lhs = residual_norm + h_norms.iter().enumerate().map(|(i, h)| h * radius.powi(i as i32 + 1)).sum::<f64>();
    let a_inv_norm = a_inverse_norm(&g.jacobian(y)?, gamma.delta_mu)?;
    let rhs = d.powi(mu as i32 + 1) / (2.0 * (4.0 * gmu).powi(mu as i32) * a_inv_norm);
    Ok(ClusterCertificate {
        center: x.to_vec(),
        radius,
        mu,
        lhs,
        rhs,
        holds: lhs < rhs,
        h_norms,
        h_deltas,
        a_inv_norm,
        residual_norm,
        gamma_on_g: gamma,
        d,
        coordinates: nc.kind,
        truncation_residual: trunc,
    })
}
