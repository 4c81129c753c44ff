//! The invariants `γ̂_μ`, `γ_{μ,n}` and `γ_μ = max(γ̂_μ, γ_{μ,n})` at a point
//! where the system is in normalized form.
//!
//! In normalized coordinates the Jacobian has a zero first column and a
//! zero last row, and `Df̂(x)` (rows `1…n−1`, columns `2…n`) is invertible.
//! Then
//!
//! ```text
//! γ̂_μ     = max(1, sup_{k≥2} ‖Df̂(x)⁻¹·D^k f̂(x)/k!‖^{1/(k−1)}),
//! γ_{μ,n} = max(1, sup_{k≥2} ‖D^k f_n(x)/(k!·Δ_μ(f_n))‖^{1/(k−1)}),
//! ```
//!
//! with the supremum over `k = 2 … deg` since higher tensors vanish.

use crate::dualspace::chainrule_lk;
use crate::error::{MzError, Result};
use crate::numkit::{inverse, matrix_spectral_norm, tensor_norm, NormMode, NormRequest};
use crate::polycore::{factorial, LocalModel};
use crate::C64;

/// Relative tolerance of the normalized-form test.
pub const NORMALIZATION_TOL: f64 = 1e-8;

/// One term of a supremum: the order `k` and `‖T_k‖^{1/(k−1)}`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OrderValue {
    /// Tensor order.
    pub k: usize,
    /// `‖T_k‖^{1/(k−1)}` before the floor at 1.
    pub value: f64,
    /// How the norm was obtained.
    pub mode: NormMode,
}

/// The `γ` invariants at a normalized point.
#[derive(Clone, Debug, PartialEq)]
pub struct GammaReport {
    /// `γ̂_μ`.
    pub gamma_hat: f64,
    /// `γ_{μ,n}`.
    pub gamma_n: f64,
    /// `max(γ̂_μ, γ_{μ,n})`.
    pub gamma: f64,
    /// Per-order terms of `γ̂_μ`.
    pub per_order_hat: Vec<OrderValue>,
    /// Per-order terms of `γ_{μ,n}`.
    pub per_order_n: Vec<OrderValue>,
    /// The requested norm policy.
    pub request: NormRequest,
    /// The weakest norm mode used (`hopm` or `frobenius` if any tensor of
    /// order ≥ 3 or with several output rows occurred).
    pub mode: NormMode,
    /// The divisor `Δ_μ(f_n)`.
    pub delta_mu: C64,
    /// Multiplicity used.
    pub mu: usize,
    /// True if `γ̂_μ ≥ γ_{μ,n}`.
    pub hat_dominates: bool,
}

fn combine_modes(modes: impl Iterator<Item = NormMode>) -> NormMode {
    let mut out = NormMode::ExactSpectral;
    for m in modes {
        if m != NormMode::ExactSpectral {
            out = m;
        }
    }
    out
}

/// Checks `‖∂f/∂X₁(x)‖ ≤ tol·‖Df(x)‖` and `‖∂f_n/∂X̂(x)‖ ≤ tol·‖Df(x)‖`.
pub fn check_normalized<M: LocalModel + ?Sized>(f: &M, x: &[C64], tol: f64) -> Result<()> {
    let n = f.nvars();
    let jac = f.jacobian_at(x)?;
    let scale = matrix_spectral_norm(&jac)?;
    let col: f64 = (0..n).map(|i| jac[(i, 0)].norm_sqr()).sum::<f64>().sqrt();
    let row: f64 = (1..n).map(|j| jac[(n - 1, j)].norm_sqr()).sum::<f64>().sqrt();
    if col > tol * scale || row > tol * scale {
        return Err(MzError::NotNormalized(format!(
            "‖∂f/∂X1‖ = {col:.3e}, ‖∂f_n/∂X̂‖ = {row:.3e}, ‖Df‖ = {scale:.3e}; normalize first (e.g. with an SVD frame)"
        )));
    }
    Ok(())
}

/// `γ̂_μ` and its per-order terms. Requires `Df̂(x)` invertible.
pub fn gamma_hat<M: LocalModel + ?Sized>(f: &M, x: &[C64], request: NormRequest) -> Result<(f64, Vec<OrderValue>)> {
    let n = f.nvars();
    if n < 2 {
        return Ok((1.0, Vec::new()));
    }
    let jac = f.jacobian_at(x)?;
    let dfh = jac.view((0, 1), (n - 1, n - 1)).into_owned();
    let dinv = inverse(&dfh)?;
    let rows: Vec<usize> = (0..n - 1).collect();
    let mut per = Vec::new();
    let mut best: f64 = 1.0;
    for k in 2..=f.degree() as usize {
        let t = f.derivative_tensor_at(x, k)?.select_rows(&rows).scale(C64::new(1.0 / factorial(k as u32), 0.0));
        let t = t.left_mul(&dinv)?.canonicalize();
        let nrm = tensor_norm(&t, request)?;
        let v = nrm.value().powf(1.0 / (k as f64 - 1.0));
        best = best.max(v);
        per.push(OrderValue { k, value: v, mode: nrm.mode });
    }
    Ok((best, per))
}

/// `γ_{μ,n}` for a given divisor `Δ_μ(f_n)`.
pub fn gamma_n<M: LocalModel + ?Sized>(
    f: &M,
    x: &[C64],
    delta_mu: C64,
    request: NormRequest,
) -> Result<(f64, Vec<OrderValue>)> {
    let n = f.nvars();
    if !(delta_mu.norm() > 0.0) || !delta_mu.re.is_finite() || !delta_mu.im.is_finite() {
        return Err(MzError::Degenerate(format!("Δ_μ(f_n) = {delta_mu} is numerically zero")));
    }
    let mut per = Vec::new();
    let mut best: f64 = 1.0;
    for k in 2..=f.degree() as usize {
        let c = C64::new(1.0 / factorial(k as u32), 0.0) / delta_mu;
        let t = f.derivative_tensor_at(x, k)?.select_rows(&[n - 1]).scale(c);
        let nrm = tensor_norm(&t, request)?;
        let v = nrm.value().powf(1.0 / (k as f64 - 1.0));
        best = best.max(v);
        per.push(OrderValue { k, value: v, mode: nrm.mode });
    }
    Ok((best, per))
}

/// `Δ_μ(f_n)` at a normalized point, via [`chainrule_lk`].
pub fn delta_mu_value<M: LocalModel + ?Sized>(f: &M, x: &[C64], mu: usize) -> Result<C64> {
    if mu < 2 {
        return Err(MzError::InvalidArgument(format!("multiplicity must be at least 2, got {mu}")));
    }
    let d = chainrule_lk(f, x, mu)?;
    Ok(d.delta(mu, f.nvars() - 1))
}

/// `γ_μ` at a point where `f` is normalized within
/// [`NORMALIZATION_TOL`]; refuses otherwise.
pub fn gamma_mu<M: LocalModel + ?Sized>(f: &M, x: &[C64], mu: usize, request: NormRequest) -> Result<GammaReport> {
    check_normalized(f, x, NORMALIZATION_TOL)?;
    gamma_mu_unchecked(f, x, mu, request)
}

/// [`gamma_mu`] without the normalized-form test (the caller guarantees
/// the block structure, e.g. for the truncated system of a certificate).
pub fn gamma_mu_unchecked<M: LocalModel + ?Sized>(
    f: &M,
    x: &[C64],
    mu: usize,
    request: NormRequest,
) -> Result<GammaReport> {
    let delta_mu = delta_mu_value(f, x, mu)?;
    gamma_with_delta(f, x, mu, delta_mu, request)
}

/// Assembles the report for a known divisor `Δ_μ(f_n)`.
pub fn gamma_with_delta<M: LocalModel + ?Sized>(
    f: &M,
    x: &[C64],
    mu: usize,
    delta_mu: C64,
    request: NormRequest,
) -> Result<GammaReport> {
    let (gh, ph) = gamma_hat(f, x, request)?;
    let (gn, pn) = gamma_n(f, x, delta_mu, request)?;
    let mode = combine_modes(ph.iter().chain(pn.iter()).map(|o| o.mode));
    Ok(GammaReport {
        gamma_hat: gh,
        gamma_n: gn,
        gamma: gh.max(gn),
        per_order_hat: ph,
        per_order_n: pn,
        request,
        mode,
        delta_mu,
        mu,
        hat_dominates: gh >= gn,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::polycore::parse_system;

    #[test]
    fn linear_system_has_gamma_one() {
        let f = parse_system("vars: X Y; f: Y; g: X").unwrap();
        let x = [C64::new(0.0, 0.0); 2];
        let (gh, _) = gamma_hat(&f, &x, NormRequest::Auto).unwrap();
        assert_eq!(gh, 1.0);
    }

    #[test]
    fn triple_example_gamma_hat() {
        let f = parse_system(
            "vars: X1 X2\nf1: 64/73*X1^2 - 48/73*X1*X2 + 9/73*X2^2 + sqrt(73)/12*X2\nf2: (8*X1-3*X2)^2*(3*X1+8*X2)",
        )
        .unwrap();
        let x = [C64::new(0.0, 0.0); 2];
        let r = gamma_mu(&f, &x, 3, NormRequest::Estimate).unwrap();
        assert!((r.gamma_hat - 12.0 / 73f64.sqrt()).abs() < 1e-10);
        assert!((r.delta_mu.re - 192.0).abs() < 192e-9);
        assert!(r.hat_dominates);
    }

    #[test]
    fn refuses_non_normalized() {
        let f = parse_system("vars: X1 X2; f1: X1^2 - 1/4*X1 - 1/2*X2; f2: 1/2*X1*X2").unwrap();
        let x = [C64::new(0.0, 0.0); 2];
        assert!(matches!(gamma_mu(&f, &x, 2, NormRequest::Auto), Err(MzError::NotNormalized(_))));
    }
}
