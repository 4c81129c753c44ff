//! Breadth-one dual basis recursion and multiplicity detection.

use nalgebra::DMatrix;

use super::functional::DualFunctional;
use crate::error::{MzError, Result};
use crate::numkit::{least_squares, solve_vec, svd};
use crate::polycore::{vec_norm, Jet, LocalModel, Monomial};
use crate::C64;

/// Default relative gap used by the corank-one test.
pub const DEFAULT_GAP_TOL: f64 = 1e-8;
/// Default relative threshold of the membership test `Δ_k(f) ∈ im Df(x)`.
pub const DEFAULT_DELTA_ZERO_TOL: f64 = 1e-8;
/// Default tolerance on `|Λ_k(f_i)|` relative to the generator scale.
pub const DEFAULT_DUALITY_TOL: f64 = 1e-9;
/// Default cap on the order of the recursion.
pub const DEFAULT_MAX_ORDER: usize = 10;
/// Absolute floor of the membership test, relative to `max(1, ‖Df(x)‖)`.
pub const MEMBERSHIP_FLOOR: f64 = 1e-14;

/// Tolerances and switches of [`compute_dual_basis`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DualOptions {
    /// Relative singular-value gap of the corank-one test.
    pub gap_tol: f64,
    /// Relative threshold of the membership test.
    pub delta_zero_tol: f64,
    /// Reporting threshold on duality residuals.
    pub duality_tol: f64,
    /// Largest order attempted before giving up.
    pub max_order: usize,
    /// Multiplicity to validate instead of detect.
    pub mu: Option<usize>,
    /// Treat the coordinates as normalized (`Λ₁ = d₁`, only `f_1…f_{n−1}`
    /// enter the coefficient solves).
    pub normalized: bool,
}

impl Default for DualOptions {
    fn default() -> Self {
        DualOptions {
            gap_tol: DEFAULT_GAP_TOL,
            delta_zero_tol: DEFAULT_DELTA_ZERO_TOL,
            duality_tol: DEFAULT_DUALITY_TOL,
            max_order: DEFAULT_MAX_ORDER,
            mu: None,
            normalized: false,
        }
    }
}

/// Outcome of the corank-one test.
#[derive(Clone, Debug, PartialEq)]
pub struct CorankReport {
    /// True iff exactly one singular value is numerically zero.
    pub corank_one: bool,
    /// Singular values of the Jacobian, descending.
    pub singular_values: Vec<f64>,
    /// `σ_{n−1}/σ_n` (infinite when `σ_n = 0`; for `n = 1`, `1/σ_1`).
    pub gap: f64,
}

/// Tests whether the Jacobian at `x` has a numerically one-dimensional
/// kernel: `σ_n ≤ gap_tol·σ_{n−1}` and `σ_{n−1} > gap_tol·σ_1`.
///
/// For a single variable, where `σ_{n−1}` does not exist, the test is
/// `σ_1 ≤ gap_tol`.
pub fn corank_one_check<M: LocalModel + ?Sized>(f: &M, x: &[C64], gap_tol: f64) -> Result<CorankReport> {
    let jac = f.jacobian_at(x)?;
    corank_from_jacobian(&jac, gap_tol)
}

pub(crate) fn corank_from_jacobian(jac: &DMatrix<C64>, gap_tol: f64) -> Result<CorankReport> {
    let s = svd(jac)?;
    let sv = s.singular_values.clone();
    let n = sv.len();
    let (corank_one, gap) = if n == 1 {
        (sv[0] <= gap_tol, if sv[0] > 0.0 { 1.0 / sv[0] } else { f64::INFINITY })
    } else {
        let sn = sv[n - 1];
        let sn1 = sv[n - 2];
        let gap = if sn > 0.0 { sn1 / sn } else if sn1 > 0.0 { f64::INFINITY } else { 0.0 };
        (sn <= gap_tol * sn1 && sn1 > gap_tol * sv[0], gap)
    };
    Ok(CorankReport { corank_one, singular_values: sv, gap })
}

/// `Δ_k = Σ_σ Ψ_σ(a_{1,σ}Λ_{k−1} + ⋯ + a_{k−1,σ}Λ_1)`.
///
/// `lambdas[i]` is `Λ_i` (at least `Λ_0…Λ_{k−1}`), `a[i − 1]` is the
/// coefficient vector `a_i` (at least `a_1…a_{k−1}`). Coordinates must put
/// the pivot variable first (`a_{1,1} = 1`, `a_{i,1} = 0` for `i ≥ 2`).
pub fn next_delta(lambdas: &[DualFunctional], a: &[Vec<C64>], k: usize) -> Result<DualFunctional> {
    if k < 2 || lambdas.len() < k || a.len() < k - 1 {
        return Err(MzError::InvalidArgument(format!("next_delta needs Λ_0..Λ_{} and a_1..a_{}", k - 1, k - 1)));
    }
    let n = lambdas[0].nvars();
    let mut delta = DualFunctional::zero(n);
    for sigma in 0..n {
        let mut inner = DualFunctional::zero(n);
        for i in 1..k {
            let c = a[i - 1][sigma];
            if c != C64::new(0.0, 0.0) {
                inner = inner.axpy(c, &lambdas[k - i]);
            }
        }
        let term = inner.psi(sigma);
        delta = delta.axpy(C64::new(1.0, 0.0), &term);
    }
    Ok(delta)
}

/// Solution of the coefficient system for `Λ_k = Δ_k + Σ_{j≥2} a_{k,j} d_j`.
#[derive(Clone, Debug, PartialEq)]
pub struct LambdaCoeffs {
    /// `a_k` as a full length-`n` vector with `a_{k,1} = 0`.
    pub a: Vec<C64>,
    /// Norm of the component of `Δ_k(f)` outside `im Df(x)`; in
    /// normalized coordinates this is `|Δ_k(f_n)|`.
    pub orth: f64,
}

/// Solves for `a_{k,2..n}` given `Δ_k(f)` and the Jacobian, in coordinates
/// whose first variable is the kernel direction.
///
/// Normalized: `Df̂(x)·â = −Δ_k(f̂)` over rows `1…n−1`, columns `2…n`.
/// General: least squares of the `n × (n−1)` system over all rows.
pub fn solve_lambda_coeffs_from(jac: &DMatrix<C64>, delta_value: &[C64], normalized: bool) -> Result<LambdaCoeffs> {
    let n = jac.nrows();
    if jac.ncols() != n || delta_value.len() != n {
        return Err(MzError::DimensionMismatch { expected: n, got: delta_value.len() });
    }
    let rhs: Vec<C64> = delta_value.iter().map(|c| -c).collect();
    let mut a = vec![C64::new(0.0, 0.0); n];
    if n == 1 {
        return Ok(LambdaCoeffs { a, orth: delta_value[0].norm() });
    }
    if normalized {
        let dfh = jac.view((0, 1), (n - 1, n - 1)).into_owned();
        let sol = solve_vec(&dfh, &rhs[..n - 1])?;
        a[1..].copy_from_slice(&sol);
        Ok(LambdaCoeffs { a, orth: delta_value[n - 1].norm() })
    } else {
        let cols = jac.view((0, 1), (n, n - 1)).into_owned();
        let s = svd(&cols)?;
        if s.sigma_min() <= 100.0 * f64::EPSILON * s.sigma_max() {
            return Err(MzError::Singular { sigma_min: s.sigma_min(), sigma_max: s.sigma_max() });
        }
        let (sol, res) = least_squares(&cols, &rhs, 0.0)?;
        a[1..].copy_from_slice(&sol);
        Ok(LambdaCoeffs { a, orth: res })
    }
}

/// Evaluates `Δ_k(f)` at `x` and solves for `a_k` (see
/// [`solve_lambda_coeffs_from`]). The coordinates of `f` must have the
/// kernel direction as the first variable.
pub fn solve_lambda_coeffs<M: LocalModel + ?Sized>(
    f: &M,
    x: &[C64],
    delta: &DualFunctional,
    normalized: bool,
) -> Result<LambdaCoeffs> {
    let jet = f.jet_at(x, delta.order().max(1))?;
    let dv = jet.apply(delta)?;
    solve_lambda_coeffs_from(&jet.jacobian(), &dv, normalized)
}

/// The breadth-one local dual basis at a point.
#[derive(Clone, Debug)]
pub struct DualBasis {
    /// `Λ_0, …, Λ_{μ−1}` in the original variables.
    pub lambdas: Vec<DualFunctional>,
    /// `Δ_2, …, Δ_μ` in the original variables.
    pub deltas: Vec<DualFunctional>,
    /// Row `k − 1` holds `a_k` (`k = 1 … μ−1`) in the original variables.
    pub a_coeffs: DMatrix<C64>,
    /// Multiplicity.
    pub mu: usize,
    /// The Jacobian has corank one (always true for a returned basis).
    pub breadth_one: bool,
    /// `σ_{n−1}/σ_n` at the point.
    pub corank_gap: f64,
    /// Singular values of the Jacobian.
    pub singular_values: Vec<f64>,
    /// `Δ_k(f)` for `k = 2 … μ`.
    pub delta_values: Vec<Vec<C64>>,
    /// Membership-test quantity (component outside `im Df(x)`) for
    /// `k = 2 … μ`.
    pub orth_components: Vec<f64>,
    /// `max_i |Λ_k(f_i)| / max(1, scale_i)` for `k = 0 … μ−1`, over
    /// `i < n` in normalized mode and all `i` otherwise.
    pub duality_residuals: Vec<f64>,
    /// Largest closedness residual of `Φ_σ(Λ_k)` against
    /// `span{Λ_0 … Λ_{k−1}}`.
    pub closedness_residual: f64,
    /// Index of the variable used as pivot (`a_{1,pivot} = 1`).
    pub pivot: usize,
    /// Whether the normalized recursion was used.
    pub normalized: bool,
}

impl DualBasis {
    /// `Δ_μ(f)`.
    pub fn delta_mu_value(&self) -> &[C64] {
        self.delta_values.last().map(|v| v.as_slice()).unwrap_or(&[])
    }

    /// Largest duality residual over the basis.
    pub fn max_duality_residual(&self) -> f64 {
        self.duality_residuals.iter().copied().fold(0.0, f64::max)
    }
}

fn row_scales(jet: &Jet) -> Vec<f64> {
    let n = jet.nvars();
    let mut acc = vec![0.0; jet.nfuncs()];
    for alpha in Monomial::all_up_to_degree(n, jet.max_order() as u32) {
        for (i, s) in acc.iter_mut().enumerate() {
            *s += jet.coeff(i, &alpha).norm_sqr();
        }
    }
    acc.into_iter().map(|s| s.sqrt().max(1.0)).collect()
}

/// Residual of expressing `Φ_σ(Λ_k)` in `span{Λ_0, …, Λ_{k−1}}`, maximized
/// over `σ` and `k`, relative to `max(1, ‖Φ_σ(Λ_k)‖)`.
pub fn closedness_residual(lambdas: &[DualFunctional]) -> Result<f64> {
    let mut worst: f64 = 0.0;
    if lambdas.is_empty() {
        return Ok(0.0);
    }
    let n = lambdas[0].nvars();
    for k in 1..lambdas.len() {
        for sigma in 0..n {
            let target = lambdas[k].phi(sigma);
            if target.is_zero() {
                continue;
            }
            let mut keys: Vec<Monomial> = target.terms().map(|(a, _)| a.clone()).collect();
            for l in &lambdas[..k] {
                keys.extend(l.terms().map(|(a, _)| a.clone()));
            }
            keys.sort();
            keys.dedup();
            let m = DMatrix::from_fn(keys.len(), k, |r, c| lambdas[c].coeff(&keys[r]));
            let b: Vec<C64> = keys.iter().map(|a| target.coeff(a)).collect();
            let (_, res) = least_squares(&m, &b, 1e-13)?;
            worst = worst.max(res / vec_norm(&b).max(1.0));
        }
    }
    Ok(worst)
}

/// Computes the breadth-one dual basis of `f` at `x` and the multiplicity.
///
/// Iterates `k = 2, 3, …`: builds `Δ_k`, evaluates `Δ_k(f)`, and stops at
/// the first `k` with `Δ_k(f) ∉ im Df(x)`, which is the multiplicity. In
/// general coordinates `Λ_1` is the kernel vector of `Df(x)` scaled so its
/// largest entry (the pivot) equals 1, and the pivot variable plays the
/// role of the first variable in the recursion.
///
/// Errors: [`MzError::NotCorankOne`] if the Jacobian fails the corank-one
/// test; [`MzError::MultiplicityCap`] if no termination happens by
/// `max_order`; [`MzError::MultiplicityMismatch`] if `opts.mu` is given and
/// disagrees with the detected value.
pub fn compute_dual_basis<M: LocalModel + ?Sized>(f: &M, x: &[C64], opts: &DualOptions) -> Result<DualBasis> {
    let n = f.nvars();
    if x.len() != n {
        return Err(MzError::DimensionMismatch { expected: n, got: x.len() });
    }
    if let Some(mu) = opts.mu {
        if mu < 2 {
            return Err(MzError::InvalidArgument(format!("multiplicity must be at least 2, got {mu}")));
        }
    }
    if !(opts.gap_tol > 0.0 && opts.delta_zero_tol > 0.0 && opts.duality_tol > 0.0) || opts.max_order < 2 {
        return Err(MzError::InvalidArgument("tolerances must be positive and max_order ≥ 2".into()));
    }
    let jac0 = f.jacobian_at(x)?;
    let cr = corank_from_jacobian(&jac0, opts.gap_tol)?;
    if !cr.corank_one {
        return Err(MzError::NotCorankOne { singular_values: cr.singular_values });
    }

    // Pivot and permutation so that the kernel direction comes first.
    let (v, perm) = if opts.normalized {
        let mut v = vec![C64::new(0.0, 0.0); n];
        v[0] = C64::new(1.0, 0.0);
        (v, (0..n).collect::<Vec<_>>())
    } else {
        let s = svd(&jac0)?;
        let kv: Vec<C64> = (0..n).map(|i| s.v[(i, n - 1)]).collect();
        let mags: Vec<f64> = kv.iter().map(|c| c.norm()).collect();
        let maxm = mags.iter().copied().fold(0.0, f64::max);
        let p = mags.iter().position(|&m| m >= maxm * (1.0 - 1e-12)).unwrap_or(0);
        let piv = kv[p];
        let mut perm = vec![p];
        perm.extend((0..n).filter(|&j| j != p));
        let v: Vec<C64> = perm.iter().map(|&j| kv[j] / piv).collect();
        (v, perm)
    };
    let mut inv = vec![0; n];
    for (i, &p) in perm.iter().enumerate() {
        inv[p] = i;
    }

    let cap = opts.max_order.max(opts.mu.unwrap_or(0));
    let jet = f.jet_at(x, cap)?.permute_vars(&perm);
    let jac = jet.jacobian();
    let jac_scale = crate::numkit::matrix_spectral_norm(&jac)?.max(1.0);
    let scales = row_scales(&jet);
    let rows_checked = if opts.normalized && n > 1 { n - 1 } else { n };

    let mut lambdas = vec![DualFunctional::identity(n)];
    let mut lambda1 = DualFunctional::zero(n);
    for (j, c) in v.iter().enumerate() {
        lambda1.add_term(Monomial::var(n, j), *c);
    }
    lambdas.push(lambda1);
    let mut avecs: Vec<Vec<C64>> = vec![v.clone()];
    let mut deltas = Vec::new();
    let mut delta_values = Vec::new();
    let mut orths = Vec::new();

    let mut detected = None;
    for k in 2..=cap {
        let delta = next_delta(&lambdas, &avecs, k)?;
        let dv = jet.apply(&delta)?;
        let coeffs = solve_lambda_coeffs_from(&jac, &dv, opts.normalized)?;
        let thresh = opts.delta_zero_tol * vec_norm(&dv) + MEMBERSHIP_FLOOR * jac_scale;
        deltas.push(delta.clone());
        delta_values.push(dv);
        orths.push(coeffs.orth);
        if coeffs.orth > thresh {
            detected = Some(k);
            break;
        }
        let mut lambda = delta;
        for (j, c) in coeffs.a.iter().enumerate().skip(1) {
            lambda.add_term(Monomial::var(n, j), *c);
        }
        lambdas.push(lambda);
        avecs.push(coeffs.a);
    }
    let mu = match detected {
        Some(k) => k,
        None => return Err(MzError::MultiplicityCap { cap }),
    };
    if let Some(req) = opts.mu {
        if req != mu {
            return Err(MzError::MultiplicityMismatch { requested: req, detected: mu });
        }
    }

    // Duality residuals, computed in the working coordinates.
    let mut duality_residuals = Vec::with_capacity(mu);
    for l in &lambdas {
        let vals = jet.apply(l)?;
        let r = (0..rows_checked).map(|i| vals[i].norm() / scales[i]).fold(0.0, f64::max);
        duality_residuals.push(r);
    }
    let closedness = closedness_residual(&lambdas)?;

    let back = |l: &DualFunctional| l.permute_vars(&inv);
    let mut a_coeffs = DMatrix::zeros(mu - 1, n);
    for (k, a) in avecs.iter().enumerate() {
        for (i, &p) in perm.iter().enumerate() {
            a_coeffs[(k, p)] = a[i];
        }
    }
    Ok(DualBasis {
        lambdas: lambdas.iter().map(back).collect(),
        deltas: deltas.iter().map(back).collect(),
        a_coeffs,
        mu,
        breadth_one: true,
        corank_gap: cr.gap,
        singular_values: cr.singular_values,
        delta_values,
        orth_components: orths,
        duality_residuals,
        closedness_residual: closedness,
        pivot: perm[0],
        normalized: opts.normalized,
    })
}
