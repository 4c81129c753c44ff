//! Modified Newton iterations for simple multiple zeros.
//!
//! Each step splits the variables as `(X_1, X̂)`. The ordinary Newton step
//! `N_1` on the first `n − 1` equations moves `X̂`, then a one-variable
//! Newton-like step `N_2` on `X_1` compensates for the multiplicity:
//!
//! - [`refine_double`]: `N_2 = z_1 − (∂²f_n/∂X_1²)⁻¹·∂f_n/∂X_1`;
//! - [`refine_triple`]: `N_2 = z_1 − Γ_1/L_3` with the Schur-complement
//!   corrected second and third derivatives of `f_n`;
//! - [`refine_general`]: rotates into the SVD frame of the Jacobian at every
//!   step and uses `N_2 = w_1 − (1/μ)·Δ_μ(g_n)⁻¹·Δ_{μ−1}(g_n)`.
//!
//! The first two assume the system is already in normalized coordinates
//! at the (unknown) zero; the third does not.

use std::sync::Arc;

use nalgebra::DMatrix;

use crate::dualspace::{chainrule_lk, corank_one_check, DEFAULT_GAP_TOL};
use crate::error::{MzError, Result};
use crate::numkit::{solve_vec, svd};
use crate::polycore::{svd_frame, vec_norm, LocalModel, NormalizedFrame, PolySystem};
use crate::C64;

/// Largest accepted relative residual `‖Λ_k(ĝ)‖` of the functional
/// construction inside [`refine_general`].
pub const DUALITY_STEP_TOL: f64 = 1e-6;
/// Relative size below which a pivot (`∂²f_n/∂X_1²`, `L_3`, `Δ_μ`) counts
/// as zero.
pub const PIVOT_TOL: f64 = 1e-14;
/// Number of consecutive growing steps that counts as divergence.
pub const DIVERGENCE_STREAK: usize = 3;

fn check_len(n: usize, z: &[C64]) -> Result<()> {
    if z.len() != n {
        return Err(MzError::DimensionMismatch { expected: n, got: z.len() });
    }
    if let Some(i) = z.iter().position(|c| !c.re.is_finite() || !c.im.is_finite()) {
        return Err(MzError::NonFinitePoint(i));
    }
    if n < 1 {
        return Err(MzError::InvalidArgument("empty system".into()));
    }
    Ok(())
}

/// `Df̂(z)`: rows and columns `2 … n` of the Jacobian.
fn hat_block(jac: &DMatrix<C64>) -> DMatrix<C64> {
    let n = jac.nrows();
    DMatrix::from_fn(n - 1, n - 1, |i, j| jac[(i, j + 1)])
}

/// One Newton step on the first `n − 1` equations in the variables `X̂`
/// with `X_1 = z_1` fixed: returns `(z_1, ẑ − Df̂(z)⁻¹·f̂(z))`.
pub fn n1_step<M: LocalModel + ?Sized>(f: &M, z: &[C64]) -> Result<Vec<C64>> {
    let n = f.nvars();
    check_len(n, z)?;
    if n == 1 {
        return Ok(z.to_vec());
    }
    let vals = f.eval_at(z)?;
    let jac = f.jacobian_at(z)?;
    let step = solve_vec(&hat_block(&jac), &vals[..n - 1])?;
    let mut out = z.to_vec();
    for i in 1..n {
        out[i] -= step[i - 1];
    }
    Ok(out)
}

fn pivot_guard(p: C64, scale: f64, what: &str) -> Result<()> {
    if !(p.norm() > PIVOT_TOL * scale.max(1.0)) {
        return Err(MzError::Degenerate(format!("{what} vanishes ({:.3e})", p.norm())));
    }
    Ok(())
}

/// One step of the double-zero iteration: `y = N_1(z)`, then
/// `N_2 = y_1 − (∂²f_n(y)/∂X_1²)⁻¹·∂f_n(y)/∂X_1`.
pub fn refine_double<M: LocalModel + ?Sized>(f: &M, z: &[C64]) -> Result<Vec<C64>> {
    let n = f.nvars();
    let y = n1_step(f, z)?;
    let jac = f.jacobian_at(&y)?;
    let d2 = f.derivative_tensor_at(&y, 2)?;
    let h = d2.get(n - 1, &[0, 0]);
    let g = jac[(n - 1, 0)];
    pivot_guard(h, jac.norm(), "∂²f_n/∂X_1²")?;
    let mut out = y;
    out[0] -= g / h;
    Ok(out)
}

/// One step of the triple-zero iteration: `y = N_1(z)` and, at `y`,
///
/// ```text
/// v   = Df̂(y)⁻¹·(½ ∂²f̂/∂X_1²),
/// L_3 = ⅙ ∂³f_n/∂X_1³ − ∂²f_n/∂X_1∂X̂ · v,
/// Γ_1 = ⅙ ∂²f_n/∂X_1² − ∂f_n/∂X̂ · v,
/// N_2 = y_1 − Γ_1/L_3.
/// ```
pub fn refine_triple<M: LocalModel + ?Sized>(f: &M, z: &[C64]) -> Result<Vec<C64>> {
    let n = f.nvars();
    let y = n1_step(f, z)?;
    let jac = f.jacobian_at(&y)?;
    let d2 = f.derivative_tensor_at(&y, 2)?;
    let d3 = f.derivative_tensor_at(&y, 3)?;
    let v = if n > 1 {
        let rhs: Vec<C64> = (0..n - 1).map(|i| d2.get(i, &[0, 0]) * 0.5).collect();
        solve_vec(&hat_block(&jac), &rhs)?
    } else {
        Vec::new()
    };
    let last = n - 1;
    let mut l3 = d3.get(last, &[0, 0, 0]) / 6.0;
    let mut g1 = d2.get(last, &[0, 0]) / 6.0;
    for j in 1..n {
        l3 -= d2.get(last, &[0, j]) * v[j - 1];
        g1 -= jac[(last, j)] * v[j - 1];
    }
    pivot_guard(l3, jac.norm(), "L_3")?;
    let mut out = y;
    out[0] -= g1 / l3;
    Ok(out)
}

/// Norm of `Df(y) − Df(z)` against the spectral gap `δ = σ_{n−1} − σ_n` of
/// `Df(z)`; the step is trusted when `difference ≤ δ/5`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SafeguardLog {
    /// `‖Df(y) − Df(z)‖_F`.
    pub jacobian_change: f64,
    /// `σ_{n−1}(Df(z)) − σ_n(Df(z))`.
    pub gap: f64,
    /// `jacobian_change ≤ gap/5`.
    pub ok: bool,
}

/// Result of one step of [`refine_general`].
#[derive(Clone, Debug)]
pub struct GeneralStep {
    /// New iterate in the original coordinates.
    pub point: Vec<C64>,
    /// Composed unitary frame `(U, W)` used for the `N_2` step.
    pub frame: NormalizedFrame,
    /// Safeguard measurement of this step.
    pub safeguard: SafeguardLog,
    /// Largest relative functional residual `‖Λ_k(ĝ)‖`.
    pub duality_residual: f64,
}

/// One step of the general iteration for a zero of multiplicity `μ ≥ 2`:
///
/// 1. rotate into the SVD frame of `Df(z)` and apply `N_1` there, giving `y`;
/// 2. rotate again into the SVD frame of the Jacobian at `y`, giving `w`;
/// 3. `w_1 ← w_1 − (1/μ)·Δ_μ(g_n)(w)⁻¹·Δ_{μ−1}(g_n)(w)`;
/// 4. map back to the original coordinates.
///
/// Requires `Df(z)` to have numerical rank at least `n − 1`.
pub fn refine_general(f: &Arc<PolySystem>, z: &[C64], mu: usize) -> Result<GeneralStep> {
    let n = f.nvars();
    check_len(n, z)?;
    if mu < 2 {
        return Err(MzError::InvalidArgument("multiplicity must be at least 2".into()));
    }
    let rep = corank_one_check(f.as_ref(), z, DEFAULT_GAP_TOL)?;
    let sv = &rep.singular_values;
    if n >= 2 && !(sv[n - 2] > DEFAULT_GAP_TOL * sv[0]) {
        return Err(MzError::NotCorankOne { singular_values: sv.clone() });
    }
    let (frame1, zt) = svd_frame(f.clone(), z)?;
    let yt = n1_step(&frame1, &zt)?;
    let y = frame1.to_base(&yt);

    let dz = f.jacobian(z)?;
    let dy = f.jacobian(&y)?;
    let change = (&dy - &dz).norm();
    let gap = if n >= 2 { sv[n - 2] - sv[n - 1] } else { sv[0] };
    let safeguard = SafeguardLog { jacobian_change: change, gap, ok: change <= gap / 5.0 };

    let s2 = svd(&frame1.jacobian(&yt)?)?;
    let w2 = DMatrix::from_fn(n, n, |i, j| if j == 0 { s2.v[(i, n - 1)] } else { s2.v[(i, j - 1)] });
    let frame2 = frame1.compose(&s2.u, &w2)?;
    let w = frame2.from_base(&y);
    let cr = chainrule_lk(&frame2, &w, mu)?;
    let mut duality_residual: f64 = 0.0;
    for k in 1..=mu {
        let lam = &cr.lambda_values[k - 1];
        let scale = vec_norm(&cr.deltas[k - 1]).max(1.0);
        duality_residual = duality_residual.max(vec_norm(&lam[..n - 1]) / scale);
    }
    if !(duality_residual <= DUALITY_STEP_TOL) {
        return Err(MzError::Degenerate(format!("functional residual {duality_residual:.3e} too large")));
    }
    let dmu = cr.delta(mu, n - 1);
    let dprev = cr.delta(mu - 1, n - 1);
    pivot_guard(dmu, dy.norm(), "Δ_μ(g_n)")?;
    let mut wn = w;
    wn[0] -= dprev / (dmu * mu as f64);
    Ok(GeneralStep { point: frame2.to_base(&wn), frame: frame2, safeguard, duality_residual })
}

/// Which iteration to run.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Algorithm {
    /// [`refine_double`] (normalized coordinates, `μ = 2`).
    Double,
    /// [`refine_triple`] (normalized coordinates, `μ = 3`).
    Triple,
    /// [`refine_general`] (any coordinates, any `μ ≥ 2`).
    General,
}

impl Algorithm {
    /// Stable lower-case name.
    pub fn as_str(self) -> &'static str {
        match self {
            Algorithm::Double => "double",
            Algorithm::Triple => "triple",
            Algorithm::General => "general",
        }
    }
}

/// Why an iteration stopped.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum StopReason {
    /// Step length or residual fell below the tolerance.
    Tolerance,
    /// The iteration budget was exhausted.
    MaxIter,
    /// Steps grew for several consecutive iterations, or became non-finite.
    Divergence,
    /// A step could not be formed (singular pivot or inconsistent
    /// functionals).
    SingularStep,
}

impl StopReason {
    /// Stable snake-case name.
    pub fn as_str(self) -> &'static str {
        match self {
            StopReason::Tolerance => "tolerance",
            StopReason::MaxIter => "max_iter",
            StopReason::Divergence => "divergence",
            StopReason::SingularStep => "singular_step",
        }
    }
}

/// Record of an iteration.
#[derive(Clone, Debug)]
pub struct NewtonTrace {
    /// Algorithm used.
    pub algorithm: Algorithm,
    /// Multiplicity used.
    pub mu: usize,
    /// Iterates, starting with the initial point.
    pub iterates: Vec<Vec<C64>>,
    /// `‖f(iterate)‖` for every iterate.
    pub residual_norms: Vec<f64>,
    /// Length of every step.
    pub step_norms: Vec<f64>,
    /// Frames `(U, W)` of the general iteration, one per step.
    pub frames: Vec<(DMatrix<C64>, DMatrix<C64>)>,
    /// Safeguard measurements of the general iteration, one per step.
    pub safeguard: Vec<SafeguardLog>,
    /// Whether the tolerance was reached.
    pub converged: bool,
    /// Why the iteration stopped.
    pub stop_reason: StopReason,
    /// Human-readable warnings (safeguard violations, step failures).
    pub warnings: Vec<String>,
}

impl NewtonTrace {
    /// Last iterate.
    pub fn last(&self) -> &[C64] {
        self.iterates.last().expect("trace always holds the initial point")
    }
}

fn dist(a: &[C64], b: &[C64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).norm_sqr()).sum::<f64>().sqrt()
}

/// Iterates `algorithm` from `z` until the step length or residual drops
/// to `eps`, the budget `max_iter` is used, the steps grow
/// [`DIVERGENCE_STREAK`] times in a row, or a step cannot be formed.
///
/// Errors only for invalid input; numerical failures during the iteration
/// are reported through [`NewtonTrace::stop_reason`].
pub fn iterate_until(
    f: &Arc<PolySystem>,
    z: &[C64],
    mu: usize,
    algorithm: Algorithm,
    eps: f64,
    max_iter: usize,
) -> Result<NewtonTrace> {
    let n = f.nvars();
    check_len(n, z)?;
    if !(eps >= 0.0) || !eps.is_finite() {
        return Err(MzError::InvalidArgument(format!("tolerance must be a finite non-negative number, got {eps}")));
    }
    match (algorithm, mu) {
        (Algorithm::Double, 2) | (Algorithm::Triple, 3) => {}
        (Algorithm::General, m) if m >= 2 => {}
        _ => {
            return Err(MzError::InvalidArgument(format!(
                "algorithm '{}' does not apply to multiplicity {mu}",
                algorithm.as_str()
            )))
        }
    }
    let res0 = vec_norm(&f.eval(z)?);
    let mut trace = NewtonTrace {
        algorithm,
        mu,
        iterates: vec![z.to_vec()],
        residual_norms: vec![res0],
        step_norms: Vec::new(),
        frames: Vec::new(),
        safeguard: Vec::new(),
        converged: false,
        stop_reason: StopReason::MaxIter,
        warnings: Vec::new(),
    };
    if res0 <= eps {
        trace.converged = true;
        trace.stop_reason = StopReason::Tolerance;
        return Ok(trace);
    }
    let mut growing = 0usize;
    for it in 0..max_iter {
        let cur = trace.last().to_vec();
        let step = match algorithm {
            Algorithm::Double => refine_double(f.as_ref(), &cur),
            Algorithm::Triple => refine_triple(f.as_ref(), &cur),
            Algorithm::General => refine_general(f, &cur, mu).map(|s| {
                if !s.safeguard.ok {
                    trace.warnings.push(format!(
                        "iteration {}: safeguard violated (‖Df(y) − Df(z)‖_F = {:.3e} > gap/5 = {:.3e})",
                        it + 1,
                        s.safeguard.jacobian_change,
                        s.safeguard.gap / 5.0
                    ));
                }
                trace.safeguard.push(s.safeguard);
                trace.frames.push((s.frame.u().clone(), s.frame.w().clone()));
                s.point
            }),
        };
        let next = match step {
            Ok(p) => p,
            Err(e) => {
                trace.warnings.push(format!("iteration {}: {e}", it + 1));
                trace.stop_reason = StopReason::SingularStep;
                return Ok(trace);
            }
        };
        if next.iter().any(|c| !c.re.is_finite() || !c.im.is_finite()) {
            trace.stop_reason = StopReason::Divergence;
            return Ok(trace);
        }
        let sn = dist(&next, &cur);
        let res = vec_norm(&f.eval(&next)?);
        if let Some(&prev) = trace.step_norms.last() {
            growing = if sn > prev { growing + 1 } else { 0 };
        }
        trace.step_norms.push(sn);
        trace.residual_norms.push(res);
        trace.iterates.push(next);
        if sn <= eps || res <= eps {
            trace.converged = true;
            trace.stop_reason = StopReason::Tolerance;
            return Ok(trace);
        }
        if growing >= DIVERGENCE_STREAK {
            trace.stop_reason = StopReason::Divergence;
            return Ok(trace);
        }
    }
    Ok(trace)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::polycore::parse_system;

    fn c(r: f64) -> C64 {
        C64::new(r, 0.0)
    }

    const EXAMPLE: &str = "vars: X1 X2
f1: 64/73*X1^2 - 48/73*X1*X2 + 9/73*X2^2 + sqrt(73)/12*X2
f2: (8*X1 - 3*X2)^2*(3*X1 + 8*X2)";

    #[test]
    fn triple_example_iterates() {
        let f = parse_system(EXAMPLE).unwrap();
        let z0 = [c(-0.01), c(0.01)];
        let z1 = refine_triple(&f, &z0).unwrap();
        let z2 = refine_triple(&f, &z1).unwrap();
        assert!((z2[0].re + 4.1291826e-8).abs() < 1e-13, "{z2:?}");
        assert!((z2[1].re + 2.9505818e-8).abs() < 1e-13, "{z2:?}");
    }

    #[test]
    fn double_is_exact_on_quadratic() {
        let f = parse_system("vars: X1 X2; f1: X2 + X1^2; f2: X1^2 - 2*X1*X2").unwrap();
        let z = refine_double(&f, &[c(0.01), c(0.02)]).unwrap();
        let z = refine_double(&f, &z).unwrap();
        assert!(vec_norm(&z) < 1e-6, "{z:?}");
    }

    #[test]
    fn general_converges_on_example() {
        let f = Arc::new(parse_system(EXAMPLE).unwrap());
        let tr = iterate_until(&f, &[c(-0.01), c(0.01)], 3, Algorithm::General, 1e-14, 20).unwrap();
        assert!(tr.converged, "{tr:?}");
        assert!(vec_norm(tr.last()) < 1e-10, "{tr:?}");
    }

    #[test]
    fn algorithm_mismatch_rejected() {
        let f = Arc::new(parse_system(EXAMPLE).unwrap());
        assert!(iterate_until(&f, &[c(0.1), c(0.1)], 2, Algorithm::Triple, 1e-12, 5).is_err());
    }
}
