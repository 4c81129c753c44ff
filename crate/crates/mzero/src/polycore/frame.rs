//! Unitary changes of equations and variables, evaluated by the chain rule.

use std::sync::Arc;

use nalgebra::DMatrix;

use super::jet::{Jet, LocalModel};
use super::poly::{Poly, PolySystem};
use super::tensor::CTensor;
use crate::error::{MzError, Result};
use crate::numkit::matrix_spectral_norm;
use crate::C64;

/// Tolerance on `‖Q*Q − I‖` accepted for caller-supplied unitary matrices.
pub const UNITARY_TOL: f64 = 1e-10;

/// The transformed system `g(Y) = U*·f(W·Y)` for unitary `U`, `W`.
///
/// Values, Jacobians and derivative tensors of `g` are computed from those of
/// the base system `f` at `W·y` by the chain rule
/// (`D^k g(y)[v_1…v_k] = U*·D^k f(Wy)[Wv_1…Wv_k]`); the transformed
/// polynomials are never expanded unless [`NormalizedFrame::materialize`] is
/// called explicitly.
#[derive(Clone, Debug)]
pub struct NormalizedFrame {
    base: Arc<PolySystem>,
    u: DMatrix<C64>,
    w: DMatrix<C64>,
}

/// Spectral-norm deviation `‖Q*Q − I‖`.
pub fn unitarity_defect(q: &DMatrix<C64>) -> f64 {
    let n = q.ncols();
    let g = q.adjoint() * q - DMatrix::<C64>::identity(n, n);
    matrix_spectral_norm(&g).unwrap_or(f64::INFINITY)
}

fn check_unitary(q: &DMatrix<C64>, n: usize) -> Result<()> {
    if q.nrows() != n || q.ncols() != n {
        return Err(MzError::DimensionMismatch { expected: n, got: q.nrows().max(q.ncols()) });
    }
    let dev = unitarity_defect(q);
    if !(dev <= UNITARY_TOL) {
        return Err(MzError::NotUnitary { deviation: dev });
    }
    Ok(())
}

impl NormalizedFrame {
    /// Builds a frame, checking that `U` and `W` are unitary.
    pub fn new(base: Arc<PolySystem>, u: DMatrix<C64>, w: DMatrix<C64>) -> Result<Self> {
        let n = base.nvars();
        check_unitary(&u, n)?;
        check_unitary(&w, n)?;
        Ok(NormalizedFrame { base, u, w })
    }

    /// The identity frame (`U = W = I`).
    pub fn identity(base: Arc<PolySystem>) -> Self {
        let n = base.nvars();
        NormalizedFrame {
            base,
            u: DMatrix::identity(n, n),
            w: DMatrix::identity(n, n),
        }
    }

    /// The base system `f`.
    pub fn base(&self) -> &Arc<PolySystem> {
        &self.base
    }

    /// The equation transform `U`.
    pub fn u(&self) -> &DMatrix<C64> {
        &self.u
    }

    /// The variable transform `W`.
    pub fn w(&self) -> &DMatrix<C64> {
        &self.w
    }

    /// Composes with a further transform: the result represents
    /// `U₂*·g(W₂·Y) = (U·U₂)*·f(W·W₂·Y)`.
    pub fn compose(&self, u2: &DMatrix<C64>, w2: &DMatrix<C64>) -> Result<NormalizedFrame> {
        NormalizedFrame::new(self.base.clone(), &self.u * u2, &self.w * w2)
    }

    /// Maps frame coordinates to base coordinates: `x = W·y`.
    pub fn to_base(&self, y: &[C64]) -> Vec<C64> {
        mat_vec(&self.w, y)
    }

    /// Maps base coordinates to frame coordinates: `y = W*·x`.
    pub fn from_base(&self, x: &[C64]) -> Vec<C64> {
        mat_vec(&self.w.adjoint(), x)
    }

    /// `g(y) = U*·f(W·y)`.
    pub fn eval(&self, y: &[C64]) -> Result<Vec<C64>> {
        let fx = self.base.eval(&self.to_base_checked(y)?)?;
        Ok(mat_vec(&self.u.adjoint(), &fx))
    }

    /// `Dg(y) = U*·Df(W·y)·W`.
    pub fn jacobian(&self, y: &[C64]) -> Result<DMatrix<C64>> {
        let j = self.base.jacobian(&self.to_base_checked(y)?)?;
        Ok(self.u.adjoint() * j * &self.w)
    }

    /// `D^k g(y)` through the chain rule.
    pub fn derivative_tensor(&self, y: &[C64], k: usize) -> Result<CTensor> {
        let x = self.to_base_checked(y)?;
        let t = super::tensor::derivative_tensor(&self.base, &x, k)?;
        Ok(t.contract_inputs(&self.w)?.left_mul(&self.u.adjoint())?.canonicalize())
    }

    /// Jet of `g` at `y` up to `max_order`, assembled from chain-rule tensors.
    pub fn jet(&self, y: &[C64], max_order: usize) -> Result<Jet> {
        let vals = self.eval(y)?;
        let deg = self.base.degree() as usize;
        let n = self.base.nvars();
        let top = max_order.min(deg);
        let mut tensors = Vec::with_capacity(top);
        for k in 1..=top {
            tensors.push(self.derivative_tensor(y, k)?);
        }
        Ok(Jet::from_tensors(n, vals, &tensors)?.extended_to(max_order))
    }

    /// Expands `g = U*·f(W·X)` into explicit polynomials (for tests and
    /// reporting).
    pub fn materialize(&self) -> PolySystem {
        let n = self.base.nvars();
        let composed: Vec<Poly> = self.base.polys().iter().map(|p| p.compose_linear(&self.w)).collect();
        let ustar = self.u.adjoint();
        let polys = (0..n)
            .map(|i| {
                let mut acc = Poly::zero(n);
                for (j, p) in composed.iter().enumerate() {
                    acc = &acc + &p.scale(ustar[(i, j)]);
                }
                acc
            })
            .collect();
        self.base.with_polys(polys)
    }

    fn to_base_checked(&self, y: &[C64]) -> Result<Vec<C64>> {
        self.base.check_point(y)?;
        Ok(self.to_base(y))
    }
}

impl LocalModel for NormalizedFrame {
    fn nvars(&self) -> usize {
        self.base.nvars()
    }
    fn degree(&self) -> u32 {
        self.base.degree()
    }
    fn eval_at(&self, x: &[C64]) -> Result<Vec<C64>> {
        self.eval(x)
    }
    fn jacobian_at(&self, x: &[C64]) -> Result<DMatrix<C64>> {
        self.jacobian(x)
    }
    fn derivative_tensor_at(&self, x: &[C64], k: usize) -> Result<CTensor> {
        self.derivative_tensor(x, k)
    }
    fn jet_at(&self, x: &[C64], max_order: usize) -> Result<Jet> {
        self.jet(x, max_order)
    }
}

/// Builds the frame `g = U*·f(W·X)` after checking unitarity of both
/// matrices.
pub fn unitary_pullback(f: Arc<PolySystem>, u: DMatrix<C64>, w: DMatrix<C64>) -> Result<NormalizedFrame> {
    NormalizedFrame::new(f, u, w)
}

/// The frame that puts `f` in normalized coordinates at `x` using the SVD
/// `Df(x) = U·Σ·V*`: `g = U*·f(W·X)` with `W = (v_n, v_1, …, v_{n−1})`.
/// Returns the frame and the transformed point `W*·x`. In these
/// coordinates `Dg(W*x)` has first column `σ_n·e_n`, last row
/// `(σ_n, 0, …, 0)` and `Dĝ = diag(σ_1, …, σ_{n−1})`.
pub fn svd_frame(f: Arc<PolySystem>, x: &[C64]) -> Result<(NormalizedFrame, Vec<C64>)> {
    f.check_point(x)?;
    let n = f.nvars();
    let s = crate::numkit::svd(&f.jacobian(x)?)?;
    let w = DMatrix::from_fn(n, n, |i, j| if j == 0 { s.v[(i, n - 1)] } else { s.v[(i, j - 1)] });
    let frame = NormalizedFrame::new(f, s.u, w)?;
    let y = frame.from_base(x);
    Ok((frame, y))
}

/// Matrix–vector product on slices.
pub fn mat_vec(m: &DMatrix<C64>, v: &[C64]) -> Vec<C64> {
    (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| m[(i, j)] * v[j]).sum())
        .collect()
}
