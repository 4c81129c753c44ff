//! Dense complex linear algebra: SVD with a deterministic phase convention,
//! linear and least-squares solves, spectral norms.

use nalgebra::DMatrix;

use crate::error::{MzError, Result};
use crate::C64;

/// Result of a full singular value decomposition `A = U·Σ·V*`.
#[derive(Clone, Debug)]
pub struct SvdResult {
    /// `m × m` unitary matrix of left singular vectors.
    pub u: DMatrix<C64>,
    /// Singular values, descending, length `min(m, n)`.
    pub singular_values: Vec<f64>,
    /// `n × n` unitary matrix of right singular vectors.
    pub v: DMatrix<C64>,
}

impl SvdResult {
    /// Largest singular value (0 for empty matrices).
    pub fn sigma_max(&self) -> f64 {
        self.singular_values.first().copied().unwrap_or(0.0)
    }

    /// Smallest singular value (0 for empty matrices).
    pub fn sigma_min(&self) -> f64 {
        self.singular_values.last().copied().unwrap_or(0.0)
    }
}

/// Acceptable relative backward error of a decomposition.
const SVD_BACKWARD_TOL: f64 = 1e-12;

/// Thin SVD `(U, σ, V)` of `a` with `a = U·diag(σ)·V*`, computed with faer
/// and verified by its backward error.
///
/// nalgebra's complex bidiagonal SVD returns wrong factorizations for some
/// matrices, so decompositions go through faer; the reconstruction check
/// guards against silent failures of any backend.
fn thin_svd(a: &DMatrix<C64>) -> Result<(DMatrix<C64>, Vec<f64>, DMatrix<C64>)> {
    let (m, n) = a.shape();
    let fa = faer::Mat::<C64>::from_fn(m, n, |i, j| a[(i, j)]);
    let dec = fa.thin_svd().map_err(|e| MzError::NoConvergence(format!("SVD failed: {e:?}")))?;
    let (fu, fv, fs) = (dec.U(), dec.V(), dec.S().column_vector());
    let k = m.min(n);
    let u = DMatrix::from_fn(m, k, |i, j| fu[(i, j)]);
    let v = DMatrix::from_fn(n, k, |i, j| fv[(i, j)]);
    let sv: Vec<f64> = (0..k).map(|i| fs[i].re).collect();
    let sigma = DMatrix::from_fn(k, k, |i, j| if i == j { C64::new(sv[i], 0.0) } else { C64::new(0.0, 0.0) });
    let err = (&u * sigma * v.adjoint() - a).norm() / a.norm().max(f64::MIN_POSITIVE);
    if !(err <= SVD_BACKWARD_TOL) {
        return Err(MzError::NoConvergence(format!("SVD backward error {err:.3e} exceeds {SVD_BACKWARD_TOL:.0e}")));
    }
    Ok((u, sv, v))
}

/// Index of the largest-magnitude entry of a column, ties broken towards the
/// lowest index (entries within a relative 1e-12 of the maximum count as
/// ties, so the choice is stable under rounding).
fn pivot_index(m: &DMatrix<C64>, col: usize) -> usize {
    let mags: Vec<f64> = (0..m.nrows()).map(|i| m[(i, col)].norm()).collect();
    let max = mags.iter().copied().fold(0.0, f64::max);
    mags.iter().position(|&a| a >= max * (1.0 - 1e-12)).unwrap_or(0)
}

fn unit_phase(c: C64) -> C64 {
    let r = c.norm();
    if r == 0.0 {
        C64::new(1.0, 0.0)
    } else {
        c.conj() / r
    }
}

/// Extends the orthonormal columns of `q` (`m × r`) to an `m × m` unitary
/// matrix by Gram–Schmidt on the standard basis.
fn complete_basis(q: DMatrix<C64>, m: usize) -> DMatrix<C64> {
    let mut cols: Vec<nalgebra::DVector<C64>> = (0..q.ncols()).map(|j| q.column(j).into_owned()).collect();
    for e in 0..m {
        if cols.len() == m {
            break;
        }
        let mut v = nalgebra::DVector::<C64>::zeros(m);
        v[e] = C64::new(1.0, 0.0);
        for _ in 0..2 {
            for c in &cols {
                let proj = c.dotc(&v);
                v -= c * proj;
            }
        }
        let nv = v.norm();
        if nv > 1e-8 {
            cols.push(v / C64::new(nv, 0.0));
        }
    }
    DMatrix::from_columns(&cols)
}

/// Full SVD with deterministic phases: the largest-magnitude entry of every
/// right singular vector is real and positive, and the matching left
/// singular vector carries the same phase so that `A v_i = σ_i u_i`.
/// Left singular vectors beyond `min(m, n)` follow the same rule.
pub fn svd(a: &DMatrix<C64>) -> Result<SvdResult> {
    let (m, n) = a.shape();
    if a.iter().any(|c| !c.re.is_finite() || !c.im.is_finite()) {
        return Err(MzError::InvalidArgument("matrix has non-finite entries".into()));
    }
    if m == 0 || n == 0 {
        return Ok(SvdResult {
            u: DMatrix::identity(m, m),
            singular_values: Vec::new(),
            v: DMatrix::identity(n, n),
        });
    }
    let (u_thin, sv, v_thin) = thin_svd(a)?;
    let r = sv.len();
    let mut order: Vec<usize> = (0..r).collect();
    order.sort_by(|&i, &j| sv[j].partial_cmp(&sv[i]).unwrap_or(std::cmp::Ordering::Equal).then(i.cmp(&j)));
    let mut u_cols = Vec::with_capacity(r);
    let mut v_cols = Vec::with_capacity(r);
    let mut svals = Vec::with_capacity(r);
    for &k in &order {
        u_cols.push(u_thin.column(k).into_owned());
        v_cols.push(v_thin.column(k).into_owned());
        svals.push(sv[k]);
    }
    let u_sorted = DMatrix::from_columns(&u_cols);
    let v_sorted = DMatrix::from_columns(&v_cols);
    let mut u = complete_basis(u_sorted, m);
    let mut v = complete_basis(v_sorted, n);
    for j in 0..n {
        let p = pivot_index(&v, j);
        let ph = unit_phase(v[(p, j)]);
        for i in 0..n {
            v[(i, j)] *= ph;
        }
        if j < r {
            for i in 0..m {
                u[(i, j)] *= ph;
            }
        }
    }
    for j in r..m {
        let p = pivot_index(&u, j);
        let ph = unit_phase(u[(p, j)]);
        for i in 0..m {
            u[(i, j)] *= ph;
        }
    }
    Ok(SvdResult { u, singular_values: svals, v })
}

/// Spectral norm `σ₁(A)` (0 for empty matrices).
pub fn matrix_spectral_norm(a: &DMatrix<C64>) -> Result<f64> {
    if a.nrows() == 0 || a.ncols() == 0 {
        return Ok(0.0);
    }
    if a.iter().any(|c| !c.re.is_finite() || !c.im.is_finite()) {
        return Err(MzError::InvalidArgument("matrix has non-finite entries".into()));
    }
    Ok(svd(a)?.sigma_max())
}

/// Solves the square system `A·X = B`.
///
/// Fails with [`MzError::Singular`] when `σ_min ≤ 100·ε·σ_max`, i.e. when
/// the condition number exceeds `1/(100·ε)`.
pub fn solve_linear(a: &DMatrix<C64>, b: &DMatrix<C64>) -> Result<DMatrix<C64>> {
    let n = a.nrows();
    if a.ncols() != n {
        return Err(MzError::DimensionMismatch { expected: n, got: a.ncols() });
    }
    if b.nrows() != n {
        return Err(MzError::DimensionMismatch { expected: n, got: b.nrows() });
    }
    if n == 0 {
        return Ok(DMatrix::zeros(0, b.ncols()));
    }
    let s = svd(a)?;
    let smax = s.sigma_max();
    let smin = s.sigma_min();
    if !(smin > 100.0 * f64::EPSILON * smax) || smin == 0.0 {
        return Err(MzError::Singular { sigma_min: smin, sigma_max: smax });
    }
    // x = V Σ⁻¹ U* b
    let mut y = s.u.adjoint() * b;
    for i in 0..n {
        let inv = 1.0 / s.singular_values[i];
        for j in 0..y.ncols() {
            y[(i, j)] *= inv;
        }
    }
    let mut x = &s.v * y;
    // One step of iterative refinement.
    let r = b - a * &x;
    let mut dy = s.u.adjoint() * r;
    for i in 0..n {
        let inv = 1.0 / s.singular_values[i];
        for j in 0..dy.ncols() {
            dy[(i, j)] *= inv;
        }
    }
    x += &s.v * dy;
    Ok(x)
}

/// Solves `A·x = b` for a single right-hand side given as a slice.
pub fn solve_vec(a: &DMatrix<C64>, b: &[C64]) -> Result<Vec<C64>> {
    let bm = DMatrix::from_column_slice(b.len(), 1, b);
    let x = solve_linear(a, &bm)?;
    Ok(x.column(0).iter().copied().collect())
}

/// Minimum-norm least-squares solution of `A·x ≈ b` (`A` is `m × n`),
/// treating singular values below `rcond·σ₁` as zero. Returns the solution
/// and the Euclidean norm of the residual `b − A·x`.
pub fn least_squares(a: &DMatrix<C64>, b: &[C64], rcond: f64) -> Result<(Vec<C64>, f64)> {
    let (m, n) = a.shape();
    if b.len() != m {
        return Err(MzError::DimensionMismatch { expected: m, got: b.len() });
    }
    if n == 0 {
        let r = b.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
        return Ok((Vec::new(), r));
    }
    let s = svd(a)?;
    let smax = s.sigma_max();
    let bv = nalgebra::DVector::from_column_slice(b);
    let ub = s.u.adjoint() * &bv;
    let mut y = nalgebra::DVector::<C64>::zeros(n);
    for (i, &sv) in s.singular_values.iter().enumerate() {
        if sv > rcond * smax && sv > 0.0 {
            y[i] = ub[i] / sv;
        }
    }
    let x = &s.v * y;
    let r = &bv - a * &x;
    Ok((x.iter().copied().collect(), r.norm()))
}

/// Inverse of a square matrix (same conditioning rule as [`solve_linear`]).
pub fn inverse(a: &DMatrix<C64>) -> Result<DMatrix<C64>> {
    let n = a.nrows();
    solve_linear(a, &DMatrix::identity(n, n))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(r: f64) -> C64 {
        C64::new(r, 0.0)
    }

    #[test]
    fn svd_factorization_is_verified() {
        // A matrix on which nalgebra's complex SVD returns a wrong
        // factorization.
        let z = c(0.0);
        let a12 = C64::new(-0.636352606675924, -0.5683737933785817);
        let t = C64::new(5.953365972946762e-16, -1.5560448841953341e-15);
        let a = DMatrix::from_row_slice(
            6,
            3,
            &[c(1.0), z, z, z, a12, t, z, c(1.0), z, z, z, C64::new(0.08189587102368451, 0.723372289965487), z, z, a12, z, z, c(1.0)],
        );
        let s = svd(&a).unwrap();
        let sigma = DMatrix::from_fn(6, 3, |i, j| if i == j { c(s.singular_values[i]) } else { z });
        assert!((&s.u * sigma * s.v.adjoint() - &a).norm() < 1e-13);
        assert!((s.singular_values[0] - 1.5026535903538922).abs() < 1e-12);
        assert!((matrix_spectral_norm(&a).unwrap() - 1.5026535903538922).abs() < 1e-12);
    }

    #[test]
    fn diagonal_svd() {
        let a = DMatrix::from_row_slice(2, 2, &[c(3.0), c(0.0), c(0.0), c(1.0)]);
        let s = svd(&a).unwrap();
        assert!((s.singular_values[0] - 3.0).abs() < 1e-14);
        assert!((s.singular_values[1] - 1.0).abs() < 1e-14);
        assert!((s.v[(0, 0)] - c(1.0)).norm() < 1e-14);
        assert!((s.u[(0, 0)] - c(1.0)).norm() < 1e-14);
    }

    #[test]
    fn rank_deficient_jacobian() {
        let a = DMatrix::from_row_slice(2, 2, &[c(-0.25), c(-0.5), c(0.0), c(0.0)]);
        let s = svd(&a).unwrap();
        assert!((s.singular_values[0] - 5f64.sqrt() / 4.0).abs() < 1e-15);
        assert!(s.singular_values[1].abs() < 1e-15);
        let rec = &s.u * DMatrix::from_diagonal(&nalgebra::DVector::from_iterator(2, s.singular_values.iter().map(|&x| c(x)))) * s.v.adjoint();
        assert!((rec - a).norm() < 1e-14);
    }

    #[test]
    fn rectangular_svd_is_full() {
        let a = DMatrix::from_row_slice(1, 3, &[c(1.0), c(2.0), c(2.0)]);
        let s = svd(&a).unwrap();
        assert_eq!(s.u.shape(), (1, 1));
        assert_eq!(s.v.shape(), (3, 3));
        assert!((s.singular_values[0] - 3.0).abs() < 1e-14);
        let dev = (s.v.adjoint() * &s.v - DMatrix::<C64>::identity(3, 3)).norm();
        assert!(dev < 1e-13);
    }

    #[test]
    fn singular_solve_is_reported() {
        let a = DMatrix::from_row_slice(2, 2, &[c(1.0), c(2.0), c(2.0), c(4.0)]);
        let b = DMatrix::from_column_slice(2, 1, &[c(1.0), c(1.0)]);
        assert!(matches!(solve_linear(&a, &b), Err(MzError::Singular { .. })));
    }

    #[test]
    fn identity_solve() {
        let a = DMatrix::<C64>::identity(3, 3);
        let b = [c(1.0), C64::new(0.0, 2.0), c(-3.0)];
        let x = solve_vec(&a, &b).unwrap();
        for (xi, bi) in x.iter().zip(&b) {
            assert!((xi - bi).norm() < 1e-15);
        }
    }

    #[test]
    fn spectral_norm_examples() {
        let a = DMatrix::from_row_slice(2, 2, &[c(0.8), c(-0.4), c(-0.4), c(0.2)]);
        assert!((matrix_spectral_norm(&a).unwrap() - 1.0).abs() < 1e-14);
        let id = DMatrix::<C64>::identity(4, 4);
        assert!((matrix_spectral_norm(&id).unwrap() - 1.0).abs() < 1e-14);
    }
}
