//! Dense symmetric derivative tensors.

use nalgebra::DMatrix;

use super::monomial::{factorial, Monomial};
use super::poly::{Poly, PolySystem};
use crate::error::{MzError, Result};
use crate::C64;

/// A dense complex tensor with `rows` output components and `order` input
/// slots of dimension `dim`, i.e. a multilinear map `(ℂ^dim)^order → ℂ^rows`.
///
/// Entries are stored row-major: the output row is the slowest index and the
/// last input slot the fastest. Derivative tensors are symmetric in their
/// input slots by construction.
#[derive(Clone, Debug, PartialEq)]
pub struct CTensor {
    rows: usize,
    dim: usize,
    order: usize,
    data: Vec<C64>,
}

impl CTensor {
    /// The zero tensor.
    pub fn zeros(rows: usize, dim: usize, order: usize) -> Self {
        let len = rows * dim.pow(order as u32);
        CTensor { rows, dim, order, data: vec![C64::new(0.0, 0.0); len] }
    }

    /// Builds a tensor from a function of `(row, slots)`.
    pub fn from_fn<F: FnMut(usize, &[usize]) -> C64>(rows: usize, dim: usize, order: usize, mut f: F) -> Self {
        let mut t = CTensor::zeros(rows, dim, order);
        let per = t.slots_len();
        let mut slots = vec![0usize; order];
        for r in 0..rows {
            for flat in 0..per {
                decode(flat, dim, &mut slots);
                t.data[r * per + flat] = f(r, &slots);
            }
        }
        t
    }

    /// Builds a tensor from raw row-major data.
    pub fn from_data(rows: usize, dim: usize, order: usize, data: Vec<C64>) -> Result<Self> {
        let expected = rows * dim.pow(order as u32);
        if data.len() != expected {
            return Err(MzError::DimensionMismatch { expected, got: data.len() });
        }
        Ok(CTensor { rows, dim, order, data })
    }

    /// Number of output components.
    pub fn rows(&self) -> usize {
        self.rows
    }

    /// Dimension of each input slot.
    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Number of input slots.
    pub fn order(&self) -> usize {
        self.order
    }

    /// Raw data, row-major.
    pub fn data(&self) -> &[C64] {
        &self.data
    }

    fn slots_len(&self) -> usize {
        self.dim.pow(self.order as u32)
    }

    fn flat_index(&self, slots: &[usize]) -> usize {
        slots.iter().fold(0, |acc, &s| acc * self.dim + s)
    }

    /// Entry at `(row, j_1, …, j_k)`.
    pub fn get(&self, row: usize, slots: &[usize]) -> C64 {
        self.data[row * self.slots_len() + self.flat_index(slots)]
    }

    /// Entry looked up through the sorted slot tuple, i.e. the symmetrized
    /// accessor; equals [`CTensor::get`] bitwise for symmetric tensors.
    pub fn get_sym(&self, row: usize, slots: &[usize]) -> C64 {
        let mut s = slots.to_vec();
        s.sort_unstable();
        self.get(row, &s)
    }

    /// Frobenius norm of the full array.
    pub fn frobenius(&self) -> f64 {
        self.data.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Largest entry magnitude.
    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|c| c.norm()).fold(0.0, f64::max)
    }

    /// Multiplies every entry by `c`.
    pub fn scale(&self, c: C64) -> CTensor {
        CTensor { data: self.data.iter().map(|v| v * c).collect(), ..self.clone() }
    }

    /// Keeps only the listed output rows, in the given order.
    pub fn select_rows(&self, rows: &[usize]) -> CTensor {
        let per = self.slots_len();
        let mut data = Vec::with_capacity(rows.len() * per);
        for &r in rows {
            data.extend_from_slice(&self.data[r * per..(r + 1) * per]);
        }
        CTensor { rows: rows.len(), dim: self.dim, order: self.order, data }
    }

    /// Applies a matrix `M` (`p × rows`) to the output: `(M·T)(v…) = M·T(v…)`.
    pub fn left_mul(&self, m: &DMatrix<C64>) -> Result<CTensor> {
        if m.ncols() != self.rows {
            return Err(MzError::DimensionMismatch { expected: self.rows, got: m.ncols() });
        }
        let per = self.slots_len();
        let p = m.nrows();
        let mut data = vec![C64::new(0.0, 0.0); p * per];
        for i in 0..p {
            for r in 0..self.rows {
                let c = m[(i, r)];
                if c == C64::new(0.0, 0.0) {
                    continue;
                }
                let src = &self.data[r * per..(r + 1) * per];
                let dst = &mut data[i * per..(i + 1) * per];
                for (d, s) in dst.iter_mut().zip(src) {
                    *d += c * s;
                }
            }
        }
        Ok(CTensor { rows: p, dim: self.dim, order: self.order, data })
    }

    /// Changes coordinates in every input slot:
    /// `T'(row, j_1…j_k) = Σ_i T(row, i_1…i_k) W[i_1, j_1] ⋯ W[i_k, j_k]`,
    /// so that `T'(v_1, …, v_k) = T(W v_1, …, W v_k)`.
    pub fn contract_inputs(&self, w: &DMatrix<C64>) -> Result<CTensor> {
        if w.nrows() != self.dim {
            return Err(MzError::DimensionMismatch { expected: self.dim, got: w.nrows() });
        }
        let new_dim = w.ncols();
        let mut cur = self.data.clone();
        let mut cur_dims: Vec<usize> = vec![self.dim; self.order];
        for mode in 0..self.order {
            // Layout: rows × d_0 × … × d_{k-1}; contract axis `mode`.
            let before: usize = self.rows * cur_dims[..mode].iter().product::<usize>();
            let after: usize = cur_dims[mode + 1..].iter().product();
            let old = cur_dims[mode];
            let mut next = vec![C64::new(0.0, 0.0); before * new_dim * after];
            for b in 0..before {
                for i in 0..old {
                    let src = &cur[(b * old + i) * after..(b * old + i + 1) * after];
                    for j in 0..new_dim {
                        let c = w[(i, j)];
                        if c == C64::new(0.0, 0.0) {
                            continue;
                        }
                        let dst = &mut next[(b * new_dim + j) * after..(b * new_dim + j + 1) * after];
                        for (d, s) in dst.iter_mut().zip(src) {
                            *d += c * s;
                        }
                    }
                }
            }
            cur = next;
            cur_dims[mode] = new_dim;
        }
        Ok(CTensor { rows: self.rows, dim: new_dim, order: self.order, data: cur })
    }

    /// Evaluates the multilinear map on `k` vectors.
    pub fn apply(&self, vs: &[&[C64]]) -> Vec<C64> {
        assert_eq!(vs.len(), self.order);
        let mut cur = self.data.clone();
        let mut width = self.slots_len();
        // Contract the last slot first.
        for v in vs.iter().rev() {
            let new_width = width / self.dim;
            let mut next = vec![C64::new(0.0, 0.0); self.rows * new_width];
            for (idx, out) in next.iter_mut().enumerate() {
                let base = idx * self.dim;
                let mut s = C64::new(0.0, 0.0);
                for (j, vj) in v.iter().enumerate() {
                    s += cur[base + j] * vj;
                }
                *out = s;
            }
            cur = next;
            width = new_width;
        }
        cur
    }

    /// Evaluates `T(u, …, u, ·)` (all slots but the last filled with `u`),
    /// returning a `rows × dim` matrix.
    pub fn apply_all_but_one(&self, u: &[C64]) -> DMatrix<C64> {
        assert!(self.order >= 1);
        let mut cur = self.data.clone();
        // Contract slots 0..order-1 from the front: treat data as rows × dim × rest.
        let mut rest = self.slots_len();
        for _ in 0..self.order - 1 {
            rest /= self.dim;
            let mut next = vec![C64::new(0.0, 0.0); self.rows * rest];
            for r in 0..self.rows {
                for (i, ui) in u.iter().enumerate() {
                    let src = &cur[(r * self.dim + i) * rest..(r * self.dim + i + 1) * rest];
                    let dst = &mut next[r * rest..(r + 1) * rest];
                    for (d, s) in dst.iter_mut().zip(src) {
                        *d += ui * s;
                    }
                }
            }
            cur = next;
        }
        DMatrix::from_fn(self.rows, self.dim, |r, j| cur[r * self.dim + j])
    }

    /// Flattening into a `rows × dim^order` matrix.
    pub fn flatten(&self) -> DMatrix<C64> {
        let per = self.slots_len();
        DMatrix::from_fn(self.rows, per, |r, c| self.data[r * per + c])
    }

    /// For an order-2 tensor with one output row, the symmetric `dim × dim`
    /// matrix of the bilinear form.
    pub fn as_form_matrix(&self, row: usize) -> DMatrix<C64> {
        assert_eq!(self.order, 2);
        DMatrix::from_fn(self.dim, self.dim, |i, j| self.get(row, &[i, j]))
    }

    /// Makes the tensor exactly symmetric by copying every entry from the
    /// entry at its sorted slot tuple (used after floating-point mode
    /// products, which are symmetric only up to rounding).
    pub fn canonicalize(mut self) -> CTensor {
        let per = self.slots_len();
        let mut slots = vec![0usize; self.order];
        for r in 0..self.rows {
            for flat in 0..per {
                decode(flat, self.dim, &mut slots);
                if slots.windows(2).all(|w| w[0] <= w[1]) {
                    continue;
                }
                let v = self.get_sym(r, &slots);
                self.data[r * per + flat] = v;
            }
        }
        self
    }

    /// Largest deviation from slot symmetry, relative to the entry scale.
    pub fn symmetry_defect(&self) -> f64 {
        let scale = self.max_abs();
        if scale == 0.0 {
            return 0.0;
        }
        let per = self.slots_len();
        let mut slots = vec![0usize; self.order];
        let mut worst: f64 = 0.0;
        for r in 0..self.rows {
            for flat in 0..per {
                decode(flat, self.dim, &mut slots);
                let v = self.data[r * per + flat];
                let w = self.get_sym(r, &slots);
                worst = worst.max((v - w).norm());
            }
        }
        worst / scale
    }
}

fn decode(mut flat: usize, dim: usize, slots: &mut [usize]) {
    for s in slots.iter_mut().rev() {
        *s = flat % dim;
        flat /= dim;
    }
}

fn tensor_from_shifted(shifted: &[&Poly], dim: usize, k: usize, scaled: bool) -> CTensor {
    let kf = factorial(k as u32);
    CTensor::from_fn(shifted.len(), dim, k, |r, slots| {
        let alpha = Monomial::from_slots(dim, slots);
        let c = shifted[r].coeff(&alpha);
        let w = alpha.factorial();
        if scaled {
            c * (w / kf)
        } else {
            c * w
        }
    })
}

/// The derivative tensor `D^k f(x)` with entries
/// `∂^k f_i / ∂X_{j_1}⋯∂X_{j_k} (x)`.
///
/// `k = 0` is rejected; use [`PolySystem::eval`] for values.
pub fn derivative_tensor(f: &PolySystem, x: &[C64], k: usize) -> Result<CTensor> {
    derivative_tensor_impl(f, x, k, false)
}

/// The scaled derivative tensor `D^k f(x) / k!`.
pub fn derivative_tensor_scaled(f: &PolySystem, x: &[C64], k: usize) -> Result<CTensor> {
    derivative_tensor_impl(f, x, k, true)
}

fn derivative_tensor_impl(f: &PolySystem, x: &[C64], k: usize, scaled: bool) -> Result<CTensor> {
    if k == 0 {
        return Err(MzError::InvalidArgument("derivative order must be at least 1".into()));
    }
    f.check_point(x)?;
    let shifted: Vec<Poly> = f.polys().iter().map(|p| p.shift(x)).collect();
    let refs: Vec<&Poly> = shifted.iter().collect();
    Ok(tensor_from_shifted(&refs, f.nvars(), k, scaled))
}

/// Derivative tensor of a single polynomial (one output row).
pub fn poly_derivative_tensor(p: &Poly, x: &[C64], k: usize, scaled: bool) -> Result<CTensor> {
    if k == 0 {
        return Err(MzError::InvalidArgument("derivative order must be at least 1".into()));
    }
    if x.len() != p.nvars() {
        return Err(MzError::DimensionMismatch { expected: p.nvars(), got: x.len() });
    }
    let s = p.shift(x);
    Ok(tensor_from_shifted(&[&s], p.nvars(), k, scaled))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(r: f64) -> C64 {
        C64::new(r, 0.0)
    }

    #[test]
    fn contract_with_identity_is_noop() {
        let t = CTensor::from_fn(2, 3, 2, |r, s| c((r * 9 + s[0] * 3 + s[1]) as f64));
        let id = DMatrix::<C64>::identity(3, 3);
        assert_eq!(t.contract_inputs(&id).unwrap(), t);
    }

    #[test]
    fn apply_matches_manual_sum() {
        let t = CTensor::from_fn(1, 2, 2, |_, s| c((1 + s[0] + 2 * s[1]) as f64));
        let u = [c(1.0), c(2.0)];
        let v = [c(3.0), c(-1.0)];
        let got = t.apply(&[&u, &v])[0];
        let mut want = c(0.0);
        for i in 0..2 {
            for j in 0..2 {
                want += t.get(0, &[i, j]) * u[i] * v[j];
            }
        }
        assert!((got - want).norm() < 1e-14);
        let m = t.apply_all_but_one(&u);
        let w2: C64 = (0..2).map(|j| m[(0, j)] * v[j]).sum();
        assert!((w2 - want).norm() < 1e-14);
    }

    #[test]
    fn order_zero_rejected() {
        let f = PolySystem::new(vec![Poly::var(1, 0)]).unwrap();
        assert!(derivative_tensor(&f, &[c(0.0)], 0).is_err());
    }
}
