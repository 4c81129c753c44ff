//! Truncated Taylor expansions (jets) of a system at a point, and the
//! `LocalModel` abstraction shared by explicit systems and unitary frames.

use std::collections::BTreeMap;

use nalgebra::DMatrix;

use super::monomial::Monomial;
use super::poly::{Poly, PolySystem};
use super::tensor::{derivative_tensor, CTensor};
use crate::dualspace::DualFunctional;
use crate::error::{MzError, Result};
use crate::C64;

/// Taylor coefficients `∂^α f_i(x) / α!` for all `|α| ≤ max_order`.
#[derive(Clone, Debug)]
pub struct Jet {
    nvars: usize,
    nfuncs: usize,
    max_order: usize,
    taylor: BTreeMap<Monomial, Vec<C64>>,
}

impl Jet {
    /// Jet of an explicit system at `x`, read off the shifted polynomials.
    pub fn from_system(f: &PolySystem, x: &[C64], max_order: usize) -> Result<Jet> {
        f.check_point(x)?;
        let n = f.nvars();
        let shifted: Vec<Poly> = f.polys().iter().map(|p| p.shift(x)).collect();
        let mut taylor = BTreeMap::new();
        for alpha in Monomial::all_up_to_degree(n, max_order as u32) {
            let col: Vec<C64> = shifted.iter().map(|p| p.coeff(&alpha)).collect();
            taylor.insert(alpha, col);
        }
        Ok(Jet { nvars: n, nfuncs: n, max_order, taylor })
    }

    /// Jet assembled from values and unscaled derivative tensors
    /// `D^1, …, D^K` (all with the same row count and slot dimension).
    pub fn from_tensors(n: usize, values: Vec<C64>, tensors: &[CTensor]) -> Result<Jet> {
        let m = values.len();
        let mut taylor = BTreeMap::new();
        taylor.insert(Monomial::one(n), values);
        for (idx, t) in tensors.iter().enumerate() {
            let k = idx + 1;
            if t.order() != k || t.rows() != m || t.dim() != n {
                return Err(MzError::InvalidArgument("inconsistent tensor list for jet".into()));
            }
            for alpha in Monomial::all_of_degree(n, k as u32) {
                let mut slots = Vec::with_capacity(k);
                for (j, &e) in alpha.exps().iter().enumerate() {
                    slots.extend(std::iter::repeat_n(j, e as usize));
                }
                let w = alpha.factorial();
                let col: Vec<C64> = (0..m).map(|r| t.get(r, &slots) / w).collect();
                taylor.insert(alpha, col);
            }
        }
        Ok(Jet { nvars: n, nfuncs: m, max_order: tensors.len(), taylor })
    }

    /// Declares the jet exact up to order `k ≥ max_order`: every
    /// coefficient not stored is zero (used when higher derivatives vanish
    /// by degree).
    pub fn extended_to(mut self, k: usize) -> Jet {
        self.max_order = self.max_order.max(k);
        self
    }

    /// Number of variables.
    pub fn nvars(&self) -> usize {
        self.nvars
    }

    /// Number of component functions.
    pub fn nfuncs(&self) -> usize {
        self.nfuncs
    }

    /// Highest available order.
    pub fn max_order(&self) -> usize {
        self.max_order
    }

    /// Taylor coefficient `∂^α f_i(x)/α!`; zero beyond the stored order.
    pub fn coeff(&self, i: usize, alpha: &Monomial) -> C64 {
        self.taylor.get(alpha).map(|c| c[i]).unwrap_or(C64::new(0.0, 0.0))
    }

    /// Function values `f(x)`.
    pub fn values(&self) -> Vec<C64> {
        self.taylor[&Monomial::one(self.nvars)].clone()
    }

    /// Jacobian `Df(x)`.
    pub fn jacobian(&self) -> DMatrix<C64> {
        DMatrix::from_fn(self.nfuncs, self.nvars, |i, j| self.coeff(i, &Monomial::var(self.nvars, j)))
    }

    /// Keeps the listed component functions.
    pub fn select_rows(&self, rows: &[usize]) -> Jet {
        let taylor = self
            .taylor
            .iter()
            .map(|(a, col)| (a.clone(), rows.iter().map(|&r| col[r]).collect()))
            .collect();
        Jet { nvars: self.nvars, nfuncs: rows.len(), max_order: self.max_order, taylor }
    }

    /// Renames variables: new variable `i` is old variable `perm[i]`.
    pub fn permute_vars(&self, perm: &[usize]) -> Jet {
        let taylor = self.taylor.iter().map(|(a, col)| (a.permuted(perm), col.clone())).collect();
        Jet { nvars: self.nvars, nfuncs: self.nfuncs, max_order: self.max_order, taylor }
    }

    /// Applies a differential functional to every component:
    /// `Λ(f_i) = Σ_α Λ[α]·∂^α f_i(x)/α!`.
    pub fn apply(&self, lambda: &DualFunctional) -> Result<Vec<C64>> {
        if lambda.order() > self.max_order {
            return Err(MzError::InvalidArgument(format!(
                "functional of order {} exceeds jet order {}",
                lambda.order(),
                self.max_order
            )));
        }
        let mut out = vec![C64::new(0.0, 0.0); self.nfuncs];
        for (alpha, c) in lambda.terms() {
            if alpha.nvars() != self.nvars {
                return Err(MzError::DimensionMismatch { expected: self.nvars, got: alpha.nvars() });
            }
            if let Some(col) = self.taylor.get(alpha) {
                for (o, v) in out.iter_mut().zip(col) {
                    *o += c * v;
                }
            }
        }
        Ok(out)
    }
}

/// Applies a differential functional to a single polynomial at `x`:
/// `Σ_α Λ[α]·(1/α!)·∂^α g(x)`.
pub fn apply_functional(lambda: &DualFunctional, g: &Poly, x: &[C64]) -> Result<C64> {
    if x.len() != g.nvars() {
        return Err(MzError::DimensionMismatch { expected: g.nvars(), got: x.len() });
    }
    let s = g.shift(x);
    let mut acc = C64::new(0.0, 0.0);
    for (alpha, c) in lambda.terms() {
        if alpha.nvars() != g.nvars() {
            return Err(MzError::DimensionMismatch { expected: g.nvars(), got: alpha.nvars() });
        }
        acc += c * s.coeff(alpha);
    }
    Ok(acc)
}

/// A square system that can be evaluated and differentiated at points,
/// either explicitly ([`PolySystem`]) or through a unitary change of
/// coordinates ([`super::frame::NormalizedFrame`]).
pub trait LocalModel {
    /// Number of variables (= number of equations).
    fn nvars(&self) -> usize;
    /// Maximum total degree; derivative tensors above it vanish.
    fn degree(&self) -> u32;
    /// Values at `x`.
    fn eval_at(&self, x: &[C64]) -> Result<Vec<C64>>;
    /// Jacobian at `x`.
    fn jacobian_at(&self, x: &[C64]) -> Result<DMatrix<C64>>;
    /// Unscaled derivative tensor `D^k` at `x` (`k ≥ 1`).
    fn derivative_tensor_at(&self, x: &[C64], k: usize) -> Result<CTensor>;
    /// Taylor jet up to `max_order` at `x`.
    fn jet_at(&self, x: &[C64], max_order: usize) -> Result<Jet>;
}

impl LocalModel for PolySystem {
    fn nvars(&self) -> usize {
        PolySystem::nvars(self)
    }
    fn degree(&self) -> u32 {
        PolySystem::degree(self)
    }
    fn eval_at(&self, x: &[C64]) -> Result<Vec<C64>> {
        self.eval(x)
    }
    fn jacobian_at(&self, x: &[C64]) -> Result<DMatrix<C64>> {
        self.jacobian(x)
    }
    fn derivative_tensor_at(&self, x: &[C64], k: usize) -> Result<CTensor> {
        derivative_tensor(self, x, k)
    }
    fn jet_at(&self, x: &[C64], max_order: usize) -> Result<Jet> {
        Jet::from_system(self, x, max_order)
    }
}
