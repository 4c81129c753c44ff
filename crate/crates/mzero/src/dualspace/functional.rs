//! Differential functionals `Σ_α c_α d^α_x` and the operators `Ψ_σ`, `Φ_σ`.

use std::collections::BTreeMap;
use std::fmt;

use crate::polycore::Monomial;
use crate::C64;

/// A differential functional `Λ = Σ_α c_α d^α` at a fixed point, where
/// `d^α(g) = ∂^α g(x)/α!`. Zero coefficients are never stored.
#[derive(Clone, PartialEq, Default)]
pub struct DualFunctional {
    nvars: usize,
    coeffs: BTreeMap<Monomial, C64>,
}

impl DualFunctional {
    /// The zero functional.
    pub fn zero(nvars: usize) -> Self {
        DualFunctional { nvars, coeffs: BTreeMap::new() }
    }

    /// The evaluation functional `d^0` (`Λ₀ = 1`).
    pub fn identity(nvars: usize) -> Self {
        Self::monomial(Monomial::one(nvars), C64::new(1.0, 0.0))
    }

    /// `c·d^α`.
    pub fn monomial(alpha: Monomial, c: C64) -> Self {
        let mut f = Self::zero(alpha.nvars());
        f.add_term(alpha, c);
        f
    }

    /// Builds a functional from `(α, c)` pairs, summing repeats.
    pub fn from_terms<I: IntoIterator<Item = (Monomial, C64)>>(nvars: usize, terms: I) -> Self {
        let mut f = Self::zero(nvars);
        for (a, c) in terms {
            f.add_term(a, c);
        }
        f
    }

    /// Adds `c·d^α`.
    ///
    /// # Panics
    /// If `α` has the wrong length.
    pub fn add_term(&mut self, alpha: Monomial, c: C64) {
        assert_eq!(alpha.nvars(), self.nvars, "multi-index length mismatch");
        if c == C64::new(0.0, 0.0) {
            return;
        }
        let e = self.coeffs.entry(alpha).or_insert(C64::new(0.0, 0.0));
        *e += c;
        if *e == C64::new(0.0, 0.0) {
            self.coeffs.retain(|_, v| *v != C64::new(0.0, 0.0));
        }
    }

    /// Number of variables.
    pub fn nvars(&self) -> usize {
        self.nvars
    }

    /// Terms in graded-lexicographic order.
    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &C64)> {
        self.coeffs.iter()
    }

    /// Number of stored terms.
    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    /// True if no term is stored.
    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// True if no term is stored.
    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Coefficient of `d^α`.
    pub fn coeff(&self, alpha: &Monomial) -> C64 {
        self.coeffs.get(alpha).copied().unwrap_or(C64::new(0.0, 0.0))
    }

    /// Highest `|α|` present (0 for the zero functional).
    pub fn order(&self) -> usize {
        self.coeffs.keys().map(|a| a.degree() as usize).max().unwrap_or(0)
    }

    /// Terms of the highest order.
    pub fn leading_terms(&self) -> Vec<(Monomial, C64)> {
        let k = self.order() as u32;
        self.coeffs.iter().filter(|(a, _)| a.degree() == k).map(|(a, c)| (a.clone(), *c)).collect()
    }

    /// `c·Λ`.
    pub fn scale(&self, c: C64) -> Self {
        Self::from_terms(self.nvars, self.coeffs.iter().map(|(a, v)| (a.clone(), v * c)))
    }

    /// `Λ + c·M`.
    pub fn axpy(&self, c: C64, other: &DualFunctional) -> Self {
        let mut out = self.clone();
        for (a, v) in other.terms() {
            out.add_term(a.clone(), v * c);
        }
        out
    }

    /// The anti-differentiation operator `Ψ_σ` (0-based `σ`):
    /// `Ψ_σ(d^α) = d^{α+e_σ}` if `α_0 = … = α_{σ−1} = 0`, and 0 otherwise.
    pub fn psi(&self, sigma: usize) -> Self {
        Self::from_terms(
            self.nvars,
            self.coeffs
                .iter()
                .filter(|(a, _)| a.exps()[..sigma].iter().all(|&e| e == 0))
                .map(|(a, c)| (a.raised(sigma), *c)),
        )
    }

    /// The differentiation operator `Φ_σ` (0-based `σ`):
    /// `Φ_σ(d^α) = d^{α−e_σ}` if `α_σ > 0`, and 0 otherwise.
    pub fn phi(&self, sigma: usize) -> Self {
        Self::from_terms(self.nvars, self.coeffs.iter().filter_map(|(a, c)| a.lowered(sigma).map(|b| (b, *c))))
    }

    /// Renames variables with [`Monomial::permuted`] applied to every index.
    pub fn permute_vars(&self, perm: &[usize]) -> Self {
        Self::from_terms(self.nvars, self.coeffs.iter().map(|(a, c)| (a.permuted(perm), *c)))
    }

    /// Largest coefficient modulus.
    pub fn max_abs(&self) -> f64 {
        self.coeffs.values().map(|c| c.norm()).fold(0.0, f64::max)
    }
}

impl fmt::Debug for DualFunctional {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for DualFunctional {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.coeffs.is_empty() {
            return write!(f, "0");
        }
        let mut first = true;
        for (a, c) in &self.coeffs {
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            write!(f, "({:.6e}{:+.6e}i)·d^{:?}", c.re, c.im, a.exps())?;
        }
        Ok(())
    }
}
