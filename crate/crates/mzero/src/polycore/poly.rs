//! Sparse complex polynomials and square polynomial systems.

use std::collections::btree_map::Entry;
use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Deref, Mul, Neg, Sub};

use nalgebra::DMatrix;

use super::monomial::{binomial, Monomial};
use crate::error::{MzError, Result};
use crate::C64;

/// A point of `ℂⁿ` with finite coordinates.
#[derive(Clone, Debug, PartialEq)]
pub struct CPoint {
    coords: Vec<C64>,
}

impl CPoint {
    /// Builds a point, rejecting NaN or infinite coordinates.
    pub fn new(coords: Vec<C64>) -> Result<Self> {
        if let Some(i) = coords.iter().position(|c| !c.re.is_finite() || !c.im.is_finite()) {
            return Err(MzError::NonFinitePoint(i));
        }
        Ok(CPoint { coords })
    }

    /// Builds a point from real coordinates.
    pub fn real(coords: &[f64]) -> Result<Self> {
        CPoint::new(coords.iter().map(|&r| C64::new(r, 0.0)).collect())
    }

    /// The origin of `ℂⁿ`.
    pub fn zeros(n: usize) -> Self {
        CPoint { coords: vec![C64::new(0.0, 0.0); n] }
    }

    /// Coordinates as a slice.
    pub fn coords(&self) -> &[C64] {
        &self.coords
    }

    /// Consumes the point, returning its coordinates.
    pub fn into_vec(self) -> Vec<C64> {
        self.coords
    }

    /// Euclidean norm.
    pub fn norm(&self) -> f64 {
        vec_norm(&self.coords)
    }

    /// Euclidean distance to another point of the same dimension.
    pub fn distance(&self, other: &CPoint) -> f64 {
        self.coords
            .iter()
            .zip(&other.coords)
            .map(|(a, b)| (a - b).norm_sqr())
            .sum::<f64>()
            .sqrt()
    }
}

impl Deref for CPoint {
    type Target = [C64];
    fn deref(&self) -> &[C64] {
        &self.coords
    }
}

/// Euclidean norm of a complex vector.
pub fn vec_norm(v: &[C64]) -> f64 {
    v.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
}

/// A sparse polynomial in `nvars` variables with complex coefficients.
///
/// Terms are kept in a graded-lex ordered map and zero coefficients are never
/// stored, so structural equality coincides with polynomial equality.
#[derive(Clone, PartialEq)]
pub struct Poly {
    nvars: usize,
    terms: BTreeMap<Monomial, C64>,
}

impl Poly {
    /// The zero polynomial.
    pub fn zero(nvars: usize) -> Self {
        Poly { nvars, terms: BTreeMap::new() }
    }

    /// A constant polynomial.
    pub fn constant(nvars: usize, c: C64) -> Self {
        Poly::from_terms(nvars, [(Monomial::one(nvars), c)])
    }

    /// The variable `X_j` (0-based).
    pub fn var(nvars: usize, j: usize) -> Self {
        Poly::from_terms(nvars, [(Monomial::var(nvars, j), C64::new(1.0, 0.0))])
    }

    /// Builds a polynomial from `(monomial, coefficient)` pairs; repeated
    /// monomials are summed and zero results dropped.
    ///
    /// # Panics
    /// Panics if a monomial has the wrong number of variables.
    pub fn from_terms<I: IntoIterator<Item = (Monomial, C64)>>(nvars: usize, terms: I) -> Self {
        let mut p = Poly::zero(nvars);
        for (m, c) in terms {
            assert_eq!(m.nvars(), nvars, "monomial has wrong variable count");
            p.add_term(m, c);
        }
        p
    }

    /// Adds `c·m` in place.
    pub fn add_term(&mut self, m: Monomial, c: C64) {
        if c == C64::new(0.0, 0.0) {
            return;
        }
        match self.terms.entry(m) {
            Entry::Vacant(v) => {
                v.insert(c);
            }
            Entry::Occupied(mut o) => {
                *o.get_mut() += c;
                if *o.get() == C64::new(0.0, 0.0) {
                    o.remove();
                }
            }
        }
    }

    /// Number of variables.
    pub fn nvars(&self) -> usize {
        self.nvars
    }

    /// Iterator over `(monomial, coefficient)` in ascending graded-lex order.
    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &C64)> {
        self.terms.iter()
    }

    /// Number of stored terms.
    pub fn len(&self) -> usize {
        self.terms.len()
    }

    /// True if no term is stored.
    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Whether the polynomial is zero.
    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Coefficient of a monomial (zero if absent).
    pub fn coeff(&self, m: &Monomial) -> C64 {
        self.terms.get(m).copied().unwrap_or(C64::new(0.0, 0.0))
    }

    /// Total degree (0 for the zero polynomial).
    pub fn degree(&self) -> u32 {
        self.terms.keys().map(Monomial::degree).max().unwrap_or(0)
    }

    /// Euclidean norm of the coefficient vector.
    pub fn coeff_norm(&self) -> f64 {
        self.terms.values().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Multiplies every coefficient by `c`.
    pub fn scale(&self, c: C64) -> Poly {
        Poly::from_terms(self.nvars, self.terms.iter().map(|(m, v)| (m.clone(), v * c)))
    }

    /// `self^e` by repeated squaring.
    pub fn pow(&self, mut e: u32) -> Poly {
        let mut base = self.clone();
        let mut acc = Poly::constant(self.nvars, C64::new(1.0, 0.0));
        while e > 0 {
            if e & 1 == 1 {
                acc = &acc * &base;
            }
            e >>= 1;
            if e > 0 {
                base = &base * &base;
            }
        }
        acc
    }

    /// Evaluates the polynomial at `x`, summing terms in graded-lex order.
    ///
    /// # Panics
    /// Panics if `x` has the wrong length; use [`PolySystem::eval`] for a
    /// checked entry point.
    pub fn eval(&self, x: &[C64]) -> C64 {
        assert_eq!(x.len(), self.nvars, "point has wrong dimension");
        let maxe: Vec<u32> = (0..self.nvars)
            .map(|j| self.terms.keys().map(|m| m.exp(j)).max().unwrap_or(0))
            .collect();
        let powers: Vec<Vec<C64>> = (0..self.nvars)
            .map(|j| {
                let mut p = Vec::with_capacity(maxe[j] as usize + 1);
                let mut acc = C64::new(1.0, 0.0);
                p.push(acc);
                for _ in 0..maxe[j] {
                    acc *= x[j];
                    p.push(acc);
                }
                p
            })
            .collect();
        let mut sum = C64::new(0.0, 0.0);
        for (m, c) in &self.terms {
            let mut t = *c;
            for (j, &e) in m.exps().iter().enumerate() {
                if e > 0 {
                    t *= powers[j][e as usize];
                }
            }
            sum += t;
        }
        sum
    }

    /// Partial derivative `∂/∂X_j`.
    pub fn partial(&self, j: usize) -> Poly {
        Poly::from_terms(
            self.nvars,
            self.terms.iter().filter_map(|(m, c)| {
                let e = m.exp(j);
                m.lowered(j).map(|low| (low, c * f64::from(e)))
            }),
        )
    }

    /// The shifted polynomial `f(X + x)`, expanded.
    ///
    /// Its coefficient at `α` equals the Taylor coefficient
    /// `∂^α f(x) / α!`.
    pub fn shift(&self, x: &[C64]) -> Poly {
        assert_eq!(x.len(), self.nvars, "shift has wrong dimension");
        let mut out = BTreeMap::<Monomial, C64>::new();
        for (m, c) in &self.terms {
            // Expand Π_j (X_j + x_j)^{β_j} one variable at a time.
            let mut partial: Vec<(Vec<u32>, C64)> = vec![(vec![0; self.nvars], *c)];
            for (j, &b) in m.exps().iter().enumerate() {
                if b == 0 {
                    continue;
                }
                let mut next = Vec::with_capacity(partial.len() * (b as usize + 1));
                for (exps, v) in &partial {
                    for a in 0..=b {
                        let coef = binomial(b, a) * ipow(x[j], b - a);
                        let mut e2 = exps.clone();
                        e2[j] = a;
                        next.push((e2, v * coef));
                    }
                }
                partial = next;
            }
            for (exps, v) in partial {
                *out.entry(Monomial::new(exps)).or_insert(C64::new(0.0, 0.0)) += v;
            }
        }
        Poly::from_terms(self.nvars, out)
    }

    /// Substitutes `X_i = Σ_j W[i, j]·Y_j` (a linear change of variables).
    pub fn compose_linear(&self, w: &DMatrix<C64>) -> Poly {
        let n = self.nvars;
        assert_eq!(w.nrows(), n);
        let m = w.ncols();
        let forms: Vec<Poly> = (0..n)
            .map(|i| Poly::from_terms(m, (0..m).map(|j| (Monomial::var(m, j), w[(i, j)]))))
            .collect();
        let mut cache: Vec<Vec<Poly>> = forms.iter().map(|f| vec![Poly::constant(m, C64::new(1.0, 0.0)), f.clone()]).collect();
        let mut out = Poly::zero(m);
        for (mono, c) in &self.terms {
            let mut t = Poly::constant(m, *c);
            for (i, &e) in mono.exps().iter().enumerate() {
                while cache[i].len() <= e as usize {
                    let next = &cache[i][cache[i].len() - 1] * &forms[i];
                    cache[i].push(next);
                }
                if e > 0 {
                    t = &t * &cache[i][e as usize];
                }
            }
            out = &out + &t;
        }
        out
    }

    /// Permutes variables: new variable `i` is old variable `perm[i]`.
    pub fn permute_vars(&self, perm: &[usize]) -> Poly {
        Poly::from_terms(self.nvars, self.terms.iter().map(|(m, c)| (m.permuted(perm), *c)))
    }
}

fn ipow(x: C64, e: u32) -> C64 {
    let mut acc = C64::new(1.0, 0.0);
    for _ in 0..e {
        acc *= x;
    }
    acc
}

impl fmt::Debug for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let parts: Vec<String> = self
            .terms
            .iter()
            .rev()
            .map(|(m, c)| format!("({:.6}{:+.6}i)*{:?}", c.re, c.im, m))
            .collect();
        write!(f, "{}", parts.join(" + "))
    }
}

impl Add for &Poly {
    type Output = Poly;
    fn add(self, rhs: &Poly) -> Poly {
        assert_eq!(self.nvars, rhs.nvars);
        let mut out = self.clone();
        for (m, c) in &rhs.terms {
            out.add_term(m.clone(), *c);
        }
        out
    }
}

impl Sub for &Poly {
    type Output = Poly;
    fn sub(self, rhs: &Poly) -> Poly {
        assert_eq!(self.nvars, rhs.nvars);
        let mut out = self.clone();
        for (m, c) in &rhs.terms {
            out.add_term(m.clone(), -c);
        }
        out
    }
}

impl Neg for &Poly {
    type Output = Poly;
    fn neg(self) -> Poly {
        self.scale(C64::new(-1.0, 0.0))
    }
}

impl Mul for &Poly {
    type Output = Poly;
    fn mul(self, rhs: &Poly) -> Poly {
        assert_eq!(self.nvars, rhs.nvars);
        let mut acc = BTreeMap::<Monomial, C64>::new();
        for (m1, c1) in &self.terms {
            for (m2, c2) in &rhs.terms {
                *acc.entry(m1.mul(m2)).or_insert(C64::new(0.0, 0.0)) += c1 * c2;
            }
        }
        Poly::from_terms(self.nvars, acc)
    }
}

/// A square system `f = (f_1, …, f_n)` of polynomials in `n` variables.
#[derive(Clone, Debug, PartialEq)]
pub struct PolySystem {
    nvars: usize,
    polys: Vec<Poly>,
    var_names: Vec<String>,
}

impl PolySystem {
    /// Builds a system, checking squareness and variable counts. Variables
    /// are named `X1, …, Xn`.
    pub fn new(polys: Vec<Poly>) -> Result<Self> {
        let n = polys.len();
        let names = (1..=n).map(|i| format!("X{i}")).collect();
        PolySystem::with_names(polys, names)
    }

    /// Builds a system with explicit variable names.
    pub fn with_names(polys: Vec<Poly>, var_names: Vec<String>) -> Result<Self> {
        let nvars = var_names.len();
        if nvars == 0 {
            return Err(MzError::InvalidArgument("system must have at least one variable".into()));
        }
        if polys.len() != nvars {
            return Err(MzError::NonSquare { polys: polys.len(), vars: nvars });
        }
        for p in &polys {
            if p.nvars() != nvars {
                return Err(MzError::DimensionMismatch { expected: nvars, got: p.nvars() });
            }
        }
        Ok(PolySystem { nvars, polys, var_names })
    }

    /// Number of variables (= number of polynomials).
    pub fn nvars(&self) -> usize {
        self.nvars
    }

    /// The polynomials.
    pub fn polys(&self) -> &[Poly] {
        &self.polys
    }

    /// Variable names in declaration order.
    pub fn var_names(&self) -> &[String] {
        &self.var_names
    }

    /// Maximum total degree over the system.
    pub fn degree(&self) -> u32 {
        self.polys.iter().map(Poly::degree).max().unwrap_or(0)
    }

    /// Checks that a point has the right dimension.
    pub fn check_point(&self, x: &[C64]) -> Result<()> {
        if x.len() != self.nvars {
            return Err(MzError::DimensionMismatch { expected: self.nvars, got: x.len() });
        }
        Ok(())
    }

    /// Evaluates every polynomial at `x`.
    pub fn eval(&self, x: &[C64]) -> Result<Vec<C64>> {
        self.check_point(x)?;
        Ok(self.polys.iter().map(|p| p.eval(x)).collect())
    }

    /// Jacobian matrix `Df(x)` (rows: polynomials, columns: variables).
    pub fn jacobian(&self, x: &[C64]) -> Result<DMatrix<C64>> {
        self.check_point(x)?;
        let n = self.nvars;
        Ok(DMatrix::from_fn(n, n, |i, j| self.polys[i].partial(j).eval(x)))
    }

    /// The system `f(X + x)`.
    pub fn shift(&self, x: &[C64]) -> Result<PolySystem> {
        self.check_point(x)?;
        Ok(PolySystem {
            nvars: self.nvars,
            polys: self.polys.iter().map(|p| p.shift(x)).collect(),
            var_names: self.var_names.clone(),
        })
    }

    /// Multiplies every polynomial by `c`.
    pub fn scale(&self, c: C64) -> PolySystem {
        PolySystem {
            nvars: self.nvars,
            polys: self.polys.iter().map(|p| p.scale(c)).collect(),
            var_names: self.var_names.clone(),
        }
    }

    /// Replaces the polynomial list, keeping names (internal helper for
    /// derived systems).
    pub(crate) fn with_polys(&self, polys: Vec<Poly>) -> PolySystem {
        debug_assert_eq!(polys.len(), self.nvars);
        PolySystem { nvars: self.nvars, polys, var_names: self.var_names.clone() }
    }
}

/// Evaluates the system at `x` (checked).
pub fn eval_system(f: &PolySystem, x: &CPoint) -> Result<Vec<C64>> {
    f.eval(x)
}

/// Expands `f(X + x)`; evaluating the result at `0` equals evaluating `f`
/// at `x`.
pub fn shift_basepoint(f: &PolySystem, x: &CPoint) -> Result<PolySystem> {
    f.shift(x)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(r: f64) -> C64 {
        C64::new(r, 0.0)
    }

    #[test]
    fn shift_expands_binomially() {
        let x2 = Poly::var(1, 0).pow(2);
        let s = x2.shift(&[c(1.0)]);
        assert_eq!(s.coeff(&Monomial::new(vec![2])), c(1.0));
        assert_eq!(s.coeff(&Monomial::new(vec![1])), c(2.0));
        assert_eq!(s.coeff(&Monomial::new(vec![0])), c(1.0));
    }

    #[test]
    fn shift_by_zero_is_identity() {
        let p = &Poly::var(2, 0).pow(3) + &Poly::var(2, 1).scale(C64::new(0.5, -2.0));
        assert_eq!(p.shift(&[c(0.0), c(0.0)]), p);
    }

    #[test]
    fn add_cancels_to_zero() {
        let p = Poly::var(2, 1);
        assert!((&p - &p).is_zero());
    }

    #[test]
    fn partial_derivative_of_power() {
        let p = Poly::var(2, 0).pow(3);
        let d = p.partial(0);
        assert_eq!(d.coeff(&Monomial::new(vec![2, 0])), c(3.0));
        assert!(p.partial(1).is_zero());
    }

    #[test]
    fn non_square_system_rejected() {
        let err = PolySystem::with_names(vec![Poly::var(2, 0)], vec!["a".into(), "b".into()]);
        assert!(matches!(err, Err(MzError::NonSquare { .. })));
    }

    #[test]
    fn compose_with_identity_is_identity() {
        let p = &Poly::var(2, 0).pow(2) + &Poly::var(2, 1).scale(c(3.0));
        let id = DMatrix::<C64>::identity(2, 2);
        assert_eq!(p.compose_linear(&id), p);
    }

    #[test]
    fn non_finite_point_rejected() {
        assert!(CPoint::real(&[1.0, f64::NAN]).is_err());
    }
}
