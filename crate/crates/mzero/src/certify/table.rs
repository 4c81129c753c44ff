//! Coefficient tables `c_{i,j}`, `t_{i,j}`, the univariate polynomial `p(d)`
//! and the separation constant `d = min(d₁, d₂, d₃)`.

use std::collections::BTreeMap;

use crate::error::{MzError, Result};
use crate::numkit::smallest_positive_root;
use crate::polycore::binomial;

/// Largest multiplicity accepted by [`coefficient_table`].
pub const MAX_TABLE_MU: usize = 12;
/// Bisection tolerance for `d₃`.
pub const D3_TOL: f64 = 1e-12;

/// Bounds on the coefficients of the expansion of `f_n` in powers of the
/// kernel coordinate `ζ` and the regular coordinates `η`.
#[derive(Clone, Debug, PartialEq)]
pub struct CoefficientTable {
    /// Multiplicity.
    pub mu: usize,
    /// `c_{i,j}` for `i + j = μ`, `j > 0`.
    pub c: BTreeMap<(usize, usize), f64>,
    /// `t_{i,j}` for `1 ≤ i + j ≤ μ − 2`.
    pub t: BTreeMap<(usize, usize), f64>,
}

impl CoefficientTable {
    /// `c_{i,j}` (0 if absent).
    pub fn c(&self, i: usize, j: usize) -> f64 {
        self.c.get(&(i, j)).copied().unwrap_or(0.0)
    }

    /// `t_{i,j}` (0 if absent).
    pub fn t(&self, i: usize, j: usize) -> f64 {
        self.t.get(&(i, j)).copied().unwrap_or(0.0)
    }

    /// True for tables beyond the tabulated anchors `μ = 2, 3`.
    pub fn unanchored(&self) -> bool {
        self.mu > 3
    }
}

/// Runs the substitution bookkeeping that bounds the expansion of `f_n`.
///
/// Every monomial `ζ^i η^j` with `2 ≤ i + j ≤ μ` starts with weight
/// `(i+j)!/(i!j!)`. A monomial with `i + j < μ` and `j > 0` is eliminated
/// by substituting its first `η` with the Taylor expansion of
/// `−Df̂(x)⁻¹ f̂`: it produces `ζ^{i+k} η^{j−1+l}` (`k + l ≥ 2`,
/// `i+j−1+k+l ≤ μ`) with weight multiplied by `(k+l)!/(k!l!)`, and adds its
/// weight to `t_{i,j−1}`. Pure powers `ζ^i` drop out (their coefficients
/// are the `Δ_i(f_n)`), and monomials of total degree `μ` with `j > 0`
/// accumulate into `c_{i,j}`. The loop ends after at most `μ − 2` rounds
/// because each substitution raises the degree.
pub fn coefficient_table(mu: usize) -> Result<CoefficientTable> {
    if mu < 2 {
        return Err(MzError::InvalidArgument(format!("multiplicity must be at least 2, got {mu}")));
    }
    if mu > MAX_TABLE_MU {
        return Err(MzError::MultiplicityCap { cap: MAX_TABLE_MU });
    }
    let mut c: BTreeMap<(usize, usize), f64> = BTreeMap::new();
    let mut t: BTreeMap<(usize, usize), f64> = BTreeMap::new();
    let mut pending: BTreeMap<(usize, usize), f64> = BTreeMap::new();

    let place = |i: usize, j: usize, w: f64, pending: &mut BTreeMap<(usize, usize), f64>, c: &mut BTreeMap<(usize, usize), f64>| {
        if j == 0 {
            return;
        }
        if i + j == mu {
            *c.entry((i, j)).or_insert(0.0) += w;
        } else {
            *pending.entry((i, j)).or_insert(0.0) += w;
        }
    };
    for deg in 2..=mu {
        for j in 0..=deg {
            let i = deg - j;
            place(i, j, binomial(deg as u32, j as u32), &mut pending, &mut c);
        }
    }
    let mut rounds = 0;
    while !pending.is_empty() {
        rounds += 1;
        if rounds > mu - 2 + 1 {
            return Err(MzError::NoConvergence("coefficient substitution did not terminate".into()));
        }
        let current = std::mem::take(&mut pending);
        for ((i, j), w) in current {
            *t.entry((i, j - 1)).or_insert(0.0) += w;
            let base = i + j - 1;
            for s in 2..=(mu - base) {
                for l in 0..=s {
                    let k = s - l;
                    place(i + k, j - 1 + l, w * binomial(s as u32, l as u32), &mut pending, &mut c);
                }
            }
        }
    }
    Ok(CoefficientTable { mu, c, t })
}

/// The univariate function
///
/// ```text
/// p(d) = (1−d²)^{μ/2} − Σ_{i+j=μ, j>0} c_{i,j}·d·(1−d²)^{i/2}·d^{j−1}
///        − d·(Σ_{i+j≤μ−2} t_{i,j}·(1−d²)^{i/2}·d^j + 1).
/// ```
///
/// The `t_{i,0}` terms carry the factor `(1−d²)^{i/2}` like every other
/// `t_{i,j}`; with this weighting the `μ = 3` instance equals
/// `(1−2d−8d²)√(1−d²) − 9d − d² + 6d³` identically.
pub fn p_of_d(table: &CoefficientTable) -> impl Fn(f64) -> f64 + '_ {
    let mu = table.mu as i32;
    move |d: f64| {
        let s = (1.0 - d * d).max(0.0).sqrt();
        let mut v = s.powi(mu);
        for (&(i, j), &cij) in &table.c {
            v -= cij * d * s.powi(i as i32) * d.powi(j as i32 - 1);
        }
        let mut tsum = 1.0;
        for (&(i, j), &tij) in &table.t {
            tsum += tij * s.powi(i as i32) * d.powi(j as i32);
        }
        v - d * tsum
    }
}

/// The separation constants for a multiplicity.
#[derive(Clone, Debug, PartialEq)]
pub struct SeparationConstant {
    /// Multiplicity.
    pub mu: usize,
    /// `√(1/(c_{μ−1,1}² + 1))`.
    pub d1: f64,
    /// `√(1/(μ−1))`.
    pub d2: f64,
    /// Smallest positive root of `p(d)` on `(0, d₂]`.
    pub d3: f64,
    /// `min(d₁, d₂, d₃)`.
    pub d: f64,
    /// True when the table is beyond the anchored multiplicities 2 and 3.
    pub unanchored: bool,
}

/// Computes `d₁`, `d₂`, `d₃` and `d` from the generic table.
pub fn separation_constant(mu: usize) -> Result<SeparationConstant> {
    let table = coefficient_table(mu)?;
    let c = table.c(mu - 1, 1);
    let d1 = (1.0 / (c * c + 1.0)).sqrt();
    let d2 = (1.0 / (mu as f64 - 1.0)).sqrt();
    let p = p_of_d(&table);
    let d3 = smallest_positive_root(&p, 0.0, d2, D3_TOL)?;
    Ok(SeparationConstant { mu, d1, d2, d3, d: d1.min(d2).min(d3), unanchored: table.unanchored() })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn double_table() {
        let t = coefficient_table(2).unwrap();
        assert_eq!(t.c, BTreeMap::from([((1, 1), 2.0), ((0, 2), 1.0)]));
        assert!(t.t.is_empty());
    }

    #[test]
    fn triple_table() {
        let t = coefficient_table(3).unwrap();
        assert_eq!(t.c, BTreeMap::from([((2, 1), 8.0), ((1, 2), 7.0), ((0, 3), 2.0)]));
        assert_eq!(t.t, BTreeMap::from([((1, 0), 2.0), ((0, 1), 1.0)]));
    }

    #[test]
    fn quadruple_table_is_positive() {
        let t = coefficient_table(4).unwrap();
        assert!(t.c.values().chain(t.t.values()).all(|v| *v > 0.0 && v.is_finite()));
        assert_eq!(t.c.len(), 4);
    }

    #[test]
    fn separation_constants() {
        let s2 = separation_constant(2).unwrap();
        assert!((s2.d - 0.2865).abs() < 5e-4);
        assert!((s2.d1 - 0.2f64.sqrt()).abs() < 1e-15);
        assert_eq!(s2.d2, 1.0);
        assert_eq!(s2.d, s2.d3);
        let s3 = separation_constant(3).unwrap();
        assert!((s3.d3 - 0.08507).abs() < 5e-5);
    }
}
