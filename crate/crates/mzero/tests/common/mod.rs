//! Shared fixtures for the integration tests: the two worked example
//! systems, random unitary matrices, systems with exactly known simple
//! multiple zeros, and an independent Macaulay-matrix multiplicity oracle.

#![allow(dead_code)]

use std::sync::Arc;

use nalgebra::DMatrix;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use mzero::dualspace::{compute_dual_basis, DualOptions};
use mzero::numkit::svd;
use mzero::polycore::{parse_system, Monomial, Poly, PolySystem};
use mzero::C64;

/// Double zero at the origin, second zero at `(1/4, 0)`.
pub const EXAMPLE_DOUBLE: &str = "vars: X1 X2
f1: X1^2 - 1/4*X1 - 1/2*X2
f2: 1/2*X1*X2";

/// Triple zero at the origin, second zero at distance `1/4`.
pub const EXAMPLE_TRIPLE: &str = "vars: X1 X2
f1: 64/73*X1^2 - 48/73*X1*X2 + 9/73*X2^2 + sqrt(73)/12*X2
f2: (8*X1 - 3*X2)^2*(3*X1 + 8*X2)";

pub fn c(re: f64) -> C64 {
    C64::new(re, 0.0)
}

pub fn example_double() -> PolySystem {
    parse_system(EXAMPLE_DOUBLE).expect("example parses")
}

pub fn example_triple() -> PolySystem {
    parse_system(EXAMPLE_TRIPLE).expect("example parses")
}

pub fn norm(v: &[C64]) -> f64 {
    v.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
}

pub fn dist(a: &[C64], b: &[C64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).norm_sqr()).sum::<f64>().sqrt()
}

pub fn mat_vec(m: &DMatrix<C64>, v: &[C64]) -> Vec<C64> {
    (0..m.nrows()).map(|i| (0..m.ncols()).map(|j| m[(i, j)] * v[j]).sum()).collect()
}

pub fn rand_c(rng: &mut ChaCha8Rng, scale: f64) -> C64 {
    C64::new(rng.gen_range(-scale..scale), rng.gen_range(-scale..scale))
}

pub fn rand_vec(rng: &mut ChaCha8Rng, n: usize, scale: f64) -> Vec<C64> {
    (0..n).map(|_| rand_c(rng, scale)).collect()
}

/// A random unit vector.
pub fn rand_unit(rng: &mut ChaCha8Rng, n: usize) -> Vec<C64> {
    let v = rand_vec(rng, n, 1.0);
    let nv = norm(&v);
    v.iter().map(|x| x / nv).collect()
}

/// A random unitary matrix (Q factor of a random complex matrix).
pub fn rand_unitary(rng: &mut ChaCha8Rng, n: usize) -> DMatrix<C64> {
    let a = DMatrix::from_fn(n, n, |_, _| rand_c(rng, 1.0));
    let q = a.qr().q();
    assert!((q.adjoint() * &q - DMatrix::<C64>::identity(n, n)).norm() < 1e-12, "QR factor is not unitary");
    q
}

/// `Q*·f(P·X)`.
pub fn conjugate(f: &PolySystem, q: &DMatrix<C64>, p: &DMatrix<C64>) -> PolySystem {
    let n = f.nvars();
    let composed: Vec<Poly> = f.polys().iter().map(|g| g.compose_linear(p)).collect();
    let qs = q.adjoint();
    let polys = (0..n)
        .map(|i| {
            let mut acc = Poly::zero(n);
            for (j, g) in composed.iter().enumerate() {
                acc = &acc + &g.scale(qs[(i, j)]);
            }
            acc
        })
        .collect();
    PolySystem::new(polys).expect("square")
}

/// `f(X − ξ)`: moves a zero at the origin to `ξ`.
pub fn translate(f: &PolySystem, xi: &[C64]) -> PolySystem {
    let neg: Vec<C64> = xi.iter().map(|c| -c).collect();
    f.shift(&neg).expect("dimensions match")
}

/// Random polynomial in `n` variables with terms of total degree in
/// `lo..=hi`, each present with probability `density`.
pub fn rand_poly(rng: &mut ChaCha8Rng, n: usize, lo: u32, hi: u32, density: f64, scale: f64) -> Poly {
    let mut terms = Vec::new();
    for d in lo..=hi {
        for m in Monomial::all_of_degree(n, d) {
            if rng.gen_bool(density) {
                terms.push((m, rand_c(rng, scale)));
            }
        }
    }
    Poly::from_terms(n, terms)
}

/// A system with an exactly known simple zero of multiplicity `mu` at
/// `zero`, in normalized form there.
pub struct Constructed {
    pub system: PolySystem,
    pub zero: Vec<C64>,
    pub mu: usize,
}

/// Builds `f_i = X_{i+1} + q_i(X)` (`i < n`, `q_i` of order ≥ 2) and
/// `f_n = c·X_1^μ + Σ_{j≥2} X_j·r_j(X) + (terms of order > μ in X_1)`
/// with `r_j(0) = 0`, then translates the zero from the origin to a random
/// point. Rejects draws whose dual basis does not confirm `μ` or whose
/// `|Δ_μ(f_n)|` is small.
pub fn normalized_system(rng: &mut ChaCha8Rng, n: usize, mu: usize) -> Constructed {
    assert!(n >= 2 && (mu == 2 || mu == 3));
    loop {
        let mut polys = Vec::with_capacity(n);
        for i in 0..n - 1 {
            let q = rand_poly(rng, n, 2, 3, 0.5, 0.5);
            polys.push(&Poly::var(n, i + 1) + &q);
        }
        let lead = C64::new(rng.gen_range(0.5..1.5), rng.gen_range(-0.5..0.5));
        let mut last = Poly::var(n, 0).pow(mu as u32).scale(lead);
        for j in 1..n {
            let r = rand_poly(rng, n, 1, 2, 0.6, 0.5);
            last = &last + &(&Poly::var(n, j) * &r);
        }
        last = &last + &Poly::var(n, 0).pow(mu as u32 + 1).scale(rand_c(rng, 0.5));
        polys.push(last);
        let base = PolySystem::new(polys).expect("square");
        let zero = rand_vec(rng, n, 1.0);
        let system = translate(&base, &zero);
        let opts = DualOptions { normalized: true, ..DualOptions::default() };
        match compute_dual_basis(&system, &zero, &opts) {
            Ok(b) if b.mu == mu && b.delta_mu_value()[n - 1].norm() > 0.2 => {
                return Constructed { system, zero, mu };
            }
            _ => continue,
        }
    }
}

/// `M(X)·(X_2 − h_2(X_1), …, X_n − h_n(X_1), X_1^μ)` with a random
/// invertible `M(X)` (constant plus linear part), composed with a random
/// unitary change of variables and translated to a random point. The zero
/// has multiplicity exactly `μ` and breadth one.
pub fn general_system(rng: &mut ChaCha8Rng, n: usize, mu: usize) -> Constructed {
    assert!(n >= 1 && mu >= 1);
    let mut gens = Vec::with_capacity(n);
    for i in 1..n {
        let mut h = Poly::zero(n);
        for k in 1..=3u32 {
            if rng.gen_bool(0.7) {
                h = &h + &Poly::var(n, 0).pow(k).scale(rand_c(rng, 0.8));
            }
        }
        gens.push(&Poly::var(n, i) - &h);
    }
    gens.push(Poly::var(n, 0).pow(mu as u32));
    let m0 = DMatrix::from_fn(n, n, |i, j| if i == j { c(1.0) } else { c(0.0) }) + DMatrix::from_fn(n, n, |_, _| rand_c(rng, 0.4));
    let polys: Vec<Poly> = (0..n)
        .map(|i| {
            let mut acc = Poly::zero(n);
            for (j, g) in gens.iter().enumerate() {
                let lin = rand_poly(rng, n, 1, 1, 0.5, 0.3);
                let entry = &Poly::constant(n, m0[(i, j)]) + &lin;
                acc = &acc + &(&entry * g);
            }
            acc
        })
        .collect();
    let base = PolySystem::new(polys).expect("square");
    let p = rand_unitary(rng, n);
    let rotated = conjugate(&base, &DMatrix::identity(n, n), &p.adjoint());
    let zero = rand_vec(rng, n, 1.0);
    Constructed { system: translate(&rotated, &zero), zero, mu }
}

/// Multiplicity of an isolated zero from the stabilized nullity of
/// Macaulay matrices: rows `(X − x)^β f_i` with `|β| ≤ t − 1`, columns the
/// monomials of `(X − x)` of degree `≤ t`, rank decided by a singular-value
/// cutoff `1e−8` relative to the largest coefficient of the shifted system.
/// Returns the nullity once it stops growing.
pub fn macaulay_multiplicity(f: &PolySystem, x: &[C64], max_t: u32) -> Option<usize> {
    let n = f.nvars();
    let shifted = f.shift(x).expect("point dimension");
    // Rank cutoff relative to the coefficient size of the whole system, so
    // that truncated rows made only of roundoff do not count as rank.
    let scale = shifted.polys().iter().flat_map(|g| g.terms().map(|(_, c)| c.norm())).fold(1e-300, f64::max);
    let mut prev = None;
    for t in 1..=max_t {
        let cols = Monomial::all_up_to_degree(n, t);
        let index: std::collections::HashMap<Monomial, usize> =
            cols.iter().cloned().enumerate().map(|(i, m)| (m, i)).collect();
        let mut rows: Vec<Vec<C64>> = Vec::new();
        for g in shifted.polys() {
            for beta in Monomial::all_up_to_degree(n, t - 1) {
                let mut row = vec![C64::new(0.0, 0.0); cols.len()];
                for (m, coef) in g.terms() {
                    let prod = m.mul(&beta);
                    if prod.degree() <= t {
                        row[index[&prod]] += *coef;
                    }
                }
                rows.push(row);
            }
        }
        let mat = DMatrix::from_fn(rows.len(), cols.len(), |i, j| rows[i][j]);
        let s = svd(&mat).expect("svd");
        let rank = s.singular_values.iter().filter(|&&v| v > 1e-8 * scale).count();
        let nullity = cols.len() - rank;
        if prev == Some(nullity) {
            return Some(nullity);
        }
        prev = Some(nullity);
    }
    None
}

/// Arc helper.
pub fn arc(f: &PolySystem) -> Arc<PolySystem> {
    Arc::new(f.clone())
}
