//! Multi-indices (exponent vectors) in graded-lexicographic order.

use std::cmp::Ordering;
use std::fmt;

/// A multi-index `α = (α_1, …, α_n)` standing for the monomial
/// `X_1^{α_1} ⋯ X_n^{α_n}` or the differential functional `d^α`.
///
/// Monomials are ordered graded-lexicographically: first by total degree,
/// then lexicographically by exponent vector with the *first* variable most
/// significant (so `X_1^2 > X_1 X_2 > X_2^2`). The ordering fixes the
/// iteration order of every sparse map in the crate, which makes all sums
/// reproducible bit for bit.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Monomial {
    exps: Vec<u32>,
}

impl Monomial {
    /// Builds a monomial from an exponent vector.
    pub fn new(exps: Vec<u32>) -> Self {
        Monomial { exps }
    }

    /// The constant monomial `1` in `n` variables.
    pub fn one(n: usize) -> Self {
        Monomial { exps: vec![0; n] }
    }

    /// The variable `X_j` (0-based) in `n` variables.
    pub fn var(n: usize, j: usize) -> Self {
        let mut exps = vec![0; n];
        exps[j] = 1;
        Monomial { exps }
    }

    /// Builds the multi-index counting how often each variable occurs in a
    /// tuple of slot indices, e.g. `(0, 2, 0) ↦ (2, 0, 1)` for `n = 3`.
    pub fn from_slots(n: usize, slots: &[usize]) -> Self {
        let mut exps = vec![0u32; n];
        for &s in slots {
            exps[s] += 1;
        }
        Monomial { exps }
    }

    /// Exponent vector.
    pub fn exps(&self) -> &[u32] {
        &self.exps
    }

    /// Number of variables.
    pub fn nvars(&self) -> usize {
        self.exps.len()
    }

    /// Total degree `|α|`.
    pub fn degree(&self) -> u32 {
        self.exps.iter().sum()
    }

    /// Exponent of variable `j`.
    pub fn exp(&self, j: usize) -> u32 {
        self.exps[j]
    }

    /// Product of two monomials (sum of exponents).
    pub fn mul(&self, other: &Monomial) -> Monomial {
        debug_assert_eq!(self.nvars(), other.nvars());
        Monomial {
            exps: self.exps.iter().zip(&other.exps).map(|(a, b)| a + b).collect(),
        }
    }

    /// `α + e_j`.
    pub fn raised(&self, j: usize) -> Monomial {
        let mut exps = self.exps.clone();
        exps[j] += 1;
        Monomial { exps }
    }

    /// `α − e_j`, or `None` when `α_j = 0`.
    pub fn lowered(&self, j: usize) -> Option<Monomial> {
        if self.exps[j] == 0 {
            return None;
        }
        let mut exps = self.exps.clone();
        exps[j] -= 1;
        Some(Monomial { exps })
    }

    /// `α! = Π α_i!` as a float.
    pub fn factorial(&self) -> f64 {
        self.exps.iter().map(|&a| factorial(a)).product()
    }

    /// Permutes the variables: the exponent of new variable `i` is the
    /// exponent of old variable `perm[i]`.
    pub fn permuted(&self, perm: &[usize]) -> Monomial {
        Monomial {
            exps: perm.iter().map(|&p| self.exps[p]).collect(),
        }
    }

    /// All multi-indices in `n` variables of total degree exactly `k`, in
    /// ascending graded-lex order.
    pub fn all_of_degree(n: usize, k: u32) -> Vec<Monomial> {
        let mut out = Vec::new();
        let mut cur = vec![0u32; n];
        fill_degree(&mut out, &mut cur, 0, k);
        out.sort();
        out
    }

    /// All multi-indices in `n` variables of total degree at most `k`, in
    /// ascending graded-lex order.
    pub fn all_up_to_degree(n: usize, k: u32) -> Vec<Monomial> {
        (0..=k).flat_map(|d| Monomial::all_of_degree(n, d)).collect()
    }
}

fn fill_degree(out: &mut Vec<Monomial>, cur: &mut Vec<u32>, pos: usize, left: u32) {
    let n = cur.len();
    if n == 0 {
        if left == 0 {
            out.push(Monomial::new(Vec::new()));
        }
        return;
    }
    if pos == n - 1 {
        cur[pos] = left;
        out.push(Monomial::new(cur.clone()));
        cur[pos] = 0;
        return;
    }
    for a in 0..=left {
        cur[pos] = a;
        fill_degree(out, cur, pos + 1, left - a);
    }
    cur[pos] = 0;
}

/// `a!` as a float.
pub fn factorial(a: u32) -> f64 {
    (1..=a).map(f64::from).product()
}

/// Binomial coefficient `C(n, k)` as a float.
pub fn binomial(n: u32, k: u32) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    let mut r = 1.0;
    for i in 0..k {
        r = r * f64::from(n - i) / f64::from(i + 1);
    }
    r.round()
}

impl Ord for Monomial {
    fn cmp(&self, other: &Self) -> Ordering {
        self.degree()
            .cmp(&other.degree())
            .then_with(|| self.exps.cmp(&other.exps))
    }
}

impl PartialOrd for Monomial {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Debug for Monomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self.exps)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn graded_order_puts_degree_first() {
        let a = Monomial::new(vec![0, 3]);
        let b = Monomial::new(vec![2, 0]);
        assert!(b < a);
        let c = Monomial::new(vec![1, 1]);
        assert!(c < b);
    }

    #[test]
    fn enumerates_all_monomials_of_degree() {
        let ms = Monomial::all_of_degree(3, 2);
        assert_eq!(ms.len(), 6);
        assert!(ms.iter().all(|m| m.degree() == 2));
        assert_eq!(Monomial::all_up_to_degree(2, 3).len(), 10);
    }

    #[test]
    fn factorials_and_binomials() {
        assert_eq!(Monomial::new(vec![2, 3]).factorial(), 12.0);
        assert_eq!(binomial(5, 2), 10.0);
        assert_eq!(binomial(4, 5), 0.0);
    }

    #[test]
    fn slots_count_occurrences() {
        assert_eq!(Monomial::from_slots(3, &[0, 2, 0]).exps(), &[2, 0, 1]);
    }
}
