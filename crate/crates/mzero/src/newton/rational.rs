//! Convergence-radius rational functions of the modified Newton iterations
//! and the threshold constants derived from them.

use std::sync::OnceLock;

use crate::error::{MzError, Result};
use crate::numkit::smallest_positive_root;

/// Which iteration a threshold refers to.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Variant {
    /// Double zero, normalized form (first algorithm).
    NormalizedDouble,
    /// Triple zero, normalized form (second algorithm).
    NormalizedTriple,
    /// Triple zero through unitary re-normalization (third algorithm).
    GeneralTriple,
}

impl Variant {
    /// All variants.
    pub const ALL: [Variant; 3] = [Variant::NormalizedDouble, Variant::NormalizedTriple, Variant::GeneralTriple];

    /// Stable snake-case name.
    pub fn as_str(self) -> &'static str {
        match self {
            Variant::NormalizedDouble => "normalized_double",
            Variant::NormalizedTriple => "normalized_triple",
            Variant::GeneralTriple => "general_triple",
        }
    }

    /// Parses the snake-case name.
    pub fn parse(s: &str) -> Result<Variant> {
        Variant::ALL
            .into_iter()
            .find(|v| v.as_str() == s)
            .ok_or_else(|| MzError::InvalidArgument(format!("unknown variant '{s}'")))
    }

    /// Multiplicity the variant applies to.
    pub fn mu(self) -> usize {
        match self {
            Variant::NormalizedDouble => 2,
            Variant::NormalizedTriple | Variant::GeneralTriple => 3,
        }
    }
}

fn b21(u: f64) -> f64 {
    (1.0 - 2.0 * u).powi(2) * u / ((2.0 * (1.0 - 2.0 * u).powi(2) - 1.0) * (1.0 - u))
}

fn b22(u: f64) -> f64 {
    u / ((2.0 * (1.0 - 2.0 * u).powi(2) - 1.0) * (1.0 - u))
}

fn den2(u: f64) -> f64 {
    (24.0 * u.powi(3) - 36.0 * u * u + 18.0 * u - 1.0) * (u - 1.0).powi(3) * (8.0 * u * u - 8.0 * u + 1.0)
}

fn b23(u: f64) -> f64 {
    let p = 32.0 * u.powi(6) - 144.0 * u.powi(5) + 272.0 * u.powi(4) - 288.0 * u.powi(3) + 174.0 * u * u - 52.0 * u
        + 5.0;
    u * p / den2(u)
}

fn b24(u: f64) -> f64 {
    (2.0 * u - 1.0).powi(3) * (u - 2.0) * u / den2(u)
}

fn a2(u: f64) -> f64 {
    1.0 / ((2.0 * (1.0 - 2.0 * u).powi(2) - 1.0) * (1.0 - 2.0 * u))
}

fn a3_den(u: f64) -> f64 {
    128.0 * u.powi(6) - 384.0 * u.powi(5) + 464.0 * u.powi(4) - 320.0 * u.powi(3) + 136.0 * u * u - 30.0 * u + 1.0
}

fn a3(u: f64) -> f64 {
    (2.0 * u - 1.0).powi(4) * (8.0 * u * u - 8.0 * u + 1.0) / a3_den(u)
}

fn b33(u: f64) -> f64 {
    let p = 3072.0 * u.powi(12) - 25088.0 * u.powi(11) + 92480.0 * u.powi(10) - 202336.0 * u.powi(9)
        + 289640.0 * u.powi(8)
        - 282020.0 * u.powi(7)
        + 188614.0 * u.powi(6)
        - 85997.0 * u.powi(5)
        + 26342.0 * u.powi(4)
        - 5368.0 * u.powi(3)
        + 702.0 * u * u
        - 42.0 * u;
    let q = 8.0 * u * u - 8.0 * u + 1.0;
    -a3(u) * p / (3.0 * (2.0 * u - 1.0).powi(4) * q * q * (u - 1.0).powi(4))
}

fn b34(u: f64) -> f64 {
    let p = 16.0 * u.powi(6) - 72.0 * u.powi(5) + 130.0 * u.powi(4) - 106.0 * u.powi(3) + 42.0 * u * u - 9.0 * u;
    let q = 8.0 * u * u - 8.0 * u + 1.0;
    a3(u) * p / (3.0 * q * q * (u - 1.0).powi(4) * (2.0 * u - 1.0))
}

fn l1(u: f64) -> f64 {
    (1.0 - 2.0 * u).powi(2) / ((2.0 * (1.0 - 2.0 * u).powi(2) - 1.0) * (1.0 - u).powi(3))
}

fn l2_den(u: f64) -> f64 {
    128.0 * u.powi(6) - 384.0 * u.powi(5) + 480.0 * u.powi(4) - 336.0 * u.powi(3) + 140.0 * u * u - 32.0 * u + 1.0
}

fn l2(u: f64) -> f64 {
    (2.0 * u - 1.0).powi(6) / (l2_den(u) * (1.0 - u).powi(3))
}

fn ratio_r(u: f64) -> f64 {
    let h = l1(u) * u;
    h / (1.0 - h)
}

fn l3(u: f64) -> f64 {
    (1.0 + ratio_r(u).powi(2)).sqrt()
}

fn b1(u: f64) -> f64 {
    u + ratio_r(u)
}

fn b2(u: f64) -> f64 {
    let (ll1, ll2, ll3) = (l1(u), l2(u), l3(u));
    let a = ll1 * ll3;
    let r = ratio_r(u);
    let quart = (1.0 - 2.0 * u).powi(4) * (1.0 - 2.0 * a * u).powi(4);
    let sq = (1.0 - 2.0 * u).powi(2) * (1.0 - 2.0 * a * u).powi(2);
    let num = 16.0 * a * a * u.powi(4) - (16.0 * a * a + 16.0 * a) * u.powi(3) + (16.0 * a + 4.0) * u * u - 4.0 * u
        + 1.0;
    let f1 = num * num / quart;
    let l22 = ll2 * ll2;
    let l33 = ll3 * ll3;
    let bracket = (ll2 / 3.0 + 17.0 * ll2 * l33 / 3.0) * u
        + 7.0 * l22 / 3.0 * u * u
        + 4.0 * l22 / 3.0 * u.powi(3)
        + (ll2 / 3.0 + 7.0 * l22 * u / 3.0 + 8.0 * l22 * u * u / 3.0) * r
        + 4.0 * l22 * u / 3.0 * r * r
        + ll2 / 3.0 * (ll1 * l33 * u / (1.0 - ll1 * ll3 * u))
        + 8.0 * ll2.powi(3) * l33 * u
            * (12.0 * l22 * ll3.powi(3) * u.powi(3)
                + (6.0 * l22 * l33 - 14.0 * ll2 * l33) * u * u
                + (4.0 * ll3 - 8.0 * ll2 * ll3) * u
                + 3.0)
            / (3.0 * (1.0 - 2.0 * ll2 * ll3 * u).powi(3))
        + 2.0 * ll2 * ll1 * ll1 * ll3.powi(3) * u
            * (16.0 * ll1 * ll1 * l33 * u.powi(3)
                + (4.0 * ll1 * ll1 * l33 - 20.0 * ll1 * ll3) * u * u
                + (6.0 - 6.0 * ll1 * ll3) * u
                + 3.0)
            / (1.0 - 2.0 * ll1 * ll3 * u).powi(3);
    let t = -4.0 * a * a * u * u + 4.0 * a * u;
    let last = l22 / 3.0 * (u + r) * (2.0 * t * t / quart + 7.0 * t / sq + 8.0);
    f1 * bracket + last
}

/// Denominators whose first positive zero ends the domain of a variant.
fn denominators(variant: Variant, u: f64) -> Vec<f64> {
    let base = vec![2.0 * (1.0 - 2.0 * u).powi(2) - 1.0, 1.0 - u];
    match variant {
        Variant::NormalizedDouble => {
            let mut v = base;
            v.push(den2(u));
            v
        }
        Variant::NormalizedTriple => {
            let mut v = base;
            v.push(1.0 - 2.0 * u);
            v.push(a3_den(u));
            v.push(8.0 * u * u - 8.0 * u + 1.0);
            v
        }
        Variant::GeneralTriple => {
            let mut v = base;
            v.push(l2_den(u));
            v.push(1.0 - 2.0 * u);
            let (ll1, ll2) = (l1(u), l2(u));
            v.push(1.0 - ll1 * u);
            let ll3 = l3(u);
            let a = ll1 * ll3;
            v.push(1.0 - 2.0 * a * u);
            v.push(1.0 - a * u);
            v.push(1.0 - 2.0 * ll2 * ll3 * u);
            v
        }
    }
}

/// First positive pole of the rational functions of a variant.
pub fn domain_limit(variant: Variant) -> f64 {
    static LIMITS: OnceLock<[f64; 3]> = OnceLock::new();
    let limits = LIMITS.get_or_init(|| {
        Variant::ALL.map(|v| {
            let k = denominators(v, 0.0).len();
            (0..k)
                .filter_map(|i| smallest_positive_root(|u| denominators(v, u)[i], 0.0, 0.5, 1e-15).ok())
                .fold(0.5, f64::min)
        })
    });
    let idx = Variant::ALL.iter().position(|&v| v == variant).expect("variant listed in ALL");
    limits[idx]
}

/// Evaluates the named rational functions of a variant at `u`.
///
/// - `normalized_double`: `b21, b22, b23, b24`;
/// - `normalized_triple`: `b21, b22, a2, a3, b33, b34`;
/// - `general_triple`: `l1, l2, l3, b1, b2`.
///
/// Errors with [`MzError::OutsideDomain`] if `u` is negative or at or
/// beyond the first pole.
pub fn rational_functions(variant: Variant, u: f64) -> Result<Vec<(&'static str, f64)>> {
    let limit = domain_limit(variant);
    if !(u >= 0.0 && u < limit) {
        return Err(MzError::OutsideDomain { u, limit });
    }
    Ok(match variant {
        Variant::NormalizedDouble => vec![("b21", b21(u)), ("b22", b22(u)), ("b23", b23(u)), ("b24", b24(u))],
        Variant::NormalizedTriple => vec![
            ("b21", b21(u)),
            ("b22", b22(u)),
            ("a2", a2(u)),
            ("a3", a3(u)),
            ("b33", b33(u)),
            ("b34", b34(u)),
        ],
        Variant::GeneralTriple => vec![("l1", l1(u)), ("l2", l2(u)), ("l3", l3(u)), ("b1", b1(u)), ("b2", b2(u))],
    })
}

/// The contraction quantity whose level sets define the thresholds:
/// `2b21² + 2b23²`, `2b21² + 2b33²`, or `b1² + b2²`.
pub fn contraction_quantity(variant: Variant, u: f64) -> f64 {
    match variant {
        Variant::NormalizedDouble => 2.0 * b21(u).powi(2) + 2.0 * b23(u).powi(2),
        Variant::NormalizedTriple => 2.0 * b21(u).powi(2) + 2.0 * b33(u).powi(2),
        Variant::GeneralTriple => b1(u).powi(2) + b2(u).powi(2),
    }
}

/// Convergence thresholds of a variant.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ThresholdSet {
    /// Multiplicity.
    pub mu: usize,
    /// Variant.
    pub variant: Variant,
    /// Smallest positive root of `quantity(u) = 1` (error decreases).
    pub u_converge: f64,
    /// Smallest positive root of `quantity(u) = 1/4` (quadratic rate
    /// `(1/2)^{2^k − 1}`).
    pub u_quadratic: f64,
    /// `quantity(u_converge) − 1`.
    pub residual_converge: f64,
    /// `quantity(u_quadratic) − 1/4`.
    pub residual_quadratic: f64,
}

/// Solves for the two thresholds of a variant.
pub fn threshold_constants(variant: Variant) -> Result<ThresholdSet> {
    let hi = domain_limit(variant) * (1.0 - 1e-9);
    let solve = |target: f64| smallest_positive_root(|u| target - contraction_quantity(variant, u), 0.0, hi, 1e-14);
    let uc = solve(1.0)?;
    let uq = solve(0.25)?;
    Ok(ThresholdSet {
        mu: variant.mu(),
        variant,
        u_converge: uc,
        u_quadratic: uq,
        residual_converge: contraction_quantity(variant, uc) - 1.0,
        residual_quadratic: contraction_quantity(variant, uq) - 0.25,
    })
}
