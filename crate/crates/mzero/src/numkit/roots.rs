//! Bracketing root finder for scalar functions.

use crate::error::{MzError, Result};

/// Number of scan steps across the bracket before bisection.
pub const SCAN_STEPS: usize = 1024;

/// Smallest root of `phi` in `(lo, hi]` with a sign change relative to
/// `phi(lo)`.
///
/// The bracket is scanned outward from `lo` in steps of `(hi − lo)/1024`;
/// the first step whose endpoint changes sign (or hits zero) is bisected
/// until its width is at most `tol`. Returns
/// [`MzError::NoSignChange`] if no sign change occurs in the bracket.
pub fn smallest_positive_root<F: Fn(f64) -> f64>(phi: F, lo: f64, hi: f64, tol: f64) -> Result<f64> {
    if !(lo < hi) || !(tol > 0.0) || !lo.is_finite() || !hi.is_finite() {
        return Err(MzError::InvalidArgument(format!("invalid bracket [{lo}, {hi}] or tolerance {tol}")));
    }
    let f0 = phi(lo);
    if f0 == 0.0 {
        return Ok(lo);
    }
    if !f0.is_finite() {
        return Err(MzError::InvalidArgument(format!("function not finite at {lo}")));
    }
    let s0 = f0.signum();
    let step = (hi - lo) / SCAN_STEPS as f64;
    let mut a = lo;
    for i in 1..=SCAN_STEPS {
        let b = if i == SCAN_STEPS { hi } else { lo + step * i as f64 };
        let fb = phi(b);
        if fb == 0.0 {
            return Ok(b);
        }
        if fb.is_finite() && fb.signum() != s0 {
            return Ok(bisect(&phi, a, b, s0, tol));
        }
        a = b;
    }
    Err(MzError::NoSignChange { lo, hi })
}

fn bisect<F: Fn(f64) -> f64>(phi: &F, mut a: f64, mut b: f64, sa: f64, tol: f64) -> f64 {
    while b - a > tol {
        let m = 0.5 * (a + b);
        if m <= a || m >= b {
            break;
        }
        let fm = phi(m);
        if fm == 0.0 {
            return m;
        }
        if fm.signum() == sa {
            a = m;
        } else {
            b = m;
        }
    }
    0.5 * (a + b)
}
