//! Golden-section search, the scalar kernel shared by the best-response,
//! delegation and deviation routines.

use crate::error::{Error, Result};

/// `(sqrt(5) - 1) / 2`.
const INV_PHI: f64 = 0.618_033_988_749_894_9;
const MAX_ITER: usize = 500;

/// Result of a bracketed maximisation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Maximum {
    pub argmax: f64,
    pub value: f64,
    pub evaluations: usize,
    /// The final bracket still touches an end of the original one.
    pub at_boundary: bool,
}

/// Maximises a unimodal `objective` on `[lo, hi]` until the bracket is no wider
/// than `tol`.
///
/// Ties keep the left sub-bracket, so flat regions resolve toward smaller
/// arguments. The search is deterministic.
pub fn golden_section_max<F>(mut objective: F, lo: f64, hi: f64, tol: f64) -> Result<Maximum>
where
    F: FnMut(f64) -> f64,
{
    if !(lo.is_finite() && hi.is_finite()) {
        return Err(Error::NonFinite {
            at: if lo.is_finite() { hi } else { lo },
        });
    }
    if lo > hi {
        return Err(Error::param("bracket", "satisfy lo <= hi"));
    }
    if !(tol > 0.0) {
        return Err(Error::param("tolerance", "be > 0"));
    }

    let mut evaluations = 0usize;
    let mut eval = |x: f64| -> Result<f64> {
        evaluations += 1;
        let v = objective(x);
        if v.is_finite() {
            Ok(v)
        } else {
            Err(Error::NonFinite { at: x })
        }
    };

    let (mut a, mut b) = (lo, hi);
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let mut fc = eval(c)?;
    let mut fd = eval(d)?;
    let mut iter = 0;
    while b - a > tol && iter < MAX_ITER {
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = eval(c)?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = eval(d)?;
        }
        iter += 1;
    }
    let argmax = 0.5 * (a + b);
    let value = eval(argmax)?;
    Ok(Maximum {
        argmax,
        value,
        evaluations,
        at_boundary: a <= lo || b >= hi,
    })
}

/// Bisection for a sign change of `f` on `[lo, hi]`, to width `tol`.
///
/// Returns the final bracket. `f(lo)` and `f(hi)` must have opposite signs.
pub fn bisect_sign_change<F>(mut f: F, lo: f64, hi: f64, tol: f64) -> Result<(f64, f64)>
where
    F: FnMut(f64) -> Result<f64>,
{
    let (mut a, mut b) = (lo, hi);
    let fa = f(a)?;
    let fb = f(b)?;
    if fa.signum() == fb.signum() {
        return Err(Error::NoSignChange { lo, hi });
    }
    let left_positive = fa > 0.0;
    while b - a > tol {
        let mid = 0.5 * (a + b);
        let fm = f(mid)?;
        if (fm > 0.0) == left_positive {
            a = mid;
        } else {
            b = mid;
        }
    }
    Ok((a, b))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn finds_interior_quadratic_max() {
        let m = golden_section_max(|x| -(x - 0.3) * (x - 0.3), 0.0, 1.0, 1e-10).unwrap();
        assert!((m.argmax - 0.3).abs() < 1e-10);
        assert!(!m.at_boundary);
    }

    #[test]
    fn flags_monotone_objective() {
        let m = golden_section_max(|x| x, 0.0, 1.0, 1e-8).unwrap();
        assert!(m.at_boundary);
        assert!((m.argmax - 1.0).abs() < 1e-8);
        let m = golden_section_max(|x| -x, 0.0, 1.0, 1e-8).unwrap();
        assert!(m.at_boundary);
    }

    #[test]
    fn rejects_non_finite_values() {
        let e = golden_section_max(|x| if x > 0.5 { f64::NAN } else { x }, 0.0, 1.0, 1e-8);
        assert!(matches!(e, Err(Error::NonFinite { .. })));
        assert!(golden_section_max(|x| x, 0.0, f64::INFINITY, 1e-8).is_err());
    }

    #[test]
    fn is_deterministic() {
        let f = |x: f64| -(x - 0.123_456).powi(2) + 0.1 * x;
        let a = golden_section_max(f, -2.0, 3.0, 1e-12).unwrap();
        let b = golden_section_max(f, -2.0, 3.0, 1e-12).unwrap();
        assert_eq!(a.argmax.to_bits(), b.argmax.to_bits());
    }

    #[test]
    fn bisection_brackets_root() {
        let (a, b) = bisect_sign_change(|x| Ok(0.25 - x), 0.0, 1.0, 1e-9).unwrap();
        assert!(a <= 0.25 && 0.25 <= b && b - a <= 1e-9);
        assert!(bisect_sign_change(|x| Ok(1.0 + x), 0.0, 1.0, 1e-9).is_err());
    }
}
