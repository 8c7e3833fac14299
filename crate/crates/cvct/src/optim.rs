//! Bracketed scalar maximization: coarse scan followed by golden-section
//! refinement. The scan guards against silently latching onto a shoulder of
//! a multimodal objective.

use crate::error::{Error, Result};

const PHI_COMPLEMENT: f64 = 0.381_966_011_250_105; // 2 - golden ratio

/// Maximize `f` on `[lo, hi]`.
///
/// A `scan_points`-point lattice locates the global lattice maximum; the
/// surrounding bracket is then refined by golden-section search until the
/// bracket width drops below `x_tol`. Returns `(argmax, max)`.
pub fn maximize<F: Fn(f64) -> f64>(
    f: F,
    lo: f64,
    hi: f64,
    scan_points: usize,
    x_tol: f64,
) -> Result<(f64, f64)> {
    if !(lo.is_finite() && hi.is_finite() && lo < hi) {
        return Err(Error::Usage("search interval must be finite and nonempty".into()));
    }
    if scan_points < 3 {
        return Err(Error::Usage("need at least 3 scan points".into()));
    }

    let step = (hi - lo) / (scan_points - 1) as f64;
    let mut best_i = 0usize;
    let mut best_v = f64::NEG_INFINITY;
    for i in 0..scan_points {
        let v = f(lo + step * i as f64);
        if v > best_v {
            best_v = v;
            best_i = i;
        }
    }
    if !best_v.is_finite() {
        return Err(Error::Search("objective is not finite on the bracket".into()));
    }
    if best_i == 0 || best_i == scan_points - 1 {
        return Err(Error::Search(
            "maximum lies on the bracket boundary; widen the search interval".into(),
        ));
    }

    let mut a = lo + step * (best_i - 1) as f64;
    let mut b = lo + step * (best_i + 1) as f64;
    let mut x1 = a + PHI_COMPLEMENT * (b - a);
    let mut x2 = b - PHI_COMPLEMENT * (b - a);
    let mut f1 = f(x1);
    let mut f2 = f(x2);

    while (b - a).abs() > x_tol {
        if f1 > f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = a + PHI_COMPLEMENT * (b - a);
            f1 = f(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = b - PHI_COMPLEMENT * (b - a);
            f2 = f(x2);
        }
    }

    Ok(if f1 > f2 { (x1, f1) } else { (x2, f2) })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn finds_parabola_peak() {
        let (x, v) = maximize(|x| -(x - 0.7) * (x - 0.7), -2.0, 2.0, 101, 1e-9).unwrap();
        assert!((x - 0.7).abs() < 1e-7);
        assert!(v.abs() < 1e-12);
    }

    #[test]
    fn picks_global_peak_among_two() {
        let f = |x: f64| (-(x + 1.0) * (x + 1.0) / 0.02).exp() + 2.0 * (-(x - 1.0) * (x - 1.0) / 0.02).exp();
        let (x, _) = maximize(f, -3.0, 3.0, 201, 1e-8).unwrap();
        assert!((x - 1.0).abs() < 1e-6);
    }

    #[test]
    fn boundary_maximum_is_rejected() {
        let err = maximize(|x| x, 0.0, 1.0, 51, 1e-8).unwrap_err();
        assert!(matches!(err, Error::Search(_)));
    }
}
