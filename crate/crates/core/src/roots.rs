//! Bracketed root finding: bisection with safeguarded secant steps.

use crate::error::{Error, Result};

const MAX_ITER: usize = 400;

/// Finds `x` in `[lo, hi]` with `f(x) = 0`, given a sign change over the
/// bracket. Stops when the bracket is narrower than `xtol * max(1, |x|)`.
pub fn find_root<F: FnMut(f64) -> f64>(mut f: F, mut lo: f64, mut hi: f64, xtol: f64) -> Result<f64> {
    let mut flo = f(lo);
    let mut fhi = f(hi);
    if flo == 0.0 {
        return Ok(lo);
    }
    if fhi == 0.0 {
        return Ok(hi);
    }
    if flo.is_nan() || fhi.is_nan() || flo.signum() == fhi.signum() {
        return Err(Error::RootFinding(format!(
            "no sign change on [{lo}, {hi}] (f = {flo}, {fhi})"
        )));
    }
    let mut use_secant = true;
    for _ in 0..MAX_ITER {
        let width = hi - lo;
        let mid = lo + 0.5 * width;
        if width <= xtol * mid.abs().max(1.0) {
            return Ok(mid);
        }
        let mut x = mid;
        if use_secant {
            let s = lo - flo * width / (fhi - flo);
            // stay well inside the bracket so it keeps shrinking
            let margin = 0.01 * width;
            if s.is_finite() && s > lo + margin && s < hi - margin {
                x = s;
            }
        }
        let fx = f(x);
        if fx == 0.0 {
            return Ok(x);
        }
        if fx.is_nan() {
            return Err(Error::RootFinding(format!("function is NaN at {x}")));
        }
        let old_width = width;
        if fx.signum() == flo.signum() {
            lo = x;
            flo = fx;
        } else {
            hi = x;
            fhi = fx;
        }
        // fall back to plain bisection for one step whenever the secant
        // step failed to halve the bracket
        use_secant = hi - lo < 0.5 * old_width;
    }
    Err(Error::RootFinding(format!(
        "no convergence after {MAX_ITER} iterations on [{lo}, {hi}]"
    )))
}

/// Solves `g(x) = target` for a nonincreasing `g` on `[lo, ∞)`, expanding the
/// upper end of the bracket geometrically from `lo + step`.
pub fn solve_decreasing<G: FnMut(f64) -> f64>(
    mut g: G,
    target: f64,
    lo: f64,
    step: f64,
    xtol: f64,
) -> Result<f64> {
    let mut hi = lo + step;
    let mut expansions = 0;
    while g(hi) > target {
        hi = lo + 2.0 * (hi - lo);
        expansions += 1;
        if expansions > 1100 || !hi.is_finite() {
            return Err(Error::RootFinding(format!(
                "could not bracket level {target} above {lo}"
            )));
        }
    }
    find_root(|x| g(x) - target, lo, hi, xtol)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cubic_root() {
        let r = find_root(|x| x * x * x - 2.0, 0.0, 2.0, 1e-14).unwrap();
        assert!((r - 2f64.cbrt()).abs() < 1e-13);
    }

    #[test]
    fn rejects_missing_sign_change() {
        assert!(find_root(|x| x * x + 1.0, -1.0, 1.0, 1e-12).is_err());
    }

    #[test]
    fn decreasing_level() {
        let r = solve_decreasing(|x| (-x).exp(), 1e-3, 0.0, 1.0, 1e-14).unwrap();
        assert!((r - 1e3f64.ln()).abs() < 1e-11);
    }

    #[test]
    fn flat_region_converges_to_edge() {
        // g = 1 on [0, 2], then decays; level 1 sits at the edge of the plateau
        let g = |x: f64| if x <= 2.0 { 1.0 } else { (2.0 - x).exp() };
        let r = solve_decreasing(g, 0.5, 0.0, 1.0, 1e-13).unwrap();
        assert!((r - (2.0 + 2f64.ln())).abs() < 1e-10);
    }
}
