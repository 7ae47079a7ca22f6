//! Finite-difference derivatives with one Richardson extrapolation step.
//!
//! All functions take a lower domain bound; when the symmetric stencil would
//! cross it, a one-sided second-order stencil is used instead.

/// Default step for a point `x`.
pub fn step_for(x: f64) -> f64 {
    1e-4_f64.max(1e-4 * x.abs())
}

pub fn first<F: Fn(f64) -> f64>(f: &F, x: f64, lower: f64) -> f64 {
    let h = step_for(x);
    if x - h >= lower {
        let d = |h: f64| (f(x + h) - f(x - h)) / (2.0 * h);
        (4.0 * d(0.5 * h) - d(h)) / 3.0
    } else {
        let d = |h: f64| (-3.0 * f(x) + 4.0 * f(x + h) - f(x + 2.0 * h)) / (2.0 * h);
        (4.0 * d(0.5 * h) - d(h)) / 3.0
    }
}

pub fn second<F: Fn(f64) -> f64>(f: &F, x: f64, lower: f64) -> f64 {
    let h = 4.0 * step_for(x);
    if x - h >= lower {
        let d = |h: f64| (f(x + h) - 2.0 * f(x) + f(x - h)) / (h * h);
        (4.0 * d(0.5 * h) - d(h)) / 3.0
    } else {
        let d = |h: f64| {
            (2.0 * f(x) - 5.0 * f(x + h) + 4.0 * f(x + 2.0 * h) - f(x + 3.0 * h)) / (h * h)
        };
        (4.0 * d(0.5 * h) - d(h)) / 3.0
    }
}

/// Mixed partial ∂²f/∂x∂y by the four-point cross stencil.
pub fn mixed<F: Fn(f64, f64) -> f64>(f: &F, x: f64, y: f64) -> f64 {
    let h = 4.0 * step_for(x.max(y));
    let d = |h: f64| (f(x + h, y + h) - f(x + h, y - h) - f(x - h, y + h) + f(x - h, y - h)) / (4.0 * h * h);
    (4.0 * d(0.5 * h) - d(h)) / 3.0
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn derivatives_of_exponential() {
        let f = |x: f64| (-2.0 * x).exp();
        for &x in &[0.0, 1e-5, 0.3, 2.0] {
            let d1 = first(&f, x, 0.0);
            let d2 = second(&f, x, 0.0);
            assert!((d1 + 2.0 * f(x)).abs() < 1e-8 * f(x).max(1.0), "x={x} d1={d1}");
            assert!((d2 - 4.0 * f(x)).abs() < 1e-5 * f(x).max(1.0), "x={x} d2={d2}");
        }
    }

    #[test]
    fn mixed_partial_of_product_kernel() {
        let f = |x: f64, y: f64| x * y;
        assert!((mixed(&f, 0.7, 1.3) - 1.0).abs() < 1e-8);
    }
}
