//! Transforms, product moments, correlation and mean times to failure, each
//! with a two-dimensional quadrature oracle for cross-checking.
//!
//! For a BLM law the joint transforms reduce to the marginal ones:
//!
//! ```text
//! M(s, t) = [(θ − s) M_X(s) + (θ − t) M_Y(t) − θ] / (θ − s − t),   s + t < θ
//! L(s, t) = M(−s, −t)
//! ```

use serde::Serialize;

use crate::blm::BlmDistribution;
use crate::error::{Error, Result};
use crate::quadrature::{integrate_quadrant, integrate_to_infinity, Quad, QuadOptions};
use crate::univariate::Marginal;

fn marginal_mgf(m: &dyn Marginal, s: f64, which: &str) -> Result<f64> {
    m.mgf(s).map_err(|e| match e {
        Error::Domain(msg) => Error::Domain(format!("{which} marginal: {msg}")),
        other => other,
    })
}

/// Joint moment generating function `E[e^{sX + tY}]`, defined for `s + t < θ`
/// when both marginal transforms are finite.
pub fn mgf(d: &BlmDistribution, s: f64, t: f64) -> Result<f64> {
    let theta = d.theta();
    if !(s.is_finite() && t.is_finite()) {
        return Err(Error::Domain(format!("transform point ({s}, {t}) is not finite")));
    }
    if s + t >= theta {
        return Err(Error::Domain(format!("mgf needs s + t < theta = {theta}, got s + t = {}", s + t)));
    }
    let mx = marginal_mgf(&**d.marginal_x(), s, "X")?;
    let my = marginal_mgf(&**d.marginal_y(), t, "Y")?;
    Ok(((theta - s) * mx + (theta - t) * my - theta) / (theta - s - t))
}

/// Joint Laplace–Stieltjes transform `E[e^{−sX − tY}]` for `s, t ≥ 0`.
pub fn lst(d: &BlmDistribution, s: f64, t: f64) -> Result<f64> {
    if !(s >= 0.0 && t >= 0.0) {
        return Err(Error::Domain(format!("lst needs s, t >= 0, got ({s}, {t})")));
    }
    mgf(d, -s, -t)
}

/// `Γ(n)/θⁿ = (n−1)!/θⁿ`, accumulated as a product to avoid overflow.
fn gamma_over_power(n: u32, theta: f64) -> f64 {
    (1..n).fold(1.0 / theta, |acc, m| acc * m as f64 / theta)
}

fn binomial(n: u32, k: u32) -> f64 {
    let k = k.min(n - k);
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

fn moment(m: &dyn Marginal, k: u32, which: &str) -> Result<f64> {
    let v = m
        .raw_moment(k)
        .map_err(|_| Error::Domain(format!("E[{which}^{k}] is infinite for {}", m.label())))?;
    if !v.is_finite() {
        return Err(Error::Domain(format!("E[{which}^{k}] is infinite for {}", m.label())));
    }
    Ok(v)
}

/// `E[X^i Y^j]` for positive integers `i`, `j`:
///
/// ```text
/// i j Σ_{k<i} C(i−1,k)/(i−k) · Γ(j+k)/θ^{j+k} · E[X^{i−k}]
///   + i j Σ_{k<j} C(j−1,k)/(j−k) · Γ(i+k)/θ^{i+k} · E[Y^{j−k}]
/// ```
pub fn product_moment(d: &BlmDistribution, i: u32, j: u32) -> Result<f64> {
    if i == 0 || j == 0 {
        return Err(Error::InvalidParameter(format!("moment powers must be positive, got ({i}, {j})")));
    }
    let theta = d.theta();
    let half = |p: u32, q: u32, m: &dyn Marginal, which: &str| -> Result<f64> {
        let mut sum = 0.0;
        for k in 0..p {
            sum += binomial(p - 1, k) / (p - k) as f64 * gamma_over_power(q + k, theta) * moment(m, p - k, which)?;
        }
        Ok(sum)
    };
    let ij = (i as f64) * (j as f64);
    Ok(ij * half(i, j, &**d.marginal_x(), "X")? + ij * half(j, i, &**d.marginal_y(), "Y")?)
}

/// `E[XY] = (E[X] + E[Y]) / θ`.
pub fn exy(d: &BlmDistribution) -> Result<f64> {
    let ex = moment(&**d.marginal_x(), 1, "X")?;
    let ey = moment(&**d.marginal_y(), 1, "Y")?;
    Ok((ex + ey) / d.theta())
}

pub fn pearson_correlation(d: &BlmDistribution) -> Result<f64> {
    let (fx, fy) = (&**d.marginal_x(), &**d.marginal_y());
    let ex = moment(fx, 1, "X")?;
    let ey = moment(fy, 1, "Y")?;
    let vx = moment(fx, 2, "X")? - ex * ex;
    let vy = moment(fy, 2, "Y")? - ey * ey;
    if !(vx > 0.0 && vy > 0.0) {
        return Err(Error::Domain(format!("correlation undefined: variances {vx}, {vy}")));
    }
    let rho = (exy(d)? - ex * ey) / (vx * vy).sqrt();
    Ok(rho.clamp(-1.0, 1.0))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum System {
    Series,
    Parallel,
}

/// Mean time to failure: `E[X ∧ Y] = 1/θ` for a series system,
/// `E[X ∨ Y] = E[X] + E[Y] − 1/θ` for a parallel one.
pub fn mttf(d: &BlmDistribution, system: System) -> Result<f64> {
    let theta = d.theta();
    match system {
        System::Series => Ok(1.0 / theta),
        System::Parallel => {
            let ex = moment(&**d.marginal_x(), 1, "X")?;
            let ey = moment(&**d.marginal_y(), 1, "Y")?;
            Ok(ex + ey - 1.0 / theta)
        }
    }
}

/// Which expectation the quadrature oracle evaluates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum OracleKind {
    /// `E[e^{−sX − tY}]`.
    Lst { s: f64, t: f64 },
    /// `E[e^{sX + tY}]`.
    Mgf { s: f64, t: f64 },
    /// `E[X^r Y^q]` for real `r, q > 0`.
    Moment { r: f64, q: f64 },
}

/// Relative accuracy requested from the oracle.
pub const ORACLE_REL_TOL: f64 = 1e-9;

/// Evaluates an expectation directly from the joint survival function.
///
/// Moments use `E[X^r Y^q] = r q ∫∫ H̄(x, y) x^{r−1} y^{q−1}`. Transforms use
/// `E[e^{sX+tY}] = M_X(s) + M_Y(t) − 1 + s t ∫∫ H̄(x, y) e^{sx+ty}`, with the
/// marginal terms `1 + s ∫ F̄(x) e^{sx}` also computed by quadrature. The
/// quadrant is integrated over both diagonal wedges with an infinite-range
/// map, in units of `1/θ`. Never consults the closed forms.
pub fn quadrature_oracle(d: &BlmDistribution, kind: OracleKind) -> Result<Quad> {
    let theta = d.theta();
    let opts = QuadOptions::with_tolerance(1e-14, ORACLE_REL_TOL);
    match kind {
        OracleKind::Moment { r, q } => {
            if !(r > 0.0 && q > 0.0) {
                return Err(Error::InvalidParameter(format!("moment powers must be positive, got ({r}, {q})")));
            }
            // x = u/θ, y = v/θ
            let scale = r * q / theta.powf(r + q);
            let quad = integrate_quadrant(
                |u, v| d.survival(u / theta, v / theta) * u.powf(r - 1.0) * v.powf(q - 1.0),
                opts,
            )?;
            Ok(Quad {
                value: scale * quad.value,
                error: scale * quad.error,
            })
        }
        OracleKind::Lst { s, t } => {
            if !(s >= 0.0 && t >= 0.0) {
                return Err(Error::Domain(format!("lst needs s, t >= 0, got ({s}, {t})")));
            }
            transform_oracle(d, -s, -t, opts)
        }
        OracleKind::Mgf { s, t } => {
            if s + t >= theta {
                return Err(Error::Domain(format!("mgf needs s + t < theta = {theta}")));
            }
            transform_oracle(d, s, t, opts)
        }
    }
}

fn survival_transform(m: &dyn Marginal, s: f64, theta: f64, opts: QuadOptions) -> Result<Quad> {
    if s == 0.0 {
        return Ok(Quad { value: 1.0, error: 0.0 });
    }
    let q = integrate_to_infinity(
        |u| {
            let sf = m.survival(u / theta);
            if sf == 0.0 {
                0.0
            } else {
                sf * (s * u / theta).exp()
            }
        },
        0.0,
        opts,
    )?;
    Ok(Quad {
        value: 1.0 + s / theta * q.value,
        error: (s / theta).abs() * q.error,
    })
}

fn transform_oracle(d: &BlmDistribution, s: f64, t: f64, opts: QuadOptions) -> Result<Quad> {
    let theta = d.theta();
    let mx = survival_transform(&**d.marginal_x(), s, theta, opts)?;
    let my = survival_transform(&**d.marginal_y(), t, theta, opts)?;
    let joint = if s == 0.0 || t == 0.0 {
        Quad { value: 0.0, error: 0.0 }
    } else {
        let q = integrate_quadrant(
            |u, v| {
                let h = d.survival(u / theta, v / theta);
                if h == 0.0 {
                    0.0
                } else {
                    h * ((s * u + t * v) / theta).exp()
                }
            },
            opts,
        )?;
        let scale = s * t / (theta * theta);
        Quad {
            value: scale * q.value,
            error: scale.abs() * q.error,
        }
    };
    Ok(Quad {
        value: mx.value + my.value - 1.0 + joint.value,
        error: mx.error + my.error + joint.error,
    })
}
