//! Univariate lifetime laws on `[0, ∞)`.
//!
//! Every law implements [`Marginal`]. Closed-form laws override the generic
//! numerical fallbacks (root-finding quantiles, quadrature moments and
//! transforms) with their analytic expressions.

mod erlang;
mod exponential;
mod hazard;
mod lomax;
mod min;
mod mixture;
mod weibull;

use std::fmt;
use std::sync::Arc;

pub use erlang::ExpErlangMixture;
pub use exponential::Exponential;
pub use hazard::{HazardDefined, HazardFn};
pub use lomax::Lomax;
pub use min::MinOfIndependent;
pub use mixture::SignedExponentialMixture;
pub use weibull::Weibull;

use crate::error::{Error, Result};
use crate::model::MarginalSpec;
use crate::quadrature::{integrate_to_infinity, QuadOptions};
use crate::report::{GridReport, MarginTracker};
use crate::roots;

/// Absolute tolerance in `x` for generic quantile inversion.
pub const QUANTILE_XTOL: f64 = 1e-12;

/// Shared handle to a marginal law.
pub type MarginalRef = Arc<dyn Marginal>;

/// A lifetime distribution on `[0, ∞)` with right-continuous density.
///
/// Implementations are immutable after construction.
pub trait Marginal: fmt::Debug + Send + Sync {
    /// Short human-readable description, e.g. `Exp(2)`.
    fn label(&self) -> String;

    fn survival(&self, x: f64) -> f64;

    fn cdf(&self, x: f64) -> f64 {
        1.0 - self.survival(x)
    }

    /// Right-hand density.
    fn density(&self, x: f64) -> f64;

    /// Right-hand derivative of the density.
    fn density_derivative(&self, x: f64) -> f64;

    /// `-ln survival(x)`.
    fn cumulative_hazard(&self, x: f64) -> f64 {
        -self.survival(x).ln()
    }

    /// Failure rate `density / survival`; a domain error once the survival
    /// has vanished.
    fn hazard(&self, x: f64) -> Result<f64> {
        let s = self.survival(x);
        if s <= 1e-300 {
            return Err(Error::Domain(format!(
                "hazard of {} undefined at x = {x}: survival is zero",
                self.label()
            )));
        }
        Ok(self.density(x) / s)
    }

    /// Left end of the support.
    fn left_extremity(&self) -> f64 {
        0.0
    }

    /// Generalized inverse of the cdf, `inf{x : cdf(x) >= p}` for `p ∈ [0, 1)`.
    fn quantile(&self, p: f64) -> Result<f64> {
        check_probability(p)?;
        let lo = self.left_extremity();
        if p == 0.0 {
            return Ok(lo);
        }
        roots::solve_decreasing(|x| -self.cdf(x), -p, lo, 1.0, QUANTILE_XTOL)
    }

    /// Inverse of the survival function for `q ∈ (0, 1]`; returns the left
    /// extremity at `q = 1`.
    fn inverse_survival(&self, q: f64) -> Result<f64> {
        if !(q > 0.0 && q <= 1.0) {
            return Err(Error::Domain(format!("survival level {q} outside (0, 1]")));
        }
        let lo = self.left_extremity();
        if q == 1.0 {
            return Ok(lo);
        }
        roots::solve_decreasing(|x| self.survival(x), q, lo, 1.0, QUANTILE_XTOL)
    }

    /// `E[X^k]` for `k >= 1`; a domain error when the moment diverges.
    fn raw_moment(&self, k: u32) -> Result<f64> {
        if k == 0 {
            return Ok(1.0);
        }
        let kf = k as f64;
        integrate_to_infinity(|x| kf * x.powi(k as i32 - 1) * self.survival(x), 0.0, QuadOptions::default())
            .map(|q| q.value)
            .map_err(|_| Error::Domain(format!("moment {k} of {} diverges", self.label())))
    }

    /// Moment generating function `E[e^{sX}]`; `mgf(-s)` is the Laplace
    /// transform. Domain error when the expectation diverges.
    fn mgf(&self, s: f64) -> Result<f64> {
        numeric_mgf(self, s)
    }

    fn mean(&self) -> Result<f64> {
        self.raw_moment(1)
    }

    fn variance(&self) -> Result<f64> {
        let m1 = self.raw_moment(1)?;
        let m2 = self.raw_moment(2)?;
        Ok(m2 - m1 * m1)
    }

    /// Serializable description, when the law has one.
    fn to_spec(&self) -> Option<MarginalSpec> {
        None
    }
}

pub(crate) fn check_probability(p: f64) -> Result<()> {
    if !(0.0..1.0).contains(&p) {
        return Err(Error::Domain(format!("probability {p} outside [0, 1)")));
    }
    Ok(())
}

/// `1 + s ∫ survival(x) e^{sx} dx`, with divergence detection for `s > 0`.
pub(crate) fn numeric_mgf<M: Marginal + ?Sized>(m: &M, s: f64) -> Result<f64> {
    if s == 0.0 {
        return Ok(1.0);
    }
    let diverges = || Error::Domain(format!("mgf of {} diverges at s = {s}", m.label()));
    if s > 0.0 {
        // e^{sx}·survival must eventually decay: sample the log-integrand far out
        let probe = |x: f64| s * x - m.cumulative_hazard(x);
        let far = 200.0 / s;
        if !(probe(2.0 * far) < probe(far) - 1.0) {
            return Err(diverges());
        }
    }
    let q = integrate_to_infinity(
        |x| {
            let e = s * x - m.cumulative_hazard(x);
            if e < -745.0 {
                0.0
            } else {
                e.exp()
            }
        },
        0.0,
        QuadOptions::default(),
    )
    .map_err(|_| diverges())?;
    Ok(1.0 + s * q.value)
}

/// Hazard rate of `d` at `x`.
pub fn hazard(d: &dyn Marginal, x: f64) -> Result<f64> {
    if !(x >= 0.0) {
        return Err(Error::Domain(format!("hazard requested at negative x = {x}")));
    }
    d.hazard(x)
}

/// Aging classes certified on a finite grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AgingClass {
    /// Increasing failure rate.
    Ifr,
    /// Decreasing failure rate.
    Dfr,
    /// Increasing failure rate in average.
    Ifra,
    /// Decreasing failure rate in average.
    Dfra,
}

impl AgingClass {
    pub fn name(self) -> &'static str {
        match self {
            AgingClass::Ifr => "IFR",
            AgingClass::Dfr => "DFR",
            AgingClass::Ifra => "IFRA",
            AgingClass::Dfra => "DFRA",
        }
    }
}

/// Checks an aging class on a strictly increasing grid inside the support.
///
/// IFR/DFR compare consecutive hazard values, IFRA/DFRA consecutive values of
/// `cumulative_hazard(x) / x`. Margins are relative differences; ties within
/// `tol` count as monotone. The witness is the worst consecutive pair.
pub fn aging_class(d: &dyn Marginal, class: AgingClass, grid: &[f64], tol: f64) -> Result<GridReport> {
    if grid.is_empty() {
        return Err(Error::InvalidParameter("aging_class needs a non-empty grid".into()));
    }
    if grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidParameter("aging_class grid must be strictly increasing".into()));
    }
    let increasing = matches!(class, AgingClass::Ifr | AgingClass::Ifra);
    let mut points = Vec::with_capacity(grid.len());
    for &x in grid {
        let value = match class {
            AgingClass::Ifr | AgingClass::Dfr => match d.hazard(x) {
                Ok(h) => h,
                Err(_) => continue,
            },
            AgingClass::Ifra | AgingClass::Dfra => {
                if x <= 0.0 {
                    continue;
                }
                let r = d.cumulative_hazard(x);
                if !r.is_finite() {
                    continue;
                }
                r / x
            }
        };
        points.push((x, value));
    }
    let mut tracker = MarginTracker::new();
    for w in points.windows(2) {
        let (x0, v0) = w[0];
        let (x1, v1) = w[1];
        let scale = v0.abs().max(v1.abs()).max(1e-300);
        let diff = if increasing { v1 - v0 } else { v0 - v1 };
        tracker.record(diff / scale, &[x0, x1]);
    }
    let mut report = tracker.finish(format!("{} {}", d.label(), class.name()), tol);
    if points.len() < 2 {
        report.notes.push("fewer than two evaluable grid points".into());
    }
    Ok(report)
}
