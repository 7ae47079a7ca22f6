use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::model::MarginalSpec;
use crate::numdiff;
use crate::quadrature::{integrate, integrate_to_infinity, kronrod15, QuadOptions};

use super::Marginal;

/// A hazard-rate function `r(x) >= 0`.
pub type HazardFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// Lifetime defined by its hazard rate: survival `exp(-∫₀ˣ r)`.
///
/// The cumulative hazard is tabulated at construction on knots covering
/// `[0, horizon]` (each segment integrated adaptively); evaluation adds a
/// 15-point Kronrod rule over the partial segment. Points beyond the horizon
/// integrate the remainder adaptively.
#[derive(Clone)]
pub struct HazardDefined {
    rate: HazardFn,
    label: String,
    horizon: f64,
    knots: Vec<f64>,
    cumulative: Vec<f64>,
    table: Option<Vec<[f64; 2]>>,
}

impl fmt::Debug for HazardDefined {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("HazardDefined")
            .field("label", &self.label)
            .field("horizon", &self.horizon)
            .field("knots", &self.knots.len())
            .finish()
    }
}

impl HazardDefined {
    pub fn new(label: impl Into<String>, rate: HazardFn, horizon: f64) -> Result<Self> {
        Self::with_breakpoints(label, rate, horizon, &[])
    }

    /// As [`HazardDefined::new`], adding `breakpoints` (kinks of `r`) to the
    /// knot set so that no quadrature panel straddles them.
    pub fn with_breakpoints(label: impl Into<String>, rate: HazardFn, horizon: f64, breakpoints: &[f64]) -> Result<Self> {
        if !(horizon > 0.0 && horizon.is_finite()) {
            return Err(Error::InvalidParameter(format!("hazard horizon must be positive, got {horizon}")));
        }
        let mut knots = base_knots(horizon);
        knots.extend(breakpoints.iter().copied().filter(|b| *b > 0.0 && *b < horizon));
        knots.sort_by(f64::total_cmp);
        knots.dedup();
        let opts = QuadOptions::with_tolerance(1e-15, 1e-13);
        let mut cumulative = Vec::with_capacity(knots.len());
        let mut acc = 0.0;
        cumulative.push(0.0);
        for w in knots.windows(2) {
            let r = &rate;
            for &x in &[w[0], 0.5 * (w[0] + w[1])] {
                let v = r(x);
                if !(v >= 0.0 && v.is_finite()) {
                    return Err(Error::InvalidParameter(format!("hazard r({x}) = {v} is not a finite nonnegative number")));
                }
            }
            acc += integrate(|t| r(t), w[0], w[1], opts)?.value;
            cumulative.push(acc);
        }
        Ok(Self {
            rate,
            label: label.into(),
            horizon,
            knots,
            cumulative,
            table: None,
        })
    }

    /// Piecewise-linear hazard through `points` (`[x, r]` pairs with
    /// increasing `x`), held constant outside the table.
    pub fn from_table(points: Vec<[f64; 2]>, horizon: f64) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::InvalidParameter("hazard table is empty".into()));
        }
        for p in &points {
            if !(p[0] >= 0.0 && p[0].is_finite() && p[1] >= 0.0 && p[1].is_finite()) {
                return Err(Error::InvalidParameter(format!("hazard table point {p:?} must be finite and nonnegative")));
            }
        }
        if points.windows(2).any(|w| w[1][0] <= w[0][0]) {
            return Err(Error::InvalidParameter("hazard table abscissae must be strictly increasing".into()));
        }
        if points.last().map(|p| p[1]) == Some(0.0) {
            return Err(Error::InvalidParameter("hazard table must end with a positive rate".into()));
        }
        let table = points.clone();
        let rate: HazardFn = Arc::new(move |x| interpolate(&table, x));
        let breaks: Vec<f64> = points.iter().map(|p| p[0]).collect();
        let mut h = Self::with_breakpoints(format!("hazard_table[{}]", points.len()), rate, horizon, &breaks)?;
        h.table = Some(points);
        Ok(h)
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    pub fn rate_at(&self, x: f64) -> f64 {
        (self.rate)(x)
    }

    pub fn rate_fn(&self) -> HazardFn {
        self.rate.clone()
    }

    /// Derivative of the hazard by finite differences.
    pub fn rate_derivative(&self, x: f64) -> f64 {
        numdiff::first(&|t| (self.rate)(t), x, 0.0)
    }
}

fn interpolate(table: &[[f64; 2]], x: f64) -> f64 {
    if x <= table[0][0] {
        return table[0][1];
    }
    let last = table[table.len() - 1];
    if x >= last[0] {
        return last[1];
    }
    let k = table.partition_point(|p| p[0] <= x);
    let (a, b) = (table[k - 1], table[k]);
    a[1] + (b[1] - a[1]) * (x - a[0]) / (b[0] - a[0])
}

fn base_knots(horizon: f64) -> Vec<f64> {
    let dense_end = horizon.min(4.0);
    let mut knots: Vec<f64> = (0..=256).map(|i| dense_end * i as f64 / 256.0).collect();
    let mut x = dense_end;
    while x < horizon {
        x = (x * 1.01).min(horizon);
        knots.push(x);
    }
    knots
}

impl Marginal for HazardDefined {
    fn label(&self) -> String {
        self.label.clone()
    }

    fn survival(&self, x: f64) -> f64 {
        (-self.cumulative_hazard(x)).exp()
    }

    fn cdf(&self, x: f64) -> f64 {
        -(-self.cumulative_hazard(x)).exp_m1()
    }

    fn density(&self, x: f64) -> f64 {
        if x < 0.0 {
            return 0.0;
        }
        (self.rate)(x) * self.survival(x)
    }

    /// `(r' - r²)·survival`, with `r'` from finite differences.
    fn density_derivative(&self, x: f64) -> f64 {
        if x < 0.0 {
            return 0.0;
        }
        let r = (self.rate)(x);
        (self.rate_derivative(x) - r * r) * self.survival(x)
    }

    fn cumulative_hazard(&self, x: f64) -> f64 {
        if x <= 0.0 {
            return 0.0;
        }
        if x >= self.horizon {
            let base = *self.cumulative.last().expect("non-empty table");
            if x == self.horizon {
                return base;
            }
            let tail = integrate(|t| (self.rate)(t), self.horizon, x, QuadOptions::default())
                .map(|q| q.value)
                .unwrap_or(f64::INFINITY);
            return base + tail;
        }
        let k = self.knots.partition_point(|&t| t <= x) - 1;
        let a = self.knots[k];
        if x == a {
            return self.cumulative[k];
        }
        let mut r = |t: f64| (self.rate)(t);
        self.cumulative[k] + kronrod15(&mut r, a, x).0
    }

    fn hazard(&self, x: f64) -> Result<f64> {
        if !(x >= 0.0) {
            return Err(Error::Domain(format!("hazard of {} at x = {x}", self.label)));
        }
        Ok((self.rate)(x))
    }

    fn raw_moment(&self, k: u32) -> Result<f64> {
        if k == 0 {
            return Ok(1.0);
        }
        let kf = k as f64;
        integrate_to_infinity(|x| kf * x.powi(k as i32 - 1) * self.survival(x), 0.0, QuadOptions::default())
            .map(|q| q.value)
            .map_err(|_| Error::Domain(format!("moment {k} of {} diverges", self.label)))
    }

    fn to_spec(&self) -> Option<MarginalSpec> {
        self.table.clone().map(|points| MarginalSpec::HazardTable {
            points,
            horizon: Some(self.horizon),
        })
    }
}
