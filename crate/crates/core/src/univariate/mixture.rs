use crate::error::{Error, Result};
use crate::model::MarginalSpec;
use crate::report::validation_points;

use super::Marginal;

/// Survival `Σ wᵢ e^{-rᵢ x}` with weights summing to one, some possibly
/// negative.
///
/// Validity (survival in `[0, 1]` and nonincreasing) is checked at
/// construction on a 512-point geometric grid over `[0, 40 / min rate]`,
/// and the slowest-decaying term must carry positive weight so that the
/// tail stays positive beyond the grid.
#[derive(Debug, Clone, PartialEq)]
pub struct SignedExponentialMixture {
    // sorted by increasing rate, equal rates merged, zero weights dropped
    terms: Vec<(f64, f64)>,
}

const WEIGHT_SUM_TOL: f64 = 1e-12;

impl SignedExponentialMixture {
    pub fn new(terms: Vec<(f64, f64)>) -> Result<Self> {
        if terms.is_empty() {
            return Err(Error::InvalidParameter("mixture needs at least one term".into()));
        }
        for &(w, r) in &terms {
            if !w.is_finite() || !(r > 0.0 && r.is_finite()) {
                return Err(Error::InvalidParameter(format!(
                    "mixture term ({w}, {r}) needs a finite weight and positive rate"
                )));
            }
        }
        let total: f64 = terms.iter().map(|t| t.0).sum();
        let abs_total: f64 = terms.iter().map(|t| t.0.abs()).sum();
        if (total - 1.0).abs() > WEIGHT_SUM_TOL * abs_total.max(1.0) {
            return Err(Error::InvalidParameter(format!("mixture weights sum to {total}, not 1")));
        }
        let mut sorted = terms;
        sorted.sort_by(|a, b| a.1.total_cmp(&b.1));
        let mut merged: Vec<(f64, f64)> = Vec::new();
        for (w, r) in sorted {
            match merged.last_mut() {
                Some(last) if last.1 == r => last.0 += w,
                _ => merged.push((w, r)),
            }
        }
        merged.retain(|t| t.0 != 0.0);
        if merged.is_empty() || merged[0].0 <= 0.0 {
            return Err(Error::InvalidParameter(
                "slowest-decaying mixture term must have positive weight".into(),
            ));
        }
        let m = Self { terms: merged };
        m.validate()?;
        Ok(m)
    }

    fn validate(&self) -> Result<()> {
        let horizon = 40.0 / self.terms[0].1;
        let scale: f64 = self.terms.iter().map(|t| (t.0 * t.1).abs()).sum();
        for x in validation_points(horizon, 512) {
            let s = self.survival(x);
            if !(-1e-12..=1.0 + 1e-12).contains(&s) {
                return Err(Error::InvalidParameter(format!("mixture survival {s} outside [0, 1] at x = {x}")));
            }
            let f = self.density(x);
            if f < -1e-12 * scale {
                return Err(Error::InvalidParameter(format!("mixture survival increases at x = {x} (density {f})")));
            }
        }
        Ok(())
    }

    /// `(weight, rate)` pairs, sorted by rate.
    pub fn terms(&self) -> &[(f64, f64)] {
        &self.terms
    }

    fn sum(&self, x: f64, f: impl Fn(f64, f64) -> f64) -> f64 {
        self.terms.iter().map(|&(w, r)| w * f(r, (-r * x).exp())).sum()
    }
}

impl Marginal for SignedExponentialMixture {
    fn label(&self) -> String {
        let parts: Vec<String> = self.terms.iter().map(|(w, r)| format!("{w}·e^-{r}x")).collect();
        format!("Mix[{}]", parts.join(" + "))
    }

    fn survival(&self, x: f64) -> f64 {
        if x <= 0.0 {
            return 1.0;
        }
        self.sum(x, |_, e| e).clamp(0.0, 1.0)
    }

    fn cdf(&self, x: f64) -> f64 {
        if x <= 0.0 {
            return 0.0;
        }
        // Σ wᵢ (1 - e^{-rᵢx}) keeps precision near the origin
        self.terms.iter().map(|&(w, r)| -w * (-r * x).exp_m1()).sum::<f64>().clamp(0.0, 1.0)
    }

    fn density(&self, x: f64) -> f64 {
        if x < 0.0 {
            return 0.0;
        }
        self.sum(x, |r, e| r * e)
    }

    fn density_derivative(&self, x: f64) -> f64 {
        if x < 0.0 {
            return 0.0;
        }
        -self.sum(x, |r, e| r * r * e)
    }

    fn raw_moment(&self, k: u32) -> Result<f64> {
        Ok(self
            .terms
            .iter()
            .map(|&(w, r)| {
                let mut m = w;
                for i in 1..=k {
                    m *= i as f64 / r;
                }
                m
            })
            .sum())
    }

    fn mgf(&self, s: f64) -> Result<f64> {
        if s >= self.terms[0].1 {
            return Err(Error::Domain(format!("mgf of {} diverges at s = {s}", self.label())));
        }
        Ok(self.terms.iter().map(|&(w, r)| w * r / (r - s)).sum())
    }

    fn to_spec(&self) -> Option<MarginalSpec> {
        Some(MarginalSpec::SignedMixture {
            terms: self.terms.iter().map(|&(w, r)| [w, r]).collect(),
        })
    }
}
