use crate::error::{Error, Result};
use crate::model::MarginalSpec;

use super::Marginal;

/// Mixture of `Exp(rate)` (weight `1 - w`) and `Erlang(2, rate)` (weight `w`):
/// survival `e^{-rate·x} (1 + w·rate·x)`.
///
/// This is the marginal of the Freund model on the boundary where the
/// post-failure rate equals the total initial rate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExpErlangMixture {
    rate: f64,
    weight: f64,
}

impl ExpErlangMixture {
    pub fn new(rate: f64, weight: f64) -> Result<Self> {
        if !(rate > 0.0 && rate.is_finite()) || !(0.0..=1.0).contains(&weight) {
            return Err(Error::InvalidParameter(format!(
                "exp/erlang mixture needs rate > 0 and weight in [0, 1], got ({rate}, {weight})"
            )));
        }
        Ok(Self { rate, weight })
    }
}

impl Marginal for ExpErlangMixture {
    fn label(&self) -> String {
        format!("ExpErlang({}, {})", self.rate, self.weight)
    }

    fn survival(&self, x: f64) -> f64 {
        if x <= 0.0 {
            return 1.0;
        }
        (-self.rate * x).exp() * (1.0 + self.weight * self.rate * x)
    }

    fn density(&self, x: f64) -> f64 {
        if x < 0.0 {
            return 0.0;
        }
        let (r, w) = (self.rate, self.weight);
        r * (-r * x).exp() * (1.0 - w + w * r * x)
    }

    fn density_derivative(&self, x: f64) -> f64 {
        if x < 0.0 {
            return 0.0;
        }
        let (r, w) = (self.rate, self.weight);
        r * r * (-r * x).exp() * (2.0 * w - 1.0 - w * r * x)
    }

    fn cumulative_hazard(&self, x: f64) -> f64 {
        let x = x.max(0.0);
        self.rate * x - (self.weight * self.rate * x).ln_1p()
    }

    fn raw_moment(&self, k: u32) -> Result<f64> {
        let mut fact = 1.0;
        for i in 1..=k {
            fact *= i as f64 / self.rate;
        }
        Ok(fact * (1.0 - self.weight + self.weight * (k as f64 + 1.0)))
    }

    fn mgf(&self, s: f64) -> Result<f64> {
        if s >= self.rate {
            return Err(Error::Domain(format!("mgf of {} diverges at s = {s}", self.label())));
        }
        let q = self.rate / (self.rate - s);
        Ok((1.0 - self.weight) * q + self.weight * q * q)
    }

    fn to_spec(&self) -> Option<MarginalSpec> {
        Some(MarginalSpec::ExpErlang {
            rate: self.rate,
            weight: self.weight,
        })
    }
}
