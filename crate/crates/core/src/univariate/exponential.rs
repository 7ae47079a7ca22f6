use crate::error::{Error, Result};
use crate::model::MarginalSpec;

use super::{check_probability, Marginal};

/// Exponential law with constant hazard `rate`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Exponential {
    rate: f64,
}

impl Exponential {
    pub fn new(rate: f64) -> Result<Self> {
        if !(rate > 0.0 && rate.is_finite()) {
            return Err(Error::InvalidParameter(format!("exponential rate must be positive, got {rate}")));
        }
        Ok(Self { rate })
    }

    pub fn rate(&self) -> f64 {
        self.rate
    }
}

impl Marginal for Exponential {
    fn label(&self) -> String {
        format!("Exp({})", self.rate)
    }

    fn survival(&self, x: f64) -> f64 {
        if x <= 0.0 {
            1.0
        } else {
            (-self.rate * x).exp()
        }
    }

    fn cdf(&self, x: f64) -> f64 {
        if x <= 0.0 {
            0.0
        } else {
            -(-self.rate * x).exp_m1()
        }
    }

    fn density(&self, x: f64) -> f64 {
        if x < 0.0 {
            0.0
        } else {
            self.rate * (-self.rate * x).exp()
        }
    }

    fn density_derivative(&self, x: f64) -> f64 {
        if x < 0.0 {
            0.0
        } else {
            -self.rate * self.rate * (-self.rate * x).exp()
        }
    }

    fn cumulative_hazard(&self, x: f64) -> f64 {
        self.rate * x.max(0.0)
    }

    fn hazard(&self, x: f64) -> Result<f64> {
        if self.survival(x) <= 1e-300 {
            return Err(Error::Domain(format!("hazard of {} undefined at x = {x}", self.label())));
        }
        Ok(self.rate)
    }

    fn quantile(&self, p: f64) -> Result<f64> {
        check_probability(p)?;
        Ok(-(-p).ln_1p() / self.rate)
    }

    fn inverse_survival(&self, q: f64) -> Result<f64> {
        if !(q > 0.0 && q <= 1.0) {
            return Err(Error::Domain(format!("survival level {q} outside (0, 1]")));
        }
        Ok(-q.ln() / self.rate)
    }

    fn raw_moment(&self, k: u32) -> Result<f64> {
        let mut m = 1.0;
        for i in 1..=k {
            m *= i as f64 / self.rate;
        }
        Ok(m)
    }

    fn mgf(&self, s: f64) -> Result<f64> {
        if s >= self.rate {
            return Err(Error::Domain(format!("mgf of {} diverges at s = {s}", self.label())));
        }
        Ok(self.rate / (self.rate - s))
    }

    fn to_spec(&self) -> Option<MarginalSpec> {
        Some(MarginalSpec::Exponential { rate: self.rate })
    }
}
