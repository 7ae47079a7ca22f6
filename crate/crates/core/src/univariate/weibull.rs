use statrs::function::gamma::gamma;

use crate::error::{Error, Result};
use crate::model::MarginalSpec;

use super::{check_probability, Marginal};

/// Weibull law: cumulative hazard `(x / scale)^shape`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Weibull {
    shape: f64,
    scale: f64,
}

impl Weibull {
    pub fn new(shape: f64, scale: f64) -> Result<Self> {
        if !(shape > 0.0 && shape.is_finite() && scale > 0.0 && scale.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "weibull needs positive shape and scale, got ({shape}, {scale})"
            )));
        }
        Ok(Self { shape, scale })
    }
}

impl Marginal for Weibull {
    fn label(&self) -> String {
        format!("Weibull({}, {})", self.shape, self.scale)
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
        let z = x / self.scale;
        self.shape / self.scale * z.powf(self.shape - 1.0) * self.survival(x)
    }

    fn density_derivative(&self, x: f64) -> f64 {
        if x < 0.0 {
            return 0.0;
        }
        let (k, l) = (self.shape, self.scale);
        if k == 1.0 {
            return -self.density(x) / l;
        }
        let z = x / l;
        self.survival(x) * k / (l * l) * ((k - 1.0) * z.powf(k - 2.0) - k * z.powf(2.0 * k - 2.0))
    }

    fn cumulative_hazard(&self, x: f64) -> f64 {
        (x.max(0.0) / self.scale).powf(self.shape)
    }

    fn quantile(&self, p: f64) -> Result<f64> {
        check_probability(p)?;
        Ok(self.scale * (-(-p).ln_1p()).powf(1.0 / self.shape))
    }

    fn inverse_survival(&self, q: f64) -> Result<f64> {
        if !(q > 0.0 && q <= 1.0) {
            return Err(Error::Domain(format!("survival level {q} outside (0, 1]")));
        }
        Ok(self.scale * (-q.ln()).powf(1.0 / self.shape))
    }

    fn raw_moment(&self, k: u32) -> Result<f64> {
        Ok(self.scale.powi(k as i32) * gamma(1.0 + k as f64 / self.shape))
    }

    fn to_spec(&self) -> Option<MarginalSpec> {
        Some(MarginalSpec::Weibull {
            shape: self.shape,
            scale: self.scale,
        })
    }
}
