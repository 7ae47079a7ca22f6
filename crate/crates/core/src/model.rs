//! JSON model specifications.
//!
//! ```json
//! {"family": "mo", "parameters": {"lambda1": 1, "lambda2": 2, "lambda12": 3}}
//! {"family": "custom", "theta": 2,
//!  "marginals": [{"type": "lomax", "alpha": 1, "beta": 1},
//!                {"type": "lomax", "alpha": 1, "beta": 1}]}
//! ```

use std::collections::BTreeMap;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::blm::{make_blm, BlmDistribution, ValidationMode};
use crate::error::{Error, Result};
use crate::families::{
    block_basu, freund, generalized_marshall_olkin, marshall_olkin, Family, FreundParams, GmoDistribution, MoParams,
};
use crate::univariate::{
    ExpErlangMixture, Exponential, HazardDefined, Lomax, MarginalRef, SignedExponentialMixture, Weibull,
};

/// A univariate law in a model spec, tagged by `type`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum MarginalSpec {
    Exponential {
        rate: f64,
    },
    Lomax {
        alpha: f64,
        beta: f64,
    },
    Weibull {
        shape: f64,
        scale: f64,
    },
    /// `[weight, rate]` pairs.
    SignedMixture {
        terms: Vec<[f64; 2]>,
    },
    ExpErlang {
        rate: f64,
        weight: f64,
    },
    /// Piecewise-linear hazard through `[x, rate]` points.
    HazardTable {
        points: Vec<[f64; 2]>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        horizon: Option<f64>,
    },
}

impl MarginalSpec {
    pub fn build(&self) -> Result<MarginalRef> {
        Ok(match self {
            MarginalSpec::Exponential { rate } => Arc::new(Exponential::new(*rate)?),
            MarginalSpec::Lomax { alpha, beta } => Arc::new(Lomax::new(*alpha, *beta)?),
            MarginalSpec::Weibull { shape, scale } => Arc::new(Weibull::new(*shape, *scale)?),
            MarginalSpec::SignedMixture { terms } => {
                Arc::new(SignedExponentialMixture::new(terms.iter().map(|t| (t[0], t[1])).collect())?)
            }
            MarginalSpec::ExpErlang { rate, weight } => Arc::new(ExpErlangMixture::new(*rate, *weight)?),
            MarginalSpec::HazardTable { points, horizon } => {
                let horizon = match (horizon, points.last()) {
                    (Some(h), _) => *h,
                    (None, Some(last)) if last[1] > 0.0 && last[1].is_finite() => last[0] + 50.0 / last[1],
                    _ => 1.0,
                };
                Arc::new(HazardDefined::from_table(points.clone(), horizon)?)
            }
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FamilyName {
    Mo,
    BlockBasu,
    Freund,
    Gmo,
    Custom,
}

/// One model per file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSpec {
    pub family: FamilyName,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub parameters: BTreeMap<String, f64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub marginals: Vec<MarginalSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub theta: Option<f64>,
}

/// A built model.
#[derive(Debug, Clone)]
pub enum Model {
    Blm(BlmDistribution),
    Gmo(GmoDistribution),
}

impl Model {
    pub fn survival(&self, x: f64, y: f64) -> f64 {
        match self {
            Model::Blm(d) => d.survival(x, y),
            Model::Gmo(d) => d.survival(x, y),
        }
    }

    pub fn density(&self, x: f64, y: f64) -> Result<f64> {
        match self {
            Model::Blm(d) => d.density(x, y),
            Model::Gmo(d) => d.density(x, y),
        }
    }

    pub fn label(&self) -> String {
        match self {
            Model::Blm(d) => d.label(),
            Model::Gmo(d) => d.label(),
        }
    }

    pub fn as_blm(&self) -> Result<&BlmDistribution> {
        match self {
            Model::Blm(d) => Ok(d),
            Model::Gmo(_) => Err(Error::Unsupported(
                "operation needs a lack-of-memory model; the generalized shock model is not one".into(),
            )),
        }
    }
}

const MO_KEYS: [&str; 3] = ["lambda1", "lambda2", "lambda12"];
const FREUND_KEYS: [&str; 4] = ["alpha", "beta", "alpha_prime", "beta_prime"];

impl ModelSpec {
    /// Parses a spec, reporting JSON and schema errors with line and column.
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text)
            .map_err(|e| Error::Spec(format!("line {} column {}: {}", e.line(), e.column(), strip_position(&e))))
    }

    pub fn from_slice(bytes: &[u8]) -> Result<Self> {
        let text = std::str::from_utf8(bytes).map_err(|e| Error::Spec(format!("not UTF-8: {e}")))?;
        Self::from_json(text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("model specs always serialize")
    }

    fn params<const N: usize>(&self, keys: [&str; N]) -> Result<[f64; N]> {
        if let Some(extra) = self.parameters.keys().find(|k| !keys.contains(&k.as_str())) {
            return Err(Error::Spec(format!("unknown parameter `{extra}` for family {:?}", self.family)));
        }
        let mut out = [0.0; N];
        for (slot, key) in out.iter_mut().zip(keys) {
            *slot = *self
                .parameters
                .get(key)
                .ok_or_else(|| Error::Spec(format!("missing parameter `{key}`")))?;
        }
        Ok(out)
    }

    fn expect_no(&self, what: &str, present: bool) -> Result<()> {
        if present {
            return Err(Error::Spec(format!("family {:?} does not take `{what}`", self.family)));
        }
        Ok(())
    }

    fn marginals<const N: usize>(&self) -> Result<[MarginalRef; N]> {
        if self.marginals.len() != N {
            return Err(Error::Spec(format!(
                "family {:?} needs {N} marginals, got {}",
                self.family,
                self.marginals.len()
            )));
        }
        let built: Vec<MarginalRef> = self.marginals.iter().map(MarginalSpec::build).collect::<Result<_>>()?;
        Ok(built.try_into().expect("length checked"))
    }

    /// Builds the model. `mode` applies to custom lack-of-memory models; the
    /// named families are always constructed strictly.
    pub fn build(&self, mode: ValidationMode) -> Result<Model> {
        match self.family {
            FamilyName::Mo | FamilyName::BlockBasu => {
                self.expect_no("marginals", !self.marginals.is_empty())?;
                self.expect_no("theta", self.theta.is_some())?;
                let [l1, l2, l12] = self.params(MO_KEYS)?;
                Ok(Model::Blm(if self.family == FamilyName::Mo {
                    marshall_olkin(MoParams::new(l1, l2, l12)?)?
                } else {
                    block_basu(l1, l2, l12)?
                }))
            }
            FamilyName::Freund => {
                self.expect_no("marginals", !self.marginals.is_empty())?;
                self.expect_no("theta", self.theta.is_some())?;
                let [a, b, ap, bp] = self.params(FREUND_KEYS)?;
                Ok(Model::Blm(freund(FreundParams::new(a, b, ap, bp)?)?))
            }
            FamilyName::Gmo => {
                self.expect_no("theta", self.theta.is_some())?;
                self.params([])?;
                let [f1, f2, f3] = self.marginals()?;
                Ok(Model::Gmo(generalized_marshall_olkin(f1, f2, f3)?))
            }
            FamilyName::Custom => {
                self.params([])?;
                let theta = self.theta.ok_or_else(|| Error::Spec("custom family needs `theta`".into()))?;
                let [f, g] = self.marginals()?;
                Ok(Model::Blm(make_blm(f, g, theta, mode)?))
            }
        }
    }

    /// Spec reproducing `d`; fails when a marginal has no serializable form.
    pub fn from_blm(d: &BlmDistribution) -> Result<Self> {
        let named = |family, keys: &[&str], values: &[f64]| Self {
            family,
            parameters: keys.iter().map(|k| k.to_string()).zip(values.iter().copied()).collect(),
            marginals: Vec::new(),
            theta: None,
        };
        Ok(match d.family() {
            Family::MarshallOlkin(p) => named(FamilyName::Mo, &MO_KEYS, &[p.lambda1, p.lambda2, p.lambda12]),
            Family::BlockBasu(p) => named(FamilyName::BlockBasu, &MO_KEYS, &[p.lambda1, p.lambda2, p.lambda12]),
            Family::Freund(p) => named(
                FamilyName::Freund,
                &FREUND_KEYS,
                &[p.alpha, p.beta, p.alpha_prime, p.beta_prime],
            ),
            Family::Custom => Self {
                family: FamilyName::Custom,
                parameters: BTreeMap::new(),
                marginals: vec![spec_of(d.marginal_x())?, spec_of(d.marginal_y())?],
                theta: Some(d.theta()),
            },
        })
    }

    pub fn from_gmo(d: &GmoDistribution) -> Result<Self> {
        Ok(Self {
            family: FamilyName::Gmo,
            parameters: BTreeMap::new(),
            marginals: d.shocks().iter().map(spec_of).collect::<Result<_>>()?,
            theta: None,
        })
    }

    pub fn from_model(m: &Model) -> Result<Self> {
        match m {
            Model::Blm(d) => Self::from_blm(d),
            Model::Gmo(d) => Self::from_gmo(d),
        }
    }
}

fn spec_of(m: &MarginalRef) -> Result<MarginalSpec> {
    m.to_spec()
        .ok_or_else(|| Error::Unsupported(format!("marginal {} has no model-spec form", m.label())))
}

/// serde_json appends " at line L column C"; the position is reported
/// separately.
fn strip_position(e: &serde_json::Error) -> String {
    let msg = e.to_string();
    match msg.rfind(" at line ") {
        Some(i) => msg[..i].to_string(),
        None => msg,
    }
}
