//! Named constructors: Marshall–Olkin, Block–Basu, Freund, and the
//! generalized Marshall–Olkin shock model.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::blm::{make_blm, BivariateLaw, BlmDistribution, ValidationMode};
use crate::error::{Error, Result};
use crate::univariate::{
    ExpErlangMixture, Exponential, MarginalRef, MinOfIndependent, SignedExponentialMixture,
};

/// Rates of the three independent shocks of the Marshall–Olkin model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MoParams {
    pub lambda1: f64,
    pub lambda2: f64,
    pub lambda12: f64,
}

impl MoParams {
    pub fn new(lambda1: f64, lambda2: f64, lambda12: f64) -> Result<Self> {
        for (name, v) in [("lambda1", lambda1), ("lambda2", lambda2), ("lambda12", lambda12)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::InvalidParameter(format!("{name} must be positive, got {v}")));
            }
        }
        Ok(Self {
            lambda1,
            lambda2,
            lambda12,
        })
    }

    /// Total rate `λ = λ1 + λ2 + λ12`.
    pub fn lambda(&self) -> f64 {
        self.lambda1 + self.lambda2 + self.lambda12
    }
}

/// Freund's rates: `alpha`, `beta` before the first failure, `alpha_prime`,
/// `beta_prime` for the survivor afterwards.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FreundParams {
    pub alpha: f64,
    pub beta: f64,
    pub alpha_prime: f64,
    pub beta_prime: f64,
}

impl FreundParams {
    pub fn new(alpha: f64, beta: f64, alpha_prime: f64, beta_prime: f64) -> Result<Self> {
        for (name, v) in [
            ("alpha", alpha),
            ("beta", beta),
            ("alpha_prime", alpha_prime),
            ("beta_prime", beta_prime),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::InvalidParameter(format!("{name} must be positive, got {v}")));
            }
        }
        Ok(Self {
            alpha,
            beta,
            alpha_prime,
            beta_prime,
        })
    }

    pub fn theta(&self) -> f64 {
        self.alpha + self.beta
    }
}

/// Which constructor produced a [`BlmDistribution`].
#[derive(Debug, Clone, PartialEq)]
pub enum Family {
    MarshallOlkin(MoParams),
    BlockBasu(MoParams),
    Freund(FreundParams),
    Custom,
}

impl Family {
    pub fn name(&self) -> &'static str {
        match self {
            Family::MarshallOlkin(_) => "mo",
            Family::BlockBasu(_) => "block_basu",
            Family::Freund(_) => "freund",
            Family::Custom => "custom",
        }
    }
}

fn exp(rate: f64) -> Result<MarginalRef> {
    Ok(Arc::new(Exponential::new(rate)?))
}

/// Survival `exp[−λ1 x − λ2 y − λ12 max(x, y)]`: marginals `Exp(λ1+λ12)`,
/// `Exp(λ2+λ12)` and `θ = λ`.
pub fn marshall_olkin(p: MoParams) -> Result<BlmDistribution> {
    let p = MoParams::new(p.lambda1, p.lambda2, p.lambda12)?;
    let d = make_blm(
        exp(p.lambda1 + p.lambda12)?,
        exp(p.lambda2 + p.lambda12)?,
        p.lambda(),
        ValidationMode::Strict,
    )?;
    Ok(d.with_family(Family::MarshallOlkin(p)))
}

/// Absolutely continuous part of Marshall–Olkin. Marginals are the signed
/// mixtures `(λ/(λ1+λ2)) e^{−(λ1+λ12)x} − (λ12/(λ1+λ2)) e^{−λx}`.
pub fn block_basu(lambda1: f64, lambda2: f64, lambda12: f64) -> Result<BlmDistribution> {
    let p = MoParams::new(lambda1, lambda2, lambda12)?;
    let lambda = p.lambda();
    let s = lambda1 + lambda2;
    let margin = |own: f64| -> Result<MarginalRef> {
        Ok(Arc::new(SignedExponentialMixture::new(vec![
            (lambda / s, own + lambda12),
            (-lambda12 / s, lambda),
        ])?))
    };
    let d = make_blm(margin(lambda1)?, margin(lambda2)?, lambda, ValidationMode::Strict)?;
    Ok(d.with_family(Family::BlockBasu(p)))
}

/// Relative distance below which `α + β` and a post-failure rate are treated
/// as equal and the confluent marginal form is used.
const FREUND_CONFLUENT_TOL: f64 = 1e-9;

/// Marginal of Freund's model for the component with initial rate `own`,
/// partner rate `other` and post-failure rate `after`:
/// `other/(θ−after) e^{−after·x} + (own−after)/(θ−after) e^{−θx}`, or
/// `(1 + other·x) e^{−θx}` when `after = θ`.
fn freund_margin(own: f64, other: f64, after: f64) -> Result<MarginalRef> {
    let theta = own + other;
    if (theta - after).abs() <= FREUND_CONFLUENT_TOL * theta {
        return Ok(Arc::new(ExpErlangMixture::new(theta, other / theta)?));
    }
    let gap = theta - after;
    Ok(Arc::new(SignedExponentialMixture::new(vec![
        (other / gap, after),
        ((own - after) / gap, theta),
    ])?))
}

/// Freund's model with `θ = α + β`.
///
/// Every positive parameter set yields a valid law; when `α + β` equals a
/// post-failure rate the corresponding marginal is an exponential/Erlang
/// mixture instead of a two-rate signed mixture.
pub fn freund(p: FreundParams) -> Result<BlmDistribution> {
    let p = FreundParams::new(p.alpha, p.beta, p.alpha_prime, p.beta_prime)?;
    let f = freund_margin(p.alpha, p.beta, p.alpha_prime)?;
    let g = freund_margin(p.beta, p.alpha, p.beta_prime)?;
    let d = make_blm(f, g, p.theta(), ValidationMode::Strict)?;
    Ok(d.with_family(Family::Freund(p)))
}

/// Freund parameters that reproduce `block_basu(λ1, λ2, λ12)`.
pub fn freund_to_block_basu(lambda1: f64, lambda2: f64, lambda12: f64) -> Result<FreundParams> {
    let p = MoParams::new(lambda1, lambda2, lambda12)?;
    let lambda = p.lambda();
    let s = lambda1 + lambda2;
    FreundParams::new(lambda1 * lambda / s, lambda2 * lambda / s, lambda1 + lambda12, lambda2 + lambda12)
}

/// Shock model `(X₁ ∧ X₃, X₂ ∧ X₃)` with independent, arbitrary `X₁, X₂, X₃`:
/// survival `F̄₁(x) F̄₂(y) F̄₃(max(x, y))`.
#[derive(Debug, Clone)]
pub struct GmoDistribution {
    shocks: [MarginalRef; 3],
    margin_x: MarginalRef,
    margin_y: MarginalRef,
}

pub fn generalized_marshall_olkin(f1: MarginalRef, f2: MarginalRef, f3: MarginalRef) -> Result<GmoDistribution> {
    let margin_x: MarginalRef = Arc::new(MinOfIndependent::new(vec![f1.clone(), f3.clone()])?);
    let margin_y: MarginalRef = Arc::new(MinOfIndependent::new(vec![f2.clone(), f3.clone()])?);
    Ok(GmoDistribution {
        shocks: [f1, f2, f3],
        margin_x,
        margin_y,
    })
}

impl GmoDistribution {
    pub fn shocks(&self) -> &[MarginalRef; 3] {
        &self.shocks
    }

    pub fn marginal_x(&self) -> &MarginalRef {
        &self.margin_x
    }

    pub fn marginal_y(&self) -> &MarginalRef {
        &self.margin_y
    }

    pub fn label(&self) -> String {
        let [a, b, c] = &self.shocks;
        format!("GMO({}, {}, {})", a.label(), b.label(), c.label())
    }

    pub fn survival(&self, x: f64, y: f64) -> f64 {
        let (x, y) = (x.max(0.0), y.max(0.0));
        let [a, b, c] = &self.shocks;
        a.survival(x) * b.survival(y) * c.survival(x.max(y))
    }

    /// Joint density off the diagonal: `f_{X}(x) f₂(y)` for `x > y` and
    /// `f₁(x) f_{Y}(y)` for `y > x`.
    pub fn density(&self, x: f64, y: f64) -> Result<f64> {
        if !(x > 0.0 && y > 0.0) || x == y {
            return Err(Error::Domain(format!("GMO density needs positive off-diagonal arguments, got ({x}, {y})")));
        }
        let [a, b, _] = &self.shocks;
        Ok(if x > y {
            self.margin_x.density(x) * b.density(y)
        } else {
            a.density(x) * self.margin_y.density(y)
        })
    }
}

impl BivariateLaw for GmoDistribution {
    fn label(&self) -> String {
        GmoDistribution::label(self)
    }

    fn joint_survival(&self, x: f64, y: f64) -> f64 {
        self.survival(x, y)
    }

    fn margin_x(&self) -> &MarginalRef {
        &self.margin_x
    }

    fn margin_y(&self) -> &MarginalRef {
        &self.margin_y
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::blm::Side;
    use crate::univariate::Weibull;

    #[test]
    fn mo_examples() {
        let d = marshall_olkin(MoParams::new(1.0, 2.0, 3.0).unwrap()).unwrap();
        assert_eq!(d.theta(), 6.0);
        assert!((d.marginal_x().mean().unwrap() - 0.25).abs() < 1e-15);
        let e = (-11.0f64).exp();
        assert!((d.survival(1.0, 2.0) - e).abs() < 1e-14 * e);
        let d = marshall_olkin(MoParams::new(1.0, 1.0, 1.0).unwrap()).unwrap();
        assert!((d.atom_mass() - 1.0 / 3.0).abs() < 1e-15);
        assert_eq!(d.family().name(), "mo");
        assert!(MoParams::new(1.0, 0.0, 1.0).is_err());
        assert!(MoParams::new(1.0, 1.0, f64::NAN).is_err());
    }

    #[test]
    fn mo_matches_shock_survival() {
        let p = MoParams::new(0.7, 1.9, 0.4).unwrap();
        let d = marshall_olkin(p).unwrap();
        for i in 0..15 {
            for j in 0..15 {
                let (x, y) = (i as f64 * 0.21, j as f64 * 0.17);
                let direct = (-p.lambda1 * x - p.lambda2 * y - p.lambda12 * x.max(y)).exp();
                assert!((d.survival(x, y) - direct).abs() < 1e-14);
            }
        }
        let dec = d.decompose();
        assert!((dec.weight_ac - (p.lambda1 + p.lambda2) / p.lambda()).abs() < 1e-15);
        assert!((dec.weight_s - p.lambda12 / p.lambda()).abs() < 1e-15);
    }

    #[test]
    fn block_basu_examples() {
        let d = block_basu(1.0, 1.0, 1.0).unwrap();
        let v = d.density(1.0, 0.5).unwrap();
        assert!((v - 3.0 * (-2.5f64).exp()).abs() < 1e-14);
        for &x in &[0.0, 0.2, 1.0, 4.0] {
            let s = 1.5 * (-2.0 * x as f64).exp() - 0.5 * (-3.0 * x as f64).exp();
            assert!((d.marginal_x().survival(x) - s).abs() < 1e-15);
        }
        assert_eq!(d.atom_mass(), 0.0);
        assert!(block_basu(1.0, -1.0, 1.0).is_err());
    }

    #[test]
    fn block_basu_survival_matches_explicit_display() {
        let (l1, l2, l12) = (2.0, 0.5, 1.3);
        let d = block_basu(l1, l2, l12).unwrap();
        let l = l1 + l2 + l12;
        for i in 0..12 {
            for j in 0..12 {
                let (x, y) = (i as f64 * 0.13, j as f64 * 0.29);
                let m = x.max(y);
                let explicit =
                    l / (l1 + l2) * (-l1 * x - l2 * y - l12 * m).exp() - l12 / (l1 + l2) * (-l * m).exp();
                assert!((d.survival(x, y) - explicit).abs() < 1e-12);
                if x != y && x > 0.0 && y > 0.0 {
                    let dens = if x > y {
                        l2 * l * (l1 + l12) / (l1 + l2) * (-(l1 + l12) * x - l2 * y).exp()
                    } else {
                        l1 * l * (l2 + l12) / (l1 + l2) * (-l1 * x - (l2 + l12) * y).exp()
                    };
                    assert!((d.density(x, y).unwrap() - dens).abs() < 1e-12 * dens);
                }
            }
        }
    }

    #[test]
    fn freund_examples() {
        let f = freund(FreundParams::new(1.5, 1.5, 2.0, 2.0).unwrap()).unwrap();
        let bb = block_basu(1.0, 1.0, 1.0).unwrap();
        for &(x, y) in &[(1.0, 0.5), (0.3, 2.0), (0.01, 0.02)] {
            let a = f.density(x, y).unwrap();
            let b = bb.density(x, y).unwrap();
            assert!((a - b).abs() < 1e-13 * b);
        }
        let f = freund(FreundParams::new(0.8, 1.7, 0.6, 3.1).unwrap()).unwrap();
        for &t in &[0.0, 0.4, 2.0] {
            assert!((f.survival(t, t) - (-2.5 * t as f64).exp()).abs() < 1e-14);
        }
        let unit = freund(FreundParams::new(1.0, 1.0, 1.0, 1.0).unwrap()).unwrap();
        for &x in &[0.0, 0.5, 3.0] {
            assert!((unit.marginal_x().survival(x) - (-x as f64).exp()).abs() < 1e-15);
        }
    }

    #[test]
    fn freund_density_matches_explicit_form() {
        let (a, b, ap, bp) = (0.9, 1.4, 3.0, 0.5);
        let d = freund(FreundParams::new(a, b, ap, bp).unwrap()).unwrap();
        for &(x, y) in &[(1.0, 0.5), (0.2, 1.1), (3.0, 0.1), (0.05, 2.5)] {
            let explicit: f64 = if x > y {
                ap * b * (-(a + b - ap) * y - ap * x).exp()
            } else {
                a * bp * (-(a + b - bp) * x - bp * y).exp()
            };
            let v = d.density(x, y).unwrap();
            assert!((v - explicit).abs() < 1e-12 * explicit, "({x}, {y}): {v} vs {explicit}");
        }
    }

    #[test]
    fn freund_confluent_regime() {
        // α + β = α′ = β′: marginal (1 + x) e^{−2x}
        let d = freund(FreundParams::new(1.0, 1.0, 2.0, 2.0).unwrap()).unwrap();
        for &x in &[0.0, 0.5, 2.0] {
            let s = (1.0 + x) * (-2.0 * x as f64).exp();
            assert!((d.marginal_x().survival(x) - s).abs() < 1e-15);
        }
        let v = d.density(1.0, 0.25).unwrap();
        let explicit = 2.0 * (-(0.0) * 0.25 - 2.0 * 1.0f64).exp();
        assert!((v - explicit).abs() < 1e-12 * explicit);
        assert_eq!(d.atom_mass(), 0.0);
        // just off the boundary the two forms agree closely
        let near = freund(FreundParams::new(1.0, 1.0, 2.0 + 1e-6, 2.0).unwrap()).unwrap();
        assert!((near.survival(0.7, 0.2) - d.survival(0.7, 0.2)).abs() < 1e-5);
        // post-failure rates above θ
        let above = freund(FreundParams::new(1.0, 1.0, 5.0, 4.0).unwrap()).unwrap();
        assert!(above.validation().passed);
        let p = above.diff_tail(0.0, Side::XMinusY).unwrap() + above.diff_tail(0.0, Side::YMinusX).unwrap();
        assert!((p - 1.0).abs() < 1e-12);
    }

    #[test]
    fn reduction_parameters() {
        let p = freund_to_block_basu(1.0, 1.0, 1.0).unwrap();
        assert_eq!((p.alpha, p.beta, p.alpha_prime, p.beta_prime), (1.5, 1.5, 2.0, 2.0));
        let p = freund_to_block_basu(1.0, 2.0, 3.0).unwrap();
        assert_eq!((p.alpha, p.beta, p.alpha_prime, p.beta_prime), (2.0, 4.0, 4.0, 5.0));
    }

    #[test]
    fn gmo_examples() {
        let e: MarginalRef = Arc::new(Exponential::new(1.0).unwrap());
        let g = generalized_marshall_olkin(e.clone(), e.clone(), e.clone()).unwrap();
        let mo = marshall_olkin(MoParams::new(1.0, 1.0, 1.0).unwrap()).unwrap();
        for &(x, y) in &[(0.3, 1.2), (2.0, 0.5), (1.0, 1.0)] {
            assert!((g.survival(x, y) - mo.survival(x, y)).abs() < 1e-15);
            let xy = (-x - y - f64::max(x, y)).exp();
            assert!((g.survival(x, y) - xy).abs() < 1e-15);
        }
        assert!((g.survival(0.8, 0.0) - (-1.6f64).exp()).abs() < 1e-15);
        let w: MarginalRef = Arc::new(Weibull::new(2.0, 1.0).unwrap());
        let g = generalized_marshall_olkin(e.clone(), e, w).unwrap();
        assert!((g.survival(1.0, 1.0) - (-3.0f64).exp()).abs() < 1e-15);
        assert!((g.marginal_x().survival(1.0) - (-2.0f64).exp()).abs() < 1e-15);
        let fd = crate::numdiff::mixed(&|x, y| g.survival(x, y), 1.5, 0.5);
        assert!((g.density(1.5, 0.5).unwrap() - fd).abs() < 1e-7);
        assert!(g.density(1.0, 1.0).is_err());
    }
}
