//! The bivariate lack-of-memory distribution `BLM(F, G, θ)`.
//!
//! For marginals `F`, `G` and a diagonal rate `θ`, the joint survival is
//!
//! ```text
//! H̄(x, y) = e^{-θy} F̄(x - y)   for x ≥ y
//!          = e^{-θx} Ḡ(y - x)   for y ≥ x
//! ```
//!
//! which is the general solution of `H̄(x+t, y+t) = H̄(x, y)·H̄(t, t)`.
//! Construction runs the structural checks that any such law must pass and
//! records them in a [`ValidationReport`].

use std::sync::Arc;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::families::Family;
use crate::report::validation_points;
use crate::univariate::{HazardDefined, HazardFn, Marginal, MarginalRef};

/// Analytic identities hold to this relative accuracy.
pub const ANALYTIC_TOL: f64 = 1e-12;
/// Pointwise nonnegativity checks allow this much rounding.
pub const SIGN_TOL: f64 = 1e-10;
/// Points in the validation grid.
pub const VALIDATION_POINTS: usize = 512;

/// Whether construction rejects a distribution that fails a check.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ValidationMode {
    #[default]
    Strict,
    Permissive,
}

/// Which difference `X − Y` or `Y − X` a tail probability refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Side {
    XMinusY,
    YMinusX,
}

/// One structural check and its outcome.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    /// Grid point where the margin is smallest, when the check is pointwise.
    pub witness: Option<f64>,
    /// Smallest normalized margin; negative means violated.
    pub margin: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ValidationReport {
    pub passed: bool,
    pub checks: Vec<Check>,
}

impl ValidationReport {
    fn from_checks(checks: Vec<Check>) -> Self {
        Self {
            passed: checks.iter().all(|c| c.passed),
            checks,
        }
    }

    pub fn first_failure(&self) -> Option<&Check> {
        self.checks.iter().find(|c| !c.passed)
    }

    pub fn check(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }
}

/// Names of the construction checks.
pub mod checks {
    /// `max(f(0), g(0)) ≤ θ ≤ f(0) + g(0)`.
    pub const THETA_BOUNDS: &str = "theta_bounds";
    /// `θ f + f' ≥ 0` and `θ g + g' ≥ 0`.
    pub const GAP_DENSITY_NONNEGATIVE: &str = "gap_density_nonnegative";
    /// `e^{θx} f(x)` and `e^{θx} g(x)` nondecreasing.
    pub const TILTED_DENSITY_MONOTONE: &str = "tilted_density_monotone";
    /// `F(x) + G(x) ≥ 1 − e^{−θx}`.
    pub const CDF_SUM_BOUND: &str = "cdf_sum_bound";
}

/// Tracks the smallest margin of a pointwise check.
struct PointwiseCheck {
    name: &'static str,
    margin: f64,
    witness: Option<f64>,
    tol: f64,
}

impl PointwiseCheck {
    fn new(name: &'static str, tol: f64) -> Self {
        Self {
            name,
            margin: f64::INFINITY,
            witness: None,
            tol,
        }
    }

    fn record(&mut self, x: f64, margin: f64) {
        if margin < self.margin || margin.is_nan() {
            self.margin = margin;
            self.witness = Some(x);
        }
    }

    fn finish(self) -> Check {
        Check {
            name: self.name.to_string(),
            passed: self.margin >= -self.tol,
            witness: self.witness,
            margin: if self.margin.is_finite() { self.margin } else { 0.0 },
        }
    }
}

/// Anything with a joint survival function and two marginals.
pub trait BivariateLaw: Send + Sync {
    fn label(&self) -> String;
    fn joint_survival(&self, x: f64, y: f64) -> f64;
    fn margin_x(&self) -> &MarginalRef;
    fn margin_y(&self) -> &MarginalRef;
}

impl BivariateLaw for BlmDistribution {
    fn label(&self) -> String {
        BlmDistribution::label(self)
    }

    fn joint_survival(&self, x: f64, y: f64) -> f64 {
        self.survival(x, y)
    }

    fn margin_x(&self) -> &MarginalRef {
        &self.f
    }

    fn margin_y(&self) -> &MarginalRef {
        &self.g
    }
}

/// A validated bivariate lack-of-memory distribution.
#[derive(Debug, Clone)]
pub struct BlmDistribution {
    f: MarginalRef,
    g: MarginalRef,
    theta: f64,
    report: ValidationReport,
    family: Family,
}

impl BlmDistribution {
    pub fn new(f: MarginalRef, g: MarginalRef, theta: f64, mode: ValidationMode) -> Result<Self> {
        make_blm(f, g, theta, mode)
    }

    pub(crate) fn with_family(mut self, family: Family) -> Self {
        self.family = family;
        self
    }

    pub fn family(&self) -> &Family {
        &self.family
    }

    pub fn marginal_x(&self) -> &MarginalRef {
        &self.f
    }

    pub fn marginal_y(&self) -> &MarginalRef {
        &self.g
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn validation(&self) -> &ValidationReport {
        &self.report
    }

    pub fn label(&self) -> String {
        format!("BLM({}, {}, {})", self.f.label(), self.g.label(), self.theta)
    }

    /// Joint survival `P(X > x, Y > y)`; negative arguments are treated as 0.
    pub fn survival(&self, x: f64, y: f64) -> f64 {
        let (x, y) = (x.max(0.0), y.max(0.0));
        if x >= y {
            (-self.theta * y).exp() * self.f.survival(x - y)
        } else {
            (-self.theta * x).exp() * self.g.survival(y - x)
        }
    }

    /// Joint cdf `P(X ≤ x, Y ≤ y)`.
    pub fn cdf(&self, x: f64, y: f64) -> f64 {
        1.0 - self.f.survival(x) - self.g.survival(y) + self.survival(x, y)
    }

    /// `θ f(u) + f'(u)` (for `XMinusY`) or `θ g(u) + g'(u)`: the joint density
    /// at distance `u` off the diagonal, up to the factor `e^{-θ·min(x, y)}`.
    pub fn gap_density(&self, side: Side, u: f64) -> f64 {
        let m = self.marginal(side);
        self.theta * m.density(u) + m.density_derivative(u)
    }

    fn marginal(&self, side: Side) -> &MarginalRef {
        match side {
            Side::XMinusY => &self.f,
            Side::YMinusX => &self.g,
        }
    }

    /// Joint density off the diagonal.
    ///
    /// The diagonal carries a singular component (see [`Self::atom_mass`])
    /// and is rejected with a domain error.
    pub fn density(&self, x: f64, y: f64) -> Result<f64> {
        if !(x > 0.0 && y > 0.0) {
            return Err(Error::Domain(format!("density needs positive arguments, got ({x}, {y})")));
        }
        if x == y {
            return Err(Error::Domain(format!(
                "({x}, {y}) lies on the diagonal, where the law has an atom of mass {}; use atom_mass",
                self.atom_mass()
            )));
        }
        Ok(if x > y {
            (-self.theta * y).exp() * self.gap_density(Side::XMinusY, x - y)
        } else {
            (-self.theta * x).exp() * self.gap_density(Side::YMinusX, y - x)
        })
    }

    /// `P(X = Y) = (f(0) + g(0))/θ − 1`.
    pub fn atom_mass(&self) -> f64 {
        let raw = (self.f.density(0.0) + self.g.density(0.0)) / self.theta - 1.0;
        if raw.abs() < ANALYTIC_TOL {
            0.0
        } else if (raw - 1.0).abs() < ANALYTIC_TOL {
            1.0
        } else {
            raw.clamp(0.0, 1.0)
        }
    }

    /// `P(X − Y > t) = F̄(t) − f(t)/θ` (or the mirror for `Y − X`).
    pub fn diff_tail(&self, t: f64, side: Side) -> Result<f64> {
        if !(t >= 0.0) {
            return Err(Error::Domain(format!("diff_tail needs t >= 0, got {t}")));
        }
        let v = self.raw_diff_tail(t, side);
        if v < -ANALYTIC_TOL {
            return Err(Error::Consistency(format!(
                "P(difference > {t}) = {v} < 0: {} is not a valid distribution",
                self.label()
            )));
        }
        Ok(v.clamp(0.0, 1.0))
    }

    pub(crate) fn raw_diff_tail(&self, t: f64, side: Side) -> f64 {
        let m = self.marginal(side);
        m.survival(t) - m.density(t) / self.theta
    }

    /// Splits the law into its absolutely continuous and singular parts.
    pub fn decompose(&self) -> BlmDecomposition {
        let sum = (self.f.density(0.0) + self.g.density(0.0)) / self.theta;
        let weight_s = self.atom_mass();
        let mut weight_ac = 2.0 - sum;
        if (weight_ac - (1.0 - weight_s)).abs() < ANALYTIC_TOL {
            weight_ac = 1.0 - weight_s;
        }
        BlmDecomposition {
            weight_ac: weight_ac.clamp(0.0, 1.0),
            weight_s,
            parent: self.clone(),
        }
    }
}

/// Convex split `H̄ = w_ac·H̄ₐ + w_s·H̄ₛ` with `H̄ₛ(x, y) = e^{-θ max(x, y)}`.
#[derive(Debug, Clone)]
pub struct BlmDecomposition {
    pub weight_ac: f64,
    pub weight_s: f64,
    parent: BlmDistribution,
}

impl BlmDecomposition {
    pub fn singular_survival(&self, x: f64, y: f64) -> f64 {
        (-self.parent.theta * x.max(y).max(0.0)).exp()
    }

    /// Survival of the absolutely continuous part; `None` when the law is
    /// purely singular and that part does not exist.
    pub fn ac_survival(&self, x: f64, y: f64) -> Option<f64> {
        if self.weight_ac <= ANALYTIC_TOL {
            return None;
        }
        Some((self.parent.survival(x, y) - self.weight_s * self.singular_survival(x, y)) / self.weight_ac)
    }

    pub fn has_ac_part(&self) -> bool {
        self.weight_ac > ANALYTIC_TOL
    }

    /// `w_ac·H̄ₐ + w_s·H̄ₛ`.
    pub fn reconstruct(&self, x: f64, y: f64) -> f64 {
        let ac = self.ac_survival(x, y).unwrap_or(0.0);
        self.weight_ac * ac + self.weight_s * self.singular_survival(x, y)
    }
}

/// Builds `BLM(F, G, θ)` and runs the construction checks on a geometric
/// grid of 512 points over `[0, 40/θ]`.
///
/// In strict mode the first failed check becomes a validation error naming
/// it; in permissive mode the distribution is returned with the failing
/// report attached.
pub fn make_blm(f: MarginalRef, g: MarginalRef, theta: f64, mode: ValidationMode) -> Result<BlmDistribution> {
    if !(theta > 0.0 && theta.is_finite()) {
        return Err(Error::InvalidParameter(format!("theta must be positive, got {theta}")));
    }
    let report = validate(&*f, &*g, theta);
    if mode == ValidationMode::Strict {
        if let Some(c) = report.first_failure() {
            return Err(Error::Validation {
                clause: c.name.clone(),
                detail: describe_failure(c, &*f, &*g, theta),
            });
        }
    }
    Ok(BlmDistribution {
        f,
        g,
        theta,
        report,
        family: Family::Custom,
    })
}

fn describe_failure(c: &Check, f: &dyn Marginal, g: &dyn Marginal, theta: f64) -> String {
    match c.name.as_str() {
        checks::THETA_BOUNDS => format!(
            "need max(f(0), g(0)) <= theta <= f(0) + g(0); f(0) = {}, g(0) = {}, theta = {theta}",
            f.density(0.0),
            g.density(0.0)
        ),
        _ => format!("margin {:e} at x = {:?}", c.margin, c.witness),
    }
}

fn validate(f: &dyn Marginal, g: &dyn Marginal, theta: f64) -> ValidationReport {
    let f0 = f.density(0.0);
    let g0 = g.density(0.0);
    let bounds_margin = (theta - f0.max(g0)).min(f0 + g0 - theta) / theta;
    let bounds = Check {
        name: checks::THETA_BOUNDS.into(),
        passed: bounds_margin >= -ANALYTIC_TOL,
        witness: None,
        margin: bounds_margin,
    };

    let grid = validation_points(40.0 / theta, VALIDATION_POINTS);
    let mut gap = PointwiseCheck::new(checks::GAP_DENSITY_NONNEGATIVE, SIGN_TOL);
    let mut tilted = PointwiseCheck::new(checks::TILTED_DENSITY_MONOTONE, SIGN_TOL);
    let mut cdf_sum = PointwiseCheck::new(checks::CDF_SUM_BOUND, ANALYTIC_TOL);
    for m in [f, g] {
        let scale = theta * m.density(0.0).abs().max(theta);
        let mut prev: Option<(f64, f64)> = None;
        for &x in &grid {
            let fx = m.density(x);
            gap.record(x, (theta * fx + m.density_derivative(x)) / scale);
            let t = (theta * x).exp() * fx;
            if let Some((_, tp)) = prev {
                tilted.record(x, (t - tp) / t.abs().max(tp.abs()).max(1e-300));
            }
            prev = Some((x, t));
        }
    }
    for &x in &grid {
        let lhs = f.cdf(x) + g.cdf(x);
        let rhs = -(-theta * x).exp_m1();
        cdf_sum.record(x, lhs - rhs);
    }
    ValidationReport::from_checks(vec![bounds, gap.finish(), tilted.finish(), cdf_sum.finish()])
}

/// Admissibility conditions of a hazard-rate construction, by letter.
pub mod hazard_conditions {
    pub const ABSOLUTELY_CONTINUOUS: (char, &str) = ('a', "hazard_regular");
    pub const BOUNDED_BY_THETA: (char, &str) = ('b', "hazard_bounded_by_theta");
    pub const DIVERGENT_INTEGRAL: (char, &str) = ('c', "hazard_integral_diverges");
    pub const SHIFTED_RICCATI: (char, &str) = ('d', "hazard_riccati_nonnegative");
    pub const ORIGIN_SUM: (char, &str) = ('e', "hazard_sum_at_origin");
}

/// Survival at `HAZARD_HORIZON_FACTOR / θ` must fall below this floor.
pub const HAZARD_TAIL_FLOOR: f64 = 1e-3;
pub const HAZARD_HORIZON_FACTOR: f64 = 1e4;

/// Builds a BLM from two marginal hazard rates and `θ`.
///
/// The conditions checked on the validation grid are: finite hazards and
/// `θ > 0` (a), `0 ≤ rᵢ ≤ θ` (b), survival decayed below
/// [`HAZARD_TAIL_FLOOR`] by `10⁴/θ` (c), `rᵢ(θ − rᵢ) + rᵢ' ≥ 0` (d) and
/// `r₁(0) + r₂(0) ≥ θ` (e). The first failure is reported by letter.
pub fn from_hazards(r1: HazardFn, r2: HazardFn, theta: f64) -> Result<BlmDistribution> {
    use hazard_conditions::*;
    let fail = |(letter, name): (char, &'static str), detail: String| Error::HazardCondition {
        condition: letter,
        name,
        detail,
    };
    if !(theta > 0.0 && theta.is_finite()) {
        return Err(fail(ABSOLUTELY_CONTINUOUS, format!("theta = {theta} must be positive")));
    }
    let grid = validation_points(40.0 / theta, VALIDATION_POINTS);
    for (i, r) in [&r1, &r2].into_iter().enumerate() {
        for &x in &grid {
            if !r(x).is_finite() {
                return Err(fail(ABSOLUTELY_CONTINUOUS, format!("r{}({x}) is not finite", i + 1)));
            }
        }
    }
    for (i, r) in [&r1, &r2].into_iter().enumerate() {
        for &x in &grid {
            let v = r(x);
            if v < -SIGN_TOL || v > theta * (1.0 + ANALYTIC_TOL) {
                return Err(fail(BOUNDED_BY_THETA, format!("r{}({x}) = {v} outside [0, {theta}]", i + 1)));
            }
        }
    }
    let horizon = HAZARD_HORIZON_FACTOR / theta;
    let mut marginals = Vec::with_capacity(2);
    for (i, r) in [&r1, &r2].into_iter().enumerate() {
        let m = HazardDefined::new(format!("hazard_r{}", i + 1), r.clone(), horizon)?;
        let tail = m.survival(horizon);
        if tail > HAZARD_TAIL_FLOOR {
            return Err(fail(
                DIVERGENT_INTEGRAL,
                format!("survival of r{} is still {tail} at {horizon}; hazard looks integrable", i + 1),
            ));
        }
        marginals.push(m);
    }
    for (i, m) in marginals.iter().enumerate() {
        for &x in &grid {
            let r = m.rate_at(x);
            let v = r * (theta - r) + m.rate_derivative(x);
            if v < -SIGN_TOL * theta * theta {
                return Err(fail(SHIFTED_RICCATI, format!("r{0}(θ − r{0}) + r{0}' = {v} at x = {x}", i + 1)));
            }
        }
    }
    let origin = r1(0.0) + r2(0.0);
    if origin < theta * (1.0 - ANALYTIC_TOL) {
        return Err(fail(ORIGIN_SUM, format!("r1(0) + r2(0) = {origin} < theta = {theta}")));
    }
    let g = marginals.pop().expect("two marginals");
    let f = marginals.pop().expect("two marginals");
    make_blm(Arc::new(f), Arc::new(g), theta, ValidationMode::Strict)
}
