//! Stochastic-order comparisons on grids.
//!
//! Each comparison reduces to a set of margins (nonnegative when the order
//! holds at that configuration). A margin below `−NO_TOL` is a violation;
//! margins between `−NO_TOL` and `−YES_TOL` cannot be separated from
//! rounding and make the verdict inconclusive.

use serde::Serialize;

use crate::blm::{BivariateLaw, BlmDistribution};
use crate::error::{Error, Result};
use crate::moments::{lst, pearson_correlation};
use crate::report::{geometric_points, Grid};
use crate::univariate::{aging_class, AgingClass, Exponential, Marginal};

/// Margins at or above `−YES_TOL` count as holding (ties included).
pub const YES_TOL: f64 = 1e-12;
/// Margins below `−NO_TOL` are violations.
pub const NO_TOL: f64 = 1e-9;
/// Points per axis of the transform grid for the Laplace-transform order.
pub const LT_GRID_POINTS: usize = 8;
/// Marginal survival functions are considered equal within this distance.
pub const MARGIN_MATCH_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Relation {
    St,
    Hr,
    Rh,
    Lr,
    Uo,
    Concordance,
    Lt,
    Slepian,
    BivariateIfra,
    BivariateDfra,
}

impl Relation {
    pub fn name(self) -> &'static str {
        match self {
            Relation::St => "st",
            Relation::Hr => "hr",
            Relation::Rh => "rh",
            Relation::Lr => "lr",
            Relation::Uo => "uo",
            Relation::Concordance => "concordance",
            Relation::Lt => "lt",
            Relation::Slepian => "slepian",
            Relation::BivariateIfra => "bivariate_ifra",
            Relation::BivariateDfra => "bivariate_dfra",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Holds {
    Yes,
    No,
    Inconclusive,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OrderVerdict {
    pub relation: Relation,
    pub holds: Holds,
    /// Smallest margin over the tested configurations.
    pub worst_margin: f64,
    /// Configuration achieving the worst margin.
    pub witness: Vec<f64>,
    pub configurations_tested: usize,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
}

impl OrderVerdict {
    pub fn holds(&self) -> bool {
        self.holds == Holds::Yes
    }
}

/// Running minimum of margins for one relation.
struct Scan {
    relation: Relation,
    worst: f64,
    witness: Vec<f64>,
    count: usize,
    notes: Vec<String>,
}

impl Scan {
    fn new(relation: Relation) -> Self {
        Self {
            relation,
            worst: f64::INFINITY,
            witness: Vec::new(),
            count: 0,
            notes: Vec::new(),
        }
    }

    fn record(&mut self, margin: f64, witness: &[f64]) {
        self.count += 1;
        if margin < self.worst || margin.is_nan() || self.witness.is_empty() {
            self.worst = margin;
            self.witness = witness.to_vec();
        }
    }

    fn finish(self) -> OrderVerdict {
        let worst = if self.count == 0 { 0.0 } else { self.worst };
        let holds = if worst.is_nan() || worst < -NO_TOL {
            Holds::No
        } else if worst < -YES_TOL {
            Holds::Inconclusive
        } else {
            Holds::Yes
        };
        let mut notes = self.notes;
        if self.count == 0 {
            notes.push("no evaluable configurations".into());
        }
        OrderVerdict {
            relation: self.relation,
            holds,
            worst_margin: worst,
            witness: self.witness,
            configurations_tested: self.count,
            notes,
        }
    }
}

fn relative(diff: f64, a: f64, b: f64) -> f64 {
    let scale = a.abs().max(b.abs());
    if scale > 0.0 {
        diff / scale
    } else {
        0.0
    }
}

fn check_grid(grid: &[f64]) -> Result<()> {
    if grid.len() < 2 || grid.windows(2).any(|w| !(w[1] > w[0])) || grid.iter().any(|x| !x.is_finite()) {
        return Err(Error::InvalidParameter("order grid needs at least 2 strictly increasing finite points".into()));
    }
    Ok(())
}

/// Tests `a ≤ b` in the given univariate order on a grid.
///
/// `st` compares survivals pointwise; `hr`, `rh` and `lr` require the ratio
/// of survivals, cdfs or densities (`b` over `a`) to be nondecreasing over
/// consecutive grid points. Points with a zero denominator are skipped and
/// noted.
pub fn univariate_order(a: &dyn Marginal, b: &dyn Marginal, relation: Relation, grid: &[f64]) -> Result<OrderVerdict> {
    check_grid(grid)?;
    let mut scan = Scan::new(relation);
    if relation == Relation::St {
        for &x in grid {
            let (sa, sb) = (a.survival(x), b.survival(x));
            scan.record(relative(sb - sa, sa, sb), &[x]);
        }
        return Ok(scan.finish());
    }
    let value: fn(&dyn Marginal, f64) -> f64 = match relation {
        Relation::Hr => |m, x| m.survival(x),
        Relation::Rh => |m, x| m.cdf(x),
        Relation::Lr => |m, x| m.density(x),
        other => {
            return Err(Error::InvalidParameter(format!(
                "{} is not a univariate order",
                other.name()
            )))
        }
    };
    let mut ratios = Vec::with_capacity(grid.len());
    let mut skipped = 0;
    for &x in grid {
        let den = value(a, x);
        if den > 0.0 {
            ratios.push((x, value(b, x) / den));
        } else {
            skipped += 1;
        }
    }
    for w in ratios.windows(2) {
        let ((x0, r0), (x1, r1)) = (w[0], w[1]);
        scan.record(relative(r1 - r0, r0, r1), &[x0, x1]);
    }
    if skipped > 0 {
        scan.notes.push(format!("{skipped} grid points skipped: zero denominator"));
    }
    Ok(scan.finish())
}

/// `Exp(θ) ≤lr F` and `Exp(θ) ≤lr G`: the exponential law of the minimum is
/// dominated by both marginals in likelihood ratio.
pub fn marginal_dominance(d: &BlmDistribution, grid: &[f64]) -> Result<Vec<OrderVerdict>> {
    let z = Exponential::new(d.theta())?;
    let mut out = Vec::with_capacity(2);
    for (name, m) in [("X", d.marginal_x()), ("Y", d.marginal_y())] {
        let mut v = univariate_order(&z, &**m, Relation::Lr, grid)?;
        v.notes.push(format!("Exp({}) vs {name} marginal {}", d.theta(), m.label()));
        out.push(v);
    }
    Ok(out)
}

/// Bivariate IFRA: `H̄(x, y)^α ≤ H̄(αx, αy)` for every grid point and `α`
/// (reversed for DFRA). The note records the marginal aging verdicts,
/// which must agree.
pub fn bivariate_aging_check(d: &BlmDistribution, class: AgingClass, alphas: &[f64], grid: &Grid) -> Result<OrderVerdict> {
    let (relation, sign) = match class {
        AgingClass::Ifra => (Relation::BivariateIfra, 1.0),
        AgingClass::Dfra => (Relation::BivariateDfra, -1.0),
        other => {
            return Err(Error::InvalidParameter(format!(
                "bivariate aging supports IFRA and DFRA, got {}",
                other.name()
            )))
        }
    };
    if alphas.is_empty() || alphas.iter().any(|a| !(*a > 0.0 && *a < 1.0)) {
        return Err(Error::InvalidParameter("alphas must lie in (0, 1)".into()));
    }
    let mut scan = Scan::new(relation);
    for &x in &grid.xs {
        for &y in &grid.ys {
            let h = d.survival(x, y);
            for &a in alphas {
                let lhs = h.powf(a);
                let rhs = d.survival(a * x, a * y);
                scan.record(sign * relative(rhs - lhs, lhs, rhs), &[x, y, a]);
            }
        }
    }
    let pts = grid.diagonal_points();
    for (name, m) in [("X", d.marginal_x()), ("Y", d.marginal_y())] {
        let r = aging_class(&**m, class, &pts, YES_TOL)?;
        scan.notes.push(format!("{name} marginal {}: {:?}", class.name(), r.verdict));
    }
    Ok(scan.finish())
}

pub fn bivariate_ifra_check(d: &BlmDistribution, alphas: &[f64], grid: &Grid) -> Result<OrderVerdict> {
    bivariate_aging_check(d, AgingClass::Ifra, alphas, grid)
}

/// Upper-orthant order `d1 ≤uo d2`: `H̄₁ ≤ H̄₂` on the grid.
pub fn upper_orthant(d1: &dyn BivariateLaw, d2: &dyn BivariateLaw, grid: &Grid) -> OrderVerdict {
    let mut scan = Scan::new(Relation::Uo);
    for &x in &grid.xs {
        for &y in &grid.ys {
            let (a, b) = (d1.joint_survival(x, y), d2.joint_survival(x, y));
            scan.record(relative(b - a, a, b), &[x, y]);
        }
    }
    scan.finish()
}

/// Largest gap between the marginal survivals of two laws on the grid axes.
pub fn margin_gap(d1: &dyn BivariateLaw, d2: &dyn BivariateLaw, grid: &Grid) -> f64 {
    let gx = grid
        .xs
        .iter()
        .map(|&x| (d1.margin_x().survival(x) - d2.margin_x().survival(x)).abs())
        .fold(0.0, f64::max);
    let gy = grid
        .ys
        .iter()
        .map(|&y| (d1.margin_y().survival(y) - d2.margin_y().survival(y)).abs())
        .fold(0.0, f64::max);
    gx.max(gy)
}

fn require_equal_margins(d1: &dyn BivariateLaw, d2: &dyn BivariateLaw, grid: &Grid) -> Result<()> {
    let gap = margin_gap(d1, d2, grid);
    if gap > MARGIN_MATCH_TOL {
        return Err(Error::Precondition(format!(
            "marginals differ by up to {gap:e} on the grid; the comparison needs equal marginals"
        )));
    }
    Ok(())
}

/// Transform points of the Laplace-transform order: log-spaced over
/// `[1e-3, 10θ]²`.
pub fn lt_points(theta: f64) -> Vec<f64> {
    geometric_points(1e-3, 10.0 * theta, LT_GRID_POINTS).expect("valid bounds")
}

/// Compares two BLM laws.
///
/// `uo`: `H̄₁ ≤ H̄₂` on the grid. `concordance`: equal marginals and `uo`.
/// `lt`: `L₁(s, t) ≥ L₂(s, t)` on the transform grid of [`lt_points`].
pub fn compare_blm(d1: &BlmDistribution, d2: &BlmDistribution, relation: Relation, grid: &Grid) -> Result<OrderVerdict> {
    match relation {
        Relation::Uo => Ok(upper_orthant(d1, d2, grid)),
        Relation::Concordance => {
            require_equal_margins(d1, d2, grid)?;
            let mut v = upper_orthant(d1, d2, grid);
            v.relation = Relation::Concordance;
            Ok(v)
        }
        Relation::Lt => {
            let pts = lt_points(d1.theta().max(d2.theta()));
            let mut scan = Scan::new(Relation::Lt);
            for &s in &pts {
                for &t in &pts {
                    let (a, b) = (lst(d1, s, t)?, lst(d2, s, t)?);
                    scan.record(relative(a - b, a, b), &[s, t]);
                }
            }
            Ok(scan.finish())
        }
        Relation::Slepian => slepian_check(d1, d2, grid),
        other => Err(Error::InvalidParameter(format!(
            "{} is not a bivariate comparison",
            other.name()
        ))),
    }
}

/// For laws with the same marginals, correlations order exactly as the
/// survival functions do: `ρ₁ ≤ ρ₂ ⇔ H̄₁ ≤ H̄₂`. The verdict says whether
/// both directions of that equivalence agree on the grid.
pub fn slepian_check(d1: &BlmDistribution, d2: &BlmDistribution, grid: &Grid) -> Result<OrderVerdict> {
    require_equal_margins(d1, d2, grid)?;
    let rho1 = pearson_correlation(d1)?;
    let rho2 = pearson_correlation(d2)?;
    let forward = upper_orthant(d1, d2, grid);
    let backward = upper_orthant(d2, d1, grid);
    let rho_le = rho1 <= rho2 + YES_TOL;
    let rho_ge = rho2 <= rho1 + YES_TOL;
    let surv_le = forward.holds != Holds::No;
    let surv_ge = backward.holds != Holds::No;
    let agree = rho_le == surv_le && rho_ge == surv_ge;
    let tight = forward.holds == Holds::Inconclusive || backward.holds == Holds::Inconclusive;
    let holds = match (agree, tight) {
        (true, false) => Holds::Yes,
        (_, true) => Holds::Inconclusive,
        (false, false) => Holds::No,
    };
    let worst = if forward.worst_margin < backward.worst_margin { &forward } else { &backward };
    Ok(OrderVerdict {
        relation: Relation::Slepian,
        holds,
        worst_margin: if agree { 0.0 } else { -(rho1 - rho2).abs() },
        witness: worst.witness.clone(),
        configurations_tested: forward.configurations_tested + backward.configurations_tested,
        notes: vec![
            format!("rho1 = {rho1}, rho2 = {rho2}"),
            format!("survival 1 <= 2: {:?} (worst {:e})", forward.holds, forward.worst_margin),
            format!("survival 2 <= 1: {:?} (worst {:e})", backward.holds, backward.worst_margin),
        ],
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::blm::{make_blm, ValidationMode};
    use crate::families::{block_basu, marshall_olkin, MoParams};
    use crate::report::validation_points;
    use crate::univariate::{Lomax, MarginalRef};
    use std::sync::Arc;

    fn mo(l1: f64, l2: f64, l12: f64) -> BlmDistribution {
        marshall_olkin(MoParams::new(l1, l2, l12).unwrap()).unwrap()
    }

    /// Marshall–Olkin with Exp(1) marginals and common-shock rate `l12`.
    fn unit_margin_mo(l12: f64) -> BlmDistribution {
        mo(1.0 - l12, 1.0 - l12, l12)
    }

    fn line() -> Vec<f64> {
        validation_points(10.0, 200)[1..].to_vec()
    }

    #[test]
    fn univariate_examples() {
        let z = Exponential::new(3.0).unwrap();
        let x = Exponential::new(2.0).unwrap();
        for rel in [Relation::St, Relation::Hr, Relation::Rh, Relation::Lr] {
            assert!(univariate_order(&z, &x, rel, &line()).unwrap().holds(), "{rel:?}");
        }
        let one = Exponential::new(1.0).unwrap();
        let v = univariate_order(&one, &x, Relation::St, &line()).unwrap();
        assert_eq!(v.holds, Holds::No);
        assert_eq!(v.witness.len(), 1);
        assert!(univariate_order(&one, &x, Relation::Uo, &line()).is_err());
    }

    #[test]
    fn lr_implies_weaker_orders() {
        let bb = block_basu(1.0, 0.5, 2.0).unwrap();
        let l = Lomax::new(2.0, 1.0).unwrap();
        let pairs: [(&dyn Marginal, &dyn Marginal); 2] = [(&**bb.marginal_x(), &l), (&**bb.marginal_y(), &**bb.marginal_x())];
        for (a, b) in pairs {
            if univariate_order(a, b, Relation::Lr, &line()).unwrap().holds() {
                for rel in [Relation::St, Relation::Hr, Relation::Rh] {
                    assert!(univariate_order(a, b, rel, &line()).unwrap().holds != Holds::No);
                }
            }
        }
    }

    #[test]
    fn dominance_examples() {
        for d in [mo(1.0, 2.0, 3.0), block_basu(1.0, 1.0, 1.0).unwrap()] {
            let v = marginal_dominance(&d, &line()).unwrap();
            assert!(v.iter().all(|v| v.holds()), "{v:?}");
            for m in [d.marginal_x(), d.marginal_y()] {
                for &x in &line() {
                    assert!(m.hazard(x).unwrap() <= d.theta() * (1.0 + 1e-12));
                }
            }
        }
    }

    #[test]
    fn bivariate_aging_examples() {
        let alphas = [0.1, 0.5, 0.9];
        let d = mo(1.0, 2.0, 0.5);
        let g = Grid::for_rate(d.theta(), 10).unwrap();
        assert!(bivariate_ifra_check(&d, &alphas, &g).unwrap().holds());
        let l: MarginalRef = Arc::new(Lomax::new(1.0, 1.0).unwrap());
        let lb = make_blm(l.clone(), l, 2.0, ValidationMode::Strict).unwrap();
        let g = Grid::for_rate(2.0, 10).unwrap();
        assert!(bivariate_aging_check(&lb, AgingClass::Dfra, &alphas, &g).unwrap().holds());
        assert_eq!(bivariate_ifra_check(&lb, &alphas, &g).unwrap().holds, Holds::No);
        // the purely singular law sits on the boundary
        let e: MarginalRef = Arc::new(Exponential::new(2.0).unwrap());
        let s = make_blm(e.clone(), e, 2.0, ValidationMode::Strict).unwrap();
        let v = bivariate_ifra_check(&s, &alphas, &g).unwrap();
        assert!(v.holds() && v.worst_margin.abs() < 1e-12);
        assert!(bivariate_aging_check(&s, AgingClass::Ifr, &alphas, &g).is_err());
    }

    #[test]
    fn upper_orthant_examples() {
        let g = Grid::for_rate(1.8, 15).unwrap();
        let d1 = unit_margin_mo(0.2);
        let d2 = unit_margin_mo(0.5);
        assert!(compare_blm(&d1, &d2, Relation::Uo, &g).unwrap().holds());
        assert_eq!(compare_blm(&d2, &d1, Relation::Uo, &g).unwrap().holds, Holds::No);
        let same = compare_blm(&d1, &d1, Relation::Uo, &g).unwrap();
        assert!(same.holds() && same.worst_margin == 0.0);
        assert!(compare_blm(&d1, &d2, Relation::Concordance, &g).unwrap().holds());
        assert!(matches!(
            compare_blm(&d1, &mo(1.0, 1.0, 1.0), Relation::Concordance, &g),
            Err(Error::Precondition(_))
        ));
        // Same margins: stronger dependence raises E[e^{-sX-tY}], so the
        // uo-larger law is the Lt-smaller one.
        assert_eq!(compare_blm(&d1, &d2, Relation::Lt, &g).unwrap().holds, Holds::No);
        assert!(compare_blm(&d2, &d1, Relation::Lt, &g).unwrap().holds());
    }

    #[test]
    fn slepian_examples() {
        let g = Grid::for_rate(1.5, 15).unwrap();
        for (a, b) in [(0.2, 0.5), (0.5, 0.8), (0.8, 0.2), (0.5, 0.5)] {
            let v = slepian_check(&unit_margin_mo(a), &unit_margin_mo(b), &g).unwrap();
            assert_eq!(v.holds, Holds::Yes, "{a} {b}: {v:?}");
        }
        assert!(slepian_check(&unit_margin_mo(0.2), &mo(1.0, 1.0, 1.0), &g).is_err());
    }
}
