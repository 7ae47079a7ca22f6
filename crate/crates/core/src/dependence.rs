//! Total positivity and dependence diagnostics on finite grids.
//!
//! A kernel `K` is TP₂ when every 2×2 minor `K(x₁,y₁)K(x₂,y₂) − K(x₁,y₂)K(x₂,y₁)`
//! with `x₁ < x₂`, `y₁ < y₂` is nonnegative, RR₂ when every such minor is
//! nonpositive, and TP_r when all minors up to order `r` are nonnegative.
//! Grid checks are sound for failures (a negative minor is a genuine
//! counterexample) and only evidence for passes.

use std::sync::Arc;

use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::blm::{BivariateLaw, BlmDistribution, Side};
use crate::error::{Error, Result};
use crate::families::GmoDistribution;
use crate::numdiff;
use crate::report::{Grid, GridReport, MarginTracker, Verdict};
use crate::univariate::{aging_class, AgingClass};

/// Relative tolerance for determinant signs.
pub const DETERMINANT_TOL: f64 = 1e-9;
/// Random index subsets drawn per order by [`tp_order_check`].
pub const DEFAULT_TRIALS: usize = 200;
/// Seed of the subset sampler when none is given.
pub const DEFAULT_SUBSET_SEED: u64 = 0x7470_6f72_6465_72;
/// Points per axis of the default dependence grid.
pub const DEFAULT_GRID_POINTS: usize = 20;

type KernelFn = dyn Fn(f64, f64) -> Result<f64> + Send + Sync;

/// A labelled bivariate function examined by the positivity checks.
#[derive(Clone)]
pub struct Kernel {
    label: String,
    f: Arc<KernelFn>,
}

impl std::fmt::Debug for Kernel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Kernel").field("label", &self.label).finish()
    }
}

impl Kernel {
    pub fn new(label: impl Into<String>, f: impl Fn(f64, f64) -> Result<f64> + Send + Sync + 'static) -> Self {
        Self {
            label: label.into(),
            f: Arc::new(f),
        }
    }

    /// Kernel from an infallible function.
    pub fn from_fn(label: impl Into<String>, f: impl Fn(f64, f64) -> f64 + Send + Sync + 'static) -> Self {
        Self::new(label, move |x, y| Ok(f(x, y)))
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn eval(&self, x: f64, y: f64) -> Result<f64> {
        let v = (self.f)(x, y)?;
        if !v.is_finite() {
            return Err(Error::Domain(format!("kernel {} is not finite at ({x}, {y}): {v}", self.label)));
        }
        Ok(v)
    }

    /// Joint survival `H̄`.
    pub fn survival(d: &BlmDistribution) -> Self {
        let d = d.clone();
        Self::from_fn(format!("survival of {}", d.label()), move |x, y| d.survival(x, y))
    }

    /// Joint cdf `H`.
    pub fn cdf(d: &BlmDistribution) -> Self {
        let d = d.clone();
        Self::from_fn(format!("cdf of {}", d.label()), move |x, y| d.cdf(x, y))
    }

    /// Density of the absolutely continuous part, continued onto the
    /// diagonal from the `x ≥ y` side.
    pub fn density(d: &BlmDistribution) -> Self {
        let d = d.clone();
        Self::from_fn(format!("density of {}", d.label()), move |x, y| {
            if x >= y {
                (-d.theta() * y).exp() * d.gap_density(Side::XMinusY, x - y)
            } else {
                (-d.theta() * x).exp() * d.gap_density(Side::YMinusX, y - x)
            }
        })
    }

    pub fn gmo_survival(d: &GmoDistribution) -> Self {
        let d = d.clone();
        Self::from_fn(format!("survival of {}", d.label()), move |x, y| d.survival(x, y))
    }

    /// GMO density off the diagonal, continued from the `x ≥ y` side.
    pub fn gmo_density(d: &GmoDistribution) -> Self {
        let d = d.clone();
        Self::from_fn(format!("density of {}", d.label()), move |x, y| {
            let [a, b, _] = d.shocks();
            if x >= y {
                d.marginal_x().density(x) * b.density(y)
            } else {
                a.density(x) * d.marginal_y().density(y)
            }
        })
    }

    /// Survival copula `Ĉ(u, v)` on `(0, 1)²`.
    pub fn survival_copula(d: &BlmDistribution) -> Self {
        let d = d.clone();
        Self::new(format!("survival copula of {}", d.label()), move |u, v| survival_copula(&d, u, v))
    }

    /// `u(x)·v(y)·K(x, y)`.
    pub fn scaled(
        &self,
        u: impl Fn(f64) -> f64 + Send + Sync + 'static,
        v: impl Fn(f64) -> f64 + Send + Sync + 'static,
    ) -> Self {
        let k = self.clone();
        Self::new(format!("scaled {}", self.label), move |x, y| Ok(u(x) * v(y) * k.eval(x, y)?))
    }

    fn matrix(&self, grid: &Grid) -> Result<Vec<Vec<f64>>> {
        grid.xs
            .iter()
            .map(|&x| grid.ys.iter().map(|&y| self.eval(x, y)).collect())
            .collect()
    }
}

fn check_tol(tol: f64) -> Result<()> {
    if !(tol >= 0.0 && tol.is_finite()) {
        return Err(Error::InvalidParameter(format!("tolerance must be nonnegative, got {tol}")));
    }
    Ok(())
}

/// Scans all 2×2 minors; `sign = 1` for TP₂, `-1` for RR₂. Margins are the
/// minors divided by the larger of the two products.
fn minor2_scan(k: &Kernel, grid: &Grid, tol: f64, sign: f64, name: &str) -> Result<GridReport> {
    check_tol(tol)?;
    let m = k.matrix(grid)?;
    let mut tracker = MarginTracker::new();
    let (nx, ny) = (grid.xs.len(), grid.ys.len());
    for i1 in 0..nx {
        for i2 in i1 + 1..nx {
            for j1 in 0..ny {
                for j2 in j1 + 1..ny {
                    let a = m[i1][j1] * m[i2][j2];
                    let b = m[i1][j2] * m[i2][j1];
                    let scale = a.abs().max(b.abs());
                    let margin = if scale > 0.0 { sign * (a - b) / scale } else { 0.0 };
                    tracker.record(margin, &[grid.xs[i1], grid.xs[i2], grid.ys[j1], grid.ys[j2]]);
                }
            }
        }
    }
    Ok(tracker.finish(format!("{name} of {}", k.label), tol))
}

pub fn tp2_check(k: &Kernel, grid: &Grid, tol: f64) -> Result<GridReport> {
    minor2_scan(k, grid, tol, 1.0, "TP2")
}

pub fn rr2_check(k: &Kernel, grid: &Grid, tol: f64) -> Result<GridReport> {
    minor2_scan(k, grid, tol, -1.0, "RR2")
}

/// Determinant by LU decomposition with partial pivoting.
fn determinant(mut a: Vec<Vec<f64>>) -> f64 {
    let n = a.len();
    let mut det = 1.0;
    for c in 0..n {
        let p = (c..n)
            .max_by(|&i, &j| a[i][c].abs().total_cmp(&a[j][c].abs()))
            .expect("non-empty");
        if a[p][c] == 0.0 {
            return 0.0;
        }
        if p != c {
            a.swap(p, c);
            det = -det;
        }
        det *= a[c][c];
        for r in c + 1..n {
            let factor = a[r][c] / a[c][c];
            for k in c..n {
                a[r][k] -= factor * a[c][k];
            }
        }
    }
    det
}

/// Checks all minors of orders `2..=r`: every contiguous window plus
/// `trials` random increasing index selections per order. A minor passes
/// when `det ≥ −tol·Π(row maxima)`.
pub fn tp_order_check(k: &Kernel, grid: &Grid, r: usize, tol: f64, trials: usize) -> Result<GridReport> {
    tp_order_check_seeded(k, grid, r, tol, trials, DEFAULT_SUBSET_SEED)
}

pub fn tp_order_check_seeded(
    k: &Kernel,
    grid: &Grid,
    r: usize,
    tol: f64,
    trials: usize,
    seed: u64,
) -> Result<GridReport> {
    check_tol(tol)?;
    let (nx, ny) = (grid.xs.len(), grid.ys.len());
    if r < 2 || r > nx || r > ny {
        return Err(Error::Precondition(format!(
            "order {r} needs 2 <= r <= grid size ({nx}×{ny})"
        )));
    }
    let m = k.matrix(grid)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut tracker = MarginTracker::new();
    let eval = |rows: &[usize], cols: &[usize], tracker: &mut MarginTracker| {
        let sub: Vec<Vec<f64>> = rows.iter().map(|&i| cols.iter().map(|&j| m[i][j]).collect()).collect();
        let scale: f64 = sub
            .iter()
            .map(|row| row.iter().fold(0.0f64, |acc, v| acc.max(v.abs())))
            .product();
        let det = determinant(sub);
        let margin = if scale > 0.0 { det / scale } else { 0.0 };
        let witness: Vec<f64> = rows.iter().map(|&i| grid.xs[i]).chain(cols.iter().map(|&j| grid.ys[j])).collect();
        tracker.record(margin, &witness);
    };
    for s in 2..=r {
        for i0 in 0..=nx - s {
            for j0 in 0..=ny - s {
                let rows: Vec<usize> = (i0..i0 + s).collect();
                let cols: Vec<usize> = (j0..j0 + s).collect();
                eval(&rows, &cols, &mut tracker);
            }
        }
        for _ in 0..trials {
            let mut rows = sample(&mut rng, nx, s).into_vec();
            let mut cols = sample(&mut rng, ny, s).into_vec();
            rows.sort_unstable();
            cols.sort_unstable();
            eval(&rows, &cols, &mut tracker);
        }
    }
    let mut report = tracker.finish(format!("TP{r} of {}", k.label), tol);
    report
        .notes
        .push(format!("contiguous windows plus {trials} random selections per order; seed {seed}"));
    Ok(report)
}

/// Combines component reports: the verdict fails when any component fails,
/// and the worst margin is the smallest one.
fn combine(label: String, parts: Vec<(String, GridReport)>, tol: f64) -> GridReport {
    let mut worst = f64::INFINITY;
    let mut witness = Vec::new();
    let mut count = 0;
    let mut notes = Vec::new();
    let mut failed = false;
    for (name, r) in parts {
        count += r.configurations_tested;
        failed |= !r.passed();
        notes.push(format!("{name}: {:?}, worst {:e}", r.verdict, r.worst_value));
        notes.extend(r.notes);
        if r.worst_value < worst || witness.is_empty() {
            worst = r.worst_value;
            witness = r.witness;
        }
    }
    GridReport {
        label,
        verdict: if failed { Verdict::Fail } else { Verdict::Pass },
        worst_value: if worst.is_finite() { worst } else { 0.0 },
        witness,
        configurations_tested: count,
        tolerance: tol,
        notes,
    }
}

/// Points where the marginal conditions matter for a survival grid: the
/// grid coordinates and all positive coordinate differences.
fn survival_condition_points(grid: &Grid) -> Vec<f64> {
    let mut pts = grid.diagonal_points();
    for &x in &grid.xs {
        for &y in &grid.ys {
            if x != y {
                pts.push((x - y).abs());
            }
        }
    }
    pts.sort_by(f64::total_cmp);
    pts.dedup_by(|a, b| (*a - *b).abs() <= 1e-14 * b.abs());
    pts
}

/// The marginal characterization of a TP₂ survival function: both
/// marginals IFR and `F̄(x) Ḡ(x) ≤ e^{−θx}`, checked at the grid points and
/// at all coordinate differences.
pub fn ifr_product_condition(d: &BlmDistribution, grid: &Grid, tol: f64) -> Result<GridReport> {
    check_tol(tol)?;
    let pts = survival_condition_points(grid);
    let theta = d.theta();
    let ifr_f = aging_class(&**d.marginal_x(), AgingClass::Ifr, &pts, tol)?;
    let ifr_g = aging_class(&**d.marginal_y(), AgingClass::Ifr, &pts, tol)?;
    let mut product = MarginTracker::new();
    for &x in &pts {
        let ratio = d.marginal_x().survival(x) * d.marginal_y().survival(x) * (theta * x).exp();
        product.record(1.0 - ratio, &[x]);
    }
    let product = product.finish("survival product bound", tol);
    Ok(combine(
        format!("IFR marginals and survival product bound for {}", d.label()),
        vec![
            ("X marginal IFR".into(), ifr_f),
            ("Y marginal IFR".into(), ifr_g),
            ("survival product bound".into(), product),
        ],
        tol,
    ))
}

/// Tolerance for conditions built on numerical second derivatives.
pub const DERIVATIVE_TOL: f64 = 1e-6;

/// The marginal characterization of a TP₂ density for absolutely continuous
/// laws, with `hᵢ` the gap densities `θf + f'`, `θg + g'`:
/// `(hᵢ')² ≥ hᵢ'' hᵢ` and `h₁(u) h₂(u) ≤ h₁(0)² e^{−θu}` at every point.
///
/// Also reports whether `h₁(0) = h₂(0)`, which the characterization assumes.
pub fn density_condition(d: &BlmDistribution, points: &[f64], tol: f64) -> Result<GridReport> {
    check_tol(tol)?;
    if d.atom_mass() > tol {
        return Err(Error::Precondition(format!(
            "density condition needs an absolutely continuous law; atom mass is {}",
            d.atom_mass()
        )));
    }
    let theta = d.theta();
    let h = |side: Side| move |u: f64| d.gap_density(side, u);
    let (h1, h2) = (h(Side::XMinusY), h(Side::YMinusX));
    let h10 = h1(0.0);
    let h20 = h2(0.0);
    let mut concavity = MarginTracker::new();
    let mut product = MarginTracker::new();
    for &u in points {
        if !(u > 0.0) {
            continue;
        }
        for (side, hf) in [(Side::XMinusY, &h1), (Side::YMinusX, &h2)] {
            let v = hf(u);
            if !(v > 0.0) {
                return Err(Error::Precondition(format!("gap density for {side:?} is {v} <= 0 at {u}")));
            }
            let d1 = numdiff::first(hf, u, 0.0);
            let d2 = numdiff::second(hf, u, 0.0);
            let which = if side == Side::XMinusY { 1.0 } else { 2.0 };
            concavity.record((d1 * d1 - d2 * v) / (v * v * theta * theta), &[which, u]);
        }
        let bound = h10 * h10 * (-theta * u).exp();
        product.record(1.0 - h1(u) * h2(u) / bound, &[u]);
    }
    let mut report = combine(
        format!("density condition for {}", d.label()),
        vec![
            ("log-concavity of gap densities".into(), concavity.finish("log-concavity", tol)),
            ("gap density product bound".into(), product.finish("product bound", tol)),
        ],
        tol,
    );
    let compatible = (h10 - h20).abs() <= 1e-9 * h10.abs().max(h20.abs());
    report.notes.push(format!(
        "origin compatibility θf(0)+f'(0) = {h10}, θg(0)+g'(0) = {h20}: {}",
        if compatible { "holds" } else { "fails" }
    ));
    Ok(report)
}

/// `∂² log h / ∂x ∂y` for the BLM density, `((h')² − h'' h)/h²` at `|x − y|`.
pub fn local_dependence(d: &BlmDistribution, x: f64, y: f64) -> Result<f64> {
    if !(x > 0.0 && y > 0.0) || x == y {
        return Err(Error::Domain(format!("local dependence needs positive off-diagonal (x, y), got ({x}, {y})")));
    }
    let side = if x > y { Side::XMinusY } else { Side::YMinusX };
    let h = |u: f64| d.gap_density(side, u);
    let u = (x - y).abs();
    let v = h(u);
    if !(v > 0.0) {
        return Err(Error::Domain(format!("density is not positive at ({x}, {y})")));
    }
    let d1 = numdiff::first(&h, u, 0.0);
    let d2 = numdiff::second(&h, u, 0.0);
    Ok((d1 * d1 - d2 * v) / (v * v))
}

/// `∂² log K / ∂x ∂y` by finite differences.
pub fn kernel_local_dependence(k: &Kernel, x: f64, y: f64) -> Result<f64> {
    let v = k.eval(x, y)?;
    if !(v > 0.0) {
        return Err(Error::Domain(format!("kernel {} is not positive at ({x}, {y})", k.label)));
    }
    let g = numdiff::mixed(
        &|a, b| match k.eval(a, b) {
            Ok(v) if v > 0.0 => v.ln(),
            _ => f64::NAN,
        },
        x,
        y,
    );
    if !g.is_finite() {
        return Err(Error::Domain(format!("kernel {} is not positive near ({x}, {y})", k.label)));
    }
    Ok(g)
}

/// Positive quadrant dependence: `H̄(x, y) ≥ F̄(x) Ḡ(y) − tol` on the grid.
pub fn pqd_check(d: &dyn BivariateLaw, grid: &Grid, tol: f64) -> Result<GridReport> {
    check_tol(tol)?;
    let mut tracker = MarginTracker::new();
    for &x in &grid.xs {
        let fx = d.margin_x().survival(x);
        for &y in &grid.ys {
            tracker.record(d.joint_survival(x, y) - fx * d.margin_y().survival(y), &[x, y]);
        }
    }
    Ok(tracker.finish(format!("PQD of {}", d.label()), tol))
}

/// `Ĉ(u, v) = H̄(F̄⁻¹(u), Ḡ⁻¹(v))` for `u, v ∈ (0, 1)`.
pub fn survival_copula(d: &BlmDistribution, u: f64, v: f64) -> Result<f64> {
    for p in [u, v] {
        if !(p > 0.0 && p < 1.0) {
            return Err(Error::Domain(format!("copula argument {p} outside (0, 1)")));
        }
    }
    let x = d.marginal_x().inverse_survival(u)?;
    let y = d.marginal_y().inverse_survival(v)?;
    Ok(d.survival(x, y))
}

/// Outcome of comparing two characterizations that should be equivalent.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Agreement {
    Agree,
    Disagree,
    /// The verdicts differ, but one of the worst margins lies within the
    /// band around zero, so the grid cannot separate them from rounding.
    Inconclusive,
}

pub fn agreement(a: &GridReport, b: &GridReport, band: f64) -> Agreement {
    if a.verdict == b.verdict {
        Agreement::Agree
    } else if a.is_tight(band) || b.is_tight(band) {
        Agreement::Inconclusive
    } else {
        Agreement::Disagree
    }
}
