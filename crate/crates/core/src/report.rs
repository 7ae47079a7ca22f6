//! Grids and reports shared by the grid-based checks.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Pass,
    Fail,
}

/// Outcome of a check evaluated over a finite set of configurations.
///
/// `worst_value` is the smallest (normalized) margin found, `witness` the
/// coordinates where it occurs. The verdict is `Fail` exactly when the worst
/// margin is below `-tolerance`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridReport {
    pub label: String,
    pub verdict: Verdict,
    pub worst_value: f64,
    pub witness: Vec<f64>,
    pub configurations_tested: usize,
    pub tolerance: f64,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
}

impl GridReport {
    pub fn passed(&self) -> bool {
        self.verdict == Verdict::Pass
    }

    /// Worst margin lies within `band` of zero: the grid cannot separate the
    /// outcome from rounding.
    pub fn is_tight(&self, band: f64) -> bool {
        self.worst_value.abs() <= band
    }
}

/// Running minimum of margins that turns into a [`GridReport`].
#[derive(Debug, Clone)]
pub(crate) struct MarginTracker {
    worst: f64,
    witness: Vec<f64>,
    count: usize,
}

impl MarginTracker {
    pub fn new() -> Self {
        Self {
            worst: f64::INFINITY,
            witness: Vec::new(),
            count: 0,
        }
    }

    pub fn record(&mut self, margin: f64, witness: &[f64]) {
        self.count += 1;
        if margin < self.worst || self.witness.is_empty() {
            self.worst = margin;
            self.witness = witness.to_vec();
        }
    }

    pub fn finish(self, label: impl Into<String>, tolerance: f64) -> GridReport {
        let worst = if self.count == 0 { 0.0 } else { self.worst };
        let verdict = if worst.is_nan() || worst < -tolerance {
            Verdict::Fail
        } else {
            Verdict::Pass
        };
        GridReport {
            label: label.into(),
            verdict,
            worst_value: worst,
            witness: self.witness,
            configurations_tested: self.count,
            tolerance,
            notes: Vec::new(),
        }
    }
}

/// A two-dimensional evaluation grid with strictly increasing axes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    pub xs: Vec<f64>,
    pub ys: Vec<f64>,
}

impl Grid {
    pub fn new(xs: Vec<f64>, ys: Vec<f64>) -> Result<Self> {
        check_axis(&xs, "xs")?;
        check_axis(&ys, "ys")?;
        Ok(Self { xs, ys })
    }

    /// Same geometric axis on both coordinates.
    pub fn geometric(lo: f64, hi: f64, n: usize) -> Result<Self> {
        let axis = geometric_points(lo, hi, n)?;
        Self::new(axis.clone(), axis)
    }

    /// Default dependence grid for a distribution with diagonal rate `theta`:
    /// `n` geometric points per axis over `[0.05/θ, 8/θ]`.
    pub fn for_rate(theta: f64, n: usize) -> Result<Self> {
        Self::geometric(0.05 / theta, 8.0 / theta, n)
    }

    /// The union of both axes, sorted and deduplicated.
    pub fn diagonal_points(&self) -> Vec<f64> {
        let mut pts: Vec<f64> = self.xs.iter().chain(self.ys.iter()).copied().collect();
        pts.sort_by(f64::total_cmp);
        pts.dedup();
        pts
    }
}

fn check_axis(axis: &[f64], name: &str) -> Result<()> {
    if axis.len() < 2 {
        return Err(Error::InvalidParameter(format!("grid axis {name} needs at least 2 points")));
    }
    if axis.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidParameter(format!("grid axis {name} has non-finite points")));
    }
    if axis.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidParameter(format!("grid axis {name} is not strictly increasing")));
    }
    Ok(())
}

/// `n` geometrically spaced points from `lo` to `hi` inclusive (`0 < lo < hi`).
pub fn geometric_points(lo: f64, hi: f64, n: usize) -> Result<Vec<f64>> {
    if !(lo > 0.0 && hi > lo && n >= 2) {
        return Err(Error::InvalidParameter(format!(
            "geometric grid needs 0 < lo < hi and n >= 2 (got {lo}, {hi}, {n})"
        )));
    }
    let ratio = (hi / lo).ln() / (n - 1) as f64;
    Ok((0..n).map(|i| lo * (ratio * i as f64).exp()).collect())
}

/// The validation grid: zero followed by `n - 1` geometric points up to `hi`.
pub fn validation_points(hi: f64, n: usize) -> Vec<f64> {
    let mut pts = vec![0.0];
    pts.extend(geometric_points(hi * 1e-6, hi, n - 1).expect("valid bounds"));
    pts
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_rejects_bad_axes() {
        assert!(Grid::new(vec![1.0], vec![1.0, 2.0]).is_err());
        assert!(Grid::new(vec![1.0, 1.0], vec![1.0, 2.0]).is_err());
        assert!(Grid::new(vec![1.0, f64::NAN], vec![1.0, 2.0]).is_err());
    }

    #[test]
    fn geometric_endpoints() {
        let g = geometric_points(0.1, 10.0, 5).unwrap();
        assert!((g[0] - 0.1).abs() < 1e-15);
        assert!((g[4] - 10.0).abs() < 1e-12);
        assert!((g[2] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn validation_grid_shape() {
        let v = validation_points(40.0, 512);
        assert_eq!(v.len(), 512);
        assert_eq!(v[0], 0.0);
        assert!((v[511] - 40.0).abs() < 1e-9);
    }

    #[test]
    fn tracker_verdicts() {
        let mut t = MarginTracker::new();
        t.record(0.5, &[1.0]);
        t.record(-1e-3, &[2.0]);
        let r = t.finish("x", 1e-9);
        assert_eq!(r.verdict, Verdict::Fail);
        assert_eq!(r.witness, vec![2.0]);
        assert_eq!(r.configurations_tested, 2);
    }
}
