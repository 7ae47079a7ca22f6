//! Exact samplers and the Monte Carlo statistics used to check them.
//!
//! Three samplers are provided: the Marshall–Olkin shock model, the
//! generalized shock model with arbitrary shock laws, and a universal BLM
//! sampler that draws `min(X, Y) ~ Exp(θ)` and, independently, the
//! difference `X − Y` from its mixed law (an atom at zero plus two tails
//! `P(X − Y > t) = F̄(t) − f(t)/θ`, `P(Y − X > t) = Ḡ(t) − g(t)/θ`).

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp};
use serde::Serialize;
use statrs::distribution::{ChiSquared, ContinuousCDF};

use crate::blm::{BlmDistribution, Side};
use crate::error::{Error, Result};
use crate::families::{GmoDistribution, MoParams};
use crate::roots;
use crate::univariate::Marginal;

/// Tolerance of the tail inversions.
pub const SAMPLER_XTOL: f64 = 1e-12;
/// Asymptotic Kolmogorov critical value at level 0.01.
pub const KS_CRITICAL_01: f64 = 1.628;
/// Smallest batch accepted by the estimators and tests.
pub const MIN_SAMPLES: usize = 100;

/// A reproducible random stream: identical `(seed, stream)` pairs produce
/// identical draws.
#[derive(Debug, Clone)]
pub struct RngStream {
    seed: u64,
    stream: u64,
    rng: ChaCha8Rng,
}

impl RngStream {
    pub fn new(seed: u64, stream: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(stream);
        Self { seed, stream, rng }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream(&self) -> u64 {
        self.stream
    }

    /// Uniform on `[0, 1)`.
    pub fn uniform(&mut self) -> f64 {
        self.rng.random::<f64>()
    }

    /// Uniform on `(0, 1]`.
    fn uniform_open_left(&mut self) -> f64 {
        1.0 - self.uniform()
    }

    pub fn rng(&mut self) -> &mut ChaCha8Rng {
        &mut self.rng
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SampleBatch {
    pub pairs: Vec<(f64, f64)>,
    pub sampler_id: String,
    pub seed: u64,
    pub stream: u64,
    pub n: usize,
}

impl SampleBatch {
    fn new(pairs: Vec<(f64, f64)>, sampler_id: String, rng: &RngStream) -> Self {
        Self {
            n: pairs.len(),
            pairs,
            sampler_id,
            seed: rng.seed,
            stream: rng.stream,
        }
    }

    pub fn xs(&self) -> Vec<f64> {
        self.pairs.iter().map(|p| p.0).collect()
    }

    pub fn ys(&self) -> Vec<f64> {
        self.pairs.iter().map(|p| p.1).collect()
    }

    pub fn mins(&self) -> Vec<f64> {
        self.pairs.iter().map(|p| p.0.min(p.1)).collect()
    }

    pub fn maxs(&self) -> Vec<f64> {
        self.pairs.iter().map(|p| p.0.max(p.1)).collect()
    }

    /// `x − y` for each pair.
    pub fn differences(&self) -> Vec<f64> {
        self.pairs.iter().map(|p| p.0 - p.1).collect()
    }

    /// Concatenates batches drawn from independent substreams.
    pub fn concat(batches: Vec<SampleBatch>) -> Result<SampleBatch> {
        let first = batches
            .first()
            .ok_or_else(|| Error::InvalidParameter("nothing to concatenate".into()))?;
        let (id, seed, stream) = (first.sampler_id.clone(), first.seed, first.stream);
        if batches.iter().any(|b| b.sampler_id != id) {
            return Err(Error::InvalidParameter("batches come from different samplers".into()));
        }
        let pairs: Vec<(f64, f64)> = batches.into_iter().flat_map(|b| b.pairs).collect();
        Ok(SampleBatch {
            n: pairs.len(),
            pairs,
            sampler_id: id,
            seed,
            stream,
        })
    }
}

/// `(min(X₁, X₃), min(X₂, X₃))` with independent exponential shocks; the
/// common shock is reused, so ties are exact.
pub fn sample_mo(p: MoParams, n: usize, rng: &mut RngStream) -> Result<SampleBatch> {
    let p = MoParams::new(p.lambda1, p.lambda2, p.lambda12)?;
    let e1 = Exp::new(p.lambda1).map_err(|e| Error::InvalidParameter(e.to_string()))?;
    let e2 = Exp::new(p.lambda2).map_err(|e| Error::InvalidParameter(e.to_string()))?;
    let e3 = Exp::new(p.lambda12).map_err(|e| Error::InvalidParameter(e.to_string()))?;
    let mut pairs = Vec::with_capacity(n);
    for _ in 0..n {
        let x1: f64 = e1.sample(rng.rng());
        let x2: f64 = e2.sample(rng.rng());
        let x3: f64 = e3.sample(rng.rng());
        pairs.push((x1.min(x3), x2.min(x3)));
    }
    let id = format!("mo(lambda1={}, lambda2={}, lambda12={})", p.lambda1, p.lambda2, p.lambda12);
    Ok(SampleBatch::new(pairs, id, rng))
}

fn inverse_draw(m: &dyn Marginal, rng: &mut RngStream) -> Result<f64> {
    let u = rng.uniform_open_left();
    m.inverse_survival(u).map_err(|e| Error::Sampler {
        uniform: u,
        detail: format!("inverting {}: {e}", m.label()),
    })
}

/// Shock model with arbitrary shock laws, by inverse transform.
pub fn sample_gmo(d: &GmoDistribution, n: usize, rng: &mut RngStream) -> Result<SampleBatch> {
    let [a, b, c] = d.shocks();
    let mut pairs = Vec::with_capacity(n);
    for _ in 0..n {
        let x1 = inverse_draw(&**a, rng)?;
        let x2 = inverse_draw(&**b, rng)?;
        let x3 = inverse_draw(&**c, rng)?;
        pairs.push((x1.min(x3), x2.min(x3)));
    }
    Ok(SampleBatch::new(pairs, format!("gmo({})", d.label()), rng))
}

/// Mixed law of `X − Y` for one BLM distribution.
struct DifferenceLaw<'a> {
    d: &'a BlmDistribution,
    /// `P(Y − X > 0)`.
    p_left: f64,
    /// `P(X = Y)`.
    p_atom: f64,
}

impl<'a> DifferenceLaw<'a> {
    fn new(d: &'a BlmDistribution) -> Self {
        let p_left = d.raw_diff_tail(0.0, Side::YMinusX).clamp(0.0, 1.0);
        let p_atom = d.atom_mass().min(1.0 - p_left);
        Self { d, p_left, p_atom }
    }

    /// Solves `P(side > t) = level` for `t ≥ 0`.
    fn tail_quantile(&self, side: Side, level: f64, u: f64) -> Result<f64> {
        let tail = |t: f64| self.d.raw_diff_tail(t, side);
        if level >= tail(0.0) {
            return Ok(0.0);
        }
        let step = 1.0 / self.d.theta();
        roots::solve_decreasing(tail, level, 0.0, step, SAMPLER_XTOL).map_err(|e| Error::Sampler {
            uniform: u,
            detail: format!("difference tail inversion: {e}"),
        })
    }

    fn draw(&self, u: f64) -> Result<f64> {
        if u < self.p_left {
            Ok(-self.tail_quantile(Side::YMinusX, self.p_left - u, u)?)
        } else if u < self.p_left + self.p_atom {
            Ok(0.0)
        } else {
            Ok(self.tail_quantile(Side::XMinusY, 1.0 - u, u)?)
        }
    }
}

/// Universal BLM sampler: `Z ~ Exp(θ)` and an independent difference `D`,
/// returned as `(Z + max(D, 0), Z + max(−D, 0))`.
pub fn sample_blm(d: &BlmDistribution, n: usize, rng: &mut RngStream) -> Result<SampleBatch> {
    let z = Exp::new(d.theta()).map_err(|e| Error::InvalidParameter(e.to_string()))?;
    let law = DifferenceLaw::new(d);
    let mut pairs = Vec::with_capacity(n);
    for _ in 0..n {
        let m: f64 = z.sample(rng.rng());
        let u = rng.uniform();
        let diff = law.draw(u)?;
        pairs.push((m + diff.max(0.0), m + (-diff).max(0.0)));
    }
    Ok(SampleBatch::new(pairs, format!("blm({})", d.label()), rng))
}

/// Quantities estimated by sample means.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Functional {
    /// `P(X > x, Y > y)`.
    Survival { x: f64, y: f64 },
    /// `E[X^i Y^j]`.
    ProductMoment { i: i32, j: i32 },
    /// `E[min(X, Y)]`.
    MttfSeries,
    /// `E[max(X, Y)]`.
    MttfParallel,
    /// `P(X = Y)`; ties are exact for every sampler in this module.
    AtomFraction,
    /// Pearson correlation; its standard error comes from 100 sub-batches.
    Correlation,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Estimate {
    pub value: f64,
    pub std_error: f64,
}

impl Estimate {
    /// `|value − target| ≤ k·std_error`.
    pub fn within(&self, target: f64, k: f64) -> bool {
        (self.value - target).abs() <= k * self.std_error
    }
}

fn mean_and_se(values: impl Iterator<Item = f64>) -> Estimate {
    let mut n = 0usize;
    let mut mean = 0.0;
    let mut m2 = 0.0;
    for v in values {
        n += 1;
        let delta = v - mean;
        mean += delta / n as f64;
        m2 += delta * (v - mean);
    }
    let var = if n > 1 { m2 / (n - 1) as f64 } else { 0.0 };
    Estimate {
        value: mean,
        std_error: (var / n as f64).sqrt(),
    }
}

fn correlation(pairs: &[(f64, f64)]) -> f64 {
    let n = pairs.len() as f64;
    let mx = pairs.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pairs.iter().map(|p| p.1).sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for &(x, y) in pairs {
        sxy += (x - mx) * (y - my);
        sxx += (x - mx) * (x - mx);
        syy += (y - my) * (y - my);
    }
    sxy / (sxx * syy).sqrt()
}

const CORRELATION_GROUPS: usize = 100;

/// Sample mean of a functional with its plug-in standard error.
pub fn estimate(batch: &SampleBatch, functional: Functional) -> Result<Estimate> {
    if batch.pairs.len() < MIN_SAMPLES {
        return Err(Error::Precondition(format!(
            "estimation needs at least {MIN_SAMPLES} samples, got {}",
            batch.pairs.len()
        )));
    }
    let pairs = batch.pairs.iter().copied();
    Ok(match functional {
        Functional::Survival { x, y } => mean_and_se(pairs.map(|(a, b)| f64::from(u8::from(a > x && b > y)))),
        Functional::ProductMoment { i, j } => mean_and_se(pairs.map(|(a, b)| a.powi(i) * b.powi(j))),
        Functional::MttfSeries => mean_and_se(pairs.map(|(a, b)| a.min(b))),
        Functional::MttfParallel => mean_and_se(pairs.map(|(a, b)| a.max(b))),
        Functional::AtomFraction => mean_and_se(pairs.map(|(a, b)| f64::from(u8::from(a == b)))),
        Functional::Correlation => {
            let size = batch.pairs.len() / CORRELATION_GROUPS;
            if size < 2 {
                return Err(Error::Precondition("correlation needs at least 200 samples".into()));
            }
            let groups = mean_and_se(batch.pairs.chunks_exact(size).take(CORRELATION_GROUPS).map(correlation));
            Estimate {
                value: correlation(&batch.pairs),
                std_error: groups.std_error,
            }
        }
    })
}

/// A goodness-of-fit statistic compared with its critical value.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TestOutcome {
    pub statistic: f64,
    pub critical: f64,
    pub p_value: f64,
    pub pass: bool,
}

/// Kolmogorov limiting survival `P(K > λ) = 2 Σ (−1)^{k−1} e^{−2k²λ²}`.
pub fn kolmogorov_sf(lambda: f64) -> f64 {
    if lambda <= 0.0 {
        return 1.0;
    }
    if lambda < 0.2 {
        return 1.0;
    }
    let mut sum = 0.0;
    for k in 1..=100 {
        let kf = k as f64;
        let term = (-2.0 * kf * kf * lambda * lambda).exp();
        sum += if k % 2 == 1 { term } else { -term };
        if term < 1e-17 {
            break;
        }
    }
    (2.0 * sum).clamp(0.0, 1.0)
}

fn sorted(samples: &[f64]) -> Result<Vec<f64>> {
    if samples.iter().any(|v| v.is_nan()) {
        return Err(Error::InvalidParameter("samples contain NaN".into()));
    }
    let mut s = samples.to_vec();
    s.sort_by(f64::total_cmp);
    Ok(s)
}

/// One-sample Kolmogorov–Smirnov test at level 0.01.
pub fn ks_statistic(samples: &[f64], cdf: impl Fn(f64) -> f64) -> Result<TestOutcome> {
    if samples.len() < MIN_SAMPLES {
        return Err(Error::Precondition(format!("KS test needs at least {MIN_SAMPLES} samples")));
    }
    let s = sorted(samples)?;
    let n = s.len() as f64;
    let mut d = 0.0f64;
    for (i, &x) in s.iter().enumerate() {
        let f = cdf(x);
        d = d.max((i + 1) as f64 / n - f).max(f - i as f64 / n);
    }
    let critical = KS_CRITICAL_01 / n.sqrt();
    Ok(TestOutcome {
        statistic: d,
        critical,
        p_value: kolmogorov_sf(d * n.sqrt()),
        pass: d < critical,
    })
}

/// Two-sample Kolmogorov–Smirnov test at level 0.01.
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> Result<TestOutcome> {
    if a.len() < MIN_SAMPLES || b.len() < MIN_SAMPLES {
        return Err(Error::Precondition(format!("KS test needs at least {MIN_SAMPLES} samples per side")));
    }
    let (sa, sb) = (sorted(a)?, sorted(b)?);
    let (n, m) = (sa.len() as f64, sb.len() as f64);
    let (mut i, mut j) = (0usize, 0usize);
    let mut d = 0.0f64;
    while i < sa.len() && j < sb.len() {
        let v = sa[i].min(sb[j]);
        while i < sa.len() && sa[i] <= v {
            i += 1;
        }
        while j < sb.len() && sb[j] <= v {
            j += 1;
        }
        d = d.max((i as f64 / n - j as f64 / m).abs());
    }
    let scale = (n * m / (n + m)).sqrt();
    Ok(TestOutcome {
        statistic: d,
        critical: KS_CRITICAL_01 / scale,
        p_value: kolmogorov_sf(d * scale),
        pass: d < KS_CRITICAL_01 / scale,
    })
}

fn quartile_bin(edges: &[f64; 3], v: f64) -> usize {
    edges.iter().filter(|&&e| v > e).count()
}

fn quartile_edges(values: &[f64]) -> Result<[f64; 3]> {
    let s = sorted(values)?;
    let q = |p: f64| s[((p * s.len() as f64) as usize).min(s.len() - 1)];
    Ok([q(0.25), q(0.5), q(0.75)])
}

/// Pearson chi-square test of independence on quartile bins, against the
/// 0.999 quantile. Rows or columns left empty by tied quartiles (an atom)
/// are dropped before counting degrees of freedom.
pub fn chi_square_independence(a: &[f64], b: &[f64]) -> Result<TestOutcome> {
    if a.len() != b.len() {
        return Err(Error::InvalidParameter("paired samples differ in length".into()));
    }
    if a.len() < MIN_SAMPLES {
        return Err(Error::Precondition(format!("chi-square test needs at least {MIN_SAMPLES} samples")));
    }
    let (ea, eb) = (quartile_edges(a)?, quartile_edges(b)?);
    let mut table = [[0.0f64; 4]; 4];
    for (&x, &y) in a.iter().zip(b) {
        table[quartile_bin(&ea, x)][quartile_bin(&eb, y)] += 1.0;
    }
    let rows: Vec<f64> = table.iter().map(|r| r.iter().sum()).collect();
    let cols: Vec<f64> = (0..4).map(|j| table.iter().map(|r| r[j]).sum()).collect();
    let live_rows: Vec<usize> = (0..4).filter(|&i| rows[i] > 0.0).collect();
    let live_cols: Vec<usize> = (0..4).filter(|&j| cols[j] > 0.0).collect();
    let n = a.len() as f64;
    let mut stat = 0.0;
    for &i in &live_rows {
        for &j in &live_cols {
            let expected = rows[i] * cols[j] / n;
            stat += (table[i][j] - expected).powi(2) / expected;
        }
    }
    let dof = (live_rows.len().saturating_sub(1) * live_cols.len().saturating_sub(1)) as f64;
    if dof == 0.0 {
        return Err(Error::Precondition("chi-square test needs at least two nonempty bins per variable".into()));
    }
    let chi = ChiSquared::new(dof).map_err(|e| Error::InvalidParameter(e.to_string()))?;
    let critical = chi.inverse_cdf(0.999);
    Ok(TestOutcome {
        statistic: stat,
        critical,
        p_value: chi.sf(stat),
        pass: stat < critical,
    })
}
