//! Seeded data-generating processes for parameter-recovery and calibration
//! work.
//!
//! Each unit `i` draws from its own ChaCha8 stream: the generator is seeded
//! with `DgpSpec::seed` and switched to stream `i` before the unit's draws.
//! Units are therefore independent of generation order, and a parallel
//! generator that follows the same rule reproduces the serial output
//! exactly. Within a unit the draw order is: covariates (in spec order),
//! location, structural-zero indicator, count.

use std::collections::HashSet;
use std::sync::OnceLock;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::data::{CountyObservation, Dataset, INTERCEPT};
use crate::error::{Error, Result};
use crate::glm::{ln_factorial, sigmoid, Family, ModelSpec};
use crate::optimizer::{fit, fitted_means, Component, FitResult, OptimOptions};
use crate::spatial::EARTH_RADIUS_KM;

/// South-west corner of `UniformSquare` layouts (degrees).
pub const SQUARE_ORIGIN: (f64, f64) = (37.0, -98.0);
/// Poisson draws switch from inversion to PTRS rejection at this rate.
pub const INVERSION_LIMIT: f64 = 30.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind")]
pub enum CovariateDistribution {
    Normal { mean: f64, sd: f64 },
    Bernoulli { q: f64 },
    Uniform { low: f64, high: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CovariateGenerator {
    pub name: String,
    pub distribution: CovariateDistribution,
}

impl CovariateGenerator {
    pub fn new(name: impl Into<String>, distribution: CovariateDistribution) -> Self {
        Self {
            name: name.into(),
            distribution,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind")]
pub enum Layout {
    /// Uniform over a square of side `side_km` whose south-west corner is
    /// [`SQUARE_ORIGIN`].
    UniformSquare { side_km: f64 },
    /// A uniformly chosen centre (lat, lon) plus an isotropic normal offset
    /// with standard deviation `spread_km`.
    Clustered { centers: Vec<(f64, f64)>, spread_km: f64 },
}

/// What the generated outcome is.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Response {
    /// ZIP counts; an empty `gamma` gives plain Poisson counts.
    #[default]
    Counts,
    /// 0/1 presence with `P(y = 1) = sigmoid(x' beta)`.
    Binary,
}

/// A data-generating process. `beta` (and `gamma`, when non-empty) holds an
/// intercept followed by one slope per covariate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DgpSpec {
    pub n: usize,
    pub covariates: Vec<CovariateGenerator>,
    pub beta: Vec<f64>,
    #[serde(default)]
    pub gamma: Vec<f64>,
    #[serde(default)]
    pub response: Response,
    pub layout: Layout,
    pub seed: u64,
}

impl DgpSpec {
    pub fn covariate_names(&self) -> Vec<String> {
        self.covariates.iter().map(|c| c.name.clone()).collect()
    }

    pub fn validate(&self) -> Result<()> {
        let invalid = |m: String| Err(Error::InvalidSpec(m));
        if self.n == 0 {
            return invalid("n must be at least 1".into());
        }
        let k = self.covariates.len() + 1;
        if self.beta.len() != k {
            return invalid(format!("beta has {} entries, expected {k}", self.beta.len()));
        }
        if !self.gamma.is_empty() && self.gamma.len() != k {
            return invalid(format!("gamma has {} entries, expected 0 or {k}", self.gamma.len()));
        }
        if self.response == Response::Binary && !self.gamma.is_empty() {
            return invalid("binary response takes no gamma".into());
        }
        if self.beta.iter().chain(&self.gamma).any(|v| !v.is_finite()) {
            return invalid("coefficients must be finite".into());
        }
        let mut names = HashSet::new();
        for c in &self.covariates {
            if !names.insert(c.name.as_str()) {
                return invalid(format!("covariate '{}' listed twice", c.name));
            }
            let ok = match c.distribution {
                CovariateDistribution::Normal { mean, sd } => mean.is_finite() && sd.is_finite() && sd > 0.0,
                CovariateDistribution::Bernoulli { q } => q > 0.0 && q < 1.0,
                CovariateDistribution::Uniform { low, high } => low.is_finite() && high.is_finite() && low < high,
            };
            if !ok {
                return invalid(format!("bad distribution for '{}'", c.name));
            }
        }
        match &self.layout {
            Layout::UniformSquare { side_km } if !(*side_km > 0.0 && side_km.is_finite()) => {
                invalid("side_km must be positive".into())
            }
            Layout::Clustered { centers, spread_km } => {
                if centers.is_empty() || !(*spread_km >= 0.0 && spread_km.is_finite()) {
                    return invalid("clustered layout needs centres and a non-negative spread".into());
                }
                if centers.iter().any(|&(la, lo)| !(-90.0..=90.0).contains(&la) || !(-180.0..=180.0).contains(&lo)) {
                    return invalid("cluster centre outside the coordinate range".into());
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }
}

/// The unit-`i` generator.
pub fn unit_rng(seed: u64, unit: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(unit as u64);
    rng
}

/// Poisson draw: inversion below [`INVERSION_LIMIT`], PTRS rejection
/// (Hörmann 1993) at and above it.
pub fn sample_poisson<R: Rng + ?Sized>(rng: &mut R, lambda: f64) -> u64 {
    if !(lambda > 0.0) {
        return 0;
    }
    if lambda < INVERSION_LIMIT {
        let u: f64 = rng.random();
        let mut k = 0u64;
        let mut p = (-lambda).exp();
        let mut cdf = p;
        while u > cdf {
            k += 1;
            p *= lambda / k as f64;
            cdf += p;
            if p == 0.0 && cdf < u {
                // rounding left the cdf short of u; the remaining mass is negligible
                break;
            }
        }
        return k;
    }
    let slam = lambda.sqrt();
    let loglam = lambda.ln();
    let b = 0.931 + 2.53 * slam;
    let a = -0.059 + 0.02483 * b;
    let inv_alpha = 1.1239 + 1.1328 / (b - 3.4);
    let vr = 0.9277 - 3.6224 / (b - 2.0);
    loop {
        let u: f64 = rng.random::<f64>() - 0.5;
        let v: f64 = rng.random();
        let us = 0.5 - u.abs();
        let k = ((2.0 * a / us + b) * u + lambda + 0.43).floor();
        if us >= 0.07 && v <= vr {
            return k as u64;
        }
        if k < 0.0 || (us < 0.013 && v > us) {
            continue;
        }
        if v.ln() + inv_alpha.ln() - (a / (us * us) + b).ln() <= -lambda + k * loglam - ln_factorial(k as u64) {
            return k as u64;
        }
    }
}

/// A ZIP draw and whether it came from the point mass at zero.
pub fn sample_zip<R: Rng + ?Sized>(rng: &mut R, p: f64, lambda: f64) -> (u64, bool) {
    let structural = rng.random::<f64>() < p;
    if structural {
        (0, true)
    } else {
        (sample_poisson(rng, lambda), false)
    }
}

fn draw_covariate<R: Rng + ?Sized>(rng: &mut R, dist: &CovariateDistribution) -> f64 {
    match *dist {
        CovariateDistribution::Normal { mean, sd } => Normal::new(mean, sd).expect("validated").sample(rng),
        CovariateDistribution::Bernoulli { q } => f64::from(u8::from(rng.random::<f64>() < q)),
        CovariateDistribution::Uniform { low, high } => low + (high - low) * rng.random::<f64>(),
    }
}

fn offset_km(origin: (f64, f64), north_km: f64, east_km: f64) -> (f64, f64) {
    let km_per_deg = EARTH_RADIUS_KM.to_radians();
    let lat = (origin.0 + north_km / km_per_deg).clamp(-90.0, 90.0);
    let coslat = lat.to_radians().cos().max(1e-6);
    let mut lon = origin.1 + east_km / (km_per_deg * coslat);
    lon = (lon + 180.0).rem_euclid(360.0) - 180.0;
    (lat, lon)
}

fn draw_location<R: Rng + ?Sized>(rng: &mut R, layout: &Layout) -> (f64, f64) {
    match layout {
        Layout::UniformSquare { side_km } => {
            let north = rng.random::<f64>() * side_km;
            let east = rng.random::<f64>() * side_km;
            offset_km(SQUARE_ORIGIN, north, east)
        }
        Layout::Clustered { centers, spread_km } => {
            let c = centers[rng.random_range(0..centers.len())];
            let north: f64 = rand_distr::StandardNormal.sample(rng);
            let east: f64 = rand_distr::StandardNormal.sample(rng);
            offset_km(c, north * spread_km, east * spread_km)
        }
    }
}

fn linear(coef: &[f64], x: &[f64]) -> f64 {
    coef[0] + coef[1..].iter().zip(x).map(|(b, v)| b * v).sum::<f64>()
}

/// A generated dataset together with the latent quantities behind it.
#[derive(Debug, Clone, PartialEq)]
pub struct Simulation {
    pub dataset: Dataset,
    /// Structural-zero indicator per unit (always false without inflation).
    pub structural_zero: Vec<bool>,
    /// Inflation probability per unit (0 without inflation).
    pub p: Vec<f64>,
    /// Poisson rate, or presence probability for a binary response.
    pub lambda: Vec<f64>,
}

pub fn simulate(spec: &DgpSpec) -> Result<Simulation> {
    spec.validate()?;
    let k = spec.covariates.len();
    let mut observations = Vec::with_capacity(spec.n);
    let mut structural_zero = Vec::with_capacity(spec.n);
    let mut ps = Vec::with_capacity(spec.n);
    let mut lambdas = Vec::with_capacity(spec.n);
    let width = spec.n.to_string().len().max(5);
    for i in 0..spec.n {
        let mut rng = unit_rng(spec.seed, i);
        let x: Vec<f64> = spec
            .covariates
            .iter()
            .map(|c| draw_covariate(&mut rng, &c.distribution))
            .collect();
        debug_assert_eq!(x.len(), k);
        let (lat, lon) = draw_location(&mut rng, &spec.layout);
        let eta = linear(&spec.beta, &x);
        let (count, structural, p, lambda) = match spec.response {
            Response::Binary => {
                let prob = sigmoid(eta);
                (u64::from(rng.random::<f64>() < prob), false, 0.0, prob)
            }
            Response::Counts => {
                let p = if spec.gamma.is_empty() { 0.0 } else { sigmoid(linear(&spec.gamma, &x)) };
                let lambda = eta.exp();
                let (count, structural) = sample_zip(&mut rng, p, lambda);
                (count, structural, p, lambda)
            }
        };
        observations.push(CountyObservation::new(format!("{:0width$}", i + 1), lat, lon, count, x));
        structural_zero.push(structural);
        ps.push(p);
        lambdas.push(lambda);
    }
    Ok(Simulation {
        dataset: Dataset::new(spec.covariate_names(), observations)?,
        structural_zero,
        p: ps,
        lambda: lambdas,
    })
}

/// Draws a dataset from `spec`; identical specs give identical datasets.
pub fn generate(spec: &DgpSpec) -> Result<Dataset> {
    Ok(simulate(spec)?.dataset)
}

/// Quadrature nodes and weights for one covariate distribution.
fn quadrature(dist: &CovariateDistribution) -> Vec<(f64, f64)> {
    match *dist {
        CovariateDistribution::Normal { mean, sd } => {
            // trapezoid rule on +-8 sd, step 0.2 sd; geometrically accurate for
            // smooth integrands against a Gaussian
            let h = 0.2;
            let nodes: Vec<f64> = (-40..=40).map(|j| j as f64 * h).collect();
            let dens = |t: f64| (-0.5 * t * t).exp() / (2.0 * std::f64::consts::PI).sqrt();
            let total: f64 = nodes.iter().map(|&t| dens(t) * h).sum();
            nodes.iter().map(|&t| (mean + sd * t, dens(t) * h / total)).collect()
        }
        CovariateDistribution::Bernoulli { q } => vec![(0.0, 1.0 - q), (1.0, q)],
        CovariateDistribution::Uniform { low, high } => {
            let m = 400;
            (0..m)
                .map(|j| (low + (high - low) * (j as f64 + 0.5) / m as f64, 1.0 / m as f64))
                .collect()
        }
    }
}

/// Expected zero share and expected count among positive counts, by
/// tensor-product quadrature over the covariate distributions.
pub fn expected_zero_share_and_positive_mean(spec: &DgpSpec) -> Result<(f64, f64)> {
    let grids: Vec<Vec<(f64, f64)>> = spec.covariates.iter().map(|c| quadrature(&c.distribution)).collect();
    let size: usize = grids.iter().map(Vec::len).product();
    if size > 2_000_000 {
        return Err(Error::InvalidSpec("too many covariates for quadrature calibration".into()));
    }
    let mut zero = 0.0;
    let mut mean = 0.0;
    let mut idx = vec![0usize; grids.len()];
    let mut x = vec![0.0; grids.len()];
    for _ in 0..size {
        let mut w = 1.0;
        for (d, g) in grids.iter().enumerate() {
            x[d] = g[idx[d]].0;
            w *= g[idx[d]].1;
        }
        let lambda = linear(&spec.beta, &x).exp();
        let p = if spec.gamma.is_empty() { 0.0 } else { sigmoid(linear(&spec.gamma, &x)) };
        zero += w * (p + (1.0 - p) * (-lambda).exp());
        mean += w * (1.0 - p) * lambda;
        for d in 0..grids.len() {
            idx[d] += 1;
            if idx[d] < grids[d].len() {
                break;
            }
            idx[d] = 0;
        }
    }
    Ok((zero, mean / (1.0 - zero)))
}

fn bisect(mut lo: f64, mut hi: f64, mut f: impl FnMut(f64) -> Result<f64>) -> Result<f64> {
    // f increasing, root assumed in [lo, hi]
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if f(mid)? < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < 1e-13 {
            break;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Sets the `beta` and `gamma` intercepts so that the expected zero share and
/// the expected positive count hit the targets. Slopes are left alone.
pub fn calibrate_intercepts(spec: &mut DgpSpec, zero_share: f64, positive_mean: f64) -> Result<()> {
    if spec.gamma.is_empty() || spec.response != Response::Counts {
        return Err(Error::InvalidSpec("calibration needs a ZIP count spec".into()));
    }
    if !(0.0 < zero_share && zero_share < 1.0 && positive_mean > 1.0) {
        return Err(Error::InvalidSpec("targets out of range".into()));
    }
    for _ in 0..200 {
        let before = (spec.beta[0], spec.gamma[0]);
        let mut trial = spec.clone();
        spec.gamma[0] = bisect(-40.0, 40.0, |g| {
            trial.gamma[0] = g;
            Ok(expected_zero_share_and_positive_mean(&trial)?.0 - zero_share)
        })?;
        let mut trial = spec.clone();
        spec.beta[0] = bisect(-40.0, 40.0, |b| {
            trial.beta[0] = b;
            Ok(expected_zero_share_and_positive_mean(&trial)?.1 - positive_mean)
        })?;
        if (spec.beta[0] - before.0).abs() < 1e-12 && (spec.gamma[0] - before.1).abs() < 1e-12 {
            return Ok(());
        }
    }
    Err(Error::InvalidSpec("intercept calibration did not settle".into()))
}

/// Units in the paper-scale preset (counties in the source study).
pub const PAPER_SCALE_N: usize = 2947;
/// Zero share targeted by the paper-scale preset.
pub const PAPER_SCALE_ZERO_SHARE: f64 = 0.505;
/// Mean count among counties with at least one institution. This is a
/// free calibration constant, not an observed value.
pub const PAPER_SCALE_POSITIVE_MEAN: f64 = 2.0;

/// Three standardized-scale covariates, ZIP counts, units scattered around
/// a handful of metro centres, intercepts calibrated to
/// [`PAPER_SCALE_ZERO_SHARE`] and [`PAPER_SCALE_POSITIVE_MEAN`].
pub fn paper_scale_preset(seed: u64) -> DgpSpec {
    let mut spec = DgpSpec {
        n: PAPER_SCALE_N,
        covariates: vec![
            CovariateGenerator::new("banks_per_10k", CovariateDistribution::Normal { mean: 0.0, sd: 1.0 }),
            CovariateGenerator::new("metro_county", CovariateDistribution::Bernoulli { q: 0.35 }),
            CovariateGenerator::new("pct_bachelor", CovariateDistribution::Normal { mean: 0.0, sd: 1.0 }),
        ],
        beta: vec![0.0, -0.30, 0.60, 0.25],
        gamma: vec![0.0, 0.40, -0.80, -0.30],
        response: Response::Counts,
        layout: Layout::Clustered {
            centers: vec![
                (34.05, -118.24),
                (37.77, -122.42),
                (47.61, -122.33),
                (39.74, -104.99),
                (41.88, -87.63),
                (42.33, -83.05),
                (39.96, -82.99),
                (39.29, -76.61),
                (42.36, -71.06),
                (29.76, -95.37),
                (33.75, -84.39),
                (37.84, -84.27),
            ],
            spread_km: 250.0,
        },
        seed,
    };
    // the intercepts do not depend on the seed, so calibrate once
    static INTERCEPTS: OnceLock<(f64, f64)> = OnceLock::new();
    let (b0, g0) = *INTERCEPTS.get_or_init(|| {
        let mut s = spec.clone();
        calibrate_intercepts(&mut s, PAPER_SCALE_ZERO_SHARE, PAPER_SCALE_POSITIVE_MEAN)
            .expect("paper-scale preset calibrates");
        (s.beta[0], s.gamma[0])
    });
    spec.beta[0] = b0;
    spec.gamma[0] = g0;
    spec
}

/// Named presets accepted by the command line.
pub fn preset(name: &str, seed: u64) -> Result<DgpSpec> {
    match name {
        "paper-scale" => Ok(paper_scale_preset(seed)),
        other => Err(Error::InvalidSpec(format!("unknown preset '{other}'"))),
    }
}

/// Largest tolerated |estimate - truth| / std_error before a coefficient is
/// flagged.
pub const RECOVERY_Z: f64 = 3.0;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RecoveryRow {
    pub component: Component,
    pub name: String,
    /// `None` when the generating process has no counterpart (an inflation
    /// coefficient fitted to data generated without inflation).
    pub truth: Option<f64>,
    pub estimate: f64,
    pub std_error: f64,
    pub z_gap: Option<f64>,
    pub flagged: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RecoveryReport {
    pub rows: Vec<RecoveryRow>,
    pub converged: bool,
    pub sample_mean: f64,
    pub sample_variance: f64,
    /// Average of the fitted means.
    pub mean_fitted: f64,
    #[serde(skip)]
    pub fit: FitResult,
}

impl RecoveryReport {
    pub fn all_clear(&self) -> bool {
        self.rows.iter().all(|r| !r.flagged)
    }

    /// Sample variance of the counts above the average fitted mean.
    pub fn overdispersed(&self) -> bool {
        self.sample_variance > self.mean_fitted
    }
}

fn truth_for(spec: &DgpSpec, coef: &[f64], name: &str) -> f64 {
    if name == INTERCEPT {
        return coef[0];
    }
    spec.covariates
        .iter()
        .position(|c| c.name == name)
        .map_or(0.0, |j| coef[j + 1])
}

/// Generates from `spec`, fits `model`, and compares every estimate with its
/// generating value. A covariate the process does not use has truth 0; a
/// logit fitted to count data has no truth.
pub fn recovery_trial(spec: &DgpSpec, model: &ModelSpec, options: &OptimOptions) -> Result<RecoveryReport> {
    if spec.response == Response::Binary && model.family != Family::Logit {
        return Err(Error::InvalidArgument(format!(
            "a {} model cannot be checked against a binary-response process",
            model.family
        )));
    }
    let dataset = generate(spec)?;
    let result = fit(model, &dataset, options)?;
    let rows = result
        .coefficients
        .iter()
        .map(|c| {
            let truth = match c.component {
                Component::Outcome if model.family == Family::Logit && spec.response == Response::Counts => None,
                Component::Outcome => Some(truth_for(spec, &spec.beta, &c.name)),
                Component::Inflation if spec.gamma.is_empty() => None,
                Component::Inflation => Some(truth_for(spec, &spec.gamma, &c.name)),
            };
            let z_gap = truth.map(|t| (c.estimate - t).abs() / c.std_error);
            RecoveryRow {
                component: c.component,
                name: c.name.clone(),
                truth,
                estimate: c.estimate,
                std_error: c.std_error,
                z_gap,
                flagged: z_gap.is_some_and(|z| z > RECOVERY_Z),
            }
        })
        .collect();

    let y: Vec<f64> = dataset.counts().iter().map(|&c| c as f64).collect();
    let n = y.len() as f64;
    let sample_mean = y.iter().sum::<f64>() / n;
    let sample_variance = y.iter().map(|v| (v - sample_mean).powi(2)).sum::<f64>() / (n - 1.0);
    let fitted = fitted_means(&result, model, &dataset)?;
    let mean_fitted = fitted.iter().sum::<f64>() / n;

    Ok(RecoveryReport {
        rows,
        converged: result.converged,
        sample_mean,
        sample_variance,
        mean_fitted,
        fit: result,
    })
}
