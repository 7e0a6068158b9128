#![allow(dead_code)]

use countloc::data::{CountyObservation, Dataset, DesignMatrix};
use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Intercept plus `k` standard-normal columns.
pub fn random_design(rng: &mut ChaCha8Rng, n: usize, k: usize) -> DesignMatrix {
    let values = DMatrix::from_fn(n, k + 1, |_, j| if j == 0 { 1.0 } else { StandardNormal.sample(rng) });
    let mut names = vec!["Intercept".to_string()];
    names.extend((1..=k).map(|j| format!("x{j}")));
    DesignMatrix::new(values, names, true).unwrap()
}

pub fn random_counts(rng: &mut ChaCha8Rng, n: usize, max: u64) -> Vec<u64> {
    (0..n).map(|_| rng.random_range(0..=max)).collect()
}

/// Dataset with the given counts, no covariates, centroids on a diagonal.
pub fn count_dataset(counts: &[u64]) -> Dataset {
    let obs = counts
        .iter()
        .enumerate()
        .map(|(i, &c)| CountyObservation::new(format!("u{i}"), i as f64 * 0.001, i as f64 * 0.001, c, vec![]))
        .collect();
    Dataset::new(vec![], obs).unwrap()
}

/// Central finite differences with step `h`.
pub fn fd_gradient(f: impl Fn(&[f64]) -> f64, theta: &[f64], h: f64) -> Vec<f64> {
    let mut point = theta.to_vec();
    (0..theta.len())
        .map(|j| {
            point[j] = theta[j] + h;
            let up = f(&point);
            point[j] = theta[j] - h;
            let down = f(&point);
            point[j] = theta[j];
            (up - down) / (2.0 * h)
        })
        .collect()
}

/// Largest `|a - f| / max(1, |a|)` over components.
pub fn max_rel_err(analytic: &[f64], numeric: &[f64]) -> f64 {
    analytic
        .iter()
        .zip(numeric)
        .map(|(a, f)| (a - f).abs() / a.abs().max(1.0))
        .fold(0.0, f64::max)
}

/// Points on a `rows x cols` lattice `spacing_km` apart near the equator.
pub fn grid(rows: usize, cols: usize, spacing_km: f64) -> Vec<(f64, f64)> {
    let deg = (spacing_km / countloc::spatial::EARTH_RADIUS_KM).to_degrees();
    let mut pts = Vec::with_capacity(rows * cols);
    for r in 0..rows {
        for c in 0..cols {
            pts.push((r as f64 * deg, c as f64 * deg));
        }
    }
    pts
}

/// The displayed G_i* formula evaluated term by term on a dense matrix.
pub fn gstar_direct(values: &[f64], w: &[Vec<f64>]) -> Vec<f64> {
    let n = values.len() as f64;
    let xbar = values.iter().sum::<f64>() / n;
    let s = (values.iter().map(|x| x * x).sum::<f64>() / n - xbar * xbar).max(0.0).sqrt();
    w.iter()
        .map(|row| {
            let sw: f64 = row.iter().sum();
            let sw2: f64 = row.iter().map(|v| v * v).sum();
            let swx: f64 = row.iter().zip(values).map(|(a, b)| a * b).sum();
            let bracket = (n * sw2 - sw * sw) / (n - 1.0);
            if s == 0.0 || bracket <= 0.0 {
                0.0
            } else {
                (swx - xbar * sw) / (s * bracket.sqrt())
            }
        })
        .collect()
}
