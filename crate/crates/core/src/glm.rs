//! Log-likelihoods, scores and distribution helpers for the logit, Poisson
//! and zero-inflated Poisson (ZIP) families.
//!
//! The count mean uses the log link, `lambda_i = exp(x_i' beta)`. In the ZIP
//! model the structural-zero probability is `p_i = sigmoid(z_i' gamma)`, so an
//! observation has likelihood `p_i 1(y_i = 0) + (1 - p_i) Poisson(y_i; lambda_i)`.
//! All terms are evaluated in log space; nothing is clamped.

use std::fmt;
use std::str::FromStr;

use nalgebra::DVector;
use serde::{Deserialize, Serialize};
use statrs::function::gamma::ln_gamma;

use crate::data::DesignMatrix;
use crate::error::{check_len, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Family {
    Logit,
    Poisson,
    Zip,
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Family::Logit => "logit",
            Family::Poisson => "poisson",
            Family::Zip => "zip",
        })
    }
}

impl FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "logit" => Ok(Family::Logit),
            "poisson" => Ok(Family::Poisson),
            "zip" => Ok(Family::Zip),
            other => Err(Error::InvalidArgument(format!("unknown family '{other}'"))),
        }
    }
}

/// Model family plus covariate selection.
///
/// For ZIP, `inflation_covariates = None` means "same covariates as the count
/// equation"; `Some(vec![])` gives an intercept-only inflation equation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelSpec {
    pub family: Family,
    pub count_covariates: Vec<String>,
    #[serde(default)]
    pub inflation_covariates: Option<Vec<String>>,
    #[serde(default = "yes")]
    pub add_intercept: bool,
}

fn yes() -> bool {
    true
}

impl ModelSpec {
    pub fn new(family: Family, count_covariates: Vec<String>) -> Self {
        Self {
            family,
            count_covariates,
            inflation_covariates: None,
            add_intercept: true,
        }
    }

    pub fn with_inflation(mut self, covariates: Vec<String>) -> Self {
        self.inflation_covariates = Some(covariates);
        self
    }

    pub fn validate(&self) -> Result<()> {
        match (&self.inflation_covariates, self.family) {
            (Some(c), family) if family != Family::Zip && !c.is_empty() => Err(Error::InvalidArgument(format!(
                "inflation covariates given for the {family} family"
            ))),
            _ => Ok(()),
        }
    }

    /// Covariates of the inflation equation (ZIP only).
    pub fn inflation_names(&self) -> &[String] {
        self.inflation_covariates.as_deref().unwrap_or(&self.count_covariates)
    }
}

/// Coefficients: `beta` for the outcome/count equation, `gamma` for the ZIP
/// inflation equation (empty otherwise).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Params {
    pub beta: Vec<f64>,
    pub gamma: Vec<f64>,
}

impl Params {
    pub fn new(beta: Vec<f64>, gamma: Vec<f64>) -> Self {
        Self { beta, gamma }
    }

    pub fn concat(&self) -> Vec<f64> {
        self.beta.iter().chain(&self.gamma).copied().collect()
    }

    pub fn split(theta: &[f64], n_beta: usize) -> Self {
        Self {
            beta: theta[..n_beta].to_vec(),
            gamma: theta[n_beta..].to_vec(),
        }
    }
}

pub fn sigmoid(t: f64) -> f64 {
    if t >= 0.0 {
        1.0 / (1.0 + (-t).exp())
    } else {
        let e = t.exp();
        e / (1.0 + e)
    }
}

/// `ln sigmoid(t)` without overflow for large |t|.
pub fn log_sigmoid(t: f64) -> f64 {
    if t >= 0.0 {
        -(-t).exp().ln_1p()
    } else {
        t - t.exp().ln_1p()
    }
}

fn log_add_exp(a: f64, b: f64) -> f64 {
    let m = a.max(b);
    if m == f64::NEG_INFINITY {
        return m;
    }
    m + ((a - m).exp() + (b - m).exp()).ln()
}

pub fn ln_factorial(y: u64) -> f64 {
    if y < 2 {
        0.0
    } else {
        ln_gamma(y as f64 + 1.0)
    }
}

pub fn poisson_pmf(lambda: f64, y: u64) -> f64 {
    if lambda == 0.0 {
        return if y == 0 { 1.0 } else { 0.0 };
    }
    (-lambda + y as f64 * lambda.ln() - ln_factorial(y)).exp()
}

fn check_p_lambda(p: f64, lambda: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::DomainError(format!("probability {p} outside [0, 1]")));
    }
    if !(lambda > 0.0 && lambda.is_finite()) {
        return Err(Error::DomainError(format!("rate {lambda} must be positive and finite")));
    }
    Ok(())
}

/// Zero-inflated Poisson probability mass at `y`.
pub fn zip_pmf(p: f64, lambda: f64, y: u64) -> Result<f64> {
    check_p_lambda(p, lambda)?;
    let base = (1.0 - p) * poisson_pmf(lambda, y);
    Ok(if y == 0 { p + base } else { base })
}

/// Mean `(1-p) lambda` and variance `(1-p) lambda (1 + p lambda)`.
pub fn zip_moments(p: f64, lambda: f64) -> Result<(f64, f64)> {
    check_p_lambda(p, lambda)?;
    let mean = (1.0 - p) * lambda;
    Ok((mean, mean * (1.0 + p * lambda)))
}

fn check_design(x: &DesignMatrix, coef: &[f64], n: usize) -> Result<()> {
    check_len("coefficients", x.ncols(), coef.len())?;
    check_len("observations", x.nrows(), n)
}

pub fn logit_loglik(beta: &[f64], x: &DesignMatrix, y01: &[u8]) -> Result<f64> {
    check_design(x, beta, y01.len())?;
    let eta = x.linear_predictor(beta)?;
    Ok(eta
        .iter()
        .zip(y01)
        .map(|(&e, &y)| if y != 0 { log_sigmoid(e) } else { log_sigmoid(-e) })
        .sum())
}

pub fn poisson_loglik(beta: &[f64], x: &DesignMatrix, y: &[u64]) -> Result<f64> {
    check_design(x, beta, y.len())?;
    let eta = x.linear_predictor(beta)?;
    Ok(eta
        .iter()
        .zip(y)
        .map(|(&e, &y)| y as f64 * e - e.exp() - ln_factorial(y))
        .sum())
}

/// Per-observation ZIP log-likelihood given the two linear predictors.
/// Returns `(loglik, ln p)`.
fn zip_term(eta_x: f64, eta_z: f64, y: u64) -> (f64, f64) {
    let ln_p = log_sigmoid(eta_z);
    let ln_1mp = log_sigmoid(-eta_z);
    let lambda = eta_x.exp();
    let ll = if y == 0 {
        log_add_exp(ln_p, ln_1mp - lambda)
    } else {
        ln_1mp + y as f64 * eta_x - lambda - ln_factorial(y)
    };
    (ll, ln_p)
}

pub fn zip_loglik(beta: &[f64], gamma: &[f64], x: &DesignMatrix, z: &DesignMatrix, y: &[u64]) -> Result<f64> {
    check_design(x, beta, y.len())?;
    check_design(z, gamma, y.len())?;
    let eta_x = x.linear_predictor(beta)?;
    let eta_z = z.linear_predictor(gamma)?;
    Ok((0..y.len()).map(|i| zip_term(eta_x[i], eta_z[i], y[i]).0).sum())
}

fn require_z<'a>(family: Family, z: Option<&'a DesignMatrix>) -> Result<Option<&'a DesignMatrix>> {
    match (family, z) {
        (Family::Zip, None) => Err(Error::InvalidArgument("ZIP requires an inflation design".into())),
        (Family::Zip, z) => Ok(z),
        _ => Ok(None),
    }
}

fn binarize(y: &[u64]) -> Vec<u8> {
    y.iter().map(|&c| u8::from(c > 0)).collect()
}

/// Log-likelihood of any family. For the logit, counts are reduced to
/// presence indicators.
pub fn loglik(family: Family, params: &Params, x: &DesignMatrix, z: Option<&DesignMatrix>, y: &[u64]) -> Result<f64> {
    match (family, require_z(family, z)?) {
        (Family::Logit, _) => logit_loglik(&params.beta, x, &binarize(y)),
        (Family::Poisson, _) => poisson_loglik(&params.beta, x, y),
        (Family::Zip, Some(z)) => zip_loglik(&params.beta, &params.gamma, x, z, y),
        (Family::Zip, None) => unreachable!(),
    }
}

fn xt_times(x: &DesignMatrix, r: Vec<f64>) -> Vec<f64> {
    x.values().tr_mul(&DVector::from_vec(r)).as_slice().to_vec()
}

/// Analytic score with respect to `(beta, gamma)` concatenated.
pub fn grad_loglik(
    family: Family,
    params: &Params,
    x: &DesignMatrix,
    z: Option<&DesignMatrix>,
    y: &[u64],
) -> Result<Vec<f64>> {
    let z = require_z(family, z)?;
    check_design(x, &params.beta, y.len())?;
    let eta = x.linear_predictor(&params.beta)?;
    match (family, z) {
        (Family::Logit, _) => {
            let r = eta
                .iter()
                .zip(y)
                .map(|(&e, &c)| f64::from(u8::from(c > 0)) - sigmoid(e))
                .collect();
            Ok(xt_times(x, r))
        }
        (Family::Poisson, _) => {
            let r = eta.iter().zip(y).map(|(&e, &c)| c as f64 - e.exp()).collect();
            Ok(xt_times(x, r))
        }
        (Family::Zip, Some(z)) => {
            check_design(z, &params.gamma, y.len())?;
            let eta_z = z.linear_predictor(&params.gamma)?;
            let n = y.len();
            let mut r_count = Vec::with_capacity(n);
            let mut r_infl = Vec::with_capacity(n);
            for i in 0..n {
                let lambda = eta[i].exp();
                let p = sigmoid(eta_z[i]);
                if y[i] == 0 {
                    // posterior probability that the zero is structural
                    let (ll, ln_p) = zip_term(eta[i], eta_z[i], 0);
                    let w = (ln_p - ll).exp();
                    r_count.push(-lambda * (1.0 - w));
                    r_infl.push(w - p);
                } else {
                    r_count.push(y[i] as f64 - lambda);
                    r_infl.push(-p);
                }
            }
            let mut g = xt_times(x, r_count);
            g.extend(xt_times(z, r_infl));
            Ok(g)
        }
        (Family::Zip, None) => unreachable!(),
    }
}

/// Fitted values: the outcome probability (logit) or expected count, with the
/// structural-zero probability alongside for ZIP.
#[derive(Debug, Clone, PartialEq)]
pub struct Prediction {
    pub mean: Vec<f64>,
    pub zero_inflation: Option<Vec<f64>>,
}

pub fn predict(family: Family, params: &Params, x: &DesignMatrix, z: Option<&DesignMatrix>) -> Result<Prediction> {
    let z = require_z(family, z)?;
    let eta = x.linear_predictor(&params.beta)?;
    Ok(match (family, z) {
        (Family::Logit, _) => Prediction {
            mean: eta.iter().map(|&e| sigmoid(e)).collect(),
            zero_inflation: None,
        },
        (Family::Poisson, _) => Prediction {
            mean: eta.iter().map(|&e| e.exp()).collect(),
            zero_inflation: None,
        },
        (Family::Zip, Some(z)) => {
            check_len("observations", x.nrows(), z.nrows())?;
            let p: Vec<f64> = z.linear_predictor(&params.gamma)?.into_iter().map(sigmoid).collect();
            Prediction {
                mean: eta.iter().zip(&p).map(|(&e, &p)| (1.0 - p) * e.exp()).collect(),
                zero_inflation: Some(p),
            }
        }
        (Family::Zip, None) => unreachable!(),
    })
}

/// A family bound to its data, exposing the objective and score as
/// functions of the concatenated parameter vector.
#[derive(Debug, Clone)]
pub struct Likelihood<'a> {
    pub family: Family,
    pub x: &'a DesignMatrix,
    pub z: Option<&'a DesignMatrix>,
    pub y: &'a [u64],
}

impl<'a> Likelihood<'a> {
    pub fn new(family: Family, x: &'a DesignMatrix, z: Option<&'a DesignMatrix>, y: &'a [u64]) -> Result<Self> {
        require_z(family, z)?;
        check_len("observations", x.nrows(), y.len())?;
        if let Some(z) = z {
            check_len("observations", z.nrows(), y.len())?;
        }
        Ok(Self {
            family,
            x,
            z: if family == Family::Zip { z } else { None },
            y,
        })
    }

    pub fn n_beta(&self) -> usize {
        self.x.ncols()
    }

    pub fn n_params(&self) -> usize {
        self.x.ncols() + self.z.map_or(0, DesignMatrix::ncols)
    }

    pub fn value(&self, theta: &[f64]) -> Result<f64> {
        check_len("parameter vector", self.n_params(), theta.len())?;
        loglik(self.family, &Params::split(theta, self.n_beta()), self.x, self.z, self.y)
    }

    pub fn gradient(&self, theta: &[f64]) -> Result<Vec<f64>> {
        check_len("parameter vector", self.n_params(), theta.len())?;
        grad_loglik(self.family, &Params::split(theta, self.n_beta()), self.x, self.z, self.y)
    }
}
