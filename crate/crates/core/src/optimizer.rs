//! Newton maximization of the model log-likelihoods and Wald inference.
//!
//! The Hessian is obtained by central differences of the analytic score.
//! When it is not negative definite a ridge is added until the Newton system
//! is positive definite, and every step is backtracked until the objective
//! does not decrease.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};
use statrs::function::erf::erfc;

use crate::data::{build_design, Dataset, DesignMatrix};
use crate::error::{Error, Result};
use crate::glm::{Family, Likelihood, ModelSpec, Params};
use crate::linalg::{dependent_columns, spd_inverse, symmetrize};

/// Relative pivot tolerance for the design rank check.
pub const RANK_TOL: f64 = 1e-10;
/// A logit linear predictor beyond this at a non-converged optimum is taken
/// as a sign of separation.
pub const SEPARATION_INDEX: f64 = 30.0;
/// Lower bound used when displaying p-values.
pub const P_VALUE_DISPLAY_FLOOR: f64 = 0.0001;
/// Relative size of an objective change treated as rounding during step
/// halving.
pub const OBJECTIVE_NOISE: f64 = 64.0 * f64::EPSILON;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct OptimOptions {
    pub max_iterations: usize,
    /// Convergence threshold on the largest absolute score component.
    pub gradient_tolerance: f64,
    pub step_halving_max: usize,
    pub ridge_floor: f64,
}

impl Default for OptimOptions {
    fn default() -> Self {
        Self {
            max_iterations: 200,
            gradient_tolerance: 1e-8,
            step_halving_max: 30,
            ridge_floor: 1e-10,
        }
    }
}

impl OptimOptions {
    pub fn validate(&self) -> Result<()> {
        if self.max_iterations == 0
            || self.step_halving_max == 0
            || !(self.gradient_tolerance > 0.0)
            || !(self.ridge_floor > 0.0)
        {
            return Err(Error::InvalidArgument("optimizer options must all be positive".into()));
        }
        Ok(())
    }
}

/// Outcome of [`maximize`]. `trace` holds the objective at the start and
/// after every accepted step.
#[derive(Debug, Clone, PartialEq)]
pub struct Maximum {
    pub argmax: Vec<f64>,
    pub value: f64,
    pub iterations: usize,
    pub converged: bool,
    pub trace: Vec<f64>,
}

fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

/// Central-difference Jacobian of `grad`, step `1e-5 (1 + |theta_j|)`,
/// symmetrized.
pub fn fd_hessian<G>(grad: G, theta: &[f64]) -> Result<DMatrix<f64>>
where
    G: Fn(&[f64]) -> Result<Vec<f64>>,
{
    let k = theta.len();
    let mut h = DMatrix::zeros(k, k);
    let mut point = theta.to_vec();
    for j in 0..k {
        let step = 1e-5 * (1.0 + theta[j].abs());
        point[j] = theta[j] + step;
        let up = grad(&point)?;
        point[j] = theta[j] - step;
        let down = grad(&point)?;
        point[j] = theta[j];
        for i in 0..k {
            h[(i, j)] = (up[i] - down[i]) / (2.0 * step);
        }
    }
    Ok(symmetrize(h))
}

/// Solves `(-H + tau I) d = g` for the smallest `tau` in
/// `{0, floor, 2 floor, 4 floor, ...}` that makes the system positive
/// definite. Falls back to the gradient itself if none does.
fn ascent_direction(hessian: &DMatrix<f64>, g: &[f64], ridge_floor: f64) -> Vec<f64> {
    let k = g.len();
    let rhs = DVector::from_column_slice(g);
    let neg = -hessian;
    let mut tau = 0.0;
    for _ in 0..1100 {
        let system = &neg + DMatrix::identity(k, k) * tau;
        if let Some(chol) = system.cholesky() {
            let d = chol.solve(&rhs);
            if d.iter().all(|v| v.is_finite()) && d.dot(&rhs) > 0.0 {
                return d.as_slice().to_vec();
            }
        }
        tau = if tau == 0.0 { ridge_floor } else { tau * 2.0 };
    }
    g.to_vec()
}

/// Maximizes `loglik` from `init` by ridge-stabilized Newton steps with
/// step halving. Stops when the largest absolute score component is within
/// tolerance (`converged = true`), after `max_iterations`, or when no
/// halving yields a non-decreasing objective (up to [`OBJECTIVE_NOISE`]); the best point is returned in
/// every case.
pub fn maximize<F, G>(loglik: F, grad: G, init: &[f64], options: &OptimOptions) -> Result<Maximum>
where
    F: Fn(&[f64]) -> Result<f64>,
    G: Fn(&[f64]) -> Result<Vec<f64>>,
{
    options.validate()?;
    let mut theta = init.to_vec();
    let mut value = loglik(&theta)?;
    if !value.is_finite() {
        return Err(Error::NonFiniteObjective { iteration: 0 });
    }
    let mut trace = vec![value];
    let mut iterations = 0;
    loop {
        let g = grad(&theta)?;
        if g.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFiniteObjective { iteration: iterations });
        }
        if max_abs(&g) <= options.gradient_tolerance {
            return Ok(Maximum {
                argmax: theta,
                value,
                iterations,
                converged: true,
                trace,
            });
        }
        if iterations >= options.max_iterations {
            break;
        }
        iterations += 1;

        let hessian = fd_hessian(&grad, &theta)?;
        let direction = ascent_direction(&hessian, &g, options.ridge_floor);

        // differences below this are rounding in the objective itself
        let noise = OBJECTIVE_NOISE * (1.0 + value.abs());
        let mut step = 1.0;
        let mut accepted = None;
        for _ in 0..=options.step_halving_max {
            let candidate: Vec<f64> = theta.iter().zip(&direction).map(|(t, d)| t + step * d).collect();
            let v = loglik(&candidate)?;
            if v.is_finite() && v >= value - noise {
                accepted = Some((candidate, v));
                break;
            }
            step *= 0.5;
        }
        match accepted {
            Some((candidate, v)) => {
                theta = candidate;
                value = v;
                trace.push(v);
            }
            None => break,
        }
    }
    let converged = max_abs(&grad(&theta)?) <= options.gradient_tolerance;
    Ok(Maximum {
        argmax: theta,
        value,
        iterations,
        converged,
        trace,
    })
}

/// Which equation a coefficient belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Component {
    /// Logit index or log-mean of the count.
    Outcome,
    /// Logit of the ZIP structural-zero probability.
    Inflation,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Coefficient {
    pub component: Component,
    pub name: String,
    pub estimate: f64,
    pub std_error: f64,
    pub z_stat: f64,
    pub p_value: f64,
    pub stars: String,
}

/// `***` at p <= 0.001, `**` at p <= 0.05, `*` at p <= 0.10.
pub fn stars(p_value: f64) -> &'static str {
    if p_value <= 0.001 {
        "***"
    } else if p_value <= 0.05 {
        "**"
    } else if p_value <= 0.10 {
        "*"
    } else {
        ""
    }
}

/// Two-sided normal p-value `2 (1 - Phi(|z|))`.
pub fn two_sided_p(z: f64) -> f64 {
    erfc(z.abs() / std::f64::consts::SQRT_2)
}

/// Four decimals, floored at 0.0001.
pub fn display_p_value(p: f64) -> String {
    format!("{:.4}", p.max(P_VALUE_DISPLAY_FLOOR))
}

/// Standard errors, z statistics, p-values and stars from estimates and
/// their covariance.
pub fn wald_inference(names: &[String], estimates: &[f64], covariance: &DMatrix<f64>) -> Result<Vec<Coefficient>> {
    crate::error::check_len("estimates", names.len(), estimates.len())?;
    crate::error::check_len("covariance", names.len(), covariance.nrows())?;
    crate::error::check_len("covariance", names.len(), covariance.ncols())?;
    names
        .iter()
        .zip(estimates)
        .enumerate()
        .map(|(j, (name, &estimate))| {
            let var = covariance[(j, j)];
            let std_error = var.sqrt();
            if !(std_error > 0.0) || !std_error.is_finite() {
                return Err(Error::ZeroStandardError(name.clone()));
            }
            let z_stat = estimate / std_error;
            let p_value = two_sided_p(z_stat);
            Ok(Coefficient {
                component: Component::Outcome,
                name: name.clone(),
                estimate,
                std_error,
                z_stat,
                p_value,
                stars: stars(p_value).to_string(),
            })
        })
        .collect()
}

/// A fitted model: coefficient table, covariance (inverse observed
/// information, ordered as `coefficients`) and convergence diagnostics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub family: Family,
    pub n_obs: usize,
    pub coefficients: Vec<Coefficient>,
    pub log_likelihood: f64,
    pub iterations: usize,
    pub converged: bool,
    pub covariance: Vec<Vec<f64>>,
}

impl FitResult {
    pub fn params(&self) -> Params {
        let pick = |c: Component| {
            self.coefficients
                .iter()
                .filter(|r| r.component == c)
                .map(|r| r.estimate)
                .collect()
        };
        Params::new(pick(Component::Outcome), pick(Component::Inflation))
    }

    pub fn coefficient(&self, component: Component, name: &str) -> Option<&Coefficient> {
        self.coefficients
            .iter()
            .find(|c| c.component == component && c.name == name)
    }

    pub fn covariance_matrix(&self) -> DMatrix<f64> {
        let k = self.covariance.len();
        DMatrix::from_fn(k, k, |i, j| self.covariance[i][j])
    }
}

/// Design matrices for a model on a dataset, after the rank check.
pub fn model_designs(model: &ModelSpec, dataset: &Dataset) -> Result<(DesignMatrix, Option<DesignMatrix>)> {
    model.validate()?;
    let x = build_design(dataset, &model.count_covariates, model.add_intercept)?;
    check_rank(&x)?;
    let z = if model.family == Family::Zip {
        let z = build_design(dataset, model.inflation_names(), model.add_intercept)?;
        check_rank(&z)?;
        Some(z)
    } else {
        None
    };
    Ok((x, z))
}

fn check_rank(x: &DesignMatrix) -> Result<()> {
    let dependent = dependent_columns(x.values(), RANK_TOL);
    if dependent.is_empty() {
        Ok(())
    } else {
        Err(Error::RankDeficientDesign(
            dependent.into_iter().map(|j| x.column_names()[j].clone()).collect(),
        ))
    }
}

fn logit(p: f64) -> f64 {
    (p / (1.0 - p)).ln()
}

fn initial_point(family: Family, x: &DesignMatrix, z: Option<&DesignMatrix>, dataset: &Dataset) -> Vec<f64> {
    let mut beta = vec![0.0; x.ncols()];
    if x.has_intercept() && family != Family::Logit {
        beta[0] = (dataset.mean_count() + 0.01).ln();
    }
    let mut gamma = vec![0.0; z.map_or(0, DesignMatrix::ncols)];
    if let Some(z) = z {
        if z.has_intercept() {
            gamma[0] = logit(dataset.zero_share().clamp(0.01, 0.99));
        }
    }
    beta.extend(gamma);
    beta
}

/// Fits `model` to `dataset` by maximum likelihood.
///
/// Starts from zero coefficients, except that the count intercept starts at
/// `ln(mean count + 0.01)` and the inflation intercept at the logit of the
/// zero share (clamped to [0.01, 0.99]). A fit that stops before the score
/// tolerance is reached is returned with `converged = false`.
pub fn fit(model: &ModelSpec, dataset: &Dataset, options: &OptimOptions) -> Result<FitResult> {
    dataset.check_fittable()?;
    let (x, z) = model_designs(model, dataset)?;
    let y = dataset.counts();
    let lik = Likelihood::new(model.family, &x, z.as_ref(), &y)?;
    let init = initial_point(model.family, &x, z.as_ref(), dataset);

    let max = maximize(|t| lik.value(t), |t| lik.gradient(t), &init, options)?;

    if model.family == Family::Logit && !max.converged {
        let index = max_abs(&x.linear_predictor(&max.argmax)?);
        if index > SEPARATION_INDEX {
            return Err(Error::SeparationSuspected { max_index: index });
        }
    }

    let hessian = fd_hessian(|t| lik.gradient(t), &max.argmax)?;
    let covariance = spd_inverse(&(-hessian)).ok_or(Error::SingularInformation)?;

    let mut names: Vec<String> = x.column_names().to_vec();
    if let Some(z) = &z {
        names.extend(z.column_names().iter().cloned());
    }
    let mut coefficients = wald_inference(&names, &max.argmax, &covariance)?;
    for c in coefficients.iter_mut().skip(x.ncols()) {
        c.component = Component::Inflation;
    }

    Ok(FitResult {
        family: model.family,
        n_obs: dataset.len(),
        coefficients,
        log_likelihood: max.value,
        iterations: max.iterations,
        converged: max.converged,
        covariance: covariance.row_iter().map(|r| r.iter().copied().collect()).collect(),
    })
}

/// Per-row fitted means (probabilities for the logit) implied by a fit.
pub fn fitted_means(result: &FitResult, model: &ModelSpec, dataset: &Dataset) -> Result<Vec<f64>> {
    let (x, z) = model_designs(model, dataset)?;
    Ok(crate::glm::predict(result.family, &result.params(), &x, z.as_ref())?.mean)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn quadratic_in_one_newton_step() {
        let m = maximize(
            |t| Ok(-(t[0] - 3.0).powi(2)),
            |t| Ok(vec![-2.0 * (t[0] - 3.0)]),
            &[0.0],
            &OptimOptions::default(),
        )
        .unwrap();
        assert!(m.converged);
        assert!(m.iterations <= 5);
        assert_abs_diff_eq!(m.argmax[0], 3.0, epsilon = 1e-8);
    }

    #[test]
    fn ridge_handles_indefinite_start() {
        // f = cos(t) near t = 0.3 has positive curvature at t = 3.0
        let m = maximize(|t| Ok(t[0].cos()), |t| Ok(vec![-t[0].sin()]), &[3.0], &OptimOptions::default()).unwrap();
        assert!(m.converged);
        let wrapped = m.argmax[0].rem_euclid(2.0 * std::f64::consts::PI);
        assert!(wrapped < 1e-6 || (2.0 * std::f64::consts::PI - wrapped) < 1e-6);
    }

    #[test]
    fn trace_is_monotone() {
        let f = |t: &[f64]| Ok(-(t[0].powi(4)) - (t[1] - 1.0).powi(2) + t[0] * t[1]);
        let g = |t: &[f64]| Ok(vec![-4.0 * t[0].powi(3) + t[1], -2.0 * (t[1] - 1.0) + t[0]]);
        let m = maximize(f, g, &[2.0, -3.0], &OptimOptions::default()).unwrap();
        assert!(m.converged);
        assert!(m.trace.windows(2).all(|w| w[1] >= w[0]));
    }

    #[test]
    fn non_finite_start() {
        let err = maximize(|_| Ok(f64::NAN), |_| Ok(vec![0.0]), &[0.0], &OptimOptions::default()).unwrap_err();
        assert!(matches!(err, Error::NonFiniteObjective { iteration: 0 }));
    }

    #[test]
    fn iteration_cap_reports_best_point() {
        let opts = OptimOptions {
            max_iterations: 1,
            ..OptimOptions::default()
        };
        let m = maximize(
            |t| Ok(-(t[0].powi(4))),
            |t| Ok(vec![-4.0 * t[0].powi(3)]),
            &[5.0],
            &opts,
        )
        .unwrap();
        assert!(!m.converged);
        assert_eq!(m.iterations, 1);
        assert!(m.value > -625.0);
    }

    #[test]
    fn wald_rows() {
        let cov = DMatrix::from_row_slice(3, 3, &[1.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 0.25]);
        let names: Vec<String> = ["a", "b", "c"].iter().map(|s| s.to_string()).collect();
        let rows = wald_inference(&names, &[0.0, 1.96, 4.1875], &cov).unwrap();
        assert_eq!(rows[0].z_stat, 0.0);
        assert_abs_diff_eq!(rows[0].p_value, 1.0, epsilon = 1e-15);
        assert_eq!(rows[0].stars, "");
        assert_abs_diff_eq!(rows[1].p_value, 0.0500, epsilon = 1e-4);
        assert_eq!(rows[1].stars, "**");
        assert!(rows[2].p_value < 0.0001);
        assert_eq!(rows[2].stars, "***");
        assert_eq!(display_p_value(rows[2].p_value), "0.0001");
    }

    #[test]
    fn zero_standard_error() {
        let cov = DMatrix::from_row_slice(1, 1, &[0.0]);
        let err = wald_inference(&["a".to_string()], &[1.0], &cov).unwrap_err();
        assert!(matches!(err, Error::ZeroStandardError(ref n) if n == "a"));
    }

    #[test]
    fn star_thresholds() {
        assert_eq!(stars(0.0001), "***");
        assert_eq!(stars(0.001), "***");
        assert_eq!(stars(0.02), "**");
        assert_eq!(stars(0.0999), "*");
        assert_eq!(stars(0.5), "");
    }

    #[test]
    fn options_must_be_positive() {
        let opts = OptimOptions {
            gradient_tolerance: 0.0,
            ..OptimOptions::default()
        };
        assert!(opts.validate().is_err());
    }
}
