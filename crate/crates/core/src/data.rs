//! Observations, datasets and the numeric design matrices built from them.

use std::collections::HashSet;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Columns whose range is below this are treated as constant.
pub const CONSTANT_COLUMN_TOL: f64 = 1e-12;

/// Name given to the column of ones.
pub const INTERCEPT: &str = "Intercept";

/// One spatial unit (a county): identifier, centroid, outcome count and
/// covariate values ordered as the owning dataset's schema.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CountyObservation {
    pub id: String,
    pub lat: f64,
    pub lon: f64,
    pub count: u64,
    pub covariates: Vec<f64>,
}

impl CountyObservation {
    pub fn new(id: impl Into<String>, lat: f64, lon: f64, count: u64, covariates: Vec<f64>) -> Self {
        Self {
            id: id.into(),
            lat,
            lon,
            count,
            covariates,
        }
    }

    pub fn centroid(&self) -> (f64, f64) {
        (self.lat, self.lon)
    }

    fn validate(&self, schema_len: usize) -> Result<()> {
        let bad = |reason: String| Error::InvalidObservation {
            id: self.id.clone(),
            reason,
        };
        if !(-90.0..=90.0).contains(&self.lat) {
            return Err(bad(format!("latitude {} outside [-90, 90]", self.lat)));
        }
        if !(-180.0..=180.0).contains(&self.lon) {
            return Err(bad(format!("longitude {} outside [-180, 180]", self.lon)));
        }
        if self.covariates.len() != schema_len {
            return Err(bad(format!(
                "{} covariates for a schema of {}",
                self.covariates.len(),
                schema_len
            )));
        }
        if let Some(v) = self.covariates.iter().find(|v| !v.is_finite()) {
            return Err(bad(format!("non-finite covariate value {v}")));
        }
        Ok(())
    }
}

/// Mean and standard deviation applied to a covariate at ingestion.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Standardization {
    pub column: String,
    pub mean: f64,
    pub std_dev: f64,
}

/// A validated collection of observations sharing one covariate schema.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dataset {
    schema: Vec<String>,
    observations: Vec<CountyObservation>,
    #[serde(default)]
    standardization: Vec<Standardization>,
}

impl Dataset {
    /// Checks coordinate ranges, schema conformance, finiteness and id
    /// uniqueness.
    pub fn new(schema: Vec<String>, observations: Vec<CountyObservation>) -> Result<Self> {
        let mut names = HashSet::new();
        for name in &schema {
            if !names.insert(name.as_str()) {
                return Err(Error::DuplicateCovariate(name.clone()));
            }
        }
        let mut ids = HashSet::with_capacity(observations.len());
        for obs in &observations {
            obs.validate(schema.len())?;
            if !ids.insert(obs.id.as_str()) {
                return Err(Error::DuplicateId(obs.id.clone()));
            }
        }
        Ok(Self {
            schema,
            observations,
            standardization: Vec::new(),
        })
    }

    pub fn with_standardization(mut self, standardization: Vec<Standardization>) -> Self {
        self.standardization = standardization;
        self
    }

    pub fn schema(&self) -> &[String] {
        &self.schema
    }

    pub fn observations(&self) -> &[CountyObservation] {
        &self.observations
    }

    pub fn standardization(&self) -> &[Standardization] {
        &self.standardization
    }

    pub fn len(&self) -> usize {
        self.observations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.observations.is_empty()
    }

    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.schema.iter().position(|s| s == name)
    }

    /// Values of one covariate in observation order.
    pub fn column(&self, name: &str) -> Result<Vec<f64>> {
        let j = self
            .column_index(name)
            .ok_or_else(|| Error::UnknownCovariate(name.to_string()))?;
        Ok(self.observations.iter().map(|o| o.covariates[j]).collect())
    }

    pub fn counts(&self) -> Vec<u64> {
        self.observations.iter().map(|o| o.count).collect()
    }

    pub fn centroids(&self) -> Vec<(f64, f64)> {
        self.observations.iter().map(|o| o.centroid()).collect()
    }

    pub fn ids(&self) -> Vec<&str> {
        self.observations.iter().map(|o| o.id.as_str()).collect()
    }

    /// Share of observations with a zero count.
    pub fn zero_share(&self) -> f64 {
        if self.is_empty() {
            return f64::NAN;
        }
        let zeros = self.observations.iter().filter(|o| o.count == 0).count();
        zeros as f64 / self.len() as f64
    }

    pub fn mean_count(&self) -> f64 {
        let total: f64 = self.observations.iter().map(|o| o.count as f64).sum();
        total / self.len() as f64
    }

    /// A dataset can be fitted when it has at least two rows and at least one
    /// positive count.
    pub fn check_fittable(&self) -> Result<()> {
        if self.len() < 2 {
            return Err(Error::DegenerateData(format!(
                "{} observation(s); at least 2 are required",
                self.len()
            )));
        }
        if self.observations.iter().all(|o| o.count == 0) {
            return Err(Error::DegenerateData("every count is zero".into()));
        }
        Ok(())
    }
}

/// Numeric n x k matrix with named columns. When `has_intercept` is set,
/// column 0 is all ones.
#[derive(Debug, Clone, PartialEq)]
pub struct DesignMatrix {
    values: DMatrix<f64>,
    column_names: Vec<String>,
    has_intercept: bool,
}

impl DesignMatrix {
    /// Wraps an explicit matrix, enforcing the no-constant-column rule.
    pub fn new(values: DMatrix<f64>, column_names: Vec<String>, has_intercept: bool) -> Result<Self> {
        if column_names.len() != values.ncols() {
            return Err(Error::DimensionMismatch {
                what: "design column names",
                expected: values.ncols(),
                found: column_names.len(),
            });
        }
        if values.ncols() == 0 {
            return Err(Error::EmptySelection);
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::DomainError("design matrix has non-finite entries".into()));
        }
        let first = usize::from(has_intercept);
        if has_intercept && values.column(0).iter().any(|&v| v != 1.0) {
            return Err(Error::InvalidArgument("intercept column must be all ones".into()));
        }
        for j in first..values.ncols() {
            let col = values.column(j);
            if col.max() - col.min() < CONSTANT_COLUMN_TOL {
                return Err(Error::ConstantColumn(column_names[j].clone()));
            }
        }
        Ok(Self {
            values,
            column_names,
            has_intercept,
        })
    }

    /// An n x 1 column of ones.
    pub fn intercept_only(n: usize) -> Self {
        Self {
            values: DMatrix::from_element(n, 1, 1.0),
            column_names: vec![INTERCEPT.to_string()],
            has_intercept: true,
        }
    }

    pub fn values(&self) -> &DMatrix<f64> {
        &self.values
    }

    pub fn column_names(&self) -> &[String] {
        &self.column_names
    }

    pub fn has_intercept(&self) -> bool {
        self.has_intercept
    }

    pub fn nrows(&self) -> usize {
        self.values.nrows()
    }

    pub fn ncols(&self) -> usize {
        self.values.ncols()
    }

    /// Linear predictor `X b` for every row.
    pub fn linear_predictor(&self, coef: &[f64]) -> Result<Vec<f64>> {
        crate::error::check_len("coefficient vector", self.ncols(), coef.len())?;
        let n = self.nrows();
        let mut eta = vec![0.0; n];
        for (j, &b) in coef.iter().enumerate() {
            for (e, &x) in eta.iter_mut().zip(self.values.column(j).iter()) {
                *e += x * b;
            }
        }
        Ok(eta)
    }

    /// Returns a copy with rows reordered; row `i` of the result is row
    /// `order[i]` of `self`.
    pub fn select_rows(&self, order: &[usize]) -> Self {
        let values = DMatrix::from_fn(order.len(), self.ncols(), |i, j| self.values[(order[i], j)]);
        Self {
            values,
            column_names: self.column_names.clone(),
            has_intercept: self.has_intercept,
        }
    }
}

/// Builds the design for a covariate selection: an optional intercept column
/// followed by the selected covariates in the order given.
pub fn build_design(dataset: &Dataset, covariate_names: &[String], add_intercept: bool) -> Result<DesignMatrix> {
    let mut seen = HashSet::new();
    let mut indices = Vec::with_capacity(covariate_names.len());
    for name in covariate_names {
        if !seen.insert(name.as_str()) {
            return Err(Error::DuplicateCovariate(name.clone()));
        }
        let j = dataset
            .column_index(name)
            .ok_or_else(|| Error::UnknownCovariate(name.clone()))?;
        indices.push(j);
    }
    if indices.is_empty() && !add_intercept {
        return Err(Error::EmptySelection);
    }
    let offset = usize::from(add_intercept);
    let obs = dataset.observations();
    let values = DMatrix::from_fn(obs.len(), indices.len() + offset, |i, j| {
        if j < offset {
            1.0
        } else {
            obs[i].covariates[indices[j - offset]]
        }
    });
    let mut names = Vec::with_capacity(values.ncols());
    if add_intercept {
        names.push(INTERCEPT.to_string());
    }
    names.extend(covariate_names.iter().cloned());
    DesignMatrix::new(values, names, add_intercept)
}

/// 1 where the count is positive, 0 otherwise.
pub fn binarize_counts(dataset: &Dataset) -> Vec<u8> {
    dataset.observations().iter().map(|o| u8::from(o.count > 0)).collect()
}
