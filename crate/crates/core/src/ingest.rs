//! CSV ingestion and export.
//!
//! Input is a single pre-joined table with one row per county. Every column
//! other than the id, coordinate and count columns becomes a raw covariate.
//! Rate covariates (`raw / population * 10_000`) and ratio covariates
//! (`numerator / denominator`) are appended after the raw ones.

use std::collections::HashSet;
use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::data::{CountyObservation, Dataset, Standardization};
use crate::error::{Error, Result};

/// Per-10k-population rate: `derived = raw / population * RATE_SCALE`.
pub const RATE_SCALE: f64 = 10_000.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateSpec {
    pub raw_column: String,
    pub derived_name: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RatioSpec {
    pub numerator_column: String,
    pub denominator_column: String,
    pub derived_name: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct IngestConfig {
    pub id_column: String,
    pub lat_column: String,
    pub lon_column: String,
    pub count_column: String,
    /// Required when `rate_specs` is non-empty.
    pub population_column: Option<String>,
    pub rate_specs: Vec<RateSpec>,
    pub ratio_specs: Vec<RatioSpec>,
    /// Z-score every raw covariate that is not a 0/1 dummy.
    pub standardize: bool,
}

impl Default for IngestConfig {
    fn default() -> Self {
        Self {
            id_column: "id".into(),
            lat_column: "lat".into(),
            lon_column: "lon".into(),
            count_column: "count".into(),
            population_column: None,
            rate_specs: Vec::new(),
            ratio_specs: Vec::new(),
            standardize: false,
        }
    }
}

impl IngestConfig {
    fn derived_names(&self) -> impl Iterator<Item = &str> {
        self.rate_specs
            .iter()
            .map(|r| r.derived_name.as_str())
            .chain(self.ratio_specs.iter().map(|r| r.derived_name.as_str()))
    }
}

fn find(headers: &[String], name: &str) -> Result<usize> {
    headers
        .iter()
        .position(|h| h == name)
        .ok_or_else(|| Error::MissingColumn(name.to_string()))
}

fn parse_real(cell: &str, row: usize, column: &str) -> Result<f64> {
    cell.trim()
        .parse::<f64>()
        .ok()
        .filter(|v| v.is_finite())
        .ok_or_else(|| Error::NonNumericCell {
            row,
            column: column.to_string(),
        })
}

fn parse_count(cell: &str, row: usize, column: &str) -> Result<u64> {
    let cell = cell.trim();
    if let Ok(v) = cell.parse::<u64>() {
        return Ok(v);
    }
    let v = parse_real(cell, row, column)?;
    if v < 0.0 {
        return Err(Error::NegativeCount { row });
    }
    if v.fract() != 0.0 || v > u64::MAX as f64 {
        return Err(Error::NonNumericCell {
            row,
            column: column.to_string(),
        });
    }
    Ok(v as u64)
}

/// Parses a CSV table into a [`Dataset`]. Row numbers in errors count data
/// rows from 1, excluding the header.
pub fn read_dataset<R: Read>(source: R, config: &IngestConfig) -> Result<Dataset> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::Headers)
        .from_reader(source);
    let headers: Vec<String> = reader.headers()?.iter().map(str::to_string).collect();

    let id_col = find(&headers, &config.id_column)?;
    let lat_col = find(&headers, &config.lat_column)?;
    let lon_col = find(&headers, &config.lon_column)?;
    let count_col = find(&headers, &config.count_column)?;
    let reserved = [id_col, lat_col, lon_col, count_col];

    let pop_col = match (&config.population_column, config.rate_specs.is_empty()) {
        (Some(p), _) => Some(find(&headers, p)?),
        (None, true) => None,
        (None, false) => return Err(Error::MissingColumn("population column (required for rates)".into())),
    };
    let rate_cols = config
        .rate_specs
        .iter()
        .map(|r| find(&headers, &r.raw_column))
        .collect::<Result<Vec<_>>>()?;
    let ratio_cols = config
        .ratio_specs
        .iter()
        .map(|r| Ok((find(&headers, &r.numerator_column)?, find(&headers, &r.denominator_column)?)))
        .collect::<Result<Vec<_>>>()?;

    let mut taken: HashSet<&str> = headers.iter().map(String::as_str).collect();
    for name in config.derived_names() {
        if !taken.insert(name) {
            return Err(Error::NameCollision(name.to_string()));
        }
    }

    let raw_cols: Vec<usize> = (0..headers.len()).filter(|j| !reserved.contains(j)).collect();
    let mut schema: Vec<String> = raw_cols.iter().map(|&j| headers[j].clone()).collect();
    schema.extend(config.derived_names().map(str::to_string));

    let mut observations = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let record = record?;
        let row = i + 1;
        let cell = |j: usize| record.get(j).unwrap_or("");
        let real = |j: usize| parse_real(cell(j), row, &headers[j]);

        let id = cell(id_col).trim().to_string();
        if id.is_empty() {
            return Err(Error::NonNumericCell {
                row,
                column: headers[id_col].clone(),
            });
        }
        let lat = real(lat_col)?;
        let lon = real(lon_col)?;
        let count = parse_count(cell(count_col), row, &headers[count_col])?;

        let mut covariates = Vec::with_capacity(schema.len());
        for &j in &raw_cols {
            covariates.push(real(j)?);
        }
        if let Some(pc) = pop_col {
            let population = real(pc)?;
            for &rc in &rate_cols {
                if population == 0.0 {
                    return Err(Error::ZeroDenominator {
                        row,
                        column: headers[pc].clone(),
                    });
                }
                covariates.push(real(rc)? / population * RATE_SCALE);
            }
        }
        for &(num, den) in &ratio_cols {
            let d = real(den)?;
            if d == 0.0 {
                return Err(Error::ZeroDenominator {
                    row,
                    column: headers[den].clone(),
                });
            }
            covariates.push(real(num)? / d);
        }
        observations.push(CountyObservation::new(id, lat, lon, count, covariates));
    }

    let standardization = if config.standardize {
        standardize_columns(&mut observations, &schema, raw_cols.len())
    } else {
        Vec::new()
    };
    Ok(Dataset::new(schema, observations)?.with_standardization(standardization))
}

/// Z-scores the first `n_raw` covariates in place, skipping 0/1 dummies and
/// columns with zero spread. Uses the sample (n-1) standard deviation.
fn standardize_columns(observations: &mut [CountyObservation], schema: &[String], n_raw: usize) -> Vec<Standardization> {
    let n = observations.len();
    let mut applied = Vec::new();
    if n < 2 {
        return applied;
    }
    for j in 0..n_raw {
        let values: Vec<f64> = observations.iter().map(|o| o.covariates[j]).collect();
        if is_binary(&values) {
            continue;
        }
        let mean = values.iter().sum::<f64>() / n as f64;
        let ss: f64 = values.iter().map(|v| (v - mean).powi(2)).sum();
        let std_dev = (ss / (n - 1) as f64).sqrt();
        if std_dev == 0.0 {
            continue;
        }
        for obs in observations.iter_mut() {
            obs.covariates[j] = (obs.covariates[j] - mean) / std_dev;
        }
        applied.push(Standardization {
            column: schema[j].clone(),
            mean,
            std_dev,
        });
    }
    applied
}

/// Exactly the two values {0, 1}.
fn is_binary(values: &[f64]) -> bool {
    values.iter().all(|&v| v == 0.0 || v == 1.0)
        && values.contains(&0.0)
        && values.contains(&1.0)
}

pub fn read_dataset_path(path: impl AsRef<Path>, config: &IngestConfig) -> Result<Dataset> {
    read_dataset(File::open(path)?, config)
}

/// Writes `id,lat,lon,count,<schema...>`. Reals use the shortest decimal
/// form that parses back to the same `f64` (never more than 17 significant
/// digits).
pub fn write_dataset<W: Write>(dataset: &Dataset, sink: W) -> Result<()> {
    let defaults = IngestConfig::default();
    let reserved = [
        defaults.id_column,
        defaults.lat_column,
        defaults.lon_column,
        defaults.count_column,
    ];
    if let Some(clash) = dataset.schema().iter().find(|s| reserved.contains(s)) {
        return Err(Error::NameCollision(clash.clone()));
    }
    let mut writer = csv::Writer::from_writer(sink);
    writer.write_record(reserved.iter().map(String::as_str).chain(dataset.schema().iter().map(String::as_str)))?;
    for obs in dataset.observations() {
        let mut record = Vec::with_capacity(4 + obs.covariates.len());
        record.push(obs.id.clone());
        record.push(obs.lat.to_string());
        record.push(obs.lon.to_string());
        record.push(obs.count.to_string());
        record.extend(obs.covariates.iter().map(f64::to_string));
        writer.write_record(&record)?;
    }
    writer.flush()?;
    Ok(())
}

pub fn write_dataset_path(dataset: &Dataset, path: impl AsRef<Path>) -> Result<()> {
    let file = std::io::BufWriter::new(File::create(path)?);
    write_dataset(dataset, file)
}
