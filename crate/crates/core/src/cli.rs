//! Command layer behind the `countloc` binary.
//!
//! A [`RunConfig`] can come from command-line flags, a JSON file with the
//! same field names, or both; flags win over the file, and the file wins
//! over built-in defaults (see [`RunConfig::overlay`]).
//!
//! Exit codes: 0 on success, 1 on any error (one line on stderr of the form
//! `error[Code]: message`), 2 when a fit stops before converging (its
//! result is still written).

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::glm::{Family, ModelSpec};
use crate::ingest::{read_dataset_path, write_dataset, IngestConfig, RateSpec, RatioSpec};
use crate::optimizer::{fit, FitResult, OptimOptions};
use crate::report;
use crate::spatial::{build_weights, getis_ord_gstar, WeightScheme};
use crate::synth::{generate, preset, DgpSpec};

pub const EXIT_OK: i32 = 0;
pub const EXIT_ERROR: i32 = 1;
pub const EXIT_NOT_CONVERGED: i32 = 2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Command {
    Fit,
    Hotspot,
    Simulate,
    Report,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Text,
    Csv,
    Json,
    Geojson,
}

impl std::str::FromStr for Format {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "text" => Ok(Format::Text),
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            "geojson" => Ok(Format::Geojson),
            other => Err(Error::InvalidArgument(format!("unknown format '{other}'"))),
        }
    }
}

/// Every setting any command can take. Unset fields fall back to defaults
/// when the command runs.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub command: Option<Command>,
    pub input: Option<PathBuf>,
    pub output: Option<PathBuf>,
    /// Simulation spec (JSON) for `simulate`.
    pub spec: Option<PathBuf>,
    /// Named simulation preset for `simulate`, e.g. `paper-scale`.
    pub preset: Option<String>,
    /// Fit result (JSON) for `report`.
    pub fit: Option<PathBuf>,
    pub family: Option<Family>,
    pub covariates: Option<Vec<String>>,
    pub inflation_covariates: Option<Vec<String>>,
    pub no_intercept: Option<bool>,
    pub band_km: Option<f64>,
    pub k: Option<usize>,
    pub value_column: Option<String>,
    pub standardize: Option<bool>,
    pub seed: Option<u64>,
    pub format: Option<Format>,
    pub id_column: Option<String>,
    pub lat_column: Option<String>,
    pub lon_column: Option<String>,
    pub count_column: Option<String>,
    pub population_column: Option<String>,
    /// `raw_column:derived_name` pairs.
    pub rates: Option<Vec<String>>,
    /// `numerator:denominator:derived_name` triples.
    pub ratios: Option<Vec<String>>,
    pub max_iterations: Option<usize>,
}

macro_rules! overlay_fields {
    ($base:ident, $top:ident, $($f:ident),*) => {
        $( if $top.$f.is_some() { $base.$f = $top.$f; } )*
    };
}

impl RunConfig {
    pub fn from_json_file(path: &Path) -> Result<Self> {
        Ok(serde_json::from_str(&fs::read_to_string(path)?)?)
    }

    /// `self` with every field that is set in `top` replaced by `top`'s.
    pub fn overlay(mut self, top: RunConfig) -> RunConfig {
        overlay_fields!(
            self,
            top,
            command,
            input,
            output,
            spec,
            preset,
            fit,
            family,
            covariates,
            inflation_covariates,
            no_intercept,
            band_km,
            k,
            value_column,
            standardize,
            seed,
            format,
            id_column,
            lat_column,
            lon_column,
            count_column,
            population_column,
            rates,
            ratios,
            max_iterations
        );
        self
    }

    fn require<'a, T>(value: &'a Option<T>, flag: &str) -> Result<&'a T> {
        value
            .as_ref()
            .ok_or_else(|| Error::InvalidArgument(format!("--{flag} is required")))
    }

    pub fn ingest_config(&self) -> Result<IngestConfig> {
        let defaults = IngestConfig::default();
        let rate_specs = self
            .rates
            .iter()
            .flatten()
            .map(|s| match s.split(':').collect::<Vec<_>>()[..] {
                [raw, name] => Ok(RateSpec {
                    raw_column: raw.into(),
                    derived_name: name.into(),
                }),
                _ => Err(Error::InvalidArgument(format!("rate '{s}' must be RAW:NAME"))),
            })
            .collect::<Result<Vec<_>>>()?;
        let ratio_specs = self
            .ratios
            .iter()
            .flatten()
            .map(|s| match s.split(':').collect::<Vec<_>>()[..] {
                [num, den, name] => Ok(RatioSpec {
                    numerator_column: num.into(),
                    denominator_column: den.into(),
                    derived_name: name.into(),
                }),
                _ => Err(Error::InvalidArgument(format!("ratio '{s}' must be NUM:DEN:NAME"))),
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(IngestConfig {
            id_column: self.id_column.clone().unwrap_or(defaults.id_column),
            lat_column: self.lat_column.clone().unwrap_or(defaults.lat_column),
            lon_column: self.lon_column.clone().unwrap_or(defaults.lon_column),
            count_column: self.count_column.clone().unwrap_or(defaults.count_column),
            population_column: self.population_column.clone(),
            rate_specs,
            ratio_specs,
            standardize: self.standardize.unwrap_or(false),
        })
    }

    pub fn model_spec(&self) -> Result<ModelSpec> {
        let family = *Self::require(&self.family, "family")?;
        let spec = ModelSpec {
            family,
            count_covariates: self.covariates.clone().unwrap_or_default(),
            inflation_covariates: self.inflation_covariates.clone(),
            add_intercept: !self.no_intercept.unwrap_or(false),
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn weight_scheme(&self) -> Result<WeightScheme> {
        match (self.band_km, self.k) {
            (Some(km), None) => Ok(WeightScheme::DistanceBand { km }),
            (None, Some(k)) => Ok(WeightScheme::KNearest { k }),
            (Some(_), Some(_)) => Err(Error::InvalidArgument("give either a band distance or k, not both".into())),
            (None, None) => Err(Error::InvalidArgument("--weights band:KM or knn:K is required".into())),
        }
    }
}

fn emit(output: Option<&Path>, contents: &str, stdout: &mut dyn Write) -> Result<()> {
    match output {
        Some(path) => fs::write(path, contents)?,
        None => stdout.write_all(contents.as_bytes())?,
    }
    Ok(())
}

fn render_fit(result: &FitResult, format: Format) -> Result<String> {
    match format {
        Format::Text => Ok(report::render_text(result)),
        Format::Csv => report::render_csv(result),
        Format::Json => report::render_json(result),
        Format::Geojson => Err(Error::InvalidArgument("fit output is text, csv or json".into())),
    }
}

/// Reads the input table, fits the model and writes the coefficient table.
pub fn cmd_fit(config: &RunConfig, stdout: &mut dyn Write) -> Result<i32> {
    let input = RunConfig::require(&config.input, "input")?;
    let model = config.model_spec()?;
    let format = config.format.unwrap_or(Format::Text);
    let dataset = read_dataset_path(input, &config.ingest_config()?)?;
    let options = OptimOptions {
        max_iterations: config.max_iterations.unwrap_or(OptimOptions::default().max_iterations),
        ..OptimOptions::default()
    };
    let result = fit(&model, &dataset, &options)?;
    emit(config.output.as_deref(), &render_fit(&result, format)?, stdout)?;
    Ok(if result.converged { EXIT_OK } else { EXIT_NOT_CONVERGED })
}

/// G_i* scores for one value column, written as CSV or GeoJSON.
pub fn cmd_hotspot(config: &RunConfig, stdout: &mut dyn Write) -> Result<i32> {
    let input = RunConfig::require(&config.input, "input")?;
    let scheme = config.weight_scheme()?;
    let ingest = config.ingest_config()?;
    let dataset = read_dataset_path(input, &ingest)?;
    let value_column = config.value_column.as_deref().unwrap_or(&ingest.count_column);
    let values: Vec<f64> = if value_column == ingest.count_column {
        dataset.counts().iter().map(|&c| c as f64).collect()
    } else {
        dataset
            .column(value_column)
            .map_err(|_| Error::MissingColumn(value_column.to_string()))?
    };
    let weights = build_weights(&dataset.centroids(), scheme)?;
    let result = getis_ord_gstar(&values, &weights)?;
    let ids = dataset.ids();
    let text = match config.format.unwrap_or(Format::Csv) {
        Format::Csv => report::hotspot_csv(&ids, &result)?,
        Format::Geojson => report::hotspot_geojson(&ids, &dataset.centroids(), &result)?,
        _ => return Err(Error::InvalidArgument("hotspot output is csv or geojson".into())),
    };
    emit(config.output.as_deref(), &text, stdout)?;
    Ok(EXIT_OK)
}

/// Generates a dataset from a spec file or preset, writes it as CSV and
/// prints a one-line summary.
pub fn cmd_simulate(config: &RunConfig, stdout: &mut dyn Write) -> Result<i32> {
    let output = RunConfig::require(&config.output, "out")?;
    let mut spec: DgpSpec = match (&config.spec, &config.preset) {
        (Some(path), None) => serde_json::from_str(&fs::read_to_string(path)?)
            .map_err(|e| Error::InvalidSpec(e.to_string()))?,
        (None, Some(name)) => preset(name, config.seed.unwrap_or(0))?,
        (Some(_), Some(_)) => return Err(Error::InvalidArgument("give either --spec or --preset".into())),
        (None, None) => return Err(Error::InvalidArgument("--spec or --preset is required".into())),
    };
    if let Some(seed) = config.seed {
        spec.seed = seed;
    }
    let dataset = generate(&spec)?;
    let mut buf = Vec::new();
    write_dataset(&dataset, &mut buf)?;
    fs::write(output, buf)?;
    writeln!(
        stdout,
        "n={} zero_share={:.4} mean_count={:.4}",
        dataset.len(),
        dataset.zero_share(),
        dataset.mean_count()
    )?;
    Ok(EXIT_OK)
}

/// Re-renders a saved JSON fit result.
pub fn cmd_report(config: &RunConfig, stdout: &mut dyn Write) -> Result<i32> {
    let path = RunConfig::require(&config.fit, "fit")?;
    let result: FitResult = serde_json::from_str(&fs::read_to_string(path)?)?;
    let text = render_fit(&result, config.format.unwrap_or(Format::Text))?;
    emit(config.output.as_deref(), &text, stdout)?;
    Ok(EXIT_OK)
}

/// Runs the configured command and maps errors to exit code 1 with a
/// single `error[Code]: message` line on `stderr`.
pub fn run(config: &RunConfig, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32 {
    let outcome = match config.command {
        Some(Command::Fit) => cmd_fit(config, stdout),
        Some(Command::Hotspot) => cmd_hotspot(config, stdout),
        Some(Command::Simulate) => cmd_simulate(config, stdout),
        Some(Command::Report) => cmd_report(config, stdout),
        None => Err(Error::InvalidArgument("no command given".into())),
    };
    match outcome {
        Ok(code) => {
            if code == EXIT_NOT_CONVERGED {
                let _ = writeln!(stderr, "warning: optimizer stopped before converging");
            }
            code
        }
        Err(e) => {
            let message = e.to_string().replace('\n', " ");
            let _ = writeln!(stderr, "error[{}]: {message}", e.code());
            EXIT_ERROR
        }
    }
}
