use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use countloc::cli::{run, Command, Format, RunConfig};
use countloc::{Family, WeightScheme};

#[derive(Parser)]
#[command(name = "countloc", version, about = "Location-choice count models and G_i* hot spots")]
struct Cli {
    /// JSON file with RunConfig fields; flags override it.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Option<Cmd>,
}

#[derive(Args, Default)]
struct Columns {
    #[arg(long)]
    id_column: Option<String>,
    #[arg(long)]
    lat_column: Option<String>,
    #[arg(long)]
    lon_column: Option<String>,
    #[arg(long)]
    count_column: Option<String>,
    #[arg(long)]
    population_column: Option<String>,
    /// RAW:NAME, derived as RAW / population * 10000.
    #[arg(long = "rate")]
    rates: Vec<String>,
    /// NUM:DEN:NAME, derived as NUM / DEN.
    #[arg(long = "ratio")]
    ratios: Vec<String>,
}

#[derive(Subcommand)]
enum Cmd {
    /// Fit a logit, Poisson or ZIP model and write the coefficient table.
    Fit {
        #[arg(long)]
        input: Option<PathBuf>,
        #[arg(long)]
        family: Option<Family>,
        #[arg(long, value_delimiter = ',')]
        covariates: Option<Vec<String>>,
        #[arg(long, value_delimiter = ',', num_args = 0..)]
        inflation_covariates: Option<Vec<String>>,
        #[arg(long)]
        no_intercept: bool,
        #[arg(long)]
        standardize: bool,
        #[arg(long)]
        max_iterations: Option<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        format: Option<Format>,
        #[command(flatten)]
        columns: Columns,
    },
    /// Getis-Ord G_i* scores and hot/cold classes.
    Hotspot {
        #[arg(long)]
        input: Option<PathBuf>,
        #[arg(long)]
        value_column: Option<String>,
        /// band:KM or knn:K
        #[arg(long)]
        weights: Option<WeightScheme>,
        #[arg(long)]
        standardize: bool,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        format: Option<Format>,
        #[command(flatten)]
        columns: Columns,
    },
    /// Generate a synthetic dataset from a JSON spec or a preset.
    Simulate {
        #[arg(long)]
        spec: Option<PathBuf>,
        #[arg(long)]
        preset: Option<String>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Render a saved JSON fit result.
    Report {
        #[arg(long)]
        fit: Option<PathBuf>,
        #[arg(long)]
        format: Option<Format>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn flag(set: bool) -> Option<bool> {
    set.then_some(true)
}

fn apply_columns(cfg: &mut RunConfig, c: Columns) {
    cfg.id_column = c.id_column;
    cfg.lat_column = c.lat_column;
    cfg.lon_column = c.lon_column;
    cfg.count_column = c.count_column;
    cfg.population_column = c.population_column;
    cfg.rates = (!c.rates.is_empty()).then_some(c.rates);
    cfg.ratios = (!c.ratios.is_empty()).then_some(c.ratios);
}

fn from_flags(cmd: Cmd) -> RunConfig {
    let mut cfg = RunConfig::default();
    match cmd {
        Cmd::Fit {
            input,
            family,
            covariates,
            inflation_covariates,
            no_intercept,
            standardize,
            max_iterations,
            out,
            format,
            columns,
        } => {
            cfg.command = Some(Command::Fit);
            cfg.input = input;
            cfg.family = family;
            cfg.covariates = covariates;
            cfg.inflation_covariates = inflation_covariates;
            cfg.no_intercept = flag(no_intercept);
            cfg.standardize = flag(standardize);
            cfg.max_iterations = max_iterations;
            cfg.output = out;
            cfg.format = format;
            apply_columns(&mut cfg, columns);
        }
        Cmd::Hotspot {
            input,
            value_column,
            weights,
            standardize,
            out,
            format,
            columns,
        } => {
            cfg.command = Some(Command::Hotspot);
            cfg.input = input;
            cfg.value_column = value_column;
            match weights {
                Some(WeightScheme::DistanceBand { km }) => cfg.band_km = Some(km),
                Some(WeightScheme::KNearest { k }) => cfg.k = Some(k),
                _ => {}
            }
            cfg.standardize = flag(standardize);
            cfg.output = out;
            cfg.format = format;
            apply_columns(&mut cfg, columns);
        }
        Cmd::Simulate { spec, preset, seed, out } => {
            cfg.command = Some(Command::Simulate);
            cfg.spec = spec;
            cfg.preset = preset;
            cfg.seed = seed;
            cfg.output = out;
        }
        Cmd::Report { fit, format, out } => {
            cfg.command = Some(Command::Report);
            cfg.fit = fit;
            cfg.format = format;
            cfg.output = out;
        }
    }
    cfg
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let mut stdout = std::io::stdout().lock();
    let mut stderr = std::io::stderr().lock();
    let base = match cli.config.as_deref().map(RunConfig::from_json_file).transpose() {
        Ok(cfg) => cfg.unwrap_or_default(),
        Err(e) => {
            use std::io::Write;
            let _ = writeln!(stderr, "error[{}]: {}", e.code(), e);
            return ExitCode::from(1);
        }
    };
    let flags = cli.command.map(from_flags).unwrap_or_default();
    let code = run(&base.overlay(flags), &mut stdout, &mut stderr);
    ExitCode::from(code as u8)
}
