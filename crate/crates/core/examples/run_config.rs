//! Drives the command layer in-process: simulate a table, fit it, and map
//! hot spots, all from `RunConfig` values.

use countloc::cli::{run, Command, Format, RunConfig};
use countloc::Family;

fn main() -> std::io::Result<()> {
    let dir = std::env::temp_dir().join("countloc-run-config");
    std::fs::create_dir_all(&dir)?;
    let data = dir.join("counties.csv");
    let (mut out, mut err) = (std::io::stdout(), std::io::stderr());

    let simulate = RunConfig {
        command: Some(Command::Simulate),
        preset: Some("paper-scale".into()),
        seed: Some(42),
        output: Some(data.clone()),
        ..RunConfig::default()
    };
    let fit = RunConfig {
        command: Some(Command::Fit),
        input: Some(data.clone()),
        family: Some(Family::Zip),
        covariates: Some(vec!["banks_per_10k".into(), "metro_county".into()]),
        inflation_covariates: Some(vec!["metro_county".into()]),
        format: Some(Format::Csv),
        ..RunConfig::default()
    };
    let hotspot = RunConfig {
        command: Some(Command::Hotspot),
        input: Some(data),
        band_km: Some(60.0),
        output: Some(dir.join("hotspots.geojson")),
        format: Some(Format::Geojson),
        ..RunConfig::default()
    };
    for cfg in [simulate, fit, hotspot] {
        let code = run(&cfg, &mut out, &mut err);
        println!("{:?} -> exit {code}", cfg.command.unwrap());
    }
    println!("outputs in {}", dir.display());
    Ok(())
}
