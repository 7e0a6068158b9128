//! Rendering of fit results and hot-spot layers.

use std::fmt::Write as _;

use serde::Serialize;

use crate::error::Result;
use crate::glm::Family;
use crate::optimizer::{display_p_value, Coefficient, Component, FitResult};
use crate::spatial::HotspotResult;

/// Covariate blocks in display order.
pub const BLOCKS: [&str; 4] = [
    "Market Concentration",
    "Socio-Demographic",
    "Economic",
    "Organizations of Common Bond",
];

/// Bundled map from covariate column names to (block index, display label).
pub const BLOCK_MAP: &[(&str, usize, &str)] = &[
    ("metro_county", 0, "Metro County"),
    ("nonmetro_adjacent", 0, "Non-Metro Adjacent"),
    ("population_density", 0, "Population Density"),
    ("banks_per_10k", 0, "Number of Banks per 10K Population"),
    ("savings_loans_per_10k", 0, "Number of Savings and Loans per 10K Population"),
    ("pct_african_american", 1, "Percent of Population African American"),
    ("pct_hispanic", 1, "Percent of Population Hispanic"),
    ("pct_bachelor", 1, "Percent of Population over Age 25 with a Bachelor's Degree"),
    ("pct_foreign_born", 1, "Percent of the Population Foreign Born"),
    ("poverty_rate", 1, "Poverty Rate"),
    ("pct_change_households", 2, "Percent Change in Number of Households 2000-2005"),
    ("pct_owner_occupied", 2, "Percent of Houses Owner Occupied"),
    ("unemployment_rate", 2, "Unemployment Rate"),
    ("pop_employment_ratio", 2, "Population: Employment Ratio"),
    ("pop_proprietorship_ratio", 2, "Population: Proprietorship Ratio"),
    ("nonag_coops_present", 3, "Non-Agricultural Cooperatives Present"),
    ("civil_social_per_10k", 3, "Number of Civil-Social Organizations per 10K Population"),
    ("business_assoc_per_10k", 3, "Number of Business Associations per 10K Population"),
    ("professional_assoc_per_10k", 3, "Number of Professional Associations per 10K Population"),
    ("labor_unions_per_10k", 3, "Number of Labor Unions per 10K Population"),
];

pub const STAR_LEGEND: [&str; 4] = [
    "Number in parentheses is the marginal significance value.",
    "***: Significant at or above the 99.9% level.",
    "**: Significant at the 95.0% level.",
    "*: Significant at the 90.0% level.",
];

pub fn block_of(name: &str) -> Option<(usize, &'static str)> {
    BLOCK_MAP
        .iter()
        .find(|(key, _, _)| *key == name)
        .map(|&(_, block, label)| (block, label))
}

const LABEL_WIDTH: usize = 62;

fn row(out: &mut String, indent: usize, label: &str, c: &Coefficient) {
    let label = format!("{:indent$}{label}", "");
    let _ = writeln!(
        out,
        "{label:<LABEL_WIDTH$} {:>10.4}  {:<3}  ({})",
        c.estimate,
        c.stars,
        display_p_value(c.p_value)
    );
}

fn equation(out: &mut String, rows: &[&Coefficient]) {
    let (intercepts, covariates): (Vec<&Coefficient>, Vec<&Coefficient>) =
        rows.iter().partition(|c| c.name == crate::data::INTERCEPT);
    for c in intercepts {
        row(out, 0, &c.name, c);
    }
    let grouped = covariates.iter().any(|c| block_of(&c.name).is_some());
    if !grouped {
        for c in covariates {
            row(out, 0, &c.name, c);
        }
        return;
    }
    for (b, heading) in BLOCKS.iter().enumerate() {
        let members: Vec<_> = covariates
            .iter()
            .filter_map(|c| block_of(&c.name).filter(|(blk, _)| *blk == b).map(|(_, label)| (label, *c)))
            .collect();
        if members.is_empty() {
            continue;
        }
        let _ = writeln!(out, "{heading}");
        for (label, c) in members {
            row(out, 2, label, c);
        }
    }
    let other: Vec<_> = covariates.iter().filter(|c| block_of(&c.name).is_none()).collect();
    if !other.is_empty() {
        let _ = writeln!(out, "Other");
        for c in other {
            row(out, 2, &c.name, c);
        }
    }
}

/// Coefficient table with estimates, stars and p-values, covariates grouped
/// by block when their names are in [`BLOCK_MAP`].
pub fn render_text(fit: &FitResult) -> String {
    let mut out = String::new();
    let outcome = match fit.family {
        Family::Logit => "Logit (1 = at least one, 0 = none)",
        Family::Poisson => "Poisson",
        Family::Zip => "Zero-inflated Poisson",
    };
    let _ = writeln!(out, "Model: {outcome}");
    let _ = writeln!(
        out,
        "Observations: {}   Log-likelihood: {:.4}   Iterations: {}   Converged: {}",
        fit.n_obs,
        fit.log_likelihood,
        fit.iterations,
        if fit.converged { "yes" } else { "no" }
    );
    let _ = writeln!(out);
    let rule = "-".repeat(LABEL_WIDTH + 30);
    let _ = writeln!(out, "{:<LABEL_WIDTH$} {:>10}  {:<3}  {}", "Variable", "Estimate", "", "(p-value)");
    let _ = writeln!(out, "{rule}");

    let outcome_rows: Vec<&Coefficient> = fit.coefficients.iter().filter(|c| c.component == Component::Outcome).collect();
    let inflation_rows: Vec<&Coefficient> = fit
        .coefficients
        .iter()
        .filter(|c| c.component == Component::Inflation)
        .collect();
    if inflation_rows.is_empty() {
        equation(&mut out, &outcome_rows);
    } else {
        let _ = writeln!(out, "[Count equation]");
        equation(&mut out, &outcome_rows);
        let _ = writeln!(out, "[Inflation equation: logit of a structural zero]");
        equation(&mut out, &inflation_rows);
    }
    let _ = writeln!(out, "{rule}");
    for line in STAR_LEGEND {
        let _ = writeln!(out, "{line}");
    }
    out
}

/// Shortest round-trip text, in exponent form for very small or large values.
fn real(v: f64) -> String {
    format!("{v:?}")
}

/// One row per coefficient with exact values.
pub fn render_csv(fit: &FitResult) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["component", "variable", "estimate", "std_error", "z", "p_value", "stars"])?;
    for c in &fit.coefficients {
        let component = match c.component {
            Component::Outcome => "outcome",
            Component::Inflation => "inflation",
        };
        w.write_record([
            component.to_string(),
            c.name.clone(),
            real(c.estimate),
            real(c.std_error),
            real(c.z_stat),
            real(c.p_value),
            c.stars.clone(),
        ])?;
    }
    Ok(String::from_utf8(w.into_inner().map_err(|e| e.into_error())?).expect("csv output is utf-8"))
}

pub fn render_json(fit: &FitResult) -> Result<String> {
    let mut s = serde_json::to_string_pretty(fit)?;
    s.push('\n');
    Ok(s)
}

pub fn hotspot_csv(ids: &[&str], result: &HotspotResult) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["id", "z", "class"])?;
    for ((id, z), class) in ids.iter().zip(&result.z).zip(&result.class) {
        w.write_record([id.to_string(), real(*z), class.to_string()])?;
    }
    Ok(String::from_utf8(w.into_inner().map_err(|e| e.into_error())?).expect("csv output is utf-8"))
}

#[derive(Serialize)]
struct FeatureCollection<'a> {
    #[serde(rename = "type")]
    kind: &'static str,
    features: Vec<Feature<'a>>,
}

#[derive(Serialize)]
struct Feature<'a> {
    #[serde(rename = "type")]
    kind: &'static str,
    geometry: Point,
    properties: Properties<'a>,
}

#[derive(Serialize)]
struct Point {
    #[serde(rename = "type")]
    kind: &'static str,
    coordinates: [f64; 2],
}

#[derive(Serialize)]
struct Properties<'a> {
    id: &'a str,
    z: f64,
    class: &'static str,
}

/// RFC 7946 FeatureCollection of points (lon, lat) with id, z and class.
pub fn hotspot_geojson(ids: &[&str], centroids: &[(f64, f64)], result: &HotspotResult) -> Result<String> {
    let features = ids
        .iter()
        .zip(centroids)
        .zip(result.z.iter().zip(&result.class))
        .map(|((id, &(lat, lon)), (&z, class))| Feature {
            kind: "Feature",
            geometry: Point {
                kind: "Point",
                coordinates: [lon, lat],
            },
            properties: Properties {
                id,
                z,
                class: class.as_str(),
            },
        })
        .collect();
    let mut s = serde_json::to_string(&FeatureCollection {
        kind: "FeatureCollection",
        features,
    })?;
    s.push('\n');
    Ok(s)
}
