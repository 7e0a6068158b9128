//! One ZIP fit rendered as text, CSV and JSON, plus a GeoJSON hot-spot layer.

use countloc::optimizer::{fit, OptimOptions};
use countloc::report::{hotspot_geojson, render_csv, render_json, render_text};
use countloc::spatial::{build_weights, getis_ord_gstar, WeightScheme};
use countloc::synth::{generate, paper_scale_preset};
use countloc::{Family, ModelSpec};

fn main() -> countloc::Result<()> {
    let mut spec = paper_scale_preset(5);
    spec.n = 600;
    let dataset = generate(&spec)?;
    let model = ModelSpec::new(Family::Zip, spec.covariate_names());
    let result = fit(&model, &dataset, &OptimOptions::default())?;

    println!("{}", render_text(&result));
    println!("{}", render_csv(&result)?);
    let json = render_json(&result)?;
    println!("{}", &json[..json.len().min(400)]);

    let values: Vec<f64> = dataset.counts().iter().map(|&c| c as f64).collect();
    let weights = build_weights(&dataset.centroids(), WeightScheme::KNearest { k: 8 })?;
    let hot = getis_ord_gstar(&values, &weights)?;
    let geojson = hotspot_geojson(&dataset.ids()[..2], &dataset.centroids()[..2], &subset(&hot, 2))?;
    println!("{geojson}");
    Ok(())
}

fn subset(r: &countloc::HotspotResult, k: usize) -> countloc::HotspotResult {
    countloc::HotspotResult {
        z: r.z[..k].to_vec(),
        class: r.class[..k].to_vec(),
        mean: r.mean,
        scale: r.scale,
    }
}
