//! Fits the logit, Poisson and ZIP models to one simulated county table and
//! prints the coefficient tables.

use countloc::optimizer::{fit, OptimOptions};
use countloc::report::render_text;
use countloc::synth::{generate, paper_scale_preset};
use countloc::{Family, ModelSpec};

fn main() -> countloc::Result<()> {
    let spec = paper_scale_preset(2024);
    let dataset = generate(&spec)?;
    println!(
        "{} counties, {:.1}% without an institution\n",
        dataset.len(),
        100.0 * dataset.zero_share()
    );
    let covariates = spec.covariate_names();
    for family in [Family::Logit, Family::Poisson, Family::Zip] {
        let model = ModelSpec::new(family, covariates.clone());
        let result = fit(&model, &dataset, &OptimOptions::default())?;
        println!("{}", render_text(&result));
    }
    Ok(())
}
