//! Shows the calibrated paper-scale generator and how its zero share spreads
//! across seeds.

use countloc::synth::{
    expected_zero_share_and_positive_mean, generate, paper_scale_preset, PAPER_SCALE_ZERO_SHARE,
};

fn main() -> countloc::Result<()> {
    let spec = paper_scale_preset(0);
    let (zero, positive_mean) = expected_zero_share_and_positive_mean(&spec)?;
    println!("count intercept     {:.6}", spec.beta[0]);
    println!("inflation intercept {:.6}", spec.gamma[0]);
    println!("expected zero share {zero:.6}, expected positive count {positive_mean:.6}\n");

    let shares: Vec<f64> = (0..40)
        .map(|seed| generate(&paper_scale_preset(seed)).map(|d| d.zero_share()))
        .collect::<Result<_, _>>()?;
    let mean = shares.iter().sum::<f64>() / shares.len() as f64;
    let sd = (shares.iter().map(|s| (s - mean).powi(2)).sum::<f64>() / (shares.len() - 1) as f64).sqrt();
    let inside = shares.iter().filter(|&&s| (s - PAPER_SCALE_ZERO_SHARE).abs() <= 0.02).count();
    println!("40 seeds: mean zero share {mean:.4}, sd {sd:.4}, within 0.02 of target: {inside}");
    Ok(())
}
