//! Zero-inflated Poisson probabilities and moments next to the plain Poisson.

use countloc::glm::{poisson_pmf, zip_moments, zip_pmf};

fn main() -> countloc::Result<()> {
    let lambda = 2.0;
    println!("{:>3} {:>10} {:>10} {:>10}", "y", "poisson", "zip p=0.2", "zip p=0.5");
    for y in 0..8 {
        println!(
            "{y:>3} {:>10.5} {:>10.5} {:>10.5}",
            poisson_pmf(lambda, y),
            zip_pmf(0.2, lambda, y)?,
            zip_pmf(0.5, lambda, y)?
        );
    }
    println!();
    for p in [0.0, 0.1, 0.3, 0.5, 0.9] {
        let (mean, var) = zip_moments(p, lambda)?;
        println!("p={p:.1}  mean={mean:.3}  variance={var:.3}  variance/mean={:.3}", var / mean);
    }
    Ok(())
}
