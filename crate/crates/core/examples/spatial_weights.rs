//! Distance-band and k-nearest-neighbour weights on a few city centroids.

use countloc::spatial::{build_weights, haversine_km, WeightScheme};

fn main() -> countloc::Result<()> {
    let cities = [
        ("Chicago", (41.88, -87.63)),
        ("Milwaukee", (43.04, -87.91)),
        ("Indianapolis", (39.77, -86.16)),
        ("St. Louis", (38.63, -90.20)),
        ("Detroit", (42.33, -83.05)),
    ];
    let points: Vec<(f64, f64)> = cities.iter().map(|c| c.1).collect();
    for (name, p) in &cities[1..] {
        println!("Chicago -> {name}: {:.1} km", haversine_km(cities[0].1, *p));
    }
    for scheme in ["band:300", "knn:2"] {
        let scheme: WeightScheme = scheme.parse()?;
        let w = build_weights(&points, scheme)?;
        println!("\n{scheme}");
        for (i, (name, _)) in cities.iter().enumerate() {
            let linked: Vec<&str> = w.neighbours(i).into_iter().map(|j| cities[j].0).collect();
            println!("  {name:<13} {}", linked.join(", "));
        }
    }
    Ok(())
}
