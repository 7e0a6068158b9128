//! Plants a block of high values on a lattice and maps the G_i* classes.

use countloc::spatial::{build_weights, getis_ord_gstar, HotspotClass, WeightScheme, EARTH_RADIUS_KM};

const SIDE: usize = 16;
const SPACING_KM: f64 = 10.0;

fn main() -> countloc::Result<()> {
    let step = (SPACING_KM / EARTH_RADIUS_KM).to_degrees();
    let mut points = Vec::new();
    let mut values = Vec::new();
    for r in 0..SIDE {
        for c in 0..SIDE {
            points.push((r as f64 * step, c as f64 * step));
            let inside = (5..9).contains(&r) && (9..13).contains(&c);
            values.push(if inside { 10.0 } else { 0.0 });
        }
    }
    // rook adjacency: the band reaches edge neighbours but not diagonals
    let weights = build_weights(&points, WeightScheme::DistanceBand { km: 1.2 * SPACING_KM })?;
    let result = getis_ord_gstar(&values, &weights)?;
    for r in (0..SIDE).rev() {
        let row: String = (0..SIDE)
            .map(|c| match result.class[r * SIDE + c] {
                HotspotClass::Hot99 => '#',
                HotspotClass::Hot95 => '+',
                HotspotClass::Cold95 | HotspotClass::Cold99 => '-',
                HotspotClass::NotSignificant => '.',
            })
            .collect();
        println!("{row}");
    }
    let peak = result.z.iter().copied().fold(f64::MIN, f64::max);
    println!("\n# hot 99%, + hot 95%, - cold; peak z = {peak:.2}");
    Ok(())
}
