mod common;

use countloc::spatial::{build_weights, getis_ord_gstar, HotspotClass, SpatialWeights, WeightScheme};
use proptest::prelude::*;
use rand::Rng;

fn random_weights(rng: &mut rand_chacha::ChaCha8Rng, n: usize) -> Vec<Vec<f64>> {
    (0..n)
        .map(|i| {
            (0..n)
                .map(|j| if i == j || rng.random::<f64>() < 0.3 { rng.random_range(0.1..1.5) } else { 0.0 })
                .collect()
        })
        .collect()
}

#[test]
fn line_of_five_with_two_high_values() {
    let pts = common::grid(1, 5, 10.0);
    let w = build_weights(&pts, WeightScheme::DistanceBand { km: 12.0 }).unwrap();
    let values = [10.0, 10.0, 0.0, 0.0, 0.0];
    let res = getis_ord_gstar(&values, &w).unwrap();
    let direct = common::gstar_direct(&values, &w.to_dense());
    for (a, b) in res.z.iter().zip(&direct) {
        assert!((a - b).abs() <= 1e-12);
    }
    assert!(res.z[0] > 0.0 && res.z[1] > 0.0);
    assert!(res.z[3] < 0.0 && res.z[4] < 0.0);
}

#[test]
fn planted_block_peaks_inside_and_survives_translation() {
    let pts = common::grid(12, 12, 5.0);
    let in_block = |i: usize| (3..6).contains(&(i / 12)) && (6..9).contains(&(i % 12));
    let values: Vec<f64> = (0..144).map(|i| if in_block(i) { 8.0 } else { 1.0 }).collect();
    let w = build_weights(&pts, WeightScheme::DistanceBand { km: 6.0 }).unwrap();
    let res = getis_ord_gstar(&values, &w).unwrap();
    let top = (0..144).max_by(|&a, &b| res.z[a].total_cmp(&res.z[b])).unwrap();
    assert!(in_block(top));

    let shifted: Vec<f64> = values.iter().map(|v| v + 250.0).collect();
    let moved = getis_ord_gstar(&shifted, &w).unwrap();
    let direct = common::gstar_direct(&shifted, &w.to_dense());
    for i in 0..144 {
        assert!((moved.z[i] - direct[i]).abs() <= 1e-9);
    }
    assert_eq!(moved.class, res.class);
}

#[test]
fn equal_values_are_never_significant() {
    let pts = common::grid(6, 6, 3.0);
    let w = build_weights(&pts, WeightScheme::KNearest { k: 4 }).unwrap();
    let res = getis_ord_gstar(&[3.25; 36], &w).unwrap();
    assert!(res.z.iter().all(|&z| z == 0.0));
    assert!(res.class.iter().all(|&c| c == HotspotClass::NotSignificant));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn matches_direct_formula(seed in any::<u64>(), n in 2usize..=50) {
        let mut rng = common::rng(seed);
        let dense = random_weights(&mut rng, n);
        let values: Vec<f64> = (0..n).map(|_| rng.random_range(-20.0..20.0)).collect();
        let w = SpatialWeights::from_dense(&dense).unwrap();
        let got = getis_ord_gstar(&values, &w).unwrap();
        let want = common::gstar_direct(&values, &dense);
        for (a, b) in got.z.iter().zip(&want) {
            prop_assert!((a - b).abs() <= 1e-10);
        }
    }

    #[test]
    fn permutation_equivariance(seed in any::<u64>(), n in 3usize..=30) {
        let mut rng = common::rng(seed);
        let dense = random_weights(&mut rng, n);
        let values: Vec<f64> = (0..n).map(|_| rng.random_range(0.0..10.0)).collect();
        let mut perm: Vec<usize> = (0..n).collect();
        for i in (1..n).rev() {
            perm.swap(i, rng.random_range(0..=i));
        }
        let pd: Vec<Vec<f64>> = perm.iter().map(|&i| perm.iter().map(|&j| dense[i][j]).collect()).collect();
        let pv: Vec<f64> = perm.iter().map(|&i| values[i]).collect();
        let a = getis_ord_gstar(&values, &SpatialWeights::from_dense(&dense).unwrap()).unwrap();
        let b = getis_ord_gstar(&pv, &SpatialWeights::from_dense(&pd).unwrap()).unwrap();
        for (k, &i) in perm.iter().enumerate() {
            prop_assert!((b.z[k] - a.z[i]).abs() <= 1e-10);
        }
    }

    #[test]
    fn scale_invariance(seed in any::<u64>(), n in 3usize..=30, a in 0.01f64..100.0) {
        let mut rng = common::rng(seed);
        let w = SpatialWeights::from_dense(&random_weights(&mut rng, n)).unwrap();
        let values: Vec<f64> = (0..n).map(|_| rng.random_range(0.0..10.0)).collect();
        let scaled: Vec<f64> = values.iter().map(|v| v * a).collect();
        let z1 = getis_ord_gstar(&values, &w).unwrap().z;
        let z2 = getis_ord_gstar(&scaled, &w).unwrap().z;
        for (x, y) in z1.iter().zip(&z2) {
            prop_assert!((x - y).abs() <= 1e-9 * (1.0 + x.abs()));
        }
    }
}
