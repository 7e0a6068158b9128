use countloc::data::{CountyObservation, Dataset};
use countloc::ingest::{read_dataset, write_dataset, IngestConfig, RateSpec, RATE_SCALE};
use countloc::Error;
use proptest::prelude::*;

fn observation() -> impl Strategy<Value = (f64, f64, u64, Vec<f64>)> {
    (
        -90.0f64..=90.0,
        -180.0f64..=180.0,
        0u64..10_000,
        prop::collection::vec(-1e6f64..1e6, 3),
    )
}

fn write_to_string(d: &Dataset) -> String {
    let mut buf = Vec::new();
    write_dataset(d, &mut buf).unwrap();
    String::from_utf8(buf).unwrap()
}

#[test]
fn rates_recover_raw_counts() {
    let csv = "id,lat,lon,count,population,banks_raw\n\
               a,40,-90,1,20000,4\n\
               b,41,-91,0,123457,17\n\
               c,42,-92,3,9999991,2503\n";
    let config = IngestConfig {
        population_column: Some("population".into()),
        rate_specs: vec![RateSpec {
            raw_column: "banks_raw".into(),
            derived_name: "banks_per_10k".into(),
        }],
        ..IngestConfig::default()
    };
    let d = read_dataset(csv.as_bytes(), &config).unwrap();
    let pop = d.column("population").unwrap();
    let raw = d.column("banks_raw").unwrap();
    let rate = d.column("banks_per_10k").unwrap();
    assert_eq!(rate[0], 2.0);
    for i in 0..3 {
        let back = rate[i] * pop[i] / RATE_SCALE;
        assert!((back - raw[i]).abs() <= 1e-9 * raw[i].abs());
    }
}

#[test]
fn errors_name_the_row() {
    let csv = "id,lat,lon,count,x\na,1,1,2,0.5\nb,1,1,3,oops\n";
    match read_dataset(csv.as_bytes(), &IngestConfig::default()).unwrap_err() {
        Error::NonNumericCell { row, column } => {
            assert_eq!(row, 2);
            assert_eq!(column, "x");
        }
        e => panic!("{e:?}"),
    }
    let csv = "id,lat,count\na,1,2\n";
    assert!(matches!(
        read_dataset(csv.as_bytes(), &IngestConfig::default()).unwrap_err(),
        Error::MissingColumn(c) if c == "lon"
    ));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn write_then_read_is_identity(rows in prop::collection::vec(observation(), 1..20)) {
        let obs = rows
            .into_iter()
            .enumerate()
            .map(|(i, (lat, lon, c, x))| CountyObservation::new(format!("c{i:03}"), lat, lon, c, x))
            .collect();
        let d = Dataset::new(vec!["alpha".into(), "beta".into(), "gamma".into()], obs).unwrap();
        let text = write_to_string(&d);
        let back = read_dataset(text.as_bytes(), &IngestConfig::default()).unwrap();
        prop_assert_eq!(back.schema(), d.schema());
        prop_assert_eq!(back.observations(), d.observations());
        prop_assert_eq!(write_to_string(&back), text);
    }
}
