//! Reads a county CSV, derives per-10k rates and a ratio, and standardizes
//! the continuous columns.

use countloc::ingest::{read_dataset, IngestConfig, RateSpec, RatioSpec};

const TABLE: &str = "\
fips,lat,lon,credit_unions,pop,banks,employment,labor_force,metro
17031,41.84,-87.82,41,5376741,237,2338000,2498000,1
17043,41.85,-88.09,12,904161,120,452000,477000,1
17089,41.94,-88.43,4,404119,38,188000,201000,1
17197,41.45,-87.98,6,502266,44,228000,245000,1
17091,41.14,-87.86,1,103833,15,48100,51700,0
17099,41.34,-88.89,0,111509,19,52000,55900,0
";

fn main() -> countloc::Result<()> {
    let config = IngestConfig {
        id_column: "fips".into(),
        count_column: "credit_unions".into(),
        population_column: Some("pop".into()),
        rate_specs: vec![RateSpec {
            raw_column: "banks".into(),
            derived_name: "banks_per_10k".into(),
        }],
        ratio_specs: vec![RatioSpec {
            numerator_column: "employment".into(),
            denominator_column: "labor_force".into(),
            derived_name: "employment_rate".into(),
        }],
        standardize: true,
        ..IngestConfig::default()
    };
    let dataset = read_dataset(TABLE.as_bytes(), &config)?;
    println!("columns: {}", dataset.schema().join(", "));
    for s in dataset.standardization() {
        println!("standardized {:<16} mean {:>14.4}  sd {:>14.4}", s.column, s.mean, s.std_dev);
    }
    let rates = dataset.column("banks_per_10k")?;
    let employment = dataset.column("employment_rate")?;
    for ((id, rate), emp) in dataset.ids().iter().zip(&rates).zip(&employment) {
        println!("{id}: banks_per_10k {rate:>7.3}  employment_rate {emp:.3}");
    }
    Ok(())
}
