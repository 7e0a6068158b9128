//! Acceptance suite: one PASS/FAIL line per criterion, non-zero exit if any
//! criterion fails.

mod common;

use std::path::Path;
use std::process::Command as Process;
use std::time::{Duration, Instant};

use countloc::cli::{run, Command, RunConfig};
use countloc::data::DesignMatrix;
use countloc::glm::{grad_loglik, loglik, poisson_loglik, zip_loglik, zip_moments, Params};
use countloc::optimizer::{fit, OptimOptions};
use countloc::spatial::{build_weights, getis_ord_gstar, HotspotClass, SpatialWeights, WeightScheme};
use countloc::synth::{
    generate, paper_scale_preset, recovery_trial, sample_zip, CovariateDistribution, CovariateGenerator, DgpSpec,
    Layout, Response,
};
use countloc::{Family, ModelSpec};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};

struct Outcome {
    ok: bool,
    detail: String,
}

fn outcome(ok: bool, detail: impl Into<String>) -> Outcome {
    Outcome { ok, detail: detail.into() }
}

fn criterion(id: usize, name: &str, limit: Duration, body: impl FnOnce() -> Outcome) -> bool {
    let start = Instant::now();
    let out = body();
    let elapsed = start.elapsed();
    let in_time = elapsed <= limit;
    let pass = out.ok && in_time;
    println!(
        "{} {id}. {name}: {} [{:.2}s / limit {}s]{}",
        if pass { "PASS" } else { "FAIL" },
        out.detail,
        elapsed.as_secs_f64(),
        limit.as_secs(),
        if in_time { "" } else { " (over time)" }
    );
    pass
}

/// Raw Poisson moments E[Y^k], k = 1..4.
fn poisson_raw_moments(l: f64) -> [f64; 4] {
    [
        l,
        l + l * l,
        l.powi(3) + 3.0 * l * l + l,
        l.powi(4) + 6.0 * l.powi(3) + 7.0 * l * l + l,
    ]
}

fn moment_identities() -> Outcome {
    const PAIRS: usize = 200;
    const DRAWS: usize = 1_000_000;
    let mut rng = common::rng(101);
    let pairs: Vec<(f64, f64)> = (0..PAIRS)
        .map(|_| (rng.random_range(0.0..0.95), rng.random_range(0.05..40.0)))
        .collect();
    let results: Vec<(bool, bool)> = std::thread::scope(|s| {
        let handles: Vec<_> = pairs
            .chunks(PAIRS / 8)
            .enumerate()
            .map(|(c, chunk)| {
                s.spawn(move || {
                    chunk
                        .iter()
                        .enumerate()
                        .map(|(k, &(p, l))| {
                            let (mean, var) = zip_moments(p, l).unwrap();
                            let exact_mean = (1.0 - p) * l;
                            let exact_var = (1.0 - p) * l * (1.0 + p * l);
                            let exact = (mean - exact_mean).abs() <= 1e-12 * exact_mean.max(1.0)
                                && (var - exact_var).abs() <= 1e-12 * exact_var.max(1.0);

                            let mut draw_rng = ChaCha8Rng::seed_from_u64(7_000 + (c * 1000 + k) as u64);
                            let (mut s1, mut s2) = (0.0f64, 0.0f64);
                            for _ in 0..DRAWS {
                                let y = sample_zip(&mut draw_rng, p, l).0 as f64;
                                s1 += y;
                                s2 += y * y;
                            }
                            let n = DRAWS as f64;
                            let m = s1 / n;
                            let v = (s2 - n * m * m) / (n - 1.0);
                            let raw = poisson_raw_moments(l).map(|r| (1.0 - p) * r);
                            let mu = raw[0];
                            let mu4 = raw[3] - 4.0 * mu * raw[2] + 6.0 * mu * mu * raw[1] - 3.0 * mu.powi(4);
                            let se_mean = (exact_var / n).sqrt();
                            let se_var = ((mu4 - exact_var * exact_var) / n).sqrt();
                            let mc = (m - exact_mean).abs() <= 4.0 * se_mean && (v - exact_var).abs() <= 4.0 * se_var;
                            (exact, mc)
                        })
                        .collect::<Vec<_>>()
                })
            })
            .collect();
        handles.into_iter().flat_map(|h| h.join().unwrap()).collect()
    });
    let exact_fail = results.iter().filter(|r| !r.0).count();
    let mc_fail = results.iter().filter(|r| !r.1).count();
    outcome(
        exact_fail == 0 && mc_fail == 0,
        format!("{PAIRS} pairs, closed-form mismatches {exact_fail}, MC outside 4 SE {mc_fail}"),
    )
}

fn reduction_equivalence() -> Outcome {
    let mut rng = common::rng(202);
    let mut worst = 0.0f64;
    for _ in 0..50 {
        let n = rng.random_range(2..=20);
        let k = rng.random_range(0..=3);
        let x = common::random_design(&mut rng, n, k);
        let z = DesignMatrix::intercept_only(n);
        let y = common::random_counts(&mut rng, n, 8);
        let beta: Vec<f64> = (0..=k).map(|_| rng.random_range(-0.5..0.5)).collect();
        let a = zip_loglik(&beta, &[-60.0], &x, &z, &y).unwrap();
        let b = poisson_loglik(&beta, &x, &y).unwrap();
        worst = worst.max((a - b).abs());
    }
    outcome(worst <= 1e-10, format!("50 datasets, max |zip - poisson| = {worst:.2e}"))
}

fn gradient_correctness() -> Outcome {
    let mut rng = common::rng(303);
    let mut worst = [0.0f64; 3];
    for (f, family) in [Family::Logit, Family::Poisson, Family::Zip].into_iter().enumerate() {
        for _ in 0..100 {
            let n = rng.random_range(20..=60);
            let k = rng.random_range(1..=3);
            let x = common::random_design(&mut rng, n, k);
            let z = common::random_design(&mut rng, n, 1);
            let y = common::random_counts(&mut rng, n, 6);
            let beta: Vec<f64> = (0..=k).map(|_| rng.random_range(-1.0..1.0)).collect();
            let gamma: Vec<f64> = if family == Family::Zip {
                (0..2).map(|_| rng.random_range(-1.5..1.5)).collect()
            } else {
                vec![]
            };
            let zref = (family == Family::Zip).then_some(&z);
            let params = Params::new(beta.clone(), gamma.clone());
            let analytic = grad_loglik(family, &params, &x, zref, &y).unwrap();
            let theta = params.concat();
            let numeric = common::fd_gradient(
                |t| loglik(family, &Params::split(t, beta.len()), &x, zref, &y).unwrap(),
                &theta,
                1e-6,
            );
            worst[f] = worst[f].max(common::max_rel_err(&analytic, &numeric));
        }
    }
    outcome(
        worst.iter().all(|&w| w <= 1e-5),
        format!(
            "max relative error logit {:.1e}, poisson {:.1e}, zip {:.1e}",
            worst[0], worst[1], worst[2]
        ),
    )
}

fn closed_form_mles() -> Outcome {
    let mut rng = common::rng(404);
    let options = OptimOptions::default();
    let mut worst = 0.0f64;
    for _ in 0..20 {
        let n = rng.random_range(10..=200);
        let mut y = common::random_counts(&mut rng, n, 7);
        y[0] = 0;
        y[1] = 3;
        let data = common::count_dataset(&y);
        let share = y.iter().filter(|&&c| c > 0).count() as f64 / n as f64;
        let ybar = y.iter().sum::<u64>() as f64 / n as f64;

        let logit = fit(&ModelSpec::new(Family::Logit, vec![]), &data, &options).unwrap();
        let poisson = fit(&ModelSpec::new(Family::Poisson, vec![]), &data, &options).unwrap();
        worst = worst.max((logit.coefficients[0].estimate - (share / (1.0 - share)).ln()).abs());
        worst = worst.max((poisson.coefficients[0].estimate - ybar.ln()).abs());
    }
    outcome(worst <= 1e-7, format!("20 datasets, max deviation {worst:.2e}"))
}

fn recovery_spec(seed: u64) -> DgpSpec {
    DgpSpec {
        n: 5000,
        covariates: vec![
            CovariateGenerator::new("x1", CovariateDistribution::Normal { mean: 0.0, sd: 1.0 }),
            CovariateGenerator::new("x2", CovariateDistribution::Bernoulli { q: 0.4 }),
            CovariateGenerator::new("x3", CovariateDistribution::Uniform { low: -1.0, high: 1.0 }),
        ],
        beta: vec![0.5, 0.4, -0.3, 0.6],
        gamma: vec![-0.5, 0.8, -0.6, 0.3],
        response: Response::Counts,
        layout: Layout::UniformSquare { side_km: 500.0 },
        seed,
    }
}

fn parameter_recovery() -> Outcome {
    let names: Vec<String> = ["x1", "x2", "x3"].map(String::from).to_vec();
    let model = ModelSpec::new(Family::Zip, names.clone()).with_inflation(names);
    let options = OptimOptions::default();
    let seeds: Vec<u64> = (0..100).collect();
    let verdicts: Vec<bool> = std::thread::scope(|s| {
        let handles: Vec<_> = seeds
            .chunks(13)
            .map(|chunk| {
                let model = &model;
                let options = &options;
                s.spawn(move || {
                    chunk
                        .iter()
                        .map(|&seed| {
                            recovery_trial(&recovery_spec(seed), model, options)
                                .map(|r| r.converged && r.all_clear())
                                .unwrap_or(false)
                        })
                        .collect::<Vec<_>>()
                })
            })
            .collect();
        handles.into_iter().flat_map(|h| h.join().unwrap()).collect()
    });
    let good = verdicts.iter().filter(|&&v| v).count();
    outcome(good >= 95, format!("{good}/100 seeds with all 8 estimates within 3 SE"))
}

fn gstar_oracle() -> Outcome {
    let mut rng = common::rng(606);
    let mut worst = 0.0f64;
    let mut constant_ok = true;
    for inst in 0..100 {
        let n = rng.random_range(2..=50);
        let values: Vec<f64> = (0..n).map(|_| rng.random_range(0.0..10.0)).collect();
        let weights = if inst % 2 == 0 {
            let dense: Vec<Vec<f64>> = (0..n)
                .map(|_| {
                    (0..n)
                        .map(|_| if rng.random::<f64>() < 0.4 { rng.random_range(0.0..2.0) } else { 0.0 })
                        .collect()
                })
                .collect();
            SpatialWeights::from_dense(&dense).unwrap()
        } else {
            let pts: Vec<(f64, f64)> = (0..n)
                .map(|_| (rng.random_range(30.0..45.0), rng.random_range(-110.0..-80.0)))
                .collect();
            let k = rng.random_range(1..n.max(2));
            build_weights(&pts, WeightScheme::KNearest { k: k.min(n - 1) }).unwrap()
        };
        let got = getis_ord_gstar(&values, &weights).unwrap();
        let want = common::gstar_direct(&values, &weights.to_dense());
        for (a, b) in got.z.iter().zip(&want) {
            worst = worst.max((a - b).abs());
        }
        let flat = vec![rng.random_range(-5.0..5.0); n];
        let zero = getis_ord_gstar(&flat, &weights).unwrap();
        constant_ok &= zero.z.iter().all(|&z| z == 0.0);
    }
    outcome(
        worst <= 1e-10 && constant_ok,
        format!("100 instances, max |z - direct| = {worst:.2e}, all-equal values give zero z: {constant_ok}"),
    )
}

fn planted_cluster() -> Outcome {
    let spacing = 10.0;
    let pts = common::grid(20, 20, spacing);
    let in_block = |i: usize| (8..12).contains(&(i / 20)) && (8..12).contains(&(i % 20));
    let values: Vec<f64> = (0..400).map(|i| if in_block(i) { 10.0 } else { 0.0 }).collect();
    let weights = build_weights(&pts, WeightScheme::DistanceBand { km: 1.2 * spacing }).unwrap();
    let res = getis_ord_gstar(&values, &weights).unwrap();
    let hot = (0..400).filter(|&i| in_block(i) && res.class[i].is_hot()).count();
    let quiet = (0..400)
        .filter(|&i| !in_block(i) && res.class[i] == HotspotClass::NotSignificant)
        .count();
    let share = quiet as f64 / 384.0;
    outcome(
        hot == 16 && share >= 0.95,
        format!("block hot {hot}/16, background not significant {quiet}/384 ({:.1}%)", 100.0 * share),
    )
}

fn paper_scale(dir: &Path) -> Outcome {
    let shares: Vec<f64> = (0..100u64)
        .map(|seed| generate(&paper_scale_preset(seed)).unwrap().zero_share())
        .collect();
    let inside = shares.iter().filter(|s| (0.485..=0.525).contains(*s)).count();
    let (lo, hi) = shares
        .iter()
        .fold((1.0f64, 0.0f64), |(a, b), &s| (a.min(s), b.max(s)));

    let spec = paper_scale_preset(0);
    let data_path = dir.join("paper_scale.csv");
    countloc::ingest::write_dataset_path(&generate(&spec).unwrap(), &data_path).unwrap();
    let mut codes = Vec::new();
    for family in [Family::Logit, Family::Poisson, Family::Zip] {
        let cfg = RunConfig {
            command: Some(Command::Fit),
            input: Some(data_path.clone()),
            family: Some(family),
            covariates: Some(spec.covariate_names()),
            output: Some(dir.join(format!("fit_{family}.txt"))),
            ..RunConfig::default()
        };
        let (mut out, mut err) = (Vec::new(), Vec::new());
        codes.push(run(&cfg, &mut out, &mut err));
    }
    outcome(
        inside >= 95 && codes.iter().all(|&c| c == 0),
        format!("zero share in range for {inside}/100 seeds (min {lo:.4}, max {hi:.4}); fit exit codes {codes:?}"),
    )
}

fn digest(paths: &[&Path], stdout: &[u8]) -> Vec<u8> {
    let mut h = Sha256::new();
    h.update(stdout);
    for p in paths {
        h.update(std::fs::read(p).unwrap_or_default());
    }
    h.finalize().to_vec()
}

fn determinism(dir: &Path) -> Outcome {
    let exe = env!("CARGO_BIN_EXE_countloc");
    let data = dir.join("det.csv");
    let fit_json = dir.join("det_fit.json");
    let hot = dir.join("det_hot.geojson");
    let rep = dir.join("det_report.txt");
    let data_s = data.to_str().unwrap();
    let fit_s = fit_json.to_str().unwrap();
    let hot_s = hot.to_str().unwrap();
    let rep_s = rep.to_str().unwrap();
    let runs: Vec<(&str, Vec<&str>, Vec<&Path>)> = vec![
        (
            "simulate",
            vec!["simulate", "--preset", "paper-scale", "--seed", "11", "--out", data_s],
            vec![&data],
        ),
        (
            "fit",
            vec![
                "fit",
                "--input",
                data_s,
                "--family",
                "zip",
                "--covariates",
                "banks_per_10k,metro_county,pct_bachelor",
                "--format",
                "json",
                "--out",
                fit_s,
            ],
            vec![&fit_json],
        ),
        (
            "hotspot",
            vec!["hotspot", "--input", data_s, "--weights", "knn:8", "--format", "geojson", "--out", hot_s],
            vec![&hot],
        ),
        ("report", vec!["report", "--fit", fit_s, "--out", rep_s], vec![&rep]),
    ];
    let mut failures = Vec::new();
    for (name, args, files) in &runs {
        let mut first: Option<Vec<u8>> = None;
        for _ in 0..10 {
            let out = Process::new(exe).args(args).output().unwrap();
            if !out.status.success() {
                failures.push(format!("{name} exited {:?}", out.status.code()));
                break;
            }
            let d = digest(files, &out.stdout);
            match &first {
                None => first = Some(d),
                Some(f) if *f != d => {
                    failures.push(format!("{name} output changed"));
                    break;
                }
                _ => {}
            }
        }
    }
    outcome(
        failures.is_empty(),
        if failures.is_empty() {
            "simulate, fit, hotspot and report each byte-identical over 10 runs".to_string()
        } else {
            failures.join("; ")
        },
    )
}

fn main() {
    let dir = tempfile::tempdir().unwrap();
    let s = Duration::from_secs;
    let results = [
        criterion(1, "moment identities", s(30), moment_identities),
        criterion(2, "reduction equivalence", s(1), reduction_equivalence),
        criterion(3, "gradient correctness", s(10), gradient_correctness),
        criterion(4, "closed-form MLE oracles", s(1), closed_form_mles),
        criterion(5, "parameter recovery", s(300), parameter_recovery),
        criterion(6, "G_i* oracle equivalence", s(5), gstar_oracle),
        criterion(7, "planted-cluster detection", s(5), planted_cluster),
        criterion(8, "paper-scale calibration", s(180), || paper_scale(dir.path())),
        criterion(9, "determinism", s(60), || determinism(dir.path())),
    ];
    let passed = results.iter().filter(|&&r| r).count();
    println!("acceptance: {passed}/{} criteria passed", results.len());
    if passed != results.len() {
        std::process::exit(1);
    }
}
