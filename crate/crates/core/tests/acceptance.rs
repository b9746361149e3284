//! End-to-end acceptance run. Prints one PASS/FAIL line per criterion and
//! exits nonzero if any criterion fails.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use regioncount::experiments::{
    correlate_sweep, make_synthetic_dataset, run_sweep, theory_dataset, train_mlp_sgd, SgdConfig, SweepConfig,
    SweepField, SweepRecord,
};
use regioncount::metrics::{mlp_distance_from_init, spearman_correlation};
use regioncount::predictor::MlpClassifier;
use regioncount::regions::{per_simplex_counts, region_count_estimate, EstimateConfig};
use regioncount::subspace::barycentric_grid;
use regioncount::suites;
use regioncount::theory::{train_theory, TheoryTrainConfig};

const SEED: u64 = 20240611;

struct Outcome {
    passed: bool,
    detail: String,
}

fn outcome(passed: bool, detail: String) -> Outcome {
    Outcome { passed, detail }
}

fn run(id: usize, name: &str, budget: Duration, f: impl FnOnce() -> Outcome) -> bool {
    let start = Instant::now();
    let out = f();
    let elapsed = start.elapsed();
    let in_time = elapsed <= budget;
    let passed = out.passed && in_time;
    let timing = if in_time {
        format!("{:.1}s", elapsed.as_secs_f64())
    } else {
        format!("{:.1}s, over the {}s budget", elapsed.as_secs_f64(), budget.as_secs())
    };
    println!(
        "criterion {id:>2} [{}] {name}: {} ({timing})",
        if passed { "PASS" } else { "FAIL" },
        out.detail
    );
    passed
}

fn suite_outcome(report: suites::SuiteReport) -> Outcome {
    let detail = report.summary();
    outcome(report.passed(), detail)
}

/// Small MLPs trained on the default sweep dataset.
fn trained_mlps(count: usize, epochs: usize) -> (Vec<MlpClassifier>, regioncount::LabeledDataset) {
    let config = SweepConfig::default();
    let (train, _) = make_synthetic_dataset(&config.dataset).expect("default dataset");
    let nets = (0..count as u64)
        .into_par_iter()
        .map(|seed| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let init = MlpClassifier::random(2, config.mlp.hidden, 2, &mut rng).expect("valid dims");
            let lr = [0.02, 0.08, 0.32][seed as usize % 3];
            train_mlp_sgd(&init, &train, &SgdConfig::new(lr, 32, epochs, seed)).expect("training").model
        })
        .collect();
    (nets, train)
}

fn plateau() -> Outcome {
    let (nets, train) = trained_mlps(3, 200);
    let mut worst: f64 = 0.0;
    for net in &nets {
        for (k, coarse, fine) in [(1, 200, 500), (2, 30, 50)] {
            let base = EstimateConfig::new(k, 100, SEED);
            let a = region_count_estimate(net, &train, &base.clone().with_resolution(coarse)).expect("estimate");
            let b = region_count_estimate(net, &train, &base.with_resolution(fine)).expect("estimate");
            worst = worst.max((a.mean - b.mean).abs() / b.mean);
        }
    }
    outcome(worst <= 0.02, format!("max relative shift {worst:.4} (limit 0.02)"))
}

fn eta_trend() -> Outcome {
    let etas = [0.005, 0.02, 0.08, 0.32];
    let runs: Vec<(f64, f64, bool)> = etas
        .iter()
        .flat_map(|&eta| (0..5u64).map(move |seed| (eta, seed)))
        .collect::<Vec<_>>()
        .into_par_iter()
        .map(|(eta, seed)| {
            let ds = theory_dataset(64, seed).expect("dataset");
            let mut config = TheoryTrainConfig::new(eta, 2000);
            config.seed = seed;
            config.width = 64;
            config.checkpoint_every = 200;
            let net = config.init_net(2).expect("init");
            let trace = train_theory(&net, &ds, &config, 201).expect("training");
            (eta, trace.last().mean_pairwise_region_count, trace.all_bounds_hold())
        })
        .collect();
    let xs: Vec<f64> = runs.iter().map(|r| r.0).collect();
    let ys: Vec<f64> = runs.iter().map(|r| r.1).collect();
    let rho = spearman_correlation(&xs, &ys).expect("variance");
    let bounds = runs.iter().all(|r| r.2);
    let means: Vec<String> = etas
        .iter()
        .map(|&e| {
            let v: Vec<f64> = runs.iter().filter(|r| r.0 == e).map(|r| r.1).collect();
            format!("{:.3}", v.iter().sum::<f64>() / v.len() as f64)
        })
        .collect();
    outcome(
        rho <= -0.7 && bounds,
        format!("spearman(eta, regions) = {rho:.3} (limit -0.7), mean regions per eta [{}]", means.join(", ")),
    )
}

fn seed_mean(records: &[SweepRecord], keep: impl Fn(&SweepRecord) -> bool) -> f64 {
    let v: Vec<f64> =
        records.iter().filter(|r| !r.diverged && keep(r)).map(|r| r.region_count_mean).collect();
    v.iter().sum::<f64>() / v.len() as f64
}

fn batch_trend(records: &[SweepRecord]) -> Outcome {
    let lr = 0.02;
    let batches = [8usize, 32, 128];
    let means: Vec<f64> = batches.iter().map(|&b| seed_mean(records, |r| r.lr == lr && r.batch == b && r.wd == 0.0)).collect();
    let xs: Vec<f64> = batches.iter().map(|&b| b as f64).collect();
    let rho = spearman_correlation(&xs, &means).unwrap_or(f64::NAN);
    outcome(
        rho >= 0.7,
        format!(
            "spearman(batch, regions) = {rho:.3} at lr {lr} (limit 0.7), seed means [{}]",
            means.iter().map(|m| format!("{m:.3}")).collect::<Vec<_>>().join(", ")
        ),
    )
}

fn correlation(records: &[SweepRecord]) -> Outcome {
    let r = |x| correlate_sweep(records, x, SweepField::Gap).map(|c| c.pearson).unwrap_or(f64::NAN);
    let regions = r(SweepField::RegionMean);
    let frob = r(SweepField::FrobDist);
    let margin = r(SweepField::Margin);
    let used = records.iter().filter(|r| !r.diverged).count();
    outcome(
        regions >= 0.6 && regions > frob.abs() && regions > margin.abs(),
        format!(
            "pearson(regions, gap) = {regions:.3} (limit 0.6), |frob| {:.3}, |margin| {:.3}, {used} cells",
            frob.abs(),
            margin.abs()
        ),
    )
}

fn reparameterization() -> Outcome {
    let (nets, train) = trained_mlps(20, 10);
    let config = EstimateConfig::new(1, 100, SEED);
    let grid = barycentric_grid(1, 200, 0.0, 1.0).expect("grid");
    let mut identical = true;
    let mut min_change = f64::INFINITY;
    for net in &nets {
        let base = per_simplex_counts(net, &train, &config, &grid).expect("counts");
        let d0 = mlp_distance_from_init(net);
        for c in [0.5, 2.0, 10.0] {
            let scaled = net.scale_layers(c).expect("positive c");
            identical &= per_simplex_counts(&scaled, &train, &config, &grid).expect("counts") == base;
            min_change = min_change.min((mlp_distance_from_init(&scaled) - d0).abs() / d0);
        }
    }
    outcome(
        identical && min_change >= 0.01,
        format!("per-simplex counts identical: {identical}, min relative distance change {min_change:.3} (limit 0.01)"),
    )
}

fn sanity() -> Outcome {
    let grads = suites::gradients(20, SEED);
    let (nets, train) = trained_mlps(1, 50);
    let small = region_count_estimate(&nets[0], &train, &EstimateConfig::new(1, 100, SEED)).expect("estimate");
    let large = region_count_estimate(&nets[0], &train, &EstimateConfig::new(1, 300, SEED + 1)).expect("estimate");
    let combined = (small.std_error.powi(2) + large.std_error.powi(2)).sqrt();
    let diff = (small.mean - large.mean).abs();
    outcome(
        grads.passed() && diff <= 3.0 * combined,
        format!(
            "{}; estimates {:.3} (100) vs {:.3} (300), |diff| {diff:.3} within {:.3}",
            grads.summary(),
            small.mean,
            large.mean,
            3.0 * combined
        ),
    )
}

fn main() -> ExitCode {
    let secs = Duration::from_secs;
    let mut results = Vec::new();
    results.push(run(1, "region counter matches flood fill", secs(10), || {
        suite_outcome(suites::oracle_regions(1000, SEED))
    }));
    results.push(run(2, "grid resolution plateau", secs(120), plateau));
    results.push(run(3, "region count bounded by active neurons", secs(300), || {
        suite_outcome(suites::lemma_region(200, 1001, SEED))
    }));
    results.push(run(4, "sharpness bounded below by active neurons", secs(120), || {
        suite_outcome(suites::lemma_sharpness(200, 10, SEED))
    }));
    results.push(run(5, "average region count bound during training", secs(300), || {
        suite_outcome(suites::theorem(20, SEED))
    }));
    results.push(run(6, "larger learning rate gives fewer regions", secs(600), eta_trend));

    let start = Instant::now();
    let records = run_sweep(&SweepConfig::default()).expect("default sweep");
    let sweep_time = start.elapsed();
    println!("default sweep: {} cells in {:.1}s", records.len(), sweep_time.as_secs_f64());
    results.push(run(7, "smaller batch gives fewer regions", secs(900).saturating_sub(sweep_time), || {
        batch_trend(&records)
    }));
    results.push(run(8, "region count tracks generalization gap", secs(2700).saturating_sub(sweep_time), || {
        correlation(&records)
    }));
    results.push(run(9, "region count is invariant to layer rescaling", secs(60), reparameterization));
    results.push(run(10, "gradient and estimator sanity", secs(300), sanity));

    let failed = results.iter().filter(|&&p| !p).count();
    println!("acceptance: {} of {} criteria passed", results.len() - failed, results.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
