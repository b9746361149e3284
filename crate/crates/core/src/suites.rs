//! Seeded randomized verification suites. Each suite compares a fast path
//! against an oracle or checks a bound over many random instances and
//! reports the seed of the first failing instance.

use ndarray::{Array1, Array2};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::data::LabeledDataset;
use crate::error::Result;
use crate::experiments::{cross_entropy_and_gradient, one_hot, theory_dataset};
use crate::oracles::{
    central_difference_gradient, dense_scan_segment_regions, explicit_loss_hessian, flood_fill_regions,
    jacobi_eigenvalues, relative_error,
};
use crate::predictor::{MlpClassifier, TwoLayerReluNet};
use crate::regions::{count_connected_regions, LabelGrid, SegmentCounter};
use crate::subspace::barycentric_grid;
use crate::theory::{
    gd_step, loss_and_gradient, loss_sharpness, quadratic_loss, train_theory, verify_lemma_region_bound,
    verify_lemma_sharpness_bound, TheoryTrainConfig,
};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SuiteReport {
    pub name: String,
    pub cases: usize,
    pub failures: Vec<String>,
    pub first_failing_seed: Option<u64>,
}

impl SuiteReport {
    fn from_cases(name: &str, outcomes: Vec<(u64, Option<String>)>) -> Self {
        let cases = outcomes.len();
        let failures: Vec<(u64, String)> =
            outcomes.into_iter().filter_map(|(seed, f)| f.map(|msg| (seed, msg))).collect();
        Self {
            name: name.to_string(),
            cases,
            first_failing_seed: failures.first().map(|f| f.0),
            failures: failures.into_iter().map(|(seed, msg)| format!("seed {seed}: {msg}")).collect(),
        }
    }

    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }

    pub fn summary(&self) -> String {
        match self.first_failing_seed {
            None => format!("{}: PASS ({} cases)", self.name, self.cases),
            Some(seed) => format!(
                "{}: FAIL ({} of {} cases, first counterexample seed {seed})",
                self.name,
                self.failures.len(),
                self.cases
            ),
        }
    }
}

fn case_seed(base: u64, i: usize) -> u64 {
    base.wrapping_mul(1_000_003).wrapping_add(i as u64)
}

/// A two-layer net briefly trained with GD on the theory mixture.
/// Learning rate and step count vary with the seed.
pub fn random_trained_instance(seed: u64, n: usize, p: usize) -> Result<(TwoLayerReluNet, LabeledDataset)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let dataset = theory_dataset(n, seed)?;
    let mut net = TwoLayerReluNet::random(p, 2, 0.5, &mut rng)?;
    let eta = [0.01, 0.05, 0.2, 0.5][rng.random_range(0..4)];
    let steps = rng.random_range(0..200);
    for _ in 0..steps {
        net = gd_step(&net, &dataset, eta)?;
    }
    Ok((net, dataset))
}

/// Random label grids for k = 1, 2, 3: BFS counter vs recursive flood fill.
pub fn oracle_regions(grids_per_k: usize, seed: u64) -> SuiteReport {
    let outcomes = [(1usize, 200usize), (2, 30), (3, 15)]
        .into_iter()
        .flat_map(|(k, max_m)| (0..grids_per_k).map(move |i| (k, max_m, case_seed(seed + k as u64, i))))
        .collect::<Vec<_>>()
        .into_par_iter()
        .map(|(k, max_m, s)| {
            let mut rng = ChaCha8Rng::seed_from_u64(s);
            let m = if rng.random_bool(0.5) { max_m } else { rng.random_range(2..=max_m) };
            let classes = rng.random_range(2..=3);
            // skewed label law so both tiny and sprawling regions occur
            let bias: f64 = rng.random_range(0.3..0.95);
            let grid = match barycentric_grid(k, m, 0.0, 1.0) {
                Ok(g) => g,
                Err(e) => return (s, Some(e.to_string())),
            };
            let labels: Vec<usize> = (0..grid.len())
                .map(|_| if rng.random_bool(bias) { 0 } else { rng.random_range(0..classes) })
                .collect();
            let fast = count_connected_regions(&LabelGrid::new(&grid, labels.clone()).expect("lengths match"));
            let oracle = flood_fill_regions(&grid, &labels);
            let failure = (fast != oracle).then(|| format!("k={k} m={m}: bfs {fast} vs flood fill {oracle}"));
            (s, failure)
        })
        .collect();
    SuiteReport::from_cases("oracle-regions", outcomes)
}

/// `R(x_i, x_j) ≤ N(x_i) + N(x_j) + 2` over all pairs of random trained
/// nets (N = 32, p = 32, d = 2). A sample of pairs per net is also
/// recounted by the dense-scan oracle, which must reach at least the grid count.
pub fn lemma_region(nets: usize, m_segment: usize, seed: u64) -> SuiteReport {
    let outcomes = (0..nets)
        .into_par_iter()
        .map(|i| {
            let s = case_seed(seed, i);
            let run = || -> Result<Option<String>> {
                let (net, ds) = random_trained_instance(s, 32, 32)?;
                let report = verify_lemma_region_bound(&net, &ds, m_segment)?;
                if let Some(v) = report.violations.first() {
                    return Ok(Some(format!(
                        "pair ({}, {}) has {} regions > bound {}",
                        v.i, v.j, v.count, v.bound
                    )));
                }
                let counter = SegmentCounter::new(m_segment)?;
                for (a, b) in [(0, 1), (2, 3), (4, 5)] {
                    let grid = counter.count(&net, ds.point(a), ds.point(b))?;
                    let dense = dense_scan_segment_regions(&net, ds.point(a), ds.point(b), 100_000);
                    if dense < grid {
                        return Ok(Some(format!("dense scan {dense} below grid count {grid}")));
                    }
                }
                Ok(None)
            };
            (s, run().unwrap_or_else(|e| Some(e.to_string())))
        })
        .collect();
    SuiteReport::from_cases("lemma-region", outcomes)
}

/// Sharpness lower bound on random trained nets; the first `dense_checks`
/// instances also compare λ_max against a Jacobi eigensolve of the
/// explicitly assembled Hessian (relative 1e−8).
pub fn lemma_sharpness(nets: usize, dense_checks: usize, seed: u64) -> SuiteReport {
    let outcomes = (0..nets)
        .into_par_iter()
        .map(|i| {
            let s = case_seed(seed, i);
            let run = || -> Result<Option<String>> {
                let (net, ds) = random_trained_instance(s, 32, 32)?;
                let rep = verify_lemma_sharpness_bound(&net, &ds)?;
                if !rep.holds {
                    return Ok(Some(format!("λ_max {} < bound {}", rep.lhs, rep.rhs)));
                }
                if i < dense_checks {
                    let dense = jacobi_eigenvalues(&explicit_loss_hessian(&net, &ds))[0];
                    let rel = (rep.lhs - dense).abs() / dense.abs().max(1e-300);
                    if rel > 1e-8 {
                        return Ok(Some(format!("Gram λ_max {} vs dense {} (rel {rel:e})", rep.lhs, dense)));
                    }
                }
                Ok(None)
            };
            (s, run().unwrap_or_else(|e| Some(e.to_string())))
        })
        .collect();
    SuiteReport::from_cases("lemma-sharpness", outcomes)
}

/// Trains small theory runs and requires the averaged region bound at
/// every checkpoint.
pub fn theorem(runs: usize, seed: u64) -> SuiteReport {
    let outcomes = (0..runs)
        .into_par_iter()
        .map(|i| {
            let s = case_seed(seed, i);
            let run = || -> Result<Option<String>> {
                let ds = theory_dataset(32, s)?;
                let eta = [0.01, 0.05, 0.2, 0.5][i % 4];
                let config = TheoryTrainConfig {
                    learning_rate: eta,
                    steps: 200,
                    checkpoint_every: 25,
                    seed: s,
                    init_scale: 0.5,
                    width: 32,
                    sharpness_tol: 1e-10,
                };
                let net = config.init_net(2)?;
                let trace = train_theory(&net, &ds, &config, 201)?;
                Ok(trace.checkpoints.iter().find(|c| !c.bound_holds).map(|c| {
                    format!(
                        "step {}: mean pair regions {} > bound {}",
                        c.step, c.mean_pairwise_region_count, c.theorem_rhs
                    )
                }))
            };
            (s, run().unwrap_or_else(|e| Some(e.to_string())))
        })
        .collect();
    SuiteReport::from_cases("theorem", outcomes)
}

pub const THEORY_GRADIENT_RTOL: f64 = 1e-5;
pub const MLP_GRADIENT_RTOL: f64 = 1e-4;
const FD_STEP: f64 = 1e-6;

/// Analytic gradient vs central differences for the theory net (quadratic
/// loss, rel ≤ 1e−5) at `points` random differentiable points.
pub fn theory_gradient_errors(points: usize, seed: u64) -> Result<Vec<(u64, f64)>> {
    let mut out = Vec::with_capacity(points);
    let mut i = 0;
    while out.len() < points {
        let s = case_seed(seed, i);
        i += 1;
        let mut rng = ChaCha8Rng::seed_from_u64(s);
        let (p, d, n) = (6, 3, 10);
        let net = TwoLayerReluNet::random(p, d, 1.0, &mut rng)?;
        let points = Array2::from_shape_fn((n, d), |_| rng.random_range(-2.0..2.0));
        let labels = (0..n).map(|_| rng.random_range(0..2)).collect();
        let ds = LabeledDataset::new(points, labels, 2)?;
        let pre = ds.points().dot(&net.weights().t());
        if pre.iter().any(|z| z.abs() < 1e-3) {
            continue; // too close to a kink for finite differences
        }
        let (_, grad) = loss_and_gradient(&net, &ds)?;
        let flat: Vec<f64> = net.weights().iter().copied().collect();
        let fd = central_difference_gradient(
            |w| {
                let weights = Array2::from_shape_vec((p, d), w.to_vec()).expect("shape");
                quadratic_loss(&net.with_weights(weights).expect("shape"), &ds).expect("binary")
            },
            &flat,
            FD_STEP,
        );
        out.push((s, relative_error(grad.as_slice().expect("standard layout"), &fd)));
    }
    Ok(out)
}

/// Analytic cross-entropy gradient of an MLP vs central differences.
pub fn mlp_gradient_errors(points: usize, seed: u64) -> Result<Vec<(u64, f64)>> {
    let mut out = Vec::with_capacity(points);
    let mut i = 0;
    while out.len() < points {
        let s = case_seed(seed ^ 0xabcdef, i);
        i += 1;
        let mut rng = ChaCha8Rng::seed_from_u64(s);
        let (d, h, c, n) = (3, 5, 3, 8);
        let mut net = MlpClassifier::random(d, h, c, &mut rng)?;
        net.bias1 = Array1::from_shape_fn(h, |_| rng.random_range(-0.5..0.5));
        net.bias2 = Array1::from_shape_fn(c, |_| rng.random_range(-0.5..0.5));
        let x = Array2::from_shape_fn((n, d), |_| rng.random_range(-2.0..2.0));
        let labels: Vec<usize> = (0..n).map(|_| rng.random_range(0..c)).collect();
        let t = one_hot(&labels, c);
        let pre = x.dot(&net.layer1.t()) + &net.bias1;
        if pre.iter().any(|z| z.abs() < 1e-3) {
            continue;
        }
        let (_, g) = cross_entropy_and_gradient(&net, x.view(), t.view())?;
        let analytic: Vec<f64> =
            g.layer1.iter().chain(g.bias1.iter()).chain(g.layer2.iter()).chain(g.bias2.iter()).copied().collect();
        let params: Vec<f64> =
            net.layer1.iter().chain(net.bias1.iter()).chain(net.layer2.iter()).chain(net.bias2.iter()).copied().collect();
        let rebuild = |v: &[f64]| -> MlpClassifier {
            let mut m = net.clone();
            let (a, rest) = v.split_at(h * d);
            let (b, rest) = rest.split_at(h);
            let (w2, b2) = rest.split_at(c * h);
            m.layer1 = Array2::from_shape_vec((h, d), a.to_vec()).expect("shape");
            m.bias1 = Array1::from(b.to_vec());
            m.layer2 = Array2::from_shape_vec((c, h), w2.to_vec()).expect("shape");
            m.bias2 = Array1::from(b2.to_vec());
            m
        };
        let fd = central_difference_gradient(
            |v| cross_entropy_and_gradient(&rebuild(v), x.view(), t.view()).expect("shapes").0,
            &params,
            FD_STEP,
        );
        out.push((s, relative_error(&analytic, &fd)));
    }
    Ok(out)
}

pub fn gradients(points: usize, seed: u64) -> SuiteReport {
    let mut outcomes = Vec::new();
    match theory_gradient_errors(points, seed) {
        Ok(errs) => outcomes.extend(errs.into_iter().map(|(s, e)| {
            (s, (e > THEORY_GRADIENT_RTOL).then(|| format!("theory gradient rel error {e:e}")))
        })),
        Err(e) => outcomes.push((seed, Some(e.to_string()))),
    }
    match mlp_gradient_errors(points, seed) {
        Ok(errs) => outcomes
            .extend(errs.into_iter().map(|(s, e)| (s, (e > MLP_GRADIENT_RTOL).then(|| format!("mlp gradient rel error {e:e}"))))),
        Err(e) => outcomes.push((seed, Some(e.to_string()))),
    }
    SuiteReport::from_cases("gradients", outcomes)
}

/// Gram-route sharpness vs explicit Hessian on small instances (p·d ≤ 100).
pub fn sharpness_routes_agree(instances: usize, seed: u64) -> SuiteReport {
    let outcomes = (0..instances)
        .map(|i| {
            let s = case_seed(seed, i);
            let run = || -> Result<Option<String>> {
                let mut rng = ChaCha8Rng::seed_from_u64(s);
                let (p, d, n) = (8, 3, 6);
                let net = TwoLayerReluNet::random(p, d, 1.0, &mut rng)?;
                let points = Array2::from_shape_fn((n, d), |_| rng.random_range(-2.0..2.0));
                let ds = LabeledDataset::new(points, (0..n).map(|k| k % 2).collect(), 2)?;
                let gram = loss_sharpness(&net, &ds, 1e-12)?;
                let dense = jacobi_eigenvalues(&explicit_loss_hessian(&net, &ds))[0];
                let rel = (gram - dense).abs() / dense.abs().max(1e-300);
                Ok((rel > 1e-8).then(|| format!("gram {gram} vs dense {dense}")))
            };
            (s, run().unwrap_or_else(|e| Some(e.to_string())))
        })
        .collect();
    SuiteReport::from_cases("sharpness-routes", outcomes)
}
