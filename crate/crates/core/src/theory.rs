//! Two-layer ReLU theory: full-batch gradient descent on the quadratic loss,
//! exact loss sharpness, and checks of the active-neuron region and
//! sharpness bounds along training.
//!
//! For `f(x) = Σ a_i σ(w_iᵀx)` the per-sample loss Hessian is `u uᵀ` where
//! `u` stacks `v_i = a_i σ'(w_iᵀx) x`; second derivatives of σ vanish away
//! from the kinks. The loss Hessian `(1/N) Σ_k u_k u_kᵀ` shares its nonzero
//! spectrum with the N×N Gram matrix `G_kl = (1/N)(x_kᵀx_l)|A_k ∩ A_l|`,
//! which is what [`loss_sharpness`] iterates on.

use ndarray::{Array1, Array2, ArrayView1};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::data::LabeledDataset;
use crate::error::{Error, Result};
use crate::predictor::{relu, TwoLayerReluNet};
use crate::regions::SegmentCounter;

pub const DEFAULT_SHARPNESS_TOL: f64 = 1e-10;
pub const MAX_POWER_ITERATIONS: usize = 10_000;
pub const DIVERGENCE_LOSS: f64 = 1e6;

fn check_dataset(net: &TwoLayerReluNet, dataset: &LabeledDataset) -> Result<Vec<f64>> {
    if net.dim() != dataset.dim() {
        return Err(Error::DimensionMismatch { expected: net.dim(), got: dataset.dim() });
    }
    dataset.signed_targets()
}

/// `(1/N) Σ ½ (y_i − f(x_i))²` with targets in {−1, +1}.
pub fn quadratic_loss(net: &TwoLayerReluNet, dataset: &LabeledDataset) -> Result<f64> {
    let targets = check_dataset(net, dataset)?;
    let total: f64 = dataset
        .points()
        .rows()
        .into_iter()
        .zip(&targets)
        .map(|(x, &y)| 0.5 * (y - net.forward_unchecked(x)).powi(2))
        .sum();
    Ok(total / dataset.len() as f64)
}

/// Loss and its gradient with respect to the first layer (p×d), using σ'(0) = 0.
pub fn loss_and_gradient(net: &TwoLayerReluNet, dataset: &LabeledDataset) -> Result<(f64, Array2<f64>)> {
    let targets = check_dataset(net, dataset)?;
    let n = dataset.len() as f64;
    let pre = dataset.points().dot(&net.weights().t()); // N×p
    let signs = net.signs();
    let mut grad = Array2::<f64>::zeros((net.width(), net.dim()));
    let mut loss = 0.0;
    for (k, row) in pre.rows().into_iter().enumerate() {
        let f: f64 = row.iter().zip(signs.iter()).map(|(&z, &a)| a * relu(z)).sum();
        let residual = f - targets[k];
        loss += 0.5 * residual * residual;
        let x = dataset.point(k);
        for (i, &z) in row.iter().enumerate() {
            if z > 0.0 {
                let scale = residual * signs[i] / n;
                grad.row_mut(i).scaled_add(scale, &x);
            }
        }
    }
    Ok((loss / n, grad))
}

/// One full-batch gradient descent step on the first layer.
pub fn gd_step(net: &TwoLayerReluNet, dataset: &LabeledDataset, learning_rate: f64) -> Result<TwoLayerReluNet> {
    let (_, grad) = loss_and_gradient(net, dataset)?;
    net.with_weights(&net.weights() - &(grad * learning_rate))
}

/// `#{i : w_iᵀx > 0}`.
pub fn active_neuron_count(net: &TwoLayerReluNet, x: ArrayView1<'_, f64>) -> usize {
    net.weights().rows().into_iter().filter(|w| w.dot(&x) > 0.0).count()
}

/// Top eigenvalue of the per-sample Hessian: `‖x‖² · #active`.
pub fn per_sample_sharpness(net: &TwoLayerReluNet, x: ArrayView1<'_, f64>) -> f64 {
    active_neuron_count(net, x) as f64 * x.dot(&x)
}

/// Activation pattern per sample, failing if any pre-activation is exactly zero.
pub fn activation_patterns(net: &TwoLayerReluNet, dataset: &LabeledDataset) -> Result<Vec<Vec<bool>>> {
    if net.dim() != dataset.dim() {
        return Err(Error::DimensionMismatch { expected: net.dim(), got: dataset.dim() });
    }
    let pre = dataset.points().dot(&net.weights().t());
    let mut patterns = Vec::with_capacity(dataset.len());
    for (k, row) in pre.rows().into_iter().enumerate() {
        if let Some(i) = row.iter().position(|&z| z == 0.0) {
            return Err(Error::BifurcationZone { neuron: i, sample: k });
        }
        patterns.push(row.iter().map(|&z| z > 0.0).collect());
    }
    Ok(patterns)
}

/// `G_kl = (1/N)(x_kᵀx_l)|A_k ∩ A_l|`.
pub fn sharpness_gram(net: &TwoLayerReluNet, dataset: &LabeledDataset) -> Result<Array2<f64>> {
    let patterns = activation_patterns(net, dataset)?;
    let words = net.width().div_ceil(64);
    let bits: Vec<Vec<u64>> = patterns
        .iter()
        .map(|p| {
            let mut w = vec![0u64; words];
            for (i, &on) in p.iter().enumerate() {
                if on {
                    w[i / 64] |= 1 << (i % 64);
                }
            }
            w
        })
        .collect();
    let n = dataset.len();
    let inner = dataset.points().dot(&dataset.points().t());
    let mut gram = Array2::zeros((n, n));
    for k in 0..n {
        for l in 0..=k {
            let shared: u32 = bits[k].iter().zip(&bits[l]).map(|(a, b)| (a & b).count_ones()).sum();
            let v = inner[[k, l]] * shared as f64 / n as f64;
            gram[[k, l]] = v;
            gram[[l, k]] = v;
        }
    }
    Ok(gram)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PowerIteration {
    pub value: f64,
    pub iterations: usize,
    pub converged: bool,
}

/// Power iteration on a symmetric PSD matrix; stops once successive Rayleigh
/// quotients agree to relative `tol`.
pub fn top_eigenvalue_psd(matrix: &Array2<f64>, tol: f64, max_iter: usize) -> PowerIteration {
    let n = matrix.nrows();
    if n == 0 {
        return PowerIteration { value: 0.0, iterations: 0, converged: true };
    }
    // Fixed start vector with no special alignment to any eigenvector.
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let mut v = Array1::from_shape_fn(n, |_| 1.0 + 0.5 * rng.random::<f64>());
    v /= v.dot(&v).sqrt();
    let mut previous = f64::NAN;
    for it in 1..=max_iter {
        let w = matrix.dot(&v);
        let lambda = v.dot(&w);
        let norm = w.dot(&w).sqrt();
        if norm == 0.0 {
            return PowerIteration { value: 0.0, iterations: it, converged: true };
        }
        if (lambda - previous).abs() <= tol * lambda.abs() {
            return PowerIteration { value: lambda, iterations: it, converged: true };
        }
        previous = lambda;
        v = w / norm;
    }
    PowerIteration { value: previous, iterations: max_iter, converged: false }
}

/// λ_max of the loss Hessian, with convergence details.
pub fn loss_sharpness_detailed(net: &TwoLayerReluNet, dataset: &LabeledDataset, tol: f64) -> Result<PowerIteration> {
    check_dataset(net, dataset)?;
    let gram = sharpness_gram(net, dataset)?;
    Ok(top_eigenvalue_psd(&gram, tol, MAX_POWER_ITERATIONS))
}

/// λ_max of the loss Hessian.
pub fn loss_sharpness(net: &TwoLayerReluNet, dataset: &LabeledDataset, tol: f64) -> Result<f64> {
    Ok(loss_sharpness_detailed(net, dataset, tol)?.value)
}

/// Exact mean of the segment region count over all N² ordered pairs.
pub fn mean_pairwise_region_count(net: &TwoLayerReluNet, dataset: &LabeledDataset, m: usize) -> Result<f64> {
    let counter = SegmentCounter::new(m)?;
    let n = dataset.len();
    let total: usize = (0..n * n)
        .into_par_iter()
        .map(|idx| counter.count(net, dataset.point(idx / n), dataset.point(idx % n)))
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .sum();
    Ok(total as f64 / (n * n) as f64)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TheoryTrainConfig {
    pub learning_rate: f64,
    pub steps: usize,
    pub checkpoint_every: usize,
    pub seed: u64,
    pub init_scale: f64,
    pub width: usize,
    pub sharpness_tol: f64,
}

impl TheoryTrainConfig {
    pub fn new(learning_rate: f64, steps: usize) -> Self {
        Self {
            learning_rate,
            steps,
            checkpoint_every: steps.max(1),
            seed: 0,
            init_scale: 0.5,
            width: 64,
            sharpness_tol: DEFAULT_SHARPNESS_TOL,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.learning_rate > 0.0) || !self.learning_rate.is_finite() {
            return Err(Error::InvalidArgument(format!("learning rate must be positive, got {}", self.learning_rate)));
        }
        if self.checkpoint_every == 0 {
            return Err(Error::InvalidArgument("checkpoint_every must be ≥ 1".into()));
        }
        if self.width == 0 {
            return Err(Error::InvalidArgument("width must be ≥ 1".into()));
        }
        Ok(())
    }

    /// Fresh network from `seed`, `width` and `init_scale`.
    pub fn init_net(&self, d: usize) -> Result<TwoLayerReluNet> {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        TwoLayerReluNet::random(self.width, d, self.init_scale, &mut rng)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TheoryCheckpoint {
    pub step: usize,
    pub loss: f64,
    pub lambda_max: f64,
    pub sharpness_converged: bool,
    pub active_counts: Vec<usize>,
    pub mean_active: f64,
    pub mean_pairwise_region_count: f64,
    pub theorem_rhs: f64,
    pub eos_product: f64,
    pub bound_holds: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainTrace {
    pub learning_rate: f64,
    pub min_norm: f64,
    pub checkpoints: Vec<TheoryCheckpoint>,
    pub diverged: bool,
    /// First checkpoint step with η·λ_max ≥ 1 (a reporting convention).
    pub eos_onset_step: Option<usize>,
    pub final_net: TwoLayerReluNet,
}

impl TrainTrace {
    pub fn all_bounds_hold(&self) -> bool {
        self.checkpoints.iter().all(|c| c.bound_holds)
    }

    pub fn last(&self) -> &TheoryCheckpoint {
        self.checkpoints.last().expect("trace always holds the initial checkpoint")
    }

    pub const CSV_HEADER: &'static str =
        "step,loss,lambda_max,eos_product,mean_active,mean_pair_regions,theorem_rhs,bound_holds";

    pub fn write_csv<W: std::io::Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "{}", Self::CSV_HEADER)?;
        for c in &self.checkpoints {
            writeln!(
                out,
                "{},{:?},{:?},{:?},{:?},{:?},{:?},{}",
                c.step,
                c.loss,
                c.lambda_max,
                c.eos_product,
                c.mean_active,
                c.mean_pairwise_region_count,
                c.theorem_rhs,
                c.bound_holds
            )?;
        }
        Ok(())
    }
}

/// Measures the bound chain at the current weights.
pub fn theory_checkpoint(
    step: usize,
    net: &TwoLayerReluNet,
    dataset: &LabeledDataset,
    learning_rate: f64,
    m_segment: usize,
    tol: f64,
) -> Result<TheoryCheckpoint> {
    let r = dataset.min_norm();
    if r == 0.0 {
        return Err(Error::ZeroMinNorm);
    }
    let loss = quadratic_loss(net, dataset)?;
    let sharpness = loss_sharpness_detailed(net, dataset, tol)?;
    let active_counts: Vec<usize> = dataset.points().rows().into_iter().map(|x| active_neuron_count(net, x)).collect();
    let n = dataset.len() as f64;
    let mean_active = active_counts.iter().sum::<usize>() as f64 / n;
    let mean_regions = mean_pairwise_region_count(net, dataset, m_segment)?;
    let theorem_rhs = 2.0 * n / (r * r) * sharpness.value + 2.0;
    Ok(TheoryCheckpoint {
        step,
        loss,
        lambda_max: sharpness.value,
        sharpness_converged: sharpness.converged,
        active_counts,
        mean_active,
        mean_pairwise_region_count: mean_regions,
        theorem_rhs,
        eos_product: learning_rate * sharpness.value,
        bound_holds: mean_regions <= theorem_rhs,
    })
}

/// Full-batch GD from `net`, checkpointing at step 0, every
/// `checkpoint_every` steps, and the final step. A loss above 10⁶ (or a
/// non-finite loss) stops training and marks the trace diverged.
pub fn train_theory(
    net: &TwoLayerReluNet,
    dataset: &LabeledDataset,
    config: &TheoryTrainConfig,
    m_segment: usize,
) -> Result<TrainTrace> {
    config.validate()?;
    check_dataset(net, dataset)?;
    let r = dataset.min_norm();
    if r == 0.0 {
        return Err(Error::ZeroMinNorm);
    }
    let eta = config.learning_rate;
    let tol = config.sharpness_tol;
    let mut current = net.clone();
    let mut checkpoints = vec![theory_checkpoint(0, &current, dataset, eta, m_segment, tol)?];
    let mut diverged = false;
    for step in 1..=config.steps {
        let (loss, grad) = loss_and_gradient(&current, dataset)?;
        if !loss.is_finite() || loss > DIVERGENCE_LOSS {
            diverged = true;
            break;
        }
        let next = current.with_weights(&current.weights() - &(grad * eta))?;
        if next.weights().iter().any(|v| !v.is_finite()) {
            diverged = true;
            break;
        }
        current = next;
        if step % config.checkpoint_every == 0 || step == config.steps {
            let cp = theory_checkpoint(step, &current, dataset, eta, m_segment, tol)?;
            if !cp.loss.is_finite() || cp.loss > DIVERGENCE_LOSS {
                diverged = true;
                break;
            }
            checkpoints.push(cp);
        }
    }
    let eos_onset_step = checkpoints.iter().find(|c| c.eos_product >= 1.0).map(|c| c.step);
    Ok(TrainTrace { learning_rate: eta, min_norm: r, checkpoints, diverged, eos_onset_step, final_net: current })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RegionBoundViolation {
    pub i: usize,
    pub j: usize,
    pub count: usize,
    pub bound: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegionBoundReport {
    pub pairs: usize,
    pub violations: Vec<RegionBoundViolation>,
    /// Smallest `bound − count` over all pairs (negative iff violated).
    pub min_slack: i64,
    /// Largest `bound − count` over all pairs.
    pub max_slack: i64,
}

impl RegionBoundReport {
    pub fn holds(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Checks `R(x_i, x_j) ≤ N(x_i) + N(x_j) + 2` over all ordered pairs.
pub fn verify_lemma_region_bound(
    net: &TwoLayerReluNet,
    dataset: &LabeledDataset,
    m_segment: usize,
) -> Result<RegionBoundReport> {
    if net.dim() != dataset.dim() {
        return Err(Error::DimensionMismatch { expected: net.dim(), got: dataset.dim() });
    }
    let counter = SegmentCounter::new(m_segment)?;
    let active: Vec<usize> = dataset.points().rows().into_iter().map(|x| active_neuron_count(net, x)).collect();
    let n = dataset.len();
    let results: Vec<(usize, usize, usize, usize)> = (0..n * n)
        .into_par_iter()
        .map(|idx| {
            let (i, j) = (idx / n, idx % n);
            let count = counter.count(net, dataset.point(i), dataset.point(j))?;
            Ok((i, j, count, active[i] + active[j] + 2))
        })
        .collect::<Result<_>>()?;
    let slack = |&(_, _, c, b): &(usize, usize, usize, usize)| b as i64 - c as i64;
    Ok(RegionBoundReport {
        pairs: results.len(),
        violations: results
            .iter()
            .filter(|&&(_, _, c, b)| c > b)
            .map(|&(i, j, count, bound)| RegionBoundViolation { i, j, count, bound })
            .collect(),
        min_slack: results.iter().map(slack).min().unwrap_or(0),
        max_slack: results.iter().map(slack).max().unwrap_or(0),
    })
}

/// Relative tolerance for the sharpness lower bound.
pub const SHARPNESS_BOUND_RTOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SharpnessBoundReport {
    pub lhs: f64,
    pub rhs: f64,
    pub holds: bool,
}

/// Checks `λ_max(∇²L) ≥ (r²/N²) Σ_i N(x_i)`.
pub fn verify_lemma_sharpness_bound(net: &TwoLayerReluNet, dataset: &LabeledDataset) -> Result<SharpnessBoundReport> {
    let lhs = loss_sharpness(net, dataset, DEFAULT_SHARPNESS_TOL)?;
    let r = dataset.min_norm();
    let n = dataset.len() as f64;
    let active: usize = dataset.points().rows().into_iter().map(|x| active_neuron_count(net, x)).sum();
    let rhs = r * r / (n * n) * active as f64;
    Ok(SharpnessBoundReport { lhs, rhs, holds: lhs >= rhs * (1.0 - SHARPNESS_BOUND_RTOL) })
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::{array, Axis};

    fn net(rows: Array2<f64>, signs: Vec<f64>) -> TwoLayerReluNet {
        TwoLayerReluNet::new(rows, Array1::from(signs)).unwrap()
    }

    fn data(points: Array2<f64>, labels: Vec<usize>) -> LabeledDataset {
        LabeledDataset::new(points, labels, 2).unwrap()
    }

    #[test]
    fn zero_net_loss_is_half() {
        let ds = data(array![[1.0, 0.0], [0.0, 2.0]], vec![1, 1]);
        let z = net(Array2::zeros((2, 2)), vec![1.0, -1.0]);
        assert_eq!(quadratic_loss(&z, &ds).unwrap(), 0.5);
    }

    #[test]
    fn interpolating_net_has_zero_loss_and_is_fixed_by_gd() {
        let ds = data(array![[1.0, 0.0], [-1.0, 0.0]], vec![1, 0]);
        let n = net(array![[1.0, 0.0], [-1.0, 0.0]], vec![1.0, -1.0]);
        assert_eq!(quadratic_loss(&n, &ds).unwrap(), 0.0);
        assert_eq!(gd_step(&n, &ds, 0.3).unwrap(), n);
    }

    #[test]
    fn hand_computed_gd_step() {
        let ds = data(array![[1.0, 0.0]], vec![1]);
        let n = net(array![[0.5, 0.0]], vec![1.0]);
        let next = gd_step(&n, &ds, 0.1).unwrap();
        assert!((next.weights()[[0, 0]] - 0.55).abs() < 1e-15);
        assert_eq!(next.weights()[[0, 1]], 0.0);
        assert_eq!(next.signs(), n.signs());
        assert_eq!(next.init_weights(), n.init_weights());
    }

    #[test]
    fn multiclass_rejected() {
        let ds = LabeledDataset::new(array![[1.0], [2.0]], vec![0, 2], 3).unwrap();
        let n = net(array![[1.0]], vec![1.0]);
        assert!(matches!(quadratic_loss(&n, &ds), Err(Error::NotBinary { .. })));
    }

    #[test]
    fn active_counts() {
        let n = net(array![[1.0, 0.0], [-1.0, 0.0]], vec![1.0, 1.0]);
        assert_eq!(active_neuron_count(&n, array![1.0, 1.0].view()), 1);
        let orth = net(array![[1.0, -1.0], [2.0, -2.0]], vec![1.0, 1.0]);
        assert_eq!(active_neuron_count(&orth, array![1.0, 1.0].view()), 0);
    }

    #[test]
    fn per_sample_sharpness_examples() {
        let n = net(array![[-1.0, 0.0], [1.0, 0.0]], vec![1.0, -1.0]);
        assert_eq!(per_sample_sharpness(&n, array![-0.0, 1.0].view()), 0.0);
        assert_eq!(per_sample_sharpness(&n, array![1.0, 2.0].view()), 5.0);
    }

    #[test]
    fn single_sample_and_replicated_sharpness() {
        let n = net(array![[0.3, 0.2], [-0.5, 0.1], [0.7, -0.4]], vec![1.0, -1.0, 1.0]);
        let x = array![1.5, -0.25];
        let single = data(x.clone().insert_axis(Axis(0)), vec![0]);
        let expected = per_sample_sharpness(&n, x.view());
        let got = loss_sharpness(&n, &single, 1e-12).unwrap();
        assert!((got - expected).abs() <= 1e-12 * expected);
        let copies = data(Array2::from_shape_fn((5, 2), |(_, j)| x[j]), vec![1; 5]);
        let got = loss_sharpness(&n, &copies, 1e-12).unwrap();
        assert!((got - expected).abs() <= 1e-10 * expected);
    }

    #[test]
    fn bifurcation_zone_is_an_error() {
        let ds = data(array![[1.0, 1.0]], vec![1]);
        let n = net(array![[1.0, -1.0]], vec![1.0]);
        assert!(matches!(loss_sharpness(&n, &ds, 1e-10), Err(Error::BifurcationZone { neuron: 0, sample: 0 })));
    }

    #[test]
    fn no_active_neurons_satisfies_both_bounds_trivially() {
        let ds = data(array![[1.0, 0.5], [2.0, 1.0]], vec![1, 0]);
        let n = net(array![[-1.0, 0.0], [0.0, -1.0]], vec![1.0, -1.0]);
        let rep = verify_lemma_sharpness_bound(&n, &ds).unwrap();
        assert_eq!((rep.lhs, rep.rhs, rep.holds), (0.0, 0.0, true));
        let region = verify_lemma_region_bound(&n, &ds, 11).unwrap();
        assert!(region.holds());
        assert_eq!(region.min_slack, 1);
    }

    #[test]
    fn single_minimal_norm_sample_is_the_equality_case() {
        let ds = data(array![[0.6, 0.8]], vec![1]);
        let n = net(array![[1.0, 0.0], [0.0, 1.0], [-1.0, 0.0]], vec![1.0, -1.0, 1.0]);
        let rep = verify_lemma_sharpness_bound(&n, &ds).unwrap();
        assert!(rep.holds);
        assert!((rep.lhs - rep.rhs).abs() <= 1e-12);
    }

    #[test]
    fn zero_norm_rejected_by_training() {
        let ds = data(array![[0.0, 0.0], [1.0, 0.0]], vec![1, 0]);
        let n = net(array![[1.0, 0.5]], vec![1.0]);
        let cfg = TheoryTrainConfig::new(0.1, 3);
        assert!(matches!(train_theory(&n, &ds, &cfg, 11), Err(Error::ZeroMinNorm)));
    }

    #[test]
    fn zero_loss_start_gives_identical_checkpoints() {
        let ds = data(array![[1.0, 0.2], [-1.0, 0.3]], vec![1, 0]);
        // f(x1) = 1, f(x2) = −1 exactly.
        let n = net(array![[1.0, 0.0], [-1.0, 0.0]], vec![1.0, -1.0]);
        let mut cfg = TheoryTrainConfig::new(0.05, 6);
        cfg.checkpoint_every = 2;
        let trace = train_theory(&n, &ds, &cfg, 51).unwrap();
        assert_eq!(trace.checkpoints.len(), 4);
        let first = &trace.checkpoints[0];
        for c in &trace.checkpoints {
            assert_eq!(c.loss, 0.0);
            assert_eq!(c.lambda_max, first.lambda_max);
            assert_eq!(c.mean_pairwise_region_count, first.mean_pairwise_region_count);
            assert!(c.bound_holds);
        }
    }

    #[test]
    fn zero_steps_gives_single_checkpoint() {
        let ds = data(array![[1.0, 0.2], [-1.0, 0.3]], vec![1, 0]);
        let n = net(array![[1.0, 0.1]], vec![1.0]);
        let trace = train_theory(&n, &ds, &TheoryTrainConfig::new(0.1, 0), 11).unwrap();
        assert_eq!(trace.checkpoints.len(), 1);
        assert_eq!(trace.checkpoints[0].step, 0);
    }

    #[test]
    fn power_iteration_on_diagonal() {
        let m = Array2::from_diag(&array![1.0, 4.0, 2.0]);
        let it = top_eigenvalue_psd(&m, 1e-13, 10_000);
        assert!(it.converged);
        assert!((it.value - 4.0).abs() < 1e-10);
    }
}
