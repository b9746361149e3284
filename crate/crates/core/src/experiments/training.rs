use ndarray::{Array1, Array2, ArrayView2, Axis};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Beta, Distribution};
use serde::{Deserialize, Serialize};

use crate::data::LabeledDataset;
use crate::error::{Error, Result};
use crate::metrics::accuracy;
use crate::predictor::{relu, MlpClassifier};
use crate::theory::DIVERGENCE_LOSS;

/// One-hot rows for `labels` over `classes` columns.
pub fn one_hot(labels: &[usize], classes: usize) -> Array2<f64> {
    let mut out = Array2::zeros((labels.len(), classes));
    for (i, &l) in labels.iter().enumerate() {
        out[[i, l]] = 1.0;
    }
    out
}

#[derive(Debug, Clone, PartialEq)]
pub struct MlpGradient {
    pub layer1: Array2<f64>,
    pub bias1: Array1<f64>,
    pub layer2: Array2<f64>,
    pub bias2: Array1<f64>,
}

/// Mean softmax cross-entropy against soft `targets` (rows on the simplex)
/// and its gradient.
pub fn cross_entropy_and_gradient(
    net: &MlpClassifier,
    points: ArrayView2<'_, f64>,
    targets: ArrayView2<'_, f64>,
) -> Result<(f64, MlpGradient)> {
    if targets.dim() != (points.nrows(), net.classes()) {
        return Err(Error::InvalidArgument(format!(
            "targets shape {:?}, expected ({}, {})",
            targets.dim(),
            points.nrows(),
            net.classes()
        )));
    }
    if points.ncols() != net.input_dim() {
        return Err(Error::DimensionMismatch { expected: net.input_dim(), got: points.ncols() });
    }
    let batch = points.nrows() as f64;
    let mut pre = points.dot(&net.layer1.t());
    pre += &net.bias1.view().insert_axis(Axis(0));
    let hidden = pre.mapv(relu);
    let mut logits = hidden.dot(&net.layer2.t());
    logits += &net.bias2.view().insert_axis(Axis(0));

    let mut loss = 0.0;
    let mut dlogits = Array2::zeros(logits.dim());
    for ((z, t), mut dz) in logits.rows().into_iter().zip(targets.rows()).zip(dlogits.rows_mut()) {
        let max = z.fold(f64::NEG_INFINITY, |a, &b| a.max(b));
        let sum: f64 = z.iter().map(|&v| (v - max).exp()).sum();
        let log_norm = max + sum.ln();
        for c in 0..z.len() {
            let log_p = z[c] - log_norm;
            loss -= t[c] * log_p;
            dz[c] = (log_p.exp() - t[c]) / batch;
        }
    }
    loss /= batch;

    let layer2 = dlogits.t().dot(&hidden);
    let bias2 = dlogits.sum_axis(Axis(0));
    let mut dpre = dlogits.dot(&net.layer2);
    dpre.zip_mut_with(&pre, |g, &z| {
        if z <= 0.0 {
            *g = 0.0;
        }
    });
    let layer1 = dpre.t().dot(&points);
    let bias1 = dpre.sum_axis(Axis(0));
    Ok((loss, MlpGradient { layer1, bias1, layer2, bias2 }))
}

/// Convex combination of each row with row `partners[i]`, weighted by `lambdas[i]`.
pub fn mix_with(
    points: ArrayView2<'_, f64>,
    targets: ArrayView2<'_, f64>,
    lambdas: &[f64],
    partners: &[usize],
) -> Result<(Array2<f64>, Array2<f64>)> {
    let n = points.nrows();
    if targets.nrows() != n || lambdas.len() != n || partners.len() != n {
        return Err(Error::InvalidArgument("mixup inputs must have one entry per example".into()));
    }
    let mut mixed_x = Array2::zeros(points.dim());
    let mut mixed_y = Array2::zeros(targets.dim());
    for i in 0..n {
        let (lam, j) = (lambdas[i], partners[i]);
        if j >= n {
            return Err(Error::InvalidArgument(format!("partner index {j} out of range")));
        }
        mixed_x.row_mut(i).assign(&(&points.row(i) * lam + &points.row(j) * (1.0 - lam)));
        mixed_y.row_mut(i).assign(&(&targets.row(i) * lam + &targets.row(j) * (1.0 - lam)));
    }
    Ok((mixed_x, mixed_y))
}

/// Mixup: each example is paired with a random permutation partner and
/// blended with weight λ ~ Beta(alpha, alpha).
pub fn mixup_batch<R: Rng + ?Sized>(
    points: ArrayView2<'_, f64>,
    targets: ArrayView2<'_, f64>,
    alpha: f64,
    rng: &mut R,
) -> Result<(Array2<f64>, Array2<f64>)> {
    if !(alpha > 0.0) || !alpha.is_finite() {
        return Err(Error::InvalidArgument(format!("mixup alpha must be positive, got {alpha}")));
    }
    let beta = Beta::new(alpha, alpha).map_err(|e| Error::InvalidArgument(e.to_string()))?;
    let n = points.nrows();
    let lambdas: Vec<f64> = (0..n).map(|_| beta.sample(rng)).collect();
    let mut partners: Vec<usize> = (0..n).collect();
    partners.shuffle(rng);
    mix_with(points, targets, &lambdas, &partners)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SgdConfig {
    pub learning_rate: f64,
    pub batch_size: usize,
    pub weight_decay: f64,
    pub epochs: usize,
    pub seed: u64,
    pub mixup_alpha: Option<f64>,
    /// Cosine-anneal the learning rate to zero over all steps.
    pub cosine_schedule: bool,
}

impl SgdConfig {
    pub fn new(learning_rate: f64, batch_size: usize, epochs: usize, seed: u64) -> Self {
        Self { learning_rate, batch_size, weight_decay: 0.0, epochs, seed, mixup_alpha: None, cosine_schedule: false }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SgdOutcome {
    pub model: MlpClassifier,
    /// Training accuracy after each completed epoch.
    pub epoch_train_accuracy: Vec<f64>,
    pub diverged: bool,
}

/// Minibatch SGD on softmax cross-entropy.
///
/// Each epoch reshuffles the data; the final partial batch is kept. Weight
/// decay is decoupled: `θ ← θ − lr·(∇L + wd·θ)` on every parameter. A batch
/// loss above 10⁶ stops training and flags divergence. The returned model
/// keeps the input model's init snapshot.
pub fn train_mlp_sgd(mlp: &MlpClassifier, train: &LabeledDataset, config: &SgdConfig) -> Result<SgdOutcome> {
    if config.batch_size == 0 || config.batch_size > train.len() {
        return Err(Error::InvalidArgument(format!(
            "batch size {} must be in [1, {}]",
            config.batch_size,
            train.len()
        )));
    }
    if !(config.learning_rate >= 0.0) || !(config.weight_decay >= 0.0) {
        return Err(Error::InvalidArgument("learning rate and weight decay must be ≥ 0".into()));
    }
    if train.dim() != mlp.input_dim() {
        return Err(Error::DimensionMismatch { expected: mlp.input_dim(), got: train.dim() });
    }
    if train.labels().iter().any(|&l| l >= mlp.classes()) {
        return Err(Error::InvalidArgument("training labels exceed the model's class count".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut model = mlp.clone();
    let targets = one_hot(train.labels(), mlp.classes());
    let mut order: Vec<usize> = (0..train.len()).collect();
    let batches_per_epoch = train.len().div_ceil(config.batch_size);
    let total_steps = (batches_per_epoch * config.epochs).max(1) as f64;
    let mut step = 0usize;
    let mut epoch_train_accuracy = Vec::with_capacity(config.epochs);
    let mut diverged = false;

    'epochs: for _ in 0..config.epochs {
        order.shuffle(&mut rng);
        for chunk in order.chunks(config.batch_size) {
            let xb = train.points().select(Axis(0), chunk);
            let yb = targets.select(Axis(0), chunk);
            let (xb, yb) = match config.mixup_alpha {
                Some(alpha) => mixup_batch(xb.view(), yb.view(), alpha, &mut rng)?,
                None => (xb, yb),
            };
            let (loss, grad) = cross_entropy_and_gradient(&model, xb.view(), yb.view())?;
            if !loss.is_finite() || loss > DIVERGENCE_LOSS {
                diverged = true;
                break 'epochs;
            }
            let lr = if config.cosine_schedule {
                0.5 * config.learning_rate * (1.0 + (std::f64::consts::PI * step as f64 / total_steps).cos())
            } else {
                config.learning_rate
            };
            let wd = config.weight_decay;
            apply(&mut model.layer1, &grad.layer1, lr, wd);
            apply(&mut model.bias1, &grad.bias1, lr, wd);
            apply(&mut model.layer2, &grad.layer2, lr, wd);
            apply(&mut model.bias2, &grad.bias2, lr, wd);
            step += 1;
        }
        epoch_train_accuracy.push(accuracy(&model, train)?);
    }
    let finite = [model.layer1.iter(), model.layer2.iter()].into_iter().flatten().all(|v| v.is_finite());
    Ok(SgdOutcome { model, epoch_train_accuracy, diverged: diverged || !finite })
}

fn apply<D: ndarray::Dimension>(
    param: &mut ndarray::Array<f64, D>,
    grad: &ndarray::Array<f64, D>,
    lr: f64,
    wd: f64,
) {
    param.zip_mut_with(grad, |p, &g| *p -= lr * (g + wd * *p));
}
