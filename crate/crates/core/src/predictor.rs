//! Classifiers consumed by the region counter.
//!
//! Every predictor maps a batch of points to integer labels. Predictors are
//! immutable once built, so they can be shared across counting workers.

use ndarray::{Array1, Array2, ArrayView1, ArrayView2, Axis};
use rand::Rng;
use rand_distr::{Distribution, Normal};

use crate::error::{Error, Result};

pub type Label = usize;

pub trait Predictor: Sync {
    fn input_dim(&self) -> usize;

    fn class_count(&self) -> usize;

    /// Labels for every row of `points` (M×d). Deterministic.
    fn predict_labels(&self, points: ArrayView2<'_, f64>) -> Result<Vec<Label>>;
}

impl<P: Predictor + ?Sized> Predictor for &P {
    fn input_dim(&self) -> usize {
        (**self).input_dim()
    }
    fn class_count(&self) -> usize {
        (**self).class_count()
    }
    fn predict_labels(&self, points: ArrayView2<'_, f64>) -> Result<Vec<Label>> {
        (**self).predict_labels(points)
    }
}

fn check_dim(expected: usize, got: usize) -> Result<()> {
    if expected != got {
        return Err(Error::DimensionMismatch { expected, got });
    }
    Ok(())
}

#[inline]
pub(crate) fn relu(v: f64) -> f64 {
    if v > 0.0 {
        v
    } else {
        0.0
    }
}

/// Index of the largest entry; ties go to the lowest index.
pub fn argmax(values: ArrayView1<'_, f64>) -> Label {
    let mut best = 0;
    for (i, &v) in values.iter().enumerate().skip(1) {
        if v > values[best] {
            best = i;
        }
    }
    best
}

/// `f(x) = Σ a_i σ(w_iᵀx)` with a frozen ±1 second layer.
#[derive(Debug, Clone, PartialEq)]
pub struct TwoLayerReluNet {
    weights: Array2<f64>,
    signs: Array1<f64>,
    init_weights: Array2<f64>,
}

impl TwoLayerReluNet {
    /// Builds a net whose initialization snapshot is `weights`.
    pub fn new(weights: Array2<f64>, signs: Array1<f64>) -> Result<Self> {
        let init = weights.clone();
        Self::with_init(weights, signs, init)
    }

    pub fn with_init(weights: Array2<f64>, signs: Array1<f64>, init_weights: Array2<f64>) -> Result<Self> {
        check_dim(weights.nrows(), signs.len())?;
        if init_weights.dim() != weights.dim() {
            return Err(Error::InvalidArgument(format!(
                "init snapshot shape {:?} differs from weights {:?}",
                init_weights.dim(),
                weights.dim()
            )));
        }
        if weights.nrows() == 0 || weights.ncols() == 0 {
            return Err(Error::InvalidArgument("network needs p ≥ 1 and d ≥ 1".into()));
        }
        if signs.iter().any(|&a| a != 1.0 && a != -1.0) {
            return Err(Error::InvalidArgument("second-layer weights must be ±1".into()));
        }
        Ok(Self { weights, signs, init_weights })
    }

    /// Second layer uniform on {±1}; first layer i.i.d. N(0, init_scale²).
    pub fn random<R: Rng + ?Sized>(p: usize, d: usize, init_scale: f64, rng: &mut R) -> Result<Self> {
        if !(init_scale > 0.0) {
            return Err(Error::InvalidArgument("init_scale must be positive".into()));
        }
        let normal = Normal::new(0.0, init_scale).map_err(|e| Error::InvalidArgument(e.to_string()))?;
        let signs = Array1::from_shape_fn(p, |_| if rng.random::<bool>() { 1.0 } else { -1.0 });
        let weights = Array2::from_shape_fn((p, d), |_| normal.sample(rng));
        Self::new(weights, signs)
    }

    pub fn width(&self) -> usize {
        self.weights.nrows()
    }

    pub fn dim(&self) -> usize {
        self.weights.ncols()
    }

    pub fn weights(&self) -> ArrayView2<'_, f64> {
        self.weights.view()
    }

    pub fn signs(&self) -> ArrayView1<'_, f64> {
        self.signs.view()
    }

    pub fn init_weights(&self) -> ArrayView2<'_, f64> {
        self.init_weights.view()
    }

    /// Same second layer and init snapshot, new first layer.
    pub fn with_weights(&self, weights: Array2<f64>) -> Result<Self> {
        if weights.dim() != self.weights.dim() {
            return Err(Error::InvalidArgument("weight shape changed".into()));
        }
        Ok(Self { weights, signs: self.signs.clone(), init_weights: self.init_weights.clone() })
    }

    pub fn forward(&self, x: ArrayView1<'_, f64>) -> Result<f64> {
        check_dim(self.dim(), x.len())?;
        Ok(self.forward_unchecked(x))
    }

    pub(crate) fn forward_unchecked(&self, x: ArrayView1<'_, f64>) -> f64 {
        self.weights
            .rows()
            .into_iter()
            .zip(self.signs.iter())
            .map(|(w, &a)| a * relu(w.dot(&x)))
            .sum()
    }

    /// 1 when the output is strictly positive, otherwise 0.
    pub fn predict_binary(&self, x: ArrayView1<'_, f64>) -> Result<Label> {
        Ok(usize::from(self.forward(x)? > 0.0))
    }
}

impl Predictor for TwoLayerReluNet {
    fn input_dim(&self) -> usize {
        self.dim()
    }

    fn class_count(&self) -> usize {
        2
    }

    fn predict_labels(&self, points: ArrayView2<'_, f64>) -> Result<Vec<Label>> {
        check_dim(self.dim(), points.ncols())?;
        let pre = points.dot(&self.weights.t());
        Ok(pre
            .rows()
            .into_iter()
            .map(|row| {
                let f: f64 = row.iter().zip(self.signs.iter()).map(|(&z, &a)| a * relu(z)).sum();
                usize::from(f > 0.0)
            })
            .collect())
    }
}

/// One-hidden-layer ReLU classifier with biases.
#[derive(Debug, Clone, PartialEq)]
pub struct MlpClassifier {
    pub(crate) layer1: Array2<f64>,
    pub(crate) bias1: Array1<f64>,
    pub(crate) layer2: Array2<f64>,
    pub(crate) bias2: Array1<f64>,
    init_layer1: Array2<f64>,
    init_layer2: Array2<f64>,
}

impl MlpClassifier {
    pub fn new(layer1: Array2<f64>, bias1: Array1<f64>, layer2: Array2<f64>, bias2: Array1<f64>) -> Result<Self> {
        let (i1, i2) = (layer1.clone(), layer2.clone());
        Self::with_init(layer1, bias1, layer2, bias2, i1, i2)
    }

    pub fn with_init(
        layer1: Array2<f64>,
        bias1: Array1<f64>,
        layer2: Array2<f64>,
        bias2: Array1<f64>,
        init_layer1: Array2<f64>,
        init_layer2: Array2<f64>,
    ) -> Result<Self> {
        let (h, d) = layer1.dim();
        let (c, h2) = layer2.dim();
        if h == 0 || d == 0 || c == 0 {
            return Err(Error::InvalidArgument("MLP dimensions must be positive".into()));
        }
        check_dim(h, bias1.len())?;
        check_dim(h, h2)?;
        check_dim(c, bias2.len())?;
        if init_layer1.dim() != layer1.dim() || init_layer2.dim() != layer2.dim() {
            return Err(Error::InvalidArgument("init snapshot shape differs from layers".into()));
        }
        Ok(Self { layer1, bias1, layer2, bias2, init_layer1, init_layer2 })
    }

    /// He-normal weights, zero biases.
    pub fn random<R: Rng + ?Sized>(d: usize, hidden: usize, classes: usize, rng: &mut R) -> Result<Self> {
        if d == 0 || hidden == 0 || classes < 2 {
            return Err(Error::InvalidArgument("need d ≥ 1, hidden ≥ 1, classes ≥ 2".into()));
        }
        let n1 = Normal::new(0.0, (2.0 / d as f64).sqrt()).expect("finite std");
        let n2 = Normal::new(0.0, (2.0 / hidden as f64).sqrt()).expect("finite std");
        let layer1 = Array2::from_shape_fn((hidden, d), |_| n1.sample(rng));
        let layer2 = Array2::from_shape_fn((classes, hidden), |_| n2.sample(rng));
        Self::new(layer1, Array1::zeros(hidden), layer2, Array1::zeros(classes))
    }

    pub fn input_dim(&self) -> usize {
        self.layer1.ncols()
    }

    pub fn hidden(&self) -> usize {
        self.layer1.nrows()
    }

    pub fn classes(&self) -> usize {
        self.layer2.nrows()
    }

    pub fn layer1(&self) -> ArrayView2<'_, f64> {
        self.layer1.view()
    }

    pub fn bias1(&self) -> ArrayView1<'_, f64> {
        self.bias1.view()
    }

    pub fn layer2(&self) -> ArrayView2<'_, f64> {
        self.layer2.view()
    }

    pub fn bias2(&self) -> ArrayView1<'_, f64> {
        self.bias2.view()
    }

    pub fn layers(&self) -> [ArrayView2<'_, f64>; 2] {
        [self.layer1.view(), self.layer2.view()]
    }

    pub fn init_layers(&self) -> [ArrayView2<'_, f64>; 2] {
        [self.init_layer1.view(), self.init_layer2.view()]
    }

    /// Restarts the init snapshot at the current weights.
    pub fn freeze_init(&mut self) {
        self.init_layer1 = self.layer1.clone();
        self.init_layer2 = self.layer2.clone();
    }

    pub fn logits(&self, x: ArrayView1<'_, f64>) -> Result<Array1<f64>> {
        check_dim(self.input_dim(), x.len())?;
        let hidden = (self.layer1.dot(&x) + &self.bias1).mapv(relu);
        Ok(self.layer2.dot(&hidden) + &self.bias2)
    }

    /// Logits for every row of `points` (M×C).
    pub fn logits_batch(&self, points: ArrayView2<'_, f64>) -> Result<Array2<f64>> {
        check_dim(self.input_dim(), points.ncols())?;
        let mut hidden = points.dot(&self.layer1.t());
        hidden += &self.bias1.view().insert_axis(Axis(0));
        hidden.mapv_inplace(relu);
        let mut out = hidden.dot(&self.layer2.t());
        out += &self.bias2.view().insert_axis(Axis(0));
        Ok(out)
    }

    /// Multiplies layer 1 and its bias by `c` and layer 2 by `1/c`. The
    /// logit function is unchanged; the init snapshot is kept as is.
    pub fn scale_layers(&self, c: f64) -> Result<Self> {
        if !(c > 0.0) || !c.is_finite() {
            return Err(Error::InvalidArgument(format!("scale must be positive and finite, got {c}")));
        }
        Ok(Self {
            layer1: &self.layer1 * c,
            bias1: &self.bias1 * c,
            layer2: &self.layer2 / c,
            bias2: self.bias2.clone(),
            init_layer1: self.init_layer1.clone(),
            init_layer2: self.init_layer2.clone(),
        })
    }
}

impl Predictor for MlpClassifier {
    fn input_dim(&self) -> usize {
        self.layer1.ncols()
    }

    fn class_count(&self) -> usize {
        self.classes()
    }

    fn predict_labels(&self, points: ArrayView2<'_, f64>) -> Result<Vec<Label>> {
        let logits = self.logits_batch(points)?;
        Ok(logits.rows().into_iter().map(argmax).collect())
    }
}

/// Affine multi-class classifier: argmax of `Wx + b`.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearClassifier {
    weights: Array2<f64>,
    bias: Array1<f64>,
}

impl LinearClassifier {
    pub fn new(weights: Array2<f64>, bias: Array1<f64>) -> Result<Self> {
        check_dim(weights.nrows(), bias.len())?;
        if weights.nrows() < 2 || weights.ncols() == 0 {
            return Err(Error::InvalidArgument("linear classifier needs C ≥ 2 and d ≥ 1".into()));
        }
        Ok(Self { weights, bias })
    }

    /// Binary classifier labelling `normal·x + offset > 0` as class 1.
    pub fn half_space(normal: ArrayView1<'_, f64>, offset: f64) -> Result<Self> {
        let d = normal.len();
        let mut weights = Array2::zeros((2, d));
        weights.row_mut(1).assign(&normal);
        Self::new(weights, Array1::from(vec![0.0, offset]))
    }

    pub fn weights(&self) -> ArrayView2<'_, f64> {
        self.weights.view()
    }

    pub fn bias(&self) -> ArrayView1<'_, f64> {
        self.bias.view()
    }
}

impl Predictor for LinearClassifier {
    fn input_dim(&self) -> usize {
        self.weights.ncols()
    }

    fn class_count(&self) -> usize {
        self.weights.nrows()
    }

    fn predict_labels(&self, points: ArrayView2<'_, f64>) -> Result<Vec<Label>> {
        check_dim(self.input_dim(), points.ncols())?;
        let mut scores = points.dot(&self.weights.t());
        scores += &self.bias.view().insert_axis(Axis(0));
        Ok(scores.rows().into_iter().map(argmax).collect())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConstantClassifier {
    dim: usize,
    classes: usize,
    label: Label,
}

impl ConstantClassifier {
    pub fn new(dim: usize, classes: usize, label: Label) -> Result<Self> {
        if label >= classes || classes < 2 {
            return Err(Error::InvalidArgument(format!("label {label} invalid for {classes} classes")));
        }
        Ok(Self { dim, classes, label })
    }

    pub fn label(&self) -> Label {
        self.label
    }
}

impl Predictor for ConstantClassifier {
    fn input_dim(&self) -> usize {
        self.dim
    }

    fn class_count(&self) -> usize {
        self.classes
    }

    fn predict_labels(&self, points: ArrayView2<'_, f64>) -> Result<Vec<Label>> {
        check_dim(self.dim, points.ncols())?;
        Ok(vec![self.label; points.nrows()])
    }
}
