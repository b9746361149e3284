//! Python bindings. Arrays cross the boundary as nested lists of floats.

use ndarray::Array2;
use pyo3::exceptions::{PyOSError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use regioncount::experiments::{self, DatasetKind, DatasetSpec, SgdConfig};
use regioncount::predictor::{MlpClassifier, Predictor, TwoLayerReluNet};
use regioncount::regions::{region_count_estimate, EstimateConfig, SimplexSource};
use regioncount::subspace::default_resolution;
use regioncount::theory::{self, TheoryTrainConfig};
use regioncount::{metrics, suites, Error, LabeledDataset, Model};

fn py_err(e: Error) -> PyErr {
    match e {
        Error::Io(io) => PyOSError::new_err(io.to_string()),
        other => PyValueError::new_err(other.to_string()),
    }
}

fn to_array(rows: Vec<Vec<f64>>) -> PyResult<Array2<f64>> {
    let n = rows.len();
    let d = rows.first().map_or(0, Vec::len);
    if rows.iter().any(|r| r.len() != d) {
        return Err(PyValueError::new_err("rows must all have the same length"));
    }
    Array2::from_shape_vec((n, d), rows.into_iter().flatten().collect())
        .map_err(|e| PyValueError::new_err(e.to_string()))
}

fn to_rows(a: ndarray::ArrayView2<'_, f64>) -> Vec<Vec<f64>> {
    a.rows().into_iter().map(|r| r.to_vec()).collect()
}

#[pyclass(name = "Dataset", module = "pyregioncount", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PyDataset {
    inner: LabeledDataset,
}

#[pymethods]
impl PyDataset {
    #[new]
    #[pyo3(signature = (points, labels, classes=None))]
    fn new(points: Vec<Vec<f64>>, labels: Vec<usize>, classes: Option<usize>) -> PyResult<Self> {
        let classes = classes.unwrap_or_else(|| labels.iter().max().map_or(2, |&m| (m + 1).max(2)));
        let inner = LabeledDataset::new(to_array(points)?, labels, classes).map_err(py_err)?;
        Ok(Self { inner })
    }

    #[staticmethod]
    fn read_csv(path: &str) -> PyResult<Self> {
        Ok(Self { inner: LabeledDataset::read_csv(path).map_err(py_err)? })
    }

    fn __len__(&self) -> usize {
        self.inner.len()
    }

    #[getter]
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    #[getter]
    fn classes(&self) -> usize {
        self.inner.class_count()
    }

    #[getter]
    fn points(&self) -> Vec<Vec<f64>> {
        to_rows(self.inner.points())
    }

    #[getter]
    fn labels(&self) -> Vec<usize> {
        self.inner.labels().to_vec()
    }

    fn min_norm(&self) -> f64 {
        self.inner.min_norm()
    }

    fn __repr__(&self) -> String {
        format!("Dataset(n={}, d={}, classes={})", self.inner.len(), self.inner.dim(), self.inner.class_count())
    }
}

/// Any saved model kind: two-layer ReLU, MLP, linear or constant.
#[pyclass(name = "Model", module = "pyregioncount", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PyModel {
    inner: Model,
}

#[pymethods]
impl PyModel {
    #[staticmethod]
    fn load(path: &str) -> PyResult<Self> {
        Ok(Self { inner: Model::load(path).map_err(py_err)? })
    }

    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        Ok(Self { inner: Model::from_json(text).map_err(py_err)? })
    }

    /// Random two-layer ReLU net with ±1 output weights.
    #[staticmethod]
    #[pyo3(signature = (p, d, init_scale=0.5, seed=0))]
    fn two_layer_relu(p: usize, d: usize, init_scale: f64, seed: u64) -> PyResult<Self> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let net = TwoLayerReluNet::random(p, d, init_scale, &mut rng).map_err(py_err)?;
        Ok(Self { inner: Model::TwoLayerRelu(net) })
    }

    /// Random He-initialized MLP.
    #[staticmethod]
    #[pyo3(signature = (d, hidden, classes, seed=0))]
    fn mlp(d: usize, hidden: usize, classes: usize, seed: u64) -> PyResult<Self> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let net = MlpClassifier::random(d, hidden, classes, &mut rng).map_err(py_err)?;
        Ok(Self { inner: Model::Mlp(net) })
    }

    #[getter]
    fn kind(&self) -> &'static str {
        self.inner.kind()
    }

    #[getter]
    fn input_dim(&self) -> usize {
        self.inner.input_dim()
    }

    fn to_json(&self) -> PyResult<String> {
        self.inner.to_json().map_err(py_err)
    }

    fn save(&self, path: &str) -> PyResult<()> {
        self.inner.save(path).map_err(py_err)
    }

    fn predict(&self, points: Vec<Vec<f64>>) -> PyResult<Vec<usize>> {
        let x = to_array(points)?;
        self.inner.predict_labels(x.view()).map_err(py_err)
    }

    /// Function-preserving rescale of an MLP: first layer times c, second over c.
    fn scale_layers(&self, c: f64) -> PyResult<Self> {
        match &self.inner {
            Model::Mlp(net) => Ok(Self { inner: Model::Mlp(net.scale_layers(c).map_err(py_err)?) }),
            _ => Err(PyValueError::new_err("scale_layers needs an MLP")),
        }
    }

    fn distance_from_init(&self) -> PyResult<f64> {
        match &self.inner {
            Model::Mlp(net) => Ok(metrics::mlp_distance_from_init(net)),
            Model::TwoLayerRelu(net) => metrics::frobenius_distance_from_init(
                &[net.weights().view()],
                &[net.init_weights().view()],
            )
            .map_err(py_err),
            _ => Err(PyValueError::new_err("model has no initialization snapshot")),
        }
    }

    fn __repr__(&self) -> String {
        format!("Model(kind={:?}, input_dim={})", self.inner.kind(), self.inner.input_dim())
    }
}

#[pyfunction]
#[pyo3(signature = (model, dataset, k=1, n_simplices=100, m=None, range=(0.0, 1.0), seed=0, direction_length=None))]
#[allow(clippy::too_many_arguments)]
fn region_count<'py>(
    py: Python<'py>,
    model: &PyModel,
    dataset: &PyDataset,
    k: usize,
    n_simplices: usize,
    m: Option<usize>,
    range: (f64, f64),
    seed: u64,
    direction_length: Option<f64>,
) -> PyResult<Bound<'py, PyDict>> {
    let mut config = EstimateConfig::new(k, n_simplices, seed)
        .with_resolution(m.unwrap_or_else(|| default_resolution(k)))
        .with_range(range.0, range.1);
    if let Some(length) = direction_length {
        config = config.with_source(SimplexSource::RandomDirection { length });
    }
    let est = py.detach(|| region_count_estimate(&model.inner, &dataset.inner, &config)).map_err(py_err)?;
    let out = PyDict::new(py);
    out.set_item("mean", est.mean)?;
    out.set_item("std_error", est.std_error)?;
    out.set_item("n", est.n_simplices)?;
    out.set_item("k", est.k)?;
    out.set_item("m", est.m)?;
    out.set_item("range", (est.range[0], est.range[1]))?;
    out.set_item("seed", est.seed)?;
    out.set_item("per_simplex_counts", est.per_simplex_counts)?;
    Ok(out)
}

#[pyfunction]
#[pyo3(signature = (kind, n_train, n_test, d=2, classes=2, noise=0.08, seed=0))]
fn make_dataset(
    kind: &str,
    n_train: usize,
    n_test: usize,
    d: usize,
    classes: usize,
    noise: f64,
    seed: u64,
) -> PyResult<(PyDataset, PyDataset)> {
    let kind: DatasetKind = kind.parse().map_err(py_err)?;
    let spec = DatasetSpec { kind, n_train, n_test, d, classes, noise, seed };
    let (train, test) = experiments::make_synthetic_dataset(&spec).map_err(py_err)?;
    Ok((PyDataset { inner: train }, PyDataset { inner: test }))
}

/// Binary mixture used for the two-layer theory runs.
#[pyfunction]
#[pyo3(signature = (n, seed=0))]
fn theory_dataset(n: usize, seed: u64) -> PyResult<PyDataset> {
    Ok(PyDataset { inner: experiments::theory_dataset(n, seed).map_err(py_err)? })
}

#[pyfunction]
#[pyo3(signature = (dataset, lr, batch_size, epochs, seed=0, hidden=64, weight_decay=0.0, mixup_alpha=None))]
#[allow(clippy::too_many_arguments)]
fn train_mlp(
    py: Python<'_>,
    dataset: &PyDataset,
    lr: f64,
    batch_size: usize,
    epochs: usize,
    seed: u64,
    hidden: usize,
    weight_decay: f64,
    mixup_alpha: Option<f64>,
) -> PyResult<PyModel> {
    let ds = &dataset.inner;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let init = MlpClassifier::random(ds.dim(), hidden, ds.class_count(), &mut rng).map_err(py_err)?;
    let mut config = SgdConfig::new(lr, batch_size, epochs, seed);
    config.weight_decay = weight_decay;
    config.mixup_alpha = mixup_alpha;
    let outcome = py.detach(|| experiments::train_mlp_sgd(&init, ds, &config)).map_err(py_err)?;
    if outcome.diverged {
        return Err(PyValueError::new_err("training diverged"));
    }
    Ok(PyModel { inner: Model::Mlp(outcome.model) })
}

/// Full-batch GD on a two-layer ReLU net; returns one dict per checkpoint.
#[pyfunction]
#[pyo3(signature = (dataset, eta, steps, width=64, checkpoint_every=100, segment_m=201, init_scale=0.5, seed=0))]
#[allow(clippy::too_many_arguments)]
fn train_theory<'py>(
    py: Python<'py>,
    dataset: &PyDataset,
    eta: f64,
    steps: usize,
    width: usize,
    checkpoint_every: usize,
    segment_m: usize,
    init_scale: f64,
    seed: u64,
) -> PyResult<(Vec<Bound<'py, PyDict>>, PyModel)> {
    let config = TheoryTrainConfig {
        learning_rate: eta,
        steps,
        checkpoint_every,
        seed,
        init_scale,
        width,
        sharpness_tol: theory::DEFAULT_SHARPNESS_TOL,
    };
    let ds = &dataset.inner;
    let trace = py
        .detach(|| {
            let net = config.init_net(ds.dim())?;
            theory::train_theory(&net, ds, &config, segment_m)
        })
        .map_err(py_err)?;
    let rows = trace
        .checkpoints
        .iter()
        .map(|c| {
            let row = PyDict::new(py);
            row.set_item("step", c.step)?;
            row.set_item("loss", c.loss)?;
            row.set_item("lambda_max", c.lambda_max)?;
            row.set_item("eos_product", c.eos_product)?;
            row.set_item("mean_active", c.mean_active)?;
            row.set_item("mean_pair_regions", c.mean_pairwise_region_count)?;
            row.set_item("theorem_rhs", c.theorem_rhs)?;
            row.set_item("bound_holds", c.bound_holds)?;
            Ok(row)
        })
        .collect::<PyResult<Vec<_>>>()?;
    Ok((rows, PyModel { inner: Model::TwoLayerRelu(trace.final_net) }))
}

#[pyfunction]
fn loss_sharpness(model: &PyModel, dataset: &PyDataset) -> PyResult<f64> {
    match &model.inner {
        Model::TwoLayerRelu(net) => {
            theory::loss_sharpness(net, &dataset.inner, theory::DEFAULT_SHARPNESS_TOL).map_err(py_err)
        }
        _ => Err(PyValueError::new_err("sharpness is defined for the two-layer ReLU net")),
    }
}

#[pyfunction]
fn pearson(xs: Vec<f64>, ys: Vec<f64>) -> PyResult<f64> {
    metrics::pearson_correlation(&xs, &ys).map_err(py_err)
}

#[pyfunction]
fn spearman(xs: Vec<f64>, ys: Vec<f64>) -> PyResult<f64> {
    metrics::spearman_correlation(&xs, &ys).map_err(py_err)
}

/// Runs a named property suite and returns (passed, summary line).
#[pyfunction]
#[pyo3(signature = (suite, cases=None, seed=0))]
fn verify(py: Python<'_>, suite: &str, cases: Option<usize>, seed: u64) -> PyResult<(bool, String)> {
    let report = py.detach(|| match suite {
        "oracle-regions" => Ok(suites::oracle_regions(cases.unwrap_or(1000), seed)),
        "lemma-region" => Ok(suites::lemma_region(cases.unwrap_or(200), 1001, seed)),
        "lemma-sharpness" => Ok(suites::lemma_sharpness(cases.unwrap_or(200), 10, seed)),
        "theorem" => Ok(suites::theorem(cases.unwrap_or(20), seed)),
        "gradients" => Ok(suites::gradients(cases.unwrap_or(20), seed)),
        other => Err(other.to_string()),
    });
    let report = report.map_err(|name| PyValueError::new_err(format!("unknown suite {name:?}")))?;
    Ok((report.passed(), report.summary()))
}

#[pymodule]
fn pyregioncount(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyDataset>()?;
    m.add_class::<PyModel>()?;
    m.add_function(wrap_pyfunction!(region_count, m)?)?;
    m.add_function(wrap_pyfunction!(make_dataset, m)?)?;
    m.add_function(wrap_pyfunction!(theory_dataset, m)?)?;
    m.add_function(wrap_pyfunction!(train_mlp, m)?)?;
    m.add_function(wrap_pyfunction!(train_theory, m)?)?;
    m.add_function(wrap_pyfunction!(loss_sharpness, m)?)?;
    m.add_function(wrap_pyfunction!(pearson, m)?)?;
    m.add_function(wrap_pyfunction!(spearman, m)?)?;
    m.add_function(wrap_pyfunction!(verify, m)?)?;
    Ok(())
}
