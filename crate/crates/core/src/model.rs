//! JSON model documents.
//!
//! ```json
//! {"kind": "two_layer_relu", "dims": [p, d], "weights": [[[..]]], "a": [..], "W0": [[[..]]]}
//! {"kind": "mlp", "dims": [d, h, C], "weights": [W1, W2], "biases": [b1, b2], "W0": [W1_0, W2_0]}
//! {"kind": "linear", "dims": [d, C], "weights": [W], "biases": [b]}
//! {"kind": "constant", "dims": [d, C], "weights": [], "label": 0}
//! ```
//!
//! Floats are written in shortest round-trip form, so a save/load cycle
//! reproduces every weight bit for bit.

use std::path::Path;

use ndarray::{Array1, Array2, ArrayView2};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::predictor::{ConstantClassifier, Label, LinearClassifier, MlpClassifier, Predictor, TwoLayerReluNet};

#[derive(Debug, Clone, PartialEq)]
pub enum Model {
    TwoLayerRelu(TwoLayerReluNet),
    Mlp(MlpClassifier),
    Linear(LinearClassifier),
    Constant(ConstantClassifier),
}

impl Model {
    fn inner(&self) -> &dyn Predictor {
        match self {
            Model::TwoLayerRelu(m) => m,
            Model::Mlp(m) => m,
            Model::Linear(m) => m,
            Model::Constant(m) => m,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            Model::TwoLayerRelu(_) => "two_layer_relu",
            Model::Mlp(_) => "mlp",
            Model::Linear(_) => "linear",
            Model::Constant(_) => "constant",
        }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&ModelDocument::from(self))?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let doc: ModelDocument = serde_json::from_str(text)?;
        doc.try_into()
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_json()?)?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }
}

impl Predictor for Model {
    fn input_dim(&self) -> usize {
        self.inner().input_dim()
    }

    fn class_count(&self) -> usize {
        self.inner().class_count()
    }

    fn predict_labels(&self, points: ArrayView2<'_, f64>) -> Result<Vec<Label>> {
        self.inner().predict_labels(points)
    }
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ModelDocument {
    kind: String,
    dims: Vec<usize>,
    weights: Vec<Vec<Vec<f64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    a: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    biases: Option<Vec<Vec<f64>>>,
    #[serde(rename = "W0", default, skip_serializing_if = "Option::is_none")]
    w0: Option<Vec<Vec<Vec<f64>>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    label: Option<Label>,
}

fn to_rows(m: ArrayView2<'_, f64>) -> Vec<Vec<f64>> {
    m.rows().into_iter().map(|r| r.to_vec()).collect()
}

fn from_rows(rows: &[Vec<f64>], shape: (usize, usize), what: &str) -> Result<Array2<f64>> {
    if rows.len() != shape.0 || rows.iter().any(|r| r.len() != shape.1) {
        return Err(Error::Parse(format!("{what}: expected a {}×{} matrix", shape.0, shape.1)));
    }
    let flat: Vec<f64> = rows.iter().flatten().copied().collect();
    Array2::from_shape_vec(shape, flat).map_err(|e| Error::Parse(e.to_string()))
}

fn vector(values: &[f64], len: usize, what: &str) -> Result<Array1<f64>> {
    if values.len() != len {
        return Err(Error::Parse(format!("{what}: expected {len} entries, found {}", values.len())));
    }
    Ok(Array1::from(values.to_vec()))
}

fn dims<const N: usize>(doc: &ModelDocument) -> Result<[usize; N]> {
    doc.dims
        .as_slice()
        .try_into()
        .map_err(|_| Error::Parse(format!("`{}` model needs {N} dims, found {}", doc.kind, doc.dims.len())))
}

fn layer<'a>(layers: &'a [Vec<Vec<f64>>], i: usize, what: &str) -> Result<&'a [Vec<f64>]> {
    layers.get(i).map(Vec::as_slice).ok_or_else(|| Error::Parse(format!("missing {what}")))
}

impl From<&Model> for ModelDocument {
    fn from(model: &Model) -> Self {
        let mut doc = ModelDocument {
            kind: model.kind().to_string(),
            dims: Vec::new(),
            weights: Vec::new(),
            a: None,
            biases: None,
            w0: None,
            label: None,
        };
        match model {
            Model::TwoLayerRelu(net) => {
                doc.dims = vec![net.width(), net.dim()];
                doc.weights = vec![to_rows(net.weights())];
                doc.a = Some(net.signs().to_vec());
                doc.w0 = Some(vec![to_rows(net.init_weights())]);
            }
            Model::Mlp(net) => {
                doc.dims = vec![net.input_dim(), net.hidden(), net.classes()];
                doc.weights = net.layers().iter().map(|l| to_rows(*l)).collect();
                doc.biases = Some(vec![net.bias1().to_vec(), net.bias2().to_vec()]);
                doc.w0 = Some(net.init_layers().iter().map(|l| to_rows(*l)).collect());
            }
            Model::Linear(net) => {
                doc.dims = vec![net.input_dim(), net.class_count()];
                doc.weights = vec![to_rows(net.weights())];
                doc.biases = Some(vec![net.bias().to_vec()]);
            }
            Model::Constant(net) => {
                doc.dims = vec![net.input_dim(), net.class_count()];
                doc.label = Some(net.label());
            }
        }
        doc
    }
}

impl TryFrom<ModelDocument> for Model {
    type Error = Error;

    fn try_from(doc: ModelDocument) -> Result<Self> {
        match doc.kind.as_str() {
            "two_layer_relu" => {
                let [p, d] = dims::<2>(&doc)?;
                let w = from_rows(layer(&doc.weights, 0, "weights")?, (p, d), "weights")?;
                let a = vector(doc.a.as_deref().ok_or_else(|| Error::Parse("missing `a`".into()))?, p, "a")?;
                let w0 = match &doc.w0 {
                    Some(layers) => from_rows(layer(layers, 0, "W0")?, (p, d), "W0")?,
                    None => w.clone(),
                };
                Ok(Model::TwoLayerRelu(TwoLayerReluNet::with_init(w, a, w0)?))
            }
            "mlp" => {
                let [d, h, c] = dims::<3>(&doc)?;
                let w1 = from_rows(layer(&doc.weights, 0, "layer 1 weights")?, (h, d), "layer 1")?;
                let w2 = from_rows(layer(&doc.weights, 1, "layer 2 weights")?, (c, h), "layer 2")?;
                let biases = doc.biases.as_deref().ok_or_else(|| Error::Parse("missing `biases`".into()))?;
                let b1 = vector(biases.first().map_or(&[][..], Vec::as_slice), h, "bias 1")?;
                let b2 = vector(biases.get(1).map_or(&[][..], Vec::as_slice), c, "bias 2")?;
                let (i1, i2) = match &doc.w0 {
                    Some(layers) => (
                        from_rows(layer(layers, 0, "W0 layer 1")?, (h, d), "W0 layer 1")?,
                        from_rows(layer(layers, 1, "W0 layer 2")?, (c, h), "W0 layer 2")?,
                    ),
                    None => (w1.clone(), w2.clone()),
                };
                Ok(Model::Mlp(MlpClassifier::with_init(w1, b1, w2, b2, i1, i2)?))
            }
            "linear" => {
                let [d, c] = dims::<2>(&doc)?;
                let w = from_rows(layer(&doc.weights, 0, "weights")?, (c, d), "weights")?;
                let biases = doc.biases.as_deref().ok_or_else(|| Error::Parse("missing `biases`".into()))?;
                let b = vector(biases.first().map_or(&[][..], Vec::as_slice), c, "bias")?;
                Ok(Model::Linear(LinearClassifier::new(w, b)?))
            }
            "constant" => {
                let [d, c] = dims::<2>(&doc)?;
                let label = doc.label.ok_or_else(|| Error::Parse("missing `label`".into()))?;
                Ok(Model::Constant(ConstantClassifier::new(d, c, label)?))
            }
            other => Err(Error::Parse(format!("unknown model kind `{other}`"))),
        }
    }
}
