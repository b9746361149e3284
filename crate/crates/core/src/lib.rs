//! Decision-region analysis for classifiers.
//!
//! * [`subspace`] samples simplices spanned by data points and lays
//!   barycentric lattices over them.
//! * [`regions`] labels those lattices with a [`predictor::Predictor`] and
//!   counts connected same-label components.
//! * [`theory`] trains two-layer ReLU nets with full-batch gradient descent
//!   and checks the active-neuron region bound, the sharpness lower bound and
//!   the chained average-region bound along the trajectory.
//! * [`metrics`] and [`experiments`] run hyperparameter sweeps and correlate
//!   region counts with the generalization gap.

pub mod data;
pub mod error;
pub mod experiments;
pub mod metrics;
pub mod model;
pub mod oracles;
pub mod predictor;
pub mod regions;
pub mod subspace;
pub mod suites;
pub mod theory;

pub use data::LabeledDataset;
pub use error::{Error, Result};
pub use model::Model;
pub use predictor::{ConstantClassifier, Label, LinearClassifier, MlpClassifier, Predictor, TwoLayerReluNet};
pub use regions::{region_count_estimate, EstimateConfig, RegionCountEstimate, SimplexSource};
pub use subspace::{barycentric_grid, GridSpec, Simplex};
