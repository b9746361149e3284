//! Synthetic data, SGD training, hyperparameter sweeps and their plots.

mod datasets;
mod plot;
mod sweep;
mod training;

pub use datasets::{
    gaussian_mixture_binary, make_synthetic_dataset, theory_dataset, DatasetKind, DatasetSpec, THEORY_CENTER,
    THEORY_COMPONENTS, THEORY_NOISE,
};
pub use plot::{emit_scatter_svg, render_scatter_svg};
pub use sweep::{
    correlate_sweep, read_records_csv, run_cell, run_sweep, write_records_csv, MlpSpec, MixupSpec, RegionSpec,
    SweepCell, SweepConfig, SweepField, SweepRecord, RECORDS_CSV_HEADER,
};
pub use training::{
    cross_entropy_and_gradient, mix_with, mixup_batch, one_hot, train_mlp_sgd, MlpGradient, SgdConfig, SgdOutcome,
};
