//! Decision-region counting on barycentric lattices.

use std::collections::VecDeque;

use ndarray::{Array2, ArrayView1, ArrayView2};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::data::LabeledDataset;
use crate::error::{Error, Result};
use crate::predictor::{Label, Predictor};
use crate::subspace::{
    barycentric_grid, grid_to_points, lattice_points, sample_direction_simplex, sample_simplex, GridSpec, Simplex,
};

/// Rows handed to the predictor per call.
const PREDICT_CHUNK: usize = 4096;

/// A predictor's labels on every tuple of a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct LabelGrid<'g> {
    grid: &'g GridSpec,
    labels: Vec<Label>,
}

impl<'g> LabelGrid<'g> {
    pub fn new(grid: &'g GridSpec, labels: Vec<Label>) -> Result<Self> {
        if labels.len() != grid.len() {
            return Err(Error::DimensionMismatch { expected: grid.len(), got: labels.len() });
        }
        Ok(Self { grid, labels })
    }

    pub fn grid(&self) -> &GridSpec {
        self.grid
    }

    pub fn labels(&self) -> &[Label] {
        &self.labels
    }
}

pub(crate) fn predict_chunked<P: Predictor + ?Sized>(predictor: &P, points: ArrayView2<'_, f64>) -> Result<Vec<Label>> {
    if points.nrows() <= PREDICT_CHUNK {
        return predictor.predict_labels(points);
    }
    let mut labels = Vec::with_capacity(points.nrows());
    for chunk in points.axis_chunks_iter(ndarray::Axis(0), PREDICT_CHUNK) {
        labels.extend(predictor.predict_labels(chunk)?);
    }
    Ok(labels)
}

pub fn label_grid<'g, P: Predictor + ?Sized>(
    predictor: &P,
    simplex: &Simplex,
    grid: &'g GridSpec,
) -> Result<LabelGrid<'g>> {
    if predictor.input_dim() != simplex.ambient_dim() {
        return Err(Error::DimensionMismatch { expected: predictor.input_dim(), got: simplex.ambient_dim() });
    }
    let points = grid_to_points(simplex, grid)?;
    LabelGrid::new(grid, predict_chunked(predictor, points.view())?)
}

/// Number of maximal equal-label components under axis adjacency.
///
/// Breadth-first flood fill: every unvisited tuple seeds a new component and
/// the queue absorbs all same-label neighbors.
pub fn count_connected_regions(lg: &LabelGrid<'_>) -> usize {
    let n = lg.labels.len();
    let mut visited = vec![false; n];
    let mut queue = VecDeque::new();
    let mut regions = 0;
    for start in 0..n {
        if visited[start] {
            continue;
        }
        visited[start] = true;
        queue.push_back(start);
        let label = lg.labels[start];
        while let Some(t) = queue.pop_front() {
            for &nb in lg.grid.neighbors(t) {
                let nb = nb as usize;
                if !visited[nb] && lg.labels[nb] == label {
                    visited[nb] = true;
                    queue.push_back(nb);
                }
            }
        }
        regions += 1;
    }
    regions
}

/// Reusable 1D lattice for segment counting; same parameters as
/// `barycentric_grid(1, m, 0, 1)`.
#[derive(Debug, Clone)]
pub struct SegmentCounter {
    params: Array2<f64>,
}

impl SegmentCounter {
    pub fn new(m: usize) -> Result<Self> {
        if m < 2 {
            return Err(Error::InvalidArgument(format!("segment resolution must be ≥ 2, got {m}")));
        }
        let steps = (m - 1) as f64;
        Ok(Self { params: Array2::from_shape_fn((m, 1), |(i, _)| i as f64 / steps) })
    }

    pub fn resolution(&self) -> usize {
        self.params.nrows()
    }

    /// `1 +` the number of label changes between consecutive lattice points.
    pub fn count<P: Predictor + ?Sized>(
        &self,
        predictor: &P,
        x_a: ArrayView1<'_, f64>,
        x_b: ArrayView1<'_, f64>,
    ) -> Result<usize> {
        let d = predictor.input_dim();
        for got in [x_a.len(), x_b.len()] {
            if got != d {
                return Err(Error::DimensionMismatch { expected: d, got });
            }
        }
        let mut vertices = Array2::zeros((2, d));
        vertices.row_mut(0).assign(&x_a);
        vertices.row_mut(1).assign(&x_b);
        let points = lattice_points(vertices.view(), self.params.view());
        let labels = predict_chunked(predictor, points.view())?;
        Ok(1 + labels.windows(2).filter(|w| w[0] != w[1]).count())
    }
}

/// Region count along the segment between `x_a` and `x_b` on an `m`-point lattice.
pub fn count_segment_regions<P: Predictor + ?Sized>(
    predictor: &P,
    x_a: ArrayView1<'_, f64>,
    x_b: ArrayView1<'_, f64>,
    m: usize,
) -> Result<usize> {
    SegmentCounter::new(m)?.count(predictor, x_a, x_b)
}

/// Where simplex vertices come from.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum SimplexSource {
    /// `k + 1` distinct points of the supplied dataset.
    DatasetPoints,
    /// One dataset point extended along `k` random directions.
    RandomDirection { length: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct EstimateConfig {
    pub k: usize,
    pub n_simplices: usize,
    pub resolution: usize,
    pub range_low: f64,
    pub range_high: f64,
    pub seed: u64,
    pub source: SimplexSource,
}

impl EstimateConfig {
    /// Default lattice for `k` over the closed simplex.
    pub fn new(k: usize, n_simplices: usize, seed: u64) -> Self {
        Self {
            k,
            n_simplices,
            resolution: crate::subspace::default_resolution(k),
            range_low: 0.0,
            range_high: 1.0,
            seed,
            source: SimplexSource::DatasetPoints,
        }
    }

    pub fn with_resolution(mut self, m: usize) -> Self {
        self.resolution = m;
        self
    }

    pub fn with_range(mut self, low: f64, high: f64) -> Self {
        self.range_low = low;
        self.range_high = high;
        self
    }

    pub fn with_source(mut self, source: SimplexSource) -> Self {
        self.source = source;
        self
    }
}

/// Generator for simplex `index`: the seed's ChaCha stream number `index`.
pub fn simplex_rng(seed: u64, index: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index as u64);
    rng
}

pub fn sample_for_index(dataset: &LabeledDataset, config: &EstimateConfig, index: usize) -> Result<Simplex> {
    let mut rng = simplex_rng(config.seed, index);
    match config.source {
        SimplexSource::DatasetPoints => sample_simplex(dataset, config.k, &mut rng),
        SimplexSource::RandomDirection { length } => sample_direction_simplex(dataset, config.k, length, &mut rng),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegionCountEstimate {
    pub mean: f64,
    pub std_error: f64,
    #[serde(rename = "n")]
    pub n_simplices: usize,
    pub k: usize,
    pub m: usize,
    pub range: [f64; 2],
    pub seed: u64,
    pub per_simplex_counts: Vec<usize>,
}

impl RegionCountEstimate {
    pub fn from_counts(counts: Vec<usize>, config: &EstimateConfig) -> Result<Self> {
        if counts.is_empty() {
            return Err(Error::InvalidArgument("no simplices counted".into()));
        }
        let n = counts.len() as f64;
        let mean = counts.iter().map(|&c| c as f64).sum::<f64>() / n;
        let std_error = if counts.len() > 1 {
            let var = counts.iter().map(|&c| (c as f64 - mean).powi(2)).sum::<f64>() / (n - 1.0);
            (var / n).sqrt()
        } else {
            0.0
        };
        Ok(Self {
            mean,
            std_error,
            n_simplices: counts.len(),
            k: config.k,
            m: config.resolution,
            range: [config.range_low, config.range_high],
            seed: config.seed,
            per_simplex_counts: counts,
        })
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(self)?)
    }

    pub const CSV_HEADER: &'static str = "mean,std_error,n,k,m,range_low,range_high,seed";

    pub fn to_csv_row(&self) -> String {
        format!(
            "{:?},{:?},{},{},{},{:?},{:?},{}",
            self.mean, self.std_error, self.n_simplices, self.k, self.m, self.range[0], self.range[1], self.seed
        )
    }
}

/// Monte Carlo estimate of the expected region count over random simplices.
///
/// Simplices are counted in parallel on the current rayon pool. Simplex `i`
/// is drawn from its own generator stream, so the result does not depend on
/// the number of workers.
pub fn region_count_estimate<P: Predictor + ?Sized>(
    predictor: &P,
    dataset: &LabeledDataset,
    config: &EstimateConfig,
) -> Result<RegionCountEstimate> {
    if config.n_simplices == 0 {
        return Err(Error::InvalidArgument("n_simplices must be ≥ 1".into()));
    }
    if predictor.input_dim() != dataset.dim() {
        return Err(Error::DimensionMismatch { expected: predictor.input_dim(), got: dataset.dim() });
    }
    let grid = barycentric_grid(config.k, config.resolution, config.range_low, config.range_high)?;
    let counts = per_simplex_counts(predictor, dataset, config, &grid)?;
    RegionCountEstimate::from_counts(counts, config)
}

pub fn per_simplex_counts<P: Predictor + ?Sized>(
    predictor: &P,
    dataset: &LabeledDataset,
    config: &EstimateConfig,
    grid: &GridSpec,
) -> Result<Vec<usize>> {
    (0..config.n_simplices)
        .into_par_iter()
        .map(|i| {
            let simplex = sample_for_index(dataset, config, i)?;
            let lg = label_grid(predictor, &simplex, grid)?;
            Ok(count_connected_regions(&lg))
        })
        .collect()
}
