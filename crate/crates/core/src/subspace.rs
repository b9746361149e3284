//! Simplices spanned by data points and barycentric lattices over them.

use ndarray::{Array2, ArrayView2};
use rand::seq::index;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::data::{canonical_bits, LabeledDataset};
use crate::error::{Error, Result};

pub const MAX_SUBSPACE_DIM: usize = 5;
const MAX_RESAMPLE: usize = 100;

/// Per-axis resolution that keeps each lattice near its converged count.
pub fn default_resolution(k: usize) -> usize {
    match k {
        1 => 200,
        2 => 30,
        3 => 15,
        4 => 10,
        _ => 8,
    }
}

/// `k + 1` affinely spanning vertices, stored as rows.
#[derive(Debug, Clone, PartialEq)]
pub struct Simplex {
    vertices: Array2<f64>,
}

impl Simplex {
    pub fn new(vertices: Array2<f64>) -> Result<Self> {
        let k = vertices.nrows().saturating_sub(1);
        if k == 0 || k > MAX_SUBSPACE_DIM {
            return Err(Error::InvalidArgument(format!(
                "simplex needs between 2 and {} vertices, got {}",
                MAX_SUBSPACE_DIM + 1,
                vertices.nrows()
            )));
        }
        if k > vertices.ncols() {
            return Err(Error::InvalidArgument(format!(
                "subspace dimension {k} exceeds ambient dimension {}",
                vertices.ncols()
            )));
        }
        if !rows_distinct(vertices.view()) {
            return Err(Error::InvalidArgument("simplex vertices must be pairwise distinct".into()));
        }
        Ok(Self { vertices })
    }

    pub fn subspace_dim(&self) -> usize {
        self.vertices.nrows() - 1
    }

    pub fn ambient_dim(&self) -> usize {
        self.vertices.ncols()
    }

    pub fn vertices(&self) -> ArrayView2<'_, f64> {
        self.vertices.view()
    }
}

fn rows_distinct(m: ArrayView2<'_, f64>) -> bool {
    let keys: Vec<Vec<u64>> =
        m.rows().into_iter().map(|r| r.iter().map(|v| canonical_bits(*v)).collect()).collect();
    for i in 0..keys.len() {
        for j in 0..i {
            if keys[i] == keys[j] {
                return false;
            }
        }
    }
    true
}

fn check_subspace_dim(k: usize, d: usize) -> Result<()> {
    if k == 0 || k > MAX_SUBSPACE_DIM.min(d) {
        return Err(Error::InvalidArgument(format!(
            "subspace dimension must be in [1, {}], got {k}",
            MAX_SUBSPACE_DIM.min(d)
        )));
    }
    Ok(())
}

/// Draws `k + 1` dataset points uniformly without replacement, resampling
/// while any two coincide.
pub fn sample_simplex<R: Rng + ?Sized>(dataset: &LabeledDataset, k: usize, rng: &mut R) -> Result<Simplex> {
    check_subspace_dim(k, dataset.dim())?;
    let needed = k + 1;
    if dataset.len() < needed {
        return Err(Error::NotEnoughDistinctPoints { needed, retries: 0 });
    }
    for _ in 0..MAX_RESAMPLE {
        let picks = index::sample(rng, dataset.len(), needed);
        let mut vertices = Array2::zeros((needed, dataset.dim()));
        for (row, i) in picks.iter().enumerate() {
            vertices.row_mut(row).assign(&dataset.point(i));
        }
        if rows_distinct(vertices.view()) {
            return Ok(Simplex { vertices });
        }
    }
    Err(Error::NotEnoughDistinctPoints { needed, retries: MAX_RESAMPLE })
}

/// One dataset point plus `k` further vertices at distance `length` along
/// independent uniformly random directions.
pub fn sample_direction_simplex<R: Rng + ?Sized>(
    dataset: &LabeledDataset,
    k: usize,
    length: f64,
    rng: &mut R,
) -> Result<Simplex> {
    check_subspace_dim(k, dataset.dim())?;
    if !(length > 0.0) || !length.is_finite() {
        return Err(Error::InvalidArgument(format!("direction length must be positive, got {length}")));
    }
    let d = dataset.dim();
    let anchor = dataset.point(rng.random_range(0..dataset.len()));
    let mut vertices = Array2::zeros((k + 1, d));
    vertices.row_mut(k).assign(&anchor);
    for i in 0..k {
        let mut dir: Vec<f64> = (0..d).map(|_| StandardNormal.sample(rng)).collect();
        let norm = dir.iter().map(|v| v * v).sum::<f64>().sqrt();
        if norm == 0.0 {
            dir[0] = 1.0;
        } else {
            dir.iter_mut().for_each(|v| *v /= norm);
        }
        for j in 0..d {
            vertices[[i, j]] = anchor[j] + length * dir[j];
        }
    }
    Simplex::new(vertices)
}

/// A filtered uniform lattice of barycentric parameter tuples.
///
/// Tuple `t` holds `(α_1, …, α_k)` and addresses the point
/// `Σ α_i v_i + (1 − Σ α_i) v_{k+1}`. Each axis carries `m` values evenly
/// spaced over `[low, high]`; a tuple is kept iff `Σ α_i ≤ high`. For the
/// default range `[0, 1]` this is exactly the closed simplex. Tuples are in
/// lexicographic order of their integer lattice coordinates (axis 0 slowest).
#[derive(Debug, Clone, PartialEq)]
pub struct GridSpec {
    subspace_dim: usize,
    resolution: usize,
    range_low: f64,
    range_high: f64,
    coords: Vec<u32>,
    params: Array2<f64>,
    adjacency_offsets: Vec<usize>,
    adjacency: Vec<u32>,
}

impl GridSpec {
    pub fn subspace_dim(&self) -> usize {
        self.subspace_dim
    }

    pub fn resolution(&self) -> usize {
        self.resolution
    }

    pub fn range(&self) -> (f64, f64) {
        (self.range_low, self.range_high)
    }

    pub fn len(&self) -> usize {
        self.params.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn spacing(&self) -> f64 {
        (self.range_high - self.range_low) / (self.resolution - 1) as f64
    }

    /// M×k matrix of parameter tuples.
    pub fn parameter_tuples(&self) -> ArrayView2<'_, f64> {
        self.params.view()
    }

    /// Integer lattice coordinates of tuple `t` (one per axis, in `0..m`).
    pub fn lattice_coords(&self, t: usize) -> &[u32] {
        &self.coords[t * self.subspace_dim..(t + 1) * self.subspace_dim]
    }

    /// Tuples one lattice step away from `t` along a single axis.
    pub fn neighbors(&self, t: usize) -> &[u32] {
        &self.adjacency[self.adjacency_offsets[t]..self.adjacency_offsets[t + 1]]
    }
}

/// Builds the lattice described on [`GridSpec`].
pub fn barycentric_grid(k: usize, m: usize, range_low: f64, range_high: f64) -> Result<GridSpec> {
    if m < 2 {
        return Err(Error::InvalidArgument(format!("grid resolution must be ≥ 2, got {m}")));
    }
    if k == 0 || k > MAX_SUBSPACE_DIM {
        return Err(Error::InvalidArgument(format!("subspace dimension must be in [1, {MAX_SUBSPACE_DIM}], got {k}")));
    }
    if !(range_low < range_high) || !range_low.is_finite() || !range_high.is_finite() {
        return Err(Error::InvalidArgument(format!("invalid range [{range_low}, {range_high}]")));
    }
    if (m as f64).powi(k as i32) > 5.0e7 {
        return Err(Error::InvalidArgument(format!("lattice {m}^{k} is too large")));
    }
    let steps = (m - 1) as f64;
    let width = range_high - range_low;
    // Σα ≤ high  ⟺  Σ i_j ≤ (high − k·low)(m − 1)/(high − low)
    let budget_real = (range_high - k as f64 * range_low) * steps / width;
    if budget_real < -1e-9 {
        return Err(Error::InvalidArgument("range admits no lattice points".into()));
    }
    let budget = (budget_real + 1e-9).floor() as usize;

    let mut coords = Vec::new();
    let mut current = vec![0u32; k];
    enumerate(&mut current, 0, m, budget, &mut coords);
    let count = coords.len() / k;

    let mut params = Array2::zeros((count, k));
    for t in 0..count {
        for j in 0..k {
            let i = coords[t * k + j] as f64;
            params[[t, j]] = range_low + width * (i / steps);
        }
    }

    // Dense position map over the full m^k box for neighbor lookup.
    let strides: Vec<usize> = (0..k).map(|j| m.pow((k - 1 - j) as u32)).collect();
    let mut position = vec![u32::MAX; m.pow(k as u32)];
    for t in 0..count {
        let flat: usize = (0..k).map(|j| coords[t * k + j] as usize * strides[j]).sum();
        position[flat] = t as u32;
    }
    let mut adjacency_offsets = Vec::with_capacity(count + 1);
    let mut adjacency = Vec::with_capacity(count * 2 * k);
    adjacency_offsets.push(0);
    for t in 0..count {
        let flat: usize = (0..k).map(|j| coords[t * k + j] as usize * strides[j]).sum();
        for j in 0..k {
            let c = coords[t * k + j] as usize;
            if c > 0 && position[flat - strides[j]] != u32::MAX {
                adjacency.push(position[flat - strides[j]]);
            }
            if c + 1 < m && position[flat + strides[j]] != u32::MAX {
                adjacency.push(position[flat + strides[j]]);
            }
        }
        adjacency_offsets.push(adjacency.len());
    }

    Ok(GridSpec {
        subspace_dim: k,
        resolution: m,
        range_low,
        range_high,
        coords,
        params,
        adjacency_offsets,
        adjacency,
    })
}

fn enumerate(current: &mut [u32], axis: usize, m: usize, budget: usize, out: &mut Vec<u32>) {
    if axis == current.len() {
        out.extend_from_slice(current);
        return;
    }
    for i in 0..m.min(budget + 1) {
        current[axis] = i as u32;
        enumerate(current, axis + 1, m, budget - i, out);
    }
}

/// Maps every parameter tuple of `grid` into input space.
pub fn grid_to_points(simplex: &Simplex, grid: &GridSpec) -> Result<Array2<f64>> {
    if simplex.subspace_dim() != grid.subspace_dim() {
        return Err(Error::DimensionMismatch { expected: grid.subspace_dim(), got: simplex.subspace_dim() });
    }
    Ok(lattice_points(simplex.vertices(), grid.parameter_tuples()))
}

/// Row t = Σ_i α_ti v_i + (1 − Σ_i α_ti) v_last. No validation of the vertices.
pub(crate) fn lattice_points(vertices: ArrayView2<'_, f64>, params: ArrayView2<'_, f64>) -> Array2<f64> {
    let k = params.ncols();
    let d = vertices.ncols();
    let last = vertices.row(k);
    let mut out = Array2::zeros((params.nrows(), d));
    for (alpha, mut row) in params.rows().into_iter().zip(out.rows_mut()) {
        let rest = 1.0 - alpha.sum();
        for j in 0..d {
            let mut v = rest * last[j];
            for i in 0..k {
                v += alpha[i] * vertices[[i, j]];
            }
            row[j] = v;
        }
    }
    out
}
