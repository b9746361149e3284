use std::f64::consts::TAU;
use std::str::FromStr;

use ndarray::Array2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::data::LabeledDataset;
use crate::error::{Error, Result};

/// Radius of the class-0 ring; class c sits at RING_INNER + c·RING_SPACING.
const RING_INNER: f64 = 0.5;
const RING_SPACING: f64 = 0.3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DatasetKind {
    /// One isotropic Gaussian per class, centred on the unit circle.
    GaussianBlobs,
    /// Class `c` on a ring of radius `0.5·(c + 1)`.
    ConcentricRings,
    /// Checkerboard of 0.5-wide cells over `[−1, 1]²`, cell label `(i + j) mod C`.
    XorStripes,
}

impl FromStr for DatasetKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "gaussian_blobs" => Ok(Self::GaussianBlobs),
            "concentric_rings" => Ok(Self::ConcentricRings),
            "xor_stripes" => Ok(Self::XorStripes),
            other => Err(Error::UnknownDatasetKind(other.to_string())),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DatasetSpec {
    pub kind: DatasetKind,
    pub n_train: usize,
    pub n_test: usize,
    pub d: usize,
    pub classes: usize,
    pub noise: f64,
    pub seed: u64,
}

impl DatasetSpec {
    pub fn validate(&self) -> Result<()> {
        if self.n_train == 0 || self.n_test == 0 {
            return Err(Error::InvalidArgument("n_train and n_test must be ≥ 1".into()));
        }
        if self.d == 0 {
            return Err(Error::InvalidArgument("d must be ≥ 1".into()));
        }
        if self.classes < 2 {
            return Err(Error::InvalidArgument("classes must be ≥ 2".into()));
        }
        if !(self.noise >= 0.0) || !self.noise.is_finite() {
            return Err(Error::InvalidArgument(format!("noise must be ≥ 0, got {}", self.noise)));
        }
        Ok(())
    }
}

fn gaussian<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    StandardNormal.sample(rng)
}

fn draw<R: Rng + ?Sized>(kind: DatasetKind, d: usize, classes: usize, noise: f64, rng: &mut R) -> (Vec<f64>, usize) {
    let mut x = vec![0.0; d];
    let label;
    match kind {
        DatasetKind::GaussianBlobs => {
            label = rng.random_range(0..classes);
            let angle = TAU * label as f64 / classes as f64;
            x[0] = angle.cos();
            if d > 1 {
                x[1] = angle.sin();
            }
        }
        DatasetKind::ConcentricRings => {
            label = rng.random_range(0..classes);
            let radius = RING_INNER + RING_SPACING * label as f64;
            let angle = rng.random_range(0.0..TAU);
            x[0] = radius * angle.cos();
            if d > 1 {
                x[1] = radius * angle.sin();
            }
        }
        DatasetKind::XorStripes => {
            for v in x.iter_mut() {
                *v = rng.random_range(-1.0..1.0);
            }
            let cell = |v: f64| ((v + 1.0) * 2.0).floor().clamp(0.0, 3.0) as usize;
            let sum = cell(x[0]) + if d > 1 { cell(x[1]) } else { 0 };
            label = sum % classes;
        }
    }
    if noise > 0.0 {
        for v in x.iter_mut() {
            *v += noise * gaussian(rng);
        }
    }
    (x, label)
}

fn draw_dataset<R: Rng + ?Sized>(
    kind: DatasetKind,
    n: usize,
    d: usize,
    classes: usize,
    noise: f64,
    rng: &mut R,
) -> Result<LabeledDataset> {
    let mut values = Vec::with_capacity(n * d);
    let mut labels = Vec::with_capacity(n);
    while labels.len() < n {
        let (x, label) = draw(kind, d, classes, noise, rng);
        if x.iter().all(|&v| v == 0.0) {
            continue;
        }
        values.extend(x);
        labels.push(label);
    }
    let points = Array2::from_shape_vec((n, d), values).map_err(|e| Error::InvalidArgument(e.to_string()))?;
    LabeledDataset::new(points, labels, classes)
}

/// Train and test sets drawn independently from the same law. Train uses
/// stream 0 of the seed's generator and test uses stream 1.
pub fn make_synthetic_dataset(spec: &DatasetSpec) -> Result<(LabeledDataset, LabeledDataset)> {
    spec.validate()?;
    let mut train_rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut test_rng = ChaCha8Rng::seed_from_u64(spec.seed);
    test_rng.set_stream(1);
    let train = draw_dataset(spec.kind, spec.n_train, spec.d, spec.classes, spec.noise, &mut train_rng)?;
    let test = draw_dataset(spec.kind, spec.n_test, spec.d, spec.classes, spec.noise, &mut test_rng)?;
    Ok((train, test))
}

/// Binary Gaussian mixture in the plane: `components` means spaced on the
/// unit circle around `center`, with alternating labels. Every point has
/// nonzero norm.
pub fn gaussian_mixture_binary(
    n: usize,
    components: usize,
    center: [f64; 2],
    noise: f64,
    seed: u64,
) -> Result<LabeledDataset> {
    if components < 2 || components % 2 != 0 {
        return Err(Error::InvalidArgument("components must be even and ≥ 2".into()));
    }
    if n == 0 {
        return Err(Error::InvalidArgument("n must be ≥ 1".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut values = Vec::with_capacity(2 * n);
    let mut labels = Vec::with_capacity(n);
    while labels.len() < n {
        let j = rng.random_range(0..components);
        let angle = TAU * j as f64 / components as f64;
        let x = center[0] + angle.cos() + noise * gaussian(&mut rng);
        let y = center[1] + angle.sin() + noise * gaussian(&mut rng);
        if x == 0.0 && y == 0.0 {
            continue;
        }
        values.extend([x, y]);
        labels.push(j % 2);
    }
    let points = Array2::from_shape_vec((n, 2), values).map_err(|e| Error::InvalidArgument(e.to_string()))?;
    LabeledDataset::new(points, labels, 2)
}

pub const THEORY_COMPONENTS: usize = 8;
pub const THEORY_CENTER: [f64; 2] = [2.0, 0.0];
pub const THEORY_NOISE: f64 = 0.35;

/// Default dataset for two-layer theory runs. The mixture sits off the
/// origin, so a first-layer unit can switch off on every sample.
pub fn theory_dataset(n: usize, seed: u64) -> Result<LabeledDataset> {
    gaussian_mixture_binary(n, THEORY_COMPONENTS, THEORY_CENTER, THEORY_NOISE, seed)
}
