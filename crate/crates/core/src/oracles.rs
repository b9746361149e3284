//! Slow, independent reference computations used to cross-check the fast
//! paths: naive flood fill, dense segment scans, finite differences, and a
//! Jacobi eigensolver on explicitly assembled Hessians.

use std::collections::HashMap;

use ndarray::{Array1, Array2, ArrayView1};

use crate::data::LabeledDataset;
use crate::predictor::{Label, MlpClassifier, TwoLayerReluNet};
use crate::subspace::GridSpec;

/// Region count by recursive flood fill, with neighbors found by looking up
/// lattice coordinates in a hash map.
pub fn flood_fill_regions(grid: &GridSpec, labels: &[Label]) -> usize {
    let k = grid.subspace_dim();
    let lookup: HashMap<Vec<u32>, usize> = (0..grid.len()).map(|t| (grid.lattice_coords(t).to_vec(), t)).collect();
    let mut seen = vec![false; grid.len()];

    fn fill(t: usize, grid: &GridSpec, labels: &[Label], lookup: &HashMap<Vec<u32>, usize>, seen: &mut [bool], k: usize) {
        seen[t] = true;
        let here = grid.lattice_coords(t).to_vec();
        for axis in 0..k {
            for delta in [-1i64, 1] {
                let v = here[axis] as i64 + delta;
                if v < 0 {
                    continue;
                }
                let mut there = here.clone();
                there[axis] = v as u32;
                if let Some(&n) = lookup.get(&there) {
                    if !seen[n] && labels[n] == labels[t] {
                        fill(n, grid, labels, lookup, seen, k);
                    }
                }
            }
        }
    }

    let mut regions = 0;
    for t in 0..grid.len() {
        if !seen[t] {
            regions += 1;
            fill(t, grid, labels, &lookup, &mut seen, k);
        }
    }
    regions
}

/// Segment region count of the sign readout by direct evaluation of
/// `f((1 − s)x_a + s x_b)` at `samples` evenly spaced `s ∈ [0, 1]`.
pub fn dense_scan_segment_regions(
    net: &TwoLayerReluNet,
    x_a: ArrayView1<'_, f64>,
    x_b: ArrayView1<'_, f64>,
    samples: usize,
) -> usize {
    let mut previous: Option<bool> = None;
    let mut regions = 1;
    for s in 0..samples {
        let t = s as f64 / (samples - 1) as f64;
        let x: Array1<f64> = &x_a * (1.0 - t) + &x_b * t;
        let mut f = 0.0;
        for i in 0..net.width() {
            let z: f64 = (0..net.dim()).map(|j| net.weights()[[i, j]] * x[j]).sum();
            if z > 0.0 {
                f += net.signs()[i] * z;
            }
        }
        let positive = f > 0.0;
        if let Some(p) = previous {
            if p != positive {
                regions += 1;
            }
        }
        previous = Some(positive);
    }
    regions
}

/// Central finite-difference gradient with step `h`.
pub fn central_difference_gradient(f: impl Fn(&[f64]) -> f64, x: &[f64], h: f64) -> Vec<f64> {
    let mut probe = x.to_vec();
    (0..x.len())
        .map(|i| {
            probe[i] = x[i] + h;
            let up = f(&probe);
            probe[i] = x[i] - h;
            let down = f(&probe);
            probe[i] = x[i];
            (up - down) / (2.0 * h)
        })
        .collect()
}

/// Relative error `‖a − b‖ / max(‖b‖, tiny)`.
pub fn relative_error(a: &[f64], b: &[f64]) -> f64 {
    let diff: f64 = a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt();
    let norm: f64 = b.iter().map(|y| y * y).sum::<f64>().sqrt();
    diff / norm.max(1e-300)
}

/// Quadratic loss with per-sample loops and Neumaier-compensated summation.
pub fn quadratic_loss_compensated(net: &TwoLayerReluNet, dataset: &LabeledDataset) -> f64 {
    let mut sum = 0.0f64;
    let mut comp = 0.0f64;
    for k in 0..dataset.len() {
        let x = dataset.point(k);
        let y = if dataset.labels()[k] == 1 { 1.0 } else { -1.0 };
        let mut f = 0.0;
        for i in 0..net.width() {
            let z: f64 = (0..net.dim()).map(|j| net.weights()[[i, j]] * x[j]).sum();
            if z > 0.0 {
                f += net.signs()[i] * z;
            }
        }
        let term = 0.5 * (y - f) * (y - f);
        let t = sum + term;
        if sum.abs() >= term.abs() {
            comp += (sum - t) + term;
        } else {
            comp += (term - t) + sum;
        }
        sum = t;
    }
    (sum + comp) / dataset.len() as f64
}

/// MLP logits by explicit nested loops.
pub fn naive_mlp_logits(net: &MlpClassifier, x: &[f64]) -> Vec<f64> {
    let (h, d, c) = (net.hidden(), net.input_dim(), net.classes());
    let mut hidden = vec![0.0; h];
    for (i, slot) in hidden.iter_mut().enumerate() {
        let mut z = net.bias1()[i];
        for j in 0..d {
            z += net.layer1()[[i, j]] * x[j];
        }
        *slot = if z > 0.0 { z } else { 0.0 };
    }
    (0..c)
        .map(|o| {
            let mut z = net.bias2()[o];
            for i in 0..h {
                z += net.layer2()[[o, i]] * hidden[i];
            }
            z
        })
        .collect()
}

/// The (p·d)×(p·d) loss Hessian `(1/N) Σ_k [v_i v_jᵀ]_{ij}` with
/// `v_i = a_i σ'(w_iᵀx_k) x_k`, assembled block by block.
pub fn explicit_loss_hessian(net: &TwoLayerReluNet, dataset: &LabeledDataset) -> Array2<f64> {
    let (p, d) = (net.width(), net.dim());
    let mut h = Array2::zeros((p * d, p * d));
    for k in 0..dataset.len() {
        let x = dataset.point(k);
        let v: Vec<Vec<f64>> = (0..p)
            .map(|i| {
                let z: f64 = (0..d).map(|j| net.weights()[[i, j]] * x[j]).sum();
                let gate = if z > 0.0 { net.signs()[i] } else { 0.0 };
                x.iter().map(|&xj| gate * xj).collect()
            })
            .collect();
        for i in 0..p {
            for j in 0..p {
                for a in 0..d {
                    for b in 0..d {
                        h[[i * d + a, j * d + b]] += v[i][a] * v[j][b];
                    }
                }
            }
        }
    }
    h / dataset.len() as f64
}

/// All eigenvalues of a symmetric matrix by cyclic Jacobi rotations,
/// sorted descending.
pub fn jacobi_eigenvalues(matrix: &Array2<f64>) -> Vec<f64> {
    let n = matrix.nrows();
    let mut a = matrix.clone();
    for _sweep in 0..100 {
        let off: f64 = (0..n).flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j))).map(|(i, j)| a[[i, j]].powi(2)).sum();
        let scale: f64 = a.iter().map(|v| v * v).sum();
        if off <= 1e-30 * scale.max(1e-300) {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[[p, q]];
                if apq == 0.0 {
                    continue;
                }
                let theta = (a[[q, q]] - a[[p, p]]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let akp = a[[k, p]];
                    let akq = a[[k, q]];
                    a[[k, p]] = c * akp - s * akq;
                    a[[k, q]] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[[p, k]];
                    let aqk = a[[q, k]];
                    a[[p, k]] = c * apk - s * aqk;
                    a[[q, k]] = s * apk + c * aqk;
                }
            }
        }
    }
    let mut eig: Vec<f64> = (0..n).map(|i| a[[i, i]]).collect();
    eig.sort_by(|x, y| y.total_cmp(x));
    eig
}
