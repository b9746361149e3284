//! Baseline implicit-bias measures and correlation statistics.

use ndarray::ArrayView2;
use serde::{Deserialize, Serialize};

use crate::data::LabeledDataset;
use crate::error::{Error, Result};
use crate::predictor::{MlpClassifier, Predictor};
use crate::regions::predict_chunked;

/// `sqrt(Σ_layers ‖W − W⁰‖_F²)`.
pub fn frobenius_distance_from_init(current: &[ArrayView2<'_, f64>], init: &[ArrayView2<'_, f64>]) -> Result<f64> {
    if current.len() != init.len() {
        return Err(Error::DimensionMismatch { expected: init.len(), got: current.len() });
    }
    let mut total = 0.0;
    for (w, w0) in current.iter().zip(init) {
        if w.dim() != w0.dim() {
            return Err(Error::InvalidArgument(format!("layer shape {:?} vs init {:?}", w.dim(), w0.dim())));
        }
        total += w.iter().zip(w0.iter()).map(|(a, b)| (a - b) * (a - b)).sum::<f64>();
    }
    Ok(total.sqrt())
}

/// Distance of an MLP's weight matrices from its init snapshot.
pub fn mlp_distance_from_init(net: &MlpClassifier) -> f64 {
    frobenius_distance_from_init(&net.layers(), &net.init_layers()).expect("snapshot shapes match by construction")
}

/// Mean of `logit_y − max_{i≠y} logit_i` over the dataset.
pub fn output_margin(net: &MlpClassifier, dataset: &LabeledDataset) -> Result<f64> {
    if net.classes() < 2 {
        return Err(Error::InvalidArgument("margin needs at least two classes".into()));
    }
    if dataset.labels().iter().any(|&y| y >= net.classes()) {
        return Err(Error::InvalidArgument("dataset label exceeds the model's class count".into()));
    }
    let logits = net.logits_batch(dataset.points())?;
    let total: f64 = logits
        .rows()
        .into_iter()
        .zip(dataset.labels())
        .map(|(row, &y)| {
            let other = row.iter().enumerate().filter(|&(i, _)| i != y).map(|(_, &v)| v).fold(f64::NEG_INFINITY, f64::max);
            row[y] - other
        })
        .sum();
    Ok(total / dataset.len() as f64)
}

/// Fraction of points whose predicted label matches.
pub fn accuracy<P: Predictor + ?Sized>(predictor: &P, dataset: &LabeledDataset) -> Result<f64> {
    let predicted = predict_chunked(predictor, dataset.points())?;
    let hits = predicted.iter().zip(dataset.labels()).filter(|(a, b)| a == b).count();
    Ok(hits as f64 / dataset.len() as f64)
}

/// Training accuracy minus test accuracy.
pub fn generalization_gap(train_accuracy: f64, test_accuracy: f64) -> Result<f64> {
    for (name, v) in [("train", train_accuracy), ("test", test_accuracy)] {
        if !(0.0..=1.0).contains(&v) {
            return Err(Error::InvalidArgument(format!("{name} accuracy {v} outside [0, 1]")));
        }
    }
    Ok(train_accuracy - test_accuracy)
}

fn pearson_named(xs: &[f64], ys: &[f64], x_name: &str, y_name: &str) -> Result<f64> {
    if xs.len() != ys.len() {
        return Err(Error::DimensionMismatch { expected: xs.len(), got: ys.len() });
    }
    if xs.len() < 2 {
        return Err(Error::InvalidArgument(format!("correlation needs n ≥ 2, got {}", xs.len())));
    }
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (&x, &y) in xs.iter().zip(ys) {
        let (dx, dy) = (x - mx, y - my);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if !(sxx > 0.0) {
        return Err(Error::ZeroVariance(x_name.to_string()));
    }
    if !(syy > 0.0) {
        return Err(Error::ZeroVariance(y_name.to_string()));
    }
    Ok((sxy / (sxx.sqrt() * syy.sqrt())).clamp(-1.0, 1.0))
}

/// Sample Pearson correlation coefficient.
pub fn pearson_correlation(xs: &[f64], ys: &[f64]) -> Result<f64> {
    pearson_named(xs, ys, "xs", "ys")
}

/// 1-based ranks; tied values share the average of their ranks.
pub fn average_ranks(values: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut ranks = vec![0.0; values.len()];
    let mut start = 0;
    while start < order.len() {
        let mut end = start + 1;
        while end < order.len() && values[order[end]] == values[order[start]] {
            end += 1;
        }
        let rank = (start + end + 1) as f64 / 2.0;
        for &i in &order[start..end] {
            ranks[i] = rank;
        }
        start = end;
    }
    ranks
}

/// Pearson correlation of the rank vectors.
pub fn spearman_correlation(xs: &[f64], ys: &[f64]) -> Result<f64> {
    if xs.len() != ys.len() {
        return Err(Error::DimensionMismatch { expected: xs.len(), got: ys.len() });
    }
    pearson_named(&average_ranks(xs), &average_ranks(ys), "xs", "ys")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrelationReport {
    pub pearson: f64,
    pub spearman: f64,
    pub n: usize,
    pub x_name: String,
    pub y_name: String,
}

impl CorrelationReport {
    pub fn compute(xs: &[f64], ys: &[f64], x_name: &str, y_name: &str) -> Result<Self> {
        let pearson = pearson_named(xs, ys, x_name, y_name)?;
        let spearman = pearson_named(&average_ranks(xs), &average_ranks(ys), x_name, y_name)?;
        Ok(Self { pearson, spearman, n: xs.len(), x_name: x_name.into(), y_name: y_name.into() })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::{array, Array1, Array2};
    use proptest::prelude::*;

    #[test]
    fn frobenius_examples() {
        let w = array![[1.0, 2.0], [3.0, 4.0]];
        assert_eq!(frobenius_distance_from_init(&[w.view()], &[w.view()]).unwrap(), 0.0);
        let w0 = &w - &array![[3.0, 0.0], [0.0, 4.0]];
        assert_eq!(frobenius_distance_from_init(&[w.view()], &[w0.view()]).unwrap(), 5.0);
        let other = Array2::<f64>::zeros((3, 2));
        assert!(frobenius_distance_from_init(&[w.view()], &[other.view()]).is_err());
    }

    fn diagonal_net(gap: f64) -> MlpClassifier {
        // hidden = ReLU(x), logits = (gap·h0, gap·h1) for x in the positive quadrant
        MlpClassifier::new(Array2::eye(2), Array1::zeros(2), Array2::eye(2) * gap, Array1::zeros(2)).unwrap()
    }

    #[test]
    fn margin_examples() {
        let ds = LabeledDataset::new(array![[1.0, 0.0], [0.0, 1.0]], vec![0, 1], 2).unwrap();
        assert_eq!(output_margin(&diagonal_net(1.0), &ds).unwrap(), 1.0);
        let equal = MlpClassifier::new(Array2::eye(2), Array1::zeros(2), Array2::zeros((2, 2)), Array1::zeros(2)).unwrap();
        assert_eq!(output_margin(&equal, &ds).unwrap(), 0.0);
    }

    #[test]
    fn last_layer_scaling_doubles_margin() {
        let ds = LabeledDataset::new(array![[1.0, 0.2], [0.3, 1.0], [0.5, 0.4]], vec![0, 1, 1], 2).unwrap();
        let net = MlpClassifier::new(
            array![[1.0, -0.5], [0.2, 0.9], [-0.3, 0.4]],
            array![0.1, -0.2, 0.05],
            array![[0.7, -0.1, 0.3], [-0.2, 0.8, 0.5]],
            array![0.0, 0.1],
        )
        .unwrap();
        let doubled = MlpClassifier::new(
            net.layer1().to_owned(),
            net.bias1().to_owned(),
            net.layer2().to_owned() * 2.0,
            net.bias2().to_owned() * 2.0,
        )
        .unwrap();
        let m1 = output_margin(&net, &ds).unwrap();
        let m2 = output_margin(&doubled, &ds).unwrap();
        assert!((m2 - 2.0 * m1).abs() < 1e-12);
        assert_eq!(net.predict_labels(ds.points()).unwrap(), doubled.predict_labels(ds.points()).unwrap());
    }

    #[test]
    fn gap_examples() {
        assert_eq!(generalization_gap(1.0, 1.0).unwrap(), 0.0);
        assert!((generalization_gap(1.0, 0.8).unwrap() - 0.2).abs() < 1e-15);
        assert!((generalization_gap(0.9, 0.95).unwrap() + 0.05).abs() < 1e-15);
        assert!(generalization_gap(1.2, 0.5).is_err());
        assert!(generalization_gap(0.5, -0.1).is_err());
    }

    #[test]
    fn pearson_examples() {
        assert!((pearson_correlation(&[1.0, 2.0, 3.0], &[2.0, 4.0, 6.0]).unwrap() - 1.0).abs() < 1e-15);
        assert!((pearson_correlation(&[1.0, 2.0, 3.0], &[3.0, 2.0, 1.0]).unwrap() + 1.0).abs() < 1e-15);
        // cov = 5/4 · 4/... by hand: dx = (−1.5,−.5,.5,1.5), dy = (−1.5,.5,−.5,1.5): Σdxdy = 4, Σdx² = Σdy² = 5
        assert!((pearson_correlation(&[1.0, 2.0, 3.0, 4.0], &[1.0, 3.0, 2.0, 4.0]).unwrap() - 0.8).abs() < 1e-15);
    }

    #[test]
    fn zero_variance_names_series() {
        match pearson_correlation(&[1.0, 1.0, 1.0], &[1.0, 2.0, 3.0]) {
            Err(Error::ZeroVariance(name)) => assert_eq!(name, "xs"),
            other => panic!("unexpected {other:?}"),
        }
        match CorrelationReport::compute(&[1.0, 2.0], &[3.0, 3.0], "region_mean", "gap") {
            Err(Error::ZeroVariance(name)) => assert_eq!(name, "gap"),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn spearman_examples() {
        assert!((spearman_correlation(&[1.0, 5.0, 9.0], &[0.1, 0.2, 7.0]).unwrap() - 1.0).abs() < 1e-15);
        assert!((spearman_correlation(&[1.0, 5.0, 9.0], &[7.0, 0.2, 0.1]).unwrap() + 1.0).abs() < 1e-15);
        assert!((spearman_correlation(&[1.0, 2.0, 3.0, 4.0], &[1.0, 3.0, 2.0, 4.0]).unwrap() - 0.8).abs() < 1e-15);
    }

    #[test]
    fn ties_get_average_ranks() {
        assert_eq!(average_ranks(&[3.0, 1.0, 3.0, 2.0]), vec![3.5, 1.0, 3.5, 2.0]);
    }

    proptest! {
        #[test]
        fn pearson_of_affine_image(xs in prop::collection::vec(-1e3f64..1e3, 3..40), a in 0.01f64..100.0, b in -10.0f64..10.0) {
            prop_assume!(xs.iter().any(|&x| (x - xs[0]).abs() > 1e-3));
            let ys: Vec<f64> = xs.iter().map(|x| a * x + b).collect();
            prop_assert!((pearson_correlation(&xs, &ys).unwrap() - 1.0).abs() < 1e-12);
        }

        #[test]
        fn correlations_are_symmetric(pairs in prop::collection::vec((-10.0f64..10.0, -10.0f64..10.0), 3..30)) {
            let (xs, ys): (Vec<f64>, Vec<f64>) = pairs.into_iter().unzip();
            if let (Ok(p1), Ok(p2)) = (pearson_correlation(&xs, &ys), pearson_correlation(&ys, &xs)) {
                prop_assert!((p1 - p2).abs() < 1e-15);
                prop_assert!((-1.0..=1.0).contains(&p1));
            }
            if let (Ok(s1), Ok(s2)) = (spearman_correlation(&xs, &ys), spearman_correlation(&ys, &xs)) {
                prop_assert!((s1 - s2).abs() < 1e-15);
            }
        }

        #[test]
        fn frobenius_is_a_metric(vals in prop::collection::vec(-5.0f64..5.0, 36)) {
            let a = Array2::from_shape_vec((3, 4), vals[0..12].to_vec()).unwrap();
            let b = Array2::from_shape_vec((3, 4), vals[12..24].to_vec()).unwrap();
            let c = Array2::from_shape_vec((3, 4), vals[24..36].to_vec()).unwrap();
            let d = |x: &Array2<f64>, y: &Array2<f64>| frobenius_distance_from_init(&[x.view()], &[y.view()]).unwrap();
            prop_assert!(d(&a, &b) >= 0.0);
            prop_assert_eq!(d(&a, &a), 0.0);
            prop_assert_eq!(d(&a, &b), d(&b, &a));
            prop_assert!(d(&a, &c) <= d(&a, &b) + d(&b, &c) + 1e-12);
            if a != b {
                prop_assert!(d(&a, &b) > 0.0);
            }
        }
    }
}
