//! Region-count estimation across simplex sources and interpolation ranges.

use ndarray::array;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use regioncount::experiments::{make_synthetic_dataset, train_mlp_sgd, SgdConfig, SweepConfig};
use regioncount::{region_count_estimate, EstimateConfig, LinearClassifier, MlpClassifier, SimplexSource};

fn trained() -> (MlpClassifier, regioncount::LabeledDataset) {
    let (train, _) = make_synthetic_dataset(&SweepConfig::default().dataset).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let init = MlpClassifier::random(2, 64, 2, &mut rng).unwrap();
    let model = train_mlp_sgd(&init, &train, &SgdConfig::new(0.08, 32, 30, 11)).unwrap().model;
    (model, train)
}

#[test]
fn half_plane_segments_never_exceed_two_regions() {
    let (_, train) = trained();
    let model = LinearClassifier::half_space(array![1.0, -0.5].view(), 0.1).unwrap();
    for (lo, hi) in [(0.0, 1.0), (-1.0, 2.0), (-3.0, 4.0)] {
        let config = EstimateConfig::new(1, 200, 3).with_range(lo, hi);
        let est = region_count_estimate(&model, &train, &config).unwrap();
        assert!(est.per_simplex_counts.iter().all(|&c| c == 1 || c == 2));
    }
}

#[test]
fn wider_range_contains_at_least_as_many_half_plane_crossings() {
    let (_, train) = trained();
    let model = LinearClassifier::half_space(array![0.3, 1.0].view(), -0.2).unwrap();
    let narrow = EstimateConfig::new(1, 300, 9);
    let wide = narrow.clone().with_range(-1.0, 2.0);
    let a = region_count_estimate(&model, &train, &narrow).unwrap();
    let b = region_count_estimate(&model, &train, &wide).unwrap();
    for (x, y) in a.per_simplex_counts.iter().zip(&b.per_simplex_counts) {
        assert!(y >= x);
    }
}

#[test]
fn wider_range_raises_mlp_region_count() {
    let (model, train) = trained();
    let narrow = region_count_estimate(&model, &train, &EstimateConfig::new(1, 200, 4)).unwrap();
    let wide =
        region_count_estimate(&model, &train, &EstimateConfig::new(1, 200, 4).with_range(-1.0, 2.0)).unwrap();
    assert!(wide.mean >= narrow.mean, "{} < {}", wide.mean, narrow.mean);
}

#[test]
fn random_direction_source_is_seeded_and_scales_with_length() {
    let (model, train) = trained();
    let config = |length| EstimateConfig::new(1, 200, 6).with_source(SimplexSource::RandomDirection { length });
    let a = region_count_estimate(&model, &train, &config(1.0)).unwrap();
    let b = region_count_estimate(&model, &train, &config(1.0)).unwrap();
    assert_eq!(a, b);
    let short = region_count_estimate(&model, &train, &config(1e-9)).unwrap();
    assert!(short.per_simplex_counts.iter().all(|&c| c <= 2));
    assert!(a.mean >= 1.0);
}

#[test]
fn two_dimensional_estimates_are_deterministic() {
    let (model, train) = trained();
    let config = EstimateConfig::new(2, 40, 8);
    let a = region_count_estimate(&model, &train, &config).unwrap();
    let pool = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
    let b = pool.install(|| region_count_estimate(&model, &train, &config).unwrap());
    assert_eq!(a, b);
    assert!(a.per_simplex_counts.iter().all(|&c| c >= 1));
}
