use std::fmt;
use std::io::{Read, Write};
use std::path::Path;
use std::str::FromStr;
use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::datasets::{make_synthetic_dataset, DatasetKind, DatasetSpec};
use super::training::{train_mlp_sgd, SgdConfig};
use crate::data::LabeledDataset;
use crate::error::{Error, Result};
use crate::metrics::{accuracy, generalization_gap, mlp_distance_from_init, output_margin, CorrelationReport};
use crate::predictor::MlpClassifier;
use crate::regions::{region_count_estimate, EstimateConfig};

pub const RECORDS_CSV_HEADER: &str =
    "lr,batch,wd,seed,train_acc,test_acc,gap,region_mean,region_stderr,frob_dist,margin,wall_s,diverged";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MlpSpec {
    pub hidden: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RegionSpec {
    pub k: usize,
    pub n_simplices: usize,
    pub m: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MixupSpec {
    pub alpha: f64,
}

/// A full hyperparameter grid. Serialized as TOML with these field names.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub learning_rates: Vec<f64>,
    pub batch_sizes: Vec<usize>,
    pub weight_decays: Vec<f64>,
    pub seeds: Vec<u64>,
    pub epochs: usize,
    #[serde(default)]
    pub cosine_schedule: bool,
    pub dataset: DatasetSpec,
    pub mlp: MlpSpec,
    pub region: RegionSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mixup: Option<MixupSpec>,
}

impl Default for SweepConfig {
    /// The 4 × 3 × 2 × 5 = 120-cell desk-scale grid on concentric rings.
    fn default() -> Self {
        Self {
            learning_rates: vec![0.005, 0.02, 0.08, 0.32],
            batch_sizes: vec![8, 32, 128],
            weight_decays: vec![0.0, 1e-4],
            seeds: vec![0, 1, 2, 3, 4],
            epochs: 200,
            cosine_schedule: false,
            dataset: DatasetSpec {
                kind: DatasetKind::ConcentricRings,
                n_train: 512,
                n_test: 2048,
                d: 2,
                classes: 2,
                noise: 0.08,
                seed: 0,
            },
            mlp: MlpSpec { hidden: 64 },
            region: RegionSpec { k: 1, n_simplices: 100, m: 200 },
            mixup: None,
        }
    }
}

impl SweepConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let config: Self = toml::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        config.validate()?;
        Ok(config)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_toml_str(&std::fs::read_to_string(path)?)
    }

    pub fn to_toml_string(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Parse(e.to_string()))
    }

    pub fn validate(&self) -> Result<()> {
        if self.learning_rates.is_empty()
            || self.batch_sizes.is_empty()
            || self.weight_decays.is_empty()
            || self.seeds.is_empty()
        {
            return Err(Error::InvalidArgument("every hyperparameter grid must be nonempty".into()));
        }
        if self.learning_rates.iter().any(|&v| !(v > 0.0)) {
            return Err(Error::InvalidArgument("learning rates must be positive".into()));
        }
        if self.weight_decays.iter().any(|&v| !(v >= 0.0)) {
            return Err(Error::InvalidArgument("weight decays must be ≥ 0".into()));
        }
        if self.batch_sizes.iter().any(|&b| b == 0 || b > self.dataset.n_train) {
            return Err(Error::InvalidArgument("batch sizes must be in [1, n_train]".into()));
        }
        if let Some(m) = &self.mixup {
            if !(m.alpha > 0.0) {
                return Err(Error::InvalidArgument("mixup alpha must be positive".into()));
            }
        }
        if self.mlp.hidden == 0 || self.region.n_simplices == 0 || self.region.m < 2 {
            return Err(Error::InvalidArgument("hidden, n_simplices must be ≥ 1 and m ≥ 2".into()));
        }
        self.dataset.validate()
    }

    /// Grid cells in output order: learning rate, then batch, then weight
    /// decay, then seed.
    pub fn cells(&self) -> Vec<SweepCell> {
        let mut cells = Vec::new();
        for &lr in &self.learning_rates {
            for &batch in &self.batch_sizes {
                for &wd in &self.weight_decays {
                    for &seed in &self.seeds {
                        cells.push(SweepCell { lr, batch, wd, seed });
                    }
                }
            }
        }
        cells
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepCell {
    pub lr: f64,
    pub batch: usize,
    pub wd: f64,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRecord {
    pub lr: f64,
    pub batch: usize,
    pub wd: f64,
    pub seed: u64,
    pub train_accuracy: f64,
    pub test_accuracy: f64,
    pub generalization_gap: f64,
    pub region_count_mean: f64,
    pub region_count_stderr: f64,
    pub frobenius_distance: f64,
    pub output_margin: f64,
    pub wall_time_seconds: f64,
    pub diverged: bool,
}

impl SweepRecord {
    fn failed(cell: &SweepCell, wall: f64) -> Self {
        Self {
            lr: cell.lr,
            batch: cell.batch,
            wd: cell.wd,
            seed: cell.seed,
            train_accuracy: f64::NAN,
            test_accuracy: f64::NAN,
            generalization_gap: f64::NAN,
            region_count_mean: f64::NAN,
            region_count_stderr: f64::NAN,
            frobenius_distance: f64::NAN,
            output_margin: f64::NAN,
            wall_time_seconds: wall,
            diverged: true,
        }
    }
}

/// Trains and measures one grid cell. The model init, the shuffling order
/// and the simplex draws are all seeded by the cell's seed.
pub fn run_cell(
    config: &SweepConfig,
    train: &LabeledDataset,
    test: &LabeledDataset,
    cell: &SweepCell,
) -> Result<SweepRecord> {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(cell.seed);
    let init = MlpClassifier::random(train.dim(), config.mlp.hidden, config.dataset.classes, &mut rng)?;
    let sgd = SgdConfig {
        learning_rate: cell.lr,
        batch_size: cell.batch,
        weight_decay: cell.wd,
        epochs: config.epochs,
        seed: cell.seed,
        mixup_alpha: config.mixup.as_ref().map(|m| m.alpha),
        cosine_schedule: config.cosine_schedule,
    };
    let outcome = train_mlp_sgd(&init, train, &sgd)?;
    if outcome.diverged {
        return Ok(SweepRecord::failed(cell, start.elapsed().as_secs_f64()));
    }
    let model = outcome.model;
    let train_accuracy = accuracy(&model, train)?;
    let test_accuracy = accuracy(&model, test)?;
    let estimate = region_count_estimate(
        &model,
        train,
        &EstimateConfig::new(config.region.k, config.region.n_simplices, cell.seed).with_resolution(config.region.m),
    )?;
    Ok(SweepRecord {
        lr: cell.lr,
        batch: cell.batch,
        wd: cell.wd,
        seed: cell.seed,
        train_accuracy,
        test_accuracy,
        generalization_gap: generalization_gap(train_accuracy, test_accuracy)?,
        region_count_mean: estimate.mean,
        region_count_stderr: estimate.std_error,
        frobenius_distance: mlp_distance_from_init(&model),
        output_margin: output_margin(&model, train)?,
        wall_time_seconds: start.elapsed().as_secs_f64(),
        diverged: false,
    })
}

/// Runs every cell (in parallel on the current rayon pool) and returns the
/// records in grid order. A cell that errors is kept as a diverged record.
pub fn run_sweep(config: &SweepConfig) -> Result<Vec<SweepRecord>> {
    config.validate()?;
    let (train, test) = make_synthetic_dataset(&config.dataset)?;
    Ok(config
        .cells()
        .par_iter()
        .map(|cell| {
            run_cell(config, &train, &test, cell).unwrap_or_else(|err| {
                eprintln!("cell lr={} batch={} wd={} seed={} failed: {err}", cell.lr, cell.batch, cell.wd, cell.seed);
                SweepRecord::failed(cell, 0.0)
            })
        })
        .collect())
}

/// Writes the records CSV. With `include_timing = false` the `wall_s`
/// column is written as 0 so identical sweeps produce identical bytes.
pub fn write_records_csv<W: Write>(records: &[SweepRecord], mut out: W, include_timing: bool) -> Result<()> {
    writeln!(out, "{RECORDS_CSV_HEADER}")?;
    for r in records {
        let wall = if include_timing { r.wall_time_seconds } else { 0.0 };
        writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{},{},{},{}",
            r.lr,
            r.batch,
            r.wd,
            r.seed,
            r.train_accuracy,
            r.test_accuracy,
            r.generalization_gap,
            r.region_count_mean,
            r.region_count_stderr,
            r.frobenius_distance,
            r.output_margin,
            wall,
            r.diverged
        )?;
    }
    Ok(())
}

pub fn read_records_csv<R: Read>(reader: R) -> Result<Vec<SweepRecord>> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(reader);
    let headers = rdr.headers()?.clone();
    let column = |name: &str| {
        headers
            .iter()
            .position(|h| h.trim() == name)
            .ok_or_else(|| Error::Parse(format!("records CSV is missing column `{name}`")))
    };
    let names: Vec<&str> = RECORDS_CSV_HEADER.split(',').collect();
    let idx: Vec<usize> = names.iter().map(|n| column(n)).collect::<Result<_>>()?;
    let mut records = Vec::new();
    for (line, row) in rdr.records().enumerate() {
        let row = row?;
        let field = |i: usize| -> Result<&str> {
            row.get(idx[i])
                .map(str::trim)
                .ok_or_else(|| Error::Parse(format!("row {}: missing `{}`", line + 1, names[i])))
        };
        let real = |i: usize| -> Result<f64> {
            field(i)?
                .parse()
                .map_err(|_| Error::Parse(format!("row {}: bad `{}` value", line + 1, names[i])))
        };
        let int = |i: usize| -> Result<u64> {
            field(i)?
                .parse()
                .map_err(|_| Error::Parse(format!("row {}: bad `{}` value", line + 1, names[i])))
        };
        records.push(SweepRecord {
            lr: real(0)?,
            batch: int(1)? as usize,
            wd: real(2)?,
            seed: int(3)?,
            train_accuracy: real(4)?,
            test_accuracy: real(5)?,
            generalization_gap: real(6)?,
            region_count_mean: real(7)?,
            region_count_stderr: real(8)?,
            frobenius_distance: real(9)?,
            output_margin: real(10)?,
            wall_time_seconds: real(11)?,
            diverged: field(12)?
                .parse()
                .map_err(|_| Error::Parse(format!("row {}: bad `diverged` value", line + 1)))?,
        });
    }
    Ok(records)
}

/// A numeric records column, named as in the CSV header.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepField {
    Lr,
    Batch,
    Wd,
    Seed,
    TrainAcc,
    TestAcc,
    Gap,
    RegionMean,
    RegionStderr,
    FrobDist,
    Margin,
    WallS,
}

impl SweepField {
    pub const ALL: [SweepField; 12] = [
        Self::Lr,
        Self::Batch,
        Self::Wd,
        Self::Seed,
        Self::TrainAcc,
        Self::TestAcc,
        Self::Gap,
        Self::RegionMean,
        Self::RegionStderr,
        Self::FrobDist,
        Self::Margin,
        Self::WallS,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Self::Lr => "lr",
            Self::Batch => "batch",
            Self::Wd => "wd",
            Self::Seed => "seed",
            Self::TrainAcc => "train_acc",
            Self::TestAcc => "test_acc",
            Self::Gap => "gap",
            Self::RegionMean => "region_mean",
            Self::RegionStderr => "region_stderr",
            Self::FrobDist => "frob_dist",
            Self::Margin => "margin",
            Self::WallS => "wall_s",
        }
    }

    pub fn value(self, r: &SweepRecord) -> f64 {
        match self {
            Self::Lr => r.lr,
            Self::Batch => r.batch as f64,
            Self::Wd => r.wd,
            Self::Seed => r.seed as f64,
            Self::TrainAcc => r.train_accuracy,
            Self::TestAcc => r.test_accuracy,
            Self::Gap => r.generalization_gap,
            Self::RegionMean => r.region_count_mean,
            Self::RegionStderr => r.region_count_stderr,
            Self::FrobDist => r.frobenius_distance,
            Self::Margin => r.output_margin,
            Self::WallS => r.wall_time_seconds,
        }
    }
}

impl fmt::Display for SweepField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SweepField {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|f| f.name() == s)
            .ok_or_else(|| Error::Parse(format!("unknown records column `{s}`")))
    }
}

/// Pearson and Spearman between two columns over the non-diverged records.
pub fn correlate_sweep(records: &[SweepRecord], x: SweepField, y: SweepField) -> Result<CorrelationReport> {
    let kept: Vec<&SweepRecord> = records.iter().filter(|r| !r.diverged).collect();
    if kept.len() < 2 {
        return Err(Error::InvalidArgument(format!("need ≥ 2 non-diverged records, found {}", kept.len())));
    }
    let xs: Vec<f64> = kept.iter().map(|r| x.value(r)).collect();
    let ys: Vec<f64> = kept.iter().map(|r| y.value(r)).collect();
    CorrelationReport::compute(&xs, &ys, x.name(), y.name())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn record(gap: f64, region: f64) -> SweepRecord {
        SweepRecord {
            lr: 0.1,
            batch: 8,
            wd: 0.0,
            seed: 0,
            train_accuracy: 1.0,
            test_accuracy: 1.0 - gap,
            generalization_gap: gap,
            region_count_mean: region,
            region_count_stderr: 0.1,
            frobenius_distance: 2.0,
            output_margin: 1.0,
            wall_time_seconds: 0.5,
            diverged: false,
        }
    }

    #[test]
    fn default_grid_has_120_cells_in_order() {
        let c = SweepConfig::default();
        let cells = c.cells();
        assert_eq!(cells.len(), 120);
        assert_eq!(cells[0], SweepCell { lr: 0.005, batch: 8, wd: 0.0, seed: 0 });
        assert_eq!(cells[1].seed, 1);
        assert_eq!(cells[5].wd, 1e-4);
        assert_eq!(cells[119], SweepCell { lr: 0.32, batch: 128, wd: 1e-4, seed: 4 });
    }

    #[test]
    fn toml_round_trip_and_unknown_keys() {
        let mut c = SweepConfig::default();
        c.mixup = Some(MixupSpec { alpha: 1.0 });
        let text = c.to_toml_string().unwrap();
        assert_eq!(SweepConfig::from_toml_str(&text).unwrap(), c);
        let bad = text.replace("epochs = 200", "epochs = 200\nmomentum = 0.9");
        assert!(matches!(SweepConfig::from_toml_str(&bad), Err(Error::Parse(_))));
        let bad = text.replace("hidden = 64", "hidden = 64\ndepth = 3");
        assert!(SweepConfig::from_toml_str(&bad).is_err());
    }

    #[test]
    fn identical_gaps_are_degenerate() {
        let records = vec![record(0.1, 2.0), record(0.1, 3.0), record(0.1, 4.0)];
        assert!(matches!(
            correlate_sweep(&records, SweepField::RegionMean, SweepField::Gap),
            Err(Error::ZeroVariance(name)) if name == "gap"
        ));
    }

    #[test]
    fn two_records_are_perfectly_correlated() {
        let records = vec![record(0.1, 2.0), record(0.05, 3.0)];
        let rep = correlate_sweep(&records, SweepField::RegionMean, SweepField::Gap).unwrap();
        assert!((rep.pearson.abs() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn diverged_records_are_excluded() {
        let mut bad = record(0.9, 100.0);
        bad.diverged = true;
        let records = vec![record(0.1, 2.0), bad, record(0.2, 3.0), record(0.3, 5.0)];
        let rep = correlate_sweep(&records, SweepField::RegionMean, SweepField::Gap).unwrap();
        assert_eq!(rep.n, 3);
    }

    #[test]
    fn csv_round_trip() {
        let records = vec![record(0.1, 2.0), record(-0.05, 3.5)];
        let mut buf = Vec::new();
        write_records_csv(&records, &mut buf, true).unwrap();
        assert!(String::from_utf8_lossy(&buf).starts_with(RECORDS_CSV_HEADER));
        assert_eq!(read_records_csv(buf.as_slice()).unwrap(), records);
    }

    #[test]
    fn missing_column_is_a_parse_error() {
        let text = "lr,batch\n0.1,8\n";
        assert!(matches!(read_records_csv(text.as_bytes()), Err(Error::Parse(msg)) if msg.contains("wd")));
    }

    #[test]
    fn field_names_round_trip() {
        for f in SweepField::ALL {
            assert_eq!(f.name().parse::<SweepField>().unwrap(), f);
        }
        assert!("diverged".parse::<SweepField>().is_err());
    }
}
