//! Robustness protocol: corrupted-test-set sweeps, descriptor and
//! architecture comparisons, and the clean-vs-outlier signal analysis.
//! Results are plain tables; writing them to disk is left to the caller.

mod analysis;
mod table;

#[cfg(test)]
mod tests;

use alloc::string::{String, ToString};
use alloc::vec::Vec;
use num_traits::Float;

use crate::datasets::LabeledDataset;
use crate::error::{invalid, Result};
use crate::geometry::{fit_to_unit_ball, AugmentationConfig, BallFit, PointCloud};
use crate::net::{train_with, Classifier, EpochStats, FeatureMode, Model, NetConfig, TrainConfig};
use crate::rng::{derive_seed, tag};
use crate::sht::DescriptorKind;
use crate::voxelizer::OccupancyMode;

pub use analysis::{run_ift_signal_analysis, AnalysisConfig, DifferenceStats, SignalAnalysis};
pub use table::{ResultRow, ResultTable, Table};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepAxis {
    OutlierFraction,
    NoiseSigma,
    DropoutFraction,
    ClusteredOutliers,
}

impl SweepAxis {
    pub fn name(self) -> &'static str {
        match self {
            SweepAxis::OutlierFraction => "outlier_fraction",
            SweepAxis::NoiseSigma => "noise_sigma",
            SweepAxis::DropoutFraction => "dropout_fraction",
            SweepAxis::ClusteredOutliers => "clustered_outliers",
        }
    }

    pub fn from_name(name: &str) -> Result<Self> {
        [Self::OutlierFraction, Self::NoiseSigma, Self::DropoutFraction, Self::ClusteredOutliers]
            .into_iter()
            .find(|a| a.name() == name)
            .ok_or_else(|| invalid(alloc::format!("unknown sweep axis {name}")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub enum SweepLevel {
    Value(f64),
    Clustered { fraction: f64, cluster_size: usize, sigma: f64 },
}

/// One named corruption of the test set.
#[derive(Debug, Clone, PartialEq)]
pub struct Condition {
    pub label: String,
    pub augmentation: AugmentationConfig,
}

impl Condition {
    pub fn new(label: impl Into<String>, augmentation: AugmentationConfig) -> Self {
        Condition { label: label.into(), augmentation }
    }
}

/// Clean, 80% dropout, noise 0.10 and 50% uniform outliers.
pub fn standard_conditions() -> Vec<Condition> {
    alloc::vec![
        Condition::new("clean", AugmentationConfig::none()),
        Condition::new("dropout=0.80", AugmentationConfig::dropout(0.8, 0)),
        Condition::new("noise=0.10", AugmentationConfig::noise(0.10, 0)),
        Condition::new("outliers=0.50", AugmentationConfig::uniform_outliers(0.5, 0)),
    ]
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub axis: SweepAxis,
    pub levels: Vec<SweepLevel>,
    pub trials: usize,
    pub seed: u64,
    pub ball_fit: BallFit,
}

impl SweepSpec {
    pub fn new(axis: SweepAxis, levels: Vec<SweepLevel>, trials: usize, seed: u64) -> Result<Self> {
        let spec = SweepSpec { axis, levels, trials, seed, ball_fit: BallFit::default() };
        spec.validate()?;
        Ok(spec)
    }

    /// Scalar levels for the uniform-outlier, noise and dropout axes.
    pub fn scalar(axis: SweepAxis, levels: &[f64], trials: usize, seed: u64) -> Result<Self> {
        Self::new(axis, levels.iter().map(|&v| SweepLevel::Value(v)).collect(), trials, seed)
    }

    /// Default levels per axis: outliers 0..0.5, noise 0..0.10, dropout
    /// 0..0.9, and the three clustered-outlier settings.
    pub fn preset(axis: SweepAxis, trials: usize, seed: u64) -> Result<Self> {
        match axis {
            SweepAxis::OutlierFraction => Self::scalar(axis, &[0.0, 0.1, 0.2, 0.3, 0.4, 0.5], trials, seed),
            SweepAxis::NoiseSigma => Self::scalar(axis, &[0.0, 0.02, 0.04, 0.06, 0.08, 0.10], trials, seed),
            SweepAxis::DropoutFraction => {
                Self::scalar(axis, &[0.0, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9], trials, seed)
            }
            SweepAxis::ClusteredOutliers => Self::new(
                axis,
                alloc::vec![
                    SweepLevel::Clustered { fraction: 0.10, cluster_size: 10, sigma: 0.04 },
                    SweepLevel::Clustered { fraction: 0.10, cluster_size: 10, sigma: 0.06 },
                    SweepLevel::Clustered { fraction: 0.20, cluster_size: 20, sigma: 0.04 },
                ],
                trials,
                seed,
            ),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.levels.is_empty() {
            return Err(invalid("sweep needs at least one level"));
        }
        if self.trials < 3 {
            return Err(invalid("sweeps average at least 3 trials"));
        }
        if self.levels.windows(2).any(|w| !(w[0] <= w[1])) {
            return Err(invalid("sweep levels must be sorted ascending"));
        }
        for level in &self.levels {
            let clustered = matches!(level, SweepLevel::Clustered { .. });
            if clustered != (self.axis == SweepAxis::ClusteredOutliers) {
                return Err(invalid("clustered levels belong to the clustered_outliers axis only"));
            }
            self.condition(level).augmentation.validate()?;
        }
        Ok(())
    }

    pub fn condition(&self, level: &SweepLevel) -> Condition {
        match (*level, self.axis) {
            (SweepLevel::Value(v), SweepAxis::OutlierFraction) => {
                Condition::new(alloc::format!("outliers={v:.2}"), AugmentationConfig::uniform_outliers(v, 0))
            }
            (SweepLevel::Value(v), SweepAxis::NoiseSigma) => {
                Condition::new(alloc::format!("noise={v:.2}"), AugmentationConfig::noise(v, 0))
            }
            (SweepLevel::Value(v), SweepAxis::DropoutFraction) => {
                Condition::new(alloc::format!("dropout={v:.2}"), AugmentationConfig::dropout(v, 0))
            }
            (SweepLevel::Clustered { fraction, cluster_size, sigma }, _) => Condition::new(
                alloc::format!("clustered={fraction:.2}/{cluster_size}p/sigma{sigma:.2}"),
                AugmentationConfig::clustered_outliers(fraction, cluster_size, sigma, 0),
            ),
            (SweepLevel::Value(v), SweepAxis::ClusteredOutliers) => {
                Condition::new(alloc::format!("invalid={v}"), AugmentationConfig::none())
            }
        }
    }

    pub fn conditions(&self) -> Vec<Condition> {
        self.levels.iter().map(|l| self.condition(l)).collect()
    }

    pub fn describe(&self) -> String {
        alloc::format!(
            "axis={} levels={} trials={} seed={} ball_fit={}",
            self.axis.name(),
            self.conditions().iter().map(|c| c.label.as_str()).collect::<Vec<_>>().join(";"),
            self.trials,
            self.seed,
            self.ball_fit.name()
        )
    }
}

/// Accuracy of `classifier` on one corrupted copy of `test`.
///
/// Sample `i` of trial `trial` under condition number `condition` is
/// corrupted with a seed derived from all four values. Identity corruptions
/// leave the clouds untouched, so the clean cell reproduces plain evaluation.
pub fn condition_accuracy<C: Classifier + ?Sized>(
    classifier: &C,
    test: &LabeledDataset,
    condition: &Condition,
    condition_index: usize,
    trial: usize,
    seed: u64,
    fit: BallFit,
) -> Result<f64> {
    if test.is_empty() {
        return Err(crate::Error::EmptyDataset);
    }
    let aug = condition.augmentation;
    aug.validate()?;
    let mut correct = 0usize;
    for (chunk_index, chunk) in test.samples.chunks(64).enumerate() {
        let clouds: Vec<PointCloud> = chunk
            .iter()
            .enumerate()
            .map(|(j, s)| {
                if aug.is_identity() {
                    return Ok(s.cloud.clone());
                }
                let i = chunk_index * 64 + j;
                let seed = derive_seed(seed, &[tag::SWEEP, condition_index as u64, trial as u64, i as u64]);
                fit_to_unit_ball(&aug.with_seed(seed).apply(&s.cloud)?, fit)
            })
            .collect::<Result<_>>()?;
        let predictions = classifier.predict(&clouds)?;
        correct += predictions.iter().zip(chunk).filter(|(p, s)| **p == s.label).count();
    }
    Ok(correct as f64 / test.len() as f64)
}

/// Mean and sample standard deviation.
pub fn mean_std(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    if values.is_empty() {
        return (0.0, 0.0);
    }
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

/// Rows for one method evaluated under every condition, `trials` times each.
pub fn evaluate_conditions<C: Classifier + ?Sized>(
    classifier: &C,
    method: &str,
    test: &LabeledDataset,
    conditions: &[Condition],
    trials: usize,
    seed: u64,
    fit: BallFit,
) -> Result<Vec<ResultRow>> {
    conditions
        .iter()
        .enumerate()
        .map(|(ci, cond)| {
            let accs = (0..trials)
                .map(|t| condition_accuracy(classifier, test, cond, ci, t, seed, fit))
                .collect::<Result<Vec<_>>>()?;
            Ok(ResultRow::from_trials(method, &cond.label, &accs))
        })
        .collect()
}

/// Applies `spec` to every test cloud (copies only) and tabulates accuracy per level.
pub fn run_sweep<C: Classifier + ?Sized>(classifier: &C, test: &LabeledDataset, spec: &SweepSpec) -> Result<ResultTable> {
    spec.validate()?;
    let rows = evaluate_conditions(classifier, "model", test, &spec.conditions(), spec.trials, spec.seed, spec.ball_fit)?;
    let mut table = ResultTable::new(alloc::format!("sweep-{}", spec.axis.name()));
    table.push_meta("model_hash", classifier.fingerprint());
    table.push_meta("dataset_hash", test.fingerprint());
    table.push_meta("sweep", spec.describe());
    if spec.axis == SweepAxis::ClusteredOutliers {
        table.push_meta("reference.model", "0.81 0.81 0.75");
    }
    table.rows = rows;
    Ok(table)
}

/// Shared setup for experiments that train several models.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub base: NetConfig,
    pub train: TrainConfig,
    pub trials: usize,
    /// Seed of the test-set corruptions.
    pub seed: u64,
    pub ball_fit: BallFit,
    pub conditions: Vec<Condition>,
}

impl ExperimentConfig {
    pub fn new(classes: usize, seed: u64) -> Self {
        ExperimentConfig {
            base: NetConfig::new(classes),
            train: TrainConfig { seed, ..TrainConfig::default() },
            trials: 3,
            seed,
            ball_fit: BallFit::default(),
            conditions: standard_conditions(),
        }
    }

    /// Smaller base network for the architecture comparison: 4 filters and a
    /// 256-wide hidden layer keep the inverse-transform variant tractable.
    /// Training jitter is off, matching the comparison protocol.
    pub fn for_ablations(classes: usize, seed: u64) -> Self {
        let mut cfg = Self::new(classes, seed);
        cfg.base.filters = 4;
        cfg.base.hidden = 256;
        cfg.train.noise_sigma = 0.0;
        cfg
    }

    fn describe(&self) -> String {
        alloc::format!(
            "{} | epochs={} batch={} lr={}..{} train_noise={} train_seed={} | trials={} seed={} ball_fit={}",
            self.base.describe(),
            self.train.epochs,
            self.train.batch_size,
            self.train.lr_start,
            self.train.lr_end,
            self.train.noise_sigma,
            self.train.seed,
            self.trials,
            self.seed,
            self.ball_fit.name()
        )
    }
}

pub type Progress<'a> = &'a mut dyn FnMut(&str, &EpochStats);

fn train_variant(
    name: &str,
    net: &NetConfig,
    train: &LabeledDataset,
    cfg: &ExperimentConfig,
    progress: Progress<'_>,
) -> Result<Model> {
    let mut cb = |s: &EpochStats| progress(name, s);
    let out = train_with(train, net, &cfg.train, &mut cb)?;
    Model::new(out.params)
}

fn experiment_table(name: &str, train: &LabeledDataset, test: &LabeledDataset, cfg: &ExperimentConfig) -> ResultTable {
    let mut table = ResultTable::new(name);
    table.push_meta("train_dataset_hash", train.fingerprint());
    table.push_meta("dataset_hash", test.fingerprint());
    table.push_meta("config", cfg.describe());
    table.push_meta(
        "conditions",
        cfg.conditions.iter().map(|c| c.label.as_str()).collect::<Vec<_>>().join(";"),
    );
    table
}

/// Descriptor-only classifiers (no convolution): binary+F1, density+F1,
/// density+F2. The binary grid is paired with F1.
pub fn run_descriptor_comparison(
    train: &LabeledDataset,
    test: &LabeledDataset,
    cfg: &ExperimentConfig,
    progress: Progress<'_>,
) -> Result<ResultTable> {
    let methods = [
        ("binary+F1", OccupancyMode::Binary, DescriptorKind::F1),
        ("density+F1", OccupancyMode::Density, DescriptorKind::F1),
        ("density+F2", OccupancyMode::Density, DescriptorKind::F2),
    ];
    let mut table = experiment_table("descriptors", train, test, cfg);
    table.push_meta("reference.binary+F1", "0.79 0.34 0.24 0.14");
    table.push_meta("reference.density+F1", "0.78 0.75 0.37 0.50");
    table.push_meta("reference.density+F2", "0.68 0.68 0.30 0.24");
    for (name, occupancy, kind) in methods {
        let net = NetConfig { occupancy, features: FeatureMode::Descriptor(kind), ..cfg.base };
        let model = train_variant(name, &net, train, cfg, progress)?;
        table.push_meta(alloc::format!("model_hash.{name}"), model.fingerprint());
        table.rows.extend(evaluate_conditions(&model, name, test, &cfg.conditions, cfg.trials, cfg.seed, cfg.ball_fit)?);
    }
    Ok(table)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Ablation {
    /// Magnitude head vs inverse-transform head.
    Ift,
    /// With vs without the hidden dense layer.
    NoFc,
    /// 4, 5, 7 and 10 shells.
    ShellCount,
    /// 1 to 4 stacked convolutions.
    LayerCount,
}

impl Ablation {
    pub const ALL: [Ablation; 4] = [Ablation::Ift, Ablation::NoFc, Ablation::ShellCount, Ablation::LayerCount];

    pub fn name(self) -> &'static str {
        match self {
            Ablation::Ift => "ift",
            Ablation::NoFc => "no_fc",
            Ablation::ShellCount => "shell_count",
            Ablation::LayerCount => "layer_count",
        }
    }

    pub fn from_name(name: &str) -> Result<Self> {
        Self::ALL.into_iter().find(|a| a.name() == name).ok_or_else(|| invalid(alloc::format!("unknown ablation {name}")))
    }

    fn variants(self, base: &NetConfig) -> Vec<(String, NetConfig)> {
        match self {
            Ablation::Ift => alloc::vec![
                ("spectral".to_string(), NetConfig { features: FeatureMode::Magnitude, ..*base }),
                ("spectral+ift".to_string(), NetConfig { features: FeatureMode::InverseTransform, ..*base }),
            ],
            Ablation::NoFc => alloc::vec![
                ("spectral".to_string(), *base),
                ("spectral-no-fc".to_string(), NetConfig { hidden: 0, ..*base }),
            ],
            Ablation::ShellCount => [4, 5, 7, 10]
                .into_iter()
                .map(|c| (alloc::format!("shells={c}"), NetConfig { shells: c, ..*base }))
                .collect(),
            Ablation::LayerCount => (1..=4)
                .map(|l| (alloc::format!("layers={l}"), NetConfig { layers: l, ..*base }))
                .collect(),
        }
    }
}

/// Trains every requested variant with the same seeds and data and
/// evaluates each under the configured conditions. Architectures shared by
/// several ablations are trained once.
pub fn run_ablations(
    train: &LabeledDataset,
    test: &LabeledDataset,
    which: &[Ablation],
    cfg: &ExperimentConfig,
    progress: Progress<'_>,
) -> Result<ResultTable> {
    if which.is_empty() {
        return Err(invalid("no ablation selected"));
    }
    let mut table = experiment_table("ablations", train, test, cfg);
    table.push_meta("ablations", which.iter().map(|a| a.name()).collect::<Vec<_>>().join(";"));
    table.push_meta("reference.spectral", "0.82 0.72 0.62 0.74");
    table.push_meta("reference.spectral+ift", "0.78 0.71 0.45 0.58");
    table.push_meta("reference.spectral-no-fc", "0.75 0.65 0.54 0.46");
    let mut done: Vec<(NetConfig, Vec<ResultRow>)> = Vec::new();
    let mut seen_names: Vec<String> = Vec::new();
    for ablation in which {
        for (name, net) in ablation.variants(&cfg.base) {
            let rows = match done.iter().find(|(c, _)| *c == net) {
                Some((_, rows)) => rows.clone(),
                None => {
                    let model = train_variant(&name, &net, train, cfg, progress)?;
                    table.push_meta(alloc::format!("model_hash.{name}"), model.fingerprint());
                    let rows = evaluate_conditions(&model, &name, test, &cfg.conditions, cfg.trials, cfg.seed, cfg.ball_fit)?;
                    done.push((net, rows.clone()));
                    rows
                }
            };
            if seen_names.contains(&name) {
                continue;
            }
            seen_names.push(name.clone());
            table.rows.extend(rows.into_iter().map(|r| ResultRow { method: name.clone(), ..r }));
        }
    }
    Ok(table)
}
