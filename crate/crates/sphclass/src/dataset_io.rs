//! Datasets on disk: `<root>/<class>/<split>/<sample>.{bin,txt}` plus a
//! `manifest.json` written by [`write_dataset`].

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sphclass_core::datasets::{LabeledDataset, PrimitiveConfig, Sample, Split};
use sphclass_core::geometry::normalize_unit_ball;

use crate::error::{Error, Result};
use crate::formats::{read_point_cloud, write_file_atomic, write_point_cloud};

pub const MANIFEST_NAME: &str = "manifest.json";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SplitSummary {
    pub counts: Vec<usize>,
    pub fingerprint: String,
}

/// Provenance for a generated dataset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub classes: Vec<String>,
    pub per_class: usize,
    pub points: usize,
    pub seed: u64,
    pub test_fraction: f64,
    pub split_seed: u64,
    pub scale_range: (f64, f64),
    pub random_rotation: bool,
    pub sample_format: String,
    pub train: SplitSummary,
    pub test: SplitSummary,
}

impl Manifest {
    pub fn new(cfg: &PrimitiveConfig, test_fraction: f64, split_seed: u64, train: &LabeledDataset, test: &LabeledDataset) -> Self {
        Manifest {
            classes: train.class_names.clone(),
            per_class: cfg.per_class,
            points: cfg.points,
            seed: cfg.seed,
            test_fraction,
            split_seed,
            scale_range: cfg.scale_range,
            random_rotation: cfg.random_rotation,
            sample_format: "bin".into(),
            train: SplitSummary { counts: train.class_counts(), fingerprint: train.fingerprint() },
            test: SplitSummary { counts: test.class_counts(), fingerprint: test.fingerprint() },
        }
    }

    pub fn read(root: &Path) -> Result<Self> {
        let path = root.join(MANIFEST_NAME);
        let text = std::fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
        serde_json::from_str(&text).map_err(|e| Error::format(&path, e.to_string()))
    }
}

fn sorted_entries(dir: &Path) -> Result<Vec<PathBuf>> {
    let mut out = Vec::new();
    for entry in std::fs::read_dir(dir).map_err(|e| Error::io(dir, e))? {
        out.push(entry.map_err(|e| Error::io(dir, e))?.path());
    }
    out.sort();
    Ok(out)
}

fn is_sample_file(p: &Path) -> bool {
    p.is_file() && p.extension().is_some_and(|e| e == "bin" || e == "txt")
}

/// Loads one split. Classes are the subdirectories of `root` in name order;
/// samples within a class are read in file-name order and re-normalized to
/// the unit ball, so the result does not depend on directory listing order.
pub fn load_dataset(root: &Path, split: Split) -> Result<LabeledDataset> {
    let class_dirs: Vec<PathBuf> = sorted_entries(root)?.into_iter().filter(|p| p.is_dir()).collect();
    if class_dirs.is_empty() {
        return Err(Error::Dataset(format!("{}: no class directories", root.display())));
    }
    let mut class_names = Vec::new();
    let mut samples = Vec::new();
    for (label, dir) in class_dirs.iter().enumerate() {
        let name = dir.file_name().and_then(|n| n.to_str()).ok_or_else(|| Error::Dataset(format!("{}: class name is not UTF-8", dir.display())))?;
        class_names.push(name.to_string());
        let split_dir = dir.join(split.name());
        if !split_dir.is_dir() {
            return Err(Error::Dataset(format!("{}: missing split directory", split_dir.display())));
        }
        let files: Vec<PathBuf> = sorted_entries(&split_dir)?.into_iter().filter(|p| is_sample_file(p)).collect();
        if files.is_empty() {
            return Err(Error::Dataset(format!("{}: class {name} has no samples", split_dir.display())));
        }
        for f in files {
            let cloud = normalize_unit_ball(&read_point_cloud(&f)?).map_err(|e| Error::format(&f, e.to_string()))?;
            samples.push(Sample { cloud, label });
        }
    }
    Ok(LabeledDataset::new(samples, class_names, split)?)
}

/// Writes every sample as `<root>/<class>/<split>/<index>.bin`, numbered within its class.
pub fn write_split(root: &Path, dataset: &LabeledDataset) -> Result<()> {
    let mut next = vec![0usize; dataset.num_classes()];
    for s in &dataset.samples {
        let dir = root.join(&dataset.class_names[s.label]).join(dataset.split.name());
        write_point_cloud(&dir.join(format!("{:05}.bin", next[s.label])), &s.cloud)?;
        next[s.label] += 1;
    }
    Ok(())
}

pub fn write_dataset(root: &Path, train: &LabeledDataset, test: &LabeledDataset, manifest: &Manifest) -> Result<()> {
    write_split(root, train)?;
    write_split(root, test)?;
    let json = serde_json::to_string_pretty(manifest).expect("manifest serializes");
    write_file_atomic(&root.join(MANIFEST_NAME), format!("{json}\n").as_bytes())
}
