use alloc::vec::Vec;

use super::*;
use crate::datasets::{generate_primitives, split, Primitive, PrimitiveConfig};
use crate::net::{evaluate, ModelParams};

fn small_net(classes: usize) -> NetConfig {
    NetConfig { filters: 2, shells: 3, degree: 4, resolution: 16, hidden: 16, ..NetConfig::new(classes) }
}

fn small_data() -> (LabeledDataset, LabeledDataset) {
    let cfg = PrimitiveConfig::new(alloc::vec![Primitive::Sphere, Primitive::Cube, Primitive::Torus], 6, 256, 4);
    split(&generate_primitives(&cfg).unwrap(), 0.5, 1).unwrap()
}

fn small_model() -> Model {
    Model::new(ModelParams::init(&small_net(3), 2).unwrap()).unwrap()
}

#[test]
fn clean_level_equals_plain_evaluation() {
    let (_, test) = small_data();
    let model = small_model();
    let before = test.clone();
    let spec = SweepSpec::preset(SweepAxis::OutlierFraction, 3, 9).unwrap();
    let table = run_sweep(&model, &test, &spec).unwrap();
    assert_eq!(test, before);
    assert_eq!(table.rows.len(), 6);
    let plain = evaluate(&model, &test).unwrap().accuracy;
    assert_eq!(table.rows[0].accuracy_mean, plain);
    assert_eq!(table.rows[0].accuracy_std, 0.0);
    assert!(table.rows.iter().all(|r| (0.0..=1.0).contains(&r.accuracy_mean) && r.trials == 3));
    assert_eq!(table, run_sweep(&model, &test, &spec).unwrap());
    assert_eq!(table.meta("dataset_hash"), Some(test.fingerprint().as_str()));
}

#[test]
fn clustered_preset_structure() {
    let spec = SweepSpec::preset(SweepAxis::ClusteredOutliers, 3, 0).unwrap();
    let conds = spec.conditions();
    assert_eq!(conds.len(), 3);
    let expect = [(0.10, 10, 0.04), (0.10, 10, 0.06), (0.20, 20, 0.04)];
    for (c, (f, size, sigma)) in conds.iter().zip(expect) {
        assert_eq!(c.augmentation.kind, crate::geometry::AugmentationKind::ClusteredOutliers);
        assert_eq!((c.augmentation.fraction, c.augmentation.cluster_size, c.augmentation.sigma), (f, size, sigma));
    }
    let (_, test) = small_data();
    let table = run_sweep(&small_model(), &test, &spec).unwrap();
    assert_eq!(table.rows.len(), 3);
}

#[test]
fn sweep_validation() {
    assert!(SweepSpec::scalar(SweepAxis::NoiseSigma, &[], 3, 0).is_err());
    assert!(SweepSpec::scalar(SweepAxis::NoiseSigma, &[0.1, 0.05], 3, 0).is_err());
    assert!(SweepSpec::scalar(SweepAxis::NoiseSigma, &[0.0, 0.1], 2, 0).is_err());
    assert!(SweepSpec::scalar(SweepAxis::DropoutFraction, &[0.0, 1.5], 3, 0).is_err());
    assert!(SweepSpec::scalar(SweepAxis::ClusteredOutliers, &[0.1], 3, 0).is_err());
    assert_eq!(SweepAxis::from_name("noise_sigma").unwrap(), SweepAxis::NoiseSigma);
}

#[test]
fn mean_and_sample_std() {
    assert_eq!(mean_std(&[0.5, 0.5, 0.5]), (0.5, 0.0));
    let (m, s) = mean_std(&[0.2, 0.4, 0.6]);
    assert!((m - 0.4).abs() < 1e-15 && (s - 0.2).abs() < 1e-15);
}

#[test]
fn result_table_round_trip() {
    let mut t = ResultTable::new("demo");
    t.push_meta("seed", "3");
    t.rows.push(ResultRow::from_trials("m", "clean", &[0.75, 0.8125, 0.5]));
    let text = t.to_table();
    assert_eq!(text.rows[0][2], "0.6875");
    let back = ResultTable::from_table(&text).unwrap();
    assert_eq!(back.experiment, "demo");
    assert_eq!(back.meta("seed"), Some("3"));
    assert_eq!(back.rows[0].accuracy_mean, 0.6875);
    assert!((back.rows[0].accuracy_std - t.rows[0].accuracy_std).abs() < 5e-5);
    let empty = ResultTable::new("none").to_table();
    assert!(empty.rows.is_empty() && empty.header.len() == 5);
}

#[test]
fn signal_analysis_shared_bins_and_zero_difference() {
    let (train, _) = small_data();
    let params = ModelParams::init(&small_net(3), 5).unwrap();
    let pc = &train.samples[0].cloud;
    let cfg = AnalysisConfig { outlier_fraction: 0.0, ..AnalysisConfig::default() };
    let same = run_ift_signal_analysis(pc, &params, &cfg).unwrap();
    assert_eq!((same.spectral.rms, same.ift.rms, same.spectral.max_abs), (0.0, 0.0, 0.0));

    let a = run_ift_signal_analysis(pc, &params, &AnalysisConfig { seed: 3, ..AnalysisConfig::default() }).unwrap();
    assert_eq!(a.bin_edges.len(), 41);
    let width = a.bin_edges[1] - a.bin_edges[0];
    assert!(a.bin_edges.windows(2).all(|w| ((w[1] - w[0]) - width).abs() < 1e-12 * width.abs().max(1.0)));
    assert_eq!(a.spectral.histogram.iter().sum::<usize>(), a.spectral.count);
    assert_eq!(a.ift.histogram.iter().sum::<usize>(), a.ift.count);
    let table = a.to_table();
    assert_eq!(table.rows.len(), 40);
}

#[test]
fn descriptor_comparison_has_twelve_cells() {
    let (train, test) = small_data();
    let mut cfg = ExperimentConfig::new(3, 1);
    cfg.base = small_net(3);
    cfg.train.epochs = 1;
    let table = run_descriptor_comparison(&train, &test, &cfg, &mut |_, _| {}).unwrap();
    assert_eq!(table.rows.len(), 12);
    assert!(table.row("density+F1", "outliers=0.50").is_some());
    assert_eq!(table.meta("reference.density+F1"), Some("0.78 0.75 0.37 0.50"));
}

#[test]
fn ablations_share_dataset_hash_and_dedupe() {
    let (train, test) = small_data();
    let mut cfg = ExperimentConfig::for_ablations(3, 1);
    cfg.base = NetConfig { ift_resolution: 10, ..small_net(3) };
    cfg.train.epochs = 1;
    let mut trained = Vec::new();
    let table = run_ablations(&train, &test, &[Ablation::Ift, Ablation::NoFc], &cfg, &mut |name, s| {
        if s.epoch == 0 {
            trained.push(alloc::string::String::from(name));
        }
    })
    .unwrap();
    assert_eq!(trained, ["spectral", "spectral+ift", "spectral-no-fc"]);
    assert_eq!(table.rows.len(), 3 * 4);
    assert_eq!(table.meta("dataset_hash"), Some(test.fingerprint().as_str()));
    assert!(table.meta("model_hash.spectral+ift").is_some());
}
