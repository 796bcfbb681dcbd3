use sphclass::dataset_io::{load_dataset, write_dataset, Manifest};
use sphclass::formats::*;
use sphclass::parallel::ParallelClassifier;
use sphclass::report::{csv_to_table, emit_csv, read_csv, read_result_table, table_to_csv};
use sphclass::Error;
use sphclass_core::bench::{run_sweep, ResultRow, ResultTable, SweepAxis, SweepSpec, Table};
use sphclass_core::datasets::{generate_primitives, split, PrimitiveConfig, Split};
use sphclass_core::net::{checkpoint_to_bytes, Classifier, Model, ModelParams, NetConfig};
use sphclass_core::sht::ShTransform;
use sphclass_core::voxelizer::voxelize;
use sphclass_core::{GridSpec, OccupancyMode, PointCloud};

fn cloud() -> PointCloud {
    let pts = (0..300)
        .map(|i| {
            let t = i as f64 * 0.37;
            [t.sin() * 0.9, t.cos() * 0.5, (t * 0.3).sin() * 0.2 - 1e-17]
        })
        .collect();
    PointCloud::new(pts).unwrap()
}

fn small_dataset(seed: u64) -> (sphclass_core::datasets::LabeledDataset, sphclass_core::datasets::LabeledDataset, PrimitiveConfig) {
    let cfg = PrimitiveConfig::from_names(&["sphere", "cube", "cone"], 5, 128, seed).unwrap();
    let all = generate_primitives(&cfg).unwrap();
    let (train, test) = split(&all, 0.4, seed).unwrap();
    (train, test, cfg)
}

#[test]
fn text_points_round_trip_exactly() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("c.txt");
    let pc = cloud();
    write_point_cloud(&path, &pc).unwrap();
    assert_eq!(read_point_cloud(&path).unwrap().points(), pc.points());
}

#[test]
fn binary_points_round_trip_at_f32() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("c.bin");
    let pc = cloud();
    write_point_cloud(&path, &pc).unwrap();
    assert!(std::fs::read(&path).unwrap().starts_with(POINTS_MAGIC));
    let back = read_point_cloud(&path).unwrap();
    for (a, b) in back.points().iter().zip(pc.points()) {
        for i in 0..3 {
            assert_eq!(a[i], b[i] as f32 as f64);
        }
    }
}

#[test]
fn text_parser_handles_comments_and_commas() {
    let pts = parse_point_text("# header\n1 2 3\n\n4,5,6 # trailing\n  7\t8 9\n").unwrap();
    assert_eq!(pts, vec![[1.0, 2.0, 3.0], [4.0, 5.0, 6.0], [7.0, 8.0, 9.0]]);
    assert!(parse_point_text("1 2\n").unwrap_err().contains("line 1"));
    assert!(parse_point_text("1 2 x\n").is_err());
}

#[test]
fn bad_point_files_are_format_errors() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("bad.bin");
    std::fs::write(&p, b"SPC1\x05\x00\x00\x00abc").unwrap();
    assert!(matches!(read_point_cloud(&p), Err(Error::Format { .. })));
    std::fs::write(&p, b"# nothing\n").unwrap();
    assert!(matches!(read_point_cloud(&p), Err(Error::Format { .. })));
    std::fs::write(&p, b"nan 0 0\n").unwrap();
    assert!(matches!(read_point_cloud(&p), Err(Error::Format { .. })));
    assert!(matches!(read_point_cloud(&dir.path().join("missing")), Err(Error::Io { .. })));
}

#[test]
fn grid_and_spectra_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let pc = sphclass_core::geometry::normalize_unit_ball(&cloud()).unwrap();
    for mode in [OccupancyMode::Density, OccupancyMode::Binary] {
        let grid = voxelize(&pc, &GridSpec::new(3, 12, mode).unwrap()).unwrap();
        let path = dir.path().join("g.svg");
        write_grid(&path, &grid).unwrap();
        assert_eq!(read_grid(&path).unwrap(), grid);

        let plan = ShTransform::new(12, 4).unwrap();
        let spectra: Vec<_> = (0..3).map(|s| plan.forward(&grid.shell_signal(s).unwrap()).unwrap()).collect();
        let path = dir.path().join("s.shs");
        write_spectra(&path, &spectra).unwrap();
        assert_eq!(read_spectra(&path).unwrap(), spectra);
    }
    let path = dir.path().join("s.shs");
    let mut bytes = std::fs::read(&path).unwrap();
    bytes.pop();
    std::fs::write(&path, &bytes).unwrap();
    assert!(matches!(read_spectra(&path), Err(Error::Format { .. })));
    assert!(matches!(read_grid(&path), Err(Error::Format { .. })));
}

#[test]
fn checkpoint_files_round_trip_and_check_shape() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = NetConfig { filters: 2, shells: 2, degree: 2, resolution: 8, hidden: 5, ..NetConfig::new(3) };
    let params = ModelParams::init(&cfg, 4).unwrap();
    let path = dir.path().join("m.ckpt");
    save_checkpoint(&params, &path).unwrap();
    assert_eq!(std::fs::read(&path).unwrap(), checkpoint_to_bytes(&params));
    assert!(!dir.path().join("m.ckpt.partial").exists());
    assert_eq!(load_checkpoint(&path).unwrap(), params);
    assert_eq!(load_checkpoint_expecting(&path, &cfg).unwrap(), params);
    assert!(load_checkpoint_expecting(&path, &NetConfig { hidden: 6, ..cfg }).is_err());
}

#[test]
fn csv_round_trip_keeps_metadata_and_cells() {
    let mut t = ResultTable::new("sweep-noise_sigma");
    t.push_meta("model_hash", "abc");
    t.push_meta("sweep", "axis=noise_sigma levels=0,0.05 trials=3");
    t.rows.push(ResultRow::from_trials("model", "noise_sigma=0", &[0.9, 0.95, 1.0]));
    t.rows.push(ResultRow::from_trials("model, \"quoted\"", "noise_sigma=0.05", &[0.5, 0.25, 0.125]));
    let text = table_to_csv(&t.to_table()).unwrap();
    assert!(text.starts_with("# experiment=sweep-noise_sigma\n# model_hash=abc\n"));
    assert!(text.contains("method,condition,accuracy_mean,accuracy_std,trials\n"));
    assert!(text.contains(",0.9500,0.0500,3\n"));

    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("r.csv");
    emit_csv(&t.to_table(), &path).unwrap();
    assert_eq!(std::fs::read_to_string(&path).unwrap(), text);
    let back = read_result_table(&path).unwrap();
    assert_eq!(back.to_table(), t.to_table());
    assert_eq!(back.row("model", "noise_sigma=0").unwrap().accuracy_mean, 0.95);
}

#[test]
fn empty_table_is_metadata_and_header() {
    let t = ResultTable::new("empty");
    let text = table_to_csv(&t.to_table()).unwrap();
    assert_eq!(text, "# experiment=empty\nmethod,condition,accuracy_mean,accuracy_std,trials\n");
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("e.csv");
    emit_csv(&t.to_table(), &path).unwrap();
    let back = read_csv(&path).unwrap();
    assert!(back.rows.is_empty());
    assert_eq!(back.metadata, vec![("experiment".into(), "empty".into())]);
}

#[test]
fn generic_tables_parse_back() {
    let t = Table {
        metadata: vec![("a".into(), "x=y".into())],
        header: vec!["k".into(), "v".into()],
        rows: vec![vec!["1".into(), "two words".into()], vec!["2".into(), "".into()]],
    };
    assert_eq!(csv_to_table(&table_to_csv(&t).unwrap()).unwrap(), t);
    assert!(csv_to_table("# no equals sign\nk\n").is_err());
}

#[test]
fn dataset_directory_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let (train, test, cfg) = small_dataset(5);
    let manifest = Manifest::new(&cfg, 0.4, 5, &train, &test);
    write_dataset(dir.path(), &train, &test, &manifest).unwrap();
    assert_eq!(Manifest::read(dir.path()).unwrap(), manifest);

    let loaded = load_dataset(dir.path(), Split::Train).unwrap();
    // Class directories come back in name order.
    assert_eq!(loaded.class_names, vec!["cone", "cube", "sphere"]);
    assert_eq!(loaded.len(), train.len());
    assert_eq!(loaded.split, Split::Train);
    for s in &loaded.samples {
        assert!((s.cloud.max_radius() - 1.0).abs() < 1e-12);
    }
    let again = load_dataset(dir.path(), Split::Train).unwrap();
    assert_eq!(again.fingerprint(), loaded.fingerprint());
    assert_eq!(load_dataset(dir.path(), Split::Test).unwrap().len(), test.len());
}

#[test]
fn dataset_loading_errors() {
    let dir = tempfile::tempdir().unwrap();
    assert!(matches!(load_dataset(dir.path(), Split::Train), Err(Error::Dataset(_))));
    std::fs::create_dir_all(dir.path().join("a/train")).unwrap();
    assert!(matches!(load_dataset(dir.path(), Split::Train), Err(Error::Dataset(_))));
    assert!(matches!(load_dataset(dir.path(), Split::Test), Err(Error::Dataset(_))));
    std::fs::write(dir.path().join("a/train/0.txt"), "0 0 0\n").unwrap();
    // A single point cannot be scaled onto the unit sphere.
    assert!(matches!(load_dataset(dir.path(), Split::Train), Err(Error::Format { .. })));
}

#[test]
fn parallel_sweep_matches_sequential() {
    let (train, test, _) = small_dataset(9);
    let cfg = NetConfig { filters: 2, shells: 3, degree: 3, resolution: 12, hidden: 8, ..NetConfig::new(train.num_classes()) };
    let model = Model::new(ModelParams::init(&cfg, 1).unwrap()).unwrap();
    let spec = SweepSpec::scalar(SweepAxis::OutlierFraction, &[0.0, 0.3], 3, 2).unwrap();
    let seq = run_sweep(&model, &test, &spec).unwrap();
    let pool = rayon::ThreadPoolBuilder::new().num_threads(3).build().unwrap();
    let par = pool.install(|| run_sweep(&ParallelClassifier(&model), &test, &spec)).unwrap();
    assert_eq!(par, seq);

    let mut clouds: Vec<PointCloud> = Vec::new();
    for _ in 0..3 {
        clouds.extend(train.samples.iter().map(|s| s.cloud.clone()));
    }
    let want = model.predict(&clouds).unwrap();
    assert_eq!(pool.install(|| ParallelClassifier(&model).predict(&clouds)).unwrap(), want);
}
