//! Command-line front end. Every numeric setting resolves flag, then config
//! file, then default, and the resolved values are echoed before work starts.

use std::fmt::Display;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};
use sphclass_core::bench::{
    run_ablations, run_descriptor_comparison, run_ift_signal_analysis, run_sweep, Ablation, AnalysisConfig,
    ExperimentConfig, ResultTable, SweepAxis, SweepSpec, Table,
};
use sphclass_core::datasets::{generate_primitives, split, Primitive, PrimitiveConfig, Split};
use sphclass_core::net::{evaluate, train_with, Classifier, EpochStats, FeatureMode, Model, NetConfig, TrainConfig};
use sphclass_core::sht::ShTransform;
use sphclass_core::voxelizer::voxelize;
use sphclass_core::{BallFit, GridSpec, OccupancyMode};

use crate::config::{RunConfig, Toggle};
use crate::dataset_io::{load_dataset, write_dataset, Manifest};
use crate::error::{Error, Result};
use crate::formats::{
    load_checkpoint, read_grid, read_point_cloud, save_checkpoint, write_grid, write_spectra, GRID_MAGIC,
};
use crate::parallel::ParallelClassifier;
use crate::report::{emit_csv, history_table, timestamped_path};

#[derive(Debug, Parser)]
#[command(name = "sphclass", version, about = "Point-cloud classification from spherical harmonic spectra")]
pub struct Cli {
    /// `key = value` file supplying defaults for any flag.
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,
    /// Worker threads for evaluation (0 = all cores).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Master seed; falls back to SPHCLASS_SEED.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate the synthetic primitive-shape dataset.
    Generate(GenerateArgs),
    /// Voxelize a point cloud into a concentric-shell grid dump.
    Voxelize(VoxelizeArgs),
    /// Spherical harmonic spectra of every shell of a grid (or point cloud).
    Transform(TransformArgs),
    /// Train a classifier and write its checkpoint and history.
    Train(TrainArgs),
    /// Accuracy of a checkpoint on a dataset split.
    Eval(EvalArgs),
    /// Robustness experiments; results go to CSV.
    Bench(BenchArgs),
}

#[derive(Debug, Args)]
pub struct GenerateArgs {
    #[arg(long, value_name = "DIR")]
    pub out: PathBuf,
    /// Comma-separated primitive names (default: all eight).
    #[arg(long, value_delimiter = ',')]
    pub classes: Option<Vec<String>>,
    #[arg(long)]
    pub per_class: Option<usize>,
    #[arg(long)]
    pub points: Option<usize>,
    #[arg(long)]
    pub test_fraction: Option<f64>,
}

#[derive(Debug, Args)]
pub struct GridArgs {
    #[arg(long)]
    pub shells: Option<usize>,
    #[arg(long)]
    pub resolution: Option<usize>,
    #[arg(long)]
    pub mode: Option<ModeArg>,
}

#[derive(Debug, Args)]
pub struct VoxelizeArgs {
    #[arg(long, value_name = "FILE")]
    pub input: PathBuf,
    #[arg(long, value_name = "FILE")]
    pub out: PathBuf,
    #[command(flatten)]
    pub grid: GridArgs,
}

#[derive(Debug, Args)]
pub struct TransformArgs {
    /// Grid dump, or a point cloud voxelized with the grid flags first.
    #[arg(long, value_name = "FILE")]
    pub input: PathBuf,
    #[arg(long, value_name = "FILE")]
    pub out: PathBuf,
    #[arg(long)]
    pub degree: Option<usize>,
    #[command(flatten)]
    pub grid: GridArgs,
}

#[derive(Debug, Clone, Default, Args)]
pub struct ModelArgs {
    #[arg(long)]
    pub filters: Option<usize>,
    #[arg(long)]
    pub shells: Option<usize>,
    #[arg(long)]
    pub degree: Option<usize>,
    #[arg(long)]
    pub resolution: Option<usize>,
    #[arg(long)]
    pub hidden: Option<usize>,
    #[arg(long)]
    pub layers: Option<usize>,
    /// Inverse-transform head instead of spectral magnitudes.
    #[arg(long)]
    pub ift: Option<Toggle>,
    /// Hidden dense layer before the classifier.
    #[arg(long)]
    pub fc: Option<Toggle>,
    #[arg(long)]
    pub ift_resolution: Option<usize>,
    #[arg(long)]
    pub mode: Option<ModeArg>,
    #[arg(long)]
    pub epochs: Option<usize>,
    #[arg(long)]
    pub batch: Option<usize>,
    #[arg(long)]
    pub lr_start: Option<f64>,
    #[arg(long)]
    pub lr_end: Option<f64>,
    /// Gaussian jitter added to training clouds.
    #[arg(long)]
    pub train_noise: Option<f64>,
    /// Random z-rotation of training clouds.
    #[arg(long)]
    pub rotate: Option<Toggle>,
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    #[arg(long, value_name = "DIR")]
    pub data: PathBuf,
    #[arg(long, value_name = "FILE")]
    pub out: PathBuf,
    /// Per-epoch history CSV (default: next to the checkpoint).
    #[arg(long, value_name = "FILE")]
    pub history: Option<PathBuf>,
    #[command(flatten)]
    pub model: ModelArgs,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    #[arg(long, value_name = "DIR")]
    pub data: PathBuf,
    #[arg(long, value_name = "FILE")]
    pub checkpoint: PathBuf,
    #[arg(long, default_value = "test")]
    pub split: SplitArg,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    #[command(subcommand)]
    pub kind: BenchCommand,
}

#[derive(Debug, Args)]
pub struct OutputArgs {
    /// Exact output path.
    #[arg(long, value_name = "FILE", conflicts_with = "out_dir")]
    pub out: Option<PathBuf>,
    /// Directory for `<experiment>-<timestamp>.csv` (default: results).
    #[arg(long, value_name = "DIR")]
    pub out_dir: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct EvalSettings {
    #[arg(long)]
    pub trials: Option<usize>,
    /// How corrupted clouds are brought back into the unit ball.
    #[arg(long)]
    pub ball_fit: Option<FitArg>,
}

#[derive(Debug, Subcommand)]
pub enum BenchCommand {
    /// Accuracy of one checkpoint across corruption levels.
    Sweep {
        #[arg(long, value_name = "DIR")]
        data: PathBuf,
        #[arg(long, value_name = "FILE")]
        checkpoint: PathBuf,
        #[arg(long)]
        axis: Option<AxisArg>,
        /// Comma-separated levels (default: the axis preset).
        #[arg(long, value_delimiter = ',')]
        levels: Option<Vec<f64>>,
        #[command(flatten)]
        eval: EvalSettings,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Binary+F1, density+F1 and density+F2 descriptor classifiers.
    Descriptors {
        #[arg(long, value_name = "DIR")]
        data: PathBuf,
        #[command(flatten)]
        model: ModelArgs,
        #[command(flatten)]
        eval: EvalSettings,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Architecture variants trained under identical seeds.
    Ablations {
        #[arg(long, value_name = "DIR")]
        data: PathBuf,
        /// Comma-separated subset of ift, no_fc, shell_count, layer_count.
        #[arg(long, value_delimiter = ',', default_value = "ift")]
        which: Vec<String>,
        #[command(flatten)]
        model: ModelArgs,
        #[command(flatten)]
        eval: EvalSettings,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Clean-vs-outlier feature differences of one test cloud.
    Analysis {
        #[arg(long, value_name = "DIR")]
        data: PathBuf,
        #[arg(long, value_name = "FILE")]
        checkpoint: PathBuf,
        /// Index into the test split.
        #[arg(long)]
        sample: Option<usize>,
        #[arg(long)]
        outlier_fraction: Option<f64>,
        #[arg(long)]
        bins: Option<usize>,
        #[arg(long)]
        ball_fit: Option<FitArg>,
        #[command(flatten)]
        output: OutputArgs,
    },
}

/// Implements `FromStr` and `Display` through the clap value names so the
/// same spellings work in config files.
macro_rules! value_enum_text {
    ($t:ty) => {
        impl FromStr for $t {
            type Err = String;
            fn from_str(s: &str) -> std::result::Result<Self, String> {
                <$t as ValueEnum>::from_str(s, true)
            }
        }
        impl Display for $t {
            fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
                f.write_str(self.to_possible_value().expect("no skipped variants").get_name())
            }
        }
    };
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    Density,
    Binary,
}
value_enum_text!(ModeArg);

impl From<ModeArg> for OccupancyMode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::Density => OccupancyMode::Density,
            ModeArg::Binary => OccupancyMode::Binary,
        }
    }
}

impl From<OccupancyMode> for ModeArg {
    fn from(m: OccupancyMode) -> Self {
        match m {
            OccupancyMode::Density => ModeArg::Density,
            OccupancyMode::Binary => ModeArg::Binary,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FitArg {
    Renormalize,
    Crop,
}
value_enum_text!(FitArg);

impl From<FitArg> for BallFit {
    fn from(f: FitArg) -> Self {
        match f {
            FitArg::Renormalize => BallFit::Renormalize,
            FitArg::Crop => BallFit::Crop,
        }
    }
}

impl From<BallFit> for FitArg {
    fn from(f: BallFit) -> Self {
        match f {
            BallFit::Renormalize => FitArg::Renormalize,
            BallFit::Crop => FitArg::Crop,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SplitArg {
    Train,
    Test,
}
value_enum_text!(SplitArg);

impl From<SplitArg> for Split {
    fn from(s: SplitArg) -> Self {
        match s {
            SplitArg::Train => Split::Train,
            SplitArg::Test => Split::Test,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
#[value(rename_all = "snake_case")]
pub enum AxisArg {
    OutlierFraction,
    NoiseSigma,
    DropoutFraction,
    ClusteredOutliers,
}
value_enum_text!(AxisArg);

impl From<AxisArg> for SweepAxis {
    fn from(a: AxisArg) -> Self {
        match a {
            AxisArg::OutlierFraction => SweepAxis::OutlierFraction,
            AxisArg::NoiseSigma => SweepAxis::NoiseSigma,
            AxisArg::DropoutFraction => SweepAxis::DropoutFraction,
            AxisArg::ClusteredOutliers => SweepAxis::ClusteredOutliers,
        }
    }
}

/// Parses `argv` and runs the command. Usage errors (unknown flags) exit
/// through clap; everything else is returned.
pub fn run_from<I, T>(args: I) -> Result<()>
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    execute(Cli::parse_from(args))
}

pub fn execute(cli: Cli) -> Result<()> {
    let mut rc = RunConfig::load(cli.config.as_deref())?;
    let threads = rc.get_runtime("threads", cli.threads)?.unwrap_or(0);
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
    pool.install(|| dispatch(cli.command, cli.seed, &mut rc))
}

fn dispatch(command: Command, seed: Option<u64>, rc: &mut RunConfig) -> Result<()> {
    match command {
        Command::Generate(a) => cmd_generate(a, seed, rc),
        Command::Voxelize(a) => cmd_voxelize(a, rc),
        Command::Transform(a) => cmd_transform(a, rc),
        Command::Train(a) => cmd_train(a, seed, rc),
        Command::Eval(a) => cmd_eval(a, rc),
        Command::Bench(b) => match b.kind {
            BenchCommand::Sweep { data, checkpoint, axis, levels, eval, output } => {
                cmd_sweep(&data, &checkpoint, axis, levels, eval, output, seed, rc)
            }
            BenchCommand::Descriptors { data, model, eval, output } => cmd_descriptors(&data, model, eval, output, seed, rc),
            BenchCommand::Ablations { data, which, model, eval, output } => {
                cmd_ablations(&data, &which, model, eval, output, seed, rc)
            }
            BenchCommand::Analysis { data, checkpoint, sample, outlier_fraction, bins, ball_fit, output } => {
                cmd_analysis(&data, &checkpoint, sample, outlier_fraction, bins, ball_fit, output, seed, rc)
            }
        },
    }
}

/// Prints the resolved settings and warns about config keys nobody read.
fn echo(rc: &RunConfig) {
    print!("{}", rc.echo());
    for k in rc.unused_file_keys() {
        eprintln!("warning: config key {k} is not used by this command");
    }
}

fn cmd_generate(a: GenerateArgs, seed: Option<u64>, rc: &mut RunConfig) -> Result<()> {
    let seed = rc.seed(seed, 0)?;
    let all: Vec<String> = Primitive::ALL.iter().map(|p| p.name().to_string()).collect();
    let classes = match a.classes {
        Some(c) => c,
        None => rc.get("classes", None, all.join(","))?.split(',').map(|s| s.trim().to_string()).collect(),
    };
    let per_class = rc.get("per_class", a.per_class, 250)?;
    let points = rc.get("points", a.points, 2048)?;
    let test_fraction = rc.get("test_fraction", a.test_fraction, 0.2)?;
    echo(rc);
    if a.out.exists() && std::fs::read_dir(&a.out).map_err(|e| Error::io(&a.out, e))?.next().is_some() {
        return Err(Error::Dataset(format!("{}: output directory is not empty", a.out.display())));
    }
    let names: Vec<&str> = classes.iter().map(String::as_str).collect();
    let cfg = PrimitiveConfig::from_names(&names, per_class, points, seed)?;
    let all = generate_primitives(&cfg)?;
    let (train, test) = split(&all, test_fraction, seed)?;
    let manifest = Manifest::new(&cfg, test_fraction, seed, &train, &test);
    write_dataset(&a.out, &train, &test, &manifest)?;
    println!(
        "generated {} train and {} test samples in {} classes under {}",
        train.len(),
        test.len(),
        train.num_classes(),
        a.out.display()
    );
    Ok(())
}

fn grid_spec(g: &GridArgs, rc: &mut RunConfig) -> Result<GridSpec> {
    let shells = rc.get("shells", g.shells, 7)?;
    let resolution = rc.get("resolution", g.resolution, 64)?;
    let mode = rc.get("mode", g.mode, ModeArg::Density)?;
    Ok(GridSpec::new(shells, resolution, mode.into())?)
}

fn cmd_voxelize(a: VoxelizeArgs, rc: &mut RunConfig) -> Result<()> {
    let spec = grid_spec(&a.grid, rc)?;
    echo(rc);
    let grid = voxelize(&read_point_cloud(&a.input)?, &spec)?;
    write_grid(&a.out, &grid)?;
    println!("wrote {} voxels, total mass {} to {}", grid.values().len(), grid.total(), a.out.display());
    Ok(())
}

fn cmd_transform(a: TransformArgs, rc: &mut RunConfig) -> Result<()> {
    let degree = rc.get("degree", a.degree, 9)?;
    let is_grid = std::fs::read(&a.input).map_err(|e| Error::io(&a.input, e))?.starts_with(GRID_MAGIC);
    let grid = if is_grid {
        echo(rc);
        read_grid(&a.input)?
    } else {
        let spec = grid_spec(&a.grid, rc)?;
        echo(rc);
        voxelize(&read_point_cloud(&a.input)?, &spec)?
    };
    let plan = ShTransform::new(grid.spec().resolution, degree)?;
    let spectra = (0..grid.spec().shells)
        .map(|s| plan.forward(&grid.shell_signal(s)?))
        .collect::<sphclass_core::Result<Vec<_>>>()?;
    write_spectra(&a.out, &spectra)?;
    println!("wrote {} shell spectra of degree {degree} to {}", spectra.len(), a.out.display());
    Ok(())
}

/// Resolves architecture and optimizer settings on top of `net` and `train`.
fn resolve_model(m: &ModelArgs, rc: &mut RunConfig, net: NetConfig, train: TrainConfig) -> Result<(NetConfig, TrainConfig)> {
    let ift = rc.get("ift", m.ift, Toggle::from(net.features == FeatureMode::InverseTransform))?;
    let fc = rc.get("fc", m.fc, Toggle::from(net.hidden > 0))?;
    let hidden = rc.get("hidden", m.hidden, if net.hidden > 0 { net.hidden } else { NetConfig::new(1).hidden })?;
    let features = match (ift.is_on(), net.features) {
        (true, _) => FeatureMode::InverseTransform,
        (false, FeatureMode::InverseTransform) => FeatureMode::Magnitude,
        (false, f) => f,
    };
    let net = NetConfig {
        filters: rc.get("filters", m.filters, net.filters)?,
        shells: rc.get("shells", m.shells, net.shells)?,
        degree: rc.get("degree", m.degree, net.degree)?,
        resolution: rc.get("resolution", m.resolution, net.resolution)?,
        hidden: if fc.is_on() { hidden } else { 0 },
        layers: rc.get("layers", m.layers, net.layers)?,
        features,
        ift_resolution: rc.get("ift_resolution", m.ift_resolution, net.ift_resolution)?,
        occupancy: rc.get("mode", m.mode, ModeArg::from(net.occupancy))?.into(),
        ..net
    };
    let train = TrainConfig {
        epochs: rc.get("epochs", m.epochs, train.epochs)?,
        batch_size: rc.get("batch", m.batch, train.batch_size)?,
        lr_start: rc.get("lr_start", m.lr_start, train.lr_start)?,
        lr_end: rc.get("lr_end", m.lr_end, train.lr_end)?,
        noise_sigma: rc.get("train_noise", m.train_noise, train.noise_sigma)?,
        random_rotation: rc.get("rotate", m.rotate, Toggle::from(train.random_rotation))?.is_on(),
        ..train
    };
    net.validate()?;
    train.validate()?;
    Ok((net, train))
}

impl From<bool> for Toggle {
    fn from(b: bool) -> Self {
        if b {
            Toggle::On
        } else {
            Toggle::Off
        }
    }
}

fn print_epoch(prefix: &str, epochs: usize, s: &EpochStats) {
    eprintln!(
        "{prefix}epoch {}/{epochs} lr={:.3e} loss={:.5} train_accuracy={:.4}",
        s.epoch + 1,
        s.lr,
        s.loss,
        s.train_accuracy
    );
}

fn cmd_train(a: TrainArgs, seed: Option<u64>, rc: &mut RunConfig) -> Result<()> {
    let seed = rc.seed(seed, 0)?;
    let data = load_dataset(&a.data, Split::Train)?;
    let (net, train) = resolve_model(&a.model, rc, NetConfig::new(data.num_classes()), TrainConfig { seed, ..TrainConfig::default() })?;
    echo(rc);
    let epochs = train.epochs;
    let outcome = train_with(&data, &net, &train, &mut |s| print_epoch("", epochs, s))?;
    save_checkpoint(&outcome.params, &a.out)?;
    let mut meta = vec![
        ("experiment".to_string(), "train-history".to_string()),
        ("model_hash".to_string(), outcome.params.fingerprint()),
        ("dataset_hash".to_string(), data.fingerprint()),
        ("net".to_string(), net.describe()),
    ];
    meta.extend(rc.metadata());
    let history = a.history.unwrap_or_else(|| default_history_path(&a.out));
    emit_csv(&history_table(&outcome.history, meta), &history)?;
    println!("model_hash={}", outcome.params.fingerprint());
    println!("wrote checkpoint {} and history {}", a.out.display(), history.display());
    Ok(())
}

fn default_history_path(checkpoint: &Path) -> PathBuf {
    let mut name = checkpoint.file_stem().unwrap_or_default().to_os_string();
    name.push(".history.csv");
    checkpoint.with_file_name(name)
}

fn load_model(path: &Path, classes: usize) -> Result<Model> {
    let params = load_checkpoint(path)?;
    if params.config().classes != classes {
        return Err(Error::Dataset(format!(
            "checkpoint {} predicts {} classes but the dataset has {classes}",
            path.display(),
            params.config().classes
        )));
    }
    Ok(Model::new(params)?)
}

fn cmd_eval(a: EvalArgs, rc: &mut RunConfig) -> Result<()> {
    let split = rc.get("split", Some(a.split), SplitArg::Test)?;
    echo(rc);
    let data = load_dataset(&a.data, split.into())?;
    let model = load_model(&a.checkpoint, data.num_classes())?;
    let ev = evaluate(&ParallelClassifier(&model), &data)?;
    println!("model_hash={}", model.fingerprint());
    println!("dataset_hash={}", data.fingerprint());
    println!("accuracy={:.4} correct={} total={}", ev.accuracy, ev.correct, ev.total);
    for (c, row) in ev.confusion.iter().enumerate() {
        let total: usize = row.iter().sum();
        println!("class {}: {}/{}", data.class_names[c], row[c], total);
    }
    Ok(())
}

fn write_result(table: &Table, experiment: &str, output: &OutputArgs, rc: &mut RunConfig) -> Result<PathBuf> {
    let path = match &output.out {
        Some(p) => p.clone(),
        None => {
            let dir = output.out_dir.clone().unwrap_or_else(|| PathBuf::from("results"));
            std::fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
            timestamped_path(&dir, experiment)
        }
    };
    let mut table = table.clone();
    table.metadata.extend(rc.metadata());
    emit_csv(&table, &path)?;
    println!("wrote {}", path.display());
    Ok(path)
}

fn print_rows(table: &ResultTable) {
    for r in &table.rows {
        println!("{:<16} {:<20} {:.4} +- {:.4} ({} trials)", r.method, r.condition, r.accuracy_mean, r.accuracy_std, r.trials);
    }
}

#[allow(clippy::too_many_arguments)]
fn cmd_sweep(
    data: &Path,
    checkpoint: &Path,
    axis: Option<AxisArg>,
    levels: Option<Vec<f64>>,
    eval: EvalSettings,
    output: OutputArgs,
    seed: Option<u64>,
    rc: &mut RunConfig,
) -> Result<()> {
    let seed = rc.seed(seed, 0)?;
    let axis: SweepAxis = rc.get("axis", axis, AxisArg::OutlierFraction)?.into();
    let trials = rc.get("trials", eval.trials, 3)?;
    let fit = rc.get("ball_fit", eval.ball_fit, FitArg::from(BallFit::default()))?;
    let levels = match levels {
        Some(l) => Some(l),
        None => rc
            .get_opt::<String>("levels", None)?
            .map(|s| s.split(',').map(|v| v.trim().parse::<f64>()).collect::<std::result::Result<Vec<_>, _>>())
            .transpose()
            .map_err(|e| Error::Config(format!("levels: {e}")))?,
    };
    echo(rc);
    let mut spec = match levels {
        Some(l) => SweepSpec::scalar(axis, &l, trials, seed)?,
        None => SweepSpec::preset(axis, trials, seed)?,
    };
    spec.ball_fit = fit.into();
    let test = load_dataset(data, Split::Test)?;
    let model = load_model(checkpoint, test.num_classes())?;
    let table = run_sweep(&ParallelClassifier(&model), &test, &spec)?;
    print_rows(&table);
    write_result(&table.to_table(), &table.experiment, &output, rc)?;
    Ok(())
}

fn experiment_settings(
    base: ExperimentConfig,
    model: &ModelArgs,
    eval: &EvalSettings,
    rc: &mut RunConfig,
) -> Result<ExperimentConfig> {
    let (net, train) = resolve_model(model, rc, base.base, base.train)?;
    Ok(ExperimentConfig {
        base: net,
        train,
        trials: rc.get("trials", eval.trials, base.trials)?,
        ball_fit: rc.get("ball_fit", eval.ball_fit, FitArg::from(base.ball_fit))?.into(),
        ..base
    })
}

fn progress_printer(epochs: usize) -> impl FnMut(&str, &EpochStats) {
    move |name, s| print_epoch(&format!("[{name}] "), epochs, s)
}

fn cmd_descriptors(
    data: &Path,
    model: ModelArgs,
    eval: EvalSettings,
    output: OutputArgs,
    seed: Option<u64>,
    rc: &mut RunConfig,
) -> Result<()> {
    let seed = rc.seed(seed, 0)?;
    let train = load_dataset(data, Split::Train)?;
    let test = load_dataset(data, Split::Test)?;
    let cfg = experiment_settings(ExperimentConfig::new(train.num_classes(), seed), &model, &eval, rc)?;
    echo(rc);
    let table = run_descriptor_comparison(&train, &test, &cfg, &mut progress_printer(cfg.train.epochs))?;
    print_rows(&table);
    write_result(&table.to_table(), &table.experiment, &output, rc)?;
    Ok(())
}

fn cmd_ablations(
    data: &Path,
    which: &[String],
    model: ModelArgs,
    eval: EvalSettings,
    output: OutputArgs,
    seed: Option<u64>,
    rc: &mut RunConfig,
) -> Result<()> {
    let seed = rc.seed(seed, 0)?;
    let which = which.iter().map(|w| Ablation::from_name(w.trim())).collect::<sphclass_core::Result<Vec<_>>>()?;
    let train = load_dataset(data, Split::Train)?;
    let test = load_dataset(data, Split::Test)?;
    let cfg = experiment_settings(ExperimentConfig::for_ablations(train.num_classes(), seed), &model, &eval, rc)?;
    echo(rc);
    let table = run_ablations(&train, &test, &which, &cfg, &mut progress_printer(cfg.train.epochs))?;
    print_rows(&table);
    write_result(&table.to_table(), &table.experiment, &output, rc)?;
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn cmd_analysis(
    data: &Path,
    checkpoint: &Path,
    sample: Option<usize>,
    outlier_fraction: Option<f64>,
    bins: Option<usize>,
    ball_fit: Option<FitArg>,
    output: OutputArgs,
    seed: Option<u64>,
    rc: &mut RunConfig,
) -> Result<()> {
    let seed = rc.seed(seed, 0)?;
    let defaults = AnalysisConfig { seed, ..AnalysisConfig::default() };
    let index = rc.get("sample", sample, 0)?;
    let cfg = AnalysisConfig {
        outlier_fraction: rc.get("outlier_fraction", outlier_fraction, defaults.outlier_fraction)?,
        bins: rc.get("bins", bins, defaults.bins)?,
        ball_fit: rc.get("ball_fit", ball_fit, FitArg::from(defaults.ball_fit))?.into(),
        ..defaults
    };
    echo(rc);
    let test = load_dataset(data, Split::Test)?;
    let model = load_model(checkpoint, test.num_classes())?;
    let cloud = &test
        .samples
        .get(index)
        .ok_or_else(|| Error::Dataset(format!("sample {index} out of range: test split has {}", test.len())))?
        .cloud;
    let report = run_ift_signal_analysis(cloud, model.params(), &cfg)?;
    println!("spectral rms={:.6e} max_abs={:.6e}", report.spectral.rms, report.spectral.max_abs);
    println!("ift      rms={:.6e} max_abs={:.6e}", report.ift.rms, report.ift.max_abs);
    let mut table = report.to_table();
    table.metadata.push(("model_hash".into(), model.fingerprint()));
    table.metadata.push(("dataset_hash".into(), test.fingerprint()));
    write_result(&table, "ift-signal-analysis", &output, rc)?;
    Ok(())
}
