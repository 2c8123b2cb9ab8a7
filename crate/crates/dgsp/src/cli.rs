//! The `dgsp` command line.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use dgsp_core::anomaly::{score_stream, AlarmPolicy};
use dgsp_core::baseline::{random_baseline, tsr_baseline};
use dgsp_core::graph::AdjacencyMode;
use dgsp_core::metrics::{FoldReport, MetricsReport, Prediction, ReportContext};
use dgsp_core::optim::OptimizerKind;
use dgsp_core::train::{evaluate, kfold_split, train, FoldSplit, InitKind, SplitMode, TrainConfig};
use dgsp_core::{CellKind, InputRange, LabeledBucket, ModelConfig, NoiseSpec, Predictor, TemporalGraphSignal};
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::adapters::{self, DatasetKind};
use crate::bucketset::BucketSet;
use crate::canonical::{self, Strictness};
use crate::checkpoint::{load_checkpoint, save_checkpoint};
use crate::error::{Error, Result};
use crate::report::{self, RunConfig};
use crate::{io, synth};

pub const OUTPUT_ROOT_ENV: &str = "DGSP_OUTPUT_ROOT";

#[derive(Debug, Parser)]
#[command(name = "dgsp", version, about = "Similarity prediction for temporal graph signals")]
pub struct Cli {
    /// Root for default output directories.
    #[arg(long, global = true, env = OUTPUT_ROOT_ENV, default_value = "runs")]
    pub output_root: PathBuf,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Convert a published raw dataset file to the canonical format.
    Convert(ConvertArgs),
    /// Write a synthetic raw file shaped like a published dataset.
    Synth(SynthArgs),
    /// Cut a dataset into buckets and label them by noise injection.
    Prepare(PrepareArgs),
    /// Train one model per cross-validation fold (or one on all buckets).
    Train(TrainArgs),
    /// Score each fold's checkpoint on its held-out buckets.
    Eval(EvalArgs),
    /// Score the random and time-series-regression baselines.
    Baseline(BaselineArgs),
    /// Score a snapshot stream and flag anomalies.
    Detect(DetectArgs),
    /// Merge metric reports into one comparison table.
    Report(ReportArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum KindArg {
    Wikimath,
    Chickenpox,
    Pedalme,
    MontevideoBus,
    Metrala,
}

impl From<KindArg> for DatasetKind {
    fn from(k: KindArg) -> Self {
        match k {
            KindArg::Wikimath => DatasetKind::WikiMath,
            KindArg::Chickenpox => DatasetKind::Chickenpox,
            KindArg::Pedalme => DatasetKind::PedalMe,
            KindArg::MontevideoBus => DatasetKind::MontevideoBus,
            KindArg::Metrala => DatasetKind::MetraLa,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum CellArg {
    #[value(name = "a3tgcn", alias = "A3TGCN")]
    A3tgcn,
    #[value(name = "tgcn", alias = "TGCN")]
    Tgcn,
    #[value(name = "gconvgru", alias = "GConvGRU")]
    Gconvgru,
}

impl From<CellArg> for CellKind {
    fn from(c: CellArg) -> Self {
        match c {
            CellArg::A3tgcn => CellKind::A3Tgcn,
            CellArg::Tgcn => CellKind::Tgcn,
            CellArg::Gconvgru => CellKind::GConvGru,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum OptimizerArg {
    Adam,
    Sgd,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum SplitArg {
    Random,
    Contiguous,
}

impl From<SplitArg> for SplitMode {
    fn from(s: SplitArg) -> Self {
        match s {
            SplitArg::Random => SplitMode::Random,
            SplitArg::Contiguous => SplitMode::Contiguous,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum AdjacencyArg {
    Symmetric,
    Directed,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum InputRangeArg {
    /// [-1, 1]
    Centered,
    /// [0, 1]
    Unit,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum PolicyArg {
    Zscore,
    Threshold,
}

#[derive(Debug, Args)]
pub struct ConvertArgs {
    #[arg(long, value_enum)]
    pub kind: KindArg,
    /// Published raw file.
    #[arg(long)]
    pub raw: PathBuf,
    /// Canonical output file [default: <output-root>/<kind>.json].
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Keep only the first N snapshots.
    #[arg(long)]
    pub max_snapshots: Option<usize>,
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    #[arg(long, value_enum)]
    pub kind: KindArg,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct DatasetArgs {
    /// Canonical dataset file.
    #[arg(long)]
    pub dataset: PathBuf,
    /// Reject unknown fields in the dataset file.
    #[arg(long)]
    pub strict: bool,
}

#[derive(Debug, Args)]
pub struct PrepareArgs {
    #[command(flatten)]
    pub data: DatasetArgs,
    /// Snapshots per bucket; the last one is the candidate.
    #[arg(short = 'L', long = "bucket-len", default_value_t = 10)]
    pub bucket_len: usize,
    #[arg(long, default_value_t = 1)]
    pub stride: usize,
    /// Probability that a bucket's candidate is corrupted.
    #[arg(long = "p", default_value_t = 0.5)]
    pub corrupt_probability: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SplitArgs {
    #[arg(long, default_value_t = 3)]
    pub folds: usize,
    /// Seeds the fold split (and, for training, initialization and order).
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, value_enum, default_value = "random")]
    pub split: SplitArg,
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    #[command(flatten)]
    pub data: DatasetArgs,
    /// Bucket set written by `prepare`.
    #[arg(long)]
    pub buckets: PathBuf,
    #[arg(long, value_enum, default_value = "a3tgcn")]
    pub cell: CellArg,
    #[arg(long, default_value_t = 30)]
    pub epochs: usize,
    #[arg(long, default_value_t = 0.01)]
    pub lr: f64,
    #[arg(long, default_value_t = 32)]
    pub embed_dim: usize,
    #[arg(long, value_enum, default_value = "adam")]
    pub optimizer: OptimizerArg,
    /// Buckets averaged per optimizer step.
    #[arg(long, default_value_t = 8)]
    pub batch_size: usize,
    /// Interval the training-split bounds map inputs onto.
    #[arg(long, value_enum, default_value = "centered")]
    pub input_range: InputRangeArg,
    #[arg(long, value_enum, default_value = "symmetric")]
    pub adjacency: AdjacencyArg,
    /// Re-corrupt training candidates every epoch.
    #[arg(long)]
    pub redraw_noise: bool,
    /// Train a single model on every bucket instead of per fold.
    #[arg(long)]
    pub full: bool,
    #[command(flatten)]
    pub split: SplitArgs,
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    /// Directory written by `train`.
    #[arg(long)]
    pub run: PathBuf,
    /// [default: <run>/eval]
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct BaselineArgs {
    #[command(flatten)]
    pub data: DatasetArgs,
    #[arg(long)]
    pub buckets: PathBuf,
    #[command(flatten)]
    pub split: SplitArgs,
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct DetectArgs {
    #[command(flatten)]
    pub data: DatasetArgs,
    #[arg(long)]
    pub checkpoint: PathBuf,
    /// Window length scored at every step.
    #[arg(short = 'L', long = "bucket-len", default_value_t = 10)]
    pub bucket_len: usize,
    #[arg(long, value_enum, default_value = "zscore")]
    pub policy: PolicyArg,
    /// Trailing scores used by the z-score rule.
    #[arg(long, default_value_t = 20)]
    pub window: usize,
    /// Standard deviations below the trailing mean that raise an alarm.
    #[arg(long, default_value_t = 3.0)]
    pub k: f64,
    #[arg(long, default_value_t = AlarmPolicy::DEFAULT_THRESHOLD)]
    pub threshold: f64,
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ReportArgs {
    /// Metric reports written by `eval` or `baseline`.
    #[arg(required = true)]
    pub inputs: Vec<PathBuf>,
    /// [default: <output-root>/report/report.csv]
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Merge reports computed with different bucket lengths or noise.
    #[arg(long)]
    pub allow_mixed: bool,
}

/// Parses `args` (program name first) and runs the command. Progress lines
/// go to `out`.
pub fn run<I, T>(args: I, out: &mut dyn Write) -> Result<()>
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = write!(out, "{}", e.render());
                return Ok(());
            }
            let text = e.to_string();
            let line = text.lines().next().unwrap_or("invalid arguments").trim_start_matches("error: ");
            return Err(Error::Usage(line.to_string()));
        }
    };
    execute(&cli, out)
}

pub fn execute(cli: &Cli, out: &mut dyn Write) -> Result<()> {
    let root = &cli.output_root;
    match &cli.command {
        Command::Convert(a) => convert(a, root, out),
        Command::Synth(a) => synth_cmd(a, out),
        Command::Prepare(a) => prepare(a, root, out),
        Command::Train(a) => train_cmd(a, root, out),
        Command::Eval(a) => eval(a, out),
        Command::Baseline(a) => baseline(a, root, out),
        Command::Detect(a) => detect(a, root, out),
        Command::Report(a) => report_cmd(a, root, out),
    }
}

fn say(out: &mut dyn Write, line: String) {
    let _ = writeln!(out, "{line}");
}

fn load_dataset(args: &DatasetArgs) -> Result<TemporalGraphSignal> {
    let strictness = if args.strict { Strictness::Strict } else { Strictness::Lenient };
    let loaded = canonical::load_canonical(&args.dataset, strictness)?;
    for w in &loaded.warnings {
        eprintln!("warning: {w}");
    }
    Ok(loaded.signal)
}

/// Absolute form of a path that exists, so run configs work from any
/// directory.
fn absolute(path: &Path) -> PathBuf {
    std::fs::canonicalize(path).unwrap_or_else(|_| path.to_path_buf())
}

fn out_dir(explicit: &Option<PathBuf>, root: &Path, name: &str) -> PathBuf {
    explicit.clone().unwrap_or_else(|| root.join(name))
}

fn convert(a: &ConvertArgs, root: &Path, out: &mut dyn Write) -> Result<()> {
    let kind = DatasetKind::from(a.kind);
    let mut signal = adapters::adapt_file(&a.raw, kind)?;
    if let Some(max) = a.max_snapshots {
        if max == 0 {
            return Err(Error::Usage("--max-snapshots must be at least 1".into()));
        }
        if max < signal.num_snapshots() {
            let keep = signal.features()[..max * signal.num_nodes() * signal.num_channels()].to_vec();
            signal = TemporalGraphSignal::from_flat(
                signal.name(),
                signal.num_nodes(),
                signal.num_channels(),
                signal.edges().to_vec(),
                Some(signal.weights().to_vec()),
                signal.frequency(),
                keep,
            )?;
        }
    }
    for w in adapters::count_mismatches(kind, &signal) {
        eprintln!("warning: {w}");
    }
    let path = a.out.clone().unwrap_or_else(|| root.join(format!("{}.json", kind.name().to_lowercase())));
    canonical::write_canonical(&signal, &path)?;
    say(
        out,
        format!(
            "{}: {} nodes, {} edges, {} snapshots, {} channel(s) -> {}",
            kind,
            signal.num_nodes(),
            signal.edges().len(),
            signal.num_snapshots(),
            signal.num_channels(),
            path.display()
        ),
    );
    Ok(())
}

fn synth_cmd(a: &SynthArgs, out: &mut dyn Write) -> Result<()> {
    let kind = DatasetKind::from(a.kind);
    let doc = synth::surrogate(kind, a.seed)?;
    io::write_json_compact(&a.out, &doc)?;
    say(out, format!("synthetic {kind} raw file -> {}", a.out.display()));
    Ok(())
}

fn prepare(a: &PrepareArgs, root: &Path, out: &mut dyn Write) -> Result<()> {
    let signal = load_dataset(&a.data)?;
    let noise = NoiseSpec { corrupt_probability: a.corrupt_probability, seed: a.seed };
    let set = BucketSet::generate(&signal, a.bucket_len, a.stride, noise)?;
    let dir = out_dir(&a.out_dir, root, "prepare");
    let path = dir.join("buckets.json");
    set.save(&path)?;
    let corrupted = set.buckets.iter().filter(|b| !b.perturbed_nodes.is_empty()).count();
    RunConfig {
        dataset: Some(absolute(&a.data.dataset)),
        bucket_len: Some(a.bucket_len),
        stride: Some(a.stride),
        noise: Some(noise),
        seed: Some(a.seed),
        ..RunConfig::new("prepare", &dir)
    }
    .save()?;
    say(out, format!("{} labeled buckets ({corrupted} corrupted) -> {}", set.buckets.len(), path.display()));
    Ok(())
}

fn load_buckets(path: &Path, signal: &TemporalGraphSignal) -> Result<(BucketSet, Vec<LabeledBucket>)> {
    let set = BucketSet::load(path)?;
    let labeled = set.labeled(signal)?;
    if labeled.is_empty() {
        return Err(Error::Mismatch(format!("{}: bucket set is empty", path.display())));
    }
    Ok((set, labeled))
}

fn write_loss_history(path: &Path, history: &[f64]) -> Result<()> {
    let mut rows = vec![vec!["epoch".to_string(), "loss".to_string()]];
    rows.extend(history.iter().enumerate().map(|(e, l)| vec![(e + 1).to_string(), l.to_string()]));
    report::write_csv(path, &rows)
}

/// Extra fields of a training run config.
#[derive(Debug, Serialize, Deserialize)]
struct TrainExtra {
    full: bool,
}

fn train_cmd(a: &TrainArgs, root: &Path, out: &mut dyn Write) -> Result<()> {
    let signal = load_dataset(&a.data)?;
    let (set, labeled) = load_buckets(&a.buckets, &signal)?;
    let config = TrainConfig {
        epochs: a.epochs,
        learning_rate: a.lr,
        bucket_len: set.bucket_len,
        folds: a.split.folds,
        seed: a.split.seed,
        optimizer: match a.optimizer {
            OptimizerArg::Adam => OptimizerKind::Adam,
            OptimizerArg::Sgd => OptimizerKind::Sgd,
        },
        batch_size: a.batch_size,
        split_mode: a.split.split.into(),
        init: InitKind::Glorot,
        redraw_noise: a.redraw_noise,
        ..TrainConfig::default()
    };
    config.validate()?;
    let mut model = ModelConfig::new(a.cell.into(), signal.num_channels());
    model.embed_dim = a.embed_dim;
    model.attention_dim = a.embed_dim;
    model.adjacency = match a.adjacency {
        AdjacencyArg::Symmetric => AdjacencyMode::Symmetric,
        AdjacencyArg::Directed => AdjacencyMode::Directed,
    };
    model.input_range = match a.input_range {
        InputRangeArg::Centered => InputRange::Centered,
        InputRangeArg::Unit => InputRange::Unit,
    };
    model.validate()?;

    let dir = out_dir(&a.out_dir, root, &format!("train-{}", model.cell.name().to_lowercase()));
    let whole = dgsp_core::graph::node_bounds(&signal, 0..signal.num_snapshots())?;
    let noise = a.redraw_noise.then_some((&whole, &set.noise));

    if a.full {
        let all: Vec<&LabeledBucket> = labeled.iter().collect();
        let outcome = train(&signal, &all, &config, &model, noise)?;
        save_checkpoint(&outcome.checkpoint, &dir.join("checkpoint.json"))?;
        write_loss_history(&dir.join("loss_history.csv"), &outcome.loss_history)?;
        say(out, format!("{}: full model, final loss {:.6}", model.cell, outcome.loss_history.last().unwrap_or(&f64::NAN)));
    } else {
        let splits = kfold_split(labeled.len(), config.folds, config.seed, config.split_mode)?;
        io::write_json(&dir.join("splits.json"), &splits)?;
        for (i, split) in splits.iter().enumerate() {
            let fold_config = TrainConfig { seed: config.seed.wrapping_add(i as u64), ..config.clone() };
            let outcome = train(&signal, &split.train_items(&labeled), &fold_config, &model, noise)?;
            let fold_dir = dir.join(format!("fold{i}"));
            save_checkpoint(&outcome.checkpoint, &fold_dir.join("checkpoint.json"))?;
            write_loss_history(&fold_dir.join("loss_history.csv"), &outcome.loss_history)?;
            say(
                out,
                format!(
                    "{} fold {i}: {} train buckets, final loss {:.6}",
                    model.cell,
                    split.train.len(),
                    outcome.loss_history.last().unwrap_or(&f64::NAN)
                ),
            );
        }
    }
    RunConfig {
        dataset: Some(absolute(&a.data.dataset)),
        buckets: Some(absolute(&a.buckets)),
        bucket_len: Some(set.bucket_len),
        stride: Some(set.stride),
        noise: Some(set.noise),
        train: Some(config.clone()),
        model: Some(model),
        seed: Some(config.seed),
        extra: serde_json::to_value(TrainExtra { full: a.full }).expect("plain struct"),
        ..RunConfig::new("train", &dir)
    }
    .save()?;
    say(out, format!("checkpoints -> {}", dir.display()));
    Ok(())
}

fn context(set: &BucketSet, folds: usize, seed: u64, split: SplitMode, train: Option<&TrainConfig>) -> ReportContext {
    ReportContext {
        dataset: set.dataset.clone(),
        bucket_len: set.bucket_len,
        stride: set.stride,
        noise: set.noise,
        folds,
        split_seed: seed,
        split_mode: split,
        epochs: train.map(|t| t.epochs),
        learning_rate: train.map(|t| t.learning_rate),
        optimizer: train.map(|t| t.optimizer),
    }
}

fn eval(a: &EvalArgs, out: &mut dyn Write) -> Result<()> {
    let run = RunConfig::load(&a.run)?;
    let missing = |what: &str| Error::Mismatch(format!("{}: run config has no {what}; is this a train run?", a.run.display()));
    if run.command != "train" {
        return Err(missing("training settings"));
    }
    let full: TrainExtra = serde_json::from_value(run.extra.clone()).map_err(|_| missing("train flags"))?;
    if full.full {
        return Err(Error::Mismatch(format!(
            "{}: a full-data model has no held-out buckets to evaluate",
            a.run.display()
        )));
    }
    let dataset = run.dataset.clone().ok_or_else(|| missing("dataset"))?;
    let buckets = run.buckets.clone().ok_or_else(|| missing("bucket set"))?;
    let config = run.train.clone().ok_or_else(|| missing("training settings"))?;
    let model = run.model.clone().ok_or_else(|| missing("model"))?;

    let signal = load_dataset(&DatasetArgs { dataset: dataset.clone(), strict: false })?;
    let (set, labeled) = load_buckets(&buckets, &signal)?;
    let splits: Vec<FoldSplit> = io::read_typed(&a.run.join("splits.json"))?;
    let expected = kfold_split(labeled.len(), config.folds, config.seed, config.split_mode)?;
    if splits != expected {
        return Err(Error::Mismatch(format!("{}: splits.json does not match the run config", a.run.display())));
    }
    let mut folds = Vec::with_capacity(splits.len());
    for (i, split) in splits.iter().enumerate() {
        let ck = load_checkpoint(&a.run.join(format!("fold{i}")).join("checkpoint.json"))?;
        if ck.config != model {
            return Err(Error::Mismatch(format!("fold {i} checkpoint does not match the run's model config")));
        }
        folds.push(evaluate(&ck, &signal, &split.test_items(&labeled), i).map_err(Error::Training)?);
    }
    let ctx = context(&set, config.folds, config.seed, config.split_mode, Some(&config));
    let report = MetricsReport::new(model.cell.name(), ctx, folds).map_err(Error::Training)?;
    let dir = a.out_dir.clone().unwrap_or_else(|| a.run.join("eval"));
    report::write_metrics(&dir, "metrics", &report)?;
    RunConfig {
        dataset: Some(dataset),
        buckets: Some(buckets),
        bucket_len: Some(set.bucket_len),
        stride: Some(set.stride),
        noise: Some(set.noise),
        train: Some(config.clone()),
        model: Some(model),
        seed: Some(config.seed),
        extra: json!({ "run": absolute(&a.run) }),
        ..RunConfig::new("eval", &dir)
    }
    .save()?;
    say(
        out,
        format!(
            "{}: mean MSE {:.6}, MAE {:.6}, RMSE {:.6} -> {}",
            report.method,
            report.mean.mse,
            report.mean.mae,
            report.mean.rmse,
            dir.join("metrics.json").display()
        ),
    );
    Ok(())
}

/// Random and time-series-regression reports over the same folds a
/// training run with this split would use.
pub fn baseline_reports(
    signal: &TemporalGraphSignal,
    set: &BucketSet,
    labeled: &[LabeledBucket],
    folds: usize,
    seed: u64,
    split: SplitMode,
) -> Result<(MetricsReport, MetricsReport)> {
    let splits = kfold_split(labeled.len(), folds, seed, split)?;
    let (mut random, mut tsr) = (Vec::new(), Vec::new());
    for (i, s) in splits.iter().enumerate() {
        let test = s.test_items(labeled);
        let draws = random_baseline(test.len(), seed.wrapping_add(i as u64));
        let preds = test
            .iter()
            .zip(&draws)
            .map(|(b, &p)| Prediction { start: b.start, label: b.label, prediction: p })
            .collect();
        random.push(FoldReport::from_predictions(i, preds)?);
        let preds = test
            .iter()
            .map(|b| Ok(Prediction { start: b.start, label: b.label, prediction: tsr_baseline(signal, *b)? }))
            .collect::<Result<Vec<_>>>()?;
        tsr.push(FoldReport::from_predictions(i, preds)?);
    }
    let ctx = context(set, folds, seed, split, None);
    Ok((MetricsReport::new("random", ctx.clone(), random)?, MetricsReport::new("tsr", ctx, tsr)?))
}

fn baseline(a: &BaselineArgs, root: &Path, out: &mut dyn Write) -> Result<()> {
    let signal = load_dataset(&a.data)?;
    let (set, labeled) = load_buckets(&a.buckets, &signal)?;
    let (random, tsr) = baseline_reports(&signal, &set, &labeled, a.split.folds, a.split.seed, a.split.split.into())?;
    let dir = out_dir(&a.out_dir, root, "baseline");
    report::write_metrics(&dir, "random", &random)?;
    report::write_metrics(&dir, "tsr", &tsr)?;
    let mut rows = report::metrics_rows(&random);
    rows.extend(report::metrics_rows(&tsr).into_iter().skip(1));
    report::write_csv(&dir.join("baselines.csv"), &rows)?;
    RunConfig {
        dataset: Some(absolute(&a.data.dataset)),
        buckets: Some(absolute(&a.buckets)),
        bucket_len: Some(set.bucket_len),
        stride: Some(set.stride),
        noise: Some(set.noise),
        seed: Some(a.split.seed),
        extra: json!({ "folds": a.split.folds, "split": SplitMode::from(a.split.split) }),
        ..RunConfig::new("baseline", &dir)
    }
    .save()?;
    for r in [&random, &tsr] {
        say(out, format!("{}: mean MSE {:.6}, MAE {:.6}, RMSE {:.6}", r.method, r.mean.mse, r.mean.mae, r.mean.rmse));
    }
    say(out, format!("reports -> {}", dir.display()));
    Ok(())
}

#[derive(Serialize)]
struct EventsFile<'a> {
    dataset: &'a str,
    bucket_len: usize,
    policy: AlarmPolicy,
    first_index: usize,
    events: &'a [dgsp_core::anomaly::AnomalyEvent],
}

fn detect(a: &DetectArgs, root: &Path, out: &mut dyn Write) -> Result<()> {
    let signal = load_dataset(&a.data)?;
    let ck = load_checkpoint(&a.checkpoint)?;
    let policy = match a.policy {
        PolicyArg::Zscore => AlarmPolicy::ZScore { window: a.window, multiplier: a.k },
        PolicyArg::Threshold => AlarmPolicy::FixedThreshold { threshold: a.threshold },
    };
    policy.validate()?;
    let predictor = Predictor::new(ck, &signal).map_err(|e| Error::Mismatch(e.to_string()))?;
    let stream = score_stream(&predictor, &signal, a.bucket_len)?;
    let detection = stream.detect(&policy)?;
    let dir = out_dir(&a.out_dir, root, "detect");
    io::write_json(
        &dir.join("events.json"),
        &EventsFile {
            dataset: signal.name(),
            bucket_len: a.bucket_len,
            policy,
            first_index: stream.first_index,
            events: &detection.events,
        },
    )?;
    let mut rows = vec![["index", "score", "threshold"].map(String::from).to_vec()];
    for (i, (score, threshold)) in stream.scores.iter().zip(&detection.thresholds).enumerate() {
        rows.push(vec![
            (stream.first_index + i).to_string(),
            score.to_string(),
            threshold.map(|t| t.to_string()).unwrap_or_default(),
        ]);
    }
    report::write_csv(&dir.join("scores.csv"), &rows)?;
    RunConfig {
        dataset: Some(absolute(&a.data.dataset)),
        bucket_len: Some(a.bucket_len),
        extra: json!({ "checkpoint": absolute(&a.checkpoint), "policy": policy }),
        ..RunConfig::new("detect", &dir)
    }
    .save()?;
    say(out, format!("{} scores, {} events -> {}", stream.scores.len(), detection.events.len(), dir.display()));
    Ok(())
}

fn report_cmd(a: &ReportArgs, root: &Path, out: &mut dyn Write) -> Result<()> {
    let reports = a.inputs.iter().map(|p| report::read_metrics(p)).collect::<Result<Vec<_>>>()?;
    let rows = report::comparison_table(&reports, a.allow_mixed)?;
    let path = a.out.clone().unwrap_or_else(|| root.join("report").join("report.csv"));
    report::write_csv(&path, &rows)?;
    let dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
    RunConfig {
        extra: json!({
            "inputs": a.inputs.iter().map(|p| absolute(p)).collect::<Vec<_>>(),
            "allow_mixed": a.allow_mixed,
        }),
        ..RunConfig::new("report", &dir)
    }
    .save()?;
    say(out, format!("{} methods -> {}", rows.len() - 1, path.display()));
    Ok(())
}
