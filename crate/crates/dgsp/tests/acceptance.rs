//! End-to-end acceptance run. Prints one PASS/FAIL line per criterion and a
//! summary. With `DGSP_ACCEPTANCE_STRICT=1` a hard failure also makes the
//! process exit non-zero.
//!
//! Datasets come from `$DGSP_DATA_DIR/<kind>.json` (published raw files) when
//! present, otherwise from the seeded surrogates of `dgsp synth`.

use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use dgsp::adapters::{adapt, adapt_file, DatasetKind};
use dgsp::bucketset::BucketSet;
use dgsp::cli::baseline_reports;
use dgsp::synth;
use dgsp_core::anomaly::{score_stream, AlarmPolicy};
use dgsp_core::baseline::{ols_fit, tsr_baseline};
use dgsp_core::graph::node_bounds;
use dgsp_core::metrics::{compute_metrics, MetricsReport, ReportContext};
use dgsp_core::model::{bind_vars, forward};
use dgsp_core::noise::{bucketize, corrupt_k, inject_noise};
use dgsp_core::train::{cross_validate, CrossValidation, SplitMode, TrainConfig};
use dgsp_core::{
    grad_check, Bucket, CellKind, LabeledBucket, ModelConfig, ModelParams, NoiseSpec, Predictor, Tape,
    TemporalGraphSignal, Tensor, Var, Window,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

struct Outcome {
    pass: bool,
    detail: String,
}

impl Outcome {
    fn new(pass: bool, detail: impl Into<String>) -> Self {
        Outcome { pass, detail: detail.into() }
    }
}

struct Harness {
    hard_failures: usize,
}

impl Harness {
    fn run(&mut self, id: u32, name: &str, limit: Option<Duration>, soft: bool, f: impl FnOnce() -> Outcome) {
        let t0 = Instant::now();
        let out = f();
        let took = t0.elapsed();
        let in_time = limit.map_or(true, |l| took <= l);
        let pass = out.pass && in_time;
        let budget = limit.map(|l| format!(" of {}s", l.as_secs())).unwrap_or_default();
        let tag = match (pass, soft) {
            (true, _) => "PASS",
            (false, true) => "FAIL (soft)",
            (false, false) => "FAIL",
        };
        let late = if in_time { "" } else { " [over time budget]" };
        println!("{tag} [{id:>2}] {name}: {} ({:.1}s{budget}){late}", out.detail, took.as_secs_f64());
        if !pass && !soft {
            self.hard_failures += 1;
        }
    }
}

fn dataset(kind: DatasetKind) -> (TemporalGraphSignal, &'static str) {
    if let Some(dir) = std::env::var_os("DGSP_DATA_DIR") {
        let path = PathBuf::from(dir).join(format!("{}.json", kind.name().to_lowercase()));
        if path.exists() {
            return (adapt_file(&path, kind).expect("published raw file"), "published");
        }
    }
    let doc = synth::surrogate(kind, 0).expect("surrogate");
    (adapt(Path::new("surrogate"), &doc, kind).expect("surrogate adapts"), "surrogate")
}

// 1

fn random_tensor(rng: &mut ChaCha8Rng, r: usize, c: usize, scale: f64) -> Tensor {
    Tensor::new(r, c, (0..r * c).map(|_| rng.gen_range(-scale..scale)).collect()).unwrap()
}

type Loss = Box<dyn Fn(&mut Tape, &[Var]) -> dgsp_core::Result<Var>>;

fn op_cases(rng: &mut ChaCha8Rng) -> Vec<(&'static str, Loss, Vec<Tensor>)> {
    let a = random_tensor(rng, 3, 4, 2.0);
    let b = random_tensor(rng, 3, 4, 2.0);
    let w = random_tensor(rng, 4, 2, 2.0);
    let bias = random_tensor(rng, 1, 4, 2.0);
    let col = random_tensor(rng, 3, 1, 2.0);
    let mix = random_tensor(rng, 5, 1, 1.0);
    fn sq_mean(t: &mut Tape, v: Var) -> dgsp_core::Result<Var> {
        let s = t.square(v)?;
        t.mean_all(s)
    }
    vec![
        ("matmul", Box::new(|t, v| { let p = t.matmul(v[0], v[1])?; sq_mean(t, p) }), vec![a.clone(), w]),
        ("add", Box::new(|t, v| { let p = t.add(v[0], v[1])?; sq_mean(t, p) }), vec![a.clone(), bias]),
        ("subtract", Box::new(|t, v| { let p = t.sub(v[0], v[1])?; sq_mean(t, p) }), vec![a.clone(), b.clone()]),
        ("multiply", Box::new(|t, v| { let p = t.mul(v[0], v[1])?; sq_mean(t, p) }), vec![a.clone(), b.clone()]),
        ("multiply-column", Box::new(|t, v| { let p = t.mul(v[0], v[1])?; sq_mean(t, p) }), vec![a.clone(), col.clone()]),
        ("sigmoid", Box::new(|t, v| { let p = t.sigmoid(v[0])?; sq_mean(t, p) }), vec![a.clone()]),
        ("tanh", Box::new(|t, v| { let p = t.tanh(v[0])?; sq_mean(t, p) }), vec![a.clone()]),
        ("relu", Box::new(|t, v| { let p = t.relu(v[0])?; sq_mean(t, p) }), vec![a.clone()]),
        (
            "concat-columns",
            Box::new(|t, v| {
                let p = t.concat_cols(&[v[0], v[1]])?;
                let s = t.square(p)?;
                let q = t.matmul(s, v[2])?;
                t.mean_all(q)
            }),
            vec![a.clone(), col, mix],
        ),
        ("slice-columns", Box::new(|t, v| { let p = t.slice_cols(v[0], 1, 2)?; sq_mean(t, p) }), vec![a.clone()]),
        ("mean-rows", Box::new(|t, v| { let p = t.mean_rows(v[0])?; sq_mean(t, p) }), vec![a.clone()]),
        ("mean-all", Box::new(|t, v| { let p = t.tanh(v[0])?; t.mean_all(p) }), vec![a.clone()]),
        (
            "softmax-rows",
            Box::new(|t, v| {
                let p = t.softmax_rows(v[0])?;
                let q = t.mul(p, v[1])?;
                sq_mean(t, q)
            }),
            vec![a.clone(), b],
        ),
        ("scalar-multiply", Box::new(|t, v| { let p = t.scale(v[0], -1.7)?; sq_mean(t, p) }), vec![a.clone()]),
        ("square", Box::new(|t, v| { let p = t.square(v[0])?; t.mean_all(p) }), vec![a]),
    ]
}

fn full_forward_error(cell: CellKind, seed: u64) -> f64 {
    let (n, f, len) = (3, 2, 4);
    let adj = Tensor::from_rows(&[vec![0.5, 0.5, 0.0], vec![1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0], vec![0.0, 0.5, 0.5]])
        .unwrap();
    let config = ModelConfig::new(cell, f);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut point: Vec<Tensor> = ModelParams::init(&config, seed)
        .tensors()
        .iter()
        .map(|t| {
            let mut t = t.clone();
            t.data_mut().iter_mut().for_each(|x| *x += rng.gen_range(-0.2..0.2));
            t
        })
        .collect();
    let count = point.len();
    point.extend((0..len).map(|_| random_tensor(&mut rng, n, f, 1.0)));
    grad_check(
        |tape, vars| {
            let bound = bind_vars(&config, vars[..count].to_vec())?;
            let a = tape.constant(adj.clone());
            let out = forward(tape, &bound, a, &vars[count..])?;
            let y = tape.constant(Tensor::scalar(0.35));
            let e = tape.sub(out.output, y)?;
            let sq = tape.square(e)?;
            tape.mean_all(sq)
        },
        &point,
        1e-5,
    )
    .unwrap()
}

fn gradients() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut worst_op = ("", 0.0f64);
    for _ in 0..100 {
        for (name, f, point) in op_cases(&mut rng) {
            let err = grad_check(&*f, &point, 1e-5).unwrap();
            if err > worst_op.1 {
                worst_op = (name, err);
            }
        }
    }
    let mut worst_model = (CellKind::A3Tgcn, 0.0f64);
    for (i, cell) in CellKind::ALL.into_iter().enumerate() {
        let err = full_forward_error(cell, 11 + i as u64);
        if err > worst_model.1 {
            worst_model = (cell, err);
        }
    }
    Outcome::new(
        worst_op.1 < 1e-4 && worst_model.1 < 1e-4,
        format!(
            "15 ops x 100 points, worst {} {:.1e}; forward+loss worst {} {:.1e}",
            worst_op.0, worst_op.1, worst_model.0, worst_model.1
        ),
    )
}

// 2

fn noise_exactness() -> Outcome {
    let (n, f) = (9, 2);
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let snaps: Vec<Vec<Vec<f64>>> = (0..10_009)
        .map(|_| (0..n).map(|v| (0..f).map(|_| rng.gen_range(-5.0..50.0) + v as f64).collect()).collect())
        .collect();
    let s = TemporalGraphSignal::new("noise", n, vec![(0, 1)], None, "", &snaps).unwrap();
    let buckets = bucketize(&s, 10, 1).unwrap();
    let bounds = node_bounds(&s, 0..s.num_snapshots()).unwrap();
    let labeled = inject_noise(&s, &buckets, &bounds, &NoiseSpec { corrupt_probability: 0.5, seed: 2 }).unwrap();
    let (mut bad_label, mut out_of_bounds, mut touched) = (0, 0, 0);
    for b in &labeled {
        if b.label * n as f64 + b.perturbed_nodes.len() as f64 != n as f64 {
            bad_label += 1;
        }
        for i in 0..b.len - 1 {
            if b.snapshot(&s, i) != s.snapshot(b.start + i) {
                touched += 1;
            }
        }
        let original = s.snapshot(b.start + b.len - 1);
        for v in 0..n {
            for c in 0..f {
                let x = b.candidate[v * f + c];
                let (lo, hi) = bounds.get(v, c);
                if b.perturbed_nodes.contains(&v) {
                    if !(lo..=hi).contains(&x) {
                        out_of_bounds += 1;
                    }
                } else if x.to_bits() != original[v * f + c].to_bits() {
                    touched += 1;
                }
            }
        }
    }
    let corrupted = labeled.iter().filter(|b| !b.perturbed_nodes.is_empty()).count();
    Outcome::new(
        labeled.len() == 10_000 && bad_label == 0 && out_of_bounds == 0 && touched == 0,
        format!(
            "{} buckets ({corrupted} corrupted): {bad_label} label errors, {out_of_bounds} out-of-bounds values, {touched} modified untouchable values",
            labeled.len()
        ),
    )
}

// 3

fn tsr_reference(s: &TemporalGraphSignal, b: &LabeledBucket) -> f64 {
    let width = s.num_nodes() * s.num_channels();
    let mut sum = 0.0;
    for j in 0..width {
        let ys: Vec<f64> = (0..b.len).map(|i| b.snapshot(s, i)[j]).collect();
        let lo = ys.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = ys.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let z: Vec<f64> = ys.iter().map(|y| if hi > lo { (y - lo) / (hi - lo) } else { 0.0 }).collect();
        let t: Vec<f64> = (0..b.len - 1).map(|i| i as f64).collect();
        let (slope, icpt) = ols_fit(&t, &z[..b.len - 1]).unwrap();
        sum += (1.0 - (z[b.len - 1] - (slope * (b.len - 1) as f64 + icpt)).abs()).clamp(0.0, 1.0);
    }
    sum / width as f64
}

fn baseline_oracle() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut worst_linear = 0.0f64;
    for _ in 0..50 {
        let (n, f) = (rng.gen_range(1..8), rng.gen_range(1..3));
        let lines: Vec<(f64, f64)> = (0..n * f).map(|_| (rng.gen_range(-9.0..9.0), rng.gen_range(-99.0..99.0))).collect();
        let snaps: Vec<Vec<Vec<f64>>> = (0..25)
            .map(|t| (0..n).map(|v| (0..f).map(|c| lines[v * f + c].0 * t as f64 + lines[v * f + c].1).collect()).collect())
            .collect();
        let s = TemporalGraphSignal::new("lin", n, vec![], None, "", &snaps).unwrap();
        for b in bucketize(&s, 10, 5).unwrap() {
            worst_linear = worst_linear.max((tsr_baseline(&s, &b).unwrap() - 1.0).abs());
        }
    }

    let (s, _) = dataset(DatasetKind::Chickenpox);
    let bounds = node_bounds(&s, 0..s.num_snapshots()).unwrap();
    let starts: Vec<Bucket> = (0..1000).map(|_| Bucket { start: rng.gen_range(0..=s.num_snapshots() - 10), len: 10 }).collect();
    let labeled = inject_noise(&s, &starts, &bounds, &NoiseSpec { corrupt_probability: 0.5, seed: 3 }).unwrap();
    let worst_oracle = labeled
        .iter()
        .map(|b| (tsr_baseline(&s, b).unwrap() - tsr_reference(&s, b)).abs())
        .fold(0.0, f64::max);
    Outcome::new(
        worst_linear <= 1e-9 && worst_oracle <= 1e-9,
        format!("linear clean |1 - y| max {worst_linear:.1e}; 1000 Chickenpox buckets vs node-by-node max {worst_oracle:.1e}"),
    )
}

// 4

fn metric_identities() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let (mut worst, mut violations) = (0.0f64, 0);
    for _ in 0..1000 {
        let n = rng.gen_range(1..500);
        let p: Vec<f64> = (0..n).map(|_| rng.gen()).collect();
        let y: Vec<f64> = (0..n).map(|_| rng.gen()).collect();
        let m = compute_metrics(&p, &y).unwrap();
        worst = worst.max((m.rmse - m.mse.sqrt()).abs());
        if m.mae > m.rmse {
            violations += 1;
        }
    }
    Outcome::new(worst <= 1e-12 && violations == 0, format!("|RMSE - sqrt(MSE)| max {worst:.1e}, {violations} MAE > RMSE"))
}

// 5, 6, 8, 9

struct ChickenpoxRun {
    signal: TemporalGraphSignal,
    source: &'static str,
    labeled: Vec<LabeledBucket>,
    random: MetricsReport,
    tsr: MetricsReport,
    a3tgcn: CrossValidation,
}

fn chickenpox_setup() -> (TemporalGraphSignal, &'static str, BucketSet, Vec<LabeledBucket>) {
    let (signal, source) = dataset(DatasetKind::Chickenpox);
    let set = BucketSet::generate(&signal, 10, 1, NoiseSpec { corrupt_probability: 0.5, seed: 0 }).unwrap();
    let labeled = set.labeled(&signal).unwrap();
    (signal, source, set, labeled)
}

fn context(set: &BucketSet, config: &TrainConfig) -> ReportContext {
    ReportContext {
        dataset: set.dataset.clone(),
        bucket_len: set.bucket_len,
        stride: set.stride,
        noise: set.noise,
        folds: config.folds,
        split_seed: config.seed,
        split_mode: config.split_mode,
        epochs: Some(config.epochs),
        learning_rate: Some(config.learning_rate),
        optimizer: Some(config.optimizer),
    }
}

fn model_beats_baselines(run: &mut Option<ChickenpoxRun>) -> Outcome {
    let (signal, source, set, labeled) = chickenpox_setup();
    let config = TrainConfig::default();
    let (random, tsr) = baseline_reports(&signal, &set, &labeled, config.folds, config.seed, SplitMode::Random).unwrap();
    let model = ModelConfig::new(CellKind::A3Tgcn, signal.num_channels());
    let cv = cross_validate(&signal, &labeled, &config, &model, context(&set, &config), None).unwrap();
    let mse = cv.report.mean.mse;
    let folds: Vec<String> = cv.report.folds.iter().map(|f| format!("{:.4}", f.metrics.mse)).collect();
    let out = Outcome::new(
        mse < 0.15 && mse < random.mean.mse && mse < tsr.mean.mse,
        format!(
            "{source} Chickenpox, {} buckets: A3TGCN {mse:.4} (folds {}) vs tsr {:.4}, random {:.4}",
            labeled.len(),
            folds.join(", "),
            tsr.mean.mse,
            random.mean.mse
        ),
    );
    *run = Some(ChickenpoxRun { signal, source, labeled, random, tsr, a3tgcn: cv });
    out
}

fn cell_ordering(run: &ChickenpoxRun) -> Outcome {
    let (_, _, set, _) = chickenpox_setup();
    let config = TrainConfig::default();
    let a3 = run.a3tgcn.report.mean.mse;
    let mut parts = vec![format!("A3TGCN {a3:.4}")];
    let mut pass = true;
    for cell in [CellKind::Tgcn, CellKind::GConvGru] {
        let model = ModelConfig::new(cell, run.signal.num_channels());
        let cv = cross_validate(&run.signal, &run.labeled, &config, &model, context(&set, &config), None).unwrap();
        let mse = cv.report.mean.mse;
        pass &= a3 <= mse + 0.02;
        parts.push(format!("{cell} {mse:.4}"));
    }
    Outcome::new(pass, format!("{} (slack 0.02)", parts.join(", ")))
}

fn ranking(run: &ChickenpoxRun) -> Outcome {
    let s = &run.signal;
    let bounds = node_bounds(s, 0..s.num_snapshots()).unwrap();
    let k = (0.9 * s.num_nodes() as f64).round() as usize;
    let (mut wins, mut total) = (0, 0);
    for (i, (split, outcome)) in run.a3tgcn.splits.iter().zip(&run.a3tgcn.outcomes).enumerate() {
        let predictor = Predictor::new(outcome.checkpoint.clone(), s).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(800 + i as u64);
        for b in split.test_items(&run.labeled) {
            let bucket = b.bucket();
            let clean = LabeledBucket::clean(s, bucket);
            let corrupted = corrupt_k(s, bucket, &bounds, k, &mut rng);
            if predictor.predict(s, &clean).unwrap() > predictor.predict(s, &corrupted).unwrap() {
                wins += 1;
            }
            total += 1;
        }
    }
    let share = wins as f64 / total as f64;
    Outcome::new(
        share >= 0.9,
        format!("{wins}/{total} held-out pairs rank clean above {k}-of-{}-node corruption ({:.1}%)", s.num_nodes(), 100.0 * share),
    )
}

fn anomaly(run: &ChickenpoxRun) -> Outcome {
    let policy = AlarmPolicy::default();
    let AlarmPolicy::ZScore { window, .. } = policy else { unreachable!() };
    let len = 10;
    let predictor = Predictor::new(run.a3tgcn.outcomes[0].checkpoint.clone(), &run.signal).unwrap();
    let bounds = node_bounds(&run.signal, 0..run.signal.num_snapshots()).unwrap();
    let k = run.signal.num_nodes() / 2;
    let (mut flagged, mut false_positives, mut steps) = (0, 0, 0);
    let mut missed = Vec::new();
    for seed in 0..20u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(900 + seed);
        let first_checked = len - 1 + window;
        let t_star = rng.gen_range(first_checked..run.signal.num_snapshots());
        let mut s = run.signal.clone();
        let planted = corrupt_k(&s, Bucket { start: t_star + 1 - len, len }, &bounds, k, &mut rng);
        s.replace_snapshot(t_star, &planted.candidate).unwrap();
        let stream = score_stream(&predictor, &s, len).unwrap();
        let events = stream.detect(&policy).unwrap().events;
        if events.iter().any(|e| e.index == t_star) {
            flagged += 1;
        } else {
            missed.push(t_star);
        }
        false_positives += events.iter().filter(|e| e.index != t_star).count();
        steps += stream.scores.len();
    }
    let per_100 = 100.0 * false_positives as f64 / steps as f64;
    Outcome::new(
        flagged == 20 && per_100 <= 1.0,
        format!(
            "planted index flagged in {flagged}/20 streams{}; {false_positives} false positives over {steps} steps ({per_100:.2} per 100)",
            if missed.is_empty() { String::new() } else { format!(" (missed t = {missed:?})") }
        ),
    )
}

// 7, 10

struct Pipeline {
    dir: tempfile::TempDir,
}

impl Pipeline {
    fn run(kind: DatasetKind) -> Pipeline {
        let dir = tempfile::tempdir().unwrap();
        let root = dir.path();
        let p = |rel: &str| root.join(rel).to_string_lossy().into_owned();
        let cli = |args: &[&str]| {
            let mut argv = vec!["dgsp", "--output-root"];
            let root_s = root.to_string_lossy().into_owned();
            argv.push(&root_s);
            argv.extend_from_slice(args);
            let mut sink = Vec::new();
            dgsp::cli::run(argv, &mut sink).unwrap_or_else(|e| panic!("{args:?}: {e}"));
        };
        let name = kind.name().to_lowercase();
        let raw = match std::env::var_os("DGSP_DATA_DIR").map(|d| PathBuf::from(d).join(format!("{name}.json"))) {
            Some(path) if path.exists() => path.to_string_lossy().into_owned(),
            _ => {
                cli(&["synth", "--kind", &name, "--seed", "0", "--out", &p("raw.json")]);
                p("raw.json")
            }
        };
        cli(&["convert", "--kind", &name, "--raw", &raw, "--out", &p("data.json")]);
        cli(&["prepare", "--dataset", &p("data.json"), "--out-dir", &p("prepare")]);
        cli(&["train", "--dataset", &p("data.json"), "--buckets", &p("prepare/buckets.json"), "--out-dir", &p("train")]);
        cli(&["eval", "--run", &p("train")]);
        cli(&["baseline", "--dataset", &p("data.json"), "--buckets", &p("prepare/buckets.json"), "--out-dir", &p("baseline")]);
        cli(&[
            "report",
            &p("train/eval/metrics.json"),
            &p("baseline/random.json"),
            &p("baseline/tsr.json"),
            "--out",
            &p("report.csv"),
        ]);
        Pipeline { dir }
    }

    const ARTIFACTS: [&'static str; 10] = [
        "data.json",
        "prepare/buckets.json",
        "train/splits.json",
        "train/fold0/checkpoint.json",
        "train/fold2/loss_history.csv",
        "train/eval/metrics.json",
        "train/eval/metrics.csv",
        "baseline/random.json",
        "baseline/tsr.json",
        "report.csv",
    ];

    fn read(&self, rel: &str) -> Vec<u8> {
        std::fs::read(self.dir.path().join(rel)).unwrap_or_else(|e| panic!("{rel}: {e}"))
    }

    fn mse(&self, rel: &str) -> f64 {
        serde_json::from_slice::<MetricsReport>(&self.read(rel)).unwrap().mean.mse
    }
}

fn pedalme_smoke(first: &mut Option<Pipeline>) -> Outcome {
    let pipe = Pipeline::run(DatasetKind::PedalMe);
    let model = pipe.mse("train/eval/metrics.json");
    let random = pipe.mse("baseline/random.json");
    let rows = String::from_utf8(pipe.read("report.csv")).unwrap().lines().count() - 1;
    let out = Outcome::new(
        model < random && rows == 3,
        format!("convert..report on PedalMe: A3TGCN {model:.4} vs random {random:.4}, {rows}-row report"),
    );
    *first = Some(pipe);
    out
}

fn determinism(first: &Pipeline) -> Outcome {
    let second = Pipeline::run(DatasetKind::PedalMe);
    let differing: Vec<&str> =
        Pipeline::ARTIFACTS.iter().copied().filter(|rel| first.read(rel) != second.read(rel)).collect();
    Outcome::new(
        differing.is_empty(),
        if differing.is_empty() {
            format!("{} artifacts byte-identical across two pipeline runs", Pipeline::ARTIFACTS.len())
        } else {
            format!("differing: {}", differing.join(", "))
        },
    )
}

fn main() {
    let mut h = Harness { hard_failures: 0 };
    let secs = |s| Some(Duration::from_secs(s));

    h.run(1, "gradient suite", secs(30), false, gradients);
    h.run(2, "noise-injection exactness", secs(10), false, noise_exactness);
    h.run(3, "time-series-regression oracle", None, false, baseline_oracle);
    h.run(4, "metric identities", None, false, metric_identities);

    let mut cp = None;
    h.run(5, "model vs baselines on Chickenpox", secs(600), false, || model_beats_baselines(&mut cp));
    let cp = cp.expect("criterion 5 ran");
    println!("       Chickenpox data: {}; random {:.4}, tsr {:.4}", cp.source, cp.random.mean.mse, cp.tsr.mean.mse);
    h.run(6, "cell ordering", None, true, || cell_ordering(&cp));
    let mut pedal = None;
    h.run(7, "PedalMe smoke pipeline", secs(60), false, || pedalme_smoke(&mut pedal));
    h.run(8, "clean-over-corrupted ranking", None, false, || ranking(&cp));
    h.run(9, "anomaly detection of a planted corruption", None, false, || anomaly(&cp));
    h.run(10, "pipeline determinism", None, false, || determinism(pedal.as_ref().expect("criterion 7 ran")));

    if h.hard_failures > 0 {
        println!("{} hard criterion failure(s)", h.hard_failures);
        if std::env::var_os("DGSP_ACCEPTANCE_STRICT").is_some_and(|v| v == "1") {
            std::process::exit(1);
        }
        return;
    }
    println!("all hard criteria passed");
}
