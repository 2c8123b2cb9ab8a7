//! K-fold protocol, the training loop and evaluation.

use alloc::vec;
use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::diff::{Tape, Tensor};
use crate::graph::{node_bounds, normalized_adjacency, NodeBounds, TemporalGraphSignal};
use crate::metrics::{FoldReport, MetricsReport, Prediction, ReportContext};
use crate::model::{bind, forward, record_window, Checkpoint, ModelConfig, ModelParams, Predictor, Provenance};
use crate::noise::{inject_noise, LabeledBucket, NoiseSpec};
use crate::optim::{AdamParams, Optimizer, OptimizerKind};
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SplitMode {
    /// Seeded shuffle, then contiguous chunks.
    #[default]
    Random,
    /// Contiguous chunks in bucket order, no shuffle.
    Contiguous,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum InitKind {
    #[default]
    Glorot,
    Zeros,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub epochs: usize,
    pub learning_rate: f64,
    pub bucket_len: usize,
    pub folds: usize,
    pub seed: u64,
    pub optimizer: OptimizerKind,
    pub adam: AdamParams,
    /// Buckets averaged per optimizer step.
    pub batch_size: usize,
    pub split_mode: SplitMode,
    pub init: InitKind,
    /// Redraw the candidate corruption every epoch instead of reusing the
    /// frozen labelled set.
    pub redraw_noise: bool,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            epochs: 30,
            learning_rate: 0.01,
            bucket_len: 10,
            folds: 3,
            seed: 0,
            optimizer: OptimizerKind::Adam,
            adam: AdamParams::default(),
            batch_size: 8,
            split_mode: SplitMode::Random,
            init: InitKind::Glorot,
            redraw_noise: false,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if self.epochs == 0 {
            return Err(Error::config("epochs must be at least 1"));
        }
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return Err(Error::config(alloc::format!("learning rate must be positive, got {}", self.learning_rate)));
        }
        if self.folds < 2 {
            return Err(Error::config(alloc::format!("need at least 2 folds, got {}", self.folds)));
        }
        if self.batch_size == 0 {
            return Err(Error::config("batch size must be at least 1"));
        }
        Ok(())
    }
}

/// Bucket indices of one fold.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FoldSplit {
    pub train: Vec<usize>,
    pub test: Vec<usize>,
}

impl FoldSplit {
    pub fn train_items<'a, T>(&self, items: &'a [T]) -> Vec<&'a T> {
        self.train.iter().map(|&i| &items[i]).collect()
    }

    pub fn test_items<'a, T>(&self, items: &'a [T]) -> Vec<&'a T> {
        self.test.iter().map(|&i| &items[i]).collect()
    }
}

/// Partitions `0..count` into `k` near-equal test chunks (the first
/// `count % k` chunks get one extra item). Fold `i` trains on everything
/// outside chunk `i`.
pub fn kfold_split(count: usize, k: usize, seed: u64, mode: SplitMode) -> Result<Vec<FoldSplit>> {
    if k < 2 {
        return Err(Error::contract(alloc::format!("k-fold needs k >= 2, got {k}")));
    }
    if k > count {
        return Err(Error::contract(alloc::format!("cannot split {count} buckets into {k} folds")));
    }
    let mut order: Vec<usize> = (0..count).collect();
    if mode == SplitMode::Random {
        order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    }
    let (base, extra) = (count / k, count % k);
    let mut chunks = Vec::with_capacity(k);
    let mut at = 0;
    for i in 0..k {
        let size = base + usize::from(i < extra);
        chunks.push(order[at..at + size].to_vec());
        at += size;
    }
    Ok((0..k)
        .map(|i| FoldSplit {
            test: chunks[i].clone(),
            train: chunks.iter().enumerate().filter(|(j, _)| *j != i).flat_map(|(_, c)| c.iter().copied()).collect(),
        })
        .collect())
}

/// Bounds over every snapshot some bucket in `set` reads from the source
/// signal.
pub fn bounds_for_buckets(signal: &TemporalGraphSignal, set: &[&LabeledBucket]) -> Result<NodeBounds> {
    let mut covered = vec![false; signal.num_snapshots()];
    for b in set {
        for c in covered.iter_mut().skip(b.start).take(b.len) {
            *c = true;
        }
    }
    let mut bounds: Option<NodeBounds> = None;
    for (t, _) in covered.iter().enumerate().filter(|(_, c)| **c) {
        let snap = node_bounds(signal, t..t + 1)?;
        bounds = Some(match bounds {
            None => snap,
            Some(mut acc) => {
                for i in 0..acc.min.len() {
                    acc.min[i] = acc.min[i].min(snap.min[i]);
                    acc.max[i] = acc.max[i].max(snap.max[i]);
                }
                acc
            }
        });
    }
    bounds.ok_or_else(|| Error::contract("no snapshots covered by the training set"))
}

#[derive(Clone, Debug)]
pub struct TrainOutcome {
    pub checkpoint: Checkpoint,
    /// Mean per-bucket loss of every epoch.
    pub loss_history: Vec<f64>,
}

fn check_buckets(signal: &TemporalGraphSignal, set: &[&LabeledBucket]) -> Result<()> {
    let width = signal.num_nodes() * signal.num_channels();
    for (i, b) in set.iter().enumerate() {
        if b.candidate.len() != width || b.start + b.len > signal.num_snapshots() || b.len == 0 {
            return Err(Error::config(alloc::format!(
                "bucket {i} (start {}) does not match the signal's {}x{} shape",
                b.start,
                signal.num_nodes(),
                signal.num_channels()
            )));
        }
    }
    Ok(())
}

/// Squared-error loss and its parameter gradients for one bucket.
fn loss_and_grads(
    model: &ModelConfig,
    params: &ModelParams,
    bounds: &NodeBounds,
    adjacency: &Tensor,
    signal: &TemporalGraphSignal,
    bucket: &LabeledBucket,
) -> Result<(f64, Vec<Tensor>)> {
    let mut tape = Tape::new();
    let bound = bind(&mut tape, model, params, true);
    let adj = tape.constant(adjacency.clone());
    let inputs = record_window(&mut tape, bounds, model.input_range, signal, bucket)?;
    let out = forward(&mut tape, &bound, adj, &inputs)?;
    let label = tape.constant(Tensor::scalar(bucket.label));
    let err = tape.sub(out.output, label)?;
    let sq = tape.square(err)?;
    let loss = tape.mean_all(sq)?;
    tape.backward(loss)?;
    let value = tape.value(loss).item().expect("scalar loss");
    let grads = bound
        .all
        .iter()
        .map(|&v| tape.grad(v).cloned().unwrap_or_else(|| {
            let (r, c) = tape.value(v).shape();
            Tensor::zeros(r, c)
        }))
        .collect();
    Ok((value, grads))
}

/// Fits a model on `train_set`. With `config.redraw_noise`, `noise` gives
/// the whole-signal bounds and spec used to re-corrupt candidates each
/// epoch.
pub fn train(
    signal: &TemporalGraphSignal,
    train_set: &[&LabeledBucket],
    config: &TrainConfig,
    model: &ModelConfig,
    noise: Option<(&NodeBounds, &NoiseSpec)>,
) -> Result<TrainOutcome> {
    config.validate()?;
    model.validate()?;
    if train_set.is_empty() {
        return Err(Error::contract("training set is empty"));
    }
    if model.input_channels != signal.num_channels() {
        return Err(Error::config(alloc::format!(
            "model expects {} channels, signal has {}",
            model.input_channels,
            signal.num_channels()
        )));
    }
    check_buckets(signal, train_set)?;
    let redraw = match (config.redraw_noise, noise) {
        (false, _) => None,
        (true, Some(n)) => Some(n),
        (true, None) => return Err(Error::config("redraw_noise needs noise bounds and spec")),
    };

    let bounds = bounds_for_buckets(signal, train_set)?;
    let adjacency = normalized_adjacency(signal, model.adjacency);
    let mut params = match config.init {
        InitKind::Glorot => ModelParams::init(model, config.seed),
        InitKind::Zeros => ModelParams::zeros(model),
    };
    let mut optimizer = Optimizer::new(config.optimizer, config.learning_rate, config.adam, params.tensors());
    let mut order_rng = ChaCha8Rng::seed_from_u64(config.seed);
    order_rng.set_stream(1);

    let mut owned: Vec<LabeledBucket> = Vec::new();
    let mut history = Vec::with_capacity(config.epochs);
    for epoch in 0..config.epochs {
        if let Some((full_bounds, spec)) = redraw {
            let plain: Vec<_> = train_set.iter().map(|b| b.bucket()).collect();
            owned = inject_noise(signal, &plain, full_bounds, &spec.for_epoch(epoch))?;
        }
        let set: Vec<&LabeledBucket> = if redraw.is_some() { owned.iter().collect() } else { train_set.to_vec() };

        let mut order: Vec<usize> = (0..set.len()).collect();
        order.shuffle(&mut order_rng);
        let mut total = 0.0;
        for batch in order.chunks(config.batch_size) {
            let mut summed: Option<Vec<Tensor>> = None;
            for &i in batch {
                let (loss, grads) = loss_and_grads(model, &params, &bounds, &adjacency, signal, set[i])?;
                if !loss.is_finite() {
                    return Err(Error::Diverged { epoch, bucket: i, loss });
                }
                total += loss;
                summed = Some(match summed {
                    None => grads,
                    Some(mut acc) => {
                        for (a, g) in acc.iter_mut().zip(&grads) {
                            for (x, y) in a.data_mut().iter_mut().zip(g.data()) {
                                *x += y;
                            }
                        }
                        acc
                    }
                });
            }
            let mut grads = summed.expect("non-empty batch");
            if batch.len() > 1 {
                let scale = 1.0 / batch.len() as f64;
                for g in &mut grads {
                    for x in g.data_mut() {
                        *x *= scale;
                    }
                }
            }
            optimizer.step(params.tensors_mut(), &grads);
            if params.tensors().iter().any(|t| !t.is_finite()) {
                return Err(Error::Diverged { epoch, bucket: batch[batch.len() - 1], loss: f64::NAN });
            }
        }
        history.push(total / set.len() as f64);
    }

    let checkpoint = Checkpoint {
        config: model.clone(),
        params,
        input_bounds: bounds,
        provenance: Provenance {
            dataset: signal.name().into(),
            seed: config.seed,
            epochs: config.epochs,
            final_train_loss: *history.last().expect("epochs >= 1"),
        },
    };
    Ok(TrainOutcome { checkpoint, loss_history: history })
}

/// Scores every bucket of `test_set` and reports fold metrics.
pub fn evaluate(
    checkpoint: &Checkpoint,
    signal: &TemporalGraphSignal,
    test_set: &[&LabeledBucket],
    fold: usize,
) -> Result<FoldReport> {
    if test_set.is_empty() {
        return Err(Error::contract("test set is empty"));
    }
    check_buckets(signal, test_set)?;
    let predictor = Predictor::new(checkpoint.clone(), signal)?;
    let predictions = test_set
        .iter()
        .map(|b| {
            Ok(Prediction { start: b.start, label: b.label, prediction: predictor.predict(signal, *b)? })
        })
        .collect::<Result<Vec<_>>>()?;
    FoldReport::from_predictions(fold, predictions)
}

/// Everything produced by one K-fold run.
#[derive(Clone, Debug)]
pub struct CrossValidation {
    pub report: MetricsReport,
    pub splits: Vec<FoldSplit>,
    pub outcomes: Vec<TrainOutcome>,
}

/// Trains and evaluates one model per fold.
pub fn cross_validate(
    signal: &TemporalGraphSignal,
    buckets: &[LabeledBucket],
    config: &TrainConfig,
    model: &ModelConfig,
    context: ReportContext,
    noise: Option<(&NodeBounds, &NoiseSpec)>,
) -> Result<CrossValidation> {
    let splits = kfold_split(buckets.len(), config.folds, config.seed, config.split_mode)?;
    let mut folds = Vec::with_capacity(splits.len());
    let mut outcomes = Vec::with_capacity(splits.len());
    for (i, split) in splits.iter().enumerate() {
        let fold_config = TrainConfig { seed: config.seed.wrapping_add(i as u64), ..config.clone() };
        let outcome = train(signal, &split.train_items(buckets), &fold_config, model, noise)?;
        folds.push(evaluate(&outcome.checkpoint, signal, &split.test_items(buckets), i)?);
        outcomes.push(outcome);
    }
    let report = MetricsReport::new(model.cell.name(), context, folds)?;
    Ok(CrossValidation { report, splits, outcomes })
}
