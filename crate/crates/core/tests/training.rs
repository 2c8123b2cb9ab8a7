use dgsp_core::graph::node_bounds;
use dgsp_core::metrics::ReportContext;
use dgsp_core::noise::{bucketize, inject_noise};
use dgsp_core::train::{cross_validate, evaluate, train, InitKind, TrainConfig};
use dgsp_core::{CellKind, LabeledBucket, ModelConfig, NoiseSpec, TemporalGraphSignal};

/// Smooth per-node waves; corruption is easy to spot against them.
fn wave_signal(n: usize, s: usize) -> TemporalGraphSignal {
    let snaps: Vec<Vec<Vec<f64>>> = (0..s)
        .map(|t| (0..n).map(|v| vec![10.0 + 5.0 * ((t as f64 + 2.0 * v as f64) / 6.0).sin()]).collect())
        .collect();
    let edges = (1..n).map(|v| (v - 1, v)).collect();
    TemporalGraphSignal::new("wave", n, edges, None, "", &snaps).unwrap()
}

fn small_model(cell: CellKind) -> ModelConfig {
    ModelConfig { embed_dim: 8, attention_dim: 8, ..ModelConfig::new(cell, 1) }
}

fn labeled(s: &TemporalGraphSignal, len: usize, seed: u64) -> Vec<LabeledBucket> {
    let buckets = bucketize(s, len, 1).unwrap();
    let bounds = node_bounds(s, 0..s.num_snapshots()).unwrap();
    inject_noise(s, &buckets, &bounds, &NoiseSpec { corrupt_probability: 0.5, seed }).unwrap()
}

#[test]
fn zero_model_on_half_labels_starts_at_zero_loss() {
    let s = wave_signal(4, 20);
    let mut set = labeled(&s, 5, 0);
    for b in &mut set {
        b.label = 0.5;
    }
    let refs: Vec<&LabeledBucket> = set.iter().collect();
    let config = TrainConfig { epochs: 2, init: InitKind::Zeros, ..Default::default() };
    let out = train(&s, &refs, &config, &small_model(CellKind::Tgcn), None).unwrap();
    assert!(out.loss_history.iter().all(|&l| l == 0.0), "{:?}", out.loss_history);
    assert!(out.checkpoint.params.tensors().iter().all(|t| t.data().iter().all(|&x| x.abs() < 1e-6)));
}

#[test]
fn constant_half_model_scores_clean_buckets_at_a_quarter() {
    let s = wave_signal(4, 20);
    let clean = labeled(&s, 5, 0).into_iter().filter(|b| b.label == 1.0).collect::<Vec<_>>();
    let refs: Vec<&LabeledBucket> = clean.iter().collect();
    let config = TrainConfig { epochs: 1, init: InitKind::Zeros, learning_rate: 1e-12, ..Default::default() };
    let out = train(&s, &refs, &config, &small_model(CellKind::GConvGru), None).unwrap();
    let fold = evaluate(&out.checkpoint, &s, &refs, 0).unwrap();
    assert!((fold.metrics.mse - 0.25).abs() < 1e-9, "{}", fold.metrics.mse);
}

#[test]
fn fifty_buckets_thirty_epochs_do_not_get_worse() {
    let s = wave_signal(5, 59);
    let set = labeled(&s, 10, 2);
    assert_eq!(set.len(), 50);
    let refs: Vec<&LabeledBucket> = set.iter().collect();
    for cell in CellKind::ALL {
        let config = TrainConfig { epochs: 30, seed: 1, ..Default::default() };
        let out = train(&s, &refs, &config, &small_model(cell), None).unwrap();
        let h = &out.loss_history;
        assert_eq!(h.len(), 30);
        assert!(h[29] <= h[0], "{cell}: {h:?}");
        assert_eq!(out.checkpoint.provenance.final_train_loss, h[29]);
    }
}

#[test]
fn same_seed_gives_bit_identical_runs() {
    let s = wave_signal(4, 30);
    let set = labeled(&s, 6, 3);
    let ctx = ReportContext {
        dataset: "wave".into(),
        bucket_len: 6,
        stride: 1,
        noise: NoiseSpec { corrupt_probability: 0.5, seed: 3 },
        folds: 3,
        split_seed: 4,
        split_mode: Default::default(),
        epochs: Some(3),
        learning_rate: Some(0.01),
        optimizer: None,
    };
    let config = TrainConfig { epochs: 3, seed: 4, ..Default::default() };
    let model = small_model(CellKind::A3Tgcn);
    let a = cross_validate(&s, &set, &config, &model, ctx.clone(), None).unwrap();
    let b = cross_validate(&s, &set, &config, &model, ctx, None).unwrap();
    assert_eq!(a.report, b.report);
    for (x, y) in a.outcomes.iter().zip(&b.outcomes) {
        let bits = |h: &[f64]| h.iter().map(|v| v.to_bits()).collect::<Vec<_>>();
        assert_eq!(bits(&x.loss_history), bits(&y.loss_history));
        assert_eq!(x.checkpoint, y.checkpoint);
    }
    assert_eq!(a.report.folds.len(), 3);
    assert_eq!(a.report.folds.iter().map(|f| f.samples).sum::<usize>(), set.len());
}

#[test]
fn redraw_needs_noise_source() {
    let s = wave_signal(3, 12);
    let set = labeled(&s, 4, 0);
    let refs: Vec<&LabeledBucket> = set.iter().collect();
    let config = TrainConfig { epochs: 2, redraw_noise: true, ..Default::default() };
    let model = small_model(CellKind::Tgcn);
    assert!(train(&s, &refs, &config, &model, None).is_err());
    let bounds = node_bounds(&s, 0..12).unwrap();
    let spec = NoiseSpec::default();
    let out = train(&s, &refs, &config, &model, Some((&bounds, &spec))).unwrap();
    assert_eq!(out.loss_history.len(), 2);
}

#[test]
fn channel_mismatch_is_a_config_error() {
    let s = wave_signal(3, 12);
    let set = labeled(&s, 4, 0);
    let refs: Vec<&LabeledBucket> = set.iter().collect();
    let model = ModelConfig::new(CellKind::Tgcn, 2);
    let err = train(&s, &refs, &TrainConfig::default(), &model, None).unwrap_err();
    assert!(err.to_string().contains("channels"), "{err}");
}
