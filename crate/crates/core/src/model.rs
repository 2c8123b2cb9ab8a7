//! The similarity model: a GCN input stage applied to every snapshot, a
//! recurrent graph cell over the snapshot sequence, optional temporal
//! attention, mean pooling over nodes and a dense head ending in a logistic
//! unit.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::diff::{Tape, Tensor, Var};
use crate::graph::{normalized_adjacency, AdjacencyMode, NodeBounds, TemporalGraphSignal};
use crate::noise::Window;
use crate::{Error, Result};

/// Widths of the dense head; the last layer feeds the logistic output.
pub const HEAD_WIDTHS: [usize; 3] = [32, 64, 1];

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum CellKind {
    #[serde(rename = "GConvGRU")]
    GConvGru,
    #[serde(rename = "TGCN")]
    Tgcn,
    /// TGCN steps followed by attention over the hidden-state sequence.
    #[serde(rename = "A3TGCN")]
    A3Tgcn,
}

impl CellKind {
    pub const ALL: [CellKind; 3] = [CellKind::A3Tgcn, CellKind::Tgcn, CellKind::GConvGru];

    pub fn name(self) -> &'static str {
        match self {
            CellKind::GConvGru => "GConvGRU",
            CellKind::Tgcn => "TGCN",
            CellKind::A3Tgcn => "A3TGCN",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "gconvgru" => Ok(CellKind::GConvGru),
            "tgcn" => Ok(CellKind::Tgcn),
            "a3tgcn" => Ok(CellKind::A3Tgcn),
            other => Err(Error::config(alloc::format!(
                "unknown cell kind {other:?}; expected one of GConvGRU, TGCN, A3TGCN"
            ))),
        }
    }

    pub fn has_attention(self) -> bool {
        self == CellKind::A3Tgcn
    }
}

impl fmt::Display for CellKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Interval the training-split bounds map model inputs onto.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum InputRange {
    /// `[0, 1]`.
    Unit,
    /// `[-1, 1]`, so zero-bias ReLU units see inputs of both signs.
    #[default]
    Centered,
}

impl InputRange {
    /// Scales one snapshot. Degenerate node-channels (`min == max`) map
    /// to 0.0 in both ranges.
    pub fn scale(self, bounds: &NodeBounds, values: &[f64]) -> Vec<f64> {
        let mut v = bounds.normalize_snapshot(values);
        if self == InputRange::Centered {
            for (i, x) in v.iter_mut().enumerate() {
                if bounds.max[i] > bounds.min[i] {
                    *x = 2.0 * *x - 1.0;
                }
            }
        }
        v
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelConfig {
    pub cell: CellKind,
    pub embed_dim: usize,
    pub input_channels: usize,
    pub attention_dim: usize,
    pub head_widths: [usize; 3],
    #[serde(default)]
    pub adjacency: AdjacencyMode,
    #[serde(default)]
    pub input_range: InputRange,
}

impl ModelConfig {
    pub fn new(cell: CellKind, input_channels: usize) -> Self {
        ModelConfig {
            cell,
            embed_dim: 32,
            input_channels,
            attention_dim: 32,
            head_widths: HEAD_WIDTHS,
            adjacency: AdjacencyMode::Symmetric,
            input_range: InputRange::Centered,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.embed_dim == 0 || self.input_channels == 0 || self.attention_dim == 0 {
            return Err(Error::config("embed_dim, input_channels and attention_dim must be at least 1"));
        }
        if self.head_widths != HEAD_WIDTHS {
            return Err(Error::config(alloc::format!(
                "head widths are fixed to {HEAD_WIDTHS:?}, got {:?}",
                self.head_widths
            )));
        }
        Ok(())
    }

    /// Name and shape of every trainable tensor, in storage order.
    pub fn param_layout(&self) -> Vec<(&'static str, usize, usize)> {
        let (f, d, a) = (self.input_channels, self.embed_dim, self.attention_dim);
        let [h1, h2, h3] = self.head_widths;
        let mut layout = vec![("gcn.weight", f, d), ("gcn.bias", 1, d)];
        match self.cell {
            CellKind::GConvGru => layout.extend([
                ("cell.w_z", d, d),
                ("cell.u_z", d, d),
                ("cell.b_z", 1, d),
                ("cell.w_r", d, d),
                ("cell.u_r", d, d),
                ("cell.b_r", 1, d),
                ("cell.w_h", d, d),
                ("cell.u_h", d, d),
                ("cell.b_h", 1, d),
            ]),
            CellKind::Tgcn | CellKind::A3Tgcn => layout.extend([
                ("cell.w_g", d, d),
                ("cell.w_u", 2 * d, d),
                ("cell.b_u", 1, d),
                ("cell.w_r", 2 * d, d),
                ("cell.b_r", 1, d),
                ("cell.w_c", 2 * d, d),
                ("cell.b_c", 1, d),
            ]),
        }
        if self.cell.has_attention() {
            layout.extend([("attn.w", d, a), ("attn.b", 1, a), ("attn.v", a, 1)]);
        }
        layout.extend([
            ("head.w1", d, h1),
            ("head.b1", 1, h1),
            ("head.w2", h1, h2),
            ("head.b2", 1, h2),
            ("head.w3", h2, h3),
            ("head.b3", 1, h3),
        ]);
        layout
    }
}

/// Trainable tensors in the order given by [`ModelConfig::param_layout`].
#[derive(Clone, Debug, PartialEq)]
pub struct ModelParams {
    tensors: Vec<Tensor>,
}

impl ModelParams {
    /// Glorot-uniform weights, zero biases.
    pub fn init(config: &ModelConfig, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let tensors = config
            .param_layout()
            .into_iter()
            .map(|(name, rows, cols)| {
                if is_bias(name) {
                    return Tensor::zeros(rows, cols);
                }
                let limit = libm::sqrt(6.0 / (rows + cols) as f64);
                let data = (0..rows * cols).map(|_| rng.gen_range(-limit..=limit)).collect();
                Tensor::new(rows, cols, data).expect("layout shapes are nonzero")
            })
            .collect();
        ModelParams { tensors }
    }

    pub fn zeros(config: &ModelConfig) -> Self {
        let tensors = config.param_layout().into_iter().map(|(_, r, c)| Tensor::zeros(r, c)).collect();
        ModelParams { tensors }
    }

    /// Assembles parameters from `(name, tensor)` pairs, checking that every
    /// layout entry is present exactly once with the right shape.
    pub fn from_named(config: &ModelConfig, named: Vec<(String, Tensor)>) -> Result<Self> {
        let layout = config.param_layout();
        if named.len() != layout.len() {
            return Err(Error::config(alloc::format!(
                "{} cell expects {} parameter tensors, got {}",
                config.cell,
                layout.len(),
                named.len()
            )));
        }
        let mut slots: Vec<Option<Tensor>> = vec![None; layout.len()];
        for (name, tensor) in named {
            let Some(i) = layout.iter().position(|(n, _, _)| *n == name) else {
                return Err(Error::config(alloc::format!("unexpected parameter {name:?}")));
            };
            let (_, rows, cols) = layout[i];
            if tensor.shape() != (rows, cols) {
                return Err(Error::config(alloc::format!(
                    "parameter {name:?} has shape {:?}, expected ({rows}, {cols})",
                    tensor.shape()
                )));
            }
            if !tensor.is_finite() {
                return Err(Error::config(alloc::format!("parameter {name:?} holds non-finite values")));
            }
            if slots[i].replace(tensor).is_some() {
                return Err(Error::config(alloc::format!("parameter {name:?} given twice")));
            }
        }
        Ok(ModelParams { tensors: slots.into_iter().map(|t| t.expect("all slots filled")).collect() })
    }

    pub fn tensors(&self) -> &[Tensor] {
        &self.tensors
    }

    pub fn tensors_mut(&mut self) -> &mut [Tensor] {
        &mut self.tensors
    }

    pub fn named<'a>(&'a self, config: &ModelConfig) -> impl Iterator<Item = (&'static str, &'a Tensor)> + 'a {
        config.param_layout().into_iter().map(|(n, _, _)| n).zip(self.tensors.iter())
    }

    pub fn get(&self, config: &ModelConfig, name: &str) -> Option<&Tensor> {
        self.named(config).find(|(n, _)| *n == name).map(|(_, t)| t)
    }

    pub fn get_mut(&mut self, config: &ModelConfig, name: &str) -> Option<&mut Tensor> {
        let i = config.param_layout().iter().position(|(n, _, _)| *n == name)?;
        self.tensors.get_mut(i)
    }

    pub fn num_values(&self) -> usize {
        self.tensors.iter().map(Tensor::len).sum()
    }
}

fn is_bias(name: &str) -> bool {
    name.rsplit('.').next().is_some_and(|last| last.starts_with('b'))
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub dataset: String,
    pub seed: u64,
    pub epochs: usize,
    pub final_train_loss: f64,
}

/// A trained model together with the feature bounds its inputs are scaled
/// with.
#[derive(Clone, Debug, PartialEq)]
pub struct Checkpoint {
    pub config: ModelConfig,
    pub params: ModelParams,
    pub input_bounds: NodeBounds,
    pub provenance: Provenance,
}

impl Checkpoint {
    pub fn validate(&self) -> Result<()> {
        self.config.validate()?;
        let layout = self.config.param_layout();
        if layout.len() != self.params.tensors.len()
            || layout.iter().zip(&self.params.tensors).any(|((_, r, c), t)| t.shape() != (*r, *c))
        {
            return Err(Error::config("parameter shapes do not match the model configuration"));
        }
        if self.input_bounds.num_channels != self.config.input_channels {
            return Err(Error::config("input bounds and model disagree on the channel count"));
        }
        self.input_bounds.validate_for(self.input_bounds.num_nodes, self.config.input_channels)
    }
}

/// Parameters bound to a tape.
#[derive(Clone, Debug)]
pub struct BoundParams {
    pub gcn: GcnVars,
    pub cell: CellVars,
    pub attention: Option<AttentionVars>,
    pub head: HeadVars,
    /// Every bound tensor in layout order.
    pub all: Vec<Var>,
}

#[derive(Clone, Copy, Debug)]
pub struct GcnVars {
    pub weight: Var,
    pub bias: Var,
}

#[derive(Clone, Copy, Debug)]
pub enum CellVars {
    GConvGru { w_z: Var, u_z: Var, b_z: Var, w_r: Var, u_r: Var, b_r: Var, w_h: Var, u_h: Var, b_h: Var },
    Tgcn { w_g: Var, w_u: Var, b_u: Var, w_r: Var, b_r: Var, w_c: Var, b_c: Var },
}

#[derive(Clone, Copy, Debug)]
pub struct AttentionVars {
    pub w: Var,
    pub b: Var,
    pub v: Var,
}

#[derive(Clone, Copy, Debug)]
pub struct HeadVars {
    pub w1: Var,
    pub b1: Var,
    pub w2: Var,
    pub b2: Var,
    pub w3: Var,
    pub b3: Var,
}

/// Records every parameter as a leaf; `trainable` decides whether the
/// leaves collect gradients.
pub fn bind(tape: &mut Tape, config: &ModelConfig, params: &ModelParams, trainable: bool) -> BoundParams {
    let all: Vec<Var> = params.tensors.iter().map(|t| tape.leaf(t.clone(), trainable)).collect();
    bind_vars(config, all).expect("parameters follow the layout")
}

/// Groups already-recorded parameter vars, given in layout order.
pub fn bind_vars(config: &ModelConfig, all: Vec<Var>) -> Result<BoundParams> {
    let expected = config.param_layout().len();
    if all.len() != expected {
        return Err(Error::config(alloc::format!(
            "{} cell expects {expected} parameter tensors, got {}",
            config.cell,
            all.len()
        )));
    }
    let mut it = all.iter().copied();
    let mut next = || it.next().expect("parameter count matches layout");
    let gcn = GcnVars { weight: next(), bias: next() };
    let cell = match config.cell {
        CellKind::GConvGru => CellVars::GConvGru {
            w_z: next(),
            u_z: next(),
            b_z: next(),
            w_r: next(),
            u_r: next(),
            b_r: next(),
            w_h: next(),
            u_h: next(),
            b_h: next(),
        },
        CellKind::Tgcn | CellKind::A3Tgcn => CellVars::Tgcn {
            w_g: next(),
            w_u: next(),
            b_u: next(),
            w_r: next(),
            b_r: next(),
            w_c: next(),
            b_c: next(),
        },
    };
    let attention = config.cell.has_attention().then(|| AttentionVars { w: next(), b: next(), v: next() });
    let head = HeadVars { w1: next(), b1: next(), w2: next(), b2: next(), w3: next(), b3: next() };
    Ok(BoundParams { gcn, cell, attention, head, all })
}

/// `relu(Â X W + b)`.
pub fn gcn_embed(tape: &mut Tape, x: Var, adj: Var, gcn: &GcnVars) -> Result<Var> {
    let ax = tape.matmul(adj, x)?;
    let axw = tape.matmul(ax, gcn.weight)?;
    let pre = tape.add(axw, gcn.bias)?;
    tape.relu(pre)
}

/// One recurrent step from `h_prev` given this snapshot's embedding.
pub fn cell_step(tape: &mut Tape, cell: &CellVars, embedded: Var, h_prev: Var, adj: Var) -> Result<Var> {
    let ax = tape.matmul(adj, embedded)?;
    match *cell {
        CellVars::GConvGru { w_z, u_z, b_z, w_r, u_r, b_r, w_h, u_h, b_h } => {
            let ah = tape.matmul(adj, h_prev)?;
            let gate = |tape: &mut Tape, w: Var, u: Var, b: Var| -> Result<Var> {
                let xw = tape.matmul(ax, w)?;
                let hu = tape.matmul(ah, u)?;
                let s = tape.add(xw, hu)?;
                let s = tape.add(s, b)?;
                tape.sigmoid(s)
            };
            let z = gate(tape, w_z, u_z, b_z)?;
            let r = gate(tape, w_r, u_r, b_r)?;
            let rh = tape.mul(r, h_prev)?;
            let arh = tape.matmul(adj, rh)?;
            let xw = tape.matmul(ax, w_h)?;
            let hu = tape.matmul(arh, u_h)?;
            let s = tape.add(xw, hu)?;
            let s = tape.add(s, b_h)?;
            let candidate = tape.tanh(s)?;
            blend(tape, z, h_prev, candidate)
        }
        CellVars::Tgcn { w_g, w_u, b_u, w_r, b_r, w_c, b_c } => {
            let g = tape.matmul(ax, w_g)?;
            let g = tape.relu(g)?;
            let gh = tape.concat_cols(&[g, h_prev])?;
            let dense_sigmoid = |tape: &mut Tape, w: Var, b: Var| -> Result<Var> {
                let s = tape.matmul(gh, w)?;
                let s = tape.add(s, b)?;
                tape.sigmoid(s)
            };
            let u = dense_sigmoid(tape, w_u, b_u)?;
            let r = dense_sigmoid(tape, w_r, b_r)?;
            let rh = tape.mul(r, h_prev)?;
            let grh = tape.concat_cols(&[g, rh])?;
            let s = tape.matmul(grh, w_c)?;
            let s = tape.add(s, b_c)?;
            let c = tape.tanh(s)?;
            blend(tape, u, h_prev, c)
        }
    }
}

/// `gate ⊙ keep + (1 - gate) ⊙ fresh`.
fn blend(tape: &mut Tape, gate: Var, keep: Var, fresh: Var) -> Result<Var> {
    let kept = tape.mul(gate, keep)?;
    let inv = tape.one_minus(gate)?;
    let new = tape.mul(inv, fresh)?;
    tape.add(kept, new)
}

/// Attention over a hidden-state sequence. Returns the context
/// `Σ_t α_t ⊙ H_t` and the `N x L` weight matrix (rows sum to 1).
pub fn temporal_attention(tape: &mut Tape, states: &[Var], attn: &AttentionVars) -> Result<(Var, Var)> {
    if states.is_empty() {
        return Err(Error::contract("temporal attention needs at least one hidden state"));
    }
    let mut scores = Vec::with_capacity(states.len());
    for &h in states {
        let s = tape.matmul(h, attn.w)?;
        let s = tape.add(s, attn.b)?;
        let s = tape.tanh(s)?;
        scores.push(tape.matmul(s, attn.v)?);
    }
    let scores = tape.concat_cols(&scores)?;
    let alpha = tape.softmax_rows(scores)?;
    let mut context: Option<Var> = None;
    for (t, &h) in states.iter().enumerate() {
        let a_t = tape.slice_cols(alpha, t, 1)?;
        let term = tape.mul(h, a_t)?;
        context = Some(match context {
            Some(c) => tape.add(c, term)?,
            None => term,
        });
    }
    Ok((context.expect("non-empty sequence"), alpha))
}

/// Mean-pools node states and applies the dense head; returns the 1x1
/// logistic output.
pub fn head(tape: &mut Tape, state: Var, head: &HeadVars) -> Result<Var> {
    let pooled = tape.mean_rows(state)?;
    let x = tape.matmul(pooled, head.w1)?;
    let x = tape.add(x, head.b1)?;
    let x = tape.relu(x)?;
    let x = tape.matmul(x, head.w2)?;
    let x = tape.add(x, head.b2)?;
    let x = tape.relu(x)?;
    let x = tape.matmul(x, head.w3)?;
    let x = tape.add(x, head.b3)?;
    tape.sigmoid(x)
}

/// Output of [`forward`].
#[derive(Clone, Copy, Debug)]
pub struct ForwardVars {
    pub output: Var,
    /// `N x L` attention weights, for attention cells.
    pub attention: Option<Var>,
}

/// Full model on already-recorded snapshot inputs (`N x F` each).
pub fn forward(tape: &mut Tape, params: &BoundParams, adj: Var, snapshots: &[Var]) -> Result<ForwardVars> {
    if snapshots.is_empty() {
        return Err(Error::contract("forward needs at least one snapshot"));
    }
    let n = tape.value(adj).rows();
    let d = tape.value(params.gcn.bias).cols();
    let mut h = tape.constant(Tensor::zeros(n, d));
    let mut states = Vec::with_capacity(snapshots.len());
    for &x in snapshots {
        let embedded = gcn_embed(tape, x, adj, &params.gcn)?;
        h = cell_step(tape, &params.cell, embedded, h, adj)?;
        states.push(h);
    }
    let (state, attention) = match &params.attention {
        Some(attn) => {
            let (c, alpha) = temporal_attention(tape, &states, attn)?;
            (c, Some(alpha))
        }
        None => (h, None),
    };
    Ok(ForwardVars { output: head(tape, state, &params.head)?, attention })
}

/// Records the scaled snapshots of `window` as constants.
pub fn record_window<W: Window>(
    tape: &mut Tape,
    bounds: &NodeBounds,
    range: InputRange,
    signal: &TemporalGraphSignal,
    window: &W,
) -> Result<Vec<Var>> {
    let (n, f) = (signal.num_nodes(), signal.num_channels());
    if window.len() == 0 || window.start() + window.len() > signal.num_snapshots() {
        return Err(Error::config("window does not fit the signal"));
    }
    (0..window.len())
        .map(|i| {
            let raw = window.snapshot(signal, i);
            if raw.len() != n * f || bounds.min.len() != n * f {
                return Err(Error::config(alloc::format!(
                    "snapshot {i} has {} values, model expects {}",
                    raw.len(),
                    bounds.min.len()
                )));
            }
            Ok(tape.constant(Tensor::new(n, f, range.scale(bounds, raw))?))
        })
        .collect()
}

/// A checkpoint prepared for one signal's topology.
#[derive(Clone, Debug)]
pub struct Predictor {
    checkpoint: Checkpoint,
    adjacency: Tensor,
}

impl Predictor {
    pub fn new(checkpoint: Checkpoint, signal: &TemporalGraphSignal) -> Result<Self> {
        checkpoint.validate()?;
        let (n, f) = (signal.num_nodes(), signal.num_channels());
        if f != checkpoint.config.input_channels {
            return Err(Error::config(alloc::format!(
                "signal has {f} channels, model expects {}",
                checkpoint.config.input_channels
            )));
        }
        if n != checkpoint.input_bounds.num_nodes {
            return Err(Error::config(alloc::format!(
                "signal has {n} nodes, checkpoint was trained on {}",
                checkpoint.input_bounds.num_nodes
            )));
        }
        let adjacency = normalized_adjacency(signal, checkpoint.config.adjacency);
        Ok(Predictor { checkpoint, adjacency })
    }

    pub fn checkpoint(&self) -> &Checkpoint {
        &self.checkpoint
    }

    pub fn adjacency(&self) -> &Tensor {
        &self.adjacency
    }

    pub fn record_inputs<W: Window>(&self, tape: &mut Tape, signal: &TemporalGraphSignal, window: &W) -> Result<Vec<Var>> {
        record_window(tape, &self.checkpoint.input_bounds, self.checkpoint.config.input_range, signal, window)
    }

    /// Similarity score in `(0, 1)` for one window.
    pub fn predict<W: Window>(&self, signal: &TemporalGraphSignal, window: &W) -> Result<f64> {
        let mut tape = Tape::new();
        let params = bind(&mut tape, &self.checkpoint.config, &self.checkpoint.params, false);
        let adj = tape.constant(self.adjacency.clone());
        let inputs = self.record_inputs(&mut tape, signal, window)?;
        let out = forward(&mut tape, &params, adj, &inputs)?;
        Ok(tape.value(out.output).item().expect("head emits 1x1"))
    }

    /// Attention weights (`N x L`) for attention cells.
    pub fn attention<W: Window>(&self, signal: &TemporalGraphSignal, window: &W) -> Result<Option<Tensor>> {
        let mut tape = Tape::new();
        let params = bind(&mut tape, &self.checkpoint.config, &self.checkpoint.params, false);
        let adj = tape.constant(self.adjacency.clone());
        let inputs = self.record_inputs(&mut tape, signal, window)?;
        let out = forward(&mut tape, &params, adj, &inputs)?;
        Ok(out.attention.map(|a| tape.value(a).clone()))
    }
}
