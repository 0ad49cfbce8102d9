//! Surrogate losses, a budget-constrained ERM trainer and data-split model
//! selection.
//!
//! The trainer runs minibatch projected subgradient descent with a cosine
//! learning-rate decay. After every step parameters are clipped to
//! `[−B, B]`; every `prune_every` epochs (and at exit) a global magnitude
//! prune keeps the largest parameters, and pruned entries stay at zero for
//! the rest of the run. The output is finally clamped to `[−F, F]`.

use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::data::Dataset;
use crate::error::{input, Error, Result};
use crate::net::{clamp_output, Affine, ArchBudget, ReluNetwork, Scratch};
use crate::synth::sign;
use crate::theory::{architecture_schedule_with, RateSpec, ScheduleConstants};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LossKind {
    Hinge,
    Logistic,
}

impl LossKind {
    pub fn as_str(self) -> &'static str {
        match self {
            LossKind::Hinge => "hinge",
            LossKind::Logistic => "logistic",
        }
    }

    /// `φ(z)` at margin `z = y·f(x)`.
    pub fn value(self, z: f64) -> f64 {
        match self {
            LossKind::Hinge => (1.0 - z).max(0.0),
            LossKind::Logistic => (-z).max(0.0) + (-z.abs()).exp().ln_1p(),
        }
    }

    /// A subgradient of `φ` at `z`; the hinge kink at `z = 1` gets 0.
    pub fn subgrad(self, z: f64) -> f64 {
        match self {
            LossKind::Hinge => {
                if z < 1.0 {
                    -1.0
                } else {
                    0.0
                }
            }
            LossKind::Logistic => {
                if z >= 0.0 {
                    let e = (-z).exp();
                    -e / (1.0 + e)
                } else {
                    -1.0 / (1.0 + z.exp())
                }
            }
        }
    }
}

pub fn loss_value(kind: LossKind, z: f64) -> f64 {
    kind.value(z)
}

pub fn loss_subgrad(kind: LossKind, z: f64) -> f64 {
    kind.subgrad(z)
}

/// Neumaier-compensated running sum.
#[derive(Debug, Default, Clone, Copy)]
struct Compensated {
    sum: f64,
    carry: f64,
}

impl Compensated {
    fn add(&mut self, v: f64) {
        let t = self.sum + v;
        if self.sum.abs() >= v.abs() {
            self.carry += (self.sum - t) + v;
        } else {
            self.carry += (v - t) + self.sum;
        }
        self.sum = t;
    }

    fn value(self) -> f64 {
        self.sum + self.carry
    }
}

/// `Σ φ(y_i f(x_i)) / n`.
pub fn empirical_phi_risk(net: &ReluNetwork, data: &Dataset, kind: LossKind) -> Result<f64> {
    check_data(net, data)?;
    let mut s = Scratch::default();
    let mut acc = Compensated::default();
    for (x, y) in data.iter() {
        acc.add(kind.value(y * net.forward_scalar(x, &mut s)));
    }
    Ok(acc.value() / data.len() as f64)
}

/// Fraction of points with `sign(f(x)) ≠ y` (ties count as −1).
pub fn zero_one_error(net: &ReluNetwork, data: &Dataset) -> Result<f64> {
    check_data(net, data)?;
    let mut s = Scratch::default();
    let wrong = data
        .iter()
        .filter(|(x, y)| sign(net.forward_scalar(x, &mut s)) != *y)
        .count();
    Ok(wrong as f64 / data.len() as f64)
}

fn check_data(net: &ReluNetwork, data: &Dataset) -> Result<()> {
    if data.is_empty() {
        return input("empty dataset");
    }
    if net.input_dim() != data.dim() || net.output_dim() != 1 {
        return Err(Error::Composition(format!(
            "network maps {} → {} but the data has dimension {}",
            net.input_dim(),
            net.output_dim(),
            data.dim()
        )));
    }
    Ok(())
}

/// Gradient of a scalar objective with respect to every affine map.
#[derive(Debug, Clone, PartialEq)]
pub struct NetGradient {
    pub weights: Vec<Vec<f64>>,
    pub bias: Vec<Vec<f64>>,
}

impl NetGradient {
    fn zeros_like(net: &ReluNetwork) -> Self {
        Self {
            weights: net
                .layers()
                .iter()
                .map(|a| vec![0.0; a.weights().len()])
                .collect(),
            bias: net
                .layers()
                .iter()
                .map(|a| vec![0.0; a.bias().len()])
                .collect(),
        }
    }

    fn clear(&mut self) {
        self.weights
            .iter_mut()
            .chain(self.bias.iter_mut())
            .for_each(|v| v.fill(0.0));
    }

    /// Inner product with a direction of the same shape.
    pub fn dot(&self, other: &NetGradient) -> f64 {
        let part = |a: &[Vec<f64>], b: &[Vec<f64>]| -> f64 {
            a.iter()
                .zip(b)
                .map(|(u, v)| u.iter().zip(v).map(|(p, q)| p * q).sum::<f64>())
                .sum()
        };
        part(&self.weights, &other.weights) + part(&self.bias, &other.bias)
    }
}

/// Per-sample forward cache for backpropagation.
struct Tape {
    /// Pre-activations of every map.
    pre: Vec<Vec<f64>>,
    /// Post-activations of every hidden layer (input excluded).
    post: Vec<Vec<f64>>,
    delta: Vec<f64>,
    next: Vec<f64>,
}

impl Tape {
    fn new(net: &ReluNetwork) -> Self {
        Self {
            pre: net.layers().iter().map(|a| vec![0.0; a.rows()]).collect(),
            post: net.layers().iter().map(|a| vec![0.0; a.rows()]).collect(),
            delta: Vec::new(),
            next: Vec::new(),
        }
    }

    fn forward(&mut self, net: &ReluNetwork, x: &[f64]) -> f64 {
        let layers = net.layers();
        for (l, a) in layers.iter().enumerate() {
            let (before, rest) = self.post.split_at_mut(l);
            let input = if l == 0 { x } else { &before[l - 1][..] };
            let z = &mut self.pre[l];
            for (r, zr) in z.iter_mut().enumerate() {
                let mut acc = a.bias()[r];
                for (w, v) in a.row(r).iter().zip(input) {
                    acc += w * v;
                }
                *zr = acc;
            }
            for (p, &zv) in rest[0].iter_mut().zip(z.iter()) {
                *p = if zv > 0.0 { zv } else { 0.0 };
            }
        }
        self.pre[layers.len() - 1][0]
    }

    /// Adds `scale · ∂out/∂θ` to `grad`, using the cached forward pass.
    fn backward(&mut self, net: &ReluNetwork, x: &[f64], scale: f64, grad: &mut NetGradient) {
        let layers = net.layers();
        self.delta.clear();
        self.delta.push(scale);
        for l in (0..layers.len()).rev() {
            let a = &layers[l];
            let input = if l == 0 { x } else { &self.post[l - 1][..] };
            let gw = &mut grad.weights[l];
            for (r, &d) in self.delta.iter().enumerate() {
                if d == 0.0 {
                    continue;
                }
                grad.bias[l][r] += d;
                for (g, v) in gw[r * a.cols()..(r + 1) * a.cols()].iter_mut().zip(input) {
                    *g += d * v;
                }
            }
            if l == 0 {
                break;
            }
            self.next.clear();
            self.next.resize(a.cols(), 0.0);
            for (r, &d) in self.delta.iter().enumerate() {
                if d == 0.0 {
                    continue;
                }
                for (n, w) in self.next.iter_mut().zip(a.row(r)) {
                    *n += d * w;
                }
            }
            for (n, &z) in self.next.iter_mut().zip(&self.pre[l - 1]) {
                if z <= 0.0 {
                    *n = 0.0;
                }
            }
            std::mem::swap(&mut self.delta, &mut self.next);
        }
    }
}

/// Empirical φ-risk and its backpropagated subgradient (ReLU′(0) = 0).
pub fn phi_risk_gradient(
    net: &ReluNetwork,
    data: &Dataset,
    kind: LossKind,
) -> Result<(f64, NetGradient)> {
    check_data(net, data)?;
    let mut grad = NetGradient::zeros_like(net);
    let mut tape = Tape::new(net);
    let n = data.len() as f64;
    let mut risk = Compensated::default();
    for (x, y) in data.iter() {
        let out = tape.forward(net, x);
        risk.add(kind.value(y * out));
        tape.backward(net, x, y * kind.subgrad(y * out) / n, &mut grad);
    }
    Ok((risk.value() / n, grad))
}

/// Smallest distance of any pre-activation to 0 and, for the hinge loss,
/// of any margin to the kink at 1. Finite differences are reliable only
/// for steps well below this value.
pub fn kink_distance(net: &ReluNetwork, data: &Dataset, kind: LossKind) -> Result<f64> {
    check_data(net, data)?;
    let mut tape = Tape::new(net);
    let mut best = f64::INFINITY;
    let hidden = net.depth();
    for (x, y) in data.iter() {
        let out = tape.forward(net, x);
        for z in tape.pre[..hidden].iter().flatten() {
            best = best.min(z.abs());
        }
        if kind == LossKind::Hinge {
            best = best.min((1.0 - y * out).abs());
        }
    }
    Ok(best)
}

/// Optimiser settings; the architecture comes from `budget`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub budget: ArchBudget,
    pub epochs: usize,
    /// Initial learning rate of the cosine schedule.
    pub learning_rate: f64,
    /// Final learning rate as a fraction of the initial one.
    pub final_rate_fraction: f64,
    pub batch_size: usize,
    pub prune_every: usize,
    pub seed: u64,
    pub init_scale: f64,
}

impl TrainConfig {
    pub fn new(budget: ArchBudget, seed: u64) -> Self {
        Self {
            budget,
            epochs: 200,
            learning_rate: 0.05,
            final_rate_fraction: 0.01,
            batch_size: 32,
            prune_every: 10,
            seed,
            init_scale: 6f64.sqrt(),
        }
    }

    fn validate(&self) -> Result<()> {
        if self.epochs == 0 || self.batch_size == 0 || self.prune_every == 0 {
            return input("epochs, batch size and prune interval must be positive");
        }
        if !(self.learning_rate > 0.0) || !(self.init_scale > 0.0) {
            return input("learning rate and init scale must be positive");
        }
        if !(0.0..=1.0).contains(&self.final_rate_fraction) {
            return input("final rate fraction must lie in [0, 1]");
        }
        Ok(())
    }

    fn rate(&self, epoch: usize) -> f64 {
        let lo = self.final_rate_fraction * self.learning_rate;
        let t = epoch as f64 / self.epochs.max(2).saturating_sub(1) as f64;
        lo + 0.5 * (self.learning_rate - lo) * (1.0 + (std::f64::consts::PI * t.min(1.0)).cos())
    }
}

/// Nonzeros taken by the output clamp on top of the trained network.
pub const CLAMP_NNZ_OVERHEAD: usize = 5;
/// Hidden layers taken by the output clamp.
pub const CLAMP_DEPTH: usize = 2;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EpochRecord {
    pub epoch: usize,
    pub train_phi_risk: f64,
    pub nnz: usize,
    pub max_abs: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainOutcome {
    pub net: ReluNetwork,
    /// Epoch-end training risk of the unclamped network; entry 0 is the initialisation.
    pub trace: Vec<EpochRecord>,
    pub initial_risk: f64,
    pub final_risk: f64,
    /// The trained network was worse than the initial one and was discarded.
    pub reverted: bool,
}

struct Mask {
    weights: Vec<Vec<bool>>,
    bias: Vec<Vec<bool>>,
}

impl Mask {
    fn full(net: &ReluNetwork) -> Self {
        Self {
            weights: net
                .layers()
                .iter()
                .map(|a| vec![true; a.weights().len()])
                .collect(),
            bias: net
                .layers()
                .iter()
                .map(|a| vec![true; a.bias().len()])
                .collect(),
        }
    }
}

/// Global magnitude prune keeping at most `keep` nonzero parameters; ties at
/// the threshold are resolved in storage order.
fn prune(net: &mut ReluNetwork, mask: &mut Mask, keep: usize) {
    // (magnitude, layer, is_bias, index)
    let mut entries: Vec<(f64, usize, bool, usize)> = Vec::new();
    for (l, a) in net.layers().iter().enumerate() {
        let w = a
            .weights()
            .iter()
            .enumerate()
            .map(|(i, v)| (v.abs(), l, false, i));
        let b = a
            .bias()
            .iter()
            .enumerate()
            .map(|(i, v)| (v.abs(), l, true, i));
        entries.extend(w.chain(b).filter(|e| e.0 != 0.0));
    }
    if entries.len() <= keep {
        return;
    }
    entries.sort_by(|a, b| b.0.total_cmp(&a.0));
    let layers = net.layers_mut();
    for &(_, l, is_bias, i) in &entries[keep..] {
        if is_bias {
            layers[l].bias_mut()[i] = 0.0;
            mask.bias[l][i] = false;
        } else {
            layers[l].weights_mut()[i] = 0.0;
            mask.weights[l][i] = false;
        }
    }
}

fn init_network(
    dim: usize,
    hidden: usize,
    width: usize,
    cfg: &TrainConfig,
    rng: &mut ChaCha8Rng,
) -> Result<ReluNetwork> {
    let mut dims = vec![dim];
    dims.extend(std::iter::repeat_n(width, hidden));
    dims.push(1);
    let layers = dims
        .windows(2)
        .enumerate()
        .map(|(l, w)| {
            let (cols, rows) = (w[0], w[1]);
            let s = (cfg.init_scale / (cols as f64).sqrt()).min(cfg.budget.max_abs);
            let weights: Vec<f64> = (0..rows * cols).map(|_| rng.gen_range(-s..=s)).collect();
            // first-layer hyperplanes pass through random points of the unit cube
            let bias = if l == 0 && rows > 1 {
                weights
                    .chunks(cols)
                    .map(|row| {
                        let b: f64 = row.iter().map(|w| -w * rng.gen::<f64>()).sum();
                        b.clamp(-cfg.budget.max_abs, cfg.budget.max_abs)
                    })
                    .collect()
            } else {
                vec![0.0; rows]
            };
            Affine::new(rows, cols, weights, bias)
        })
        .collect::<Result<Vec<_>>>()?;
    ReluNetwork::new(layers)
}

/// Approximate empirical φ-risk minimiser over the budgeted class.
///
/// The hidden part has `max_depth − 2` layers of width `max_width`; two more
/// layers implement the output clamp at `max_sup`.
pub fn erm_train(data: &Dataset, kind: LossKind, cfg: &TrainConfig) -> Result<TrainOutcome> {
    cfg.validate()?;
    if data.is_empty() {
        return input("cannot train on an empty dataset");
    }
    let b = cfg.budget;
    if b.max_depth < CLAMP_DEPTH {
        return input(format!(
            "depth budget {} leaves no room for the output clamp",
            b.max_depth
        ));
    }
    if !(b.max_sup > 0.0 && b.max_sup.is_finite()) {
        return input("sup bound must be positive and finite");
    }
    if b.max_abs < 2.0 * b.max_sup || b.max_abs < 1.0 {
        return input(format!(
            "parameter bound {} is below max(1, 2F) = {} needed by the output clamp",
            b.max_abs,
            (2.0 * b.max_sup).max(1.0)
        ));
    }
    let zero_net = || {
        let net = ReluNetwork::constant(data.dim(), 0.0);
        let risk = kind.value(0.0);
        TrainOutcome {
            net,
            trace: Vec::new(),
            initial_risk: risk,
            final_risk: risk,
            reverted: false,
        }
    };
    if b.max_nnz <= CLAMP_NNZ_OVERHEAD || b.max_width == 0 {
        return Ok(zero_net());
    }
    let keep = b.max_nnz - CLAMP_NNZ_OVERHEAD;
    let hidden = b.max_depth - CLAMP_DEPTH;

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut net = init_network(data.dim(), hidden, b.max_width, cfg, &mut rng)?;
    let mut mask = Mask::full(&net);
    prune(&mut net, &mut mask, keep);
    let initial = clamp_output(&net, b.max_sup)?;
    let initial_risk = empirical_phi_risk(&initial, data, kind)?;

    let snapshot = |net: &ReluNetwork, epoch: usize| -> Result<EpochRecord> {
        let risk = empirical_phi_risk(net, data, kind)?;
        if !risk.is_finite() {
            return Err(Error::Divergence {
                epoch,
                detail: format!("non-finite training risk; config {cfg:?}"),
            });
        }
        Ok(EpochRecord {
            epoch,
            train_phi_risk: risk,
            nnz: net.nnz(),
            max_abs: net.max_abs_param(),
        })
    };
    let mut trace = vec![snapshot(&net, 0)?];
    let mut order: Vec<usize> = (0..data.len()).collect();
    let mut grad = NetGradient::zeros_like(&net);
    let mut tape = Tape::new(&net);
    for epoch in 1..=cfg.epochs {
        let lr = cfg.rate(epoch - 1);
        order.shuffle(&mut rng);
        for batch in order.chunks(cfg.batch_size) {
            grad.clear();
            let scale = 1.0 / batch.len() as f64;
            for &i in batch {
                let (x, y) = (data.x(i), data.y(i));
                let out = tape.forward(&net, x);
                let g = kind.subgrad(y * out);
                if g != 0.0 {
                    tape.backward(&net, x, y * g * scale, &mut grad);
                }
            }
            for (l, a) in net.layers_mut().iter_mut().enumerate() {
                for ((w, g), &m) in a
                    .weights_mut()
                    .iter_mut()
                    .zip(&grad.weights[l])
                    .zip(&mask.weights[l])
                {
                    if m {
                        *w = (*w - lr * g).clamp(-b.max_abs, b.max_abs);
                    }
                }
                for ((v, g), &m) in a
                    .bias_mut()
                    .iter_mut()
                    .zip(&grad.bias[l])
                    .zip(&mask.bias[l])
                {
                    if m {
                        *v = (*v - lr * g).clamp(-b.max_abs, b.max_abs);
                    }
                }
            }
        }
        if epoch % cfg.prune_every == 0 || epoch == cfg.epochs {
            prune(&mut net, &mut mask, keep);
        }
        trace.push(snapshot(&net, epoch)?);
    }
    let trained = clamp_output(&net, b.max_sup)?;
    let final_risk = empirical_phi_risk(&trained, data, kind)?;
    if final_risk > initial_risk {
        return Ok(TrainOutcome {
            net: initial,
            trace,
            initial_risk,
            final_risk: initial_risk,
            reverted: true,
        });
    }
    Ok(TrainOutcome {
        net: trained,
        trace,
        initial_risk,
        final_risk,
        reverted: false,
    })
}

/// A model-selection candidate.
#[derive(Debug, Clone)]
pub enum Candidate {
    /// Trained on the first part of the data.
    Train {
        name: String,
        loss: LossKind,
        config: TrainConfig,
    },
    /// A fixed network, only validated.
    Fixed { name: String, net: ReluNetwork },
}

impl Candidate {
    /// Candidate whose budget is the schedule of a guessed rate specification
    /// at the training-sample size, capped by `ceiling`.
    pub fn from_rate_guess(
        name: impl Into<String>,
        guess: &RateSpec,
        n_train: usize,
        constants: &ScheduleConstants,
        ceiling: &ArchBudget,
        base: &TrainConfig,
        loss: LossKind,
    ) -> Result<Self> {
        let s = architecture_schedule_with(guess, n_train as u64, constants)?;
        let budget = ArchBudget {
            max_depth: s.depth.min(ceiling.max_depth),
            max_width: s.width.min(ceiling.max_width),
            max_nnz: s.nonzeros.min(ceiling.max_nnz),
            max_abs: s.param_bound.min(ceiling.max_abs),
            max_sup: s.sup_bound.min(ceiling.max_sup),
        };
        Ok(Candidate::Train {
            name: name.into(),
            loss,
            config: TrainConfig { budget, ..*base },
        })
    }

    pub fn name(&self) -> &str {
        match self {
            Candidate::Train { name, .. } | Candidate::Fixed { name, .. } => name,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CandidateRow {
    pub name: String,
    pub validation_error: f64,
    pub nnz: usize,
    pub depth: usize,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelectionReport {
    pub rows: Vec<CandidateRow>,
    pub selected: usize,
    pub train_size: usize,
    pub validation_size: usize,
}

/// Trains every candidate on the first `split_fraction` of the data and
/// picks the smallest 0-1 error on the rest; ties go to fewer nonzeros,
/// then smaller depth, then the earlier candidate.
pub fn model_select(
    candidates: &[Candidate],
    data: &Dataset,
    split_fraction: f64,
) -> Result<(ReluNetwork, SelectionReport)> {
    if candidates.len() < 2 {
        return input("model selection needs at least two candidates");
    }
    let (train, valid) = data.split(split_fraction)?;
    let mut nets = Vec::with_capacity(candidates.len());
    let mut rows = Vec::with_capacity(candidates.len());
    for c in candidates {
        let fitted = match c {
            Candidate::Train { loss, config, .. } => {
                erm_train(&train, *loss, config).map(|o| o.net)
            }
            Candidate::Fixed { net, .. } => Ok(net.clone()),
        };
        match fitted.and_then(|net| zero_one_error(&net, &valid).map(|e| (net, e))) {
            Ok((net, err)) => {
                rows.push(CandidateRow {
                    name: c.name().to_string(),
                    validation_error: err,
                    nnz: net.nnz(),
                    depth: net.depth(),
                    error: None,
                });
                nets.push(Some(net));
            }
            Err(e) => {
                rows.push(CandidateRow {
                    name: c.name().to_string(),
                    validation_error: f64::INFINITY,
                    nnz: usize::MAX,
                    depth: usize::MAX,
                    error: Some(e.to_string()),
                });
                nets.push(None);
            }
        }
    }
    let selected = (0..rows.len())
        .filter(|&i| nets[i].is_some())
        .min_by(|&i, &j| {
            let (a, b) = (&rows[i], &rows[j]);
            a.validation_error
                .total_cmp(&b.validation_error)
                .then(a.nnz.cmp(&b.nnz))
                .then(a.depth.cmp(&b.depth))
                .then(i.cmp(&j))
        })
        .ok_or_else(|| Error::Estimation("every candidate failed".into()))?;
    let net = nets[selected]
        .take()
        .expect("selected candidate has a network");
    Ok((
        net,
        SelectionReport {
            rows,
            selected,
            train_size: train.len(),
            validation_size: valid.len(),
        },
    ))
}
