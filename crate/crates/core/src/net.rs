//! Sparse ReLU networks with explicit parameters.
//!
//! A [`ReluNetwork`] is an ordered list of affine maps `(W, b)`. ReLU is
//! applied after every map except the last, so a network with `L + 1` maps
//! has `L` hidden layers. Weights are stored densely (row-major) with exact
//! zeros; the nonzero count is taken by an exact-zero test.
//!
//! The composition operators mirror the usual network calculus:
//! [`stack`] (functional composition with the middle affine maps merged),
//! [`concat`] (parallel networks sharing an input, outputs stacked),
//! [`masking_network`] (coordinate masking realised with `σ(a) − σ(−a) = a`),
//! [`pad_depth`] and [`clamp_output`].

use std::collections::BTreeMap;

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{input, Error, Result};

#[inline]
pub fn relu(z: f64) -> f64 {
    if z > 0.0 {
        z
    } else {
        0.0
    }
}

/// One affine map `x ↦ W x + b` with `W` stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Affine {
    rows: usize,
    cols: usize,
    weights: Vec<f64>,
    bias: Vec<f64>,
}

impl Affine {
    pub fn new(rows: usize, cols: usize, weights: Vec<f64>, bias: Vec<f64>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return input(format!(
                "affine map must have positive shape, got {rows}x{cols}"
            ));
        }
        if weights.len() != rows * cols {
            return input(format!(
                "weight buffer has {} entries, expected {}x{}",
                weights.len(),
                rows,
                cols
            ));
        }
        if bias.len() != rows {
            return input(format!("bias has {} entries, expected {rows}", bias.len()));
        }
        Ok(Self {
            rows,
            cols,
            weights,
            bias,
        })
    }

    /// Builds a map from a list of matrix rows.
    pub fn from_rows(rows: &[Vec<f64>], bias: Vec<f64>) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != cols) {
            return input("ragged weight matrix");
        }
        let weights = rows.iter().flatten().copied().collect();
        Self::new(rows.len(), cols, weights, bias)
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            weights: vec![0.0; rows * cols],
            bias: vec![0.0; rows],
        }
    }

    pub fn identity(dim: usize) -> Self {
        let mut a = Self::zeros(dim, dim);
        for i in 0..dim {
            a.weights[i * dim + i] = 1.0;
        }
        a
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn bias(&self) -> &[f64] {
        &self.bias
    }

    pub fn weights_mut(&mut self) -> &mut [f64] {
        &mut self.weights
    }

    pub fn bias_mut(&mut self) -> &mut [f64] {
        &mut self.bias
    }

    #[inline]
    pub fn weight(&self, row: usize, col: usize) -> f64 {
        self.weights[row * self.cols + col]
    }

    #[inline]
    fn set(&mut self, row: usize, col: usize, value: f64) {
        self.weights[row * self.cols + col] = value;
    }

    pub fn row(&self, row: usize) -> &[f64] {
        &self.weights[row * self.cols..(row + 1) * self.cols]
    }

    /// `out = W x + b`, accumulated from the bias in column order.
    #[inline]
    pub fn apply_into(&self, x: &[f64], out: &mut Vec<f64>) {
        out.clear();
        for (r, &b) in self.bias.iter().enumerate() {
            let row = &self.weights[r * self.cols..(r + 1) * self.cols];
            let mut acc = b;
            for (w, v) in row.iter().zip(x) {
                acc += w * v;
            }
            out.push(acc);
        }
    }

    fn nnz(&self) -> usize {
        self.weights
            .iter()
            .chain(&self.bias)
            .filter(|v| **v != 0.0)
            .count()
    }

    fn max_abs(&self) -> f64 {
        self.weights
            .iter()
            .chain(&self.bias)
            .fold(0.0_f64, |m, v| m.max(v.abs()))
    }

    fn param_count(&self) -> usize {
        self.weights.len() + self.bias.len()
    }

    /// `self ∘ inner` as a single affine map.
    fn compose(&self, inner: &Affine) -> Affine {
        debug_assert_eq!(self.cols, inner.rows);
        let mut out = Affine::zeros(self.rows, inner.cols);
        for i in 0..self.rows {
            for j in 0..inner.cols {
                let mut acc = 0.0;
                for k in 0..self.cols {
                    acc += self.weight(i, k) * inner.weight(k, j);
                }
                out.set(i, j, acc);
            }
            let mut acc = 0.0;
            for k in 0..self.cols {
                acc += self.weight(i, k) * inner.bias[k];
            }
            out.bias[i] = acc + self.bias[i];
        }
        out
    }
}

/// Explicit parameter set of a feed-forward ReLU network.
#[derive(Debug, Clone, PartialEq)]
pub struct ReluNetwork {
    layers: Vec<Affine>,
}

/// Reusable buffers for allocation-free evaluation.
#[derive(Debug, Default, Clone)]
pub struct Scratch {
    a: Vec<f64>,
    b: Vec<f64>,
}

impl ReluNetwork {
    pub fn new(layers: Vec<Affine>) -> Result<Self> {
        if layers.is_empty() {
            return input("a network needs at least one affine map");
        }
        for (l, pair) in layers.windows(2).enumerate() {
            if pair[1].cols != pair[0].rows {
                return input(format!(
                    "layer {} expects {} inputs but layer {} produces {}",
                    l + 1,
                    pair[1].cols,
                    l,
                    pair[0].rows
                ));
            }
        }
        Ok(Self { layers })
    }

    pub fn affine(map: Affine) -> Self {
        Self { layers: vec![map] }
    }

    pub fn identity(dim: usize) -> Self {
        Self::affine(Affine::identity(dim))
    }

    /// The constant map `x ↦ value` on `input_dim` inputs.
    pub fn constant(input_dim: usize, value: f64) -> Self {
        let mut a = Affine::zeros(1, input_dim);
        a.bias[0] = value;
        Self::affine(a)
    }

    /// Affine map picking the listed coordinates (0-based) in order.
    pub fn select(input_dim: usize, coords: &[usize]) -> Result<Self> {
        if coords.is_empty() {
            return input("selection needs at least one coordinate");
        }
        let mut a = Affine::zeros(coords.len(), input_dim);
        for (r, &c) in coords.iter().enumerate() {
            if c >= input_dim {
                return input(format!(
                    "coordinate {c} out of range for dimension {input_dim}"
                ));
            }
            a.set(r, c, 1.0);
        }
        Ok(Self::affine(a))
    }

    pub fn layers(&self) -> &[Affine] {
        &self.layers
    }

    pub fn layers_mut(&mut self) -> &mut [Affine] {
        &mut self.layers
    }

    pub fn input_dim(&self) -> usize {
        self.layers[0].cols
    }

    pub fn output_dim(&self) -> usize {
        self.layers[self.layers.len() - 1].rows
    }

    /// Number of hidden layers.
    pub fn depth(&self) -> usize {
        self.layers.len() - 1
    }

    pub fn hidden_widths(&self) -> Vec<usize> {
        self.layers[..self.depth()].iter().map(|a| a.rows).collect()
    }

    pub fn nnz(&self) -> usize {
        self.layers.iter().map(Affine::nnz).sum()
    }

    pub fn param_count(&self) -> usize {
        self.layers.iter().map(Affine::param_count).sum()
    }

    pub fn max_abs_param(&self) -> f64 {
        self.layers.iter().fold(0.0, |m, a| m.max(a.max_abs()))
    }

    pub fn evaluate(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.input_dim() {
            return input(format!(
                "input has {} coordinates, network expects {}",
                x.len(),
                self.input_dim()
            ));
        }
        let mut s = Scratch::default();
        Ok(self.forward(x, &mut s).to_vec())
    }

    /// Evaluates without a dimension check; `x.len()` must equal `input_dim`.
    pub fn forward<'s>(&self, x: &[f64], s: &'s mut Scratch) -> &'s [f64] {
        debug_assert_eq!(x.len(), self.input_dim());
        self.layers[0].apply_into(x, &mut s.a);
        for layer in &self.layers[1..] {
            for v in s.a.iter_mut() {
                *v = relu(*v);
            }
            layer.apply_into(&s.a, &mut s.b);
            std::mem::swap(&mut s.a, &mut s.b);
        }
        &s.a
    }

    /// Scalar output of a single-output network.
    #[inline]
    pub fn forward_scalar(&self, x: &[f64], s: &mut Scratch) -> f64 {
        self.forward(x, s)[0]
    }

    pub fn stats(&self, grid_resolution: usize) -> NetStats {
        NetStats {
            depth: self.depth(),
            max_width: self.hidden_widths().into_iter().max().unwrap_or(0),
            nnz: self.nnz(),
            max_abs_param: self.max_abs_param(),
            sup_norm_estimate: self.sup_norm_estimate(grid_resolution),
        }
    }

    /// Lower estimate of `sup |f|` over the unit cube: a uniform grid with
    /// `resolution` points per axis for `d ≤ 3`, otherwise a fixed-seed Monte
    /// Carlo sample. Returns `None` when `resolution < 2`.
    pub fn sup_norm_estimate(&self, resolution: usize) -> Option<f64> {
        if resolution < 2 {
            return None;
        }
        let d = self.input_dim();
        let mut s = Scratch::default();
        let mut best = 0.0_f64;
        let mut visit = |x: &[f64], s: &mut Scratch| {
            for v in self.forward(x, s) {
                best = best.max(v.abs());
            }
        };
        if d <= 3 {
            let total = resolution.pow(d as u32);
            let mut x = vec![0.0; d];
            for idx in 0..total {
                let mut rem = idx;
                for xi in x.iter_mut() {
                    *xi = (rem % resolution) as f64 / (resolution - 1) as f64;
                    rem /= resolution;
                }
                visit(&x, &mut s);
            }
        } else {
            let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_5eed);
            let mut x = vec![0.0; d];
            for _ in 0..SUP_MC_SAMPLES {
                for xi in x.iter_mut() {
                    *xi = rng.gen::<f64>();
                }
                visit(&x, &mut s);
            }
        }
        Some(best)
    }

    pub fn to_document(&self) -> NetworkDocument {
        NetworkDocument {
            format: NETWORK_FORMAT.to_string(),
            version: NETWORK_FORMAT_VERSION,
            input_dim: self.input_dim(),
            output_dim: self.output_dim(),
            layers: self
                .layers
                .iter()
                .map(|a| LayerDocument {
                    weights: (0..a.rows).map(|r| a.row(r).to_vec()).collect(),
                    bias: a.bias.clone(),
                })
                .collect(),
            metadata: BTreeMap::new(),
        }
    }

    pub fn from_document(doc: &NetworkDocument) -> Result<Self> {
        if doc.format != NETWORK_FORMAT {
            return input(format!("unknown network format {:?}", doc.format));
        }
        if doc.version != NETWORK_FORMAT_VERSION {
            return input(format!(
                "unsupported network format version {}",
                doc.version
            ));
        }
        let layers = doc
            .layers
            .iter()
            .map(|l| Affine::from_rows(&l.weights, l.bias.clone()))
            .collect::<Result<Vec<_>>>()?;
        let net = Self::new(layers)?;
        if net.input_dim() != doc.input_dim || net.output_dim() != doc.output_dim {
            return input("declared dimensions disagree with the layer shapes");
        }
        Ok(net)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&self.to_document())?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let doc: NetworkDocument = serde_json::from_str(text)?;
        Self::from_document(&doc)
    }
}

const SUP_MC_SAMPLES: usize = 100_000;

pub const NETWORK_FORMAT: &str = "dnnclass.relu-network";
pub const NETWORK_FORMAT_VERSION: u32 = 1;

/// On-disk form of a network: row-major matrices and bias vectors.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct NetworkDocument {
    pub format: String,
    pub version: u32,
    pub input_dim: usize,
    pub output_dim: usize,
    pub layers: Vec<LayerDocument>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub metadata: BTreeMap<String, serde_json::Value>,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct LayerDocument {
    pub weights: Vec<Vec<f64>>,
    pub bias: Vec<f64>,
}

/// Architecture accounting of a network.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NetStats {
    /// Hidden layer count.
    pub depth: usize,
    /// Largest hidden layer width (0 for a single affine map).
    pub max_width: usize,
    pub nnz: usize,
    pub max_abs_param: f64,
    /// Finite-sample lower estimate of the sup norm on the unit cube.
    pub sup_norm_estimate: Option<f64>,
}

/// Constraints `(L, N, S, B, F)` of a sparse DNN class.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ArchBudget {
    pub max_depth: usize,
    pub max_width: usize,
    pub max_nnz: usize,
    pub max_abs: f64,
    pub max_sup: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BudgetViolation {
    Depth,
    Width,
    Nonzeros,
    ParamMagnitude,
    SupNorm,
}

impl ArchBudget {
    /// Constraints that `stats` breaks. An unmeasured sup norm is not checked.
    pub fn violations(&self, stats: &NetStats) -> Vec<BudgetViolation> {
        let mut v = Vec::new();
        if stats.depth > self.max_depth {
            v.push(BudgetViolation::Depth);
        }
        if stats.max_width > self.max_width {
            v.push(BudgetViolation::Width);
        }
        if stats.nnz > self.max_nnz {
            v.push(BudgetViolation::Nonzeros);
        }
        if stats.max_abs_param > self.max_abs {
            v.push(BudgetViolation::ParamMagnitude);
        }
        if stats.sup_norm_estimate.is_some_and(|s| s > self.max_sup) {
            v.push(BudgetViolation::SupNorm);
        }
        v
    }

    pub fn admits(&self, stats: &NetStats) -> bool {
        self.violations(stats).is_empty()
    }
}

/// `outer ∘ inner`; the last map of `inner` and the first map of `outer` are
/// merged, so the result has `depth(outer) + depth(inner)` hidden layers.
pub fn stack(outer: &ReluNetwork, inner: &ReluNetwork) -> Result<ReluNetwork> {
    if outer.input_dim() != inner.output_dim() {
        return Err(Error::Composition(format!(
            "outer network takes {} inputs but inner produces {}",
            outer.input_dim(),
            inner.output_dim()
        )));
    }
    let n_inner = inner.layers.len();
    let mut layers = Vec::with_capacity(n_inner + outer.layers.len() - 1);
    layers.extend_from_slice(&inner.layers[..n_inner - 1]);
    layers.push(outer.layers[0].compose(&inner.layers[n_inner - 1]));
    layers.extend_from_slice(&outer.layers[1..]);
    Ok(ReluNetwork { layers })
}

/// Parallel networks on a shared input: `x ↦ (a(x), b(x))`.
pub fn concat(a: &ReluNetwork, b: &ReluNetwork) -> Result<ReluNetwork> {
    if a.input_dim() != b.input_dim() {
        return Err(Error::Composition(format!(
            "input dimensions differ ({} vs {})",
            a.input_dim(),
            b.input_dim()
        )));
    }
    if a.depth() != b.depth() {
        return Err(Error::Composition(format!(
            "depths differ ({} vs {}); pad the shallower network first",
            a.depth(),
            b.depth()
        )));
    }
    let layers = a
        .layers
        .iter()
        .zip(&b.layers)
        .enumerate()
        .map(|(l, (la, lb))| {
            let rows = la.rows + lb.rows;
            let mut out = if l == 0 {
                // shared input: vstack
                let mut m = Affine::zeros(rows, la.cols);
                m.weights[..la.weights.len()].copy_from_slice(&la.weights);
                m.weights[la.weights.len()..].copy_from_slice(&lb.weights);
                m
            } else {
                let mut m = Affine::zeros(rows, la.cols + lb.cols);
                for r in 0..la.rows {
                    for c in 0..la.cols {
                        m.set(r, c, la.weight(r, c));
                    }
                }
                for r in 0..lb.rows {
                    for c in 0..lb.cols {
                        m.set(la.rows + r, la.cols + c, lb.weight(r, c));
                    }
                }
                m
            };
            out.bias[..la.rows].copy_from_slice(&la.bias);
            out.bias[la.rows..].copy_from_slice(&lb.bias);
            out
        })
        .collect();
    Ok(ReluNetwork { layers })
}

/// Concatenates several networks after padding them to a common depth.
pub fn concat_all(nets: &[ReluNetwork]) -> Result<ReluNetwork> {
    let depth = nets
        .iter()
        .map(ReluNetwork::depth)
        .max()
        .ok_or_else(|| Error::Composition("nothing to concatenate".into()))?;
    let mut acc = pad_depth(&nets[0], depth)?;
    for n in &nets[1..] {
        acc = concat(&acc, &pad_depth(n, depth)?)?;
    }
    Ok(acc)
}

/// Network with `maps` affine maps (`maps − 1` hidden layers) computing the
/// masked identity `I(D) x` for every real `x`. `keep` holds 0-based indices.
///
/// For `maps ≥ 2` the first map is `vstack(I(D), −I(D))`, the middle maps are
/// `I_{2d}` and the last is `hstack(I(D), −I(D))`, giving
/// `‖Θ‖₀ = 2d(maps − 2) + 4|D|`. A single map is `I(D)` itself.
pub fn masking_network(d: usize, keep: &[usize], maps: usize) -> Result<ReluNetwork> {
    if d == 0 {
        return input("masking network needs a positive dimension");
    }
    if maps == 0 {
        return input("masking network needs at least one affine map");
    }
    let mut mask = vec![0.0; d];
    for &j in keep {
        if j >= d {
            return input(format!("mask index {j} out of range for dimension {d}"));
        }
        mask[j] = 1.0;
    }
    if maps == 1 {
        let mut a = Affine::zeros(d, d);
        for (i, &m) in mask.iter().enumerate() {
            a.set(i, i, m);
        }
        return Ok(ReluNetwork::affine(a));
    }
    let mut first = Affine::zeros(2 * d, d);
    let mut last = Affine::zeros(d, 2 * d);
    for (i, &m) in mask.iter().enumerate() {
        first.set(i, i, m);
        first.set(d + i, i, -m);
        last.set(i, i, m);
        last.set(i, d + i, -m);
    }
    let mut layers = vec![first];
    layers.extend((0..maps - 2).map(|_| Affine::identity(2 * d)));
    layers.push(last);
    Ok(ReluNetwork { layers })
}

/// Functionally identical network with exactly `target_depth` hidden layers,
/// obtained by stacking a full masking identity on the output side.
pub fn pad_depth(net: &ReluNetwork, target_depth: usize) -> Result<ReluNetwork> {
    let depth = net.depth();
    if target_depth < depth {
        return input(format!("cannot pad depth {depth} down to {target_depth}"));
    }
    if target_depth == depth {
        return Ok(net.clone());
    }
    let m = net.output_dim();
    let all: Vec<usize> = (0..m).collect();
    let pad = masking_network(m, &all, target_depth - depth + 1)?;
    stack(&pad, net)
}

/// Appends two ReLU layers computing `min(F, max(−F, f))`:
/// `max(−F, z) = σ(z + F) − F` followed by `min(F, y) = F − σ(F − y)`.
pub fn clamp_output(net: &ReluNetwork, bound: f64) -> Result<ReluNetwork> {
    if !(bound > 0.0) || !bound.is_finite() {
        return input(format!(
            "clamp bound must be positive and finite, got {bound}"
        ));
    }
    if net.output_dim() != 1 {
        return input("clamp_output needs a single-output network");
    }
    let layer = |w: f64, b: f64| Affine {
        rows: 1,
        cols: 1,
        weights: vec![w],
        bias: vec![b],
    };
    let clamp = ReluNetwork {
        layers: vec![
            layer(1.0, bound),
            layer(-1.0, 2.0 * bound),
            layer(-1.0, bound),
        ],
    };
    stack(&clamp, net)
}

/// Random network with the given layer dimensions `[d, n1, ..., out]`.
/// Each parameter is nonzero with probability `density`, uniform in
/// `[−scale, scale]` when present.
pub fn random_network<R: Rng>(
    rng: &mut R,
    dims: &[usize],
    density: f64,
    scale: f64,
) -> Result<ReluNetwork> {
    if dims.len() < 2 {
        return input("need at least input and output dimensions");
    }
    let layers = dims
        .windows(2)
        .map(|w| {
            let (cols, rows) = (w[0], w[1]);
            let mut draw = || {
                if rng.gen::<f64>() < density {
                    rng.gen_range(-scale..=scale)
                } else {
                    0.0
                }
            };
            let weights = (0..rows * cols).map(|_| draw()).collect();
            let bias = (0..rows).map(|_| draw()).collect();
            Affine::new(rows, cols, weights, bias)
        })
        .collect::<Result<Vec<_>>>()?;
    ReluNetwork::new(layers)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn net(rows: &[(&[&[f64]], &[f64])]) -> ReluNetwork {
        ReluNetwork::new(
            rows.iter()
                .map(|(w, b)| {
                    Affine::from_rows(
                        &w.iter().map(|r| r.to_vec()).collect::<Vec<_>>(),
                        b.to_vec(),
                    )
                    .unwrap()
                })
                .collect(),
        )
        .unwrap()
    }

    #[test]
    fn identity_affine_passes_input_through() {
        let id = ReluNetwork::identity(2);
        assert_eq!(id.evaluate(&[0.3, 0.7]).unwrap(), vec![0.3, 0.7]);
    }

    #[test]
    fn relu_pair_recovers_signed_input() {
        let n = net(&[(&[&[1.0], &[-1.0]], &[0.0, 0.0]), (&[&[1.0, -1.0]], &[0.0])]);
        assert_eq!(n.evaluate(&[-0.4]).unwrap(), vec![-0.4]);
        assert_eq!(n.depth(), 1);
    }

    #[test]
    fn dimension_mismatch_is_an_input_error() {
        let id = ReluNetwork::identity(2);
        assert!(matches!(id.evaluate(&[1.0]), Err(Error::Input(_))));
        let bad = ReluNetwork::new(vec![Affine::zeros(3, 2), Affine::zeros(1, 2)]);
        assert!(bad.is_err());
    }

    #[test]
    fn zero_network_stats() {
        let z = ReluNetwork::affine(Affine::zeros(1, 2));
        let s = z.stats(5);
        assert_eq!(s.nnz, 0);
        assert_eq!(s.max_abs_param, 0.0);
        assert_eq!(s.depth, 0);
        assert_eq!(s.sup_norm_estimate, Some(0.0));
        assert_eq!(z.stats(0).sup_norm_estimate, None);
    }

    #[test]
    fn masking_examples() {
        let m = masking_network(2, &[1], 3).unwrap();
        assert_eq!(m.evaluate(&[0.5, -0.3]).unwrap(), vec![0.0, -0.3]);
        let full = masking_network(2, &[0, 1], 4).unwrap();
        for x in [[-2.0, 3.5], [0.0, 0.0], [1e-9, -7.25]] {
            assert_eq!(full.evaluate(&x).unwrap(), x.to_vec());
        }
        let m3 = masking_network(3, &[0], 3).unwrap();
        let (d, maps, kept) = (3, 3, 1);
        assert_eq!(m3.nnz(), 2 * d * (maps - 2) + 4 * kept);
        assert_eq!(m3.depth(), 2);
        assert_eq!(m3.stats(0).max_width, 6);
        let empty = masking_network(3, &[], 2).unwrap();
        assert_eq!(empty.evaluate(&[1.0, -1.0, 2.0]).unwrap(), vec![0.0; 3]);
        assert!(masking_network(2, &[2], 2).is_err());
    }

    #[test]
    fn stack_with_identity_is_outer() {
        let outer = net(&[
            (&[&[2.0, -1.0], &[0.5, 1.0]], &[0.1, -0.2]),
            (&[&[1.0, 1.0]], &[0.3]),
        ]);
        let s = stack(&outer, &ReluNetwork::identity(2)).unwrap();
        for x in [[0.2, 0.9], [-1.0, 0.4], [3.0, -2.0]] {
            let a = s.evaluate(&x).unwrap()[0];
            let b = outer.evaluate(&x).unwrap()[0];
            assert!((a - b).abs() < 1e-15);
        }
        assert_eq!(s.depth(), outer.depth());
    }

    #[test]
    fn stack_depths_add() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let a = random_network(&mut rng, &[3, 4, 5, 2], 0.7, 1.0).unwrap();
        let b = random_network(&mut rng, &[2, 6, 3], 0.7, 1.0).unwrap();
        let s = stack(&a, &b).unwrap();
        assert_eq!(s.depth(), a.depth() + b.depth());
        assert!(matches!(stack(&b, &b), Err(Error::Composition(_))));
    }

    #[test]
    fn concat_identity_duplicates() {
        let id = ReluNetwork::identity(2);
        let c = concat(&id, &id).unwrap();
        assert_eq!(
            c.evaluate(&[0.25, -1.5]).unwrap(),
            vec![0.25, -1.5, 0.25, -1.5]
        );
    }

    #[test]
    fn concat_rejects_depth_mismatch() {
        let shallow = ReluNetwork::identity(2);
        let deep = masking_network(2, &[0, 1], 3).unwrap();
        assert!(matches!(
            concat(&shallow, &deep),
            Err(Error::Composition(_))
        ));
    }

    #[test]
    fn pad_depth_examples() {
        let id = ReluNetwork::identity(2);
        assert_eq!(pad_depth(&id, 0).unwrap(), id);
        let p = pad_depth(&id, 4).unwrap();
        assert_eq!(p.depth(), 4);
        assert_eq!(p.evaluate(&[-0.5, 2.0]).unwrap(), vec![-0.5, 2.0]);
        assert!(pad_depth(&p, 2).is_err());
    }

    #[test]
    fn clamp_examples() {
        let half = ReluNetwork::constant(2, 0.5);
        let c = clamp_output(&half, 1.0).unwrap();
        assert_eq!(c.evaluate(&[0.1, 0.9]).unwrap(), vec![0.5]);
        let three = ReluNetwork::constant(2, 3.0);
        assert_eq!(
            clamp_output(&three, 1.0)
                .unwrap()
                .evaluate(&[0.0, 0.0])
                .unwrap(),
            vec![1.0]
        );
        let neg = ReluNetwork::constant(2, -3.0);
        assert_eq!(
            clamp_output(&neg, 1.0)
                .unwrap()
                .evaluate(&[0.0, 0.0])
                .unwrap(),
            vec![-1.0]
        );
        assert_eq!(c.depth(), 2);
        assert!(clamp_output(&half, 0.0).is_err());
        assert!(clamp_output(&ReluNetwork::identity(2), 1.0).is_err());
    }

    #[test]
    fn budget_check() {
        let n = masking_network(2, &[0, 1], 3).unwrap();
        let s = n.stats(3);
        let ok = ArchBudget {
            max_depth: 2,
            max_width: 4,
            max_nnz: 12,
            max_abs: 1.0,
            max_sup: 1.0,
        };
        assert!(ok.admits(&s));
        let tight = ArchBudget { max_nnz: 11, ..ok };
        assert_eq!(tight.violations(&s), vec![BudgetViolation::Nonzeros]);
    }

    #[test]
    fn json_round_trip_is_bit_exact() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let n = random_network(&mut rng, &[3, 5, 1], 0.8, 1e3).unwrap();
        let back = ReluNetwork::from_json(&n.to_json().unwrap()).unwrap();
        assert_eq!(back, n);
    }
}
