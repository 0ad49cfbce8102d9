//! Synthetic binary classification tasks with oracle conditional class
//! probability, Bayes classifier, distance to the decision boundary and
//! Monte Carlo risk functionals.
//!
//! All tasks live on `[0,1]^d`. Monte Carlo estimates are split into a fixed
//! number of batches, each drawn from its own ChaCha stream, so results are
//! bit-identical whatever the number of worker threads.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::data::Dataset;
use crate::error::{input, Error, Result};
use crate::net::{ReluNetwork, Scratch};
use crate::poly::Polynomial;
use crate::theory::Extended;

/// Number of independent batches behind every Monte Carlo standard error.
pub const MC_BATCHES: usize = 20;
/// Smallest Monte Carlo sample accepted by the risk estimators.
pub const MIN_MC_SAMPLES: usize = 10_000;
const RESTARTS: usize = 10;
const DISTANCE_TOL: f64 = 1e-10;
const MIN_ACCEPTANCE: f64 = 0.01;

/// Classifier sign with ties sent to −1.
pub fn sign(v: f64) -> f64 {
    if v > 0.0 {
        1.0
    } else {
        -1.0
    }
}

/// Noise profile `½ + ½·sign(Δ)·min(1, |Δ|/w)^{1/q}`; `q = ∞` gives `η ∈ {0, ½, 1}`.
pub fn profile_eta(delta: f64, q: Extended, width: f64) -> f64 {
    if delta == 0.0 {
        return 0.5;
    }
    let s = delta.signum();
    let mag = match q {
        Extended::Infinity => 1.0,
        Extended::Finite(q) => (delta.abs() / width).min(1.0).powf(1.0 / q),
    };
    0.5 + 0.5 * s * mag
}

/// Estimate with a Monte Carlo standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub mean: f64,
    pub se: f64,
}

impl Estimate {
    fn from_batches(means: &[f64]) -> Self {
        let b = means.len() as f64;
        let mean = means.iter().sum::<f64>() / b;
        let var = if means.len() > 1 {
            means.iter().map(|m| (m - mean).powi(2)).sum::<f64>() / (b - 1.0)
        } else {
            0.0
        };
        Self {
            mean,
            se: (var / b).sqrt(),
        }
    }
}

/// Which expression the hinge excess risk was computed from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HingeForm {
    /// `E|f − C*|·|2η − 1|`, valid when `‖f‖∞ ≤ 1`.
    Closed,
    /// `E[ηφ(f) + (1−η)φ(−f)] − E[ηφ(C*) + (1−η)φ(−C*)]`.
    Direct,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RiskReport {
    pub excess_01: Estimate,
    pub excess_hinge: Estimate,
    pub hinge_form: HingeForm,
    pub n_mc: usize,
}

/// Result of an empirical tail-exponent fit.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExponentEstimate {
    Slope {
        slope: f64,
        stderr: f64,
    },
    /// The law puts no mass within this distance of the boundary.
    NoMassBelow(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TailStatistic {
    /// `P(|2η(X) − 1| ≤ t)`.
    NoiseQ,
    /// `P(dist(X, boundary) ≤ t)`.
    MarginGamma,
}

/// Boundary `{x₁ = g(x₂, …, x_d)}` with precomputed derivative data.
#[derive(Debug, Clone)]
struct Graph {
    g: Polynomial,
    grad: Vec<Polynomial>,
    lipschitz: f64,
    /// `Some((c, a))` when `g(u) = c + a·u`.
    affine: Option<(f64, Vec<f64>)>,
    starts: Vec<Vec<f64>>,
}

impl Graph {
    fn new(g: Polynomial) -> Self {
        let grad = g.gradient();
        let lipschitz = grad
            .iter()
            .map(|p| p.sup_bound().powi(2))
            .sum::<f64>()
            .sqrt();
        let affine = (g.degree() <= 1).then(|| {
            let mut c = 0.0;
            let mut a = vec![0.0; g.vars];
            for t in &g.terms {
                match t.powers.iter().position(|&p| p == 1) {
                    Some(i) => a[i] += t.coef,
                    None => c += t.coef,
                }
            }
            (c, a)
        });
        Self {
            starts: restart_points(g.vars),
            g,
            grad,
            lipschitz,
            affine,
        }
    }

    fn delta(&self, x: &[f64]) -> f64 {
        x[0] - self.g.eval(&x[1..])
    }

    /// `min(dist(x, graph), cap)`.
    fn distance(&self, x: &[f64], cap: f64) -> f64 {
        let x1 = x[0];
        let v = &x[1..];
        let delta = x1 - self.g.eval(v);
        if delta.abs() / (1.0 + self.lipschitz * self.lipschitz).sqrt() >= cap {
            return cap;
        }
        if let Some((_, a)) = &self.affine {
            let norm2: f64 = a.iter().map(|s| s * s).sum();
            let r = delta / (1.0 + norm2);
            if v.iter()
                .zip(a)
                .all(|(vi, ai)| (0.0..=1.0).contains(&(vi + r * ai)))
            {
                return (delta.abs() / (1.0 + norm2).sqrt()).min(cap);
            }
        }
        if v.len() == 1 {
            return self.distance_on_segment(x1, v[0]).min(cap);
        }
        let objective = |u: &[f64]| {
            let r = x1 - self.g.eval(u);
            r * r + u.iter().zip(v).map(|(a, b)| (a - b).powi(2)).sum::<f64>()
        };
        let gradient = |u: &[f64], out: &mut [f64]| {
            let r = x1 - self.g.eval(u);
            for (i, o) in out.iter_mut().enumerate() {
                *o = -2.0 * r * self.grad[i].eval(u) + 2.0 * (u[i] - v[i]);
            }
        };
        let mut best = objective(v);
        for start in std::iter::once(v).chain(self.starts.iter().map(Vec::as_slice)) {
            best = best.min(projected_descent(start, &objective, &gradient));
        }
        best.sqrt().min(cap)
    }
}

impl Graph {
    /// Exact distance for a one-variable boundary: every grid-local minimum of
    /// the squared distance along the curve is polished by golden-section search.
    fn distance_on_segment(&self, x1: f64, v: f64) -> f64 {
        const CELLS: usize = 64;
        let h = |u: f64| {
            let r = x1 - self.g.eval(&[u]);
            r * r + (u - v) * (u - v)
        };
        let values: Vec<f64> = (0..=CELLS).map(|i| h(i as f64 / CELLS as f64)).collect();
        let mut best = values.iter().copied().fold(f64::INFINITY, f64::min);
        for i in 0..=CELLS {
            let left = if i == 0 { f64::INFINITY } else { values[i - 1] };
            let right = if i == CELLS {
                f64::INFINITY
            } else {
                values[i + 1]
            };
            if values[i] > left || values[i] > right {
                continue;
            }
            let mut a = i.saturating_sub(1) as f64 / CELLS as f64;
            let mut b = (i + 1).min(CELLS) as f64 / CELLS as f64;
            let ratio = (5f64.sqrt() - 1.0) / 2.0;
            let mut c = b - ratio * (b - a);
            let mut e = a + ratio * (b - a);
            let (mut hc, mut he) = (h(c), h(e));
            while b - a > 1e-12 {
                if hc < he {
                    b = e;
                    e = c;
                    he = hc;
                    c = b - ratio * (b - a);
                    hc = h(c);
                } else {
                    a = c;
                    c = e;
                    hc = he;
                    e = a + ratio * (b - a);
                    he = h(e);
                }
            }
            best = best.min(hc).min(he);
        }
        best.max(0.0).sqrt()
    }
}

fn restart_points(k: usize) -> Vec<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(0x005e_edb0);
    (0..RESTARTS)
        .map(|_| (0..k).map(|_| rng.gen()).collect())
        .collect()
}

/// Projected gradient descent on the unit box with Armijo backtracking.
fn projected_descent(
    start: &[f64],
    objective: &impl Fn(&[f64]) -> f64,
    gradient: &impl Fn(&[f64], &mut [f64]),
) -> f64 {
    let k = start.len();
    let mut u = start.to_vec();
    let mut h = objective(&u);
    let mut g = vec![0.0; k];
    let mut trial = vec![0.0; k];
    let mut step = 0.5;
    for _ in 0..500 {
        gradient(&u, &mut g);
        let mut moved = 0.0;
        loop {
            for i in 0..k {
                trial[i] = (u[i] - step * g[i]).clamp(0.0, 1.0);
            }
            let dist2: f64 = trial.iter().zip(&u).map(|(a, b)| (a - b).powi(2)).sum();
            let ht = objective(&trial);
            if ht <= h - 1e-4 / step * dist2 || dist2 == 0.0 {
                moved = dist2.sqrt();
                if ht < h {
                    u.copy_from_slice(&trial);
                    h = ht;
                }
                break;
            }
            step *= 0.5;
            if step < 1e-14 {
                break;
            }
        }
        if moved < DISTANCE_TOL || step < 1e-14 {
            break;
        }
        step = (step * 2.0).min(1.0);
    }
    h
}

/// Level set `{η = ½}` of a polynomial conditional probability.
#[derive(Debug, Clone)]
struct LevelSet {
    eta: Polynomial,
    grad: Vec<Polynomial>,
    lipschitz: f64,
    starts: Vec<Vec<f64>>,
}

impl LevelSet {
    fn new(eta: Polynomial) -> Self {
        let grad = eta.gradient();
        let lipschitz = grad
            .iter()
            .map(|p| p.sup_bound().powi(2))
            .sum::<f64>()
            .sqrt();
        Self {
            starts: restart_points(eta.vars),
            eta,
            grad,
            lipschitz,
        }
    }

    fn distance(&self, x: &[f64], cap: f64) -> f64 {
        let gap = self.eta.eval(x) - 0.5;
        if self.lipschitz == 0.0 || gap.abs() / self.lipschitz >= cap {
            return cap;
        }
        let mut best = f64::INFINITY;
        for start in std::iter::once(x).chain(self.starts.iter().map(Vec::as_slice)) {
            if let Some(z) = self.project(x, start) {
                let d = z
                    .iter()
                    .zip(x)
                    .map(|(a, b)| (a - b).powi(2))
                    .sum::<f64>()
                    .sqrt();
                best = best.min(d);
            }
        }
        best.min(cap)
    }

    fn gradient(&self, z: &[f64]) -> Vec<f64> {
        self.grad.iter().map(|p| p.eval(z)).collect()
    }

    /// Newton steps onto the level set.
    fn onto(&self, z: &mut [f64]) -> bool {
        for _ in 0..100 {
            let r = self.eta.eval(z) - 0.5;
            if r.abs() < 1e-13 {
                return true;
            }
            let g = self.gradient(z);
            let n2: f64 = g.iter().map(|v| v * v).sum();
            if n2 < 1e-24 {
                return false;
            }
            for (zi, gi) in z.iter_mut().zip(&g) {
                *zi = (*zi - r * gi / n2).clamp(0.0, 1.0);
            }
        }
        (self.eta.eval(z) - 0.5).abs() < 1e-10
    }

    /// Alternates tangent steps toward `x` with Newton re-projection.
    fn project(&self, x: &[f64], start: &[f64]) -> Option<Vec<f64>> {
        let mut z = start.to_vec();
        if !self.onto(&mut z) {
            return None;
        }
        for _ in 0..200 {
            let g = self.gradient(&z);
            let norm = g.iter().map(|v| v * v).sum::<f64>().sqrt();
            if norm == 0.0 {
                break;
            }
            let diff: Vec<f64> = x.iter().zip(&z).map(|(a, b)| a - b).collect();
            let along: f64 = diff.iter().zip(&g).map(|(a, b)| a * b).sum::<f64>() / norm;
            let step: Vec<f64> = diff
                .iter()
                .zip(&g)
                .map(|(a, b)| a - along * b / norm)
                .collect();
            let len = step.iter().map(|v| v * v).sum::<f64>().sqrt();
            let prev = z.clone();
            for (zi, si) in z.iter_mut().zip(&step) {
                *zi = (*zi + si).clamp(0.0, 1.0);
            }
            if !self.onto(&mut z) {
                return Some(prev);
            }
            if len < DISTANCE_TOL {
                break;
            }
        }
        Some(z)
    }
}

#[derive(Debug, Clone)]
enum Kind {
    SmoothBoundary {
        graph: Graph,
        q: Extended,
        width: f64,
    },
    SmoothEta {
        level: LevelSet,
    },
    Margin {
        graph: Graph,
        gamma: Extended,
        eps0: f64,
        noise: Option<(Extended, f64)>,
    },
    ExtremeEta {
        logit: f64,
        band: f64,
    },
}

/// Declarative description of a task, as found in configuration files.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TaskSpec {
    SmoothBoundary {
        d: usize,
        alpha: f64,
        q: Extended,
        boundary: Polynomial,
        noise_width: f64,
    },
    SmoothEta {
        beta: f64,
        eta: Polynomial,
    },
    Margin {
        d: usize,
        alpha: f64,
        gamma: Extended,
        boundary: Polynomial,
        eps0: f64,
        #[serde(default)]
        noise_q: Option<Extended>,
        #[serde(default)]
        noise_width: Option<f64>,
    },
    ExtremeEta {
        d: usize,
        logit: f64,
        lambda: f64,
    },
}

impl TaskSpec {
    pub fn build(&self) -> Result<SyntheticTask> {
        match self {
            TaskSpec::SmoothBoundary {
                d,
                alpha,
                q,
                boundary,
                noise_width,
            } => make_smooth_boundary_task(*d, *alpha, *q, boundary.clone(), *noise_width),
            TaskSpec::SmoothEta { beta, eta } => make_smooth_eta_task(*beta, eta.clone()),
            TaskSpec::Margin {
                d,
                alpha,
                gamma,
                boundary,
                eps0,
                noise_q,
                noise_width,
            } => {
                let noise = match (noise_q, noise_width) {
                    (Some(q), Some(w)) => Some((*q, *w)),
                    (None, None) => None,
                    _ => return input("margin label noise needs both noise_q and noise_width"),
                };
                make_margin_task(*d, *alpha, *gamma, boundary.clone(), *eps0, noise)
            }
            TaskSpec::ExtremeEta { d, logit, lambda } => make_extreme_eta_task(*d, *logit, *lambda),
        }
    }
}

/// A synthetic distribution of `(X, Y)` on `[0,1]^d × {−1, +1}`.
#[derive(Debug, Clone)]
pub struct SyntheticTask {
    dim: usize,
    kind: Kind,
    pub nominal_q: Option<Extended>,
    pub nominal_gamma: Option<Extended>,
    pub nominal_smoothness: f64,
    /// Bayes risk from deterministic quadrature or a closed form.
    pub bayes_risk: f64,
    /// Fraction of uniform proposals kept by the sampler.
    pub acceptance_rate: f64,
    /// `P(|logit η| > F̃)` for the extreme-probability task.
    pub extreme_mass: Option<f64>,
}

fn check_q(q: Extended) -> Result<()> {
    match q {
        Extended::Finite(v) if !(v > 0.0 && v.is_finite()) => {
            input(format!("noise exponent must lie in (0, ∞], got {v}"))
        }
        _ => Ok(()),
    }
}

fn check_boundary(d: usize, boundary: &Polynomial) -> Result<()> {
    if d < 2 {
        return input("tasks need d ≥ 2");
    }
    if boundary.vars != d - 1 {
        return input(format!(
            "boundary must have {} variables, has {}",
            d - 1,
            boundary.vars
        ));
    }
    Ok(())
}

pub fn make_smooth_boundary_task(
    d: usize,
    alpha: f64,
    q: Extended,
    boundary: Polynomial,
    noise_width: f64,
) -> Result<SyntheticTask> {
    check_boundary(d, &boundary)?;
    check_q(q)?;
    if !(noise_width > 0.0) {
        return input(format!("noise width must be positive, got {noise_width}"));
    }
    let graph = Graph::new(boundary);
    let risk = profile_bayes_risk(&graph, q, noise_width);
    Ok(SyntheticTask {
        dim: d,
        kind: Kind::SmoothBoundary {
            graph,
            q,
            width: noise_width,
        },
        nominal_q: Some(q),
        nominal_gamma: None,
        nominal_smoothness: alpha,
        bayes_risk: risk,
        acceptance_rate: 1.0,
        extreme_mass: None,
    })
}

/// `∫₀ᵗ min(η, 1−η) dΔ` for the noise profile, `t ≥ 0`.
fn profile_integral(t: f64, q: Extended, w: f64) -> f64 {
    match q {
        Extended::Infinity => 0.0,
        Extended::Finite(q) => {
            let p = 1.0 / q;
            let s = t.min(w);
            0.5 * s - 0.5 * s.powf(p + 1.0) / (w.powf(p) * (p + 1.0))
        }
    }
}

fn profile_bayes_risk(graph: &Graph, q: Extended, w: f64) -> f64 {
    cube_average(graph.g.vars, |u| {
        let a = graph.g.eval(u).clamp(0.0, 1.0);
        profile_integral(a, q, w) + profile_integral(1.0 - a, q, w)
    })
}

/// Midpoint-rule average over `[0,1]^k` (seeded MC beyond three dimensions).
fn cube_average(k: usize, f: impl Fn(&[f64]) -> f64 + Sync) -> f64 {
    cube_pair_average(k, |x| (f(x), 0.0)).0
}

/// Two integrands averaged in one pass over the same points.
fn cube_pair_average(k: usize, f: impl Fn(&[f64]) -> (f64, f64) + Sync) -> (f64, f64) {
    let per_axis: usize = match k {
        1 => 20_000,
        2 => 1000,
        3 => 100,
        _ => 0,
    };
    if per_axis == 0 {
        let n = 1 << 20;
        let mut rng = ChaCha8Rng::seed_from_u64(0x9ad);
        let mut u = vec![0.0; k];
        let (mut ta, mut tb) = (0.0, 0.0);
        for _ in 0..n {
            u.iter_mut().for_each(|v| *v = rng.gen());
            let (a, b) = f(&u);
            ta += a;
            tb += b;
        }
        return (ta / n as f64, tb / n as f64);
    }
    let cells = per_axis.pow(k as u32);
    let values: Vec<(f64, f64)> = (0..cells)
        .into_par_iter()
        .with_min_len(4096)
        .map(|idx| {
            let mut rem = idx;
            let u: Vec<f64> = (0..k)
                .map(|_| {
                    let v = ((rem % per_axis) as f64 + 0.5) / per_axis as f64;
                    rem /= per_axis;
                    v
                })
                .collect();
            f(&u)
        })
        .collect();
    let ta: f64 = values.iter().map(|v| v.0).sum();
    let tb: f64 = values.iter().map(|v| v.1).sum();
    (ta / cells as f64, tb / cells as f64)
}

pub fn make_smooth_eta_task(beta: f64, eta: Polynomial) -> Result<SyntheticTask> {
    let d = eta.vars;
    if d < 2 {
        return input("tasks need d ≥ 2");
    }
    let per_axis: usize = match d {
        2 => 101,
        3 => 31,
        _ => 9,
    };
    let total = per_axis.pow(d as u32);
    let mut u = vec![0.0; d];
    for idx in 0..total {
        let mut rem = idx;
        for v in u.iter_mut() {
            *v = (rem % per_axis) as f64 / (per_axis - 1) as f64;
            rem /= per_axis;
        }
        let e = eta.eval(&u);
        if !(-1e-12..=1.0 + 1e-12).contains(&e) {
            return input(format!("η = {e} at {u:?} lies outside [0, 1]"));
        }
    }
    let risk = cube_average(d, |x| {
        let e = eta.eval(x).clamp(0.0, 1.0);
        e.min(1.0 - e)
    });
    let mut task = SyntheticTask {
        dim: d,
        kind: Kind::SmoothEta {
            level: LevelSet::new(eta),
        },
        nominal_q: None,
        nominal_gamma: None,
        nominal_smoothness: beta,
        bayes_risk: risk,
        acceptance_rate: 1.0,
        extreme_mass: None,
    };
    let grid: Vec<f64> = (0..6).map(|i| 0.02 * 10f64.powf(i as f64 / 5.0)).collect();
    task.nominal_q = match estimate_exponent(&task, TailStatistic::NoiseQ, &grid, 200_000, 0x9) {
        Ok(ExponentEstimate::Slope { slope, .. }) => Some(Extended::Finite(slope)),
        _ => None,
    };
    Ok(task)
}

pub fn make_margin_task(
    d: usize,
    alpha: f64,
    gamma: Extended,
    boundary: Polynomial,
    eps0: f64,
    noise: Option<(Extended, f64)>,
) -> Result<SyntheticTask> {
    check_boundary(d, &boundary)?;
    if let Extended::Finite(g) = gamma {
        if !(g >= 1.0 && g.is_finite()) {
            return input(format!("margin exponent must lie in [1, ∞], got {g}"));
        }
    }
    if !(eps0 > 0.0 && eps0 < 0.5) {
        return input(format!("ε₀ must lie in (0, 0.5), got {eps0}"));
    }
    if let Some((q, w)) = noise {
        check_q(q)?;
        if !(w > 0.0) {
            return input("noise width must be positive");
        }
    }
    let mut task = SyntheticTask {
        dim: d,
        kind: Kind::Margin {
            graph: Graph::new(boundary),
            gamma,
            eps0,
            noise,
        },
        nominal_q: Some(noise.map_or(Extended::Infinity, |(q, _)| q)),
        nominal_gamma: Some(gamma),
        nominal_smoothness: alpha,
        bayes_risk: 0.0,
        acceptance_rate: 1.0,
        extreme_mass: None,
    };
    let pilot = 10_000;
    let mut rng = ChaCha8Rng::seed_from_u64(0x1107);
    let mut x = vec![0.0; d];
    let mut kept = 0.0;
    for _ in 0..pilot {
        x.iter_mut().for_each(|v| *v = rng.gen());
        kept += task.acceptance(&x);
    }
    task.acceptance_rate = kept / pilot as f64;
    if task.acceptance_rate < MIN_ACCEPTANCE {
        return Err(Error::Config(format!(
            "rejection sampler keeps only {:.3}% of proposals",
            100.0 * task.acceptance_rate
        )));
    }
    if noise.is_some() {
        let (num, den) = cube_pair_average(d, |x| {
            let a = task.acceptance(x);
            let e = task.eta(x);
            (a * e.min(1.0 - e), a)
        });
        task.bayes_risk = num / den;
    }
    Ok(task)
}

/// Logistic function.
pub fn logistic(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// Relative nudge that keeps `|logit η|` strictly above the requested level.
const LOGIT_NUDGE: f64 = 1e-9;

pub fn make_extreme_eta_task(d: usize, logit: f64, lambda: f64) -> Result<SyntheticTask> {
    if d < 2 {
        return input("tasks need d ≥ 2");
    }
    if !(logit > 0.0 && logit.is_finite()) {
        return input(format!("logit level must be positive, got {logit}"));
    }
    if !(0.0..1.0).contains(&lambda) {
        return input(format!("λ must lie in [0, 1), got {lambda}"));
    }
    let lifted = logit + LOGIT_NUDGE * logit.max(1.0);
    let s = logistic(lifted);
    let risk = (1.0 - lambda) * (1.0 - s) + lambda * (0.5 - (s - 0.5) / 2.0);
    Ok(SyntheticTask {
        dim: d,
        kind: Kind::ExtremeEta {
            logit: lifted,
            band: lambda,
        },
        nominal_q: None,
        nominal_gamma: None,
        nominal_smoothness: f64::INFINITY,
        bayes_risk: risk,
        acceptance_rate: 1.0,
        extreme_mass: Some(1.0 - lambda),
    })
}

impl SyntheticTask {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn eta(&self, x: &[f64]) -> f64 {
        match &self.kind {
            Kind::SmoothBoundary { graph, q, width } => profile_eta(graph.delta(x), *q, *width),
            Kind::SmoothEta { level } => level.eta.eval(x).clamp(0.0, 1.0),
            Kind::Margin { graph, noise, .. } => {
                let (q, w) = noise.unwrap_or((Extended::Infinity, 1.0));
                profile_eta(graph.delta(x), q, w)
            }
            Kind::ExtremeEta { logit, band } => {
                let s = logistic(*logit);
                let t = x[0] - 0.5;
                if t.abs() < band / 2.0 {
                    0.5 + (s - 0.5) * t / (band / 2.0)
                } else if t > 0.0 {
                    s
                } else {
                    1.0 - s
                }
            }
        }
    }

    /// `sign(2η − 1)` with ties at −1.
    pub fn bayes(&self, x: &[f64]) -> f64 {
        sign(2.0 * self.eta(x) - 1.0)
    }

    /// Euclidean distance from `x` to the decision boundary `{η = ½}`.
    pub fn boundary_distance(&self, x: &[f64]) -> f64 {
        self.boundary_distance_capped(x, f64::INFINITY)
    }

    /// `min(dist, cap)`; cheaper when only small distances matter.
    pub fn boundary_distance_capped(&self, x: &[f64], cap: f64) -> f64 {
        match &self.kind {
            Kind::SmoothBoundary { graph, .. } | Kind::Margin { graph, .. } => {
                graph.distance(x, cap)
            }
            Kind::SmoothEta { level } => level.distance(x, cap),
            Kind::ExtremeEta { .. } => (x[0] - 0.5).abs().min(cap),
        }
    }

    fn acceptance(&self, x: &[f64]) -> f64 {
        match &self.kind {
            Kind::Margin {
                graph, gamma, eps0, ..
            } => match gamma {
                Extended::Finite(g) if *g == 1.0 => 1.0,
                Extended::Finite(g) => (graph.distance(x, *eps0) / eps0).powf(g - 1.0),
                Extended::Infinity => {
                    if graph.distance(x, 2.0 * eps0) > *eps0 {
                        1.0
                    } else {
                        0.0
                    }
                }
            },
            _ => 1.0,
        }
    }

    /// Draws one input from the marginal law.
    pub fn draw_x<R: Rng>(&self, rng: &mut R, x: &mut [f64]) {
        loop {
            x.iter_mut().for_each(|v| *v = rng.gen());
            let a = self.acceptance(x);
            if a >= 1.0 || rng.gen::<f64>() < a {
                return;
            }
        }
    }

    /// `n` labelled samples; deterministic in `seed`.
    pub fn sample(&self, seed: u64, n: usize) -> Dataset {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut data = Dataset::empty(self.dim);
        let mut x = vec![0.0; self.dim];
        for _ in 0..n {
            self.draw_x(&mut rng, &mut x);
            let y = if rng.gen::<f64>() < self.eta(&x) {
                1.0
            } else {
                -1.0
            };
            data.push(&x, y);
        }
        data
    }

    /// `n` samples drawn from the law conditioned on the label.
    pub fn sample_class(&self, seed: u64, n: usize, label: f64) -> Dataset {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut data = Dataset::empty(self.dim);
        let mut x = vec![0.0; self.dim];
        while data.len() < n {
            self.draw_x(&mut rng, &mut x);
            let y = if rng.gen::<f64>() < self.eta(&x) {
                1.0
            } else {
                -1.0
            };
            if y == label {
                data.push(&x, y);
            }
        }
        data
    }

    /// `(dist, cap)`-aware statistic for tail fits.
    fn tail_statistic(&self, which: TailStatistic, x: &[f64], cap: f64) -> f64 {
        match which {
            TailStatistic::NoiseQ => (2.0 * self.eta(x) - 1.0).abs(),
            TailStatistic::MarginGamma => self.boundary_distance_capped(x, cap),
        }
    }
}

/// Per-batch sums of `K` statistics over `n` draws from the marginal law.
/// Batch `b` uses stream `b` of the generator seeded with `seed`.
pub fn batch_means<const K: usize, F>(
    task: &SyntheticTask,
    n: usize,
    seed: u64,
    f: F,
) -> Vec<[f64; K]>
where
    F: Fn(&[f64], &mut ChaCha8Rng, &mut Scratch) -> [f64; K] + Sync,
{
    let base = n / MC_BATCHES;
    let extra = n % MC_BATCHES;
    (0..MC_BATCHES)
        .into_par_iter()
        .map(|b| {
            let count = base + usize::from(b < extra);
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(b as u64);
            let mut scratch = Scratch::default();
            let mut x = vec![0.0; task.dim];
            let mut sums = [0.0; K];
            for _ in 0..count {
                task.draw_x(&mut rng, &mut x);
                let v = f(&x, &mut rng, &mut scratch);
                for (s, vi) in sums.iter_mut().zip(v) {
                    *s += vi;
                }
            }
            sums.map(|s| if count > 0 { s / count as f64 } else { 0.0 })
        })
        .collect()
}

/// Monte Carlo mean of `f(X)` with a batch standard error.
pub fn monte_carlo<F>(task: &SyntheticTask, n: usize, seed: u64, f: F) -> Estimate
where
    F: Fn(&[f64], &mut ChaCha8Rng) -> f64 + Sync,
{
    let means = batch_means::<1, _>(task, n, seed, |x, rng, _| [f(x, rng)]);
    Estimate::from_batches(&means.iter().map(|m| m[0]).collect::<Vec<_>>())
}

fn hinge(z: f64) -> f64 {
    (1.0 - z).max(0.0)
}

pub fn excess_risk(
    task: &SyntheticTask,
    net: &ReluNetwork,
    n_mc: usize,
    seed: u64,
) -> Result<RiskReport> {
    if n_mc < MIN_MC_SAMPLES {
        return input(format!("n_mc must be ≥ {MIN_MC_SAMPLES}, got {n_mc}"));
    }
    if net.input_dim() != task.dim || net.output_dim() != 1 {
        return Err(Error::Composition(format!(
            "network maps {} → {} but the task needs {} → 1",
            net.input_dim(),
            net.output_dim(),
            task.dim
        )));
    }
    // per-sample statistics: 0-1 excess, closed hinge form, direct hinge form, 1(|f| > 1)
    let means = batch_means::<4, _>(task, n_mc, seed, |x, _, scratch| {
        let f = net.forward_scalar(x, scratch);
        let eta = task.eta(x);
        let b = sign(2.0 * eta - 1.0);
        let w = (2.0 * eta - 1.0).abs();
        let e01 = if sign(f) != b { w } else { 0.0 };
        let closed = (f - b).abs() * w;
        let direct =
            eta * hinge(f) + (1.0 - eta) * hinge(-f) - (eta * hinge(b) + (1.0 - eta) * hinge(-b));
        let outside = if f.abs() > 1.0 + 1e-12 { 1.0 } else { 0.0 };
        [e01, closed, direct, outside]
    });
    let column = |k: usize| Estimate::from_batches(&means.iter().map(|m| m[k]).collect::<Vec<_>>());
    let bounded = means.iter().all(|m| m[3] == 0.0);
    let (excess_hinge, hinge_form) = if bounded {
        (column(1), HingeForm::Closed)
    } else {
        (column(2), HingeForm::Direct)
    };
    Ok(RiskReport {
        excess_01: column(0),
        excess_hinge,
        hinge_form,
        n_mc,
    })
}

/// Least-squares slope of `log P(stat ≤ t)` against `log t` over the grid.
pub fn estimate_exponent(
    task: &SyntheticTask,
    which: TailStatistic,
    grid: &[f64],
    n_mc: usize,
    seed: u64,
) -> Result<ExponentEstimate> {
    if grid.len() < 5 || grid.iter().any(|&t| !(t > 0.0)) {
        return Err(Error::Estimation(
            "need at least 5 positive thresholds".into(),
        ));
    }
    if which == TailStatistic::MarginGamma {
        if let Kind::Margin {
            gamma: Extended::Infinity,
            eps0,
            ..
        } = task.kind
        {
            return Ok(ExponentEstimate::NoMassBelow(eps0));
        }
    }
    let mut grid: Vec<f64> = grid.to_vec();
    grid.sort_by(f64::total_cmp);
    for attempt in 0..2 {
        let cap = grid[grid.len() - 1] * 2.0;
        let stats: Vec<Vec<f64>> = (0..MC_BATCHES)
            .into_par_iter()
            .map(|b| {
                let count = n_mc / MC_BATCHES + usize::from(b < n_mc % MC_BATCHES);
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                rng.set_stream(b as u64);
                let mut x = vec![0.0; task.dim];
                (0..count)
                    .map(|_| {
                        task.draw_x(&mut rng, &mut x);
                        task.tail_statistic(which, &x, cap)
                    })
                    .collect()
            })
            .collect();
        let counts: Vec<usize> = grid
            .iter()
            .map(|&t| stats.iter().flatten().filter(|&&s| s <= t).count())
            .collect();
        if counts.iter().all(|&c| c > 0) {
            let total = n_mc as f64;
            let xs: Vec<f64> = grid.iter().map(|t| t.ln()).collect();
            let ys: Vec<f64> = counts.iter().map(|&c| (c as f64 / total).ln()).collect();
            let (slope, stderr) = least_squares_slope(&xs, &ys);
            return Ok(ExponentEstimate::Slope { slope, stderr });
        }
        if attempt == 0 {
            grid.iter_mut().for_each(|t| *t *= 10.0);
        }
    }
    Err(Error::Estimation(
        "empty tail cells even after widening the threshold grid".into(),
    ))
}

/// Ordinary least-squares slope and its standard error.
pub fn least_squares_slope(xs: &[f64], ys: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let resid: f64 = xs
        .iter()
        .zip(ys)
        .map(|(x, y)| (y - my - slope * (x - mx)).powi(2))
        .sum();
    let stderr = if xs.len() > 2 {
        (resid / (n - 2.0) / sxx).sqrt()
    } else {
        0.0
    };
    (slope, stderr)
}

/// Weak-`L_q` quantity `sup_{t>0} P(|2η − 1| ≤ t)/t^q` of the inverse noise
/// level for the noise-profile task, by quadrature over a threshold grid.
pub fn profile_weak_norm(task: &SyntheticTask) -> Option<f64> {
    let Kind::SmoothBoundary {
        graph,
        q: Extended::Finite(q),
        width,
    } = &task.kind
    else {
        return None;
    };
    // |2η − 1| ≤ t  ⟺  |Δ| ≤ w·t^q (for t < 1); mass of the Δ-band by quadrature
    let band_mass = |h: f64| {
        cube_average(graph.g.vars, |u| {
            let a = graph.g.eval(u).clamp(0.0, 1.0);
            (a + h).min(1.0) - (a - h).max(0.0)
        })
    };
    let sup = (1..=40)
        .map(|i| {
            let t = i as f64 / 40.0;
            let h = if t < 1.0 { width * t.powf(*q) } else { 1.0 };
            band_mass(h) / t.powf(*q)
        })
        .fold(0.0_f64, f64::max);
    Some(sup.max(1.0))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn flat(c: f64) -> Polynomial {
        Polynomial::constant(1, c)
    }

    #[test]
    fn profile_examples() {
        assert_eq!(profile_eta(0.0, Extended::Finite(1.0), 0.2), 0.5);
        assert!((profile_eta(0.1, Extended::Finite(1.0), 0.2) - 0.75).abs() < 1e-15);
        assert_eq!(profile_eta(-0.3, Extended::Infinity, 0.2), 0.0);
        assert!(make_smooth_boundary_task(2, 1.0, Extended::Finite(1.0), flat(0.5), 0.0).is_err());
        assert!(make_smooth_boundary_task(2, 1.0, Extended::Finite(0.0), flat(0.5), 0.2).is_err());
    }

    #[test]
    fn smooth_eta_examples() {
        let t = make_smooth_eta_task(1.0, Polynomial::constant(2, 0.5)).unwrap();
        assert!((t.bayes_risk - 0.5).abs() < 1e-12);
        let t = make_smooth_eta_task(1.0, Polynomial::affine(0.0, &[1.0, 0.0])).unwrap();
        assert!((t.bayes_risk - 0.25).abs() < 1e-9);
        assert_eq!(t.bayes(&[0.7, 0.1]), 1.0);
        assert_eq!(t.bayes(&[0.3, 0.9]), -1.0);
        assert!((t.boundary_distance(&[0.8, 0.4]) - 0.3).abs() < 1e-9);
        assert!(make_smooth_eta_task(1.0, Polynomial::affine(0.2, &[1.0, 0.0])).is_err());
    }

    #[test]
    fn graph_distance_matches_geometry() {
        let t = make_smooth_boundary_task(
            2,
            1.0,
            Extended::Finite(1.0),
            Polynomial::affine(0.25, &[0.5]),
            0.2,
        )
        .unwrap();
        // distance from (0.75, 0.5) to the line x₁ = 0.25 + 0.5 x₂: |0.75 − 0.5|/√1.25
        let d = t.boundary_distance(&[0.75, 0.5]);
        assert!((d - 0.25 / 1.25f64.sqrt()).abs() < 1e-12);
        let q = make_smooth_boundary_task(
            2,
            2.0,
            Extended::Finite(1.0),
            Polynomial::from_terms(1, &[(0.4, &[0]), (0.5, &[2])]).unwrap(),
            0.2,
        )
        .unwrap();
        // brute-force oracle on a fine parametrisation of the curve
        let x = [0.2, 0.9];
        let brute = (0..=200_000)
            .map(|i| {
                let u = i as f64 / 200_000.0;
                ((x[0] - 0.4 - 0.5 * u * u).powi(2) + (x[1] - u).powi(2)).sqrt()
            })
            .fold(f64::INFINITY, f64::min);
        assert!((q.boundary_distance(&x) - brute).abs() < 1e-8);
    }

    #[test]
    fn extreme_examples() {
        let t = make_extreme_eta_task(2, 99f64.ln(), 0.0).unwrap();
        let e = t.eta(&[0.9, 0.5]);
        assert!((e - 0.99).abs() < 1e-9);
        assert!((e / (1.0 - e)).ln().abs() > 99f64.ln());
        assert!((t.eta(&[0.1, 0.5]) - 0.01).abs() < 1e-9);
    }

    #[test]
    fn sampler_is_deterministic() {
        let t = make_smooth_boundary_task(2, 1.0, Extended::Finite(1.0), flat(0.5), 0.2).unwrap();
        assert_eq!(t.sample(3, 100), t.sample(3, 100));
        assert_ne!(t.sample(3, 100), t.sample(4, 100));
    }

    #[test]
    fn margin_gamma_one_is_uniform() {
        let t = make_margin_task(2, 1.0, Extended::Finite(1.0), flat(0.5), 0.2, None).unwrap();
        assert_eq!(t.acceptance_rate, 1.0);
        assert_eq!(t.bayes_risk, 0.0);
    }

    #[test]
    fn excess_risk_rejects_small_samples() {
        let t = make_smooth_boundary_task(2, 1.0, Extended::Finite(1.0), flat(0.5), 0.2).unwrap();
        let net = ReluNetwork::constant(2, 0.0);
        assert!(excess_risk(&t, &net, 100, 0).is_err());
    }
}
