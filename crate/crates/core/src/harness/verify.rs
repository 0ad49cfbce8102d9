//! The `verify` suite: exactness of the constructive networks, network
//! calculus, formula spot checks, generator fidelity and the statistical
//! inequalities, each reported as one row.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::config::{mix_seed, Config};
use crate::approx::{
    build_piecewise_classifier_with, ClassifierSpec, HorizonOptions, HorizonSpec, PieceSpec,
    SafeRegion,
};
use crate::error::{input, Result};
use crate::learn::LossKind;
use crate::net::{clamp_output, concat, pad_depth, random_network, stack, ReluNetwork, Scratch};
use crate::poly::Polynomial;
use crate::synth::{
    batch_means, estimate_exponent, excess_risk, make_margin_task, make_smooth_boundary_task,
    monte_carlo, profile_weak_norm, ExponentEstimate, SyntheticTask, TailStatistic,
};
use crate::theory::{
    entropy_bound, hinge_variance_constant, rate_exponent, variance_bound_rhs, Extended, RateSpec,
    VarianceBoundParams,
};

/// Deliberate defects used to check that the suite can fail.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Fault {
    /// Shift the horizon ramp to the wrong side of the boundary.
    HorizonGap,
}

impl std::str::FromStr for Fault {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "horizon-gap" => Ok(Fault::HorizonGap),
            other => Err(format!("unknown fault {other:?} (known: horizon-gap)")),
        }
    }
}

impl Fault {
    pub fn horizon_options(fault: Option<Fault>) -> HorizonOptions {
        match fault {
            Some(Fault::HorizonGap) => HorizonOptions {
                offset_fraction: -0.25,
                ..HorizonOptions::default()
            },
            None => HorizonOptions::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub suite: String,
    pub name: String,
    /// Only gated checks decide the exit status.
    pub gated: bool,
    pub passed: bool,
    pub value: f64,
    pub threshold: f64,
    pub se: Option<f64>,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub checks: Vec<Check>,
    pub passed: bool,
}

impl VerifyReport {
    fn new(checks: Vec<Check>) -> Self {
        let passed = checks.iter().all(|c| c.passed || !c.gated);
        Self { checks, passed }
    }
}

struct Rows(Vec<Check>);

impl Rows {
    #[allow(clippy::too_many_arguments)]
    fn push(
        &mut self,
        suite: &str,
        name: &str,
        gated: bool,
        passed: bool,
        value: f64,
        threshold: f64,
        se: Option<f64>,
        detail: String,
    ) {
        self.0.push(Check {
            suite: suite.into(),
            name: name.into(),
            gated,
            passed,
            value,
            threshold,
            se,
            detail,
        });
    }

    fn error(&mut self, suite: &str, name: &str, err: impl std::fmt::Display) {
        self.push(
            suite,
            name,
            true,
            false,
            f64::NAN,
            f64::NAN,
            None,
            err.to_string(),
        );
    }
}

fn poly(vars: usize, terms: &[(f64, &[u32])]) -> Polynomial {
    Polynomial::from_terms(vars, terms).expect("valid polynomial")
}

fn horizon(axis: usize, g: Polynomial) -> HorizonSpec {
    HorizonSpec::fitted(axis, g, 2.0).expect("valid horizon")
}

/// Classifier specifications covering `d ∈ {2, 3}`, `K ∈ {1, 2}`, `T ∈ {1, 2}`
/// with polynomial boundaries and pairwise disjoint pieces.
pub fn exactness_cases() -> Vec<(String, ClassifierSpec)> {
    let piece = |hs: Vec<HorizonSpec>| PieceSpec { horizons: hs };
    let spec = |ps: Vec<PieceSpec>| ClassifierSpec::new(ps).expect("valid classifier");
    vec![
        (
            "d2-K1-T1".into(),
            spec(vec![piece(vec![horizon(
                0,
                poly(1, &[(0.4, &[0]), (0.5, &[2])]),
            )])]),
        ),
        (
            "d2-K2-T1".into(),
            spec(vec![piece(vec![
                horizon(0, poly(1, &[(0.3, &[0]), (0.2, &[2])])),
                horizon(1, poly(1, &[(0.2, &[0]), (0.3, &[2])])),
            ])]),
        ),
        (
            "d2-K1-T2".into(),
            spec(vec![
                piece(vec![horizon(
                    0,
                    poly(1, &[(0.55, &[0]), (0.5, &[1]), (0.1, &[2])]),
                )]),
                piece(vec![horizon(
                    1,
                    poly(1, &[(0.55, &[0]), (0.5, &[1]), (0.1, &[2])]),
                )]),
            ]),
        ),
        (
            "d2-K2-T2".into(),
            spec(vec![
                piece(vec![
                    horizon(0, poly(1, &[(0.55, &[0]), (0.5, &[1]), (0.1, &[2])])),
                    horizon(1, poly(1, &[(0.1, &[0]), (0.1, &[2])])),
                ]),
                piece(vec![
                    horizon(1, poly(1, &[(0.55, &[0]), (0.5, &[1]), (0.1, &[2])])),
                    horizon(0, poly(1, &[(0.05, &[0]), (0.2, &[2])])),
                ]),
            ]),
        ),
        (
            "d3-K1-T1".into(),
            spec(vec![piece(vec![horizon(
                0,
                poly(2, &[(0.3, &[0, 0]), (0.3, &[1, 1]), (0.2, &[0, 2])]),
            )])]),
        ),
        (
            "d3-K2-T1".into(),
            spec(vec![piece(vec![
                horizon(0, poly(2, &[(0.3, &[0, 0]), (0.2, &[1, 1])])),
                horizon(1, poly(2, &[(0.2, &[0, 0]), (0.3, &[0, 2])])),
            ])]),
        ),
        (
            "d3-K1-T2".into(),
            spec(vec![
                piece(vec![horizon(
                    0,
                    poly(2, &[(0.55, &[0, 0]), (0.5, &[1, 0]), (0.1, &[0, 2])]),
                )]),
                piece(vec![horizon(
                    1,
                    poly(2, &[(0.55, &[0, 0]), (0.5, &[1, 0]), (0.1, &[0, 2])]),
                )]),
            ]),
        ),
        (
            "d3-K2-T2".into(),
            spec(vec![
                piece(vec![
                    horizon(
                        0,
                        poly(2, &[(0.55, &[0, 0]), (0.5, &[1, 0]), (0.1, &[0, 2])]),
                    ),
                    horizon(2, poly(2, &[(0.1, &[0, 0]), (0.2, &[1, 1])])),
                ]),
                piece(vec![
                    horizon(
                        1,
                        poly(2, &[(0.55, &[0, 0]), (0.5, &[1, 0]), (0.1, &[0, 2])]),
                    ),
                    horizon(2, poly(2, &[(0.05, &[0, 0]), (0.2, &[0, 2])])),
                ]),
            ]),
        ),
    ]
}

/// Outcome of comparing a network with its indicator oracle on `B_ξ`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExactnessCount {
    pub checked: usize,
    pub mismatches: usize,
}

/// Draws `points` uniform points of `B_ξ` by rejection and counts those where
/// the network output differs (bit-wise) from `C(x)`.
pub fn exactness_mismatches(
    spec: &ClassifierSpec,
    net: &ReluNetwork,
    xi: f64,
    points: usize,
    seed: u64,
) -> Result<ExactnessCount> {
    let d = spec.dim();
    if net.input_dim() != d {
        return input("network and classifier dimensions differ");
    }
    let region = SafeRegion { spec, gap: xi };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut x = vec![0.0; d];
    let mut s = Scratch::default();
    let mut out = ExactnessCount {
        checked: 0,
        mismatches: 0,
    };
    let mut proposals = 0usize;
    while out.checked < points {
        proposals += 1;
        if proposals > 1000 * points.max(1) {
            return input("safe region too small to sample");
        }
        x.iter_mut().for_each(|v| *v = rng.gen());
        if !region.contains(&x) {
            continue;
        }
        out.checked += 1;
        if net.forward_scalar(&x, &mut s) != spec.classify(&x) {
            out.mismatches += 1;
        }
    }
    Ok(out)
}

fn exactness_suite(cfg: &Config, fault: Option<Fault>, rows: &mut Rows) {
    let opts = Fault::horizon_options(fault);
    let xi = 0.05;
    for (i, (name, spec)) in exactness_cases().iter().enumerate() {
        let label = format!("horizon-exactness/{name}/xi={xi}");
        let result = build_piecewise_classifier_with(spec, xi, &opts).and_then(|net| {
            exactness_mismatches(
                spec,
                &net,
                xi,
                cfg.verify.exactness_points,
                mix_seed(&[cfg.seed, 100, i as u64]),
            )
        });
        match result {
            Ok(c) => rows.push(
                "exactness",
                &label,
                true,
                c.mismatches == 0,
                c.mismatches as f64,
                0.0,
                None,
                format!(
                    "{} of {} safe-region points mismatched",
                    c.mismatches, c.checked
                ),
            ),
            Err(e) => rows.error("exactness", &label, e),
        }
    }
}

/// Largest relative deviation between a composed network and nested evaluation.
fn relative_gap(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(u, v)| (u - v).abs() / u.abs().max(v.abs()).max(1.0))
        .fold(0.0, f64::max)
}

/// Outcome of the random composition checks.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CompositionSummary {
    pub trials: usize,
    pub max_relative_error: f64,
    /// Depth and nonzero accounting identities that failed.
    pub accounting_failures: usize,
    /// Stacked networks exceeding `nnz₁ + nnz₂ + 2m²` (m = interface width).
    pub stack_bound_violations: usize,
}

/// Random stack / concat / pad compositions against nested evaluation.
pub fn composition_checks(trials: usize, seed: u64) -> Result<CompositionSummary> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = CompositionSummary {
        trials,
        max_relative_error: 0.0,
        accounting_failures: 0,
        stack_bound_violations: 0,
    };
    let mut s1 = Scratch::default();
    let mut s2 = Scratch::default();
    for _ in 0..trials {
        let d = rng.gen_range(1..=4);
        let m = rng.gen_range(1..=3);
        let dims = |rng: &mut ChaCha8Rng, input: usize, output: usize| {
            let mut v = vec![input];
            v.extend((0..rng.gen_range(0..=3)).map(|_| rng.gen_range(1..=6)));
            v.push(output);
            v
        };
        let density = rng.gen_range(0.3..=1.0);
        let da = dims(&mut rng, d, m);
        let inner = random_network(&mut rng, &da, density, 2.0)?;
        let db = dims(&mut rng, m, 2);
        let outer = random_network(&mut rng, &db, density, 2.0)?;
        let dc = dims(&mut rng, d, 1);
        let side = random_network(&mut rng, &dc, density, 2.0)?;

        let stacked = stack(&outer, &inner)?;
        if stacked.depth() != outer.depth() + inner.depth() {
            out.accounting_failures += 1;
        }
        if stacked.nnz() > outer.nnz() + inner.nnz() + 2 * m * m {
            out.stack_bound_violations += 1;
        }
        let depth = stacked.depth().max(side.depth());
        let a = pad_depth(&stacked, depth)?;
        let b = pad_depth(&side, depth)?;
        let joined = concat(&a, &b)?;
        if joined.nnz() != a.nnz() + b.nnz() || joined.depth() != depth {
            out.accounting_failures += 1;
        }
        let x: Vec<f64> = (0..d).map(|_| rng.gen_range(-1.0..=1.0)).collect();
        let mid = inner.forward(&x, &mut s1).to_vec();
        let mut want = outer.forward(&mid, &mut s2).to_vec();
        want.extend_from_slice(side.forward(&x, &mut s2));
        let got = joined.forward(&x, &mut s1).to_vec();
        out.max_relative_error = out.max_relative_error.max(relative_gap(&got, &want));
    }
    Ok(out)
}

fn composition_suite(cfg: &Config, rows: &mut Rows) {
    match composition_checks(cfg.verify.compositions, mix_seed(&[cfg.seed, 200])) {
        Ok(c) => {
            rows.push(
                "composition",
                "nested-evaluation",
                true,
                c.max_relative_error <= 1e-12,
                c.max_relative_error,
                1e-12,
                None,
                format!("max relative error over {} random compositions", c.trials),
            );
            rows.push(
                "composition",
                "depth-and-nnz-accounting",
                true,
                c.accounting_failures == 0,
                c.accounting_failures as f64,
                0.0,
                None,
                "depth(stack) = depth₁ + depth₂, nnz(concat) = nnz₁ + nnz₂".into(),
            );
            rows.push(
                "composition",
                "stack-nnz-bound",
                false,
                c.stack_bound_violations == 0,
                c.stack_bound_violations as f64,
                0.0,
                None,
                "stacked nets exceeding nnz₁ + nnz₂ + 2m² (reported only; the merged middle map can be dense)"
                    .into(),
            );
        }
        Err(e) => rows.error("composition", "nested-evaluation", e),
    }
}

fn formula_suite(rows: &mut Rows) {
    let e = entropy_bound(1, 1, 0, 1.0, 1.0).unwrap_or(f64::NAN);
    let want = 2.0 * 4f64.ln();
    rows.push(
        "formulas",
        "entropy-bound-anchor",
        true,
        (e - want).abs() <= 1e-12,
        e,
        want,
        None,
        "2 log 4".into(),
    );
    let mut worst: f64 = 0.0;
    for q in [0.0, 1.0, 5.0] {
        let big = rate_exponent(&RateSpec::margin(
            1.0,
            Extended::Finite(q),
            Extended::Finite(1e9),
            2,
        ))
        .unwrap_or(f64::NAN);
        worst = worst.max((big - (q + 1.0) / (q + 2.0)).abs());
    }
    rows.push(
        "formulas",
        "margin-exponent-large-gamma",
        true,
        worst <= 1e-6,
        worst,
        1e-6,
        None,
        "case 3 at γ = 1e9 vs (q+1)/(q+2)".into(),
    );
    let mut worst: f64 = 0.0;
    for (a, q, d) in [(1.0, 0.0, 2), (2.0, 1.0, 3), (0.5, 4.0, 5)] {
        let c3 = rate_exponent(&RateSpec::margin(
            a,
            Extended::Finite(q),
            Extended::Finite(1.0),
            d,
        ))
        .unwrap_or(f64::NAN);
        let c1 = rate_exponent(&RateSpec::smooth_boundary(a, Extended::Finite(q), d))
            .unwrap_or(f64::NAN);
        worst = worst.max((c3 - c1).abs());
        let k = rate_exponent(&RateSpec::cross_entropy(a, Extended::Finite(2.0), d))
            .unwrap_or(f64::NAN);
        let lim = rate_exponent(&RateSpec::margin(
            a,
            Extended::Infinity,
            Extended::Finite(2.0),
            d,
        ))
        .unwrap_or(f64::NAN);
        worst = worst.max((k - lim).abs());
    }
    rows.push(
        "formulas",
        "exponent-identities",
        true,
        worst <= 1e-12,
        worst,
        1e-12,
        None,
        "case 3 at γ = 1 equals case 1; κ equals the q = ∞ limit of case 3".into(),
    );
}

pub fn verify_boundary() -> Polynomial {
    poly(1, &[(0.4, &[0]), (0.5, &[2])])
}

fn generator_suite(cfg: &Config, rows: &mut Rows) {
    let n = cfg.verify.mc_samples;
    let grid: Vec<f64> = (0..6).map(|i| 0.01 * 10f64.powf(i as f64 / 5.0)).collect();
    let task = make_smooth_boundary_task(2, 1.0, Extended::Finite(1.0), verify_boundary(), 0.2);
    match task.and_then(|t| {
        estimate_exponent(
            &t,
            TailStatistic::NoiseQ,
            &grid,
            n,
            mix_seed(&[cfg.seed, 300]),
        )
    }) {
        Ok(ExponentEstimate::Slope { slope, stderr }) => rows.push(
            "generators",
            "noise-exponent-q1",
            true,
            (slope - 1.0).abs() <= 0.25,
            slope,
            0.25,
            Some(stderr),
            "fitted tail slope vs nominal q = 1".into(),
        ),
        Ok(other) => rows.error(
            "generators",
            "noise-exponent-q1",
            format!("unexpected {other:?}"),
        ),
        Err(e) => rows.error("generators", "noise-exponent-q1", e),
    }
    let task = make_margin_task(2, 1.0, Extended::Finite(2.0), verify_boundary(), 0.2, None);
    let grid: Vec<f64> = (0..6).map(|i| 0.01 * 10f64.powf(i as f64 / 5.0)).collect();
    match task.and_then(|t| {
        estimate_exponent(
            &t,
            TailStatistic::MarginGamma,
            &grid,
            n,
            mix_seed(&[cfg.seed, 301]),
        )
    }) {
        Ok(ExponentEstimate::Slope { slope, stderr }) => rows.push(
            "generators",
            "margin-exponent-gamma2",
            true,
            (slope - 2.0).abs() <= 0.3,
            slope,
            0.3,
            Some(stderr),
            "fitted tail slope vs nominal γ = 2".into(),
        ),
        Ok(other) => rows.error(
            "generators",
            "margin-exponent-gamma2",
            format!("unexpected {other:?}"),
        ),
        Err(e) => rows.error("generators", "margin-exponent-gamma2", e),
    }
    match make_smooth_boundary_task(2, 1.0, Extended::Finite(1.0), verify_boundary(), 0.2) {
        Ok(t) => {
            let est = label_bayes_risk(&t, n, mix_seed(&[cfg.seed, 302]));
            let gap = (est.mean - t.bayes_risk).abs();
            rows.push(
                "generators",
                "bayes-risk-cache",
                true,
                gap <= 4.0 * est.se,
                gap,
                4.0 * est.se,
                Some(est.se),
                format!("MC {} vs cached {}", est.mean, t.bayes_risk),
            );
        }
        Err(e) => rows.error("generators", "bayes-risk-cache", e),
    }
}

/// Monte Carlo Bayes risk with sampled labels: `P(Y ≠ C*(X))`.
pub fn label_bayes_risk(task: &SyntheticTask, n: usize, seed: u64) -> crate::synth::Estimate {
    monte_carlo(task, n, seed, |x, rng| {
        let y = if rng.gen::<f64>() < task.eta(x) {
            1.0
        } else {
            -1.0
        };
        if y != task.bayes(x) {
            1.0
        } else {
            0.0
        }
    })
}

/// Random network with output clamped to `[−1, 1]`.
pub fn random_clamped_network(d: usize, rng: &mut ChaCha8Rng) -> Result<ReluNetwork> {
    let width = rng.gen_range(2..=8);
    let depth = rng.gen_range(1..=3);
    let mut dims = vec![d];
    dims.extend(std::iter::repeat_n(width, depth));
    dims.push(1);
    let net = random_network(rng, &dims, 0.8, 1.5)?;
    clamp_output(&net, 1.0)
}

/// One inequality comparison with its Monte Carlo uncertainty.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InequalityOutcome {
    pub lhs: f64,
    pub rhs: f64,
    /// Combined standard error of `lhs − rhs`.
    pub se: f64,
}

impl InequalityOutcome {
    pub fn holds_within(&self, k: f64) -> bool {
        self.lhs <= self.rhs + k * self.se
    }
}

/// `E(sign f, C*) ≤ E_φ(f, C*)` for a hinge-loss network with `‖f‖∞ ≤ 1`.
pub fn zhang_check(
    task: &SyntheticTask,
    net: &ReluNetwork,
    n: usize,
    seed: u64,
) -> Result<InequalityOutcome> {
    let r = excess_risk(task, net, n, seed)?;
    Ok(InequalityOutcome {
        lhs: r.excess_01.mean,
        rhs: r.excess_hinge.mean,
        se: (r.excess_01.se.powi(2) + r.excess_hinge.se.powi(2)).sqrt(),
    })
}

/// Second moment of the hinge-loss difference against the variance bound
/// evaluated at the estimated excess hinge risk.
pub fn hinge_variance_check(
    task: &SyntheticTask,
    net: &ReluNetwork,
    constant: f64,
    q: Extended,
    n: usize,
    seed: u64,
) -> Result<InequalityOutcome> {
    let phi = |z: f64| LossKind::Hinge.value(z);
    let means = batch_means::<2, _>(task, n, seed, |x, _, s| {
        let f = net.forward_scalar(x, s);
        let eta = task.eta(x);
        let b = task.bayes(x);
        let second = eta * (phi(f) - phi(b)).powi(2) + (1.0 - eta) * (phi(-f) - phi(-b)).powi(2);
        let first = eta * (phi(f) - phi(b)) + (1.0 - eta) * (phi(-f) - phi(-b));
        [second, first]
    });
    let col = |k: usize| {
        let v: Vec<f64> = means.iter().map(|m| m[k]).collect();
        let mean = v.iter().sum::<f64>() / v.len() as f64;
        let var = v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (v.len() - 1) as f64;
        (mean, (var / v.len() as f64).sqrt())
    };
    let (lhs, lhs_se) = col(0);
    let (excess, excess_se) = col(1);
    let params = VarianceBoundParams::hinge(q, constant, 1.0);
    let rhs = variance_bound_rhs(&params, excess.max(0.0));
    // first-order propagation of the excess uncertainty through the bound
    let upper = variance_bound_rhs(&params, (excess + excess_se).max(0.0));
    Ok(InequalityOutcome {
        lhs,
        rhs,
        se: (lhs_se.powi(2) + (upper - rhs).powi(2)).sqrt(),
    })
}

/// Hinge variance constant of a noise-profile task.
pub fn profile_variance_constant(task: &SyntheticTask) -> Option<(f64, Extended)> {
    let q = task.nominal_q?;
    let norm = profile_weak_norm(task)?;
    Some((hinge_variance_constant(norm, q), q))
}

fn inequality_suite(cfg: &Config, rows: &mut Rows) {
    let n = cfg.verify.mc_samples;
    let task =
        match make_smooth_boundary_task(2, 1.0, Extended::Finite(1.0), verify_boundary(), 0.2) {
            Ok(t) => t,
            Err(e) => return rows.error("inequalities", "setup", e),
        };
    let Some((constant, q)) = profile_variance_constant(&task) else {
        return rows.error("inequalities", "setup", "no closed-form variance constant");
    };
    let mut rng = ChaCha8Rng::seed_from_u64(mix_seed(&[cfg.seed, 400]));
    let mut zhang_worst = f64::NEG_INFINITY;
    let mut var_worst = f64::NEG_INFINITY;
    let mut failures = (0, 0);
    for i in 0..cfg.verify.random_nets {
        let net = match random_clamped_network(2, &mut rng) {
            Ok(n) => n,
            Err(e) => return rows.error("inequalities", "setup", e),
        };
        let seed = mix_seed(&[cfg.seed, 401, i as u64]);
        match zhang_check(&task, &net, n, seed) {
            Ok(o) => {
                zhang_worst = zhang_worst.max((o.lhs - o.rhs) / o.se.max(1e-300));
                failures.0 += usize::from(!o.holds_within(3.0));
            }
            Err(e) => return rows.error("inequalities", "zhang", e),
        }
        match hinge_variance_check(&task, &net, constant, q, n, seed) {
            Ok(o) => {
                var_worst = var_worst.max((o.lhs - o.rhs) / o.se.max(1e-300));
                failures.1 += usize::from(!o.holds_within(3.0));
            }
            Err(e) => return rows.error("inequalities", "hinge-variance", e),
        }
    }
    rows.push(
        "inequalities",
        "zhang",
        true,
        failures.0 == 0,
        zhang_worst,
        3.0,
        None,
        format!(
            "largest (E₀₁ − E_hinge)/SE over {} clamped random networks",
            cfg.verify.random_nets
        ),
    );
    rows.push(
        "inequalities",
        "hinge-variance",
        true,
        failures.1 == 0,
        var_worst,
        3.0,
        None,
        format!("largest (LHS − RHS)/SE with C = {constant:.4}"),
    );
}

pub fn run_verify(cfg: &Config, fault: Option<Fault>) -> VerifyReport {
    let mut rows = Rows(Vec::new());
    exactness_suite(cfg, fault, &mut rows);
    composition_suite(cfg, &mut rows);
    formula_suite(&mut rows);
    generator_suite(cfg, &mut rows);
    inequality_suite(cfg, &mut rows);
    VerifyReport::new(rows.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cases_are_disjoint_and_buildable() {
        for (name, spec) in exactness_cases() {
            assert!(
                crate::approx::check_disjoint(&spec, 50_000, 1).is_ok(),
                "{name}"
            );
        }
    }

    #[test]
    fn fault_names_parse() {
        assert_eq!("horizon-gap".parse::<Fault>(), Ok(Fault::HorizonGap));
        assert!("nope".parse::<Fault>().is_err());
    }
}
