//! Constructive approximation networks.
//!
//! The square network is the sawtooth construction: with the hat map
//! `g(t) = 2σ(t) − 4σ(t − ½)` on `[0,1]` and `g_s` its `s`-fold composition,
//! `x − Σ_{s≤m} g_s(x)/4^s` is the piecewise-linear interpolant of `x²` on the
//! dyadic grid of mesh `2^{−m}`, so its error is at most `2^{−2m−2}`.
//! Products follow from polarisation, and polynomials from chains of products.
//!
//! Horizon and piecewise-constant classifier networks are exact (bit-level)
//! on the safe region `B_ξ`: every saturated ramp is routed through an extra
//! ReLU layer so that outputs are computed as `r − (r − 1)` with both terms
//! exactly representable.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{input, Error, Result};
use crate::net::{
    concat, concat_all, masking_network, pad_depth, stack, Affine, NetStats, ReluNetwork, Scratch,
};
use crate::poly::Polynomial;

/// `Ψ_{g,j}(x) = 1(x_j ≥ g(x_{−j}))` with `axis = j` (0-based).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HorizonSpec {
    pub axis: usize,
    pub boundary: Polynomial,
    pub holder_alpha: f64,
    pub holder_radius: f64,
}

impl HorizonSpec {
    pub fn new(
        axis: usize,
        boundary: Polynomial,
        holder_alpha: f64,
        holder_radius: f64,
    ) -> Result<Self> {
        if axis > boundary.vars {
            return input(format!(
                "axis {axis} out of range for a {}-dimensional input",
                boundary.vars + 1
            ));
        }
        if !(holder_alpha > 0.0) {
            return input("Hölder smoothness must be positive");
        }
        let norm = boundary.holder_norm_bound(holder_alpha);
        if norm > holder_radius {
            return input(format!(
                "boundary Hölder norm bound {norm:.4} exceeds radius {holder_radius}"
            ));
        }
        Ok(Self {
            axis,
            boundary,
            holder_alpha,
            holder_radius,
        })
    }

    /// Horizon with a radius just large enough for the boundary.
    pub fn fitted(axis: usize, boundary: Polynomial, holder_alpha: f64) -> Result<Self> {
        let r = boundary.holder_norm_bound(holder_alpha);
        Self::new(axis, boundary, holder_alpha, r)
    }

    pub fn dim(&self) -> usize {
        self.boundary.vars + 1
    }

    /// Signed margin `x_j − g(x_{−j})`.
    pub fn margin(&self, x: &[f64]) -> f64 {
        let rest: Vec<f64> = rest_coords(x, self.axis);
        x[self.axis] - self.boundary.eval(&rest)
    }

    pub fn indicator(&self, x: &[f64]) -> f64 {
        if self.margin(x) >= 0.0 {
            1.0
        } else {
            0.0
        }
    }
}

fn rest_coords(x: &[f64], skip: usize) -> Vec<f64> {
    x.iter()
        .enumerate()
        .filter(|(i, _)| *i != skip)
        .map(|(_, v)| *v)
        .collect()
}

/// Intersection of horizon sets.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PieceSpec {
    pub horizons: Vec<HorizonSpec>,
}

impl PieceSpec {
    pub fn contains(&self, x: &[f64]) -> bool {
        self.horizons.iter().all(|h| h.margin(x) >= 0.0)
    }
}

/// `C(x) = 2 Σ_t 1(x ∈ A_t) − 1` over caller-asserted disjoint pieces.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassifierSpec {
    pub pieces: Vec<PieceSpec>,
}

impl ClassifierSpec {
    pub fn new(pieces: Vec<PieceSpec>) -> Result<Self> {
        if pieces.is_empty() || pieces.iter().any(|p| p.horizons.is_empty()) {
            return input("a classifier needs T ≥ 1 pieces of K ≥ 1 horizons each");
        }
        let d = pieces[0].horizons[0].dim();
        if pieces
            .iter()
            .flat_map(|p| &p.horizons)
            .any(|h| h.dim() != d)
        {
            return input("all horizons must share the input dimension");
        }
        Ok(Self { pieces })
    }

    pub fn single(h: HorizonSpec) -> Self {
        Self {
            pieces: vec![PieceSpec { horizons: vec![h] }],
        }
    }

    pub fn dim(&self) -> usize {
        self.pieces[0].horizons[0].dim()
    }

    pub fn classify(&self, x: &[f64]) -> f64 {
        let hits = self.pieces.iter().filter(|p| p.contains(x)).count();
        2.0 * hits as f64 - 1.0
    }
}

/// The safe set `B_ξ` on which constructive classifiers are exact.
#[derive(Debug, Clone)]
pub struct SafeRegion<'a> {
    pub spec: &'a ClassifierSpec,
    pub gap: f64,
}

impl SafeRegion<'_> {
    /// True iff for every piece, `x` lies outside it or all its margins exceed the gap.
    pub fn contains(&self, x: &[f64]) -> bool {
        self.spec.pieces.iter().all(|p| {
            let margins: Vec<f64> = p.horizons.iter().map(|h| h.margin(x)).collect();
            margins.iter().any(|&m| m < 0.0) || margins.iter().all(|&m| m > self.gap)
        })
    }
}

/// Knobs for the polynomial approximator.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ApproxOptions {
    /// Largest accepted total degree.
    pub max_degree: u32,
    /// Ceiling on the square-network accuracy parameter `m`.
    pub max_accuracy: u32,
    /// Grid points per axis used for verification when the input has ≤ 3 dims.
    pub grid_points: usize,
}

impl Default for ApproxOptions {
    fn default() -> Self {
        Self {
            max_degree: 8,
            max_accuracy: 30,
            grid_points: 0,
        }
    }
}

/// Measured quality and size of a polynomial approximator.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ApproxReport {
    pub accuracy: u32,
    pub measured_error: f64,
    pub stats: NetStats,
}

/// Network approximating `x ↦ x²` on `[0,1]` with error `≤ 2^{−2m−2}`; depth `m`, width 3.
pub fn build_square(m: u32) -> Result<ReluNetwork> {
    if m == 0 {
        return input("square network needs m ≥ 1");
    }
    // hidden state per layer: (σ(t), σ(t − ½), σ(f)) with t = g_{s−1}(x), f = f_{s−1}(x)
    let mut layers = vec![Affine::new(
        3,
        1,
        vec![1.0, 1.0, 1.0],
        vec![0.0, -0.5, 0.0],
    )?];
    for s in 2..=m {
        let c = 0.25_f64.powi(s as i32 - 1);
        layers.push(Affine::new(
            3,
            3,
            vec![2.0, -4.0, 0.0, 2.0, -4.0, 0.0, -2.0 * c, 4.0 * c, 1.0],
            vec![0.0, -0.5, 0.0],
        )?);
    }
    let c = 0.25_f64.powi(m as i32);
    layers.push(Affine::new(1, 3, vec![-2.0 * c, 4.0 * c, 1.0], vec![0.0])?);
    ReluNetwork::new(layers)
}

/// Network approximating `(x, y) ↦ xy` on `[−M, M]²` through
/// `xy = 2M²·sq(|x+y|/2M) − ½M²·sq(|x|/M) − ½M²·sq(|y|/M)`;
/// the error is at most `3M²·2^{−2m−2}`.
pub fn build_product(m: u32, bound: f64) -> Result<ReluNetwork> {
    if !(bound > 0.0) || !bound.is_finite() {
        return input("product bound must be positive");
    }
    let abs = ReluNetwork::new(vec![
        Affine::from_rows(
            &[
                vec![1.0, 1.0],
                vec![-1.0, -1.0],
                vec![1.0, 0.0],
                vec![-1.0, 0.0],
                vec![0.0, 1.0],
                vec![0.0, -1.0],
            ],
            vec![0.0; 6],
        )?,
        Affine::from_rows(
            &[
                vec![0.5 / bound, 0.5 / bound, 0.0, 0.0, 0.0, 0.0],
                vec![0.0, 0.0, 1.0 / bound, 1.0 / bound, 0.0, 0.0],
                vec![0.0, 0.0, 0.0, 0.0, 1.0 / bound, 1.0 / bound],
            ],
            vec![0.0; 3],
        )?,
    ])?;
    let sq = build_square(m)?;
    let branches = (0..3)
        .map(|i| stack(&sq, &ReluNetwork::select(3, &[i])?))
        .collect::<Result<Vec<_>>>()?;
    let squares = concat_all(&branches)?;
    let m2 = bound * bound;
    let combine = ReluNetwork::affine(Affine::new(
        1,
        3,
        vec![2.0 * m2, -0.5 * m2, -0.5 * m2],
        vec![0.0],
    )?);
    stack(&combine, &stack(&squares, &abs)?)
}

fn verification_points(vars: usize, grid_points: usize) -> Vec<Vec<f64>> {
    if vars <= 3 {
        let per_axis = if grid_points >= 2 {
            grid_points
        } else {
            match vars {
                1 => 2001,
                2 => 201,
                _ => 41,
            }
        };
        let total = per_axis.pow(vars as u32);
        (0..total)
            .map(|idx| {
                let mut rem = idx;
                (0..vars)
                    .map(|_| {
                        let v = (rem % per_axis) as f64 / (per_axis - 1) as f64;
                        rem /= per_axis;
                        v
                    })
                    .collect()
            })
            .collect()
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(0xa11ce);
        (0..20_000)
            .map(|_| (0..vars).map(|_| rng.gen::<f64>()).collect())
            .collect()
    }
}

fn polynomial_network(g: &Polynomial, m: u32) -> Result<ReluNetwork> {
    let k = g.vars;
    let product = build_product(m, 1.0)?;
    let mut constant = 0.0;
    let mut branches = Vec::new();
    let mut coefs = Vec::new();
    for t in g.terms.iter().filter(|t| t.coef != 0.0) {
        let factors: Vec<usize> = t
            .powers
            .iter()
            .enumerate()
            .flat_map(|(i, &p)| std::iter::repeat_n(i, p as usize))
            .collect();
        if factors.is_empty() {
            constant += t.coef;
            continue;
        }
        let mut chain = ReluNetwork::select(k, &factors[..1])?;
        for &i in &factors[1..] {
            let next = pad_depth(&ReluNetwork::select(k, &[i])?, chain.depth())?;
            chain = stack(&product, &concat(&chain, &next)?)?;
        }
        branches.push(chain);
        coefs.push(t.coef);
    }
    if branches.is_empty() {
        return Ok(ReluNetwork::constant(k, constant));
    }
    let all = concat_all(&branches)?;
    let combine = ReluNetwork::affine(Affine::new(1, coefs.len(), coefs, vec![constant])?);
    stack(&combine, &all)
}

/// Network approximating the polynomial `g` on `[0,1]^k` to measured sup
/// error `≤ xi` on a verification grid. Constant and affine `g` are
/// represented exactly by a single affine map.
pub fn build_smooth_approx(
    g: &Polynomial,
    xi: f64,
    opts: &ApproxOptions,
) -> Result<(ReluNetwork, ApproxReport)> {
    if !(xi > 0.0) {
        return input("target error must be positive");
    }
    if g.vars == 0 {
        return input("polynomial needs at least one variable");
    }
    let degree = g.degree();
    if degree > opts.max_degree {
        return input(format!(
            "degree {degree} exceeds the configured maximum {}",
            opts.max_degree
        ));
    }
    let points = verification_points(g.vars, opts.grid_points);
    let measure = |net: &ReluNetwork| {
        let mut s = Scratch::default();
        points
            .iter()
            .map(|u| (net.forward_scalar(u, &mut s) - g.eval(u)).abs())
            .fold(0.0_f64, f64::max)
    };
    if degree <= 1 {
        let net = polynomial_network(g, 1)?;
        let err = measure(&net);
        return Ok((
            net.clone(),
            ApproxReport {
                accuracy: 0,
                measured_error: err,
                stats: net.stats(0),
            },
        ));
    }
    for m in 1..=opts.max_accuracy {
        let net = polynomial_network(g, m)?;
        let err = measure(&net);
        if err <= xi {
            let stats = net.stats(0);
            return Ok((
                net,
                ApproxReport {
                    accuracy: m,
                    measured_error: err,
                    stats,
                },
            ));
        }
    }
    Err(Error::Capacity(format!(
        "could not reach error {xi:e} with accuracy parameter ≤ {}",
        opts.max_accuracy
    )))
}

/// Knobs for the horizon construction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HorizonOptions {
    /// Shift of the active coordinate, as a fraction of the gap (`ξ/4` nominally).
    pub offset_fraction: f64,
    /// Target error of the boundary approximator, as a fraction of the gap.
    pub inner_error_fraction: f64,
    pub approx: ApproxOptions,
}

impl Default for HorizonOptions {
    fn default() -> Self {
        Self {
            offset_fraction: 0.25,
            inner_error_fraction: 0.125,
            approx: ApproxOptions::default(),
        }
    }
}

/// Network equal to `Ψ_{g,j}` on `{x_j − g > ξ} ∪ {x_j − g < 0}` with output in `[0,1]`.
pub fn build_horizon(spec: &HorizonSpec, xi: f64) -> Result<ReluNetwork> {
    build_horizon_with(spec, xi, &HorizonOptions::default())
}

pub fn build_horizon_with(
    spec: &HorizonSpec,
    xi: f64,
    opts: &HorizonOptions,
) -> Result<ReluNetwork> {
    if !(xi > 0.0) {
        return input("gap must be positive");
    }
    let d = spec.dim();
    let j = spec.axis;
    let (g_net, report) =
        build_smooth_approx(&spec.boundary, opts.inner_error_fraction * xi, &opts.approx)?;
    if report.measured_error >= xi / 4.0 {
        return Err(Error::Capacity(format!(
            "boundary approximation error {} is not below ξ/4",
            report.measured_error
        )));
    }
    let rest: Vec<usize> = (0..d).filter(|&i| i != j).collect();
    let g_on_x = stack(&g_net, &ReluNetwork::select(d, &rest)?)?;
    let maps = g_on_x.depth() + 1;
    let active = masking_network(d, &[j], maps)?;
    let mut pm = Affine::zeros(1, d + 1);
    pm.weights_mut()[j] = 1.0;
    pm.weights_mut()[d] = -1.0;
    pm.bias_mut()[0] = -opts.offset_fraction * xi;
    let shifted = stack(&ReluNetwork::affine(pm), &concat(&active, &g_on_x)?)?;
    let phi = concat(&shifted, &masking_network(d, &rest, maps)?)?;

    let mut first = Affine::zeros(1, d + 1);
    first.weights_mut()[0] = 2.0 / xi;
    let ramp = ReluNetwork::new(vec![
        first,
        Affine::new(2, 1, vec![1.0, 1.0], vec![0.0, -1.0])?,
        Affine::new(1, 2, vec![1.0, -1.0], vec![0.0])?,
    ])?;
    stack(&ramp, &phi)
}

/// Network equal to `C(x)` on `B_ξ` with output in `[−1, 1]`.
pub fn build_piecewise_classifier(spec: &ClassifierSpec, xi: f64) -> Result<ReluNetwork> {
    build_piecewise_classifier_with(spec, xi, &HorizonOptions::default())
}

pub fn build_piecewise_classifier_with(
    spec: &ClassifierSpec,
    xi: f64,
    opts: &HorizonOptions,
) -> Result<ReluNetwork> {
    check_disjoint(spec, DISJOINTNESS_SAMPLES, 0xd15)?;
    let d = spec.dim();
    let horizons = spec
        .pieces
        .iter()
        .flat_map(|p| &p.horizons)
        .map(|h| build_horizon_with(h, xi, opts))
        .collect::<Result<Vec<_>>>()?;
    let total = horizons.len();
    let indicators = concat_all(&horizons)?;
    debug_assert_eq!(indicators.input_dim(), d);

    let t = spec.pieces.len();
    let mut piece = Affine::zeros(t, total);
    let mut offset = 0;
    for (row, p) in spec.pieces.iter().enumerate() {
        let k = p.horizons.len();
        for c in offset..offset + k {
            piece.weights_mut()[row * total + c] = 1.0;
        }
        piece.bias_mut()[row] = -((k - 1) as f64);
        offset += k;
    }
    let combine = ReluNetwork::new(vec![
        Affine::identity(total),
        piece,
        Affine::new(1, t, vec![2.0; t], vec![-1.0])?,
    ])?;
    stack(&combine, &indicators)
}

const DISJOINTNESS_SAMPLES: usize = 20_000;

/// Rejects specs where some sampled point lies in two pieces.
pub fn check_disjoint(spec: &ClassifierSpec, samples: usize, seed: u64) -> Result<()> {
    if spec.pieces.len() < 2 {
        return Ok(());
    }
    let d = spec.dim();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut x = vec![0.0; d];
    for _ in 0..samples {
        x.iter_mut().for_each(|v| *v = rng.gen());
        if spec.pieces.iter().filter(|p| p.contains(&x)).count() > 1 {
            return input(format!("pieces overlap at {x:?}"));
        }
    }
    Ok(())
}

/// Plug-in classifier `2{σ((η̃ − ½)/ξ) − σ((η̃ − ½)/ξ − 1)} − 1` on top of an
/// estimate `η̃` of the conditional class probability.
pub fn build_plugin_threshold(eta_net: &ReluNetwork, xi: f64) -> Result<ReluNetwork> {
    if !(xi > 0.0) {
        return input("threshold gap must be positive");
    }
    if eta_net.output_dim() != 1 {
        return input("plug-in threshold needs a single-output estimate");
    }
    let ramp = ReluNetwork::new(vec![
        Affine::new(1, 1, vec![1.0 / xi], vec![-0.5 / xi])?,
        Affine::new(2, 1, vec![1.0, 1.0], vec![0.0, -1.0])?,
        Affine::new(1, 2, vec![2.0, -2.0], vec![-1.0])?,
    ])?;
    stack(&ramp, eta_net)
}

/// Stats sidecar for a constructed network.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BuildReport {
    pub gap: f64,
    pub stats: NetStats,
    /// Set when `‖Θ‖∞ > ξ^{−3}`.
    pub large_parameters: bool,
}

impl BuildReport {
    pub fn new(net: &ReluNetwork, gap: f64, grid_resolution: usize) -> Self {
        let stats = net.stats(grid_resolution);
        Self {
            gap,
            stats,
            large_parameters: stats.max_abs_param > gap.powi(-3),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid_error(net: &ReluNetwork, f: impl Fn(f64) -> f64, points: usize) -> f64 {
        let mut s = Scratch::default();
        (0..points)
            .map(|i| {
                let x = i as f64 / (points - 1) as f64;
                (net.forward_scalar(&[x], &mut s) - f(x)).abs()
            })
            .fold(0.0, f64::max)
    }

    #[test]
    fn square_interpolates_endpoints() {
        let sq = build_square(5).unwrap();
        assert_eq!(sq.evaluate(&[0.0]).unwrap(), vec![0.0]);
        assert_eq!(sq.evaluate(&[1.0]).unwrap(), vec![1.0]);
        assert_eq!(sq.depth(), 5);
    }

    #[test]
    fn square_error_bound_m8() {
        let err = grid_error(&build_square(8).unwrap(), |x| x * x, 10_000);
        assert!(err <= 2f64.powi(-18), "error {err}");
    }

    #[test]
    fn square_error_quarters_per_step() {
        for m in 1..7 {
            let a = grid_error(&build_square(m).unwrap(), |x| x * x, 10_000);
            let b = grid_error(&build_square(m + 1).unwrap(), |x| x * x, 10_000);
            assert!(b / a <= 0.25 * 1.1, "m={m}: ratio {}", b / a);
        }
    }

    #[test]
    fn product_examples() {
        let p = build_product(8, 1.0).unwrap();
        let bound = 6.0 * 2f64.powi(-18);
        assert!((p.evaluate(&[1.0, 1.0]).unwrap()[0] - 1.0).abs() <= bound);
        for y in [-1.0, -0.3, 0.0, 0.7, 1.0] {
            assert!(p.evaluate(&[0.0, y]).unwrap()[0].abs() <= bound);
            for x in [-0.9, 0.1, 0.55] {
                let a = p.evaluate(&[x, y]).unwrap()[0];
                let b = p.evaluate(&[y, x]).unwrap()[0];
                assert!((a - b).abs() <= 1e-12);
            }
        }
    }

    #[test]
    fn smooth_approx_exact_for_affine() {
        let c = Polynomial::constant(2, 0.4);
        let (net, rep) = build_smooth_approx(&c, 1e-3, &ApproxOptions::default()).unwrap();
        assert_eq!(net.depth(), 0);
        assert_eq!(rep.measured_error, 0.0);
        let lin = Polynomial::affine(0.1, &[0.5, -0.25]);
        let (net, rep) = build_smooth_approx(&lin, 1e-3, &ApproxOptions::default()).unwrap();
        assert_eq!(net.depth(), 0);
        assert!(rep.measured_error <= 1e-16);
    }

    #[test]
    fn smooth_approx_of_square() {
        let g = Polynomial::from_terms(1, &[(1.0, &[2])]).unwrap();
        let (net, rep) = build_smooth_approx(&g, 1e-3, &ApproxOptions::default()).unwrap();
        let err = grid_error(&net, |u| u * u, 10_001);
        assert!(err <= 1e-3, "error {err}");
        assert!(rep.measured_error <= 1e-3);
    }

    #[test]
    fn smooth_approx_capacity_error() {
        let g = Polynomial::from_terms(1, &[(1.0, &[3])]).unwrap();
        let opts = ApproxOptions {
            max_accuracy: 2,
            ..Default::default()
        };
        assert!(matches!(
            build_smooth_approx(&g, 1e-9, &opts),
            Err(Error::Capacity(_))
        ));
    }

    fn flat_horizon() -> HorizonSpec {
        HorizonSpec::fitted(0, Polynomial::constant(1, 0.5), 1.0).unwrap()
    }

    #[test]
    fn horizon_examples() {
        let net = build_horizon(&flat_horizon(), 0.1).unwrap();
        assert_eq!(net.evaluate(&[0.7, 0.2]).unwrap(), vec![1.0]);
        assert_eq!(net.evaluate(&[0.45, 0.9]).unwrap(), vec![0.0]);
        // inside the gap the output stays in [0, 1]
        let v = net.evaluate(&[0.52, 0.3]).unwrap()[0];
        assert!((0.0..=1.0).contains(&v));
    }

    #[test]
    fn horizon_threshold_hand_evaluation() {
        // g ≡ 0 on the second coordinate: the ramp is σ(2z/ξ) clipped at 1 with
        // z = x₁ − ξ/4, so x₁ = 0.2, ξ = 0.1 gives 2·0.175/0.1 = 3.5 → 1
        let h = HorizonSpec::fitted(0, Polynomial::constant(1, 0.0), 1.0).unwrap();
        let net = build_horizon(&h, 0.1).unwrap();
        assert_eq!(net.evaluate(&[0.2, 0.6]).unwrap(), vec![1.0]);
        assert_eq!(net.evaluate(&[0.1, 0.6]).unwrap(), vec![1.0]);
        // x₁ = 0.05: ramp value 2·(0.05 − 0.025)/0.1 = 0.5
        assert!((net.evaluate(&[0.05, 0.6]).unwrap()[0] - 0.5).abs() < 1e-12);
    }

    #[test]
    fn box_piece() {
        let spec = ClassifierSpec::new(vec![PieceSpec {
            horizons: vec![
                HorizonSpec::fitted(0, Polynomial::constant(1, 0.3), 1.0).unwrap(),
                HorizonSpec::fitted(1, Polynomial::constant(1, 0.7), 1.0).unwrap(),
            ],
        }])
        .unwrap();
        let net = build_piecewise_classifier(&spec, 0.05).unwrap();
        assert_eq!(net.evaluate(&[0.1, 0.1]).unwrap(), vec![-1.0]);
        assert_eq!(net.evaluate(&[0.9, 0.2]).unwrap(), vec![-1.0]);
        assert_eq!(net.evaluate(&[0.65, 0.85]).unwrap(), vec![1.0]);
    }

    #[test]
    fn single_horizon_classifier_is_two_psi_minus_one() {
        let h = HorizonSpec::fitted(
            1,
            Polynomial::from_terms(1, &[(0.3, &[0]), (0.4, &[2])]).unwrap(),
            2.0,
        )
        .unwrap();
        let spec = ClassifierSpec::single(h.clone());
        let xi = 0.05;
        let net = build_piecewise_classifier(&spec, xi).unwrap();
        let region = SafeRegion {
            spec: &spec,
            gap: xi,
        };
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let mut checked = 0;
        while checked < 2000 {
            let x = [rng.gen::<f64>(), rng.gen::<f64>()];
            if !region.contains(&x) {
                continue;
            }
            checked += 1;
            assert_eq!(net.evaluate(&x).unwrap()[0], 2.0 * h.indicator(&x) - 1.0);
        }
    }

    #[test]
    fn overlapping_pieces_rejected() {
        let piece = |c| PieceSpec {
            horizons: vec![HorizonSpec::fitted(0, Polynomial::constant(1, c), 1.0).unwrap()],
        };
        let spec = ClassifierSpec::new(vec![piece(0.3), piece(0.6)]).unwrap();
        assert!(matches!(
            build_piecewise_classifier(&spec, 0.05),
            Err(Error::Input(_))
        ));
    }

    #[test]
    fn plugin_examples() {
        let xi = 0.1;
        let at = |v: f64| {
            build_plugin_threshold(&ReluNetwork::constant(2, v), xi)
                .unwrap()
                .evaluate(&[0.3, 0.3])
                .unwrap()[0]
        };
        assert_eq!(at(0.8), 1.0);
        assert_eq!(at(0.5), -1.0);
        assert_eq!(at(0.3), -1.0);
        assert!((at(0.55) - 0.0).abs() < 1e-12);
        let net = build_plugin_threshold(&ReluNetwork::constant(2, 0.8), xi).unwrap();
        assert!(net.layers()[1..]
            .iter()
            .flat_map(|a| a.weights().iter().chain(a.bias()))
            .all(|v| v.abs() <= 1.0 / xi));
    }
}
