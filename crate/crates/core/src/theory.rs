//! Closed-form calculators: covering-entropy bound, convergence-rate
//! exponents, minimax benchmarks and the architecture schedules behind them.
//!
//! Infinite noise or margin exponents are carried explicitly by [`Extended`]
//! and every formula uses its analytic limit instead of a large float.

use std::fmt;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{input, Result};

/// A positive exponent that may be infinite. Serialized as a number or `"inf"`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Extended {
    Finite(f64),
    Infinity,
}

impl Extended {
    pub fn is_infinite(self) -> bool {
        matches!(self, Extended::Infinity)
    }

    /// The value as a float (`f64::INFINITY` for the infinite case).
    pub fn as_f64(self) -> f64 {
        match self {
            Extended::Finite(v) => v,
            Extended::Infinity => f64::INFINITY,
        }
    }

    /// `v/(v+1)`, equal to 1 at infinity.
    pub fn ratio(self) -> f64 {
        match self {
            Extended::Finite(v) => v / (v + 1.0),
            Extended::Infinity => 1.0,
        }
    }
}

impl From<f64> for Extended {
    fn from(v: f64) -> Self {
        if v.is_infinite() && v > 0.0 {
            Extended::Infinity
        } else {
            Extended::Finite(v)
        }
    }
}

impl fmt::Display for Extended {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Extended::Finite(v) => write!(f, "{v}"),
            Extended::Infinity => f.write_str("inf"),
        }
    }
}

impl Serialize for Extended {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Extended::Finite(v) => s.serialize_f64(*v),
            Extended::Infinity => s.serialize_str("inf"),
        }
    }
}

impl<'de> Deserialize<'de> for Extended {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(f64),
            Text(String),
        }
        match Raw::deserialize(d)? {
            Raw::Num(v) => Ok(Extended::from(v)),
            Raw::Text(t) if matches!(t.as_str(), "inf" | "infinity" | "Infinity" | "∞") => {
                Ok(Extended::Infinity)
            }
            Raw::Text(t) => t
                .parse::<f64>()
                .map(Extended::from)
                .map_err(|_| serde::de::Error::custom(format!("invalid exponent {t:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RateCase {
    /// Hinge loss, smooth decision boundary, Tsybakov noise.
    SmoothBoundary,
    /// Hinge loss, smooth conditional class probability.
    SmoothEta,
    /// Hinge loss, smooth boundary with a margin condition.
    Margin,
    /// Logistic loss, smooth boundary with a margin condition.
    CrossEntropy,
}

impl RateCase {
    pub fn as_str(self) -> &'static str {
        match self {
            RateCase::SmoothBoundary => "smooth_boundary",
            RateCase::SmoothEta => "smooth_eta",
            RateCase::Margin => "margin",
            RateCase::CrossEntropy => "cross_entropy",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RateSpec {
    pub case: RateCase,
    /// Boundary smoothness.
    #[serde(default)]
    pub alpha: Option<f64>,
    /// Smoothness of the conditional class probability.
    #[serde(default)]
    pub beta: Option<f64>,
    /// Noise exponent.
    #[serde(default)]
    pub q: Option<Extended>,
    /// Margin exponent.
    #[serde(default)]
    pub gamma: Option<Extended>,
    pub d: usize,
}

impl RateSpec {
    pub fn smooth_boundary(alpha: f64, q: Extended, d: usize) -> Self {
        Self {
            case: RateCase::SmoothBoundary,
            alpha: Some(alpha),
            beta: None,
            q: Some(q),
            gamma: None,
            d,
        }
    }

    pub fn smooth_eta(beta: f64, q: Extended, d: usize) -> Self {
        Self {
            case: RateCase::SmoothEta,
            alpha: None,
            beta: Some(beta),
            q: Some(q),
            gamma: None,
            d,
        }
    }

    pub fn margin(alpha: f64, q: Extended, gamma: Extended, d: usize) -> Self {
        Self {
            case: RateCase::Margin,
            alpha: Some(alpha),
            beta: None,
            q: Some(q),
            gamma: Some(gamma),
            d,
        }
    }

    pub fn cross_entropy(alpha: f64, gamma: Extended, d: usize) -> Self {
        Self {
            case: RateCase::CrossEntropy,
            alpha: Some(alpha),
            beta: None,
            q: None,
            gamma: Some(gamma),
            d,
        }
    }

    fn positive(name: &str, v: Option<f64>) -> Result<f64> {
        match v {
            Some(v) if v > 0.0 && v.is_finite() => Ok(v),
            Some(v) => input(format!("{name} must be positive and finite, got {v}")),
            None => input(format!("{name} is required for this case")),
        }
    }

    pub fn alpha(&self) -> Result<f64> {
        Self::positive("alpha", self.alpha)
    }

    pub fn beta(&self) -> Result<f64> {
        Self::positive("beta", self.beta)
    }

    pub fn q(&self) -> Result<Extended> {
        match self.q {
            Some(Extended::Finite(v)) if !(v >= 0.0) => input(format!("q must be ≥ 0, got {v}")),
            Some(q) => Ok(q),
            None => input("q is required for this case"),
        }
    }

    pub fn gamma(&self) -> Result<Extended> {
        match self.gamma {
            Some(Extended::Finite(v)) if !(v >= 1.0) => {
                input(format!("gamma must be ≥ 1, got {v}"))
            }
            Some(g) => Ok(g),
            None => input("gamma is required for this case"),
        }
    }

    fn dim(&self) -> Result<f64> {
        if self.d < 2 {
            return input(format!("input dimension must be ≥ 2, got {}", self.d));
        }
        Ok(self.d as f64)
    }

    /// Checks that every parameter the case needs is present and in range.
    pub fn validate(&self) -> Result<()> {
        rate_exponent(self).map(|_| ())
    }
}

/// `2L(S+1)·ln(δ⁻¹(L+1)(N+1)·max(B,1))`.
pub fn entropy_bound(
    depth: usize,
    width: usize,
    nonzeros: usize,
    param_bound: f64,
    delta: f64,
) -> Result<f64> {
    if !(delta > 0.0) {
        return input(format!("δ must be positive, got {delta}"));
    }
    if depth == 0 || width == 0 {
        return input("depth and width must be ≥ 1");
    }
    let l = depth as f64;
    let arg = (l + 1.0) * (width as f64 + 1.0) * param_bound.max(1.0) / delta;
    Ok(2.0 * l * (nonzeros as f64 + 1.0) * arg.ln())
}

/// Exponent of `log³n/n` (hinge cases) or of `n` (cross-entropy case).
pub fn rate_exponent(spec: &RateSpec) -> Result<f64> {
    let d = spec.dim()?;
    match spec.case {
        RateCase::SmoothBoundary => {
            let a = spec.alpha()?;
            Ok(match spec.q()? {
                Extended::Finite(q) => a * (q + 1.0) / (a * (q + 2.0) + (d - 1.0) * (q + 1.0)),
                Extended::Infinity => a / (a + d - 1.0),
            })
        }
        RateCase::SmoothEta => {
            let b = spec.beta()?;
            Ok(match spec.q()? {
                Extended::Finite(q) => b * (q + 1.0) / (b * (q + 2.0) + d),
                Extended::Infinity => 1.0,
            })
        }
        RateCase::Margin => {
            let a = spec.alpha()?;
            Ok(match (spec.q()?, spec.gamma()?) {
                (Extended::Finite(q), Extended::Finite(g)) => {
                    a * (q + 1.0) / (a * (q + 2.0) + (d - 1.0) * (q + 1.0) / g)
                }
                (Extended::Infinity, Extended::Finite(g)) => a / (a + (d - 1.0) / g),
                (Extended::Finite(q), Extended::Infinity) => (q + 1.0) / (q + 2.0),
                (Extended::Infinity, Extended::Infinity) => 1.0,
            })
        }
        RateCase::CrossEntropy => {
            let a = spec.alpha()?;
            Ok(match spec.gamma()? {
                Extended::Finite(g) => a / (a + (d - 1.0) / g),
                Extended::Infinity => 1.0,
            })
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MinimaxKind {
    /// Lower bound for classifiers with a smooth decision boundary.
    BoundaryLower,
    /// Lower bound for plug-in rules with a smooth conditional probability.
    EtaLower,
}

/// Minimax lower-bound exponent of `n`, reported next to achieved exponents.
pub fn minimax_exponent(which: MinimaxKind, spec: &RateSpec) -> Result<f64> {
    let d = spec.dim()?;
    let q = spec.q()?;
    match which {
        MinimaxKind::BoundaryLower => {
            let a = spec.alpha()?;
            Ok(match q {
                Extended::Finite(q) => a * (q + 1.0) / (a * (q + 2.0) + (d - 1.0) * q),
                Extended::Infinity => a / (a + d - 1.0),
            })
        }
        MinimaxKind::EtaLower => {
            let b = spec.beta()?;
            Ok(match q {
                Extended::Finite(q) => b * (q + 1.0) / (b * (q + 2.0) + d),
                Extended::Infinity => 1.0,
            })
        }
    }
}

/// Multipliers applied to the schedule's architecture sizes (all 1 by
/// default), plus an additive depth offset that is absorbed by `≲` as
/// `n → ∞` but keeps desk-scale networks deep enough to train.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScheduleConstants {
    pub depth: f64,
    pub depth_offset: usize,
    pub width: f64,
    pub nonzeros: f64,
    pub param_bound: f64,
}

impl Default for ScheduleConstants {
    fn default() -> Self {
        Self {
            depth: 1.0,
            depth_offset: 0,
            width: 1.0,
            nonzeros: 1.0,
            param_bound: 1.0,
        }
    }
}

/// Architecture class and target accuracy for a given sample size.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Schedule {
    pub n: u64,
    /// Gap `ξ_n` of the approximating classifier.
    pub xi: f64,
    /// Target excess risk `ε_n²`.
    pub epsilon_sq: f64,
    pub depth: usize,
    pub width: usize,
    pub nonzeros: usize,
    pub param_bound: f64,
    pub sup_bound: f64,
    pub exponent: f64,
}

/// Smallest admissible sup bound for the cross-entropy schedule.
pub const MIN_SUP_BOUND: f64 = 1.0;

pub fn architecture_schedule(spec: &RateSpec, n: u64) -> Result<Schedule> {
    architecture_schedule_with(spec, n, &ScheduleConstants::default())
}

pub fn architecture_schedule_with(
    spec: &RateSpec,
    n: u64,
    c: &ScheduleConstants,
) -> Result<Schedule> {
    if n < 2 {
        return input(format!("sample size must be ≥ 2, got {n}"));
    }
    let exponent = rate_exponent(spec)?;
    let d = spec.d as f64;
    let nf = n as f64;
    let ln = nf.ln();
    let (epsilon_sq, xi, sup_bound) = match spec.case {
        RateCase::SmoothBoundary => {
            let e = (ln.powi(3) / nf).powf(exponent);
            (e, e, 1.0)
        }
        RateCase::Margin => {
            let e = (ln.powi(3) / nf).powf(exponent);
            let xi = match spec.gamma()? {
                Extended::Finite(g) => e.powf(1.0 / g),
                Extended::Infinity => 1.0,
            };
            (e, xi, 1.0)
        }
        RateCase::SmoothEta => {
            let e = (ln.powi(3) / nf).powf(exponent);
            let xi = match spec.q()? {
                Extended::Finite(q) => e.powf(1.0 / (q + 1.0)),
                Extended::Infinity => 1.0,
            };
            (e, xi, 1.0)
        }
        RateCase::CrossEntropy => {
            let kappa = exponent;
            let e = nf.powf(-kappa) * ln.powf(3.0 * kappa + 1.0);
            let xi = match spec.gamma()? {
                Extended::Finite(g) => (nf.powf(-kappa) * ln.powf(3.0 * kappa)).powf(1.0 / g),
                Extended::Infinity => 1.0,
            };
            let f = kappa * (ln - 3.0 * ln.ln());
            (e, xi, f.max(MIN_SUP_BOUND))
        }
    };
    let log_inv = (1.0 / xi).ln().max(0.0);
    let width_exp = match spec.case {
        RateCase::SmoothEta => d / spec.beta()?,
        _ => (d - 1.0) / spec.alpha()?,
    };
    let ceil_at_least_one = |v: f64| (v.ceil() as usize).max(1);
    let width = ceil_at_least_one(c.width * xi.powf(-width_exp));
    Ok(Schedule {
        n,
        xi,
        epsilon_sq,
        depth: ceil_at_least_one(c.depth * log_inv) + c.depth_offset,
        width,
        nonzeros: ceil_at_least_one(c.nonzeros * width as f64 * log_inv),
        param_bound: (c.param_bound / xi).ceil().max(1.0),
        sup_bound,
        exponent,
    })
}

/// Loss family the variance bound refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VarianceLoss {
    Hinge,
    Logistic,
}

/// Parameters of the variance–excess-risk inequality
/// `E(ℓ_f − ℓ_{f*})² ≤ C·(F+1)^{2−ν}·excess^ν` (hinge) or `≤ C·F·excess` (logistic).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VarianceBoundParams {
    pub nu: f64,
    pub constant: f64,
    pub sup_bound: f64,
    pub loss: VarianceLoss,
}

impl VarianceBoundParams {
    pub fn hinge(q: Extended, constant: f64, sup_bound: f64) -> Self {
        Self {
            nu: q.ratio(),
            constant,
            sup_bound,
            loss: VarianceLoss::Hinge,
        }
    }

    pub fn logistic(constant: f64, sup_bound: f64) -> Self {
        Self {
            nu: 1.0,
            constant,
            sup_bound,
            loss: VarianceLoss::Logistic,
        }
    }
}

pub fn variance_bound_rhs(p: &VarianceBoundParams, excess: f64) -> f64 {
    let excess = excess.max(0.0);
    match p.loss {
        VarianceLoss::Hinge => {
            p.constant * (p.sup_bound + 1.0).powf(2.0 - p.nu) * excess.powf(p.nu)
        }
        VarianceLoss::Logistic => p.constant * p.sup_bound * excess,
    }
}

/// Hinge variance constant `(‖Δ⁻¹‖ + 1)·1(q > 0) + 1`, where the norm is the
/// weak-Lq norm of the inverse noise level.
pub fn hinge_variance_constant(weak_norm: f64, q: Extended) -> f64 {
    let active = match q {
        Extended::Finite(v) => v > 0.0,
        Extended::Infinity => true,
    };
    if active {
        weak_norm + 2.0
    } else {
        1.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use Extended::{Finite, Infinity};

    #[test]
    fn entropy_examples() {
        let v = entropy_bound(1, 1, 0, 1.0, 1.0).unwrap();
        assert!((v - 2.0 * 4f64.ln()).abs() < 1e-12);
        assert_eq!(
            entropy_bound(3, 4, 5, 0.5, 0.1).unwrap(),
            entropy_bound(3, 4, 5, 1.0, 0.1).unwrap()
        );
        assert!(
            entropy_bound(3, 4, 6, 1.0, 0.1).unwrap() > entropy_bound(3, 4, 5, 1.0, 0.1).unwrap()
        );
        assert!(entropy_bound(1, 1, 0, 1.0, 0.0).is_err());
    }

    #[test]
    fn exponent_examples() {
        let e = rate_exponent(&RateSpec::smooth_boundary(1.0, Finite(0.0), 2)).unwrap();
        assert!((e - 1.0 / 3.0).abs() < 1e-15);
        let k = rate_exponent(&RateSpec::cross_entropy(1.0, Finite(1.0), 2)).unwrap();
        assert!((k - 0.5).abs() < 1e-15);
        let m = rate_exponent(&RateSpec::margin(2.0, Finite(1.0), Infinity, 3)).unwrap();
        assert!((m - 2.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn missing_parameters_are_rejected() {
        let mut s = RateSpec::smooth_boundary(1.0, Finite(1.0), 2);
        s.alpha = None;
        assert!(rate_exponent(&s).is_err());
        let s = RateSpec {
            gamma: None,
            ..RateSpec::margin(1.0, Finite(1.0), Finite(2.0), 2)
        };
        assert!(rate_exponent(&s).is_err());
        assert!(rate_exponent(&RateSpec::smooth_boundary(1.0, Finite(1.0), 1)).is_err());
    }

    #[test]
    fn extended_serde() {
        let s = RateSpec::margin(1.0, Infinity, Finite(2.0), 3);
        let text = serde_json::to_string(&s).unwrap();
        assert!(text.contains("\"inf\""));
        assert_eq!(serde_json::from_str::<RateSpec>(&text).unwrap(), s);
    }

    #[test]
    fn minimax_boundary_at_zero_noise() {
        // at q = 0 the lower-bound exponent is 1/2 for every (α, d), while the
        // achieved exponent is α/(2α + d − 1); they agree only when d = 1
        for (a, d) in [(1.0, 2), (2.0, 3), (0.5, 5)] {
            let lower = minimax_exponent(
                MinimaxKind::BoundaryLower,
                &RateSpec::smooth_boundary(a, Finite(0.0), d),
            )
            .unwrap();
            assert!((lower - 0.5).abs() < 1e-15);
            let achieved = rate_exponent(&RateSpec::smooth_boundary(a, Finite(0.0), d)).unwrap();
            assert!((achieved - a / (2.0 * a + d as f64 - 1.0)).abs() < 1e-15);
        }
    }

    #[test]
    fn schedule_examples() {
        let s =
            architecture_schedule(&RateSpec::smooth_boundary(1.0, Finite(1.0), 2), 1000).unwrap();
        assert_eq!(s.sup_bound, 1.0);
        assert_eq!(s.xi, s.epsilon_sq);
        let e = std::f64::consts::E;
        let n = e.powf(e).round() as u64;
        let s = architecture_schedule(&RateSpec::cross_entropy(1.0, Finite(1.0), 2), n).unwrap();
        assert_eq!(s.sup_bound, MIN_SUP_BOUND);
    }

    #[test]
    fn variance_examples() {
        let p = VarianceBoundParams::hinge(Finite(1.0), 2.0, 1.0);
        assert!((variance_bound_rhs(&p, 0.25) - 2.0 * 2f64.sqrt()).abs() < 1e-12);
        assert_eq!(variance_bound_rhs(&p, 0.0), 0.0);
        let inf = VarianceBoundParams::hinge(Infinity, 1.0, 1.0);
        assert_eq!(inf.nu, 1.0);
        assert!((variance_bound_rhs(&inf, 0.3) - 2.0 * 0.3).abs() < 1e-15);
    }
}
