//! Run configuration: a TOML file layered over built-in defaults.

use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::learn::{LossKind, TrainConfig};
use crate::net::ArchBudget;
use crate::poly::Polynomial;
use crate::synth::TaskSpec;
use crate::theory::{Extended, RateSpec, Schedule, ScheduleConstants};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Config {
    /// Base seed; every cell seed is derived from it.
    pub seed: u64,
    /// Monte Carlo sample size for excess-risk estimates.
    pub n_mc: usize,
    pub ceilings: Ceilings,
    pub train: TrainSettings,
    /// Keys omitted from a `[constants]` table keep the desk-scale defaults.
    #[serde(deserialize_with = "desk_constants")]
    pub constants: ScheduleConstants,
    pub verify: VerifySettings,
    pub rate_study: RateStudySettings,
    pub loss_compare: LossCompareSettings,
    pub cond_e_hist: CondEHistSettings,
    pub schedule: ScheduleSettings,
}

/// Desk-scale caps on scheduled architectures.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Ceilings {
    pub max_depth: usize,
    pub max_width: usize,
    pub max_nnz: usize,
    pub max_epochs: usize,
    pub max_abs: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainSettings {
    pub epochs: usize,
    pub learning_rate: f64,
    pub final_rate_fraction: f64,
    pub batch_size: usize,
    pub prune_every: usize,
    pub init_scale: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct VerifySettings {
    /// Safe-region points per exactness case.
    pub exactness_points: usize,
    /// Random compositions checked against nested evaluation.
    pub compositions: usize,
    /// Monte Carlo samples for statistical checks.
    pub mc_samples: usize,
    /// Random networks per inequality suite.
    pub random_nets: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StudyTask {
    pub name: String,
    pub spec: RateSpec,
    pub task: TaskSpec,
    #[serde(default = "default_loss")]
    pub loss: LossKind,
}

fn default_loss() -> LossKind {
    LossKind::Hinge
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RateStudySettings {
    pub tasks: Vec<StudyTask>,
    pub n_grid: Vec<u64>,
    pub seeds: Vec<u64>,
    /// Also measure the constructive classifier at the scheduled gap.
    pub constructive_baseline: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LossCompareSettings {
    pub name: String,
    pub task: TaskSpec,
    /// Rate specification whose schedule sizes the networks.
    pub spec: RateSpec,
    pub n_per_class: Vec<usize>,
    pub seeds: Vec<u64>,
    /// Monte Carlo points for test accuracy.
    pub n_test: usize,
    /// Overrides the scheduled sup bound of the logistic runs.
    pub sup_bound: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CondEHistSettings {
    pub name: String,
    pub task: TaskSpec,
    pub spec: RateSpec,
    pub n_per_class: usize,
    pub n_samples: usize,
    pub bins: usize,
    /// Overrides the scheduled sup bound.
    pub sup_bound: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScheduleSettings {
    pub spec: RateSpec,
    pub n_grid: Vec<u64>,
}

/// Schedule multipliers sized for single-machine runs.
pub const DESK_CONSTANTS: ScheduleConstants = ScheduleConstants {
    depth: 1.0,
    depth_offset: 2,
    width: 8.0,
    nonzeros: 40.0,
    param_bound: 10.0,
};

fn desk_constants<'de, D: serde::Deserializer<'de>>(
    de: D,
) -> std::result::Result<ScheduleConstants, D::Error> {
    #[derive(Deserialize)]
    #[serde(deny_unknown_fields)]
    struct Partial {
        depth: Option<f64>,
        depth_offset: Option<usize>,
        width: Option<f64>,
        nonzeros: Option<f64>,
        param_bound: Option<f64>,
    }
    let p = Partial::deserialize(de)?;
    let d = DESK_CONSTANTS;
    Ok(ScheduleConstants {
        depth: p.depth.unwrap_or(d.depth),
        depth_offset: p.depth_offset.unwrap_or(d.depth_offset),
        width: p.width.unwrap_or(d.width),
        nonzeros: p.nonzeros.unwrap_or(d.nonzeros),
        param_bound: p.param_bound.unwrap_or(d.param_bound),
    })
}

impl Default for Ceilings {
    fn default() -> Self {
        Self {
            max_depth: 12,
            max_width: 512,
            max_nnz: 100_000,
            max_epochs: 2000,
            max_abs: 1e4,
        }
    }
}

impl Default for TrainSettings {
    fn default() -> Self {
        Self {
            epochs: 300,
            learning_rate: 0.02,
            final_rate_fraction: 0.01,
            batch_size: 32,
            prune_every: 10,
            init_scale: 6f64.sqrt(),
        }
    }
}

impl Default for VerifySettings {
    fn default() -> Self {
        Self {
            exactness_points: 20_000,
            compositions: 100,
            mc_samples: 100_000,
            random_nets: 10,
        }
    }
}

/// Quadratic boundary `x₁ = 0.4 + 0.5·x₂²` with a linear noise ramp.
pub fn default_study_task() -> StudyTask {
    StudyTask {
        name: "quadratic-q1".into(),
        spec: RateSpec::smooth_boundary(1.0, Extended::Finite(1.0), 2),
        task: TaskSpec::SmoothBoundary {
            d: 2,
            alpha: 1.0,
            q: Extended::Finite(1.0),
            boundary: Polynomial::from_terms(1, &[(0.4, &[0]), (0.5, &[2])])
                .expect("valid polynomial"),
            noise_width: 0.2,
        },
        loss: LossKind::Hinge,
    }
}

fn extreme_task() -> TaskSpec {
    TaskSpec::ExtremeEta {
        d: 2,
        logit: 99f64.ln(),
        lambda: 0.05,
    }
}

fn extreme_spec() -> RateSpec {
    RateSpec::cross_entropy(1.0, Extended::Finite(2.0), 2)
}

impl Default for RateStudySettings {
    fn default() -> Self {
        Self {
            tasks: vec![default_study_task()],
            n_grid: vec![512, 1024, 2048, 4096, 8192],
            seeds: vec![1, 2, 3],
            constructive_baseline: true,
        }
    }
}

impl Default for LossCompareSettings {
    fn default() -> Self {
        Self {
            name: "extreme-eta".into(),
            task: extreme_task(),
            spec: extreme_spec(),
            n_per_class: vec![100, 1000, 5000],
            seeds: vec![1, 2, 3, 4, 5],
            n_test: 200_000,
            sup_bound: None,
        }
    }
}

impl Default for CondEHistSettings {
    fn default() -> Self {
        Self {
            name: "extreme-eta".into(),
            task: extreme_task(),
            spec: extreme_spec(),
            n_per_class: 2000,
            n_samples: 20_000,
            bins: 10,
            sup_bound: Some(6.0),
        }
    }
}

impl Default for ScheduleSettings {
    fn default() -> Self {
        Self {
            spec: RateSpec::smooth_boundary(1.0, Extended::Finite(1.0), 2),
            n_grid: (9..=20).map(|k| 1u64 << k).collect(),
        }
    }
}

impl Default for Config {
    fn default() -> Self {
        Self {
            seed: 1,
            n_mc: 200_000,
            ceilings: Ceilings::default(),
            train: TrainSettings::default(),
            constants: DESK_CONSTANTS,
            verify: VerifySettings::default(),
            rate_study: RateStudySettings::default(),
            loss_compare: LossCompareSettings::default(),
            cond_e_hist: CondEHistSettings::default(),
            schedule: ScheduleSettings::default(),
        }
    }
}

impl Config {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: Config = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_toml(&text)
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::Config(m.to_string()));
        if self.n_mc < crate::synth::MIN_MC_SAMPLES {
            return bad("n_mc must be at least 10000");
        }
        for t in &self.rate_study.tasks {
            t.spec
                .validate()
                .map_err(|e| Error::Config(format!("task {}: {e}", t.name)))?;
        }
        self.loss_compare
            .spec
            .validate()
            .map_err(|e| Error::Config(format!("loss_compare: {e}")))?;
        self.cond_e_hist
            .spec
            .validate()
            .map_err(|e| Error::Config(format!("cond_e_hist: {e}")))?;
        self.schedule
            .spec
            .validate()
            .map_err(|e| Error::Config(format!("schedule: {e}")))?;
        if self.cond_e_hist.bins == 0 {
            return bad("cond_e_hist.bins must be positive");
        }
        if self.loss_compare.n_test < crate::synth::MIN_MC_SAMPLES {
            return bad("loss_compare.n_test must be at least 10000");
        }
        Ok(())
    }

    /// SHA-256 of the canonical JSON form of the resolved configuration.
    pub fn hash(&self) -> String {
        let canonical = serde_json::to_string(self).expect("config serializes");
        let digest = Sha256::digest(canonical.as_bytes());
        digest.iter().map(|b| format!("{b:02x}")).collect()
    }

    /// Budget for a scheduled architecture, capped by the ceilings. The
    /// parameter bound is raised to `2F` when needed by the output clamp.
    pub fn budget(&self, s: &Schedule, sup_bound: f64) -> (ArchBudget, bool) {
        let c = &self.ceilings;
        let capped = s.depth > c.max_depth
            || s.width > c.max_width
            || s.nonzeros > c.max_nnz
            || s.param_bound > c.max_abs;
        let budget = ArchBudget {
            max_depth: s.depth.min(c.max_depth),
            max_width: s.width.min(c.max_width),
            max_nnz: s.nonzeros.min(c.max_nnz),
            max_abs: s.param_bound.min(c.max_abs).max(2.0 * sup_bound).max(1.0),
            max_sup: sup_bound,
        };
        (budget, capped)
    }

    pub fn train_config(&self, budget: ArchBudget, seed: u64) -> TrainConfig {
        let t = &self.train;
        TrainConfig {
            budget,
            epochs: t.epochs.min(self.ceilings.max_epochs),
            learning_rate: t.learning_rate,
            final_rate_fraction: t.final_rate_fraction,
            batch_size: t.batch_size,
            prune_every: t.prune_every,
            seed,
            init_scale: t.init_scale,
        }
    }
}

/// SplitMix64 finaliser, used to derive independent cell seeds.
pub fn mix_seed(parts: &[u64]) -> u64 {
    let mut h: u64 = 0x9e37_79b9_7f4a_7c15;
    for &p in parts {
        let mut z = h ^ p.wrapping_add(0x9e37_79b9_7f4a_7c15);
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
        h = z ^ (z >> 31);
    }
    h
}
