//! Rate study, hinge-vs-logistic comparison, condition-E histogram and
//! schedule tables.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::{mix_seed, Config, StudyTask};
use super::{fmt, Table};
use crate::approx::{build_piecewise_classifier, ClassifierSpec, HorizonSpec};
use crate::error::{input, Result};
use crate::learn::{erm_train, LossKind, TrainOutcome};
use crate::net::{ReluNetwork, Scratch};
use crate::synth::{excess_risk, logistic, monte_carlo, sign, SyntheticTask, TaskSpec};
use crate::theory::{
    architecture_schedule_with, Extended, RateCase, RateSpec, Schedule, ScheduleConstants,
};

/// Fit of `log median excess` against `log n` for one (task, method).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateFit {
    pub task: String,
    /// Loss name, or `constructive` for the built classifier.
    pub method: String,
    pub n: Vec<u64>,
    pub median_excess: Vec<f64>,
    pub min_seeds: usize,
    pub slope: f64,
    pub slope_se: f64,
    pub exponent: f64,
    /// `slope + exponent`; zero when the measured decay matches the theory.
    pub gap: f64,
    pub strictly_decreasing: bool,
    pub error: Option<String>,
}

#[derive(Debug, Clone)]
pub struct RateStudy {
    pub records: Table,
    pub fits: Table,
    pub traces: Table,
    pub fit_rows: Vec<RateFit>,
    pub notes: Vec<String>,
}

const RECORD_HEADER: &[&str] = &[
    "task",
    "case",
    "n",
    "seed",
    "loss",
    "xi",
    "budget_depth",
    "budget_width",
    "budget_nnz",
    "budget_abs",
    "budget_sup",
    "capped",
    "excess_01",
    "se_01",
    "excess_hinge",
    "se_hinge",
    "hinge_form",
    "depth",
    "max_width",
    "nnz",
    "max_abs",
    "reverted",
    "error",
];

/// Outcome of one study cell.
struct Cell {
    task: String,
    case: RateCase,
    n: u64,
    seed: u64,
    method: String,
    schedule: Option<Schedule>,
    capped: bool,
    budget: Option<crate::net::ArchBudget>,
    result: Result<(crate::synth::RiskReport, ReluNetwork, Option<TrainOutcome>)>,
}

impl Cell {
    fn row(&self) -> Vec<String> {
        let opt = |v: Option<String>| v.unwrap_or_default();
        let b = self.budget;
        let mut row = vec![
            self.task.clone(),
            self.case.as_str().to_string(),
            self.n.to_string(),
            self.seed.to_string(),
            self.method.clone(),
            opt(self.schedule.map(|s| fmt(s.xi))),
            opt(b.map(|b| b.max_depth.to_string())),
            opt(b.map(|b| b.max_width.to_string())),
            opt(b.map(|b| b.max_nnz.to_string())),
            opt(b.map(|b| fmt(b.max_abs))),
            opt(b.map(|b| fmt(b.max_sup))),
            self.capped.to_string(),
        ];
        match &self.result {
            Ok((r, net, train)) => {
                row.extend([
                    fmt(r.excess_01.mean),
                    fmt(r.excess_01.se),
                    fmt(r.excess_hinge.mean),
                    fmt(r.excess_hinge.se),
                    format!("{:?}", r.hinge_form).to_lowercase(),
                    net.depth().to_string(),
                    net.hidden_widths()
                        .into_iter()
                        .max()
                        .unwrap_or(0)
                        .to_string(),
                    net.nnz().to_string(),
                    fmt(net.max_abs_param()),
                    train
                        .as_ref()
                        .map(|t| t.reverted.to_string())
                        .unwrap_or_default(),
                    String::new(),
                ]);
            }
            Err(e) => {
                row.extend(std::iter::repeat_n(String::new(), 10));
                row.push(e.to_string());
            }
        }
        row
    }

    fn excess(&self) -> Option<f64> {
        self.result.as_ref().ok().map(|(r, _, _)| r.excess_01.mean)
    }
}

fn train_cell(cfg: &Config, study: &StudyTask, task: &SyntheticTask, n: u64, seed: u64) -> Cell {
    let mut cell = Cell {
        task: study.name.clone(),
        case: study.spec.case,
        n,
        seed,
        method: study.loss.as_str().into(),
        schedule: None,
        capped: false,
        budget: None,
        result: Err(crate::Error::Input("not run".into())),
    };
    let schedule = match architecture_schedule_with(&study.spec, n, &cfg.constants) {
        Ok(s) => s,
        Err(e) => {
            cell.result = Err(e);
            return cell;
        }
    };
    let sup = if study.loss == LossKind::Hinge {
        1.0
    } else {
        schedule.sup_bound
    };
    let (budget, capped) = cfg.budget(&schedule, sup);
    cell.schedule = Some(schedule);
    cell.capped = capped;
    cell.budget = Some(budget);
    let data = task.sample(mix_seed(&[cfg.seed, 10, n, seed]), n as usize);
    let train = cfg.train_config(budget, mix_seed(&[cfg.seed, 11, n, seed]));
    cell.result = erm_train(&data, study.loss, &train).and_then(|out| {
        let risk = excess_risk(task, &out.net, cfg.n_mc, mix_seed(&[cfg.seed, 12, n, seed]))?;
        Ok((risk, out.net.clone(), Some(out)))
    });
    cell
}

/// The built classifier `x₁ ≥ g(x₂, …)` at the scheduled gap.
fn constructive_cell(
    cfg: &Config,
    study: &StudyTask,
    task: &SyntheticTask,
    n: u64,
) -> Option<Cell> {
    let (boundary, alpha) = match &study.task {
        TaskSpec::SmoothBoundary {
            boundary, alpha, ..
        }
        | TaskSpec::Margin {
            boundary, alpha, ..
        } => (boundary.clone(), *alpha),
        _ => return None,
    };
    let mut cell = Cell {
        task: study.name.clone(),
        case: study.spec.case,
        n,
        seed: 0,
        method: "constructive".into(),
        schedule: None,
        capped: false,
        budget: None,
        result: Err(crate::Error::Input("not run".into())),
    };
    cell.result = architecture_schedule_with(&study.spec, n, &cfg.constants).and_then(|s| {
        cell.schedule = Some(s);
        let spec = ClassifierSpec::single(HorizonSpec::fitted(0, boundary, alpha)?);
        let net = build_piecewise_classifier(&spec, s.xi.min(0.5))?;
        let risk = excess_risk(task, &net, cfg.n_mc, mix_seed(&[cfg.seed, 13, n]))?;
        Ok((risk, net, None))
    });
    Some(cell)
}

fn median(v: &mut [f64]) -> f64 {
    v.sort_by(f64::total_cmp);
    let k = v.len();
    if k % 2 == 1 {
        v[k / 2]
    } else {
        0.5 * (v[k / 2 - 1] + v[k / 2])
    }
}

fn fit_rates(
    task: &str,
    method: &str,
    spec: &RateSpec,
    cells: &[&Cell],
    n_grid: &[u64],
    min_seeds_needed: usize,
) -> RateFit {
    let exponent = crate::theory::rate_exponent(spec).unwrap_or(f64::NAN);
    let mut ns = Vec::new();
    let mut medians = Vec::new();
    let mut min_seeds = usize::MAX;
    for &n in n_grid {
        let mut v: Vec<f64> = cells
            .iter()
            .filter(|c| c.n == n)
            .filter_map(|c| c.excess())
            .collect();
        min_seeds = min_seeds.min(v.len());
        if !v.is_empty() {
            ns.push(n);
            medians.push(median(&mut v));
        }
    }
    let mut fit = RateFit {
        task: task.into(),
        method: method.into(),
        strictly_decreasing: medians.windows(2).all(|w| w[1] < w[0]) && ns.len() == n_grid.len(),
        n: ns,
        median_excess: medians,
        min_seeds: if min_seeds == usize::MAX {
            0
        } else {
            min_seeds
        },
        slope: f64::NAN,
        slope_se: f64::NAN,
        exponent,
        gap: f64::NAN,
        error: None,
    };
    if fit.n.len() < 4 || fit.min_seeds < min_seeds_needed {
        fit.error = Some(format!(
            "need ≥ 4 sample sizes with ≥ {min_seeds_needed} successful seeds each"
        ));
        return fit;
    }
    if fit.median_excess.iter().any(|&m| !(m > 0.0)) {
        fit.error = Some("zero median excess; log-log fit undefined".into());
        return fit;
    }
    let xs: Vec<f64> = fit.n.iter().map(|&n| (n as f64).ln()).collect();
    let ys: Vec<f64> = fit.median_excess.iter().map(|m| m.ln()).collect();
    let (slope, se) = crate::synth::least_squares_slope(&xs, &ys);
    fit.slope = slope;
    fit.slope_se = se;
    fit.gap = slope + exponent;
    fit
}

pub fn run_rate_study(cfg: &Config, threads: &rayon::ThreadPool) -> Result<RateStudy> {
    let rs = &cfg.rate_study;
    if rs.n_grid.is_empty() || rs.seeds.is_empty() || rs.tasks.is_empty() {
        return input("rate study needs tasks, an n grid and seeds");
    }
    let tasks: Vec<SyntheticTask> = rs
        .tasks
        .iter()
        .map(|t| t.task.build())
        .collect::<Result<_>>()?;
    // cell index order: task, n, seed
    let jobs: Vec<(usize, u64, u64)> = (0..tasks.len())
        .flat_map(|t| {
            rs.n_grid
                .iter()
                .flat_map(move |&n| rs.seeds.iter().map(move |&s| (t, n, s)))
        })
        .collect();
    let trained: Vec<Cell> = threads.install(|| {
        jobs.par_iter()
            .map(|&(t, n, s)| train_cell(cfg, &rs.tasks[t], &tasks[t], n, s))
            .collect()
    });
    let built: Vec<Cell> = if rs.constructive_baseline {
        let jobs: Vec<(usize, u64)> = (0..tasks.len())
            .flat_map(|t| rs.n_grid.iter().map(move |&n| (t, n)))
            .collect();
        threads.install(|| {
            jobs.par_iter()
                .filter_map(|&(t, n)| constructive_cell(cfg, &rs.tasks[t], &tasks[t], n))
                .collect()
        })
    } else {
        Vec::new()
    };

    let mut records = Table::new("rate_records", RECORD_HEADER);
    let mut traces = Table::new(
        "traces",
        &[
            "task",
            "n",
            "seed",
            "loss",
            "epoch",
            "train_phi_risk",
            "nnz",
            "max_abs",
        ],
    );
    let mut notes = Vec::new();
    for c in trained.iter().chain(&built) {
        records.push(c.row());
        if c.capped {
            notes.push(format!(
                "{} n={} seed={}: schedule capped by ceilings",
                c.task, c.n, c.seed
            ));
        }
        if let Err(e) = &c.result {
            notes.push(format!(
                "{} n={} seed={} {}: failed: {e}",
                c.task, c.n, c.seed, c.method
            ));
        }
        if let Ok((_, _, Some(t))) = &c.result {
            for r in &t.trace {
                traces.push(vec![
                    c.task.clone(),
                    c.n.to_string(),
                    c.seed.to_string(),
                    c.method.clone(),
                    r.epoch.to_string(),
                    fmt(r.train_phi_risk),
                    r.nnz.to_string(),
                    fmt(r.max_abs),
                ]);
            }
        }
    }

    let mut fit_rows = Vec::new();
    for st in &rs.tasks {
        let mine: Vec<&Cell> = trained.iter().filter(|c| c.task == st.name).collect();
        fit_rows.push(fit_rates(
            &st.name,
            st.loss.as_str(),
            &st.spec,
            &mine,
            &rs.n_grid,
            3,
        ));
        let base: Vec<&Cell> = built.iter().filter(|c| c.task == st.name).collect();
        if !base.is_empty() {
            fit_rows.push(fit_rates(
                &st.name,
                "constructive",
                &st.spec,
                &base,
                &rs.n_grid,
                1,
            ));
        }
    }
    let mut fits = Table::new(
        "rate_fit",
        &[
            "task",
            "loss",
            "n_values",
            "min_seeds",
            "median_excess",
            "slope",
            "slope_se",
            "exponent",
            "gap",
            "strictly_decreasing",
            "error",
        ],
    );
    for f in &fit_rows {
        fits.push(vec![
            f.task.clone(),
            f.method.clone(),
            f.n.len().to_string(),
            f.min_seeds.to_string(),
            f.median_excess
                .iter()
                .map(|m| fmt(*m))
                .collect::<Vec<_>>()
                .join(";"),
            fmt(f.slope),
            fmt(f.slope_se),
            fmt(f.exponent),
            fmt(f.gap),
            f.strictly_decreasing.to_string(),
            f.error.clone().unwrap_or_default(),
        ]);
    }
    Ok(RateStudy {
        records,
        fits,
        traces,
        fit_rows,
        notes,
    })
}

/// Mean accuracy over seeds for one (n, loss).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AccuracyRow {
    pub n_per_class: usize,
    pub loss: LossKind,
    pub mean: f64,
    pub se: f64,
    pub seeds: usize,
}

#[derive(Debug, Clone)]
pub struct LossCompare {
    pub table: Table,
    pub rows: Vec<AccuracyRow>,
    pub notes: Vec<String>,
}

/// Class-balanced training set: `n` draws from each class-conditional law.
pub fn balanced_sample(
    task: &SyntheticTask,
    n_per_class: usize,
    seed: u64,
) -> Result<crate::data::Dataset> {
    let pos = task.sample_class(mix_seed(&[seed, 1]), n_per_class, 1.0);
    let neg = task.sample_class(mix_seed(&[seed, 2]), n_per_class, -1.0);
    pos.join(&neg)
}

/// Accuracy `P(sign f(X) = Y)` in the conditional form
/// `E[η·1(sign f = 1) + (1 − η)·1(sign f = −1)]`.
pub fn test_accuracy(
    task: &SyntheticTask,
    net: &ReluNetwork,
    n: usize,
    seed: u64,
) -> crate::synth::Estimate {
    monte_carlo(task, n, seed, |x, _| {
        let mut s = Scratch::default();
        let eta = task.eta(x);
        if sign(net.forward_scalar(x, &mut s)) > 0.0 {
            eta
        } else {
            1.0 - eta
        }
    })
}

/// Budget for a loss-compare / histogram run at total sample size `n`.
fn comparison_budget(
    cfg: &Config,
    spec: &RateSpec,
    n: usize,
    loss: LossKind,
    sup: Option<f64>,
) -> Result<crate::net::ArchBudget> {
    let s = architecture_schedule_with(spec, n as u64, &cfg.constants)?;
    let f = match loss {
        LossKind::Hinge => 1.0,
        LossKind::Logistic => sup.unwrap_or(s.sup_bound),
    };
    Ok(cfg.budget(&s, f).0)
}

pub fn run_loss_compare(cfg: &Config, threads: &rayon::ThreadPool) -> Result<LossCompare> {
    let lc = &cfg.loss_compare;
    let task = lc.task.build()?;
    let losses = [LossKind::Hinge, LossKind::Logistic];
    let jobs: Vec<(usize, usize, u64)> = lc
        .n_per_class
        .iter()
        .flat_map(|&n| {
            (0..losses.len()).flat_map(move |l| lc.seeds.iter().map(move |&s| (n, l, s)))
        })
        .collect();
    let results: Vec<Result<f64>> = threads.install(|| {
        jobs.par_iter()
            .map(|&(n, l, seed)| {
                let loss = losses[l];
                let budget = comparison_budget(cfg, &lc.spec, 2 * n, loss, lc.sup_bound)?;
                let data = balanced_sample(&task, n, mix_seed(&[cfg.seed, 20, n as u64, seed]))?;
                let train =
                    cfg.train_config(budget, mix_seed(&[cfg.seed, 21, n as u64, seed, l as u64]));
                let out = erm_train(&data, loss, &train)?;
                Ok(test_accuracy(
                    &task,
                    &out.net,
                    lc.n_test,
                    mix_seed(&[cfg.seed, 22, n as u64, seed]),
                )
                .mean)
            })
            .collect()
    });
    let mut table = Table::new(
        "loss_compare",
        &["task", "n", "loss", "mean_acc", "se_acc", "seeds"],
    );
    let mut rows = Vec::new();
    let mut notes = Vec::new();
    for &n in &lc.n_per_class {
        for (l, &loss) in losses.iter().enumerate() {
            let mut acc = Vec::new();
            for ((jn, jl, seed), r) in jobs.iter().zip(&results) {
                if *jn == n && *jl == l {
                    match r {
                        Ok(a) => acc.push(*a),
                        Err(e) => notes.push(format!(
                            "n={n} loss={} seed={seed}: failed: {e}",
                            loss.as_str()
                        )),
                    }
                }
            }
            let k = acc.len() as f64;
            let mean = acc.iter().sum::<f64>() / k;
            let se = if acc.len() > 1 {
                (acc.iter().map(|a| (a - mean).powi(2)).sum::<f64>() / (k - 1.0) / k).sqrt()
            } else {
                f64::NAN
            };
            rows.push(AccuracyRow {
                n_per_class: n,
                loss,
                mean,
                se,
                seeds: acc.len(),
            });
            table.push(vec![
                lc.name.clone(),
                n.to_string(),
                loss.as_str().into(),
                fmt(mean),
                fmt(se),
                acc.len().to_string(),
            ]);
        }
    }
    Ok(LossCompare { table, rows, notes })
}

#[derive(Debug, Clone)]
pub struct CondEHist {
    pub table: Table,
    pub count_pos: Vec<usize>,
    pub count_neg: Vec<usize>,
    /// Fraction of samples in the lowest and highest bins.
    pub extreme_mass: f64,
}

pub fn run_cond_e_hist(cfg: &Config) -> Result<CondEHist> {
    let h = &cfg.cond_e_hist;
    let task = h.task.build()?;
    let budget = comparison_budget(
        cfg,
        &h.spec,
        2 * h.n_per_class,
        LossKind::Logistic,
        h.sup_bound,
    )?;
    let data = balanced_sample(&task, h.n_per_class, mix_seed(&[cfg.seed, 30]))?;
    let out = erm_train(
        &data,
        LossKind::Logistic,
        &cfg.train_config(budget, mix_seed(&[cfg.seed, 31])),
    )?;
    let fresh = task.sample(mix_seed(&[cfg.seed, 32]), h.n_samples);
    let mut count_pos = vec![0usize; h.bins];
    let mut count_neg = vec![0usize; h.bins];
    let mut s = Scratch::default();
    for (x, y) in fresh.iter() {
        let p = logistic(out.net.forward_scalar(x, &mut s));
        let bin = ((p * h.bins as f64) as usize).min(h.bins - 1);
        if y > 0.0 {
            count_pos[bin] += 1;
        } else {
            count_neg[bin] += 1;
        }
    }
    let mut table = Table::new(
        "cond_e_hist",
        &["bin_lo", "bin_hi", "count_pos", "count_neg", "count"],
    );
    for b in 0..h.bins {
        table.push(vec![
            fmt(b as f64 / h.bins as f64),
            fmt((b + 1) as f64 / h.bins as f64),
            count_pos[b].to_string(),
            count_neg[b].to_string(),
            (count_pos[b] + count_neg[b]).to_string(),
        ]);
    }
    let total = h.n_samples.max(1) as f64;
    let last = h.bins - 1;
    let extreme = if last == 0 {
        count_pos[0] + count_neg[0]
    } else {
        count_pos[0] + count_neg[0] + count_pos[last] + count_neg[last]
    };
    Ok(CondEHist {
        table,
        count_pos,
        count_neg,
        extreme_mass: extreme as f64 / total,
    })
}

/// Rate exponent written in the shared form `a / (a·(1 + 1/(q+1)) + k/γ)`,
/// kept separate from the theory module so the table can be cross-checked.
pub fn table_exponent(spec: &RateSpec) -> Result<f64> {
    spec.validate()?;
    let d = spec.d as f64;
    let inv = |e: Extended| match e {
        Extended::Finite(v) => 1.0 / v,
        Extended::Infinity => 0.0,
    };
    let noise = |q: Extended| match q {
        Extended::Finite(v) => 1.0 / (v + 1.0),
        Extended::Infinity => 0.0,
    };
    Ok(match spec.case {
        RateCase::SmoothBoundary => {
            let a = spec.alpha()?;
            a / (a * (1.0 + noise(spec.q()?)) + (d - 1.0))
        }
        RateCase::SmoothEta => {
            let b = spec.beta()?;
            // β(q+1)/(β(q+2)+d) with numerator and denominator divided by q+1
            let nu = noise(spec.q()?);
            b / (b * (1.0 + nu) + d * nu)
        }
        RateCase::Margin => {
            let a = spec.alpha()?;
            a / (a * (1.0 + noise(spec.q()?)) + (d - 1.0) * inv(spec.gamma()?))
        }
        RateCase::CrossEntropy => {
            let a = spec.alpha()?;
            a / (a + (d - 1.0) * inv(spec.gamma()?))
        }
    })
}

pub fn schedule_table(
    spec: &RateSpec,
    n_grid: &[u64],
    constants: &ScheduleConstants,
) -> Result<Table> {
    let exponent = table_exponent(spec)?;
    let mut table = Table::new(
        "schedule",
        &["n", "xi", "eps_sq", "L", "N", "S", "B", "F", "exponent"],
    );
    for &n in n_grid {
        let s = architecture_schedule_with(spec, n, constants)?;
        table.push(vec![
            n.to_string(),
            fmt(s.xi),
            fmt(s.epsilon_sq),
            s.depth.to_string(),
            s.width.to_string(),
            s.nonzeros.to_string(),
            fmt(s.param_bound),
            fmt(s.sup_bound),
            fmt(exponent),
        ]);
    }
    Ok(table)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn table_exponent_agrees_with_theory() {
        let specs = [
            RateSpec::smooth_boundary(1.0, Extended::Finite(1.0), 2),
            RateSpec::smooth_boundary(2.5, Extended::Infinity, 4),
            RateSpec::smooth_eta(1.5, Extended::Finite(0.5), 3),
            RateSpec::smooth_eta(1.5, Extended::Infinity, 3),
            RateSpec::margin(1.0, Extended::Finite(2.0), Extended::Finite(3.0), 2),
            RateSpec::margin(2.0, Extended::Infinity, Extended::Infinity, 3),
            RateSpec::cross_entropy(1.0, Extended::Finite(2.0), 2),
        ];
        for s in specs {
            let a = table_exponent(&s).unwrap();
            let b = crate::theory::rate_exponent(&s).unwrap();
            assert!((a - b).abs() <= 1e-12, "{s:?}: {a} vs {b}");
        }
    }

    #[test]
    fn case_one_table_has_unit_sup_and_monotone_depth() {
        let spec = RateSpec::smooth_boundary(1.0, Extended::Finite(1.0), 2);
        let grid: Vec<u64> = (9..=20).map(|k| 1 << k).collect();
        let t = schedule_table(&spec, &grid, &ScheduleConstants::default()).unwrap();
        let f = t.column("F").unwrap();
        let l = t.column("L").unwrap();
        assert!(t.rows.iter().all(|r| r[f] == "1"));
        let depths: Vec<usize> = t.rows.iter().map(|r| r[l].parse().unwrap()).collect();
        assert!(depths.windows(2).all(|w| w[0] <= w[1]));
        let e: f64 = t.rows[0][t.column("exponent").unwrap()].parse().unwrap();
        assert!((e - 0.4).abs() < 1e-12);
    }

    #[test]
    fn median_of_even_and_odd() {
        assert_eq!(median(&mut [3.0, 1.0, 2.0]), 2.0);
        assert_eq!(median(&mut [4.0, 1.0, 2.0, 3.0]), 2.5);
    }
}
