//! Hinge-loss ERM over a budgeted sparse ReLU class, with the budget taken
//! from the architecture schedule.

use dnnclass::harness::Config;
use dnnclass::learn::{erm_train, zero_one_error, LossKind};
use dnnclass::synth::{excess_risk, make_smooth_boundary_task};
use dnnclass::theory::{architecture_schedule_with, Extended, RateSpec};
use dnnclass::Polynomial;

fn main() -> dnnclass::Result<()> {
    let cfg = Config::default();
    let g = Polynomial::from_terms(1, &[(0.4, &[0]), (0.5, &[2])])?;
    let task = make_smooth_boundary_task(2, 1.0, Extended::Finite(1.0), g, 0.2)?;
    let spec = RateSpec::smooth_boundary(1.0, Extended::Finite(1.0), 2);
    for n in [500u64, 4_000] {
        let schedule = architecture_schedule_with(&spec, n, &cfg.constants)?;
        let (budget, _) = cfg.budget(&schedule, 1.0);
        let data = task.sample(n, n as usize);
        let out = erm_train(&data, LossKind::Hinge, &cfg.train_config(budget, 7))?;
        let risk = excess_risk(&task, &out.net, 200_000, 8)?;
        println!(
            "n = {n}: budget {budget:?}\n  train hinge {:.4} → {:.4}, train error {:.4}, excess 0-1 {:.5} ± {:.5}, nnz {}",
            out.initial_risk,
            out.final_risk,
            zero_one_error(&out.net, &data)?,
            risk.excess_01.mean,
            risk.excess_01.se,
            out.net.nnz()
        );
    }
    Ok(())
}
