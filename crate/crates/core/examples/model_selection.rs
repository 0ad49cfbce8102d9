//! Data-split model selection over schedules built from guessed rate
//! specifications.

use dnnclass::harness::Config;
use dnnclass::learn::{model_select, Candidate, LossKind};
use dnnclass::net::ReluNetwork;
use dnnclass::synth::make_smooth_boundary_task;
use dnnclass::theory::{Extended, RateSpec};
use dnnclass::Polynomial;

fn main() -> dnnclass::Result<()> {
    let cfg = Config::default();
    let g = Polynomial::from_terms(1, &[(0.4, &[0]), (0.5, &[2])])?;
    let task = make_smooth_boundary_task(2, 1.0, Extended::Finite(1.0), g, 0.2)?;
    let data = task.sample(1, 3_000);
    let n_train = 1_500;
    let ceiling = cfg
        .budget(
            &dnnclass::theory::architecture_schedule_with(
                &RateSpec::smooth_boundary(1.0, Extended::Finite(1.0), 2),
                1 << 20,
                &cfg.constants,
            )?,
            1.0,
        )
        .0;
    let base = cfg.train_config(ceiling, 5);
    let mut candidates = Vec::new();
    for (name, q) in [("q=0.5", 0.5), ("q=1", 1.0), ("q=4", 4.0)] {
        let guess = RateSpec::smooth_boundary(1.0, Extended::Finite(q), 2);
        candidates.push(Candidate::from_rate_guess(
            name,
            &guess,
            n_train,
            &cfg.constants,
            &ceiling,
            &base,
            LossKind::Hinge,
        )?);
    }
    candidates.push(Candidate::Fixed {
        name: "constant +1".into(),
        net: ReluNetwork::constant(2, 1.0),
    });
    let (_, report) = model_select(&candidates, &data, 0.5)?;
    for row in &report.rows {
        println!(
            "{:<12} validation error {:.4}  nnz {}",
            row.name, row.validation_error, row.nnz
        );
    }
    println!("selected: {}", report.rows[report.selected].name);
    Ok(())
}
