//! Rate exponents for the four settings, the covering-entropy bound and an
//! architecture schedule table.

use dnnclass::harness::study::schedule_table;
use dnnclass::theory::{
    architecture_schedule, entropy_bound, minimax_exponent, rate_exponent, Extended, MinimaxKind,
    RateSpec, ScheduleConstants,
};

fn main() -> dnnclass::Result<()> {
    let specs = [
        (
            "smooth boundary α=1 q=1 d=2",
            RateSpec::smooth_boundary(1.0, Extended::Finite(1.0), 2),
        ),
        (
            "smooth η β=2 q=1 d=3",
            RateSpec::smooth_eta(2.0, Extended::Finite(1.0), 3),
        ),
        (
            "margin α=1 q=1 γ=2 d=2",
            RateSpec::margin(1.0, Extended::Finite(1.0), Extended::Finite(2.0), 2),
        ),
        (
            "margin γ=∞",
            RateSpec::margin(1.0, Extended::Finite(1.0), Extended::Infinity, 2),
        ),
        (
            "cross-entropy α=1 γ=2 d=2",
            RateSpec::cross_entropy(1.0, Extended::Finite(2.0), 2),
        ),
    ];
    for (name, spec) in &specs {
        println!("{name:<28} exponent {:.4}", rate_exponent(spec)?);
    }
    let lower = minimax_exponent(MinimaxKind::BoundaryLower, &specs[0].1)?;
    println!("minimax lower exponent (boundary) {lower:.4}");
    println!(
        "entropy bound L=3 N=16 S=100 B=10 δ=0.01: {:.1}",
        entropy_bound(3, 16, 100, 10.0, 0.01)?
    );

    let s = architecture_schedule(&specs[0].1, 10_000)?;
    println!("unit-constant schedule at n=10⁴: {s:?}");
    let table = schedule_table(
        &specs[4].1,
        &[1_000, 10_000, 100_000],
        &ScheduleConstants::default(),
    )?;
    print!("{}", table.to_csv());
    Ok(())
}
