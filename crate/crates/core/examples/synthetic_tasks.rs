//! Synthetic tasks with oracle η, Bayes classifier and boundary distance:
//! sampling, exponent estimates and excess risk of a fixed network.

use dnnclass::net::ReluNetwork;
use dnnclass::synth::{
    estimate_exponent, excess_risk, make_extreme_eta_task, make_margin_task,
    make_smooth_boundary_task, TailStatistic,
};
use dnnclass::theory::Extended;
use dnnclass::Polynomial;

fn main() -> dnnclass::Result<()> {
    let g = Polynomial::from_terms(1, &[(0.4, &[0]), (0.5, &[2])])?;
    let noisy = make_smooth_boundary_task(2, 1.0, Extended::Finite(1.0), g.clone(), 0.2)?;
    let grid: Vec<f64> = (0..6).map(|i| 0.01 * 10f64.powf(i as f64 / 5.0)).collect();
    println!("noise task: Bayes risk {:.4}", noisy.bayes_risk);
    println!(
        "  fitted q: {:?}",
        estimate_exponent(&noisy, TailStatistic::NoiseQ, &grid, 200_000, 1)?
    );

    let margin = make_margin_task(2, 1.0, Extended::Finite(2.0), g, 0.2, None)?;
    println!("margin task: acceptance {:.3}", margin.acceptance_rate);
    println!(
        "  fitted γ: {:?}",
        estimate_exponent(&margin, TailStatistic::MarginGamma, &grid, 200_000, 2)?
    );
    let x = [0.7, 0.5];
    println!(
        "  at {x:?}: η = {}, C* = {}, dist = {:.4}",
        margin.eta(&x),
        margin.bayes(&x),
        margin.boundary_distance(&x)
    );

    let extreme = make_extreme_eta_task(2, 99f64.ln(), 0.05)?;
    let data = extreme.sample(3, 5);
    println!(
        "extreme task sample: {:?}",
        data.iter()
            .map(|(x, y)| (x.to_vec(), y))
            .collect::<Vec<_>>()
    );

    // the constant classifier +1 against the noisy task
    let plus = ReluNetwork::constant(2, 1.0);
    let r = excess_risk(&noisy, &plus, 100_000, 4)?;
    println!(
        "constant +1: excess 0-1 {:.4} ± {:.4}, excess hinge {:.4}",
        r.excess_01.mean, r.excess_01.se, r.excess_hinge.mean
    );
    Ok(())
}
