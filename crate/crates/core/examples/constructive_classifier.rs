//! Build the exact network for a two-piece classifier with polynomial
//! boundaries and compare it with the indicator oracle on the safe region.

use dnnclass::approx::{
    build_piecewise_classifier, build_plugin_threshold, build_smooth_approx, ApproxOptions,
    BuildReport, ClassifierSpec, HorizonSpec, PieceSpec,
};
use dnnclass::harness::verify::exactness_mismatches;
use dnnclass::Polynomial;

fn main() -> dnnclass::Result<()> {
    let g = Polynomial::from_terms(1, &[(0.55, &[0]), (0.5, &[1]), (0.1, &[2])])?;
    let spec = ClassifierSpec::new(vec![
        PieceSpec {
            horizons: vec![HorizonSpec::fitted(0, g.clone(), 2.0)?],
        },
        PieceSpec {
            horizons: vec![HorizonSpec::fitted(1, g.clone(), 2.0)?],
        },
    ])?;
    for xi in [0.1, 0.05, 0.02] {
        let net = build_piecewise_classifier(&spec, xi)?;
        let report = BuildReport::new(&net, xi, 50);
        let check = exactness_mismatches(&spec, &net, xi, 20_000, 1)?;
        println!(
            "ξ = {xi}: depth {} width {} nnz {} max|θ| {:.1}; {} mismatches on {} safe points",
            report.stats.depth,
            report.stats.max_width,
            report.stats.nnz,
            report.stats.max_abs_param,
            check.mismatches,
            check.checked
        );
    }

    // a smooth function approximated to 1e-3, then thresholded at ½
    let eta = Polynomial::from_terms(1, &[(0.2, &[0]), (0.7, &[2])])?;
    let (eta_net, rep) = build_smooth_approx(&eta, 1e-3, &ApproxOptions::default())?;
    println!(
        "η̃: accuracy level {}, measured error {:.2e}",
        rep.accuracy, rep.measured_error
    );
    let plug_in = build_plugin_threshold(&eta_net, 0.05)?;
    for u in [0.3, 0.6, 0.9] {
        println!(
            "  plug-in at {u}: {} (η = {:.3})",
            plug_in.evaluate(&[u])?[0],
            eta.eval(&[u])
        );
    }
    Ok(())
}
