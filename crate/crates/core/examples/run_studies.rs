//! Drive the harness from code: a reduced rate study and loss comparison
//! written to a temporary directory.

use dnnclass::harness::{execute, Command, Config, RunOptions};

fn main() -> dnnclass::Result<()> {
    let mut cfg = Config::default();
    cfg.rate_study.n_grid = vec![256, 512, 1024, 2048];
    cfg.loss_compare.n_per_class = vec![100, 500];
    cfg.loss_compare.seeds = vec![1, 2, 3];
    let out = std::env::temp_dir().join("dnnclass-example");
    let opts = RunOptions {
        out: Some(out.clone()),
        ..RunOptions::default()
    };
    for cmd in [Command::RateStudy, Command::LossCompare] {
        let outcome = execute(&cmd, &cfg, &opts)?;
        println!(
            "== {} ({:.1}s) -> {}",
            cmd.name(),
            outcome.manifest.wall_seconds,
            out.display()
        );
        print!("{}", outcome.summary);
    }
    Ok(())
}
