//! Command orchestration: configuration, the study commands, CSV tables and
//! the JSON run manifest.

pub mod config;
pub mod study;
pub mod verify;

use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::Serialize;

pub use config::{mix_seed, Config};
pub use study::{
    run_cond_e_hist, run_loss_compare, run_rate_study, schedule_table, CondEHist, LossCompare,
    RateStudy,
};
pub use verify::{run_verify, Fault, VerifyReport};

use crate::error::{Error, Result};
use crate::theory::RateSpec;

/// A CSV table with a schema line and a fixed header.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub schema: &'static str,
    pub header: Vec<&'static str>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(schema: &'static str, header: &[&'static str]) -> Self {
        Self {
            schema,
            header: header.to_vec(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn column(&self, name: &str) -> Option<usize> {
        self.header.iter().position(|h| *h == name)
    }

    pub fn to_csv(&self) -> String {
        let mut out = format!("# schema: dnnclass.{} v1\n", self.schema);
        out.push_str(&self.header.join(","));
        out.push('\n');
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(|c| escape(c)).collect();
            out.push_str(&cells.join(","));
            out.push('\n');
        }
        out
    }
}

fn escape(cell: &str) -> String {
    if cell.contains([',', '"', '\n']) {
        format!("\"{}\"", cell.replace('"', "\"\""))
    } else {
        cell.to_string()
    }
}

/// Options shared by every command.
#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    pub seed: Option<u64>,
    pub jobs: Option<usize>,
    pub out: Option<PathBuf>,
    pub fault: Option<Fault>,
}

impl RunOptions {
    pub fn jobs(&self) -> usize {
        self.jobs
            .unwrap_or_else(|| {
                std::thread::available_parallelism()
                    .map(|n| n.get())
                    .unwrap_or(1)
            })
            .max(1)
    }

    pub fn out_dir(&self) -> PathBuf {
        self.out.clone().unwrap_or_else(|| PathBuf::from("out"))
    }
}

#[derive(Debug, Clone)]
pub enum Command {
    Verify,
    RateStudy,
    LossCompare,
    CondEHist,
    /// `spec` replaces the configured specification when given.
    Schedule {
        spec: Option<RateSpec>,
        n_grid: Option<Vec<u64>>,
    },
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Verify => "verify",
            Command::RateStudy => "rate-study",
            Command::LossCompare => "loss-compare",
            Command::CondEHist => "cond-e-hist",
            Command::Schedule { .. } => "schedule",
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Manifest {
    pub command: String,
    pub version: String,
    pub config_hash: String,
    pub seed: u64,
    pub jobs: usize,
    pub fault: Option<Fault>,
    pub wall_seconds: f64,
    pub outputs: Vec<String>,
    pub notes: Vec<String>,
}

/// What a command produced.
#[derive(Debug, Clone)]
pub struct Outcome {
    pub manifest: Manifest,
    /// `false` only when a gated verification check failed.
    pub success: bool,
    /// Short human-readable summary for the terminal.
    pub summary: String,
}

fn write_file(dir: &Path, name: &str, body: &str, outputs: &mut Vec<String>) -> Result<()> {
    std::fs::write(dir.join(name), body)?;
    outputs.push(name.to_string());
    Ok(())
}

fn pool(jobs: usize) -> Result<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| Error::Config(format!("cannot start {jobs} worker threads: {e}")))
}

/// Runs one command, writing CSV/JSON outputs and `manifest.json` into the
/// output directory.
pub fn execute(command: &Command, config: &Config, opts: &RunOptions) -> Result<Outcome> {
    let mut cfg = config.clone();
    if let Some(seed) = opts.seed {
        cfg.seed = seed;
    }
    cfg.validate()?;
    if opts.fault.is_some() && !matches!(command, Command::Verify) {
        return Err(Error::Config(
            "--inject-fault only applies to verify".into(),
        ));
    }
    let jobs = opts.jobs();
    let dir = opts.out_dir();
    std::fs::create_dir_all(&dir)?;
    let started = Instant::now();
    let mut outputs = Vec::new();
    let mut notes = Vec::new();
    let mut success = true;
    let threads = pool(jobs)?;

    let summary = match command {
        Command::Verify => {
            let report = threads.install(|| run_verify(&cfg, opts.fault));
            write_file(
                &dir,
                "verify.json",
                &serde_json::to_string_pretty(&report)?,
                &mut outputs,
            )?;
            success = report.passed;
            let mut s = String::new();
            for c in &report.checks {
                let status = match (c.passed, c.gated) {
                    (true, _) => "pass",
                    (false, true) => "FAIL",
                    (false, false) => "note",
                };
                s.push_str(&format!(
                    "{status:4}  {}/{}  value={} threshold={}\n",
                    c.suite, c.name, c.value, c.threshold
                ));
            }
            s
        }
        Command::RateStudy => {
            let study = run_rate_study(&cfg, &threads)?;
            write_file(
                &dir,
                "rate_records.csv",
                &study.records.to_csv(),
                &mut outputs,
            )?;
            write_file(&dir, "rate_fit.csv", &study.fits.to_csv(), &mut outputs)?;
            write_file(&dir, "traces.csv", &study.traces.to_csv(), &mut outputs)?;
            notes.extend(study.notes.iter().cloned());
            study.fits.to_csv()
        }
        Command::LossCompare => {
            let cmp = run_loss_compare(&cfg, &threads)?;
            write_file(&dir, "loss_compare.csv", &cmp.table.to_csv(), &mut outputs)?;
            notes.extend(cmp.notes.iter().cloned());
            cmp.table.to_csv()
        }
        Command::CondEHist => {
            let hist = threads.install(|| run_cond_e_hist(&cfg))?;
            write_file(&dir, "cond_e_hist.csv", &hist.table.to_csv(), &mut outputs)?;
            notes.push(format!("extreme-bin mass {}", hist.extreme_mass));
            hist.table.to_csv()
        }
        Command::Schedule { spec, n_grid } => {
            let spec = spec.unwrap_or(cfg.schedule.spec);
            let grid = n_grid
                .clone()
                .unwrap_or_else(|| cfg.schedule.n_grid.clone());
            let table = schedule_table(&spec, &grid, &cfg.constants)?;
            write_file(&dir, "schedule.csv", &table.to_csv(), &mut outputs)?;
            table.to_csv()
        }
    };

    let manifest = Manifest {
        command: command.name().into(),
        version: env!("CARGO_PKG_VERSION").into(),
        config_hash: cfg.hash(),
        seed: cfg.seed,
        jobs,
        fault: opts.fault,
        wall_seconds: started.elapsed().as_secs_f64(),
        outputs,
        notes,
    };
    std::fs::write(
        dir.join("manifest.json"),
        serde_json::to_string_pretty(&manifest)?,
    )?;
    Ok(Outcome {
        manifest,
        success,
        summary,
    })
}

/// Shortest round-tripping decimal form, used for every float cell.
pub(crate) fn fmt(v: f64) -> String {
    format!("{v}")
}
