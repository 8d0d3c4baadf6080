//! Executes a config: manifest first, then one report per task.

use std::path::{Path, PathBuf};
use std::time::Instant;

use ym2d::liealg::SuAlgebra;

use crate::config::{Config, Task};
use crate::error::{LabError, Result};
use crate::experiments::{self as ex, Context};
use crate::manifest::{now_unix, sha256_hex, Manifest, TaskRecord};
use crate::report::Report;

/// Command-line overrides of a config.
#[derive(Clone, Debug, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub workers: Option<usize>,
}

#[derive(Debug)]
pub struct Outcome {
    pub manifest: Manifest,
    pub reports: Vec<Report>,
}

impl Outcome {
    pub fn pass(&self) -> bool {
        self.reports.iter().all(|r| r.pass)
    }
}

/// Loads `config_path`, applies `overrides` and runs every task into `out`.
pub fn run_file(config_path: &Path, out: &Path, overrides: &Overrides) -> Result<Outcome> {
    let (mut cfg, bytes) = Config::load(config_path)?;
    if let Some(s) = overrides.seed {
        cfg.seed = s;
    }
    if let Some(w) = overrides.workers {
        if w == 0 {
            return Err(LabError::config("workers must be at least 1"));
        }
        cfg.workers = w;
    }
    run_config(&cfg, &config_path.display().to_string(), &sha256_hex(&bytes), out)
}

/// Runs a validated config. `config_hash` is recorded in every report.
pub fn run_config(cfg: &Config, config_path: &str, config_hash: &str, out: &Path) -> Result<Outcome> {
    cfg.validate()?;
    std::fs::create_dir_all(out).map_err(|e| LabError::io(out, e))?;
    let mut manifest = Manifest {
        tool: "ym2d".into(),
        version: env!("CARGO_PKG_VERSION").into(),
        config_path: config_path.into(),
        config_sha256: config_hash.into(),
        seed: cfg.seed,
        out: out.display().to_string(),
        workers: cfg.workers,
        started_unix: now_unix(),
        finished_unix: None,
        tasks: Vec::new(),
    };
    manifest.write(out)?;

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.workers)
        .build()
        .map_err(|e| LabError::config(format!("worker pool: {e}")))?;
    let table = cfg.table()?;
    let su = SuAlgebra::new(cfg.group)?;
    let ctx = Context {
        table: &table,
        su: &su,
        seed: cfg.seed,
        config_hash,
        out,
    };
    let mut reports = Vec::new();
    for task in &cfg.tasks {
        let clock = Instant::now();
        let report = pool.install(|| run_task(task, &ctx))?;
        let path: PathBuf = out.join(format!("{}.json", task.name()));
        report.write(&path)?;
        manifest.tasks.push(TaskRecord {
            name: task.name().into(),
            experiment: task.experiment().into(),
            report: path.display().to_string(),
            pass: report.pass,
            runtime_s: clock.elapsed().as_secs_f64(),
        });
        manifest.write(out)?;
        reports.push(report);
    }
    manifest.finished_unix = Some(now_unix());
    manifest.write(out)?;
    Ok(Outcome { manifest, reports })
}

pub fn run_task(task: &Task, ctx: &Context) -> Result<Report> {
    match task {
        Task::FirstLevelDecay(c) => ex::first_level_decay(c, ctx),
        Task::HolderFirst(c) => ex::holder_first(c, ctx),
        Task::SecondLevel(c) => ex::second_level(c, ctx),
        Task::WilsonDensity(c) => ex::wilson_density(c, ctx),
        Task::Independence(c) => ex::independence(c, ctx),
        Task::SampleField(c) => ex::sample_field(c, ctx),
        Task::Transport(c) => ex::transport(c, ctx),
        Task::Lift(c) => ex::lift(c, ctx),
    }
}
