//! Correlations of `Re tr U(1)` between loops evaluated on the same noise.

use super::wilson::{build_loops, field_traces};
use super::Context;
use crate::config::{level_or_max, Independence};
use crate::error::Result;
use crate::report::{Check, Metric, Report};
use crate::seeding::sample_seed;
use crate::stats::correlation;

pub fn independence(cfg: &Independence, ctx: &Context) -> Result<Report> {
    let shapes = build_loops(&cfg.loops)?;
    let smoothing = level_or_max(cfg.level, ctx.table.grid());
    let rows = ctx.per_sample(cfg.samples, |i| {
        field_traces(
            &shapes,
            ctx.table,
            ctx.su,
            smoothing,
            sample_seed(ctx.seed, i),
            cfg.nodes,
        )
    })?;
    let column = |k: usize| -> Vec<f64> { rows.iter().map(|r| r[k]).collect() };
    let tol = &cfg.tolerance;
    let bound = tol.k / (cfg.samples as f64).sqrt();
    let mut metrics = Vec::new();
    for p in &cfg.pairs {
        let c = correlation(&column(p[0]), &column(p[1]));
        metrics.push(Metric::new(
            format!("abs_corr_loop{}_loop{}", p[0], p[1]),
            c.abs(),
            None,
            Check::AtMost { bound },
        ));
    }
    for p in &cfg.controls {
        let c = correlation(&column(p[0]), &column(p[1]));
        metrics.push(Metric::new(
            format!("control_corr_loop{}_loop{}", p[0], p[1]),
            c,
            None,
            Check::AtLeast { bound: tol.control_min },
        ));
    }
    Ok(Report::new(
        "independence",
        &cfg.name,
        ctx.config_hash,
        ctx.seed,
        cfg.samples,
        metrics,
    ))
}
