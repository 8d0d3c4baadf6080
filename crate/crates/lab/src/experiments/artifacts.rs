//! Single-sample artifacts: a smoothed field, a transport path and a lifted
//! step-2 path, each written next to its report.

use std::path::Path;

use ym2d::roughpath::lift_smoothed;
use ym2d::spectral::{sample_noise_for, smooth_field, Smoothing};
use ym2d::transport::{parallel_transport, AxialGauge};

use super::Context;
use crate::config::{LiftTask, SampleField, TransportTask};
use crate::error::{LabError, Result};
use crate::report::{Check, Metric, Report};
use crate::seeding::sample_seed;

/// Drift tolerance of group-valued and Chen-consistent artifacts.
const DEFECT_TOL: f64 = 1e-10;

fn write(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|e| LabError::io(path, e))
}

pub fn sample_field(cfg: &SampleField, ctx: &Context) -> Result<Report> {
    let seed = sample_seed(ctx.seed, cfg.sample);
    let s = Smoothing::Level(cfg.level);
    let noise = sample_noise_for(seed, ctx.table, ctx.dim(), s);
    let field = smooth_field(&noise, ctx.table, cfg.level)?;
    let stem = ctx.out.join(format!("{}_field", cfg.name));
    field.write(&stem).map_err(LabError::from)?;
    // E ||W^(j)||^2_{L^2(torus)} per channel: one unit per weighted mode.
    let expected: f64 = ctx.table.modes()[..ctx.table.count_for(s)]
        .iter()
        .map(|m| m.weight() * s.multiplier(m.radius).powi(2))
        .sum();
    let mut metrics = vec![Metric::info("expected_l2_norm", expected.sqrt(), None)];
    for c in 0..field.channels() {
        metrics.push(Metric::info(format!("l2_norm_c{c}"), field.l2_norm(c), None));
        metrics.push(Metric::info(format!("max_abs_c{c}"), field.max_abs(c), None));
    }
    Ok(Report::new(
        "sample_field",
        &cfg.name,
        ctx.config_hash,
        seed,
        1,
        metrics,
    ))
}

pub fn transport(cfg: &TransportTask, ctx: &Context) -> Result<Report> {
    let seed = sample_seed(ctx.seed, cfg.sample);
    let s = Smoothing::Level(cfg.level);
    let curve = cfg.curve.build()?;
    let noise = sample_noise_for(seed, ctx.table, ctx.dim(), s);
    let mut gauge = AxialGauge::new(&noise, ctx.table, s)?;
    gauge.prepare(&curve);
    let path = parallel_transport(&curve, &gauge, ctx.su, &curve.time_grid(cfg.nodes))?;
    write(&ctx.out.join(format!("{}.csv", cfg.name)), &path.to_csv())?;
    let metrics = vec![
        Metric::new(
            "unitarity_drift",
            path.unitarity_drift(),
            None,
            Check::AtMost { bound: DEFECT_TOL },
        ),
        Metric::new("det_drift", path.det_drift(), None, Check::AtMost { bound: DEFECT_TOL }),
        Metric::info("re_tr_end", path.last().trace().re, None),
    ];
    Ok(Report::new("transport", &cfg.name, ctx.config_hash, seed, 1, metrics))
}

pub fn lift(cfg: &LiftTask, ctx: &Context) -> Result<Report> {
    let seed = sample_seed(ctx.seed, cfg.sample);
    let s = Smoothing::Level(cfg.level);
    let curve = cfg.curve.build()?;
    let noise = sample_noise_for(seed, ctx.table, ctx.dim(), s);
    let path = lift_smoothed(&curve, &noise, ctx.table, s, &curve.time_grid(cfg.nodes))?;
    write(&ctx.out.join(format!("{}.csv", cfg.name)), &path.to_csv())?;
    let stride = (path.len() / 32).max(1);
    let scale = path.nodes().iter().map(|n| n.cc_norm()).fold(1.0, f64::max);
    let metrics = vec![
        Metric::new(
            "chen_defect_relative",
            path.chen_defect(stride) / (scale * scale),
            None,
            Check::AtMost { bound: DEFECT_TOL },
        ),
        Metric::new(
            "sym_defect",
            path.sym_defect(stride),
            None,
            Check::AtMost { bound: DEFECT_TOL },
        ),
    ];
    Ok(Report::new("lift", &cfg.name, ctx.config_hash, seed, 1, metrics))
}
