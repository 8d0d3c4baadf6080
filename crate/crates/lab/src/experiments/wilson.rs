//! Wilson loops from the smoothed field against the Lie Brownian motion
//! oracle run for the enclosed area.

use ym2d::liealg::{GroupElement, SuAlgebra};
use ym2d::spectral::{sample_noise_for, ModeTable, Smoothing};
use ym2d::transport::{holonomy, oracle_endpoint_pair, AxialGauge};

use super::Context;
use crate::config::{level_or_max, LoopShape, LoopSpec, WilsonDensity};
use crate::error::Result;
use crate::report::{Check, Metric, Report};
use crate::seeding::{sample_seed, tagged_seed, ORACLE_TAG};
use crate::stats::{ks_critical_1pct, ks_statistic, mean_se};

/// `Re tr U(1)` of every loop on one noise sample.
pub(crate) fn field_traces(
    shapes: &[LoopShape],
    table: &ModeTable,
    su: &SuAlgebra,
    smoothing: Smoothing,
    seed: u64,
    nodes: usize,
) -> Result<Vec<f64>> {
    let noise = sample_noise_for(seed, table, su.dim(), smoothing);
    let mut gauge = AxialGauge::new(&noise, table, smoothing)?;
    for s in shapes {
        if let LoopShape::Lasso(l) = s {
            gauge.prepare(l.composite());
        }
    }
    shapes
        .iter()
        .map(|s| match s {
            LoopShape::Point(_) => Ok(su.n() as f64),
            LoopShape::Lasso(l) => Ok(holonomy(l, &gauge, su, nodes)?.trace().re),
        })
        .collect()
}

pub(crate) fn build_loops(specs: &[LoopSpec]) -> Result<Vec<LoopShape>> {
    specs.iter().map(LoopSpec::build).collect()
}

/// Eigenvalue angle `theta` of `U in SU(2)` with `tr U = 2 cos theta`.
fn angle(re_tr: f64) -> f64 {
    (0.5 * re_tr).clamp(-1.0, 1.0).acos()
}

struct Sample {
    field: Vec<f64>,
    /// `(fine, coarse)` oracle traces per loop.
    oracle: Vec<(f64, f64)>,
}

pub fn wilson_density(cfg: &WilsonDensity, ctx: &Context) -> Result<Report> {
    let shapes = build_loops(&cfg.loops)?;
    let smoothing = level_or_max(cfg.level, ctx.table.grid());
    let su = ctx.su;
    let rows = ctx.per_sample(cfg.samples, |i| {
        let field = field_traces(&shapes, ctx.table, su, smoothing, sample_seed(ctx.seed, i), cfg.nodes)?;
        let oracle = shapes
            .iter()
            .enumerate()
            .map(|(k, s)| {
                let seed = tagged_seed(ctx.seed, i, ORACLE_TAG.wrapping_add(k as u64));
                let (fine, coarse) = oracle_endpoint_pair(s.area(), cfg.oracle_steps, seed, su);
                (re_tr(&fine), re_tr(&coarse))
            })
            .collect();
        Ok(Sample { field, oracle })
    })?;

    let tol = &cfg.tolerance;
    let mut metrics = Vec::new();
    for (k, s) in shapes.iter().enumerate() {
        let tag = format!("loop{k}");
        metrics.push(Metric::info(format!("{tag}_area"), s.area(), None));
        let field: Vec<f64> = rows.iter().map(|r| r.field[k]).collect();
        let fine: Vec<f64> = rows.iter().map(|r| r.oracle[k].0).collect();
        let oracle: Vec<f64> = rows.iter().map(|r| r.oracle[k].1).collect();
        for (power, name) in [(1, "re_tr"), (2, "re_tr_sq")] {
            let f: Vec<f64> = field.iter().map(|v| v.powi(power)).collect();
            let o: Vec<f64> = oracle.iter().map(|v| v.powi(power)).collect();
            let (mf, sf) = mean_se(&f);
            let (mo, so) = mean_se(&o);
            metrics.push(Metric::info(format!("{tag}_oracle_mean_{name}"), mo, Some(so)));
            metrics.push(Metric::new(
                format!("{tag}_field_mean_{name}"),
                mf,
                Some((sf * sf + so * so).sqrt()),
                Check::WithinSe {
                    target: mo,
                    k: tol.moment_se,
                },
            ));
        }
        let (mo, so) = mean_se(&oracle);
        let (mfine, _) = mean_se(&fine);
        metrics.push(Metric::new(
            format!("{tag}_oracle_step_doubling_shift"),
            (mfine - mo).abs(),
            None,
            Check::AtMost {
                bound: tol.oracle_se * so,
            },
        ));
        if su.n() == 2 {
            let a: Vec<f64> = field.iter().map(|&v| angle(v)).collect();
            let b: Vec<f64> = oracle.iter().map(|&v| angle(v)).collect();
            metrics.push(Metric::new(
                format!("{tag}_ks_angle"),
                ks_statistic(&a, &b),
                None,
                Check::AtMost {
                    bound: ks_critical_1pct(a.len(), b.len()),
                },
            ));
        }
    }
    for p in &cfg.equal_area {
        for (power, name) in [(1, "re_tr"), (2, "re_tr_sq")] {
            // Both loops see the same samples, so the paired difference
            // carries the correct standard error.
            let d: Vec<f64> = rows
                .iter()
                .map(|r| r.field[p[0]].powi(power) - r.field[p[1]].powi(power))
                .collect();
            let (m, se) = mean_se(&d);
            metrics.push(Metric::new(
                format!("shape_loop{}_loop{}_{name}", p[0], p[1]),
                m,
                Some(se),
                Check::WithinSe {
                    target: 0.0,
                    k: tol.moment_se,
                },
            ));
        }
    }
    Ok(Report::new(
        "wilson_density",
        &cfg.name,
        ctx.config_hash,
        ctx.seed,
        cfg.samples,
        metrics,
    ))
}

fn re_tr(u: &GroupElement) -> f64 {
    u.trace().re
}
