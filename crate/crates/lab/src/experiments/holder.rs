//! `||X^(j)_{s,t}||_{L^2}` against `t - s`, with the per-coordinate variance
//! identity `Var = ||S_j E_c 1_{[s,t]}||^2_{L^2}`.

use ym2d::ecal::{ec_coefficients, SteppedTimeFn};
use ym2d::spectral::{pair_coefficients, sample_noise_for, smoothed_norm_sq, Smoothing};

use super::{label, sq_norm, Context};
use crate::config::HolderFirst;
use crate::error::Result;
use crate::report::{Check, Metric, Report, MIN_R2};
use crate::seeding::sample_seed;
use crate::stats::{ols, root_mean, variance_se};

pub fn holder_first(cfg: &HolderFirst, ctx: &Context) -> Result<Report> {
    let table = ctx.table;
    let curve = cfg.curve.build()?;
    let top = Smoothing::Level(*cfg.levels.iter().max().expect("validated nonempty"));
    let mut probes = Vec::new();
    for &j in &cfg.levels {
        let s = Smoothing::Level(j);
        for &d in &cfg.durations {
            let h = SteppedTimeFn::indicator(cfg.start, cfg.start + d);
            probes.push((j, d, s, ec_coefficients(&curve, &h, table, table.count_for(s))));
        }
    }
    let dim = ctx.dim();
    let rows = ctx.per_sample(cfg.samples, |i| {
        let noise = sample_noise_for(sample_seed(ctx.seed, i), table, dim, top);
        probes
            .iter()
            .map(|(_, _, s, co)| Ok(pair_coefficients(&noise, table, co, *s)?.into_coeffs()))
            .collect::<Result<Vec<Vec<f64>>>>()
    })?;

    let tol = &cfg.tolerance;
    let mut metrics = Vec::new();
    let mut norms = Vec::new();
    for (k, (j, d, s, co)) in probes.iter().enumerate() {
        let tag = format!("j{j}_t{}", label(*d));
        let sq: Vec<f64> = rows.iter().map(|r| sq_norm(&r[k])).collect();
        let (norm, se) = root_mean(&sq);
        norms.push(norm);
        metrics.push(Metric::info(format!("norm_{tag}"), norm, Some(se)));
        let expect = smoothed_norm_sq(table, co, *s);
        for c in 0..dim {
            let v: Vec<f64> = rows.iter().map(|r| r[k][c]).collect();
            let (var, vse) = variance_se(&v);
            metrics.push(Metric::new(
                format!("variance_{tag}_c{c}"),
                var,
                Some(vse),
                Check::WithinSe {
                    target: expect,
                    k: tol.variance_se,
                },
            ));
        }
    }
    let x: Vec<f64> = cfg.durations.iter().map(|d| d.log2()).collect();
    let nd = cfg.durations.len();
    for (li, j) in cfg.levels.iter().enumerate() {
        let y: Vec<f64> = norms[li * nd..(li + 1) * nd].iter().map(|v| v.log2()).collect();
        metrics.push(Metric::fit(
            format!("exponent_in_t_j{j}"),
            ols(&x, &y),
            Check::FitAtLeast {
                bound: 0.5 - tol.regularity - tol.margin,
                min_r2: MIN_R2,
            },
        ));
    }
    Ok(Report::new(
        "holder_first",
        &cfg.name,
        ctx.config_hash,
        ctx.seed,
        cfg.samples,
        metrics,
    ))
}
