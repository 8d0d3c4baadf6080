//! Second level `XX^(j)_{s,t}`: its `(t - s)` exponent per level and the
//! consecutive-level differences `||XX^(j') - XX^(j)||_{L^2}` at a fixed
//! window.
//!
//! One lift per sample and level is built on a sub-grid containing every
//! window endpoint; increments between nodes are exact Chen products.

use ym2d::roughpath::{lift_smoothed, Level2};
use ym2d::spectral::{sample_noise_for, Smoothing};

use super::{label, sq_norm, Context};
use crate::config::SecondLevel;
use crate::error::Result;
use crate::report::{Check, Metric, Report, MIN_R2};
use crate::seeding::sample_seed;
use crate::stats::{ols, root_mean};

pub fn second_level(cfg: &SecondLevel, ctx: &Context) -> Result<Report> {
    let table = ctx.table;
    let curve = cfg.curve.build()?;
    let mut windows: Vec<[f64; 2]> = cfg.durations.iter().map(|d| [cfg.start, cfg.start + d]).collect();
    windows.push(cfg.window);
    let grid = sub_grid(&windows, cfg.max_step);
    let at = |t: f64| grid.iter().position(|&g| g == t).expect("endpoint on grid");
    let spans: Vec<(usize, usize)> = windows.iter().map(|w| (at(w[0]), at(w[1]))).collect();
    let top = Smoothing::Level(*cfg.levels.last().expect("validated nonempty"));
    let dim = ctx.dim();

    // rows[i][level][window]
    let rows = ctx.per_sample(cfg.samples, |i| {
        let noise = sample_noise_for(sample_seed(ctx.seed, i), table, dim, top);
        cfg.levels
            .iter()
            .map(|&j| {
                let path = lift_smoothed(&curve, &noise, table, Smoothing::Level(j), &grid)?;
                Ok(spans.iter().map(|&(a, b)| path.increment(a, b)).collect())
            })
            .collect::<Result<Vec<Vec<Level2>>>>()
    })?;

    let tol = &cfg.tolerance;
    let mut metrics = Vec::new();
    let x: Vec<f64> = cfg.durations.iter().map(|d| d.log2()).collect();
    for (li, j) in cfg.levels.iter().enumerate() {
        let mut y = Vec::new();
        for (wi, d) in cfg.durations.iter().enumerate() {
            let sq: Vec<f64> = rows.iter().map(|r| sq_norm(r[li][wi].xx())).collect();
            let (norm, se) = root_mean(&sq);
            metrics.push(Metric::info(format!("norm_j{j}_t{}", label(*d)), norm, Some(se)));
            y.push(norm.log2());
        }
        metrics.push(Metric::fit(
            format!("exponent_in_t_j{j}"),
            ols(&x, &y),
            Check::FitAtLeast {
                bound: tol.min_exponent,
                min_r2: MIN_R2,
            },
        ));
    }

    let wi = windows.len() - 1;
    let mut diffs = Vec::new();
    for (li, pair) in cfg.levels.windows(2).enumerate() {
        let sq: Vec<f64> = rows
            .iter()
            .map(|r| {
                let (a, b) = (r[li][wi].xx(), r[li + 1][wi].xx());
                a.iter().zip(b).map(|(u, v)| (u - v).powi(2)).sum()
            })
            .collect();
        let (d, se) = root_mean(&sq);
        metrics.push(Metric::info(format!("cauchy_j{}_j{}", pair[0], pair[1]), d, Some(se)));
        diffs.push((d, se));
    }
    let mut inversions = 0usize;
    let mut worst = f64::NEG_INFINITY;
    for w in diffs.windows(2) {
        let rise = (w[1].0 - w[0].0) / (w[0].1.powi(2) + w[1].1.powi(2)).sqrt();
        if w[1].0 > w[0].0 {
            inversions += 1;
        }
        worst = worst.max(rise);
    }
    if diffs.len() >= 2 {
        metrics.push(Metric::new(
            "cauchy_inversions",
            inversions as f64,
            None,
            Check::AtMost {
                bound: tol.max_inversions as f64,
            },
        ));
        metrics.push(Metric::new(
            "cauchy_largest_rise_in_se",
            worst,
            None,
            Check::AtMost {
                bound: tol.inversion_se,
            },
        ));
    }
    let (first, last) = (diffs[0], diffs[diffs.len() - 1]);
    let ratio = first.0 / last.0;
    let ratio_se = ratio * ((first.1 / first.0).powi(2) + (last.1 / last.0).powi(2)).sqrt();
    metrics.push(Metric::new(
        "cauchy_decay_ratio",
        ratio,
        Some(ratio_se),
        Check::AtLeast { bound: tol.min_decay },
    ));
    Ok(Report::new(
        "second_level",
        &cfg.name,
        ctx.config_hash,
        ctx.seed,
        cfg.samples,
        metrics,
    ))
}

/// Sorted union of a uniform grid of step at most `max_step` on `[0, 1]` and
/// every window endpoint, cut to the span of the windows.
fn sub_grid(windows: &[[f64; 2]], max_step: f64) -> Vec<f64> {
    let m = (1.0 / max_step).ceil() as usize;
    let mut g: Vec<f64> = (0..=m).map(|i| i as f64 / m as f64).collect();
    g.extend(windows.iter().flatten());
    g.sort_by(f64::total_cmp);
    g.dedup();
    let lo = windows.iter().map(|w| w[0]).fold(f64::INFINITY, f64::min);
    let hi = windows.iter().map(|w| w[1]).fold(f64::NEG_INFINITY, f64::max);
    g.retain(|&t| t >= lo && t <= hi);
    g
}
