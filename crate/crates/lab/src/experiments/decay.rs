//! `||X_{s,t} - X^(j)_{s,t}||_{L^2}` against `j` and against `t - s`.
//!
//! Both terms are pairings of one noise sample with the exact coefficients of
//! `E_c 1_{[s,t]}`, so each measurement is a difference of two spectral
//! pairings. The exact second moment is `dim * sum_k w_k (m_ref - chi_j)^2
//! |f_k|^2` and is reported next to the Monte-Carlo estimate.

use num_complex::Complex64;
use ym2d::ecal::{ec_coefficients, SteppedTimeFn};
use ym2d::spectral::{pair_coefficients, sample_noise_for, ModeTable, Smoothing};

use super::{label, sq_norm, Context};
use crate::config::FirstLevelDecay;
use crate::error::Result;
use crate::report::{Check, Metric, Report, MIN_R2};
use crate::seeding::sample_seed;
use crate::stats::{mean_se, ols, root_mean};

struct Probe {
    coeffs: Vec<Complex64>,
    level: Smoothing,
}

pub fn first_level_decay(cfg: &FirstLevelDecay, ctx: &Context) -> Result<Report> {
    let table = ctx.table;
    let curve = cfg.curve.build()?;
    let reference = cfg.reference_level.map_or(Smoothing::None, Smoothing::Level);
    let count = table.count_for(reference);
    let coeffs = |s: f64, t: f64| ec_coefficients(&curve, &SteppedTimeFn::indicator(s, t), table, count);

    let window = coeffs(cfg.window[0], cfg.window[1]);
    let mut probes: Vec<Probe> = cfg
        .levels
        .iter()
        .map(|&j| Probe {
            coeffs: window.clone(),
            level: Smoothing::Level(j),
        })
        .collect();
    for &d in &cfg.durations {
        probes.push(Probe {
            coeffs: coeffs(cfg.start, cfg.start + d),
            level: Smoothing::Level(cfg.time_level),
        });
    }

    let dim = ctx.dim();
    let rows = ctx.per_sample(cfg.samples, |i| {
        let noise = sample_noise_for(sample_seed(ctx.seed, i), table, dim, reference);
        probes
            .iter()
            .map(|p| {
                let full = pair_coefficients(&noise, table, &p.coeffs, reference)?;
                let smooth = pair_coefficients(&noise, table, &p.coeffs, p.level)?;
                Ok(sq_norm((&full - &smooth).coeffs()))
            })
            .collect::<Result<Vec<f64>>>()
    })?;
    let column = |k: usize| -> Vec<f64> { rows.iter().map(|r| r[k]).collect() };

    let mut metrics = Vec::new();
    let mut norms = Vec::new();
    for (k, p) in probes.iter().enumerate() {
        let (norm, se) = root_mean(&column(k));
        norms.push(norm);
        let exact = (dim as f64 * error_norm_sq(table, &p.coeffs, reference, p.level)).sqrt();
        let tag = match k < cfg.levels.len() {
            true => format!("j{}", cfg.levels[k]),
            false => format!("t{}", label(cfg.durations[k - cfg.levels.len()])),
        };
        metrics.push(Metric::info(format!("error_{tag}"), norm, Some(se)));
        metrics.push(Metric::info(format!("exact_error_{tag}"), exact, None));
        // Second-moment identity, the estimator's own oracle.
        let (ms, ms_se) = mean_se(&column(k));
        metrics.push(Metric::new(
            format!("second_moment_{tag}"),
            ms,
            Some(ms_se),
            Check::WithinSe {
                target: exact * exact,
                k: 4.0,
            },
        ));
    }
    if let Some(r) = cfg.reference_level {
        if let Some(k) = cfg.levels.iter().position(|&j| j == r) {
            metrics.push(Metric::new(
                "error_at_reference",
                norms[k],
                None,
                Check::AtMost { bound: 0.0 },
            ));
        }
    }

    let tol = &cfg.tolerance;
    let nl = cfg.levels.len();
    // The reference level itself carries no error and stays out of the fit.
    let fitted: Vec<(f64, f64)> = cfg.levels[..nl]
        .iter()
        .zip(&norms)
        .filter(|(&j, _)| Some(j) != cfg.reference_level)
        .map(|(&j, v)| (j as f64, v.log2()))
        .collect();
    let xj: Vec<f64> = fitted.iter().map(|p| p.0).collect();
    let yj: Vec<f64> = fitted.iter().map(|p| p.1).collect();
    metrics.push(Metric::fit(
        "slope_in_j",
        ols(&xj, &yj),
        Check::FitBetween {
            lo: -tol.regularity - tol.slope_tol,
            hi: -tol.regularity + tol.slope_tol,
            min_r2: MIN_R2,
        },
    ));
    let xt: Vec<f64> = cfg.durations.iter().map(|d| d.log2()).collect();
    let yt: Vec<f64> = norms[nl..].iter().map(|v| v.log2()).collect();
    metrics.push(Metric::fit(
        "exponent_in_t",
        ols(&xt, &yt),
        Check::FitBetween {
            lo: tol.time_exponent - tol.time_tol,
            hi: tol.time_exponent + tol.time_tol,
            min_r2: MIN_R2,
        },
    ));
    Ok(Report::new(
        "first_level_decay",
        &cfg.name,
        ctx.config_hash,
        ctx.seed,
        cfg.samples,
        metrics,
    ))
}

/// Per-coordinate variance of `<W, (S_ref - S_j) f>`.
pub(crate) fn error_norm_sq(table: &ModeTable, coeffs: &[Complex64], reference: Smoothing, level: Smoothing) -> f64 {
    let count = table.count_for(reference).min(coeffs.len());
    table.modes()[..count]
        .iter()
        .zip(coeffs)
        .map(|(m, f)| {
            let d = reference.multiplier(m.radius) - level.multiplier(m.radius);
            m.weight() * d * d * f.norm_sqr()
        })
        .sum()
}
