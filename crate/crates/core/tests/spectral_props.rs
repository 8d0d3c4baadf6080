#![allow(clippy::needless_range_loop)]

use proptest::prelude::*;
use ym2d::spectral::{
    besov_diff_norm, besov_diff_seminorm, besov_norm, chi, pair, pair_coefficients, rho, rho0, sample_noise,
    sample_noise_for, smooth_field, smoothed_norm_sq, DyadicPartition, GridField, Lp, ModeTable, Smoothing, TorusGrid,
    RHO_INNER,
};

#[test]
fn partition_constraints_hold_on_the_lattice() {
    let g = TorusGrid::new(4.0, 512).unwrap();
    let p = DyadicPartition::new(g);
    let r0 = p.rho(0).unwrap();
    for (v, &r) in r0.iter().zip(p.radius()) {
        assert!(*v >= 0.0);
        if !(RHO_INNER..=2.0).contains(&r) {
            assert_eq!(*v, 0.0);
        }
        if (1.0..=2.0 - 2.0 / 7.0).contains(&r) {
            assert_eq!(*v, 1.0);
        }
    }
    // Telescoping: sum_{j=-1}^{j_max} rho_j = chi_{j_max + 1}, which is 1
    // below 2^{j_max+1} * 6/7.
    let top = ((g.j_max() + 1) as f64).exp2() * RHO_INNER;
    let mut worst = 0.0f64;
    for (i, &r) in p.radius().iter().enumerate() {
        if r > top {
            continue;
        }
        let s: f64 = (-1..=g.j_max()).map(|j| p.rho(j).unwrap()[i]).sum();
        worst = worst.max((s - 1.0).abs());
    }
    assert!(worst <= 1e-12, "{worst}");
    assert_eq!(rho(0, 1.5), 1.0);
    assert_eq!(chi(0, 0.0), 1.0);
}

proptest! {
    #[test]
    fn rho_scaling_identity(r in 1.0f64..(4.0 - 4.0 / 7.0)) {
        prop_assert!((rho0(r) + rho0(r / 2.0) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn chi_is_a_partial_sum(r in 0.0f64..300.0, j in 0i32..8) {
        let s: f64 = (-1..j).map(|i| rho(i, r)).sum();
        prop_assert!((s - chi(j, r)).abs() < 1e-12);
    }
}

#[test]
fn nested_smoothing_is_consistent() {
    let g = TorusGrid::new(4.0, 128).unwrap();
    let t = ModeTable::new(g);
    let p = DyadicPartition::new(g);
    let w = sample_noise(21, &t, 3);
    let coarse = smooth_field(&w, &t, 3).unwrap();
    let fine = smooth_field(&w, &t, 5).unwrap();
    let chi3 = p.chi(3).unwrap();
    for c in 0..3 {
        let again = fine.filtered(c, &p, &chi3);
        let diff = again
            .channel(0)
            .iter()
            .zip(coarse.channel(c))
            .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
        assert!(diff < 1e-12, "{diff}");
    }
    assert!(smooth_field(&w, &t, g.j_max() + 1).is_err());
}

#[test]
fn smoothed_field_is_hermitian() {
    let g = TorusGrid::new(4.0, 64).unwrap();
    let t = ModeTable::new(g);
    let w = sample_noise(5, &t, 3);
    let f = smooth_field(&w, &t, 3).unwrap();
    let n = g.n();
    for c in 0..3 {
        let hat = f.spectrum(c);
        let mut worst = 0.0f64;
        for i2 in 0..n {
            for i1 in 0..n {
                let a = hat[i2 * n + i1];
                let b = hat[((n - i2) % n) * n + (n - i1) % n];
                worst = worst.max((a - b.conj()).norm());
            }
        }
        assert!(worst <= 1e-12, "{worst}");
    }
}

fn mean_cov(a: &[f64], b: &[f64]) -> (f64, f64) {
    let n = a.len() as f64;
    let ma = a.iter().sum::<f64>() / n;
    let mb = b.iter().sum::<f64>() / n;
    let prods: Vec<f64> = a.iter().zip(b).map(|(x, y)| (x - ma) * (y - mb)).collect();
    let cov = prods.iter().sum::<f64>() / (n - 1.0);
    let var_p = prods.iter().map(|p| (p - cov).powi(2)).sum::<f64>() / (n - 1.0);
    (cov, (var_p / n).sqrt())
}

#[test]
fn noise_isometry_gram_matrix() {
    let g = TorusGrid::new(4.0, 32).unwrap();
    let t = ModeTable::new(g);
    let fs = [
        GridField::indicator_rect(g, [0.0, 1.0], [0.0, 1.0]),
        GridField::from_fn(g, |x, y| (-(x * x + (y - 0.5).powi(2))).exp()),
        GridField::from_fn(g, |x, y| {
            (std::f64::consts::PI * x / 2.0).sin() * (y < 0.5) as u8 as f64
        }),
    ];
    let coeffs: Vec<_> = fs.iter().map(|f| t.coefficients(f, 0, t.len())).collect();
    let seeds = 10_000u64;
    let mut samples = vec![vec![Vec::new(); 3]; 3];
    for seed in 0..seeds {
        let w = sample_noise(seed, &t, 3);
        for (i, c) in coeffs.iter().enumerate() {
            let p = pair_coefficients(&w, &t, c, Smoothing::None).unwrap();
            for k in 0..3 {
                samples[i][k].push(p.coeffs()[k]);
            }
        }
    }
    for i in 0..3 {
        for j in 0..3 {
            let exact = fs[i].inner(0, &fs[j]);
            for k in 0..3 {
                let (cov, se) = mean_cov(&samples[i][k], &samples[j][k]);
                assert!(
                    (cov - exact).abs() <= 4.0 * se,
                    "({i},{j}) channel {k}: {cov} vs {exact} (se {se})"
                );
            }
            // Distinct channels are uncorrelated.
            let (cov, se) = mean_cov(&samples[i][0], &samples[j][1]);
            assert!(cov.abs() <= 4.0 * se, "cross-channel ({i},{j}): {cov}");
        }
    }
}

#[test]
fn pairing_variance_is_smoothed_norm() {
    let g = TorusGrid::new(4.0, 64).unwrap();
    let t = ModeTable::new(g);
    let f = GridField::indicator_rect(g, [0.0, 0.75], [0.25, 0.5]);
    for j in [1, 3] {
        let s = Smoothing::Level(j);
        let coeffs = t.coefficients(&f, 0, t.count_for(s));
        let expect = smoothed_norm_sq(&t, &coeffs, s);
        let seeds = 10_000u64;
        let vals: Vec<f64> = (0..seeds)
            .map(|seed| pair(&sample_noise_for(seed, &t, 3, s), &t, &f, s).unwrap().coeffs()[2])
            .collect();
        let (var, se) = mean_cov(&vals, &vals);
        assert!((var - expect).abs() <= 4.0 * se, "j {j}: {var} vs {expect}");
    }
}

#[test]
fn unit_square_block_decay() {
    let mut consts = vec![];
    for n in [256, 512] {
        let g = TorusGrid::new(4.0, n).unwrap();
        let p = DyadicPartition::new(g);
        let f = GridField::indicator_rect(g, [0.0, 1.0], [0.0, 1.0]);
        let prof = besov_norm(&f, 0.5, Lp::Two, &p);
        let slope = prof.block_slope(1..=5);
        assert!((slope + 0.5).abs() <= 0.1, "N {n}: slope {slope}");
        let c = prof
            .blocks
            .iter()
            .filter(|(j, _)| (1..=5).contains(j))
            .map(|(j, v)| v * (*j as f64 / 2.0).exp2())
            .fold(0.0, f64::max);
        consts.push(c);
    }
    assert!((consts[0] / consts[1] - 1.0).abs() < 0.1, "{consts:?}");
}

#[test]
fn besov_norm_of_zero_and_constants() {
    let g = TorusGrid::new(4.0, 64).unwrap();
    let p = DyadicPartition::new(g);
    let z = GridField::zeros(g, 1);
    assert_eq!(besov_norm(&z, 0.4, Lp::Two, &p).norm, 0.0);
    let one = GridField::from_fn(g, |_, _| 1.0);
    assert_eq!(besov_diff_seminorm(&one, 0.4, Lp::Two), 0.0);
    assert_eq!(besov_diff_seminorm(&one, 0.4, Lp::Inf), 0.0);
}

/// Closed-form bound `(ab)^{1/p} (1 + 4^{1/p} min(a,b)^{-s})` for the
/// translation norm of a rectangle indicator.
fn rect_bound(a: f64, b: f64, s: f64) -> f64 {
    (a * b).sqrt() * (1.0 + 2.0 * a.min(b).powf(-s))
}

#[test]
fn thin_rectangle_norms_obey_the_closed_form() {
    let g = TorusGrid::new(4.0, 512).unwrap();
    let p = DyadicPartition::new(g);
    let (a, b, s) = (1.0 / 16.0, 1.0, 0.4);
    let f = GridField::indicator_rect(g, [0.0, a], [0.0, b]);
    let diff = besov_diff_norm(&f, s, Lp::Two);
    assert!(diff <= rect_bound(a, b, s), "{diff} vs {}", rect_bound(a, b, s));
    // The dyadic norm against 5 a^{1/2-s} b^{1/2}, with the equivalence
    // slack of this partition profile.
    let dy = besov_norm(&f, s, Lp::Two, &p).norm;
    let target = 5.0 * a.powf(0.5 - s) * b.sqrt();
    assert!(dy <= DYADIC_SLACK * target, "{dy} vs {target}");
    let square = GridField::indicator_rect(g, [0.0, 1.0], [0.0, 1.0]);
    let ratio = besov_diff_norm(&square, s, Lp::Two) / besov_norm(&square, s, Lp::Two, &p).norm;
    assert!((0.2..5.0).contains(&ratio), "{ratio}");
}

/// Equivalence constant between the dyadic and translation norms for the
/// fixed profile; 1 suffices on rectangle indicators.
const DYADIC_SLACK: f64 = 1.0;
