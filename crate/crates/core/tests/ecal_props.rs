use proptest::prelude::*;
use ym2d::curves::{shoelace, Curve};
use ym2d::ecal::{apply_ec, ec_coefficients, ehat, SteppedTimeFn};
use ym2d::spectral::{besov_norm_from_coefficients, GridField, ModeTable, TorusGrid};

/// Vertices on cell boundaries of the `N = 128` grid, so no vertex sits on
/// a rasterization level.
fn lattice_curve(max_len: usize) -> impl Strategy<Value = Curve> {
    prop::collection::vec((1u32..=64, 1u32..=64), 3..max_len).prop_filter_map("degenerate", |pts| {
        let pts: Vec<[f64; 2]> = pts.iter().map(|&(a, b)| [a as f64 / 32.0, b as f64 / 32.0]).collect();
        Curve::through(&pts).ok()
    })
}

fn grid128() -> TorusGrid {
    TorusGrid::new(4.0, 128).unwrap()
}

/// Winding number of the closed polygon around `p` by summed turning angle.
fn winding(points: &[[f64; 2]], p: [f64; 2]) -> f64 {
    let m = points.len();
    let mut total = 0.0;
    for i in 0..m {
        let a = [points[i][0] - p[0], points[i][1] - p[1]];
        let b = [points[(i + 1) % m][0] - p[0], points[(i + 1) % m][1] - p[1]];
        total += (a[0] * b[1] - a[1] * b[0]).atan2(a[0] * b[0] + a[1] * b[1]);
    }
    total / std::f64::consts::TAU
}

/// Whether `p` lies on one of the closed polyline's edges.
fn on_polyline(points: &[[f64; 2]], p: [f64; 2]) -> bool {
    points.windows(2).any(|w| {
        let (a, b) = (w[0], w[1]);
        let cross = (b[0] - a[0]) * (p[1] - a[1]) - (b[1] - a[1]) * (p[0] - a[0]);
        let dot = (p[0] - a[0]) * (b[0] - a[0]) + (p[1] - a[1]) * (b[1] - a[1]);
        let len2 = (b[0] - a[0]).powi(2) + (b[1] - a[1]).powi(2);
        cross.abs() < 1e-12 && (0.0..=len2).contains(&dot)
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn values_are_bounded_integers(c in lattice_curve(9), s in 0.0f64..1.0, len in 0.0f64..1.0) {
        let t = (s + len).min(1.0);
        let f = apply_ec(&c, &SteppedTimeFn::indicator(s, t), &grid128());
        let rot = c.rotation_count() as f64;
        for &v in f.channel(0) {
            prop_assert_eq!(v, v.round());
            prop_assert!(v.abs() <= rot, "value {} exceeds Rot {}", v, rot);
        }
    }

    #[test]
    fn additive_in_the_time_function(c in lattice_curve(8), a in 0.0f64..0.3, b in 0.35f64..0.65, e in 0.7f64..1.0) {
        let g = grid128();
        let whole = apply_ec(&c, &SteppedTimeFn::indicator(a, e), &g);
        let left = apply_ec(&c, &SteppedTimeFn::indicator(a, b), &g);
        let right = apply_ec(&c, &SteppedTimeFn::indicator(b, e), &g);
        for ((w, l), r) in whole.channel(0).iter().zip(left.channel(0)).zip(right.channel(0)) {
            prop_assert_eq!(*w, l + r);
        }
    }

    #[test]
    fn reversal_flips_the_sign(c in lattice_curve(8)) {
        let g = grid128();
        let h = SteppedTimeFn::indicator(0.0, 1.0);
        let fwd = apply_ec(&c, &h, &g);
        let back = apply_ec(&c.reverse(), &h, &g);
        for (x, y) in fwd.channel(0).iter().zip(back.channel(0)) {
            prop_assert_eq!(*x, -*y);
        }
    }

    #[test]
    fn closed_loops_give_the_winding_number(mut pts in prop::collection::vec((1u32..=64, 1u32..=64), 3..7)) {
        pts.push(pts[0]);
        let pts: Vec<[f64; 2]> = pts.iter().map(|&(a, b)| [a as f64 / 32.0, b as f64 / 32.0]).collect();
        let Ok(c) = Curve::through(&pts) else { return Ok(()) };
        let g = grid128();
        let f = apply_ec(&c, &SteppedTimeFn::indicator(0.0, 1.0), &g);
        for i2 in 0..g.n() {
            for i1 in 0..g.n() {
                let p = [g.center(0, i1), g.center(1, i2)];
                if on_polyline(&pts, p) {
                    continue;
                }
                let expect = if p[0] >= 0.0 { winding(&pts[..pts.len() - 1], p) } else { 0.0 };
                prop_assert!((f.get(0, i1, i2) - expect).abs() < 1e-9, "at {:?}: {} vs {}", p, f.get(0, i1, i2), expect);
            }
        }
    }

    #[test]
    fn green_theorem_for_closed_loops(mut pts in prop::collection::vec((1u32..=64, 1u32..=64), 3..7)) {
        pts.push(pts[0]);
        let pts: Vec<[f64; 2]> = pts.iter().map(|&(a, b)| [a as f64 / 32.0, b as f64 / 32.0]).collect();
        let Ok(c) = Curve::through(&pts) else { return Ok(()) };
        let g = grid128();
        let ones = GridField::from_fn(g, |_, _| 1.0);
        let v = ehat(&c, &ones, &SteppedTimeFn::constant(1.0), 10_000);
        prop_assert!((v - shoelace(&pts)).abs() < 1e-10, "{} vs {}", v, shoelace(&pts));
    }
}

#[test]
fn vertical_segment_sweeps_a_rectangle() {
    let g = grid128();
    let a = 1.25;
    let c = Curve::through(&[[a, 0.0], [a, 1.0]]).unwrap();
    let (s, t) = (0.25, 0.75);
    let f = apply_ec(&c, &SteppedTimeFn::indicator(s, t), &g);
    for i2 in 0..g.n() {
        for i1 in 0..g.n() {
            let (x, y) = (g.center(0, i1), g.center(1, i2));
            let inside = (0.0..=a).contains(&x) && (s..=t).contains(&y);
            assert_eq!(f.get(0, i1, i2), inside as u8 as f64, "({x}, {y})");
        }
    }
    // Test rectangles aligned with the cells: Ê integrates them exactly.
    let h = g.cell();
    for (x0, x1, y0, y1) in [
        (0.0, 0.5, 0.0, 1.0),
        (1.0, 2.0, 0.5, 0.625),
        (-0.5, 0.25, 0.125, 0.375),
        (0.5, 1.5, 0.7, 0.9),
    ] {
        let rect = GridField::indicator_rect(g, [x0, x1], [y0, y1]);
        let v = ehat(&c, &rect, &SteppedTimeFn::indicator(s, t), 10_000);
        let snap = |v: f64| (v / h).round() * h;
        let (x0, x1, y0, y1) = (snap(x0), snap(x1), snap(y0), snap(y1));
        let overlap = (x1.min(a) - x0.max(0.0)).max(0.0) * (y1.min(t) - y0.max(s)).max(0.0);
        assert!((v - overlap).abs() < 1e-3, "{v} vs {overlap}");
    }
}

#[test]
fn horizontal_curves_vanish() {
    let g = grid128();
    let c = Curve::through(&[[0.5, 1.0], [1.5, 1.0], [0.25, 1.0]]).unwrap();
    let f = apply_ec(&c, &SteppedTimeFn::constant(1.0), &g);
    assert!(f.channel(0).iter().all(|v| *v == 0.0));
    let z = GridField::zeros(g, 1);
    let c = Curve::through(&[[0.5, 0.2], [1.5, 1.0]]).unwrap();
    assert_eq!(ehat(&c, &z, &SteppedTimeFn::constant(1.0), 10_000), 0.0);
}

/// Time at which segment `i` of `c` reaches height `y`.
fn time_at_level(c: &Curve, i: usize, y: f64) -> f64 {
    let s = c.segment(i);
    s.t0 + (y - s.p0[1]) / (s.p1[1] - s.p0[1]) * (s.t1 - s.t0)
}

#[test]
fn ehat_is_adjoint_to_the_transfer_operator() {
    // Vertex heights and indicator endpoints sit on row boundaries and the
    // abscissae avoid cell centers, so the rasterization error is second
    // order.
    let g = TorusGrid::new(4.0, 512).unwrap();
    let c = Curve::through(&[
        [0.3137, 0.1875],
        [1.6911, 0.5],
        [1.1903, 1.8125],
        [0.6217, 1.125],
        [1.8793, 0.875],
    ])
    .unwrap();
    let fields = [
        GridField::from_fn(g, |x, y| (-((x - 1.0).powi(2) + (y - 1.0).powi(2))).exp()),
        GridField::from_fn(g, |x, y| (2.0 * x).sin() * y.cos() + 0.5),
    ];
    let window = SteppedTimeFn::indicator(time_at_level(&c, 0, 0.25), time_at_level(&c, 2, 1.5));
    for h in [
        window,
        SteppedTimeFn::sign_of_vertical_speed(&c),
        SteppedTimeFn::constant(1.0),
    ] {
        let e = apply_ec(&c, &h, &g);
        for f in &fields {
            let lhs = f.inner(0, &e);
            let rhs = ehat(&c, f, &h, 10_000);
            let rel = (lhs - rhs).abs() / rhs.abs().max(1e-12);
            assert!(rel <= 1e-3, "{lhs} vs {rhs}");
        }
    }
}

#[test]
fn besov_norm_scales_with_the_time_window() {
    let g = TorusGrid::new(4.0, 512).unwrap();
    let t = ModeTable::new(g);
    let c = Curve::through(&[[0.5, 0.0], [1.5, 2.0], [1.0, 0.5]]).unwrap();
    let s0 = 0.1;
    let pts: Vec<(f64, f64)> = (3..=8)
        .map(|k| {
            let len = (-(k as f64)).exp2();
            let co = ec_coefficients(&c, &SteppedTimeFn::indicator(s0, s0 + len), &t, t.len());
            (len.ln(), besov_norm_from_coefficients(&t, &co, 0.4).norm.ln())
        })
        .collect();
    let (slope, r2) = ols(&pts);
    assert!(slope >= 0.1 - 0.02 && r2 >= 0.9, "slope {slope}, R^2 {r2}");
}

fn ols(pts: &[(f64, f64)]) -> (f64, f64) {
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let syy: f64 = pts.iter().map(|p| (p.1 - my).powi(2)).sum();
    (sxy / sxx, sxy * sxy / (sxx * syy))
}
