//! The transfer operator `E_c` and its bilinear form `Ê_c`.
//!
//! For a curve `c` and a time function `h`, `E_c h` is the plane function
//! whose value at `(x1, x2)` sums `sgn(c2'(t*)) h(t*)` over the times `t*`
//! at which `c` crosses the level `x2` to the right of `x1` (and `x1 >= 0`).
//! `<H, E_c h> = Ê_c(H, h)` makes it the adjoint of the axial-gauge line
//! integral. Grid realizations rasterize by cell centers; the exact Fourier
//! coefficients used by the noise pairings integrate the swept trapezoids in
//! closed form.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::curves::{Curve, Segment};
use crate::error::{Error, Result};
use crate::spectral::{phi1, phi2, GridField, ModeTable, TorusGrid};

/// Piecewise-constant function on the line: `values[i]` holds on
/// `(breaks[i-1], breaks[i])`, with `breaks[-1] = -inf`, `breaks[len] = +inf`.
/// At a breakpoint the function takes the mean of its one-sided limits.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SteppedTimeFn {
    breaks: Vec<f64>,
    values: Vec<f64>,
}

impl SteppedTimeFn {
    pub fn new(breaks: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if values.len() != breaks.len() + 1 {
            return Err(Error::InvalidStepFunction(format!(
                "{} breakpoints need {} values, got {}",
                breaks.len(),
                breaks.len() + 1,
                values.len()
            )));
        }
        if breaks.windows(2).any(|w| !(w[1] > w[0])) || breaks.iter().any(|b| !b.is_finite()) {
            return Err(Error::InvalidStepFunction(
                "breakpoints must be finite and increasing".into(),
            ));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidStepFunction("values must be finite".into()));
        }
        Ok(Self { breaks, values })
    }

    pub fn constant(v: f64) -> Self {
        Self {
            breaks: vec![],
            values: vec![v],
        }
    }

    /// `1_{[s,t]}`; the zero function when `t <= s`.
    pub fn indicator(s: f64, t: f64) -> Self {
        if t <= s {
            return Self::constant(0.0);
        }
        Self {
            breaks: vec![s, t],
            values: vec![0.0, 1.0, 0.0],
        }
    }

    /// `s_c(t) = sgn(c2'(t))` on `[0, 1]`, zero elsewhere.
    pub fn sign_of_vertical_speed(c: &Curve) -> Self {
        let mut values = vec![0.0];
        for s in c.segments() {
            let d = s.delta()[1];
            values.push(if d == 0.0 { 0.0 } else { d.signum() });
        }
        values.push(0.0);
        Self {
            breaks: c.knots().to_vec(),
            values,
        }
    }

    pub fn breaks(&self) -> &[f64] {
        &self.breaks
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn eval(&self, t: f64) -> f64 {
        let i = self.breaks.partition_point(|&b| b < t);
        if i < self.breaks.len() && self.breaks[i] == t {
            0.5 * (self.values[i] + self.values[i + 1])
        } else {
            self.values[i]
        }
    }

    /// Maximal intervals inside `[lo, hi]` on which the function is constant,
    /// with their values (zero-valued pieces included).
    pub fn pieces(&self, lo: f64, hi: f64) -> Vec<(f64, f64, f64)> {
        let mut cuts = vec![lo];
        cuts.extend(self.breaks.iter().copied().filter(|&b| b > lo && b < hi));
        cuts.push(hi);
        cuts.windows(2)
            .filter(|w| w[1] > w[0])
            .map(|w| (w[0], w[1], self.eval(0.5 * (w[0] + w[1]))))
            .collect()
    }
}

/// Grid realization of `E_c h`: each cell takes the value at its center;
/// levels through a vertex get the mean of the one-sided limits.
pub fn apply_ec(c: &Curve, h: &SteppedTimeFn, grid: &TorusGrid) -> GridField {
    let n = grid.n();
    let hstep = grid.cell();
    let x_lo = grid.origin()[0];
    let mut out = GridField::zeros(*grid, 1);
    let data = out.channel_mut(0);
    let mut diff = vec![0.0; n + 1];
    // First cell whose center is >= 0.
    let first = ((0.0 - x_lo) / hstep - 0.5).ceil().clamp(0.0, n as f64) as usize;
    for i2 in 0..n {
        let y = grid.center(1, i2);
        diff.iter_mut().for_each(|d| *d = 0.0);
        let mut any = false;
        for s in c.segments() {
            let (y0, y1) = (s.p0[1], s.p1[1]);
            if y0 == y1 || y < y0.min(y1) || y > y0.max(y1) {
                continue;
            }
            let u = (y - y0) / (y1 - y0);
            let t = s.t0 + u * (s.t1 - s.t0);
            let x = s.p0[0] + u * (s.p1[0] - s.p0[0]);
            let mut w = (y1 - y0).signum() * h.eval(t);
            if y == y0 || y == y1 {
                w *= 0.5;
            }
            if w == 0.0 {
                continue;
            }
            // Cells with 0 <= center <= x.
            let last = (((x - x_lo) / hstep - 0.5).floor() + 1.0).clamp(0.0, n as f64) as usize;
            if last > first {
                diff[first] += w;
                diff[last] -= w;
                any = true;
            }
        }
        if !any {
            continue;
        }
        let row = &mut data[i2 * n..(i2 + 1) * n];
        let mut acc = 0.0;
        for (v, d) in row.iter_mut().zip(&diff) {
            acc += d;
            *v = acc;
        }
    }
    out
}

/// `Ê_c(H, h) = int h(t) c2'(t) int_0^{c1(t)} H(x1, c2(t)) dx1 dt`.
///
/// `H` is read as constant on grid cells, so the inner integral is exact
/// from cumulative row sums; the outer integral is the composite trapezoid
/// rule on at least `nodes` points, split at the knots of `c` and the
/// breakpoints of `h`.
pub fn ehat(c: &Curve, field: &GridField, h: &SteppedTimeFn, nodes: usize) -> f64 {
    let grid = field.grid();
    let n = grid.n();
    let step = grid.cell();
    let o = grid.origin();
    let data = field.channel(0);
    // cum[row][i] = integral of the row from o1 to o1 + i h.
    let mut cum = vec![0.0; n * (n + 1)];
    for i2 in 0..n {
        let row = &data[i2 * n..(i2 + 1) * n];
        let c_row = &mut cum[i2 * (n + 1)..(i2 + 1) * (n + 1)];
        for i1 in 0..n {
            c_row[i1 + 1] = c_row[i1] + step * row[i1];
        }
    }
    let row_cum = |i2: usize, x: f64| -> f64 {
        let pos = ((x - o[0]) / step).clamp(0.0, n as f64);
        let i = (pos.floor() as usize).min(n - 1);
        let frac = pos - i as f64;
        let c_row = &cum[i2 * (n + 1)..(i2 + 1) * (n + 1)];
        c_row[i] + frac * (c_row[i + 1] - c_row[i])
    };
    let inner = |p: [f64; 2]| -> f64 {
        let i2 = (((p[1] - o[1]) / step).floor() as i64).rem_euclid(n as i64) as usize;
        row_cum(i2, p[0]) - row_cum(i2, 0.0)
    };
    let mut total = 0.0;
    for seg in c.segments() {
        let v2 = seg.velocity()[1];
        if v2 == 0.0 {
            continue;
        }
        for (a, b, hv) in h.pieces(seg.t0, seg.t1) {
            if hv == 0.0 {
                continue;
            }
            let m = (((b - a) * nodes as f64).ceil() as usize).max(1);
            let dt = (b - a) / m as f64;
            let mut acc = 0.5 * (inner(seg.at(a)) + inner(seg.at(b)));
            for i in 1..m {
                acc += inner(seg.at(a + dt * i as f64));
            }
            total += hv * v2 * acc * dt;
        }
    }
    total
}

/// Exact Fourier coefficients `<E_c h, e_k>` at the first `count`
/// representatives of `table`.
pub fn ec_coefficients(c: &Curve, h: &SteppedTimeFn, table: &ModeTable, count: usize) -> Vec<Complex64> {
    let mut out = vec![Complex64::new(0.0, 0.0); count];
    for seg in c.segments() {
        if seg.delta()[1] == 0.0 {
            continue;
        }
        for (a, b, hv) in h.pieces(seg.t0, seg.t1) {
            if hv != 0.0 {
                add_swept_coefficients(&mut out, seg.at(a), seg.at(b), hv, table);
            }
        }
    }
    out
}

/// Exact coefficients of `E_c 1_{[s,t]}` restricted to one segment piece:
/// the signed region `{(x1, y): y between p0 and p1, 0 <= x1 <= x(y)}`.
pub fn swept_coefficients(p0: [f64; 2], p1: [f64; 2], table: &ModeTable, count: usize) -> Vec<Complex64> {
    let mut out = vec![Complex64::new(0.0, 0.0); count];
    add_swept_coefficients(&mut out, p0, p1, 1.0, table);
    out
}

fn add_swept_coefficients(out: &mut [Complex64], p0: [f64; 2], p1: [f64; 2], weight: f64, table: &ModeTable) {
    let grid = table.grid();
    let r = grid.reference();
    let inv_l = 1.0 / grid.side();
    let d = p1[1] - p0[1];
    if d == 0.0 {
        return;
    }
    let dx = p1[0] - p0[0];
    let xa = p0[0];
    let ya = p0[1];
    for (m, o) in table.modes().iter().zip(out.iter_mut()) {
        let [w1, w2] = m.xi;
        let front = Complex64::cis(-w2 * (ya - r[1])) * (d * weight * inv_l);
        let val = if w1 == 0.0 {
            phi1(-w2 * d) * xa + phi2(-w2 * d) * dx
        } else {
            let inv = Complex64::new(0.0, -1.0 / w1);
            (Complex64::cis(w1 * r[0]) * phi1(-w2 * d) - Complex64::cis(-w1 * (xa - r[0])) * phi1(-w2 * d - w1 * dx))
                * inv
        };
        *o += front * val;
    }
}

/// Segment pieces of `c` on `[s, t]` that move vertically.
pub fn vertical_pieces(c: &Curve, s: f64, t: f64) -> Vec<Segment> {
    let h = SteppedTimeFn::indicator(s, t);
    let mut out = vec![];
    for seg in c.segments() {
        if seg.delta()[1] == 0.0 {
            continue;
        }
        for (a, b, v) in h.pieces(seg.t0, seg.t1) {
            if v != 0.0 {
                out.push(Segment {
                    t0: a,
                    t1: b,
                    p0: seg.at(a),
                    p1: seg.at(b),
                });
            }
        }
    }
    out
}
