//! Step-2 truncated signatures: the group `G^(2)(V)`, Chen composition,
//! homogeneous norms, Hölder distances, and the lift of the smoothed noise
//! along a curve.

use std::fmt::Write as _;

use crate::curves::Curve;
use crate::ecal::{swept_coefficients, vertical_pieces};
use crate::error::{Error, Result};
use crate::spectral::{pair_coefficients, BandField, ModeTable, NoiseSample, Smoothing, VerticalLine};

/// `(1, x, xx)` with `x in V`, `xx in V (x) V` stored row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct Level2 {
    x: Vec<f64>,
    xx: Vec<f64>,
}

impl Level2 {
    pub fn identity(d: usize) -> Self {
        Self {
            x: vec![0.0; d],
            xx: vec![0.0; d * d],
        }
    }

    pub fn new(x: Vec<f64>, xx: Vec<f64>) -> Result<Self> {
        if xx.len() != x.len() * x.len() {
            return Err(Error::DimensionMismatch(format!(
                "second level of a {}-dimensional element needs {} entries, got {}",
                x.len(),
                x.len() * x.len(),
                xx.len()
            )));
        }
        if x.iter().chain(&xx).any(|v| !v.is_finite()) {
            return Err(Error::DimensionMismatch("entries must be finite".into()));
        }
        Ok(Self { x, xx })
    }

    /// Signature of a straight segment: `(1, d, d (x) d / 2)`.
    pub fn segment(d: &[f64]) -> Self {
        let n = d.len();
        let mut xx = vec![0.0; n * n];
        for i in 0..n {
            for k in 0..n {
                xx[i * n + k] = 0.5 * d[i] * d[k];
            }
        }
        Self { x: d.to_vec(), xx }
    }

    pub fn dim(&self) -> usize {
        self.x.len()
    }

    pub fn x(&self) -> &[f64] {
        &self.x
    }

    pub fn xx(&self) -> &[f64] {
        &self.xx
    }

    /// `(1, a, A) (x) (1, b, B) = (1, a + b, A + B + a (x) b)`.
    pub fn mul(&self, other: &Level2) -> Result<Level2> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch(format!(
                "cannot multiply elements over dimensions {} and {}",
                self.dim(),
                other.dim()
            )));
        }
        let n = self.dim();
        let x = self.x.iter().zip(&other.x).map(|(a, b)| a + b).collect();
        let mut xx = vec![0.0; n * n];
        for i in 0..n {
            for k in 0..n {
                xx[i * n + k] = self.xx[i * n + k] + other.xx[i * n + k] + self.x[i] * other.x[k];
            }
        }
        Ok(Level2 { x, xx })
    }

    /// `(1, -x, -xx + x (x) x)`.
    pub fn inverse(&self) -> Level2 {
        let n = self.dim();
        let mut xx = vec![0.0; n * n];
        for i in 0..n {
            for k in 0..n {
                xx[i * n + k] = -self.xx[i * n + k] + self.x[i] * self.x[k];
            }
        }
        Level2 {
            x: self.x.iter().map(|v| -v).collect(),
            xx,
        }
    }

    /// `|x| + |xx|^{1/2}` with Euclidean norms.
    pub fn cc_norm(&self) -> f64 {
        cc_norm_parts(&self.x, &self.xx)
    }

    /// `(1, l x, l^2 xx)`.
    pub fn dilate(&self, l: f64) -> Level2 {
        Level2 {
            x: self.x.iter().map(|v| l * v).collect(),
            xx: self.xx.iter().map(|v| l * l * v).collect(),
        }
    }

    /// `|Sym(xx) - x (x) x / 2|`, zero exactly on `G^(2)`.
    pub fn sym_defect(&self) -> f64 {
        let n = self.dim();
        let mut acc = 0.0f64;
        for i in 0..n {
            for k in 0..n {
                let sym = 0.5 * (self.xx[i * n + k] + self.xx[k * n + i]);
                acc = acc.max((sym - 0.5 * self.x[i] * self.x[k]).abs());
            }
        }
        acc
    }

    /// Antisymmetric part `(xx - xx^T) / 2` entry `(i, k)`.
    pub fn area(&self, i: usize, k: usize) -> f64 {
        let n = self.dim();
        0.5 * (self.xx[i * n + k] - self.xx[k * n + i])
    }

    pub fn max_abs_diff(&self, other: &Level2) -> f64 {
        self.x
            .iter()
            .zip(&other.x)
            .chain(self.xx.iter().zip(&other.xx))
            .fold(0.0, |m, (a, b)| m.max((a - b).abs()))
    }
}

fn cc_norm_parts(x: &[f64], xx: &[f64]) -> f64 {
    let a: f64 = x.iter().map(|v| v * v).sum::<f64>().sqrt();
    let b: f64 = xx.iter().map(|v| v * v).sum::<f64>().sqrt();
    a + b.sqrt()
}

/// `max(||a^{-1} b||, ||b^{-1} a||)`.
///
/// `a^{-1} (x) b` is formed as `(b - a, B - A - a (x) (b - a))`, which
/// vanishes exactly when `a = b`.
pub fn cc_dist(a: &Level2, b: &Level2) -> Result<f64> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch("elements differ in dimension".into()));
    }
    let mut ab = Level2::identity(a.dim());
    let mut ba = Level2::identity(a.dim());
    increment_into(a, b, &mut ab);
    increment_into(b, a, &mut ba);
    Ok(ab.cc_norm().max(ba.cc_norm()))
}

/// Values `X_{t_0, t_k}` of a step-2 path on a time grid.
#[derive(Clone, Debug, PartialEq)]
pub struct Level2Path {
    times: Vec<f64>,
    nodes: Vec<Level2>,
}

impl Level2Path {
    pub fn new(times: Vec<f64>, nodes: Vec<Level2>) -> Result<Self> {
        if times.len() != nodes.len() || times.len() < 2 {
            return Err(Error::DimensionMismatch(
                "path needs matching times and nodes, at least two".into(),
            ));
        }
        check_times(&times)?;
        let d = nodes[0].dim();
        if nodes.iter().any(|n| n.dim() != d) {
            return Err(Error::DimensionMismatch("nodes differ in dimension".into()));
        }
        Ok(Self { times, nodes })
    }

    /// Path that stays at the identity.
    pub fn constant(times: Vec<f64>, d: usize) -> Result<Self> {
        let nodes = vec![Level2::identity(d); times.len()];
        Self::new(times, nodes)
    }

    /// Exact signature of the piecewise-linear path through `points`,
    /// composed segment by segment with Chen's relation.
    pub fn sig_polyline(times: Vec<f64>, points: &[Vec<f64>]) -> Result<Self> {
        if points.len() != times.len() || points.len() < 2 {
            return Err(Error::DimensionMismatch("need one point per time, at least two".into()));
        }
        let d = points[0].len();
        if points.iter().any(|p| p.len() != d) {
            return Err(Error::DimensionMismatch("points differ in dimension".into()));
        }
        check_times(&times)?;
        let mut nodes = Vec::with_capacity(points.len());
        let mut cur = Level2::identity(d);
        nodes.push(cur.clone());
        for w in points.windows(2) {
            let delta: Vec<f64> = w[1].iter().zip(&w[0]).map(|(a, b)| a - b).collect();
            cur = cur.mul(&Level2::segment(&delta))?;
            nodes.push(cur.clone());
        }
        Ok(Self { times, nodes })
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn nodes(&self) -> &[Level2] {
        &self.nodes
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.nodes[0].dim()
    }

    /// `X_{s,t} = X_s^{-1} (x) X_t` between node indices.
    pub fn increment(&self, s: usize, t: usize) -> Level2 {
        let (a, b) = (&self.nodes[s], &self.nodes[t]);
        let mut out = Level2::identity(a.dim());
        increment_into(a, b, &mut out);
        out
    }

    /// Largest `|X_{s,u} - X_{s,t} (x) X_{t,u}|` over triples of node
    /// indices taken every `stride` nodes.
    pub fn chen_defect(&self, stride: usize) -> f64 {
        let idx: Vec<usize> = (0..self.len()).step_by(stride.max(1)).collect();
        let mut worst = 0.0f64;
        for (a, &s) in idx.iter().enumerate() {
            for (b, &t) in idx.iter().enumerate().skip(a + 1) {
                let st = self.increment(s, t);
                for &u in &idx[b + 1..] {
                    let composed = st.mul(&self.increment(t, u)).expect("same dimension");
                    worst = worst.max(composed.max_abs_diff(&self.increment(s, u)));
                }
            }
        }
        worst
    }

    /// Largest relative `|Sym(X_{s,t}^2) - X_{s,t} (x) X_{s,t} / 2|` over
    /// node pairs taken every `stride` nodes.
    pub fn sym_defect(&self, stride: usize) -> f64 {
        let idx: Vec<usize> = (0..self.len()).step_by(stride.max(1)).collect();
        let mut worst = 0.0f64;
        for (a, &s) in idx.iter().enumerate() {
            for &t in &idx[a + 1..] {
                let inc = self.increment(s, t);
                let scale = inc.x().iter().map(|v| v * v).sum::<f64>().max(1e-300);
                worst = worst.max(inc.sym_defect() / scale);
            }
        }
        worst
    }

    /// Writes rows `t, x_1..x_d, xx_11..xx_dd`.
    pub fn to_csv(&self) -> String {
        let d = self.dim();
        let mut out = String::from("t");
        for i in 1..=d {
            let _ = write!(out, ",x_{i}");
        }
        for i in 1..=d {
            for k in 1..=d {
                let _ = write!(out, ",xx_{i}{}{k}", if d >= 10 { "_" } else { "" });
            }
        }
        out.push('\n');
        for (t, n) in self.times.iter().zip(&self.nodes) {
            let _ = write!(out, "{t:?}");
            for v in n.x().iter().chain(n.xx()) {
                let _ = write!(out, ",{v:?}");
            }
            out.push('\n');
        }
        out
    }

    pub fn from_csv(text: &str) -> Result<Self> {
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        let header = lines.next().ok_or_else(|| Error::BadPathFile("empty file".into()))?;
        let cols: Vec<&str> = header.split(',').map(str::trim).collect();
        let n = cols.len().saturating_sub(1);
        let d = (((4 * n + 1) as f64).sqrt() as usize).saturating_sub(1) / 2;
        if cols.first() != Some(&"t") || d == 0 || d + d * d != n || cols[1] != "x_1" {
            return Err(Error::BadPathFile(format!("unrecognized header {header:?}")));
        }
        let mut times = vec![];
        let mut nodes = vec![];
        for (row, line) in lines.enumerate() {
            let vals: std::result::Result<Vec<f64>, _> = line.split(',').map(|v| v.trim().parse::<f64>()).collect();
            let vals = vals.map_err(|e| Error::BadPathFile(format!("row {}: {e}", row + 1)))?;
            if vals.len() != n + 1 {
                return Err(Error::BadPathFile(format!(
                    "row {} has {} fields, expected {}",
                    row + 1,
                    vals.len(),
                    n + 1
                )));
            }
            times.push(vals[0]);
            nodes.push(
                Level2::new(vals[1..=d].to_vec(), vals[d + 1..].to_vec())
                    .map_err(|e| Error::BadPathFile(format!("row {}: {e}", row + 1)))?,
            );
        }
        Level2Path::new(times, nodes).map_err(|e| Error::BadPathFile(e.to_string()))
    }
}

fn check_times(times: &[f64]) -> Result<()> {
    if times.iter().any(|t| !t.is_finite()) || times.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::DimensionMismatch("time grid must be strictly increasing".into()));
    }
    Ok(())
}

fn increment_into(a: &Level2, b: &Level2, out: &mut Level2) {
    // (x_t - x_s, xx_t - xx_s - x_s (x) (x_t - x_s))
    let n = a.dim();
    for i in 0..n {
        out.x[i] = b.x[i] - a.x[i];
    }
    for i in 0..n {
        for k in 0..n {
            out.xx[i * n + k] = b.xx[i * n + k] - a.xx[i * n + k] - a.x[i] * out.x[k];
        }
    }
}

/// `max_{s<t} d_CC(X_{s,t}, Y_{s,t}) / (t - s)^alpha` over all node pairs.
pub fn holder_dist(alpha: f64, x: &Level2Path, y: &Level2Path) -> Result<f64> {
    if x.times != y.times {
        return Err(Error::GridMismatch);
    }
    if x.dim() != y.dim() {
        return Err(Error::DimensionMismatch("paths differ in dimension".into()));
    }
    let d = x.dim();
    let mut xi = Level2::identity(d);
    let mut yi = Level2::identity(d);
    let mut worst = 0.0f64;
    for s in 0..x.len() {
        for t in s + 1..x.len() {
            increment_into(&x.nodes[s], &x.nodes[t], &mut xi);
            increment_into(&y.nodes[s], &y.nodes[t], &mut yi);
            let dist = cc_dist(&xi, &yi)?;
            let scale = (x.times[t] - x.times[s]).powf(alpha);
            worst = worst.max(dist / scale);
        }
    }
    Ok(worst)
}

/// First-level values `X^(j)(t_k) = <W, S_j E_c 1_{[t_0, t_k]}>` in basis
/// coordinates, one vector per node.
///
/// Increments are pairings of the noise with the exact swept regions: a
/// vertical piece sweeps a rectangle, integrated in closed form against the
/// band-limited field; any other piece uses the exact trapezoid Fourier
/// coefficients.
pub fn first_level(
    c: &Curve,
    noise: &NoiseSample,
    table: &ModeTable,
    smoothing: Smoothing,
    t_grid: &[f64],
) -> Result<Vec<Vec<f64>>> {
    check_times(t_grid)?;
    if t_grid.len() < 2 {
        return Err(Error::DimensionMismatch("time grid needs at least two nodes".into()));
    }
    let count = table.count_for(smoothing);
    if noise.modes() < count {
        return Err(Error::DimensionMismatch(format!(
            "noise sample realizes {} modes, pairing needs {count}",
            noise.modes()
        )));
    }
    let dim = noise.dim();
    let mut band: Option<BandField> = None;
    let mut lines: Vec<VerticalLine> = Vec::new();
    let mut out = Vec::with_capacity(t_grid.len());
    let mut cur = vec![0.0; dim];
    out.push(cur.clone());
    for w in t_grid.windows(2) {
        for piece in vertical_pieces(c, w[0], w[1]) {
            if piece.is_vertical() {
                let a = piece.p0[0];
                let line = match lines.iter().position(|l| l.abscissa() == a) {
                    Some(i) => &lines[i],
                    None => {
                        if band.is_none() {
                            band = Some(BandField::new(noise, table, smoothing)?);
                        }
                        lines.push(band.as_ref().expect("just built").vertical_line(a));
                        lines.last().expect("just pushed")
                    }
                };
                for (c_, v) in cur.iter_mut().zip(line.rect_integral(piece.p0[1], piece.p1[1])) {
                    *c_ += v;
                }
            } else {
                let coeffs = swept_coefficients(piece.p0, piece.p1, table, count);
                let inc = pair_coefficients(noise, table, &coeffs, smoothing)?;
                for (c_, v) in cur.iter_mut().zip(inc.coeffs()) {
                    *c_ += v;
                }
            }
        }
        out.push(cur.clone());
    }
    Ok(out)
}

/// `(X^(j), XX^(j))` along `c` on `t_grid`: the first level from
/// [`first_level`] and the second level as the exact signature of its
/// piecewise-linear interpolant.
pub fn lift_smoothed(
    c: &Curve,
    noise: &NoiseSample,
    table: &ModeTable,
    smoothing: Smoothing,
    t_grid: &[f64],
) -> Result<Level2Path> {
    let pts = first_level(c, noise, table, smoothing, t_grid)?;
    Level2Path::sig_polyline(t_grid.to_vec(), &pts)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn el(x: &[f64], xx: &[f64]) -> Level2 {
        Level2::new(x.to_vec(), xx.to_vec()).unwrap()
    }

    #[test]
    fn identity_and_inverse() {
        let g = el(&[1.0, -2.0], &[0.3, 0.1, -0.7, 2.0]);
        let e = Level2::identity(2);
        assert_eq!(e.mul(&g).unwrap(), g);
        let prod = g.mul(&g.inverse()).unwrap();
        assert!(prod.max_abs_diff(&e) < 1e-15);
        assert_eq!(e.cc_norm(), 0.0);
        assert!(g.mul(&Level2::identity(3)).is_err());
    }

    #[test]
    fn two_segments_second_level() {
        let u = [1.0, 0.5];
        let v = [-0.25, 2.0];
        let p = Level2::segment(&u).mul(&Level2::segment(&v)).unwrap();
        for i in 0..2 {
            for k in 0..2 {
                let expect = 0.5 * u[i] * u[k] + 0.5 * v[i] * v[k] + u[i] * v[k];
                assert!((p.xx()[i * 2 + k] - expect).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn pure_area_norm_and_dilation() {
        let a = el(&[0.0, 0.0], &[0.0, 0.5, -0.5, 0.0]);
        assert!((a.cc_norm() - 0.5f64.sqrt() * 2f64.sqrt().sqrt()).abs() < 1e-15);
        let g = el(&[0.3, -0.2], &[0.1, 0.4, -0.2, 0.02]);
        let l = 3.0;
        assert!((g.dilate(l).cc_norm() - l * g.cc_norm()).abs() < 1e-12);
    }

    #[test]
    fn closed_square_has_area_as_levy_area() {
        let pts: Vec<Vec<f64>> = [[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0], [0.0, 0.0]]
            .iter()
            .map(|p| p.to_vec())
            .collect();
        let path = Level2Path::sig_polyline(vec![0.0, 0.25, 0.5, 0.75, 1.0], &pts).unwrap();
        let last = path.increment(0, 4);
        assert!(last.x().iter().all(|v| v.abs() < 1e-15));
        assert!((last.area(0, 1) - 1.0).abs() < 1e-15);
        assert!(path.chen_defect(1) < 1e-14);
    }

    #[test]
    fn holder_distance_basics() {
        let pts: Vec<Vec<f64>> = (0..20)
            .map(|i| vec![(i as f64).sin(), (i as f64 * 0.3).cos()])
            .collect();
        let times: Vec<f64> = (0..20).map(|i| i as f64 / 19.0).collect();
        let p = Level2Path::sig_polyline(times.clone(), &pts).unwrap();
        assert_eq!(holder_dist(0.4, &p, &p).unwrap(), 0.0);
        let q = Level2Path::constant(times[..10].to_vec(), 2).unwrap();
        assert!(matches!(holder_dist(0.4, &p, &q), Err(Error::GridMismatch)));
    }

    #[test]
    fn csv_roundtrip() {
        let pts: Vec<Vec<f64>> = (0..5)
            .map(|i| vec![i as f64 * 0.1, -(i as f64), 1.0 / (i as f64 + 1.0)])
            .collect();
        let p = Level2Path::sig_polyline(vec![0.0, 0.1, 0.2, 0.6, 1.0], &pts).unwrap();
        let back = Level2Path::from_csv(&p.to_csv()).unwrap();
        assert_eq!(back, p);
        assert!(Level2Path::from_csv("a,b\n1,2\n").is_err());
    }
}
