//! Piecewise-linear parametrized plane curves, lassos and the rotation count.
//!
//! A curve is linear between its knots `0 = t_0 < ... < t_m = 1` and
//! constant outside `[0, 1]`. Every vertex has a positive first coordinate,
//! so the whole curve lies in the half plane `x1 > 0` where the axial gauge
//! line integrals start.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const KNOT_TOL: f64 = 1e-14;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<[f64; 3]>", into = "Vec<[f64; 3]>")]
pub struct Curve {
    knots: Vec<f64>,
    points: Vec<[f64; 2]>,
}

impl TryFrom<Vec<[f64; 3]>> for Curve {
    type Error = Error;

    fn try_from(v: Vec<[f64; 3]>) -> Result<Self> {
        Curve::polyline(v.into_iter().map(|[t, a, b]| (t, [a, b])).collect())
    }
}

impl From<Curve> for Vec<[f64; 3]> {
    fn from(c: Curve) -> Self {
        c.knots.iter().zip(&c.points).map(|(t, p)| [*t, p[0], p[1]]).collect()
    }
}

/// One linear piece of a curve.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Segment {
    pub t0: f64,
    pub t1: f64,
    pub p0: [f64; 2],
    pub p1: [f64; 2],
}

impl Segment {
    pub fn delta(&self) -> [f64; 2] {
        [self.p1[0] - self.p0[0], self.p1[1] - self.p0[1]]
    }

    pub fn velocity(&self) -> [f64; 2] {
        let d = self.delta();
        let dt = self.t1 - self.t0;
        [d[0] / dt, d[1] / dt]
    }

    pub fn at(&self, t: f64) -> [f64; 2] {
        let u = ((t - self.t0) / (self.t1 - self.t0)).clamp(0.0, 1.0);
        [
            self.p0[0] + u * (self.p1[0] - self.p0[0]),
            self.p0[1] + u * (self.p1[1] - self.p0[1]),
        ]
    }

    pub fn is_vertical(&self) -> bool {
        self.p0[0] == self.p1[0]
    }
}

impl Curve {
    /// Polyline through `(t_i, p_i)`.
    pub fn polyline(vertices: Vec<(f64, [f64; 2])>) -> Result<Self> {
        if vertices.len() < 2 {
            return Err(Error::InvalidCurve("need at least two vertices".into()));
        }
        let (knots, points): (Vec<f64>, Vec<[f64; 2]>) = vertices.into_iter().unzip();
        if (knots[0]).abs() > KNOT_TOL || (knots[knots.len() - 1] - 1.0).abs() > KNOT_TOL {
            return Err(Error::InvalidCurve("knots must run from 0 to 1".into()));
        }
        if knots.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::InvalidCurve("knots must be strictly increasing".into()));
        }
        for p in &points {
            if !(p[0].is_finite() && p[1].is_finite()) {
                return Err(Error::InvalidCurve("vertices must be finite".into()));
            }
            if p[0] <= 0.0 {
                return Err(Error::InvalidCurve(format!(
                    "vertex ({}, {}) violates x1 > 0",
                    p[0], p[1]
                )));
            }
        }
        let mut knots = knots;
        let m = knots.len() - 1;
        knots[0] = 0.0;
        knots[m] = 1.0;
        Ok(Self { knots, points })
    }

    /// Polyline through `points` with knots proportional to arc length
    /// (uniform if the points are all equal).
    pub fn through(points: &[[f64; 2]]) -> Result<Self> {
        if points.len() < 2 {
            return Err(Error::InvalidCurve("need at least two vertices".into()));
        }
        let lens: Vec<f64> = points
            .windows(2)
            .map(|w| (w[1][0] - w[0][0]).hypot(w[1][1] - w[0][1]))
            .collect();
        let total: f64 = lens.iter().sum();
        let m = lens.len();
        let mut knots = Vec::with_capacity(m + 1);
        knots.push(0.0);
        let mut acc = 0.0;
        for (i, l) in lens.iter().enumerate() {
            acc += if total > 0.0 { *l } else { 1.0 };
            knots.push(if i + 1 == m {
                1.0
            } else {
                acc / if total > 0.0 { total } else { m as f64 }
            });
        }
        if knots.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::InvalidCurve("repeated consecutive vertices".into()));
        }
        Curve::polyline(knots.into_iter().zip(points.iter().copied()).collect())
    }

    pub fn knots(&self) -> &[f64] {
        &self.knots
    }

    pub fn points(&self) -> &[[f64; 2]] {
        &self.points
    }

    pub fn start(&self) -> [f64; 2] {
        self.points[0]
    }

    pub fn end(&self) -> [f64; 2] {
        self.points[self.points.len() - 1]
    }

    pub fn n_segments(&self) -> usize {
        self.knots.len() - 1
    }

    pub fn segment(&self, i: usize) -> Segment {
        Segment {
            t0: self.knots[i],
            t1: self.knots[i + 1],
            p0: self.points[i],
            p1: self.points[i + 1],
        }
    }

    pub fn segments(&self) -> impl Iterator<Item = Segment> + '_ {
        (0..self.n_segments()).map(move |i| self.segment(i))
    }

    /// Index of the segment whose half-open interval `[t_i, t_{i+1})`
    /// contains `t` (the last segment for `t >= t_{m-1}`).
    pub fn segment_index(&self, t: f64) -> usize {
        let m = self.n_segments();
        self.knots[1..m].partition_point(|&k| k <= t)
    }

    /// `c(t)`, constant outside `[0, 1]`.
    pub fn eval(&self, t: f64) -> [f64; 2] {
        if t <= 0.0 {
            return self.start();
        }
        if t >= 1.0 {
            return self.end();
        }
        self.segment(self.segment_index(t)).at(t)
    }

    /// Right derivative `c'(t)`; zero outside `[0, 1)`.
    pub fn velocity(&self, t: f64) -> [f64; 2] {
        if !(0.0..1.0).contains(&t) {
            return [0.0, 0.0];
        }
        self.segment(self.segment_index(t)).velocity()
    }

    pub fn is_closed(&self, tol: f64) -> bool {
        let (a, b) = (self.start(), self.end());
        (a[0] - b[0]).abs() <= tol && (a[1] - b[1]).abs() <= tol
    }

    /// `c(1 - t)`.
    pub fn reverse(&self) -> Curve {
        Curve {
            knots: self.knots.iter().rev().map(|t| 1.0 - t).collect(),
            points: self.points.iter().rev().copied().collect(),
        }
    }

    /// Runs `self` on `[0, 1/2]` and then `next` on `[1/2, 1]`.
    pub fn then(&self, next: &Curve) -> Result<Curve> {
        let (a, b) = (self.end(), next.start());
        if (a[0] - b[0]).abs() > 1e-12 || (a[1] - b[1]).abs() > 1e-12 {
            return Err(Error::EndpointMismatch { first: a, second: b });
        }
        let mut knots: Vec<f64> = self.knots.iter().map(|t| 0.5 * t).collect();
        let mut points = self.points.clone();
        knots.extend(next.knots[1..].iter().map(|t| 0.5 + 0.5 * t));
        points.extend_from_slice(&next.points[1..]);
        Ok(Curve { knots, points })
    }

    /// Largest first coordinate along the curve.
    pub fn max_x1(&self) -> f64 {
        self.points.iter().fold(f64::MIN, |m, p| m.max(p[0]))
    }

    /// Shoelace signed area of the closed polygon through the vertices
    /// (positive for anticlockwise loops).
    pub fn signed_area(&self) -> f64 {
        shoelace(&self.points)
    }

    /// Knot grid with every knot interval subdivided uniformly so that the
    /// total number of nodes is at least `min_nodes`.
    pub fn time_grid(&self, min_nodes: usize) -> Vec<f64> {
        let target = min_nodes.max(2) as f64;
        let mut grid = vec![0.0];
        for w in self.knots.windows(2) {
            let pieces = ((w[1] - w[0]) * target).ceil().max(1.0) as usize;
            for i in 1..=pieces {
                grid.push(if i == pieces {
                    w[1]
                } else {
                    w[0] + (w[1] - w[0]) * i as f64 / pieces as f64
                });
            }
        }
        grid
    }

    /// True when no two non-adjacent segments meet and adjacent segments
    /// share only their common vertex (closing segments of a loop count as
    /// adjacent).
    pub fn is_simple(&self) -> bool {
        let m = self.n_segments();
        let closed = self.is_closed(1e-12);
        for i in 0..m {
            for k in i + 1..m {
                let a = self.segment(i);
                let b = self.segment(k);
                let adjacent = k == i + 1 || (closed && i == 0 && k == m - 1);
                if adjacent {
                    if overlap_collinear(&a, &b) {
                        return false;
                    }
                    if m == 2 && closed {
                        return false;
                    }
                    continue;
                }
                if segments_intersect(a.p0, a.p1, b.p0, b.p1) {
                    return false;
                }
            }
        }
        true
    }

    /// `Rot(c) = sup_{s<t} ||E_c 1_{[s,t]}||_inf`.
    ///
    /// `E_c 1_{[s,t]}(x1, y)` counts the signed crossings of level `y` by `c`
    /// during `[s, t]` that lie to the right of `x1`. On each generic level
    /// the crossings are ordered in time; for each threshold `x1` the
    /// admissible crossings form a subsequence, and `[s, t]` selects a
    /// contiguous run of it, whose largest absolute sum is the spread of the
    /// prefix sums.
    pub fn rotation_count(&self) -> u32 {
        let mut levels: Vec<f64> = self.points.iter().map(|p| p[1]).collect();
        levels.sort_by(f64::total_cmp);
        levels.dedup();
        let mut best = 0i64;
        for w in levels.windows(2) {
            let y = 0.5 * (w[0] + w[1]);
            let mut crossings: Vec<(f64, f64, i64)> = Vec::new();
            for s in self.segments() {
                let (y0, y1) = (s.p0[1], s.p1[1]);
                if (y0 < y && y < y1) || (y1 < y && y < y0) {
                    let u = (y - y0) / (y1 - y0);
                    let t = s.t0 + u * (s.t1 - s.t0);
                    let x = s.p0[0] + u * (s.p1[0] - s.p0[0]);
                    crossings.push((t, x, if y1 > y0 { 1 } else { -1 }));
                }
            }
            crossings.sort_by(|a, b| a.0.total_cmp(&b.0));
            for &(_, threshold, _) in &crossings {
                let (mut acc, mut lo, mut hi) = (0i64, 0i64, 0i64);
                for &(_, x, sgn) in &crossings {
                    if x >= threshold {
                        acc += sgn;
                        lo = lo.min(acc);
                        hi = hi.max(acc);
                    }
                }
                best = best.max(hi - lo);
            }
        }
        best as u32
    }
}

/// `c2 c1`: `c1` on `[0, 1/2]`, then `c2` on `[1/2, 1]`.
pub fn concat(c2: &Curve, c1: &Curve) -> Result<Curve> {
    c1.then(c2)
}

/// Signed area of the polygon with the given vertices (closing edge implied).
pub fn shoelace(points: &[[f64; 2]]) -> f64 {
    let m = points.len();
    let mut acc = 0.0;
    for i in 0..m {
        let p = points[i];
        let q = points[(i + 1) % m];
        acc += p[0] * q[1] - q[0] * p[1];
    }
    0.5 * acc
}

fn orient(a: [f64; 2], b: [f64; 2], c: [f64; 2]) -> f64 {
    (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])
}

fn on_segment(a: [f64; 2], b: [f64; 2], p: [f64; 2]) -> bool {
    p[0] >= a[0].min(b[0]) && p[0] <= a[0].max(b[0]) && p[1] >= a[1].min(b[1]) && p[1] <= a[1].max(b[1])
}

/// Closed-segment intersection test.
pub fn segments_intersect(a: [f64; 2], b: [f64; 2], c: [f64; 2], d: [f64; 2]) -> bool {
    let o1 = orient(a, b, c);
    let o2 = orient(a, b, d);
    let o3 = orient(c, d, a);
    let o4 = orient(c, d, b);
    if ((o1 > 0.0 && o2 < 0.0) || (o1 < 0.0 && o2 > 0.0)) && ((o3 > 0.0 && o4 < 0.0) || (o3 < 0.0 && o4 > 0.0)) {
        return true;
    }
    (o1 == 0.0 && on_segment(a, b, c))
        || (o2 == 0.0 && on_segment(a, b, d))
        || (o3 == 0.0 && on_segment(c, d, a))
        || (o4 == 0.0 && on_segment(c, d, b))
}

/// Adjacent segments folding back onto each other.
fn overlap_collinear(a: &Segment, b: &Segment) -> bool {
    let da = a.delta();
    let db = b.delta();
    let cross = da[0] * db[1] - da[1] * db[0];
    let dot = da[0] * db[0] + da[1] * db[1];
    cross == 0.0 && dot < 0.0
}

/// A stem followed by a simple anticlockwise loop and the stem backwards.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "LassoSpec", into = "LassoSpec")]
pub struct Lasso {
    stem: Option<Curve>,
    loop_curve: Curve,
    composite: Curve,
}

/// Serialized form of a lasso: `{stem: [[t,x1,x2],...] | null, loop: [...]}`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct LassoSpec {
    #[serde(default)]
    pub stem: Option<Curve>,
    #[serde(rename = "loop")]
    pub loop_curve: Curve,
}

impl TryFrom<LassoSpec> for Lasso {
    type Error = Error;

    fn try_from(s: LassoSpec) -> Result<Self> {
        Lasso::new(s.stem, s.loop_curve)
    }
}

impl From<Lasso> for LassoSpec {
    fn from(l: Lasso) -> Self {
        LassoSpec {
            stem: l.stem,
            loop_curve: l.loop_curve,
        }
    }
}

impl Lasso {
    /// `stem` runs from the base point to the loop's start.
    pub fn new(stem: Option<Curve>, loop_curve: Curve) -> Result<Self> {
        if !loop_curve.is_closed(1e-12) {
            return Err(Error::InvalidLasso("loop is not closed".into()));
        }
        if loop_curve.n_segments() < 3 {
            return Err(Error::InvalidLasso("loop needs at least three segments".into()));
        }
        if !loop_curve.is_simple() {
            return Err(Error::InvalidLasso("loop is not simple".into()));
        }
        let area = loop_curve.signed_area();
        if area <= 0.0 {
            return Err(Error::InvalidLasso(format!(
                "loop must be anticlockwise with positive area, signed area {area}"
            )));
        }
        let composite = match &stem {
            None => loop_curve.clone(),
            Some(s) => {
                if !s.then(&loop_curve).is_ok() {
                    return Err(Error::InvalidLasso("stem does not end at the loop's start".into()));
                }
                s.then(&loop_curve)?.then(&s.reverse())?
            }
        };
        Ok(Self {
            stem,
            loop_curve,
            composite,
        })
    }

    pub fn stem(&self) -> Option<&Curve> {
        self.stem.as_ref()
    }

    pub fn loop_curve(&self) -> &Curve {
        &self.loop_curve
    }

    /// `stem-reversed . loop . stem` as one curve.
    pub fn composite(&self) -> &Curve {
        &self.composite
    }

    pub fn base_point(&self) -> [f64; 2] {
        self.composite.start()
    }

    /// `Leb(D(c))` by the shoelace formula.
    pub fn area(&self) -> f64 {
        self.loop_curve.signed_area()
    }

    /// Vertices of the enclosed polygon.
    pub fn polygon(&self) -> &[[f64; 2]] {
        let p = self.loop_curve.points();
        &p[..p.len() - 1]
    }

    /// Bounding box `[[x1_min, x1_max], [x2_min, x2_max]]` of the enclosed region.
    pub fn bounding_box(&self) -> [[f64; 2]; 2] {
        let mut b = [[f64::MAX, f64::MIN], [f64::MAX, f64::MIN]];
        for p in self.loop_curve.points() {
            for a in 0..2 {
                b[a][0] = b[a][0].min(p[a]);
                b[a][1] = b[a][1].max(p[a]);
            }
        }
        b
    }
}

/// Anticlockwise rectangle `[x1, x1+e1] x [x2, x2+e2]` starting at its
/// lower-left corner `x`, optionally reached by a straight stem from `base`.
pub fn rectangle_lasso(x: [f64; 2], e1: f64, e2: f64, base: Option<[f64; 2]>) -> Result<Lasso> {
    if !(e1 > 0.0 && e2 > 0.0) {
        return Err(Error::InvalidLasso(format!(
            "side lengths must be positive, got {e1} x {e2}"
        )));
    }
    if x[0] <= 0.0 {
        return Err(Error::InvalidLasso("rectangle must lie in x1 > 0".into()));
    }
    let loop_curve = Curve::through(&[x, [x[0] + e1, x[1]], [x[0] + e1, x[1] + e2], [x[0], x[1] + e2], x])?;
    let stem = match base {
        Some(b) if b != x => Some(Curve::through(&[b, x])?),
        _ => None,
    };
    Lasso::new(stem, loop_curve)
}

/// Simple anticlockwise loop through `vertices` (closing vertex implied).
pub fn polygon_lasso(vertices: &[[f64; 2]], base: Option<[f64; 2]>) -> Result<Lasso> {
    let mut pts = vertices.to_vec();
    pts.push(vertices[0]);
    let loop_curve = Curve::through(&pts)?;
    let stem = match base {
        Some(b) if b != vertices[0] => Some(Curve::through(&[b, vertices[0]])?),
        _ => None,
    };
    Lasso::new(stem, loop_curve)
}
