//! Axial-gauge connection, `SU(n)` parallel transport and holonomies, and
//! the Lie-group Brownian motion used as the Wilson-loop reference law.
//!
//! In the axial gauge `A_1 = 0`, `A_2(x) = int_0^{x1} F_12(s, x2) ds`, so
//! along a curve `A(c'(t)) = c2'(t) int_0^{c1(t)} F_12(x1, c2(t)) dx1`.
//! Transport solves `U' = A(c') U`, `U(0) = I`.

use std::fmt::Write as _;

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::curves::{Curve, Lasso};
use crate::error::{Error, Result};
use crate::liealg::{AlgebraElement, CMat, GroupElement, SuAlgebra};
use crate::roughpath::{holder_dist, Level2Path};
use crate::spectral::{BandField, ModeTable, NoiseSample, Smoothing, VerticalLine};

/// Nodes used for transport when none are requested explicitly.
pub const DEFAULT_TRANSPORT_NODES: usize = 1 << 12;

/// Group-valued path on a time grid.
#[derive(Clone, Debug)]
pub struct TransportPath {
    times: Vec<f64>,
    nodes: Vec<GroupElement>,
    pub label: String,
    pub seed: Option<u64>,
    pub smoothing: Option<Smoothing>,
}

impl TransportPath {
    pub fn new(times: Vec<f64>, nodes: Vec<GroupElement>) -> Result<Self> {
        if times.len() != nodes.len() || times.is_empty() {
            return Err(Error::DimensionMismatch("transport needs one node per time".into()));
        }
        Ok(Self {
            times,
            nodes,
            label: String::new(),
            seed: None,
            smoothing: None,
        })
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn nodes(&self) -> &[GroupElement] {
        &self.nodes
    }

    pub fn last(&self) -> &GroupElement {
        &self.nodes[self.nodes.len() - 1]
    }

    /// `max_k ||U_k^* U_k - I||_max`.
    pub fn unitarity_drift(&self) -> f64 {
        self.nodes
            .iter()
            .map(GroupElement::unitarity_defect)
            .fold(0.0, f64::max)
    }

    /// `max_k |det U_k - 1|`.
    pub fn det_drift(&self) -> f64 {
        self.nodes
            .iter()
            .map(|u| (u.det() - Complex64::new(1.0, 0.0)).norm())
            .fold(0.0, f64::max)
    }

    /// `sup_k ||U_k - V_k||_HS` on a shared grid.
    pub fn sup_distance(&self, other: &TransportPath) -> Result<f64> {
        if self.times != other.times {
            return Err(Error::GridMismatch);
        }
        Ok(self
            .nodes
            .iter()
            .zip(&other.nodes)
            .map(|(a, b)| a.hs_distance(b))
            .fold(0.0, f64::max))
    }

    /// Real coordinates `(Re U_ab, Im U_ab)` row-major, per node.
    pub fn real_coordinates(&self) -> Vec<Vec<f64>> {
        self.nodes
            .iter()
            .map(|u| {
                let m = u.matrix();
                let n = m.nrows();
                let mut v = Vec::with_capacity(2 * n * n);
                for a in 0..n {
                    for b in 0..n {
                        v.push(m[(a, b)].re);
                        v.push(m[(a, b)].im);
                    }
                }
                v
            })
            .collect()
    }

    /// Step-2 lift of the matrix-valued path (piecewise-linear signature).
    pub fn lift(&self) -> Result<Level2Path> {
        Level2Path::sig_polyline(self.times.clone(), &self.real_coordinates())
    }

    /// Rows `t, re_11, im_11, re_12, ...`.
    pub fn to_csv(&self) -> String {
        let n = self.nodes[0].n();
        let mut out = String::from("t");
        for a in 1..=n {
            for b in 1..=n {
                let _ = write!(out, ",re_{a}{b},im_{a}{b}");
            }
        }
        out.push('\n');
        for (t, row) in self.times.iter().zip(self.real_coordinates()) {
            let _ = write!(out, "{t:?}");
            for v in row {
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
        let entries = cols.len().saturating_sub(1);
        let n = ((entries / 2) as f64).sqrt().round() as usize;
        if cols.first() != Some(&"t") || n == 0 || 2 * n * n != entries || cols[1] != "re_11" {
            return Err(Error::BadPathFile(format!("unrecognized header {header:?}")));
        }
        let mut times = vec![];
        let mut nodes = vec![];
        for (row, line) in lines.enumerate() {
            let vals: std::result::Result<Vec<f64>, _> = line.split(',').map(|v| v.trim().parse::<f64>()).collect();
            let vals = vals.map_err(|e| Error::BadPathFile(format!("row {}: {e}", row + 1)))?;
            if vals.len() != entries + 1 {
                return Err(Error::BadPathFile(format!("row {} has {} fields", row + 1, vals.len())));
            }
            times.push(vals[0]);
            let m = CMat::from_fn(n, n, |a, b| {
                let k = 1 + 2 * (a * n + b);
                Complex64::new(vals[k], vals[k + 1])
            });
            nodes.push(GroupElement::from_matrix_unchecked(m));
        }
        TransportPath::new(times, nodes).map_err(|e| Error::BadPathFile(e.to_string()))
    }
}

/// The axial-gauge connection of a smoothed noise sample.
#[derive(Clone, Debug)]
pub struct AxialGauge {
    band: BandField,
    lines: Vec<VerticalLine>,
}

impl AxialGauge {
    pub fn new(noise: &NoiseSample, table: &ModeTable, smoothing: Smoothing) -> Result<Self> {
        Ok(Self {
            band: BandField::new(noise, table, smoothing)?,
            lines: Vec::new(),
        })
    }

    pub fn from_band(band: BandField) -> Self {
        Self {
            band,
            lines: Vec::new(),
        }
    }

    pub fn band(&self) -> &BandField {
        &self.band
    }

    /// `A_2(x) = int_0^{x1} W^(j)(s, x2) ds`.
    pub fn a2(&self, x: [f64; 2]) -> AlgebraElement {
        match self.lines.iter().find(|l| l.abscissa() == x[0]) {
            Some(l) => l.eval(x[1]),
            None => self.band.row_integral(x[0], x[1]),
        }
    }

    /// Caches the factored row integrals on the vertical pieces of `c`.
    pub fn prepare(&mut self, c: &Curve) {
        for s in c.segments() {
            if s.is_vertical() && s.delta()[1] != 0.0 && !self.lines.iter().any(|l| l.abscissa() == s.p0[0]) {
                self.lines.push(self.band.vertical_line(s.p0[0]));
            }
        }
    }

    fn check_window(&self, c: &Curve) -> Result<()> {
        let grid = self.band.grid();
        for p in c.points() {
            if !grid.in_window(*p) {
                return Err(Error::OutsideWindow(p[0], p[1]));
            }
        }
        Ok(())
    }
}

/// `A(c'(t))` per unit time.
pub fn line_integral_a(gauge: &AxialGauge, c: &Curve, t: f64) -> Result<AlgebraElement> {
    let p = c.eval(t);
    if !gauge.band().grid().in_window(p) {
        return Err(Error::OutsideWindow(p[0], p[1]));
    }
    let v2 = c.velocity(t)[1];
    if v2 == 0.0 {
        return Ok(AlgebraElement::zero(gauge.band().n_matrix()));
    }
    Ok(gauge.a2(p).scale(v2))
}

/// Exponential-midpoint transport `U_{k+1} = exp(A(c'(t_mid)) dt) U_k`.
pub fn parallel_transport(c: &Curve, gauge: &AxialGauge, su: &SuAlgebra, t_grid: &[f64]) -> Result<TransportPath> {
    gauge.check_window(c)?;
    if su.dim() != gauge.band().dim() {
        return Err(Error::DimensionMismatch("algebra and noise differ in dimension".into()));
    }
    if t_grid.len() < 2 || t_grid.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::DimensionMismatch(
            "time grid must be increasing with two nodes".into(),
        ));
    }
    let local: Vec<VerticalLine> = c
        .segments()
        .filter(|s| s.is_vertical() && s.delta()[1] != 0.0)
        .filter(|s| !gauge.lines.iter().any(|l| l.abscissa() == s.p0[0]))
        .map(|s| gauge.band.vertical_line(s.p0[0]))
        .collect();
    let a2 = |x: [f64; 2]| match local.iter().find(|l| l.abscissa() == x[0]) {
        Some(l) => l.eval(x[1]),
        None => gauge.a2(x),
    };
    let mut nodes = Vec::with_capacity(t_grid.len());
    let mut u = GroupElement::identity(su.n());
    nodes.push(u.clone());
    for w in t_grid.windows(2) {
        let mid = 0.5 * (w[0] + w[1]);
        let v2 = c.velocity(mid)[1];
        if v2 != 0.0 {
            let a = a2(c.eval(mid)).scale(v2 * (w[1] - w[0]));
            u = &su.exp(&a) * &u;
        }
        nodes.push(u.clone());
    }
    TransportPath::new(t_grid.to_vec(), nodes)
}

/// `U(1)` along the composite lasso curve on its refined knot grid.
pub fn holonomy(lasso: &Lasso, gauge: &AxialGauge, su: &SuAlgebra, min_nodes: usize) -> Result<GroupElement> {
    let c = lasso.composite();
    let path = parallel_transport(c, gauge, su, &c.time_grid(min_nodes))?;
    Ok(path.last().clone())
}

/// `U(1)` along the composite lasso curve, refined until halving the step
/// moves it by at most `tol`.
pub fn holonomy_converged(lasso: &Lasso, gauge: &AxialGauge, su: &SuAlgebra, tol: f64) -> Result<GroupElement> {
    let (path, _) = parallel_transport_converged(lasso.composite(), gauge, su, DEFAULT_TRANSPORT_NODES, tol, 1 << 20)?;
    Ok(path.last().clone())
}

/// Transport whose step count is doubled until halving the step moves `U(1)`
/// by at most `tol` (HS norm). Returns the finer path and the last change.
pub fn parallel_transport_converged(
    c: &Curve,
    gauge: &AxialGauge,
    su: &SuAlgebra,
    min_nodes: usize,
    tol: f64,
    max_nodes: usize,
) -> Result<(TransportPath, f64)> {
    let mut nodes = min_nodes.max(2);
    let mut prev = parallel_transport(c, gauge, su, &c.time_grid(nodes))?;
    loop {
        nodes *= 2;
        let next = parallel_transport(c, gauge, su, &c.time_grid(nodes))?;
        let change = next.last().hs_distance(prev.last());
        if change <= tol || nodes >= max_nodes {
            return Ok((next, change));
        }
        prev = next;
    }
}

/// Cauchy diagnostics between transports at two smoothing levels.
#[derive(Clone, Debug, PartialEq)]
pub struct CauchyEntry {
    pub j: i32,
    pub j_prime: i32,
    /// `sup_t ||U^(j)(t) - U^(j')(t)||_HS`.
    pub sup_distance: f64,
    /// `alpha`-Hölder distance between the lifted matrix paths.
    pub holder: f64,
}

/// Pairwise transport distances across `levels` on one noise sample.
pub fn transport_cauchy(
    c: &Curve,
    noise: &NoiseSample,
    table: &ModeTable,
    su: &SuAlgebra,
    levels: &[i32],
    t_grid: &[f64],
    alpha: f64,
) -> Result<Vec<CauchyEntry>> {
    if levels.len() < 2 {
        return Err(Error::DimensionMismatch("need at least two levels".into()));
    }
    let mut paths = Vec::with_capacity(levels.len());
    for &j in levels {
        let gauge = AxialGauge::new(noise, table, Smoothing::Level(j))?;
        paths.push(parallel_transport(c, &gauge, su, t_grid)?);
    }
    let lifts: Vec<Level2Path> = paths.iter().map(TransportPath::lift).collect::<Result<_>>()?;
    let mut out = vec![];
    for a in 0..levels.len() {
        for b in a + 1..levels.len() {
            out.push(CauchyEntry {
                j: levels[a],
                j_prime: levels[b],
                sup_distance: paths[a].sup_distance(&paths[b])?,
                holder: holder_dist(alpha, &lifts[a], &lifts[b])?,
            });
        }
    }
    Ok(out)
}

/// Nondecreasing area schedule `tau -> Leb(D_tau)` starting at 0.
#[derive(Clone, Debug, PartialEq)]
pub struct AreaProcess {
    times: Vec<f64>,
    areas: Vec<f64>,
}

impl AreaProcess {
    pub fn new(times: Vec<f64>, areas: Vec<f64>) -> Result<Self> {
        if times.len() != areas.len() || times.len() < 2 {
            return Err(Error::InvalidSchedule);
        }
        if areas[0] != 0.0 || areas.windows(2).any(|w| w[1] < w[0]) || areas.iter().any(|a| !a.is_finite()) {
            return Err(Error::InvalidSchedule);
        }
        if times.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::InvalidSchedule);
        }
        Ok(Self { times, areas })
    }

    /// Area growing linearly to `total` over `steps` equal steps on `[0, 1]`.
    pub fn linear(total: f64, steps: usize) -> Result<Self> {
        if !(total >= 0.0) || steps == 0 {
            return Err(Error::InvalidSchedule);
        }
        let times: Vec<f64> = (0..=steps).map(|k| k as f64 / steps as f64).collect();
        let areas = times.iter().map(|t| t * total).collect();
        Self::new(times, areas)
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn areas(&self) -> &[f64] {
        &self.areas
    }

    pub fn total(&self) -> f64 {
        self.areas[self.areas.len() - 1]
    }
}

/// Draws a Gaussian algebra element with per-coordinate variance `var`.
fn gaussian(rng: &mut ChaCha8Rng, dim: usize, var: f64, n: usize) -> AlgebraElement {
    let s = var.sqrt();
    let coeffs = (0..dim)
        .map(|_| {
            let z: f64 = StandardNormal.sample(rng);
            s * z
        })
        .collect();
    AlgebraElement::from_coeffs(n, coeffs).expect("dimension from algebra")
}

/// `U_{k+1} = U_k exp(-dB_k)`, `dB_k` Gaussian in su(n) with per-coordinate
/// variance equal to the area increment.
pub fn lie_bm_oracle(area: &AreaProcess, seed: u64, su: &SuAlgebra) -> TransportPath {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut u = GroupElement::identity(su.n());
    let mut nodes = vec![u.clone()];
    for w in area.areas.windows(2) {
        let db = gaussian(&mut rng, su.dim(), w[1] - w[0], su.n());
        u = &u * &su.exp(&db.scale(-1.0));
        nodes.push(u.clone());
    }
    let mut p = TransportPath::new(area.times.clone(), nodes).expect("matching lengths");
    p.seed = Some(seed);
    p.label = "oracle".into();
    p
}

/// Endpoints of the oracle at `2 * coarse_steps` equal area steps and at
/// `coarse_steps` steps driven by the same Brownian increments (pairwise
/// sums), for step-refinement checks.
pub fn oracle_endpoint_pair(
    total: f64,
    coarse_steps: usize,
    seed: u64,
    su: &SuAlgebra,
) -> (GroupElement, GroupElement) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let var = total / (2 * coarse_steps) as f64;
    let mut fine = GroupElement::identity(su.n());
    let mut coarse = GroupElement::identity(su.n());
    for _ in 0..coarse_steps {
        let a = gaussian(&mut rng, su.dim(), var, su.n());
        let b = gaussian(&mut rng, su.dim(), var, su.n());
        fine = &fine * &su.exp(&a.scale(-1.0));
        fine = &fine * &su.exp(&b.scale(-1.0));
        coarse = &coarse * &su.exp(&(&a + &b).scale(-1.0));
    }
    (fine, coarse)
}
