//! Run configuration: grid, gauge group, seed and the list of tasks.
//!
//! Parsed from JSON. Unknown fields are rejected so a typo cannot silently
//! fall back to a default.

use std::path::Path;

use serde::{Deserialize, Serialize};
use ym2d::curves::{polygon_lasso, rectangle_lasso, Curve, Lasso};
use ym2d::spectral::{ModeTable, Smoothing, TorusGrid};

use crate::error::{LabError, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    #[serde(default)]
    pub grid: GridSpec,
    /// `n` of the gauge group SU(n).
    #[serde(default = "default_group")]
    pub group: usize,
    pub seed: u64,
    #[serde(default = "default_workers")]
    pub workers: usize,
    pub tasks: Vec<Task>,
}

fn default_group() -> usize {
    2
}

fn default_workers() -> usize {
    1
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub side: f64,
    pub n: usize,
}

impl Default for GridSpec {
    fn default() -> Self {
        GridSpec { side: 4.0, n: 512 }
    }
}

/// A plane curve given by its vertices (uniform in arc length), by explicit
/// `[t, x1, x2]` knots, or as an inscribed regular polygon.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum CurveSpec {
    Points(Vec<[f64; 2]>),
    Timed(Vec<[f64; 3]>),
    Circle {
        center: [f64; 2],
        radius: f64,
        segments: usize,
    },
}

impl CurveSpec {
    pub fn build(&self) -> Result<Curve> {
        match self {
            CurveSpec::Points(p) => Ok(Curve::through(p)?),
            CurveSpec::Timed(k) => Ok(Curve::try_from(k.clone())?),
            CurveSpec::Circle {
                center,
                radius,
                segments,
            } => {
                if *segments < 3 || !(*radius > 0.0) {
                    return Err(LabError::config("circle needs radius > 0 and at least 3 segments"));
                }
                Ok(Curve::through(&circle_points(*center, *radius, *segments))?)
            }
        }
    }
}

/// Vertices of the anticlockwise regular polygon starting at angle 0, closed.
pub fn circle_points(center: [f64; 2], radius: f64, segments: usize) -> Vec<[f64; 2]> {
    (0..=segments)
        .map(|i| {
            let a = std::f64::consts::TAU * (i % segments) as f64 / segments as f64;
            [center[0] + radius * a.cos(), center[1] + radius * a.sin()]
        })
        .collect()
}

/// A lasso, or a degenerate zero-area rectangle whose holonomy is the
/// identity.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum LoopSpec {
    Rectangle {
        corner: [f64; 2],
        width: f64,
        height: f64,
        #[serde(default)]
        base: Option<[f64; 2]>,
    },
    Polygon {
        vertices: Vec<[f64; 2]>,
        #[serde(default)]
        base: Option<[f64; 2]>,
    },
}

/// Built form of a [`LoopSpec`].
#[derive(Clone, Debug)]
pub enum LoopShape {
    /// Zero enclosed area.
    Point([f64; 2]),
    Lasso(Lasso),
}

impl LoopShape {
    pub fn area(&self) -> f64 {
        match self {
            LoopShape::Point(_) => 0.0,
            LoopShape::Lasso(l) => l.area(),
        }
    }

    /// Every point the composite curve visits at a vertex.
    pub fn vertices(&self) -> Vec<[f64; 2]> {
        match self {
            LoopShape::Point(p) => vec![*p],
            LoopShape::Lasso(l) => l.composite().points().to_vec(),
        }
    }

    /// Winding number of the loop around `p` (0 for degenerate loops).
    pub fn winding(&self, p: [f64; 2]) -> f64 {
        match self {
            LoopShape::Point(_) => 0.0,
            LoopShape::Lasso(l) => winding_number(l.polygon(), p),
        }
    }
}

impl LoopSpec {
    pub fn build(&self) -> Result<LoopShape> {
        match self {
            LoopSpec::Rectangle {
                corner,
                width,
                height,
                base,
            } => {
                if *width < 0.0 || *height < 0.0 {
                    return Err(LabError::config("rectangle sides must be nonnegative"));
                }
                if *width == 0.0 || *height == 0.0 {
                    if corner[0] <= 0.0 {
                        return Err(LabError::config("rectangle must lie in x1 > 0"));
                    }
                    return Ok(LoopShape::Point(*corner));
                }
                Ok(LoopShape::Lasso(rectangle_lasso(*corner, *width, *height, *base)?))
            }
            LoopSpec::Polygon { vertices, base } => {
                if vertices.len() < 3 {
                    return Err(LabError::config("polygon needs at least three vertices"));
                }
                Ok(LoopShape::Lasso(polygon_lasso(vertices, *base)?))
            }
        }
    }
}

/// Winding number of the closed polygon `poly` (closing edge implied) around
/// `p`, by summed turning angles.
pub fn winding_number(poly: &[[f64; 2]], p: [f64; 2]) -> f64 {
    let mut total = 0.0;
    for i in 0..poly.len() {
        let a = poly[i];
        let b = poly[(i + 1) % poly.len()];
        let (ax, ay) = (a[0] - p[0], a[1] - p[1]);
        let (bx, by) = (b[0] - p[0], b[1] - p[1]);
        total += (ax * by - ay * bx).atan2(ax * bx + ay * by);
    }
    total / std::f64::consts::TAU
}

/// One unit of work. `name` selects the report file `<out>/<name>.json`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Task {
    FirstLevelDecay(FirstLevelDecay),
    HolderFirst(HolderFirst),
    SecondLevel(SecondLevel),
    WilsonDensity(WilsonDensity),
    Independence(Independence),
    SampleField(SampleField),
    Transport(TransportTask),
    Lift(LiftTask),
}

impl Task {
    pub fn name(&self) -> &str {
        match self {
            Task::FirstLevelDecay(t) => &t.name,
            Task::HolderFirst(t) => &t.name,
            Task::SecondLevel(t) => &t.name,
            Task::WilsonDensity(t) => &t.name,
            Task::Independence(t) => &t.name,
            Task::SampleField(t) => &t.name,
            Task::Transport(t) => &t.name,
            Task::Lift(t) => &t.name,
        }
    }

    pub fn experiment(&self) -> &'static str {
        match self {
            Task::FirstLevelDecay(_) => "first_level_decay",
            Task::HolderFirst(_) => "holder_first",
            Task::SecondLevel(_) => "second_level",
            Task::WilsonDensity(_) => "wilson_density",
            Task::Independence(_) => "independence",
            Task::SampleField(_) => "sample_field",
            Task::Transport(_) => "transport",
            Task::Lift(_) => "lift",
        }
    }
}

/// `||X_{s,t} - X^(j)_{s,t}||_{L^2}` across `j` and across `t - s`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FirstLevelDecay {
    pub name: String,
    pub curve: CurveSpec,
    pub samples: usize,
    /// Reference level; absent means every resolved mode.
    #[serde(default)]
    pub reference_level: Option<i32>,
    /// `[s, t]` of the decay-in-`j` measurement.
    pub window: [f64; 2],
    /// Levels fitted against `j`.
    pub levels: Vec<i32>,
    /// Level of the `(t - s)` measurement.
    pub time_level: i32,
    pub start: f64,
    pub durations: Vec<f64>,
    #[serde(default)]
    pub tolerance: DecayTolerance,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DecayTolerance {
    /// Regularity `s` whose `-s` is the target slope in `j`.
    pub regularity: f64,
    pub slope_tol: f64,
    pub time_exponent: f64,
    pub time_tol: f64,
}

impl Default for DecayTolerance {
    fn default() -> Self {
        DecayTolerance {
            regularity: 0.4,
            slope_tol: 0.15,
            time_exponent: 0.5,
            time_tol: 0.1,
        }
    }
}

/// `||X^(j)_{s,t}||_{L^2}` across `t - s` and the variance identity.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HolderFirst {
    pub name: String,
    pub curve: CurveSpec,
    pub samples: usize,
    pub levels: Vec<i32>,
    pub start: f64,
    pub durations: Vec<f64>,
    #[serde(default)]
    pub tolerance: HolderTolerance,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct HolderTolerance {
    /// Regularity `s`; the exponent bound is `1/2 - s - margin`.
    pub regularity: f64,
    pub margin: f64,
    /// Standard errors allowed in the variance identity.
    pub variance_se: f64,
}

impl Default for HolderTolerance {
    fn default() -> Self {
        HolderTolerance {
            regularity: 0.05,
            margin: 0.1,
            variance_se: 4.0,
        }
    }
}

/// Second level: `(t - s)` exponent per level and consecutive-level
/// differences at a fixed window.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SecondLevel {
    pub name: String,
    pub curve: CurveSpec,
    pub samples: usize,
    pub levels: Vec<i32>,
    pub start: f64,
    pub durations: Vec<f64>,
    /// `[s, t]` of the Cauchy table.
    pub window: [f64; 2],
    /// Maximal curve-time step of the sub-grid the lift is built on.
    #[serde(default = "default_max_step")]
    pub max_step: f64,
    #[serde(default)]
    pub tolerance: SecondLevelTolerance,
}

fn default_max_step() -> f64 {
    1.0 / 1024.0
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SecondLevelTolerance {
    pub min_exponent: f64,
    /// Required ratio of the first to the last consecutive difference.
    pub min_decay: f64,
    /// Increases allowed in the sequence of differences, each within
    /// `inversion_se` combined standard errors.
    pub max_inversions: usize,
    pub inversion_se: f64,
}

impl Default for SecondLevelTolerance {
    fn default() -> Self {
        SecondLevelTolerance {
            min_exponent: 0.9,
            min_decay: 2.0,
            max_inversions: 1,
            inversion_se: 2.0,
        }
    }
}

/// Field-pipeline Wilson loops against the Lie Brownian motion oracle.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WilsonDensity {
    pub name: String,
    pub loops: Vec<LoopSpec>,
    pub samples: usize,
    /// Smoothing level; absent means the grid's finest level.
    #[serde(default)]
    pub level: Option<i32>,
    #[serde(default = "default_oracle_steps")]
    pub oracle_steps: usize,
    #[serde(default = "default_nodes")]
    pub nodes: usize,
    /// Index pairs of equal-area loops whose field moments are compared.
    #[serde(default)]
    pub equal_area: Vec<[usize; 2]>,
    #[serde(default)]
    pub tolerance: WilsonTolerance,
}

fn default_oracle_steps() -> usize {
    256
}

fn default_nodes() -> usize {
    ym2d::transport::DEFAULT_TRANSPORT_NODES
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct WilsonTolerance {
    /// Combined standard errors allowed between two moment estimates.
    pub moment_se: f64,
    /// Standard errors the oracle mean may move when its steps double.
    pub oracle_se: f64,
}

impl Default for WilsonTolerance {
    fn default() -> Self {
        WilsonTolerance {
            moment_se: 3.0,
            oracle_se: 1.0,
        }
    }
}

/// Correlations of Wilson loops with disjoint interiors.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Independence {
    pub name: String,
    pub loops: Vec<LoopSpec>,
    pub samples: usize,
    #[serde(default)]
    pub level: Option<i32>,
    #[serde(default = "default_nodes")]
    pub nodes: usize,
    /// Index pairs with disjoint interiors, expected uncorrelated.
    pub pairs: Vec<[usize; 2]>,
    /// Index pairs enclosing the same region, expected fully correlated.
    #[serde(default)]
    pub controls: Vec<[usize; 2]>,
    #[serde(default)]
    pub tolerance: IndependenceTolerance,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct IndependenceTolerance {
    /// `|corr| <= k / sqrt(N)` for disjoint pairs.
    pub k: f64,
    pub control_min: f64,
}

impl Default for IndependenceTolerance {
    fn default() -> Self {
        IndependenceTolerance {
            k: 3.0,
            control_min: 0.99,
        }
    }
}

/// Writes one smoothed noise field `W^(j)` to `<out>/<name>.json|.bin`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SampleField {
    pub name: String,
    pub level: i32,
    #[serde(default)]
    pub sample: usize,
}

/// Writes the parallel transport along a curve to `<out>/<name>.csv`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TransportTask {
    pub name: String,
    pub curve: CurveSpec,
    pub level: i32,
    #[serde(default = "default_nodes")]
    pub nodes: usize,
    #[serde(default)]
    pub sample: usize,
}

/// Writes the lifted step-2 path along a curve to `<out>/<name>.csv`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LiftTask {
    pub name: String,
    pub curve: CurveSpec,
    pub level: i32,
    #[serde(default = "default_lift_nodes")]
    pub nodes: usize,
    #[serde(default)]
    pub sample: usize,
}

fn default_lift_nodes() -> usize {
    256
}

impl Config {
    /// Parses and validates a config. Parse errors carry line and column.
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: Config = serde_json::from_str(text).map_err(|e| LabError::config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<(Self, Vec<u8>)> {
        let bytes = std::fs::read(path).map_err(|e| LabError::config(format!("{}: {e}", path.display())))?;
        let text = std::str::from_utf8(&bytes).map_err(|e| LabError::config(format!("{}: {e}", path.display())))?;
        Ok((Config::from_json(text)?, bytes))
    }

    pub fn grid(&self) -> Result<TorusGrid> {
        TorusGrid::new(self.grid.side, self.grid.n).map_err(|e| LabError::config(e.to_string()))
    }

    pub fn table(&self) -> Result<ModeTable> {
        Ok(ModeTable::new(self.grid()?))
    }

    /// Checks every task against the grid before anything runs.
    pub fn validate(&self) -> Result<()> {
        let grid = self.grid()?;
        if self.group < 2 {
            return Err(LabError::config(format!(
                "group must be SU(n) with n >= 2, got {}",
                self.group
            )));
        }
        if self.workers == 0 {
            return Err(LabError::config("workers must be at least 1"));
        }
        if self.tasks.is_empty() {
            return Err(LabError::config("no tasks"));
        }
        let mut names = std::collections::BTreeSet::new();
        for t in &self.tasks {
            let name = t.name();
            if name.is_empty() || name.contains(['/', '\\']) || name.starts_with('.') || name == "manifest" {
                return Err(LabError::config(format!("invalid task name {name:?}")));
            }
            if !names.insert(name) {
                return Err(LabError::config(format!("duplicate task name {name:?}")));
            }
            validate_task(t, &grid).map_err(|e| LabError::config(format!("task {name:?}: {}", strip(e))))?;
        }
        Ok(())
    }
}

fn strip(e: LabError) -> String {
    match e {
        LabError::Config(m) => m,
        other => other.to_string(),
    }
}

fn validate_task(t: &Task, grid: &TorusGrid) -> Result<()> {
    let j_max = grid.j_max();
    let level = |j: i32| -> Result<()> {
        if (-1..=j_max).contains(&j) {
            Ok(())
        } else {
            Err(LabError::config(format!("level {j} outside [-1, {j_max}]")))
        }
    };
    let samples = |n: usize| -> Result<()> {
        if n >= 2 {
            Ok(())
        } else {
            Err(LabError::config(format!("sample count must be at least 2, got {n}")))
        }
    };
    let curve = |c: &CurveSpec| -> Result<Curve> {
        let c = c.build()?;
        if let Some(p) = c.points().iter().find(|p| !grid.in_window(**p)) {
            return Err(LabError::config(format!(
                "curve point {p:?} outside the window {:?}",
                grid.window()
            )));
        }
        Ok(c)
    };
    let durations = |start: f64, d: &[f64]| -> Result<()> {
        if d.len() < 2 {
            return Err(LabError::config("need at least two durations"));
        }
        if d.iter().any(|&x| !(x > 0.0) || start < 0.0 || start + x > 1.0) {
            return Err(LabError::config(
                "durations must be positive with start + duration <= 1",
            ));
        }
        Ok(())
    };
    let window = |w: [f64; 2]| -> Result<()> {
        if 0.0 <= w[0] && w[0] < w[1] && w[1] <= 1.0 {
            Ok(())
        } else {
            Err(LabError::config(format!("window {w:?} must satisfy 0 <= s < t <= 1")))
        }
    };
    let loops = |specs: &[LoopSpec]| -> Result<Vec<LoopShape>> {
        if specs.is_empty() {
            return Err(LabError::config("no loops"));
        }
        specs
            .iter()
            .map(|s| {
                let l = s.build()?;
                if let Some(p) = l.vertices().iter().find(|p| !grid.in_window(**p)) {
                    return Err(LabError::config(format!(
                        "loop point {p:?} outside the window {:?}",
                        grid.window()
                    )));
                }
                Ok(l)
            })
            .collect()
    };
    let index = |pairs: &[[usize; 2]], n: usize| -> Result<()> {
        match pairs.iter().find(|p| p[0] >= n || p[1] >= n) {
            Some(p) => Err(LabError::config(format!("loop index pair {p:?} out of range"))),
            None => Ok(()),
        }
    };
    match t {
        Task::FirstLevelDecay(c) => {
            samples(c.samples)?;
            curve(&c.curve)?;
            window(c.window)?;
            if let Some(r) = c.reference_level {
                level(r)?;
            }
            if c.levels.iter().filter(|&&j| Some(j) != c.reference_level).count() < 2 {
                return Err(LabError::config("need at least two levels besides the reference"));
            }
            c.levels.iter().try_for_each(|&j| level(j))?;
            level(c.time_level)?;
            if Some(c.time_level) == c.reference_level {
                return Err(LabError::config("time_level must differ from the reference level"));
            }
            durations(c.start, &c.durations)
        }
        Task::HolderFirst(c) => {
            samples(c.samples)?;
            curve(&c.curve)?;
            if c.levels.is_empty() {
                return Err(LabError::config("no levels"));
            }
            c.levels.iter().try_for_each(|&j| level(j))?;
            durations(c.start, &c.durations)
        }
        Task::SecondLevel(c) => {
            samples(c.samples)?;
            curve(&c.curve)?;
            window(c.window)?;
            if c.levels.len() < 2 {
                return Err(LabError::config("need at least two levels"));
            }
            c.levels.iter().try_for_each(|&j| level(j))?;
            if c.levels.windows(2).any(|w| w[1] <= w[0]) {
                return Err(LabError::config("levels must be increasing"));
            }
            if !(c.max_step > 0.0 && c.max_step <= 1.0) {
                return Err(LabError::config("max_step must lie in (0, 1]"));
            }
            durations(c.start, &c.durations)
        }
        Task::WilsonDensity(c) => {
            samples(c.samples)?;
            c.level.map_or(Ok(()), level)?;
            let shapes = loops(&c.loops)?;
            index(&c.equal_area, shapes.len())?;
            for p in &c.equal_area {
                let (a, b) = (shapes[p[0]].area(), shapes[p[1]].area());
                if (a - b).abs() > 1e-9 * a.max(b).max(1.0) {
                    return Err(LabError::config(format!("loops {p:?} differ in area: {a} vs {b}")));
                }
            }
            if c.oracle_steps < 1 || c.nodes < 2 {
                return Err(LabError::config("oracle_steps and nodes must be positive"));
            }
            Ok(())
        }
        Task::Independence(c) => {
            samples(c.samples)?;
            c.level.map_or(Ok(()), level)?;
            let shapes = loops(&c.loops)?;
            index(&c.pairs, shapes.len())?;
            index(&c.controls, shapes.len())?;
            for p in &c.pairs {
                if p[0] == p[1] || overlap(&shapes[p[0]], &shapes[p[1]], grid) {
                    return Err(LabError::config(format!("loops {p:?} have overlapping interiors")));
                }
            }
            if c.nodes < 2 {
                return Err(LabError::config("nodes must be at least 2"));
            }
            Ok(())
        }
        Task::SampleField(c) => level(c.level),
        Task::Transport(c) => {
            level(c.level)?;
            curve(&c.curve)?;
            if c.nodes < 2 {
                return Err(LabError::config("nodes must be at least 2"));
            }
            Ok(())
        }
        Task::Lift(c) => {
            level(c.level)?;
            curve(&c.curve)?;
            if c.nodes < 2 {
                return Err(LabError::config("nodes must be at least 2"));
            }
            Ok(())
        }
    }
}

/// Whether two loops enclose a common open set, tested on the cell centers
/// of a grid four times finer than `grid`.
pub fn overlap(a: &LoopShape, b: &LoopShape, grid: &TorusGrid) -> bool {
    let (LoopShape::Lasso(la), LoopShape::Lasso(lb)) = (a, b) else {
        return false;
    };
    let ba = la.bounding_box();
    let bb = lb.bounding_box();
    let lo = [ba[0][0].max(bb[0][0]), ba[1][0].max(bb[1][0])];
    let hi = [ba[0][1].min(bb[0][1]), ba[1][1].min(bb[1][1])];
    if lo[0] >= hi[0] || lo[1] >= hi[1] {
        return false;
    }
    let h = grid.cell() / 4.0;
    let steps = |a: f64, b: f64| ((b - a) / h).ceil() as usize;
    for i in 0..steps(lo[0], hi[0]) {
        for k in 0..steps(lo[1], hi[1]) {
            let p = [lo[0] + (i as f64 + 0.5) * h, lo[1] + (k as f64 + 0.5) * h];
            if p[0] < hi[0] && p[1] < hi[1] && a.winding(p).abs() > 0.75 && b.winding(p).abs() > 0.75 {
                return true;
            }
        }
    }
    false
}

/// `Smoothing` of an optional level, defaulting to the grid's finest.
pub fn level_or_max(level: Option<i32>, grid: &TorusGrid) -> Smoothing {
    Smoothing::Level(level.unwrap_or(grid.j_max()))
}
