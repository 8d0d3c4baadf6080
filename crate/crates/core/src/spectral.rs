//! Torus discretization, the dyadic Littlewood-Paley partition, spectral
//! white noise and Besov norms.
//!
//! Plane functions live on a periodic square `[o, o + L)^2` sampled at the
//! cell centers `o + h (i + 1/2)`, `h = L / N`. The Fourier basis is
//! `e_k(x) = exp(i xi_k . (x - x_ref)) / L`, orthonormal in `L^2(T^2)`, with
//! `xi_k = 2 pi k / L` and `x_ref` the center of cell `(0, 0)`. A grid field
//! is identified with the trigonometric polynomial that interpolates it, so
//! the grid inner product `h^2 sum f g` equals the coefficient inner product
//! exactly.

use std::f64::consts::PI;
use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::liealg::AlgebraElement;

/// Inner radius of the annulus carrying `rho_0`: `1 - 1/7`.
pub const RHO_INNER: f64 = 6.0 / 7.0;

/// Periodic square grid standing in for the plane.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TorusGrid {
    side: f64,
    n: usize,
    origin: [f64; 2],
}

impl TorusGrid {
    /// Grid of side `side` with `n` points per side, lower-left corner at
    /// `(-side/4, -side/4)` so that the axis `x1 = 0` sits a quarter side
    /// away from the periodic seam.
    pub fn new(side: f64, n: usize) -> Result<Self> {
        Self::with_origin(side, n, [-side / 4.0, -side / 4.0])
    }

    pub fn with_origin(side: f64, n: usize, origin: [f64; 2]) -> Result<Self> {
        if !(side > 0.0 && side.is_finite()) {
            return Err(Error::InvalidGrid(format!("side length {side} must be positive")));
        }
        if n < 4 || !n.is_power_of_two() {
            return Err(Error::InvalidGrid(format!(
                "points per side {n} must be a power of two >= 4"
            )));
        }
        if !(origin[0].is_finite() && origin[1].is_finite()) {
            return Err(Error::InvalidGrid("origin must be finite".into()));
        }
        let g = Self { side, n, origin };
        if g.j_max() < 0 {
            return Err(Error::InvalidGrid("grid too coarse for dyadic level 0".into()));
        }
        Ok(g)
    }

    pub fn side(&self) -> f64 {
        self.side
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn origin(&self) -> [f64; 2] {
        self.origin
    }

    /// Cell size `h = L / N`.
    pub fn cell(&self) -> f64 {
        self.side / self.n as f64
    }

    /// Reference point of the Fourier basis: the center of cell `(0, 0)`.
    pub fn reference(&self) -> [f64; 2] {
        let h = 0.5 * self.cell();
        [self.origin[0] + h, self.origin[1] + h]
    }

    /// Physical coordinate of cell center `i` along either axis.
    pub fn center(&self, axis: usize, i: usize) -> f64 {
        self.origin[axis] + self.cell() * (i as f64 + 0.5)
    }

    /// Largest `j` whose block `rho_j` (supported in `|xi| <= 2^(j+1)`)
    /// stays below the Nyquist frequency `pi N / L`.
    pub fn j_max(&self) -> i32 {
        let nyquist = PI * self.n as f64 / self.side;
        (nyquist.log2().floor() as i32) - 1
    }

    /// Signed frequency index stored at array position `idx`.
    pub fn signed_index(&self, idx: usize) -> i64 {
        let n = self.n as i64;
        let i = idx as i64;
        if i >= n / 2 {
            i - n
        } else {
            i
        }
    }

    /// Angular frequency `2 pi k / L`.
    pub fn wavenumber(&self, k: i64) -> f64 {
        2.0 * PI * k as f64 / self.side
    }

    /// Central window `[o + L/4, o + 3L/4]^2` inside which curves are placed.
    pub fn window(&self) -> [[f64; 2]; 2] {
        let q = self.side / 4.0;
        [
            [self.origin[0] + q, self.origin[0] + 3.0 * q],
            [self.origin[1] + q, self.origin[1] + 3.0 * q],
        ]
    }

    pub fn in_window(&self, p: [f64; 2]) -> bool {
        let w = self.window();
        let eps = 1e-12 * self.side;
        (0..2).all(|a| p[a] >= w[a][0] - eps && p[a] <= w[a][1] + eps)
    }

    pub fn len(&self) -> usize {
        self.n * self.n
    }

    pub fn is_empty(&self) -> bool {
        false
    }
}

/// Smooth cutoff: 1 on `[0, 6/7]`, 0 on `[1, inf)`, C-infinity in between.
pub fn cutoff(r: f64) -> f64 {
    if r <= RHO_INNER {
        return 1.0;
    }
    if r >= 1.0 {
        return 0.0;
    }
    let u = (r - RHO_INNER) / (1.0 - RHO_INNER);
    let bump = |x: f64| if x <= 0.0 { 0.0 } else { (-1.0 / x).exp() };
    let a = bump(1.0 - u);
    let b = bump(u);
    a / (a + b)
}

/// `rho_0(r) = cutoff(r/2) - cutoff(r)`: supported in `[6/7, 2]`, equal to 1
/// on `[1, 12/7]`, and `rho_0(r) + rho_0(r/2) = 1` on `[1, 24/7]`.
pub fn rho0(r: f64) -> f64 {
    cutoff(0.5 * r) - cutoff(r)
}

/// Multiplier `rho_j` at radius `r`, `j >= -1`.
pub fn rho(j: i32, r: f64) -> f64 {
    if j < 0 {
        cutoff(r)
    } else {
        rho0(r * (-(j as f64)).exp2())
    }
}

/// Multiplier `chi_j = sum_{i=-1}^{j-1} rho_i`; zero for `j = -1`.
pub fn chi(j: i32, r: f64) -> f64 {
    if j < 0 {
        0.0
    } else {
        cutoff(r * (-(j as f64)).exp2())
    }
}

/// Open radius bound outside which `chi_j` vanishes.
pub fn chi_support(j: i32) -> f64 {
    if j < 0 {
        0.0
    } else {
        (j as f64).exp2()
    }
}

/// Dyadic multipliers tabulated on a grid's frequency lattice.
#[derive(Clone, Debug)]
pub struct DyadicPartition {
    grid: TorusGrid,
    radius: Vec<f64>,
    rho: Vec<Vec<f64>>,
}

impl DyadicPartition {
    pub fn new(grid: TorusGrid) -> Self {
        let n = grid.n();
        let mut radius = Vec::with_capacity(n * n);
        for i2 in 0..n {
            let x2 = grid.wavenumber(grid.signed_index(i2));
            for i1 in 0..n {
                let x1 = grid.wavenumber(grid.signed_index(i1));
                radius.push(x1.hypot(x2));
            }
        }
        let rho = (-1..=grid.j_max())
            .map(|j| radius.iter().map(|&r| rho(j, r)).collect())
            .collect();
        Self { grid, radius, rho }
    }

    pub fn grid(&self) -> &TorusGrid {
        &self.grid
    }

    pub fn j_max(&self) -> i32 {
        self.grid.j_max()
    }

    /// `|xi|` at every lattice position (array layout of [`GridField`]).
    pub fn radius(&self) -> &[f64] {
        &self.radius
    }

    pub fn rho(&self, j: i32) -> Result<&[f64]> {
        check_level(j, self.j_max())?;
        Ok(&self.rho[(j + 1) as usize])
    }

    pub fn chi(&self, j: i32) -> Result<Vec<f64>> {
        check_level(j, self.j_max())?;
        Ok(self.radius.iter().map(|&r| chi(j, r)).collect())
    }
}

fn check_level(j: i32, max: i32) -> Result<()> {
    if j < -1 {
        Err(Error::LevelTooLow(j))
    } else if j > max {
        Err(Error::LevelTooHigh { level: j, max })
    } else {
        Ok(())
    }
}

/// Smoothing applied before pairing with the noise.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Smoothing {
    /// `S_j`, multiplier `chi_j`.
    Level(i32),
    /// Every resolved lattice mode.
    None,
}

impl Smoothing {
    pub fn multiplier(&self, r: f64) -> f64 {
        match self {
            Smoothing::Level(j) => chi(*j, r),
            Smoothing::None => 1.0,
        }
    }

    pub fn support(&self) -> f64 {
        match self {
            Smoothing::Level(j) => chi_support(*j),
            Smoothing::None => f64::INFINITY,
        }
    }

    fn check(&self, grid: &TorusGrid) -> Result<()> {
        match self {
            Smoothing::Level(j) => check_level(*j, grid.j_max()),
            Smoothing::None => Ok(()),
        }
    }
}

impl From<i32> for Smoothing {
    fn from(j: i32) -> Self {
        Smoothing::Level(j)
    }
}

/// One representative of a conjugate pair `{k, -k}` of lattice modes.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Mode {
    pub k: [i64; 2],
    pub xi: [f64; 2],
    pub radius: f64,
    /// `k = -k` modulo N; such a mode carries a real coefficient.
    pub self_conjugate: bool,
}

impl Mode {
    /// Multiplicity of the mode in a real sum over the full lattice.
    pub fn weight(&self) -> f64 {
        if self.self_conjugate {
            1.0
        } else {
            2.0
        }
    }

    /// Array position of `k` in the [`GridField`] layout.
    pub fn index(&self, n: usize) -> usize {
        let wrap = |k: i64| k.rem_euclid(n as i64) as usize;
        wrap(self.k[1]) * n + wrap(self.k[0])
    }
}

/// Representatives of all conjugate mode pairs, in increasing `|k|` order.
///
/// The order is what makes band-limited noise samples consistent: the first
/// `m` modes of a sample do not depend on how many modes were drawn.
#[derive(Clone, Debug)]
pub struct ModeTable {
    grid: TorusGrid,
    modes: Vec<Mode>,
}

impl ModeTable {
    pub fn new(grid: TorusGrid) -> Self {
        let n = grid.n() as i64;
        let half = n / 2;
        let neg = |k: i64| if k == -half { -half } else { -k };
        let mut modes = Vec::with_capacity((n * n / 2 + 2) as usize);
        for k2 in -half..half {
            for k1 in -half..half {
                let m = [neg(k1), neg(k2)];
                let self_conjugate = m == [k1, k2];
                if !self_conjugate && (k2, k1) < (m[1], m[0]) {
                    continue;
                }
                let xi = [grid.wavenumber(k1), grid.wavenumber(k2)];
                modes.push(Mode {
                    k: [k1, k2],
                    xi,
                    radius: xi[0].hypot(xi[1]),
                    self_conjugate,
                });
            }
        }
        modes.sort_by_key(|m| (m.k[0] * m.k[0] + m.k[1] * m.k[1], m.k[1], m.k[0]));
        Self { grid, modes }
    }

    pub fn grid(&self) -> &TorusGrid {
        &self.grid
    }

    pub fn modes(&self) -> &[Mode] {
        &self.modes
    }

    pub fn len(&self) -> usize {
        self.modes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.modes.is_empty()
    }

    /// Number of leading modes with `|xi| < radius`.
    pub fn count_below(&self, radius: f64) -> usize {
        if radius.is_infinite() {
            return self.modes.len();
        }
        // Sorted by |k|^2, hence by |xi|.
        self.modes.partition_point(|m| m.radius < radius)
    }

    /// Number of modes needed for pairings at `smoothing`.
    pub fn count_for(&self, smoothing: Smoothing) -> usize {
        self.count_below(smoothing.support())
    }

    /// Coefficients `f_k = <f, e_k>` of a grid channel at the first `count`
    /// representatives.
    pub fn coefficients(&self, field: &GridField, channel: usize, count: usize) -> Vec<Complex64> {
        let hat = field.spectrum(channel);
        let n = self.grid.n();
        self.modes[..count]
            .iter()
            .map(|m| {
                let c = hat[m.index(n)];
                if m.self_conjugate {
                    Complex64::new(c.re, 0.0)
                } else {
                    c
                }
            })
            .collect()
    }
}

/// Seeded spectral realization of the su(n)-valued white noise.
///
/// Coefficient `Z_{m,c}` multiplies the basis function of mode `m` in
/// channel `c`; `Z_{-k} = conj(Z_k)`. Real and imaginary parts of a generic
/// coefficient are independent `N(0, 1/2)`, self-conjugate coefficients are
/// real `N(0, 1)`, so every `L^2`-orthonormal real mode is standard normal.
#[derive(Clone, Debug, PartialEq)]
pub struct NoiseSample {
    seed: u64,
    dim: usize,
    modes: usize,
    coeffs: Vec<Complex64>,
}

impl NoiseSample {
    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Number of leading modes realized.
    pub fn modes(&self) -> usize {
        self.modes
    }

    /// Coefficient of mode `m` in channel `c`.
    pub fn coeff(&self, m: usize, c: usize) -> Complex64 {
        self.coeffs[m * self.dim + c]
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    /// Zeroes every channel except `keep`.
    pub fn restrict_to_channel(&mut self, keep: usize) {
        for (i, z) in self.coeffs.iter_mut().enumerate() {
            if i % self.dim != keep {
                *z = Complex64::new(0.0, 0.0);
            }
        }
    }
}

/// Full-resolution noise sample: every lattice mode, `dim` channels.
pub fn sample_noise(seed: u64, table: &ModeTable, dim: usize) -> NoiseSample {
    sample_noise_modes(seed, table, dim, table.len())
}

/// Noise sample realized on the modes with `|xi| < radius` only; it agrees
/// bit-for-bit with [`sample_noise`] on those modes.
pub fn sample_noise_band(seed: u64, table: &ModeTable, dim: usize, radius: f64) -> NoiseSample {
    sample_noise_modes(seed, table, dim, table.count_below(radius))
}

/// Noise sample sufficient for pairings at `smoothing`.
pub fn sample_noise_for(seed: u64, table: &ModeTable, dim: usize, smoothing: Smoothing) -> NoiseSample {
    sample_noise_modes(seed, table, dim, table.count_for(smoothing))
}

fn sample_noise_modes(seed: u64, table: &ModeTable, dim: usize, count: usize) -> NoiseSample {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let mut coeffs = Vec::with_capacity(count * dim);
    for m in &table.modes()[..count] {
        for _ in 0..dim {
            let a: f64 = StandardNormal.sample(&mut rng);
            if m.self_conjugate {
                coeffs.push(Complex64::new(a, 0.0));
            } else {
                let b: f64 = StandardNormal.sample(&mut rng);
                coeffs.push(Complex64::new(s * a, s * b));
            }
        }
    }
    NoiseSample {
        seed,
        dim,
        modes: count,
        coeffs,
    }
}

/// `<W, S f>` from the coefficients of `f` at the leading representatives.
pub fn pair_coefficients(
    noise: &NoiseSample,
    table: &ModeTable,
    coeffs: &[Complex64],
    smoothing: Smoothing,
) -> Result<AlgebraElement> {
    let count = table.count_for(smoothing).min(coeffs.len());
    if smoothing == Smoothing::None && coeffs.len() < table.len() {
        return Err(Error::DimensionMismatch(
            "unsmoothed pairing needs coefficients at every mode".into(),
        ));
    }
    if noise.modes() < count {
        return Err(Error::DimensionMismatch(format!(
            "noise sample realizes {} modes, pairing needs {count}",
            noise.modes()
        )));
    }
    let dim = noise.dim();
    let mut out = vec![0.0; dim];
    for (mi, (m, f)) in table.modes()[..count].iter().zip(coeffs).enumerate() {
        let w = m.weight() * smoothing.multiplier(m.radius);
        if w == 0.0 {
            continue;
        }
        let fc = f.conj();
        for (c, o) in out.iter_mut().enumerate() {
            *o += w * (noise.coeff(mi, c) * fc).re;
        }
    }
    let n = ((dim + 1) as f64).sqrt().round() as usize;
    AlgebraElement::from_coeffs(n, out)
}

/// `sum_k m(xi_k)^2 |f_k|^2 = ||S f||^2_{L^2}`: the per-coordinate variance
/// of the matching pairing.
pub fn smoothed_norm_sq(table: &ModeTable, coeffs: &[Complex64], smoothing: Smoothing) -> f64 {
    let count = table.count_for(smoothing).min(coeffs.len());
    table.modes()[..count]
        .iter()
        .zip(coeffs)
        .map(|(m, f)| {
            let mult = smoothing.multiplier(m.radius);
            m.weight() * mult * mult * f.norm_sqr()
        })
        .sum()
}

/// `<W, S_j f>` for a real grid function `f`, computed spectrally.
pub fn pair(noise: &NoiseSample, table: &ModeTable, f: &GridField, smoothing: Smoothing) -> Result<AlgebraElement> {
    smoothing.check(table.grid())?;
    if f.grid() != table.grid() {
        return Err(Error::DimensionMismatch(
            "field and mode table use different grids".into(),
        ));
    }
    let count = table.count_for(smoothing);
    let coeffs = table.coefficients(f, 0, count);
    pair_coefficients(noise, table, &coeffs, smoothing)
}

/// The smoothed field `W^(j) = S_j W` sampled at the grid cell centers, one
/// channel per basis coordinate.
pub fn smooth_field(noise: &NoiseSample, table: &ModeTable, j: i32) -> Result<GridField> {
    let grid = *table.grid();
    check_level(j, grid.j_max())?;
    let count = table.count_for(Smoothing::Level(j));
    if noise.modes() < count {
        return Err(Error::DimensionMismatch("noise sample does not cover the band".into()));
    }
    let n = grid.n();
    let dim = noise.dim();
    let mut data = Vec::with_capacity(dim * n * n);
    let fft = Fft2::new(n);
    for c in 0..dim {
        let mut buf = vec![Complex64::new(0.0, 0.0); n * n];
        for (mi, m) in table.modes()[..count].iter().enumerate() {
            let z = noise.coeff(mi, c) * chi(j, m.radius);
            buf[m.index(n)] = z;
            if !m.self_conjugate {
                let neg = Mode {
                    k: [-m.k[0], -m.k[1]],
                    ..*m
                };
                buf[neg.index(n)] = z.conj();
            }
        }
        fft.inverse(&mut buf);
        let scale = 1.0 / grid.side();
        data.extend(buf.iter().map(|z| z.re * scale));
    }
    Ok(GridField {
        grid,
        channels: dim,
        data,
    })
}

/// Real (or multi-channel) samples on the torus grid, row-major per channel
/// (`index = c N^2 + i2 N + i1`).
#[derive(Clone, Debug, PartialEq)]
pub struct GridField {
    grid: TorusGrid,
    channels: usize,
    data: Vec<f64>,
}

impl GridField {
    pub fn zeros(grid: TorusGrid, channels: usize) -> Self {
        Self {
            grid,
            channels,
            data: vec![0.0; channels * grid.len()],
        }
    }

    pub fn from_data(grid: TorusGrid, channels: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != channels * grid.len() || channels == 0 {
            return Err(Error::DimensionMismatch(format!(
                "expected {} samples, got {}",
                channels * grid.len(),
                data.len()
            )));
        }
        if data.iter().any(|v| !v.is_finite()) {
            return Err(Error::DimensionMismatch("field entries must be finite".into()));
        }
        Ok(Self { grid, channels, data })
    }

    /// Samples `f` at every cell center.
    pub fn from_fn(grid: TorusGrid, f: impl Fn(f64, f64) -> f64) -> Self {
        let n = grid.n();
        let mut data = Vec::with_capacity(n * n);
        for i2 in 0..n {
            let x2 = grid.center(1, i2);
            for i1 in 0..n {
                data.push(f(grid.center(0, i1), x2));
            }
        }
        Self {
            grid,
            channels: 1,
            data,
        }
    }

    /// Cell-center rasterization of an axis-parallel rectangle.
    pub fn indicator_rect(grid: TorusGrid, x: [f64; 2], y: [f64; 2]) -> Self {
        Self::from_fn(grid, |a, b| {
            if a >= x[0] && a <= x[1] && b >= y[0] && b <= y[1] {
                1.0
            } else {
                0.0
            }
        })
    }

    pub fn grid(&self) -> &TorusGrid {
        &self.grid
    }

    pub fn channels(&self) -> usize {
        self.channels
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn channel(&self, c: usize) -> &[f64] {
        let len = self.grid.len();
        &self.data[c * len..(c + 1) * len]
    }

    pub fn channel_mut(&mut self, c: usize) -> &mut [f64] {
        let len = self.grid.len();
        &mut self.data[c * len..(c + 1) * len]
    }

    pub fn get(&self, c: usize, i1: usize, i2: usize) -> f64 {
        let n = self.grid.n();
        self.data[c * n * n + i2 * n + i1]
    }

    /// Single channel as its own field.
    pub fn take_channel(&self, c: usize) -> GridField {
        GridField {
            grid: self.grid,
            channels: 1,
            data: self.channel(c).to_vec(),
        }
    }

    pub fn scaled(&self, a: f64) -> GridField {
        GridField {
            grid: self.grid,
            channels: self.channels,
            data: self.data.iter().map(|v| a * v).collect(),
        }
    }

    /// `a self + b other`.
    pub fn combine(&self, a: f64, other: &GridField, b: f64) -> Result<GridField> {
        if self.grid != other.grid || self.channels != other.channels {
            return Err(Error::DimensionMismatch("fields differ in shape".into()));
        }
        Ok(GridField {
            grid: self.grid,
            channels: self.channels,
            data: self.data.iter().zip(&other.data).map(|(x, y)| a * x + b * y).collect(),
        })
    }

    /// Grid `L^2` inner product of channel `c` with `other`'s channel 0.
    pub fn inner(&self, c: usize, other: &GridField) -> f64 {
        let h = self.grid.cell();
        h * h
            * self
                .channel(c)
                .iter()
                .zip(other.channel(0))
                .map(|(a, b)| a * b)
                .sum::<f64>()
    }

    pub fn l2_norm(&self, c: usize) -> f64 {
        let h = self.grid.cell();
        (h * h * self.channel(c).iter().map(|v| v * v).sum::<f64>()).sqrt()
    }

    pub fn max_abs(&self, c: usize) -> f64 {
        self.channel(c).iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Fourier coefficients `<f, e_k>` of channel `c` in array layout.
    pub fn spectrum(&self, c: usize) -> Vec<Complex64> {
        let n = self.grid.n();
        let mut buf: Vec<Complex64> = self.channel(c).iter().map(|&v| Complex64::new(v, 0.0)).collect();
        Fft2::new(n).forward(&mut buf);
        let h = self.grid.cell();
        let scale = h * h / self.grid.side();
        buf.iter_mut().for_each(|z| *z *= scale);
        buf
    }

    /// Inverse of [`GridField::spectrum`] (real part).
    pub fn from_spectrum(grid: TorusGrid, hat: &[Complex64]) -> GridField {
        let n = grid.n();
        let mut buf = hat.to_vec();
        Fft2::new(n).inverse(&mut buf);
        let scale = 1.0 / grid.side();
        GridField {
            grid,
            channels: 1,
            data: buf.iter().map(|z| z.re * scale).collect(),
        }
    }

    /// Applies a radial multiplier `m(|xi|)` to channel `c`.
    pub fn filtered(&self, c: usize, partition: &DyadicPartition, m: &[f64]) -> GridField {
        let mut hat = self.spectrum(c);
        debug_assert_eq!(partition.radius().len(), hat.len());
        hat.iter_mut().zip(m).for_each(|(z, w)| *z *= *w);
        GridField::from_spectrum(self.grid, &hat)
    }

    /// Periodic translation `(tau_s f)(x) = f(x + s h)` by whole cells.
    pub fn shifted(&self, c: usize, s: [i64; 2]) -> Vec<f64> {
        let n = self.grid.n() as i64;
        let src = self.channel(c);
        let mut out = Vec::with_capacity(src.len());
        for i2 in 0..n {
            let j2 = (i2 + s[1]).rem_euclid(n);
            for i1 in 0..n {
                let j1 = (i1 + s[0]).rem_euclid(n);
                out.push(src[(j2 * n + j1) as usize]);
            }
        }
        out
    }

    /// Writes `<stem>.bin` (little-endian f64, row-major per channel) and the
    /// JSON header `<stem>.json`.
    pub fn write(&self, stem: &Path) -> Result<(PathBuf, PathBuf)> {
        let bin = stem.with_extension("bin");
        let json = stem.with_extension("json");
        let header = FieldHeader {
            format: FIELD_FORMAT.into(),
            side_length: self.grid.side(),
            points_per_side: self.grid.n(),
            origin: self.grid.origin(),
            channels: self.channels,
        };
        fs::write(&json, serde_json::to_vec_pretty(&header)?)?;
        let mut f = fs::File::create(&bin)?;
        let mut bytes = Vec::with_capacity(self.data.len() * 8);
        for v in &self.data {
            bytes.extend_from_slice(&v.to_le_bytes());
        }
        f.write_all(&bytes)?;
        Ok((bin, json))
    }

    /// Reads a field written by [`GridField::write`]; `path` may name either file.
    pub fn read(path: &Path) -> Result<Self> {
        let header: FieldHeader = serde_json::from_slice(&fs::read(path.with_extension("json"))?)
            .map_err(|e| Error::BadFieldFile(format!("header: {e}")))?;
        if header.format != FIELD_FORMAT {
            return Err(Error::BadFieldFile(format!("unknown format tag {:?}", header.format)));
        }
        let grid = TorusGrid::with_origin(header.side_length, header.points_per_side, header.origin)
            .map_err(|e| Error::BadFieldFile(e.to_string()))?;
        let bytes = fs::read(path.with_extension("bin"))?;
        let expected = header.channels * grid.len() * 8;
        if bytes.len() != expected || header.channels == 0 {
            return Err(Error::BadFieldFile(format!(
                "header promises {expected} bytes, file has {}",
                bytes.len()
            )));
        }
        let data = bytes
            .chunks_exact(8)
            .map(|b| f64::from_le_bytes(b.try_into().expect("8-byte chunk")))
            .collect();
        GridField::from_data(grid, header.channels, data).map_err(|e| Error::BadFieldFile(e.to_string()))
    }
}

pub const FIELD_FORMAT: &str = "ym2d-gridfield";

/// JSON header accompanying a binary field dump.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct FieldHeader {
    pub format: String,
    #[serde(rename = "L")]
    pub side_length: f64,
    #[serde(rename = "N")]
    pub points_per_side: usize,
    pub origin: [f64; 2],
    pub channels: usize,
}

/// Exponent of the Lebesgue norm used in Besov computations.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Lp {
    Two,
    Inf,
}

impl Lp {
    fn norm(&self, grid: &TorusGrid, v: &[f64]) -> f64 {
        match self {
            Lp::Two => {
                let h = grid.cell();
                (h * h * v.iter().map(|x| x * x).sum::<f64>()).sqrt()
            }
            Lp::Inf => v.iter().fold(0.0, |m, x| m.max(x.abs())),
        }
    }

    pub fn exponent_inv(&self) -> f64 {
        match self {
            Lp::Two => 0.5,
            Lp::Inf => 0.0,
        }
    }
}

/// Dyadic Besov norm and the block profile it was taken over.
#[derive(Clone, Debug)]
pub struct BesovProfile {
    /// `sup_j 2^{js} ||Delta_j f||_{L^p}`.
    pub norm: f64,
    /// `(j, ||Delta_j f||_{L^p})` for `j = -1..=j_max`.
    pub blocks: Vec<(i32, f64)>,
}

impl BesovProfile {
    /// Least-squares slope of `log2 ||Delta_j f||` against `j` over `range`.
    pub fn block_slope(&self, range: std::ops::RangeInclusive<i32>) -> f64 {
        let pts: Vec<(f64, f64)> = self
            .blocks
            .iter()
            .filter(|(j, v)| range.contains(j) && *v > 0.0)
            .map(|(j, v)| (*j as f64, v.log2()))
            .collect();
        let n = pts.len() as f64;
        let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
        let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
        let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
        let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
        sxy / sxx
    }
}

/// `||f||_{B^s_{p,inf}}` over the resolved levels, with `Delta_j f` computed
/// spectrally (channel 0).
pub fn besov_norm(f: &GridField, s: f64, p: Lp, partition: &DyadicPartition) -> BesovProfile {
    let grid = f.grid();
    let hat = f.spectrum(0);
    let mut blocks = Vec::new();
    let mut norm = 0.0f64;
    for j in -1..=partition.j_max() {
        let rho = partition.rho(j).expect("level in range");
        let v = match p {
            Lp::Two => {
                let e: f64 = hat.iter().zip(rho).map(|(z, r)| r * r * z.norm_sqr()).sum();
                e.sqrt()
            }
            Lp::Inf => {
                let filtered: Vec<Complex64> = hat.iter().zip(rho).map(|(z, r)| z * r).collect();
                let back = GridField::from_spectrum(*grid, &filtered);
                back.max_abs(0)
            }
        };
        norm = norm.max((j as f64 * s).exp2() * v);
        blocks.push((j, v));
    }
    BesovProfile { norm, blocks }
}

/// `L^2` dyadic Besov profile of a real function given by its exact
/// coefficients at the leading representatives of `table` (Parseval).
pub fn besov_norm_from_coefficients(table: &ModeTable, coeffs: &[Complex64], s: f64) -> BesovProfile {
    let j_max = table.grid().j_max();
    let mut energy = vec![0.0; (j_max + 2) as usize];
    for (m, f) in table.modes().iter().zip(coeffs) {
        let e = m.weight() * f.norm_sqr();
        for (slot, j) in energy.iter_mut().zip(-1..=j_max) {
            let r = rho(j, m.radius);
            *slot += r * r * e;
        }
    }
    let mut norm = 0.0f64;
    let blocks = (-1..=j_max)
        .zip(energy)
        .map(|(j, e)| {
            let v = e.sqrt();
            norm = norm.max((j as f64 * s).exp2() * v);
            (j, v)
        })
        .collect();
    BesovProfile { norm, blocks }
}

/// Lattice shifts (in cells) probed by the translation seminorm: axis and
/// diagonal directions at dyadic magnitudes with `|h| <= L/4`.
pub fn seminorm_shifts(grid: &TorusGrid) -> Vec<[i64; 2]> {
    let limit = (grid.n() / 4) as i64;
    let mut out = Vec::new();
    let mut m = 1i64;
    while m <= limit {
        out.extend_from_slice(&[[m, 0], [0, m], [m, m], [m, -m]]);
        m *= 2;
    }
    out
}

/// `sup_h ||f - tau_h f||_{L^p} / |h|^s` over [`seminorm_shifts`].
pub fn besov_diff_seminorm(f: &GridField, s: f64, p: Lp) -> f64 {
    let grid = f.grid();
    let base = f.channel(0);
    let h = grid.cell();
    seminorm_shifts(grid)
        .into_iter()
        .map(|sh| {
            let moved = f.shifted(0, sh);
            let diff: Vec<f64> = base.iter().zip(&moved).map(|(a, b)| a - b).collect();
            let len = h * ((sh[0] * sh[0] + sh[1] * sh[1]) as f64).sqrt();
            p.norm(grid, &diff) / len.powf(s)
        })
        .fold(0.0, f64::max)
}

/// `||f||'_{B^s_{p,inf}} = ||f||_{L^p} + |f|'`.
pub fn besov_diff_norm(f: &GridField, s: f64, p: Lp) -> f64 {
    p.norm(f.grid(), f.channel(0)) + besov_diff_seminorm(f, s, p)
}

/// Cached row/column FFT plans for an `N x N` array.
#[derive(Clone)]
pub struct Fft2 {
    n: usize,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl Fft2 {
    pub fn new(n: usize) -> Self {
        let mut planner = FftPlanner::new();
        Self {
            n,
            forward: planner.plan_fft_forward(n),
            inverse: planner.plan_fft_inverse(n),
        }
    }

    /// Unnormalized `sum_i a_i exp(-2 pi i k.i / N)`.
    pub fn forward(&self, data: &mut [Complex64]) {
        self.run(data, &self.forward);
    }

    /// Unnormalized `sum_k a_k exp(+2 pi i k.i / N)`.
    pub fn inverse(&self, data: &mut [Complex64]) {
        self.run(data, &self.inverse);
    }

    fn run(&self, data: &mut [Complex64], plan: &Arc<dyn Fft<f64>>) {
        let n = self.n;
        assert_eq!(data.len(), n * n);
        plan.process(data);
        let mut col = vec![Complex64::new(0.0, 0.0); n];
        for i1 in 0..n {
            for i2 in 0..n {
                col[i2] = data[i2 * n + i1];
            }
            plan.process(&mut col);
            for i2 in 0..n {
                data[i2 * n + i1] = col[i2];
            }
        }
    }
}

impl std::fmt::Debug for Fft2 {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "Fft2({})", self.n)
    }
}

/// The smoothed noise as an exact trigonometric polynomial: point values and
/// horizontal line integrals at arbitrary positions.
#[derive(Clone, Debug)]
pub struct BandField {
    grid: TorusGrid,
    dim: usize,
    terms: Vec<BandTerm>,
}

#[derive(Clone, Debug)]
struct BandTerm {
    k: [i64; 2],
    xi: [f64; 2],
    /// `weight * multiplier * Z / L`, one entry per channel.
    amp: Vec<Complex64>,
}

impl BandField {
    pub fn new(noise: &NoiseSample, table: &ModeTable, smoothing: Smoothing) -> Result<Self> {
        smoothing.check(table.grid())?;
        let count = table.count_for(smoothing);
        if noise.modes() < count {
            return Err(Error::DimensionMismatch("noise sample does not cover the band".into()));
        }
        let grid = *table.grid();
        let dim = noise.dim();
        let inv_l = 1.0 / grid.side();
        let terms = table.modes()[..count]
            .iter()
            .enumerate()
            .filter_map(|(mi, m)| {
                let w = m.weight() * smoothing.multiplier(m.radius) * inv_l;
                (w != 0.0).then(|| BandTerm {
                    k: m.k,
                    xi: m.xi,
                    amp: (0..dim).map(|c| noise.coeff(mi, c) * w).collect(),
                })
            })
            .collect();
        Ok(Self { grid, dim, terms })
    }

    pub fn grid(&self) -> &TorusGrid {
        &self.grid
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn n_matrix(&self) -> usize {
        ((self.dim + 1) as f64).sqrt().round() as usize
    }

    /// `W^(j)(x)`.
    pub fn value(&self, x: [f64; 2]) -> AlgebraElement {
        let r = self.grid.reference();
        let mut out = vec![0.0; self.dim];
        for t in &self.terms {
            let ph = Complex64::cis(t.xi[0] * (x[0] - r[0]) + t.xi[1] * (x[1] - r[1]));
            for (o, a) in out.iter_mut().zip(&t.amp) {
                *o += (a * ph).re;
            }
        }
        AlgebraElement::from_coeffs(self.n_matrix(), out).expect("dimension from noise")
    }

    /// `int_0^a W^(j)(x1, y) dx1` (signed when `a < 0`).
    pub fn row_integral(&self, a: f64, y: f64) -> AlgebraElement {
        let r = self.grid.reference();
        let mut out = vec![0.0; self.dim];
        for t in &self.terms {
            let ph = Complex64::cis(t.xi[1] * (y - r[1])) * exp_integral(t.xi[0], -r[0], a - r[0]);
            for (o, amp) in out.iter_mut().zip(&t.amp) {
                *o += (amp * ph).re;
            }
        }
        AlgebraElement::from_coeffs(self.n_matrix(), out).expect("dimension from noise")
    }

    /// Row integrals along the fixed vertical line `x1 = a`, factored over
    /// the second frequency index so each evaluation costs `O(sqrt(modes))`.
    pub fn vertical_line(&self, a: f64) -> VerticalLine {
        let r = self.grid.reference();
        let half = (self.grid.n() / 2) as i64;
        // Fold every term onto k2 >= 0 using conjugate symmetry.
        let mut kmax = 0i64;
        for t in &self.terms {
            kmax = kmax.max(t.k[1].abs());
        }
        let width = (kmax + 1) as usize;
        let mut b = vec![Complex64::new(0.0, 0.0); width * self.dim];
        for t in &self.terms {
            // The term contributes Re(amp * I(xi1) * e^{i xi2 (y - r2)}).
            let i1 = exp_integral(t.xi[0], -r[0], a - r[0]);
            let (k2, conj) = if t.k[1] >= 0 && t.k[1] != -half {
                (t.k[1], false)
            } else {
                (-t.k[1], true)
            };
            for c in 0..self.dim {
                let v = t.amp[c] * i1;
                // Re(v e^{i w}) = Re(conj(v) e^{-i w}).
                b[k2 as usize * self.dim + c] += if conj { v.conj() } else { v };
            }
        }
        VerticalLine {
            a,
            dim: self.dim,
            n: self.n_matrix(),
            base: self.grid.wavenumber(1),
            ref2: r[1],
            width,
            b,
        }
    }
}

/// Precomputed `y -> int_0^a W^(j)(x1, y) dx1` for one vertical line.
#[derive(Clone, Debug)]
pub struct VerticalLine {
    a: f64,
    dim: usize,
    n: usize,
    base: f64,
    ref2: f64,
    width: usize,
    b: Vec<Complex64>,
}

impl VerticalLine {
    pub fn abscissa(&self) -> f64 {
        self.a
    }

    pub fn eval(&self, y: f64) -> AlgebraElement {
        let mut out = vec![0.0; self.dim];
        self.eval_into(y, &mut out);
        AlgebraElement::from_coeffs(self.n, out).expect("dimension from noise")
    }

    pub fn eval_into(&self, y: f64, out: &mut [f64]) {
        out.iter_mut().for_each(|o| *o = 0.0);
        let step = Complex64::cis(self.base * (y - self.ref2));
        let mut ph = Complex64::new(1.0, 0.0);
        for k2 in 0..self.width {
            if k2 > 0 && k2 % 32 == 0 {
                // Reset the running phase to bound accumulated rounding.
                ph = Complex64::cis(self.base * k2 as f64 * (y - self.ref2));
            }
            let row = &self.b[k2 * self.dim..(k2 + 1) * self.dim];
            for (o, v) in out.iter_mut().zip(row) {
                *o += (v * ph).re;
            }
            ph *= step;
        }
    }

    /// `int_{y0}^{y1} int_0^a W^(j)(x1, y) dx1 dy`, exactly.
    pub fn rect_integral(&self, y0: f64, y1: f64) -> Vec<f64> {
        let mut out = vec![0.0; self.dim];
        for k2 in 0..self.width {
            let w = self.base * k2 as f64;
            let e = exp_integral(w, y0 - self.ref2, y1 - self.ref2);
            let row = &self.b[k2 * self.dim..(k2 + 1) * self.dim];
            for (o, v) in out.iter_mut().zip(row) {
                *o += (v * e).re;
            }
        }
        out
    }
}

/// `int_a^b exp(i w x) dx`, stable for small `w (b - a)`.
pub fn exp_integral(w: f64, a: f64, b: f64) -> Complex64 {
    let d = b - a;
    let z = w * d;
    Complex64::cis(w * a) * d * phi1(z)
}

/// `(e^{iz} - 1) / (iz)` with its series near zero.
pub fn phi1(z: f64) -> Complex64 {
    if z.abs() < 1e-3 {
        let z2 = z * z;
        Complex64::new(1.0 - z2 / 6.0 + z2 * z2 / 120.0, z / 2.0 - z * z2 / 24.0)
    } else {
        (Complex64::cis(z) - 1.0) / Complex64::new(0.0, z)
    }
}

/// `int_0^1 u e^{izu} du` with its series near zero.
pub fn phi2(z: f64) -> Complex64 {
    if z.abs() < 1e-2 {
        // sum_n (iz)^n / (n! (n + 2))
        let iz = Complex64::new(0.0, z);
        let mut term = Complex64::new(1.0, 0.0);
        let mut sum = Complex64::new(0.5, 0.0);
        for n in 1..8 {
            term = term * iz / n as f64;
            sum += term / (n + 2) as f64;
        }
        sum
    } else {
        let e = Complex64::cis(z);
        let iz = Complex64::new(0.0, z);
        e / iz - (e - 1.0) / (iz * iz)
    }
}
