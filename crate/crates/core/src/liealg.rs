//! The Lie algebra su(n) and the group SU(n).
//!
//! Algebra elements are stored as real coordinates over a fixed basis that is
//! orthonormal for the Hilbert-Schmidt pairing `<X, Y> = Tr X* Y`. Group
//! elements are plain complex matrices.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};

/// Dense complex matrix used for both algebra and group elements.
pub type CMat = DMatrix<Complex64>;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);
const I: Complex64 = Complex64::new(0.0, 1.0);

/// Orthonormal basis of su(n) ordered as: antisymmetric real pairs,
/// symmetric imaginary pairs, then diagonal traceless generators.
pub fn basis(n: usize) -> Result<Vec<CMat>> {
    if n < 2 {
        return Err(Error::InvalidDimension(n));
    }
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let mut out = Vec::with_capacity(n * n - 1);
    for a in 0..n {
        for b in (a + 1)..n {
            let mut m = CMat::zeros(n, n);
            m[(a, b)] = Complex64::new(s, 0.0);
            m[(b, a)] = Complex64::new(-s, 0.0);
            out.push(m);
        }
    }
    for a in 0..n {
        for b in (a + 1)..n {
            let mut m = CMat::zeros(n, n);
            m[(a, b)] = Complex64::new(0.0, s);
            m[(b, a)] = Complex64::new(0.0, s);
            out.push(m);
        }
    }
    for k in 1..n {
        let norm = ((k * (k + 1)) as f64).sqrt();
        let mut m = CMat::zeros(n, n);
        for d in 0..k {
            m[(d, d)] = Complex64::new(0.0, 1.0 / norm);
        }
        m[(k, k)] = Complex64::new(0.0, -(k as f64) / norm);
        out.push(m);
    }
    Ok(out)
}

/// Hilbert-Schmidt pairing `Tr X* Y`.
pub fn hs_inner(x: &CMat, y: &CMat) -> Result<Complex64> {
    if x.shape() != y.shape() {
        return Err(Error::ShapeMismatch {
            left: x.shape(),
            right: y.shape(),
        });
    }
    Ok(x.iter().zip(y.iter()).map(|(a, b)| a.conj() * b).sum())
}

/// Element of su(n) in coordinates over the orthonormal basis.
#[derive(Clone, PartialEq)]
pub struct AlgebraElement {
    n: usize,
    coeffs: Vec<f64>,
}

impl AlgebraElement {
    pub fn zero(n: usize) -> Self {
        Self {
            n,
            coeffs: vec![0.0; n * n - 1],
        }
    }

    pub fn from_coeffs(n: usize, coeffs: Vec<f64>) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidDimension(n));
        }
        if coeffs.len() != n * n - 1 {
            return Err(Error::CoefficientCount {
                expected: n * n - 1,
                got: coeffs.len(),
            });
        }
        Ok(Self { n, coeffs })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        self.coeffs.len()
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut [f64] {
        &mut self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<f64> {
        self.coeffs
    }

    /// Coordinate inner product, equal to the HS pairing by Parseval.
    pub fn dot(&self, other: &Self) -> f64 {
        self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a * b).sum()
    }

    pub fn norm(&self) -> f64 {
        self.dot(self).sqrt()
    }

    pub fn scale(&self, s: f64) -> Self {
        Self {
            n: self.n,
            coeffs: self.coeffs.iter().map(|c| c * s).collect(),
        }
    }

    pub fn axpy(&mut self, a: f64, x: &Self) {
        debug_assert_eq!(self.coeffs.len(), x.coeffs.len());
        for (c, xc) in self.coeffs.iter_mut().zip(&x.coeffs) {
            *c += a * xc;
        }
    }
}

impl fmt::Debug for AlgebraElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "su({}){:?}", self.n, self.coeffs)
    }
}

impl Add for &AlgebraElement {
    type Output = AlgebraElement;
    fn add(self, rhs: Self) -> AlgebraElement {
        let mut out = self.clone();
        out.axpy(1.0, rhs);
        out
    }
}

impl Sub for &AlgebraElement {
    type Output = AlgebraElement;
    fn sub(self, rhs: Self) -> AlgebraElement {
        let mut out = self.clone();
        out.axpy(-1.0, rhs);
        out
    }
}

impl Neg for &AlgebraElement {
    type Output = AlgebraElement;
    fn neg(self) -> AlgebraElement {
        self.scale(-1.0)
    }
}

/// Element of SU(n).
#[derive(Clone, PartialEq)]
pub struct GroupElement(CMat);

impl GroupElement {
    pub fn identity(n: usize) -> Self {
        Self(CMat::identity(n, n))
    }

    /// Wraps a matrix without checking group membership.
    pub fn from_matrix_unchecked(m: CMat) -> Self {
        Self(m)
    }

    /// Wraps a matrix after checking `U*U = I` and `det U = 1` to `tol`.
    pub fn from_matrix(m: CMat, tol: f64) -> Result<Self> {
        let g = Self(m);
        let drift = g.unitarity_defect();
        let det = (g.det() - ONE).norm();
        if drift > tol || det > tol {
            return Err(Error::NotInGroup { drift, det });
        }
        Ok(g)
    }

    pub fn n(&self) -> usize {
        self.0.nrows()
    }

    pub fn matrix(&self) -> &CMat {
        &self.0
    }

    pub fn into_matrix(self) -> CMat {
        self.0
    }

    pub fn inverse(&self) -> Self {
        Self(self.0.adjoint())
    }

    pub fn trace(&self) -> Complex64 {
        self.0.trace()
    }

    pub fn det(&self) -> Complex64 {
        self.0.clone().determinant()
    }

    /// `max |(U*U - I)_{ab}|`.
    pub fn unitarity_defect(&self) -> f64 {
        let p = self.0.adjoint() * &self.0;
        let n = self.n();
        let mut worst = 0.0f64;
        for a in 0..n {
            for b in 0..n {
                let target = if a == b { ONE } else { ZERO };
                worst = worst.max((p[(a, b)] - target).norm());
            }
        }
        worst
    }

    /// Frobenius distance `||U - V||_HS`.
    pub fn hs_distance(&self, other: &Self) -> f64 {
        (&self.0 - &other.0).norm()
    }

    pub fn conjugate_by(&self, g: &Self) -> Self {
        Self(&g.0 * &self.0 * g.0.adjoint())
    }
}

impl fmt::Debug for GroupElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "SU({}){}", self.n(), self.0)
    }
}

impl Mul for &GroupElement {
    type Output = GroupElement;
    fn mul(self, rhs: Self) -> GroupElement {
        GroupElement(&self.0 * &rhs.0)
    }
}

/// su(n) together with its basis matrices.
#[derive(Clone, Debug)]
pub struct SuAlgebra {
    n: usize,
    basis: Vec<CMat>,
}

impl SuAlgebra {
    pub fn new(n: usize) -> Result<Self> {
        Ok(Self { n, basis: basis(n)? })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn basis(&self) -> &[CMat] {
        &self.basis
    }

    pub fn zero(&self) -> AlgebraElement {
        AlgebraElement::zero(self.n)
    }

    pub fn element(&self, coeffs: Vec<f64>) -> Result<AlgebraElement> {
        AlgebraElement::from_coeffs(self.n, coeffs)
    }

    /// `sum_k c_k e_k`.
    pub fn to_matrix(&self, x: &AlgebraElement) -> CMat {
        let mut m = CMat::zeros(self.n, self.n);
        for (c, e) in x.coeffs.iter().zip(&self.basis) {
            if *c != 0.0 {
                m += e * Complex64::new(*c, 0.0);
            }
        }
        m
    }

    /// Orthogonal projection of an arbitrary matrix onto su(n).
    pub fn project(&self, m: &CMat) -> AlgebraElement {
        let coeffs = self
            .basis
            .iter()
            .map(|e| hs_inner(e, m).map(|z| z.re).unwrap_or(0.0))
            .collect();
        AlgebraElement { n: self.n, coeffs }
    }

    /// Matrix exponential of an algebra element.
    pub fn exp(&self, x: &AlgebraElement) -> GroupElement {
        if self.n == 2 {
            return GroupElement(exp_su2(x.coeffs()));
        }
        exp_map(&self.to_matrix(x))
    }
}

/// Exponential of an su(2) element from its basis coordinates.
///
/// With the basis above every X in su(2) satisfies `X^2 = -theta^2 I`,
/// `theta^2 = |c|^2 / 2`, so `exp X = cos(theta) I + sinc(theta) X`.
fn exp_su2(c: &[f64]) -> CMat {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let theta = (0.5 * (c[0] * c[0] + c[1] * c[1] + c[2] * c[2])).sqrt();
    let cos = theta.cos();
    let sinc = if theta < 1e-4 {
        1.0 - theta * theta / 6.0 + theta.powi(4) / 120.0
    } else {
        theta.sin() / theta
    };
    // X = s * [[i c2, c0 + i c1], [-c0 + i c1, -i c2]]
    let a = Complex64::new(0.0, s * c[2]);
    let b = Complex64::new(s * c[0], s * c[1]);
    let d = Complex64::new(-s * c[0], s * c[1]);
    CMat::from_row_slice(
        2,
        2,
        &[
            Complex64::new(cos, 0.0) + a * sinc,
            b * sinc,
            d * sinc,
            Complex64::new(cos, 0.0) - a * sinc,
        ],
    )
}

/// Exponential of an anti-Hermitian matrix through the eigendecomposition
/// of the Hermitian matrix `iX`.
pub fn exp_map(x: &CMat) -> GroupElement {
    let n = x.nrows();
    let h = x * I;
    // Symmetrize away rounding so the eigensolver sees an exactly Hermitian input.
    let h = (&h + h.adjoint()) * Complex64::new(0.5, 0.0);
    let eig = h.symmetric_eigen();
    let v = &eig.eigenvectors;
    let mut d = CMat::zeros(n, n);
    for k in 0..n {
        // exp(X) = exp(-i H)
        d[(k, k)] = Complex64::from_polar(1.0, -eig.eigenvalues[k]);
    }
    GroupElement(v * d * v.adjoint())
}
