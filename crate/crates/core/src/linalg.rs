//! Dense complex linear algebra for small Hilbert spaces.
//!
//! Matrices are stored row-major. Dimensions are tiny (the experiment lives in
//! 2 and 4 dimensions), so everything is a flat `Vec` and products are the
//! textbook triple loop.

use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex;
use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::scalar::{cr, Real};

/// Ket in a `dim`-dimensional Hilbert space. Not necessarily normalized.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector<T: Real> {
    amps: Vec<Complex<T>>,
}

/// Square complex matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexMatrix<T: Real> {
    dim: usize,
    data: Vec<Complex<T>>,
}

fn check_dim(expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, found })
    }
}

fn check_finite<T: Real>(z: &Complex<T>) -> Result<()> {
    if z.re.is_finite() && z.im.is_finite() {
        Ok(())
    } else {
        let bad = if z.re.is_finite() { z.im } else { z.re };
        Err(Error::NonFinite(bad.to_f64().unwrap_or(f64::NAN)))
    }
}

impl<T: Real> StateVector<T> {
    pub fn new(amps: Vec<Complex<T>>) -> Result<Self> {
        if amps.is_empty() {
            return Err(Error::EmptyDimension);
        }
        amps.iter().try_for_each(check_finite)?;
        Ok(Self { amps })
    }

    /// Computational basis vector `|index⟩`.
    pub fn basis(dim: usize, index: usize) -> Self {
        assert!(index < dim, "basis index {index} out of range for dim {dim}");
        let mut amps = vec![Complex::zero(); dim];
        amps[index] = Complex::one();
        Self { amps }
    }

    pub fn from_real(amps: &[T]) -> Result<Self> {
        Self::new(amps.iter().map(|&a| cr(a)).collect())
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn amplitudes(&self) -> &[Complex<T>] {
        &self.amps
    }

    pub fn norm_sqr(&self) -> T {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn norm(&self) -> T {
        self.norm_sqr().sqrt()
    }

    pub fn is_normalized(&self) -> bool {
        (self.norm_sqr() - T::one()).abs() <= T::norm_tol()
    }

    /// Fails unless Σ|amplitude|² = 1 within the normalization tolerance.
    pub fn require_normalized(&self) -> Result<()> {
        if self.is_normalized() {
            Ok(())
        } else {
            Err(Error::NotNormalized {
                norm_sq: self.norm_sqr().to_f64().unwrap_or(f64::NAN),
            })
        }
    }

    /// `self / ‖self‖`, or `None` for the zero vector.
    pub fn normalized(&self) -> Option<Self> {
        let n = self.norm();
        if n <= T::epsilon() {
            None
        } else {
            Some(self.scale(cr(n.recip())))
        }
    }

    pub fn scale(&self, k: Complex<T>) -> Self {
        Self {
            amps: self.amps.iter().map(|&a| a * k).collect(),
        }
    }

    /// Inner product `⟨self|other⟩`, conjugate-linear in `self`.
    pub fn inner(&self, other: &Self) -> Result<Complex<T>> {
        check_dim(self.dim(), other.dim())?;
        Ok(self
            .amps
            .iter()
            .zip(&other.amps)
            .fold(Complex::zero(), |acc, (a, b)| acc + a.conj() * b))
    }

    /// Kronecker product; `self` is the slow index.
    pub fn kron(&self, other: &Self) -> Self {
        let mut amps = Vec::with_capacity(self.dim() * other.dim());
        for a in &self.amps {
            for b in &other.amps {
                amps.push(a * b);
            }
        }
        Self { amps }
    }

    /// True when `self = e^{iθ} other` for some global phase θ, within `tol`.
    pub fn equals_up_to_phase(&self, other: &Self, tol: T) -> bool {
        if self.dim() != other.dim() {
            return false;
        }
        let overlap = match self.inner(other) {
            Ok(z) => z,
            Err(_) => return false,
        };
        let n = overlap.norm();
        if n <= T::epsilon() {
            return self.norm() <= tol && other.norm() <= tol;
        }
        let phase = overlap / cr(n);
        // self·phase ≈ other
        self.amps
            .iter()
            .zip(&other.amps)
            .all(|(a, b)| (a * phase - b).norm() <= tol)
    }

    pub fn max_abs_diff(&self, other: &Self) -> T {
        assert_eq!(self.dim(), other.dim());
        self.amps
            .iter()
            .zip(&other.amps)
            .map(|(a, b)| (a - b).norm())
            .fold(T::zero(), T::max)
    }
}

impl<T: Real> Add for &StateVector<T> {
    type Output = StateVector<T>;
    fn add(self, rhs: Self) -> StateVector<T> {
        assert_eq!(self.dim(), rhs.dim(), "ket dimension mismatch");
        StateVector {
            amps: self.amps.iter().zip(&rhs.amps).map(|(a, b)| a + b).collect(),
        }
    }
}

impl<T: Real> Sub for &StateVector<T> {
    type Output = StateVector<T>;
    fn sub(self, rhs: Self) -> StateVector<T> {
        assert_eq!(self.dim(), rhs.dim(), "ket dimension mismatch");
        StateVector {
            amps: self.amps.iter().zip(&rhs.amps).map(|(a, b)| a - b).collect(),
        }
    }
}

impl<T: Real> ComplexMatrix<T> {
    /// Builds a matrix from row-major entries.
    pub fn new(dim: usize, data: Vec<Complex<T>>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::EmptyDimension);
        }
        if data.len() != dim * dim {
            return Err(Error::Shape { dim, found: data.len() });
        }
        data.iter().try_for_each(check_finite)?;
        Ok(Self { dim, data })
    }

    pub fn from_fn(dim: usize, f: impl Fn(usize, usize) -> Complex<T>) -> Self {
        assert!(dim > 0);
        let data = (0..dim * dim).map(|k| f(k / dim, k % dim)).collect();
        Self { dim, data }
    }

    pub fn zeros(dim: usize) -> Self {
        Self::from_fn(dim, |_, _| Complex::zero())
    }

    pub fn identity(dim: usize) -> Self {
        Self::from_fn(dim, |i, j| if i == j { Complex::one() } else { Complex::zero() })
    }

    pub fn diagonal(diag: &[T]) -> Self {
        Self::from_fn(diag.len(), |i, j| if i == j { cr(diag[i]) } else { Complex::zero() })
    }

    /// Projector `|v⟩⟨v|` (no normalization applied).
    pub fn outer(v: &StateVector<T>, w: &StateVector<T>) -> Self {
        let (a, b) = (v.amplitudes(), w.amplitudes());
        assert_eq!(a.len(), b.len());
        Self::from_fn(a.len(), |i, j| a[i] * b[j].conj())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> Complex<T> {
        self.data[row * self.dim + col]
    }

    pub fn entries(&self) -> &[Complex<T>] {
        &self.data
    }

    pub fn dagger(&self) -> Self {
        Self::from_fn(self.dim, |i, j| self.get(j, i).conj())
    }

    pub fn scale(&self, k: Complex<T>) -> Self {
        Self {
            dim: self.dim,
            data: self.data.iter().map(|&z| z * k).collect(),
        }
    }

    pub fn scale_real(&self, k: T) -> Self {
        self.scale(cr(k))
    }

    pub fn trace(&self) -> Complex<T> {
        (0..self.dim).fold(Complex::zero(), |acc, i| acc + self.get(i, i))
    }

    pub fn matmul(&self, rhs: &Self) -> Result<Self> {
        check_dim(self.dim, rhs.dim)?;
        let n = self.dim;
        let mut data = vec![Complex::zero(); n * n];
        for i in 0..n {
            for k in 0..n {
                let a = self.get(i, k);
                if a.is_zero() {
                    continue;
                }
                for j in 0..n {
                    data[i * n + j] = data[i * n + j] + a * rhs.get(k, j);
                }
            }
        }
        Ok(Self { dim: n, data })
    }

    pub fn apply(&self, v: &StateVector<T>) -> Result<StateVector<T>> {
        check_dim(self.dim, v.dim())?;
        let amps = (0..self.dim)
            .map(|i| {
                v.amplitudes()
                    .iter()
                    .enumerate()
                    .fold(Complex::zero(), |acc, (j, a)| acc + self.get(i, j) * a)
            })
            .collect();
        Ok(StateVector { amps })
    }

    /// Kronecker product; `self` is the slow (block) index.
    pub fn kron(&self, other: &Self) -> Self {
        let (n, m) = (self.dim, other.dim);
        Self::from_fn(n * m, |r, c| self.get(r / m, c / m) * other.get(r % m, c % m))
    }

    pub fn max_abs_diff(&self, other: &Self) -> T {
        assert_eq!(self.dim, other.dim);
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(T::zero(), T::max)
    }

    pub fn approx_eq(&self, other: &Self, tol: T) -> bool {
        self.dim == other.dim && self.max_abs_diff(other) <= tol
    }

    /// Largest entrywise deviation of `self` from `self†`.
    pub fn hermiticity_defect(&self) -> T {
        self.max_abs_diff(&self.dagger())
    }

    pub fn is_hermitian(&self) -> bool {
        self.hermiticity_defect() <= T::herm_tol()
    }

    pub fn require_hermitian(&self) -> Result<()> {
        let deviation = self.hermiticity_defect();
        if deviation <= T::herm_tol() {
            Ok(())
        } else {
            Err(Error::NotHermitian {
                deviation: deviation.to_f64().unwrap_or(f64::NAN),
            })
        }
    }

    /// Largest entrywise deviation of `U†U` from the identity.
    pub fn unitarity_defect(&self) -> T {
        let prod = &self.dagger() * self;
        prod.max_abs_diff(&Self::identity(self.dim))
    }

    pub fn require_unitary(&self) -> Result<()> {
        let deviation = self.unitarity_defect();
        if deviation <= T::completeness_tol() {
            Ok(())
        } else {
            Err(Error::NotUnitary {
                deviation: deviation.to_f64().unwrap_or(f64::NAN),
            })
        }
    }

    /// True when `self² = I` within the Hermiticity tolerance.
    pub fn is_involution(&self) -> bool {
        (self * self).approx_eq(&Self::identity(self.dim), T::herm_tol())
    }
}

impl<T: Real> Mul for &ComplexMatrix<T> {
    type Output = ComplexMatrix<T>;
    fn mul(self, rhs: Self) -> ComplexMatrix<T> {
        self.matmul(rhs).expect("matrix dimension mismatch")
    }
}

impl<T: Real> Mul<&StateVector<T>> for &ComplexMatrix<T> {
    type Output = StateVector<T>;
    fn mul(self, rhs: &StateVector<T>) -> StateVector<T> {
        self.apply(rhs).expect("matrix/ket dimension mismatch")
    }
}

impl<T: Real> Add for &ComplexMatrix<T> {
    type Output = ComplexMatrix<T>;
    fn add(self, rhs: Self) -> ComplexMatrix<T> {
        assert_eq!(self.dim, rhs.dim, "matrix dimension mismatch");
        ComplexMatrix {
            dim: self.dim,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a + b).collect(),
        }
    }
}

impl<T: Real> Sub for &ComplexMatrix<T> {
    type Output = ComplexMatrix<T>;
    fn sub(self, rhs: Self) -> ComplexMatrix<T> {
        assert_eq!(self.dim, rhs.dim, "matrix dimension mismatch");
        ComplexMatrix {
            dim: self.dim,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a - b).collect(),
        }
    }
}

impl<T: Real> Neg for &ComplexMatrix<T> {
    type Output = ComplexMatrix<T>;
    fn neg(self) -> ComplexMatrix<T> {
        ComplexMatrix {
            dim: self.dim,
            data: self.data.iter().map(|a| -a).collect(),
        }
    }
}

/// Kronecker product of two kets or two matrices.
pub trait Kron {
    fn kron_with(&self, rhs: &Self) -> Self;
}

impl<T: Real> Kron for StateVector<T> {
    fn kron_with(&self, rhs: &Self) -> Self {
        self.kron(rhs)
    }
}

impl<T: Real> Kron for ComplexMatrix<T> {
    fn kron_with(&self, rhs: &Self) -> Self {
        self.kron(rhs)
    }
}

/// `a ⊗ b` with `a` as the slow index.
pub fn tensor<K: Kron>(a: &K, b: &K) -> K {
    a.kron_with(b)
}

/// `⟨ψ|M|ψ⟩` for a normalized `psi`.
pub fn expectation<T: Real>(psi: &StateVector<T>, m: &ComplexMatrix<T>) -> Result<Complex<T>> {
    check_dim(m.dim(), psi.dim())?;
    psi.require_normalized()?;
    psi.inner(&m.apply(psi)?)
}

/// `⟨v|M|v⟩` for any `v`, normalized or not.
pub fn sandwich<T: Real>(v: &StateVector<T>, m: &ComplexMatrix<T>) -> Result<Complex<T>> {
    v.inner(&m.apply(v)?)
}

/// Standard deviation `√(⟨M²⟩ − ⟨M⟩²)` of a Hermitian observable.
pub fn std_dev<T: Real>(psi: &StateVector<T>, m: &ComplexMatrix<T>) -> Result<T> {
    m.require_hermitian()?;
    let mean = expectation(psi, m)?.re;
    let mpsi = m.apply(psi)?;
    let second = mpsi.norm_sqr();
    let var = second - mean * mean;
    if var < -T::herm_tol() {
        return Err(Error::NegativeVariance(var.to_f64().unwrap_or(f64::NAN)));
    }
    Ok(var.max(T::zero()).sqrt())
}

/// `[A, B] = AB − BA`.
pub fn commutator<T: Real>(a: &ComplexMatrix<T>, b: &ComplexMatrix<T>) -> Result<ComplexMatrix<T>> {
    Ok(&a.matmul(b)? - &b.matmul(a)?)
}

/// Eigenvalues of a Hermitian matrix in ascending order.
///
/// Closed-form for `d ≤ 2`; larger matrices go through the real symmetric
/// embedding `[[Re, −Im], [Im, Re]]` and cyclic Jacobi, whose spectrum is the
/// original one with every eigenvalue doubled.
pub fn hermitian_eigenvalues<T: Real>(m: &ComplexMatrix<T>) -> Result<Vec<T>> {
    m.require_hermitian()?;
    match m.dim() {
        1 => Ok(vec![m.get(0, 0).re]),
        2 => {
            let a = m.get(0, 0).re;
            let d = m.get(1, 1).re;
            let b = m.get(0, 1);
            let two = T::lit(2.0);
            let mean = (a + d) / two;
            let half_gap = (((a - d) / two).powi(2) + b.norm_sqr()).sqrt();
            Ok(vec![mean - half_gap, mean + half_gap])
        }
        n => {
            let mut sym = vec![T::zero(); 4 * n * n];
            let w = 2 * n;
            for i in 0..n {
                for j in 0..n {
                    let z = m.get(i, j);
                    sym[i * w + j] = z.re;
                    sym[(i + n) * w + (j + n)] = z.re;
                    sym[i * w + (j + n)] = -z.im;
                    sym[(i + n) * w + j] = z.im;
                }
            }
            let mut evs = jacobi_eigenvalues(sym, w);
            evs.sort_by(|x, y| x.partial_cmp(y).expect("finite eigenvalues"));
            Ok(evs.into_iter().step_by(2).collect())
        }
    }
}

fn jacobi_eigenvalues<T: Real>(mut a: Vec<T>, n: usize) -> Vec<T> {
    let idx = |i: usize, j: usize| i * n + j;
    for _sweep in 0..100 {
        let off: T = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| a[idx(i, j)].powi(2))
            .sum();
        let scale: T = a.iter().map(|x| x.powi(2)).sum();
        if off <= T::epsilon() * T::epsilon() * scale.max(T::min_positive_value()) {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = a[idx(p, q)];
                if apq.abs() <= T::min_positive_value() {
                    continue;
                }
                let theta = (a[idx(q, q)] - a[idx(p, p)]) / (T::lit(2.0) * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + T::one()).sqrt());
                let cos = (t * t + T::one()).sqrt().recip();
                let sin = t * cos;
                for k in 0..n {
                    let akp = a[idx(k, p)];
                    let akq = a[idx(k, q)];
                    a[idx(k, p)] = cos * akp - sin * akq;
                    a[idx(k, q)] = sin * akp + cos * akq;
                }
                for k in 0..n {
                    let apk = a[idx(p, k)];
                    let aqk = a[idx(q, k)];
                    a[idx(p, k)] = cos * apk - sin * aqk;
                    a[idx(q, k)] = sin * apk + cos * aqk;
                }
            }
        }
    }
    (0..n).map(|i| a[idx(i, i)]).collect()
}

/// Largest |eigenvalue| of a Hermitian matrix.
pub fn spectral_radius<T: Real>(m: &ComplexMatrix<T>) -> Result<T> {
    Ok(hermitian_eigenvalues(m)?
        .into_iter()
        .map(T::abs)
        .fold(T::zero(), T::max))
}
