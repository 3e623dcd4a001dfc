//! Spin-1/2 constructors: Pauli matrices, equatorial spin observables and
//! Bloch-sphere states.

use num_complex::Complex;

use crate::linalg::{ComplexMatrix, StateVector};
use crate::scalar::{c, cr, Real};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Axis {
    X,
    Y,
    Z,
}

/// 2×2 Pauli matrix for `axis`.
pub fn pauli<T: Real>(axis: Axis) -> ComplexMatrix<T> {
    let (o, l) = (T::zero(), T::one());
    let entries = match axis {
        Axis::X => [c(o, o), c(l, o), c(l, o), c(o, o)],
        Axis::Y => [c(o, o), c(o, -l), c(o, l), c(o, o)],
        Axis::Z => [c(l, o), c(o, o), c(o, o), c(-l, o)],
    };
    ComplexMatrix::new(2, entries.to_vec()).expect("2x2 literal")
}

/// Spin component along a Bloch vector, `n·σ`. `n` is used as given.
pub fn sigma_n<T: Real>(n: [T; 3]) -> ComplexMatrix<T> {
    let x = pauli::<T>(Axis::X).scale_real(n[0]);
    let y = pauli::<T>(Axis::Y).scale_real(n[1]);
    let z = pauli::<T>(Axis::Z).scale_real(n[2]);
    &(&x + &y) + &z
}

/// Equatorial spin component `σ_φ = cos φ σ_x + sin φ σ_y`.
pub fn sigma_phi<T: Real>(phi: T) -> ComplexMatrix<T> {
    sigma_n([phi.cos(), phi.sin(), T::zero()])
}

/// `cos(θ/2)|+z⟩ + e^{iφ} sin(θ/2)|−z⟩`.
pub fn bloch_state<T: Real>(theta: T, phi: T) -> StateVector<T> {
    let half = theta / T::lit(2.0);
    StateVector::new(vec![cr(half.cos()), Complex::from_polar(half.sin(), phi)]).expect("finite angles")
}

/// Bloch vector `(⟨σ_x⟩, ⟨σ_y⟩, ⟨σ_z⟩)` of a normalized qubit state.
pub fn bloch_vector<T: Real>(psi: &StateVector<T>) -> [T; 3] {
    let a = psi.amplitudes();
    assert_eq!(a.len(), 2, "bloch_vector needs a qubit");
    let cross = a[0].conj() * a[1];
    let two = T::lit(2.0);
    [two * cross.re, two * cross.im, a[0].norm_sqr() - a[1].norm_sqr()]
}

pub fn plus_z<T: Real>() -> StateVector<T> {
    StateVector::basis(2, 0)
}

pub fn minus_z<T: Real>() -> StateVector<T> {
    StateVector::basis(2, 1)
}

/// `(|+z⟩ + |−z⟩)/√2`
pub fn plus_x<T: Real>() -> StateVector<T> {
    let h = T::FRAC_1_SQRT_2();
    StateVector::from_real(&[h, h]).expect("finite")
}

/// `(|+z⟩ + i|−z⟩)/√2`
pub fn plus_y<T: Real>() -> StateVector<T> {
    let h = T::FRAC_1_SQRT_2();
    StateVector::new(vec![cr(h), c(T::zero(), h)]).expect("finite")
}

/// `+1` eigenstate of `σ_φ`, `(|+z⟩ + e^{iφ}|−z⟩)/√2`.
pub fn plus_phi<T: Real>(phi: T) -> StateVector<T> {
    bloch_state(T::FRAC_PI_2(), phi)
}

/// `−1` eigenstate of `σ_φ`.
pub fn minus_phi<T: Real>(phi: T) -> StateVector<T> {
    bloch_state(T::FRAC_PI_2(), phi + T::PI())
}
