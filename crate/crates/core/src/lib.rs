//! Numerical laboratory for error-disturbance uncertainty relations in
//! successive spin-1/2 measurements.
//!
//! * [`linalg`], [`spin`]: dense complex states and operators, Pauli algebra.
//! * [`measurement`]: measurement-operator families, successive outcome
//!   statistics, rms error and disturbance, indirect (probe) models.
//! * [`estimator`]: three-state estimation of error and disturbance from
//!   count tables, with bootstrap uncertainties.
//! * [`noise_sim`]: virtual experiment with contrast, misalignment and
//!   counting noise.
//! * [`relation`]: the Robertson, Heisenberg-type and universal relations,
//!   and detuning sweeps.
//! * [`audit`]: randomized checks of the relations.
//!
//! The linear algebra and measurement layers are generic over the real scalar
//! ([`Real`], implemented for `f32` and `f64`); the aliases below fix it. The
//! estimator, simulator and audits work in `f64`.

pub mod audit;
pub mod error;
pub mod estimator;
pub mod linalg;
pub mod measurement;
pub mod noise_sim;
pub mod random;
pub mod relation;
pub mod scalar;
pub mod spin;

pub use error::{Error, Result};
pub use scalar::Real;

pub type Operator = linalg::ComplexMatrix<f64>;
pub type Ket = linalg::StateVector<f64>;
pub type Family = measurement::MeasurementFamily<f64>;
pub type Joint = measurement::JointOutcomeDistribution<f64>;
pub type Counts = estimator::CountTable<f64>;
pub type PreparationSet = estimator::StatePreparationSet<f64>;

pub type Operator32 = linalg::ComplexMatrix<f32>;
pub type Ket32 = linalg::StateVector<f32>;
pub type Family32 = measurement::MeasurementFamily<f32>;
