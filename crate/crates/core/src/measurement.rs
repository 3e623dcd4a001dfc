//! Measurement-operator families and the rms error / rms disturbance of an
//! apparatus.
//!
//! Two equivalent descriptions are supported:
//!
//! * a family `{M_m}` with `Σ M_m†M_m = I`, where
//!   `ε(A)² = Σ_m ‖M_m (m − A) ψ‖²` and `η(B)² = Σ_m ‖[M_m, B] ψ‖²`;
//! * an indirect model `(U, |ξ⟩, M)` coupling the system to a probe, where
//!   `ε(A) = ‖(U†(I⊗M)U − A⊗I) ψ⊗ξ‖` and `η(B) = ‖(U†(B⊗I)U − B⊗I) ψ⊗ξ‖`.
//!
//! For the detuned spin apparatus `{(I ± σ_φ)/2}` in the state `|+z⟩` these
//! give `ε(σ_x) = 2 sin(φ/2)` and `η(σ_y) = √2 cos φ`. Note that `η` follows
//! from summing over both outcomes; the single commutator norm
//! `‖[σ_φ, σ_y]|+z⟩‖` is `2 cos φ`, so `η² = ½‖[σ_φ, σ_y]ψ‖²`.

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{ComplexMatrix, StateVector};
use crate::scalar::{cr, Real};

/// One outcome of a measurement: its recorded value and measurement operator.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome<T: Real> {
    pub value: T,
    pub operator: ComplexMatrix<T>,
}

/// A complete family `{(m, M_m)}` of measurement operators.
#[derive(Debug, Clone, PartialEq)]
pub struct MeasurementFamily<T: Real> {
    dim: usize,
    outcomes: Vec<Outcome<T>>,
}

impl<T: Real> MeasurementFamily<T> {
    /// Validates that every operator has the same dimension, that outcome
    /// values are distinct and that `Σ M_m†M_m = I`.
    pub fn new(outcomes: Vec<(T, ComplexMatrix<T>)>) -> Result<Self> {
        let dim = outcomes.first().ok_or(Error::EmptyFamily)?.1.dim();
        for (i, (value, op)) in outcomes.iter().enumerate() {
            if op.dim() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: op.dim(),
                });
            }
            if !value.is_finite() {
                return Err(Error::NonFinite(value.to_f64().unwrap_or(f64::NAN)));
            }
            if outcomes[..i].iter().any(|(v, _)| v == value) {
                return Err(Error::DuplicateOutcome(value.to_f64().unwrap_or(f64::NAN)));
            }
        }
        let completeness = outcomes
            .iter()
            .map(|(_, m)| &m.dagger() * m)
            .fold(ComplexMatrix::zeros(dim), |acc, e| &acc + &e);
        let deviation = completeness.max_abs_diff(&ComplexMatrix::identity(dim));
        if deviation > T::completeness_tol() {
            return Err(Error::Incomplete {
                deviation: deviation.to_f64().unwrap_or(f64::NAN),
            });
        }
        Ok(Self {
            dim,
            outcomes: outcomes
                .into_iter()
                .map(|(value, operator)| Outcome { value, operator })
                .collect(),
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn outcomes(&self) -> &[Outcome<T>] {
        &self.outcomes
    }

    pub fn operator_for(&self, value: T) -> Option<&ComplexMatrix<T>> {
        self.outcomes.iter().find(|o| o.value == value).map(|o| &o.operator)
    }

    /// Every operator is an orthogonal projection and distinct operators
    /// are mutually orthogonal.
    pub fn is_projective(&self) -> bool {
        let tol = T::herm_tol() * T::lit(10.0);
        let zero = ComplexMatrix::zeros(self.dim);
        self.outcomes.iter().enumerate().all(|(i, a)| {
            a.operator.is_hermitian()
                && (&a.operator * &a.operator).approx_eq(&a.operator, tol)
                && self.outcomes[i + 1..]
                    .iter()
                    .all(|b| (&a.operator * &b.operator).approx_eq(&zero, tol))
        })
    }

    /// Outcome values are exactly `{+1, −1}`.
    pub fn is_binary(&self) -> bool {
        self.outcomes.len() == 2 && self.operator_for(T::one()).is_some() && self.operator_for(-T::one()).is_some()
    }

    fn require_dim(&self, found: usize) -> Result<()> {
        if found == self.dim {
            Ok(())
        } else {
            Err(Error::DimensionMismatch {
                expected: self.dim,
                found,
            })
        }
    }

    fn require_binary(&self) -> Result<(&ComplexMatrix<T>, &ComplexMatrix<T>)> {
        match (self.operator_for(T::one()), self.operator_for(-T::one())) {
            (Some(p), Some(m)) if self.outcomes.len() == 2 => Ok((p, m)),
            _ => Err(Error::NotBinaryFamily),
        }
    }
}

/// `{(+1, (I+O)/2), (−1, (I−O)/2)}` for an observable with `O² = I`.
pub fn projective_family<T: Real>(observable: &ComplexMatrix<T>) -> Result<MeasurementFamily<T>> {
    observable.require_hermitian()?;
    if !observable.is_involution() {
        return Err(Error::SpectrumNotBinary);
    }
    let id = ComplexMatrix::identity(observable.dim());
    let half = T::lit(0.5);
    MeasurementFamily::new(vec![
        (T::one(), (&id + observable).scale_real(half)),
        (-T::one(), (&id - observable).scale_real(half)),
    ])
}

/// `O = Σ_m m M_m`.
pub fn output_operator<T: Real>(family: &MeasurementFamily<T>) -> ComplexMatrix<T> {
    family
        .outcomes()
        .iter()
        .map(|o| o.operator.scale_real(o.value))
        .fold(ComplexMatrix::zeros(family.dim()), |acc, e| &acc + &e)
}

/// `p(m) = ‖M_m ψ‖²` for each outcome, in family order.
pub fn outcome_probabilities<T: Real>(family: &MeasurementFamily<T>, psi: &StateVector<T>) -> Result<Vec<(T, T)>> {
    family.require_dim(psi.dim())?;
    psi.require_normalized()?;
    family
        .outcomes()
        .iter()
        .map(|o| Ok((o.value, o.operator.apply(psi)?.norm_sqr())))
        .collect()
}

/// `M_m ψ / ‖M_m ψ‖`. Zero-probability branches are an error.
pub fn post_measurement_state<T: Real>(
    family: &MeasurementFamily<T>,
    value: T,
    psi: &StateVector<T>,
) -> Result<StateVector<T>> {
    family.require_dim(psi.dim())?;
    let op = family
        .operator_for(value)
        .ok_or_else(|| Error::UnknownOutcome(value.to_f64().unwrap_or(f64::NAN)))?;
    let branch = op.apply(psi)?;
    if branch.norm_sqr() <= T::herm_tol() * psi.norm_sqr() {
        return Err(Error::ZeroProbability(value.to_f64().unwrap_or(f64::NAN)));
    }
    Ok(branch.normalized().expect("nonzero branch"))
}

/// Sign of a `±1` outcome.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    pub const BOTH: [Sign; 2] = [Sign::Plus, Sign::Minus];

    pub fn value<T: Real>(self) -> T {
        match self {
            Sign::Plus => T::one(),
            Sign::Minus => -T::one(),
        }
    }

    pub fn index(self) -> usize {
        match self {
            Sign::Plus => 0,
            Sign::Minus => 1,
        }
    }

    pub fn symbol(self) -> char {
        match self {
            Sign::Plus => '+',
            Sign::Minus => '-',
        }
    }

    pub fn from_symbol(s: &str) -> Option<Self> {
        match s.trim() {
            "+" | "+1" | "1" => Some(Sign::Plus),
            "-" | "-1" | "−" => Some(Sign::Minus),
            _ => None,
        }
    }
}

/// The four cells `(m1, m2)` in the order `++, +−, −+, −−`.
pub const CELLS: [(Sign, Sign); 4] = [
    (Sign::Plus, Sign::Plus),
    (Sign::Plus, Sign::Minus),
    (Sign::Minus, Sign::Plus),
    (Sign::Minus, Sign::Minus),
];

/// Joint distribution of two successive `±1` measurements.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JointOutcomeDistribution<T: Real> {
    p: [[T; 2]; 2],
}

impl<T: Real> JointOutcomeDistribution<T> {
    /// Probabilities in `++, +−, −+, −−` order; must be nonnegative and sum to one.
    pub fn from_cells(cells: [T; 4]) -> Result<Self> {
        if cells.iter().any(|&x| !x.is_finite() || x < -T::herm_tol()) {
            return Err(Error::InvalidCounts);
        }
        let total: T = cells.iter().copied().sum();
        if (total - T::one()).abs() > T::completeness_tol() {
            return Err(Error::NotNormalized {
                norm_sq: total.to_f64().unwrap_or(f64::NAN),
            });
        }
        let c = cells.map(|x| x.max(T::zero()));
        Ok(Self {
            p: [[c[0], c[1]], [c[2], c[3]]],
        })
    }

    pub fn uniform() -> Self {
        let q = T::lit(0.25);
        Self { p: [[q; 2]; 2] }
    }

    pub fn get(&self, m1: Sign, m2: Sign) -> T {
        self.p[m1.index()][m2.index()]
    }

    pub fn cells(&self) -> [T; 4] {
        CELLS.map(|(a, b)| self.get(a, b))
    }

    pub fn total(&self) -> T {
        self.cells().iter().copied().sum()
    }

    pub fn marginal_first(&self, m1: Sign) -> T {
        self.get(m1, Sign::Plus) + self.get(m1, Sign::Minus)
    }

    pub fn marginal_second(&self, m2: Sign) -> T {
        self.get(Sign::Plus, m2) + self.get(Sign::Minus, m2)
    }

    /// `p(m2 | m1)`; `None` when `p(m1) = 0`.
    pub fn conditional_second(&self, m1: Sign, m2: Sign) -> Option<T> {
        let marginal = self.marginal_first(m1);
        (marginal > T::zero()).then(|| self.get(m1, m2) / marginal)
    }

    /// Total-variation distance to the uniform distribution.
    pub fn distance_to_uniform(&self) -> T {
        let q = T::lit(0.25);
        self.cells().iter().map(|&x| (x - q).abs()).sum::<T>() * T::lit(0.5)
    }

    pub fn max_abs_diff(&self, other: &Self) -> T {
        self.cells()
            .iter()
            .zip(other.cells())
            .map(|(a, b)| (*a - b).abs())
            .fold(T::zero(), T::max)
    }
}

/// `p(m1, m2) = ‖M2_{m2} M1_{m1} ψ‖²` for two `±1`-valued families.
pub fn successive_distribution<T: Real>(
    first: &MeasurementFamily<T>,
    second: &MeasurementFamily<T>,
    psi: &StateVector<T>,
) -> Result<JointOutcomeDistribution<T>> {
    first.require_dim(psi.dim())?;
    second.require_dim(psi.dim())?;
    psi.require_normalized()?;
    let (p1, m1) = first.require_binary()?;
    let (p2, m2) = second.require_binary()?;
    let after_first = [p1.apply(psi)?, m1.apply(psi)?];
    let mut cells = [T::zero(); 4];
    for (k, (a, b)) in CELLS.iter().enumerate() {
        let op2 = if *b == Sign::Plus { p2 } else { m2 };
        cells[k] = op2.apply(&after_first[a.index()])?.norm_sqr();
    }
    // the family completeness tolerance is looser than a fresh normalization
    let total: T = cells.iter().copied().sum();
    JointOutcomeDistribution::from_cells(cells.map(|x| x / total))
}

/// `ε(A) = (Σ_m ‖M_m (m − A) ψ‖²)^{1/2}`.
pub fn rms_error<T: Real>(family: &MeasurementFamily<T>, a: &ComplexMatrix<T>, psi: &StateVector<T>) -> Result<T> {
    family.require_dim(a.dim())?;
    family.require_dim(psi.dim())?;
    psi.require_normalized()?;
    let a_psi = a.apply(psi)?;
    let mut sum = T::zero();
    for o in family.outcomes() {
        let shifted = &psi.scale(cr(o.value)) - &a_psi;
        sum = sum + o.operator.apply(&shifted)?.norm_sqr();
    }
    Ok(sum.sqrt())
}

/// `‖(O − A) ψ‖`, the projective-family shortcut for [`rms_error`].
pub fn output_operator_error<T: Real>(
    family: &MeasurementFamily<T>,
    a: &ComplexMatrix<T>,
    psi: &StateVector<T>,
) -> Result<T> {
    family.require_dim(a.dim())?;
    psi.require_normalized()?;
    let diff = &output_operator(family) - a;
    Ok(diff.apply(psi)?.norm())
}

/// `η(B) = (Σ_m ‖[M_m, B] ψ‖²)^{1/2}`.
pub fn rms_disturbance<T: Real>(
    family: &MeasurementFamily<T>,
    b: &ComplexMatrix<T>,
    psi: &StateVector<T>,
) -> Result<T> {
    family.require_dim(b.dim())?;
    family.require_dim(psi.dim())?;
    psi.require_normalized()?;
    let mut sum = T::zero();
    for o in family.outcomes() {
        let comm = crate::linalg::commutator(&o.operator, b)?;
        sum = sum + comm.apply(psi)?.norm_sqr();
    }
    Ok(sum.sqrt())
}

/// `(O_B, O_B⁽²⁾) = (Σ_x E(x) B E(x), Σ_x E(x) B² E(x))` for a projective family.
pub fn modified_output_operators<T: Real>(
    family: &MeasurementFamily<T>,
    b: &ComplexMatrix<T>,
) -> Result<(ComplexMatrix<T>, ComplexMatrix<T>)> {
    family.require_dim(b.dim())?;
    if !family.is_projective() {
        return Err(Error::NonProjective);
    }
    let b2 = b * b;
    let zero = ComplexMatrix::zeros(family.dim());
    let (ob, ob2) = family.outcomes().iter().fold((zero.clone(), zero), |(ob, ob2), o| {
        let e = &o.operator;
        (&ob + &(&(e * b) * e), &ob2 + &(&(e * &b2) * e))
    });
    Ok((ob, ob2))
}

/// Apparatus described by a system–probe interaction `U`, probe state `|ξ⟩`
/// and meter observable `M` on the probe.
#[derive(Debug, Clone, PartialEq)]
pub struct IndirectModel<T: Real> {
    system_dim: usize,
    probe_dim: usize,
    probe_init: StateVector<T>,
    interaction: ComplexMatrix<T>,
    meter: ComplexMatrix<T>,
}

impl<T: Real> IndirectModel<T> {
    pub fn new(
        system_dim: usize,
        probe_init: StateVector<T>,
        interaction: ComplexMatrix<T>,
        meter: ComplexMatrix<T>,
    ) -> Result<Self> {
        let probe_dim = probe_init.dim();
        if system_dim == 0 {
            return Err(Error::EmptyDimension);
        }
        if meter.dim() != probe_dim {
            return Err(Error::DimensionMismatch {
                expected: probe_dim,
                found: meter.dim(),
            });
        }
        if interaction.dim() != system_dim * probe_dim {
            return Err(Error::DimensionMismatch {
                expected: system_dim * probe_dim,
                found: interaction.dim(),
            });
        }
        probe_init.require_normalized()?;
        interaction.require_unitary()?;
        meter.require_hermitian()?;
        Ok(Self {
            system_dim,
            probe_dim,
            probe_init,
            interaction,
            meter,
        })
    }

    pub fn system_dim(&self) -> usize {
        self.system_dim
    }

    pub fn probe_dim(&self) -> usize {
        self.probe_dim
    }

    pub fn probe_init(&self) -> &StateVector<T> {
        &self.probe_init
    }

    pub fn interaction(&self) -> &ComplexMatrix<T> {
        &self.interaction
    }

    pub fn meter(&self) -> &ComplexMatrix<T> {
        &self.meter
    }

    /// `‖(U† X U − Y) ψ⊗ξ‖`.
    fn heisenberg_deviation(
        &self,
        evolved: &ComplexMatrix<T>,
        reference: &ComplexMatrix<T>,
        psi: &StateVector<T>,
    ) -> Result<T> {
        if psi.dim() != self.system_dim {
            return Err(Error::DimensionMismatch {
                expected: self.system_dim,
                found: psi.dim(),
            });
        }
        psi.require_normalized()?;
        let u = &self.interaction;
        let heis = &(&u.dagger() * evolved) * u;
        let joint = psi.kron(&self.probe_init);
        Ok((&heis - reference).apply(&joint)?.norm())
    }

    fn lift_system(&self, op: &ComplexMatrix<T>) -> Result<ComplexMatrix<T>> {
        if op.dim() != self.system_dim {
            return Err(Error::DimensionMismatch {
                expected: self.system_dim,
                found: op.dim(),
            });
        }
        Ok(op.kron(&ComplexMatrix::identity(self.probe_dim)))
    }
}

/// `ε(A) = ‖(U†(I⊗M)U − A⊗I) ψ⊗ξ‖`.
pub fn indirect_rms_error<T: Real>(model: &IndirectModel<T>, a: &ComplexMatrix<T>, psi: &StateVector<T>) -> Result<T> {
    let a_lifted = model.lift_system(a)?;
    let meter = ComplexMatrix::identity(model.system_dim).kron(&model.meter);
    model.heisenberg_deviation(&meter, &a_lifted, psi)
}

/// `η(B) = ‖(U†(B⊗I)U − B⊗I) ψ⊗ξ‖`.
pub fn indirect_rms_disturbance<T: Real>(
    model: &IndirectModel<T>,
    b: &ComplexMatrix<T>,
    psi: &StateVector<T>,
) -> Result<T> {
    let b_lifted = model.lift_system(b)?;
    model.heisenberg_deviation(&b_lifted, &b_lifted, psi)
}

/// Von Neumann pointer realization of a projective family.
///
/// The probe has one level per outcome and starts in `|0⟩`; the interaction
/// `U = Σ_j P_j ⊗ S^j` (with `S` the cyclic shift) moves the pointer to `|j⟩`
/// on branch `j`, and the meter is `diag(m_0, m_1, …)`.
pub fn von_neumann_model<T: Real>(family: &MeasurementFamily<T>) -> Result<IndirectModel<T>> {
    if !family.is_projective() {
        return Err(Error::NonProjective);
    }
    let k = family.outcomes().len();
    let d = family.dim();
    let shift = ComplexMatrix::from_fn(k, |i, j| {
        if i == (j + 1) % k {
            Complex::new(T::one(), T::zero())
        } else {
            Complex::new(T::zero(), T::zero())
        }
    });
    let mut power = ComplexMatrix::identity(k);
    let mut u = ComplexMatrix::zeros(d * k);
    for o in family.outcomes() {
        u = &u + &o.operator.kron(&power);
        power = &shift * &power;
    }
    let values: Vec<T> = family.outcomes().iter().map(|o| o.value).collect();
    IndirectModel::new(d, StateVector::basis(k, 0), u, ComplexMatrix::diagonal(&values))
}
