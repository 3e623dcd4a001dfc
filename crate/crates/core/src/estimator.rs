//! Three-state estimation of error and disturbance from successive-measurement
//! count tables.
//!
//! With `A = σ_x`, `B = σ_y` and `|ψ⟩ = |+z⟩`,
//!
//! ```text
//! ε(A)² = 2 + ⟨ψ|O_A|ψ⟩ + ⟨Aψ|O_A|Aψ⟩ − ⟨(A+I)ψ|O_A|(A+I)ψ⟩
//! η(B)² = 2 + ⟨ψ|O_B|ψ⟩ + ⟨Bψ|O_B|Bψ⟩ − ⟨(B+I)ψ|O_B|(B+I)ψ⟩
//! ```
//!
//! and `A|ψ⟩ = |−z⟩`, `B|ψ⟩ = i|−z⟩`, `(A+I)|ψ⟩ = √2|+x⟩`, `(B+I)|ψ⟩ = √2|+y⟩`.
//! The global phase of `B|ψ⟩` drops out, so the `|−z⟩` table serves both the
//! `Aψ` and `Bψ` terms. The last term carries the squared norm
//! `‖(A+I)ψ‖² = 2` times the mean measured in the normalized auxiliary state;
//! that factor is exposed as [`EstimatorOptions::aux_norm_sq`] for
//! sensitivity studies.
//!
//! `⟨O_A⟩` is read off the first-stage marginal and `⟨O_B⟩` off the
//! second-stage marginal of each table.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::StateVector;
use crate::measurement::{JointOutcomeDistribution, Sign, CELLS};
use crate::random::multinomial;
use crate::scalar::Real;
use crate::spin::{minus_z, plus_x, plus_y, plus_z};

/// Input states of the three-state method.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum PreparedState {
    /// `|ψ⟩ = |+z⟩`
    PlusZ,
    /// `A|ψ⟩ = |−z⟩` (also `B|ψ⟩` up to phase)
    MinusZ,
    /// `(A+I)|ψ⟩/√2 = |+x⟩`
    PlusX,
    /// `(B+I)|ψ⟩/√2 = |+y⟩`
    PlusY,
}

impl PreparedState {
    pub const ALL: [PreparedState; 4] = [
        PreparedState::PlusZ,
        PreparedState::MinusZ,
        PreparedState::PlusX,
        PreparedState::PlusY,
    ];

    pub fn label(self) -> &'static str {
        match self {
            PreparedState::PlusZ => "+z",
            PreparedState::MinusZ => "-z",
            PreparedState::PlusX => "+x",
            PreparedState::PlusY => "+y",
        }
    }

    pub fn index(self) -> usize {
        self as usize
    }

    /// Polar and azimuthal Bloch angles of the state.
    pub fn bloch_angles<T: Real>(self) -> (T, T) {
        match self {
            PreparedState::PlusZ => (T::zero(), T::zero()),
            PreparedState::MinusZ => (T::PI(), T::zero()),
            PreparedState::PlusX => (T::FRAC_PI_2(), T::zero()),
            PreparedState::PlusY => (T::FRAC_PI_2(), T::FRAC_PI_2()),
        }
    }

    pub fn state<T: Real>(self) -> StateVector<T> {
        match self {
            PreparedState::PlusZ => plus_z(),
            PreparedState::MinusZ => minus_z(),
            PreparedState::PlusX => plus_x(),
            PreparedState::PlusY => plus_y(),
        }
    }
}

impl fmt::Display for PreparedState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("unknown prepared state `{0}` (expected +z, -z, +x or +y)")]
pub struct UnknownStateLabel(pub String);

impl FromStr for PreparedState {
    type Err = UnknownStateLabel;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s.trim() {
            "+z" | "psi" => Ok(PreparedState::PlusZ),
            "-z" | "A_psi" => Ok(PreparedState::MinusZ),
            "+x" | "x_aux" => Ok(PreparedState::PlusX),
            "+y" | "y_aux" => Ok(PreparedState::PlusY),
            other => Err(UnknownStateLabel(other.to_string())),
        }
    }
}

/// Counts (or normalized intensities) of the four outcomes `++, +−, −+, −−`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CountTable<T: Real> {
    cells: [T; 4],
}

impl<T: Real> CountTable<T> {
    pub fn new(cells: [T; 4]) -> Result<Self> {
        if cells.iter().any(|&x| !x.is_finite() || x < T::zero()) {
            return Err(Error::InvalidCounts);
        }
        Ok(Self { cells })
    }

    pub fn from_counts(counts: [u64; 4]) -> Self {
        Self {
            cells: counts.map(|n| T::from_u64(n).expect("count fits the scalar type")),
        }
    }

    /// Expected table `total · p`, i.e. noise-free intensities.
    pub fn from_distribution(p: &JointOutcomeDistribution<T>, total: T) -> Self {
        Self {
            cells: p.cells().map(|x| x * total),
        }
    }

    pub fn cells(&self) -> [T; 4] {
        self.cells
    }

    pub fn get(&self, m1: Sign, m2: Sign) -> T {
        self.cells[m1.index() * 2 + m2.index()]
    }

    pub fn total(&self) -> T {
        self.cells.iter().copied().sum()
    }

    pub fn scaled(&self, factor: T) -> Self {
        Self {
            cells: self.cells.map(|x| x * factor),
        }
    }

    /// Cells as integer counts, if every cell is a whole number.
    pub fn integer_counts(&self) -> Option<[u64; 4]> {
        let mut out = [0u64; 4];
        for (o, &x) in out.iter_mut().zip(&self.cells) {
            if x.fract() != T::zero() {
                return None;
            }
            *o = x.to_u64()?;
        }
        Some(out)
    }

    fn require_total(&self) -> Result<T> {
        let total = self.total();
        if total > T::zero() {
            Ok(total)
        } else {
            Err(Error::ZeroTotal)
        }
    }
}

/// `⟨O_A⟩ = ((I++ + I+−) − (I−+ + I−−)) / ΣI`.
pub fn mean_oa<T: Real>(table: &CountTable<T>) -> Result<T> {
    let total = table.require_total()?;
    let plus = table.get(Sign::Plus, Sign::Plus) + table.get(Sign::Plus, Sign::Minus);
    let minus = table.get(Sign::Minus, Sign::Plus) + table.get(Sign::Minus, Sign::Minus);
    Ok((plus - minus) / total)
}

/// `⟨O_B⟩ = ((I++ + I−+) − (I+− + I−−)) / ΣI`.
pub fn mean_ob<T: Real>(table: &CountTable<T>) -> Result<T> {
    let total = table.require_total()?;
    let plus = table.get(Sign::Plus, Sign::Plus) + table.get(Sign::Minus, Sign::Plus);
    let minus = table.get(Sign::Plus, Sign::Minus) + table.get(Sign::Minus, Sign::Minus);
    Ok((plus - minus) / total)
}

/// The sixteen intensities of one detuning setting: one table per input state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StatePreparationSet<T: Real> {
    tables: [CountTable<T>; 4],
}

impl<T: Real> StatePreparationSet<T> {
    pub fn new(psi: CountTable<T>, a_psi: CountTable<T>, x_aux: CountTable<T>, y_aux: CountTable<T>) -> Self {
        Self {
            tables: [psi, a_psi, x_aux, y_aux],
        }
    }

    /// Tables indexed in [`PreparedState::ALL`] order.
    pub fn from_tables(tables: [CountTable<T>; 4]) -> Self {
        Self { tables }
    }

    pub fn table(&self, state: PreparedState) -> &CountTable<T> {
        &self.tables[state.index()]
    }

    pub fn tables(&self) -> &[CountTable<T>; 4] {
        &self.tables
    }

    pub fn map_tables(&self, f: impl Fn(&CountTable<T>) -> CountTable<T>) -> Self {
        Self {
            tables: [
                f(&self.tables[0]),
                f(&self.tables[1]),
                f(&self.tables[2]),
                f(&self.tables[3]),
            ],
        }
    }
}

/// Tunables of the three-state estimator.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EstimatorOptions<T> {
    /// Squared norm of `(A+I)|ψ⟩` (and `(B+I)|ψ⟩`); 2 for the spin case.
    pub aux_norm_sq: T,
    /// Optional visibility correction: every mean is divided by this contrast
    /// before it enters the three-state formula. Whether the original analysis
    /// corrected means or per-analyzer intensities is not known; this applies
    /// the simpler mean-level reading.
    pub contrast_correction: Option<T>,
}

impl<T: Real> Default for EstimatorOptions<T> {
    fn default() -> Self {
        Self {
            aux_norm_sq: T::lit(2.0),
            contrast_correction: None,
        }
    }
}

/// A point estimate with its standard uncertainty.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EstimateWithUncertainty<T> {
    pub value: T,
    pub std_uncertainty: T,
    /// The unclamped squared estimate, `ε²` or `η²`.
    pub raw_squared: T,
    /// The squared estimate fell outside `[0, 4]` and was clamped.
    pub clamped: bool,
}

#[derive(Clone, Copy)]
enum Quantity {
    Error,
    Disturbance,
}

impl Quantity {
    fn name(self) -> &'static str {
        match self {
            Quantity::Error => "eps",
            Quantity::Disturbance => "eta",
        }
    }

    fn mean<T: Real>(self, table: &CountTable<T>) -> Result<T> {
        match self {
            Quantity::Error => mean_oa(table),
            Quantity::Disturbance => mean_ob(table),
        }
    }

    fn aux(self) -> PreparedState {
        match self {
            Quantity::Error => PreparedState::PlusX,
            Quantity::Disturbance => PreparedState::PlusY,
        }
    }
}

/// Raw squared estimate and its delta-method variance from binomial counting
/// on each table (variance is only meaningful for raw counts).
fn squared_estimate<T: Real>(
    set: &StatePreparationSet<T>,
    quantity: Quantity,
    opts: &EstimatorOptions<T>,
) -> Result<(T, T)> {
    let contrast = opts.contrast_correction.unwrap_or_else(T::one);
    if !(contrast > T::zero() && contrast <= T::one()) {
        return Err(Error::InvalidContrast(contrast.to_f64().unwrap_or(f64::NAN)));
    }
    let terms = [
        (PreparedState::PlusZ, T::one()),
        (PreparedState::MinusZ, T::one()),
        (quantity.aux(), -opts.aux_norm_sq),
    ];
    let mut sq = T::lit(2.0);
    let mut var = T::zero();
    for (state, weight) in terms {
        let table = set.table(state);
        let raw_mean = quantity.mean(table)?;
        sq = sq + weight * raw_mean / contrast;
        let binomial = (T::one() - raw_mean * raw_mean).max(T::zero()) / table.total();
        var = var + weight * weight * binomial / (contrast * contrast);
    }
    Ok((sq, var))
}

fn finish<T: Real>(sq: T) -> (T, bool) {
    let upper = T::lit(4.0);
    let clamped_sq = sq.max(T::zero()).min(upper);
    (clamped_sq.sqrt(), clamped_sq != sq)
}

fn estimate<T: Real>(
    set: &StatePreparationSet<T>,
    quantity: Quantity,
    opts: &EstimatorOptions<T>,
) -> Result<EstimateWithUncertainty<T>> {
    let (sq, var) = squared_estimate(set, quantity, opts)?;
    let sd = var.sqrt();
    if sq < -(T::lit(5.0) * sd + T::herm_tol()) {
        let raw = sq.to_f64().unwrap_or(f64::NAN);
        let sd = sd.to_f64().unwrap_or(0.0);
        return Err(Error::DataCorruption {
            quantity: quantity.name(),
            raw,
            sigmas: if sd > 0.0 { -raw / sd } else { f64::INFINITY },
        });
    }
    let (value, clamped) = finish(sq);
    Ok(EstimateWithUncertainty {
        value,
        std_uncertainty: T::zero(),
        raw_squared: sq,
        clamped,
    })
}

/// `ε(A)` from the `|+z⟩`, `|−z⟩` and `|+x⟩` tables.
///
/// Negative `ε²` from noisy counts is clamped to zero (and values above 4 to
/// 4), keeping the raw value and a flag. A raw value more than five
/// delta-method standard deviations below zero is reported as corruption.
pub fn epsilon_from_counts<T: Real>(set: &StatePreparationSet<T>) -> Result<EstimateWithUncertainty<T>> {
    epsilon_from_counts_with(set, &EstimatorOptions::default())
}

pub fn epsilon_from_counts_with<T: Real>(
    set: &StatePreparationSet<T>,
    opts: &EstimatorOptions<T>,
) -> Result<EstimateWithUncertainty<T>> {
    estimate(set, Quantity::Error, opts)
}

/// `η(B)` from the `|+z⟩`, `|−z⟩` and `|+y⟩` tables.
pub fn eta_from_counts<T: Real>(set: &StatePreparationSet<T>) -> Result<EstimateWithUncertainty<T>> {
    eta_from_counts_with(set, &EstimatorOptions::default())
}

pub fn eta_from_counts_with<T: Real>(
    set: &StatePreparationSet<T>,
    opts: &EstimatorOptions<T>,
) -> Result<EstimateWithUncertainty<T>> {
    estimate(set, Quantity::Disturbance, opts)
}

/// Settings of [`propagate_uncertainty`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UncertaintyConfig<T> {
    /// Bootstrap resamples.
    pub resamples: usize,
    /// Systematic `(ε, η)` terms added in quadrature, e.g. from
    /// [`crate::noise_sim::systematic_shift`].
    pub systematic: (T, T),
    pub estimator: EstimatorOptions<T>,
}

pub const DEFAULT_RESAMPLES: usize = 1000;

impl<T: Real> Default for UncertaintyConfig<T> {
    fn default() -> Self {
        Self {
            resamples: DEFAULT_RESAMPLES,
            systematic: (T::zero(), T::zero()),
            estimator: EstimatorOptions::default(),
        }
    }
}

fn clamped_value<T: Real>(set: &StatePreparationSet<T>, quantity: Quantity, opts: &EstimatorOptions<T>) -> Result<T> {
    squared_estimate(set, quantity, opts).map(|(sq, _)| finish(sq).0)
}

/// Clamped `(ε, η)` without the corruption check, for resampled tables.
pub fn clamped_estimates<T: Real>(set: &StatePreparationSet<T>, opts: &EstimatorOptions<T>) -> Result<(T, T)> {
    Ok((
        clamped_value(set, Quantity::Error, opts)?,
        clamped_value(set, Quantity::Disturbance, opts)?,
    ))
}

/// Sample standard deviation (`n − 1` denominator); zero for fewer than two values.
pub fn sample_std<T: Real>(xs: &[T]) -> T {
    if xs.len() < 2 {
        return T::zero();
    }
    let n = T::from_usize(xs.len()).expect("sample count");
    let mean = xs.iter().copied().sum::<T>() / n;
    let ss: T = xs.iter().map(|&x| (x - mean) * (x - mean)).sum();
    (ss / (n - T::one())).sqrt()
}

/// Evaluates `stat` on `resamples` bootstrap copies of `set`. Each table is
/// redrawn as a multinomial with its own total and empirical frequencies.
pub fn bootstrap_replicates<T: Real, R: Rng + ?Sized, const K: usize>(
    set: &StatePreparationSet<T>,
    resamples: usize,
    rng: &mut R,
    stat: impl Fn(&StatePreparationSet<T>) -> Result<[T; K]>,
) -> Result<Vec<[T; K]>> {
    let mut counts = [[0u64; 4]; 4];
    for (slot, table) in counts.iter_mut().zip(set.tables()) {
        *slot = table.integer_counts().ok_or(Error::NonIntegerCounts)?;
        if slot.iter().sum::<u64>() == 0 {
            return Err(Error::ZeroTotal);
        }
    }
    (0..resamples)
        .map(|_| {
            let tables = counts.map(|c| {
                let n: u64 = c.iter().sum();
                let p = c.map(|k| k as f64 / n as f64);
                let draw = multinomial(n, &p, rng);
                CountTable::from_counts([draw[0], draw[1], draw[2], draw[3]])
            });
            stat(&StatePreparationSet::from_tables(tables))
        })
        .collect()
}

/// Per-component sample standard deviations of bootstrap replicates.
pub fn replicate_std<T: Real, const K: usize>(replicates: &[[T; K]]) -> [T; K] {
    std::array::from_fn(|k| {
        let column: Vec<T> = replicates.iter().map(|r| r[k]).collect();
        sample_std(&column)
    })
}

/// Bootstrap standard deviations `(σ_ε, σ_η)` of the clamped estimates.
pub fn bootstrap_uncertainty<T: Real, R: Rng + ?Sized>(
    set: &StatePreparationSet<T>,
    resamples: usize,
    opts: &EstimatorOptions<T>,
    rng: &mut R,
) -> Result<(T, T)> {
    let reps = bootstrap_replicates(set, resamples, rng, |s| {
        let (e, n) = clamped_estimates(s, opts)?;
        Ok([e, n])
    })?;
    let [se, sn] = replicate_std(&reps);
    Ok((se, sn))
}

/// Standard uncertainties of `(ε, η)`: bootstrap statistics combined in
/// quadrature with the configured systematic terms.
pub fn propagate_uncertainty<T: Real, R: Rng + ?Sized>(
    set: &StatePreparationSet<T>,
    config: &UncertaintyConfig<T>,
    rng: &mut R,
) -> Result<(T, T)> {
    let (stat_eps, stat_eta) = bootstrap_uncertainty(set, config.resamples, &config.estimator, rng)?;
    let (sys_eps, sys_eta) = config.systematic;
    Ok((stat_eps.hypot(sys_eps), stat_eta.hypot(sys_eta)))
}

/// Both estimates with uncertainties attached.
pub fn estimate_with_uncertainty<T: Real, R: Rng + ?Sized>(
    set: &StatePreparationSet<T>,
    config: &UncertaintyConfig<T>,
    rng: &mut R,
) -> Result<(EstimateWithUncertainty<T>, EstimateWithUncertainty<T>)> {
    let mut eps = epsilon_from_counts_with(set, &config.estimator)?;
    let mut eta = eta_from_counts_with(set, &config.estimator)?;
    let (ue, un) = propagate_uncertainty(set, config, rng)?;
    eps.std_uncertainty = ue;
    eta.std_uncertainty = un;
    Ok((eps, eta))
}

/// Cells in `++, +−, −+, −−` order paired with their sign labels.
pub fn labelled_cells<T: Real>(table: &CountTable<T>) -> [((Sign, Sign), T); 4] {
    let cells = table.cells();
    [
        (CELLS[0], cells[0]),
        (CELLS[1], cells[1]),
        (CELLS[2], cells[2]),
        (CELLS[3], cells[3]),
    ]
}
