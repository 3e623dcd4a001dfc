//! Virtual experiment: the sixteen intensities of one detuning setting, with
//! analyzer contrast, coherent angular misalignment and counting noise.
//!
//! Each prepared state goes through ideal → misalignment → contrast → sample.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimator::{epsilon_from_counts, eta_from_counts, CountTable, PreparedState, StatePreparationSet};
use crate::measurement::{projective_family, successive_distribution, JointOutcomeDistribution, Sign};
use crate::random::{multinomial, poisson_counts, stream_rng};
use crate::scalar::{deg_to_rad, Real};
use crate::spin::{bloch_state, pauli, sigma_phi, Axis};

/// Roughly 90 counts/s for one minute.
pub const DEFAULT_COUNTS_PER_STATE: u64 = 5400;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CountingModel {
    /// Fixed total per prepared state.
    #[default]
    Multinomial,
    /// Independent Poisson cells with mean total `N`; totals fluctuate.
    Poisson,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseConfig {
    pub counts_per_state: u64,
    pub contrast: f64,
    pub misalign_deg: f64,
    pub seed: u64,
    #[serde(default)]
    pub counting: CountingModel,
}

impl Default for NoiseConfig {
    fn default() -> Self {
        Self {
            counts_per_state: DEFAULT_COUNTS_PER_STATE,
            contrast: 1.0,
            misalign_deg: 0.0,
            seed: 0,
            counting: CountingModel::Multinomial,
        }
    }
}

impl NoiseConfig {
    pub fn validate(&self) -> Result<()> {
        if self.counts_per_state == 0 {
            return Err(Error::ZeroCounts);
        }
        if !(self.contrast > 0.0 && self.contrast <= 1.0) {
            return Err(Error::InvalidContrast(self.contrast));
        }
        if !self.misalign_deg.is_finite() {
            return Err(Error::NonFinite(self.misalign_deg));
        }
        Ok(())
    }
}

/// Successive `σ_φ` then `σ_y` outcome distribution for a prepared state.
pub fn ideal_probabilities<T: Real>(phi: T, prepared: PreparedState) -> JointOutcomeDistribution<T> {
    let (theta, azimuth) = prepared.bloch_angles();
    distribution_for(phi, theta, azimuth)
}

fn distribution_for<T: Real>(phi: T, theta: T, azimuth: T) -> JointOutcomeDistribution<T> {
    let m1 = projective_family(&sigma_phi(phi)).expect("σ_φ is a binary observable");
    let m2 = projective_family(&pauli(Axis::Y)).expect("σ_y is a binary observable");
    successive_distribution(&m1, &m2, &bloch_state(theta, azimuth))
        .expect("binary qubit families and a normalized qubit state")
}

/// Visibility model: at both stages the recorded binary outcome `(q, 1−q)`
/// becomes `(Cq + (1−C)/2, …)`. A conditional on a first outcome that never
/// occurs is taken as ½.
pub fn apply_contrast<T: Real>(p: &JointOutcomeDistribution<T>, contrast: T) -> Result<JointOutcomeDistribution<T>> {
    if !(contrast > T::zero() && contrast <= T::one()) {
        return Err(Error::InvalidContrast(contrast.to_f64().unwrap_or(f64::NAN)));
    }
    let half = T::lit(0.5);
    let mix = |q: T| contrast * q + (T::one() - contrast) * half;
    let mut cells = [T::zero(); 4];
    for m1 in Sign::BOTH {
        let first = mix(p.marginal_first(m1));
        let q_plus = mix(p.conditional_second(m1, Sign::Plus).unwrap_or(half));
        cells[m1.index() * 2] = first * q_plus;
        cells[m1.index() * 2 + 1] = first * (T::one() - q_plus);
    }
    JointOutcomeDistribution::from_cells(cells)
}

/// Ideal distribution with the detuning and both Bloch angles of the
/// preparation shifted by the same `δ` (degrees).
pub fn apply_misalignment<T: Real>(phi: T, delta_deg: T, prepared: PreparedState) -> JointOutcomeDistribution<T> {
    let d = deg_to_rad(delta_deg);
    let (theta, azimuth) = prepared.bloch_angles::<T>();
    distribution_for(phi + d, theta + d, azimuth + d)
}

/// One draw of `n` counts over the four cells.
pub fn sample_counts<R: Rng + ?Sized>(
    p: &JointOutcomeDistribution<f64>,
    n: u64,
    counting: CountingModel,
    rng: &mut R,
) -> CountTable<f64> {
    let probs = p.cells();
    let draw = match counting {
        CountingModel::Multinomial => multinomial(n, &probs, rng),
        CountingModel::Poisson => poisson_counts(n as f64, &probs, rng),
    };
    CountTable::from_counts([draw[0], draw[1], draw[2], draw[3]])
}

/// Noisy tables of one detuning setting together with the distributions
/// they were sampled from.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentRun {
    pub phi: f64,
    pub noise: NoiseConfig,
    pub tables: StatePreparationSet<f64>,
    /// Indexed in [`PreparedState::ALL`] order.
    pub true_probabilities: [JointOutcomeDistribution<f64>; 4],
}

impl ExperimentRun {
    pub fn true_probability(&self, state: PreparedState) -> &JointOutcomeDistribution<f64> {
        &self.true_probabilities[state.index()]
    }
}

/// Noise-transformed distribution of one prepared state.
pub fn noisy_distribution(
    phi: f64,
    noise: &NoiseConfig,
    prepared: PreparedState,
) -> Result<JointOutcomeDistribution<f64>> {
    apply_contrast(&apply_misalignment(phi, noise.misalign_deg, prepared), noise.contrast)
}

/// Runs the experiment on RNG stream 0 of `noise.seed`.
pub fn run_experiment(phi: f64, noise: &NoiseConfig) -> Result<ExperimentRun> {
    run_experiment_on_stream(phi, noise, 0)
}

/// Runs the experiment on the given stream of `noise.seed`; sweeps give each
/// detuning its own stream so results do not depend on scheduling.
pub fn run_experiment_on_stream(phi: f64, noise: &NoiseConfig, stream: u64) -> Result<ExperimentRun> {
    run_experiment_with(phi, noise, &mut stream_rng(noise.seed, stream))
}

pub fn run_experiment_with<R: Rng + ?Sized>(phi: f64, noise: &NoiseConfig, rng: &mut R) -> Result<ExperimentRun> {
    noise.validate()?;
    if !phi.is_finite() {
        return Err(Error::NonFinite(phi));
    }
    let mut truth = [JointOutcomeDistribution::uniform(); 4];
    for s in PreparedState::ALL {
        truth[s.index()] = noisy_distribution(phi, noise, s)?;
    }
    let tables = truth.map(|p| sample_counts(&p, noise.counts_per_state, noise.counting, rng));
    Ok(ExperimentRun {
        phi,
        noise: *noise,
        tables: StatePreparationSet::from_tables(tables),
        true_probabilities: truth,
    })
}

/// Systematic `(ε, η)` terms: half the spread of the noise-free estimates with
/// every angle shifted by `+δ` and by `−δ`.
pub fn systematic_shift(phi: f64, delta_deg: f64) -> Result<(f64, f64)> {
    let at = |d: f64| -> Result<(f64, f64)> {
        let tables = PreparedState::ALL.map(|s| CountTable::from_distribution(&apply_misalignment(phi, d, s), 1.0));
        let set = StatePreparationSet::from_tables(tables);
        Ok((epsilon_from_counts(&set)?.value, eta_from_counts(&set)?.value))
    };
    let (ep, np) = at(delta_deg)?;
    let (em, nm) = at(-delta_deg)?;
    Ok(((ep - em).abs() / 2.0, (np - nm).abs() / 2.0))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn deg(x: f64) -> f64 {
        x.to_radians()
    }

    #[test]
    fn ideal_probability_examples() {
        let p = ideal_probabilities(0.0, PreparedState::PlusZ);
        assert!(p.max_abs_diff(&JointOutcomeDistribution::uniform()) < 1e-12);
        let p = ideal_probabilities(deg(90.0), PreparedState::PlusZ);
        let want = JointOutcomeDistribution::from_cells([0.5, 0.0, 0.0, 0.5]).unwrap();
        assert!(p.max_abs_diff(&want) < 1e-12);
        let p = ideal_probabilities(deg(40.0), PreparedState::PlusZ);
        let want = JointOutcomeDistribution::from_cells([0.410697, 0.089303, 0.089303, 0.410697]).unwrap();
        assert!(p.max_abs_diff(&want) < 1e-6);
    }

    #[test]
    fn contrast_identity_and_full_depolarization() {
        let p = ideal_probabilities(deg(40.0), PreparedState::PlusX);
        assert_eq!(apply_contrast(&p, 1.0).unwrap().max_abs_diff(&p), 0.0);
        let flat = apply_contrast(&p, 1e-12).unwrap();
        assert!(flat.max_abs_diff(&JointOutcomeDistribution::uniform()) < 1e-11);
        assert!(apply_contrast(&p, 0.0).is_err());
        assert!(apply_contrast(&p, 1.01).is_err());
    }

    #[test]
    fn contrast_at_forty_degrees() {
        // p(m1) = ½ stays ½; p(m2 = ± | m1 = ±) = (1 ± sin40°)/2 → C(1 ± sin40°)/2 + (1−C)/2
        let c = 0.96;
        let p = apply_contrast(&ideal_probabilities(deg(40.0), PreparedState::PlusZ), c).unwrap();
        let s = deg(40.0).sin();
        let same = 0.5 * (c * (1.0 + s) / 2.0 + (1.0 - c) / 2.0);
        let flip = 0.5 * (c * (1.0 - s) / 2.0 + (1.0 - c) / 2.0);
        let want = JointOutcomeDistribution::from_cells([same, flip, flip, same]).unwrap();
        assert!(p.max_abs_diff(&want) < 1e-12);
        assert!((p.total() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn misalignment_examples() {
        for s in PreparedState::ALL {
            let a = apply_misalignment(deg(33.0), 0.0, s);
            assert!(a.max_abs_diff(&ideal_probabilities(deg(33.0), s)) < 1e-15);
        }
        let p = apply_misalignment(0.0, 1.6, PreparedState::PlusZ);
        let s = 1.6f64.to_radians().sin();
        for m1 in Sign::BOTH {
            let q = p.conditional_second(m1, Sign::Plus).unwrap();
            assert!((q - (1.0 + m1.value::<f64>() * s) / 2.0).abs() < 1e-12);
        }
        // opposite shifts move every cell in opposite directions to first order
        for s in PreparedState::ALL {
            let ideal = ideal_probabilities(deg(45.0), s).cells();
            let up = apply_misalignment(deg(45.0), 1.6, s).cells();
            let down = apply_misalignment(deg(45.0), -1.6, s).cells();
            for i in 0..4 {
                let (du, dd) = (up[i] - ideal[i], down[i] - ideal[i]);
                assert!((du + dd).abs() <= 0.05 * du.abs().max(dd.abs()) + 1e-3, "{s} cell {i}");
            }
        }
    }

    #[test]
    fn sampling_examples() {
        let mut rng = stream_rng(9, 0);
        let point = JointOutcomeDistribution::from_cells([1.0, 0.0, 0.0, 0.0]).unwrap();
        let t = sample_counts(&point, 123, CountingModel::Multinomial, &mut rng);
        assert_eq!(t.cells(), [123.0, 0.0, 0.0, 0.0]);
        let n = 1_000_000u64;
        let t = sample_counts(
            &JointOutcomeDistribution::uniform(),
            n,
            CountingModel::Multinomial,
            &mut rng,
        );
        let sd = (n as f64 * 0.25 * 0.75).sqrt();
        for x in t.cells() {
            assert!((x - 250_000.0).abs() < 5.0 * sd);
        }
        assert_eq!(t.total(), n as f64);
    }

    #[test]
    fn runs_are_deterministic_and_complete() {
        let noise = NoiseConfig {
            counts_per_state: 777,
            contrast: 0.96,
            misalign_deg: 1.6,
            seed: 42,
            counting: CountingModel::Multinomial,
        };
        let a = run_experiment(deg(40.0), &noise).unwrap();
        let b = run_experiment(deg(40.0), &noise).unwrap();
        assert_eq!(a, b);
        for t in a.tables.tables() {
            assert_eq!(t.total(), 777.0);
        }
        let c = run_experiment_on_stream(deg(40.0), &noise, 1).unwrap();
        assert_ne!(a.tables, c.tables);
    }

    #[test]
    fn single_count_runs() {
        let noise = NoiseConfig {
            counts_per_state: 1,
            ..NoiseConfig::default()
        };
        let run = run_experiment(deg(40.0), &noise).unwrap();
        for t in run.tables.tables() {
            assert_eq!(t.cells().iter().filter(|&&x| x != 0.0).count(), 1);
        }
    }

    #[test]
    fn large_runs_converge() {
        let noise = NoiseConfig {
            counts_per_state: 1_000_000,
            seed: 7,
            ..NoiseConfig::default()
        };
        let run = run_experiment(deg(40.0), &noise).unwrap();
        let eps = epsilon_from_counts(&run.tables).unwrap().value;
        assert!((eps - 2.0 * deg(20.0).sin()).abs() < 0.01);
        let run = run_experiment(0.0, &noise).unwrap();
        let eta = eta_from_counts(&run.tables).unwrap().value;
        assert!((eta - 2f64.sqrt()).abs() < 0.01);
    }

    #[test]
    fn config_validation() {
        let ok = NoiseConfig::default();
        assert!(ok.validate().is_ok());
        assert_eq!(
            NoiseConfig {
                counts_per_state: 0,
                ..ok
            }
            .validate(),
            Err(Error::ZeroCounts)
        );
        assert!(NoiseConfig { contrast: 0.0, ..ok }.validate().is_err());
        assert!(NoiseConfig {
            misalign_deg: f64::NAN,
            ..ok
        }
        .validate()
        .is_err());
    }

    #[test]
    fn systematic_shift_is_small_and_vanishes_without_misalignment() {
        assert_eq!(systematic_shift(deg(40.0), 0.0).unwrap(), (0.0, 0.0));
        let (se, sn) = systematic_shift(deg(40.0), 1.6).unwrap();
        // dε/dφ = cos(φ/2) and dη/dφ = −√2 sin φ bound the detuning part
        assert!(se > 0.0 && se < 0.1);
        assert!(sn > 0.0 && sn < 0.1);
    }

    #[test]
    fn poisson_mode_fluctuates_totals() {
        let noise = NoiseConfig {
            counts_per_state: 10_000,
            counting: CountingModel::Poisson,
            seed: 3,
            ..NoiseConfig::default()
        };
        let run = run_experiment(deg(20.0), &noise).unwrap();
        for t in run.tables.tables() {
            assert!((t.total() - 10_000.0).abs() < 600.0);
        }
    }
}
