//! Error–disturbance relations for the detuned `σ_φ` → `σ_y` experiment.
//!
//! Three expressions are compared against `½|⟨ψ|[A,B]|ψ⟩|`:
//!
//! ```text
//! Robertson   σ(A) σ(B)
//! Heisenberg  ε(A) η(B)                             (not universally valid)
//! universal   ε(A) η(B) + ε(A) σ(B) + σ(A) η(B)
//! ```
//!
//! A [`sweep`] produces one [`ErrorDisturbanceRecord`] per detuning, either
//! from the exact measurement-theory quantities or from simulated counts run
//! through the three-state estimator.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimator::{
    bootstrap_replicates, clamped_estimates, epsilon_from_counts_with, eta_from_counts_with, mean_oa, mean_ob,
    replicate_std, EstimatorOptions, PreparedState, StatePreparationSet, DEFAULT_RESAMPLES,
};
use crate::linalg::{commutator, expectation, std_dev, ComplexMatrix, StateVector};
use crate::measurement::{projective_family, rms_disturbance, rms_error, MeasurementFamily};
use crate::noise_sim::{run_experiment_on_stream, systematic_shift, NoiseConfig};
use crate::random::stream_rng;
use crate::scalar::{deg_to_rad, Real};
use crate::spin::{pauli, plus_z, sigma_phi, Axis};

/// Slack below which an inequality counts as satisfied.
pub const RELATION_TOL: f64 = 1e-9;

/// `½|⟨ψ|[A,B]|ψ⟩|`.
pub fn commutator_bound<T: Real>(psi: &StateVector<T>, a: &ComplexMatrix<T>, b: &ComplexMatrix<T>) -> Result<T> {
    let comm = commutator(a, b)?;
    Ok(expectation(psi, &comm)?.norm() / T::lit(2.0))
}

pub fn heisenberg_product<T: Real>(eps: T, eta: T) -> T {
    eps * eta
}

pub fn ozawa_sum<T: Real>(eps: T, eta: T, sigma_a: T, sigma_b: T) -> T {
    eps * eta + eps * sigma_b + sigma_a * eta
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RobertsonCheck<T> {
    pub lhs: T,
    pub rhs: T,
    pub satisfied: bool,
}

/// `σ(A)σ(B)` against the commutator bound.
pub fn robertson_check<T: Real>(
    psi: &StateVector<T>,
    a: &ComplexMatrix<T>,
    b: &ComplexMatrix<T>,
) -> Result<RobertsonCheck<T>> {
    let lhs = std_dev(psi, a)? * std_dev(psi, b)?;
    let rhs = commutator_bound(psi, a, b)?;
    Ok(RobertsonCheck {
        lhs,
        rhs,
        satisfied: lhs >= rhs - T::lit(RELATION_TOL),
    })
}

/// Exact `ε(A)`, `η(B)`, `σ(A)`, `σ(B)` and commutator bound for one
/// measurement family and state.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RelationTerms<T> {
    pub eps: T,
    pub eta: T,
    pub sigma_a: T,
    pub sigma_b: T,
    pub bound: T,
}

impl<T: Real> RelationTerms<T> {
    pub fn evaluate(
        family: &MeasurementFamily<T>,
        a: &ComplexMatrix<T>,
        b: &ComplexMatrix<T>,
        psi: &StateVector<T>,
    ) -> Result<Self> {
        Ok(Self {
            eps: rms_error(family, a, psi)?,
            eta: rms_disturbance(family, b, psi)?,
            sigma_a: std_dev(psi, a)?,
            sigma_b: std_dev(psi, b)?,
            bound: commutator_bound(psi, a, b)?,
        })
    }

    pub fn heisenberg_product(&self) -> T {
        heisenberg_product(self.eps, self.eta)
    }

    pub fn ozawa_sum(&self) -> T {
        ozawa_sum(self.eps, self.eta, self.sigma_a, self.sigma_b)
    }
}

/// `σ_φ`-measurement terms for `A = σ_x`, `B = σ_y`, `|ψ⟩ = |+z⟩`.
pub fn detuned_terms<T: Real>(phi: T) -> Result<RelationTerms<T>> {
    let family = projective_family(&sigma_phi(phi))?;
    RelationTerms::evaluate(&family, &pauli(Axis::X), &pauli(Axis::Y), &plus_z())
}

/// A value with its standard uncertainty.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Measured {
    pub value: f64,
    pub uncertainty: f64,
}

impl Measured {
    pub fn exact(value: f64) -> Self {
        Self {
            value,
            uncertainty: 0.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Source {
    Analytic,
    Simulated,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Satisfied,
    Violated,
    /// Within one standard uncertainty of the bound.
    Inconclusive,
}

impl Verdict {
    pub fn label(self) -> &'static str {
        match self {
            Verdict::Satisfied => "satisfied",
            Verdict::Violated => "violated",
            Verdict::Inconclusive => "inconclusive",
        }
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for Verdict {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "satisfied" => Ok(Verdict::Satisfied),
            "violated" => Ok(Verdict::Violated),
            "inconclusive" => Ok(Verdict::Inconclusive),
            other => Err(format!("unknown verdict `{other}`")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Classification {
    pub heisenberg: Verdict,
    pub ozawa: Verdict,
}

fn verdict(lhs: Measured, bound: f64, source: Source) -> Verdict {
    let u = lhs.uncertainty;
    if source == Source::Simulated && u > 0.0 && (lhs.value - bound).abs() <= u {
        Verdict::Inconclusive
    } else if lhs.value >= bound - RELATION_TOL {
        Verdict::Satisfied
    } else {
        Verdict::Violated
    }
}

/// Everything known about one detuning setting.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorDisturbanceRecord {
    pub phi: f64,
    pub phi_deg: f64,
    /// Exact values at this detuning, for reference next to estimates.
    pub eps_analytic: f64,
    pub eta_analytic: f64,
    pub eps: Measured,
    pub eta: Measured,
    pub sigma_a: Measured,
    pub sigma_b: Measured,
    pub bound: f64,
    pub heisenberg_product: Measured,
    pub ozawa_sum: Measured,
    pub eps_sigma_b: Measured,
    pub sigma_a_eta: Measured,
    /// Raw `ε²` / `η²` fell outside `[0, 4]` and was clamped.
    pub eps_clamped: bool,
    pub eta_clamped: bool,
    pub source: Source,
    pub classification: Classification,
}

impl ErrorDisturbanceRecord {
    /// Reclassifies from the stored values (useful after editing uncertainties).
    pub fn classify(&self) -> Classification {
        Classification {
            heisenberg: verdict(self.heisenberg_product, self.bound, self.source),
            ozawa: verdict(self.ozawa_sum, self.bound, self.source),
        }
    }
}

/// Record of exact values computed from a family and observables.
pub fn record_from_terms(phi_deg: f64, terms: &RelationTerms<f64>) -> ErrorDisturbanceRecord {
    let mut rec = ErrorDisturbanceRecord {
        phi: deg_to_rad(phi_deg),
        phi_deg,
        eps_analytic: terms.eps,
        eta_analytic: terms.eta,
        eps: Measured::exact(terms.eps),
        eta: Measured::exact(terms.eta),
        sigma_a: Measured::exact(terms.sigma_a),
        sigma_b: Measured::exact(terms.sigma_b),
        bound: terms.bound,
        heisenberg_product: Measured::exact(terms.heisenberg_product()),
        ozawa_sum: Measured::exact(terms.ozawa_sum()),
        eps_sigma_b: Measured::exact(terms.eps * terms.sigma_b),
        sigma_a_eta: Measured::exact(terms.sigma_a * terms.eta),
        eps_clamped: false,
        eta_clamped: false,
        source: Source::Analytic,
        classification: Classification {
            heisenberg: Verdict::Satisfied,
            ozawa: Verdict::Satisfied,
        },
    };
    rec.classification = rec.classify();
    rec
}

/// Exact record of the spin experiment at `phi_deg`.
pub fn analytic_record(phi_deg: f64) -> Result<ErrorDisturbanceRecord> {
    let terms = detuned_terms(deg_to_rad(phi_deg))?;
    Ok(record_from_terms(phi_deg, &terms))
}

/// Settings of the count-based estimate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EstimationSettings {
    /// Bootstrap resamples; 0 skips the statistical term.
    pub resamples: usize,
    /// Angle (degrees) of the `±δ` re-evaluation behind the systematic term.
    pub systematic_deg: f64,
    pub estimator: EstimatorOptions<f64>,
    /// Seeds the bootstrap streams.
    pub seed: u64,
}

impl Default for EstimationSettings {
    fn default() -> Self {
        Self {
            resamples: DEFAULT_RESAMPLES,
            systematic_deg: 0.0,
            estimator: EstimatorOptions::default(),
            seed: 0,
        }
    }
}

/// RNG stream of the bootstrap for the `index`-th setting; counting noise
/// uses stream `index` itself.
pub fn bootstrap_stream(index: usize) -> u64 {
    (1u64 << 32) | index as u64
}

/// `σ = √(1 − μ²)` of a `±1` observable.
fn binary_std(mean: f64) -> f64 {
    (1.0 - mean * mean).max(0.0).sqrt()
}

/// `[ε, η, σ(A), σ(B), εη, sum, εσ(B), σ(A)η]` with clamped estimates.
fn point_terms(set: &StatePreparationSet<f64>, opts: &EstimatorOptions<f64>) -> Result<[f64; 8]> {
    let (eps, eta) = clamped_estimates(set, opts)?;
    let psi = set.table(PreparedState::PlusZ);
    let sa = binary_std(mean_oa(psi)?);
    let sb = binary_std(mean_ob(psi)?);
    Ok([
        eps,
        eta,
        sa,
        sb,
        heisenberg_product(eps, eta),
        ozawa_sum(eps, eta, sa, sb),
        eps * sb,
        sa * eta,
    ])
}

/// Record estimated from the sixteen intensities of one setting.
///
/// `σ(A)` and `σ(B)` come from the first- and second-stage marginals of the
/// `|+z⟩` table. Statistical uncertainties are bootstrap standard deviations
/// drawn on [`bootstrap_stream`]`(index)`; the systematic `(ε, η)` terms are
/// propagated linearly into the products and added in quadrature.
pub fn record_from_counts(
    phi_deg: f64,
    set: &StatePreparationSet<f64>,
    settings: &EstimationSettings,
    index: usize,
) -> Result<ErrorDisturbanceRecord> {
    let phi = deg_to_rad(phi_deg);
    let eps_est = epsilon_from_counts_with(set, &settings.estimator)?;
    let eta_est = eta_from_counts_with(set, &settings.estimator)?;
    let [eps, eta, sa, sb, heis, sum, esb, sae] = point_terms(set, &settings.estimator)?;

    let stat = if settings.resamples > 0 {
        let mut rng = stream_rng(settings.seed, bootstrap_stream(index));
        let reps = bootstrap_replicates(set, settings.resamples, &mut rng, |s| {
            point_terms(s, &settings.estimator)
        })?;
        replicate_std(&reps)
    } else {
        [0.0; 8]
    };
    let (se, sn) = if settings.systematic_deg != 0.0 {
        systematic_shift(phi, settings.systematic_deg.abs())?
    } else {
        (0.0, 0.0)
    };
    let quad = |s: f64, de: f64, dn: f64| (s * s + (de * se).powi(2) + (dn * sn).powi(2)).sqrt();
    let exact = detuned_terms(phi)?;

    let mut rec = ErrorDisturbanceRecord {
        phi,
        phi_deg,
        eps_analytic: exact.eps,
        eta_analytic: exact.eta,
        eps: Measured {
            value: eps,
            uncertainty: quad(stat[0], 1.0, 0.0),
        },
        eta: Measured {
            value: eta,
            uncertainty: quad(stat[1], 0.0, 1.0),
        },
        sigma_a: Measured {
            value: sa,
            uncertainty: stat[2],
        },
        sigma_b: Measured {
            value: sb,
            uncertainty: stat[3],
        },
        bound: exact.bound,
        heisenberg_product: Measured {
            value: heis,
            uncertainty: quad(stat[4], eta, eps),
        },
        ozawa_sum: Measured {
            value: sum,
            uncertainty: quad(stat[5], eta + sb, eps + sa),
        },
        eps_sigma_b: Measured {
            value: esb,
            uncertainty: quad(stat[6], sb, 0.0),
        },
        sigma_a_eta: Measured {
            value: sae,
            uncertainty: quad(stat[7], 0.0, sa),
        },
        eps_clamped: eps_est.clamped,
        eta_clamped: eta_est.clamped,
        source: Source::Simulated,
        classification: Classification {
            heisenberg: Verdict::Satisfied,
            ozawa: Verdict::Satisfied,
        },
    };
    rec.classification = rec.classify();
    Ok(rec)
}

/// Inclusive, strictly increasing detuning grid, kept in degrees so grid
/// points print exactly.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhiGrid {
    degrees: Vec<f64>,
}

impl PhiGrid {
    pub fn from_degrees(degrees: Vec<f64>) -> Result<Self> {
        if degrees.is_empty() {
            return Err(Error::InvalidGrid("grid is empty".into()));
        }
        if let Some(&x) = degrees.iter().find(|x| !x.is_finite()) {
            return Err(Error::NonFinite(x));
        }
        if degrees.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidGrid("angles must be strictly increasing".into()));
        }
        Ok(Self { degrees })
    }

    /// `count` evenly spaced points from `start` to `stop`, both included.
    pub fn linspace(start: f64, stop: f64, count: usize) -> Result<Self> {
        match count {
            0 => Err(Error::InvalidGrid("count must be at least 1".into())),
            1 if start != stop => Err(Error::InvalidGrid("a single-point grid needs start == stop".into())),
            1 => Self::from_degrees(vec![start]),
            _ => {
                let step = (stop - start) / (count - 1) as f64;
                let mut v: Vec<f64> = (0..count).map(|i| start + step * i as f64).collect();
                v[count - 1] = stop;
                Self::from_degrees(v)
            }
        }
    }

    /// 0° to 90° in 5° steps.
    pub fn standard() -> Self {
        Self::linspace(0.0, 90.0, 19).expect("valid literal grid")
    }

    pub fn degrees(&self) -> &[f64] {
        &self.degrees
    }

    pub fn radians(&self) -> Vec<f64> {
        self.degrees.iter().map(|&d| deg_to_rad(d)).collect()
    }

    pub fn len(&self) -> usize {
        self.degrees.len()
    }

    pub fn is_empty(&self) -> bool {
        self.degrees.is_empty()
    }
}

impl FromStr for PhiGrid {
    type Err = Error;

    /// `START:STOP:COUNT` in degrees.
    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split(':').collect();
        let [start, stop, count] = parts.as_slice() else {
            return Err(Error::InvalidGrid(format!("`{s}` is not START:STOP:COUNT")));
        };
        let angle = |x: &str| {
            x.trim()
                .parse::<f64>()
                .map_err(|_| Error::InvalidGrid(format!("`{x}` is not a number")))
        };
        let count = count
            .trim()
            .parse::<usize>()
            .map_err(|_| Error::InvalidGrid(format!("`{count}` is not a point count")))?;
        Self::linspace(angle(start)?, angle(stop)?, count)
    }
}

/// Simulation and estimation settings of a simulated sweep.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimulationSettings {
    pub noise: NoiseConfig,
    pub resamples: usize,
    pub estimator: EstimatorOptions<f64>,
}

impl SimulationSettings {
    pub fn new(noise: NoiseConfig) -> Self {
        Self {
            noise,
            resamples: DEFAULT_RESAMPLES,
            estimator: EstimatorOptions::default(),
        }
    }

    /// Estimation settings matching this simulation: bootstrap on the same
    /// seed, systematic term from the configured misalignment.
    pub fn estimation(&self) -> EstimationSettings {
        EstimationSettings {
            resamples: self.resamples,
            systematic_deg: self.noise.misalign_deg.abs(),
            estimator: self.estimator,
            seed: self.noise.seed,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "lowercase")]
pub enum SweepMode {
    Analytic,
    Simulated(SimulationSettings),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub config: SweepMode,
    pub records: Vec<ErrorDisturbanceRecord>,
}

/// One record per grid point, in grid order. Simulated points use noise
/// stream `i` and bootstrap stream [`bootstrap_stream`]`(i)`, so the output
/// does not depend on thread scheduling.
pub fn sweep(grid: &PhiGrid, mode: &SweepMode) -> Result<SweepResult> {
    let records = grid
        .degrees()
        .par_iter()
        .enumerate()
        .map(|(i, &deg)| match mode {
            SweepMode::Analytic => analytic_record(deg),
            SweepMode::Simulated(settings) => {
                let run = run_experiment_on_stream(deg_to_rad(deg), &settings.noise, i as u64)?;
                record_from_counts(deg, &run.tables, &settings.estimation(), i)
            }
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SweepResult { config: *mode, records })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spin::plus_x;
    use std::f64::consts::SQRT_2;

    #[test]
    fn commutator_bound_examples() {
        let (x, y) = (pauli::<f64>(Axis::X), pauli::<f64>(Axis::Y));
        assert!((commutator_bound(&plus_z(), &x, &y).unwrap() - 1.0).abs() < 1e-12);
        assert!(commutator_bound(&plus_x(), &x, &y).unwrap().abs() < 1e-12);
        assert!(commutator_bound(&plus_z(), &x, &x).unwrap().abs() < 1e-12);
        let big = ComplexMatrix::<f64>::identity(3);
        assert!(matches!(
            commutator_bound(&plus_z(), &x, &big),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn product_and_sum_examples() {
        let r40 = analytic_record(40.0).unwrap();
        assert!((r40.heisenberg_product.value - 0.741055).abs() < 1e-6);
        assert!((r40.ozawa_sum.value - 2.508446).abs() < 1e-6);
        let r0 = analytic_record(0.0).unwrap();
        assert!(r0.heisenberg_product.value.abs() < 1e-12);
        assert!((r0.ozawa_sum.value - SQRT_2).abs() < 1e-12);
        let r90 = analytic_record(90.0).unwrap();
        assert!(r90.heisenberg_product.value.abs() < 1e-12);
        assert!((r90.ozawa_sum.value - SQRT_2).abs() < 1e-12);
    }

    #[test]
    fn classification_examples() {
        for deg in [0.0, 40.0] {
            let c = analytic_record(deg).unwrap().classification;
            assert_eq!(c.heisenberg, Verdict::Violated);
            assert_eq!(c.ozawa, Verdict::Satisfied);
        }
        let x = pauli::<f64>(Axis::X);
        let family = projective_family(&x).unwrap();
        let terms = RelationTerms::evaluate(&family, &x, &x, &plus_z()).unwrap();
        assert_eq!(terms.bound, 0.0);
        let c = record_from_terms(0.0, &terms).classification;
        assert_eq!(
            c,
            Classification {
                heisenberg: Verdict::Satisfied,
                ozawa: Verdict::Satisfied
            }
        );
    }

    #[test]
    fn simulated_records_near_the_bound_are_inconclusive() {
        let mut rec = analytic_record(40.0).unwrap();
        rec.source = Source::Simulated;
        rec.heisenberg_product = Measured {
            value: 0.95,
            uncertainty: 0.1,
        };
        assert_eq!(rec.classify().heisenberg, Verdict::Inconclusive);
        rec.heisenberg_product.uncertainty = 0.01;
        assert_eq!(rec.classify().heisenberg, Verdict::Violated);
    }

    #[test]
    fn robertson_examples() {
        let (x, y) = (pauli::<f64>(Axis::X), pauli::<f64>(Axis::Y));
        let r = robertson_check(&plus_z(), &x, &y).unwrap();
        assert!((r.lhs - 1.0).abs() < 1e-12 && (r.rhs - 1.0).abs() < 1e-12 && r.satisfied);
        let r = robertson_check(&plus_x(), &x, &y).unwrap();
        assert!(r.lhs.abs() < 1e-12 && r.rhs.abs() < 1e-12 && r.satisfied);
    }

    #[test]
    fn grid_parsing() {
        let g: PhiGrid = "0:90:19".parse().unwrap();
        assert_eq!(g.len(), 19);
        assert_eq!(g.degrees()[8], 40.0);
        assert_eq!(g.degrees()[18], 90.0);
        assert_eq!(g, PhiGrid::standard());
        assert_eq!("40:40:1".parse::<PhiGrid>().unwrap().degrees(), &[40.0]);
        for bad in ["", "0:90", "0:90:0", "90:0:3", "0:x:3", "0:90:-1", "10:20:1", "0:0:2"] {
            assert!(bad.parse::<PhiGrid>().is_err(), "{bad}");
        }
    }

    #[test]
    fn analytic_sweep_grid_values() {
        let grid = PhiGrid::from_degrees(vec![0.0, 40.0, 90.0]).unwrap();
        let res = sweep(&grid, &SweepMode::Analytic).unwrap();
        let eps: Vec<f64> = res.records.iter().map(|r| r.eps.value).collect();
        let eta: Vec<f64> = res.records.iter().map(|r| r.eta.value).collect();
        assert!(eps[0].abs() < 1e-12 && (eps[2] - SQRT_2).abs() < 1e-12);
        assert!((eps[1] - 0.68404).abs() < 1e-5);
        assert!((eta[0] - SQRT_2).abs() < 1e-12 && eta[2].abs() < 1e-12);
        assert!((eta[1] - 1.08335).abs() < 1e-5);
    }

    #[test]
    fn counts_record_uses_marginal_deviations() {
        let noise = NoiseConfig {
            counts_per_state: 20_000,
            seed: 5,
            ..NoiseConfig::default()
        };
        let settings = SimulationSettings {
            resamples: 50,
            ..SimulationSettings::new(noise)
        };
        let res = sweep(&"40:40:1".parse().unwrap(), &SweepMode::Simulated(settings)).unwrap();
        let r = &res.records[0];
        assert_eq!(r.source, Source::Simulated);
        assert!((r.sigma_a.value - 1.0).abs() < 1e-3);
        assert!((r.sigma_b.value - 1.0).abs() < 1e-3);
        assert!(r.eps.uncertainty > 0.0 && r.eta.uncertainty > 0.0);
        assert!((r.eps.value - r.eps_analytic).abs() < 5.0 * r.eps.uncertainty);
        let ident = r.ozawa_sum.value - r.heisenberg_product.value - r.eps_sigma_b.value - r.sigma_a_eta.value;
        assert!(ident.abs() < 1e-12);
    }
}
