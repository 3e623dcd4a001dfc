//! Randomized audits of the uncertainty relations.
//!
//! Every draw `i` uses its own RNG stream, so results are identical whatever
//! the thread count, and any reported worst case can be regenerated from
//! `(seed, draw)` alone.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{std_dev, ComplexMatrix};
use crate::measurement::{
    indirect_rms_disturbance, indirect_rms_error, projective_family, rms_disturbance, rms_error, von_neumann_model,
    IndirectModel,
};
use crate::random::{random_hermitian, random_state, random_unit_vector, random_unitary, stream_rng};
use crate::relation::{commutator_bound, robertson_check, RelationTerms, RELATION_TOL};
use crate::spin::{bloch_vector, pauli, sigma_n, Axis};

const PROJECTIVE_STREAMS: u64 = 1 << 40;
const INDIRECT_STREAMS: u64 = 2 << 40;
const ROBERTSON_STREAMS: u64 = 3 << 40;
const CONSISTENCY_STREAMS: u64 = 4 << 40;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum AuditKind {
    Projective,
    Indirect,
    Robertson,
}

impl AuditKind {
    pub fn label(self) -> &'static str {
        match self {
            AuditKind::Projective => "projective",
            AuditKind::Indirect => "indirect",
            AuditKind::Robertson => "robertson",
        }
    }
}

/// Where the smallest slack occurred.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WorstCase {
    pub draw: usize,
    pub lhs: f64,
    pub bound: f64,
    /// `ε, η, σ(A), σ(B)`; for the Robertson audit only the deviations are set.
    pub terms: RelationTerms<f64>,
    /// Bloch vector of the system state (qubit audits).
    pub state_bloch: Option<[f64; 3]>,
    /// Measured direction `n` of `σ_n` (projective audit).
    pub direction: Option<[f64; 3]>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AuditReport {
    pub kind: AuditKind,
    pub seed: u64,
    pub draws: usize,
    /// Draws where the audited relation fails by more than the tolerance.
    pub violations: usize,
    /// Draws with `εη` below the bound by more than the tolerance
    /// (not counted for the Robertson audit).
    pub heisenberg_violations: usize,
    /// `min(lhs − bound)` over all draws.
    pub min_slack: f64,
    pub worst: WorstCase,
}

impl AuditReport {
    pub fn passed(&self) -> bool {
        self.violations == 0
    }
}

struct Draw {
    slack: f64,
    violated: bool,
    heisenberg_violated: bool,
    worst: WorstCase,
}

fn summarize(kind: AuditKind, seed: u64, draws: Vec<Draw>) -> AuditReport {
    let n = draws.len();
    let violations = draws.iter().filter(|d| d.violated).count();
    let heisenberg_violations = draws.iter().filter(|d| d.heisenberg_violated).count();
    // first minimum in draw order, independent of scheduling
    let worst = draws
        .into_iter()
        .reduce(|a, b| if b.slack < a.slack { b } else { a })
        .expect("at least one draw");
    AuditReport {
        kind,
        seed,
        draws: n,
        violations,
        heisenberg_violations,
        min_slack: worst.slack,
        worst: worst.worst,
    }
}

fn run<F>(draws: usize, f: F) -> Result<Vec<Draw>>
where
    F: Fn(usize) -> Result<Draw> + Sync + Send,
{
    if draws == 0 {
        return Err(Error::ZeroDraws);
    }
    (0..draws).into_par_iter().map(f).collect()
}

fn relation_draw(
    draw: usize,
    terms: RelationTerms<f64>,
    state_bloch: Option<[f64; 3]>,
    direction: Option<[f64; 3]>,
) -> Draw {
    let sum = terms.ozawa_sum();
    let slack = sum - terms.bound;
    Draw {
        slack,
        violated: slack < -RELATION_TOL,
        heisenberg_violated: terms.heisenberg_product() < terms.bound - RELATION_TOL,
        worst: WorstCase {
            draw,
            lhs: sum,
            bound: terms.bound,
            terms,
            state_bloch,
            direction,
        },
    }
}

/// Random qubit state and random projective `σ_n` measurement, with
/// `A = σ_x`, `B = σ_y`.
pub fn projective_audit(draws: usize, seed: u64) -> Result<AuditReport> {
    let (a, b) = (pauli::<f64>(Axis::X), pauli::<f64>(Axis::Y));
    let results = run(draws, |i| {
        let mut rng = stream_rng(seed, PROJECTIVE_STREAMS | i as u64);
        let psi = random_state(2, &mut rng);
        let n = random_unit_vector(&mut rng);
        let family = projective_family(&sigma_n(n))?;
        let terms = RelationTerms::evaluate(&family, &a, &b, &psi)?;
        Ok(relation_draw(i, terms, Some(bloch_vector(&psi)), Some(n)))
    })?;
    Ok(summarize(AuditKind::Projective, seed, results))
}

/// Random qubit–qubit interaction `U` (4×4), probe state and Hermitian meter,
/// with `A = σ_x`, `B = σ_y` on a random system state.
pub fn indirect_audit(draws: usize, seed: u64) -> Result<AuditReport> {
    let (a, b) = (pauli::<f64>(Axis::X), pauli::<f64>(Axis::Y));
    let results = run(draws, |i| {
        let mut rng = stream_rng(seed, INDIRECT_STREAMS | i as u64);
        let psi = random_state(2, &mut rng);
        let probe = random_state(2, &mut rng);
        let u = random_unitary(4, &mut rng);
        let meter = random_hermitian(2, &mut rng);
        let model = IndirectModel::new(2, probe, u, meter)?;
        let terms = RelationTerms {
            eps: indirect_rms_error(&model, &a, &psi)?,
            eta: indirect_rms_disturbance(&model, &b, &psi)?,
            sigma_a: std_dev(&psi, &a)?,
            sigma_b: std_dev(&psi, &b)?,
            bound: commutator_bound(&psi, &a, &b)?,
        };
        Ok(relation_draw(i, terms, Some(bloch_vector(&psi)), None))
    })?;
    Ok(summarize(AuditKind::Indirect, seed, results))
}

/// `σ(A)σ(B)` against the bound for random states and random Hermitian
/// `A`, `B` (unit spectral radius) in dimension `dim`.
pub fn robertson_audit(draws: usize, dim: usize, seed: u64) -> Result<AuditReport> {
    if dim == 0 {
        return Err(Error::EmptyDimension);
    }
    let results = run(draws, |i| {
        let mut rng = stream_rng(seed, ROBERTSON_STREAMS | i as u64);
        let psi = random_state(dim, &mut rng);
        let a: ComplexMatrix<f64> = random_hermitian(dim, &mut rng);
        let b = random_hermitian(dim, &mut rng);
        let check = robertson_check(&psi, &a, &b)?;
        let slack = check.lhs - check.rhs;
        Ok(Draw {
            slack,
            violated: !check.satisfied,
            heisenberg_violated: false,
            worst: WorstCase {
                draw: i,
                lhs: check.lhs,
                bound: check.rhs,
                terms: RelationTerms {
                    eps: 0.0,
                    eta: 0.0,
                    sigma_a: std_dev(&psi, &a)?,
                    sigma_b: std_dev(&psi, &b)?,
                    bound: check.rhs,
                },
                state_bloch: (dim == 2).then(|| bloch_vector(&psi)),
                direction: None,
            },
        })
    })?;
    Ok(summarize(AuditKind::Robertson, seed, results))
}

/// Largest disagreement between the operator formulas for `(ε, η)` and the
/// same family realized as a von Neumann pointer model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConsistencyReport {
    pub cases: usize,
    pub seed: u64,
    pub max_eps_diff: f64,
    pub max_eta_diff: f64,
}

impl ConsistencyReport {
    pub fn max_diff(&self) -> f64 {
        self.max_eps_diff.max(self.max_eta_diff)
    }
}

/// Random `σ_n` families, random Hermitian `A`, `B` and random qubit states.
pub fn formalism_consistency(cases: usize, seed: u64) -> Result<ConsistencyReport> {
    if cases == 0 {
        return Err(Error::ZeroDraws);
    }
    let diffs: Vec<(f64, f64)> = (0..cases)
        .into_par_iter()
        .map(|i| {
            let mut rng = stream_rng(seed, CONSISTENCY_STREAMS | i as u64);
            let psi = random_state::<f64, _>(2, &mut rng);
            let n = random_unit_vector(&mut rng);
            let a = random_hermitian(2, &mut rng);
            let b = random_hermitian(2, &mut rng);
            let family = projective_family(&sigma_n(n))?;
            let model = von_neumann_model(&family)?;
            let de = (rms_error(&family, &a, &psi)? - indirect_rms_error(&model, &a, &psi)?).abs();
            let dn = (rms_disturbance(&family, &b, &psi)? - indirect_rms_disturbance(&model, &b, &psi)?).abs();
            Ok((de, dn))
        })
        .collect::<Result<_>>()?;
    let (max_eps_diff, max_eta_diff) = diffs
        .iter()
        .fold((0.0f64, 0.0f64), |(e, n), &(de, dn)| (e.max(de), n.max(dn)));
    Ok(ConsistencyReport {
        cases,
        seed,
        max_eps_diff,
        max_eta_diff,
    })
}
