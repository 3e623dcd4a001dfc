//! Output row types. CSV and JSON share the same field names.

use serde::Serialize;
use unclab::audit::AuditReport;
use unclab::relation::ErrorDisturbanceRecord;

use crate::format::sig6;

pub const SWEEP_HEADER: [&str; 14] = [
    "phi_deg",
    "eps_analytic",
    "eta_analytic",
    "eps_est",
    "eps_unc",
    "eta_est",
    "eta_unc",
    "sigma_a",
    "sigma_b",
    "heis_prod",
    "ozawa_sum",
    "bound",
    "heis_class",
    "ozawa_class",
];

pub const SIMULATE_HEADER: [&str; 7] = [
    "phi_deg",
    "prepared_state",
    "m1",
    "m2",
    "count",
    "normalized_intensity",
    "true_probability",
];

pub const AUDIT_HEADER: [&str; 12] = [
    "audit",
    "draws",
    "violations",
    "heisenberg_violations",
    "min_slack",
    "worst_draw",
    "worst_lhs",
    "worst_bound",
    "worst_eps",
    "worst_eta",
    "worst_sigma_a",
    "worst_sigma_b",
];

/// A row that can be written as CSV fields.
pub trait CsvRow {
    fn header() -> &'static [&'static str];
    fn fields(&self) -> Vec<String>;
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub phi_deg: f64,
    pub eps_analytic: f64,
    pub eta_analytic: f64,
    pub eps_est: f64,
    pub eps_unc: f64,
    pub eta_est: f64,
    pub eta_unc: f64,
    pub sigma_a: f64,
    pub sigma_b: f64,
    pub heis_prod: f64,
    pub ozawa_sum: f64,
    pub bound: f64,
    pub heis_class: &'static str,
    pub ozawa_class: &'static str,
}

impl From<&ErrorDisturbanceRecord> for SweepRow {
    fn from(r: &ErrorDisturbanceRecord) -> Self {
        Self {
            phi_deg: r.phi_deg,
            eps_analytic: r.eps_analytic,
            eta_analytic: r.eta_analytic,
            eps_est: r.eps.value,
            eps_unc: r.eps.uncertainty,
            eta_est: r.eta.value,
            eta_unc: r.eta.uncertainty,
            sigma_a: r.sigma_a.value,
            sigma_b: r.sigma_b.value,
            heis_prod: r.heisenberg_product.value,
            ozawa_sum: r.ozawa_sum.value,
            bound: r.bound,
            heis_class: r.classification.heisenberg.label(),
            ozawa_class: r.classification.ozawa.label(),
        }
    }
}

impl CsvRow for SweepRow {
    fn header() -> &'static [&'static str] {
        &SWEEP_HEADER
    }

    fn fields(&self) -> Vec<String> {
        let mut v: Vec<String> = [
            self.phi_deg,
            self.eps_analytic,
            self.eta_analytic,
            self.eps_est,
            self.eps_unc,
            self.eta_est,
            self.eta_unc,
            self.sigma_a,
            self.sigma_b,
            self.heis_prod,
            self.ozawa_sum,
            self.bound,
        ]
        .iter()
        .map(|&x| sig6(x))
        .collect();
        v.push(self.heis_class.to_string());
        v.push(self.ozawa_class.to_string());
        v
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimulateRow {
    pub phi_deg: f64,
    pub prepared_state: &'static str,
    pub m1: char,
    pub m2: char,
    pub count: u64,
    pub normalized_intensity: f64,
    pub true_probability: f64,
}

impl CsvRow for SimulateRow {
    fn header() -> &'static [&'static str] {
        &SIMULATE_HEADER
    }

    fn fields(&self) -> Vec<String> {
        vec![
            sig6(self.phi_deg),
            self.prepared_state.to_string(),
            self.m1.to_string(),
            self.m2.to_string(),
            // counts are exact integers, never rounded
            self.count.to_string(),
            sig6(self.normalized_intensity),
            sig6(self.true_probability),
        ]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AuditRow {
    pub audit: &'static str,
    pub draws: usize,
    pub violations: usize,
    pub heisenberg_violations: usize,
    pub min_slack: f64,
    pub worst_draw: usize,
    pub worst_lhs: f64,
    pub worst_bound: f64,
    pub worst_eps: f64,
    pub worst_eta: f64,
    pub worst_sigma_a: f64,
    pub worst_sigma_b: f64,
}

impl From<&AuditReport> for AuditRow {
    fn from(r: &AuditReport) -> Self {
        Self {
            audit: r.kind.label(),
            draws: r.draws,
            violations: r.violations,
            heisenberg_violations: r.heisenberg_violations,
            min_slack: r.min_slack,
            worst_draw: r.worst.draw,
            worst_lhs: r.worst.lhs,
            worst_bound: r.worst.bound,
            worst_eps: r.worst.terms.eps,
            worst_eta: r.worst.terms.eta,
            worst_sigma_a: r.worst.terms.sigma_a,
            worst_sigma_b: r.worst.terms.sigma_b,
        }
    }
}

impl CsvRow for AuditRow {
    fn header() -> &'static [&'static str] {
        &AUDIT_HEADER
    }

    fn fields(&self) -> Vec<String> {
        let mut v = vec![
            self.audit.to_string(),
            self.draws.to_string(),
            self.violations.to_string(),
            self.heisenberg_violations.to_string(),
        ];
        v.push(sig6(self.min_slack));
        v.push(self.worst_draw.to_string());
        v.extend(
            [
                self.worst_lhs,
                self.worst_bound,
                self.worst_eps,
                self.worst_eta,
                self.worst_sigma_a,
                self.worst_sigma_b,
            ]
            .iter()
            .map(|&x| sig6(x)),
        );
        v
    }
}
