//! Library results against independently computed reference values.

use approx::assert_abs_diff_eq;
use num_complex::Complex64;
use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_2, SQRT_2};

use unclab::estimator::{
    bootstrap_uncertainty, epsilon_from_counts, eta_from_counts, CountTable, EstimatorOptions, PreparedState,
    StatePreparationSet,
};
use unclab::measurement::{
    output_operator_error, projective_family, rms_disturbance, rms_error, successive_distribution,
};
use unclab::noise_sim::ideal_probabilities;
use unclab::random::stream_rng;
use unclab::relation::{analytic_record, detuned_terms, sweep, PhiGrid, SweepMode};
use unclab::spin::{pauli, plus_z, sigma_phi, Axis};
use unclab::{Family32, Ket32};

/// Eigenvectors written out by hand: `|±φ⟩ = (1, ±e^{iφ})/√2`.
fn phi_eigvec(phi: f64, sign: f64) -> [Complex64; 2] {
    let h = FRAC_1_SQRT_2;
    [Complex64::new(h, 0.0), Complex64::from_polar(sign * h, phi)]
}

fn overlap(a: [Complex64; 2], b: [Complex64; 2]) -> Complex64 {
    a[0].conj() * b[0] + a[1].conj() * b[1]
}

/// `p(m1, m2) = |⟨m1_φ|ψ⟩|² |⟨m2_y|m1_φ⟩|²`, with `|±y⟩ = |±(π/2)⟩`.
fn joint_oracle(phi: f64, psi: [Complex64; 2]) -> [f64; 4] {
    let mut out = [0.0; 4];
    let mut k = 0;
    for s1 in [1.0, -1.0] {
        for s2 in [1.0, -1.0] {
            let first = phi_eigvec(phi, s1);
            let second = phi_eigvec(FRAC_PI_2, s2);
            out[k] = overlap(first, psi).norm_sqr() * overlap(second, first).norm_sqr();
            k += 1;
        }
    }
    out
}

fn prepared_amplitudes(s: PreparedState) -> [Complex64; 2] {
    let h = FRAC_1_SQRT_2;
    match s {
        PreparedState::PlusZ => [Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)],
        PreparedState::MinusZ => [Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0)],
        PreparedState::PlusX => [Complex64::new(h, 0.0), Complex64::new(h, 0.0)],
        PreparedState::PlusY => [Complex64::new(h, 0.0), Complex64::new(0.0, h)],
    }
}

fn eps_closed(phi: f64) -> f64 {
    2.0 * (phi / 2.0).sin()
}

fn eta_closed(phi: f64) -> f64 {
    SQRT_2 * phi.cos()
}

fn fifty_angles() -> Vec<f64> {
    (0..50).map(|i| FRAC_PI_2 * i as f64 / 49.0).collect()
}

#[test]
fn joint_distributions_match_eigenvector_overlaps() {
    for phi in fifty_angles() {
        for s in PreparedState::ALL {
            let got = ideal_probabilities(phi, s).cells();
            let want = joint_oracle(phi, prepared_amplitudes(s));
            for i in 0..4 {
                assert_abs_diff_eq!(got[i], want[i], epsilon = 1e-12);
            }
        }
    }
}

#[test]
fn rms_quantities_match_closed_forms() {
    let (x, y) = (pauli::<f64>(Axis::X), pauli::<f64>(Axis::Y));
    for phi in fifty_angles() {
        let fam = projective_family(&sigma_phi(phi)).unwrap();
        assert_abs_diff_eq!(
            rms_error(&fam, &x, &plus_z()).unwrap(),
            eps_closed(phi),
            epsilon = 1e-10
        );
        assert_abs_diff_eq!(
            output_operator_error(&fam, &x, &plus_z()).unwrap(),
            eps_closed(phi),
            epsilon = 1e-10
        );
        assert_abs_diff_eq!(
            rms_disturbance(&fam, &y, &plus_z()).unwrap(),
            eta_closed(phi),
            epsilon = 1e-10
        );
    }
}

#[test]
fn estimator_reproduces_rms_quantities_from_exact_probabilities() {
    let m2 = projective_family(&pauli::<f64>(Axis::Y)).unwrap();
    for phi in fifty_angles() {
        let m1 = projective_family(&sigma_phi(phi)).unwrap();
        let tables = PreparedState::ALL.map(|s| {
            let p = successive_distribution(&m1, &m2, &s.state()).unwrap();
            CountTable::from_distribution(&p, 1.0)
        });
        let set = StatePreparationSet::from_tables(tables);
        let terms = detuned_terms(phi).unwrap();
        // ε near zero amplifies rounding in ε² through the square root
        let tol = |v: f64| if v < 1e-4 { 1e-7 } else { 1e-10 };
        let e = epsilon_from_counts(&set).unwrap().value;
        let n = eta_from_counts(&set).unwrap().value;
        assert_abs_diff_eq!(e, terms.eps, epsilon = tol(terms.eps));
        assert_abs_diff_eq!(n, terms.eta, epsilon = tol(terms.eta));
    }
}

#[test]
fn single_precision_pipeline() {
    let x = pauli::<f32>(Axis::X);
    let phi = 40f32.to_radians();
    let fam: Family32 = projective_family(&sigma_phi(phi)).unwrap();
    let psi: Ket32 = plus_z();
    let e = rms_error(&fam, &x, &psi).unwrap();
    assert_abs_diff_eq!(e, 2.0 * 20f32.to_radians().sin(), epsilon = 1e-5);
    let eta = rms_disturbance(&fam, &pauli(Axis::Y), &psi).unwrap();
    assert_abs_diff_eq!(eta, SQRT_2 as f32 * phi.cos(), epsilon = 1e-5);
    let tables = PreparedState::ALL.map(|s| CountTable::from_distribution(&ideal_probabilities(phi, s), 1.0f32));
    let est = epsilon_from_counts(&StatePreparationSet::from_tables(tables)).unwrap();
    assert_abs_diff_eq!(est.value, e, epsilon = 1e-4);
}

#[test]
fn analytic_sweep_against_closed_forms() {
    let grid = PhiGrid::linspace(0.0, 90.0, 1801).unwrap();
    let res = sweep(&grid, &SweepMode::Analytic).unwrap();
    let mut max_heis: f64 = 0.0;
    let mut prev = (f64::NEG_INFINITY, f64::INFINITY);
    for r in &res.records {
        let phi = r.phi;
        let heis = 2.0 * SQRT_2 * (phi / 2.0).sin() * phi.cos();
        assert_abs_diff_eq!(r.heisenberg_product.value, heis, epsilon = 1e-12);
        assert_abs_diff_eq!(r.eps_sigma_b.value, eps_closed(phi), epsilon = 1e-12);
        assert_abs_diff_eq!(r.sigma_a_eta.value, eta_closed(phi), epsilon = 1e-12);
        assert_abs_diff_eq!(
            r.ozawa_sum.value,
            heis + eps_closed(phi) + eta_closed(phi),
            epsilon = 1e-12
        );
        assert_abs_diff_eq!(r.bound, 1.0, epsilon = 1e-12);
        assert!(r.ozawa_sum.value >= 1.0);
        assert!(r.heisenberg_product.value < 1.0);
        assert!(r.eps.value >= prev.0 && r.eta.value <= prev.1);
        prev = (r.eps.value, r.eta.value);
        max_heis = max_heis.max(r.heisenberg_product.value);
    }
    // maximum of 2√2 sin(φ/2) cos φ, by a finer independent scan
    let fine_max = (0..=900_000)
        .map(|i| {
            let p = FRAC_PI_2 * i as f64 / 900_000.0;
            2.0 * SQRT_2 * (p / 2.0).sin() * p.cos()
        })
        .fold(0.0f64, f64::max);
    assert!((max_heis - fine_max).abs() < 1e-6);
    assert!((fine_max - 0.77).abs() < 0.01);
}

#[test]
fn endpoints_and_midpoint() {
    let r0 = analytic_record(0.0).unwrap();
    assert_abs_diff_eq!(r0.eps.value, 0.0, epsilon = 1e-12);
    assert_abs_diff_eq!(r0.eta.value, SQRT_2, epsilon = 1e-12);
    let r90 = analytic_record(90.0).unwrap();
    assert_abs_diff_eq!(r90.eps.value, SQRT_2, epsilon = 1e-12);
    assert_abs_diff_eq!(r90.eta.value, 0.0, epsilon = 1e-12);
    let r40 = analytic_record(40.0).unwrap();
    assert_abs_diff_eq!(r40.heisenberg_product.value, 0.741055, epsilon = 1e-6);
    assert_abs_diff_eq!(r40.ozawa_sum.value, 2.508446, epsilon = 1e-6);
}

/// Delta-method standard deviation of ε for binomially distributed means.
fn delta_method_eps_sd(set: &StatePreparationSet<f64>) -> f64 {
    let mean = |t: &CountTable<f64>| {
        let c = t.cells();
        ((c[0] + c[1]) - (c[2] + c[3])) / t.total()
    };
    let mut var_sq = 0.0;
    let mut sq = 2.0;
    for (s, w) in [
        (PreparedState::PlusZ, 1.0),
        (PreparedState::MinusZ, 1.0),
        (PreparedState::PlusX, -2.0),
    ] {
        let t = set.table(s);
        let m = mean(t);
        sq += w * m;
        var_sq += w * w * (1.0 - m * m) / t.total();
    }
    var_sq.sqrt() / (2.0 * sq.sqrt())
}

fn rounded_set(phi: f64, n: f64) -> StatePreparationSet<f64> {
    let tables = PreparedState::ALL.map(|s| {
        let p = ideal_probabilities(phi, s).cells();
        // round while keeping the total exactly n
        let mut c = p.map(|x| (x * n).round());
        let drift: f64 = n - c.iter().sum::<f64>();
        c[0] += drift;
        CountTable::new(c).unwrap()
    });
    StatePreparationSet::from_tables(tables)
}

#[test]
fn bootstrap_agrees_with_delta_method() {
    let set = rounded_set(40f64.to_radians(), 4000.0);
    let mut rng = stream_rng(21, 0);
    let (ue, _) = bootstrap_uncertainty(&set, 1000, &EstimatorOptions::default(), &mut rng).unwrap();
    let oracle = delta_method_eps_sd(&set);
    assert!(
        ue > oracle / 2.0 && ue < oracle * 2.0,
        "bootstrap {ue} vs delta {oracle}"
    );
}

#[test]
fn bootstrap_scales_with_inverse_root_counts() {
    let phi = 40f64.to_radians();
    let small = rounded_set(phi, 4000.0);
    let large = small.map_tables(|t| t.scaled(100.0));
    let opts = EstimatorOptions::default();
    let (es, ns) = bootstrap_uncertainty(&small, 1000, &opts, &mut stream_rng(4, 0)).unwrap();
    let (el, nl) = bootstrap_uncertainty(&large, 1000, &opts, &mut stream_rng(4, 1)).unwrap();
    for ratio in [es / el, ns / nl] {
        assert!((8.0..=12.0).contains(&ratio), "ratio {ratio}");
    }
}
