mod common;

use num_complex::Complex64;
use paramp_core::lindblad::{solve_model, EnvironmentParams, SolverSettings};
use paramp_core::model::HamiltonianCoefficients;
use paramp_core::response::{
    caves_efficiency, dpa_gain_closed_form, gain_from_baseline, lossy_zero_gain_threshold, measure_gain,
    model_noise, phase_preserving_gain, GainMatrix, ProbeSpec,
};

fn oracle_matrix(delta: f64, lambda: Complex64, kappa: f64, gamma: f64) -> GainMatrix {
    let s = common::scattering(delta, lambda, kappa, gamma);
    GainMatrix { g11: s[(0, 0)], g12: s[(0, 1)], g21: s[(1, 0)], g22: s[(1, 1)] }
}

fn measured(c: &HamiltonianCoefficients, env: &EnvironmentParams) -> GainMatrix {
    measure_gain(c, env, &ProbeSpec::default_for(env), &SolverSettings::default()).unwrap().gain
}

#[test]
fn gain_matrix_matches_langevin_oracle() {
    let env = EnvironmentParams::lossless();
    for (delta, lambda) in [
        (0.0, Complex64::new(0.45, 0.0)),
        (0.0, Complex64::new(0.0, -0.45)),
        (0.2, Complex64::new(0.25, 0.15)),
    ] {
        let c = HamiltonianCoefficients::dpa(delta, 0.0).with_lambda(lambda);
        let g = measured(&c, &env);
        let o = oracle_matrix(delta, lambda, 1.0, 0.0);
        assert!(g.relative_change(&o) < 1e-3, "{g:?} vs {o:?}");
    }
}

#[test]
fn squeezing_axis_aligned_drive_gives_diagonal_matrix() {
    // λ = −0.45iκ puts the amplified quadrature along P.
    let env = EnvironmentParams::lossless();
    let c = HamiltonianCoefficients::dpa(0.0, 0.0).with_lambda(Complex64::new(0.0, -0.45));
    let g = measured(&c, &env);
    assert!((g.g11 - 0.05 / 0.95).abs() < 1e-3 * 19.0);
    assert!((g.g22 - 19.0).abs() < 1e-3 * 19.0);
    assert!(g.g12.abs() < 1e-3 && g.g21.abs() < 1e-3);
    assert!((phase_preserving_gain(&g) - 90.75).abs() < 0.005 * 90.75);
}

#[test]
fn pipeline_matches_closed_form() {
    let env = EnvironmentParams::lossless();
    for lambda in [0.0, 0.1, 0.2, 0.3, 0.4, 0.45] {
        let c = HamiltonianCoefficients::dpa(0.0, lambda);
        let g = phase_preserving_gain(&measured(&c, &env));
        let closed = dpa_gain_closed_form(0.0, 0.0, c.lambda, &env);
        assert!((g - closed).abs() < 0.02 * closed, "{lambda}: {g} vs {closed}");
    }
}

#[test]
fn lossy_gain_matches_closed_form() {
    let env = EnvironmentParams::new(1.0, 0.3).unwrap();
    for lambda in [0.0, 0.2, 0.5] {
        let c = HamiltonianCoefficients::dpa(0.1, lambda);
        let g = phase_preserving_gain(&measured(&c, &env));
        let closed = dpa_gain_closed_form(0.0, 0.1, c.lambda, &env);
        assert!((g - closed).abs() < 1e-3 * closed, "{lambda}: {g} vs {closed}");
        let o = oracle_matrix(0.1, c.lambda, 1.0, 0.3);
        assert!((phase_preserving_gain(&o) - closed).abs() < 1e-9 * closed);
    }
    let t = lossy_zero_gain_threshold(&env).unwrap();
    let at = phase_preserving_gain(&measured(&HamiltonianCoefficients::dpa(0.0, t), &env));
    assert!((10.0 * at.log10()).abs() < 0.01);
}

#[test]
fn kerr_mixes_quadratures() {
    let env = EnvironmentParams::lossless();
    let c = HamiltonianCoefficients::dpa(0.0, 0.0).with_lambda(Complex64::new(0.0, -0.45)).with_kerr(1e-2);
    let g = measured(&c, &env);
    assert!(g.g12.abs().max(g.g21.abs()) > 1e-2 * g.max_abs(), "{g:?}");
}

#[test]
fn probe_halving_is_linear() {
    let env = EnvironmentParams::lossless();
    let c = HamiltonianCoefficients::dpa(0.0, 0.45).with_kerr(1e-2);
    let base = solve_model(&c, &env, &SolverSettings::default(), None).unwrap();
    let m = gain_from_baseline(&base, &c, &env, &ProbeSpec::default_for(&env), true).unwrap();
    assert!(m.linearity < 5e-3);
    assert_eq!(m.halvings, 0);
}

#[test]
fn added_noise_respects_caves_bound() {
    let env = EnvironmentParams::lossless();
    for (kerr, cubic) in [(0.0, 0.0), (1e-2, 0.0), (0.0, -2e-4)] {
        for lambda in [0.05, 0.25, 0.45] {
            let c = HamiltonianCoefficients::dpa(0.0, lambda).with_kerr(kerr).with_cubic(cubic);
            let g = phase_preserving_gain(&measured(&c, &env));
            let nf = model_noise(g, &c, &env).unwrap();
            assert!(nf.added >= (g - 1.0) / (2.0 * g) - 1e-9, "{kerr} {cubic} {lambda}");
            assert!(nf.efficiency <= caves_efficiency(g) + 1e-6);
        }
    }
}
