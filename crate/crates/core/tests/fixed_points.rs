use num_complex::Complex64;
use paramp_core::lindblad::EnvironmentParams;
use paramp_core::model::HamiltonianCoefficients;
use paramp_core::response::dpa_gain_closed_form;
use paramp_core::semiclassical::{
    analytic_gain, pump_fixed_points, small_signal_pump_residual, stability_diagram, FixedPointSet,
};
use proptest::prelude::*;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

fn env() -> EnvironmentParams {
    EnvironmentParams::lossless()
}

/// Newton multistart on the raw (unscaled) system from random points.
fn brute_force(delta: f64, lambda: f64, cubic: f64, starts: usize, rng: &mut StdRng) -> Vec<f64> {
    let s = (1.0 / (4.0 * cubic.abs())).sqrt();
    let f = |x: f64, y: f64| {
        (4.0 * cubic * x.powi(3) + (lambda + delta) * x + 0.5 * y, 4.0 * cubic * y.powi(3) + (lambda - delta) * y + 0.5 * x)
    };
    let mut pops: Vec<f64> = Vec::new();
    for _ in 0..starts {
        let (mut x, mut y) = (rng.gen_range(-3.0..3.0) * s, rng.gen_range(-3.0..3.0) * s);
        for _ in 0..60 {
            let (f1, f2) = f(x, y);
            let j11 = 12.0 * cubic * x * x + lambda + delta;
            let j22 = 12.0 * cubic * y * y + lambda - delta;
            let det = j11 * j22 - 0.25;
            if det.abs() < 1e-300 {
                break;
            }
            x -= (j22 * f1 - 0.5 * f2) / det;
            y -= (j11 * f2 - 0.5 * f1) / det;
        }
        let (f1, f2) = f(x, y);
        // Residual in the scaled units of the library.
        if f1.abs().max(f2.abs()) / s < 1e-10 {
            let p = x * x + y * y;
            if !pops.iter().any(|q| (q - p).abs() <= 1e-6 * p.max(1.0)) {
                pops.push(p);
            }
        }
    }
    pops.sort_by(f64::total_cmp);
    pops
}

fn same_set(a: &[f64], b: &[f64]) -> bool {
    a.len() == b.len() && a.iter().zip(b).all(|(x, y)| (x - y).abs() <= 1e-6 * y.max(1.0))
}

#[test]
fn companion_roots_match_newton_multistart() {
    let mut rng = StdRng::seed_from_u64(7);
    let cubic = -2e-4;
    for i in 0..10 {
        for j in 0..10 {
            let delta = -1.0 + 2.0 * i as f64 / 9.0;
            let lambda = 1.2 * j as f64 / 9.0;
            let fp = pump_fixed_points(delta, lambda, cubic, &env());
            let brute = brute_force(delta, lambda, cubic, 10_000, &mut rng);
            assert!(same_set(&fp.unique_populations, &brute), "({delta}, {lambda}): {:?} vs {brute:?}", fp.unique_populations);
        }
    }
}

fn check_invariants(fp: &FixedPointSet, delta: f64, lambda: f64, cubic: f64) {
    assert!(fp.points.contains(&(0.0, 0.0)));
    assert!((1..=5).contains(&fp.count()));
    let s = (1.0 / (4.0 * cubic.abs())).sqrt();
    for &(x, y) in &fp.points {
        let mirrored = fp.points.iter().any(|&(u, v)| (u + x).abs() <= 1e-9 * s && (v + y).abs() <= 1e-9 * s);
        assert!(mirrored, "({x}, {y}) has no mirror");
        let (xi, eta) = (x / s, y / s);
        let sigma = cubic.signum();
        let r1 = sigma * xi.powi(3) + (lambda + delta) * xi + 0.5 * eta;
        let r2 = sigma * eta.powi(3) + (lambda - delta) * eta + 0.5 * xi;
        assert!(r1.abs().max(r2.abs()) < 1e-12);
        let alpha = Complex64::new(x, y);
        let scale = 1.0 + alpha.norm() + 4.0 * cubic.abs() * alpha.norm().powi(3);
        assert!(small_signal_pump_residual(alpha, delta, lambda, cubic, &env()).norm() < 1e-10 * scale);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn fixed_point_sets_are_certified(
        delta in -1.5f64..1.5,
        lambda in 0.0f64..1.5,
        cubic in prop_oneof![-1e-2f64..-1e-6, 1e-6f64..1e-2],
    ) {
        let fp = pump_fixed_points(delta, lambda, cubic, &env());
        check_invariants(&fp, delta, lambda, cubic);
    }

    #[test]
    fn count_depends_only_on_the_sign_of_cubic(
        delta in -1.0f64..1.0,
        lambda in 0.0f64..1.2,
        m1 in 1e-6f64..1e-2,
        m2 in 1e-6f64..1e-2,
        sign in prop_oneof![Just(-1.0f64), Just(1.0)],
    ) {
        let a = pump_fixed_points(delta, lambda, sign * m1, &env());
        let b = pump_fixed_points(delta, lambda, sign * m2, &env());
        prop_assert_eq!(a.count(), b.count());
        // Populations scale as 1/|Λ|.
        for (p, q) in a.unique_populations.iter().zip(&b.unique_populations) {
            prop_assert!((p * m1 - q * m2).abs() <= 1e-7 * (p * m1).max(1e-12));
        }
    }

    #[test]
    fn linear_model_equals_dpa_closed_form(
        omega in -1.0f64..1.0,
        delta in -1.0f64..1.0,
        lambda in 0.0f64..0.49,
    ) {
        let c = HamiltonianCoefficients::dpa(delta, lambda);
        let e = env();
        let g = analytic_gain(omega, &c, &e, 1e-6).unwrap().gain;
        let dpa = dpa_gain_closed_form(omega, delta, Complex64::new(lambda, 0.0), &e);
        prop_assert!((g - dpa).abs() <= 1e-12 * dpa.max(1.0), "{} vs {}", g, dpa);
    }
}

#[test]
fn linear_model_equals_dpa_on_fixed_sample() {
    let mut rng = StdRng::seed_from_u64(11);
    let e = env();
    for _ in 0..100 {
        let omega = rng.gen_range(-1.0..1.0);
        let delta = rng.gen_range(-1.0..1.0);
        let lambda = rng.gen_range(0.0..0.49);
        let c = HamiltonianCoefficients::dpa(delta, lambda);
        let g = analytic_gain(omega, &c, &e, 0.0).unwrap().gain;
        let dpa = dpa_gain_closed_form(omega, delta, Complex64::new(lambda, 0.0), &e);
        assert!((g - dpa).abs() <= 4.0 * f64::EPSILON * dpa);
    }
}

#[test]
fn bistable_to_tristable_boundary() {
    // Λ opposite in sign to λ, as for the circuit-derived coefficients.
    let boundary = |delta: f64| (delta * delta + 0.25f64).sqrt();
    for delta in [0.0, 0.3, -0.6] {
        let map = stability_diagram((delta, delta), (0.2, 1.0), -2e-4, &env(), (1, 401)).unwrap();
        let step = 0.8 / 400.0;
        let t = map.transition(0, 2, 3).expect("transition present");
        assert!((t - boundary(delta)).abs() <= step + 1e-12, "Δ {delta}: {t} vs {}", boundary(delta));
    }
}

#[test]
fn same_sign_cubic_collapses_to_monostable() {
    let map = stability_diagram((0.3, 0.3), (0.2, 1.0), 2e-4, &env(), (1, 401)).unwrap();
    let t = map.transition(0, 2, 1).expect("transition present");
    assert!((t - 0.34f64.sqrt()).abs() <= 0.8 / 400.0);
}

#[test]
fn diagram_has_all_regimes() {
    let map = stability_diagram((-2.0, 2.0), (-3.0, 3.0), -2e-4, &env(), (41, 121)).unwrap();
    for k in [1u8, 2, 3, 5] {
        assert!(map.counts.contains(&k), "count {k} missing");
    }
    assert!(map.counts.iter().all(|c| (1..=5).contains(c)));
    // Four values only where two pairs share a population, on the Δ = 0 line.
    for (id, &delta) in map.deltas.iter().enumerate() {
        for il in 0..map.lambdas.len() {
            if map.count(id, il) == 4 {
                assert!(delta.abs() < 1e-12, "count 4 at Δ = {delta}");
            }
        }
    }
    let linear = stability_diagram((-1.0, 1.0), (0.0, 1.0), 0.0, &env(), (11, 11)).unwrap();
    assert!(linear.counts.iter().all(|&c| c == 1));
}

#[test]
fn mirrored_parameters_share_counts() {
    // Δ → −Δ swaps the roles of x and y.
    let mut rng = StdRng::seed_from_u64(3);
    for _ in 0..200 {
        let delta = rng.gen_range(-1.0..1.0);
        let lambda = rng.gen_range(0.0..1.2);
        let a = pump_fixed_points(delta, lambda, 3e-4, &env());
        let b = pump_fixed_points(-delta, lambda, 3e-4, &env());
        assert_eq!(a.count(), b.count());
    }
}
