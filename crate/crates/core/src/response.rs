//! Linear-response gain and noise.
//!
//! A coherent probe enters through the signal port. In the master equation it
//! appears as `H_probe = ε a† + ε* a` with `ε = i√κ ⟨a_in⟩`, and the reflected
//! field follows `⟨a_out⟩ = √κ ⟨a⟩ − ⟨a_in⟩`. Quadratures are
//! `X = √2 Re α`, `P = √2 Im α`.

use std::f64::consts::FRAC_PI_2;

use log::warn;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fock::{self, HilbertSpace, Operator};
use crate::lindblad::{self, EnvironmentParams, SolvedState, SolverSettings, SteadyStateSolver};
use crate::model::{build_hamiltonian, HamiltonianCoefficients};

/// Quadrature-to-quadrature amplitude gains, `[X_out, P_out] = g [X_in, P_in]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GainMatrix {
    pub g11: f64,
    pub g12: f64,
    pub g21: f64,
    pub g22: f64,
}

impl GainMatrix {
    pub fn identity() -> Self {
        Self { g11: 1.0, g12: 0.0, g21: 0.0, g22: 1.0 }
    }

    pub fn rotation(phi: f64) -> Self {
        let (s, c) = phi.sin_cos();
        Self { g11: c, g12: -s, g21: s, g22: c }
    }

    pub fn is_finite(&self) -> bool {
        [self.g11, self.g12, self.g21, self.g22].iter().all(|x| x.is_finite())
    }

    pub fn max_abs(&self) -> f64 {
        [self.g11, self.g12, self.g21, self.g22].iter().fold(0.0, |m, x| m.max(x.abs()))
    }

    /// Largest entry change relative to the largest entry of `self`.
    pub fn relative_change(&self, other: &GainMatrix) -> f64 {
        let d = [
            self.g11 - other.g11,
            self.g12 - other.g12,
            self.g21 - other.g21,
            self.g22 - other.g22,
        ];
        d.iter().fold(0.0, |m: f64, x| m.max(x.abs())) / self.max_abs().max(1e-300)
    }

    pub fn phase_preserving_gain(&self) -> f64 {
        phase_preserving_gain(self)
    }
}

/// `G = |g11 + g22 + i(g21 − g12)|² / 4`.
pub fn phase_preserving_gain(g: &GainMatrix) -> f64 {
    Complex64::new(g.g11 + g.g22, g.g21 - g.g12).norm_sqr() / 4.0
}

pub fn to_db(power_ratio: f64) -> f64 {
    10.0 * power_ratio.log10()
}

pub fn from_db(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

/// Probe drive strength ε (angular frequency) and reference phase.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProbeSpec {
    pub amplitude: f64,
    pub phase: f64,
}

impl ProbeSpec {
    pub fn new(amplitude: f64, phase: f64, env: &EnvironmentParams) -> Result<Self> {
        if !(amplitude.is_finite() && amplitude > 0.0 && amplitude <= env.kappa / 100.0) {
            return Err(Error::InvalidParameter(format!(
                "probe amplitude must lie in (0, kappa/100], got {amplitude}"
            )));
        }
        if !phase.is_finite() {
            return Err(Error::InvalidParameter("probe phase must be finite".into()));
        }
        Ok(Self { amplitude, phase })
    }

    /// ε = κ/1000 along X.
    pub fn default_for(env: &EnvironmentParams) -> Self {
        Self { amplitude: env.kappa / 1000.0, phase: 0.0 }
    }

    pub fn halved(&self) -> Self {
        Self { amplitude: 0.5 * self.amplitude, phase: self.phase }
    }

    /// Mean input field `⟨a_in⟩` for an extra phase offset.
    pub fn input_field(&self, env: &EnvironmentParams, offset: f64) -> Complex64 {
        Complex64::from_polar(self.amplitude / env.kappa.sqrt(), self.phase + offset)
    }
}

/// Hamiltonian drive reproducing the input field `a_in`.
pub fn probe_hamiltonian(a_in: Complex64, env: &EnvironmentParams, space: HilbertSpace) -> Operator {
    let eps = Complex64::new(0.0, env.kappa.sqrt()) * a_in;
    let a = fock::annihilation(space);
    let ad = fock::creation(space);
    ad.scale(eps).add(&a.scale(eps.conj())).expect("same space")
}

/// Linearity bound for a probe halving.
pub const LINEARITY_TOL: f64 = 5e-3;
/// Automatic halvings attempted before reporting nonlinearity.
pub const MAX_HALVINGS: usize = 4;

/// Gain matrix with the diagnostics of the probe solves.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GainMeasurement {
    pub gain: GainMatrix,
    /// Probe amplitude finally accepted.
    pub probe: f64,
    /// Relative change against the half-amplitude probe.
    pub linearity: f64,
    pub halvings: usize,
    /// Largest steady-state residual among the probe solves.
    pub residual: f64,
}

impl GainMeasurement {
    pub fn phase_preserving_gain(&self) -> f64 {
        phase_preserving_gain(&self.gain)
    }
}

fn output_shift(
    coeffs: &HamiltonianCoefficients,
    env: &EnvironmentParams,
    space: HilbertSpace,
    a_in: Complex64,
    baseline: Complex64,
) -> Result<(Complex64, f64)> {
    let h = build_hamiltonian(coeffs, space).add(&probe_hamiltonian(a_in, env, space))?;
    let solver = SteadyStateSolver::new(lindblad::liouvillian(&h, env)?)?;
    let ss = solver.steady_state()?;
    let mean = lindblad::moments(&ss.rho).mean;
    Ok((env.kappa.sqrt() * (mean - baseline) - a_in, ss.relative_residual))
}

fn gain_at(
    coeffs: &HamiltonianCoefficients,
    env: &EnvironmentParams,
    space: HilbertSpace,
    probe: &ProbeSpec,
    baseline: Complex64,
) -> Result<(GainMatrix, f64)> {
    let inputs = [probe.input_field(env, 0.0), probe.input_field(env, FRAC_PI_2)];
    let mut outs = [Complex64::new(0.0, 0.0); 2];
    let mut residual: f64 = 0.0;
    for (k, a_in) in inputs.iter().enumerate() {
        let (d, r) = output_shift(coeffs, env, space, *a_in, baseline)?;
        outs[k] = d;
        residual = residual.max(r);
    }
    // Columns of the input quadratures; solve g · Qin = Qout.
    let q = |z: Complex64| (std::f64::consts::SQRT_2 * z.re, std::f64::consts::SQRT_2 * z.im);
    let (x0, p0) = q(inputs[0]);
    let (x1, p1) = q(inputs[1]);
    let (u0, v0) = q(outs[0]);
    let (u1, v1) = q(outs[1]);
    let det = x0 * p1 - x1 * p0;
    let gain = GainMatrix {
        g11: (u0 * p1 - u1 * p0) / det,
        g12: (u1 * x0 - u0 * x1) / det,
        g21: (v0 * p1 - v1 * p0) / det,
        g22: (v1 * x0 - v0 * x1) / det,
    };
    if !gain.is_finite() {
        return Err(Error::SolverFailure("non-finite gain matrix".into()));
    }
    Ok((gain, residual))
}

/// Gain matrix from probe solves around an already solved unprobed state.
///
/// The probe solves reuse the baseline's truncation. The amplitude is halved
/// until a further halving moves every entry by less than [`LINEARITY_TOL`]
/// relative to the largest entry.
pub fn gain_from_baseline(
    baseline: &SolvedState,
    coeffs: &HamiltonianCoefficients,
    env: &EnvironmentParams,
    probe: &ProbeSpec,
    check_linearity: bool,
) -> Result<GainMeasurement> {
    let space = baseline.solver.space();
    let mean0 = lindblad::moments(baseline.rho()).mean;
    let mut probe = *probe;
    let (mut gain, mut residual) = gain_at(coeffs, env, space, &probe, mean0)?;
    if !check_linearity {
        return Ok(GainMeasurement { gain, probe: probe.amplitude, linearity: f64::NAN, halvings: 0, residual });
    }
    let mut change = f64::INFINITY;
    for halvings in 0..=MAX_HALVINGS {
        let half = probe.halved();
        let (g_half, r_half) = gain_at(coeffs, env, space, &half, mean0)?;
        change = gain.relative_change(&g_half);
        if change < LINEARITY_TOL {
            return Ok(GainMeasurement {
                gain,
                probe: probe.amplitude,
                linearity: change,
                halvings,
                residual: residual.max(r_half),
            });
        }
        warn!("probe {:e}: gain changed by {change:e} on halving; shrinking probe", probe.amplitude);
        probe = half;
        gain = g_half;
        residual = r_half;
    }
    Err(Error::Nonlinear { change, amplitude: probe.amplitude })
}

/// Full pipeline: baseline steady state, then probe solves.
pub fn measure_gain(
    coeffs: &HamiltonianCoefficients,
    env: &EnvironmentParams,
    probe: &ProbeSpec,
    settings: &SolverSettings,
) -> Result<GainMeasurement> {
    let baseline = lindblad::solve_model(coeffs, env, settings, None)?;
    gain_from_baseline(&baseline, coeffs, env, probe, true)
}

/// Phase-sensitive gain matrix with default solver settings.
pub fn probe_gain_matrix(
    coeffs: &HamiltonianCoefficients,
    env: &EnvironmentParams,
    probe: &ProbeSpec,
) -> Result<GainMatrix> {
    Ok(measure_gain(coeffs, env, probe, &SolverSettings::default())?.gain)
}

/// Which algebraic form of the closed-form DPA gain to evaluate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GainForm {
    /// `|iκ(ω+Δ+iκ̄/2) / ((ω+iκ̄/2)² − Δ² + |λ|²) − 1|²`.
    #[default]
    Corrected,
    /// The typeset form with denominator `Δ²(κ̄/2 − iω)² − |λ|²`. It does not
    /// diverge at the parametric threshold; kept for comparison only.
    Printed,
}

/// `|iκ(ω+Δ*+iκ̄/2) / ((ω−Δ+iκ̄/2)(ω+Δ*+iκ̄/2) + |λ|²) − 1|²` for complex Δ.
///
/// Returns +∞ when the denominator vanishes.
pub fn gain_from_effective(omega: f64, delta: Complex64, lambda_sq: f64, kappa: f64, kappa_bar: f64) -> f64 {
    let half = Complex64::new(0.0, 0.5 * kappa_bar);
    let upper = omega + delta.conj() + half;
    let denom = (omega - delta + half) * upper + lambda_sq;
    let scale = (omega.abs() + delta.norm() + kappa_bar).powi(2) + lambda_sq;
    if denom.norm() <= 1e-15 * scale {
        return f64::INFINITY;
    }
    (Complex64::new(0.0, kappa) * upper / denom - 1.0).norm_sqr()
}

/// Phase-preserving DPA gain. +∞ exactly at the parametric threshold.
pub fn dpa_gain_closed_form(omega: f64, delta: f64, lambda: Complex64, env: &EnvironmentParams) -> f64 {
    dpa_gain_with_form(omega, delta, lambda, env, GainForm::Corrected)
}

pub fn dpa_gain_with_form(
    omega: f64,
    delta: f64,
    lambda: Complex64,
    env: &EnvironmentParams,
    form: GainForm,
) -> f64 {
    let (kappa, kappa_bar) = (env.kappa, env.kappa_bar());
    match form {
        GainForm::Corrected => {
            gain_from_effective(omega, Complex64::new(delta, 0.0), lambda.norm_sqr(), kappa, kappa_bar)
        }
        GainForm::Printed => {
            let num = Complex64::new(kappa * kappa_bar / 2.0, -kappa * (delta + omega));
            let z = Complex64::new(kappa_bar / 2.0, -omega);
            let denom = delta * delta * z * z - lambda.norm_sqr();
            if denom.norm() == 0.0 {
                return f64::INFINITY;
            }
            (num / denom - 1.0).norm_sqr()
        }
    }
}

/// `λ_crit = √(Δ² + κ̄²/4)`.
pub fn parametric_threshold(delta: f64, env: &EnvironmentParams) -> f64 {
    (delta * delta + env.kappa_bar() * env.kappa_bar() / 4.0).sqrt()
}

/// Bisection on `[lo, hi]` for an increasing function; stops at `rel_tol · hi`.
fn bisect_increasing(f: impl Fn(f64) -> f64, target: f64, mut lo: f64, mut hi: f64, rel_tol: f64) -> f64 {
    let tol = rel_tol * hi.abs().max(f64::MIN_POSITIVE);
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if f(mid) < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Real drive `λ ∈ [0, λ_crit)` at which the resonant (Δ = ω = 0) DPA has gain `g`.
pub fn dpa_equivalent_drive(g: f64, env: &EnvironmentParams) -> Result<f64> {
    let lambda_crit = parametric_threshold(0.0, env);
    let gain = |l: f64| dpa_gain_closed_form(0.0, 0.0, Complex64::new(l, 0.0), env);
    let floor = gain(0.0);
    if !g.is_finite() || g < floor * (1.0 - 1e-12) {
        return Err(Error::OutOfRange(format!(
            "gain {g} outside the DPA branch [{floor}, inf)"
        )));
    }
    if g <= floor {
        return Ok(0.0);
    }
    Ok(bisect_increasing(gain, g, 0.0, lambda_crit, 1e-13))
}

/// `½⟨{Δa_in, Δa_in†}⟩` on the cavity vacuum, with `a_in` eliminated through
/// the steady-state Langevin equation `√κ a_in = (κ/2) a − i[H, a]`.
pub fn idler_noise(coeffs: &HamiltonianCoefficients, env: &EnvironmentParams) -> f64 {
    // Terms up to a†³ acting on |0⟩ stay well inside this space.
    let space = HilbertSpace::new(12).expect("valid dimension");
    let h = build_hamiltonian(coeffs, space);
    let a = fock::annihilation(space);
    let comm = h.commutator(&a).expect("same space");
    let a_in = a
        .scale(Complex64::new(0.5 * env.kappa, 0.0))
        .add(&comm.scale(Complex64::new(0.0, -1.0)))
        .expect("same space")
        .scale(Complex64::new(1.0 / env.kappa.sqrt(), 0.0));
    let vac = fock::vacuum_state(space);
    let mean = fock::expectation(&a_in, &vac).expect("same space");
    let ad_in = a_in.adjoint();
    let anti = a_in.mul(&ad_in).and_then(|x| x.add(&ad_in.mul(&a_in)?)).expect("same space");
    let sym = fock::expectation(&anti, &vac).expect("same space").re;
    0.5 * sym - mean.norm_sqr()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseFigures {
    /// Added noise in photons.
    pub added: f64,
    /// `η = 1 / (1 + 2A)`.
    pub efficiency: f64,
    pub lambda_dpa: f64,
    pub idler_noise: f64,
}

/// `A = ((G − 1)/G) ⟨|Δa_in|²⟩ / (κ/4 + λ_DPA²/κ)`.
pub fn added_noise_and_efficiency(
    g: f64,
    lambda_dpa: f64,
    idler_noise: f64,
    env: &EnvironmentParams,
) -> Result<NoiseFigures> {
    if !(g >= 1.0) || !g.is_finite() {
        return Err(Error::OutOfRange(format!("added noise needs finite G >= 1, got {g}")));
    }
    let norm = env.kappa / 4.0 + lambda_dpa * lambda_dpa / env.kappa;
    let added = (g - 1.0) / g * idler_noise / norm;
    Ok(NoiseFigures { added, efficiency: 1.0 / (1.0 + 2.0 * added), lambda_dpa, idler_noise })
}

/// Relative slack below the λ = 0 gain accepted from probe measurements.
pub const MEASURED_GAIN_TOL: f64 = 1e-6;

/// Added noise for a model whose phase-preserving gain has been measured.
///
/// A measured gain within [`MEASURED_GAIN_TOL`] below the undriven value is
/// snapped to it.
pub fn model_noise(
    g: f64,
    coeffs: &HamiltonianCoefficients,
    env: &EnvironmentParams,
) -> Result<NoiseFigures> {
    let floor = dpa_gain_closed_form(0.0, 0.0, Complex64::new(0.0, 0.0), env);
    let g = if g < floor && g >= floor * (1.0 - MEASURED_GAIN_TOL) { floor } else { g };
    let lambda_dpa = dpa_equivalent_drive(g, env)?;
    added_noise_and_efficiency(g, lambda_dpa, idler_noise(coeffs, env), env)
}

/// The Caves limit `η_max(G) = G / (2G − 1)`.
pub fn caves_efficiency(g: f64) -> f64 {
    g / (2.0 * g - 1.0)
}

/// Drive at which the lossy resonant DPA gain climbs back to unity.
pub fn lossy_zero_gain_threshold(env: &EnvironmentParams) -> Result<f64> {
    if env.gamma == 0.0 {
        return Ok(0.0);
    }
    let gain = |l: f64| dpa_gain_closed_form(0.0, 0.0, Complex64::new(l, 0.0), env);
    let hi = parametric_threshold(0.0, env);
    if gain(0.0) >= 1.0 {
        return Err(Error::OutOfRange("no deamplification at zero drive".into()));
    }
    Ok(bisect_increasing(gain, 1.0, 0.0, hi, 1e-14))
}
