//! Mean-field harmonic balance.
//!
//! The classical field is split into signal, idler and pump-half harmonics
//! (`α_s`, `α_i`, `α_h`). With the signal and idler neglected and no drive at
//! ω_p/2, the pump-half amplitude `α_h = x + iy` obeys
//!
//! ```text
//! 4Λx³ + (λ+Δ)x + (κ/2)y = 0
//! 4Λy³ + (λ−Δ)y + (κ/2)x = 0
//! ```
//!
//! The first equation is linear in `y`, so eliminating `y` (the resultant in
//! `y`) leaves `x · (4Λx²w³ + (λ−Δ)(κ/2)²w − (κ/2)⁴) = 0` with
//! `w = 4Λx² + λ + Δ`, a degree-9 polynomial in `x`.

use log::warn;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lindblad::EnvironmentParams;
use crate::model::HamiltonianCoefficients;
use crate::response::{dpa_gain_closed_form, gain_from_effective};

const I: Complex64 = Complex64::new(0.0, 1.0);

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct HarmonicState {
    pub alpha_s: Complex64,
    pub alpha_i: Complex64,
    pub alpha_h: Complex64,
}

impl HarmonicState {
    pub fn is_finite(&self) -> bool {
        [self.alpha_s, self.alpha_i, self.alpha_h].iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }
}

/// Classical input amplitudes at the three harmonics.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct HarmonicDrives {
    pub signal: Complex64,
    pub idler: Complex64,
    pub half_pump: Complex64,
}

/// Left minus right side of the three amplitude equations, in the order
/// (signal, idler, pump-half).
///
/// The equations carry the cubic coefficient Λ only; `kerr` and `quartic`
/// in `coeffs` are not part of them. The damping uses κ̄ and the drives
/// enter through √κ.
pub fn harmonic_balance_residual(
    state: &HarmonicState,
    omega: f64,
    coeffs: &HamiltonianCoefficients,
    env: &EnvironmentParams,
    drives: &HarmonicDrives,
) -> [Complex64; 3] {
    let HarmonicState { alpha_s: s, alpha_i: i, alpha_h: h } = *state;
    let (d, l, c) = (coeffs.delta, coeffs.lambda, coeffs.cubic);
    let half = I * (0.5 * env.kappa_bar());
    let root = I * env.kappa.sqrt();
    let (ns, ni, nh) = (s.norm_sqr(), i.norm_sqr(), h.norm_sqr());
    let hh = h * h + h.conj() * h.conj();
    let r_s = (omega - d + half) * s
        - root * drives.signal
        - l * i.conj()
        - 3.0 * c * ((ni + 2.0 * ns + 2.0 * nh) * i.conj() + (hh + i * s) * s);
    let r_i = (-omega - d + half) * i
        - root * drives.idler
        - l * s.conj()
        - 3.0 * c * ((ns + 2.0 * ni + 2.0 * nh) * s.conj() + (hh + i * s) * i);
    let pair = i * s + (i * s).conj();
    let r_h = (-d + half) * h
        - root * drives.half_pump
        - l * h.conj()
        - 3.0 * c * ((nh + 2.0 * ns + 2.0 * ni) * h.conj() + (2.0 * pair + h * h / 3.0) * h);
    [r_s, r_i, r_h]
}

/// Left minus right side of `(−Δ + iκ/2 − Λα²)α = (λ + 3Λ|α|²)α*`.
pub fn small_signal_pump_residual(alpha: Complex64, delta: f64, lambda: f64, cubic: f64, env: &EnvironmentParams) -> Complex64 {
    (-delta + I * (0.5 * env.kappa_bar()) - cubic * alpha * alpha) * alpha
        - (lambda + 3.0 * cubic * alpha.norm_sqr()) * alpha.conj()
}

/// Real solutions of the coupled cubics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FixedPointSet {
    pub points: Vec<(f64, f64)>,
    /// Distinct `|α_h|²`, ascending; always starts with 0.
    pub unique_populations: Vec<f64>,
    /// Candidates discarded because Newton polishing failed.
    pub dropped: usize,
}

impl FixedPointSet {
    pub fn count(&self) -> usize {
        self.unique_populations.len()
    }

    /// Smallest nonzero population, if any.
    pub fn nearest_nontrivial(&self) -> Option<f64> {
        self.unique_populations.iter().copied().find(|p| *p > 0.0)
    }
}

/// Below this `|Λ|/κ` the system is treated as linear.
pub const LINEAR_LIMIT: f64 = 1e-14;
/// Residual accepted for a polished root, in scaled units.
pub const ROOT_TOL: f64 = 1e-12;
/// Relative tolerance when merging populations.
pub const DEDUP_TOL: f64 = 1e-8;

/// The cubic system in scaled units `x = ξ s`, `y = η s`, `s = √(κ/|4Λ|)`,
/// with all rates divided by κ.
#[derive(Debug, Clone, Copy)]
struct Scaled {
    sigma: f64,
    a: f64,
    b: f64,
    c: f64,
}

impl Scaled {
    fn residual(&self, xi: f64, eta: f64) -> (f64, f64) {
        (
            self.sigma * xi.powi(3) + self.a * xi + self.c * eta,
            self.sigma * eta.powi(3) + self.b * eta + self.c * xi,
        )
    }

    fn jacobian(&self, xi: f64, eta: f64) -> [[f64; 2]; 2] {
        [
            [3.0 * self.sigma * xi * xi + self.a, self.c],
            [self.c, 3.0 * self.sigma * eta * eta + self.b],
        ]
    }

    /// Coefficients of the degree-9 polynomial, highest power first.
    fn polynomial(&self) -> [f64; 10] {
        let Scaled { sigma, a, b, c } = *self;
        let c2 = c * c;
        [
            1.0,
            0.0,
            3.0 * sigma * a,
            0.0,
            3.0 * a * a,
            0.0,
            sigma * (a * a * a + b * c2),
            0.0,
            a * b * c2 - c2 * c2,
            0.0,
        ]
    }

    /// Damped Newton iteration; returns the root and its residual.
    fn polish(&self, mut xi: f64, mut eta: f64) -> Option<(f64, f64)> {
        let norm = |r: (f64, f64)| r.0.abs().max(r.1.abs());
        let mut r = self.residual(xi, eta);
        for _ in 0..100 {
            if norm(r) < 0.1 * ROOT_TOL {
                break;
            }
            let j = self.jacobian(xi, eta);
            let det = j[0][0] * j[1][1] - j[0][1] * j[1][0];
            if det == 0.0 || !det.is_finite() {
                break;
            }
            let dx = (j[1][1] * r.0 - j[0][1] * r.1) / det;
            let dy = (j[0][0] * r.1 - j[1][0] * r.0) / det;
            let mut t = 1.0;
            loop {
                let (nx, ny) = (xi - t * dx, eta - t * dy);
                let nr = self.residual(nx, ny);
                if norm(nr) < norm(r) || t < 1e-4 {
                    xi = nx;
                    eta = ny;
                    r = nr;
                    break;
                }
                t *= 0.5;
            }
        }
        (norm(r) < ROOT_TOL && xi.is_finite() && eta.is_finite()).then_some((xi, eta))
    }
}

fn scaled_system(delta: f64, lambda: f64, cubic: f64, env: &EnvironmentParams) -> (Scaled, f64) {
    let k = env.kappa;
    let sys = Scaled {
        sigma: cubic.signum(),
        a: (lambda + delta) / k,
        b: (lambda - delta) / k,
        c: 0.5 * env.kappa_bar() / k,
    };
    (sys, k / (4.0 * cubic.abs()))
}

/// Real roots of a real polynomial (highest power first) from the
/// eigenvalues of its companion matrix.
///
/// `None` when the QR iteration does not converge.
pub fn real_polynomial_roots(coeffs: &[f64], imag_tol: f64) -> Option<Vec<f64>> {
    let first = coeffs.iter().position(|c| *c != 0.0);
    let Some(first) = first else { return Some(Vec::new()) };
    let c = &coeffs[first..];
    let n = c.len() - 1;
    if n == 0 {
        return Some(Vec::new());
    }
    let m = faer::Mat::<f64>::from_fn(n, n, |i, k| {
        if i == 0 {
            -c[k + 1] / c[0]
        } else if k + 1 == i {
            1.0
        } else {
            0.0
        }
    });
    let eig = m.eigenvalues().ok()?;
    Some(eig
        .iter()
        .filter(|z| z.im.abs() <= imag_tol * z.norm().max(1.0))
        .map(|z| z.re)
        .collect())
}

/// All real pump-half fixed points for real drive `lambda` and cubic
/// coefficient `cubic`.
pub fn pump_fixed_points(delta: f64, lambda: f64, cubic: f64, env: &EnvironmentParams) -> FixedPointSet {
    let mut points = vec![(0.0, 0.0)];
    if cubic.abs() < LINEAR_LIMIT * env.kappa {
        return FixedPointSet { points, unique_populations: vec![0.0], dropped: 0 };
    }
    let (sys, scale2) = scaled_system(delta, lambda, cubic, env);
    let mut dropped = 0;
    let mut scaled: Vec<(f64, f64)> = vec![(0.0, 0.0)];
    let roots = real_polynomial_roots(&sys.polynomial(), 1e-5).expect("companion QR converges");
    for xi in roots {
        let w = sys.sigma * xi * xi + sys.a;
        let eta = -xi * w / sys.c;
        match sys.polish(xi, eta) {
            Some(p) => {
                for q in [p, (-p.0, -p.1)] {
                    let close = |o: &(f64, f64)| {
                        (o.0 - q.0).abs().max((o.1 - q.1).abs()) < 1e-8 * q.0.abs().max(q.1.abs()).max(1.0)
                    };
                    if !scaled.iter().any(close) {
                        scaled.push(q);
                    }
                }
            }
            None => {
                dropped += 1;
                warn!("fixed-point candidate xi = {xi} did not polish (delta {delta}, lambda {lambda})");
            }
        }
    }
    let s = scale2.sqrt();
    points = scaled.iter().map(|&(x, y)| (x * s, y * s)).collect();
    points.sort_by(|p, q| p.0.total_cmp(&q.0).then(p.1.total_cmp(&q.1)));
    let mut pops: Vec<f64> = scaled.iter().map(|&(x, y)| (x * x + y * y) * scale2).collect();
    pops.sort_by(f64::total_cmp);
    let mut unique_populations: Vec<f64> = Vec::new();
    for p in pops {
        match unique_populations.last() {
            Some(&last) if (p - last).abs() <= DEDUP_TOL * p.abs().max(1.0) => {}
            _ => unique_populations.push(if p.abs() < 1e-300 { 0.0 } else { p }),
        }
    }
    if unique_populations.first().copied() != Some(0.0) {
        unique_populations.insert(0, 0.0);
    }
    FixedPointSet { points, unique_populations, dropped }
}

/// Linear stability of a fixed point under `α̇ = −i ∂H/∂α* − (κ̄/2)α`.
///
/// Experimental: the population count above is what the stability diagram
/// reports.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Stability {
    Stable,
    Unstable,
    Marginal,
}

pub fn classify_fixed_point(point: (f64, f64), delta: f64, lambda: f64, cubic: f64, env: &EnvironmentParams) -> Stability {
    let a = Complex64::new(point.0, point.1);
    // dα̇ = P dα + Q dα*; the trace of the real Jacobian is −κ̄, so the
    // sign of the determinant |P|² − |Q|² decides.
    let p = -I * (Complex64::new(delta, -0.5 * env.kappa_bar()) + 3.0 * cubic * (a * a + a.conj() * a.conj()));
    let q = -I * (lambda + 6.0 * cubic * a.norm_sqr());
    let det = p.norm_sqr() - q.norm_sqr();
    let scale = p.norm_sqr().max(q.norm_sqr()).max(1e-300);
    if det.abs() <= 1e-12 * scale {
        Stability::Marginal
    } else if det > 0.0 {
        Stability::Stable
    } else {
        Stability::Unstable
    }
}

/// Unique-population counts over a (Δ, λ) grid; `counts[iΔ · nλ + iλ]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StabilityMap {
    pub deltas: Vec<f64>,
    pub lambdas: Vec<f64>,
    pub cubic: f64,
    pub counts: Vec<u8>,
    pub warnings: Vec<String>,
}

impl StabilityMap {
    pub fn count(&self, i_delta: usize, i_lambda: usize) -> u8 {
        self.counts[i_delta * self.lambdas.len() + i_lambda]
    }

    /// First λ along row `i_delta` where the count steps from `from` to `to`.
    pub fn transition(&self, i_delta: usize, from: u8, to: u8) -> Option<f64> {
        (1..self.lambdas.len())
            .find(|&k| self.count(i_delta, k - 1) == from && self.count(i_delta, k) == to)
            .map(|k| self.lambdas[k])
    }
}

pub fn axis(range: (f64, f64), n: usize) -> Vec<f64> {
    if n <= 1 {
        return vec![range.0];
    }
    (0..n).map(|k| range.0 + (range.1 - range.0) * k as f64 / (n - 1) as f64).collect()
}

/// Counts of distinct `|α_h|²` on a `resolution.0 × resolution.1` grid.
pub fn stability_diagram(
    delta_range: (f64, f64),
    lambda_range: (f64, f64),
    cubic: f64,
    env: &EnvironmentParams,
    resolution: (usize, usize),
) -> Result<StabilityMap> {
    if resolution.0 == 0 || resolution.1 == 0 {
        return Err(Error::InvalidParameter("resolution must be positive".into()));
    }
    let deltas = axis(delta_range, resolution.0);
    let lambdas = axis(lambda_range, resolution.1);
    let cells: Vec<(u8, usize)> = deltas
        .par_iter()
        .flat_map_iter(|&d| {
            lambdas.iter().map(move |&l| {
                let fp = pump_fixed_points(d, l, cubic, env);
                (fp.count() as u8, fp.dropped)
            })
        })
        .collect();
    let mut warnings = Vec::new();
    for (k, (_, dropped)) in cells.iter().enumerate() {
        if *dropped > 0 {
            let (id, il) = (k / lambdas.len(), k % lambdas.len());
            warnings.push(format!(
                "delta {} lambda {}: {dropped} candidate(s) dropped",
                deltas[id], lambdas[il]
            ));
        }
    }
    Ok(StabilityMap { deltas, lambdas, cubic, counts: cells.into_iter().map(|c| c.0).collect(), warnings })
}

/// Λ- and K-dressed detuning and drive.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EffectiveParams {
    pub delta_eff: Complex64,
    pub lambda_eff: Complex64,
}

impl EffectiveParams {
    /// `Δ_eff = Δ + 6K n_s + 3Λ α_i α_s`, `λ_eff = λ + 9Λ n_s`.
    pub fn new(coeffs: &HamiltonianCoefficients, n_s: f64, idler_signal: Complex64) -> Self {
        Self {
            delta_eff: coeffs.delta + 6.0 * coeffs.kerr * n_s + 3.0 * coeffs.cubic * idler_signal,
            lambda_eff: coeffs.lambda + 9.0 * coeffs.cubic * n_s,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AnalyticGain {
    pub gain: f64,
    pub effective: EffectiveParams,
    pub n_s: f64,
    pub iterations: usize,
}

pub const SELF_CONSISTENCY_TOL: f64 = 1e-10;
pub const SELF_CONSISTENCY_MAX_ITER: usize = 1000;

/// Population ratio below which the nontrivial pump-half solutions count as
/// too close to the operating point.
pub const SEPARATION_FACTOR: f64 = 10.0;

/// Linear-response signal gain of the three-harmonic model around `α_h = 0`.
///
/// `signal_power` is the input photon flux `|α_in,s|²` (rate units). With
/// zero power the effective parameters equal the bare ones and the result is
/// the DPA closed form; otherwise `n_s` and `α_i α_s` are iterated to self
/// consistency under `n_s ≈ n_i`.
pub fn analytic_gain(
    omega: f64,
    coeffs: &HamiltonianCoefficients,
    env: &EnvironmentParams,
    signal_power: f64,
) -> Result<AnalyticGain> {
    if !(signal_power >= 0.0 && signal_power.is_finite()) {
        return Err(Error::InvalidParameter(format!("signal power must be >= 0, got {signal_power}")));
    }
    let (kappa, kappa_bar) = (env.kappa, env.kappa_bar());
    let evaluate = |eff: &EffectiveParams| {
        gain_from_effective(omega, eff.delta_eff, eff.lambda_eff.norm_sqr(), kappa, kappa_bar)
    };
    let mut eff = EffectiveParams::new(coeffs, 0.0, Complex64::new(0.0, 0.0));
    if signal_power == 0.0 {
        return Ok(AnalyticGain { gain: evaluate(&eff), effective: eff, n_s: 0.0, iterations: 0 });
    }
    let fixed = pump_fixed_points(coeffs.delta, coeffs.lambda.norm(), coeffs.cubic, env);
    let amp = Complex64::new(signal_power.sqrt(), 0.0);
    let half = I * (0.5 * kappa_bar);
    let root = I * kappa.sqrt();
    let (mut n_s, mut pair) = (0.0f64, Complex64::new(0.0, 0.0));
    for it in 1..=SELF_CONSISTENCY_MAX_ITER {
        let a = omega - eff.delta_eff + half;
        let b = -omega - eff.delta_eff.conj() - half;
        let l2 = eff.lambda_eff.norm_sqr();
        let d1 = a - l2 / b;
        let d2 = b - l2 / a;
        let alpha_s = root * amp / d1;
        let idler_conj = root * eff.lambda_eff.conj() / (a * d2) * amp;
        let new_n = alpha_s.norm_sqr();
        let new_pair = idler_conj.conj() * alpha_s;
        if !(new_n.is_finite() && new_pair.re.is_finite() && new_pair.im.is_finite()) {
            return Err(Error::NotConverged { iterations: it, residual: f64::INFINITY });
        }
        let change = (new_n - n_s).abs().max((new_pair - pair).norm());
        let size = new_n.max(new_pair.norm()).max(1e-300);
        n_s = new_n;
        pair = new_pair;
        eff = EffectiveParams::new(coeffs, n_s, pair);
        if change <= SELF_CONSISTENCY_TOL * size {
            if let Some(p) = fixed.nearest_nontrivial() {
                if p < SEPARATION_FACTOR * n_s.max(1.0) {
                    return Err(Error::OutOfRange(format!(
                        "nontrivial pump-half population {p} is not separated from n_s = {n_s}"
                    )));
                }
            }
            return Ok(AnalyticGain { gain: evaluate(&eff), effective: eff, n_s, iterations: it });
        }
        if it == SELF_CONSISTENCY_MAX_ITER {
            return Err(Error::NotConverged { iterations: it, residual: change / size });
        }
    }
    unreachable!("loop returns on its last iteration")
}

/// The analytic gain of the Kerr-free circuit (K = 0).
pub fn sts_gain_analytic(
    omega: f64,
    delta: f64,
    lambda: f64,
    cubic: f64,
    env: &EnvironmentParams,
    signal_power: f64,
) -> Result<AnalyticGain> {
    let coeffs = HamiltonianCoefficients::dpa(delta, lambda).with_cubic(cubic);
    analytic_gain(omega, &coeffs, env, signal_power)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GainBandwidthPoint {
    pub omega: f64,
    pub gain: f64,
    /// DPA gain at the converged effective parameters.
    pub dpa_matched: f64,
    /// DPA gain at the bare parameters.
    pub dpa_bare: f64,
}

pub fn gain_bandwidth_trace(
    omegas: &[f64],
    coeffs: &HamiltonianCoefficients,
    env: &EnvironmentParams,
    signal_power: f64,
) -> Result<Vec<GainBandwidthPoint>> {
    omegas
        .iter()
        .map(|&omega| {
            let g = analytic_gain(omega, coeffs, env, signal_power)?;
            let matched = gain_from_effective(
                omega,
                Complex64::new(g.effective.delta_eff.re, 0.0),
                g.effective.lambda_eff.norm_sqr(),
                env.kappa,
                env.kappa_bar(),
            );
            Ok(GainBandwidthPoint {
                omega,
                gain: g.gain,
                dpa_matched: matched,
                dpa_bare: dpa_gain_closed_form(omega, coeffs.delta, coeffs.lambda, env),
            })
        })
        .collect()
}
