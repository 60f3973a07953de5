//! Dissipative dynamics: Liouvillian assembly, steady states, moments, the
//! DPA-deviation parameter Ξ, Wigner functions and zero-frequency output
//! squeezing.
//!
//! Density matrices are vectorised row-major, `vec(ρ)[n·dim + m] = ρ_nm`.
//! The master equation is
//!
//! ```text
//! dρ/dt = −i[H, ρ] + κ̄ (a ρ a† − ½{a†a, ρ}),   κ̄ = κ + γ
//! ```
//!
//! The signal port κ and the loss port γ act identically on the cavity
//! state; they differ only in the input–output bookkeeping of
//! [`crate::response`] and [`OutputCorrelations`].

use std::f64::consts::PI;

use faer::linalg::solvers::Solve;
use faer::sparse::{SparseColMat, Triplet};
use faer::Mat;
use log::warn;
use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fock::{self, DensityOperator, HilbertSpace, Operator};
use crate::model::{build_hamiltonian, HamiltonianCoefficients};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const I: Complex64 = Complex64::new(0.0, 1.0);

/// Signal-port coupling κ and undesired loss γ.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnvironmentParams {
    pub kappa: f64,
    #[serde(default)]
    pub gamma: f64,
}

impl EnvironmentParams {
    pub fn new(kappa: f64, gamma: f64) -> Result<Self> {
        if !(kappa.is_finite() && kappa > 0.0) {
            return Err(Error::InvalidParameter(format!("kappa must be positive, got {kappa}")));
        }
        if !(gamma.is_finite() && gamma >= 0.0) {
            return Err(Error::InvalidParameter(format!("gamma must be non-negative, got {gamma}")));
        }
        Ok(Self { kappa, gamma })
    }

    /// κ = 1, γ = 0.
    pub fn lossless() -> Self {
        Self { kappa: 1.0, gamma: 0.0 }
    }

    pub fn kappa_bar(&self) -> f64 {
        self.kappa + self.gamma
    }
}

/// Sparse generator `L` with `vec(dρ/dt) = L vec(ρ)`.
#[derive(Debug, Clone)]
pub struct Liouvillian {
    space: HilbertSpace,
    /// Merged entries sorted by (row, col).
    entries: Vec<(usize, usize, Complex64)>,
}

impl Liouvillian {
    pub fn space(&self) -> HilbertSpace {
        self.space
    }

    pub fn size(&self) -> usize {
        self.space.dim() * self.space.dim()
    }

    pub fn nnz(&self) -> usize {
        self.entries.len()
    }

    pub fn entries(&self) -> &[(usize, usize, Complex64)] {
        &self.entries
    }

    pub fn apply(&self, v: &[Complex64]) -> Vec<Complex64> {
        let mut out = vec![ZERO; self.size()];
        for &(r, c, val) in &self.entries {
            out[r] += val * v[c];
        }
        out
    }

    pub fn apply_to(&self, rho: &DMatrix<Complex64>) -> DMatrix<Complex64> {
        let dim = self.space.dim();
        let out = self.apply(&vectorize(rho));
        DMatrix::from_row_slice(dim, dim, &out)
    }

    /// Maximum absolute row sum.
    pub fn norm_inf(&self) -> f64 {
        let mut rows = vec![0.0; self.size()];
        for &(r, _, val) in &self.entries {
            rows[r] += val.norm();
        }
        rows.into_iter().fold(0.0, f64::max)
    }

    /// Dense copy; for small spaces and tests only.
    pub fn to_dense(&self) -> DMatrix<Complex64> {
        let n = self.size();
        let mut m = DMatrix::zeros(n, n);
        for &(r, c, val) in &self.entries {
            m[(r, c)] += val;
        }
        m
    }
}

pub fn vectorize(rho: &DMatrix<Complex64>) -> Vec<Complex64> {
    let dim = rho.nrows();
    let mut v = Vec::with_capacity(dim * dim);
    for n in 0..dim {
        for m in 0..dim {
            v.push(rho[(n, m)]);
        }
    }
    v
}

/// Liouvillian for Hamiltonian `h` with a single decay channel at rate κ̄.
pub fn liouvillian(h: &Operator, env: &EnvironmentParams) -> Result<Liouvillian> {
    liouvillian_with_rate(h, env.kappa_bar())
}

/// As [`liouvillian`] with an explicit total decay rate, which may be zero.
pub fn liouvillian_with_rate(h: &Operator, rate: f64) -> Result<Liouvillian> {
    let scale = h.max_abs().max(1.0);
    let defect = h.hermiticity_defect();
    if defect > 1e-12 * scale {
        return Err(Error::NonHermitian(defect));
    }
    let space = h.space();
    let dim = space.dim();
    let hm = h.matrix();
    let nonzero: Vec<(usize, usize, Complex64)> = (0..dim)
        .flat_map(|i| (0..dim).map(move |k| (i, k)))
        .filter_map(|(i, k)| {
            let v = hm[(i, k)];
            (v != ZERO).then_some((i, k, v))
        })
        .collect();

    let mut raw = Vec::with_capacity(2 * nonzero.len() * dim + 2 * dim * dim);
    for &(i, k, v) in &nonzero {
        for m in 0..dim {
            // −i H ρ: row (i, m) reads ρ_km
            raw.push((space.vec_index(i, m), space.vec_index(k, m), -I * v));
            // +i ρ H: row (m, k) reads ρ_mi
            raw.push((space.vec_index(m, k), space.vec_index(m, i), I * v));
        }
    }
    if rate != 0.0 {
        for n in 0..dim {
            for m in 0..dim {
                let row = space.vec_index(n, m);
                raw.push((row, row, Complex64::new(-0.5 * rate * (n + m) as f64, 0.0)));
                if n + 1 < dim && m + 1 < dim {
                    let jump = rate * (((n + 1) * (m + 1)) as f64).sqrt();
                    raw.push((row, space.vec_index(n + 1, m + 1), Complex64::new(jump, 0.0)));
                }
            }
        }
    }
    Ok(Liouvillian { space, entries: merge_triplets(raw) })
}

fn merge_triplets(mut raw: Vec<(usize, usize, Complex64)>) -> Vec<(usize, usize, Complex64)> {
    raw.sort_by(|a, b| (a.0, a.1).cmp(&(b.0, b.1)));
    let mut out: Vec<(usize, usize, Complex64)> = Vec::with_capacity(raw.len());
    for (r, c, v) in raw {
        match out.last_mut() {
            Some(last) if last.0 == r && last.1 == c => last.2 += v,
            _ => out.push((r, c, v)),
        }
    }
    out.retain(|e| e.2 != ZERO);
    out
}

/// LU factorisation of the Liouvillian with the `ρ_00` equation replaced by
/// the trace constraint.
///
/// The same factorisation solves the steady state (`B x = e_trace`) and
/// resolvent problems on the traceless subspace.
pub struct SteadyStateSolver {
    liouvillian: Liouvillian,
    lu: faer::sparse::linalg::solvers::Lu<usize, Complex64>,
    trace_row: usize,
}

impl std::fmt::Debug for SteadyStateSolver {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("SteadyStateSolver")
            .field("dim", &self.liouvillian.space.dim())
            .field("nnz", &self.liouvillian.nnz())
            .finish()
    }
}

impl SteadyStateSolver {
    pub fn new(liouvillian: Liouvillian) -> Result<Self> {
        let space = liouvillian.space;
        let n = liouvillian.size();
        let trace_row = space.vec_index(0, 0);
        let mut triplets: Vec<Triplet<usize, usize, Complex64>> = liouvillian
            .entries
            .iter()
            .filter(|e| e.0 != trace_row)
            .map(|&(r, c, v)| Triplet::new(r, c, v))
            .collect();
        for k in 0..space.dim() {
            triplets.push(Triplet::new(trace_row, space.vec_index(k, k), Complex64::new(1.0, 0.0)));
        }
        let matrix = SparseColMat::<usize, Complex64>::try_new_from_triplets(n, n, &triplets)
            .map_err(|e| Error::SolverFailure(format!("sparse assembly: {e:?}")))?;
        let lu = matrix
            .sp_lu()
            .map_err(|e| Error::SingularSystem(format!("bordered Liouvillian: {e:?}")))?;
        Ok(Self { liouvillian, lu, trace_row })
    }

    pub fn liouvillian(&self) -> &Liouvillian {
        &self.liouvillian
    }

    pub fn space(&self) -> HilbertSpace {
        self.liouvillian.space
    }

    fn solve_bordered(&self, rhs: Vec<Complex64>) -> Vec<Complex64> {
        let n = rhs.len();
        let b = Mat::<Complex64>::from_fn(n, 1, |i, _| rhs[i]);
        let x = self.lu.solve(&b);
        (0..n).map(|i| x[(i, 0)]).collect()
    }

    /// Unique stationary state; falls back to inverse iteration when the
    /// bordered solve fails its residual check.
    pub fn steady_state(&self) -> Result<SteadyState> {
        let mut rhs = vec![ZERO; self.liouvillian.size()];
        rhs[self.trace_row] = Complex64::new(1.0, 0.0);
        let x = self.solve_bordered(rhs);
        match self.finish(x) {
            Ok(ss) => Ok(ss),
            Err(err) => {
                warn!("bordered steady-state solve rejected ({err}); trying inverse iteration");
                self.steady_state_by_inverse_iteration()
            }
        }
    }

    fn finish(&self, x: Vec<Complex64>) -> Result<SteadyState> {
        if x.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::SingularSystem("non-finite solution".into()));
        }
        let dim = self.space().dim();
        let mut m = DMatrix::from_row_slice(dim, dim, &x);
        let tr = m.trace();
        if tr.norm() < 1e-300 {
            return Err(Error::SingularSystem("zero-trace solution".into()));
        }
        m /= tr;
        // Symmetrise away round-off; the defect is reported before doing so.
        let herm_defect = fock::max_hermitian_defect(&m);
        let m = (&m + m.adjoint()) * Complex64::new(0.5, 0.0);
        let residual = residual_of(&self.liouvillian, &m);
        let norm = self.liouvillian.norm_inf();
        if !(residual <= 1e-10 * norm) {
            return Err(Error::SingularSystem(format!(
                "residual {residual:e} exceeds 1e-10 x |L| = {:e}",
                1e-10 * norm
            )));
        }
        let rho = DensityOperator::new_unchecked(self.space(), m);
        Ok(SteadyState { rho, residual, relative_residual: residual / norm, hermiticity_defect: herm_defect })
    }

    fn steady_state_by_inverse_iteration(&self) -> Result<SteadyState> {
        let space = self.space();
        let dim = space.dim();
        let l = &self.liouvillian;
        let shift = 1e-9 * l.norm_inf().max(1e-300);
        let mut shifted: Vec<Triplet<usize, usize, Complex64>> =
            l.entries.iter().map(|&(r, c, v)| Triplet::new(r, c, v)).collect();
        for k in 0..l.size() {
            shifted.push(Triplet::new(k, k, Complex64::new(-shift, 0.0)));
        }
        let n = l.size();
        let matrix = SparseColMat::<usize, Complex64>::try_new_from_triplets(n, n, &shifted)
            .map_err(|e| Error::SolverFailure(format!("sparse assembly: {e:?}")))?;
        let lu = matrix
            .sp_lu()
            .map_err(|e| Error::SingularSystem(format!("shifted Liouvillian: {e:?}")))?;

        let iterate = |start: DMatrix<Complex64>| -> DMatrix<Complex64> {
            let mut v = vectorize(&start);
            for _ in 0..8 {
                let b = Mat::<Complex64>::from_fn(n, 1, |i, _| v[i]);
                let x = lu.solve(&b);
                let norm = (0..n).map(|i| x[(i, 0)].norm_sqr()).sum::<f64>().sqrt();
                v = (0..n).map(|i| x[(i, 0)] / norm).collect();
            }
            let mut m = DMatrix::from_row_slice(dim, dim, &v);
            let tr = m.trace();
            m /= tr;
            m
        };
        let from_vacuum = iterate(fock::vacuum_state(space).matrix().clone());
        let mixed = DMatrix::<Complex64>::identity(dim, dim) / Complex64::new(dim as f64, 0.0);
        let from_mixed = iterate(mixed);
        let spread = (&from_vacuum - &from_mixed).iter().map(|z| z.norm()).fold(0.0, f64::max);
        if !(spread < 1e-6) {
            return Err(Error::SingularSystem(format!(
                "stationary states from different initial states differ by {spread:e}; the null space is multidimensional"
            )));
        }
        self.finish(vectorize(&from_vacuum))
    }

    /// Solves `L x = rhs` for traceless `rhs`, returning the traceless `x`.
    pub fn solve_traceless(&self, rhs: &DMatrix<Complex64>) -> Result<DMatrix<Complex64>> {
        let tr = rhs.trace();
        let scale = rhs.iter().map(|z| z.norm()).fold(0.0, f64::max).max(1e-300);
        if tr.norm() > 1e-9 * scale {
            return Err(Error::InvalidParameter(format!("right-hand side has trace {tr}")));
        }
        let mut b = vectorize(rhs);
        b[self.trace_row] = ZERO;
        let x = self.solve_bordered(b);
        let dim = self.space().dim();
        let xm = DMatrix::from_row_slice(dim, dim, &x);
        if xm.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::SolverFailure("non-finite resolvent solution".into()));
        }
        let check = self.liouvillian.apply_to(&xm) - rhs;
        let res = check.iter().map(|z| z.norm()).fold(0.0, f64::max);
        let xnorm = xm.iter().map(|z| z.norm()).fold(0.0, f64::max);
        if res > 1e-8 * (scale + self.liouvillian.norm_inf() * xnorm) {
            return Err(Error::SolverFailure(format!("resolvent residual {res:e}")));
        }
        Ok(xm)
    }
}

fn residual_of(l: &Liouvillian, rho: &DMatrix<Complex64>) -> f64 {
    l.apply(&vectorize(rho)).iter().map(|z| z.norm()).fold(0.0, f64::max)
}

#[derive(Debug, Clone)]
pub struct SteadyState {
    pub rho: DensityOperator,
    /// `‖L vec(ρ)‖_∞`.
    pub residual: f64,
    /// `residual / ‖L‖_∞`.
    pub relative_residual: f64,
    pub hermiticity_defect: f64,
}

/// Convenience wrapper: factorise and solve.
pub fn steady_state(l: &Liouvillian) -> Result<DensityOperator> {
    Ok(SteadyStateSolver::new(l.clone())?.steady_state()?.rho)
}

/// Truncation and convergence settings for a steady-state solve.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverSettings {
    /// Starting Fock dimension.
    pub dim: usize,
    /// Grow the dimension until the tail criterion holds.
    pub adaptive: bool,
    pub max_dim: usize,
    /// Levels counted as the tail (`n ≥ dim − tail_levels`).
    pub tail_levels: usize,
    pub tail_tolerance: f64,
}

impl Default for SolverSettings {
    fn default() -> Self {
        Self { dim: 80, adaptive: true, max_dim: 320, tail_levels: 5, tail_tolerance: 1e-8 }
    }
}

impl SolverSettings {
    pub fn fixed(dim: usize) -> Self {
        Self { dim, adaptive: false, ..Self::default() }
    }
}

/// Drive above which the near-threshold guard raises the minimum dimension.
pub const NEAR_THRESHOLD_DRIVE: f64 = 0.48;
pub const NEAR_THRESHOLD_MIN_DIM: usize = 120;

/// A converged solve together with the factorisation that produced it.
#[derive(Debug)]
pub struct SolvedState {
    pub solver: SteadyStateSolver,
    pub state: SteadyState,
    pub dim: usize,
    pub tail: f64,
    pub converged: bool,
}

impl SolvedState {
    pub fn rho(&self) -> &DensityOperator {
        &self.state.rho
    }
}

/// Builds H, the Liouvillian and the steady state, growing the truncation
/// until the tail population criterion holds.
///
/// `extra` is added to the Hamiltonian (the probe drive in
/// [`crate::response`]); `coeffs` are in the same units as `env`.
pub fn solve_model(
    coeffs: &HamiltonianCoefficients,
    env: &EnvironmentParams,
    settings: &SolverSettings,
    extra: Option<&dyn Fn(HilbertSpace) -> Operator>,
) -> Result<SolvedState> {
    let mut dim = settings.dim;
    if coeffs.lambda.norm() > NEAR_THRESHOLD_DRIVE * env.kappa && dim < NEAR_THRESHOLD_MIN_DIM {
        warn!(
            "drive {:.4} kappa is near threshold; raising dim {dim} -> {NEAR_THRESHOLD_MIN_DIM}, truncation dominates the error",
            coeffs.lambda.norm() / env.kappa
        );
        dim = NEAR_THRESHOLD_MIN_DIM;
    }
    loop {
        let space = HilbertSpace::new(dim)?;
        let mut h = build_hamiltonian(coeffs, space);
        if let Some(f) = extra {
            h = h.add(&f(space))?;
        }
        let solver = SteadyStateSolver::new(liouvillian(&h, env)?)?;
        let state = solver.steady_state()?;
        let tail = state.rho.tail_population(settings.tail_levels);
        let converged = tail < settings.tail_tolerance;
        if converged || !settings.adaptive || dim >= settings.max_dim {
            if !converged && settings.adaptive {
                warn!("tail population {tail:e} at dim {dim} (max_dim reached)");
            }
            return Ok(SolvedState { solver, state, dim, tail, converged });
        }
        dim = (dim + dim / 4).max(dim + 8).min(settings.max_dim);
    }
}

/// First and second moments of the cavity field.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GaussianMoments {
    /// ⟨a⟩
    pub mean: Complex64,
    /// N = ⟨a†a⟩ − |⟨a⟩|²
    pub n: f64,
    /// M = ⟨a²⟩ − ⟨a⟩²
    pub m: Complex64,
}

impl GaussianMoments {
    /// `|M|² ≤ N(N+1)` and `N ≥ 0`, up to the stated tolerances.
    pub fn is_physical(&self) -> bool {
        self.n >= -1e-8 && self.m.norm_sqr() <= self.n * (self.n + 1.0) + 1e-6
    }
}

pub fn moments(rho: &DensityOperator) -> GaussianMoments {
    let r = rho.matrix();
    let dim = rho.dim();
    let mut mean = ZERO;
    let mut num = 0.0;
    let mut a2 = ZERO;
    for n in 1..dim {
        // Tr(a ρ) = Σ √n ρ_{n, n−1}
        mean += (n as f64).sqrt() * r[(n, n - 1)];
        num += n as f64 * r[(n, n)].re;
    }
    for n in 2..dim {
        a2 += ((n * (n - 1)) as f64).sqrt() * r[(n, n - 2)];
    }
    GaussianMoments { mean, n: num - mean.norm_sqr(), m: a2 - mean * mean }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Deviation {
    pub xi: f64,
    /// N below 1e-12; Ξ set to its λ → 0 limit of 0.
    pub vacuum_limit: bool,
    /// The raw value left [0, 1] by more than 1e-6 before clamping.
    pub clamped: bool,
    pub raw: f64,
}

/// Ξ = 1 − |M| / √(N(N + 1/2)).
pub fn deviation_xi(mom: &GaussianMoments) -> Deviation {
    if mom.n < 1e-12 {
        return Deviation { xi: 0.0, vacuum_limit: true, clamped: false, raw: 0.0 };
    }
    let raw = 1.0 - mom.m.norm() / (mom.n * (mom.n + 0.5)).sqrt();
    let xi = raw.clamp(0.0, 1.0);
    let clamped = raw < -1e-6 || raw > 1.0 + 1e-6;
    if clamped {
        warn!("deviation parameter {raw} left [0, 1]; clamped");
    }
    Deviation { xi, vacuum_limit: false, clamped, raw }
}

/// Zero-frequency output-field correlations of a steady state.
///
/// Holds `I_aa = ∫₀^∞ ⟨Δa(t)Δa(0)⟩ dt` and `I_ad_a = ∫₀^∞ ⟨Δa†(t)Δa(0)⟩ dt`,
/// obtained from one resolvent solve of the quantum regression theorem.
/// With `X_θ = (a e^{−iθ} + a† e^{iθ})/√2` and `a_out = √κ a − a_in`,
/// the output variance is `1/2 + 2κ Re[e^{−2iθ} I_aa + I_ad_a]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OutputCorrelations {
    pub kappa: f64,
    pub i_aa: Complex64,
    pub i_ad_a: Complex64,
}

impl OutputCorrelations {
    pub fn compute(
        solver: &SteadyStateSolver,
        rho: &DensityOperator,
        env: &EnvironmentParams,
    ) -> Result<Self> {
        let space = solver.space();
        if rho.space() != space {
            return Err(Error::DimensionMismatch { expected: space.dim(), got: rho.dim() });
        }
        let dim = space.dim();
        let a = fock::annihilation(space);
        let mean = moments(rho).mean;
        // σ = (a − ⟨a⟩) ρ is traceless; ∫₀^∞ e^{Lt} σ dt = −L⁻¹ σ.
        let sigma = a.matrix() * rho.matrix() - rho.matrix() * mean;
        let x = solver.solve_traceless(&(-sigma))?;
        let mut i_aa = ZERO;
        let mut i_ad_a = ZERO;
        for n in 1..dim {
            let s = (n as f64).sqrt();
            i_aa += s * x[(n, n - 1)];
            i_ad_a += s * x[(n - 1, n)];
        }
        Ok(Self { kappa: env.kappa, i_aa, i_ad_a })
    }

    pub fn variance(&self, theta: f64) -> f64 {
        let phase = Complex64::from_polar(1.0, -2.0 * theta);
        0.5 + 2.0 * self.kappa * (phase * self.i_aa + self.i_ad_a).re
    }

    /// Minimum over θ ∈ [0, π) by golden-section search to 1e-4 rad.
    pub fn minimum(&self) -> (f64, f64) {
        // Coarse scan to bracket, then golden section on the bracket.
        let samples = 24;
        let step = PI / samples as f64;
        let best = (0..samples)
            .map(|k| k as f64 * step)
            .min_by(|a, b| self.variance(*a).total_cmp(&self.variance(*b)))
            .unwrap_or(0.0);
        let theta = golden_section(|t| self.variance(t), best - step, best + step, 1e-4);
        let theta = theta.rem_euclid(PI);
        (theta, self.variance(theta))
    }
}

fn golden_section(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64, tol: f64) -> f64 {
    let ratio = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - ratio * (b - a);
    let mut d = a + ratio * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    while (b - a).abs() > tol {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - ratio * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + ratio * (b - a);
            fd = f(d);
        }
    }
    0.5 * (a + b)
}

/// Output variance of `X_θ` at zero detected frequency.
pub fn output_quadrature_variance(
    solver: &SteadyStateSolver,
    rho: &DensityOperator,
    theta: f64,
    env: &EnvironmentParams,
) -> Result<f64> {
    Ok(OutputCorrelations::compute(solver, rho, env)?.variance(theta))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Squeezing {
    /// `S_f = (1/2) / min_θ Var(X_θ,out)`.
    pub ratio: f64,
    pub theta: f64,
    pub min_variance: f64,
}

impl Squeezing {
    pub fn db(&self) -> f64 {
        10.0 * self.ratio.log10()
    }
}

pub fn squeezing_level(
    solver: &SteadyStateSolver,
    rho: &DensityOperator,
    env: &EnvironmentParams,
) -> Result<Squeezing> {
    let corr = OutputCorrelations::compute(solver, rho, env)?;
    let (theta, min_variance) = corr.minimum();
    Ok(Squeezing { ratio: 0.5 / min_variance, theta, min_variance })
}

/// Quadrature coordinates for a Wigner evaluation; `x` and `p` are the
/// eigenvalues of `(a + a†)/√2` and `i(a† − a)/√2`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WignerGrid {
    pub x: Vec<f64>,
    pub p: Vec<f64>,
}

impl WignerGrid {
    pub fn square(extent: f64, points: usize) -> Self {
        let axis = linspace(-extent, extent, points);
        Self { x: axis.clone(), p: axis }
    }

    /// `[−6, 6]²` with 201 × 201 points.
    pub fn default_grid() -> Self {
        Self::square(6.0, 201)
    }

    /// Square grid wide enough for the state's largest quadrature spread.
    pub fn enclosing(rho: &DensityOperator, points: usize) -> Self {
        let mom = moments(rho);
        let reach = (2.0 * (mom.n + mom.mean.norm_sqr()) + 1.0).sqrt();
        let extent = (4.5 * reach + std::f64::consts::SQRT_2 * mom.mean.norm()).max(6.0);
        Self::square(extent, points)
    }

    /// Heuristic support check: the grid half-width covers `3√(2n+1)`.
    pub fn encloses(&self, rho: &DensityOperator) -> bool {
        let mom = moments(rho);
        let needed = 3.0 * (2.0 * (mom.n + mom.mean.norm_sqr()) + 1.0).sqrt();
        let half = |v: &[f64]| v.iter().map(|x| x.abs()).fold(0.0, f64::max);
        half(&self.x) >= needed && half(&self.p) >= needed
    }
}

fn linspace(start: f64, stop: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![start];
    }
    (0..n).map(|k| start + (stop - start) * k as f64 / (n - 1) as f64).collect()
}

/// Wigner quasiprobability sampled on a grid; `values[ix * p.len() + ip]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WignerField {
    pub x_grid: Vec<f64>,
    pub p_grid: Vec<f64>,
    pub values: Vec<f64>,
}

impl WignerField {
    pub fn at(&self, ix: usize, ip: usize) -> f64 {
        self.values[ix * self.p_grid.len() + ip]
    }

    fn spacing(v: &[f64]) -> f64 {
        if v.len() < 2 {
            0.0
        } else {
            (v[v.len() - 1] - v[0]) / (v.len() - 1) as f64
        }
    }

    pub fn cell_area(&self) -> f64 {
        Self::spacing(&self.x_grid) * Self::spacing(&self.p_grid)
    }

    /// Riemann sum × cell area.
    pub fn normalization(&self) -> f64 {
        self.values.iter().sum::<f64>() * self.cell_area()
    }

    pub fn min_value(&self) -> f64 {
        self.values.iter().cloned().fold(f64::INFINITY, f64::min)
    }

    /// `∫ |W − W_G|` where `W_G` is the Gaussian with the same first and
    /// second moments. Zero for Gaussian states up to grid error.
    pub fn gaussian_fit_deviation(&self) -> f64 {
        let area = self.cell_area();
        let np = self.p_grid.len();
        let (mut mx, mut mp, mut total) = (0.0, 0.0, 0.0);
        for (ix, &x) in self.x_grid.iter().enumerate() {
            for (ip, &p) in self.p_grid.iter().enumerate() {
                let w = self.values[ix * np + ip];
                total += w;
                mx += w * x;
                mp += w * p;
            }
        }
        mx /= total;
        mp /= total;
        let (mut sxx, mut spp, mut sxp) = (0.0, 0.0, 0.0);
        for (ix, &x) in self.x_grid.iter().enumerate() {
            for (ip, &p) in self.p_grid.iter().enumerate() {
                let w = self.values[ix * np + ip];
                sxx += w * (x - mx) * (x - mx);
                spp += w * (p - mp) * (p - mp);
                sxp += w * (x - mx) * (p - mp);
            }
        }
        sxx /= total;
        spp /= total;
        sxp /= total;
        let det = sxx * spp - sxp * sxp;
        let mut acc = 0.0;
        for (ix, &x) in self.x_grid.iter().enumerate() {
            for (ip, &p) in self.p_grid.iter().enumerate() {
                let (dx, dp) = (x - mx, p - mp);
                let q = (spp * dx * dx - 2.0 * sxp * dx * dp + sxx * dp * dp) / det;
                let g = (-0.5 * q).exp() / (2.0 * PI * det.sqrt());
                acc += (self.values[ix * np + ip] - g).abs();
            }
        }
        acc * area
    }
}

/// Wigner function by the Laguerre expansion of displaced parity,
///
/// ```text
/// W(α) = (1/π) Σ_{m} Σ_{k} (2 − δ_k0) Re[ρ_{m,m+k} (−1)^m e^{ikφ} f_m^k(4|α|²)]
/// ```
///
/// with `α = (x + ip)/√2 = |α| e^{iφ}` and the normalised Laguerre functions
/// `f_m^k(B) = √(m!/(m+k)!) B^{k/2} e^{−B/2} L_m^k(B)`, generated by their
/// three-term recurrence in `m`.
pub fn wigner(rho: &DensityOperator, grid: &WignerGrid) -> WignerField {
    if !grid.encloses(rho) {
        warn!("Wigner grid narrower than 3 sqrt(2n+1); normalisation will be poor");
    }
    let dim = rho.dim();
    let r = rho.matrix();
    let np = grid.p.len();
    let values: Vec<f64> = grid
        .x
        .par_iter()
        .flat_map_iter(|&x| {
            let mut f = vec![0.0; dim];
            grid.p.iter().map(move |&p| {
                let b = 2.0 * (x * x + p * p);
                let phi = p.atan2(x);
                let mut total = 0.0;
                for k in 0..dim {
                    laguerre_functions(k, b, &mut f[..dim - k]);
                    let mut acc = ZERO;
                    for m in 0..dim - k {
                        let sign = if m % 2 == 0 { 1.0 } else { -1.0 };
                        acc += r[(m, m + k)] * (sign * f[m]);
                    }
                    if k == 0 {
                        total += acc.re;
                    } else {
                        total += 2.0 * (acc * Complex64::from_polar(1.0, k as f64 * phi)).re;
                    }
                }
                total / PI
            }).collect::<Vec<_>>()
        })
        .collect();
    debug_assert_eq!(values.len(), grid.x.len() * np);
    WignerField { x_grid: grid.x.clone(), p_grid: grid.p.clone(), values }
}

fn laguerre_functions(k: usize, b: f64, out: &mut [f64]) {
    if out.is_empty() {
        return;
    }
    let kf = k as f64;
    out[0] = if b == 0.0 {
        if k == 0 { 1.0 } else { 0.0 }
    } else {
        (0.5 * kf * b.ln() - 0.5 * b - 0.5 * libm::lgamma(kf + 1.0)).exp()
    };
    if out.len() > 1 {
        out[1] = out[0] * (1.0 + kf - b) / (kf + 1.0).sqrt();
    }
    for m in 1..out.len().saturating_sub(1) {
        let mf = m as f64;
        out[m + 1] = ((2.0 * mf + 1.0 + kf - b) * out[m] - (mf * (mf + kf)).sqrt() * out[m - 1])
            / ((mf + 1.0) * (mf + 1.0 + kf)).sqrt();
    }
}
