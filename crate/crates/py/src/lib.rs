//! Python bindings: `import paramp`.

use paramp_core::lindblad::{self, EnvironmentParams, SolvedState, SolverSettings, WignerGrid};
use paramp_core::model::{self, BesselMode, CircuitSpec, HamiltonianCoefficients, Topology};
use paramp_core::response::{self, ProbeSpec};
use paramp_core::{semiclassical, Complex64};
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;

fn err(e: paramp_core::Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

/// Hamiltonian coefficients in units of κ.
#[pyclass(name = "Coefficients", frozen)]
#[derive(Clone, Copy)]
struct PyCoefficients(HamiltonianCoefficients);

#[pymethods]
impl PyCoefficients {
    #[new]
    #[pyo3(signature = (delta=0.0, lam=0.0, kerr=0.0, cubic=0.0, quartic=0.0, lam_phase=0.0))]
    fn new(delta: f64, lam: f64, kerr: f64, cubic: f64, quartic: f64, lam_phase: f64) -> Self {
        Self(HamiltonianCoefficients {
            delta,
            lambda: Complex64::from_polar(lam, lam_phase),
            kerr,
            cubic,
            quartic,
        })
    }

    #[getter]
    fn delta(&self) -> f64 {
        self.0.delta
    }

    /// λ as `(re, im)`.
    #[getter]
    fn lam(&self) -> (f64, f64) {
        (self.0.lambda.re, self.0.lambda.im)
    }

    #[getter]
    fn kerr(&self) -> f64 {
        self.0.kerr
    }

    #[getter]
    fn cubic(&self) -> f64 {
        self.0.cubic
    }

    #[getter]
    fn quartic(&self) -> f64 {
        self.0.quartic
    }

    fn __repr__(&self) -> String {
        let c = &self.0;
        format!(
            "Coefficients(delta={}, lam={}, kerr={}, cubic={}, quartic={})",
            c.delta, c.lambda, c.kerr, c.cubic, c.quartic
        )
    }
}

fn environment(gamma: f64) -> PyResult<EnvironmentParams> {
    EnvironmentParams::new(1.0, gamma).map_err(err)
}

/// Steady state of the Lindblad equation with its factorised Liouvillian.
#[pyclass(name = "SteadyState", unsendable)]
struct PySteadyState {
    solved: SolvedState,
    coeffs: HamiltonianCoefficients,
    env: EnvironmentParams,
}

#[pymethods]
impl PySteadyState {
    #[new]
    #[pyo3(signature = (coefficients, gamma=0.0, dim=80, adaptive=true))]
    fn new(coefficients: &PyCoefficients, gamma: f64, dim: usize, adaptive: bool) -> PyResult<Self> {
        let env = environment(gamma)?;
        let settings = SolverSettings { dim, adaptive, ..SolverSettings::default() };
        let solved = lindblad::solve_model(&coefficients.0, &env, &settings, None).map_err(err)?;
        Ok(Self { solved, coeffs: coefficients.0, env })
    }

    #[getter]
    fn dim(&self) -> usize {
        self.solved.dim
    }

    #[getter]
    fn tail(&self) -> f64 {
        self.solved.tail
    }

    #[getter]
    fn converged(&self) -> bool {
        self.solved.converged
    }

    /// `(xi, mean, n, m)` with complex values as `(re, im)`.
    fn moments(&self) -> (f64, (f64, f64), f64, (f64, f64)) {
        let m = lindblad::moments(self.solved.rho());
        let xi = lindblad::deviation_xi(&m).xi;
        (xi, (m.mean.re, m.mean.im), m.n, (m.m.re, m.m.im))
    }

    fn xi(&self) -> f64 {
        lindblad::deviation_xi(&lindblad::moments(self.solved.rho())).xi
    }

    /// Density matrix as nested lists of `(re, im)`.
    fn density_matrix(&self) -> Vec<Vec<(f64, f64)>> {
        let rho = self.solved.rho().matrix();
        (0..rho.nrows()).map(|i| (0..rho.ncols()).map(|j| (rho[(i, j)].re, rho[(i, j)].im)).collect()).collect()
    }

    fn validate(&self) -> PyResult<()> {
        self.solved.rho().validate().map_err(err)
    }

    /// `(S_f, theta)` for the output field.
    fn squeezing(&self) -> PyResult<(f64, f64)> {
        let s = lindblad::squeezing_level(&self.solved.solver, self.solved.rho(), &self.env).map_err(err)?;
        Ok((s.ratio, s.theta))
    }

    /// Phase-preserving gain and the quadrature gain matrix from probe solves.
    #[pyo3(signature = (probe=None))]
    fn gain(&self, probe: Option<f64>) -> PyResult<(f64, [[f64; 2]; 2])> {
        let spec = match probe {
            Some(p) => ProbeSpec::new(p, 0.0, &self.env).map_err(err)?,
            None => ProbeSpec::default_for(&self.env),
        };
        let g = response::gain_from_baseline(&self.solved, &self.coeffs, &self.env, &spec, true).map_err(err)?;
        let m = g.gain;
        Ok((g.phase_preserving_gain(), [[m.g11, m.g12], [m.g21, m.g22]]))
    }

    /// `(x, p, values)` with `values[ix][ip]`.
    #[pyo3(signature = (points=161, extent=None))]
    fn wigner(&self, points: usize, extent: Option<f64>) -> (Vec<f64>, Vec<f64>, Vec<Vec<f64>>) {
        let grid = match extent {
            Some(e) => WignerGrid::square(e, points),
            None => WignerGrid::enclosing(self.solved.rho(), points),
        };
        let w = lindblad::wigner(self.solved.rho(), &grid);
        let rows = w.values.chunks(w.p_grid.len()).map(<[f64]>::to_vec).collect();
        (w.x_grid, w.p_grid, rows)
    }
}

#[pyfunction]
#[pyo3(signature = (lam, delta=0.0, omega=0.0, gamma=0.0))]
fn dpa_gain(lam: f64, delta: f64, omega: f64, gamma: f64) -> PyResult<f64> {
    Ok(response::dpa_gain_closed_form(omega, delta, Complex64::new(lam, 0.0), &environment(gamma)?))
}

#[pyfunction]
#[pyo3(signature = (delta=0.0, gamma=0.0))]
fn parametric_threshold(delta: f64, gamma: f64) -> PyResult<f64> {
    Ok(response::parametric_threshold(delta, &environment(gamma)?))
}

#[pyfunction]
fn zero_gain_threshold(gamma: f64) -> PyResult<f64> {
    response::lossy_zero_gain_threshold(&environment(gamma)?).map_err(err)
}

/// `(added_noise, efficiency)` for a measured gain.
#[pyfunction]
#[pyo3(signature = (gain, coefficients, gamma=0.0))]
fn noise(gain: f64, coefficients: &PyCoefficients, gamma: f64) -> PyResult<(f64, f64)> {
    let n = response::model_noise(gain, &coefficients.0, &environment(gamma)?).map_err(err)?;
    Ok((n.added, n.efficiency))
}

/// Distinct `|α_h|²` of the pump-mode fixed points, ascending.
#[pyfunction]
#[pyo3(signature = (delta, lam, cubic, gamma=0.0))]
fn fixed_points(delta: f64, lam: f64, cubic: f64, gamma: f64) -> PyResult<Vec<f64>> {
    Ok(semiclassical::pump_fixed_points(delta, lam, cubic, &environment(gamma)?).unique_populations)
}

/// `(deltas, lambdas, counts)` with `counts[i_delta][i_lambda]`.
#[pyfunction]
#[pyo3(signature = (delta_range, lambda_range, cubic, resolution, gamma=0.0))]
fn stability_map(
    delta_range: (f64, f64),
    lambda_range: (f64, f64),
    cubic: f64,
    resolution: (usize, usize),
    gamma: f64,
) -> PyResult<(Vec<f64>, Vec<f64>, Vec<Vec<u8>>)> {
    let map = semiclassical::stability_diagram(delta_range, lambda_range, cubic, &environment(gamma)?, resolution)
        .map_err(err)?;
    let rows = map.counts.chunks(map.lambdas.len()).map(<[u8]>::to_vec).collect();
    Ok((map.deltas, map.lambdas, rows))
}

/// Circuit coefficients in units of κ, as a dict.
///
/// Inductances in pH, capacitance in pF, `kappa_mhz` is κ/2π.
#[pyfunction]
#[pyo3(signature = (topology, lj_ph, c_pf, flux, depth, pump_ghz, l_ph=None, kappa_mhz=300.0))]
#[allow(clippy::too_many_arguments)]
fn circuit(
    py: Python<'_>,
    topology: &str,
    lj_ph: f64,
    c_pf: f64,
    flux: f64,
    depth: f64,
    pump_ghz: f64,
    l_ph: Option<f64>,
    kappa_mhz: f64,
) -> PyResult<Py<PyAny>> {
    let topology = match topology {
        "dc_squid" => Topology::DcSquid,
        "sts_inductor" => Topology::StsInductor,
        "sts_junction" => Topology::StsJunction,
        other => return Err(PyValueError::new_err(format!("unknown topology {other:?}"))),
    };
    let spec = CircuitSpec {
        topology,
        josephson_inductance: lj_ph * 1e-12,
        linear_inductance: l_ph.map(|l| l * 1e-12),
        total_capacitance: c_pf * 1e-12,
        static_flux: flux,
        modulation_depth: depth,
        pump_frequency: 2.0 * std::f64::consts::PI * pump_ghz * 1e9,
        bessel: BesselMode::Exact,
    };
    let units = model::Units::from_kappa_mhz(kappa_mhz).map_err(err)?;
    let cc = model::circuit_coefficients(&spec).map_err(err)?;
    let c = units.coefficients_to_internal(&cc.coefficients);
    let d = pyo3::types::PyDict::new(py);
    d.set_item("delta", c.delta)?;
    d.set_item("lam", (c.lambda.re, c.lambda.im))?;
    d.set_item("kerr", c.kerr)?;
    d.set_item("cubic", c.cubic)?;
    d.set_item("quartic", c.quartic)?;
    d.set_item("omega_a", cc.omega_a)?;
    d.set_item("phi_zps", cc.phi_zps)?;
    d.set_item("kerr_free", cc.is_kerr_free())?;
    Ok(d.into_any().unbind())
}

#[pymodule]
fn paramp(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyCoefficients>()?;
    m.add_class::<PySteadyState>()?;
    m.add_function(wrap_pyfunction!(dpa_gain, m)?)?;
    m.add_function(wrap_pyfunction!(parametric_threshold, m)?)?;
    m.add_function(wrap_pyfunction!(zero_gain_threshold, m)?)?;
    m.add_function(wrap_pyfunction!(noise, m)?)?;
    m.add_function(wrap_pyfunction!(fixed_points, m)?)?;
    m.add_function(wrap_pyfunction!(stability_map, m)?)?;
    m.add_function(wrap_pyfunction!(circuit, m)?)?;
    Ok(())
}
