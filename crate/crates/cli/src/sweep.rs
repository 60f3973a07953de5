//! Grid expansion, per-point evaluation and the in-memory dataset.

use std::collections::BTreeMap;

use num_complex::Complex64;
use paramp_core::grid::Grid2D;
use paramp_core::lindblad::{
    deviation_xi, moments, solve_model, squeezing_level, wigner, EnvironmentParams, SolverSettings, WignerGrid,
};
use paramp_core::model::{self, CircuitSpec, HamiltonianCoefficients, Topology, Units};
use paramp_core::response::{
    dpa_gain_closed_form, gain_from_baseline, lossy_zero_gain_threshold, model_noise, parametric_threshold, to_db,
    ProbeSpec,
};
use paramp_core::semiclassical::{analytic_gain, pump_fixed_points};
use paramp_core::{Error, Result};
use rayon::prelude::*;
use serde::Serialize;

use crate::config::{AxisName, CircuitParams, ModelKind, ModelSpec, Observable, SweepConfig, Term};
use crate::CliError;

const PICO: f64 = 1e-12;

/// One grid point before evaluation.
#[derive(Debug, Clone, PartialEq)]
pub struct GridPoint {
    pub model: usize,
    /// Axis values in the config's units, in axis order.
    pub values: Vec<f64>,
}

/// Expands models × axes in row-major order (model slowest, last axis fastest).
pub fn expand_grid(cfg: &SweepConfig) -> Vec<GridPoint> {
    let axes: Vec<Vec<f64>> = cfg.axes.iter().map(|a| a.values()).collect();
    let mut out = Vec::with_capacity(cfg.cardinality());
    for model in 0..cfg.models.len() {
        let mut idx = vec![0usize; axes.len()];
        loop {
            out.push(GridPoint { model, values: idx.iter().zip(&axes).map(|(&i, a)| a[i]).collect() });
            let mut k = axes.len();
            loop {
                if k == 0 {
                    break;
                }
                k -= 1;
                idx[k] += 1;
                if idx[k] < axes[k].len() {
                    break;
                }
                idx[k] = 0;
            }
            if idx.iter().all(|&i| i == 0) {
                break;
            }
        }
    }
    out
}

/// Fully resolved parameters of one point, in units of κ.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ResolvedPoint {
    pub coeffs: HamiltonianCoefficients,
    pub env: EnvironmentParams,
    pub omega: f64,
    /// Modulation depth chosen for circuit models.
    pub modulation_depth: Option<f64>,
}

fn circuit_spec(kind: ModelKind, c: &CircuitParams) -> CircuitSpec {
    let topology = match kind {
        ModelKind::Jpa => Topology::DcSquid,
        ModelKind::StsInductor => Topology::StsInductor,
        ModelKind::StsJunction => Topology::StsJunction,
        _ => unreachable!("not a circuit model"),
    };
    CircuitSpec {
        topology,
        josephson_inductance: c.josephson_inductance_ph * PICO,
        linear_inductance: c.linear_inductance_ph.map(|l| l * PICO),
        total_capacitance: c.capacitance_pf * PICO,
        static_flux: c.static_flux,
        modulation_depth: 0.0,
        pump_frequency: 0.0,
        bessel: c.bessel,
    }
}

/// Circuit coefficients (κ units) at drive magnitude `lambda` and detuning
/// `delta`. The drive is made real and positive by a frame rotation, which
/// flips the sign of Λ together with λ.
pub fn circuit_point(
    kind: ModelKind,
    circuit: &CircuitParams,
    disable: &[Term],
    delta: f64,
    lambda: f64,
    kappa_mhz: f64,
) -> Result<(HamiltonianCoefficients, f64)> {
    let units = Units::from_kappa_mhz(kappa_mhz)?;
    let spec = model::modulation_for_drive(&circuit_spec(kind, circuit), units.to_si(lambda))?;
    let mut c = model::si_to_internal(&spec, &units)?;
    if c.lambda.re < 0.0 {
        c.lambda = -c.lambda;
        c.cubic = -c.cubic;
    }
    c.lambda = Complex64::new(c.lambda.norm(), 0.0);
    c.delta = delta;
    for t in disable {
        match t {
            Term::Kerr => c.kerr = 0.0,
            Term::Cubic => c.cubic = 0.0,
            Term::Quartic => c.quartic = 0.0,
        }
    }
    Ok((c, spec.modulation_depth))
}

pub fn resolve_point(cfg: &SweepConfig, p: &GridPoint) -> Result<ResolvedPoint> {
    let m: &ModelSpec = &cfg.models[p.model];
    let s = cfg.rate_scale();
    let axis = |n: AxisName| cfg.axes.iter().position(|a| a.name == n).map(|i| p.values[i] * s);
    let delta = axis(AxisName::Delta).unwrap_or(m.delta * s);
    let lambda = axis(AxisName::Lambda).unwrap_or(m.lambda * s);
    let gamma = axis(AxisName::Gamma).unwrap_or(cfg.environment.gamma * s);
    let omega = axis(AxisName::Omega).unwrap_or(0.0);
    let env = EnvironmentParams::new(1.0, gamma)?;
    let (coeffs, modulation_depth) = match m.kind {
        ModelKind::Dpa | ModelKind::RawCoefficients => {
            let kerr = axis(AxisName::Kerr).unwrap_or(m.kerr * s);
            let cubic = axis(AxisName::Cubic).unwrap_or(m.cubic * s) + m.cubic_per_lambda * lambda;
            let c = HamiltonianCoefficients::dpa(delta, 0.0)
                .with_lambda(Complex64::from_polar(lambda, m.lambda_phase))
                .with_kerr(kerr)
                .with_cubic(cubic)
                .with_quartic(m.quartic * s);
            (c, None)
        }
        kind => {
            let circuit = m.circuit.as_ref().expect("validated");
            let (c, depth) = circuit_point(kind, circuit, &m.disable, delta, lambda, cfg.environment.kappa_mhz)?;
            (c, Some(depth))
        }
    };
    Ok(ResolvedPoint { coeffs, env, omega, modulation_depth })
}

/// A single CSV cell.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(untagged)]
pub enum Value {
    Num(f64),
    Int(i64),
    Text(String),
    Missing,
}

/// Column description carried in the metadata block.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Column {
    pub name: String,
    pub unit: &'static str,
}

/// Status of a row whose steady state fails the trace, Hermiticity or
/// positivity check.
pub const INVALID_STATE: &str = "invalid_state";

/// Short machine-readable failure code for a row.
pub fn error_code(e: &Error) -> &'static str {
    match e {
        Error::InvalidDimension(_) | Error::DimensionMismatch { .. } => "dimension",
        Error::NonHermitian(_) => "non_hermitian",
        Error::ImaginaryResonance(_) => "imaginary_resonance",
        Error::InvalidBias(_) => "invalid_bias",
        Error::InvalidParameter(_) => "invalid_parameter",
        Error::WrongTopology { .. } => "wrong_topology",
        Error::SingularSystem(_) => "singular",
        Error::SolverFailure(_) => "solver_failure",
        Error::NotConverged { .. } => "not_converged",
        Error::OutOfRange(_) => "out_of_range",
        Error::Nonlinear { .. } => "nonlinear",
        Error::Truncation { .. } => "truncation",
    }
}

/// Everything computed for one point.
#[derive(Debug, Clone, Default)]
pub struct RowResult {
    pub values: BTreeMap<&'static str, Value>,
    pub error: Option<(String, String)>,
    pub field: Option<Grid2D>,
}

impl RowResult {
    fn set(&mut self, key: &'static str, v: f64) {
        self.values.insert(key, Value::Num(v));
    }

    fn fail(&mut self, e: &Error) {
        if self.error.is_none() {
            self.error = Some((error_code(e).to_string(), e.to_string()));
        }
    }
}

fn settings_of(cfg: &SweepConfig) -> SolverSettings {
    SolverSettings {
        dim: cfg.solver.dim,
        adaptive: cfg.solver.adaptive,
        max_dim: cfg.solver.max_dim,
        tail_tolerance: cfg.solver.tail_tolerance,
        ..SolverSettings::default()
    }
}

/// Evaluates every requested observable at one resolved point. Failures are
/// recorded in the row; values computed before the failure are kept.
pub fn evaluate(cfg: &SweepConfig, r: &ResolvedPoint) -> RowResult {
    let mut row = RowResult::default();
    let (c, env) = (&r.coeffs, &r.env);
    if let Some(d) = r.modulation_depth {
        row.set("modulation_depth", d);
    }
    if cfg.wants(Observable::GainDpa) {
        let g = dpa_gain_closed_form(r.omega, c.delta, c.lambda, env);
        row.set("gain_dpa", g);
        row.set("gain_dpa_db", to_db(g));
    }
    if cfg.wants(Observable::Threshold) {
        row.set("threshold", parametric_threshold(c.delta, env));
    }
    if cfg.wants(Observable::ZeroGainThreshold) {
        match lossy_zero_gain_threshold(env) {
            Ok(t) => row.set("zero_gain_threshold", t),
            Err(e) => row.fail(&e),
        }
    }
    if cfg.wants(Observable::StableCount) || cfg.wants(Observable::FixedPoints) {
        if c.lambda.im.abs() > 1e-12 * c.lambda.norm().max(1.0) {
            row.fail(&Error::InvalidParameter("fixed points need a real drive".into()));
        } else {
            let fp = pump_fixed_points(c.delta, c.lambda.re, c.cubic, env);
            row.values.insert("stable_count", Value::Int(fp.count() as i64));
            if cfg.wants(Observable::FixedPoints) {
                row.values.insert(
                    "alpha_h_nontrivial",
                    fp.nearest_nontrivial().map(Value::Num).unwrap_or(Value::Missing),
                );
                row.values.insert("dropped_roots", Value::Int(fp.dropped as i64));
            }
        }
    }
    if cfg.wants(Observable::GainAnalytic) {
        match analytic_gain(r.omega, c, env, cfg.solver.signal_power) {
            Ok(a) => {
                row.set("gain_analytic", a.gain);
                row.set("gain_analytic_db", to_db(a.gain));
                row.set("lambda_eff", a.effective.lambda_eff.norm());
                row.set("delta_eff", a.effective.delta_eff.re);
                let matched = paramp_core::response::gain_from_effective(
                    r.omega,
                    Complex64::new(a.effective.delta_eff.re, 0.0),
                    a.effective.lambda_eff.norm_sqr(),
                    env.kappa,
                    env.kappa_bar(),
                );
                row.set("gain_dpa_matched", matched);
            }
            Err(e) => row.fail(&e),
        }
    }
    if cfg.observables.iter().any(|o| o.needs_state()) {
        if let Err(e) = evaluate_state(cfg, r, &mut row) {
            row.fail(&e);
        }
    }
    row
}

fn evaluate_state(cfg: &SweepConfig, r: &ResolvedPoint, row: &mut RowResult) -> Result<()> {
    let (c, env) = (&r.coeffs, &r.env);
    let solved = solve_model(c, env, &settings_of(cfg), None)?;
    row.values.insert("dim", Value::Int(solved.dim as i64));
    row.set("residual", solved.state.relative_residual);
    row.set("tail", solved.tail);
    if !solved.converged {
        row.fail(&Error::Truncation { dim: solved.dim, tail: solved.tail });
    }
    if let Err(e) = solved.rho().validate() {
        row.error = Some((INVALID_STATE.into(), e.to_string()));
        return Ok(());
    }
    let mom = moments(solved.rho());
    if cfg.wants(Observable::Xi) {
        row.set("xi", deviation_xi(&mom).xi);
        row.set("n", mom.n);
        row.set("m_abs", mom.m.norm());
    }
    if cfg.wants(Observable::Squeezing) {
        let sq = squeezing_level(&solved.solver, solved.rho(), env)?;
        row.set("squeezing", sq.ratio);
        row.set("squeezing_db", sq.db());
        row.set("squeezing_angle", sq.theta);
    }
    if cfg.wants(Observable::Wigner) {
        let grid = match cfg.wigner.extent {
            Some(e) => WignerGrid::square(e, cfg.wigner.points),
            None => WignerGrid::enclosing(solved.rho(), cfg.wigner.points),
        };
        let w = wigner(solved.rho(), &grid);
        row.set("wigner_norm", w.normalization());
        row.set("wigner_min", w.min_value());
        row.set("wigner_gaussian_l1", w.gaussian_fit_deviation());
        row.field = Some(Grid2D::from(&w));
    }
    if cfg.wants(Observable::Gain) || cfg.wants(Observable::Efficiency) {
        let probe = ProbeSpec::new(cfg.solver.probe * env.kappa, 0.0, env)?;
        let m = gain_from_baseline(&solved, c, env, &probe, true)?;
        row.set("probe", m.probe);
        row.values.insert("halvings", Value::Int(m.halvings as i64));
        row.set("residual", m.residual.max(solved.state.relative_residual));
        let g = m.phase_preserving_gain();
        row.set("gain", g);
        row.set("gain_db", to_db(g));
        row.set("g11", m.gain.g11);
        row.set("g12", m.gain.g12);
        row.set("g21", m.gain.g21);
        row.set("g22", m.gain.g22);
        if cfg.wants(Observable::Efficiency) {
            let nf = model_noise(g, c, env)?;
            row.set("efficiency", nf.efficiency);
            row.set("added_noise", nf.added);
            row.set("caves_efficiency", paramp_core::response::caves_efficiency(g));
        }
    }
    Ok(())
}

/// Run metadata written as the commented JSON block.
#[derive(Debug, Clone, Serialize)]
pub struct Metadata {
    pub config: SweepConfig,
    pub code_version: &'static str,
    pub constants_version: &'static str,
    /// Seconds since the Unix epoch; absent for deterministic runs.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub created_unix: Option<u64>,
    pub rows: usize,
    pub columns: Vec<Column>,
}

#[derive(Debug, Clone)]
pub struct Dataset {
    pub metadata: Metadata,
    pub rows: Vec<Vec<Value>>,
    /// Side outputs (Wigner grids) keyed by file stem.
    pub fields: Vec<(String, Grid2D)>,
}

impl Dataset {
    pub fn column(&self, name: &str) -> Option<usize> {
        self.metadata.columns.iter().position(|c| c.name == name)
    }

    /// Numeric column; missing and text cells become NaN.
    pub fn numbers(&self, name: &str) -> Vec<f64> {
        let Some(i) = self.column(name) else { return Vec::new() };
        self.rows
            .iter()
            .map(|r| match &r[i] {
                Value::Num(x) => *x,
                Value::Int(k) => *k as f64,
                _ => f64::NAN,
            })
            .collect()
    }

    pub fn texts(&self, name: &str) -> Vec<String> {
        let Some(i) = self.column(name) else { return Vec::new() };
        self.rows
            .iter()
            .map(|r| match &r[i] {
                Value::Text(s) => s.clone(),
                _ => String::new(),
            })
            .collect()
    }
}

const PARAMS: [&str; 7] = ["delta", "lambda", "gamma", "kerr", "cubic", "quartic", "omega"];

/// Observable columns in emission order, with their units.
fn observable_columns(o: Observable) -> &'static [(&'static str, &'static str)] {
    match o {
        Observable::Xi => &[("xi", "1"), ("n", "photons"), ("m_abs", "photons")],
        Observable::Gain => &[
            ("gain", "1"),
            ("gain_db", "dB"),
            ("g11", "1"),
            ("g12", "1"),
            ("g21", "1"),
            ("g22", "1"),
        ],
        Observable::GainDpa => &[("gain_dpa", "1"), ("gain_dpa_db", "dB")],
        Observable::Efficiency => &[("efficiency", "1"), ("added_noise", "photons"), ("caves_efficiency", "1")],
        Observable::Squeezing => &[("squeezing", "1"), ("squeezing_db", "dB"), ("squeezing_angle", "rad")],
        Observable::Wigner => &[("wigner_file", "path"), ("wigner_norm", "1"), ("wigner_min", "1"), ("wigner_gaussian_l1", "1")],
        Observable::StableCount => &[("stable_count", "1")],
        Observable::FixedPoints => &[("alpha_h_nontrivial", "photons"), ("dropped_roots", "1")],
        Observable::GainAnalytic => &[
            ("gain_analytic", "1"),
            ("gain_analytic_db", "dB"),
            ("lambda_eff", "kappa"),
            ("delta_eff", "kappa"),
            ("gain_dpa_matched", "1"),
        ],
        Observable::ZeroGainThreshold => &[("zero_gain_threshold", "kappa")],
        Observable::Threshold => &[("threshold", "kappa")],
    }
}

const DIAGNOSTICS: [(&str, &str); 7] = [
    ("dim", "1"),
    ("residual", "1"),
    ("tail", "1"),
    ("probe", "kappa"),
    ("halvings", "1"),
    ("modulation_depth", "1"),
    ("status", "code"),
];

fn columns(cfg: &SweepConfig) -> Vec<Column> {
    let mut cols = vec![Column { name: "model".into(), unit: "label" }, Column { name: "kind".into(), unit: "label" }];
    for p in PARAMS {
        cols.push(Column { name: format!("{p}[kappa]"), unit: "kappa" });
        cols.push(Column { name: format!("{p}[MHz]"), unit: "MHz" });
    }
    let mut seen = std::collections::BTreeSet::new();
    for &o in &cfg.observables {
        if !seen.insert(o) {
            continue;
        }
        if o == Observable::FixedPoints && !cfg.wants(Observable::StableCount) {
            cols.push(Column { name: "stable_count".into(), unit: "1" });
        }
        for (n, u) in observable_columns(o) {
            cols.push(Column { name: (*n).into(), unit: u });
            if *u == "kappa" {
                cols.push(Column { name: format!("{n}[MHz]"), unit: "MHz" });
            }
        }
    }
    for (n, u) in DIAGNOSTICS {
        cols.push(Column { name: n.into(), unit: u });
    }
    cols.push(Column { name: "message".into(), unit: "text" });
    cols
}

fn build_row(cfg: &SweepConfig, p: &GridPoint, index: usize, resolved: Result<ResolvedPoint>, res: RowResult, cols: &[Column]) -> (Vec<Value>, Option<(String, Grid2D)>) {
    let m = &cfg.models[p.model];
    let mhz = cfg.environment.kappa_mhz;
    let params: BTreeMap<&str, f64> = match &resolved {
        Ok(r) => [
            ("delta", r.coeffs.delta),
            ("lambda", r.coeffs.lambda.norm()),
            ("gamma", r.env.gamma),
            ("kerr", r.coeffs.kerr),
            ("cubic", r.coeffs.cubic),
            ("quartic", r.coeffs.quartic),
            ("omega", r.omega),
        ]
        .into_iter()
        .collect(),
        Err(_) => BTreeMap::new(),
    };
    let (status, message) = match (&resolved, &res.error) {
        (Err(e), _) => (error_code(e).to_string(), e.to_string()),
        (Ok(_), Some((c, msg))) => (c.clone(), msg.clone()),
        (Ok(_), None) => ("ok".to_string(), String::new()),
    };
    let field = res.field.map(|g| (format!("{}_wigner_{index:05}", cfg.name), g));
    let row = cols
        .iter()
        .map(|col| {
            let name = col.name.as_str();
            if name == "model" {
                return Value::Text(m.label.clone());
            }
            if name == "kind" {
                return Value::Text(m.kind.name().into());
            }
            if name == "status" {
                return Value::Text(status.clone());
            }
            if name == "message" {
                return Value::Text(message.clone());
            }
            if name == "wigner_file" {
                return field.as_ref().map(|(stem, _)| Value::Text(format!("{stem}.pgrd"))).unwrap_or(Value::Missing);
            }
            if let Some(base) = name.strip_suffix("[kappa]") {
                return params.get(base).map(|&v| Value::Num(v)).unwrap_or(Value::Missing);
            }
            if let Some(base) = name.strip_suffix("[MHz]") {
                if let Some(&v) = params.get(base) {
                    return Value::Num(v * mhz);
                }
                return match res.values.get(base) {
                    Some(Value::Num(v)) => Value::Num(v * mhz),
                    _ => Value::Missing,
                };
            }
            res.values.get(name).cloned().unwrap_or(Value::Missing)
        })
        .collect();
    (row, field)
}

/// Runs every grid point and assembles a grid-ordered dataset. Per-point
/// failures are recorded in the row; only configuration errors abort.
pub fn run_sweep(cfg: &SweepConfig) -> std::result::Result<Dataset, CliError> {
    cfg.validate()?;
    let points = expand_grid(cfg);
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.threads)
        .build()
        .map_err(|e| CliError::Config(format!("thread pool: {e}")))?;
    let results: Vec<(Result<ResolvedPoint>, RowResult)> = pool.install(|| {
        points
            .par_iter()
            .map(|p| match resolve_point(cfg, p) {
                Ok(r) => (Ok(r), evaluate(cfg, &r)),
                Err(e) => (Err(e), RowResult::default()),
            })
            .collect()
    });
    let cols = columns(cfg);
    let mut rows = Vec::with_capacity(points.len());
    let mut fields = Vec::new();
    for (i, (p, (resolved, res))) in points.iter().zip(results).enumerate() {
        let (row, field) = build_row(cfg, p, i, resolved, res, &cols);
        rows.push(row);
        fields.extend(field);
    }
    let created_unix = if cfg.deterministic {
        None
    } else {
        std::time::SystemTime::now().duration_since(std::time::UNIX_EPOCH).ok().map(|d| d.as_secs())
    };
    Ok(Dataset {
        metadata: Metadata {
            config: cfg.clone(),
            code_version: env!("CARGO_PKG_VERSION"),
            constants_version: model::constants::VERSION,
            created_unix,
            rows: rows.len(),
            columns: cols,
        },
        rows,
        fields,
    })
}
