//! Sweep configuration: the declarative document read by `paramp sweep`.
//!
//! Every rate-valued field is expressed in the unit system named by
//! `units` (κ multiples or MHz, i.e. angular rate / 2π). The schema is
//! documented in `docs/config.md`.

use std::collections::BTreeSet;
use std::path::Path;

use paramp_core::model::BesselMode;
use serde::{Deserialize, Serialize};

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum UnitSystem {
    /// Rates in multiples of κ.
    #[default]
    Kappa,
    /// Rates in MHz (angular rate divided by 2π).
    Si,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum ModelKind {
    #[serde(alias = "dpa")]
    Dpa,
    #[serde(alias = "jpa")]
    Jpa,
    #[serde(alias = "sts_inductor")]
    StsInductor,
    #[serde(alias = "sts_junction")]
    StsJunction,
    #[serde(alias = "raw_coefficients")]
    RawCoefficients,
}

impl ModelKind {
    pub fn name(&self) -> &'static str {
        match self {
            ModelKind::Dpa => "DPA",
            ModelKind::Jpa => "JPA",
            ModelKind::StsInductor => "STS_INDUCTOR",
            ModelKind::StsJunction => "STS_JUNCTION",
            ModelKind::RawCoefficients => "RAW_COEFFICIENTS",
        }
    }

    pub fn is_circuit(&self) -> bool {
        matches!(self, ModelKind::Jpa | ModelKind::StsInductor | ModelKind::StsJunction)
    }
}

/// Hamiltonian terms that a circuit model may switch off.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Term {
    Kerr,
    Cubic,
    Quartic,
}

/// Circuit elements in lab units.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CircuitParams {
    pub josephson_inductance_ph: f64,
    pub capacitance_pf: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub linear_inductance_ph: Option<f64>,
    /// Static flux F in radians.
    pub static_flux: f64,
    #[serde(default)]
    pub bessel: BesselMode,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSpec {
    pub label: String,
    pub kind: ModelKind,
    #[serde(default)]
    pub delta: f64,
    #[serde(default)]
    pub lambda: f64,
    /// Phase of λ in radians (DPA and raw models only).
    #[serde(default)]
    pub lambda_phase: f64,
    #[serde(default)]
    pub kerr: f64,
    #[serde(default)]
    pub cubic: f64,
    /// Adds `cubic_per_lambda · λ` to Λ (raw models).
    #[serde(default)]
    pub cubic_per_lambda: f64,
    #[serde(default)]
    pub quartic: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub circuit: Option<CircuitParams>,
    /// Terms zeroed after the circuit map.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub disable: Vec<Term>,
}

impl ModelSpec {
    pub fn new(label: &str, kind: ModelKind) -> Self {
        Self {
            label: label.into(),
            kind,
            delta: 0.0,
            lambda: 0.0,
            lambda_phase: 0.0,
            kerr: 0.0,
            cubic: 0.0,
            cubic_per_lambda: 0.0,
            quartic: 0.0,
            circuit: None,
            disable: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AxisName {
    Lambda,
    Delta,
    Gamma,
    Kerr,
    Cubic,
    Omega,
}

impl AxisName {
    pub fn name(&self) -> &'static str {
        match self {
            AxisName::Lambda => "lambda",
            AxisName::Delta => "delta",
            AxisName::Gamma => "gamma",
            AxisName::Kerr => "kerr",
            AxisName::Cubic => "cubic",
            AxisName::Omega => "omega",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Spacing {
    #[default]
    Linear,
    Log,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Axis {
    pub name: AxisName,
    pub start: f64,
    pub stop: f64,
    pub count: usize,
    #[serde(default)]
    pub spacing: Spacing,
}

impl Axis {
    pub fn linear(name: AxisName, start: f64, stop: f64, count: usize) -> Self {
        Self { name, start, stop, count, spacing: Spacing::Linear }
    }

    pub fn single(name: AxisName, value: f64) -> Self {
        Self::linear(name, value, value, 1)
    }

    pub fn values(&self) -> Vec<f64> {
        if self.count == 1 {
            return vec![self.start];
        }
        let last = (self.count - 1) as f64;
        (0..self.count)
            .map(|i| {
                let t = i as f64 / last;
                match self.spacing {
                    Spacing::Linear => self.start + (self.stop - self.start) * t,
                    Spacing::Log => {
                        let (a, b) = (self.start.abs().ln(), self.stop.abs().ln());
                        self.start.signum() * (a + (b - a) * t).exp()
                    }
                }
            })
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Observable {
    /// Ξ with N and |M|.
    Xi,
    /// Probe-measured gain matrix and phase-preserving gain at ω = 0.
    Gain,
    /// Closed-form DPA gain at the row's (ω, Δ, λ, γ).
    GainDpa,
    /// Added noise and quantum efficiency from the measured gain.
    Efficiency,
    /// Zero-frequency output squeezing level.
    Squeezing,
    /// Steady-state Wigner function, written as a binary grid per row.
    Wigner,
    /// Number of distinct pump-half populations.
    StableCount,
    /// Smallest nontrivial pump-half population.
    FixedPoints,
    /// Harmonic-balance gain with self-consistent effective parameters.
    GainAnalytic,
    /// Drive at which the lossy DPA gain returns to unity.
    ZeroGainThreshold,
    /// Parametric threshold √(Δ² + κ̄²/4).
    Threshold,
}

impl Observable {
    pub fn needs_state(&self) -> bool {
        matches!(self, Observable::Xi | Observable::Gain | Observable::Efficiency | Observable::Squeezing | Observable::Wigner)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnvironmentConfig {
    /// κ/2π in MHz.
    #[serde(default = "default_kappa_mhz")]
    pub kappa_mhz: f64,
    /// Internal loss rate γ.
    #[serde(default)]
    pub gamma: f64,
}

fn default_kappa_mhz() -> f64 {
    300.0
}

impl Default for EnvironmentConfig {
    fn default() -> Self {
        Self { kappa_mhz: default_kappa_mhz(), gamma: 0.0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SolverConfig {
    pub dim: usize,
    pub adaptive: bool,
    pub max_dim: usize,
    pub tail_tolerance: f64,
    /// Probe amplitude in units of κ.
    pub probe: f64,
    /// Input signal photon flux for the analytic gain (units of κ).
    pub signal_power: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self { dim: 80, adaptive: true, max_dim: 320, tail_tolerance: 1e-8, probe: 1e-3, signal_power: 0.0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct WignerConfig {
    pub points: usize,
    /// Half-width of the square phase-space window; chosen from the state
    /// when absent.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub extent: Option<f64>,
}

impl Default for WignerConfig {
    fn default() -> Self {
        Self { points: 161, extent: None }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub name: String,
    #[serde(default)]
    pub units: UnitSystem,
    /// Worker threads; 0 uses every logical core.
    #[serde(default)]
    pub threads: usize,
    /// Omit wall-clock timestamps so reruns are byte-identical.
    #[serde(default = "default_true")]
    pub deterministic: bool,
    #[serde(default)]
    pub environment: EnvironmentConfig,
    #[serde(default)]
    pub solver: SolverConfig,
    #[serde(default)]
    pub wigner: WignerConfig,
    pub observables: Vec<Observable>,
    pub models: Vec<ModelSpec>,
    pub axes: Vec<Axis>,
}

fn default_true() -> bool {
    true
}

impl SweepConfig {
    pub fn new(name: &str, models: Vec<ModelSpec>, axes: Vec<Axis>, observables: Vec<Observable>) -> Self {
        Self {
            name: name.into(),
            units: UnitSystem::Kappa,
            threads: 0,
            deterministic: true,
            environment: EnvironmentConfig::default(),
            solver: SolverConfig::default(),
            wigner: WignerConfig::default(),
            observables,
            models,
            axes,
        }
    }

    pub fn from_toml(text: &str) -> Result<Self, CliError> {
        let cfg: SweepConfig = toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serialises")
    }

    /// Grid cardinality: models × product of axis counts.
    pub fn cardinality(&self) -> usize {
        self.models.len() * self.axes.iter().map(|a| a.count).product::<usize>()
    }

    pub fn wants(&self, o: Observable) -> bool {
        self.observables.contains(&o)
    }

    pub fn has_axis(&self, name: AxisName) -> bool {
        self.axes.iter().any(|a| a.name == name)
    }

    /// Factor from the config's rate unit to κ.
    pub fn rate_scale(&self) -> f64 {
        match self.units {
            UnitSystem::Kappa => 1.0,
            UnitSystem::Si => 1.0 / self.environment.kappa_mhz,
        }
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let bad = |m: String| Err(CliError::Config(m));
        if self.name.trim().is_empty() {
            return bad("name must not be empty".into());
        }
        if self.axes.is_empty() {
            return bad("at least one axis is required".into());
        }
        if self.observables.is_empty() {
            return bad("observables must not be empty".into());
        }
        if self.models.is_empty() {
            return bad("at least one model is required".into());
        }
        if !(self.environment.kappa_mhz.is_finite() && self.environment.kappa_mhz > 0.0) {
            return bad(format!("environment.kappa_mhz must be positive, got {}", self.environment.kappa_mhz));
        }
        if !(self.environment.gamma.is_finite() && self.environment.gamma >= 0.0) {
            return bad(format!("environment.gamma must be >= 0, got {}", self.environment.gamma));
        }
        let s = &self.solver;
        if s.dim < 2 || s.max_dim < s.dim {
            return bad(format!("solver.dim must be >= 2 and <= max_dim (dim {}, max_dim {})", s.dim, s.max_dim));
        }
        if !(s.tail_tolerance > 0.0) {
            return bad("solver.tail_tolerance must be positive".into());
        }
        if !(s.probe > 0.0 && s.probe <= 1e-2) {
            return bad(format!("solver.probe must lie in (0, 0.01] (units of kappa), got {}", s.probe));
        }
        if !(s.signal_power >= 0.0 && s.signal_power.is_finite()) {
            return bad("solver.signal_power must be >= 0".into());
        }
        if self.wants(Observable::Wigner) && self.wigner.points < 2 {
            return bad("wigner.points must be >= 2".into());
        }
        if let Some(e) = self.wigner.extent {
            if !(e > 0.0 && e.is_finite()) {
                return bad("wigner.extent must be positive".into());
            }
        }
        let mut seen = BTreeSet::new();
        for a in &self.axes {
            if !seen.insert(a.name) {
                return bad(format!("axis {} given twice", a.name.name()));
            }
            if a.count == 0 {
                return bad(format!("axis {} needs count >= 1", a.name.name()));
            }
            if !(a.start.is_finite() && a.stop.is_finite()) {
                return bad(format!("axis {} has non-finite bounds", a.name.name()));
            }
            if a.spacing == Spacing::Log && (a.start == 0.0 || a.stop == 0.0 || a.start.signum() != a.stop.signum()) {
                return bad(format!("log axis {} needs nonzero bounds of equal sign", a.name.name()));
            }
            if a.name == AxisName::Gamma && a.start.min(a.stop) < 0.0 {
                return bad("gamma axis must be >= 0".into());
            }
        }
        if self.has_axis(AxisName::Omega) && (self.wants(Observable::Gain) || self.wants(Observable::Efficiency)) {
            return bad("the probe gain is measured at omega = 0; drop the omega axis or use gain_analytic".into());
        }
        let mut labels = BTreeSet::new();
        for m in &self.models {
            if !labels.insert(m.label.as_str()) {
                return bad(format!("model label {:?} used twice", m.label));
            }
            self.validate_model(m)?;
        }
        Ok(())
    }

    fn validate_model(&self, m: &ModelSpec) -> Result<(), CliError> {
        let bad = |msg: &str| Err(CliError::Config(format!("model {:?}: {msg}", m.label)));
        let nums = [m.delta, m.lambda, m.lambda_phase, m.kerr, m.cubic, m.cubic_per_lambda, m.quartic];
        if nums.iter().any(|x| !x.is_finite()) {
            return bad("non-finite coefficient");
        }
        let on_axis = |n| self.has_axis(n);
        match m.kind {
            ModelKind::Dpa => {
                if m.kerr != 0.0 || m.cubic != 0.0 || m.cubic_per_lambda != 0.0 || m.quartic != 0.0 {
                    return bad("DPA carries only delta and lambda; use RAW_COEFFICIENTS for nonlinear terms");
                }
                if on_axis(AxisName::Kerr) || on_axis(AxisName::Cubic) {
                    return bad("kerr/cubic axes need RAW_COEFFICIENTS");
                }
                if m.circuit.is_some() || !m.disable.is_empty() {
                    return bad("circuit fields are only valid for circuit models");
                }
            }
            ModelKind::RawCoefficients => {
                if m.circuit.is_some() || !m.disable.is_empty() {
                    return bad("circuit fields are only valid for circuit models");
                }
            }
            _ => {
                let Some(c) = m.circuit else {
                    return bad("circuit parameters are required");
                };
                if on_axis(AxisName::Kerr) || on_axis(AxisName::Cubic) {
                    return bad("kerr/cubic are fixed by the circuit; remove those axes");
                }
                if m.kerr != 0.0 || m.cubic != 0.0 || m.cubic_per_lambda != 0.0 || m.quartic != 0.0 || m.lambda_phase != 0.0 {
                    return bad("coefficients other than delta and lambda come from the circuit");
                }
                let pos = |x: f64| x.is_finite() && x > 0.0;
                if !pos(c.josephson_inductance_ph) || !pos(c.capacitance_pf) || !c.static_flux.is_finite() {
                    return bad("circuit needs positive josephson_inductance_ph, capacitance_pf and a finite static_flux");
                }
                match (m.kind, c.linear_inductance_ph) {
                    (ModelKind::StsInductor, None) => return bad("STS_INDUCTOR needs linear_inductance_ph"),
                    (ModelKind::StsInductor, Some(l)) if !pos(l) => return bad("linear_inductance_ph must be positive"),
                    (ModelKind::Jpa | ModelKind::StsJunction, Some(_)) => {
                        return bad("linear_inductance_ph is only used by STS_INDUCTOR")
                    }
                    _ => {}
                }
            }
        }
        Ok(())
    }
}

/// Environment-variable overrides, applied after the file and before the
/// command-line flags. Unknown `PARAMP_` keys are ignored.
pub fn apply_env_overrides<I>(cfg: &mut SweepConfig, vars: I) -> Result<(), CliError>
where
    I: IntoIterator<Item = (String, String)>,
{
    fn parse<T: std::str::FromStr>(key: &str, v: &str) -> Result<T, CliError> {
        v.trim().parse().map_err(|_| CliError::Config(format!("{key}: cannot parse {v:?}")))
    }
    for (key, value) in vars {
        let Some(name) = key.strip_prefix(ENV_PREFIX) else { continue };
        match name {
            "KAPPA_MHZ" => cfg.environment.kappa_mhz = parse(&key, &value)?,
            "GAMMA" => cfg.environment.gamma = parse(&key, &value)?,
            "DIM" => cfg.solver.dim = parse(&key, &value)?,
            "MAX_DIM" => cfg.solver.max_dim = parse(&key, &value)?,
            "ADAPTIVE" => cfg.solver.adaptive = parse(&key, &value)?,
            "TAIL_TOLERANCE" => cfg.solver.tail_tolerance = parse(&key, &value)?,
            "PROBE" => cfg.solver.probe = parse(&key, &value)?,
            "SIGNAL_POWER" => cfg.solver.signal_power = parse(&key, &value)?,
            "THREADS" => cfg.threads = parse(&key, &value)?,
            "DETERMINISTIC" => cfg.deterministic = parse(&key, &value)?,
            "WIGNER_POINTS" => cfg.wigner.points = parse(&key, &value)?,
            "UNITS" => {
                cfg.units = match value.trim() {
                    "kappa" => UnitSystem::Kappa,
                    "si" => UnitSystem::Si,
                    other => return Err(CliError::Config(format!("{key}: unknown unit system {other:?}"))),
                }
            }
            _ => {}
        }
    }
    cfg.validate()
}

pub const ENV_PREFIX: &str = "PARAMP_";
