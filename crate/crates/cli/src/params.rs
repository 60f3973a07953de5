//! Coefficient report for a physical circuit.

use std::fmt::Write as _;

use paramp_core::model::{self, CircuitCoefficients, CircuitSpec, Topology, Units};
use serde::Serialize;

use crate::config::UnitSystem;
use crate::CliError;

/// `cos F` below which the SQUID report carries a bias warning.
pub const NEAR_BIAS_WARNING: f64 = 0.05;

#[derive(Debug, Clone, Serialize)]
pub struct CoefficientReport {
    pub topology: &'static str,
    pub units: UnitSystem,
    pub kappa_mhz: f64,
    pub omega_a_ghz: f64,
    pub phi_zps: f64,
    pub modulation_depth: f64,
    pub pump_ghz: f64,
    /// Coefficients in the report's unit system.
    pub delta: f64,
    pub lambda: f64,
    pub kerr: f64,
    pub cubic: f64,
    pub quartic: f64,
    pub kerr_free: bool,
    pub warnings: Vec<String>,
}

/// Hz-scale frequency in GHz from an angular rate.
fn ghz(rad_s: f64) -> f64 {
    rad_s / (2.0 * std::f64::consts::PI) / 1e9
}

/// Evaluates the circuit map. A missing pump frequency is set for Δ = 0 and
/// a missing modulation depth defaults to the zero-point phase spread.
pub fn params_command(
    spec: &CircuitSpec,
    depth: Option<f64>,
    pump_ghz: Option<f64>,
    kappa_mhz: f64,
    units: UnitSystem,
) -> Result<CoefficientReport, CliError> {
    let mut warnings = Vec::new();
    if spec.topology == Topology::DcSquid {
        let cf = spec.static_flux.cos();
        if cf <= model::MIN_SQUID_BIAS {
            return Err(CliError::Model(paramp_core::Error::InvalidBias(cf)));
        }
        if cf < NEAR_BIAS_WARNING {
            warnings.push(format!(
                "invalid bias: cos F = {cf:.3e}; near F = pi/2 the SQUID reduces to a capacitor and the expansion breaks down"
            ));
        }
    }
    let mut s = *spec;
    let probe: CircuitCoefficients = model::circuit_coefficients(&s)?;
    s.modulation_depth = depth.unwrap_or(probe.phi_zps);
    s.pump_frequency = match pump_ghz {
        Some(f) => 2.0 * std::f64::consts::PI * f * 1e9,
        None => model::pump_for_detuning(&s, 0.0)?.pump_frequency,
    };
    let cc = model::circuit_coefficients(&s)?;
    let u = Units::from_kappa_mhz(kappa_mhz)?;
    let conv = |x: f64| match units {
        UnitSystem::Kappa => u.to_internal(x),
        UnitSystem::Si => x / (2.0 * std::f64::consts::PI) / 1e6,
    };
    let c = cc.coefficients;
    Ok(CoefficientReport {
        topology: spec.topology.name(),
        units,
        kappa_mhz,
        omega_a_ghz: ghz(cc.omega_a),
        phi_zps: cc.phi_zps,
        modulation_depth: s.modulation_depth,
        pump_ghz: ghz(s.pump_frequency),
        delta: conv(c.delta),
        lambda: conv(c.lambda.re),
        kerr: conv(c.kerr),
        cubic: conv(c.cubic),
        quartic: conv(c.quartic),
        kerr_free: cc.is_kerr_free(),
        warnings,
    })
}

impl CoefficientReport {
    pub fn human(&self) -> String {
        let unit = match self.units {
            UnitSystem::Kappa => "kappa".to_string(),
            UnitSystem::Si => "MHz".to_string(),
        };
        let mut s = String::new();
        let _ = writeln!(s, "topology:         {}", self.topology);
        let _ = writeln!(s, "omega_a/2pi:      {:.6} GHz", self.omega_a_ghz);
        let _ = writeln!(s, "pump/2pi:         {:.6} GHz", self.pump_ghz);
        let _ = writeln!(s, "Phi_zps/phi0:     {:.6e}", self.phi_zps);
        let _ = writeln!(s, "modulation depth: {:.6e}", self.modulation_depth);
        let _ = writeln!(s, "kappa/2pi:        {} MHz", self.kappa_mhz);
        for (name, v) in [
            ("Delta", self.delta),
            ("lambda", self.lambda),
            ("K", self.kerr),
            ("Lambda", self.cubic),
            ("zeta", self.quartic),
        ] {
            let _ = writeln!(s, "{name:<17} {v:.6e} {unit}");
        }
        let _ = writeln!(s, "Kerr-free:        {}", self.kerr_free);
        for w in &self.warnings {
            let _ = writeln!(s, "warning: {w}");
        }
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use paramp_core::model::BesselMode;
    use std::f64::consts::FRAC_PI_2;

    fn spec(topology: Topology, flux: f64) -> CircuitSpec {
        CircuitSpec {
            topology,
            josephson_inductance: 80e-12,
            linear_inductance: (topology == Topology::StsInductor).then_some(100e-12),
            total_capacitance: 4e-12,
            static_flux: flux,
            modulation_depth: 0.0,
            pump_frequency: 0.0,
            bessel: BesselMode::Exact,
        }
    }

    #[test]
    fn sts_inductor_is_kerr_free_at_minus_half_pi() {
        let r = params_command(&spec(Topology::StsInductor, -FRAC_PI_2), None, None, 300.0, UnitSystem::Kappa).unwrap();
        assert!(r.kerr_free);
        assert!(r.human().contains("Kerr-free:        true"));
        assert!(r.delta.abs() < 1e-9);
    }

    #[test]
    fn junction_variant_is_never_kerr_free() {
        for f in [-FRAC_PI_2, 0.3] {
            let r = params_command(&spec(Topology::StsJunction, f), None, None, 300.0, UnitSystem::Si).unwrap();
            assert!(!r.kerr_free);
        }
    }

    #[test]
    fn squid_near_half_pi_warns() {
        let r = params_command(&spec(Topology::DcSquid, FRAC_PI_2 - 0.01), None, None, 300.0, UnitSystem::Kappa).unwrap();
        assert!(r.warnings.iter().any(|w| w.contains("invalid bias")));
        assert!(params_command(&spec(Topology::DcSquid, FRAC_PI_2), None, None, 300.0, UnitSystem::Kappa).is_err());
    }
}
