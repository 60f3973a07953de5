//! Rotating-frame Hamiltonians and the circuit-to-coefficient maps for the
//! three device topologies.
//!
//! Circuit energies are carried in angular-frequency units (E/ħ, rad/s).
//! [`Units`] rescales them to multiples of κ.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fock::{HilbertSpace, Operator};

/// CODATA 2018 constants. `e` and `h` are exact in the 2019 SI.
pub mod constants {
    use std::f64::consts::PI;

    pub const VERSION: &str = "CODATA 2018";
    pub const ELEMENTARY_CHARGE: f64 = 1.602_176_634e-19;
    pub const PLANCK: f64 = 6.626_070_15e-34;
    pub const HBAR: f64 = PLANCK / (2.0 * PI);
    /// Reduced flux quantum φ0 = ħ/2e.
    pub const REDUCED_FLUX_QUANTUM: f64 = HBAR / (2.0 * ELEMENTARY_CHARGE);
}

/// Coefficients of
/// `Δ a†a + (λ/2) a†² + (λ*/2) a² + K a†²a² + Λ (a†³a + a†a³) + ζ (a†⁴ + a⁴)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HamiltonianCoefficients {
    pub delta: f64,
    pub lambda: Complex64,
    pub kerr: f64,
    pub cubic: f64,
    pub quartic: f64,
}

impl Default for HamiltonianCoefficients {
    fn default() -> Self {
        Self { delta: 0.0, lambda: Complex64::new(0.0, 0.0), kerr: 0.0, cubic: 0.0, quartic: 0.0 }
    }
}

impl HamiltonianCoefficients {
    /// Ideal degenerate parametric amplifier with real drive.
    pub fn dpa(delta: f64, lambda: f64) -> Self {
        Self { delta, lambda: Complex64::new(lambda, 0.0), ..Self::default() }
    }

    pub fn with_kerr(mut self, kerr: f64) -> Self {
        self.kerr = kerr;
        self
    }

    pub fn with_cubic(mut self, cubic: f64) -> Self {
        self.cubic = cubic;
        self
    }

    pub fn with_quartic(mut self, quartic: f64) -> Self {
        self.quartic = quartic;
        self
    }

    pub fn with_lambda(mut self, lambda: Complex64) -> Self {
        self.lambda = lambda;
        self
    }

    pub fn is_finite(&self) -> bool {
        self.delta.is_finite()
            && self.lambda.re.is_finite()
            && self.lambda.im.is_finite()
            && self.kerr.is_finite()
            && self.cubic.is_finite()
            && self.quartic.is_finite()
    }

    /// Divides every coefficient by `scale`.
    pub fn scaled(&self, scale: f64) -> Self {
        Self {
            delta: self.delta / scale,
            lambda: self.lambda / scale,
            kerr: self.kerr / scale,
            cubic: self.cubic / scale,
            quartic: self.quartic / scale,
        }
    }
}

/// Builds the truncated Hamiltonian directly from ladder matrix elements.
///
/// Every term is normal ordered, so the element formulas coincide with the
/// product of truncated ladder matrices.
pub fn build_hamiltonian(coeffs: &HamiltonianCoefficients, space: HilbertSpace) -> Operator {
    let dim = space.dim();
    let mut h = DMatrix::<Complex64>::zeros(dim, dim);
    let c = |x: f64| Complex64::new(x, 0.0);
    for n in 0..dim {
        let nf = n as f64;
        h[(n, n)] += c(coeffs.delta * nf + coeffs.kerr * nf * (nf - 1.0));
        if n + 2 < dim {
            let raise2 = ((nf + 1.0) * (nf + 2.0)).sqrt();
            // ⟨n+2| (λ/2) a†² + Λ a†³a |n⟩
            let up = coeffs.lambda * 0.5 * raise2 + c(coeffs.cubic * nf * raise2);
            h[(n + 2, n)] += up;
            h[(n, n + 2)] += up.conj();
        }
        if n + 4 < dim {
            let raise4 = ((nf + 1.0) * (nf + 2.0) * (nf + 3.0) * (nf + 4.0)).sqrt();
            h[(n + 4, n)] += c(coeffs.quartic * raise4);
            h[(n, n + 4)] += c(coeffs.quartic * raise4);
        }
    }
    Operator::from_matrix(space, h).expect("shape matches space")
}

/// Fourier components of `E_J cos(F + δf cos ω_p t)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct JosephsonFourierEnergies {
    pub e0: f64,
    pub e1: f64,
    pub e2: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BesselMode {
    /// J_0, J_1, J_2 evaluated exactly.
    #[default]
    Exact,
    /// Leading order in δf: J_0 ≈ 1, J_1 ≈ δf/2, J_2 ≈ δf²/8.
    SmallDepth,
}

pub fn josephson_fourier_energies(
    e_j: f64,
    static_flux: f64,
    delta_f: f64,
    mode: BesselMode,
) -> JosephsonFourierEnergies {
    let (cf, sf) = (static_flux.cos(), static_flux.sin());
    match mode {
        BesselMode::Exact => JosephsonFourierEnergies {
            e0: e_j * libm::j0(delta_f) * cf,
            e1: -2.0 * e_j * libm::j1(delta_f) * sf,
            e2: -2.0 * e_j * libm::jn(2, delta_f) * cf,
        },
        BesselMode::SmallDepth => JosephsonFourierEnergies {
            e0: e_j * cf,
            e1: -e_j * delta_f * sf,
            e2: -(e_j * delta_f * delta_f * cf) / 4.0,
        },
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Topology {
    DcSquid,
    StsInductor,
    StsJunction,
}

impl Topology {
    pub fn name(&self) -> &'static str {
        match self {
            Topology::DcSquid => "dc_squid",
            Topology::StsInductor => "sts_inductor",
            Topology::StsJunction => "sts_junction",
        }
    }
}

/// Physical circuit parameters in SI units (henries, farads, radians, rad/s).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CircuitSpec {
    pub topology: Topology,
    pub josephson_inductance: f64,
    #[serde(default)]
    pub linear_inductance: Option<f64>,
    pub total_capacitance: f64,
    pub static_flux: f64,
    pub modulation_depth: f64,
    pub pump_frequency: f64,
    #[serde(default)]
    pub bessel: BesselMode,
}

impl CircuitSpec {
    pub fn validate(&self) -> Result<()> {
        let positive = |x: f64, what: &str| {
            if x.is_finite() && x > 0.0 {
                Ok(())
            } else {
                Err(Error::InvalidParameter(format!("{what} must be positive, got {x}")))
            }
        };
        positive(self.josephson_inductance, "josephson_inductance")?;
        positive(self.total_capacitance, "total_capacitance")?;
        if self.topology == Topology::StsInductor {
            match self.linear_inductance {
                Some(l) => positive(l, "linear_inductance")?,
                None => {
                    return Err(Error::InvalidParameter(
                        "sts_inductor requires linear_inductance".into(),
                    ))
                }
            }
        }
        if !(0.0..1.0).contains(&self.modulation_depth) {
            return Err(Error::InvalidParameter(format!(
                "modulation_depth must lie in [0, 1), got {}",
                self.modulation_depth
            )));
        }
        if !self.static_flux.is_finite() || !self.pump_frequency.is_finite() {
            return Err(Error::InvalidParameter("non-finite flux or pump frequency".into()));
        }
        Ok(())
    }

    pub fn energies(&self) -> CircuitEnergies {
        use constants::*;
        let phi0_sq = REDUCED_FLUX_QUANTUM * REDUCED_FLUX_QUANTUM;
        CircuitEnergies {
            e_j: phi0_sq / self.josephson_inductance / HBAR,
            e_c: ELEMENTARY_CHARGE * ELEMENTARY_CHARGE / (2.0 * self.total_capacitance) / HBAR,
            e_l: self.linear_inductance.map(|l| phi0_sq / l / HBAR),
        }
    }
}

/// Circuit energies in rad/s: `E_J = φ0²/L_J`, `E_C = e²/2C_Σ`, `E_L = φ0²/L`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CircuitEnergies {
    pub e_j: f64,
    pub e_c: f64,
    pub e_l: Option<f64>,
}

/// Result of a circuit-to-Hamiltonian map.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CircuitCoefficients {
    pub topology: Topology,
    /// Coefficients in rad/s. `delta` includes the `+2K` shift.
    pub coefficients: HamiltonianCoefficients,
    /// `ω_a − ω_p/2`, without the Kerr shift.
    pub raw_detuning: f64,
    /// `2K`.
    pub kerr_shift: f64,
    pub omega_a: f64,
    /// `Φ_zps/φ0 = 2 √(E_C/ω_a)`.
    pub phi_zps: f64,
    pub energies: CircuitEnergies,
    pub fourier: JosephsonFourierEnergies,
}

impl CircuitCoefficients {
    /// Kerr coefficient negligible relative to the charging energy.
    pub fn is_kerr_free(&self) -> bool {
        self.coefficients.kerr.abs() <= 1e-12 * self.energies.e_c
    }
}

fn zero_point_ratio(e_c: f64, omega_a: f64) -> f64 {
    2.0 * (e_c / omega_a).sqrt()
}

fn expect_topology(spec: &CircuitSpec, expected: Topology) -> Result<()> {
    if spec.topology != expected {
        return Err(Error::WrongTopology { expected: expected.name(), got: spec.topology.name() });
    }
    spec.validate()
}

/// Symmetrically threaded SQUIDs with a linear inductor in the centre branch.
pub fn sts_inductor_coefficients(spec: &CircuitSpec) -> Result<CircuitCoefficients> {
    expect_topology(spec, Topology::StsInductor)?;
    let energies = spec.energies();
    let e_l = energies.e_l.expect("validated");
    let stiffness = e_l + 2.0 * energies.e_j * spec.static_flux.cos();
    if stiffness <= 0.0 {
        return Err(Error::ImaginaryResonance(stiffness));
    }
    let omega_a = (8.0 * energies.e_c * stiffness).sqrt();
    let phi = zero_point_ratio(energies.e_c, omega_a);
    let (p2, p4) = (phi * phi, phi.powi(4));
    let fourier =
        josephson_fourier_energies(energies.e_j, spec.static_flux, spec.modulation_depth, spec.bessel);
    let kerr = -fourier.e0 * p4 / 2.0;
    let raw_detuning = omega_a - spec.pump_frequency / 2.0;
    Ok(CircuitCoefficients {
        topology: spec.topology,
        coefficients: HamiltonianCoefficients {
            delta: raw_detuning + 2.0 * kerr,
            lambda: Complex64::new(fourier.e1 * p2, 0.0),
            kerr,
            cubic: -fourier.e1 * p4 / 6.0,
            quartic: -fourier.e2 * p4 / 24.0,
        },
        raw_detuning,
        kerr_shift: 2.0 * kerr,
        omega_a,
        phi_zps: phi,
        energies,
        fourier,
    })
}

/// Single-loop symmetric DC SQUID.
/// Below this `cos F` the SQUID Josephson energy vanishes and the circuit
/// reduces to a capacitor.
pub const MIN_SQUID_BIAS: f64 = 1e-6;

pub fn squid_coefficients(spec: &CircuitSpec) -> Result<CircuitCoefficients> {
    expect_topology(spec, Topology::DcSquid)?;
    let cf = spec.static_flux.cos();
    if cf <= MIN_SQUID_BIAS {
        return Err(Error::InvalidBias(cf));
    }
    let energies = spec.energies();
    let omega_a = (8.0 * energies.e_c * 2.0 * energies.e_j * cf).sqrt();
    let phi = zero_point_ratio(energies.e_c, omega_a);
    let (p2, p4) = (phi * phi, phi.powi(4));
    let fourier =
        josephson_fourier_energies(energies.e_j, spec.static_flux, spec.modulation_depth, spec.bessel);
    let kerr = -fourier.e0 * p4 / 4.0;
    let raw_detuning = omega_a - spec.pump_frequency / 2.0;
    Ok(CircuitCoefficients {
        topology: spec.topology,
        coefficients: HamiltonianCoefficients {
            delta: raw_detuning + 2.0 * kerr,
            lambda: Complex64::new(fourier.e1 * p2 / 2.0, 0.0),
            kerr,
            cubic: -fourier.e1 * p4 / 12.0,
            quartic: -fourier.e2 * p4 / 48.0,
        },
        raw_detuning,
        kerr_shift: 2.0 * kerr,
        omega_a,
        phi_zps: phi,
        energies,
        fourier,
    })
}

/// Symmetrically threaded SQUIDs with a junction in the centre branch.
///
/// The centre junction contributes a flux-independent Kerr `−E_C/2`. The
/// drive and the cubic and quartic terms come from the same flux-modulated
/// outer branches as in the inductor variant, with the centre junction's
/// `E_J` taking the role of `E_L` in the resonance.
pub fn sts_junction_coefficients(spec: &CircuitSpec) -> Result<CircuitCoefficients> {
    expect_topology(spec, Topology::StsJunction)?;
    let energies = spec.energies();
    let stiffness = energies.e_j + 2.0 * energies.e_j * spec.static_flux.cos();
    if stiffness <= 0.0 {
        return Err(Error::ImaginaryResonance(stiffness));
    }
    let omega_a = (8.0 * energies.e_c * stiffness).sqrt();
    let phi = zero_point_ratio(energies.e_c, omega_a);
    let (p2, p4) = (phi * phi, phi.powi(4));
    let fourier =
        josephson_fourier_energies(energies.e_j, spec.static_flux, spec.modulation_depth, spec.bessel);
    let kerr = -energies.e_c / 2.0;
    let raw_detuning = omega_a - spec.pump_frequency / 2.0;
    Ok(CircuitCoefficients {
        topology: spec.topology,
        coefficients: HamiltonianCoefficients {
            delta: raw_detuning + 2.0 * kerr,
            lambda: Complex64::new(fourier.e1 * p2, 0.0),
            kerr,
            cubic: -fourier.e1 * p4 / 6.0,
            quartic: -fourier.e2 * p4 / 24.0,
        },
        raw_detuning,
        kerr_shift: 2.0 * kerr,
        omega_a,
        phi_zps: phi,
        energies,
        fourier,
    })
}

pub fn circuit_coefficients(spec: &CircuitSpec) -> Result<CircuitCoefficients> {
    match spec.topology {
        Topology::DcSquid => squid_coefficients(spec),
        Topology::StsInductor => sts_inductor_coefficients(spec),
        Topology::StsJunction => sts_junction_coefficients(spec),
    }
}

/// Simplified Kerr `−E_C cos F / 2` quoted for the inductor-STS; agrees with
/// the full expression only in sign structure and its zero at F = −π/2.
pub fn approximate_sts_kerr(e_c: f64, static_flux: f64) -> f64 {
    -e_c * static_flux.cos() / 2.0
}

/// First maximum of J_1; the drive is monotone in δf below it.
const J1_FIRST_MAX: f64 = 1.841_183_781_340_659;

/// Modulation depth that produces drive magnitude `target_lambda` (rad/s).
pub fn modulation_for_drive(spec: &CircuitSpec, target_lambda: f64) -> Result<CircuitSpec> {
    let target = target_lambda.abs();
    let drive_at = |df: f64| -> Result<f64> {
        let mut s = *spec;
        s.modulation_depth = df;
        Ok(circuit_coefficients(&s)?.coefficients.lambda.norm())
    };
    let hi_limit = J1_FIRST_MAX.min(0.999);
    let max_drive = drive_at(hi_limit)?;
    if target > max_drive {
        return Err(Error::OutOfRange(format!(
            "drive {target:e} rad/s exceeds the largest reachable value {max_drive:e}"
        )));
    }
    let (mut lo, mut hi) = (0.0, hi_limit);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if drive_at(mid)? < target {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-15 * hi.max(1e-300) {
            break;
        }
    }
    let mut out = *spec;
    out.modulation_depth = 0.5 * (lo + hi);
    Ok(out)
}

/// Pump frequency for a requested effective detuning `Δ = ω_a − ω_p/2 + 2K`.
pub fn pump_for_detuning(spec: &CircuitSpec, target_delta: f64) -> Result<CircuitSpec> {
    let cc = circuit_coefficients(spec)?;
    let mut out = *spec;
    out.pump_frequency = 2.0 * (cc.omega_a + cc.kerr_shift - target_delta);
    Ok(out)
}

/// Conversion between SI angular frequencies and the internal κ units.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Units {
    /// κ in rad/s.
    pub kappa: f64,
}

impl Units {
    pub fn new(kappa_rad_s: f64) -> Result<Self> {
        if !(kappa_rad_s.is_finite() && kappa_rad_s > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "reference rate must be positive, got {kappa_rad_s}"
            )));
        }
        Ok(Self { kappa: kappa_rad_s })
    }

    /// From κ/2π in MHz.
    pub fn from_kappa_mhz(kappa_over_2pi_mhz: f64) -> Result<Self> {
        Self::new(2.0 * PI * kappa_over_2pi_mhz * 1e6)
    }

    pub fn to_internal(&self, rad_s: f64) -> f64 {
        rad_s / self.kappa
    }

    pub fn to_si(&self, in_kappa: f64) -> f64 {
        in_kappa * self.kappa
    }

    pub fn coefficients_to_internal(&self, c: &HamiltonianCoefficients) -> HamiltonianCoefficients {
        c.scaled(self.kappa)
    }

    pub fn coefficients_to_si(&self, c: &HamiltonianCoefficients) -> HamiltonianCoefficients {
        c.scaled(1.0 / self.kappa)
    }
}

/// Circuit coefficients in κ units; the SI-side counterpart of
/// [`circuit_coefficients`].
pub fn si_to_internal(spec: &CircuitSpec, units: &Units) -> Result<HamiltonianCoefficients> {
    Ok(units.coefficients_to_internal(&circuit_coefficients(spec)?.coefficients))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_PI_2;

    const PF: f64 = 1e-12;
    const PH: f64 = 1e-12;

    fn sts(flux: f64, df: f64) -> CircuitSpec {
        CircuitSpec {
            topology: Topology::StsInductor,
            josephson_inductance: 80.0 * PH,
            linear_inductance: Some(100.0 * PH),
            total_capacitance: 4.0 * PF,
            static_flux: flux,
            modulation_depth: df,
            pump_frequency: 2.0 * 2.0 * PI * 8e9,
            bessel: BesselMode::Exact,
        }
    }

    fn squid(flux: f64, df: f64) -> CircuitSpec {
        CircuitSpec {
            topology: Topology::DcSquid,
            linear_inductance: None,
            total_capacitance: 2.0 * PF,
            ..sts(flux, df)
        }
    }

    /// Power series for J_n, independent of libm.
    fn bessel_series(n: u32, x: f64) -> f64 {
        let mut term = (x / 2.0).powi(n as i32) / (1..=n).map(|k| k as f64).product::<f64>();
        let mut sum = term;
        for k in 1..60 {
            term *= -(x * x / 4.0) / (k as f64 * (k + n) as f64);
            sum += term;
        }
        sum
    }

    #[test]
    fn zero_coefficients_give_zero_operator() {
        let h = build_hamiltonian(&HamiltonianCoefficients::default(), HilbertSpace::new(6).unwrap());
        assert_eq!(h.max_abs(), 0.0);
    }

    #[test]
    fn two_photon_matrix_element() {
        let c = HamiltonianCoefficients::dpa(0.0, 0.9);
        let h = build_hamiltonian(&c, HilbertSpace::new(3).unwrap());
        assert!((h.get(2, 0).re - 0.45 * 2f64.sqrt()).abs() < 1e-15);
        assert_eq!(h.get(2, 0).im, 0.0);
    }

    #[test]
    fn hamiltonian_matches_ladder_products() {
        let s = HilbertSpace::new(9).unwrap();
        let c = HamiltonianCoefficients {
            delta: 1.0,
            lambda: Complex64::new(0.5, 0.2),
            kerr: 0.01,
            cubic: 1e-4,
            quartic: 1e-5,
        };
        let h = build_hamiltonian(&c, s);
        assert!(h.hermiticity_defect() < 1e-14);

        let a = crate::fock::annihilation(s);
        let ad = a.adjoint();
        let cc = |x: f64| Complex64::new(x, 0.0);
        let terms = [
            ad.mul(&a).unwrap().scale(cc(c.delta)),
            ad.pow(2).scale(c.lambda * 0.5),
            a.pow(2).scale(c.lambda.conj() * 0.5),
            ad.pow(2).mul(&a.pow(2)).unwrap().scale(cc(c.kerr)),
            ad.pow(3).mul(&a).unwrap().scale(cc(c.cubic)),
            ad.mul(&a.pow(3)).unwrap().scale(cc(c.cubic)),
            ad.pow(4).scale(cc(c.quartic)),
            a.pow(4).scale(cc(c.quartic)),
        ];
        let mut reference = Operator::zeros(s);
        for t in &terms {
            reference = reference.add(t).unwrap();
        }
        let diff = (h.matrix() - reference.matrix()).iter().map(|z| z.norm()).fold(0.0, f64::max);
        assert!(diff < 1e-13, "diff {diff}");
    }

    #[test]
    fn fourier_energies_special_fluxes() {
        for df in [0.0, 0.05, 0.3] {
            let at_zero = josephson_fourier_energies(1.0, 0.0, df, BesselMode::Exact);
            assert_eq!(at_zero.e1, 0.0);
            let at_off = josephson_fourier_energies(1.0, -FRAC_PI_2, df, BesselMode::Exact);
            assert!(at_off.e0.abs() < 1e-16 && at_off.e2.abs() < 1e-16);
        }
    }

    #[test]
    fn fourier_energies_match_series() {
        let f = PI / 4.0;
        let e = josephson_fourier_energies(1.0, f, 0.1, BesselMode::Exact);
        assert!((e.e0 - bessel_series(0, 0.1) * f.cos()).abs() < 1e-14);
        assert!((e.e1 + 2.0 * bessel_series(1, 0.1) * f.sin()).abs() < 1e-14);
        assert!((e.e2 + 2.0 * bessel_series(2, 0.1) * f.cos()).abs() < 1e-14);
        let approx = josephson_fourier_energies(1.0, f, 0.1, BesselMode::SmallDepth);
        // J1(x) = (x/2)(1 − x²/8 + …)
        assert!((approx.e1 - e.e1).abs() < 1.3e-3 * e.e1.abs());
    }

    #[test]
    fn sts_kerr_free_point() {
        let cc = sts_inductor_coefficients(&sts(-FRAC_PI_2, 0.05)).unwrap();
        let scale = cc.energies.e_j * cc.phi_zps.powi(4);
        assert!(cc.coefficients.kerr.abs() <= 1e-15 * scale);
        assert!(cc.coefficients.quartic.abs() <= 1e-15 * scale);
        assert!(cc.is_kerr_free());
        assert!(cc.coefficients.lambda.re > 0.0);
        assert!(cc.coefficients.cubic < 0.0);
    }

    #[test]
    fn sts_no_pump_no_drive() {
        let cc = sts_inductor_coefficients(&sts(0.3, 0.0)).unwrap();
        assert_eq!(cc.coefficients.lambda.norm(), 0.0);
        assert_eq!(cc.coefficients.cubic, 0.0);
    }

    #[test]
    fn sts_figure_circuit_values() {
        use constants::*;
        // Direct evaluation of the closed forms for C = 4 pF, L_J = 80 pH, L = 100 pH.
        let e_c = ELEMENTARY_CHARGE.powi(2) / (2.0 * 4e-12) / HBAR;
        let e_l = REDUCED_FLUX_QUANTUM.powi(2) / 100e-12 / HBAR;
        let e_j = REDUCED_FLUX_QUANTUM.powi(2) / 80e-12 / HBAR;
        let omega_a = (8.0 * e_c * e_l).sqrt();
        let cc = sts_inductor_coefficients(&sts(-FRAC_PI_2, 0.02)).unwrap();
        assert!((cc.energies.e_c - e_c).abs() < 1e-9 * e_c);
        assert!((cc.energies.e_j - e_j).abs() < 1e-9 * e_j);
        assert!((cc.omega_a - omega_a).abs() < 1e-9 * omega_a);
        // E_C/2π ≈ 4.84 MHz, ω_a/2π ≈ 7.96 GHz
        assert!((e_c / (2.0 * PI) / 1e6 - 4.8427).abs() < 1e-3);
        assert!((omega_a / (2.0 * PI) / 1e9 - 7.9584).abs() < 1e-3);
        let phi2 = 4.0 * e_c / omega_a;
        let lambda = 2.0 * e_j * bessel_series(1, 0.02) * phi2;
        assert!((cc.coefficients.lambda.re - lambda).abs() < 1e-10 * lambda);
        assert!((cc.coefficients.cubic + lambda * phi2 / 6.0).abs() < 1e-10 * lambda * phi2);
    }

    #[test]
    fn sts_kerr_scales_with_cos_flux() {
        let k1 = sts_inductor_coefficients(&sts(0.4, 0.05)).unwrap();
        let k2 = sts_inductor_coefficients(&sts(1.1, 0.05)).unwrap();
        // ω_a depends on F as well, so compare K/φ⁴ which isolates E_J^(0).
        let r = (k1.coefficients.kerr / k1.phi_zps.powi(4)) / (k2.coefficients.kerr / k2.phi_zps.powi(4));
        assert!((r - 0.4f64.cos() / 1.1f64.cos()).abs() < 1e-12);
    }

    #[test]
    fn sts_imaginary_resonance() {
        let mut s = sts(PI, 0.05);
        s.linear_inductance = Some(1e-9);
        assert!(matches!(sts_inductor_coefficients(&s), Err(Error::ImaginaryResonance(_))));
    }

    #[test]
    fn squid_coefficients_signs_and_ratios() {
        let idle = squid_coefficients(&squid(PI / 4.0, 0.0)).unwrap();
        assert_eq!(idle.coefficients.lambda.norm(), 0.0);
        assert!(idle.coefficients.kerr < 0.0);

        let df = 0.05;
        let cc = squid_coefficients(&squid(PI / 4.0, df)).unwrap();
        let ratio = cc.coefficients.kerr / cc.coefficients.quartic;
        // K/ζ = (−E0 φ⁴/4)/(−E2 φ⁴/48) = 12 E0/E2 = 12 J0 cosF /(−2 J2 cosF) = −6 J0/J2
        assert!((ratio - (-6.0 * bessel_series(0, df) / bessel_series(2, df))).abs() < 1e-8 * ratio.abs());
        let cubic_over_kerr = (cc.coefficients.cubic / cc.coefficients.kerr).abs();
        // |Λ/K| = (φ⁴ 2 J1 sinF/12)/(φ⁴ J0 cosF/4) = (2/3)(J1/J0) tan F ≈ δf/3 tan F
        assert!((cubic_over_kerr - df / 3.0).abs() < 1e-3 * df);
    }

    #[test]
    fn squid_invalid_bias() {
        assert!(matches!(squid_coefficients(&squid(FRAC_PI_2, 0.05)), Err(Error::InvalidBias(_))));
        assert!(matches!(squid_coefficients(&squid(2.0, 0.05)), Err(Error::InvalidBias(_))));
    }

    #[test]
    fn squid_kerr_negative_across_admissible_flux() {
        for k in 1..40 {
            let f = -FRAC_PI_2 + PI * k as f64 / 40.0;
            let cc = squid_coefficients(&squid(f, 0.02)).unwrap();
            assert!(cc.coefficients.kerr < 0.0, "F = {f}");
        }
    }

    #[test]
    fn junction_sts_kerr_is_flux_independent() {
        let mut s = sts(0.0, 0.05);
        s.topology = Topology::StsJunction;
        s.linear_inductance = None;
        let e_c = s.energies().e_c;
        for f in [-FRAC_PI_2, -0.3, 0.0, 0.9] {
            s.static_flux = f;
            let cc = sts_junction_coefficients(&s).unwrap();
            assert_eq!(cc.coefficients.kerr, -e_c / 2.0);
            assert!(!cc.is_kerr_free());
        }
        let expected = -(constants::ELEMENTARY_CHARGE.powi(2) / (2.0 * 4e-12) / constants::HBAR) / 2.0;
        assert!((e_c / -2.0 - expected).abs() < 1e-12 * expected.abs());
    }

    #[test]
    fn topology_mismatch() {
        assert!(matches!(squid_coefficients(&sts(0.0, 0.0)), Err(Error::WrongTopology { .. })));
    }

    #[test]
    fn modulation_inversion_hits_target() {
        let base = sts(-FRAC_PI_2, 0.0);
        let units = Units::from_kappa_mhz(300.0).unwrap();
        let target = units.to_si(0.45);
        let tuned = modulation_for_drive(&base, target).unwrap();
        let got = circuit_coefficients(&tuned).unwrap().coefficients.lambda.norm();
        assert!((got - target).abs() < 1e-12 * target);
        let tuned = pump_for_detuning(&tuned, 0.0).unwrap();
        assert!(circuit_coefficients(&tuned).unwrap().coefficients.delta.abs() < 1e-3);
    }

    #[test]
    fn units_conversion() {
        let u = Units::from_kappa_mhz(300.0).unwrap();
        assert_eq!(u.kappa, 2.0 * PI * 3e8);
        for x in [1e-3, 0.45, 17.0] {
            assert!((u.to_internal(u.to_si(x)) - x).abs() <= 1e-12 * x);
        }
        assert!(Units::new(0.0).is_err());
        assert!(Units::new(-1.0).is_err());
        let e_j = squid(0.3, 0.0).energies().e_j;
        let phi0 = constants::REDUCED_FLUX_QUANTUM;
        assert!((e_j - phi0 * phi0 / 80e-12 / constants::HBAR).abs() < 1e-6 * e_j);
    }
}
