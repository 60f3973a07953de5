//! Pre-filled sweep configurations, one per figure dataset.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_3};

use crate::config::{
    Axis, AxisName, CircuitParams, ModelKind, ModelSpec, Observable, Spacing, SweepConfig, Term,
};
use crate::CliError;

pub const FIGURES: [&str; 10] = [
    "fig2a",
    "fig2b",
    "fig2cd",
    "fig3",
    "fig4a",
    "fig4a_inset",
    "fig4b",
    "figS_stability",
    "figS_bistable",
    "figS_lossy",
];

/// κ/2π used by every figure.
pub const KAPPA_MHZ: f64 = 300.0;

/// Fig. 2 nonlinearities: |K| = 1e-2 κ and Λ growing linearly to 2.36e-4 κ
/// at λ = 0.47 κ.
pub const FIG2_KERR: f64 = 1e-2;
pub const FIG2_CUBIC_PER_LAMBDA: f64 = 2.36e-4 / 0.47;
pub const FIG2_STAR_CUBIC: f64 = 2.25e-4;

/// Single-SQUID amplifier of the squeezing figure. The static flux is not
/// stated with the figure; π/3 gives |K| ≈ 8e-3 κ.
pub fn fig3_jpa() -> CircuitParams {
    CircuitParams {
        josephson_inductance_ph: 80.0,
        capacitance_pf: 2.0,
        linear_inductance_ph: None,
        static_flux: FRAC_PI_3,
        bessel: Default::default(),
    }
}

/// Kerr-free STS used for the gain figures.
pub fn fig4_sts() -> CircuitParams {
    CircuitParams {
        josephson_inductance_ph: 80.0,
        capacitance_pf: 4.0,
        linear_inductance_ph: Some(100.0),
        static_flux: -FRAC_PI_2,
        bessel: Default::default(),
    }
}

fn raw(label: &str, kerr: f64, cubic: f64, cubic_per_lambda: f64) -> ModelSpec {
    ModelSpec { kerr, cubic, cubic_per_lambda, ..ModelSpec::new(label, ModelKind::RawCoefficients) }
}

fn circuit(label: &str, kind: ModelKind, c: CircuitParams, disable: Vec<Term>) -> ModelSpec {
    ModelSpec { circuit: Some(c), disable, ..ModelSpec::new(label, kind) }
}

fn with_kappa(mut c: SweepConfig) -> SweepConfig {
    c.environment.kappa_mhz = KAPPA_MHZ;
    c
}

/// JPA variants of the gain figure, from nearly ideal to strongly nonlinear.
fn fig4_models() -> Vec<ModelSpec> {
    vec![
        ModelSpec::new("dpa", ModelKind::Dpa),
        raw("jpa_k1e-3", 1e-3, 0.0, 0.0),
        raw("jpa_k3e-3", 3e-3, 0.0, 0.0),
        raw("jpa_k1e-2", 1e-2, 0.0, 0.0),
        circuit("sts", ModelKind::StsInductor, fig4_sts(), vec![]),
    ]
}

pub fn figure_recipe(name: &str) -> Result<SweepConfig, CliError> {
    let lambda_47 = Axis::linear(AxisName::Lambda, 0.0, 0.47, 48);
    let cfg = match name {
        "fig2a" => SweepConfig::new(
            name,
            vec![
                raw("kerr_and_cubic", FIG2_KERR, 0.0, FIG2_CUBIC_PER_LAMBDA),
                raw("kerr_only", FIG2_KERR, 0.0, 0.0),
                raw("cubic_only", 0.0, 0.0, FIG2_CUBIC_PER_LAMBDA),
            ],
            vec![lambda_47],
            vec![Observable::Xi],
        ),
        "fig2b" => {
            let mut models = vec![raw("kerr", FIG2_KERR, 0.0, 0.0), raw("kerr_free", 0.0, 0.0, 0.0)];
            for m in &mut models {
                m.lambda = 0.45;
            }
            SweepConfig::new(
                name,
                models,
                vec![Axis { spacing: Spacing::Log, ..Axis::linear(AxisName::Cubic, 1e-6, 1e-3, 31) }],
                vec![Observable::Xi],
            )
        }
        "fig2cd" => {
            let mut c = SweepConfig::new(
                name,
                vec![raw("kerr_free", 0.0, FIG2_STAR_CUBIC, 0.0), raw("cubic_free", FIG2_KERR, 0.0, 0.0)],
                vec![Axis::single(AxisName::Lambda, 0.45)],
                vec![Observable::Xi, Observable::Wigner],
            );
            c.wigner.points = 201;
            c
        }
        "fig3" => SweepConfig::new(
            name,
            vec![
                ModelSpec::new("dpa", ModelKind::Dpa),
                circuit("jpa", ModelKind::Jpa, fig3_jpa(), vec![]),
                circuit("jpa_kerr_free", ModelKind::Jpa, fig3_jpa(), vec![Term::Kerr]),
                circuit("jpa_cubic_free", ModelKind::Jpa, fig3_jpa(), vec![Term::Cubic]),
            ],
            vec![lambda_47],
            vec![Observable::GainDpa, Observable::Squeezing],
        ),
        "fig4a" => SweepConfig::new(name, fig4_models(), vec![lambda_47], vec![Observable::GainDpa, Observable::Gain]),
        "fig4a_inset" => {
            let mut c = SweepConfig::new(
                name,
                vec![
                    ModelSpec { lambda: 0.47, ..ModelSpec::new("dpa", ModelKind::Dpa) },
                    ModelSpec { lambda: 0.47, ..circuit("sts", ModelKind::StsInductor, fig4_sts(), vec![]) },
                ],
                vec![Axis::linear(AxisName::Omega, -0.2, 0.2, 81)],
                vec![Observable::GainDpa, Observable::GainAnalytic],
            );
            c.solver.signal_power = 1e-6;
            c
        }
        "fig4b" => SweepConfig::new(
            name,
            fig4_models(),
            vec![lambda_47],
            vec![Observable::GainDpa, Observable::Gain, Observable::Efficiency],
        ),
        "figS_stability" => SweepConfig::new(
            name,
            vec![raw("sts_sign", 0.0, -2e-4, 0.0)],
            vec![Axis::linear(AxisName::Delta, -2.0, 2.0, 81), Axis::linear(AxisName::Lambda, -3.0, 3.0, 121)],
            vec![Observable::StableCount],
        ),
        "figS_bistable" => SweepConfig::new(
            name,
            vec![circuit("sts", ModelKind::StsInductor, fig4_sts(), vec![])],
            vec![Axis::linear(AxisName::Lambda, 0.45, 0.472631, 2)],
            vec![Observable::FixedPoints, Observable::Xi],
        ),
        "figS_lossy" => SweepConfig::new(
            name,
            vec![circuit("sts", ModelKind::StsInductor, fig4_sts(), vec![])],
            vec![Axis::linear(AxisName::Gamma, 0.0, 0.3, 4), Axis::linear(AxisName::Lambda, 0.0, 0.48, 49)],
            vec![Observable::GainDpa, Observable::Gain, Observable::ZeroGainThreshold],
        ),
        other => {
            return Err(CliError::UnknownFigure(format!("{other} (known: {})", FIGURES.join(", "))));
        }
    };
    Ok(with_kappa(cfg))
}
