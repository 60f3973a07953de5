//! Configuration-driven sweeps and figure recipes on top of `paramp-core`.
//!
//! Rates are in units of κ internally; SI columns (MHz, i.e. rate / 2π) are
//! added at output time.

pub mod config;
pub mod output;
pub mod params;
pub mod recipes;
pub mod sweep;

use std::io;
use std::path::Path;

use paramp_core::grid::Grid2D;
use paramp_core::lindblad::{solve_model, wigner, EnvironmentParams, SolverSettings, WignerGrid};
use paramp_core::model::HamiltonianCoefficients;
use paramp_core::semiclassical::{stability_diagram, StabilityMap};
use serde::Serialize;

pub use config::{SweepConfig, UnitSystem};
pub use recipes::figure_recipe;
pub use sweep::{run_sweep, Dataset};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("unknown figure {0}")]
    UnknownFigure(String),
    #[error(transparent)]
    Model(#[from] paramp_core::Error),
    #[error(transparent)]
    Io(#[from] io::Error),
}

#[derive(Debug, Clone, Serialize)]
pub struct StabilityMeta<'a> {
    pub code_version: &'static str,
    pub delta_range: (f64, f64),
    pub lambda_range: (f64, f64),
    pub cubic: f64,
    pub gamma: f64,
    pub resolution: (usize, usize),
    pub warnings: &'a [String],
}

/// Computes a stability map and writes `stability.csv` and `stability.pgrd`.
pub fn stability_command(
    dir: &Path,
    delta_range: (f64, f64),
    lambda_range: (f64, f64),
    cubic: f64,
    gamma: f64,
    resolution: (usize, usize),
) -> Result<StabilityMap, CliError> {
    let env = EnvironmentParams::new(1.0, gamma)?;
    let map = stability_diagram(delta_range, lambda_range, cubic, &env, resolution)?;
    let grid = Grid2D::new(&map.deltas, &map.lambdas, map.counts.iter().map(|&c| c as f64).collect())?;
    std::fs::create_dir_all(dir)?;
    let meta = StabilityMeta {
        code_version: env!("CARGO_PKG_VERSION"),
        delta_range,
        lambda_range,
        cubic,
        gamma,
        resolution,
        warnings: &map.warnings,
    };
    let csv = io::BufWriter::new(std::fs::File::create(dir.join("stability.csv"))?);
    output::write_grid_csv(csv, &meta, &grid, ["delta[kappa]", "lambda[kappa]", "count"])?;
    grid.write_binary(io::BufWriter::new(std::fs::File::create(dir.join("stability.pgrd"))?))?;
    Ok(map)
}

#[derive(Debug, Clone, Serialize)]
pub struct WignerMeta {
    pub code_version: &'static str,
    pub coefficients: HamiltonianCoefficients,
    pub gamma: f64,
    pub dim: usize,
    pub tail: f64,
    pub residual: f64,
    pub normalization: f64,
    pub min_value: f64,
}

/// Steady-state Wigner function written as `wigner.csv` and `wigner.pgrd`.
pub fn wigner_command(
    dir: &Path,
    coeffs: &HamiltonianCoefficients,
    gamma: f64,
    settings: &SolverSettings,
    points: usize,
    extent: Option<f64>,
) -> Result<WignerMeta, CliError> {
    let env = EnvironmentParams::new(1.0, gamma)?;
    let solved = solve_model(coeffs, &env, settings, None)?;
    let grid = match extent {
        Some(e) => WignerGrid::square(e, points),
        None => WignerGrid::enclosing(solved.rho(), points),
    };
    let w = wigner(solved.rho(), &grid);
    let meta = WignerMeta {
        code_version: env!("CARGO_PKG_VERSION"),
        coefficients: *coeffs,
        gamma,
        dim: solved.dim,
        tail: solved.tail,
        residual: solved.state.relative_residual,
        normalization: w.normalization(),
        min_value: w.min_value(),
    };
    let g = Grid2D::from(&w);
    std::fs::create_dir_all(dir)?;
    let csv = io::BufWriter::new(std::fs::File::create(dir.join("wigner.csv"))?);
    output::write_grid_csv(csv, &meta, &g, ["x", "p", "W"])?;
    g.write_binary(io::BufWriter::new(std::fs::File::create(dir.join("wigner.pgrd"))?))?;
    Ok(meta)
}
