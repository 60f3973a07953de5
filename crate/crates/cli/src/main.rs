use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use num_complex::Complex64;
use paramp_core::lindblad::SolverSettings;
use paramp_core::model::{BesselMode, CircuitSpec, HamiltonianCoefficients, Topology};
use paramp_cli::config::{apply_env_overrides, SweepConfig, UnitSystem};
use paramp_cli::{output, params, recipes, run_sweep, stability_command, wigner_command};

#[derive(Parser)]
#[command(name = "paramp", version, about = "Flux-pumped parametric amplifier simulations")]
struct Cli {
    /// Sweep configuration (TOML).
    #[arg(long, global = true, env = "PARAMP_CONFIG")]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, global = true, env = "PARAMP_OUT", default_value = "out")]
    out: PathBuf,
    /// Initial Fock dimension.
    #[arg(long, global = true)]
    dim: Option<usize>,
    /// Worker threads (0 = all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Unit system for rates given on the command line and in reports.
    #[arg(long, global = true, value_enum)]
    units: Option<UnitSystem>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Circuit-to-coefficient report.
    Params(ParamsArgs),
    /// Run the sweep described by --config.
    Sweep {
        /// Also write a matplotlib script next to the CSV.
        #[arg(long)]
        plot_script: bool,
    },
    /// Run a built-in figure recipe.
    Figure {
        name: String,
        /// Print the recipe as TOML instead of running it.
        #[arg(long)]
        dump: bool,
        #[arg(long)]
        plot_script: bool,
    },
    /// Pump-mode stability map.
    Stability {
        #[arg(long, value_parser = parse_pair::<f64>, default_value = "-2,2")]
        delta_range: (f64, f64),
        #[arg(long, value_parser = parse_pair::<f64>, default_value = "-3,3")]
        lambda_range: (f64, f64),
        /// Λ in units of κ.
        #[arg(long, default_value_t = -2e-4, allow_negative_numbers = true)]
        cubic: f64,
        #[arg(long, default_value_t = 0.0)]
        gamma: f64,
        #[arg(long, value_parser = parse_pair::<usize>, default_value = "81,121")]
        resolution: (usize, usize),
    },
    /// Steady-state Wigner function.
    Wigner(WignerArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum TopologyArg {
    DcSquid,
    StsInductor,
    StsJunction,
}

#[derive(Args)]
struct ParamsArgs {
    #[arg(long, value_enum)]
    topology: TopologyArg,
    /// Josephson inductance in pH.
    #[arg(long)]
    lj: f64,
    /// Total capacitance in pF.
    #[arg(long)]
    c: f64,
    /// Linear inductance in pH (sts-inductor).
    #[arg(long)]
    l: Option<f64>,
    /// Static flux F in radians.
    #[arg(long, allow_negative_numbers = true)]
    flux: f64,
    /// Modulation depth δf; defaults to Φ_zps/φ0.
    #[arg(long)]
    depth: Option<f64>,
    /// Pump frequency ω_p/2π in GHz; defaults to Δ = 0.
    #[arg(long)]
    pump_ghz: Option<f64>,
    #[arg(long, default_value_t = 300.0)]
    kappa_mhz: f64,
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
struct WignerArgs {
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    delta: f64,
    #[arg(long, default_value_t = 0.45)]
    lambda: f64,
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    kerr: f64,
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    cubic: f64,
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    quartic: f64,
    #[arg(long, default_value_t = 0.0)]
    gamma: f64,
    #[arg(long, default_value_t = 300.0)]
    kappa_mhz: f64,
    #[arg(long, default_value_t = 161)]
    points: usize,
    #[arg(long)]
    extent: Option<f64>,
}

fn parse_pair<T: std::str::FromStr>(s: &str) -> Result<(T, T), String> {
    let (a, b) = s.split_once(',').ok_or_else(|| format!("expected two comma-separated values, got {s:?}"))?;
    let p = |x: &str| x.trim().parse::<T>().map_err(|_| format!("cannot parse {x:?}"));
    Ok((p(a)?, p(b)?))
}

fn apply_overrides(cli: &Cli, cfg: &mut SweepConfig) -> Result<()> {
    apply_env_overrides(cfg, std::env::vars())?;
    if let Some(d) = cli.dim {
        cfg.solver.dim = d;
        cfg.solver.max_dim = cfg.solver.max_dim.max(d);
    }
    if let Some(t) = cli.threads {
        cfg.threads = t;
    }
    if let Some(u) = cli.units {
        cfg.units = u;
    }
    cfg.validate()?;
    Ok(())
}

fn run_config(cli: &Cli, mut cfg: SweepConfig, plot: bool) -> Result<()> {
    apply_overrides(cli, &mut cfg)?;
    let ds = run_sweep(&cfg)?;
    let path = output::write_dataset(&cli.out, &ds).with_context(|| format!("writing to {}", cli.out.display()))?;
    let failed = ds.texts("status").iter().filter(|s| s.as_str() != "ok").count();
    println!("{} rows -> {}", ds.rows.len(), path.display());
    if failed > 0 {
        eprintln!("{failed} row(s) carry an error status; see the status and message columns");
    }
    if plot {
        let x = cfg.axes.last().map(|a| format!("{}[kappa]", a.name.name())).unwrap_or_default();
        let ys: Vec<&str> = ds
            .metadata
            .columns
            .iter()
            .map(|c| c.name.as_str())
            .filter(|n| ["xi", "gain_db", "gain_dpa_db", "squeezing_db", "efficiency", "gain_analytic_db", "stable_count"].contains(n))
            .collect();
        let name = format!("{}.csv", cfg.name);
        std::fs::write(cli.out.join(format!("{}_plot.py", cfg.name)), output::plot_script(&name, &x, &ys))?;
    }
    Ok(())
}

fn run(cli: &Cli) -> Result<()> {
    let rate = |x: f64, kappa_mhz: f64| match cli.units.unwrap_or_default() {
        UnitSystem::Kappa => x,
        UnitSystem::Si => x / kappa_mhz,
    };
    match &cli.command {
        Command::Params(a) => {
            let topology = match a.topology {
                TopologyArg::DcSquid => Topology::DcSquid,
                TopologyArg::StsInductor => Topology::StsInductor,
                TopologyArg::StsJunction => Topology::StsJunction,
            };
            let spec = CircuitSpec {
                topology,
                josephson_inductance: a.lj * 1e-12,
                linear_inductance: a.l.map(|l| l * 1e-12),
                total_capacitance: a.c * 1e-12,
                static_flux: a.flux,
                modulation_depth: 0.0,
                pump_frequency: 0.0,
                bessel: BesselMode::Exact,
            };
            let r = params::params_command(&spec, a.depth, a.pump_ghz, a.kappa_mhz, cli.units.unwrap_or_default())?;
            if a.json {
                println!("{}", serde_json::to_string_pretty(&r)?);
            } else {
                print!("{}", r.human());
            }
            for w in &r.warnings {
                eprintln!("warning: {w}");
            }
        }
        Command::Sweep { plot_script } => {
            let Some(path) = &cli.config else { bail!("sweep needs --config <file> (or PARAMP_CONFIG)") };
            run_config(cli, SweepConfig::load(path)?, *plot_script)?;
        }
        Command::Figure { name, dump, plot_script } => {
            let cfg = recipes::figure_recipe(name)?;
            if *dump {
                print!("{}", cfg.to_toml());
            } else {
                run_config(cli, cfg, *plot_script)?;
            }
        }
        Command::Stability { delta_range, lambda_range, cubic, gamma, resolution } => {
            let map = stability_command(&cli.out, *delta_range, *lambda_range, *cubic, *gamma, *resolution)?;
            let mut hist = [0usize; 6];
            for &c in &map.counts {
                hist[c as usize] += 1;
            }
            println!("cells by count (1..5): {:?} -> {}", &hist[1..], cli.out.join("stability.csv").display());
            for w in &map.warnings {
                eprintln!("warning: {w}");
            }
        }
        Command::Wigner(a) => {
            let s = |x| rate(x, a.kappa_mhz);
            let coeffs = HamiltonianCoefficients::dpa(s(a.delta), 0.0)
                .with_lambda(Complex64::new(s(a.lambda), 0.0))
                .with_kerr(s(a.kerr))
                .with_cubic(s(a.cubic))
                .with_quartic(s(a.quartic));
            let mut settings = SolverSettings::default();
            if let Some(d) = cli.dim {
                settings.dim = d;
                settings.max_dim = settings.max_dim.max(d);
            }
            let m = wigner_command(&cli.out, &coeffs, s(a.gamma), &settings, a.points, a.extent)?;
            println!(
                "dim {} normalization {:.6} min {:.3e} -> {}",
                m.dim,
                m.normalization,
                m.min_value,
                cli.out.join("wigner.csv").display()
            );
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().filter_or("PARAMP_LOG", "warn")).init();
    let cli = Cli::parse();
    if let Some(t) = cli.threads.filter(|&t| t > 0) {
        let _ = rayon::ThreadPoolBuilder::new().num_threads(t).build_global();
    }
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
