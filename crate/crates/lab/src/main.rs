use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use crossover_lab::run::run;
use crossover_lab::{Command, LabError, RunConfig, StatsVerb};

#[derive(Parser)]
#[command(name = "crossover", version, about = "Spectra of the white-noise Schrödinger operator on a segment")]
struct Cli {
    /// Configuration file (flat key = value); flags override it.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads, 0 for all cores; outputs do not depend on it.
    #[arg(long, global = true)]
    workers: Option<usize>,
    #[arg(long, alias = "seed", global = true)]
    master_seed: Option<u64>,
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Quadrature table of m, ν and n over an energy grid, or `oracle lattice`.
    Oracle {
        #[command(subcommand)]
        sub: Option<OracleSub>,
        #[command(flatten)]
        grid: GridArgs,
    },
    /// Eigenvalues, eigenfunctions and rescaled points per seed.
    Spectrum(SpectrumArgs),
    /// Finite-difference eigenvalues in the same window.
    Lattice(LatticeArgs),
    /// Statistical verdicts on batched runs.
    Stats {
        verb: Verb,
        #[command(flatten)]
        spectrum: SpectrumArgs,
        #[command(flatten)]
        sampling: SamplingArgs,
    },
    /// Limit-shape samples.
    Shape {
        #[arg(long = "E")]
        scale: Option<f64>,
        #[arg(long)]
        center: Option<f64>,
        #[command(flatten)]
        sampling: SamplingArgs,
    },
}

#[derive(Subcommand)]
enum OracleSub {
    /// Shooting and finite-difference eigenvalues side by side.
    Lattice(LatticeArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum Verb {
    Poisson,
    Minami,
    Wegner,
    Equilibrium,
    Shape,
}

#[derive(Args)]
struct GridArgs {
    #[arg(long = "E")]
    scale: Option<f64>,
    #[arg(long)]
    lambda_min: Option<f64>,
    #[arg(long)]
    lambda_max: Option<f64>,
    #[arg(long)]
    lambda_points: Option<usize>,
}

#[derive(Args)]
struct SpectrumArgs {
    #[arg(long = "L")]
    length: Option<f64>,
    #[arg(long = "E")]
    scale: Option<f64>,
    #[arg(long)]
    center: Option<f64>,
    /// Window half-width in mean spacings.
    #[arg(long = "half-width-h")]
    half_width: Option<f64>,
    /// Eigenvalue tolerance in energy units.
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long)]
    step: Option<f64>,
    #[arg(long)]
    seed_start: Option<u64>,
    #[arg(long = "seeds")]
    seed_count: Option<u64>,
}

#[derive(Args)]
struct LatticeArgs {
    #[command(flatten)]
    spectrum: SpectrumArgs,
    #[arg(long)]
    mesh: Option<f64>,
}

#[derive(Args)]
struct SamplingArgs {
    #[arg(long)]
    samples: Option<usize>,
    #[arg(long)]
    t_max: Option<f64>,
}

fn put<T: ToString>(cfg: &mut RunConfig, key: &str, value: Option<T>) -> Result<(), LabError> {
    match value {
        Some(v) => cfg.set(key, &v.to_string()),
        None => Ok(()),
    }
}

fn apply_spectrum(cfg: &mut RunConfig, a: &SpectrumArgs) -> Result<(), LabError> {
    put(cfg, "L_time_units", a.length)?;
    put(cfg, "E_scale", a.scale)?;
    put(cfg, "center_energy_units", a.center)?;
    put(cfg, "h_mean_spacings", a.half_width)?;
    put(cfg, "lambda_tol_energy_units", a.tol)?;
    put(cfg, "step_time_units", a.step)?;
    put(cfg, "seed_start", a.seed_start)?;
    put(cfg, "seed_count", a.seed_count)
}

fn apply_sampling(cfg: &mut RunConfig, a: &SamplingArgs) -> Result<(), LabError> {
    put(cfg, "samples", a.samples)?;
    put(cfg, "t_max_time_units", a.t_max)
}

fn build_config(cli: &Cli) -> Result<RunConfig, LabError> {
    let mut cfg = match &cli.config {
        Some(p) => RunConfig::from_text(&std::fs::read_to_string(p)?)?,
        None => RunConfig::default(),
    };
    if let Some(o) = &cli.out {
        cfg.out_dir = o.clone();
    }
    put(&mut cfg, "workers", cli.workers)?;
    put(&mut cfg, "master_seed", cli.master_seed)?;
    match &cli.command {
        Cmd::Oracle { sub: None, grid } => {
            cfg.command = Command::Oracle;
            put(&mut cfg, "E_scale", grid.scale)?;
            put(&mut cfg, "lambda_min_energy_units", grid.lambda_min)?;
            put(&mut cfg, "lambda_max_energy_units", grid.lambda_max)?;
            put(&mut cfg, "lambda_points", grid.lambda_points)?;
        }
        Cmd::Oracle { sub: Some(OracleSub::Lattice(a)), .. } | Cmd::Lattice(a) => {
            cfg.command = if matches!(cli.command, Cmd::Lattice(_)) { Command::Lattice } else { Command::OracleLattice };
            apply_spectrum(&mut cfg, &a.spectrum)?;
            put(&mut cfg, "mesh_time_units", a.mesh)?;
        }
        Cmd::Spectrum(a) => {
            cfg.command = Command::Spectrum;
            apply_spectrum(&mut cfg, a)?;
        }
        Cmd::Stats { verb, spectrum, sampling } => {
            cfg.command = Command::Stats(match verb {
                Verb::Poisson => StatsVerb::Poisson,
                Verb::Minami => StatsVerb::Minami,
                Verb::Wegner => StatsVerb::Wegner,
                Verb::Equilibrium => StatsVerb::Equilibrium,
                Verb::Shape => StatsVerb::Shape,
            });
            apply_spectrum(&mut cfg, spectrum)?;
            apply_sampling(&mut cfg, sampling)?;
        }
        Cmd::Shape { scale, center, sampling } => {
            cfg.command = Command::Shape;
            put(&mut cfg, "E_scale", *scale)?;
            put(&mut cfg, "center_energy_units", *center)?;
            apply_sampling(&mut cfg, sampling)?;
        }
    }
    cfg.validate()?;
    Ok(cfg)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let cfg = match build_config(&cli) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    match run(&cfg) {
        Ok(m) => {
            println!("{}: {} files in {}", cfg.command.as_str(), m.files.len(), cfg.out_dir.display());
            let failed = m.failed_tasks();
            if failed > 0 {
                eprintln!("{failed} of {} tasks failed; see manifest.json", m.tasks.len());
                return ExitCode::from(1);
            }
            ExitCode::SUCCESS
        }
        Err(LabError::Config(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
