//! Executes one configured command and writes its outputs plus the manifest.

use std::fs;
use std::path::Path;

use crossover_core::lattice::TridiagonalOperator;
use crossover_core::spectrum::{EigenSolveConfig, EigenSolver};
use crossover_core::Scale;
use serde::Serialize;

use crate::cache;
use crate::config::{Command, RunConfig, StatsVerb};
use crate::io::{fmt_f64, fmt_opt, shape_csv, table_csv};
use crate::manifest::{RunManifest, TaskStatus};
use crate::parallel::map_seeds;
use crate::report::{SeedSpan, TestReport};
use crate::suite::bulk::{run_bulk, BulkConfig, PointSample, SeedSpectrum};
use crate::suite::equilibrium::{equilibrium_reports, equilibrium_run, EquilibriumConfig};
use crate::suite::minami::{minami_run, MinamiConfig};
use crate::suite::poisson::{poisson_suite, wegner_check};
use crate::suite::shapes::{sample_limit_shapes, shape_suite};
use crate::LabError;

/// Files written for each eigenpair shape are capped to keep runs small.
pub const MAX_SHAPE_FILES: usize = 64;

fn seeds(cfg: &RunConfig) -> SeedSpan {
    SeedSpan { master: cfg.master_seed, start: cfg.seed_start, count: cfg.seed_count }
}

fn bulk_config(cfg: &RunConfig, eigenpairs: bool) -> BulkConfig {
    BulkConfig {
        scale: cfg.scale,
        step: cfg.step,
        lambda_tol: cfg.lambda_tol,
        match_tol: cfg.match_tol,
        eigenpairs,
        keep_shapes: eigenpairs,
        ..BulkConfig::new(cfg.length, cfg.center, cfg.half_width)
    }
}

fn statuses(runs: &[SeedSpectrum]) -> Vec<TaskStatus> {
    runs.iter()
        .map(|r| TaskStatus { index: r.index, seed: r.seed, ok: r.error.is_none(), message: r.error.clone().unwrap_or_default() })
        .collect()
}

#[derive(Serialize)]
struct ReportFile<'a, T: Serialize> {
    reports: &'a [TestReport],
    details: T,
}

fn json<T: Serialize>(value: &T) -> Result<Vec<u8>, LabError> {
    let mut out = serde_json::to_vec_pretty(value)?;
    out.push(b'\n');
    Ok(out)
}

fn lambda_grid(cfg: &RunConfig) -> Vec<f64> {
    let n = cfg.lambda_points;
    (0..n).map(|k| cfg.lambda_min + (cfg.lambda_max - cfg.lambda_min) * k as f64 / (n - 1) as f64).collect()
}

fn oracle(cfg: &RunConfig, m: &mut RunManifest, dir: &Path) -> Result<(), LabError> {
    let scale = Scale::new(cfg.scale)?;
    let mut rows = Vec::new();
    for l in lambda_grid(cfg) {
        let o = cache::global().oracle(l, scale, 1e-10)?;
        rows.push(vec![fmt_f64(l), fmt_f64(o.m), fmt_f64(o.nu), fmt_f64(o.n)]);
    }
    m.add_file(dir, "oracle.csv", &table_csv(&["lambda", "m", "nu", "n"], &rows)?)
}

fn write_spectra(cfg: &RunConfig, runs: &[SeedSpectrum], m: &mut RunManifest, dir: &Path) -> Result<(), LabError> {
    let solver = bulk_config(cfg, true).solver()?;
    let mut rows = Vec::new();
    let mut shapes = Vec::new();
    for r in runs {
        for (k, p) in r.pairs.iter().enumerate() {
            let (x, u) = solver.rescale_point(p.lambda, p.center);
            rows.push(vec![
                r.index.to_string(),
                r.seed.to_string(),
                fmt_f64(p.lambda),
                fmt_f64(p.center),
                fmt_f64(x),
                fmt_f64(u),
                fmt_opt(p.decay_rate),
                fmt_f64(p.match_defect),
                fmt_f64(p.second_moment),
            ]);
            if let Some(s) = &p.shape {
                if shapes.len() < MAX_SHAPE_FILES {
                    shapes.push((format!("shapes/shape_{}_{k}.csv", r.index), shape_csv(s)?));
                }
            }
        }
    }
    let header = ["task", "seed", "lambda", "center", "energy_rescaled", "center_rescaled", "decay_rate", "match_defect", "second_moment"];
    m.add_file(dir, "eigenvalues.csv", &table_csv(&header, &rows)?)?;
    if !shapes.is_empty() {
        fs::create_dir_all(dir.join("shapes"))?;
    }
    for (name, bytes) in shapes {
        m.add_file(dir, &name, &bytes)?;
    }
    Ok(())
}

fn spectrum(cfg: &RunConfig, m: &mut RunManifest, dir: &Path) -> Result<Vec<SeedSpectrum>, LabError> {
    let runs = run_bulk(&bulk_config(cfg, true), cfg.master_seed, cfg.seed_start, cfg.seed_count, cfg.workers)?;
    m.tasks = statuses(&runs);
    write_spectra(cfg, &runs, m, dir)?;
    Ok(runs)
}

struct LatticeSeed {
    status: TaskStatus,
    rows: Vec<Vec<String>>,
}

// The path is refined until its cells divide the mesh; the mesh actually
// used is the largest `L / 2^k` not above the requested one.
fn lattice(cfg: &RunConfig, m: &mut RunManifest, dir: &Path, compare: bool) -> Result<(), LabError> {
    let level = (cfg.length / cfg.mesh).log2().ceil().max(0.0) as u32;
    let mesh = cfg.length / (1u64 << level) as f64;
    let solver = EigenSolver::new(EigenSolveConfig {
        scale: Scale::new(cfg.scale)?,
        lambda_tol: cfg.lambda_tol,
        step: mesh,
        ..EigenSolveConfig::new(cfg.length, cfg.center, cfg.half_width)
    })?;
    let (lo, hi) = solver.window();
    let tol = solver.lambda_tol();
    let results = map_seeds(cfg.workers, cfg.master_seed, cfg.seed_start, cfg.seed_count, |index, seed| {
        let work = || -> Result<Vec<Vec<String>>, LabError> {
            let path = solver.generate_path(seed)?;
            let op = TridiagonalOperator::from_path(&path, mesh)?;
            let lat = op.eigenvalues_bisect(lo, hi, tol)?;
            if !compare {
                return Ok(lat.iter().map(|l| vec![index.to_string(), seed.to_string(), fmt_f64(*l)]).collect());
            }
            let shoot = solver.eigenvalues_in(&path)?;
            let n = lat.len().max(shoot.len());
            Ok((0..n)
                .map(|k| {
                    let cell = |v: &[f64]| v.get(k).map(|x| fmt_f64(*x)).unwrap_or_default();
                    vec![index.to_string(), seed.to_string(), k.to_string(), cell(&shoot), cell(&lat)]
                })
                .collect())
        };
        match work() {
            Ok(rows) => LatticeSeed { status: TaskStatus { index, seed, ok: true, message: String::new() }, rows },
            Err(e) => LatticeSeed { status: TaskStatus { index, seed, ok: false, message: e.to_string() }, rows: Vec::new() },
        }
    });
    let mut rows = Vec::new();
    for r in results {
        m.tasks.push(r.status);
        rows.extend(r.rows);
    }
    if compare {
        m.add_file(dir, "oracle_lattice.csv", &table_csv(&["task", "seed", "k", "shooting", "lattice"], &rows)?)
    } else {
        m.add_file(dir, "lattice_eigenvalues.csv", &table_csv(&["task", "seed", "lambda"], &rows)?)
    }
}

fn stats(cfg: &RunConfig, verb: StatsVerb, m: &mut RunManifest, dir: &Path) -> Result<(), LabError> {
    let span = seeds(cfg);
    let bytes = match verb {
        StatsVerb::Poisson | StatsVerb::Wegner | StatsVerb::Shape => {
            let runs = spectrum(cfg, m, dir)?;
            let bulk = bulk_config(cfg, true);
            let reports = match verb {
                StatsVerb::Wegner => vec![wegner_check(&PointSample::from_runs(&bulk, &runs)?, 0.1 * 2.0 * cfg.half_width, span)],
                StatsVerb::Poisson => poisson_suite(&PointSample::from_runs(&bulk, &runs)?, 0.01, span)?,
                _ => {
                    let eigen: Vec<_> = runs.iter().flat_map(|r| r.pairs.iter().filter_map(|p| p.shape.clone())).collect();
                    let limit = sample_limit_shapes(cfg.center / cfg.scale, cfg.scale, cfg.samples as u64, cfg.t_max, cfg.step, 10, cfg.master_seed, cfg.workers)?;
                    shape_suite(&eigen, &limit, 0.01, 0.25, cfg.t_max, span)?
                }
            };
            json(&ReportFile { reports: &reports, details: () })?
        }
        StatsVerb::Minami => {
            let mc = MinamiConfig {
                center: cfg.center,
                half_width: cfg.half_width,
                scale: cfg.scale,
                step: cfg.step,
                first_seed: cfg.seed_start,
                ..MinamiConfig::new(vec![cfg.length, 2.0 * cfg.length, 4.0 * cfg.length], cfg.seed_count)
            };
            let (levels, reports) = minami_run(&mc, cfg.master_seed, cfg.workers)?;
            json(&ReportFile { reports: &reports, details: levels })?
        }
        StatsVerb::Equilibrium => {
            let ec = EquilibriumConfig {
                lambda: cfg.center,
                scale: cfg.scale,
                times: (2..=(2.0 * cfg.t_max).floor() as usize).map(|k| 0.5 * k as f64).collect(),
                ..EquilibriumConfig::new(cfg.samples as u64)
            };
            let res = equilibrium_run(&ec, cfg.master_seed, cfg.workers)?;
            let reports = equilibrium_reports(&res, SeedSpan { master: cfg.master_seed, start: 0, count: ec.paths });
            json(&ReportFile { reports: &reports, details: res })?
        }
    };
    m.add_file(dir, "report.json", &bytes)
}

fn shape(cfg: &RunConfig, m: &mut RunManifest, dir: &Path) -> Result<(), LabError> {
    let limit = sample_limit_shapes(cfg.center / cfg.scale, cfg.scale, cfg.samples as u64, cfg.t_max, cfg.step, 10, cfg.master_seed, cfg.workers)?;
    let rows: Vec<Vec<String>> = limit
        .iter()
        .enumerate()
        .map(|(k, s)| vec![k.to_string(), fmt_f64(s.second_moment()), fmt_f64(s.inverse_participation())])
        .collect();
    m.add_file(dir, "limit_shapes.csv", &table_csv(&["sample", "second_moment", "inverse_participation"], &rows)?)?;
    if !limit.is_empty() {
        fs::create_dir_all(dir.join("shapes"))?;
    }
    for (k, s) in limit.iter().take(MAX_SHAPE_FILES).enumerate() {
        m.add_file(dir, &format!("shapes/limit_{k}.csv"), &shape_csv(s)?)?;
    }
    Ok(())
}

/// Runs `cfg`, writing every output under its `out_dir` and the manifest last.
pub fn run(cfg: &RunConfig) -> Result<RunManifest, LabError> {
    cfg.validate()?;
    let dir = cfg.out_dir.as_path();
    fs::create_dir_all(dir)?;
    let mut m = RunManifest::new(cfg);
    m.add_file(dir, "config.ini", cfg_text_without_location(cfg).as_bytes())?;
    match cfg.command {
        Command::Oracle => oracle(cfg, &mut m, dir)?,
        Command::Spectrum => {
            spectrum(cfg, &mut m, dir)?;
        }
        Command::Lattice => lattice(cfg, &mut m, dir, false)?,
        Command::OracleLattice => lattice(cfg, &mut m, dir, true)?,
        Command::Stats(verb) => stats(cfg, verb, &mut m, dir)?,
        Command::Shape => shape(cfg, &mut m, dir)?,
    }
    m.write(dir)?;
    Ok(m)
}

// The stored config reproduces the run from any location and worker count.
fn cfg_text_without_location(cfg: &RunConfig) -> String {
    RunConfig { workers: 0, out_dir: ".".into(), ..cfg.clone() }.to_text()
}
