//! End-to-end acceptance run: one verdict line per criterion, exit status 1
//! if any criterion fails. All randomness derives from master seed 1.

use std::fs;
use std::path::Path;
use std::time::{Duration, Instant};

use crossover_lab::config::{Command, RunConfig, StatsVerb};
use crossover_lab::run::run;
use crossover_lab::suite::bulk::{run_bulk, BulkConfig, PointSample};
use crossover_lab::suite::equilibrium::{equilibrium_reports, equilibrium_run, EquilibriumConfig};
use crossover_lab::suite::equivalence::{equivalence_reports, equivalence_run, EquivalenceConfig};
use crossover_lab::suite::fixtures::fixture_reports;
use crossover_lab::suite::localization::{localization_reports, localization_run};
use crossover_lab::suite::lyapunov::{lyapunov_reports, lyapunov_run, LyapunovConfig};
use crossover_lab::suite::minami::{minami_run, MinamiConfig};
use crossover_lab::suite::oracle::{dos_reports, rotation_report};
use crossover_lab::suite::poisson::{poisson_suite, wegner_check};
use crossover_lab::suite::shapes::{mixture_mass, mixture_reports, sample_limit_shapes, shape_suite, y_infinity_log_moments, y_infinity_reports};
use crossover_lab::{LabError, SeedSpan, TestReport};

const MASTER: u64 = 1;
const WORKERS: usize = 0;

struct Outcome {
    reports: Vec<TestReport>,
    budget: Option<Duration>,
    note: String,
}

fn outcome(reports: Vec<TestReport>) -> Outcome {
    Outcome { reports, budget: None, note: String::new() }
}

fn criterion(number: u32, name: &str, body: impl FnOnce() -> Result<Outcome, LabError>) -> bool {
    let start = Instant::now();
    let result = body();
    let elapsed = start.elapsed();
    match result {
        Ok(o) => {
            let in_time = o.budget.is_none_or(|b| elapsed <= b);
            let pass = in_time && o.reports.iter().all(|r| r.pass);
            let budget = o.budget.map(|b| format!(" (budget {:.0?})", b)).unwrap_or_default();
            println!("{} criterion {number:>2} {name}: {:.1?}{budget} {}", if pass { "PASS" } else { "FAIL" }, elapsed, o.note);
            for r in &o.reports {
                println!("      {}", r.line());
            }
            pass
        }
        Err(e) => {
            println!("FAIL criterion {number:>2} {name}: error {e}");
            false
        }
    }
}

fn span(count: u64) -> SeedSpan {
    SeedSpan { master: MASTER, start: 0, count }
}

fn same_outputs(a: &Path, b: &Path) -> Result<bool, LabError> {
    let ma = fs::read(a.join("manifest.json"))?;
    if ma != fs::read(b.join("manifest.json"))? {
        return Ok(false);
    }
    let m = crossover_lab::RunManifest::read(a)?;
    for f in &m.files {
        if fs::read(a.join(&f.name))? != fs::read(b.join(&f.name))? {
            return Ok(false);
        }
    }
    Ok(m.verify(a).is_empty() && m.verify(b).is_empty())
}

fn main() {
    let mut ok = Vec::new();

    ok.push(criterion(1, "rotation time asymptotics", || {
        Ok(Outcome { reports: vec![rotation_report(1e6, 3e-3)?], budget: Some(Duration::from_secs(1)), note: String::new() })
    }));

    ok.push(criterion(2, "density of states routes", || {
        Ok(Outcome { reports: dos_reports(&[0.0, 1.0, 5.0, 25.0], 1e-5, 1e4, 0.01)?, budget: Some(Duration::from_secs(10)), note: String::new() })
    }));

    ok.push(criterion(3, "Lyapunov triangle", || {
        let cfg = LyapunovConfig::new(1.0);
        let r = lyapunov_run(&cfg, MASTER, WORKERS)?;
        let note = format!(
            "quadrature {:.5} renewal {:.5}±{:.5} slope {:.5}±{:.5}",
            r.quadrature.value, r.renewal.value, r.renewal.std_error, r.slope.value, r.slope.std_error
        );
        Ok(Outcome { reports: lyapunov_reports(&r, span(cfg.rotation_paths + cfg.slope_paths)), budget: Some(Duration::from_secs(120)), note })
    }));

    ok.push(criterion(4, "shooting vs finite-difference oracle", || {
        let cfg = EquivalenceConfig::new(20);
        let r = equivalence_run(&cfg, MASTER, WORKERS)?;
        let note = format!("mesh {:e}, {} eigenvalues, refinement constant {:.3}", r.mesh, r.eigenvalues, r.refinement_constant);
        Ok(Outcome { reports: equivalence_reports(&r, span(20)), budget: Some(Duration::from_secs(600)), note })
    }));

    // criteria 5, 6 and the eigenfunction half of 10 share one Bulk run
    let bulk_cfg = BulkConfig { eigenpairs: true, keep_shapes: true, ..BulkConfig::new(400.0, 1.0, 1.0) };
    let bulk_start = Instant::now();
    let bulk = run_bulk(&bulk_cfg, MASTER, 0, 300, WORKERS);
    let bulk_time = bulk_start.elapsed();
    let bulk = bulk.and_then(|runs| {
        let failed = runs.iter().filter(|r| r.error.is_some()).count();
        if failed > 0 {
            return Err(LabError::Insufficient(format!("{failed} Bulk seeds failed")));
        }
        Ok(runs)
    });

    ok.push(criterion(5, "Wegner mean count", || {
        let runs = bulk.as_ref().map_err(|e| LabError::Insufficient(e.to_string()))?;
        let points = PointSample::from_runs(&bulk_cfg, runs)?;
        let secs = bulk_time.as_secs_f64();
        let runtime = TestReport::check("bulk_runtime_seconds", secs, 1800.0, secs <= 1800.0, 300, span(300));
        Ok(outcome(vec![wegner_check(&points, 0.2, span(300)), runtime]))
    }));

    ok.push(criterion(6, "Poisson suite", || {
        let runs = bulk.as_ref().map_err(|e| LabError::Insufficient(e.to_string()))?;
        let points = PointSample::from_runs(&bulk_cfg, runs)?;
        Ok(outcome(poisson_suite(&points, 0.01, span(300))?))
    }));

    ok.push(criterion(7, "Minami trend", || {
        let cfg = MinamiConfig::new(vec![200.0, 400.0, 800.0], 10_000);
        let (levels, reports) = minami_run(&cfg, MASTER, WORKERS)?;
        let note = levels
            .iter()
            .map(|l| format!("L {} k {}: {:.4}±{:.4} E[N²] {:.3}", l.length, l.boxes, l.pair_rate, l.pair_rate_se, l.second_moment))
            .collect::<Vec<_>>()
            .join("; ");
        Ok(Outcome { reports, budget: None, note })
    }));

    ok.push(criterion(8, "equilibrium decay", || {
        let cfg = EquilibriumConfig::new(100_000);
        let r = equilibrium_run(&cfg, MASTER, WORKERS)?;
        let note = format!("rate {:.4}±{:.4} over {} points, noise floor {:.4}", r.rate, r.rate_se, r.fitted_points, r.noise_floor);
        Ok(Outcome { reports: equilibrium_reports(&r, span(cfg.paths)), budget: None, note })
    }));

    ok.push(criterion(9, "localization rate", || {
        let cfg = BulkConfig::new(200.0, 1.0, 1.0);
        let r = localization_run(&cfg, 100, MASTER, WORKERS)?;
        let note = format!("mean rate {:.4}±{:.4} vs {:.4}", r.mean_rate, r.rate_se, r.target);
        Ok(Outcome { reports: localization_reports(&r, cfg.match_tol, span(r.seeds_used)), budget: None, note })
    }));

    ok.push(criterion(10, "shape samplers", || {
        let m = y_infinity_log_moments(8.0, 0.01, 10_000, MASTER, WORKERS)?;
        let mut reports = y_infinity_reports(&m, 8.0, span(10_000));
        reports.extend(mixture_reports(&mixture_mass(1.0, 1.0)?, 1e-5, span(0)));
        let runs = bulk.as_ref().map_err(|e| LabError::Insufficient(e.to_string()))?;
        let eigen: Vec<_> = runs.iter().flat_map(|r| r.pairs.iter().filter_map(|p| p.shape.clone())).take(150).collect();
        let limit = sample_limit_shapes(1.0, 1.0, 1000, 100.0, 0.01, 10, MASTER, WORKERS)?;
        let suite = shape_suite(&eigen, &limit, 0.01, 0.25, 100.0, span(300))?;
        // the second-moment comparison is the verdict; the rest is reported
        let note = suite[1..].iter().map(|r| format!("[{}]", r.line())).collect::<Vec<_>>().join(" ");
        reports.push(suite[0].clone());
        Ok(Outcome { reports, budget: None, note })
    }));

    ok.push(criterion(11, "noiseless fixtures", || Ok(outcome(fixture_reports(1.0 / 1024.0)?))));

    ok.push(criterion(12, "determinism across worker counts", || {
        let mut reports = Vec::new();
        for command in [Command::Spectrum, Command::OracleLattice, Command::Stats(StatsVerb::Wegner), Command::Shape] {
            let dirs: Vec<_> = (0..3).map(|_| tempfile::tempdir()).collect::<Result<_, _>>()?;
            for (dir, workers) in dirs.iter().zip([1, 2, 8]) {
                let cfg = RunConfig {
                    command,
                    master_seed: MASTER,
                    seed_count: 8,
                    length: 100.0,
                    half_width: 2.0,
                    mesh: 100.0 / 8192.0,
                    samples: 16,
                    t_max: 30.0,
                    workers,
                    out_dir: dir.path().to_path_buf(),
                    ..RunConfig::default()
                };
                run(&cfg)?;
            }
            let same = same_outputs(dirs[0].path(), dirs[1].path())? && same_outputs(dirs[0].path(), dirs[2].path())?;
            reports.push(TestReport::check(&format!("{}_byte_identical", command.as_str()), f64::from(u8::from(same)), 1.0, same, 3, span(8)));
        }
        Ok(outcome(reports))
    }));

    let failed = ok.iter().filter(|p| !**p).count();
    println!("{} of {} criteria pass", ok.len() - failed, ok.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
