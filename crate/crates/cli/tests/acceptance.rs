//! The acceptance suite: every criterion runs through the same path as the
//! command line, at its stated tolerances, and prints one verdict line.
//! Exits nonzero if any criterion fails.

mod common;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use critnls_cli::{run, Command, Experiment, ExperimentConfig, Request, RunManifest};
use critnls_core::verify::{ExperimentReport, Verdict};
use critnls_core::GridMode;

use common::{code, critnls, read_json, schema_errors, stderr};

/// The outcome of one criterion: named conditions and detail lines.
#[derive(Default)]
struct Outcome {
    conditions: Vec<(String, bool)>,
    details: Vec<String>,
    elapsed: Duration,
}

impl Outcome {
    fn require(&mut self, what: impl Into<String>, ok: bool) {
        self.conditions.push((what.into(), ok));
    }

    fn passed(&self) -> bool {
        !self.conditions.is_empty() && self.conditions.iter().all(|c| c.1)
    }

    /// Verdict, schema and the individual checks of a finished report.
    fn absorb(&mut self, report: &ExperimentReport, out: &Path) {
        self.require(format!("{} verdict pass", report.id), report.verdict == Verdict::Pass);
        let errors = schema_errors(&read_json(&out.join("report.json")));
        self.require(format!("{} report matches the schema", report.id), errors.is_empty());
        self.details.extend(errors);
        for c in &report.checks {
            let rel = match c.relation {
                critnls_core::verify::Relation::AtMost => "<=",
                critnls_core::verify::Relation::AtLeast => ">=",
            };
            self.details.push(format!(
                "{:<12} {}: {:.4e} {rel} {:.4e}",
                format!("{:?}", c.verdict).to_lowercase(),
                c.name,
                c.measured,
                c.threshold
            ));
        }
    }
}

struct Suite {
    root: PathBuf,
}

impl Suite {
    fn manifest(&self, command: Command, e: Experiment, name: &str) -> RunManifest {
        let req = Request { experiment: Some(e), out: Some(self.root.join(name)), ..Request::default() };
        RunManifest::resolve(command, req, &self.root).expect("manifest")
    }

    /// Run a manifest in-process; `inspect` checks the effective config.
    fn experiment(&self, o: &mut Outcome, m: &RunManifest, inspect: impl FnOnce(&ExperimentConfig, &mut Outcome)) {
        let cfg = m.load_config().expect("config");
        inspect(&cfg, o);
        let t = Instant::now();
        match run(m, false) {
            Ok(done) => {
                o.elapsed += t.elapsed();
                o.absorb(&done.report, &done.out);
            }
            Err(e) => {
                o.elapsed += t.elapsed();
                o.require(format!("{} ran: {e}", m.experiment), false);
            }
        }
    }
}

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-12 * b.abs().max(1.0)
}

fn decades(hi: f64, lo: f64) -> f64 {
    (hi / lo).log10()
}

fn propagator(s: &Suite, o: &mut Outcome) {
    let m = s.manifest(Command::Check, Experiment::Propagator, "propagator");
    s.experiment(o, &m, |c, o| {
        let ExperimentConfig::Propagator(c) = c else { unreachable!() };
        let g = &c.grids;
        o.require(
            "64^3 tensor grid, n = 3, L = 16",
            g.iter().any(|g| g.dim == 3 && g.mode == GridMode::FullTensor && g.points == 64 && g.extent == 16.0),
        );
        o.require("512-point radial grid, n = 7", g.iter().any(|g| g.dim == 7 && g.mode == GridMode::Radial && g.points == 512));
        o.require("tolerance 1e-6", close(c.tolerance, 1e-6));
    });
    let budget = Duration::from_secs(5) * 2;
    o.require(format!("runtime under 5 s per grid ({:.1?})", o.elapsed), o.elapsed < budget);
}

fn dispersive(s: &Suite, o: &mut Outcome) {
    let m = s.manifest(Command::Check, Experiment::Dispersive, "dispersive");
    s.experiment(o, &m, |c, o| {
        let ExperimentConfig::Dispersive(c) = c else { unreachable!() };
        o.require("n in {3, 7}", c.dims == vec![3, 7]);
        o.require("t over [1, 100]", c.t_min == 1.0 && c.t_max == 100.0);
        o.require("slope within 5% of -n/2", close(c.tolerance, 0.05));
    });
    o.require(format!("runtime under 30 s ({:.1?})", o.elapsed), o.elapsed < Duration::from_secs(30));
}

fn littlewood_paley(s: &Suite, o: &mut Outcome) {
    let m = s.manifest(Command::Check, Experiment::LittlewoodPaley, "littlewood-paley");
    s.experiment(o, &m, |c, o| {
        let ExperimentConfig::LittlewoodPaley(c) = c else { unreachable!() };
        o.require("at least 8 dyadic levels", c.levels.1 - c.levels.0 + 1 >= 8);
        o.require("Bernstein constants within a factor 4", close(c.bernstein_spread, 4.0));
    });
    o.require(format!("runtime under 60 s ({:.1?})", o.elapsed), o.elapsed < Duration::from_secs(60));
}

fn strichartz(s: &Suite, o: &mut Outcome) {
    // the energy-space estimate through the binary, exactly as a user would run it
    let out = s.root.join("strichartz");
    let t = Instant::now();
    let p = critnls(&s.root, &["check", "--experiment", "strichartz", "--n", "3", "--seeds", "20", "--out", out.to_str().unwrap()]);
    o.elapsed += t.elapsed();
    o.require("`check --experiment strichartz --n 3 --seeds 20` exits 0", code(&p) == 0);
    if code(&p) != 0 {
        o.details.push(stderr(&p));
    }
    match fs::read_to_string(out.join("report.json")) {
        Ok(text) => {
            let r = ExperimentReport::from_json(&text).expect("report");
            o.require("strichartz: 20 seeds", r.sweep.seeds.len() == 20);
            o.require("strichartz: 3 dyadic rescalings", r.sweep.schedule.len() == 3);
            o.require("strichartz: SVG written", out.join("plot.svg").exists());
            o.absorb(&r, &out);
        }
        Err(e) => o.require(format!("strichartz report written: {e}"), false),
    }
    let m = s.manifest(Command::Check, Experiment::ExoticStrichartz, "exotic-strichartz");
    s.experiment(o, &m, |c, o| {
        let ExperimentConfig::ExoticStrichartz(c) = c else { unreachable!() };
        o.require("exotic: 20 seeds, 3 rescalings", c.seeds.len() == 20 && c.rescalings.len() == 3);
        o.require(
            "exotic: n = 3 and n = 7 radial",
            c.grids.iter().any(|g| g.dim == 3) && c.grids.iter().any(|g| g.dim == 7 && g.mode == GridMode::Radial),
        );
        o.require("exotic: spread <= 10, invariance 1e-3", close(c.max_spread, 10.0) && close(c.invariance, 1e-3));
    });
    o.require(format!("runtime under 10 min ({:.1?})", o.elapsed), o.elapsed < Duration::from_secs(600));
}

fn nonlinear(s: &Suite, o: &mut Outcome) {
    let m = s.manifest(Command::Check, Experiment::NonlinearEstimate, "nonlinear-estimate");
    s.experiment(o, &m, |c, o| {
        let ExperimentConfig::NonlinearEstimate(c) = c else { unreachable!() };
        o.require("n in {7, 8} radial", c.dims == vec![7, 8]);
        o.require("20 seeds, spread <= 10", c.seeds.len() == 20 && close(c.max_spread, 10.0));
        o.require("band-decay slack 0.2", close(c.para.slack, 0.2));
    });
    o.require(format!("runtime under 10 min ({:.1?})", o.elapsed), o.elapsed < Duration::from_secs(600));
}

fn agreement(s: &Suite, o: &mut Outcome) {
    let m = s.manifest(Command::Check, Experiment::SolverAgreement, "solver-agreement");
    s.experiment(o, &m, |c, o| {
        let ExperimentConfig::SolverAgreement(c) = c else { unreachable!() };
        o.require("10 configurations in n in {3, 4}", c.cases.len() == 10 && c.cases.iter().all(|k| k.grid.dim == 3 || k.grid.dim == 4));
        o.require("discrepancy <= 1e-4, ratio < 0.5", close(c.tolerance, 1e-4) && close(c.max_ratio, 0.5));
    });
    o.require(format!("runtime under 10 min ({:.1?})", o.elapsed), o.elapsed < Duration::from_secs(600));
}

fn small_data(s: &Suite, o: &mut Outcome) {
    let m = s.manifest(Command::Check, Experiment::SmallData, "small-data");
    s.experiment(o, &m, |c, o| {
        let ExperimentConfig::SmallData(c) = c else { unreachable!() };
        o.require("eta schedule spans 2 decades", decades(c.etas[0], c.etas[c.etas.len() - 1]) >= 2.0 - 1e-9);
        o.require("spread <= 3", close(c.max_spread, 3.0));
    });
    o.require(format!("runtime under 10 min ({:.1?})", o.elapsed), o.elapsed < Duration::from_secs(600));
}

fn lipschitz(s: &Suite, o: &mut Outcome) {
    let m = s.manifest(Command::Stability, Experiment::Lipschitz, "lipschitz");
    s.experiment(o, &m, |c, o| {
        let ExperimentConfig::Lipschitz(c) = c else { unreachable!() };
        o.require("n = 3", c.cases.iter().all(|k| k.grid.dim == 3) && !c.cases.is_empty());
        o.require("slope in [0.9, 1.1] over 3 decades", c.lipschitz.slope == (0.9, 1.1) && close(c.lipschitz.min_decades, 3.0));
        o.require("eps schedule spans 3 decades", decades(c.eps[0], c.eps[c.eps.len() - 1]) >= 3.0 - 1e-9);
    });
    o.require(format!("runtime under 10 min ({:.1?})", o.elapsed), o.elapsed < Duration::from_secs(600));
}

fn stability(s: &Suite, o: &mut Outcome) {
    let m = s.manifest(Command::Stability, Experiment::Stability, "stability");
    s.experiment(o, &m, |c, o| {
        let ExperimentConfig::Stability(c) = c else { unreachable!() };
        let dims: Vec<_> = c.cases.iter().map(|k| (k.grid.dim, k.grid.mode)).collect();
        o.require("n = 3 and n = 7 radial", dims.contains(&(3, GridMode::Radial)) && dims.contains(&(7, GridMode::Radial)));
        o.require("eps schedule spans 2 decades", decades(c.eps[0], c.eps[c.eps.len() - 1]) >= 2.0 - 1e-9);
    });
    o.require(format!("runtime under 30 min ({:.1?})", o.elapsed), o.elapsed < Duration::from_secs(1800));
}

fn scattering(s: &Suite, o: &mut Outcome) {
    let m = s.manifest(Command::Scatter, Experiment::Scattering, "scattering");
    s.experiment(o, &m, |c, o| {
        let ExperimentConfig::Scattering(c) = c else { unreachable!() };
        o.require("n = 3, T = 20", c.grid.dim == 3 && c.horizon == 20.0);
        o.require("final increment < 1e-3 of the first", close(c.tail_ratio, 1e-3));
        o.require("continuity over 2 decades", decades(c.deltas[0], c.deltas[c.deltas.len() - 1]) >= 2.0 - 1e-9);
    });
    o.require(format!("runtime under 10 min ({:.1?})", o.elapsed), o.elapsed < Duration::from_secs(600));
}

fn files(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut v: Vec<_> = fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap())
        .map(|e| (e.file_name().to_string_lossy().into_owned(), fs::read(e.path()).unwrap()))
        .collect();
    v.sort();
    v
}

/// Rerun finished manifests (forced, same directory) and compare every artifact.
fn determinism(s: &Suite, o: &mut Outcome) {
    let manifests = [
        s.manifest(Command::Check, Experiment::SolverAgreement, "solver-agreement"),
        s.manifest(Command::Scatter, Experiment::Scattering, "scattering"),
        s.manifest(Command::Solve, Experiment::Solve, "solve"),
    ];
    for m in &manifests {
        let t = Instant::now();
        let before = if m.out.exists() {
            files(&m.out)
        } else {
            run(m, false).expect("first run");
            files(&m.out)
        };
        let again = run(m, true);
        o.elapsed += t.elapsed();
        match again {
            Ok(_) => {
                let after = files(&m.out);
                let names: Vec<&str> = after.iter().map(|f| f.0.as_str()).collect();
                o.require(format!("{}: {} bit-identical", m.experiment, names.join(", ")), before == after);
            }
            Err(e) => o.require(format!("{}: rerun failed: {e}", m.experiment), false),
        }
    }
}

fn main() -> ExitCode {
    let dir = tempfile::tempdir().expect("tempdir");
    let suite = Suite { root: dir.path().to_path_buf() };
    type Criterion = (usize, &'static str, fn(&Suite, &mut Outcome));
    let criteria: [Criterion; 11] = [
        (1, "propagator exactness", propagator),
        (2, "dispersive decay", dispersive),
        (3, "Littlewood-Paley calculus", littlewood_paley),
        (4, "Strichartz and exotic Strichartz ratios", strichartz),
        (5, "nonlinear estimate and band decay", nonlinear),
        (6, "Picard / split-step agreement", agreement),
        (7, "small-data bounds", small_data),
        (8, "Lipschitz dependence", lipschitz),
        (9, "stability exponent", stability),
        (10, "scattering", scattering),
        (11, "determinism", determinism),
    ];
    let verbose = std::env::var_os("ACCEPTANCE_VERBOSE").is_some();
    let mut failed = 0;
    println!("\nrunning {} acceptance criteria", criteria.len());
    for (id, title, f) in criteria {
        let mut o = Outcome::default();
        f(&suite, &mut o);
        let ok = o.passed();
        failed += usize::from(!ok);
        println!("{id:>2}. {} {title} ({:.1?})", if ok { "PASS" } else { "FAIL" }, o.elapsed);
        for (what, good) in &o.conditions {
            if verbose || !good {
                println!("        {} {what}", if *good { "ok  " } else { "MISS" });
            }
        }
        if verbose || !ok {
            for d in &o.details {
                println!("        {d}");
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed\n", criteria.len() - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
