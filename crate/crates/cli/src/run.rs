use std::path::PathBuf;

use critnls_core::dynamics::{energy, picard_solve, NonlinearitySpec};
use critnls_core::norms::{norm_value, NormKind, NormSettings};
use critnls_core::spectral::container::write_trajectory;
use critnls_core::verify::data::{scale_to_w, DataSpec};
use critnls_core::verify::{
    check_dispersive, check_exotic_strichartz, check_lipschitz, check_littlewood_paley, check_nonlinear_estimate, check_propagator,
    check_solver_agreement, check_stability, check_strichartz, scattering_experiment, small_data_experiment, ExperimentReport, Sweep,
    Verdict,
};
use critnls_core::Grid;

use crate::config::{ExperimentConfig, SolveConfig};
use crate::error::Result;
use crate::manifest::RunManifest;
use crate::output::{guard, Staging};
use crate::plot;

/// A finished run.
#[derive(Debug)]
pub struct Outcome {
    pub out: PathBuf,
    pub report: ExperimentReport,
}

/// 0 pass, 2 inconclusive. A failed check is an error of the claim under
/// test and shares exit code 1 with run errors.
pub fn exit_code(v: Verdict) -> u8 {
    match v {
        Verdict::Pass => 0,
        Verdict::Inconclusive => 2,
        Verdict::Fail => 1,
    }
}

type Extra = Vec<(&'static str, Vec<u8>)>;

fn solve(c: &SolveConfig) -> Result<(ExperimentReport, Extra)> {
    let n = c.grid.dim;
    let grid = Grid::new(c.grid)?;
    let spec = NonlinearitySpec::new(c.sign, n)?;
    let u0 = scale_to_w(&c.data.build(&grid)?, c.w, c.horizon, c.solver.steps)?;
    let r = picard_solve(&u0, (0.0, c.horizon), &spec, &c.solver)?;

    let seeds = match &c.data {
        DataSpec::Random { seed, .. } => vec![*seed],
        DataSpec::Gaussian { .. } => vec![],
    };
    let sweep = Sweep {
        dims: vec![n],
        seeds,
        schedule: vec![c.w],
        description: "one Picard solve; schedule lists the W norm of the free evolution".into(),
    };
    let mut report = ExperimentReport::new("solve", sweep, vec![c.grid]);
    let s = &r.summary;
    let last = r.trajectory.last();
    report.value("free W norm", s.free_w_norm);
    report.value("solution W norm", norm_value(&r.trajectory, &NormKind::W, &NormSettings::default())?);
    report.value("Picard sweeps", s.sweeps as f64);
    report.value("integral-equation residual", s.residual);
    report.value("relative mass drift", (last.sobolev_norm(0.0) / u0.sobolev_norm(0.0) - 1.0).abs());
    let e0 = energy(&u0, &spec)?;
    report.value("relative energy drift", ((energy(last, &spec)? - e0) / e0).abs());
    report.series("Picard difference per sweep", (1..=s.history.len()).map(|k| k as f64).collect(), s.history.clone());

    let mut traj = Vec::new();
    write_trajectory(&mut traj, &r.trajectory)?;
    let mut summary = Vec::new();
    s.write_json(&mut summary)?;
    summary.push(b'\n');
    Ok((report.finish(), vec![("trajectory.bin", traj), ("summary.json", summary)]))
}

/// Run one resolved config; nothing touches the disk.
pub fn run_config(cfg: &ExperimentConfig) -> Result<(ExperimentReport, Extra)> {
    let report = match cfg {
        ExperimentConfig::Solve(c) => return solve(c),
        ExperimentConfig::Propagator(c) => check_propagator(c)?,
        ExperimentConfig::Dispersive(c) => check_dispersive(c)?,
        ExperimentConfig::LittlewoodPaley(c) => check_littlewood_paley(c)?,
        ExperimentConfig::Strichartz(c) => check_strichartz(c)?,
        ExperimentConfig::ExoticStrichartz(c) => check_exotic_strichartz(c)?,
        ExperimentConfig::NonlinearEstimate(c) => check_nonlinear_estimate(c)?,
        ExperimentConfig::SolverAgreement(c) => check_solver_agreement(c)?,
        ExperimentConfig::SmallData(c) => small_data_experiment(c)?,
        ExperimentConfig::Lipschitz(c) => check_lipschitz(c)?,
        ExperimentConfig::Stability(c) => check_stability(c)?,
        ExperimentConfig::Scattering(c) => scattering_experiment(c)?,
    };
    Ok((report, Vec::new()))
}

/// Run a manifest and write its directory: `manifest.json`, the effective
/// `config.toml`, `report.json`, `plot.svg` and, for a solve, the trajectory
/// and solver summary. On error nothing is written.
pub fn run(manifest: &RunManifest, force: bool) -> Result<Outcome> {
    guard(manifest, force)?;
    let cfg = manifest.load_config()?;
    let (report, extra) = run_config(&cfg)?;
    let staging = Staging::new(&manifest.out)?;
    staging.write("manifest.json", manifest.to_json()?.as_bytes())?;
    staging.write("config.toml", cfg.to_toml()?.as_bytes())?;
    staging.write("report.json", (report.to_json()? + "\n").as_bytes())?;
    if let Some(svg) = plot::render(&report)? {
        staging.write("plot.svg", svg.as_bytes())?;
    }
    for (name, bytes) in extra {
        staging.write(name, &bytes)?;
    }
    let out = staging.commit(force)?;
    Ok(Outcome { out, report })
}
