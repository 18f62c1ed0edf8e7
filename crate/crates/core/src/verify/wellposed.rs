//! Small-data well-posedness: Picard against an independent integrator,
//! and the size bounds of the local solution across a smallness schedule.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::data::{scale_to_w, DataSpec};
use super::report::{spread, Check, ExperimentReport, Sweep};
use crate::dynamics::{picard_solve, split_step_solve, NonlinearitySpec, Sign, SolveResult, SolverConfig};
use crate::error::{Error, Result};
use crate::norms::{norm_value, NormKind, NormSettings};
use crate::spectral::{relative_l2, Grid, GridMode, GridSpec, Trajectory};

/// One datum on one grid with one sign of the nonlinearity.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolveCase {
    pub grid: GridSpec,
    pub data: DataSpec,
    pub sign: Sign,
}

impl SolveCase {
    pub fn label(&self) -> String {
        let data = match &self.data {
            DataSpec::Gaussian { width } => format!("gaussian a={width}"),
            DataSpec::Random { seed, .. } => format!("random seed {seed}"),
        };
        format!("{} {data} {:?}", self.grid, self.sign).to_lowercase()
    }

    fn spec(&self, sign: Sign) -> Result<NonlinearitySpec> {
        NonlinearitySpec::new(sign, self.grid.dim)
    }
}

fn radial(dim: usize, data: DataSpec, sign: Sign) -> SolveCase {
    SolveCase { grid: GridSpec { dim, mode: GridMode::Radial, extent: 24.0, points: 256 }, data, sign }
}

fn tensor(data: DataSpec, sign: Sign) -> SolveCase {
    SolveCase { grid: GridSpec { dim: 3, mode: GridMode::FullTensor, extent: 16.0, points: 32 }, data, sign }
}

fn solve(u0: &crate::spectral::Field, spec: &NonlinearitySpec, horizon: f64, steps: usize) -> Result<SolveResult> {
    picard_solve(u0, (0.0, horizon), spec, &SolverConfig { steps, ..SolverConfig::default() })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AgreementConfig {
    pub cases: Vec<SolveCase>,
    /// `W` norm of the free evolution of every datum.
    pub w: f64,
    pub horizon: f64,
    pub steps: usize,
    /// Strang steps of the reference integrator.
    pub split_steps: usize,
    pub tolerance: f64,
    pub max_ratio: f64,
    /// Picard differences below this are roundoff and leave the ratio test.
    pub floor: f64,
}

impl Default for AgreementConfig {
    fn default() -> Self {
        let g = |width| DataSpec::Gaussian { width };
        let r = |seed| DataSpec::Random { seed, levels: vec![-1, 0] };
        let mut cases = Vec::new();
        for n in [3, 4] {
            cases.push(radial(n, g(1.0), Sign::Defocusing));
            cases.push(radial(n, g(1.0), Sign::Focusing));
            cases.push(radial(n, r(1), Sign::Defocusing));
            cases.push(radial(n, r(2), Sign::Focusing));
        }
        cases.push(tensor(g(2.0), Sign::Defocusing));
        cases.push(tensor(g(2.5), Sign::Focusing));
        AgreementConfig { cases, w: 0.09, horizon: 0.5, steps: 64, split_steps: 1024, tolerance: 1e-4, max_ratio: 0.5, floor: 1e-10 }
    }
}

struct Agreement {
    discrepancy: f64,
    ratio: f64,
    sweeps: usize,
}

fn agree(cfg: &AgreementConfig, case: &SolveCase) -> Result<Agreement> {
    let grid = Grid::new(case.grid)?;
    let spec = case.spec(case.sign)?;
    let u0 = scale_to_w(&case.data.build(&grid)?, cfg.w, cfg.horizon, cfg.steps)?;
    let r = solve(&u0, &spec, cfg.horizon, cfg.steps)?;
    let s = split_step_solve(&u0, (0.0, cfg.horizon), &spec, cfg.horizon / cfg.split_steps as f64, cfg.split_steps)?;
    let h = &r.summary.history;
    let ratio = h.windows(2).filter(|w| w[0] > cfg.floor).map(|w| w[1] / w[0]).fold(0.0, f64::max);
    Ok(Agreement { discrepancy: relative_l2(r.trajectory.last(), s.last())?, ratio, sweeps: r.summary.sweeps })
}

/// Final-time agreement of the Picard solution with Strang splitting, and
/// the geometric decay of the Picard differences.
pub fn check_solver_agreement(cfg: &AgreementConfig) -> Result<ExperimentReport> {
    let sweep = Sweep {
        dims: cfg.cases.iter().map(|c| c.grid.dim).collect(),
        seeds: vec![],
        schedule: vec![cfg.w],
        description: "each datum scaled to the listed W norm of its free evolution".into(),
    };
    let mut report = ExperimentReport::new("solver-agreement", sweep, cfg.cases.iter().map(|c| c.grid).collect());
    let results: Vec<Agreement> = cfg.cases.par_iter().map(|c| agree(cfg, c)).collect::<Result<_>>()?;
    for (case, a) in cfg.cases.iter().zip(&results) {
        let tag = case.label();
        report.value(format!("{tag}: Picard sweeps"), a.sweeps as f64);
        report.check(Check::at_most(format!("{tag}: final-time discrepancy"), a.discrepancy, cfg.tolerance));
        report.check(Check::at_most(format!("{tag}: contraction ratio"), a.ratio, cfg.max_ratio));
    }
    Ok(report.finish())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SmallDataConfig {
    pub cases: Vec<SolveCase>,
    /// Target `W` norms of the free evolution, decreasing.
    pub etas: Vec<f64>,
    pub horizon: f64,
    pub steps: usize,
    pub max_spread: f64,
    /// Relative distance to the linear values at the smallest eta.
    pub linear_tolerance: f64,
    /// Relative gap between the two signs at the largest eta.
    pub sign_tolerance: f64,
}

impl Default for SmallDataConfig {
    fn default() -> Self {
        let g = |width| DataSpec::Gaussian { width };
        SmallDataConfig {
            cases: vec![
                radial(3, g(1.0), Sign::Defocusing),
                radial(3, DataSpec::Random { seed: 1, levels: vec![-1, 0] }, Sign::Defocusing),
                radial(4, g(1.0), Sign::Defocusing),
                tensor(g(2.0), Sign::Defocusing),
            ],
            etas: (0..5).map(|k| 0.08 * 10f64.powf(-0.5 * k as f64)).collect(),
            horizon: 0.5,
            steps: 64,
            max_spread: 3.0,
            linear_tolerance: 1e-2,
            sign_tolerance: 0.1,
        }
    }
}

const RATIO_NAMES: [&str; 3] = ["||u||_W / eta", "||u||_S1 / (||u0||_H1 + eta^((n+2)/(n-2)))", "||u||_S0 / ||u0||_2"];

/// The three size ratios of a solution whose free evolution has `W` norm `eta`.
fn size_ratios(u: &Trajectory, u0: &crate::spectral::Field, eta: f64) -> Result<[f64; 3]> {
    let n = u0.grid().dim() as f64;
    let s = NormSettings::default();
    Ok([
        norm_value(u, &NormKind::W, &s)? / eta,
        norm_value(u, &NormKind::S1, &s)? / (u0.sobolev_norm(1.0) + eta.powf((n + 2.0) / (n - 2.0))),
        norm_value(u, &NormKind::S0, &s)? / u0.l2_norm(),
    ])
}

struct SmallRun {
    etas: Vec<f64>,
    ratios: Vec<[f64; 3]>,
    linear: [f64; 3],
    opposite: Option<[f64; 3]>,
    boundary: Option<f64>,
}

fn small_case(cfg: &SmallDataConfig, case: &SolveCase) -> Result<SmallRun> {
    let grid = Grid::new(case.grid)?;
    let f = case.data.build(&grid)?;
    let free = Trajectory::free_evolution(&f, 0.0, cfg.horizon, cfg.steps)?;
    let s = NormSettings::default();
    // amplitude-free values of the linear flow; the eta^((n+2)/(n-2)) term drops out as eta -> 0
    let linear = [1.0, norm_value(&free, &NormKind::S1, &s)? / f.sobolev_norm(1.0), norm_value(&free, &NormKind::S0, &s)? / f.l2_norm()];
    let spec = case.spec(case.sign)?;
    let mut run = SmallRun { etas: Vec::new(), ratios: Vec::new(), linear, opposite: None, boundary: None };
    for &eta in &cfg.etas {
        let u0 = scale_to_w(&f, eta, cfg.horizon, cfg.steps)?;
        match solve(&u0, &spec, cfg.horizon, cfg.steps) {
            Ok(r) => {
                if run.etas.is_empty() {
                    let other = if case.sign == Sign::Focusing { Sign::Defocusing } else { Sign::Focusing };
                    let o = solve(&u0, &case.spec(other)?, cfg.horizon, cfg.steps)?;
                    run.opposite = Some(size_ratios(&o.trajectory, &u0, eta)?);
                }
                run.ratios.push(size_ratios(&r.trajectory, &u0, eta)?);
                run.etas.push(eta);
            }
            Err(Error::NoContraction { .. } | Error::SmallnessViolated { .. }) => run.boundary = Some(eta),
            Err(e) => return Err(e),
        }
    }
    Ok(run)
}

/// Solves across a decreasing smallness schedule and checks that the size
/// ratios of the solution stay uniformly bounded.
pub fn small_data_experiment(cfg: &SmallDataConfig) -> Result<ExperimentReport> {
    if cfg.etas.windows(2).any(|w| w[1] >= w[0]) || cfg.etas.is_empty() {
        return Err(Error::InvalidArgument("the eta schedule must be nonempty and strictly decreasing".into()));
    }
    let sweep = Sweep {
        dims: cfg.cases.iter().map(|c| c.grid.dim).collect(),
        seeds: vec![],
        schedule: cfg.etas.clone(),
        description: "data scaled so the free evolution has W norm eta".into(),
    };
    let mut report = ExperimentReport::new("small-data", sweep, cfg.cases.iter().map(|c| c.grid).collect());
    let runs: Vec<SmallRun> = cfg.cases.par_iter().map(|c| small_case(cfg, c)).collect::<Result<_>>()?;
    for (case, run) in cfg.cases.iter().zip(&runs) {
        let tag = case.label();
        if let Some(eta) = run.boundary {
            report.value(format!("{tag}: empirical eta_0 boundary"), eta);
        }
        let decades = match (run.etas.first(), run.etas.last()) {
            (Some(a), Some(b)) => (a / b).log10(),
            _ => 0.0,
        };
        report.check(Check::at_least(format!("{tag}: eta decades solved"), decades, 2.0 - 1e-9));
        for (j, name) in RATIO_NAMES.iter().enumerate() {
            let ys: Vec<f64> = run.ratios.iter().map(|r| r[j]).collect();
            report.series(format!("{tag}: {name}"), run.etas.clone(), ys.clone());
            report.value(format!("{tag}: linear {name}"), run.linear[j]);
            report.check(Check::at_most(format!("{tag}: spread of {name}"), spread(&ys), cfg.max_spread));
            if let Some(last) = ys.last() {
                report.check(Check::at_most(
                    format!("{tag}: {name} vs linear at smallest eta"),
                    (last / run.linear[j] - 1.0).abs(),
                    cfg.linear_tolerance,
                ));
            }
            if let (Some(o), Some(first)) = (run.opposite, ys.first()) {
                report.check(Check::at_most(
                    format!("{tag}: {name}, sign flip at largest eta"),
                    (o[j] / first - 1.0).abs(),
                    cfg.sign_tolerance,
                ));
            }
        }
    }
    Ok(report.finish())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn radial_cases_agree_with_splitting() {
        let cfg = AgreementConfig {
            cases: vec![
                radial(3, DataSpec::Gaussian { width: 1.0 }, Sign::Focusing),
                radial(4, DataSpec::Random { seed: 5, levels: vec![0] }, Sign::Defocusing),
            ],
            split_steps: 512,
            ..AgreementConfig::default()
        };
        let r = check_solver_agreement(&cfg).unwrap();
        assert!(r.passed(), "{:#?}", r.failed_checks());
    }

    #[test]
    fn small_data_ratios_are_bounded() {
        let cfg = SmallDataConfig {
            cases: vec![radial(3, DataSpec::Gaussian { width: 1.0 }, Sign::Defocusing)],
            etas: vec![0.08, 0.008, 0.0008],
            steps: 32,
            ..SmallDataConfig::default()
        };
        let r = small_data_experiment(&cfg).unwrap();
        assert!(r.passed(), "{:#?}", r.failed_checks());
    }

    #[test]
    fn schedule_must_decrease() {
        let cfg = SmallDataConfig { etas: vec![0.01, 0.05], ..SmallDataConfig::default() };
        assert!(small_data_experiment(&cfg).is_err());
    }

    #[test]
    fn labels_name_the_case() {
        let c = radial(4, DataSpec::Random { seed: 9, levels: vec![0] }, Sign::Focusing);
        assert!(c.label().contains("seed 9") && c.label().contains("focusing"));
    }
}
