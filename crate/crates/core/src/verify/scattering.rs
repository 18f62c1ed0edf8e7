//! Scattering of small solutions: the pulled-back trajectory
//! `e^{-it Delta} u(t)` settles, and the limit depends continuously on `u0`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::data::{scale_to_w, unit_h1, DataSpec};
use super::report::{spread, Check, ExperimentReport, Sweep};
use crate::dynamics::{picard_solve, scattering_state, NonlinearitySpec, ScatteringState, SolverConfig};
use crate::error::{Error, Result};
use crate::spectral::{Field, Grid, GridMode, GridSpec};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScatteringConfig {
    pub grid: GridSpec,
    pub data: Vec<DataSpec>,
    /// Perturbation direction for the continuity check.
    pub direction: DataSpec,
    /// `W` norm of the free evolution over `[0, horizon]`.
    pub w: f64,
    pub horizon: f64,
    pub steps: usize,
    /// Relative sizes of the perturbations, decreasing.
    pub deltas: Vec<f64>,
    pub tail_ratio: f64,
    pub continuity_spread: f64,
}

impl Default for ScatteringConfig {
    fn default() -> Self {
        ScatteringConfig {
            grid: GridSpec { dim: 3, mode: GridMode::Radial, extent: 400.0, points: 1024 },
            data: vec![DataSpec::Gaussian { width: 2.0 }],
            direction: DataSpec::Random { seed: 11, levels: vec![-2, -1] },
            w: 0.05,
            horizon: 20.0,
            steps: 200,
            deltas: (0..5).map(|k| 10f64.powf(-1.0 - 0.5 * k as f64)).collect(),
            tail_ratio: 1e-3,
            continuity_spread: 3.0,
        }
    }
}

fn scatter(u0: &Field, spec: &NonlinearitySpec, horizon: f64, steps: usize) -> Result<ScatteringState> {
    let r = picard_solve(u0, (0.0, horizon), spec, &SolverConfig { steps, ..SolverConfig::default() })?;
    scattering_state(&r.trajectory)
}

/// Tail decay of the scattering increments for each datum and the
/// `H^1` continuity ratio of `u0 -> u+(0)` across the perturbation sizes.
pub fn scattering_experiment(cfg: &ScatteringConfig) -> Result<ExperimentReport> {
    if cfg.deltas.is_empty() || cfg.deltas.windows(2).any(|w| !(w[1] < w[0])) {
        return Err(Error::InvalidArgument("deltas must be nonempty and strictly decreasing".into()));
    }
    let n = cfg.grid.dim;
    let sweep = Sweep {
        dims: vec![n],
        seeds: vec![],
        schedule: cfg.deltas.clone(),
        description: format!("data at W = {} on [0, {}]; perturbations u0 + delta ||u0||_H1 d", cfg.w, cfg.horizon),
    };
    let mut report = ExperimentReport::new("scattering", sweep, vec![cfg.grid]);
    let grid = Grid::new(cfg.grid)?;
    let spec = NonlinearitySpec::defocusing(n)?;
    let d = unit_h1(&cfg.direction.build(&grid)?)?;
    for (i, data) in cfg.data.iter().enumerate() {
        let tag = format!("datum {i}");
        let u0 = scale_to_w(&data.build(&grid)?, cfg.w, cfg.horizon, cfg.steps)?;
        let base = match scatter(&u0, &spec, cfg.horizon, cfg.steps) {
            Ok(s) => s,
            Err(Error::NoScattering { reason, .. }) => {
                report.note(format!("{tag}: {reason}"));
                report.check(Check::at_most(format!("{tag}: final / first increment"), f64::NAN, cfg.tail_ratio).inconclusive());
                continue;
            }
            Err(e) => return Err(e),
        };
        let r = &base.report;
        report.series(format!("{tag}: H1 increments of e^(-it Delta) u(t)"), r.times[1..].to_vec(), r.increments.clone());
        report.series(format!("{tag}: ||e^(it Delta) u+ - u(t)||_H1"), r.times.clone(), r.distance_to_final.clone());
        report.value(format!("{tag}: ||u+(0) - u0||_H1 / ||u0||_H1"), base.state.sub(&u0)?.sobolev_norm(1.0) / u0.sobolev_norm(1.0));
        report.check(Check::at_most(format!("{tag}: final / first increment"), r.tail_ratio, cfg.tail_ratio));

        let size = u0.sobolev_norm(1.0);
        let ratios: Vec<f64> = cfg
            .deltas
            .par_iter()
            .map(|&delta| {
                let v0 = u0.axpy(delta * size, &d)?;
                let s = scatter(&v0, &spec, cfg.horizon, cfg.steps)?;
                Ok(s.state.sub(&base.state)?.sobolev_norm(1.0) / v0.sub(&u0)?.sobolev_norm(1.0))
            })
            .collect::<Result<_>>()?;
        report.series(format!("{tag}: ||u+(0) - v+(0)||_H1 / ||u0 - v0||_H1"), cfg.deltas.clone(), ratios.clone());
        report.value(format!("{tag}: max continuity ratio"), ratios.iter().copied().fold(0.0, f64::max));
        let decades = (cfg.deltas[0] / cfg.deltas[cfg.deltas.len() - 1]).log10();
        report.check(Check::at_least(format!("{tag}: continuity decades"), decades, 2.0 - 1e-9));
        report.check(Check::at_most(format!("{tag}: continuity ratio spread"), spread(&ratios), cfg.continuity_spread));
    }
    Ok(report.finish())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::relative_l2;

    fn small() -> ScatteringConfig {
        ScatteringConfig {
            grid: GridSpec { dim: 3, mode: GridMode::Radial, extent: 120.0, points: 512 },
            horizon: 4.0,
            steps: 40,
            deltas: vec![1e-1, 1e-2, 1e-3],
            ..ScatteringConfig::default()
        }
    }

    #[test]
    fn linear_flow_scatters_to_its_data() {
        let g = Grid::new(small().grid).unwrap();
        let u0 = DataSpec::Gaussian { width: 2.0 }.build(&g).unwrap().scaled(0.01);
        let s = scatter(&u0, &NonlinearitySpec::linear(3).unwrap(), 4.0, 40).unwrap();
        assert!(relative_l2(&s.state, &u0).unwrap() < 1e-13);
    }

    #[test]
    fn short_run_settles_and_is_continuous() {
        let r = scattering_experiment(&small()).unwrap();
        let c = r.checks.iter().find(|c| c.name.ends_with("continuity ratio spread")).unwrap();
        assert!(c.passed(), "{c:?}");
        assert!(r.values["datum 0: max continuity ratio"] < 2.0);
    }

    #[test]
    fn deltas_must_decrease() {
        let cfg = ScatteringConfig { deltas: vec![1e-3, 1e-1], ..small() };
        assert!(scattering_experiment(&cfg).is_err());
    }
}
