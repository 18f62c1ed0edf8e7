//! Strichartz ratios: the energy-space estimate for the forced linear
//! equation and the exotic `X`/`Y` estimate for the Duhamel integral.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::data::{random_field, random_forcing, rescale_field, rescale_trajectory, rng, shifted_range};
use super::report::{ratio, spread, Check, ExperimentReport, Sweep};
use crate::dynamics::duhamel_integral;
use crate::error::{Error, Result};
use crate::norms::{norm_value, NormKind, NormSettings};
use crate::spectral::{Field, Grid, GridMode, GridSpec, Trajectory};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct StrichartzConfig {
    pub grids: Vec<GridSpec>,
    /// Dyadic levels carrying the random data and forcing.
    pub levels: Vec<i32>,
    pub seeds: Vec<u64>,
    pub horizon: f64,
    pub steps: usize,
    /// Exponents `s` of the dilations `lambda = 2^s`.
    pub rescalings: Vec<i32>,
    pub max_spread: f64,
    pub invariance: f64,
}

impl StrichartzConfig {
    fn sweep(&self, what: &str) -> Sweep {
        Sweep {
            dims: self.grids.iter().map(|g| g.dim).collect(),
            seeds: self.seeds.clone(),
            schedule: self.rescalings.iter().map(|&s| 2f64.powi(s)).collect(),
            description: format!("{what}; schedule lists the dilations lambda"),
        }
    }

    fn validate(&self) -> Result<()> {
        if self.seeds.is_empty() || self.rescalings.is_empty() || self.steps == 0 || !(self.horizon > 0.0) {
            return Err(Error::InvalidArgument("need seeds, rescalings, steps > 0 and a positive horizon".into()));
        }
        if !self.rescalings.contains(&0) {
            return Err(Error::InvalidArgument("rescalings must include 0 (lambda = 1)".into()));
        }
        Ok(())
    }
}

impl Default for StrichartzConfig {
    fn default() -> Self {
        StrichartzConfig {
            grids: vec![GridSpec { dim: 3, mode: GridMode::FullTensor, extent: 16.0, points: 64 }],
            levels: vec![-1],
            seeds: (1..=20).collect(),
            horizon: 0.25,
            steps: 8,
            rescalings: vec![0, 1, 2],
            max_spread: 10.0,
            invariance: 1e-3,
        }
    }
}

/// The exotic estimate on the `n = 3` tensor grid and the `n = 7` radial grid.
pub fn default_exotic() -> StrichartzConfig {
    StrichartzConfig {
        grids: vec![
            GridSpec { dim: 3, mode: GridMode::FullTensor, extent: 16.0, points: 64 },
            GridSpec { dim: 7, mode: GridMode::Radial, extent: 32.0, points: 512 },
        ],
        ..StrichartzConfig::default()
    }
}

/// One seed's ratios, indexed like the rescalings.
struct SeedRatios {
    seed: u64,
    ratios: Vec<f64>,
    boundary: f64,
}

fn free_plus_duhamel(u0: &Field, forcing: &Trajectory) -> Result<Trajectory> {
    let (t0, t1) = forcing.interval();
    let free = Trajectory::free_evolution(u0, t0, t1, forcing.len() - 1)?;
    free.axpy(1.0, &duhamel_integral(forcing, t0)?)
}

fn boundary_of(u: &Trajectory) -> f64 {
    u.slices().iter().map(Field::boundary_mass_fraction).fold(0.0, f64::max)
}

/// `||e^{itD} u0 - i int e^{i(t-s)D} F ds||_W / (||u0||_{H^1} + ||F||_{N^1})`.
fn strichartz_ratio(u0: &Field, forcing: &Trajectory, settings: &NormSettings) -> Result<(f64, f64)> {
    let u = free_plus_duhamel(u0, forcing)?;
    let lhs = norm_value(&u, &NormKind::W, settings)?;
    let rhs = u0.sobolev_norm(1.0) + norm_value(forcing, &NormKind::N1, settings)?;
    Ok((ratio(lhs, rhs), boundary_of(&u)))
}

/// `||-i int e^{i(t-s)D} F ds||_X / ||F||_Y`.
fn exotic_ratio(forcing: &Trajectory, settings: &NormSettings) -> Result<(f64, f64)> {
    let d = duhamel_integral(forcing, forcing.interval().0)?;
    let lhs = norm_value(&d, &NormKind::X, settings)?;
    let rhs = norm_value(forcing, &NormKind::Y, settings)?;
    Ok((ratio(lhs, rhs), boundary_of(&d)))
}

fn per_seed(cfg: &StrichartzConfig, grid: &Grid, seed: u64, exotic: bool) -> Result<SeedRatios> {
    let n = grid.dim() as f64;
    let mut r = rng(seed);
    let u0 = random_field(grid, &mut r, &cfg.levels, false)?;
    let forcing = random_forcing(grid, &mut r, &cfg.levels, (0.0, cfg.horizon), cfg.steps)?;
    let mut ratios = Vec::new();
    let mut boundary = 0.0f64;
    for &s in &cfg.rescalings {
        let lambda = 2f64.powi(s);
        let f = rescale_trajectory(&forcing, lambda, (n + 2.0) / 2.0)?;
        let settings = NormSettings { dyadic_range: Some(shifted_range(grid, s)), pairs: None };
        let (q, b) = if exotic {
            exotic_ratio(&f, &settings)?
        } else {
            strichartz_ratio(&rescale_field(&u0, lambda, (n - 2.0) / 2.0)?, &f, &settings)?
        };
        ratios.push(q);
        boundary = boundary.max(b);
    }
    Ok(SeedRatios { seed, ratios, boundary })
}

fn run(cfg: &StrichartzConfig, exotic: bool) -> Result<ExperimentReport> {
    cfg.validate()?;
    let (id, what) = if exotic {
        ("exotic-strichartz", "||Duhamel(F)||_X / ||F||_Y for random band-limited forcing")
    } else {
        ("strichartz", "||free(u0) + Duhamel(F)||_W / (||u0||_H1 + ||F||_N1) for random band-limited data")
    };
    let mut report = ExperimentReport::new(id, cfg.sweep(what), cfg.grids.clone());
    let base = cfg.rescalings.iter().position(|&s| s == 0).unwrap_or(0);
    for spec in &cfg.grids {
        let grid = Grid::new(*spec)?;
        let results: Vec<SeedRatios> = cfg.seeds.par_iter().map(|&seed| per_seed(cfg, &grid, seed, exotic)).collect::<Result<_>>()?;
        let all: Vec<f64> = results.iter().flat_map(|r| r.ratios.iter().copied()).collect();
        let excluded = all.iter().filter(|&&v| v == 0.0).count();
        let invariance = results
            .iter()
            .filter(|r| r.ratios[base] > 0.0)
            .flat_map(|r| r.ratios.iter().map(move |v| (v / r.ratios[base] - 1.0).abs()))
            .fold(0.0, f64::max);
        let boundary = results.iter().map(|r| r.boundary).fold(0.0, f64::max);
        let tag = spec.to_string();
        report.series(
            format!("{tag}: ratio per seed at lambda = 1"),
            results.iter().map(|r| r.seed as f64).collect(),
            results.iter().map(|r| r.ratios[base]).collect(),
        );
        let min = all.iter().copied().filter(|v| *v > 0.0).fold(f64::INFINITY, f64::min);
        report.value(format!("{tag}: min ratio"), if min.is_finite() { min } else { 0.0 });
        report.value(format!("{tag}: max ratio"), all.iter().copied().fold(0.0, f64::max));
        report.value(format!("{tag}: excluded 0/0 ratios"), excluded as f64);
        report.value(format!("{tag}: boundary mass fraction"), boundary);
        report.check(Check::at_most(format!("{tag}: max/min ratio"), spread(&all), cfg.max_spread));
        report.check(Check::at_most(format!("{tag}: scale invariance"), invariance, cfg.invariance));
        report.check(Check::at_most(format!("{tag}: boundary mass"), boundary, 1e-8));
    }
    Ok(report.finish())
}

/// The energy-space Strichartz estimate over seeds and dyadic rescalings.
pub fn check_strichartz(cfg: &StrichartzConfig) -> Result<ExperimentReport> {
    run(cfg, false)
}

/// The exotic `X`/`Y` estimate over seeds and dyadic rescalings.
pub fn check_exotic_strichartz(cfg: &StrichartzConfig) -> Result<ExperimentReport> {
    run(cfg, true)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::Repr;

    fn small(grid: GridSpec) -> StrichartzConfig {
        StrichartzConfig { grids: vec![grid], seeds: vec![1, 2, 3], steps: 8, ..StrichartzConfig::default() }
    }

    #[test]
    fn zero_data_gives_the_zero_convention() {
        let g = Grid::radial(3, 16.0, 128).unwrap();
        let zero = Field::zeros(&g, Repr::Physical);
        let f = Trajectory::from_fn(0.0, 0.25, 4, |_| Ok(zero.clone())).unwrap();
        assert_eq!(strichartz_ratio(&zero, &f, &NormSettings::default()).unwrap().0, 0.0);
        assert_eq!(exotic_ratio(&f, &NormSettings::default()).unwrap().0, 0.0);
    }

    #[test]
    fn free_ratio_is_scale_invariant() {
        let spec = GridSpec { dim: 3, mode: GridMode::Radial, extent: 32.0, points: 256 };
        let g = Grid::new(spec).unwrap();
        let u0 = random_field(&g, &mut rng(4), &[-1, 0], false).unwrap();
        let zero = Trajectory::from_fn(0.0, 0.25, 8, |_| Ok(Field::zeros(&g, Repr::Physical))).unwrap();
        let (base, _) = strichartz_ratio(&u0, &zero, &NormSettings::default()).unwrap();
        for s in [1, 2] {
            let lambda = 2f64.powi(s);
            let v0 = rescale_field(&u0, lambda, 0.5).unwrap();
            let f = rescale_trajectory(&zero, lambda, 2.5).unwrap();
            let (r, _) = strichartz_ratio(&v0, &f, &NormSettings::default()).unwrap();
            assert!((r / base - 1.0).abs() < 1e-10, "{r} {base}");
        }
    }

    #[test]
    fn radial_strichartz_passes_on_few_seeds() {
        let r = check_strichartz(&small(GridSpec { dim: 3, mode: GridMode::Radial, extent: 32.0, points: 256 })).unwrap();
        assert!(r.passed(), "{:#?}", r.checks);
    }

    #[test]
    fn exotic_single_band_is_scale_invariant() {
        let cfg = StrichartzConfig { levels: vec![0], ..small(GridSpec { dim: 5, mode: GridMode::Radial, extent: 24.0, points: 256 }) };
        let r = check_exotic_strichartz(&cfg).unwrap();
        let inv = r.checks.iter().find(|c| c.name.ends_with("scale invariance")).unwrap();
        assert!(inv.passed(), "{inv:?}");
    }

    #[test]
    fn config_needs_the_identity_dilation() {
        let cfg = StrichartzConfig { rescalings: vec![1, 2], ..StrichartzConfig::default() };
        assert!(check_strichartz(&cfg).is_err());
    }
}
