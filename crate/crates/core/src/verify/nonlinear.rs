//! The fractional nonlinear estimate `||f_z(v) u||_Y <~ ||v||_W^{4/(n-2)} ||u||_X`
//! and its frequency-localized form.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::data::{random_field, rng};
use super::report::{ratio, spread, Check, ExperimentReport, Fit, Sweep};
use crate::dynamics::NonlinearitySpec;
use crate::error::{Error, Result};
use crate::norms::{band_norms, norm_value, x_exponents, y_exponents, NormKind, NormSettings};
use crate::spectral::{lp_project, Dyadic, Field, Grid, GridMode, GridSpec, ProjectorKind, Repr, Trajectory};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NonlinearConfig {
    pub dims: Vec<usize>,
    pub radius: f64,
    pub points: usize,
    /// Dyadic levels of the random `u` and `v`.
    pub levels: Vec<i32>,
    pub seeds: Vec<u64>,
    pub horizon: f64,
    pub steps: usize,
    pub max_spread: f64,
    pub para: ParaConfig,
}

/// The band-decay measurement: `u = P_N u` with `N = 2^band`, output bands
/// `M` from `min_gap * N` up to half the largest grid frequency.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ParaConfig {
    pub radius: f64,
    pub points: usize,
    pub band: i32,
    pub seeds: Vec<u64>,
    pub steps: usize,
    pub min_gap: f64,
    /// Allowed excess of the fitted slope over `-4/(n-2)`.
    pub slack: f64,
}

impl Default for NonlinearConfig {
    fn default() -> Self {
        NonlinearConfig {
            dims: vec![7, 8],
            radius: 32.0,
            points: 1024,
            levels: vec![-1, 0],
            seeds: (1..=20).collect(),
            horizon: 0.25,
            steps: 8,
            max_spread: 10.0,
            para: ParaConfig::default(),
        }
    }
}

impl Default for ParaConfig {
    fn default() -> Self {
        ParaConfig { radius: 64.0, points: 8192, band: -4, seeds: vec![1, 2, 3], steps: 4, min_gap: 4.0, slack: 0.2 }
    }
}

/// Real part of the free evolution of random data: a real `v` keeps its
/// zero set, where `f_z(v)` has only the Holder regularity `4/(n-2)`.
fn random_real(grid: &Grid, seed: u64, levels: &[i32], horizon: f64, steps: usize) -> Result<Trajectory> {
    let v0 = random_field(grid, &mut rng(seed), levels, true)?;
    Ok(Trajectory::free_evolution(&v0, 0.0, horizon, steps)?.map(|s| s.map(|z| Complex64::new(z.re, 0.0))))
}

fn random_complex(grid: &Grid, seed: u64, levels: &[i32], horizon: f64, steps: usize) -> Result<Trajectory> {
    let u0 = random_field(grid, &mut rng(seed.wrapping_add(1 << 32)), levels, false)?;
    Trajectory::free_evolution(&u0, 0.0, horizon, steps)
}

/// `f_z(v) u` slice by slice.
fn product(spec: &NonlinearitySpec, v: &Trajectory, u: &Trajectory) -> Result<Trajectory> {
    let slices = v
        .slices()
        .iter()
        .zip(u.slices())
        .map(|(a, b)| {
            let (a, b) = (a.to_physical(), b.to_physical());
            let grid = a.grid();
            let data = grid.pointwise(a.samples()).iter().zip(grid.pointwise(b.samples()).iter()).map(|(x, y)| y * spec.f_z(*x)).collect();
            Field::new(grid, Repr::Physical, data)
        })
        .collect::<Result<Vec<_>>>()?;
    Trajectory::new(v.times().to_vec(), slices)
}

/// `||f_z(v) u||_Y / (||v||_W^{4/(n-2)} ||u||_X)`.
pub fn xy_ratio(spec: &NonlinearitySpec, v: &Trajectory, u: &Trajectory) -> Result<f64> {
    let settings = NormSettings::default();
    let lhs = norm_value(&product(spec, v, u)?, &NormKind::Y, &settings)?;
    let rhs = norm_value(v, &NormKind::W, &settings)?.powf(spec.power()) * norm_value(u, &NormKind::X, &settings)?;
    Ok(ratio(lhs, rhs))
}

struct ParaSeed {
    levels: Vec<f64>,
    lhs: Vec<f64>,
    ratios: Vec<f64>,
}

fn para_seed(cfg: &ParaConfig, grid: &Grid, spec: &NonlinearitySpec, seed: u64) -> Result<ParaSeed> {
    let n = grid.dim();
    let nn = 2f64.powi(cfg.band);
    let v = random_real(grid, seed, &[cfg.band, cfg.band + 1], 0.25, cfg.steps)?;
    let u = random_complex(grid, seed, &[cfg.band], 0.25, cfg.steps)?;
    let slices = u.slices().iter().map(|s| lp_project(s, Dyadic(cfg.band), ProjectorKind::Band)).collect::<Result<Vec<_>>>()?;
    let u = Trajectory::new(u.times().to_vec(), slices)?;
    let g = product(spec, &v, &u)?;

    let top = grid.default_dyadic_range().1;
    let lo = cfg.band + cfg.min_gap.log2().ceil() as i32;
    let fit_top = (grid.max_frequency() / 2.0).log2().floor() as i32;
    let y = y_exponents(n);
    let bands = band_norms(&g, (lo, top), &[y], false)?;
    let (ulo, uhi) = grid.default_dyadic_range();
    let ubands = band_norms(&u, (ulo, uhi), &[x_exponents(n)], false)?;
    let w = norm_value(&v, &NormKind::W, &NormSettings::default())?.powf(spec.power());

    let mut out = ParaSeed { levels: Vec::new(), lhs: Vec::new(), ratios: Vec::new() };
    for b in bands.iter().filter(|b| !b.residual && b.level <= fit_top) {
        let m = b.dyadic();
        let kernel: f64 = ubands.iter().map(|ub| (ub.dyadic() / m).powf(spec.power()).min(1.0) * ub.values[0]).sum();
        out.levels.push(m / nn);
        out.lhs.push(b.values[0]);
        out.ratios.push(ratio(b.values[0], w * kernel));
    }
    Ok(out)
}

/// Seed spread of the (XY0) ratio and band-decay slope of the (para) left side.
pub fn check_nonlinear_estimate(cfg: &NonlinearConfig) -> Result<ExperimentReport> {
    if cfg.seeds.is_empty() || cfg.para.seeds.is_empty() {
        return Err(Error::InvalidArgument("need at least one seed".into()));
    }
    let grids: Vec<GridSpec> =
        cfg.dims.iter().map(|&n| GridSpec { dim: n, mode: GridMode::Radial, extent: cfg.radius, points: cfg.points }).collect();
    let para_grids: Vec<GridSpec> =
        cfg.dims.iter().map(|&n| GridSpec { dim: n, mode: GridMode::Radial, extent: cfg.para.radius, points: cfg.para.points }).collect();
    let sweep = Sweep {
        dims: cfg.dims.clone(),
        seeds: cfg.seeds.clone(),
        schedule: cfg.levels.iter().map(|&k| 2f64.powi(k)).collect(),
        description: "real v = Re free evolution, complex u = free evolution; schedule lists the data frequencies".into(),
    };
    let mut report = ExperimentReport::new("nonlinear-estimate", sweep, [grids.clone(), para_grids.clone()].concat());
    for (spec_g, para_g) in grids.iter().zip(&para_grids) {
        let n = spec_g.dim;
        let spec = NonlinearitySpec::defocusing(n)?;
        let p = spec.power();

        let grid = Grid::new(*spec_g)?;
        let ratios: Vec<f64> = cfg
            .seeds
            .par_iter()
            .map(|&seed| {
                let v = random_real(&grid, seed, &cfg.levels, cfg.horizon, cfg.steps)?;
                let u = random_complex(&grid, seed, &cfg.levels, cfg.horizon, cfg.steps)?;
                xy_ratio(&spec, &v, &u)
            })
            .collect::<Result<_>>()?;
        drop(grid);
        report.series(format!("n={n}: XY ratio per seed"), cfg.seeds.iter().map(|&s| s as f64).collect(), ratios.clone());
        report.check(Check::at_most(format!("n={n}: XY ratio max/min over seeds"), spread(&ratios), cfg.max_spread));

        let grid = Grid::new(*para_g)?;
        let mut worst = f64::NEG_INFINITY;
        let mut para_ratios = Vec::new();
        for &seed in &cfg.para.seeds {
            let s = para_seed(&cfg.para, &grid, &spec, seed)?;
            report.series(format!("n={n} seed {seed}: ||P_M f_z(v) u||_Y-pair vs M/N"), s.levels.clone(), s.lhs.clone());
            para_ratios.extend(s.ratios.iter().copied());
            if let Some(fit) =
                report.fit(Fit::power_law(format!("n={n} seed {seed}: band decay"), &s.levels, &s.lhs), &format!("n={n} seed {seed}"))
            {
                worst = worst.max(fit.slope);
            }
        }
        report.value(format!("n={n}: band-decay slope, worst seed"), worst);
        report.value(format!("n={n}: -4/(n-2)"), -p);
        report.value(format!("n={n}: max localized ratio"), para_ratios.iter().copied().fold(0.0, f64::max));
        report.check(Check::at_most(format!("n={n}: band-decay slope"), worst, -p + cfg.para.slack));
    }
    Ok(report.finish())
}
