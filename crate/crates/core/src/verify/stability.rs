//! Perturbation experiments: Lipschitz dependence on the data and the
//! stability exponent of nearby (approximate) solutions.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::data::{scale_to_w, unit_h1, DataSpec};
use super::report::{spread, Check, ExperimentReport, Fit, Sweep};
use crate::dynamics::{critical_kind, duhamel_integral, picard_solve, subdivide_by_norm, sup_l2_gap, NonlinearitySpec, SolverConfig};
use crate::error::{Error, Result};
use crate::norms::{band_norms, norm_value, w_exponents, NormKind, NormSettings};
use crate::spectral::{Field, Grid, GridMode, GridSpec, Trajectory};

/// The measured size of the base run, never supplied by the caller.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Hypotheses {
    /// `E = ||u~0||_H1`
    pub energy: f64,
    /// `E' = max ||u0 - u~0||_H1` over the schedule
    pub energy_gap: f64,
    /// `M = ||u~||_{L^{2(n+2)/(n-2)}_{t,x}}`
    pub spacetime: f64,
    pub base_w: f64,
    /// `||e||_N1`, zero without forcing
    pub forcing_n1: f64,
}

/// A base datum, a unit `H^1` direction and a schedule of relative sizes:
/// the perturbed datum at `eps` is `u~0 + eps ||u~0||_H1 direction`.
#[derive(Clone, Debug)]
pub struct PerturbationSetup {
    pub base: Field,
    pub direction: Field,
    pub eps: Vec<f64>,
    /// `e` in `(i d_t + Delta) u~ = f(u~) + e`; the base run solves the forced equation.
    pub forcing: Option<Trajectory>,
    pub spec: NonlinearitySpec,
    pub interval: (f64, f64),
    pub steps: usize,
}

impl PerturbationSetup {
    pub fn new(base: Field, direction: &Field, eps: Vec<f64>, spec: NonlinearitySpec, interval: (f64, f64), steps: usize) -> Result<Self> {
        if eps.len() < 2 || eps.windows(2).any(|w| !(w[1] < w[0])) || eps.iter().any(|e| !(*e > 0.0)) {
            return Err(Error::InvalidArgument("the eps schedule must be positive and strictly decreasing".into()));
        }
        if eps[0] / eps[eps.len() - 1] < 100.0 * (1.0 - 1e-9) {
            return Err(Error::InvalidArgument("the eps schedule must span at least two decades".into()));
        }
        Ok(PerturbationSetup { base, direction: unit_h1(direction)?, eps, forcing: None, spec, interval, steps })
    }

    pub fn with_forcing(mut self, e: Trajectory) -> Self {
        self.forcing = Some(e);
        self
    }

    pub fn datum(&self, eps: f64) -> Result<Field> {
        self.base.axpy(eps * self.base.sobolev_norm(1.0), &self.direction)
    }

    fn config(&self, steps: usize) -> SolverConfig {
        SolverConfig { steps, ..SolverConfig::default() }
    }

    /// Solve from `u0` over the interval in `windows` consecutive Picard
    /// solves, each started from the end of the previous one.
    pub fn solve(&self, u0: &Field, forcing: Option<&Trajectory>, windows: usize) -> Result<Trajectory> {
        if windows == 0 || self.steps % windows != 0 {
            return Err(Error::InvalidArgument(format!("{windows} windows must divide {} steps", self.steps)));
        }
        let per = self.steps / windows;
        let (t0, t1) = self.interval;
        let mut times = Vec::new();
        let mut slices = Vec::new();
        let mut start = u0.clone();
        for k in 0..windows {
            let a = t0 + (t1 - t0) * k as f64 / windows as f64;
            let b = if k + 1 == windows { t1 } else { t0 + (t1 - t0) * (k + 1) as f64 / windows as f64 };
            let e = forcing.map(|e| e.restrict(k * per, (k + 1) * per)).transpose()?;
            let piece = match &e {
                None => picard_solve(&start, (a, b), &self.spec, &self.config(per))?.trajectory,
                Some(e) => self.forced(&start, e, (a, b), per)?,
            };
            let skip = usize::from(k > 0);
            times.extend_from_slice(&piece.times()[skip..]);
            start = piece.last().clone();
            slices.extend(piece.into_slices().into_iter().skip(skip));
        }
        Trajectory::new(times, slices)
    }

    /// Picard iteration for `u = free + D[f(u) + e]`.
    fn forced(&self, u0: &Field, e: &Trajectory, (a, b): (f64, f64), steps: usize) -> Result<Trajectory> {
        let cfg = self.config(steps);
        let base = Trajectory::free_evolution(u0, a, b, steps)?.axpy(1.0, &duhamel_integral(e, a)?)?;
        let mut u = base.clone();
        for _ in 0..cfg.max_sweeps {
            let f = u.slices().iter().map(|s| self.spec.apply(&s.to_physical())).collect::<Result<Vec<_>>>()?;
            let next = base.axpy(1.0, &duhamel_integral(&Trajectory::new(u.times().to_vec(), f)?, a)?)?;
            let scale = next.slices().iter().map(Field::l2_norm).fold(0.0, f64::max);
            let gap = sup_l2_gap(&next, &u)?;
            u = next;
            if gap <= cfg.tolerance * scale.max(f64::MIN_POSITIVE) {
                return Ok(u);
            }
        }
        Err(Error::NoContraction {
            sweeps: cfg.max_sweeps,
            last: f64::NAN,
            w_norm: norm_value(&base, &NormKind::W, &NormSettings::default())?,
        })
    }
}

/// Base and perturbed solutions, plus the measured hypotheses.
struct Runs {
    base: Trajectory,
    perturbed: Vec<Trajectory>,
    hyp: Hypotheses,
}

fn run_all(setup: &PerturbationSetup, windows: usize) -> Result<Runs> {
    let s = NormSettings::default();
    let base = setup.solve(&setup.base, setup.forcing.as_ref(), windows)?;
    let perturbed: Vec<Trajectory> = setup.eps.par_iter().map(|&e| setup.solve(&setup.datum(e)?, None, windows)).collect::<Result<_>>()?;
    let energy = setup.base.sobolev_norm(1.0);
    let hyp = Hypotheses {
        energy,
        energy_gap: setup.eps[0] * energy,
        spacetime: norm_value(&base, &critical_kind(setup.base.grid().dim()), &s)?,
        base_w: norm_value(&base, &NormKind::W, &s)?,
        forcing_n1: match &setup.forcing {
            Some(e) => norm_value(e, &NormKind::N1, &s)?,
            None => 0.0,
        },
    };
    Ok(Runs { base, perturbed, hyp })
}

fn record_hypotheses(report: &mut ExperimentReport, tag: &str, h: &Hypotheses) {
    report.value(format!("{tag}: E = ||u~0||_H1"), h.energy);
    report.value(format!("{tag}: E' = max ||u0 - u~0||_H1"), h.energy_gap);
    report.value(format!("{tag}: M = spacetime norm of u~"), h.spacetime);
    report.value(format!("{tag}: ||u~||_W"), h.base_w);
    report.value(format!("{tag}: ||e||_N1"), h.forcing_n1);
}

/// Points whose perturbation is smaller than the forcing violate the
/// error hypothesis and stay out of the fit.
fn admissible(setup: &PerturbationSetup, h: &Hypotheses) -> Vec<bool> {
    setup.eps.iter().map(|e| e * h.energy >= h.forcing_n1).collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LipschitzThresholds {
    pub slope: (f64, f64),
    pub min_decades: f64,
}

impl Default for LipschitzThresholds {
    fn default() -> Self {
        LipschitzThresholds { slope: (0.9, 1.1), min_decades: 3.0 }
    }
}

/// Fit `||u - u~||_S0` against `||u0 - u~0||_2` over the schedule.
pub fn lipschitz_experiment(setup: &PerturbationSetup, th: &LipschitzThresholds) -> Result<ExperimentReport> {
    let n = setup.base.grid().dim();
    let sweep = Sweep {
        dims: vec![n],
        seeds: vec![],
        schedule: setup.eps.clone(),
        description: "u0 = u~0 + eps ||u~0||_H1 d with unit H1 direction d".into(),
    };
    let mut report = ExperimentReport::new("lipschitz", sweep, vec![*setup.base.grid().spec()]);
    let runs = run_all(setup, 1)?;
    let tag = format!("n={n}");
    record_hypotheses(&mut report, &tag, &runs.hyp);
    let ok = admissible(setup, &runs.hyp);
    let s = NormSettings::default();
    let mut x = Vec::new();
    let mut y = Vec::new();
    let mut eps = Vec::new();
    for ((&e, u), &keep) in setup.eps.iter().zip(&runs.perturbed).zip(&ok) {
        if keep {
            x.push(setup.datum(e)?.sub(&setup.base)?.l2_norm());
            y.push(norm_value(&u.sub(&runs.base)?, &NormKind::S0, &s)?);
            eps.push(e);
        }
    }
    report.series(format!("{tag}: ||u - u~||_S0 vs ||u0 - u~0||_2"), x.clone(), y.clone());
    if let Some(f) = Fit::power_law(format!("{tag}: ||u - u~||_S0 vs eps"), &eps, &y) {
        report.value(format!("{tag}: prefactor against eps"), f.intercept.exp());
    }
    if let Some(fit) = report.fit(Fit::power_law(format!("{tag}: Lipschitz fit"), &x, &y), &tag) {
        report.value(format!("{tag}: prefactor"), fit.intercept.exp());
        report.check(Check::at_least(format!("{tag}: slope"), fit.slope, th.slope.0));
        report.check(Check::at_most(format!("{tag}: slope"), fit.slope, th.slope.1));
        report.check(Check::at_least(format!("{tag}: fitted decades"), fit.decades, th.min_decades - 1e-9));
    }
    Ok(report.finish())
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum Regime {
    /// One interval, one Picard solve per datum.
    Short,
    /// `windows` consecutive solves; the base run is also cut into pieces of
    /// critical spacetime norm at most `nu`.
    Long { windows: usize, nu: f64 },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct StabilityThresholds {
    /// Largest admissible `||u~||_W`.
    pub eps0: f64,
    pub besov_spread: f64,
}

impl Default for StabilityThresholds {
    fn default() -> Self {
        StabilityThresholds { eps0: 0.1, besov_spread: 3.0 }
    }
}

/// The exponent `theta` must reach this in dimension `n`: Lipschitz when
/// `4/(n-2) >= 1`, otherwise the Holder exponent `7/(n-2)^2` less a margin.
pub fn theta_threshold(n: usize) -> f64 {
    if n <= 6 {
        0.9
    } else {
        7.0 / ((n - 2) * (n - 2)) as f64 - 0.05
    }
}

/// `(sum_N ||P_N e^{it Delta} d||_W^2)^{1/2}` over the trajectory's lattice.
fn besov_w(d: &Field, interval: (f64, f64), steps: usize) -> Result<f64> {
    let free = Trajectory::free_evolution(d, interval.0, interval.1, steps)?;
    let range = d.grid().default_dyadic_range();
    let bands = band_norms(&free, range, &[w_exponents(d.grid().dim())], true)?;
    Ok(bands.iter().map(|b| b.values[0] * b.values[0]).sum::<f64>().sqrt())
}

/// Fit `||u - u~||_W ~ C eps^theta` with `eps = ||u0 - u~0||_H1`.
pub fn stability_experiment(setup: &PerturbationSetup, regime: Regime, th: &StabilityThresholds) -> Result<ExperimentReport> {
    let n = setup.base.grid().dim();
    let sweep = Sweep {
        dims: vec![n],
        seeds: vec![],
        schedule: setup.eps.clone(),
        description: "u0 = u~0 + eps ||u~0||_H1 d with unit H1 direction d".into(),
    };
    let mut report = ExperimentReport::new("stability", sweep, vec![*setup.base.grid().spec()]);
    let tag = format!("n={n}");
    let windows = match regime {
        Regime::Short => 1,
        Regime::Long { windows, .. } => windows,
    };
    let runs = run_all(setup, windows)?;
    record_hypotheses(&mut report, &tag, &runs.hyp);

    let base_ok = Check::at_most(format!("{tag}: hypothesis ||u~||_W <= eps0"), runs.hyp.base_w, th.eps0);
    if !base_ok.passed() {
        report.check(base_ok.inconclusive());
        report.note(format!("{tag}: base run too large for the stability hypothesis; no fit"));
        return Ok(report.finish());
    }
    report.check(base_ok);

    if let Regime::Long { nu, .. } = regime {
        let sub = subdivide_by_norm(&runs.base, nu, &critical_kind(n))?;
        report.value(format!("{tag}: pieces of norm <= nu"), sub.count() as f64);
        report.value(format!("{tag}: piece ceiling (1 + M/nu)^q"), sub.ceiling);
        report.check(Check::at_most(format!("{tag}: piece count within ceiling"), sub.count() as f64, sub.ceiling));
    }

    let ok = admissible(setup, &runs.hyp);
    let s = NormSettings::default();
    let mut x = Vec::new();
    let mut y = Vec::new();
    let mut besov = Vec::new();
    for ((&e, u), &keep) in setup.eps.iter().zip(&runs.perturbed).zip(&ok) {
        let d = setup.datum(e)?.sub(&setup.base)?;
        let size = d.sobolev_norm(1.0);
        besov.push(besov_w(&d, setup.interval, setup.steps)? / size);
        if keep {
            x.push(size);
            y.push(norm_value(&u.sub(&runs.base)?, &NormKind::W, &s)?);
        }
    }
    report.value(format!("{tag}: excluded by the forcing hypothesis"), ok.iter().filter(|k| !**k).count() as f64);
    report.series(format!("{tag}: Besov-form W / ||u0 - u~0||_H1"), setup.eps.clone(), besov.clone());
    report.check(Check::at_most(format!("{tag}: Besov-form hypothesis ratio spread"), spread(&besov), th.besov_spread));
    report.series(format!("{tag}: ||u - u~||_W vs ||u0 - u~0||_H1"), x.clone(), y.clone());
    if let Some(fit) = report.fit(Fit::power_law(format!("{tag}: stability exponent"), &x, &y), &tag) {
        let lip = 4.0 / (n as f64 - 2.0);
        report.value(format!("{tag}: theta"), fit.slope);
        report.value(format!("{tag}: theta exceeds 4/(n-2)"), f64::from(u8::from(fit.slope > lip)));
        report.check(Check::at_least(format!("{tag}: theta"), fit.slope, theta_threshold(n)));
    }
    Ok(report.finish())
}

/// One base datum and direction on one grid.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PerturbationCase {
    pub grid: GridSpec,
    pub base: DataSpec,
    pub direction: DataSpec,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PerturbationConfig {
    pub cases: Vec<PerturbationCase>,
    /// `W` norm of the free evolution of the base datum.
    pub w: f64,
    pub eps: Vec<f64>,
    pub horizon: f64,
    pub steps: usize,
    pub regime: Regime,
    pub lipschitz: LipschitzThresholds,
    pub stability: StabilityThresholds,
}

fn case(dim: usize, points: usize, seed: u64) -> PerturbationCase {
    PerturbationCase {
        grid: GridSpec { dim, mode: GridMode::Radial, extent: 24.0, points },
        base: DataSpec::Gaussian { width: 1.0 },
        direction: DataSpec::Random { seed, levels: vec![-1, 0] },
    }
}

impl Default for PerturbationConfig {
    fn default() -> Self {
        PerturbationConfig {
            cases: vec![case(3, 256, 7), case(7, 512, 7)],
            w: 0.05,
            eps: (0..7).map(|k| 10f64.powf(-1.0 - 0.5 * k as f64)).collect(),
            horizon: 0.5,
            steps: 64,
            regime: Regime::Short,
            lipschitz: LipschitzThresholds::default(),
            stability: StabilityThresholds::default(),
        }
    }
}

impl PerturbationConfig {
    /// The Lipschitz run: the first case only.
    pub fn lipschitz_only() -> Self {
        PerturbationConfig { cases: vec![case(3, 256, 7)], ..Self::default() }
    }

    pub fn setup(&self, c: &PerturbationCase) -> Result<PerturbationSetup> {
        let grid = Grid::new(c.grid)?;
        let base = scale_to_w(&c.base.build(&grid)?, self.w, self.horizon, self.steps)?;
        let spec = NonlinearitySpec::defocusing(c.grid.dim)?;
        PerturbationSetup::new(base, &c.direction.build(&grid)?, self.eps.clone(), spec, (0.0, self.horizon), self.steps)
    }
}

fn merge(id: &str, cfg: &PerturbationConfig, parts: Vec<ExperimentReport>) -> ExperimentReport {
    let sweep = Sweep {
        dims: cfg.cases.iter().map(|c| c.grid.dim).collect(),
        seeds: vec![],
        schedule: cfg.eps.clone(),
        description: format!("base data at W = {}, perturbations u~0 + eps ||u~0||_H1 d", cfg.w),
    };
    let mut report = ExperimentReport::new(id, sweep, cfg.cases.iter().map(|c| c.grid).collect());
    for p in parts {
        report.values.extend(p.values);
        report.series.extend(p.series);
        report.fits.extend(p.fits);
        report.checks.extend(p.checks);
        report.notes.extend(p.notes);
    }
    report.finish()
}

pub fn check_lipschitz(cfg: &PerturbationConfig) -> Result<ExperimentReport> {
    let parts = cfg.cases.iter().map(|c| lipschitz_experiment(&cfg.setup(c)?, &cfg.lipschitz)).collect::<Result<_>>()?;
    Ok(merge("lipschitz", cfg, parts))
}

pub fn check_stability(cfg: &PerturbationConfig) -> Result<ExperimentReport> {
    let parts = cfg.cases.iter().map(|c| stability_experiment(&cfg.setup(c)?, cfg.regime, &cfg.stability)).collect::<Result<_>>()?;
    Ok(merge("stability", cfg, parts))
}
