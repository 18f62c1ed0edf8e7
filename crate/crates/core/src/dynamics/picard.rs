use std::io::Write;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::duhamel::duhamel_spectra;
use super::nonlinearity::NonlinearitySpec;
use crate::error::{Error, Result};
use crate::norms::{critical_exponent, norm_value, NormKind, NormSettings};
use crate::spectral::fourier::{forward_many, inverse_many};
use crate::spectral::{time_lattice, Field, Repr, Trajectory};

/// Upper limit for the smallness threshold `eta`.
pub const ETA_0: f64 = 0.1;

/// Growth beyond this multiple of the initial sup norm counts as blowup.
pub const AMPLITUDE_CEILING: f64 = 1e6;

/// Mass allowed in the outer tenth of the domain.
pub const BOUNDARY_LIMIT: f64 = 1e-8;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverConfig {
    pub max_sweeps: usize,
    /// Relative sup-in-time `L^2` distance between successive iterates.
    pub tolerance: f64,
    /// Smallness threshold for the free evolution's `W` norm.
    pub eta: f64,
    /// Subdivision threshold for the interval ledger.
    pub nu: f64,
    /// Time steps of the uniform lattice.
    pub steps: usize,
    /// Record the `W` norm of every iterate.
    pub track_iterates: bool,
    pub time_rule: String,
    pub quadrature: String,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            max_sweeps: 60,
            tolerance: 1e-12,
            eta: ETA_0,
            nu: 1.0,
            steps: 64,
            track_iterates: false,
            time_rule: "uniform".into(),
            quadrature: "exponential-trapezoid".into(),
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.eta > 0.0 && self.eta <= ETA_0) {
            return Err(Error::InvalidArgument(format!("eta must lie in (0, {ETA_0}], got {}", self.eta)));
        }
        if !(self.tolerance > 0.0) || !(self.nu > 0.0) {
            return Err(Error::InvalidArgument("tolerance and nu must be positive".into()));
        }
        if self.steps == 0 || self.max_sweeps == 0 {
            return Err(Error::InvalidArgument("steps and max_sweeps must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LedgerEntry {
    pub t0: f64,
    pub t1: f64,
    pub kind: NormKind,
    pub value: f64,
}

/// Everything about a solve except the trajectory itself.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolveSummary {
    pub config: SolverConfig,
    pub nonlinearity: NonlinearitySpec,
    pub interval: (f64, f64),
    pub free_w_norm: f64,
    /// Relative distance between iterates `m` and `m + 1`.
    pub history: Vec<f64>,
    pub iterate_w_norms: Vec<f64>,
    pub sweeps: usize,
    /// Relative defect of the returned trajectory in the integral equation.
    pub residual: f64,
    pub ledger: Vec<LedgerEntry>,
}

impl SolveSummary {
    pub fn write_json(&self, w: impl Write) -> Result<()> {
        serde_json::to_writer_pretty(w, self)?;
        Ok(())
    }

    /// Successive ratios of the difference history.
    pub fn contraction_ratios(&self) -> Vec<f64> {
        self.history.windows(2).filter(|w| w[0] > 0.0).map(|w| w[1] / w[0]).collect()
    }
}

#[derive(Clone, Debug)]
pub struct SolveResult {
    pub trajectory: Trajectory,
    pub summary: SolveSummary,
}

fn sup_l2(grid: &crate::spectral::Grid, slices: &[Vec<Complex64>]) -> f64 {
    slices.iter().map(|s| grid.integrate(&s.iter().map(|z| z.norm_sqr()).collect::<Vec<_>>()).sqrt()).fold(0.0, f64::max)
}

fn sup_l2_distance(grid: &crate::spectral::Grid, a: &[Vec<Complex64>], b: &[Vec<Complex64>]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| grid.integrate(&x.iter().zip(y).map(|(p, q)| (p - q).norm_sqr()).collect::<Vec<_>>()).sqrt())
        .fold(0.0, f64::max)
}

pub(crate) fn check_finite(slices: &[Vec<Complex64>], ceiling: f64, step_of: impl Fn(usize) -> usize) -> Result<()> {
    for (k, s) in slices.iter().enumerate() {
        for z in s {
            if !z.is_finite() {
                return Err(Error::Divergence { step: step_of(k), reason: "non-finite sample".into() });
            }
            if z.norm() > ceiling {
                return Err(Error::Divergence {
                    step: step_of(k),
                    reason: format!("amplitude {:.3e} above ceiling {ceiling:.3e}", z.norm()),
                });
            }
        }
    }
    Ok(())
}

/// Solve the integral equation `u = e^{i(t-t0)Delta} u0 - i int e^{i(t-s)Delta} f(u(s)) ds`
/// by Picard iteration on a uniform lattice over `interval`.
pub fn picard_solve(u0: &Field, interval: (f64, f64), spec: &NonlinearitySpec, config: &SolverConfig) -> Result<SolveResult> {
    config.validate()?;
    let (t0, t1) = interval;
    if !(t1 > t0) {
        return Err(Error::InvalidArgument(format!("empty interval [{t0}, {t1}]")));
    }
    if spec.dim() != u0.grid().dim() {
        return Err(Error::Contract(format!("nonlinearity for n = {} on a grid with n = {}", spec.dim(), u0.grid().dim())));
    }
    let grid = u0.grid();
    let u0 = u0.to_physical();
    u0.check_boundary_mass(BOUNDARY_LIMIT)?;
    let free = Trajectory::free_evolution(&u0, t0, t1, config.steps)?;
    let settings = NormSettings::default();
    let free_w_norm = norm_value(&free, &NormKind::W, &settings)?;
    if free_w_norm > config.eta {
        return Err(Error::SmallnessViolated { measured: free_w_norm, eta: config.eta });
    }

    let delta = free.step();
    let times = time_lattice(t0, t1, config.steps);
    let ceiling = AMPLITUDE_CEILING * u0.sup_norm();
    let views = |v: &[Vec<Complex64>]| -> Vec<Vec<Complex64>> {
        let refs: Vec<&[Complex64]> = v.iter().map(|s| s.as_slice()).collect();
        forward_many(grid, &refs)
    };
    // one sweep: u -> free + D(f(u)), physical in and out
    let sweep = |u: &[Vec<Complex64>]| -> Vec<Vec<Complex64>> {
        let f: Vec<Vec<Complex64>> = u.iter().map(|s| grid.pointwise(s).iter().map(|&z| spec.eval(z)).collect()).collect();
        let d = duhamel_spectra(grid, delta, &views(&f));
        let refs: Vec<&[Complex64]> = d.iter().map(|s| s.as_slice()).collect();
        let d = inverse_many(grid, &refs);
        d.into_iter().zip(free.slices()).map(|(a, b)| a.iter().zip(b.samples()).map(|(x, y)| x + y).collect()).collect()
    };
    let to_traj = |u: &[Vec<Complex64>]| -> Result<Trajectory> {
        let slices = u.iter().map(|s| Field::new(grid, Repr::Physical, s.clone())).collect::<Result<Vec<_>>>()?;
        Trajectory::new(times.clone(), slices)
    };

    let mut u: Vec<Vec<Complex64>> = free.slices().iter().map(|s| s.samples().to_vec()).collect();
    let mut history = Vec::new();
    let mut iterate_w_norms = Vec::new();
    if config.track_iterates {
        iterate_w_norms.push(free_w_norm);
    }
    let mut converged = false;
    for m in 0..config.max_sweeps {
        let next = sweep(&u);
        check_finite(&next, ceiling, |k| k).map_err(|e| match e {
            Error::Divergence { reason, .. } => Error::Divergence { step: m + 1, reason: format!("Picard iterate {}: {reason}", m + 1) },
            e => e,
        })?;
        let scale = sup_l2(grid, &next);
        let diff = sup_l2_distance(grid, &next, &u);
        let rel = if scale > 0.0 { diff / scale } else { diff };
        history.push(rel);
        u = next;
        if config.track_iterates {
            iterate_w_norms.push(norm_value(&to_traj(&u)?, &NormKind::W, &settings)?);
        }
        if rel <= config.tolerance {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(Error::NoContraction {
            sweeps: config.max_sweeps,
            last: history.last().copied().unwrap_or(f64::NAN),
            w_norm: free_w_norm,
        });
    }

    let check = sweep(&u);
    let scale = sup_l2(grid, &u);
    let residual = if scale > 0.0 { sup_l2_distance(grid, &check, &u) / scale } else { 0.0 };
    let trajectory = to_traj(&u)?;
    trajectory.last().check_boundary_mass(BOUNDARY_LIMIT)?;

    let n = grid.dim();
    let p = critical_exponent(n);
    let ledger = [NormKind::W, NormKind::MixedLebesgue { q: p, r: p }]
        .into_iter()
        .map(|kind| {
            let value = norm_value(&trajectory, &kind, &settings)?;
            Ok(LedgerEntry { t0, t1, kind, value })
        })
        .collect::<Result<Vec<_>>>()?;

    let summary = SolveSummary {
        config: config.clone(),
        nonlinearity: spec.clone(),
        interval,
        free_w_norm,
        sweeps: history.len(),
        history,
        iterate_w_norms,
        residual,
        ledger,
    };
    Ok(SolveResult { trajectory, summary })
}

/// `sup_t ||a(t) - b(t)||_2`, the contraction metric.
pub fn sup_l2_gap(a: &Trajectory, b: &Trajectory) -> Result<f64> {
    let d = a.sub(b)?;
    Ok(d.slices().iter().map(Field::l2_norm).fold(0.0, f64::max))
}
