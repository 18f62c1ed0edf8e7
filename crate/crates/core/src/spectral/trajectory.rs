use num_complex::Complex64;

use super::field::{Field, Repr};
use super::fourier::{forward_many, inverse_many, propagator_symbol};
use super::grid::Grid;
use crate::error::{Error, Result};

/// Uniformly sampled physical slices `u(t_k)`, `t_k = t0 + k (t1 - t0) / K`.
#[derive(Clone, Debug, PartialEq)]
pub struct Trajectory {
    grid: Grid,
    times: Vec<f64>,
    slices: Vec<Field>,
}

const UNIFORM_TOLERANCE: f64 = 1e-12;

/// `K + 1` uniformly spaced times from `t0` to `t1`, endpoints exact.
pub fn time_lattice(t0: f64, t1: f64, steps: usize) -> Vec<f64> {
    let dt = (t1 - t0) / steps as f64;
    let mut t: Vec<f64> = (0..=steps).map(|k| t0 + k as f64 * dt).collect();
    if let Some(last) = t.last_mut() {
        *last = t1;
    }
    t
}

impl Trajectory {
    pub fn new(times: Vec<f64>, slices: Vec<Field>) -> Result<Trajectory> {
        let first = slices.first().ok_or(Error::EmptyTrajectory)?;
        let grid = first.grid().clone();
        if times.len() != slices.len() {
            return Err(Error::TimeLattice(format!("{} times for {} slices", times.len(), slices.len())));
        }
        if times.len() < 2 {
            return Err(Error::TimeLattice("a trajectory needs both endpoints of a nondegenerate interval".into()));
        }
        if times.iter().any(|t| !t.is_finite()) {
            return Err(Error::TimeLattice("non-finite sample time".into()));
        }
        let dt = (times[times.len() - 1] - times[0]) / (times.len() - 1) as f64;
        if !(dt > 0.0) {
            return Err(Error::TimeLattice("times must be strictly increasing".into()));
        }
        for (k, t) in times.iter().enumerate() {
            let want = times[0] + k as f64 * dt;
            if (t - want).abs() > UNIFORM_TOLERANCE * dt.max(want.abs()) {
                return Err(Error::TimeLattice(format!("sample {k} at t = {t} breaks uniform spacing {dt}")));
            }
        }
        for s in &slices {
            if *s.grid() != grid {
                return Err(Error::Contract("trajectory slices live on different grids".into()));
            }
            if s.repr() != Repr::Physical {
                return Err(Error::Contract("trajectory slices must be physical".into()));
            }
        }
        Ok(Trajectory { grid, times, slices })
    }

    /// Slices at `time_lattice(t0, t1, slices.len() - 1)`.
    pub fn uniform(t0: f64, t1: f64, slices: Vec<Field>) -> Result<Trajectory> {
        if slices.is_empty() {
            return Err(Error::EmptyTrajectory);
        }
        let times = time_lattice(t0, t1, slices.len().saturating_sub(1).max(1));
        Trajectory::new(times, slices)
    }

    pub fn from_fn(t0: f64, t1: f64, steps: usize, f: impl Fn(f64) -> Result<Field>) -> Result<Trajectory> {
        if steps == 0 {
            return Err(Error::TimeLattice("need at least one time step".into()));
        }
        let times = time_lattice(t0, t1, steps);
        let slices = times.iter().map(|&t| f(t).map(|s| s.to_physical())).collect::<Result<Vec<_>>>()?;
        Trajectory::new(times, slices)
    }

    /// `t -> e^{i(t - t0) Delta} u0` on the lattice.
    pub fn free_evolution(u0: &Field, t0: f64, t1: f64, steps: usize) -> Result<Trajectory> {
        if steps == 0 {
            return Err(Error::TimeLattice("need at least one time step".into()));
        }
        let grid = u0.grid();
        let times = time_lattice(t0, t1, steps);
        let spec = u0.to_frequency();
        let mags = grid.frequency_magnitudes();
        let spectra: Vec<Vec<Complex64>> =
            times.iter().map(|&t| spec.samples().iter().zip(mags).map(|(z, &k)| z * propagator_symbol(t - t0, k)).collect()).collect();
        let slices = physical_slices(grid, &spectra);
        Trajectory::new(times, slices)
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn slices(&self) -> &[Field] {
        &self.slices
    }

    pub fn into_slices(self) -> Vec<Field> {
        self.slices
    }

    pub fn len(&self) -> usize {
        self.slices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.slices.is_empty()
    }

    pub fn interval(&self) -> (f64, f64) {
        (self.times[0], self.times[self.times.len() - 1])
    }

    pub fn step(&self) -> f64 {
        let (t0, t1) = self.interval();
        (t1 - t0) / (self.len() - 1) as f64
    }

    pub fn first(&self) -> &Field {
        &self.slices[0]
    }

    pub fn last(&self) -> &Field {
        &self.slices[self.slices.len() - 1]
    }

    pub fn is_zero(&self) -> bool {
        self.slices.iter().all(Field::is_zero)
    }

    /// Slices `i0..=i1`.
    pub fn restrict(&self, i0: usize, i1: usize) -> Result<Trajectory> {
        if i0 >= i1 || i1 >= self.len() {
            return Err(Error::InvalidArgument(format!("bad slice range {i0}..={i1} of {}", self.len())));
        }
        Trajectory::new(self.times[i0..=i1].to_vec(), self.slices[i0..=i1].to_vec())
    }

    pub fn map(&self, f: impl Fn(&Field) -> Field) -> Trajectory {
        Trajectory { grid: self.grid.clone(), times: self.times.clone(), slices: self.slices.iter().map(f).collect() }
    }

    pub fn scaled(&self, c: impl Into<Complex64>) -> Trajectory {
        let c = c.into();
        self.map(|s| s.scaled(c))
    }

    fn check_same_lattice(&self, other: &Trajectory) -> Result<()> {
        if self.grid != other.grid {
            return Err(Error::Contract("trajectories live on different grids".into()));
        }
        if self.times != other.times {
            return Err(Error::TimeLattice("trajectories have different sample times".into()));
        }
        Ok(())
    }

    /// `self + a * other`
    pub fn axpy(&self, a: impl Into<Complex64>, other: &Trajectory) -> Result<Trajectory> {
        self.check_same_lattice(other)?;
        let a = a.into();
        let slices = self.slices.iter().zip(&other.slices).map(|(x, y)| x.axpy(a, y)).collect::<Result<Vec<_>>>()?;
        Ok(Trajectory { grid: self.grid.clone(), times: self.times.clone(), slices })
    }

    pub fn sub(&self, other: &Trajectory) -> Result<Trajectory> {
        self.axpy(-1.0, other)
    }

    /// Spectra of every slice.
    pub fn spectra(&self) -> Vec<Vec<Complex64>> {
        let views: Vec<&[Complex64]> = self.slices.iter().map(|s| s.samples()).collect();
        forward_many(&self.grid, &views)
    }
}

pub(crate) fn physical_slices(grid: &Grid, spectra: &[Vec<Complex64>]) -> Vec<Field> {
    let views: Vec<&[Complex64]> = spectra.iter().map(|v| v.as_slice()).collect();
    inverse_many(grid, &views).into_iter().map(|v| Field::from_parts(grid, Repr::Physical, v)).collect()
}
