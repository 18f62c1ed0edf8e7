use num_complex::Complex64;

use super::duhamel::step_symbol;
use super::nonlinearity::{abs_pow, NonlinearitySpec};
use super::picard::{check_finite, AMPLITUDE_CEILING};
use crate::error::{Error, Result};
use crate::spectral::fourier::{forward_many, inverse_many};
use crate::spectral::{time_lattice, Field, Repr, Trajectory};

/// Strang splitting with steps of length `delta`: half a free step, the exact
/// phase rotation `u -> u e^{-i mu |u|^p delta}`, half a free step.
/// Every `record_every`-th step is kept, so the result lives on a lattice
/// of `steps / record_every` panels.
pub fn split_step_solve(u0: &Field, interval: (f64, f64), spec: &NonlinearitySpec, delta: f64, record_every: usize) -> Result<Trajectory> {
    let (t0, t1) = interval;
    if !(delta > 0.0) || !(t1 > t0) {
        return Err(Error::InvalidArgument(format!("need delta > 0 and t1 > t0, got {delta} on [{t0}, {t1}]")));
    }
    if spec.has_hook() {
        return Err(Error::Contract("split stepping needs a gauge-invariant power nonlinearity".into()));
    }
    let steps = ((t1 - t0) / delta).round() as usize;
    if steps == 0 || ((steps as f64) * delta - (t1 - t0)).abs() > 1e-9 * (t1 - t0) {
        return Err(Error::InvalidArgument(format!("delta = {delta} does not divide [{t0}, {t1}]")));
    }
    if record_every == 0 || steps % record_every != 0 {
        return Err(Error::InvalidArgument(format!("record_every = {record_every} must divide {steps} steps")));
    }
    let grid = u0.grid();
    let delta = (t1 - t0) / steps as f64;
    let half = step_symbol(grid, delta / 2.0);
    let (mu, p) = (spec.mu(), spec.power());
    let ceiling = AMPLITUDE_CEILING * u0.sup_norm();

    let mut hat = u0.to_frequency().into_samples();
    let mut slices = vec![u0.to_physical()];
    for step in 1..=steps {
        hat.iter_mut().zip(&half).for_each(|(z, e)| *z *= e);
        let mut phys = inverse_many(grid, &[&hat]).pop().unwrap_or_default();
        if mu != 0.0 {
            // rotate the physical part; a spurious radial component rides along unchanged
            let clean = grid.pointwise(&phys).into_owned();
            for (z, c) in phys.iter_mut().zip(&clean) {
                *z += c * (Complex64::from_polar(1.0, -mu * abs_pow(*c, p) * delta) - 1.0);
            }
        }
        check_finite(std::slice::from_ref(&phys), ceiling, |_| step)?;
        hat = forward_many(grid, &[&phys]).pop().unwrap_or_default();
        hat.iter_mut().zip(&half).for_each(|(z, e)| *z *= e);
        if step % record_every == 0 {
            let out = inverse_many(grid, &[&hat]).pop().unwrap_or_default();
            check_finite(std::slice::from_ref(&out), ceiling, |_| step)?;
            slices.push(Field::new(grid, Repr::Physical, out)?);
        }
    }
    Trajectory::new(time_lattice(t0, t1, steps / record_every), slices)
}
