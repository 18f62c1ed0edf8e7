use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spectral::{propagate, Field, Trajectory};

/// Increments below this fraction of `sup ||v||_{H^1}` are roundoff.
const NOISE_FLOOR: f64 = 1e-12;

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ScatteringReport {
    pub times: Vec<f64>,
    /// `||v(t_{k+1}) - v(t_k)||_{H^1}`
    pub increments: Vec<f64>,
    /// `||v(t_k) - v(T)||_{H^1}`
    pub distance_to_final: Vec<f64>,
    /// Last increment over the first nonzero one.
    pub tail_ratio: f64,
}

#[derive(Clone, Debug)]
pub struct ScatteringState {
    /// `v(T) = e^{-iT Delta} u(T)`, the candidate for `u_+(0)`.
    pub state: Field,
    pub report: ScatteringReport,
}

/// Pull the trajectory back along the free flow, `v(t) = e^{-it Delta} u(t)`,
/// and check that `v` settles: the second half of the increment sequence
/// must be non-increasing, ignoring increments at roundoff level.
pub fn scattering_state(u: &Trajectory) -> Result<ScatteringState> {
    let v: Vec<Field> = u.times().iter().zip(u.slices()).map(|(&t, s)| propagate(s, -t)).collect();
    let increments: Vec<f64> = v.windows(2).map(|w| w[1].sub(&w[0]).map(|d| d.sobolev_norm(1.0))).collect::<Result<_>>()?;
    let last = v.last().ok_or(Error::EmptyTrajectory)?;
    let distance_to_final = v.iter().map(|s| s.sub(last).map(|d| d.sobolev_norm(1.0))).collect::<Result<Vec<_>>>()?;
    let scale = v.iter().map(|s| s.sobolev_norm(1.0)).fold(0.0, f64::max);
    let floor = NOISE_FLOOR * scale;
    let first = increments.iter().copied().find(|&d| d > floor);
    let tail_ratio = match first {
        Some(f) => increments.last().copied().unwrap_or(0.0) / f,
        None => 0.0,
    };
    let tail = &increments[increments.len() / 2..];
    let rising = tail.windows(2).any(|w| w[1] > floor && w[1] > w[0]);
    if rising {
        return Err(Error::NoScattering {
            horizon: u.interval().1,
            reason: format!("increments still grow near the horizon (last/first = {tail_ratio:.3e})"),
        });
    }
    Ok(ScatteringState {
        state: last.clone(),
        report: ScatteringReport { times: u.times().to_vec(), increments, distance_to_final, tail_ratio },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::{split_step_solve, NonlinearitySpec};
    use crate::spectral::{relative_l2, Grid, Repr};
    use num_complex::Complex64;
    use std::f64::consts::PI;

    #[test]
    fn free_evolution_scatters_to_its_data() {
        let g = Grid::radial(3, 30.0, 256).unwrap();
        let f = Field::from_radial(&g, |r| Complex64::new((-PI * r * r).exp(), 0.0)).unwrap();
        let u = Trajectory::free_evolution(&f, 0.0, 2.0, 10).unwrap();
        let s = scattering_state(&u).unwrap();
        assert!(relative_l2(&s.state, &f).unwrap() < 1e-13);
        assert!(s.report.increments.iter().all(|&d| d < 1e-12));
    }

    #[test]
    fn zero_data() {
        let g = Grid::radial(3, 10.0, 32).unwrap();
        let u = Trajectory::uniform(0.0, 1.0, vec![Field::zeros(&g, Repr::Physical); 3]).unwrap();
        assert!(scattering_state(&u).unwrap().state.is_zero());
    }

    #[test]
    fn small_defocusing_run_settles() {
        let g = Grid::radial(3, 60.0, 512).unwrap();
        let f = Field::from_radial(&g, |r| Complex64::new(0.3 * (-PI * r * r / 4.0).exp(), 0.0)).unwrap();
        let spec = NonlinearitySpec::defocusing(3).unwrap();
        let u = split_step_solve(&f, (0.0, 4.0), &spec, 1e-2, 20).unwrap();
        let s = scattering_state(&u).unwrap();
        let d = &s.report.distance_to_final;
        assert!(d[d.len() / 2..].windows(2).all(|w| w[1] <= w[0]));
        assert!(s.report.tail_ratio < 1e-2, "{}", s.report.tail_ratio);
    }

    #[test]
    fn growing_tail_is_reported() {
        let g = Grid::radial(3, 10.0, 32).unwrap();
        let f = Field::from_radial(&g, |r| Complex64::new((-PI * r * r).exp(), 0.0)).unwrap();
        let slices = (0..6).map(|k| f.scaled((k * k) as f64)).collect();
        let u = Trajectory::uniform(0.0, 1.0, slices).unwrap();
        // v(t) = e^{-it Delta}(k^2 f) has growing increments
        assert!(matches!(scattering_state(&u), Err(Error::NoScattering { .. })));
    }
}
