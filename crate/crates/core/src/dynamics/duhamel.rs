use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::spectral::fourier::propagator_symbol;
use crate::spectral::trajectory::physical_slices;
use crate::spectral::{Grid, Trajectory};

/// `e^{i delta Delta}` sampled at the frequency nodes.
pub(crate) fn step_symbol(grid: &Grid, delta: f64) -> Vec<Complex64> {
    grid.frequency_magnitudes().iter().map(|&k| propagator_symbol(delta, k)).collect()
}

/// Spectra of `-i int_{t_0}^{t_k} e^{i(t_k - s) Delta} F(s) ds` from the
/// spectra of `F(t_k)`, by the exponential trapezoid
/// `I_{k+1} = E (I_k + c F_k) + c F_{k+1}`, `c = -i delta / 2`.
pub(crate) fn duhamel_spectra(grid: &Grid, delta: f64, forcing: &[Vec<Complex64>]) -> Vec<Vec<Complex64>> {
    let e = step_symbol(grid, delta);
    let c = Complex64::new(0.0, -0.5 * delta);
    let mut out: Vec<Vec<Complex64>> = Vec::with_capacity(forcing.len());
    out.push(vec![Complex64::new(0.0, 0.0); grid.len()]);
    for k in 0..forcing.len().saturating_sub(1) {
        let prev = &out[k];
        let next = (0..grid.len()).map(|i| e[i] * (prev[i] + c * forcing[k][i]) + c * forcing[k + 1][i]).collect();
        out.push(next);
    }
    out
}

/// `t -> -i int_{t_0}^t e^{i(t-s) Delta} F(s) ds` on the forcing's lattice,
/// which must start at `t_0`.
pub fn duhamel_integral(forcing: &Trajectory, t0: f64) -> Result<Trajectory> {
    let (start, _) = forcing.interval();
    if (start - t0).abs() > 1e-12 * start.abs().max(forcing.step()) {
        return Err(Error::TimeLattice(format!("forcing starts at {start}, integral requested from {t0}")));
    }
    let grid = forcing.grid();
    let spectra = duhamel_spectra(grid, forcing.step(), &forcing.spectra());
    Trajectory::new(forcing.times().to_vec(), physical_slices(grid, &spectra))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::{propagate, relative_l2, Field, Repr};
    use std::f64::consts::PI;

    fn bump(g: &Grid) -> Field {
        Field::from_radial(g, |r| Complex64::new((-PI * r * r).exp(), 0.3 * r * (-PI * r * r).exp())).unwrap()
    }

    #[test]
    fn zero_forcing_gives_zero() {
        let g = Grid::radial(5, 10.0, 64).unwrap();
        let f = Trajectory::uniform(0.0, 1.0, vec![Field::zeros(&g, Repr::Physical); 5]).unwrap();
        assert!(duhamel_integral(&f, 0.0).unwrap().is_zero());
        assert!(matches!(duhamel_integral(&f, 0.5), Err(Error::TimeLattice(_))));
    }

    #[test]
    fn free_forcing_integrates_exactly() {
        // F(s) = e^{i s Delta} g  =>  I(t) = -i (t - t0) e^{i (t - t0) Delta} g
        for g in [Grid::full_tensor(3, 12.0, 32).unwrap(), Grid::radial(7, 12.0, 128).unwrap()] {
            let f0 = bump(&g);
            let (t0, t1) = (0.25, 1.25);
            let forcing = Trajectory::from_fn(t0, t1, 10, |t| Ok(propagate(&f0, t))).unwrap();
            let out = duhamel_integral(&forcing, t0).unwrap();
            for (t, s) in out.times().iter().zip(out.slices()) {
                let want = propagate(&f0, *t).scaled(Complex64::new(0.0, -(t - t0)));
                if *t > t0 {
                    let e = relative_l2(s, &want).unwrap();
                    assert!(e < 1e-12, "{e:e}");
                }
            }
        }
    }

    #[test]
    fn second_order_in_the_step() {
        // F(s) = (1 + s^2) cos(3 s) h, reference from a 10x finer lattice
        let g = Grid::radial(3, 10.0, 96).unwrap();
        let h = bump(&g);
        let forcing = |k: usize| Trajectory::from_fn(0.0, 1.0, k, |t| Ok(h.scaled((1.0 + t * t) * (3.0 * t).cos()))).unwrap();
        let reference = duhamel_integral(&forcing(640), 0.0).unwrap();
        let mut errs = Vec::new();
        for k in [16usize, 32, 64] {
            let d = duhamel_integral(&forcing(k), 0.0).unwrap();
            errs.push(relative_l2(d.last(), reference.last()).unwrap());
        }
        for w in errs.windows(2) {
            assert!(w[0] / w[1] >= 3.9, "{errs:?}");
        }
    }
}
