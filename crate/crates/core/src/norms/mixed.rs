use num_complex::Complex64;

use super::exponent::Exponent;
use crate::error::Result;
use crate::spectral::field::lebesgue;
use crate::spectral::fourier::{gradient_many, inverse_many};
use crate::spectral::{Grid, Trajectory};

/// Pointwise magnitudes of a scalar or vector trajectory, one vector per
/// time sample, on a uniform lattice with step `dt`.
pub(crate) struct Profile<'g> {
    pub grid: &'g Grid,
    pub dt: f64,
    pub slices: Vec<Vec<f64>>,
}

impl<'g> Profile<'g> {
    /// `|u(t_k, x)|`
    pub fn of(u: &'g Trajectory) -> Profile<'g> {
        let slices = u.slices().iter().map(|s| u.grid().pointwise(s.samples()).iter().map(|z| z.norm_sqr().sqrt()).collect()).collect();
        Profile { grid: u.grid(), dt: u.step(), slices }
    }

    /// `|m(D) u|` from the spectra of the slices.
    pub fn filtered(grid: &'g Grid, dt: f64, spectra: &[Vec<Complex64>], m: impl Fn(f64) -> f64) -> Profile<'g> {
        let masked = mask(grid, spectra, m);
        let views: Vec<&[Complex64]> = masked.iter().map(|v| v.as_slice()).collect();
        let slices =
            inverse_many(grid, &views).into_iter().map(|v| grid.pointwise(&v).iter().map(|z| z.norm_sqr().sqrt()).collect()).collect();
        Profile { grid, dt, slices }
    }

    /// `|grad m(D) u|`, the Euclidean length of the gradient.
    pub fn filtered_gradient(grid: &'g Grid, dt: f64, spectra: &[Vec<Complex64>], m: impl Fn(f64) -> f64) -> Profile<'g> {
        let masked = mask(grid, spectra, m);
        let views: Vec<&[Complex64]> = masked.iter().map(|v| v.as_slice()).collect();
        let slices = gradient_many(grid, &views)
            .into_iter()
            .map(|comps| (0..grid.len()).map(|i| comps.iter().map(|c| c[i].norm_sqr()).sum::<f64>().sqrt()).collect())
            .collect();
        Profile { grid, dt, slices }
    }

    /// Spatial `L^r` per slice, then temporal `L^q`.
    pub fn norm(&self, q: Exponent, r: Exponent) -> f64 {
        temporal(&self.spatial(r), self.dt, q)
    }

    pub fn spatial(&self, r: Exponent) -> Vec<f64> {
        self.slices.iter().map(|s| lebesgue(self.grid, s.iter().copied(), r.value())).collect()
    }

    /// `(sum_k |a_k|^2)^{1/2}` pointwise, for square functions.
    pub fn accumulate_square(&mut self, other: &Profile) {
        for (a, b) in self.slices.iter_mut().zip(&other.slices) {
            a.iter_mut().zip(b).for_each(|(x, y)| *x = x.hypot(*y));
        }
    }
}

fn mask(grid: &Grid, spectra: &[Vec<Complex64>], m: impl Fn(f64) -> f64) -> Vec<Vec<Complex64>> {
    let weights: Vec<f64> = grid.frequency_magnitudes().iter().map(|&k| m(k)).collect();
    spectra.iter().map(|s| s.iter().zip(&weights).map(|(z, w)| z * w).collect()).collect()
}

/// Composite trapezoid for `(int g^q dt)^{1/q}`; `q = inf` is the discrete max.
pub(crate) fn temporal(values: &[f64], dt: f64, q: Exponent) -> f64 {
    if q.is_infinite() {
        return values.iter().copied().fold(0.0, f64::max);
    }
    let q = q.value();
    let last = values.len().saturating_sub(1);
    let sum: f64 = values
        .iter()
        .enumerate()
        .map(|(k, v)| {
            let w = if k == 0 || k == last { 0.5 } else { 1.0 };
            w * v.powf(q)
        })
        .sum();
    (sum * dt).powf(1.0 / q)
}

/// `||u||_{L^q_t L^r_x}` over the trajectory's interval.
pub fn mixed_norm(u: &Trajectory, q: Exponent, r: Exponent) -> Result<f64> {
    q.check_lebesgue()?;
    r.check_lebesgue()?;
    Ok(Profile::of(u).norm(q, r))
}

/// `||grad u||_{L^q_t L^r_x}` with the gradient taken spectrally.
pub fn gradient_mixed_norm(u: &Trajectory, q: Exponent, r: Exponent) -> Result<f64> {
    q.check_lebesgue()?;
    r.check_lebesgue()?;
    let spectra = u.spectra();
    Ok(Profile::filtered_gradient(u.grid(), u.step(), &spectra, |_| 1.0).norm(q, r))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::{Field, Repr};
    use std::f64::consts::PI;

    #[test]
    fn zero_trajectory_has_zero_norm() {
        let g = Grid::radial(3, 8.0, 32).unwrap();
        let u = Trajectory::uniform(0.0, 1.0, vec![Field::zeros(&g, Repr::Physical); 4]).unwrap();
        assert_eq!(mixed_norm(&u, Exponent::int(2), Exponent::int(6)).unwrap(), 0.0);
        assert_eq!(mixed_norm(&u, Exponent::INF, Exponent::INF).unwrap(), 0.0);
    }

    #[test]
    fn constant_gaussian_slice() {
        for n in [3usize, 7] {
            let g = Grid::radial(n, 8.0, 128).unwrap();
            let f = Field::from_radial(&g, |r| Complex64::new((-PI * r * r).exp(), 0.0)).unwrap();
            let u = Trajectory::uniform(0.0, 1.0, vec![f; 5]).unwrap();
            let want = 2f64.powf(-(n as f64) / 4.0);
            assert!((mixed_norm(&u, Exponent::INF, Exponent::int(2)).unwrap() - want).abs() < 1e-6);
            // |I|^{1/q} ||f||_r with |I| = 1
            assert!((mixed_norm(&u, Exponent::int(3), Exponent::int(2)).unwrap() - want).abs() < 1e-6);
        }
        let g = Grid::full_tensor(3, 8.0, 32).unwrap();
        let f = Field::from_radial(&g, |r| Complex64::new((-PI * r * r).exp(), 0.0)).unwrap();
        let u = Trajectory::uniform(0.0, 1.0, vec![f; 3]).unwrap();
        assert!((mixed_norm(&u, Exponent::INF, Exponent::int(2)).unwrap() - 2f64.powf(-0.75)).abs() < 1e-6);
    }

    #[test]
    fn trapezoid_is_exact_for_linear_powers() {
        // g(t) = t on [0, 1], q = 1
        let v: Vec<f64> = (0..=4).map(|k| k as f64 / 4.0).collect();
        assert!((temporal(&v, 0.25, Exponent::int(1)) - 0.5).abs() < 1e-15);
        assert_eq!(temporal(&v, 0.25, Exponent::INF), 1.0);
    }

    #[test]
    fn rejects_sub_unit_exponents() {
        let g = Grid::radial(3, 8.0, 16).unwrap();
        let u = Trajectory::uniform(0.0, 1.0, vec![Field::zeros(&g, Repr::Physical); 2]).unwrap();
        assert!(mixed_norm(&u, Exponent::ratio(1, 2).unwrap(), Exponent::int(2)).is_err());
    }
}
