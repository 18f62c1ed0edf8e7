use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::fourier;
use super::grid::Grid;
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Repr {
    Physical,
    Frequency,
}

/// Complex samples on a grid, either at the physical nodes or at the
/// frequency nodes. Full-tensor samples are stored row-major with the last
/// axis contiguous; frequency samples are in FFT order.
#[derive(Clone, Debug)]
pub struct Field {
    grid: Grid,
    repr: Repr,
    data: Vec<Complex64>,
}

impl PartialEq for Field {
    fn eq(&self, other: &Self) -> bool {
        self.grid == other.grid && self.repr == other.repr && self.data == other.data
    }
}

impl Field {
    pub fn new(grid: &Grid, repr: Repr, data: Vec<Complex64>) -> Result<Field> {
        if data.len() != grid.len() {
            return Err(Error::Contract(format!("{} samples supplied for a grid of {}", data.len(), grid.len())));
        }
        if let Some(i) = data.iter().position(|z| !z.is_finite()) {
            return Err(Error::Contract(format!("non-finite sample at index {i}")));
        }
        Ok(Field { grid: grid.clone(), repr, data })
    }

    /// Internal constructor for operations whose outputs are finite by construction.
    pub(crate) fn from_parts(grid: &Grid, repr: Repr, data: Vec<Complex64>) -> Field {
        debug_assert_eq!(data.len(), grid.len());
        Field { grid: grid.clone(), repr, data }
    }

    pub fn zeros(grid: &Grid, repr: Repr) -> Field {
        Field::from_parts(grid, repr, vec![Complex64::new(0.0, 0.0); grid.len()])
    }

    /// Sample `f(x)` at the physical nodes. On radial grids `x` is `[r]`.
    pub fn from_fn(grid: &Grid, f: impl Fn(&[f64]) -> Complex64) -> Result<Field> {
        let mut x = vec![0.0; grid.dim()];
        let data = (0..grid.len())
            .map(|i| {
                grid.point(i, &mut x);
                f(&x)
            })
            .collect();
        Field::new(grid, Repr::Physical, data)
    }

    /// Sample a radial profile `f(|x|)`; works on both grid modes.
    pub fn from_radial(grid: &Grid, f: impl Fn(f64) -> Complex64) -> Result<Field> {
        let data = grid.radii().iter().map(|&r| f(r)).collect();
        Field::new(grid, Repr::Physical, data)
    }

    /// Sample a spectrum `g(xi)` at the frequency nodes. On radial grids `xi` is `[|xi|]`.
    pub fn from_spectrum(grid: &Grid, g: impl Fn(&[f64]) -> Complex64) -> Result<Field> {
        let mut xi = vec![0.0; grid.dim()];
        let data = (0..grid.len())
            .map(|i| {
                grid.frequency(i, &mut xi);
                g(&xi)
            })
            .collect();
        Field::new(grid, Repr::Frequency, data)
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn repr(&self) -> Repr {
        self.repr
    }

    pub fn samples(&self) -> &[Complex64] {
        &self.data
    }

    pub fn into_samples(self) -> Vec<Complex64> {
        self.data
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|z| z.re == 0.0 && z.im == 0.0)
    }

    pub fn to_physical(&self) -> Field {
        match self.repr {
            Repr::Physical => self.clone(),
            Repr::Frequency => fourier::inverse_unchecked(self),
        }
    }

    pub fn to_frequency(&self) -> Field {
        match self.repr {
            Repr::Frequency => self.clone(),
            Repr::Physical => fourier::forward_unchecked(self),
        }
    }

    pub fn scaled(&self, c: impl Into<Complex64>) -> Field {
        let c = c.into();
        self.map(|z| z * c)
    }

    /// Pointwise map; the caller guarantees finite outputs for finite inputs.
    pub fn map(&self, f: impl Fn(Complex64) -> Complex64) -> Field {
        Field::from_parts(&self.grid, self.repr, self.data.iter().map(|&z| f(z)).collect())
    }

    fn check_compatible(&self, other: &Field) -> Result<()> {
        if self.grid != other.grid {
            return Err(Error::Contract(format!("grids differ: {:?} vs {:?}", self.grid, other.grid)));
        }
        if self.repr != other.repr {
            return Err(Error::Contract(format!("representations differ: {:?} vs {:?}", self.repr, other.repr)));
        }
        Ok(())
    }

    /// `self + a * other`
    pub fn axpy(&self, a: impl Into<Complex64>, other: &Field) -> Result<Field> {
        self.check_compatible(other)?;
        let a = a.into();
        let data = self.data.iter().zip(&other.data).map(|(x, y)| x + a * y).collect();
        Field::new(&self.grid, self.repr, data)
    }

    pub fn add(&self, other: &Field) -> Result<Field> {
        self.axpy(1.0, other)
    }

    pub fn sub(&self, other: &Field) -> Result<Field> {
        self.axpy(-1.0, other)
    }

    /// `||f||_2`, computed on whichever side of the transform the samples live.
    pub fn l2_norm(&self) -> f64 {
        let dens: Vec<f64> = self.data.iter().map(|z| z.norm_sqr()).collect();
        match self.repr {
            Repr::Physical => self.grid.integrate(&dens).sqrt(),
            Repr::Frequency => self.grid.integrate_frequency(&dens).sqrt(),
        }
    }

    /// `||f||_{L^r}` over physical samples; `r = inf` gives the max.
    pub fn lp_norm(&self, r: f64) -> f64 {
        let f = self.to_physical();
        lebesgue(&self.grid, self.grid.pointwise(&f.data).iter().map(|z| z.norm_sqr().sqrt()), r)
    }

    pub fn sup_norm(&self) -> f64 {
        self.lp_norm(f64::INFINITY)
    }

    /// `|| |grad|^s f ||_2` with symbol `(2 pi |xi|)^s`.
    pub fn sobolev_norm(&self, s: f64) -> f64 {
        let spec = self.to_frequency();
        let mags = self.grid.frequency_magnitudes();
        let tau = 2.0 * std::f64::consts::PI;
        let dens: Vec<f64> = spec
            .data
            .iter()
            .zip(mags)
            .map(|(z, &k)| {
                if s == 0.0 {
                    z.norm_sqr()
                } else if k == 0.0 {
                    0.0
                } else {
                    (tau * k).powf(2.0 * s) * z.norm_sqr()
                }
            })
            .collect();
        self.grid.integrate_frequency(&dens).sqrt()
    }

    /// Fraction of `||f||_2^2` carried by the outer tenth of the domain.
    pub fn boundary_mass_fraction(&self) -> f64 {
        let f = self.to_physical();
        let mut dens: Vec<f64> = f.data.iter().map(|z| z.norm_sqr()).collect();
        let total = self.grid.integrate(&dens);
        if total == 0.0 {
            return 0.0;
        }
        for (i, d) in dens.iter_mut().enumerate() {
            if !self.grid.in_boundary_layer(i) {
                *d = 0.0;
            }
        }
        self.grid.integrate(&dens) / total
    }

    /// Fails with `DomainTruncation` when more than `limit` of the mass sits near the boundary.
    pub fn check_boundary_mass(&self, limit: f64) -> Result<()> {
        let fraction = self.boundary_mass_fraction();
        if fraction > limit {
            Err(Error::DomainTruncation { fraction, limit })
        } else {
            Ok(())
        }
    }
}

/// `(int |g|^r)^{1/r}` for nonnegative physical samples `g`.
pub(crate) fn lebesgue(grid: &Grid, values: impl Iterator<Item = f64>, r: f64) -> f64 {
    if r.is_infinite() {
        return values.fold(0.0, f64::max);
    }
    // exp(r ln v) is markedly cheaper than powf and exact enough here
    let dens: Vec<f64> =
        if r == 2.0 { values.map(|v| v * v).collect() } else { values.map(|v| if v > 0.0 { (r * v.ln()).exp() } else { 0.0 }).collect() };
    grid.integrate(&dens).powf(1.0 / r)
}

/// Relative L2 distance `||a - b|| / ||b||`, or the absolute distance if `b = 0`.
pub fn relative_l2(a: &Field, b: &Field) -> Result<f64> {
    let d = a.sub(b)?.l2_norm();
    let nb = b.l2_norm();
    Ok(if nb > 0.0 { d / nb } else { d })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn rejects_wrong_length_and_nan() {
        let g = Grid::radial(3, 8.0, 16).unwrap();
        assert!(Field::new(&g, Repr::Physical, vec![c(0.0); 15]).is_err());
        let mut v = vec![c(0.0); 16];
        v[3] = Complex64::new(f64::NAN, 0.0);
        assert!(Field::new(&g, Repr::Physical, v).is_err());
    }

    #[test]
    fn gaussian_norms_in_every_dimension() {
        // ||exp(-pi r^2)||_2^2 = 2^{-n/2}
        for n in [3usize, 5, 7] {
            let g = Grid::radial(n, 8.0, 200).unwrap();
            let f = Field::from_radial(&g, |r| c((-PI * r * r).exp())).unwrap();
            assert!((f.l2_norm() - 2f64.powf(-(n as f64) / 4.0)).abs() < 1e-12);
            let d = (f.sup_norm() - (-PI * g.nodes()[0].powi(2)).exp()).abs();
            assert!(d < 1e-12, "n={n}: {d:e}");
        }
        let g = Grid::full_tensor(3, 8.0, 64).unwrap();
        let f = Field::from_radial(&g, |r| c((-PI * r * r).exp())).unwrap();
        assert!((f.l2_norm() - 2f64.powf(-0.75)).abs() < 1e-12);
        assert_eq!(f.sup_norm(), 1.0);
    }

    #[test]
    fn boundary_fraction() {
        let g = Grid::full_tensor(3, 16.0, 32).unwrap();
        let narrow = Field::from_radial(&g, |r| c((-PI * r * r).exp())).unwrap();
        assert!(narrow.boundary_mass_fraction() < 1e-30);
        assert!(narrow.check_boundary_mass(1e-8).is_ok());
        let wide = Field::from_radial(&g, |r| c((-PI * r * r / 100.0).exp())).unwrap();
        assert!(matches!(wide.check_boundary_mass(1e-8), Err(Error::DomainTruncation { .. })));
    }

    #[test]
    fn arithmetic_checks_compatibility() {
        let g = Grid::radial(3, 8.0, 16).unwrap();
        let h = Grid::radial(3, 9.0, 16).unwrap();
        let a = Field::zeros(&g, Repr::Physical);
        assert!(a.add(&Field::zeros(&h, Repr::Physical)).is_err());
        assert!(a.add(&Field::zeros(&g, Repr::Frequency)).is_err());
        let one = a.map(|_| c(1.0));
        assert_eq!(one.axpy(2.0, &one).unwrap().samples()[0], c(3.0));
    }
}
