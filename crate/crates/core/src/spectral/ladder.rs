use std::collections::BTreeMap;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::bump::{multiplier, ProjectorKind, BUMP_PROFILE_ID};
use super::field::{Field, Repr};
use super::fourier::inverse_many;
use super::grid::Grid;
use crate::error::{Error, Result};

/// A dyadic frequency `2^k`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Dyadic(pub i32);

impl Dyadic {
    pub fn value(self) -> f64 {
        2f64.powi(self.0)
    }
}

pub const RECONSTRUCTION_TOLERANCE: f64 = 1e-8;

pub(crate) fn check_level(grid: &Grid, k: i32) -> Result<()> {
    let (min, max) = grid.resolvable_range();
    if k < min || k > max {
        return Err(Error::DyadicRange { level: k, min, max });
    }
    Ok(())
}

/// `P_N f`, `P_{<=N} f` or `P_{>N} f`, returned in the input's representation.
pub fn lp_project(f: &Field, n: Dyadic, kind: ProjectorKind) -> Result<Field> {
    check_level(f.grid(), n.0)?;
    let nv = n.value();
    Ok(super::fourier::apply_multiplier(f, |k| Complex64::new(multiplier(kind, nv, k), 0.0)))
}

#[derive(Clone, Debug)]
pub struct DyadicLadder {
    pub bands: BTreeMap<i32, Field>,
    /// `P_{<= 2^{k_min - 1}} f`
    pub residual_low: Field,
    pub bump: &'static str,
    /// Spectral weight not captured by the ladder, relative to `||f||_2`.
    pub reconstruction_error: f64,
}

impl DyadicLadder {
    pub fn reconstruct(&self) -> Field {
        let mut acc = self.residual_low.samples().to_vec();
        for band in self.bands.values() {
            acc.iter_mut().zip(band.samples()).for_each(|(a, b)| *a += b);
        }
        Field::from_parts(self.residual_low.grid(), Repr::Physical, acc)
    }
}

/// Bands `P_{2^k} f` for `k_min <= k <= k_max` plus the low residual.
///
/// The reconstruction error is measured on the spectrum as
/// `||(1 - phi(xi / 2^{k_max})) fhat|| / ||fhat||`.
pub fn build_ladder(f: &Field, k_min: i32, k_max: i32) -> Result<DyadicLadder> {
    if k_min >= k_max {
        return Err(Error::InvalidArgument(format!("need k_min < k_max, got [{k_min}, {k_max}]")));
    }
    let grid = f.grid();
    check_level(grid, k_min)?;
    check_level(grid, k_max)?;
    let spec = f.to_frequency();
    let mags = grid.frequency_magnitudes();
    let masked = |m: &dyn Fn(f64) -> f64| -> Vec<Complex64> { spec.samples().iter().zip(mags).map(|(z, &k)| z * m(k)).collect() };

    let top = 2f64.powi(k_max);
    let lost: Vec<f64> = masked(&|k| 1.0 - multiplier(ProjectorKind::Low, top, k)).iter().map(|z| z.norm_sqr()).collect();
    let total: Vec<f64> = spec.samples().iter().map(|z| z.norm_sqr()).collect();
    let total = grid.integrate_frequency(&total);
    let error = if total > 0.0 { (grid.integrate_frequency(&lost) / total).sqrt() } else { 0.0 };
    if error > RECONSTRUCTION_TOLERANCE {
        return Err(Error::Reconstruction { error, tolerance: RECONSTRUCTION_TOLERANCE });
    }

    let low = 2f64.powi(k_min - 1);
    let mut spectra = vec![masked(&|k| multiplier(ProjectorKind::Low, low, k))];
    for k in k_min..=k_max {
        let nv = 2f64.powi(k);
        spectra.push(masked(&|s| multiplier(ProjectorKind::Band, nv, s)));
    }
    let views: Vec<&[Complex64]> = spectra.iter().map(|v| v.as_slice()).collect();
    let mut phys = inverse_many(grid, &views).into_iter();
    let residual_low = Field::from_parts(grid, Repr::Physical, phys.next().unwrap_or_default());
    let bands = (k_min..=k_max).zip(phys).map(|(k, v)| (k, Field::from_parts(grid, Repr::Physical, v))).collect();
    Ok(DyadicLadder { bands, residual_low, bump: BUMP_PROFILE_ID, reconstruction_error: error })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::field::relative_l2;
    use crate::spectral::fourier::{fractional_derivative, propagate};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    fn random_field(grid: &Grid, seed: u64) -> Field {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let data = (0..grid.len()).map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect();
        Field::new(grid, Repr::Physical, data).unwrap()
    }

    #[test]
    fn projector_algebra() {
        let g = Grid::full_tensor(3, 16.0, 32).unwrap();
        let f = random_field(&g, 1);
        assert!(lp_project(&Field::zeros(&g, Repr::Physical), Dyadic(0), ProjectorKind::Band).unwrap().is_zero());
        let lo = lp_project(&f, Dyadic(-1), ProjectorKind::Low).unwrap();
        let hi = lp_project(&f, Dyadic(-1), ProjectorKind::High).unwrap();
        assert!(relative_l2(&lo.add(&hi).unwrap(), &f).unwrap() < 1e-14);
        for (a, b) in [(-2, 0), (-3, 1), (0, -2)] {
            let pa = lp_project(&f, Dyadic(a), ProjectorKind::Band).unwrap();
            let pab = lp_project(&pa, Dyadic(b), ProjectorKind::Band).unwrap();
            assert!(pab.l2_norm() / f.l2_norm() < 1e-12);
        }
        assert!(matches!(lp_project(&f, Dyadic(12), ProjectorKind::Band), Err(Error::DyadicRange { .. })));
    }

    #[test]
    fn projectors_commute_with_propagator_and_derivatives() {
        let g = Grid::full_tensor(3, 12.0, 16).unwrap();
        let f = random_field(&g, 2);
        let a = propagate(&lp_project(&f, Dyadic(-1), ProjectorKind::Band).unwrap(), 0.7);
        let b = lp_project(&propagate(&f, 0.7), Dyadic(-1), ProjectorKind::Band).unwrap();
        assert!(relative_l2(&a, &b).unwrap() < 1e-12);
        let a = fractional_derivative(&lp_project(&f, Dyadic(0), ProjectorKind::High).unwrap(), 0.6).unwrap();
        let b = lp_project(&fractional_derivative(&f, 0.6).unwrap(), Dyadic(0), ProjectorKind::High).unwrap();
        assert!(relative_l2(&a, &b).unwrap() < 1e-12);
    }

    #[test]
    fn gaussian_ladder_reconstructs() {
        let g = Grid::full_tensor(3, 16.0, 64).unwrap();
        let f = Field::from_radial(&g, |r| Complex64::new((-PI * r * r).exp(), 0.0)).unwrap();
        let ladder = build_ladder(&f, -4, 5).unwrap();
        assert_eq!(ladder.bands.len(), 10);
        assert!(relative_l2(&ladder.reconstruct(), &f).unwrap() < 1e-8);
        assert_eq!(ladder.bump, BUMP_PROFILE_ID);
    }

    #[test]
    fn insufficient_top_level_is_an_error() {
        let g = Grid::full_tensor(3, 16.0, 32).unwrap();
        let f = random_field(&g, 3);
        assert!(matches!(build_ladder(&f, -3, -1), Err(Error::Reconstruction { .. })));
        assert!(build_ladder(&f, 0, 0).is_err());
        let (lo, hi) = g.default_dyadic_range();
        let ladder = build_ladder(&f, lo, hi).unwrap();
        assert!(relative_l2(&ladder.reconstruct(), &f).unwrap() < 1e-12);
    }

    #[test]
    fn single_annulus_occupies_few_bands() {
        let g = Grid::full_tensor(3, 16.0, 32).unwrap();
        // spectrum supported in 0.55 <= |xi| <= 0.95, inside the N = 1/2 and N = 1 bands
        let bump = |k: f64| if (0.55..=0.95).contains(&k) { ((k - 0.55) * (0.95 - k)).powi(2) } else { 0.0 };
        let fh = Field::from_spectrum(&g, |xi| Complex64::new(bump(xi.iter().map(|x| x * x).sum::<f64>().sqrt()), 0.0)).unwrap();
        let f = fh.to_physical();
        let ladder = build_ladder(&f, -6, 2).unwrap();
        let live: Vec<i32> = ladder.bands.iter().filter(|(_, b)| b.l2_norm() > 1e-14 * f.l2_norm()).map(|(k, _)| *k).collect();
        assert!(!live.is_empty() && live.len() <= 3, "{live:?}");
        assert!(build_ladder(&Field::zeros(&g, Repr::Physical), -6, 2).unwrap().bands.values().all(Field::is_zero));
    }
}
