//! Continuous-convention transforms `fhat(xi) = int exp(-2 pi i x.xi) f(x) dx`
//! and the Fourier multipliers built on them.
//!
//! On the full-tensor grid `x_j = -L/2 + j h`, so
//! `fhat_k = h^n (-1)^{k_1 + ... + k_n} DFT(f)_k` and the inverse carries the
//! frequency cell `L^{-n}`; the pair is exactly inverse and Plancherel holds
//! exactly.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;

use super::field::{Field, Repr};
use super::grid::{Grid, GridMode};
use super::radial;
use crate::error::{Error, Result};

pub fn fourier_forward(f: &Field) -> Result<Field> {
    if f.repr() != Repr::Physical {
        return Err(Error::Contract("forward transform needs a physical field".into()));
    }
    Ok(forward_unchecked(f))
}

pub fn fourier_inverse(f: &Field) -> Result<Field> {
    if f.repr() != Repr::Frequency {
        return Err(Error::Contract("inverse transform needs a frequency field".into()));
    }
    Ok(inverse_unchecked(f))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Direction {
    Forward,
    Inverse,
}

/// The radial transform; full-tensor inputs are rejected.
pub fn radial_transform(f: &Field, direction: Direction) -> Result<Field> {
    if !f.grid().is_radial() {
        return Err(Error::Contract("radial transform needs a radial grid".into()));
    }
    match direction {
        Direction::Forward => fourier_forward(f),
        Direction::Inverse => fourier_inverse(f),
    }
}

pub(crate) fn forward_unchecked(f: &Field) -> Field {
    let out = forward_many(f.grid(), &[f.samples()]).pop().unwrap_or_default();
    Field::from_parts(f.grid(), Repr::Frequency, out)
}

pub(crate) fn inverse_unchecked(f: &Field) -> Field {
    let out = inverse_many(f.grid(), &[f.samples()]).pop().unwrap_or_default();
    Field::from_parts(f.grid(), Repr::Physical, out)
}

/// Forward transform of many sample vectors on one grid.
pub fn forward_many(grid: &Grid, slices: &[&[Complex64]]) -> Vec<Vec<Complex64>> {
    match grid.mode() {
        GridMode::Radial => batched_radial(grid, slices, Direction::Forward),
        GridMode::FullTensor => slices
            .par_iter()
            .map(|s| {
                let mut v = s.to_vec();
                tensor_transform(grid, &mut v, Direction::Forward);
                v
            })
            .collect(),
    }
}

pub fn inverse_many(grid: &Grid, slices: &[&[Complex64]]) -> Vec<Vec<Complex64>> {
    match grid.mode() {
        GridMode::Radial => batched_radial(grid, slices, Direction::Inverse),
        GridMode::FullTensor => slices
            .par_iter()
            .map(|s| {
                let mut v = s.to_vec();
                tensor_transform(grid, &mut v, Direction::Inverse);
                v
            })
            .collect(),
    }
}

// GEMM batches bounded so the work matrix stays modest
fn batched_radial(grid: &Grid, slices: &[&[Complex64]], dir: Direction) -> Vec<Vec<Complex64>> {
    let op = grid.radial_operator();
    let chunk = (1 << 22) / grid.len().max(1);
    let chunk = chunk.clamp(1, 256);
    let mut out = Vec::with_capacity(slices.len());
    for block in slices.chunks(chunk) {
        out.extend(match dir {
            Direction::Forward => op.forward(block),
            Direction::Inverse => op.inverse(block),
        });
    }
    out
}

fn tensor_transform(grid: &Grid, data: &mut [Complex64], dir: Direction) {
    let n = grid.dim();
    let m = grid.points();
    let plans = grid.fft_plans();
    let plan = match dir {
        Direction::Forward => &plans.forward,
        Direction::Inverse => &plans.inverse,
    };
    if dir == Direction::Inverse {
        apply_parity(data, m, n, grid.extent().powi(-(n as i32)));
    }
    let mut scratch = vec![Complex64::new(0.0, 0.0); plan.get_inplace_scratch_len()];
    let mut line = Vec::new();
    for axis in 0..n {
        let stride = m.pow((n - 1 - axis) as u32);
        if stride == 1 {
            plan.process_with_scratch(data, &mut scratch);
            continue;
        }
        // gather TILE lines at a time so both sides of the copy stay in cache
        const TILE: usize = 16;
        let tile = TILE.min(stride);
        line.resize(tile * m, Complex64::new(0.0, 0.0));
        for chunk in data.chunks_mut(m * stride) {
            for j0 in (0..stride).step_by(tile) {
                for k in 0..m {
                    let row = &chunk[k * stride + j0..k * stride + j0 + tile];
                    for (j, z) in row.iter().enumerate() {
                        line[j * m + k] = *z;
                    }
                }
                plan.process_with_scratch(&mut line, &mut scratch);
                for k in 0..m {
                    let row = &mut chunk[k * stride + j0..k * stride + j0 + tile];
                    for (j, z) in row.iter_mut().enumerate() {
                        *z = line[j * m + k];
                    }
                }
            }
        }
    }
    if dir == Direction::Forward {
        apply_parity(data, m, n, grid.spacing().powi(n as i32));
    }
}

/// Multiply by `scale * (-1)^{sum of multi-index}`.
fn apply_parity(data: &mut [Complex64], m: usize, n: usize, scale: f64) {
    let mut idx = vec![0usize; n];
    let mut parity = 0usize;
    for z in data.iter_mut() {
        *z *= if parity % 2 == 0 { scale } else { -scale };
        // odometer increment; m is even so each carry flips parity by one step
        for a in (0..n).rev() {
            idx[a] += 1;
            parity += 1;
            if idx[a] < m {
                break;
            }
            parity -= m;
            idx[a] = 0;
        }
    }
}

/// Apply a real or complex radial multiplier `m(|xi|)`; the output keeps the input's representation.
pub fn apply_multiplier(f: &Field, m: impl Fn(f64) -> Complex64) -> Field {
    let spec = f.to_frequency();
    let mags = f.grid().frequency_magnitudes();
    let out = spec.samples().iter().zip(mags).map(|(z, &k)| z * m(k)).collect();
    let out = Field::from_parts(f.grid(), Repr::Frequency, out);
    match f.repr() {
        Repr::Frequency => out,
        Repr::Physical => inverse_unchecked(&out),
    }
}

/// Symbol of `e^{it Delta}`.
pub fn propagator_symbol(t: f64, xi: f64) -> Complex64 {
    Complex64::from_polar(1.0, -4.0 * PI * PI * t * xi * xi)
}

/// `e^{it Delta} f`.
pub fn propagate(f: &Field, t: f64) -> Field {
    if t == 0.0 {
        return f.clone();
    }
    apply_multiplier(f, |k| propagator_symbol(t, k))
}

/// `|grad|^s f` with symbol `(2 pi |xi|)^s`.
pub fn fractional_derivative(f: &Field, s: f64) -> Result<Field> {
    if !(s >= 0.0) || !s.is_finite() {
        return Err(Error::InvalidArgument(format!("derivative order must be finite and >= 0, got {s}")));
    }
    if s == 0.0 {
        return Ok(f.clone());
    }
    Ok(apply_multiplier(f, |k| Complex64::new(if k == 0.0 { 0.0 } else { (2.0 * PI * k).powf(s) }, 0.0)))
}

/// Spectral Laplacian, symbol `-4 pi^2 |xi|^2`.
pub fn laplacian(f: &Field) -> Field {
    apply_multiplier(f, |k| Complex64::new(-4.0 * PI * PI * k * k, 0.0))
}

/// Physical-space gradient components: `n` partial derivatives on a
/// full-tensor grid, the single radial derivative `d/dr` on a radial grid.
pub fn gradient(f: &Field) -> Vec<Field> {
    gradient_many(f.grid(), &[f.to_frequency().samples()])
        .into_iter()
        .next()
        .unwrap_or_default()
        .into_iter()
        .map(|v| Field::from_parts(f.grid(), Repr::Physical, v))
        .collect()
}

/// Gradient components for many spectra at once: `out[slice][component]`.
pub(crate) fn gradient_many(grid: &Grid, spectra: &[&[Complex64]]) -> Vec<Vec<Vec<Complex64>>> {
    match grid.mode() {
        GridMode::Radial => radial::apply_derivative(grid, spectra).into_iter().map(|v| vec![v]).collect(),
        GridMode::FullTensor => {
            let n = grid.dim();
            let m = grid.points();
            let freqs = grid.frequency_nodes();
            spectra
                .par_iter()
                .map(|s| {
                    (0..n)
                        .map(|axis| {
                            let stride = m.pow((n - 1 - axis) as u32);
                            let mut v: Vec<Complex64> =
                                s.iter().enumerate().map(|(i, z)| z * Complex64::new(0.0, 2.0 * PI * freqs[(i / stride) % m])).collect();
                            tensor_transform(grid, &mut v, Direction::Inverse);
                            v
                        })
                        .collect()
                })
                .collect()
        }
    }
}

/// Pointwise `|grad f|` on the physical nodes.
pub fn gradient_magnitude(f: &Field) -> Vec<f64> {
    let comps = gradient(f);
    (0..f.grid().len()).map(|i| comps.iter().map(|c| c.samples()[i].norm_sqr()).sum::<f64>().sqrt()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::field::relative_l2;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn gauss(grid: &Grid) -> Field {
        gauss_width(grid, 1.0)
    }

    /// `exp(-pi |x|^2 / a^2)`
    fn gauss_width(grid: &Grid, a: f64) -> Field {
        Field::from_radial(grid, |r| Complex64::new((-PI * r * r / (a * a)).exp(), 0.0)).unwrap()
    }

    fn random_field(grid: &Grid, seed: u64) -> Field {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let data = (0..grid.len()).map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect();
        Field::new(grid, Repr::Physical, data).unwrap()
    }

    /// Closed form `e^{it Delta} e^{-pi |x|^2}`.
    fn evolved_gaussian(n: usize, a: f64, t: f64, r: f64) -> Complex64 {
        let d = Complex64::new(a * a, 4.0 * PI * t);
        (d / (a * a)).powf(-(n as f64) / 2.0) * (-PI * r * r / d).exp()
    }

    #[test]
    fn zero_maps_to_zero() {
        let g = Grid::full_tensor(3, 8.0, 16).unwrap();
        let z = Field::zeros(&g, Repr::Physical);
        assert!(fourier_forward(&z).unwrap().is_zero());
        assert!(fourier_forward(&fourier_forward(&z).unwrap()).is_err());
        assert!(fourier_inverse(&z).is_err());
    }

    #[test]
    fn gaussian_is_self_dual_on_tensor_grid() {
        let g = Grid::full_tensor(3, 16.0, 64).unwrap();
        let fh = fourier_forward(&gauss(&g)).unwrap();
        let mut worst_inner = 0.0f64;
        let mut worst_aliased = 0.0f64;
        let mut xi = [0.0; 3];
        for (i, z) in fh.samples().iter().enumerate() {
            g.frequency(i, &mut xi);
            let k2: f64 = xi.iter().map(|x| x * x).sum();
            if k2.sqrt() <= 1.0 {
                worst_inner = worst_inner.max((z - (-PI * k2).exp()).norm());
            }
            // the grid sees the periodisation over the dual lattice 4 Z^3
            let per: f64 = xi.iter().map(|&x| (-3..=3).map(|j| (-PI * (x + 4.0 * j as f64).powi(2)).exp()).sum::<f64>()).product();
            worst_aliased = worst_aliased.max((z - per).norm());
        }
        assert!(worst_inner < 1e-12, "{worst_inner:e}");
        assert!(worst_aliased < 1e-14, "{worst_aliased:e}");
        let wide = fourier_forward(&gauss_width(&g, 1.5)).unwrap();
        let want =
            Field::from_spectrum(&g, |xi| Complex64::new(1.5f64.powi(3) * (-PI * 2.25 * xi.iter().map(|x| x * x).sum::<f64>()).exp(), 0.0))
                .unwrap();
        assert!(relative_l2(&wide, &want).unwrap() < 1e-12);
    }

    #[test]
    fn gaussian_is_self_dual_radially() {
        for n in [3usize, 4, 5, 7, 8] {
            let g = Grid::radial(n, 10.0, 256).unwrap();
            let fh = radial_transform(&gauss(&g), Direction::Forward).unwrap();
            let err = fh
                .samples()
                .iter()
                .zip(g.frequency_nodes())
                .map(|(a, &k)| (a.re - (-PI * k * k).exp()).abs() + a.im.abs())
                .fold(0.0, f64::max);
            assert!(err < 1e-6, "n={n}: {err:e}");
        }
        let t = Grid::full_tensor(3, 8.0, 8).unwrap();
        assert!(radial_transform(&gauss(&t), Direction::Forward).is_err());
    }

    #[test]
    fn translation_becomes_modulation() {
        let g = Grid::full_tensor(3, 16.0, 64).unwrap();
        let a = [0.5, -1.0, 2.0];
        let shifted = Field::from_fn(&g, |x| {
            let r2: f64 = x.iter().zip(&a).map(|(x, a)| (x - a) * (x - a)).sum();
            Complex64::new((-PI * r2 / 2.25).exp(), 0.0)
        })
        .unwrap();
        let want = Field::from_spectrum(&g, |xi| {
            let k2: f64 = xi.iter().map(|x| x * x).sum();
            let phase: f64 = xi.iter().zip(&a).map(|(x, a)| x * a).sum();
            Complex64::from_polar(1.5f64.powi(3) * (-PI * 2.25 * k2).exp(), -2.0 * PI * phase)
        })
        .unwrap();
        let got = fourier_forward(&shifted).unwrap();
        assert!(relative_l2(&got, &want).unwrap() < 1e-10);
    }

    #[test]
    fn round_trip_and_plancherel() {
        for g in [Grid::full_tensor(3, 10.0, 16).unwrap(), Grid::full_tensor(4, 10.0, 8).unwrap(), Grid::radial(7, 12.0, 160).unwrap()] {
            let f = random_field(&g, 11);
            let fh = fourier_forward(&f).unwrap();
            assert!(relative_l2(&fourier_inverse(&fh).unwrap(), &f).unwrap() < 1e-12);
            assert!((fh.l2_norm() / f.l2_norm() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn propagator_matches_closed_form() {
        let g = Grid::full_tensor(3, 16.0, 64).unwrap();
        for &t in &[0.05, 0.3] {
            let got = propagate(&gauss_width(&g, 1.5), t);
            let want = Field::from_radial(&g, |r| evolved_gaussian(3, 1.5, t, r)).unwrap();
            assert!(relative_l2(&got, &want).unwrap() < 1e-9);
            let sup = (1.0 + 16.0 * PI * PI * t * t / 1.5f64.powi(4)).powf(-0.75);
            assert!((got.sup_norm() - sup).abs() < 1e-10);
            // the unit-width Gaussian sits at the aliasing floor of h = 1/4
            let got = propagate(&gauss(&g), t);
            let want = Field::from_radial(&g, |r| evolved_gaussian(3, 1.0, t, r)).unwrap();
            assert!(relative_l2(&got, &want).unwrap() < 2e-6);
        }
        let g = Grid::radial(7, 16.0, 512).unwrap();
        let got = propagate(&gauss(&g), 0.2);
        let want = Field::from_radial(&g, |r| evolved_gaussian(7, 1.0, 0.2, r)).unwrap();
        assert!(relative_l2(&got, &want).unwrap() < 1e-6);
    }

    #[test]
    fn propagator_group_law_and_unitarity() {
        let g = Grid::full_tensor(3, 8.0, 16).unwrap();
        let f = random_field(&g, 5);
        assert_eq!(propagate(&f, 0.0), f);
        let a = propagate(&propagate(&f, 0.13), -0.31);
        let b = propagate(&f, 0.13 - 0.31);
        assert!(relative_l2(&a, &b).unwrap() < 1e-12);
        assert!((a.l2_norm() / f.l2_norm() - 1.0).abs() < 1e-12);
        assert!((a.sobolev_norm(1.0) / f.sobolev_norm(1.0) - 1.0).abs() < 1e-12);
        let fr = f.to_frequency();
        assert_eq!(propagate(&fr, 0.2).repr(), Repr::Frequency);
    }

    #[test]
    fn derivatives() {
        let g = Grid::full_tensor(3, 16.0, 64).unwrap();
        let f = gauss(&g);
        assert!(fractional_derivative(&f, -0.5).is_err());
        assert_eq!(fractional_derivative(&f, 0.0).unwrap(), f);
        let d2 = fractional_derivative(&f, 2.0).unwrap();
        let lap = laplacian(&f).scaled(-1.0);
        assert!(relative_l2(&d2, &lap).unwrap() < 1e-10);
        // ||grad e^{-pi x^2}||_2^2 = int 4 pi^2 |xi|^2 e^{-2 pi |xi|^2} dxi, by radial quadrature
        let dr = 1e-3;
        let want = (0..10_000)
            .map(|i| {
                let k = (i as f64 + 0.5) * dr;
                4.0 * PI * k * k * 4.0 * PI * PI * k * k * (-2.0 * PI * k * k).exp() * dr
            })
            .sum::<f64>()
            .sqrt();
        let d1 = fractional_derivative(&f, 1.0).unwrap();
        assert!((d1.l2_norm() / want - 1.0).abs() < 1e-6);
        assert!((f.sobolev_norm(1.0) - d1.l2_norm()).abs() < 1e-13);
        let grad: Vec<f64> = gradient_magnitude(&f);
        let dens: Vec<f64> = grad.iter().map(|v| v * v).collect();
        assert!((g.integrate(&dens).sqrt() / d1.l2_norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn radial_gradient_matches_closed_form() {
        // d/dr e^{-pi r^2} = -2 pi r e^{-pi r^2}
        for n in [3usize, 7, 8] {
            let g = Grid::radial(n, 10.0, 256).unwrap();
            let grad = gradient(&gauss(&g));
            let want = Field::from_radial(&g, |r| Complex64::new(-2.0 * PI * r * (-PI * r * r).exp(), 0.0)).unwrap();
            let err = relative_l2(&grad[0], &want).unwrap();
            assert!(err < 1e-8, "n={n}: {err:e}");
        }
    }
}
