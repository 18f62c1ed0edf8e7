//! Seeded random test functions and the dyadic scaling map.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::norms::{norm_value, NormKind, NormSettings};
use crate::spectral::{Field, Grid, GridMode, Repr, Trajectory};

/// The generator behind every random experiment; streams are fixed by seed.
pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn complex_normal(rng: &mut ChaCha8Rng) -> Complex64 {
    Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)) / std::f64::consts::SQRT_2
}

/// Relative width of the spectral shells and wave packets.
const SHELL_WIDTH: f64 = 0.3;

/// A random field with spectral mass near `|xi| = 2^k` for each listed `k`.
///
/// Radial grids get Gaussian shells `c_k 2^{-kn/2} exp(-((|xi| - 2^k) / (0.3 2^k))^2)`
/// with complex normal `c_k` (real when `real` is set). Full-tensor grids get
/// two wave packets per level, `c w^{-n/2} exp(-pi |x - x_j|^2 / w^2) e^{2 pi i xi_j x}`
/// with `|xi_j| ~ 2^k`, random directions, width `w = 1 / (0.3 pi 2^k)` and
/// centres within 1/2 of the origin. Either way every level carries a
/// comparable share of the `L^2` mass.
pub fn random_field(grid: &Grid, rng: &mut ChaCha8Rng, levels: &[i32], real: bool) -> Result<Field> {
    match grid.mode() {
        GridMode::Radial => {
            let n = grid.dim() as f64;
            let shells: Vec<(f64, Complex64)> = levels
                .iter()
                .map(|&k| {
                    let c = complex_normal(rng) * 2f64.powf(-f64::from(k) * n / 2.0);
                    (2f64.powi(k), if real { Complex64::new(c.re, 0.0) } else { c })
                })
                .collect();
            Ok(Field::from_spectrum(grid, |xi| shells.iter().map(|&(n, c)| c * (-((xi[0] - n) / (SHELL_WIDTH * n)).powi(2)).exp()).sum())?
                .to_physical())
        }
        GridMode::FullTensor => random_packets(grid, rng, levels, 2, 0.5, real),
    }
}

/// Wave packets as in [`random_field`], `per_level` of them per level.
pub fn random_packets(grid: &Grid, rng: &mut ChaCha8Rng, levels: &[i32], per_level: usize, spread: f64, real: bool) -> Result<Field> {
    let n = grid.dim();
    let mut packets = Vec::new();
    for &k in levels {
        let freq = 2f64.powi(k);
        for _ in 0..per_level {
            let mut dir: Vec<f64> = (0..n).map(|_| rng.sample(StandardNormal)).collect();
            let len = dir.iter().map(|d| d * d).sum::<f64>().sqrt();
            let mag = freq * rng.gen_range(0.8..1.25);
            dir.iter_mut().for_each(|d| *d *= mag / len);
            let centre: Vec<f64> = (0..n).map(|_| rng.gen_range(-spread..spread)).collect();
            let w = 1.0 / (SHELL_WIDTH * PI * freq);
            let c = complex_normal(rng) * w.powf(-(n as f64) / 2.0);
            packets.push((dir, centre, w, c));
        }
    }
    let f = Field::from_fn(grid, |x| {
        packets
            .iter()
            .map(|(xi, x0, w, c)| {
                let r2: f64 = x.iter().zip(x0).map(|(a, b)| (a - b).powi(2)).sum();
                let phase: f64 = x.iter().zip(xi).map(|(a, b)| a * b).sum();
                c * Complex64::from_polar((-PI * r2 / (w * w)).exp(), 2.0 * PI * phase)
            })
            .sum()
    })?;
    Ok(if real { f.map(|z| Complex64::new(z.re, 0.0)) } else { f })
}

/// `F(t) = sum_j cos(2 pi m_j (t - t0) / T + phi_j) g_j` with random band
/// profiles `g_j` and small integer frequencies `m_j`.
pub fn random_forcing(grid: &Grid, rng: &mut ChaCha8Rng, levels: &[i32], interval: (f64, f64), steps: usize) -> Result<Trajectory> {
    let (t0, t1) = interval;
    let parts: Vec<(f64, f64, Field)> = (0..2)
        .map(|_| {
            let m = rng.gen_range(0..3) as f64;
            let phase = rng.gen_range(0.0..2.0 * PI);
            random_field(grid, rng, levels, false).map(|g| (m, phase, g))
        })
        .collect::<Result<_>>()?;
    Trajectory::from_fn(t0, t1, steps, |t| {
        let mut acc = Field::zeros(grid, Repr::Physical);
        for (m, phase, g) in &parts {
            acc = acc.axpy((2.0 * PI * m * (t - t0) / (t1 - t0) + phase).cos(), g)?;
        }
        Ok(acc)
    })
}

/// A declarative initial datum.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum DataSpec {
    Gaussian { width: f64 },
    Random { seed: u64, levels: Vec<i32> },
}

impl DataSpec {
    pub fn build(&self, grid: &Grid) -> Result<Field> {
        match self {
            DataSpec::Gaussian { width } => gaussian(grid, *width),
            DataSpec::Random { seed, levels } => random_field(grid, &mut rng(*seed), levels, false),
        }
    }
}

/// `exp(-pi |x|^2 / a^2)`.
pub fn gaussian(grid: &Grid, width: f64) -> Result<Field> {
    Field::from_radial(grid, |r| Complex64::new((-PI * r * r / (width * width)).exp(), 0.0))
}

/// `f` rescaled so that its free evolution over `[0, t1]` has `W` norm `target`.
pub fn scale_to_w(f: &Field, target: f64, t1: f64, steps: usize) -> Result<Field> {
    let w = norm_value(&Trajectory::free_evolution(f, 0.0, t1, steps)?, &NormKind::W, &NormSettings::default())?;
    if w == 0.0 {
        return Err(Error::InvalidArgument("cannot rescale a datum with zero W norm".into()));
    }
    Ok(f.scaled(target / w))
}

/// `f` normalized to unit `H^1`.
pub fn unit_h1(f: &Field) -> Result<Field> {
    let s = f.sobolev_norm(1.0);
    if s == 0.0 {
        return Err(Error::InvalidArgument("zero direction".into()));
    }
    Ok(f.scaled(1.0 / s))
}

/// The same samples on the grid dilated by `lambda`, times `lambda^{-weight}`:
/// `f_lambda(x) = lambda^{-weight} f(x / lambda)`.
pub fn rescale_field(f: &Field, lambda: f64, weight: f64) -> Result<Field> {
    let g = f.grid().dilated(lambda)?;
    let f = f.to_physical();
    Field::new(&g, Repr::Physical, f.samples().iter().map(|z| z * lambda.powf(-weight)).collect())
}

/// `u_lambda(t, x) = lambda^{-weight} u(t / lambda^2, x / lambda)`.
pub fn rescale_trajectory(u: &Trajectory, lambda: f64, weight: f64) -> Result<Trajectory> {
    let slices = u.slices().iter().map(|s| rescale_field(s, lambda, weight)).collect::<Result<Vec<_>>>()?;
    let times = u.times().iter().map(|t| t * lambda * lambda).collect();
    Trajectory::new(times, slices)
}

/// Dyadic range of `grid` carried along by a dilation with `lambda = 2^shift`.
pub fn shifted_range(grid: &Grid, shift: i32) -> (i32, i32) {
    let (lo, hi) = grid.default_dyadic_range();
    (lo - shift, hi - shift)
}
