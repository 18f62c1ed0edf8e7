use std::collections::HashMap;
use std::f64::consts::PI;
use std::fmt;
use std::sync::{Arc, Mutex, OnceLock, Weak};

use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use super::bessel::{bessel_j_int, bessel_j_zeros};
use super::radial::RadialOperator;
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GridMode {
    FullTensor,
    Radial,
}

/// Plain descriptor of a grid.
///
/// `extent` is the side length `L` of the box `[-L/2, L/2)^n` in full-tensor
/// mode and the maximal radius `R` in radial mode; `points` is the number of
/// samples per axis (full tensor) or the number of radial nodes.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub dim: usize,
    pub mode: GridMode,
    pub extent: f64,
    pub points: usize,
}

impl GridSpec {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidGrid(msg));
        if self.dim < 3 {
            return bad(format!("dimension n = {} but the equation needs n >= 3", self.dim));
        }
        if !(self.extent.is_finite() && self.extent > 0.0) {
            return bad(format!("extent must be positive and finite, got {}", self.extent));
        }
        match self.mode {
            GridMode::FullTensor => {
                if self.dim > 4 {
                    return bad(format!("full-tensor grids support n <= 4 (got n = {}); use radial mode", self.dim));
                }
                if self.points < 4 || !self.points.is_power_of_two() {
                    return bad(format!("points per axis must be a power of two >= 4, got {}", self.points));
                }
                if self.points.checked_pow(self.dim as u32).filter(|&c| c <= 1 << 26).is_none() {
                    return bad(format!("{}^{} samples is too many", self.points, self.dim));
                }
            }
            GridMode::Radial => {
                if !(4..=1 << 14).contains(&self.points) {
                    return bad(format!("radial point count must lie in [4, 16384], got {}", self.points));
                }
            }
        }
        Ok(())
    }

    fn key(&self) -> (usize, GridMode, u64, usize) {
        (self.dim, self.mode, self.extent.to_bits(), self.points)
    }
}

impl fmt::Display for GridSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.mode {
            GridMode::FullTensor => write!(f, "n={} full-tensor {}^{} L={}", self.dim, self.points, self.dim, self.extent),
            GridMode::Radial => write!(f, "n={} radial P={} R={}", self.dim, self.points, self.extent),
        }
    }
}

pub(crate) struct FftPlans {
    pub forward: Arc<dyn Fft<f64>>,
    pub inverse: Arc<dyn Fft<f64>>,
}

struct Shared {
    spec: GridSpec,
    nodes: Vec<f64>,
    freq_nodes: Vec<f64>,
    weights: Vec<f64>,
    freq_weights: Vec<f64>,
    radius: OnceLock<Vec<f64>>,
    freq_mag: OnceLock<Vec<f64>>,
    fft: OnceLock<FftPlans>,
    radial: OnceLock<RadialOperator>,
    radial_deriv: OnceLock<ndarray::Array2<f64>>,
}

type Registry = Mutex<HashMap<(usize, GridMode, u64, usize), Weak<Shared>>>;

fn registry() -> &'static Registry {
    static REG: OnceLock<Registry> = OnceLock::new();
    REG.get_or_init(|| Mutex::new(HashMap::new()))
}

/// A validated grid. Cheap to clone; transform plans and radial kernels are
/// built lazily and shared between all grids with the same descriptor.
#[derive(Clone)]
pub struct Grid {
    inner: Arc<Shared>,
}

impl PartialEq for Grid {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.inner, &other.inner) || self.inner.spec == other.inner.spec
    }
}

impl fmt::Debug for Grid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Grid({})", self.inner.spec)
    }
}

/// Surface measure of the unit sphere in R^n.
pub fn sphere_area(n: usize) -> f64 {
    2.0 * PI.powf(0.5 * n as f64) / gamma_half(n)
}

/// Gamma(n/2) for a positive integer n.
pub(crate) fn gamma_half(n: usize) -> f64 {
    let (mut g, mut a) = if n % 2 == 0 { (1.0, 1.0) } else { (PI.sqrt(), 0.5) };
    while a < 0.5 * n as f64 - 1e-12 {
        g *= a;
        a += 1.0;
    }
    g
}

impl Grid {
    pub fn new(spec: GridSpec) -> Result<Grid> {
        spec.validate()?;
        let mut reg = registry().lock().unwrap_or_else(|e| e.into_inner());
        if let Some(inner) = reg.get(&spec.key()).and_then(Weak::upgrade) {
            return Ok(Grid { inner });
        }
        reg.retain(|_, w| w.strong_count() > 0);
        let inner = Arc::new(Shared::new(spec));
        reg.insert(spec.key(), Arc::downgrade(&inner));
        Ok(Grid { inner })
    }

    pub fn full_tensor(dim: usize, side: f64, points: usize) -> Result<Grid> {
        Grid::new(GridSpec { dim, mode: GridMode::FullTensor, extent: side, points })
    }

    pub fn radial(dim: usize, radius: f64, points: usize) -> Result<Grid> {
        Grid::new(GridSpec { dim, mode: GridMode::Radial, extent: radius, points })
    }

    pub fn spec(&self) -> &GridSpec {
        &self.inner.spec
    }

    pub fn dim(&self) -> usize {
        self.inner.spec.dim
    }

    pub fn mode(&self) -> GridMode {
        self.inner.spec.mode
    }

    pub fn is_radial(&self) -> bool {
        self.mode() == GridMode::Radial
    }

    pub fn points(&self) -> usize {
        self.inner.spec.points
    }

    pub fn extent(&self) -> f64 {
        self.inner.spec.extent
    }

    /// Number of stored samples.
    pub fn len(&self) -> usize {
        match self.mode() {
            GridMode::FullTensor => self.points().pow(self.dim() as u32),
            GridMode::Radial => self.points(),
        }
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// The same grid dilated by `lambda` in space: `L -> lambda L` or `R -> lambda R`.
    pub fn dilated(&self, lambda: f64) -> Result<Grid> {
        let mut spec = *self.spec();
        spec.extent *= lambda;
        Grid::new(spec)
    }

    /// One-dimensional physical nodes: axis coordinates or radii.
    pub fn nodes(&self) -> &[f64] {
        &self.inner.nodes
    }

    /// One-dimensional frequency nodes: axis frequencies in FFT order, or radial frequencies.
    pub fn frequency_nodes(&self) -> &[f64] {
        &self.inner.freq_nodes
    }

    /// Spacing of physical nodes.
    pub fn spacing(&self) -> f64 {
        let s = self.spec();
        match s.mode {
            GridMode::FullTensor => s.extent / s.points as f64,
            GridMode::Radial if s.dim % 2 == 1 => s.extent / (s.points + 1) as f64,
            GridMode::Radial => {
                let r = &self.inner.nodes;
                (r[r.len() - 1] - r[0]) / (r.len() - 1) as f64
            }
        }
    }

    /// Spacing of frequency nodes.
    pub fn frequency_resolution(&self) -> f64 {
        let s = self.spec();
        match s.mode {
            GridMode::FullTensor => 1.0 / s.extent,
            GridMode::Radial => 0.5 / s.extent,
        }
    }

    /// Largest frequency per axis (full tensor) or largest radial frequency.
    pub fn nyquist(&self) -> f64 {
        match self.mode() {
            GridMode::FullTensor => 0.5 * self.points() as f64 / self.extent(),
            GridMode::Radial => *self.inner.freq_nodes.last().unwrap_or(&0.0),
        }
    }

    /// Largest `|xi|` carried by any frequency sample.
    pub fn max_frequency(&self) -> f64 {
        match self.mode() {
            GridMode::FullTensor => self.nyquist() * (self.dim() as f64).sqrt(),
            GridMode::Radial => self.nyquist(),
        }
    }

    /// Dyadic exponents `k` for which `P_{2^k}` is accepted.
    pub fn resolvable_range(&self) -> (i32, i32) {
        let lo = (self.frequency_resolution().log2().floor() as i32 - 2).min(-6);
        let hi = self.max_frequency().log2().ceil() as i32 + 3;
        (lo, hi)
    }

    /// Default ladder range `[-6, ceil(log2 max|xi|)]`.
    pub fn default_dyadic_range(&self) -> (i32, i32) {
        (-6, self.max_frequency().log2().ceil() as i32)
    }

    /// Quadrature weight of every physical sample.
    pub fn weights(&self) -> &[f64] {
        &self.inner.weights
    }

    /// Quadrature weight of every frequency sample.
    pub fn frequency_weights(&self) -> &[f64] {
        &self.inner.freq_weights
    }

    /// `|x|` for every physical sample.
    pub fn radii(&self) -> &[f64] {
        self.inner.radius.get_or_init(|| match self.mode() {
            GridMode::Radial => self.inner.nodes.clone(),
            GridMode::FullTensor => {
                let mut buf = vec![0.0; self.dim()];
                (0..self.len())
                    .map(|i| {
                        self.point(i, &mut buf);
                        buf.iter().map(|x| x * x).sum::<f64>().sqrt()
                    })
                    .collect()
            }
        })
    }

    /// `|xi|` for every frequency sample.
    pub fn frequency_magnitudes(&self) -> &[f64] {
        self.inner.freq_mag.get_or_init(|| match self.mode() {
            GridMode::Radial => self.inner.freq_nodes.clone(),
            GridMode::FullTensor => {
                let mut buf = vec![0.0; self.dim()];
                (0..self.len())
                    .map(|i| {
                        self.frequency(i, &mut buf);
                        buf.iter().map(|x| x * x).sum::<f64>().sqrt()
                    })
                    .collect()
            }
        })
    }

    /// Coordinates of physical sample `index`. Radial grids write the radius into `out[0]`.
    pub fn point(&self, index: usize, out: &mut [f64]) {
        self.unravel(index, out, &self.inner.nodes);
    }

    /// Frequency vector of sample `index`. Radial grids write `|xi|` into `out[0]`.
    pub fn frequency(&self, index: usize, out: &mut [f64]) {
        self.unravel(index, out, &self.inner.freq_nodes);
    }

    fn unravel(&self, index: usize, out: &mut [f64], axis: &[f64]) {
        match self.mode() {
            GridMode::Radial => out[0] = axis[index],
            GridMode::FullTensor => {
                let m = self.points();
                let mut rest = index;
                for a in (0..self.dim()).rev() {
                    out[a] = axis[rest % m];
                    rest /= m;
                }
            }
        }
    }

    /// Whether physical sample `index` lies in the outer tenth of the domain
    /// (`|x_i| > 0.4 L` on some axis, or `r > 0.8 R`).
    pub fn in_boundary_layer(&self, index: usize) -> bool {
        match self.mode() {
            GridMode::Radial => self.inner.nodes[index] > 0.8 * self.extent(),
            GridMode::FullTensor => {
                let m = self.points();
                let lim = 0.4 * self.extent();
                let mut rest = index;
                for _ in 0..self.dim() {
                    if self.inner.nodes[rest % m].abs() > lim {
                        return true;
                    }
                    rest /= m;
                }
                false
            }
        }
    }

    /// `int g dx` for samples of a real density.
    pub fn integrate(&self, density: &[f64]) -> f64 {
        debug_assert_eq!(density.len(), self.len());
        match self.mode() {
            GridMode::FullTensor => self.inner.weights[0] * density.iter().sum::<f64>(),
            GridMode::Radial => density.iter().zip(&self.inner.weights).map(|(g, w)| g * w).sum(),
        }
    }

    /// `int g dxi` for a density sampled on the frequency nodes.
    pub fn integrate_frequency(&self, density: &[f64]) -> f64 {
        debug_assert_eq!(density.len(), self.len());
        match self.mode() {
            GridMode::FullTensor => self.inner.freq_weights[0] * density.iter().sum::<f64>(),
            GridMode::Radial => density.iter().zip(&self.inner.freq_weights).map(|(g, w)| g * w).sum(),
        }
    }

    pub(crate) fn fft_plans(&self) -> &FftPlans {
        self.inner.fft.get_or_init(|| {
            let mut planner = FftPlanner::new();
            FftPlans { forward: planner.plan_fft_forward(self.points()), inverse: planner.plan_fft_inverse(self.points()) }
        })
    }

    pub(crate) fn radial_operator(&self) -> &RadialOperator {
        self.inner.radial.get_or_init(|| RadialOperator::build(self))
    }

    /// Physical samples as used for pointwise quantities: on radial grids the
    /// unresolved transform directions are removed first.
    pub(crate) fn pointwise<'a>(&self, samples: &'a [num_complex::Complex64]) -> std::borrow::Cow<'a, [num_complex::Complex64]> {
        match self.mode() {
            GridMode::Radial => self.radial_operator().filter_physical(samples),
            GridMode::FullTensor => std::borrow::Cow::Borrowed(samples),
        }
    }

    pub(crate) fn radial_derivative_matrix(&self) -> &ndarray::Array2<f64> {
        self.inner.radial_deriv.get_or_init(|| super::radial::derivative_matrix(self))
    }
}

impl Shared {
    fn new(spec: GridSpec) -> Shared {
        let n = spec.dim;
        let p = spec.points;
        let (nodes, freq_nodes, weights, freq_weights) = match spec.mode {
            GridMode::FullTensor => {
                let h = spec.extent / p as f64;
                let nodes: Vec<f64> = (0..p).map(|j| -0.5 * spec.extent + j as f64 * h).collect();
                let freqs: Vec<f64> = (0..p)
                    .map(|k| {
                        let k = if k < p / 2 { k as f64 } else { k as f64 - p as f64 };
                        k / spec.extent
                    })
                    .collect();
                // uniform: a single entry is enough
                (nodes, freqs, vec![h.powi(n as i32)], vec![spec.extent.powi(-(n as i32))])
            }
            GridMode::Radial if n % 2 == 1 => {
                let omega = sphere_area(n);
                let h = spec.extent / (p + 1) as f64;
                let drho = 0.5 / spec.extent;
                let nodes: Vec<f64> = (1..=p).map(|j| j as f64 * h).collect();
                let freqs: Vec<f64> = (1..=p).map(|m| m as f64 * drho).collect();
                let w = nodes.iter().map(|r| omega * r.powi(n as i32 - 1) * h).collect();
                let wf = freqs.iter().map(|r| omega * r.powi(n as i32 - 1) * drho).collect();
                (nodes, freqs, w, wf)
            }
            GridMode::Radial => {
                // Fourier-Bessel quadrature on the zeros of J_nu, exact for
                // band- and space-limited profiles
                let omega = sphere_area(n);
                let nu = n / 2 - 1;
                let zeros = bessel_j_zeros(nu, p + 1);
                let s = zeros[p];
                let big_r = spec.extent;
                let tau_r = 2.0 * PI * big_r;
                let nodes: Vec<f64> = zeros[..p].iter().map(|z| z * big_r / s).collect();
                let freqs: Vec<f64> = zeros[..p].iter().map(|z| z / tau_r).collect();
                let jsq: Vec<f64> = zeros[..p].iter().map(|&z| bessel_j_int(nu + 1, z).powi(2)).collect();
                let w = nodes.iter().zip(&jsq).map(|(r, j)| omega * r.powi(n as i32 - 2) * 2.0 * big_r * big_r / (s * s * j)).collect();
                let wf = freqs.iter().zip(&jsq).map(|(rho, j)| omega * rho.powi(n as i32 - 2) * 2.0 / (tau_r * tau_r * j)).collect();
                (nodes, freqs, w, wf)
            }
        };
        Shared {
            spec,
            nodes,
            freq_nodes,
            weights,
            freq_weights,
            radius: OnceLock::new(),
            freq_mag: OnceLock::new(),
            fft: OnceLock::new(),
            radial: OnceLock::new(),
            radial_deriv: OnceLock::new(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_descriptors() {
        assert!(matches!(Grid::full_tensor(2, 16.0, 32), Err(Error::InvalidGrid(_))));
        assert!(Grid::full_tensor(5, 16.0, 16).is_err());
        assert!(Grid::full_tensor(3, 16.0, 48).is_err());
        assert!(Grid::full_tensor(3, -1.0, 32).is_err());
        assert!(Grid::radial(9, 10.0, 2).is_err());
        assert!(Grid::radial(9, 10.0, 64).is_ok());
    }

    #[test]
    fn equal_descriptors_share_caches() {
        let a = Grid::radial(5, 12.0, 64).unwrap();
        let b = Grid::radial(5, 12.0, 64).unwrap();
        assert!(Arc::ptr_eq(&a.inner, &b.inner));
        assert_eq!(a, b);
        assert_ne!(a, Grid::radial(5, 12.5, 64).unwrap());
    }

    #[test]
    fn full_tensor_layout() {
        let g = Grid::full_tensor(3, 16.0, 8).unwrap();
        assert_eq!(g.len(), 512);
        assert_eq!(g.nodes()[0], -8.0);
        assert_eq!(g.frequency_nodes()[4], -0.25);
        let mut x = [0.0; 3];
        g.point(1 + 8 * 2 + 64 * 3, &mut x);
        assert_eq!(x, [-8.0 + 3.0 * 2.0, -8.0 + 2.0 * 2.0, -8.0 + 2.0]);
        assert_eq!(g.nyquist(), 0.25);
        assert!(g.in_boundary_layer(0));
        assert!(!g.in_boundary_layer(4 + 8 * 4 + 64 * 4));
    }

    #[test]
    fn radial_quadrature_integrates_gaussians() {
        // int exp(-pi |x|^2) dx = 1 in every dimension
        // odd n: trapezoid on an even integrand; even n: Bessel-zero nodes
        for (n, tol) in [(3, 1e-12), (4, 1e-12), (5, 1e-12), (6, 1e-12), (7, 1e-12), (8, 1e-12), (10, 1e-12)] {
            let g = Grid::radial(n, 8.0, 256).unwrap();
            let dens: Vec<f64> = g.radii().iter().map(|r| (-PI * r * r).exp()).collect();
            let val = g.integrate(&dens);
            assert!((val - 1.0).abs() < tol, "n={n}: {val}");
            let fd: Vec<f64> = g.frequency_magnitudes().iter().map(|r| (-PI * r * r).exp()).collect();
            let val = g.integrate_frequency(&fd);
            assert!((val - 1.0).abs() < tol, "n={n}: {val}");
        }
    }

    #[test]
    fn sphere_areas() {
        assert!((sphere_area(3) - 4.0 * PI).abs() < 1e-14);
        assert!((sphere_area(4) - 2.0 * PI * PI).abs() < 1e-13);
        assert!((sphere_area(7) - 16.0 * PI.powi(3) / 15.0).abs() < 1e-12);
    }
}
