//! Radial Fourier transform by direct quadrature.
//!
//! Forward and inverse transforms share the kernel `A_n(2 pi rho r)`:
//!
//!   fhat(rho_m) = sum_j W_j f(r_j) A_n(2 pi rho_m r_j)
//!   f(r_j)      = sum_m Wf_m fhat(rho_m) A_n(2 pi rho_m r_j)
//!
//! In square-root-weighted coordinates both are the same symmetric matrix
//! `T = sqrt(Wf) K sqrt(W)`. For odd n the nodes are `r_j = j h`,
//! `rho_m = m / 2R`; for even n they are scaled zeros of `J_{n/2-1}`. Either
//! way T is within quadrature error of an involution, and it is replaced by
//! its matrix sign so that the round trip is exact. The correction is low
//! rank and is computed by subspace iteration on `T^2 - I`.

use ndarray::{Array2, ArrayView2, Axis};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::bessel::{spherical_mean, spherical_mean_derivative};
use super::grid::Grid;

pub(crate) struct RadialOperator {
    kernel: Array2<f64>,
    sqrt_w: Vec<f64>,
    sqrt_wf: Vec<f64>,
    /// Unit vectors, in weighted coordinates, of the directions the kernel
    /// cannot resolve.
    spurious: Vec<Vec<f64>>,
}

const EIGEN_CUTOFF: f64 = 1e-12;
const NULL_CUTOFF: f64 = 1e-6;

impl RadialOperator {
    pub fn build(grid: &Grid) -> RadialOperator {
        let n = grid.dim();
        let r = grid.nodes();
        let rho = grid.frequency_nodes();
        let sqrt_w: Vec<f64> = grid.weights().iter().map(|w| w.sqrt()).collect();
        let sqrt_wf: Vec<f64> = grid.frequency_weights().iter().map(|w| w.sqrt()).collect();
        let p = r.len();
        let tau = 2.0 * std::f64::consts::PI;
        let mut kernel = Array2::<f64>::zeros((p, p));
        for m in 0..p {
            for j in m..p {
                let v = sqrt_wf[m] * spherical_mean(n, tau * rho[m] * r[j]) * sqrt_w[j];
                kernel[[m, j]] = v;
                kernel[[j, m]] = v;
            }
        }
        let spurious = sign_project(&mut kernel);
        RadialOperator { kernel, sqrt_w, sqrt_wf, spurious }
    }

    pub fn forward(&self, slices: &[&[Complex64]]) -> Vec<Vec<Complex64>> {
        apply(self.kernel.view(), &self.sqrt_w, &self.sqrt_wf, slices)
    }

    pub fn inverse(&self, slices: &[&[Complex64]]) -> Vec<Vec<Complex64>> {
        apply(self.kernel.view(), &self.sqrt_wf, &self.sqrt_w, slices)
    }

    /// Physical samples with the unresolved directions removed.
    ///
    /// Such a direction is kept by the transform so that the round trip stays
    /// exact, but it lives on the innermost nodes, where `1 / sqrt(W)` blows
    /// it up. Pointwise quantities (maxima, `L^q` norms) are read off the
    /// filtered samples.
    pub fn filter_physical<'a>(&self, samples: &'a [Complex64]) -> std::borrow::Cow<'a, [Complex64]> {
        if self.spurious.is_empty() {
            return std::borrow::Cow::Borrowed(samples);
        }
        let mut out = samples.to_vec();
        for u in &self.spurious {
            let c: Complex64 = out.iter().zip(&self.sqrt_w).zip(u).map(|((z, w), v)| z * w * v).sum();
            out.iter_mut().zip(&self.sqrt_w).zip(u).for_each(|((z, w), v)| *z -= c * v / w);
        }
        std::borrow::Cow::Owned(out)
    }
}

/// `y = diag(1/s_out) K diag(s_in) x` for a batch of complex vectors.
fn apply(k: ArrayView2<f64>, s_in: &[f64], s_out: &[f64], slices: &[&[Complex64]]) -> Vec<Vec<Complex64>> {
    let p = s_in.len();
    let b = slices.len();
    if b == 0 {
        return Vec::new();
    }
    let mut x = Array2::<f64>::zeros((p, 2 * b));
    for (c, s) in slices.iter().enumerate() {
        for j in 0..p {
            x[[j, 2 * c]] = s[j].re * s_in[j];
            x[[j, 2 * c + 1]] = s[j].im * s_in[j];
        }
    }
    let y = k.dot(&x);
    (0..b).map(|c| (0..p).map(|m| Complex64::new(y[[m, 2 * c]], y[[m, 2 * c + 1]]) / s_out[m]).collect()).collect()
}

/// Matrix taking frequency samples to samples of the radial derivative `d/dr`.
pub(crate) fn derivative_matrix(grid: &Grid) -> Array2<f64> {
    let n = grid.dim();
    let r = grid.nodes();
    let rho = grid.frequency_nodes();
    let wf = grid.frequency_weights();
    let tau = 2.0 * std::f64::consts::PI;
    let p = r.len();
    Array2::from_shape_fn((p, p), |(j, m)| wf[m] * tau * rho[m] * spherical_mean_derivative(n, tau * rho[m] * r[j]))
}

pub(crate) fn apply_derivative(grid: &Grid, spectra: &[&[Complex64]]) -> Vec<Vec<Complex64>> {
    let ones = vec![1.0; grid.len()];
    apply(grid.radial_derivative_matrix().view(), &ones, &ones, spectra)
}

/// Replace the symmetric matrix `t` by `sign(t)` assuming `E = t^2 - I` is
/// numerically low rank.
///
/// `sign(t) = t (I + E)^{-1/2}` needs only the eigenpairs of `E`, found by
/// subspace iteration from a random start. Directions where `t` is nearly
/// singular (a single vector concentrated at the origin for odd n >= 5) have
/// no well-defined sign and are mapped to +1; they are returned.
fn sign_project(t: &mut Array2<f64>) -> Vec<Vec<f64>> {
    let p = t.nrows();
    let defect = |x: &Array2<f64>| -> Array2<f64> { t.dot(&t.dot(x)) - x };
    let mut rng = ChaCha8Rng::seed_from_u64(0x5167_4e5f_7072_6f6a);
    let mut k = p.min(48);
    let (u, s) = loop {
        let omega = Array2::from_shape_fn((p, k), |_| rng.gen_range(-1.0..1.0));
        let mut q = orthonormalize(defect(&omega));
        for _ in 0..2 {
            if q.ncols() == 0 {
                return Vec::new();
            }
            q = orthonormalize(defect(&q));
        }
        if q.ncols() == 0 {
            return Vec::new();
        }
        let c = symmetric(q.t().dot(&defect(&q)));
        let eig = nalgebra::SymmetricEigen::new(c);
        let keep: Vec<usize> = (0..eig.eigenvalues.len()).filter(|&i| eig.eigenvalues[i].abs() > EIGEN_CUTOFF).collect();
        if keep.len() + 8 > q.ncols() && k < p {
            k = p.min(2 * k);
            continue;
        }
        let v = Array2::from_shape_fn((q.ncols(), keep.len()), |(i, c)| eig.eigenvectors[(i, keep[c])]);
        let s: Vec<f64> = keep.iter().map(|&i| eig.eigenvalues[i]).collect();
        break (q.dot(&v), s);
    };
    if s.is_empty() {
        return Vec::new();
    }
    let mut spurious = Vec::new();
    let tu = t.dot(&u);
    // t + (t U) diag(c) U^T, plus (I - t) U0 U0^T on the singular directions
    let mut left = tu.clone();
    for (c, mut col) in left.axis_iter_mut(Axis(1)).enumerate() {
        let coef = if 1.0 + s[c] < NULL_CUTOFF { -1.0 } else { (1.0 + s[c]).powf(-0.5) - 1.0 };
        col *= coef;
    }
    *t += &left.dot(&u.t());
    for (c, &sc) in s.iter().enumerate() {
        if 1.0 + sc < NULL_CUTOFF {
            let col = u.column(c);
            for i in 0..p {
                for j in 0..p {
                    t[[i, j]] += col[i] * col[j];
                }
            }
            spurious.push(col.to_vec());
        }
    }
    let sym = symmetric(t.clone());
    for ((i, j), v) in t.indexed_iter_mut() {
        *v = sym[(i, j)];
    }
    spurious
}

fn symmetric(a: Array2<f64>) -> nalgebra::DMatrix<f64> {
    let n = a.nrows();
    nalgebra::DMatrix::from_fn(n, n, |i, j| 0.5 * (a[[i, j]] + a[[j, i]]))
}

/// Orthonormal basis of the column span, by two passes of modified
/// Gram-Schmidt. Columns that are numerically dependent are dropped.
fn orthonormalize(a: Array2<f64>) -> Array2<f64> {
    let scale = a.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if scale == 0.0 {
        return Array2::zeros((a.nrows(), 0));
    }
    let mut cols: Vec<Vec<f64>> = Vec::new();
    for col in a.axis_iter(Axis(1)) {
        let mut v: Vec<f64> = col.to_vec();
        let before = norm(&v);
        for _ in 0..2 {
            for q in &cols {
                let d = dot(q, &v);
                v.iter_mut().zip(q).for_each(|(x, y)| *x -= d * y);
            }
        }
        let nv = norm(&v);
        if nv > 1e-10 * before && nv > 1e-300 {
            v.iter_mut().for_each(|x| *x /= nv);
            cols.push(v);
        }
    }
    let p = a.nrows();
    Array2::from_shape_fn((p, cols.len()), |(i, c)| cols[c][i])
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn involution_defect(grid: &Grid) -> f64 {
        let op = grid.radial_operator();
        let p = grid.len();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let x = Array2::from_shape_fn((p, 4), |_| rng.gen_range(-1.0..1.0));
        let y = op.kernel.dot(&op.kernel.dot(&x));
        let diff = (&y - &x).mapv(|v| v * v).sum().sqrt();
        diff / x.mapv(|v| v * v).sum().sqrt()
    }

    #[test]
    fn kernels_are_exact_involutions() {
        let cases = [
            (3, 128, 12.0),
            (4, 256, 10.0),
            (5, 200, 15.0),
            (7, 512, 20.0),
            (8, 512, 16.0),
            (9, 300, 18.0),
            (11, 1024, 30.0),
            (12, 300, 14.0),
        ];
        for (n, p, r) in cases {
            let g = Grid::radial(n, r, p).unwrap();
            let d = involution_defect(&g);
            assert!(d < 1e-11, "n={n}: {d:e}");
        }
    }

    #[test]
    fn only_odd_high_dimensions_have_an_unresolved_direction() {
        for (n, expect) in [(3, 0), (4, 0), (7, 1), (8, 0)] {
            let g = Grid::radial(n, 16.0, 256).unwrap();
            assert_eq!(g.radial_operator().spurious.len(), expect, "n={n}");
        }
    }

    #[test]
    fn filtered_low_band_has_no_origin_spike() {
        // a low band cut out of broadband data; at the origin it must equal int P fhat
        use crate::spectral::{bump::multiplier, lp_project, Dyadic, Field, ProjectorKind};
        let g = Grid::radial(7, 256.0, 1024).unwrap();
        let shell = |k: f64, c: f64| (-((k - c) / (0.3 * c)).powi(2)).exp();
        let spectrum = |k: f64| shell(k, 0.0625) + 1e4 * shell(k, 1.0);
        let f = Field::from_spectrum(&g, |xi| Complex64::new(spectrum(xi[0]), 0.0)).unwrap().to_physical();
        let band = lp_project(&f, Dyadic(-4), ProjectorKind::Band).unwrap();
        let dens: Vec<f64> = g.frequency_magnitudes().iter().map(|&k| multiplier(ProjectorKind::Band, 0.0625, k) * spectrum(k)).collect();
        let at_zero = g.integrate_frequency(&dens);
        let raw = band.samples()[0].norm();
        let got = g.pointwise(band.samples())[0].norm();
        assert!((got / at_zero - 1.0).abs() < 2e-3, "{got:e} {at_zero:e} {raw:e}");
    }

    #[test]
    fn orthonormalize_drops_dependent_columns() {
        let a = Array2::from_shape_fn((6, 3), |(i, j)| if j == 2 { (i as f64) * 2.0 } else { (i + j) as f64 });
        let q = orthonormalize(a);
        assert_eq!(q.ncols(), 2);
        let g = q.t().dot(&q);
        assert!((g[[0, 0]] - 1.0).abs() < 1e-14 && g[[0, 1]].abs() < 1e-14);
    }
}
