//! Scale-invariant spacetime norms on trajectories.
//!
//! Spatial integrals use the grid quadrature, time integrals the composite
//! trapezoid on the trajectory's uniform lattice (`q = inf` is a discrete
//! max). Gradients are spectral: componentwise on full-tensor grids, `d/dr`
//! on radial grids, where `|grad u| = |d_r u|` for radial `u`.
//!
//! Dyadic sums run over the bands `2^k`, `k_min <= k <= k_max`, plus the low
//! residual `P_{<= 2^{k_min-1}}`, which enters as one more term with the
//! weight of `N = 2^{k_min - 1}`.

mod exponent;
mod mixed;

use std::fmt;
use std::io::Write;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

pub use exponent::{critical_exponent, n1_exponents, s0_pairs, w_exponents, x_exponents, xy_weight, y_exponents, AdmissiblePair, Exponent};
pub use mixed::{gradient_mixed_norm, mixed_norm};

use crate::error::{Error, Result};
use crate::spectral::bump::{multiplier, ProjectorKind, BUMP_PROFILE_ID};
use crate::spectral::ladder::{check_level, RECONSTRUCTION_TOLERANCE};
use crate::spectral::{Grid, GridMode, Trajectory};
use mixed::Profile;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum NormKind {
    MixedLebesgue {
        q: Exponent,
        r: Exponent,
    },
    /// `sup_t || |grad|^s u(t) ||_2`
    HomSobolev {
        s: f64,
    },
    W,
    N1,
    S0,
    S1,
    X,
    Y,
}

impl fmt::Display for NormKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            NormKind::MixedLebesgue { q, r } => write!(f, "L^{q}_t L^{r}_x"),
            NormKind::HomSobolev { s } => write!(f, "L^inf_t H^{s}_x"),
            NormKind::W => f.write_str("W"),
            NormKind::N1 => f.write_str("N1"),
            NormKind::S0 => f.write_str("S0"),
            NormKind::S1 => f.write_str("S1"),
            NormKind::X => f.write_str("X"),
            NormKind::Y => f.write_str("Y"),
        }
    }
}

/// Optional overrides for the dyadic norms.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NormSettings {
    /// `(k_min, k_max)`; defaults to the grid's default dyadic range.
    pub dyadic_range: Option<(i32, i32)>,
    /// Sampled pairs for the S0/S1 supremum; defaults to `s0_pairs(n)`.
    pub pairs: Option<Vec<AdmissiblePair>>,
}

impl NormSettings {
    pub fn range(&self, grid: &Grid) -> (i32, i32) {
        self.dyadic_range.unwrap_or_else(|| grid.default_dyadic_range())
    }

    pub fn pairs(&self, n: usize) -> Vec<AdmissiblePair> {
        self.pairs.clone().unwrap_or_else(|| s0_pairs(n))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NormMetadata {
    pub dim: usize,
    pub mode: GridMode,
    pub extent: f64,
    pub points: usize,
    pub interval: (f64, f64),
    pub time_samples: usize,
    pub time_rule: String,
    pub spatial_rule: String,
    pub gradient_rule: Option<String>,
    pub dyadic_range: Option<(i32, i32)>,
    pub pairs: Vec<AdmissiblePair>,
    pub bump: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NormReport {
    pub kind: NormKind,
    pub value: f64,
    pub metadata: NormMetadata,
}

fn spatial_rule(grid: &Grid) -> &'static str {
    match grid.mode() {
        GridMode::FullTensor => "uniform-cell-sum",
        GridMode::Radial if grid.dim() % 2 == 1 => "radial-trapezoid",
        GridMode::Radial => "radial-fourier-bessel",
    }
}

fn gradient_rule(grid: &Grid) -> &'static str {
    match grid.mode() {
        GridMode::FullTensor => "spectral-componentwise",
        GridMode::Radial => "spectral-radial-derivative",
    }
}

/// Norms of every dyadic piece of `u` (or of `grad u`) for a list of
/// exponent pairs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BandNorm {
    pub level: i32,
    /// The low residual `P_{<= 2^level}` rather than a band.
    pub residual: bool,
    pub values: Vec<f64>,
}

impl BandNorm {
    pub fn dyadic(&self) -> f64 {
        2f64.powi(self.level)
    }
}

fn check_range(grid: &Grid, (k_min, k_max): (i32, i32)) -> Result<()> {
    if k_min >= k_max {
        return Err(Error::InvalidArgument(format!("need k_min < k_max, got [{k_min}, {k_max}]")));
    }
    check_level(grid, k_min)?;
    check_level(grid, k_max)
}

/// Worst relative spectral weight above the ladder over all slices.
fn ladder_loss(grid: &Grid, spectra: &[Vec<Complex64>], k_max: i32) -> f64 {
    let top = 2f64.powi(k_max);
    let lost: Vec<f64> = grid.frequency_magnitudes().iter().map(|&k| 1.0 - multiplier(ProjectorKind::Low, top, k)).collect();
    spectra
        .iter()
        .map(|s| {
            let total: Vec<f64> = s.iter().map(|z| z.norm_sqr()).collect();
            let miss: Vec<f64> = s.iter().zip(&lost).map(|(z, w)| z.norm_sqr() * w * w).collect();
            let total = grid.integrate_frequency(&total);
            if total > 0.0 {
                (grid.integrate_frequency(&miss) / total).sqrt()
            } else {
                0.0
            }
        })
        .fold(0.0, f64::max)
}

/// `||P_N u||_{q,r}` (or `||grad P_N u||_{q,r}`) for every band in `range`
/// and the low residual, which comes first.
pub fn band_norms(u: &Trajectory, range: (i32, i32), exponents: &[(Exponent, Exponent)], gradient: bool) -> Result<Vec<BandNorm>> {
    let spectra = u.spectra();
    band_norms_from_spectra(u.grid(), u.step(), &spectra, range, exponents, gradient)
}

pub(crate) fn band_norms_from_spectra(
    grid: &Grid,
    dt: f64,
    spectra: &[Vec<Complex64>],
    range: (i32, i32),
    exponents: &[(Exponent, Exponent)],
    gradient: bool,
) -> Result<Vec<BandNorm>> {
    check_range(grid, range)?;
    for (q, r) in exponents {
        q.check_lebesgue()?;
        r.check_lebesgue()?;
    }
    let error = ladder_loss(grid, spectra, range.1);
    if error > RECONSTRUCTION_TOLERANCE {
        return Err(Error::Reconstruction { error, tolerance: RECONSTRUCTION_TOLERANCE });
    }
    let profile = |kind: ProjectorKind, nv: f64| {
        let m = move |k: f64| multiplier(kind, nv, k);
        if gradient {
            Profile::filtered_gradient(grid, dt, spectra, m)
        } else {
            Profile::filtered(grid, dt, spectra, m)
        }
    };
    let mut out = Vec::with_capacity((range.1 - range.0 + 2) as usize);
    let low = range.0 - 1;
    let p = profile(ProjectorKind::Low, 2f64.powi(low));
    out.push(BandNorm { level: low, residual: true, values: exponents.iter().map(|&(q, r)| p.norm(q, r)).collect() });
    for k in range.0..=range.1 {
        let p = profile(ProjectorKind::Band, 2f64.powi(k));
        out.push(BandNorm { level: k, residual: false, values: exponents.iter().map(|&(q, r)| p.norm(q, r)).collect() });
    }
    Ok(out)
}

/// `(sum_N w(N) ||P_N u||^2)^{1/2}` from one column of band norms.
fn weighted_square_sum(bands: &[BandNorm], column: usize, weight: impl Fn(f64) -> f64) -> f64 {
    bands.iter().map(|b| weight(b.dyadic()) * b.values[column].powi(2)).sum::<f64>().sqrt()
}

pub fn norm(u: &Trajectory, kind: &NormKind, settings: &NormSettings) -> Result<NormReport> {
    let grid = u.grid();
    let n = grid.dim();
    let mut meta = NormMetadata {
        dim: n,
        mode: grid.mode(),
        extent: grid.extent(),
        points: grid.points(),
        interval: u.interval(),
        time_samples: u.len(),
        time_rule: "composite-trapezoid".into(),
        spatial_rule: spatial_rule(grid).into(),
        gradient_rule: None,
        dyadic_range: None,
        pairs: Vec::new(),
        bump: None,
    };
    let value = match kind {
        NormKind::MixedLebesgue { q, r } => mixed_norm(u, *q, *r)?,
        NormKind::HomSobolev { s } => {
            if !(*s >= 0.0) {
                return Err(Error::UnsupportedNorm { kind: kind.to_string(), reason: "negative regularity is not computed".into() });
            }
            u.slices().iter().map(|f| f.sobolev_norm(*s)).fold(0.0, f64::max)
        }
        NormKind::W | NormKind::N1 => {
            meta.gradient_rule = Some(gradient_rule(grid).into());
            let (q, r) = if *kind == NormKind::W { w_exponents(n) } else { n1_exponents(n) };
            gradient_mixed_norm(u, q, r)?
        }
        NormKind::S0 | NormKind::S1 => {
            let gradient = *kind == NormKind::S1;
            if gradient {
                meta.gradient_rule = Some(gradient_rule(grid).into());
            }
            let range = settings.range(grid);
            let pairs = settings.pairs(n);
            if pairs.is_empty() {
                return Err(Error::UnsupportedNorm { kind: kind.to_string(), reason: "empty admissible-pair sample".into() });
            }
            for p in &pairs {
                AdmissiblePair::new(n, p.q, p.r)?;
            }
            let exps: Vec<_> = pairs.iter().map(|p| (p.q, p.r)).collect();
            let bands = band_norms(u, range, &exps, gradient)?;
            meta.dyadic_range = Some(range);
            meta.pairs = pairs;
            meta.bump = Some(BUMP_PROFILE_ID.into());
            (0..exps.len()).map(|c| weighted_square_sum(&bands, c, |_| 1.0)).fold(0.0, f64::max)
        }
        NormKind::X | NormKind::Y => {
            let range = settings.range(grid);
            let (q, r) = if *kind == NormKind::X { x_exponents(n) } else { y_exponents(n) };
            let bands = band_norms(u, range, &[(q, r)], false)?;
            meta.dyadic_range = Some(range);
            meta.bump = Some(BUMP_PROFILE_ID.into());
            let w = xy_weight(n);
            weighted_square_sum(&bands, 0, |nv| nv.powf(w))
        }
    };
    Ok(NormReport { kind: kind.clone(), value, metadata: meta })
}

/// Convenience wrapper returning only the value.
pub fn norm_value(u: &Trajectory, kind: &NormKind, settings: &NormSettings) -> Result<f64> {
    norm(u, kind, settings).map(|r| r.value)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SquareSumReport {
    pub pair: AdmissiblePair,
    /// `||(sum_N |P_N u|^2)^{1/2}||_{q,r}`
    pub square_function: f64,
    /// `(sum_N ||P_N u||_{q,r}^2)^{1/2}`
    pub band_sum: f64,
    pub ratio: f64,
    pub within_contract: bool,
}

/// Slack allowed above 1 for the square-sum ratio; both sides are weighted
/// discrete norms, so only rounding separates them from Minkowski.
pub const SQUARE_SUM_TOLERANCE: f64 = 1e-12;

pub fn square_sum_check(u: &Trajectory, pair: AdmissiblePair, settings: &NormSettings) -> Result<SquareSumReport> {
    let grid = u.grid();
    AdmissiblePair::new(grid.dim(), pair.q, pair.r)?;
    let range = settings.range(grid);
    check_range(grid, range)?;
    let spectra = u.spectra();
    let error = ladder_loss(grid, &spectra, range.1);
    if error > RECONSTRUCTION_TOLERANCE {
        return Err(Error::Reconstruction { error, tolerance: RECONSTRUCTION_TOLERANCE });
    }
    let dt = u.step();
    let mut squares: Option<Profile> = None;
    let mut band_sum = 0.0;
    let levels = std::iter::once((ProjectorKind::Low, range.0 - 1)).chain((range.0..=range.1).map(|k| (ProjectorKind::Band, k)));
    for (kind, k) in levels {
        let p = Profile::filtered(grid, dt, &spectra, |s| multiplier(kind, 2f64.powi(k), s));
        band_sum += p.norm(pair.q, pair.r).powi(2);
        match squares.as_mut() {
            Some(acc) => acc.accumulate_square(&p),
            None => squares = Some(p),
        }
    }
    let band_sum = band_sum.sqrt();
    let square_function = squares.map(|p| p.norm(pair.q, pair.r)).unwrap_or(0.0);
    let ratio = if band_sum > 0.0 { square_function / band_sum } else { 0.0 };
    Ok(SquareSumReport { pair, square_function, band_sum, ratio, within_contract: ratio <= 1.0 + SQUARE_SUM_TOLERANCE })
}

/// `kind,value` rows for plotting.
pub fn write_csv(w: impl Write, reports: &[NormReport]) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(["kind", "value"])?;
    for r in reports {
        out.write_record([r.kind.to_string(), format!("{:e}", r.value)])?;
    }
    out.flush()?;
    Ok(())
}
