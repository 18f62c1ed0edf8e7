use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::norms::{critical_exponent, NormKind};
use crate::spectral::field::lebesgue;
use crate::spectral::Trajectory;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Piece {
    /// Sample indices of the endpoints; consecutive pieces share one.
    pub i0: usize,
    pub i1: usize,
    pub t0: f64,
    pub t1: f64,
    pub norm: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Subdivision {
    pub kind: NormKind,
    pub threshold: f64,
    /// Norm over the whole trajectory, `M`.
    pub total: f64,
    pub pieces: Vec<Piece>,
    /// `(1 + M / nu)^q`, the expected order of the piece count.
    pub ceiling: f64,
}

impl Subdivision {
    pub fn count(&self) -> usize {
        self.pieces.len()
    }

    pub fn within_ceiling(&self) -> bool {
        self.count() as f64 <= self.ceiling
    }
}

/// `L^{2(n+2)/(n-2)}_{t,x}`, the norm the blowup criterion is phrased in.
pub fn critical_kind(n: usize) -> NormKind {
    let p = critical_exponent(n);
    NormKind::MixedLebesgue { q: p, r: p }
}

/// Greedy left-to-right partition of the time lattice into pieces whose
/// `L^q_t L^r_x` norm is at most `nu`. Only finite `q` is supported: the
/// pieces are glued through additivity of `int ||u||_r^q dt`.
pub fn subdivide_by_norm(u: &Trajectory, nu: f64, kind: &NormKind) -> Result<Subdivision> {
    if !(nu > 0.0) || !nu.is_finite() {
        return Err(Error::InvalidArgument(format!("subdivision threshold must be positive, got {nu}")));
    }
    let (q, r) = match *kind {
        NormKind::MixedLebesgue { q, r } if !q.is_infinite() => (q, r),
        _ => {
            return Err(Error::UnsupportedNorm {
                kind: kind.to_string(),
                reason: "subdivision needs a mixed Lebesgue norm with finite time exponent".into(),
            })
        }
    };
    q.check_lebesgue()?;
    r.check_lebesgue()?;
    let qv = q.value();
    let dt = u.step();
    let spatial: Vec<f64> = u
        .slices()
        .iter()
        .map(|s| lebesgue(u.grid(), u.grid().pointwise(s.samples()).iter().map(|z| z.norm_sqr().sqrt()), r.value()).powf(qv))
        .collect();
    let panels: Vec<f64> = spatial.windows(2).map(|w| 0.5 * dt * (w[0] + w[1])).collect();
    let budget = nu.powf(qv);
    let times = u.times();

    let mut pieces = Vec::new();
    let mut start = 0;
    let mut acc = 0.0;
    for (k, &c) in panels.iter().enumerate() {
        if c > budget {
            return Err(Error::Resolution { index: k, value: c.powf(1.0 / qv), threshold: nu });
        }
        if acc + c > budget {
            pieces.push(Piece { i0: start, i1: k, t0: times[start], t1: times[k], norm: acc.powf(1.0 / qv) });
            start = k;
            acc = 0.0;
        }
        acc += c;
    }
    let last = times.len() - 1;
    pieces.push(Piece { i0: start, i1: last, t0: times[start], t1: times[last], norm: acc.powf(1.0 / qv) });
    let total = panels.iter().sum::<f64>().powf(1.0 / qv);
    Ok(Subdivision { kind: kind.clone(), threshold: nu, total, pieces, ceiling: (1.0 + total / nu).powf(qv) })
}
