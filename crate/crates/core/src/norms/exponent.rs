use std::fmt;
use std::str::FromStr;

use num_rational::Ratio;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// A Lebesgue exponent in `[1, inf]`, kept exact so that admissibility can
/// be checked in rational arithmetic.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Exponent {
    Finite(Ratio<i64>),
    Infinite,
}

impl Exponent {
    pub const INF: Exponent = Exponent::Infinite;

    pub fn int(k: i64) -> Exponent {
        Exponent::Finite(Ratio::from_integer(k))
    }

    pub fn ratio(num: i64, den: i64) -> Result<Exponent> {
        if den == 0 {
            return Err(Error::InvalidArgument(format!("exponent {num}/0")));
        }
        Ok(Exponent::Finite(Ratio::new(num, den)))
    }

    pub fn is_infinite(self) -> bool {
        matches!(self, Exponent::Infinite)
    }

    pub fn value(self) -> f64 {
        match self {
            Exponent::Infinite => f64::INFINITY,
            Exponent::Finite(r) => *r.numer() as f64 / *r.denom() as f64,
        }
    }

    /// `1/p`, with `1/inf = 0`.
    pub fn reciprocal(self) -> Ratio<i64> {
        match self {
            Exponent::Infinite => Ratio::from_integer(0),
            Exponent::Finite(r) => r.recip(),
        }
    }

    /// Fails unless `1 <= p <= inf`.
    pub fn check_lebesgue(self) -> Result<()> {
        match self {
            Exponent::Finite(r) if r < Ratio::from_integer(1) => Err(Error::InvalidArgument(format!("Lebesgue exponent {self} below 1"))),
            _ => Ok(()),
        }
    }
}

impl fmt::Display for Exponent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Exponent::Infinite => f.write_str("inf"),
            Exponent::Finite(r) if *r.denom() == 1 => write!(f, "{}", r.numer()),
            Exponent::Finite(r) => write!(f, "{}/{}", r.numer(), r.denom()),
        }
    }
}

impl FromStr for Exponent {
    type Err = Error;

    fn from_str(s: &str) -> Result<Exponent> {
        let s = s.trim();
        if s.eq_ignore_ascii_case("inf") || s == "∞" {
            return Ok(Exponent::Infinite);
        }
        let bad = || Error::InvalidArgument(format!("cannot parse exponent {s:?}"));
        match s.split_once('/') {
            Some((a, b)) => Exponent::ratio(a.trim().parse().map_err(|_| bad())?, b.trim().parse().map_err(|_| bad())?),
            None => Ok(Exponent::int(s.parse().map_err(|_| bad())?)),
        }
    }
}

impl Serialize for Exponent {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Exponent {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Exponent, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Schrodinger-admissible `(q, r)`: `2/q + n/r = n/2`, `2 <= q, r <= inf`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct AdmissiblePair {
    pub q: Exponent,
    pub r: Exponent,
}

impl AdmissiblePair {
    pub fn new(n: usize, q: Exponent, r: Exponent) -> Result<AdmissiblePair> {
        let two = Ratio::from_integer(2);
        let half = Ratio::new(1, 2);
        for (name, p) in [("q", q), ("r", r)] {
            if p.reciprocal() > half {
                return Err(Error::InvalidArgument(format!("{name} = {p} is below 2")));
            }
        }
        let n = Ratio::from_integer(n as i64);
        let lhs = two * q.reciprocal() + n * r.reciprocal();
        if lhs != n / two {
            return Err(Error::InvalidArgument(format!("({q}, {r}) is not admissible: 2/q + n/r = {lhs}, want {}", n / two)));
        }
        Ok(AdmissiblePair { q, r })
    }
}

impl fmt::Display for AdmissiblePair {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.q, self.r)
    }
}

fn frac(num: usize, den: usize) -> Exponent {
    Exponent::Finite(Ratio::new(num as i64, den as i64))
}

/// The sampled pairs used for the S0 supremum: both endpoints and three
/// interior pairs.
pub fn s0_pairs(n: usize) -> Vec<AdmissiblePair> {
    let sym = frac(2 * (n + 2), n);
    [
        (Exponent::INF, Exponent::int(2)),
        (Exponent::int(2), frac(2 * n, n - 2)),
        (sym, sym),
        (frac(n + 2, 1), frac(2 * n * (n + 2), n * n + 2 * n - 4)),
        (Exponent::int(4), frac(2 * n, n - 1)),
    ]
    .into_iter()
    .map(|(q, r)| AdmissiblePair::new(n, q, r).expect("sampled pairs are admissible"))
    .collect()
}

/// `(2(n+2)/(n-2), 2n(n+2)/(n^2+4))`, the exponents of the W norm of the gradient.
pub fn w_exponents(n: usize) -> (Exponent, Exponent) {
    (frac(2 * (n + 2), n - 2), frac(2 * n * (n + 2), n * n + 4))
}

/// `(2, 2n/(n+2))`, the exponents of the N1 norm of the gradient.
pub fn n1_exponents(n: usize) -> (Exponent, Exponent) {
    (Exponent::int(2), frac(2 * n, n + 2))
}

/// `(n+2, 2(n+2)/n)` for X.
pub fn x_exponents(n: usize) -> (Exponent, Exponent) {
    (frac(n + 2, 1), frac(2 * (n + 2), n))
}

/// `((n+2)/3, 2(n+2)/(n+4))` for Y.
pub fn y_exponents(n: usize) -> (Exponent, Exponent) {
    (frac(n + 2, 3), frac(2 * (n + 2), n + 4))
}

/// `2(n+2)/(n-2)`, the diagonal spacetime exponent controlled by W.
pub fn critical_exponent(n: usize) -> Exponent {
    frac(2 * (n + 2), n - 2)
}

/// `8/(n+2)`, the dyadic weight exponent of X and Y.
pub fn xy_weight(n: usize) -> f64 {
    8.0 / (n as f64 + 2.0)
}
