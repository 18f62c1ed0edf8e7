use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spectral::{gradient, Field, Repr};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Sign {
    Defocusing,
    Focusing,
    /// `f = 0`, the free equation.
    Linear,
}

impl Sign {
    pub fn mu(self) -> f64 {
        match self {
            Sign::Defocusing => 1.0,
            Sign::Focusing => -1.0,
            Sign::Linear => 0.0,
        }
    }
}

/// A user-supplied pointwise nonlinearity; it must vanish at 0 and obey the
/// same growth bounds as the power law of the dimension.
pub type Hook = Arc<dyn Fn(Complex64) -> Complex64 + Send + Sync>;

/// `f(u) = mu |u|^p u` with the critical power `p = 4 / (n - 2)`, or a hook.
#[derive(Clone, Serialize, Deserialize)]
pub struct NonlinearitySpec {
    pub sign: Sign,
    dim: usize,
    #[serde(skip)]
    hook: Option<Hook>,
}

impl fmt::Debug for NonlinearitySpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("NonlinearitySpec").field("sign", &self.sign).field("dim", &self.dim).field("hook", &self.hook.is_some()).finish()
    }
}

impl PartialEq for NonlinearitySpec {
    fn eq(&self, other: &Self) -> bool {
        self.sign == other.sign && self.dim == other.dim && self.hook.is_none() && other.hook.is_none()
    }
}

/// `|z|^p`, with integer and half-integer powers taken without logarithms
/// and `0 -> 0` exactly.
pub(crate) fn abs_pow(z: Complex64, p: f64) -> f64 {
    let s = z.norm_sqr();
    if s == 0.0 {
        return 0.0;
    }
    let half = p / 2.0;
    if half.fract() == 0.0 {
        s.powi(half as i32)
    } else if p.fract() == 0.0 {
        s.sqrt().powi(p as i32)
    } else {
        (0.5 * p * s.ln()).exp()
    }
}

impl NonlinearitySpec {
    pub fn new(sign: Sign, dim: usize) -> Result<NonlinearitySpec> {
        if dim < 3 {
            return Err(Error::InvalidArgument(format!("the critical power needs n >= 3, got n = {dim}")));
        }
        Ok(NonlinearitySpec { sign, dim, hook: None })
    }

    pub fn defocusing(dim: usize) -> Result<NonlinearitySpec> {
        Self::new(Sign::Defocusing, dim)
    }

    pub fn focusing(dim: usize) -> Result<NonlinearitySpec> {
        Self::new(Sign::Focusing, dim)
    }

    pub fn linear(dim: usize) -> Result<NonlinearitySpec> {
        Self::new(Sign::Linear, dim)
    }

    pub fn with_hook(dim: usize, hook: Hook) -> Result<NonlinearitySpec> {
        let mut s = Self::new(Sign::Defocusing, dim)?;
        if hook(Complex64::new(0.0, 0.0)) != Complex64::new(0.0, 0.0) {
            return Err(Error::InvalidArgument("a nonlinearity hook must satisfy f(0) = 0".into()));
        }
        s.hook = Some(hook);
        Ok(s)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn power(&self) -> f64 {
        4.0 / (self.dim as f64 - 2.0)
    }

    pub fn mu(&self) -> f64 {
        self.sign.mu()
    }

    pub fn has_hook(&self) -> bool {
        self.hook.is_some()
    }

    pub fn is_linear(&self) -> bool {
        self.hook.is_none() && self.sign == Sign::Linear
    }

    fn require_power(&self, what: &str) -> Result<()> {
        if self.hook.is_some() {
            return Err(Error::Contract(format!("{what} is only defined for the power nonlinearity")));
        }
        Ok(())
    }

    pub fn eval(&self, z: Complex64) -> Complex64 {
        match &self.hook {
            Some(h) => h(z),
            None if self.sign == Sign::Linear => Complex64::new(0.0, 0.0),
            None => z * (self.mu() * abs_pow(z, self.power())),
        }
    }

    /// `f_z = mu (p/2 + 1) |z|^p`
    pub fn f_z(&self, z: Complex64) -> f64 {
        self.mu() * (self.power() / 2.0 + 1.0) * abs_pow(z, self.power())
    }

    /// `f_zbar = mu (p/2) |z|^{p-2} z^2`
    pub fn f_zbar(&self, z: Complex64) -> Complex64 {
        let p = self.power();
        if z.norm_sqr() == 0.0 {
            return Complex64::new(0.0, 0.0);
        }
        // |z|^{p-2} z^2 = |z|^p e^{2i arg z}
        let phase = z / z.norm();
        phase * phase * (self.mu() * p / 2.0 * abs_pow(z, p))
    }

    /// `f(u)` pointwise on a physical field.
    pub fn apply(&self, u: &Field) -> Result<Field> {
        if u.repr() != Repr::Physical {
            return Err(Error::Contract("the nonlinearity acts on physical samples".into()));
        }
        let data = u.grid().pointwise(u.samples()).iter().map(|&z| self.eval(z)).collect();
        Field::new(u.grid(), Repr::Physical, data)
    }

    /// `f_z(u) grad u + f_zbar(u) grad conj(u)`, the chain-rule assembly of `grad f(u)`.
    pub fn chain_rule_gradient(&self, u: &Field) -> Result<Vec<Field>> {
        self.require_power("the chain rule")?;
        let u = u.to_physical();
        let s = u.grid().pointwise(u.samples());
        Ok(gradient(&u)
            .into_iter()
            .map(|g| {
                let data = g.samples().iter().zip(s.iter()).map(|(d, &z)| d * self.f_z(z) + self.f_zbar(z) * d.conj()).collect();
                Field::new(u.grid(), Repr::Physical, data).expect("finite by construction")
            })
            .collect())
    }

    /// `F` with `f = dF/d(conj z)` scaled so that the energy density is
    /// `|grad u|^2 / 2 + F(u)`: `F(z) = mu / (p + 2) |z|^{p+2}`.
    pub fn potential(&self, z: Complex64) -> f64 {
        let p = self.power();
        self.mu() / (p + 2.0) * abs_pow(z, p + 2.0)
    }

    /// Largest observed ratios `|f(u)| / |u|^{p+1}` and
    /// `|f(u) - f(v)| / (|u - v| (|u|^p + |v|^p))` over the sample pairs.
    pub fn growth_constants(&self, pairs: &[(Complex64, Complex64)]) -> (f64, f64) {
        let p = self.power();
        let mut c1 = 0.0f64;
        let mut c2 = 0.0f64;
        for &(u, v) in pairs {
            let du = abs_pow(u, p + 1.0);
            if du > 0.0 {
                c1 = c1.max(self.eval(u).norm() / du);
            }
            let d = (u - v).norm() * (abs_pow(u, p) + abs_pow(v, p));
            if d > 0.0 {
                c2 = c2.max((self.eval(u) - self.eval(v)).norm() / d);
            }
        }
        (c1, c2)
    }
}

/// Hamiltonian `int |grad u|^2 / 2 + F(u)`.
pub fn energy(u: &Field, spec: &NonlinearitySpec) -> Result<f64> {
    spec.require_power("the energy")?;
    let kinetic = 0.5 * u.sobolev_norm(1.0).powi(2);
    if spec.is_linear() {
        return Ok(kinetic);
    }
    let u = u.to_physical();
    let dens: Vec<f64> = u.grid().pointwise(u.samples()).iter().map(|&z| spec.potential(z)).collect();
    Ok(kinetic + u.grid().integrate(&dens))
}
