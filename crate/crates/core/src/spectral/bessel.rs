//! Radial Fourier kernel.
//!
//! For a radial function on R^n the Fourier transform reduces to a one
//! dimensional integral against the spherical mean of a plane wave,
//!
//!   A_n(x) = Gamma(n/2) (2/x)^nu J_nu(x),   nu = n/2 - 1,
//!
//! which is an entire function of x with A_n(0) = 1. Odd n uses the
//! closed-form spherical Bessel functions, even n integer-order J_nu.

use std::f64::consts::PI;

/// Spherical mean of `exp(i x e_1 . w)` over the unit sphere in R^n.
pub fn spherical_mean(n: usize, x: f64) -> f64 {
    debug_assert!(n >= 1);
    let x = x.abs();
    if x <= series_cutoff(n) {
        return series(n, x);
    }
    if n % 2 == 1 {
        let l = (n - 3) / 2;
        odd_prefactor(n) * spherical_bessel(l, x) / x.powi(l as i32)
    } else {
        let nu = n / 2 - 1;
        let mut c = 1.0;
        for k in 1..=nu {
            c *= 2.0 * k as f64;
        }
        c * bessel_j_int(nu, x) / x.powi(nu as i32)
    }
}

/// Derivative of `spherical_mean(n, .)`, through `A_n'(x) = -x A_{n+2}(x) / n`.
pub fn spherical_mean_derivative(n: usize, x: f64) -> f64 {
    -x * spherical_mean(n + 2, x) / n as f64
}

fn series_cutoff(n: usize) -> f64 {
    4.0 + 0.5 * n as f64
}

/// `sum_k (-x^2/4)^k / (k! (n/2)_k)`
fn series(n: usize, x: f64) -> f64 {
    let y = -0.25 * x * x;
    let a = 0.5 * n as f64;
    let mut term = 1.0;
    let mut sum = 1.0;
    for k in 0..200 {
        let kf = k as f64;
        term *= y / ((kf + 1.0) * (a + kf));
        sum += term;
        if term.abs() < 1e-18 * sum.abs().max(1e-300) {
            break;
        }
    }
    sum
}

/// `Gamma(n/2) 2^nu sqrt(2/pi)` for odd n; equals 1 at n = 3.
fn odd_prefactor(n: usize) -> f64 {
    // Gamma(n/2) for half-integer argument: Gamma(1/2) = sqrt(pi), Gamma(a+1) = a Gamma(a)
    let mut gamma = PI.sqrt();
    let mut a = 0.5;
    while a < 0.5 * n as f64 - 1e-12 {
        gamma *= a;
        a += 1.0;
    }
    let nu = 0.5 * n as f64 - 1.0;
    gamma * 2f64.powf(nu) * (2.0 / PI).sqrt()
}

/// Spherical Bessel function j_l by upward recurrence; only called for
/// x beyond the series cutoff, where upward recurrence is stable.
fn spherical_bessel(l: usize, x: f64) -> f64 {
    let (s, c) = x.sin_cos();
    let j0 = s / x;
    if l == 0 {
        return j0;
    }
    let j1 = s / (x * x) - c / x;
    let (mut prev, mut cur) = (j0, j1);
    for k in 1..l {
        let next = (2 * k + 1) as f64 / x * cur - prev;
        prev = cur;
        cur = next;
    }
    cur
}

/// Integer-order Bessel function of the first kind, x > 0.
pub fn bessel_j_int(nu: usize, x: f64) -> f64 {
    let nuf = nu as f64;
    if x >= 30.0_f64.max(nuf * nuf) {
        hankel_asymptotic(nuf, x)
    } else {
        miller(nu, x)
    }
}

/// First `count` positive zeros of `J_nu`.
///
/// Zeros of `J_0` come from McMahon's expansion polished by Newton; higher
/// orders are bracketed by interlacing, `j_{nu-1,k} < j_{nu,k} < j_{nu-1,k+1}`.
pub fn bessel_j_zeros(nu: usize, count: usize) -> Vec<f64> {
    if nu == 0 {
        return (1..=count)
            .map(|k| {
                let b = (k as f64 - 0.25) * PI;
                let b2 = b * b;
                let mut x = b + 1.0 / (8.0 * b) - 31.0 / (384.0 * b * b2) + 3779.0 / (15360.0 * b * b2 * b2);
                for _ in 0..8 {
                    let dx = bessel_j_int(0, x) / bessel_j_int(1, x);
                    x += dx;
                    if dx.abs() <= 1e-16 * x {
                        break;
                    }
                }
                x
            })
            .collect();
    }
    let below = bessel_j_zeros(nu - 1, count + 1);
    below.windows(2).map(|w| bracketed_root(|x| bessel_j_int(nu, x), w[0], w[1])).collect()
}

/// Illinois false position on a sign-changing bracket.
fn bracketed_root(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64) -> f64 {
    let (mut fa, mut fb) = (f(a), f(b));
    if fa == 0.0 {
        return a;
    }
    if fb == 0.0 {
        return b;
    }
    debug_assert!(fa.signum() != fb.signum());
    let mut side = 0i8;
    for _ in 0..200 {
        let c = (a * fb - b * fa) / (fb - fa);
        if (b - a).abs() <= 4.0 * f64::EPSILON * c.abs() {
            return c;
        }
        let fc = f(c);
        if fc == 0.0 {
            return c;
        }
        if fc.signum() == fb.signum() {
            b = c;
            fb = fc;
            if side == -1 {
                fa *= 0.5;
            }
            side = -1;
        } else {
            a = c;
            fa = fc;
            if side == 1 {
                fb *= 0.5;
            }
            side = 1;
        }
    }
    0.5 * (a + b)
}

fn hankel_asymptotic(nu: f64, x: f64) -> f64 {
    let mu = 4.0 * nu * nu;
    let mut p = 0.0;
    let mut q = 0.0;
    let mut a = 1.0;
    let mut last = f64::INFINITY;
    for k in 0..60usize {
        if k > 0 {
            let odd = (2 * k - 1) as f64;
            a *= (mu - odd * odd) / (k as f64 * 8.0 * x);
        }
        if a.abs() > last {
            break;
        }
        last = a.abs();
        let sign = if (k / 2) % 2 == 0 { 1.0 } else { -1.0 };
        if k % 2 == 0 {
            p += sign * a;
        } else {
            q += sign * a;
        }
        if a.abs() < 1e-17 {
            break;
        }
    }
    let chi = x - (0.5 * nu + 0.25) * PI;
    (2.0 / (PI * x)).sqrt() * (p * chi.cos() - q * chi.sin())
}

/// Miller's backward recurrence normalised with `J_0 + 2 sum J_{2k} = 1`.
fn miller(nu: usize, x: f64) -> f64 {
    const BIG: f64 = 1e250;
    let top = (nu as f64).max(x.ceil());
    let m = 2 * ((top + 20.0 + (60.0 * top).sqrt()) as usize / 2);
    let tox = 2.0 / x;
    let (mut bjp, mut bj) = (0.0f64, 1.0f64);
    let (mut ans, mut sum) = (0.0f64, 0.0f64);
    let mut even = false;
    for j in (1..=m).rev() {
        let bjm = j as f64 * tox * bj - bjp;
        bjp = bj;
        bj = bjm;
        if bj.abs() > BIG {
            bj /= BIG;
            bjp /= BIG;
            ans /= BIG;
            sum /= BIG;
        }
        if even {
            sum += bj;
        }
        even = !even;
        if j == nu {
            ans = bjp;
        }
    }
    if nu == 0 {
        ans = bj;
    }
    let norm = 2.0 * sum - bj;
    ans / norm
}
