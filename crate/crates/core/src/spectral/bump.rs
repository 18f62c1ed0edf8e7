//! The Littlewood-Paley bump.
//!
//! `phi(s) = 1` for `s <= 1`, `phi(s) = 0` for `s >= 2`, and on `1 < s < 2`
//!
//!   phi(s) = psi(2 - s) / (psi(2 - s) + psi(s - 1)),   psi(t) = exp(-1/t),
//!
//! which is smooth across both ends of the transition. Band multipliers are
//! `phi(s/N) - phi(2s/N)`, supported in `N/2 <= s <= 2N`.

use serde::{Deserialize, Serialize};

/// Identifier recorded in every report that depends on the bump.
pub const BUMP_PROFILE_ID: &str = "exp-ratio-c-inf/v1";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum ProjectorKind {
    /// `P_N`
    Band,
    /// `P_{<=N}`
    Low,
    /// `P_{>N}`
    High,
}

fn psi(t: f64) -> f64 {
    if t <= 0.0 {
        0.0
    } else {
        (-1.0 / t).exp()
    }
}

pub fn phi(s: f64) -> f64 {
    let s = s.abs();
    if s <= 1.0 {
        1.0
    } else if s >= 2.0 {
        0.0
    } else {
        let a = psi(2.0 - s);
        let b = psi(s - 1.0);
        a / (a + b)
    }
}

/// Multiplier of the projector at frequency magnitude `s` and dyadic `n`.
pub fn multiplier(kind: ProjectorKind, n: f64, s: f64) -> f64 {
    match kind {
        ProjectorKind::Band => phi(s / n) - phi(2.0 * s / n),
        ProjectorKind::Low => phi(s / n),
        ProjectorKind::High => 1.0 - phi(s / n),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn support_and_plateau() {
        assert_eq!(phi(0.0), 1.0);
        assert_eq!(phi(1.0), 1.0);
        assert_eq!(phi(2.0), 0.0);
        assert_eq!(phi(7.5), 0.0);
        assert!((phi(1.5) - 0.5).abs() < 1e-15);
        let mut prev = 1.0;
        for i in 0..=1000 {
            let v = phi(1.0 + i as f64 / 1000.0);
            assert!(v <= prev + 1e-15 && (0.0..=1.0).contains(&v));
            prev = v;
        }
    }

    #[test]
    fn band_multiplier_support() {
        for &n in &[0.25, 1.0, 8.0] {
            assert_eq!(multiplier(ProjectorKind::Band, n, 0.49 * n), 0.0);
            assert_eq!(multiplier(ProjectorKind::Band, n, 2.01 * n), 0.0);
            assert!(multiplier(ProjectorKind::Band, n, n) > 0.99);
        }
    }

    #[test]
    fn bands_telescope_to_low_projector() {
        for i in 1..400 {
            let s = i as f64 * 0.05;
            let sum: f64 = (-8..=6).map(|k| multiplier(ProjectorKind::Band, 2f64.powi(k), s)).sum();
            let low = multiplier(ProjectorKind::Low, 64.0, s) - multiplier(ProjectorKind::Low, 2f64.powi(-9), s);
            assert!((sum - low).abs() < 1e-14);
        }
    }

    #[test]
    fn derivatives_vanish_at_transition_ends() {
        // one-sided difference quotients of every low order go to zero
        for &end in &[1.0, 2.0] {
            let dir = if end == 1.0 { 1.0 } else { -1.0 };
            let h = 0.02;
            let base = phi(end);
            let d = (phi(end + dir * h) - base).abs() / h;
            let d_half = (phi(end + dir * h / 2.0) - base).abs() / (h / 2.0);
            assert!(d < 1e-10 && d_half <= d);
        }
    }
}
