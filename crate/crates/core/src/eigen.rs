//! First Dirichlet eigenvalues of spherical caps and the exponent/flatness
//! conversions built on them.
//!
//! The cap `S_t` is the part of the unit sphere in `R^N` above height `t`. In
//! the plane it is an arc of length `π - 2 asin t`.

use std::f64::consts::PI;

use serde::Serialize;

use crate::{Error, Result};

/// RK4 steps used by the three-dimensional shooting method.
pub const SHOOTING_STEPS: usize = 10_000;
/// Absolute bisection tolerance on the eigenvalue.
pub const EIGEN_TOL: f64 = 1e-8;
/// Caps are not resolved closer than this to the full sphere (`t = -1`).
const T_FLOOR: f64 = -1.0 + 1e-6;
/// `eps_max` is kept strictly below the flatness ceiling `1/2`.
const EPS_CEILING: f64 = 0.5 - 1e-9;

pub const UNCONDITIONAL_2D: &str = "unconditional in 2-D";

/// `λ1(S_t)` for `N ∈ {2, 3}`.
pub fn cap_eigenvalue(n: u32, t: f64) -> Result<f64> {
    if !(t > -1.0 && t < 1.0) {
        return Err(Error::invalid(format!("cap height t = {t} must lie in (-1, 1)")));
    }
    match n {
        2 => {
            let len = PI - 2.0 * t.asin();
            Ok((PI / len).powi(2))
        }
        3 => Ok(shoot_cap(t.acos())),
        _ => Err(Error::invalid(format!("cap eigenvalues are implemented for N = 2, 3, not {n}"))),
    }
}

/// Bisection on `λ` for `u'' + cot θ u' + λ u = 0`, `u(0) = 1`, `u(θ0) = 0`.
fn shoot_cap(theta0: f64) -> f64 {
    // `u(θ0; λ)` is positive below the first eigenvalue and changes sign at it.
    let mut lo = 0.0;
    let mut hi = 1.0;
    while shoot(theta0, hi) > 0.0 {
        lo = hi;
        hi *= 2.0;
    }
    while hi - lo > EIGEN_TOL * 1e-2 {
        let mid = 0.5 * (lo + hi);
        if shoot(theta0, mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// `u(θ0)` for the regular solution, started from its series at `θ0 / 100`.
fn shoot(theta0: f64, lambda: f64) -> f64 {
    let start = theta0 / 100.0;
    // u = 1 - λθ²/4 + λ(λ - 2/3)θ⁴/64 + O(θ⁶).
    let a1 = -lambda / 4.0;
    let a2 = lambda * (lambda - 2.0 / 3.0) / 64.0;
    let s2 = start * start;
    let mut u = 1.0 + a1 * s2 + a2 * s2 * s2;
    let mut du = 2.0 * a1 * start + 4.0 * a2 * s2 * start;
    let h = (theta0 - start) / SHOOTING_STEPS as f64;
    let rhs = |th: f64, u: f64, du: f64| (du, -du / th.tan() - lambda * u);
    for k in 0..SHOOTING_STEPS {
        let th = start + k as f64 * h;
        let (k1u, k1d) = rhs(th, u, du);
        let (k2u, k2d) = rhs(th + 0.5 * h, u + 0.5 * h * k1u, du + 0.5 * h * k1d);
        let (k3u, k3d) = rhs(th + 0.5 * h, u + 0.5 * h * k2u, du + 0.5 * h * k2d);
        let (k4u, k4d) = rhs(th + h, u + h * k3u, du + h * k3d);
        u += h / 6.0 * (k1u + 2.0 * k2u + 2.0 * k3u + k4u);
        du += h / 6.0 * (k1d + 2.0 * k2d + 2.0 * k3d + k4d);
    }
    u
}

/// `β = √((N-2)² + 4σ*) - (N-2)`, defined for `0 < σ* < N - 1`.
pub fn beta_from_sigma(n: u32, sigma_star: f64) -> Result<f64> {
    if n < 2 {
        return Err(Error::invalid("dimension must be at least 2"));
    }
    let top = (n - 1) as f64;
    if !(sigma_star > 0.0 && sigma_star < top) {
        return Err(Error::invalid(format!("sigma* = {sigma_star} must lie in (0, {top})")));
    }
    let m = n as f64 - 2.0;
    Ok((m * m + 4.0 * sigma_star).sqrt() - m)
}

/// Inverse of [`beta_from_sigma`]: `σ* = (β/2)(β/2 + N - 2)`.
pub fn sigma_from_beta(n: u32, beta: f64) -> f64 {
    let b = 0.5 * beta;
    b * (b + n as f64 - 2.0)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct FlatnessThreshold {
    pub sigma_star: f64,
    /// Cap height with `λ1(S_{t*}) = σ*`; `-1` when no cap is needed.
    pub t_star: f64,
    /// Largest flatness for which the eigenvalue bound is guaranteed, `|t*| / 2`.
    pub eps_max: f64,
    /// Planar arcs never go below `λ1 = 1/4`, so `β ≤ 1` needs no flatness at all.
    pub unconditional: bool,
}

impl FlatnessThreshold {
    pub fn flag(&self) -> Option<&'static str> {
        self.unconditional.then_some(UNCONDITIONAL_2D)
    }
}

/// Solves `λ1(S_t) = σ*(β)` for `t` and reports `ε_max = |t*| / 2`.
pub fn flatness_threshold(n: u32, beta: f64) -> Result<FlatnessThreshold> {
    if !(beta > 0.0 && beta < 2.0) {
        return Err(Error::invalid(format!("beta = {beta} must lie in (0, 2)")));
    }
    if n != 2 && n != 3 {
        return Err(Error::invalid(format!("flatness threshold is implemented for N = 2, 3, not {n}")));
    }
    let sigma_star = sigma_from_beta(n, beta);
    if n == 2 && sigma_star <= 0.25 {
        return Ok(FlatnessThreshold { sigma_star, t_star: -1.0, eps_max: EPS_CEILING, unconditional: true });
    }
    let (mut lo, mut hi) = (T_FLOOR, 0.0);
    let t_star = if cap_eigenvalue(n, lo)? >= sigma_star {
        // The cap needed is closer to the whole sphere than we resolve.
        lo
    } else {
        // λ1 is increasing in t and λ1(S_0) = N - 1 > σ*.
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if cap_eigenvalue(n, mid)? < sigma_star {
                lo = mid;
            } else {
                hi = mid;
            }
            if hi - lo < 1e-13 {
                break;
            }
        }
        0.5 * (lo + hi)
    };
    Ok(FlatnessThreshold { sigma_star, t_star, eps_max: (0.5 * t_star.abs()).min(EPS_CEILING), unconditional: false })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn half_circle_and_hemisphere() {
        assert_eq!(cap_eigenvalue(2, 0.0).unwrap(), 1.0);
        assert!((cap_eigenvalue(3, 0.0).unwrap() - 2.0).abs() < 1e-6);
        assert!((cap_eigenvalue(2, -0.5).unwrap() - 0.5625).abs() < 1e-14);
    }

    #[test]
    fn rejects_degenerate_caps() {
        assert!(cap_eigenvalue(2, 1.0).is_err());
        assert!(cap_eigenvalue(3, -1.0).is_err());
        assert!(cap_eigenvalue(4, 0.0).is_err());
    }

    #[test]
    fn small_cap_matches_flat_disk() {
        // A tiny cap of angular radius θ0 is nearly a flat disk: λ1 ≈ j0² / θ0².
        let j0 = 2.404_825_557_695_773;
        let th: f64 = 0.01;
        let lam = cap_eigenvalue(3, th.cos()).unwrap();
        assert!((lam * th * th / (j0 * j0) - 1.0).abs() < 1e-4);
    }

    #[test]
    fn beta_sigma_examples() {
        assert_eq!(beta_from_sigma(2, 0.25).unwrap(), 1.0);
        assert_eq!(beta_from_sigma(3, 0.75).unwrap(), 1.0);
        assert!(beta_from_sigma(2, 1.0).is_err());
        assert!(beta_from_sigma(3, 0.0).is_err());
        for n in [2, 3, 4] {
            assert!(beta_from_sigma(n, (n - 1) as f64 - 1e-9).unwrap() > 2.0 - 1e-4);
        }
        assert_eq!(sigma_from_beta(2, 1.0), 0.25);
        assert_eq!(sigma_from_beta(3, 1.0), 0.75);
    }

    #[test]
    fn threshold_examples() {
        let t = flatness_threshold(2, 1.5).unwrap();
        assert!((t.sigma_star - 0.5625).abs() < 1e-15);
        assert!((t.t_star + 0.5).abs() < 1e-10);
        assert!((t.eps_max - 0.25).abs() < 1e-10);
        assert_eq!(t.flag(), None);

        let u = flatness_threshold(2, 1.0).unwrap();
        assert_eq!(u.flag(), Some(UNCONDITIONAL_2D));
        assert!(u.eps_max < 0.5 && u.eps_max > 0.5 - 1e-6);

        let h = flatness_threshold(3, 2.0 - 1e-6).unwrap();
        assert!(h.t_star.abs() < 1e-5 && h.eps_max < 1e-5);
    }
}
