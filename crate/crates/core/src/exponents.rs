//! Integrability and Hölder exponent arithmetic.
//!
//! Infinite exponents are represented by `f64::INFINITY`; reciprocals are then
//! exactly zero, so the formulas need no special cases.

use serde::Serialize;

use crate::eigen::{flatness_threshold, sigma_from_beta};

/// Sobolev conjugate `2* = 2N / (N - 2)`, infinite for `N = 2`.
pub fn sobolev_star(n: u32) -> f64 {
    if n <= 2 {
        f64::INFINITY
    } else {
        2.0 * n as f64 / (n as f64 - 2.0)
    }
}

/// `r* = rN / (N - r)` for `r < N`, infinite for `r = N`.
pub fn sobolev_exponent(n: u32, r: f64) -> f64 {
    let nf = n as f64;
    if r >= nf {
        f64::INFINITY
    } else {
        r * nf / (nf - r)
    }
}

/// Harmonic combination `1/p0 = 1/p + 1/q`.
pub fn harmonic_p0(p: f64, q: f64) -> f64 {
    1.0 / (1.0 / p + 1.0 / q)
}

/// Largest admissible Hölder exponent for a given `p0`: `(p0 - N/2) / p0`.
pub fn holder_bound(n: u32, p0: f64) -> f64 {
    1.0 - 0.5 * n as f64 / p0
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExponentBundle {
    pub n: u32,
    pub p: f64,
    pub q: f64,
    pub p0: f64,
    pub alpha: f64,
    /// Upper bound `(p0 - N/2) / p0` that `alpha` must stay below.
    pub alpha_max: f64,
    pub beta: f64,
    pub sigma_star: f64,
    /// Only available where cap eigenvalues are (`N ∈ {2, 3}`).
    pub t_star: Option<f64>,
    pub eps_max: Option<f64>,
    pub unconditional: bool,
    pub valid: bool,
    pub reason: Option<String>,
}

/// Builds the full exponent chain for `u ∈ L^p`, `f ∈ L^q` and a requested `α`.
/// Invalid combinations come back flagged rather than as errors.
pub fn bundle_from_pq(n: u32, p: f64, q: f64, alpha: f64) -> ExponentBundle {
    let p0 = harmonic_p0(p, q);
    let alpha_max = holder_bound(n, p0);
    let beta = 2.0 * alpha;
    let mut reason = None;
    if n < 2 {
        reason = Some("N < 2".to_string());
    } else if !(p >= 1.0 && q >= 1.0) {
        reason = Some("p and q must be >= 1".to_string());
    } else if p0 <= 0.5 * n as f64 {
        reason = Some("p0 ≤ N/2".to_string());
    } else if !(alpha > 0.0 && alpha < 1.0) {
        reason = Some("alpha must lie in (0, 1)".to_string());
    } else if alpha >= alpha_max {
        reason = Some(format!("alpha ≥ (p0 - N/2)/p0 = {alpha_max}"));
    }
    let sigma_star = sigma_from_beta(n, beta);
    let threshold = if beta > 0.0 && beta < 2.0 { flatness_threshold(n, beta).ok() } else { None };
    ExponentBundle {
        n,
        p,
        q,
        p0,
        alpha,
        alpha_max,
        beta,
        sigma_star,
        t_star: threshold.map(|t| t.t_star),
        eps_max: threshold.map(|t| t.eps_max),
        unconditional: threshold.is_some_and(|t| t.unconditional),
        valid: reason.is_none(),
        reason,
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AlphaBound {
    pub alpha_max: f64,
    pub valid: bool,
    pub reason: Option<String>,
}

impl AlphaBound {
    fn new(alpha_max: f64, reason: Option<String>) -> Self {
        AlphaBound { alpha_max, valid: reason.is_none(), reason }
    }
}

/// Bound when `u` only comes from the energy space: `u ∈ L^{2*}`, `f ∈ L^q`,
/// `α < 1 - (N/2)((N-2)/(2N) + 1/q)`, for `2 ≤ N ≤ 5` and `q ∈ I_N`.
pub fn alpha_max_cor1(n: u32, q: f64) -> AlphaBound {
    let nf = n as f64;
    let alpha_max = 1.0 - 0.5 * nf * ((nf - 2.0) / (2.0 * nf) + 1.0 / q);
    let reason = if !(2..=5).contains(&n) {
        Some(format!("N = {n} outside [2, 5]"))
    } else if n == 2 && q < 2.0 {
        Some("not in I_2 = [2, ∞)".to_string())
    } else if n > 2 && q <= 2.0 * nf / (6.0 - nf) {
        Some(format!("not in I_{n} = ({}, ∞)", 2.0 * nf / (6.0 - nf)))
    } else {
        None
    };
    AlphaBound::new(alpha_max, reason)
}

/// Bound when `f = div F` with `F ∈ L^r`, so that `u ∈ L^{r*}`:
/// `α < 1 - (N/2)(1/r* + 1/q)`. Returns `None` for `r > N`, where the
/// estimate is not needed.
pub fn alpha_max_cor2(n: u32, r: f64, q: f64) -> Option<AlphaBound> {
    let nf = n as f64;
    if r > nf {
        return None;
    }
    let r_star = sobolev_exponent(n, r);
    let alpha_max = 1.0 - 0.5 * nf * (1.0 / r_star + 1.0 / q);
    let reason = if r <= nf / 3.0 {
        Some("r ≤ N/3".to_string())
    } else if r < 2.0 {
        Some("r < 2".to_string())
    } else if q <= r * nf / (3.0 * r - nf) {
        Some(format!("q ≤ rN/(3r - N) = {}", r * nf / (3.0 * r - nf)))
    } else {
        None
    };
    Some(AlphaBound::new(alpha_max, reason))
}
