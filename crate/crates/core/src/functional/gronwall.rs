use serde::Serialize;

use crate::{Error, Result};

/// Relative slack for the finite-difference hypothesis and monotonicity checks.
pub const GRONWALL_SLACK: f64 = 1e-3;

/// Outcome of checking the Gronwall-type lemma on sampled data.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum GronwallVerdict {
    /// `F` is nondecreasing wherever the hypothesis holds.
    Nondecreasing { f: Vec<f64>, hypothesis_failures: Vec<usize> },
    NotMonotone { f: Vec<f64>, violations: Vec<(usize, usize)> },
    /// `∫_0 ψ(s) / s^{1+1/γ} ds` diverges, so the lemma says nothing.
    HypothesisViolated { reason: String },
}

impl GronwallVerdict {
    pub fn is_nondecreasing(&self) -> bool {
        matches!(self, GronwallVerdict::Nondecreasing { .. })
    }
}

/// Checks `φ(r) ≤ γ r φ'(r) + ψ(r)` on the grid and, where it holds, that
/// `F(r) = φ(r) / r^{1/γ} + (1/γ) ∫_0^r ψ(s) / s^{1+1/γ} ds` is nondecreasing.
///
/// The integral below the first sample is extrapolated from the power law of
/// `ψ` over the first two positive samples; a power not above `1/γ` means the
/// integral diverges.
pub fn gronwall_check(r: &[f64], phi: &[f64], psi: &[f64], gamma: f64) -> Result<GronwallVerdict> {
    let n = r.len();
    if n < 3 || phi.len() != n || psi.len() != n {
        return Err(Error::invalid("need at least 3 samples of r, phi and psi with equal lengths"));
    }
    if r[0] <= 0.0 || r.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::invalid("grid must be positive and strictly increasing"));
    }
    if !(gamma > 0.0) {
        return Err(Error::invalid("gamma must be positive"));
    }
    let k = 1.0 / gamma;
    let g = |i: usize| psi[i] / r[i].powf(1.0 + k);

    let tail = match (psi[0] > 0.0, psi[1] > 0.0) {
        (false, _) => 0.0,
        (true, false) => return Ok(hypothesis_violated("psi vanishes after a positive first sample")),
        (true, true) => {
            let a = (psi[1] / psi[0]).ln() / (r[1] / r[0]).ln();
            if a <= k {
                return Ok(hypothesis_violated(&format!(
                    "psi ~ s^{a:.3} near 0 is not integrable against s^-(1+1/gamma) = s^-{:.3}",
                    1.0 + k
                )));
            }
            psi[0] * r[0].powf(-k) / (a - k)
        }
    };

    // Trapezoid on the grid for the rest of the integral.
    let mut integral = vec![tail; n];
    for i in 1..n {
        integral[i] = integral[i - 1] + 0.5 * (g(i - 1) + g(i)) * (r[i] - r[i - 1]);
    }
    let f: Vec<f64> = (0..n).map(|i| phi[i] / r[i].powf(k) + k * integral[i]).collect();

    let scale = phi.iter().chain(psi).fold(0.0f64, |m, v| m.max(v.abs())).max(f64::MIN_POSITIVE);
    let hypothesis_failures: Vec<usize> = (0..n)
        .filter(|&i| {
            let dphi = derivative(r, phi, i);
            phi[i] > gamma * r[i] * dphi + psi[i] + GRONWALL_SLACK * scale
        })
        .collect();

    let f_scale = f.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(f64::MIN_POSITIVE);
    let violations: Vec<(usize, usize)> = (0..n - 1)
        .filter(|&i| !hypothesis_failures.contains(&i) && !hypothesis_failures.contains(&(i + 1)))
        .filter(|&i| f[i + 1] < f[i] - GRONWALL_SLACK * f_scale)
        .map(|i| (i, i + 1))
        .collect();
    Ok(if violations.is_empty() {
        GronwallVerdict::Nondecreasing { f, hypothesis_failures }
    } else {
        GronwallVerdict::NotMonotone { f, violations }
    })
}

fn hypothesis_violated(reason: &str) -> GronwallVerdict {
    GronwallVerdict::HypothesisViolated { reason: reason.to_string() }
}

/// Second-order finite difference on a non-uniform grid (one-sided at the ends).
fn derivative(r: &[f64], v: &[f64], i: usize) -> f64 {
    let n = r.len();
    let (a, b, c) = if i == 0 {
        (0, 1, 2)
    } else if i == n - 1 {
        (n - 3, n - 2, n - 1)
    } else {
        (i - 1, i, i + 1)
    };
    // Derivative at r[i] of the quadratic through the three points.
    let (x0, x1, x2) = (r[a], r[b], r[c]);
    let x = r[i];
    v[a] * (2.0 * x - x1 - x2) / ((x0 - x1) * (x0 - x2))
        + v[b] * (2.0 * x - x0 - x2) / ((x1 - x0) * (x1 - x2))
        + v[c] * (2.0 * x - x0 - x1) / ((x2 - x0) * (x2 - x1))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid() -> Vec<f64> {
        (0..40).map(|i| 0.01 * 1.1f64.powi(i)).collect()
    }

    #[test]
    fn equality_case_gives_constant() {
        let r = grid();
        let gamma = 0.8;
        let phi: Vec<f64> = r.iter().map(|x| x.powf(1.0 / gamma)).collect();
        let psi = vec![0.0; r.len()];
        match gronwall_check(&r, &phi, &psi, gamma).unwrap() {
            GronwallVerdict::Nondecreasing { f, hypothesis_failures } => {
                assert!(hypothesis_failures.is_empty());
                assert!(f.iter().all(|v| (v - 1.0).abs() < 1e-6));
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn constant_psi_violates_the_hypothesis() {
        let r = grid();
        let c = vec![2.0; r.len()];
        let v = gronwall_check(&r, &c, &c, 1.0).unwrap();
        assert!(matches!(v, GronwallVerdict::HypothesisViolated { .. }));
    }

    #[test]
    fn decreasing_f_is_reported() {
        let r = grid();
        // φ = r² with γ = 1 gives F = r growing; φ = r^{1/2} breaks the hypothesis.
        let phi: Vec<f64> = r.iter().map(|x| x * x).collect();
        let psi = vec![0.0; r.len()];
        assert!(gronwall_check(&r, &phi, &psi, 1.0).unwrap().is_nondecreasing());
        let bad: Vec<f64> = r.iter().map(|x| x.sqrt()).collect();
        match gronwall_check(&r, &bad, &psi, 1.0).unwrap() {
            GronwallVerdict::Nondecreasing { hypothesis_failures, .. } => assert_eq!(hypothesis_failures.len(), r.len()),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn rejects_unsorted_grid() {
        assert!(gronwall_check(&[0.1, 0.3, 0.2], &[1.0; 3], &[0.0; 3], 1.0).is_err());
    }
}
