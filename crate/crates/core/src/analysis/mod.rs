//! Decay exponents, Campanato and Poincaré quotients and Hölder fits from
//! solved fields.
//!
//! Campanato and Poincaré quotients treat `u` as extended by zero outside the
//! domain, so balls that leave `Ω` are measured in full.

mod campanato;
mod decay;
mod holder;

use serde::Serialize;

pub use campanato::{campanato_seminorm, poincare_ratio, BallQuotient, CampanatoValue, PoincareValue};
pub use decay::{energy_decay_fit, psi_decay_fit, DecayFit, PsiDecayFit, PSI_SLOPE_SLACK};
pub use holder::{holder_exponent_fit, HolderBin, HolderFit, RegionSpec, MIN_PAIR_BUDGET};

/// Least-squares line through `(x, y)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct LineFit {
    pub slope: f64,
    pub intercept: f64,
    /// Root mean square of the residuals.
    pub rms: f64,
}

pub fn fit_line(x: &[f64], y: &[f64]) -> Option<LineFit> {
    let n = x.len();
    if n < 2 || y.len() != n {
        return None;
    }
    let nf = n as f64;
    let mx = x.iter().sum::<f64>() / nf;
    let my = y.iter().sum::<f64>() / nf;
    let sxx: f64 = x.iter().map(|v| (v - mx) * (v - mx)).sum();
    if sxx == 0.0 {
        return None;
    }
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let rms = (x.iter().zip(y).map(|(a, b)| (b - intercept - slope * a).powi(2)).sum::<f64>() / nf).sqrt();
    Some(LineFit { slope, intercept, rms })
}

/// Fits `log y` against `log x`; `None` if any `y` is not positive.
pub(crate) fn fit_log_log(x: &[f64], y: &[f64]) -> Option<LineFit> {
    if y.iter().any(|&v| !(v > 0.0)) {
        return None;
    }
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    fit_line(&lx, &ly)
}
