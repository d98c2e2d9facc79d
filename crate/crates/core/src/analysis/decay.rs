use rayon::prelude::*;
use serde::Serialize;

use crate::fem::{ScalarField, SourceTerm};
use crate::functional::Centered;
use crate::point::Point;
use crate::{Error, Result};

use super::fit_log_log;

/// Allowed shortfall of the fitted `ψ` slope below `(2p0 - N)/p0`.
pub const PSI_SLOPE_SLACK: f64 = 0.1;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DecayFit {
    pub center: Point,
    pub radii: Vec<f64>,
    pub energies: Vec<f64>,
    /// `None` when some energy vanishes ("degenerate").
    pub slope: Option<f64>,
    pub intercept: Option<f64>,
    pub rms: Option<f64>,
    /// Some radius is below `4h` near the centre.
    pub under_resolved: bool,
}

impl DecayFit {
    pub fn is_degenerate(&self) -> bool {
        self.slope.is_none()
    }
}

fn check_radii(radii: &[f64]) -> Result<()> {
    if radii.len() < 4 {
        return Err(Error::invalid(format!("decay fits need at least 4 radii, got {}", radii.len())));
    }
    if radii.iter().any(|&r| !(r > 0.0 && r.is_finite())) {
        return Err(Error::invalid("radii must be positive"));
    }
    Ok(())
}

/// Slope of `log ∫_{Ω ∩ B(x0, r)} |∇u|^2` against `log r`.
pub fn energy_decay_fit(u: &ScalarField, x0: Point, radii: &[f64]) -> Result<DecayFit> {
    check_radii(radii)?;
    let ctx = Centered::new(u, x0, 2);
    let energies: Vec<f64> = radii.par_iter().map(|&r| ctx.energy_value(r)).collect();
    let h_near = u.mesh().local_h(x0, radii.iter().copied().fold(0.0, f64::min).max(0.0));
    let under_resolved = radii.iter().any(|&r| r < 4.0 * h_near);
    let fit = fit_log_log(radii, &energies);
    Ok(DecayFit {
        center: x0,
        radii: radii.to_vec(),
        energies,
        slope: fit.map(|f| f.slope),
        intercept: fit.map(|f| f.intercept),
        rms: fit.map(|f| f.rms),
        under_resolved,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PsiDecayFit {
    pub radii: Vec<f64>,
    pub psi: Vec<f64>,
    pub slope: Option<f64>,
    /// `(2 p0 - N) / p0`.
    pub bound_slope: f64,
    /// `slope ≥ bound_slope - 0.1`; false when degenerate.
    pub passes: bool,
}

/// Slope of `log ψ(r)` against `log r`, compared with the decay rate of `ψ`
/// for `u f ∈ L^{p0}`.
pub fn psi_decay_fit(u: &ScalarField, f: &SourceTerm, x0: Point, p0: f64, radii: &[f64]) -> Result<PsiDecayFit> {
    let n = 2.0;
    if !(p0 > 0.5 * n) {
        return Err(Error::invalid(format!("p0 = {p0} must exceed N/2")));
    }
    check_radii(radii)?;
    let ctx = Centered::new(u, x0, 2);
    let psi: Vec<f64> = radii.par_iter().map(|&r| ctx.psi_value(f, r)).collect();
    let bound_slope = if p0.is_infinite() { 2.0 } else { (2.0 * p0 - n) / p0 };
    let slope = fit_log_log(radii, &psi).map(|l| l.slope);
    let passes = slope.is_some_and(|s| s >= bound_slope - PSI_SLOPE_SLACK);
    Ok(PsiDecayFit { radii: radii.to_vec(), psi, slope, bound_slope, passes })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fem::solve_poisson;
    use crate::geometry::PolygonalDomain;
    use crate::mesh::triangulate;
    use std::sync::Arc;

    fn dyadic(hi: f64, k: usize) -> Vec<f64> {
        (0..k).rev().map(|i| hi / 2f64.powi(i as i32)).collect()
    }

    #[test]
    fn interior_disk_slope_is_four() {
        let d = PolygonalDomain::disk(1.0, 256, 0.5).unwrap();
        let m = Arc::new(triangulate(&d, 0.02).unwrap());
        let u = solve_poisson(m, &SourceTerm::constant(1.0), 1e-10).unwrap().field;
        let fit = energy_decay_fit(&u, Point::ORIGIN, &dyadic(0.4, 4)).unwrap();
        assert!((fit.slope.unwrap() - 4.0).abs() < 0.1, "{fit:?}");
    }

    #[test]
    fn zero_field_is_degenerate() {
        let m = Arc::new(triangulate(&PolygonalDomain::unit_square(), 0.05).unwrap());
        let u = ScalarField::zeros(m);
        let fit = energy_decay_fit(&u, Point::new(0.5, 0.5), &dyadic(0.4, 4)).unwrap();
        assert!(fit.is_degenerate());
        let p = psi_decay_fit(&u, &SourceTerm::zero(), Point::new(0.5, 0.5), 4.0, &dyadic(0.4, 4)).unwrap();
        assert!(p.slope.is_none() && !p.passes);
        assert!(energy_decay_fit(&u, Point::new(0.5, 0.5), &[0.1, 0.2]).is_err());
    }

    #[test]
    fn singular_weight_slope() {
        // u ≡ 1, f = |x - c|^{-1/2}: ψ(r) = (4π/3) r^{3/2}.
        let m = Arc::new(triangulate(&PolygonalDomain::unit_square().with_r0(1.0).unwrap(), 0.02).unwrap());
        let c = Point::new(0.5, 0.5);
        let u = ScalarField::interpolate(m, |_| 1.0).unwrap();
        let f = SourceTerm::radial_power(c, 0.5).unwrap();
        let p = psi_decay_fit(&u, &f, c, 3.5, &dyadic(0.4, 5)).unwrap();
        assert!((p.slope.unwrap() - 1.5).abs() < 0.01, "{p:?}");
        assert!(p.passes);
        assert!(psi_decay_fit(&u, &f, c, 1.0, &dyadic(0.4, 5)).is_err());
    }
}
