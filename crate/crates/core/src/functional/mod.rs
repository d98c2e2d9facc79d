//! Integral quantities centred at a point `x0`: the weighted energy, `ψ`, the
//! monotone functional, the integration-by-parts residual and a Gronwall check.
//!
//! Balls are clipped to the mesh, so every integral is over `Ω ∩ B(x0, r)`.
//! The weight `|x - x0|^{2-N}` keeps `N` explicit even though meshes are planar.

mod ball;
mod gronwall;
mod ipp;
mod trace;

use serde::Serialize;

use crate::fem::{ScalarField, SourceTerm};
use crate::point::Point;
use crate::{Error, Result};

pub use ball::{BallIntegrator, CLIP_DEPTH};
pub use gronwall::{gronwall_check, GronwallVerdict, GRONWALL_SLACK};
pub use ipp::{ipp_residual, ipp_residual_n, IppResidual, ARC_SAMPLES, MIN_ARC_INSIDE};
pub use trace::{
    acf_trace, acf_trace_with, check_monotone, check_monotone_values, AcfOptions, MonotonicityTrace, TraceRecord,
    MONOTONE_FLOOR,
};

/// `|x - x0|^{2-N}`; identically one in the plane.
pub fn radial_weight(n: u32, d: f64) -> f64 {
    if n == 2 {
        1.0
    } else {
        d.powi(2 - n as i32)
    }
}

/// A ball integral together with its resolution flag.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct BallValue {
    pub value: f64,
    /// `r < 2 h` near the centre.
    pub under_resolved: bool,
}

/// `∫_{Ω ∩ B(x0, r)} |∇u|^2 |x - x0|^{2-N}` with `N = 2`.
pub fn weighted_energy(u: &ScalarField, x0: Point, r: f64) -> Result<BallValue> {
    weighted_energy_n(u, x0, r, 2)
}

pub fn weighted_energy_n(u: &ScalarField, x0: Point, r: f64, n: u32) -> Result<BallValue> {
    check_radius(r)?;
    Ok(Centered::new(u, x0, n).energy(r))
}

/// `ψ(r) = ∫_{Ω ∩ B(x0, r)} |u f| |x - x0|^{2-N}` with `N = 2`.
pub fn psi(u: &ScalarField, f: &SourceTerm, x0: Point, r: f64) -> Result<BallValue> {
    psi_n(u, f, x0, r, 2)
}

pub fn psi_n(u: &ScalarField, f: &SourceTerm, x0: Point, r: f64, n: u32) -> Result<BallValue> {
    check_radius(r)?;
    Ok(Centered::new(u, x0, n).psi(f, r))
}

fn check_radius(r: f64) -> Result<()> {
    if !(r > 0.0 && r.is_finite()) {
        return Err(Error::invalid(format!("radius {r} must be positive")));
    }
    Ok(())
}

/// Per-centre cache shared by the functionals: sorted triangles and gradients.
pub(crate) struct Centered<'a> {
    pub(crate) field: &'a ScalarField,
    pub(crate) ball: BallIntegrator<'a>,
    pub(crate) grads: Vec<Point>,
    pub(crate) n: u32,
}

impl<'a> Centered<'a> {
    pub(crate) fn new(field: &'a ScalarField, x0: Point, n: u32) -> Self {
        Centered { field, ball: BallIntegrator::new(field.mesh(), x0), grads: field.gradient_field(), n }
    }

    pub(crate) fn x0(&self) -> Point {
        self.ball.center()
    }

    /// `u` at `p`, using the linear piece of triangle `t`.
    pub(crate) fn u_in(&self, t: usize, p: Point) -> f64 {
        let a = self.field.mesh().triangles()[t][0];
        self.field.values()[a] + self.grads[t].dot(p - self.field.mesh().points()[a])
    }

    fn weight(&self, p: Point) -> f64 {
        radial_weight(self.n, p.dist(self.x0()))
    }

    /// Singular point of the weight, if any.
    fn weight_singularity(&self) -> Option<Point> {
        (self.n > 2).then(|| self.x0())
    }

    pub(crate) fn under_resolved(&self, r: f64) -> bool {
        r < 2.0 * self.field.mesh().local_h(self.x0(), r)
    }

    pub(crate) fn energy_value(&self, r: f64) -> f64 {
        self.ball.integrate(r, &|t, p| self.grads[t].norm_sq() * self.weight(p), self.weight_singularity())
    }

    pub(crate) fn energy(&self, r: f64) -> BallValue {
        BallValue { value: self.energy_value(r), under_resolved: self.under_resolved(r) }
    }

    /// `∫ g(u, f) |x - x0|^{2-N}` over the ball.
    pub(crate) fn source_integral(&self, f: &SourceTerm, r: f64, g: impl Fn(f64, f64) -> f64 + Sync) -> f64 {
        let singular = f.singularity().or_else(|| self.weight_singularity());
        self.ball.integrate(r, &|t, p| g(self.u_in(t, p), f.eval(p)) * self.weight(p), singular)
    }

    pub(crate) fn psi_value(&self, f: &SourceTerm, r: f64) -> f64 {
        if f.is_zero() {
            return 0.0;
        }
        self.source_integral(f, r, |u, f| (u * f).abs())
    }

    pub(crate) fn psi(&self, f: &SourceTerm, r: f64) -> BallValue {
        BallValue { value: self.psi_value(f, r), under_resolved: self.under_resolved(r) }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fem::solve_poisson;
    use crate::geometry::PolygonalDomain;
    use crate::mesh::triangulate;
    use std::f64::consts::PI;
    use std::sync::Arc;

    fn disk_solution(h: f64) -> ScalarField {
        let d = PolygonalDomain::disk(1.0, 256, 0.5).unwrap();
        let m = Arc::new(triangulate(&d, h).unwrap());
        solve_poisson(m, &SourceTerm::constant(1.0), 1e-10).unwrap().field
    }

    #[test]
    fn zero_field_has_zero_functionals() {
        let m = Arc::new(triangulate(&PolygonalDomain::unit_square(), 0.1).unwrap());
        let u = ScalarField::zeros(m);
        let c = Point::new(0.5, 0.5);
        assert_eq!(weighted_energy(&u, c, 0.3).unwrap().value, 0.0);
        assert_eq!(psi(&u, &SourceTerm::constant(1.0), c, 0.3).unwrap().value, 0.0);
        assert!(weighted_energy(&u, c, 0.0).is_err());
    }

    #[test]
    fn disk_energy_and_psi() {
        let u = disk_solution(0.02);
        let e = weighted_energy(&u, Point::ORIGIN, 0.5).unwrap();
        assert!(!e.under_resolved);
        assert!((e.value / (PI * 0.5f64.powi(4) / 8.0) - 1.0).abs() < 0.02);
        let one = SourceTerm::constant(1.0);
        for r in [0.25, 0.5, 0.75] {
            let exact = PI * r * r * (2.0 - r * r) / 8.0;
            assert!((psi(&u, &one, Point::ORIGIN, r).unwrap().value / exact - 1.0).abs() < 0.02, "r = {r}");
        }
    }

    #[test]
    fn under_resolution_is_flagged() {
        let u = disk_solution(0.04);
        assert!(weighted_energy(&u, Point::ORIGIN, 0.05).unwrap().under_resolved);
    }
}
