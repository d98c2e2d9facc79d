use std::f64::consts::PI;

use serde::Serialize;

use crate::fem::{ScalarField, SourceTerm};
use crate::point::{dist_to_segment, Point};
use crate::{Error, Result};

use super::{radial_weight, Centered};

/// Sample points on the circle `∂B(x0, r)`.
pub const ARC_SAMPLES: usize = 720;
/// Fewer samples than this inside `Ω` means the arc is not resolved.
pub const MIN_ARC_INSIDE: usize = 32;

/// The two sides of the integration-by-parts inequality
/// `∫ |∇u|^2 w ≤ r^{2-N} ∫_{S_r} u ∂_ν u + (N-2)/2 r^{1-N} ∫_{S_r} u^2 + ∫ u f w`,
/// with `w = |x - x0|^{2-N}` and `S_r = ∂B(x0, r) ∩ Ω`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct IppResidual {
    pub lhs: f64,
    pub flux_term: f64,
    pub trace_term: f64,
    pub source_term: f64,
    pub rhs: f64,
    /// `rhs - lhs`; the inequality says this is non-negative.
    pub residual: f64,
    pub arc_inside: usize,
}

pub fn ipp_residual(u: &ScalarField, f: &SourceTerm, x0: Point, r: f64) -> Result<IppResidual> {
    ipp_residual_n(u, f, x0, r, 2)
}

pub fn ipp_residual_n(u: &ScalarField, f: &SourceTerm, x0: Point, r: f64, n: u32) -> Result<IppResidual> {
    let mesh = u.mesh();
    let outline = mesh.outline();
    let off = (0..outline.len())
        .map(|i| dist_to_segment(x0, outline[i], outline[(i + 1) % outline.len()]))
        .fold(f64::INFINITY, f64::min);
    if off > 1e-9 * mesh.h().max(1.0) {
        return Err(Error::invalid(format!("centre is {off:.3e} away from the boundary")));
    }
    if !(r > 2.0 * mesh.h() && r < mesh.r0()) {
        return Err(Error::invalid(format!("radius {r} outside (2h, r0) = ({}, {})", 2.0 * mesh.h(), mesh.r0())));
    }
    let ctx = Centered::new(u, x0, n);

    let locator = mesh.locator();
    let dtheta = 2.0 * PI / ARC_SAMPLES as f64;
    let (mut flux, mut trace, mut inside) = (0.0, 0.0, 0);
    for k in 0..ARC_SAMPLES {
        let nu = Point::from_polar(1.0, (k as f64 + 0.5) * dtheta);
        let p = x0 + nu * r;
        // Outside the mesh `u` is extended by zero.
        if let Some((t, _)) = locator.locate(mesh, p) {
            let v = ctx.u_in(t, p);
            flux += v * ctx.grads[t].dot(nu);
            trace += v * v;
            inside += 1;
        }
    }
    if inside < MIN_ARC_INSIDE {
        return Err(Error::UnderResolved(format!("only {inside} of {ARC_SAMPLES} arc samples lie in the domain")));
    }
    let ds = r * dtheta;
    let nf = n as f64;
    let flux_term = radial_weight(n, r) * flux * ds;
    let trace_term = 0.5 * (nf - 2.0) * r.powf(1.0 - nf) * trace * ds;
    let source_term = if f.is_zero() { 0.0 } else { ctx.source_integral(f, r, |u, f| u * f) };
    let lhs = ctx.energy_value(r);
    let rhs = flux_term + trace_term + source_term;
    Ok(IppResidual { lhs, flux_term, trace_term, source_term, rhs, residual: rhs - lhs, arc_inside: inside })
}
