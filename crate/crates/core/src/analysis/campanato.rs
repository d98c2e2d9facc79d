use std::f64::consts::PI;

use rayon::prelude::*;
use serde::Serialize;

use crate::fem::ScalarField;
use crate::functional::Centered;
use crate::point::{dist_to_segment, Point};
use crate::{Error, Result};

/// One `(centre, radius)` entry of a sup-type quotient.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct BallQuotient {
    pub center: Point,
    pub radius: f64,
    /// `∫_{B} |u - ū|` with `u = 0` off the domain.
    pub oscillation: f64,
    pub quotient: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CampanatoValue {
    pub lambda: f64,
    pub value: f64,
    pub entries: Vec<BallQuotient>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PoincareValue {
    /// Supremum over evaluated balls, `0` when every ball was skipped.
    pub value: f64,
    pub entries: Vec<BallQuotient>,
    /// Balls with zero gradient energy (`0/0`).
    pub skipped: usize,
}

/// `∫_{B(x, r)} |u - ū|` and `∫_{B(x, r)} |∇u|^2`, `u` extended by zero.
///
/// Balls that stay inside the domain are normalised by their clipped area, so
/// the small area defect of chord clipping does not show up as oscillation.
fn ball_moments(ctx: &Centered<'_>, r: f64, boundary_distance: f64) -> (f64, f64) {
    let inside = ctx.ball.area(r);
    if inside <= 0.0 {
        return (0.0, 0.0);
    }
    let full = if boundary_distance >= r { inside } else { PI * r * r };
    let mean = ctx.ball.integrate(r, &|t, p| ctx.u_in(t, p), None) / full;
    let osc = ctx.ball.integrate(r, &|t, p| (ctx.u_in(t, p) - mean).abs(), None) + mean.abs() * (full - inside).max(0.0);
    (osc, ctx.energy_value(r))
}

fn sweep(u: &ScalarField, centers: &[Point], radii: &[f64]) -> Result<Vec<(Point, f64, f64, f64)>> {
    if radii.iter().any(|&r| !(r > 0.0 && r.is_finite())) {
        return Err(Error::invalid("radii must be positive"));
    }
    let rows: Vec<Vec<(Point, f64, f64, f64)>> = centers
        .par_iter()
        .map(|&c| {
            let ctx = Centered::new(u, c, 2);
            let outline = u.mesh().outline();
            let d = (0..outline.len())
                .map(|i| dist_to_segment(c, outline[i], outline[(i + 1) % outline.len()]))
                .fold(f64::INFINITY, f64::min);
            radii
                .iter()
                .map(|&r| {
                    let (osc, energy) = ball_moments(&ctx, r, d);
                    (c, r, osc, energy)
                })
                .collect()
        })
        .collect();
    Ok(rows.into_iter().flatten().collect())
}

fn supremum(entries: &[BallQuotient]) -> f64 {
    entries.iter().map(|e| e.quotient).fold(0.0, f64::max)
}

/// `sup r^{-λ} ∫_{B(x, r)} |u - ū|` over the given balls (Campanato
/// seminorm with exponent `p = 1`, `λ ∈ (N, N + 1]`).
pub fn campanato_seminorm(u: &ScalarField, lambda: f64, centers: &[Point], radii: &[f64]) -> Result<CampanatoValue> {
    if !(lambda > 2.0 && lambda <= 3.0) {
        return Err(Error::invalid(format!("lambda = {lambda} outside (N, N + 1] = (2, 3]")));
    }
    let entries: Vec<BallQuotient> = sweep(u, centers, radii)?
        .into_iter()
        .map(|(center, radius, oscillation, _)| BallQuotient {
            center,
            radius,
            oscillation,
            quotient: oscillation / radius.powf(lambda),
        })
        .collect();
    Ok(CampanatoValue { lambda, value: supremum(&entries), entries })
}

/// `sup ∫_B |u - ū| / (r^{1+N/2} ‖∇u‖_{L^2(B)})`; balls without gradient are skipped.
pub fn poincare_ratio(u: &ScalarField, centers: &[Point], radii: &[f64]) -> Result<PoincareValue> {
    let rows = sweep(u, centers, radii)?;
    let mut skipped = 0;
    let mut entries = Vec::with_capacity(rows.len());
    for (center, radius, oscillation, energy) in rows {
        if energy <= 0.0 {
            skipped += 1;
            continue;
        }
        let quotient = oscillation / (radius * radius * energy.sqrt());
        entries.push(BallQuotient { center, radius, oscillation, quotient });
    }
    Ok(PoincareValue { value: supremum(&entries), entries, skipped })
}
