use std::fmt::Write as _;

use rayon::prelude::*;
use serde::Serialize;

use crate::fem::{ScalarField, SourceTerm};
use crate::point::Point;
use crate::{Error, Result};

use super::Centered;

/// Floor under `max(F(r_k), ·)` when scaling the monotonicity slack.
pub const MONOTONE_FLOOR: f64 = 1e-14;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TraceRecord {
    pub r: f64,
    pub weighted_energy: f64,
    /// `ψ(r)` itself, kept for the Gronwall check.
    pub psi: f64,
    /// `β ∫_{s_min}^r ψ(s) / s^{1+β} ds`.
    pub psi_term: f64,
    /// `weighted_energy / r^β + psi_term`.
    pub f: f64,
    pub under_resolved: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MonotonicityTrace {
    pub center: Point,
    pub beta: f64,
    pub dimension: u32,
    /// Lower end of the computed `ψ` integral.
    pub s_min: f64,
    /// Bound on `β ∫_0^{s_min} ψ / s^{1+β}` from the decay `ψ(s) ≤ C s^{(2p0-N)/p0}`.
    /// It is the same for every radius, so it is left out of `F`.
    pub psi_tail: f64,
    pub records: Vec<TraceRecord>,
}

impl MonotonicityTrace {
    pub fn radii(&self) -> Vec<f64> {
        self.records.iter().map(|r| r.r).collect()
    }

    pub fn f_values(&self) -> Vec<f64> {
        self.records.iter().map(|r| r.f).collect()
    }

    /// CSV with header `r,weighted_energy,psi_term,F`.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("r,weighted_energy,psi_term,F\n");
        for r in &self.records {
            let _ = writeln!(s, "{},{},{},{}", r.r, r.weighted_energy, r.psi_term, r.f);
        }
        s
    }
}

#[derive(Clone, Debug)]
pub struct AcfOptions {
    pub dimension: u32,
    /// Midpoint cells of the log-spaced `ψ` grid, spread over `[s_min, r_max]`.
    pub psi_points: usize,
    /// Integrability of `u f`, used only for the tail bound.
    pub p0: f64,
}

impl Default for AcfOptions {
    fn default() -> Self {
        AcfOptions { dimension: 2, psi_points: 64, p0: f64::INFINITY }
    }
}

pub fn acf_trace(u: &ScalarField, f: &SourceTerm, x0: Point, beta: f64, radii: &[f64]) -> Result<MonotonicityTrace> {
    acf_trace_with(u, f, x0, beta, radii, &AcfOptions::default())
}

/// Evaluates `F(r) = r^{-β} ∫_{Ω_r} |∇u|^2 |x-x0|^{2-N} + β ∫ ψ(s) / s^{1+β} ds`.
pub fn acf_trace_with(
    u: &ScalarField,
    f: &SourceTerm,
    x0: Point,
    beta: f64,
    radii: &[f64],
    opts: &AcfOptions,
) -> Result<MonotonicityTrace> {
    if !(beta > 0.0 && beta < 2.0) {
        return Err(Error::invalid(format!("beta = {beta} must lie in (0, 2)")));
    }
    let r0 = u.mesh().r0();
    if radii.is_empty() || radii.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::invalid("radii must be non-empty and strictly increasing"));
    }
    if radii[0] <= 0.0 || radii[radii.len() - 1] > r0 {
        return Err(Error::invalid(format!("radii must lie in (0, r0 = {r0}]")));
    }
    if opts.psi_points < 2 {
        return Err(Error::invalid("psi grid needs at least 2 points"));
    }
    let ctx = Centered::new(u, x0, opts.dimension);

    // Log-spaced midpoint grid, broken at every requested radius.
    let s_min = radii[0] / 4.0;
    let total = (radii[radii.len() - 1] / s_min).ln();
    let mut cells: Vec<(usize, f64, f64)> = Vec::new(); // (segment, midpoint, d ln s)
    let mut lo = s_min;
    for (k, &hi) in radii.iter().enumerate() {
        let span = (hi / lo).ln();
        let m = ((opts.psi_points as f64 * span / total).ceil() as usize).max(2);
        let d = span / m as f64;
        for j in 0..m {
            cells.push((k, lo * ((j as f64 + 0.5) * d).exp(), d));
        }
        lo = hi;
    }
    let zero = f.is_zero();
    let psi_mid: Vec<f64> =
        cells.par_iter().map(|&(_, s, _)| if zero { 0.0 } else { ctx.psi_value(f, s) }).collect();
    let mut segment = vec![0.0; radii.len()];
    for (&(k, s, d), &p) in cells.iter().zip(&psi_mid) {
        segment[k] += p * s.powf(-beta) * d;
    }

    let energies: Vec<(f64, f64, bool)> = radii
        .par_iter()
        .map(|&r| (ctx.energy_value(r), if zero { 0.0 } else { ctx.psi_value(f, r) }, ctx.under_resolved(r)))
        .collect();

    let mut acc = 0.0;
    let mut records = Vec::with_capacity(radii.len());
    for (k, &r) in radii.iter().enumerate() {
        acc += segment[k];
        let (e, p, under) = energies[k];
        let psi_term = beta * acc;
        records.push(TraceRecord { r, weighted_energy: e, psi: p, psi_term, f: e / r.powf(beta) + psi_term, under_resolved: under });
    }

    let n = opts.dimension as f64;
    let gamma = if opts.p0.is_infinite() { 2.0 } else { (2.0 * opts.p0 - n) / opts.p0 };
    let psi_tail = if zero {
        0.0
    } else if gamma > beta {
        beta * ctx.psi_value(f, s_min) * s_min.powf(-beta) / (gamma - beta)
    } else {
        f64::INFINITY
    };
    Ok(MonotonicityTrace { center: x0, beta, dimension: opts.dimension, s_min, psi_tail, records })
}

/// Pairs `(k, k+1)` with `F(r_{k+1}) < F(r_k) - slack · max(F(r_k), 1e-14)`.
pub fn check_monotone(trace: &MonotonicityTrace, slack: f64) -> Result<Vec<(usize, usize)>> {
    check_monotone_values(&trace.f_values(), slack)
}

pub fn check_monotone_values(f: &[f64], slack: f64) -> Result<Vec<(usize, usize)>> {
    if !(slack >= 0.0) {
        return Err(Error::invalid("slack must be non-negative"));
    }
    Ok((0..f.len().saturating_sub(1))
        .filter(|&k| f[k + 1] < f[k] - slack * f[k].max(MONOTONE_FLOOR))
        .map(|k| (k, k + 1))
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::PolygonalDomain;
    use crate::mesh::triangulate;
    use std::sync::Arc;

    #[test]
    fn synthetic_traces() {
        let up: Vec<f64> = (1..10).map(|k| k as f64).collect();
        assert!(check_monotone_values(&up, 0.0).unwrap().is_empty());
        let mut dip = up.clone();
        dip[3] *= 0.9 * up[2] / up[3];
        assert_eq!(check_monotone_values(&dip, 0.05).unwrap(), vec![(2, 3)]);
        assert!(check_monotone_values(&up, -1.0).is_err());
    }

    #[test]
    fn zero_data_gives_zero_trace() {
        let d = PolygonalDomain::unit_square();
        let u = ScalarField::zeros(Arc::new(triangulate(&d, 0.05).unwrap()));
        let t = acf_trace(&u, &SourceTerm::zero(), Point::new(0.5, 0.0), 1.0, &[0.1, 0.2, 0.4]).unwrap();
        assert!(t.f_values().iter().all(|&f| f == 0.0));
        assert_eq!(t.psi_tail, 0.0);
        assert!(t.to_csv().starts_with("r,weighted_energy,psi_term,F\n"));
    }

    #[test]
    fn rejects_bad_arguments() {
        let d = PolygonalDomain::unit_square();
        let u = ScalarField::zeros(Arc::new(triangulate(&d, 0.1).unwrap()));
        let x = Point::new(0.5, 0.0);
        let f = SourceTerm::zero();
        assert!(acf_trace(&u, &f, x, 2.0, &[0.1, 0.2]).is_err());
        assert!(acf_trace(&u, &f, x, 1.0, &[0.2, 0.1]).is_err());
        assert!(acf_trace(&u, &f, x, 1.0, &[0.1, 0.6]).is_err());
    }
}
