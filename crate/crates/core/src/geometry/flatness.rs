//! Sampled estimate of the Reifenberg flatness of a polygonal boundary.
//!
//! For a boundary point `x` and radius `r` the estimate is
//! `eps_hat = min_L d_H(bd ∩ B(x,r), L ∩ B(x,r)) / r` over lines `L`.
//! The boundary-to-line half of the Hausdorff distance is exact (distance to a
//! chord is convex along each clipped boundary segment, so it peaks at segment
//! endpoints); the line-to-boundary half samples the chord. Tolerance budget:
//! `eps_hat` is low by at most `chord_spacing / (2 r)` with
//! `chord_spacing = max(spacing, r / 200)`.

use std::f64::consts::PI;

use rayon::prelude::*;

use crate::point::{dist_to_segment, Point};
use crate::{Error, Result};

use super::{BoundaryIndex, Location, PolygonalDomain};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Line {
    pub point: Point,
    /// Unit direction.
    pub direction: Point,
}

impl Line {
    pub fn normal(&self) -> Point {
        self.direction.perp()
    }

    pub fn signed_distance(&self, p: Point) -> f64 {
        self.normal().dot(p - self.point)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SeparationMode {
    /// Check the two-sided separation only with the best line at `r0`.
    AtR0,
    /// Check it at every sampled scale with that scale's own line.
    AllScales,
}

#[derive(Clone, Debug)]
pub struct FlatnessOptions {
    pub separation: SeparationMode,
    /// Boundary sample spacing; defaults to `min(scales) / 20`.
    pub sample_spacing: Option<f64>,
    /// Side length of the probe grid used for the separation check.
    pub probe_grid: usize,
    /// Coarse cells that get a golden-section refinement.
    pub refine_candidates: usize,
}

impl Default for FlatnessOptions {
    fn default() -> Self {
        FlatnessOptions {
            separation: SeparationMode::AtR0,
            sample_spacing: None,
            probe_grid: 33,
            refine_candidates: 3,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct FlatnessSample {
    pub center: Point,
    pub radius: f64,
    pub eps_hat: f64,
    pub best_line: Line,
    pub separation_ok: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct FlatnessReport {
    pub samples: Vec<FlatnessSample>,
    pub eps_global: f64,
    pub r0_used: f64,
}

impl FlatnessReport {
    pub fn all_separated(&self) -> bool {
        self.samples.iter().all(|s| s.separation_ok)
    }

    /// Largest `eps_hat` among samples with the given radius.
    pub fn eps_at_scale(&self, radius: f64) -> f64 {
        self.samples
            .iter()
            .filter(|s| s.radius == radius)
            .map(|s| s.eps_hat)
            .fold(0.0, f64::max)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("center_x,center_y,radius,eps_hat,separation_ok\n");
        for s in &self.samples {
            out.push_str(&format!(
                "{},{},{},{},{}\n",
                s.center.x, s.center.y, s.radius, s.eps_hat, s.separation_ok
            ));
        }
        out
    }
}

pub fn estimate_flatness(
    domain: &PolygonalDomain,
    scales: &[f64],
    centers_per_scale: usize,
    angular_resolution: usize,
) -> Result<FlatnessReport> {
    estimate_flatness_with(domain, scales, centers_per_scale, angular_resolution, &FlatnessOptions::default())
}

pub fn estimate_flatness_with(
    domain: &PolygonalDomain,
    scales: &[f64],
    centers_per_scale: usize,
    angular_resolution: usize,
    opts: &FlatnessOptions,
) -> Result<FlatnessReport> {
    if scales.is_empty() || centers_per_scale == 0 {
        return Err(Error::invalid("need at least one scale and one center"));
    }
    if angular_resolution < 4 {
        return Err(Error::invalid("angular resolution must be at least 4"));
    }
    let r0 = domain.r0();
    if let Some(&bad) = scales.iter().find(|&&r| !(r > 0.0 && r <= r0 * (1.0 + 1e-12))) {
        return Err(Error::invalid(format!("scale {bad} outside (0, r0 = {r0}]")));
    }
    let r_min = scales.iter().copied().fold(f64::INFINITY, f64::min);
    let spacing = opts.sample_spacing.unwrap_or(r_min / 20.0);
    if !(spacing > 0.0) {
        return Err(Error::invalid("sample spacing must be positive"));
    }
    if r_min < 2.0 * spacing {
        return Err(Error::Resolution(format!(
            "scale {r_min} is smaller than twice the boundary sample spacing {spacing}"
        )));
    }

    let perimeter = domain.perimeter();
    let centers: Vec<Point> = (0..centers_per_scale)
        .map(|k| domain.point_at_arclength(perimeter * k as f64 / centers_per_scale as f64))
        .collect();
    let index = BoundaryIndex::new(domain);
    let search = LineSearch { angular_resolution, spacing, candidates: opts.refine_candidates.max(1) };

    let items: Vec<(usize, f64)> = centers
        .iter()
        .enumerate()
        .flat_map(|(k, _)| scales.iter().map(move |&r| (k, r)))
        .collect();
    let fits: Vec<(f64, Line)> = items
        .par_iter()
        .map(|&(k, r)| search.best_line(domain, centers[k], r))
        .collect();

    let separation: Vec<bool> = match opts.separation {
        SeparationMode::AtR0 => {
            let per_center: Vec<bool> = centers
                .par_iter()
                .map(|&c| {
                    let (eps, line) = search.best_line(domain, c, r0);
                    separated(&index, c, r0, &line, eps, opts.probe_grid)
                })
                .collect();
            items.iter().map(|&(k, _)| per_center[k]).collect()
        }
        SeparationMode::AllScales => items
            .par_iter()
            .zip(fits.par_iter())
            .map(|(&(k, r), (eps, line))| separated(&index, centers[k], r, line, *eps, opts.probe_grid))
            .collect(),
    };

    let samples: Vec<FlatnessSample> = items
        .iter()
        .zip(fits)
        .zip(separation)
        .map(|((&(k, r), (eps, line)), ok)| FlatnessSample {
            center: centers[k],
            radius: r,
            eps_hat: eps,
            best_line: line,
            separation_ok: ok,
        })
        .collect();
    let eps_global = samples.iter().map(|s| s.eps_hat).fold(0.0, f64::max);
    Ok(FlatnessReport { samples, eps_global, r0_used: r0 })
}

/// Flatness quotient at a single center and radius, with the minimising line.
pub fn local_flatness(
    domain: &PolygonalDomain,
    center: Point,
    radius: f64,
    angular_resolution: usize,
    spacing: f64,
) -> (f64, Line) {
    LineSearch { angular_resolution, spacing, candidates: 3 }.best_line(domain, center, radius)
}

struct LineSearch {
    angular_resolution: usize,
    spacing: f64,
    candidates: usize,
}

/// Boundary pieces inside one ball.
struct LocalBoundary {
    center: Point,
    radius: f64,
    segments: Vec<(Point, Point)>,
}

impl LocalBoundary {
    fn new(domain: &PolygonalDomain, center: Point, radius: f64) -> Self {
        let segments = domain
            .edges()
            .filter_map(|(a, b)| clip_to_ball(a, b, center, radius))
            .collect();
        LocalBoundary { center, radius, segments }
    }

    /// Symmetric Hausdorff distance to the chord of the line `(theta, offset)`;
    /// returns early with a lower bound once `bound` is exceeded.
    fn hausdorff(&self, theta: f64, offset: f64, chord_spacing: f64, bound: f64) -> f64 {
        let r = self.radius;
        if offset.abs() >= r {
            return 2.0 * r;
        }
        let (s, c) = theta.sin_cos();
        let dir = Point::new(c, s);
        let normal = dir.perp();
        let foot = self.center + normal * offset;
        let half = (r * r - offset * offset).sqrt();
        let p0 = foot - dir * half;
        let p1 = foot + dir * half;

        let mut d1: f64 = 0.0;
        for &(a, b) in &self.segments {
            d1 = d1.max(dist_to_segment(a, p0, p1)).max(dist_to_segment(b, p0, p1));
        }
        if d1 >= bound {
            return d1;
        }
        let n = ((2.0 * half / chord_spacing).ceil() as usize).max(1) + 1;
        let mut d2: f64 = 0.0;
        for i in 0..n {
            let q = p0.lerp(p1, i as f64 / (n - 1) as f64);
            let near = self
                .segments
                .iter()
                .map(|&(a, b)| dist_to_segment(q, a, b))
                .fold(f64::INFINITY, f64::min);
            d2 = d2.max(near);
            if d2 >= bound {
                break;
            }
        }
        d1.max(d2)
    }
}

impl LineSearch {
    fn best_line(&self, domain: &PolygonalDomain, center: Point, radius: f64) -> (f64, Line) {
        let local = LocalBoundary::new(domain, center, radius);
        let fine = self.spacing.max(radius / 200.0);
        let coarse = fine.max(radius / 12.0);
        let na = self.angular_resolution;
        let no = 2 * (self.angular_resolution / 2) + 1;
        let dtheta = PI / na as f64;
        let doff = 2.0 * radius / (no - 1) as f64;

        // Keep the `candidates` best coarse cells.
        let mut top: Vec<(f64, f64, f64)> = Vec::with_capacity(self.candidates + 1);
        for i in 0..na {
            let theta = dtheta * i as f64;
            for j in 0..no {
                let offset = -radius + doff * j as f64;
                let bound = if top.len() == self.candidates { top[top.len() - 1].0 } else { f64::INFINITY };
                let h = local.hausdorff(theta, offset, coarse, bound);
                if h < bound {
                    let pos = top.partition_point(|t| t.0 <= h);
                    top.insert(pos, (h, theta, offset));
                    top.truncate(self.candidates);
                }
            }
        }

        let mut best = (f64::INFINITY, 0.0, 0.0);
        for &(_, theta0, off0) in &top {
            let mut theta = theta0;
            let mut off = off0;
            let off_lo = (off0 - doff).max(-radius);
            let off_hi = (off0 + doff).min(radius);
            for _ in 0..3 {
                theta = golden_min(theta0 - dtheta, theta0 + dtheta, 28, |t| {
                    local.hausdorff(t, off, fine, f64::INFINITY)
                });
                off = golden_min(off_lo, off_hi, 28, |o| local.hausdorff(theta, o, fine, f64::INFINITY));
            }
            for (t, o) in [(theta, off), (theta0, off0)] {
                let h = local.hausdorff(t, o, fine, f64::INFINITY);
                if h < best.0 {
                    best = (h, t, o);
                }
            }
        }
        let (h, theta, off) = best;
        let dir = Point::new(theta.cos(), theta.sin());
        let line = Line { point: center + dir.perp() * off, direction: dir };
        (h / radius, line)
    }
}

fn golden_min(mut lo: f64, mut hi: f64, iters: usize, f: impl Fn(f64) -> f64) -> f64 {
    let g = (5f64.sqrt() - 1.0) / 2.0;
    let mut a = hi - g * (hi - lo);
    let mut b = lo + g * (hi - lo);
    let mut fa = f(a);
    let mut fb = f(b);
    for _ in 0..iters {
        if fa <= fb {
            hi = b;
            b = a;
            fb = fa;
            a = hi - g * (hi - lo);
            fa = f(a);
        } else {
            lo = a;
            a = b;
            fa = fb;
            b = lo + g * (hi - lo);
            fb = f(b);
        }
    }
    if fa <= fb {
        a
    } else {
        b
    }
}

/// Part of the segment `[a, b]` inside the closed ball, if any.
fn clip_to_ball(a: Point, b: Point, center: Point, r: f64) -> Option<(Point, Point)> {
    let d = b - a;
    let f = a - center;
    let qa = d.norm_sq();
    let qb = 2.0 * f.dot(d);
    let qc = f.norm_sq() - r * r;
    let disc = qb * qb - 4.0 * qa * qc;
    if disc < 0.0 || qa == 0.0 {
        return None;
    }
    let sq = disc.sqrt();
    let t0 = ((-qb - sq) / (2.0 * qa)).max(0.0);
    let t1 = ((-qb + sq) / (2.0 * qa)).min(1.0);
    if t0 > t1 {
        return None;
    }
    Some((a + d * t0, a + d * t1))
}

/// Two-sided separation in `B(center, r)` away from the band of half-width
/// `2 eps r` around `line`.
fn separated(index: &BoundaryIndex<'_>, center: Point, r: f64, line: &Line, eps: f64, grid: usize) -> bool {
    let grid = grid.max(3);
    let band = 2.0 * eps * r;
    let mut plus = (0usize, 0usize);
    let mut minus = (0usize, 0usize);
    for i in 0..grid {
        for j in 0..grid {
            let p = center
                + Point::new(
                    -r + 2.0 * r * i as f64 / (grid - 1) as f64,
                    -r + 2.0 * r * j as f64 / (grid - 1) as f64,
                );
            if p.dist(center) >= r {
                continue;
            }
            let s = line.signed_distance(p);
            let side = if s >= band {
                &mut plus
            } else if s <= -band {
                &mut minus
            } else {
                continue;
            };
            match index.locate(p) {
                Location::Inside => side.0 += 1,
                Location::Outside => side.1 += 1,
                Location::Boundary => {}
            }
        }
    }
    let all_in = |s: (usize, usize)| s.1 == 0;
    let all_out = |s: (usize, usize)| s.0 == 0;
    (all_in(plus) && all_out(minus)) || (all_out(plus) && all_in(minus))
}
