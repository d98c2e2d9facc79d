use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::fem::ScalarField;
use crate::point::Point;
use crate::rng::{stream_rng, streams};
use crate::{Error, Result};

use super::fit_log_log;

pub const MIN_PAIR_BUDGET: usize = 1000;
/// Fewer separation bins than this cannot support a slope.
const MIN_BINS: usize = 3;
/// Smallest separation bin starts at this multiple of the mesh size at the centre.
const BIN_FLOOR_H: f64 = 2.0;

/// Ball `B(center, radius)`; the fit uses its intersection with the mesh.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RegionSpec {
    pub center: Point,
    pub radius: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct HolderBin {
    pub s_lo: f64,
    pub s_hi: f64,
    /// `max |u(x) - u(y)|` over sampled pairs with `|x - y| ∈ [s_lo, s_hi)`.
    pub oscillation: f64,
    pub pairs: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct HolderFit {
    /// Slope of log oscillation against log separation; `None` if degenerate.
    pub alpha_hat: Option<f64>,
    /// `max |u(x) - u(y)| / |x - y|^alpha_hat` over sampled pairs.
    pub c_hat: Option<f64>,
    pub rms: Option<f64>,
    pub bins: Vec<HolderBin>,
}

impl HolderFit {
    pub fn is_degenerate(&self) -> bool {
        self.alpha_hat.is_none()
    }
}

/// Binned oscillation fit of the Hölder exponent of `u` in `region`.
///
/// Separations are split into dyadic bins `[R 2^{-k-1}, R 2^{-k})` down to
/// twice the mesh size at the centre. Each draw picks a vertex `x` (half of the
/// time from the vertices closest to the centre, at a distance scaled to the
/// bin, otherwise uniformly in the region), moves a random distance in the bin
/// and snaps to the nearest vertex `y` of the triangle reached.
pub fn holder_exponent_fit(u: &ScalarField, region: RegionSpec, pair_budget: usize, seed: u64) -> Result<HolderFit> {
    if pair_budget < MIN_PAIR_BUDGET {
        return Err(Error::invalid(format!("pair budget {pair_budget} below {MIN_PAIR_BUDGET}")));
    }
    if !(region.radius > 0.0) {
        return Err(Error::invalid("region radius must be positive"));
    }
    let mesh = u.mesh();
    let pts = mesh.points();
    let vals = u.values();
    let c = region.center;
    // Region vertices by distance to the centre (ties by index).
    let mut near: Vec<(f64, usize)> =
        pts.iter().enumerate().map(|(i, p)| (p.dist(c), i)).filter(|&(d, _)| d <= region.radius).collect();
    if near.is_empty() {
        return Err(Error::invalid("region does not meet the domain"));
    }
    near.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));

    let h_c = mesh.local_h(c, near[0].0 * (1.0 + 1e-9) + 1e-15);
    let mut bins = Vec::new();
    let mut s_hi = region.radius;
    while 0.5 * s_hi >= BIN_FLOOR_H * h_c {
        bins.push(HolderBin { s_lo: 0.5 * s_hi, s_hi, oscillation: 0.0, pairs: 0 });
        s_hi *= 0.5;
    }
    if bins.len() < MIN_BINS {
        return Err(Error::UnderResolved(format!(
            "region radius {} gives only {} separation bins above {BIN_FLOOR_H}h = {}",
            region.radius,
            bins.len(),
            BIN_FLOOR_H * h_c
        )));
    }

    let mut rng = stream_rng(seed, streams::HOLDER_PAIRS);
    let locator = mesh.locator();
    let per_bin = pair_budget / bins.len();
    let mut pairs: Vec<(f64, f64)> = Vec::with_capacity(pair_budget);
    for k in 0..bins.len() {
        let s_lo = bins[k].s_lo;
        let core = near.partition_point(|e| e.0 <= (s_lo / 8.0).max(near[0].0)).max(1);
        for _ in 0..per_bin {
            let xi = if rng.gen_bool(0.5) { near[rng.gen_range(0..core)].1 } else { near[rng.gen_range(0..near.len())].1 };
            let s = s_lo * 2f64.powf(rng.gen::<f64>());
            let dir = Point::from_polar(1.0, rng.gen_range(0.0..std::f64::consts::TAU));
            let target = pts[xi] + dir * s;
            if target.dist(c) > region.radius {
                continue;
            }
            let Some((t, l)) = locator.locate(mesh, target) else { continue };
            let tri = mesh.triangles()[t];
            let j = (0..3).max_by(|&a, &b| l[a].total_cmp(&l[b])).unwrap();
            let yi = tri[j];
            let sep = pts[xi].dist(pts[yi]);
            if yi == xi || pts[yi].dist(c) > region.radius {
                continue;
            }
            let du = (vals[xi] - vals[yi]).abs();
            pairs.push((sep, du));
            // File under the bin that actually contains the separation.
            let kb = (region.radius / sep).log2().floor();
            if kb >= 0.0 && (kb as usize) < bins.len() {
                let b = &mut bins[kb as usize];
                b.oscillation = b.oscillation.max(du);
                b.pairs += 1;
            }
        }
    }

    let used: Vec<&HolderBin> = bins.iter().filter(|b| b.pairs > 0).collect();
    let scale = vals.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let degenerate = used.len() < 2 || used.iter().all(|b| b.oscillation <= 1e-12 * scale.max(1e-300));
    let fit = if degenerate {
        None
    } else {
        let s: Vec<f64> = used.iter().map(|b| b.s_hi).collect();
        let o: Vec<f64> = used.iter().map(|b| b.oscillation).collect();
        fit_log_log(&s, &o)
    };
    let alpha_hat = fit.map(|f| f.slope);
    let c_hat = alpha_hat.map(|a| pairs.iter().map(|&(s, du)| du / s.powf(a)).fold(0.0, f64::max));
    Ok(HolderFit { alpha_hat, c_hat, rms: fit.map(|f| f.rms), bins })
}
