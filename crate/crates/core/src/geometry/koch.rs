use std::f64::consts::PI;

use rand::Rng;

use crate::point::Point;
use crate::rng::{stream_rng, streams};
use crate::{Error, Result};

use super::PolygonalDomain;

/// Largest admissible bump amplitude.
pub const MAX_BUMP: f64 = 0.3;

/// Koch-type refinement of every boundary edge.
///
/// Each edge `[a, b]` of length `L` is replaced by four edges through the
/// quarter points, displaced along the outward normal by
/// `bump * L * sin(pi * k / 4)`, `k = 1, 2, 3`, so the peak excursion is
/// `bump * L`. With `seed = Some(s)` every edge flips its bump inward or
/// outward according to a ChaCha stream seeded by `s`; with `None` all bumps
/// point outward.
pub fn generate_flat_fractal(
    base: &PolygonalDomain,
    bump: f64,
    depth: u32,
    seed: Option<u64>,
) -> Result<PolygonalDomain> {
    if !(0.0..=MAX_BUMP).contains(&bump) {
        return Err(Error::invalid(format!("bump amplitude {bump} outside [0, {MAX_BUMP}]")));
    }
    let mut rng = seed.map(|s| stream_rng(s, streams::KOCH_SIGNS));
    let offsets: [f64; 3] = [(PI / 4.0).sin(), 1.0, (PI / 4.0).sin()];

    let mut verts = base.vertices().to_vec();
    for _ in 0..depth {
        let n = verts.len();
        let mut next = Vec::with_capacity(4 * n);
        for i in 0..n {
            let a = verts[i];
            let b = verts[(i + 1) % n];
            let d = b - a;
            let len = d.norm();
            // Outward normal of a counter-clockwise polygon.
            let out = Point::new(d.y, -d.x) * (1.0 / len);
            let sign = match rng.as_mut() {
                Some(r) => {
                    if r.gen::<bool>() {
                        1.0
                    } else {
                        -1.0
                    }
                }
                None => 1.0,
            };
            next.push(a);
            for (k, w) in offsets.iter().enumerate() {
                let t = (k + 1) as f64 / 4.0;
                next.push(a + d * t + out * (sign * bump * len * w));
            }
        }
        verts = next;
    }

    let mut meta = base.meta().clone();
    if let Some(g) = meta.remove("generator") {
        meta.insert("base".into(), g);
    }
    meta.insert("generator".into(), "koch".into());
    meta.insert("bump".into(), bump.to_string());
    meta.insert("depth".into(), depth.to_string());
    meta.insert("base_vertices".into(), base.len().to_string());
    meta.insert(
        "seed".into(),
        seed.map(|s| s.to_string()).unwrap_or_else(|| "none".into()),
    );
    match PolygonalDomain::new(verts, base.r0(), meta) {
        Err(Error::NonSimple { first, second }) => Err(Error::InvalidDomain(format!(
            "fractal refinement (bump {bump}, depth {depth}) is not simple: edge {first} intersects edge {second}"
        ))),
        other => other,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::point::dist_to_segment;

    #[test]
    fn zero_bump_is_identity_on_the_boundary() {
        let sq = PolygonalDomain::unit_square();
        let k = generate_flat_fractal(&sq, 0.0, 3, Some(1)).unwrap();
        assert_eq!(k.len(), 4 * 4usize.pow(3));
        for p in k.vertices() {
            let d = sq.edges().map(|(a, b)| dist_to_segment(*p, a, b)).fold(f64::INFINITY, f64::min);
            assert!(d < 1e-15);
        }
        assert!((k.area() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn vertex_count() {
        let sq = PolygonalDomain::unit_square();
        assert_eq!(generate_flat_fractal(&sq, 0.0, 1, None).unwrap().len(), 16);
        let hex = PolygonalDomain::regular_polygon(6, 1.0, 0.5).unwrap();
        assert_eq!(generate_flat_fractal(&hex, 0.1, 2, Some(3)).unwrap().len(), 96);
    }

    #[test]
    fn deterministic_and_seed_sensitive() {
        let sq = PolygonalDomain::unit_square();
        let a = generate_flat_fractal(&sq, 0.1, 3, Some(7)).unwrap();
        let b = generate_flat_fractal(&sq, 0.1, 3, Some(7)).unwrap();
        let c = generate_flat_fractal(&sq, 0.1, 3, Some(8)).unwrap();
        assert_eq!(a, b);
        assert_ne!(a.vertices(), c.vertices());
        assert_eq!(a.meta()["seed"], "7");
        assert_eq!(a.meta()["generator"], "koch");
    }

    #[test]
    fn outward_bumps_grow_the_area() {
        let sq = PolygonalDomain::unit_square();
        let k = generate_flat_fractal(&sq, 0.1, 1, None).unwrap();
        assert!(k.area() > 1.0);
    }

    #[test]
    fn rejects_out_of_range_bump() {
        let sq = PolygonalDomain::unit_square();
        assert!(generate_flat_fractal(&sq, 0.31, 1, None).is_err());
        assert!(generate_flat_fractal(&sq, -0.01, 1, None).is_err());
    }

    #[test]
    fn non_simple_output_names_the_edges() {
        // A thin sliver: inward bumps on the long sides collide.
        let v = vec![Point::new(0.0, 0.0), Point::new(1.0, 0.0), Point::new(1.0, 0.05), Point::new(0.0, 0.05)];
        let thin = PolygonalDomain::new(v, 0.05, Default::default()).unwrap();
        let mut found = false;
        for seed in 0..20 {
            if let Err(Error::InvalidDomain(msg)) = generate_flat_fractal(&thin, 0.25, 1, Some(seed)) {
                assert!(msg.contains("intersects edge"), "{msg}");
                found = true;
                break;
            }
        }
        assert!(found);
    }
}
