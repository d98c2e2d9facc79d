use rayon::prelude::*;

use crate::fem::quad::{area, distance_to, integrate_triangle};
use crate::mesh::TriMesh;
use crate::point::Point;
use crate::sum::det_sum;

/// Subdivision depth for triangles cut by the sphere `∂B(x0, r)`.
pub const CLIP_DEPTH: usize = 4;

/// Integrals over `Ω_h ∩ B(center, r)` for many radii around one centre.
///
/// Triangles are sorted once by their distance to the centre, so a ball only
/// visits the triangles that can meet it.
pub struct BallIntegrator<'a> {
    mesh: &'a TriMesh,
    center: Point,
    /// `(triangle, distance to the triangle, largest vertex distance)`.
    order: Vec<(usize, f64, f64)>,
}

impl<'a> BallIntegrator<'a> {
    pub fn new(mesh: &'a TriMesh, center: Point) -> Self {
        let mut order: Vec<(usize, f64, f64)> = (0..mesh.num_triangles())
            .into_par_iter()
            .map(|t| {
                let v = mesh.vertices_of(t);
                let far = v.iter().map(|p| p.dist(center)).fold(0.0, f64::max);
                (t, distance_to(&v, center), far)
            })
            .collect();
        order.sort_by(|a, b| a.1.total_cmp(&b.1).then(a.0.cmp(&b.0)));
        BallIntegrator { mesh, center, order }
    }

    pub fn mesh(&self) -> &'a TriMesh {
        self.mesh
    }

    pub fn center(&self) -> Point {
        self.center
    }

    /// `∫_{Ω_h ∩ B(center, r)} g(t, x) dx`, where `t` is the triangle holding `x`.
    ///
    /// Triangles inside the ball use the interior rule (graded near
    /// `singular`); cut triangles are split [`CLIP_DEPTH`] times and each cut
    /// leaf contributes its chord-clipped area times `g` at the clipped centroid.
    pub fn integrate<G>(&self, r: f64, g: &G, singular: Option<Point>) -> f64
    where
        G: Fn(usize, Point) -> f64 + Sync,
    {
        let n = self.order.partition_point(|e| e.1 < r);
        let reach = 3.0 * self.mesh.h();
        let per: Vec<f64> = self.order[..n]
            .par_iter()
            .map(|&(t, _, far)| {
                let v = self.mesh.vertices_of(t);
                if far <= r {
                    integrate_triangle(&v, &|p, _| g(t, p), singular.map(|s| (s, reach)))
                } else {
                    clip(&v, self.center, r, &|p| g(t, p), CLIP_DEPTH)
                }
            })
            .collect();
        det_sum(&per)
    }

    /// `|Ω_h ∩ B(center, r)|`.
    pub fn area(&self, r: f64) -> f64 {
        self.integrate(r, &|_, _| 1.0, None)
    }
}

fn clip(v: &[Point; 3], c: Point, r: f64, g: &dyn Fn(Point) -> f64, depth: usize) -> f64 {
    let d = v.map(|p| p.dist(c));
    if d.iter().all(|&x| x <= r) {
        return integrate_triangle(v, &|p, _| g(p), None);
    }
    if distance_to(v, c) >= r {
        return 0.0;
    }
    if depth == 0 {
        return chord_clip(v, d.map(|x| r - x), g);
    }
    let m = |a: usize, b: usize| v[a].lerp(v[b], 0.5);
    let (m01, m12, m20) = (m(0, 1), m(1, 2), m(2, 0));
    [[v[0], m01, m20], [m01, v[1], m12], [m20, m12, v[2]], [m01, m12, m20]]
        .iter()
        .map(|s| clip(s, c, r, g, depth - 1))
        .sum()
}

/// Clips the triangle to `{φ ≥ 0}` with `φ` linear through the vertex values,
/// i.e. the circle replaced by its chord inside the leaf.
fn chord_clip(v: &[Point; 3], phi: [f64; 3], g: &dyn Fn(Point) -> f64) -> f64 {
    let mut poly: Vec<Point> = Vec::with_capacity(4);
    for i in 0..3 {
        let j = (i + 1) % 3;
        if phi[i] >= 0.0 {
            poly.push(v[i]);
        }
        if (phi[i] >= 0.0) != (phi[j] >= 0.0) {
            let t = phi[i] / (phi[i] - phi[j]);
            poly.push(v[i].lerp(v[j], t));
        }
    }
    if poly.len() < 3 {
        return 0.0;
    }
    // Fan from the first vertex: area and centroid.
    let mut a = 0.0;
    let mut cx = Point::ORIGIN;
    for k in 1..poly.len() - 1 {
        let tri = [poly[0], poly[k], poly[k + 1]];
        let ak = area(&tri);
        a += ak;
        cx = cx + (tri[0] + tri[1] + tri[2]) * (ak / 3.0);
    }
    if a <= 0.0 {
        return 0.0;
    }
    a * g(cx * (1.0 / a))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::PolygonalDomain;
    use crate::mesh::triangulate;
    use std::f64::consts::PI;

    #[test]
    fn ball_area_in_square() {
        let m = triangulate(&PolygonalDomain::unit_square(), 0.05).unwrap();
        let b = BallIntegrator::new(&m, Point::new(0.5, 0.5));
        for r in [0.1, 0.23, 0.4] {
            // Chords undercut the circle by about (leaf / r)² / 6.
            assert!((b.area(r) / (PI * r * r) - 1.0).abs() < 1e-3, "r = {r}");
        }
        // A quarter disk at the corner.
        let c = BallIntegrator::new(&m, Point::ORIGIN);
        assert!((c.area(0.3) / (0.25 * PI * 0.09) - 1.0).abs() < 1e-3);
        assert_eq!(c.area(0.0), 0.0);
    }

    #[test]
    fn second_moment() {
        let m = triangulate(&PolygonalDomain::unit_square(), 0.05).unwrap();
        let x0 = Point::new(0.5, 0.5);
        let b = BallIntegrator::new(&m, x0);
        // ∫_{B_r} |x - x0|² = π r⁴ / 2.
        let got = b.integrate(0.3, &|_, p: Point| p.dist(x0).powi(2), None);
        assert!((got / (PI * 0.3f64.powi(4) / 2.0) - 1.0).abs() < 1e-3);
    }
}
