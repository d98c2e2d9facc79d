//! Conforming triangle meshes of polygonal domains.

mod build;
mod io;
mod locate;
mod refine;

use std::collections::HashMap;
use std::sync::OnceLock;

use crate::point::{dist_to_segment, Point};
use crate::{Error, Result};

pub use build::{triangulate, MIN_ANGLE_DEG, SNAP_FRACTION};
pub use locate::PointLocator;
pub use refine::refine_toward;

/// Triangle mesh with boundary flags. Immutable once built.
#[derive(Debug)]
pub struct TriMesh {
    points: Vec<Point>,
    triangles: Vec<[usize; 3]>,
    is_boundary: Vec<bool>,
    h: f64,
    r0: f64,
    /// Polygon the mesh was cut from; lets refinement put new boundary
    /// midpoints back on the boundary.
    outline: Vec<Point>,
    locator: OnceLock<PointLocator>,
}

impl Clone for TriMesh {
    fn clone(&self) -> Self {
        TriMesh {
            points: self.points.clone(),
            triangles: self.triangles.clone(),
            is_boundary: self.is_boundary.clone(),
            h: self.h,
            r0: self.r0,
            outline: self.outline.clone(),
            locator: OnceLock::new(),
        }
    }
}

impl PartialEq for TriMesh {
    fn eq(&self, other: &Self) -> bool {
        self.points == other.points
            && self.triangles == other.triangles
            && self.is_boundary == other.is_boundary
            && self.r0 == other.r0
    }
}

impl TriMesh {
    /// Builds a mesh and checks every invariant.
    pub fn new(
        points: Vec<Point>,
        triangles: Vec<[usize; 3]>,
        is_boundary: Vec<bool>,
        r0: f64,
        outline: Vec<Point>,
    ) -> Result<Self> {
        let mesh = Self::new_unchecked(points, triangles, is_boundary, r0, outline);
        mesh.validate()?;
        Ok(mesh)
    }

    pub(crate) fn new_unchecked(
        points: Vec<Point>,
        triangles: Vec<[usize; 3]>,
        is_boundary: Vec<bool>,
        r0: f64,
        outline: Vec<Point>,
    ) -> Self {
        let h = max_edge(&points, &triangles);
        TriMesh { points, triangles, is_boundary, h, r0, outline, locator: OnceLock::new() }
    }

    pub fn points(&self) -> &[Point] {
        &self.points
    }

    pub fn triangles(&self) -> &[[usize; 3]] {
        &self.triangles
    }

    pub fn is_boundary(&self) -> &[bool] {
        &self.is_boundary
    }

    pub fn num_points(&self) -> usize {
        self.points.len()
    }

    pub fn num_triangles(&self) -> usize {
        self.triangles.len()
    }

    /// Maximum edge length.
    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn r0(&self) -> f64 {
        self.r0
    }

    pub fn outline(&self) -> &[Point] {
        &self.outline
    }

    pub fn vertices_of(&self, t: usize) -> [Point; 3] {
        let [a, b, c] = self.triangles[t];
        [self.points[a], self.points[b], self.points[c]]
    }

    pub fn triangle_area(&self, t: usize) -> f64 {
        let [a, b, c] = self.vertices_of(t);
        0.5 * (b - a).cross(c - a)
    }

    pub fn area(&self) -> f64 {
        crate::sum::det_sum_by(self.triangles.len(), |t| self.triangle_area(t))
    }

    pub fn min_edge(&self) -> f64 {
        self.edge_lengths().fold(f64::INFINITY, f64::min)
    }

    /// Smallest interior angle over all triangles, in degrees.
    pub fn min_angle_deg(&self) -> f64 {
        (0..self.triangles.len())
            .map(|t| min_angle(self.vertices_of(t)).to_degrees())
            .fold(f64::INFINITY, f64::min)
    }

    fn edge_lengths(&self) -> impl Iterator<Item = f64> + '_ {
        self.triangles.iter().flat_map(move |t| {
            (0..3).map(move |k| self.points[t[k]].dist(self.points[t[(k + 1) % 3]]))
        })
    }

    /// Longest edge among triangles with a vertex within `radius` of `x`.
    pub fn local_h(&self, x: Point, radius: f64) -> f64 {
        let mut h: f64 = 0.0;
        for t in &self.triangles {
            if t.iter().any(|&v| self.points[v].dist(x) <= radius) {
                for k in 0..3 {
                    h = h.max(self.points[t[k]].dist(self.points[t[(k + 1) % 3]]));
                }
            }
        }
        if h == 0.0 {
            self.h
        } else {
            h
        }
    }

    /// Lazily built bucket grid for point location.
    pub fn locator(&self) -> &PointLocator {
        self.locator.get_or_init(|| PointLocator::new(self))
    }

    /// Number of triangles sharing each undirected edge.
    pub fn edge_counts(&self) -> HashMap<(usize, usize), usize> {
        let mut counts = HashMap::with_capacity(self.triangles.len() * 2);
        for t in &self.triangles {
            for k in 0..3 {
                *counts.entry(edge_key(t[k], t[(k + 1) % 3])).or_insert(0) += 1;
            }
        }
        counts
    }

    /// Checks the structural invariants of the mesh.
    pub fn validate(&self) -> Result<()> {
        let n = self.points.len();
        if self.is_boundary.len() != n {
            return Err(Error::Mesh("boundary flag count differs from point count".into()));
        }
        if self.triangles.is_empty() {
            return Err(Error::Mesh("mesh has no triangles".into()));
        }
        if let Some(i) = self.points.iter().position(|p| !p.is_finite()) {
            return Err(Error::Mesh(format!("point {i} is not finite")));
        }
        for (t, tri) in self.triangles.iter().enumerate() {
            if tri.iter().any(|&v| v >= n) {
                return Err(Error::Mesh(format!("triangle {t} references a missing point")));
            }
            if self.triangle_area(t) <= 0.0 {
                return Err(Error::Mesh(format!("triangle {t} has non-positive area")));
            }
        }
        for (&(a, b), &count) in &self.edge_counts() {
            if count > 2 {
                return Err(Error::Mesh(format!("edge ({a}, {b}) is shared by {count} triangles")));
            }
            if count == 1 && !(self.is_boundary[a] && self.is_boundary[b]) {
                return Err(Error::Mesh(format!("boundary edge ({a}, {b}) has an unflagged endpoint")));
            }
        }
        let h = max_edge(&self.points, &self.triangles);
        if h != self.h {
            return Err(Error::Mesh(format!("stored h {} differs from max edge {h}", self.h)));
        }
        if let Some((i, j)) = coincident_pair(&self.points, 1e-12 * h) {
            return Err(Error::Mesh(format!("points {i} and {j} coincide")));
        }
        Ok(())
    }

    /// Largest distance from a boundary-flagged vertex to the outline.
    pub fn boundary_deviation(&self) -> f64 {
        let m = self.outline.len();
        if m == 0 {
            return 0.0;
        }
        self.points
            .iter()
            .zip(&self.is_boundary)
            .filter(|(_, &b)| b)
            .map(|(&p, _)| {
                (0..m)
                    .map(|i| dist_to_segment(p, self.outline[i], self.outline[(i + 1) % m]))
                    .fold(f64::INFINITY, f64::min)
            })
            .fold(0.0, f64::max)
    }
}

pub(crate) fn edge_key(a: usize, b: usize) -> (usize, usize) {
    if a < b {
        (a, b)
    } else {
        (b, a)
    }
}

fn max_edge(points: &[Point], triangles: &[[usize; 3]]) -> f64 {
    let mut h: f64 = 0.0;
    for t in triangles {
        for k in 0..3 {
            h = h.max(points[t[k]].dist(points[t[(k + 1) % 3]]));
        }
    }
    h
}

/// Smallest interior angle of a triangle, in radians.
pub(crate) fn min_angle(v: [Point; 3]) -> f64 {
    (0..3)
        .map(|k| {
            let a = v[(k + 1) % 3] - v[k];
            let b = v[(k + 2) % 3] - v[k];
            a.cross(b).abs().atan2(a.dot(b))
        })
        .fold(f64::INFINITY, f64::min)
}

/// First pair of points closer than `tol`, found by a sweep in `x`.
pub(crate) fn coincident_pair(points: &[Point], tol: f64) -> Option<(usize, usize)> {
    let mut order: Vec<usize> = (0..points.len()).collect();
    order.sort_by(|&a, &b| points[a].x.total_cmp(&points[b].x).then(a.cmp(&b)));
    for (k, &i) in order.iter().enumerate() {
        for &j in &order[k + 1..] {
            if points[j].x - points[i].x > tol {
                break;
            }
            if points[i].dist(points[j]) <= tol {
                return Some((i.min(j), i.max(j)));
            }
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two_triangles() -> TriMesh {
        let pts = vec![Point::new(0.0, 0.0), Point::new(1.0, 0.0), Point::new(1.0, 1.0), Point::new(0.0, 1.0)];
        TriMesh::new(pts, vec![[0, 1, 2], [0, 2, 3]], vec![true; 4], 0.5, Vec::new()).unwrap()
    }

    #[test]
    fn valid_square() {
        let m = two_triangles();
        assert_eq!(m.area(), 1.0);
        assert_eq!(m.h(), 2f64.sqrt());
        assert!((m.min_angle_deg() - 45.0).abs() < 1e-12);
    }

    #[test]
    fn rejects_inverted_and_unflagged() {
        let pts = vec![Point::new(0.0, 0.0), Point::new(1.0, 0.0), Point::new(0.0, 1.0)];
        assert!(TriMesh::new(pts.clone(), vec![[0, 2, 1]], vec![true; 3], 0.5, Vec::new()).is_err());
        assert!(TriMesh::new(pts, vec![[0, 1, 2]], vec![true, true, false], 0.5, Vec::new()).is_err());
    }

    #[test]
    fn rejects_coincident_points() {
        let pts = vec![Point::new(0.0, 0.0), Point::new(1.0, 0.0), Point::new(0.0, 1.0), Point::new(0.0, 1.0)];
        let err = TriMesh::new(pts, vec![[0, 1, 2]], vec![true; 4], 0.5, Vec::new()).unwrap_err();
        assert!(err.to_string().contains("coincide"));
    }
}
