//! Polygonal domains, fractal generation and Reifenberg-flatness certification.

mod flatness;
mod index;
mod koch;

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::point::{dist_to_segment, project_on_segment, segments_intersect, Point};
use crate::{Error, Result};

pub use flatness::{
    estimate_flatness, estimate_flatness_with, local_flatness, FlatnessOptions, FlatnessReport,
    FlatnessSample, Line, SeparationMode,
};
pub use index::BoundaryIndex;
pub use koch::generate_flat_fractal;

/// Points this close to the boundary are reported as [`Location::Boundary`].
pub const BOUNDARY_TOL: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Location {
    Inside,
    Outside,
    Boundary,
}

impl Location {
    /// Inside or on the boundary.
    pub fn in_closure(self) -> bool {
        self != Location::Outside
    }
}

/// A simple, counter-clockwise polygon together with its flatness scale `r0`.
#[derive(Clone, Debug, PartialEq)]
pub struct PolygonalDomain {
    vertices: Vec<Point>,
    r0: f64,
    meta: BTreeMap<String, String>,
}

#[derive(Serialize, Deserialize)]
struct DomainFile {
    vertices: Vec<Point>,
    r0: f64,
    #[serde(default)]
    meta: BTreeMap<String, String>,
}

impl PolygonalDomain {
    /// Validates simplicity, orientation and the range of `r0`.
    pub fn new(vertices: Vec<Point>, r0: f64, meta: BTreeMap<String, String>) -> Result<Self> {
        let dom = PolygonalDomain { vertices, r0, meta };
        dom.validate()?;
        Ok(dom)
    }

    /// Like [`PolygonalDomain::new`] but accepts clockwise input by reversing it.
    pub fn from_any_orientation(
        mut vertices: Vec<Point>,
        r0: f64,
        meta: BTreeMap<String, String>,
    ) -> Result<Self> {
        if signed_area(&vertices) < 0.0 {
            vertices.reverse();
        }
        Self::new(vertices, r0, meta)
    }

    fn validate(&self) -> Result<()> {
        let n = self.vertices.len();
        if n < 3 {
            return Err(Error::InvalidDomain(format!("need at least 3 vertices, got {n}")));
        }
        if let Some(i) = self.vertices.iter().position(|p| !p.is_finite()) {
            return Err(Error::InvalidDomain(format!("vertex {i} is not finite")));
        }
        for i in 0..n {
            if self.vertices[i] == self.vertices[(i + 1) % n] {
                return Err(Error::InvalidDomain(format!("vertices {i} and {} coincide", (i + 1) % n)));
            }
        }
        if let Some((a, b)) = find_self_intersection(&self.vertices) {
            return Err(Error::NonSimple { first: a, second: b });
        }
        if signed_area(&self.vertices) <= 0.0 {
            return Err(Error::InvalidDomain("vertices must be counter-clockwise".into()));
        }
        if !(self.r0 > 0.0) {
            return Err(Error::InvalidDomain(format!("r0 must be positive, got {}", self.r0)));
        }
        let diam = self.diameter();
        if self.r0 > diam * (1.0 + 1e-12) {
            return Err(Error::InvalidDomain(format!("r0 = {} exceeds the diameter {diam}", self.r0)));
        }
        Ok(())
    }

    pub fn vertices(&self) -> &[Point] {
        &self.vertices
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    pub fn r0(&self) -> f64 {
        self.r0
    }

    pub fn meta(&self) -> &BTreeMap<String, String> {
        &self.meta
    }

    pub fn with_r0(&self, r0: f64) -> Result<Self> {
        Self::new(self.vertices.clone(), r0, self.meta.clone())
    }

    pub fn with_meta(mut self, key: &str, value: impl ToString) -> Self {
        self.meta.insert(key.to_string(), value.to_string());
        self
    }

    /// Edge `i` runs from vertex `i` to vertex `i + 1` (cyclically).
    pub fn edge(&self, i: usize) -> (Point, Point) {
        let n = self.vertices.len();
        (self.vertices[i], self.vertices[(i + 1) % n])
    }

    pub fn edges(&self) -> impl Iterator<Item = (Point, Point)> + '_ {
        (0..self.vertices.len()).map(move |i| self.edge(i))
    }

    pub fn signed_area(&self) -> f64 {
        signed_area(&self.vertices)
    }

    pub fn area(&self) -> f64 {
        self.signed_area().abs()
    }

    pub fn perimeter(&self) -> f64 {
        self.edges().map(|(a, b)| a.dist(b)).sum()
    }

    pub fn min_edge_length(&self) -> f64 {
        self.edges().map(|(a, b)| a.dist(b)).fold(f64::INFINITY, f64::min)
    }

    pub fn diameter(&self) -> f64 {
        let v = &self.vertices;
        let mut d2: f64 = 0.0;
        for i in 0..v.len() {
            for j in i + 1..v.len() {
                d2 = d2.max((v[i] - v[j]).norm_sq());
            }
        }
        d2.sqrt()
    }

    pub fn bbox(&self) -> (Point, Point) {
        let mut lo = Point::new(f64::INFINITY, f64::INFINITY);
        let mut hi = Point::new(f64::NEG_INFINITY, f64::NEG_INFINITY);
        for p in &self.vertices {
            lo = Point::new(lo.x.min(p.x), lo.y.min(p.y));
            hi = Point::new(hi.x.max(p.x), hi.y.max(p.y));
        }
        (lo, hi)
    }

    /// Exterior turning angle at vertex `i`, in `(-pi, pi)`; positive at convex corners.
    pub fn turning_angle(&self, i: usize) -> f64 {
        let n = self.vertices.len();
        let prev = self.vertices[(i + n - 1) % n];
        let cur = self.vertices[i];
        let next = self.vertices[(i + 1) % n];
        let a = cur - prev;
        let b = next - cur;
        a.cross(b).atan2(a.dot(b))
    }

    /// Nearest point of the boundary, its distance, and the edge it lies on.
    pub fn nearest_boundary_point(&self, p: Point) -> (Point, f64, usize) {
        let mut best = (self.vertices[0], f64::INFINITY, 0);
        for (i, (a, b)) in self.edges().enumerate() {
            let (q, _) = project_on_segment(p, a, b);
            let d = p.dist(q);
            if d < best.1 {
                best = (q, d, i);
            }
        }
        best
    }

    pub fn distance_to_boundary(&self, p: Point) -> f64 {
        self.edges().map(|(a, b)| dist_to_segment(p, a, b)).fold(f64::INFINITY, f64::min)
    }

    /// Point at arclength `s` (taken modulo the perimeter) from vertex 0.
    pub fn point_at_arclength(&self, s: f64) -> Point {
        let per = self.perimeter();
        let mut s = s.rem_euclid(per);
        for (a, b) in self.edges() {
            let len = a.dist(b);
            if s <= len {
                return a.lerp(b, s / len);
            }
            s -= len;
        }
        self.vertices[0]
    }

    /// Even-odd classification; points within [`BOUNDARY_TOL`] of an edge are `Boundary`.
    pub fn locate(&self, p: Point) -> Location {
        if self.distance_to_boundary(p) <= BOUNDARY_TOL {
            return Location::Boundary;
        }
        if crossing_parity(self.edges(), p) {
            Location::Inside
        } else {
            Location::Outside
        }
    }

    pub fn contains(&self, p: Point) -> bool {
        self.locate(p) == Location::Inside
    }

    pub fn scaled(&self, s: f64) -> Result<Self> {
        let v = self.vertices.iter().map(|&p| p * s).collect();
        Self::new(v, self.r0 * s, self.meta.clone())
    }

    pub fn transformed(&self, rotation: f64, shift: Point) -> Result<Self> {
        let (sn, cs) = rotation.sin_cos();
        let v = self
            .vertices
            .iter()
            .map(|p| Point::new(cs * p.x - sn * p.y, sn * p.x + cs * p.y) + shift)
            .collect();
        Self::new(v, self.r0, self.meta.clone())
    }

    // ---- builders -------------------------------------------------------

    pub fn rectangle(lo: Point, hi: Point, r0: f64) -> Result<Self> {
        let v = vec![lo, Point::new(hi.x, lo.y), hi, Point::new(lo.x, hi.y)];
        Self::new(v, r0, meta_of("rectangle"))
    }

    /// `[0, 1]^2` with `r0 = 1/2`.
    pub fn unit_square() -> Self {
        Self::rectangle(Point::ORIGIN, Point::new(1.0, 1.0), 0.5).expect("valid square")
    }

    /// Regular `n`-gon inscribed in the circle of radius `radius` centred at the origin.
    pub fn regular_polygon(n: usize, radius: f64, r0: f64) -> Result<Self> {
        if n < 3 {
            return Err(Error::invalid("a regular polygon needs n >= 3"));
        }
        let v = (0..n)
            .map(|k| Point::from_polar(radius, 2.0 * PI * k as f64 / n as f64))
            .collect();
        let dom = Self::new(v, r0, meta_of("regular_polygon"))?;
        Ok(dom.with_meta("sides", n).with_meta("radius", radius))
    }

    /// Polygonal disk: a regular polygon with `n` sides.
    pub fn disk(radius: f64, n: usize, r0: f64) -> Result<Self> {
        let dom = Self::regular_polygon(n, radius, r0)?;
        Ok(dom.with_meta("generator", "disk"))
    }

    /// `[-1, 1]^2` minus the quadrant `[0, 1] x [-1, 0]`; re-entrant corner at the origin.
    pub fn l_shape(r0: f64) -> Result<Self> {
        let v = vec![
            Point::new(-1.0, -1.0),
            Point::new(0.0, -1.0),
            Point::new(0.0, 0.0),
            Point::new(1.0, 0.0),
            Point::new(1.0, 1.0),
            Point::new(-1.0, 1.0),
        ];
        Self::new(v, r0, meta_of("l_shape"))
    }

    // ---- file format ------------------------------------------------------

    pub fn to_json(&self) -> String {
        let file = DomainFile { vertices: self.vertices.clone(), r0: self.r0, meta: self.meta.clone() };
        serde_json::to_string_pretty(&file).expect("domain serialises")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: DomainFile = serde_json::from_str(text)?;
        Self::new(file.vertices, file.r0, file.meta)
    }

    pub fn read(path: &Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json())?;
        Ok(())
    }
}

fn meta_of(generator: &str) -> BTreeMap<String, String> {
    BTreeMap::from([("generator".to_string(), generator.to_string())])
}

pub(crate) fn signed_area(v: &[Point]) -> f64 {
    let n = v.len();
    0.5 * (0..n).map(|i| v[i].cross(v[(i + 1) % n])).sum::<f64>()
}

pub(crate) fn crossing_parity(edges: impl Iterator<Item = (Point, Point)>, p: Point) -> bool {
    let mut inside = false;
    for (a, b) in edges {
        if (a.y > p.y) != (b.y > p.y) {
            let x = a.x + (p.y - a.y) / (b.y - a.y) * (b.x - a.x);
            if p.x < x {
                inside = !inside;
            }
        }
    }
    inside
}

/// First pair of non-adjacent edges that touch, found with a sweep over x-extents.
pub(crate) fn find_self_intersection(v: &[Point]) -> Option<(usize, usize)> {
    let n = v.len();
    let edge = |i: usize| (v[i], v[(i + 1) % n]);
    let mut order: Vec<usize> = (0..n).collect();
    let xmin = |i: usize| v[i].x.min(v[(i + 1) % n].x);
    let xmax = |i: usize| v[i].x.max(v[(i + 1) % n].x);
    order.sort_by(|&a, &b| xmin(a).total_cmp(&xmin(b)).then(a.cmp(&b)));
    let mut active: Vec<usize> = Vec::new();
    let mut hits: Vec<(usize, usize)> = Vec::new();
    for &i in &order {
        let x0 = xmin(i);
        active.retain(|&j| xmax(j) >= x0);
        let (a, b) = edge(i);
        for &j in &active {
            let adjacent = (i + 1) % n == j || (j + 1) % n == i;
            let (c, d) = edge(j);
            if adjacent {
                // Adjacent edges may only share their common vertex.
                let shared = if (i + 1) % n == j { b } else { a };
                let (far_i, far_j) = if (i + 1) % n == j { (a, d) } else { (b, c) };
                let collinear_back = crate::point::orient(far_i, shared, far_j) == 0.0
                    && (far_i - shared).dot(far_j - shared) > 0.0;
                if collinear_back {
                    hits.push((i.min(j), i.max(j)));
                }
                continue;
            }
            if segments_intersect(a, b, c, d) {
                hits.push((i.min(j), i.max(j)));
            }
        }
        active.push(i);
    }
    hits.into_iter().min()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn square_membership() {
        let sq = PolygonalDomain::unit_square();
        assert_eq!(sq.locate(Point::new(0.5, 0.5)), Location::Inside);
        assert_eq!(sq.locate(Point::new(2.0, 2.0)), Location::Outside);
        assert_eq!(sq.locate(Point::new(1.0, 0.3)), Location::Boundary);
        assert_eq!(sq.locate(Point::new(0.0, 0.0)), Location::Boundary);
    }

    #[test]
    fn rejects_bowtie_and_clockwise() {
        let bowtie = vec![
            Point::new(0.0, 0.0),
            Point::new(1.0, 1.0),
            Point::new(1.0, 0.0),
            Point::new(0.0, 1.0),
        ];
        match PolygonalDomain::new(bowtie, 0.5, BTreeMap::new()) {
            Err(Error::NonSimple { first, second }) => assert_eq!((first, second), (0, 2)),
            other => panic!("expected NonSimple, got {other:?}"),
        }
        let cw = vec![Point::new(0.0, 0.0), Point::new(0.0, 1.0), Point::new(1.0, 1.0), Point::new(1.0, 0.0)];
        assert!(PolygonalDomain::new(cw.clone(), 0.5, BTreeMap::new()).is_err());
        assert!(PolygonalDomain::from_any_orientation(cw, 0.5, BTreeMap::new()).is_ok());
    }

    #[test]
    fn r0_must_fit() {
        let v = PolygonalDomain::unit_square().vertices().to_vec();
        assert!(PolygonalDomain::new(v.clone(), 0.0, BTreeMap::new()).is_err());
        assert!(PolygonalDomain::new(v.clone(), 1.5, BTreeMap::new()).is_err());
        assert!(PolygonalDomain::new(v, 2f64.sqrt(), BTreeMap::new()).is_ok());
    }

    #[test]
    fn json_roundtrip() {
        let d = PolygonalDomain::l_shape(0.5).unwrap();
        let back = PolygonalDomain::from_json(&d.to_json()).unwrap();
        assert_eq!(d, back);
        let raw = r#"{"vertices": [[0,0],[2,0],[0,2]], "r0": 0.5}"#;
        let t = PolygonalDomain::from_json(raw).unwrap();
        assert_eq!(t.area(), 2.0);
    }

    #[test]
    fn turning_angles_of_l_shape() {
        let l = PolygonalDomain::l_shape(0.5).unwrap();
        let total: f64 = (0..l.len()).map(|i| l.turning_angle(i)).sum();
        assert!((total - 2.0 * PI).abs() < 1e-12);
        assert!((l.turning_angle(2) + PI / 2.0).abs() < 1e-12);
    }
}
