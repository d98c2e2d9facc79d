use crate::point::{project_on_segment, Point};

use super::{Location, PolygonalDomain, BOUNDARY_TOL};

/// Bucket grid over the edges of a domain for fast nearest-boundary and
/// point-location queries.
pub struct BoundaryIndex<'a> {
    domain: &'a PolygonalDomain,
    lo: Point,
    cell: f64,
    nx: usize,
    ny: usize,
    cells: Vec<Vec<u32>>,
    /// Edges whose y-extent meets each horizontal band of cells.
    bands: Vec<Vec<u32>>,
}

impl<'a> BoundaryIndex<'a> {
    pub fn new(domain: &'a PolygonalDomain) -> Self {
        let (lo, hi) = domain.bbox();
        let mean_edge = domain.perimeter() / domain.len() as f64;
        let extent = (hi.x - lo.x).max(hi.y - lo.y);
        Self::with_cell(domain, (2.0 * mean_edge).max(extent / 512.0))
    }

    pub fn with_cell(domain: &'a PolygonalDomain, cell: f64) -> Self {
        let (lo, hi) = domain.bbox();
        let nx = (((hi.x - lo.x) / cell).floor() as usize + 1).max(1);
        let ny = (((hi.y - lo.y) / cell).floor() as usize + 1).max(1);
        let mut cells = vec![Vec::new(); nx * ny];
        let mut bands = vec![Vec::new(); ny];
        for (e, (a, b)) in domain.edges().enumerate() {
            let (i0, j0) = cell_of(lo, cell, nx, ny, Point::new(a.x.min(b.x), a.y.min(b.y)));
            let (i1, j1) = cell_of(lo, cell, nx, ny, Point::new(a.x.max(b.x), a.y.max(b.y)));
            for j in j0..=j1 {
                bands[j].push(e as u32);
                for i in i0..=i1 {
                    cells[j * nx + i].push(e as u32);
                }
            }
        }
        BoundaryIndex { domain, lo, cell, nx, ny, cells, bands }
    }

    pub fn domain(&self) -> &'a PolygonalDomain {
        self.domain
    }

    /// Nearest boundary point among edges within `radius` of `p`.
    pub fn nearest_within(&self, p: Point, radius: f64) -> Option<(Point, f64, usize)> {
        let (i0, j0) = cell_of(self.lo, self.cell, self.nx, self.ny, Point::new(p.x - radius, p.y - radius));
        let (i1, j1) = cell_of(self.lo, self.cell, self.nx, self.ny, Point::new(p.x + radius, p.y + radius));
        let mut best: Option<(Point, f64, usize)> = None;
        for j in j0..=j1 {
            for i in i0..=i1 {
                for &e in &self.cells[j * self.nx + i] {
                    let e = e as usize;
                    let (a, b) = self.domain.edge(e);
                    let (q, _) = project_on_segment(p, a, b);
                    let d = p.dist(q);
                    let better = match best {
                        None => true,
                        Some((_, bd, be)) => d < bd || (d == bd && e < be),
                    };
                    if d <= radius && better {
                        best = Some((q, d, e));
                    }
                }
            }
        }
        best
    }

    /// Exact nearest boundary point (falls back to a full scan when the
    /// neighbourhood search comes up empty).
    pub fn nearest(&self, p: Point) -> (Point, f64, usize) {
        let mut r = self.cell;
        for _ in 0..4 {
            if let Some(hit) = self.nearest_within(p, r) {
                return hit;
            }
            r *= 4.0;
        }
        self.domain.nearest_boundary_point(p)
    }

    pub fn locate(&self, p: Point) -> Location {
        if self.nearest_within(p, BOUNDARY_TOL).is_some() {
            return Location::Boundary;
        }
        if p.y < self.lo.y || p.y > self.lo.y + self.cell * self.ny as f64 {
            return Location::Outside;
        }
        let (_, j) = cell_of(self.lo, self.cell, self.nx, self.ny, p);
        let edges = self.bands[j].iter().map(|&e| self.domain.edge(e as usize));
        if super::crossing_parity(edges, p) {
            Location::Inside
        } else {
            Location::Outside
        }
    }
}

fn cell_of(lo: Point, cell: f64, nx: usize, ny: usize, p: Point) -> (usize, usize) {
    let fx = ((p.x - lo.x) / cell).floor();
    let fy = ((p.y - lo.y) / cell).floor();
    let i = if fx.is_nan() || fx < 0.0 { 0 } else { (fx as usize).min(nx - 1) };
    let j = if fy.is_nan() || fy < 0.0 { 0 } else { (fy as usize).min(ny - 1) };
    (i, j)
}
