use crate::point::Point;

use super::TriMesh;

/// Barycentric tolerance for accepting a point as inside a triangle.
const BARY_TOL: f64 = 1e-10;

/// Bucket grid over triangle bounding boxes.
#[derive(Debug)]
pub struct PointLocator {
    lo: Point,
    cell: f64,
    nx: usize,
    ny: usize,
    cells: Vec<Vec<u32>>,
}

impl PointLocator {
    pub fn new(mesh: &TriMesh) -> Self {
        let pts = mesh.points();
        let mut lo = Point::new(f64::INFINITY, f64::INFINITY);
        let mut hi = Point::new(f64::NEG_INFINITY, f64::NEG_INFINITY);
        for p in pts {
            lo = Point::new(lo.x.min(p.x), lo.y.min(p.y));
            hi = Point::new(hi.x.max(p.x), hi.y.max(p.y));
        }
        let n = mesh.num_triangles().max(1) as f64;
        let extent = (hi.x - lo.x).max(hi.y - lo.y).max(f64::MIN_POSITIVE);
        // Roughly one triangle per cell on average.
        let box_area = (hi.x - lo.x).max(extent * 1e-3) * (hi.y - lo.y).max(extent * 1e-3);
        let cell = (box_area / n).sqrt().max(extent / 4096.0);
        let nx = ((hi.x - lo.x) / cell).floor() as usize + 1;
        let ny = ((hi.y - lo.y) / cell).floor() as usize + 1;
        let mut cells = vec![Vec::new(); nx * ny];
        for (t, tri) in mesh.triangles().iter().enumerate() {
            let v = tri.map(|i| pts[i]);
            let bl = Point::new(v[0].x.min(v[1].x).min(v[2].x), v[0].y.min(v[1].y).min(v[2].y));
            let tr = Point::new(v[0].x.max(v[1].x).max(v[2].x), v[0].y.max(v[1].y).max(v[2].y));
            let (i0, j0) = clamp_cell(lo, cell, nx, ny, bl);
            let (i1, j1) = clamp_cell(lo, cell, nx, ny, tr);
            for j in j0..=j1 {
                for i in i0..=i1 {
                    cells[j * nx + i].push(t as u32);
                }
            }
        }
        PointLocator { lo, cell, nx, ny, cells }
    }

    /// Triangle containing `p` with its barycentric coordinates; `None` off the mesh.
    pub fn locate(&self, mesh: &TriMesh, p: Point) -> Option<(usize, [f64; 3])> {
        let fx = (p.x - self.lo.x) / self.cell;
        let fy = (p.y - self.lo.y) / self.cell;
        if fx < -1e-9 || fy < -1e-9 || fx > self.nx as f64 + 1e-9 || fy > self.ny as f64 + 1e-9 {
            return None;
        }
        let (i, j) = clamp_cell(self.lo, self.cell, self.nx, self.ny, p);
        let mut best: Option<(usize, [f64; 3], f64)> = None;
        for &t in &self.cells[j * self.nx + i] {
            let t = t as usize;
            let bary = barycentric(mesh.vertices_of(t), p);
            let worst = bary[0].min(bary[1]).min(bary[2]);
            if worst >= 0.0 {
                return Some((t, bary));
            }
            if worst >= -BARY_TOL && best.map_or(true, |b| worst > b.2) {
                best = Some((t, bary, worst));
            }
        }
        best.map(|(t, b, _)| (t, b))
    }
}

fn clamp_cell(lo: Point, cell: f64, nx: usize, ny: usize, p: Point) -> (usize, usize) {
    let i = ((p.x - lo.x) / cell).floor().max(0.0) as usize;
    let j = ((p.y - lo.y) / cell).floor().max(0.0) as usize;
    (i.min(nx - 1), j.min(ny - 1))
}

pub(crate) fn barycentric(v: [Point; 3], p: Point) -> [f64; 3] {
    let det = (v[1] - v[0]).cross(v[2] - v[0]);
    let l1 = (p - v[0]).cross(v[2] - v[0]) / det;
    let l2 = (v[1] - v[0]).cross(p - v[0]) / det;
    [1.0 - l1 - l2, l1, l2]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn barycentric_of_vertices_and_centroid() {
        let v = [Point::new(0.0, 0.0), Point::new(2.0, 0.0), Point::new(0.0, 1.0)];
        assert_eq!(barycentric(v, v[1]), [0.0, 1.0, 0.0]);
        let c = barycentric(v, Point::new(2.0 / 3.0, 1.0 / 3.0));
        assert!(c.iter().all(|&l| (l - 1.0 / 3.0).abs() < 1e-15));
    }

    #[test]
    fn locates_in_square() {
        let pts = vec![Point::new(0.0, 0.0), Point::new(1.0, 0.0), Point::new(1.0, 1.0), Point::new(0.0, 1.0)];
        let m = TriMesh::new(pts, vec![[0, 1, 2], [0, 2, 3]], vec![true; 4], 0.5, Vec::new()).unwrap();
        let (t, _) = m.locator().locate(&m, Point::new(0.8, 0.1)).unwrap();
        assert_eq!(t, 0);
        let (t, _) = m.locator().locate(&m, Point::new(0.1, 0.8)).unwrap();
        assert_eq!(t, 1);
        assert!(m.locator().locate(&m, Point::new(1.5, 0.5)).is_none());
    }
}
