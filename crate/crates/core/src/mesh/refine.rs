use std::collections::{HashMap, HashSet};

use crate::point::{dist_to_segment, project_on_segment, Point};
use crate::{Error, Result};

use super::locate::barycentric;
use super::{edge_key, TriMesh};

pub const MAX_LEVELS: usize = 4;

/// Local refinement toward `x0`: at level `k = 1..=levels` every triangle
/// within `r0 / 2^k` of `x0` has all three edges bisected, with longest-edge
/// closure keeping the mesh conforming.
pub fn refine_toward(mesh: &TriMesh, x0: Point, levels: usize) -> Result<TriMesh> {
    if levels > MAX_LEVELS {
        return Err(Error::invalid(format!("at most {MAX_LEVELS} refinement levels")));
    }
    let mut current = mesh.clone();
    for k in 1..=levels {
        let radius = mesh.r0() / f64::powi(2.0, k as i32);
        current = refine_once(&current, x0, radius)?;
    }
    Ok(current)
}

fn refine_once(mesh: &TriMesh, x0: Point, radius: f64) -> Result<TriMesh> {
    let pts = mesh.points();
    let tris = mesh.triangles();
    let mut marked: HashSet<(usize, usize)> = HashSet::new();
    for t in tris {
        if distance_to_triangle(x0, t.map(|v| pts[v])) <= radius {
            for k in 0..3 {
                marked.insert(edge_key(t[k], t[(k + 1) % 3]));
            }
        }
    }
    if marked.is_empty() {
        return Ok(mesh.clone());
    }
    bisect_edges(mesh, marked)
}

/// Bisects every marked edge, plus the longest edge of any triangle touching
/// a marked edge, so the result stays conforming.
pub(crate) fn bisect_edges(mesh: &TriMesh, mut marked: HashSet<(usize, usize)>) -> Result<TriMesh> {
    let pts = mesh.points();
    let tris = mesh.triangles();
    let len_key = |a: usize, b: usize| {
        let (a, b) = edge_key(a, b);
        ((pts[a] - pts[b]).norm_sq(), a, b)
    };
    let longest = |t: &[usize; 3]| {
        (0..3)
            .max_by(|&x, &y| {
                let kx = len_key(t[x], t[(x + 1) % 3]);
                let ky = len_key(t[y], t[(y + 1) % 3]);
                kx.0.total_cmp(&ky.0).then((kx.1, kx.2).cmp(&(ky.1, ky.2)))
            })
            .unwrap()
    };
    // Any triangle with a marked edge must also split its longest edge.
    loop {
        let mut grew = false;
        for t in tris {
            let l = longest(t);
            let lk = edge_key(t[l], t[(l + 1) % 3]);
            if !marked.contains(&lk) && (0..3).any(|k| marked.contains(&edge_key(t[k], t[(k + 1) % 3]))) {
                marked.insert(lk);
                grew = true;
            }
        }
        if !grew {
            break;
        }
    }

    let counts = mesh.edge_counts();
    let mut points = pts.to_vec();
    let mut boundary = mesh.is_boundary().to_vec();
    let mut mids: HashMap<(usize, usize), usize> = HashMap::new();
    let outline = mesh.outline();
    // Deterministic midpoint numbering: walk triangles in order.
    let mut mid = |a: usize, b: usize, points: &mut Vec<Point>, boundary: &mut Vec<bool>| -> usize {
        let key = edge_key(a, b);
        *mids.entry(key).or_insert_with(|| {
            let mut m = points[key.0].lerp(points[key.1], 0.5);
            let on_boundary = counts.get(&key) == Some(&1);
            if on_boundary && outline.len() >= 3 {
                m = project_to_outline(m, outline, points[key.0].dist(points[key.1]) / 2.0);
            }
            points.push(m);
            boundary.push(on_boundary);
            points.len() - 1
        })
    };

    let mut out = Vec::with_capacity(tris.len() * 2);
    for t in tris {
        let l = longest(t);
        let (a, b, c) = (t[l], t[(l + 1) % 3], t[(l + 2) % 3]);
        if !marked.contains(&edge_key(a, b)) {
            out.push(*t);
            continue;
        }
        let m = mid(a, b, &mut points, &mut boundary);
        if marked.contains(&edge_key(c, a)) {
            let q = mid(c, a, &mut points, &mut boundary);
            out.push([a, m, q]);
            out.push([m, c, q]);
        } else {
            out.push([a, m, c]);
        }
        if marked.contains(&edge_key(b, c)) {
            let q = mid(b, c, &mut points, &mut boundary);
            out.push([m, b, q]);
            out.push([m, q, c]);
        } else {
            out.push([m, b, c]);
        }
    }
    TriMesh::new(points, out, boundary, mesh.r0(), outline.to_vec())
}

/// Nearest outline point when it is within `reach`; otherwise `p` itself.
fn project_to_outline(p: Point, outline: &[Point], reach: f64) -> Point {
    let n = outline.len();
    let mut best = (p, f64::INFINITY);
    for i in 0..n {
        let (q, _) = project_on_segment(p, outline[i], outline[(i + 1) % n]);
        let d = p.dist(q);
        if d < best.1 {
            best = (q, d);
        }
    }
    if best.1 <= reach {
        best.0
    } else {
        p
    }
}

fn distance_to_triangle(p: Point, v: [Point; 3]) -> f64 {
    if barycentric(v, p).iter().all(|&l| l >= 0.0) {
        return 0.0;
    }
    (0..3).map(|k| dist_to_segment(p, v[k], v[(k + 1) % 3])).fold(f64::INFINITY, f64::min)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::PolygonalDomain;
    use crate::mesh::triangulate;

    fn square_mesh() -> TriMesh {
        let sq = PolygonalDomain::unit_square().with_r0(1.0).unwrap();
        triangulate(&sq, 0.25).unwrap()
    }

    #[test]
    fn zero_levels_is_identity() {
        let m = square_mesh();
        assert_eq!(refine_toward(&m, Point::ORIGIN, 0).unwrap(), m);
    }

    #[test]
    fn edges_near_the_corner_shrink() {
        let m = square_mesh();
        let r = refine_toward(&m, Point::ORIGIN, 2).unwrap();
        r.validate().unwrap();
        assert!((r.area() - m.area()).abs() < 1e-12);
        let near_min = r
            .triangles()
            .iter()
            .filter(|t| t.iter().any(|&v| r.points()[v].norm() < 1e-12))
            .flat_map(|t| (0..3).map(move |k| (t[k], t[(k + 1) % 3])))
            .map(|(a, b)| r.points()[a].dist(r.points()[b]))
            .fold(f64::INFINITY, f64::min);
        assert!(near_min <= 0.25 / 4.0 + 1e-9, "min edge at corner {near_min}");
    }

    #[test]
    fn too_many_levels() {
        assert!(refine_toward(&square_mesh(), Point::ORIGIN, 5).is_err());
    }
}
