//! Background-lattice triangulation with boundary snapping.
//!
//! The lattice is equilateral (every background edge has length `h`) and is
//! anchored at the sharpest polygon corner so that corner is meshed exactly.
//! Nodes within `SNAP_FRACTION * h` of the boundary are projected onto it;
//! remaining cut triangles are clipped along their crossing edges.

use std::collections::HashMap;

use rayon::prelude::*;

use crate::geometry::{BoundaryIndex, Location, PolygonalDomain};
use crate::point::{project_on_segment, segment_crossing, segment_distance, Point};
use crate::{Error, Result};

use super::refine::bisect_edges;
use super::{coincident_pair, edge_key, min_angle, TriMesh};

pub const SNAP_FRACTION: f64 = 0.3;
pub const MIN_ANGLE_DEG: f64 = 10.0;
/// Corners turning by at least this much claim a lattice node.
const CORNER_ANGLE_DEG: f64 = 20.0;
/// Farthest a lattice node may move to reach a corner.
const CORNER_REACH: f64 = 0.5;
const SLIVER_PASSES: usize = 8;
const MAX_EDGE_FACTOR: f64 = 1.5;

pub fn triangulate(domain: &PolygonalDomain, h: f64) -> Result<TriMesh> {
    if !(h.is_finite() && h > 0.0) {
        return Err(Error::invalid("mesh size must be positive"));
    }
    if h > domain.r0() / 4.0 * (1.0 + 1e-12) {
        return Err(Error::invalid(format!("mesh size {h} exceeds r0/4 = {}", domain.r0() / 4.0)));
    }
    let min_edge = domain.min_edge_length();
    if h > 2.0 * min_edge {
        return Err(Error::invalid(format!(
            "mesh size {h} exceeds twice the shortest polygon edge ({min_edge})"
        )));
    }
    check_thin_features(domain, h)?;

    let index = BoundaryIndex::new(domain);
    let lattice = Lattice::new(domain, h);
    let mut pos = lattice.positions();
    let mut sign: Vec<i8> = pos
        .par_iter()
        .map(|&p| match index.nearest_within(p, SNAP_FRACTION * h) {
            Some(_) => 0,
            None => match index.locate(p) {
                Location::Inside => -1,
                Location::Outside => 1,
                Location::Boundary => 0,
            },
        })
        .collect();

    // Corners first, strongest first, each claiming its nearest free node.
    let mut claimed = vec![false; pos.len()];
    for v in corner_order(domain) {
        let c = domain.vertices()[v];
        if let Some(k) = lattice.corner_node(c, &pos, &claimed, |p| index.locate(p) == Location::Outside) {
            pos[k] = c;
            sign[k] = 0;
            claimed[k] = true;
        }
    }
    let snapped: Vec<Option<Point>> = pos
        .par_iter()
        .zip(claimed.par_iter())
        .map(|(&p, &c)| if c { None } else { index.nearest_within(p, SNAP_FRACTION * h).map(|hit| hit.0) })
        .collect();
    for (k, s) in snapped.into_iter().enumerate() {
        if let Some(q) = s {
            pos[k] = q;
            sign[k] = 0;
        }
    }

    // Clip each lattice triangle against the boundary.
    let mut points = pos;
    let mut boundary: Vec<bool> = sign.iter().map(|&s| s == 0).collect();
    let mut cuts: HashMap<(usize, usize), usize> = HashMap::new();
    let mut triangles: Vec<[usize; 3]> = Vec::new();
    for tri in lattice.triangles() {
        let s = tri.map(|k| sign[k]);
        if s.iter().all(|&x| x >= 0) {
            if s.iter().all(|&x| x == 0) {
                let c = centroid(tri.map(|k| points[k]));
                if index.locate(c) == Location::Inside {
                    triangles.push(tri);
                }
            }
            continue;
        }
        if s.iter().all(|&x| x <= 0) {
            triangles.push(tri);
            continue;
        }
        let mut poly = Vec::with_capacity(4);
        for k in 0..3 {
            let (a, b) = (tri[k], tri[(k + 1) % 3]);
            if sign[a] <= 0 {
                poly.push(a);
            }
            if sign[a] as i32 * sign[b] as i32 == -1 {
                let key = edge_key(a, b);
                let id = *cuts.entry(key).or_insert_with(|| {
                    let (inside, outside) = if sign[a] < 0 { (a, b) } else { (b, a) };
                    points.push(first_crossing(domain, &index, points[inside], points[outside]));
                    boundary.push(true);
                    points.len() - 1
                });
                poly.push(id);
            }
        }
        match poly.len() {
            3 => triangles.push([poly[0], poly[1], poly[2]]),
            4 => {
                let q = poly.iter().map(|&k| points[k]).collect::<Vec<_>>();
                let a = min_angle([q[0], q[1], q[2]]).min(min_angle([q[0], q[2], q[3]]));
                let b = min_angle([q[1], q[2], q[3]]).min(min_angle([q[1], q[3], q[0]]));
                if a >= b {
                    triangles.push([poly[0], poly[1], poly[2]]);
                    triangles.push([poly[0], poly[2], poly[3]]);
                } else {
                    triangles.push([poly[1], poly[2], poly[3]]);
                    triangles.push([poly[1], poly[3], poly[0]]);
                }
            }
            _ => {}
        }
    }

    let area_floor = 1e-14 * h * h;
    let positive = |pts: &[Point], t: &[usize; 3]| {
        t[0] != t[1] && t[1] != t[2] && t[0] != t[2] && signed_area(pts, t) > area_floor
    };
    triangles.retain(|t| positive(&points, t));
    // Fully boundary triangles are kept only when they lie inside.
    triangles.retain(|t| {
        !t.iter().all(|&k| boundary[k]) || index.locate(centroid(t.map(|k| points[k]))) == Location::Inside
    });

    remove_slivers(&mut points, &mut triangles, &boundary, area_floor);
    merge_coincident(&mut points, &mut triangles, &mut boundary, 1e-9 * h);
    triangles.retain(|t| positive(&points, t));
    recover_reflex_vertices(domain, &mut points, &mut triangles, &mut boundary, 1e-9 * h);

    let (points, triangles, mut boundary) = compact(points, triangles, boundary);
    if triangles.is_empty() {
        return Err(Error::Mesh(format!("no triangles survived at h = {h}")));
    }
    let counts = edge_count_map(&triangles);
    for (&(a, b), &c) in &counts {
        if c == 1 {
            boundary[a] = true;
            boundary[b] = true;
        }
    }
    let mesh = TriMesh::new_unchecked(points, triangles, boundary, domain.r0(), domain.vertices().to_vec());
    // Corner moves can stretch a few edges past 1.5h; bisect those.
    let limit = MAX_EDGE_FACTOR * h;
    let long: Vec<(usize, usize)> = mesh
        .edge_counts()
        .into_keys()
        .filter(|&(a, b)| mesh.points()[a].dist(mesh.points()[b]) > limit)
        .collect();
    let mesh = if long.is_empty() { mesh } else { bisect_edges(&mesh, long.into_iter().collect())? };
    mesh.validate()?;
    Ok(mesh)
}

struct Lattice {
    origin: Point,
    h: f64,
    dy: f64,
    j0: i64,
    i0: i64,
    rows: usize,
    cols: usize,
}

impl Lattice {
    fn new(domain: &PolygonalDomain, h: f64) -> Self {
        let origin = domain.vertices()[corner_order(domain).first().copied().unwrap_or(0)];
        let dy = h * 3f64.sqrt() / 2.0;
        let (lo, hi) = domain.bbox();
        let j0 = ((lo.y - origin.y) / dy).floor() as i64 - 1;
        let j1 = ((hi.y - origin.y) / dy).ceil() as i64 + 1;
        let i0 = ((lo.x - origin.x) / h).floor() as i64 - 2;
        let i1 = ((hi.x - origin.x) / h).ceil() as i64 + 2;
        Lattice {
            origin,
            h,
            dy,
            j0,
            i0,
            rows: (j1 - j0 + 1) as usize,
            cols: (i1 - i0 + 1) as usize,
        }
    }

    fn node(&self, r: usize, c: usize) -> usize {
        r * self.cols + c
    }

    fn odd_row(&self, r: usize) -> bool {
        (self.j0 + r as i64).rem_euclid(2) == 1
    }

    fn position(&self, r: usize, c: usize) -> Point {
        let j = self.j0 + r as i64;
        let shift = if self.odd_row(r) { 0.5 } else { 0.0 };
        Point::new(
            self.origin.x + ((self.i0 + c as i64) as f64 + shift) * self.h,
            self.origin.y + j as f64 * self.dy,
        )
    }

    fn positions(&self) -> Vec<Point> {
        (0..self.rows * self.cols).map(|k| self.position(k / self.cols, k % self.cols)).collect()
    }

    fn triangles(&self) -> Vec<[usize; 3]> {
        let mut out = Vec::with_capacity(2 * self.rows * self.cols);
        for r in 0..self.rows - 1 {
            for c in 0..self.cols - 1 {
                let (a, b) = (self.node(r, c), self.node(r, c + 1));
                let (d, e) = (self.node(r + 1, c), self.node(r + 1, c + 1));
                if self.odd_row(r) {
                    out.push([a, b, e]);
                    out.push([a, e, d]);
                } else {
                    out.push([a, b, d]);
                    out.push([b, e, d]);
                }
            }
        }
        out
    }

    /// Node to move onto a corner. Nodes within `CORNER_REACH * h` win; beyond
    /// that a node not outside the domain is preferred, since triangles around
    /// an outside node are discarded and the corner would be lost.
    fn corner_node(&self, p: Point, pos: &[Point], claimed: &[bool], outside: impl Fn(Point) -> bool) -> Option<usize> {
        let r = ((p.y - self.origin.y) / self.dy).round() as i64 - self.j0;
        let c = ((p.x - self.origin.x) / self.h).round() as i64 - self.i0;
        let mut near: Vec<(f64, usize)> = Vec::new();
        for dr in -2..=2 {
            for dc in -2..=2 {
                let (rr, cc) = (r + dr, c + dc);
                if rr < 0 || cc < 0 || rr >= self.rows as i64 || cc >= self.cols as i64 {
                    continue;
                }
                let k = self.node(rr as usize, cc as usize);
                let d = pos[k].dist(p);
                if !claimed[k] && d <= 0.6 * self.h {
                    near.push((d, k));
                }
            }
        }
        near.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        let first = *near.first()?;
        if first.0 <= CORNER_REACH * self.h {
            return Some(first.1);
        }
        near.iter().find(|&&(_, k)| !outside(pos[k])).or(Some(&first)).map(|&(_, k)| k)
    }
}

/// Corner vertices, sharpest first; re-entrant corners win ties.
fn corner_order(domain: &PolygonalDomain) -> Vec<usize> {
    let limit = CORNER_ANGLE_DEG.to_radians();
    let mut corners: Vec<(f64, usize)> = (0..domain.len())
        .filter_map(|i| {
            let a = domain.turning_angle(i);
            (a.abs() >= limit).then(|| (a.abs() + if a < 0.0 { 1e-6 } else { 0.0 }, i))
        })
        .collect();
    corners.sort_by(|x, y| y.0.total_cmp(&x.0).then(x.1.cmp(&y.1)));
    corners.into_iter().map(|c| c.1).collect()
}

/// Boundary point where the segment from `inside` to `outside` first leaves the domain.
fn first_crossing(domain: &PolygonalDomain, index: &BoundaryIndex<'_>, inside: Point, outside: Point) -> Point {
    let len = inside.dist(outside);
    let mid = inside.lerp(outside, 0.5);
    let mut best: Option<(f64, usize)> = None;
    for (e, (c, d)) in domain.edges().enumerate() {
        if c.x.max(d.x) < mid.x - len || c.x.min(d.x) > mid.x + len || c.y.max(d.y) < mid.y - len || c.y.min(d.y) > mid.y + len
        {
            continue;
        }
        if let Some(t) = segment_crossing(inside, outside, c, d) {
            if best.map_or(true, |(bt, _)| t < bt) {
                best = Some((t, e));
            }
        }
    }
    match best {
        Some((t, e)) => {
            let (c, d) = domain.edge(e);
            project_on_segment(inside.lerp(outside, t), c, d).0
        }
        None => {
            // Crossing exactly through a vertex can slip between edges; bisect.
            let (mut a, mut b) = (inside, outside);
            for _ in 0..60 {
                let m = a.lerp(b, 0.5);
                if index.locate(m) == Location::Inside {
                    a = m;
                } else {
                    b = m;
                }
            }
            index.nearest(b).0
        }
    }
}

/// Rejects pairs of edges closer than `2h` that are not close along the boundary.
fn check_thin_features(domain: &PolygonalDomain, h: f64) -> Result<()> {
    let n = domain.len();
    let v = domain.vertices();
    let mut arc = vec![0.0; n + 1];
    for i in 0..n {
        arc[i + 1] = arc[i] + v[i].dist(v[(i + 1) % n]);
    }
    let perimeter = arc[n];
    let reach = 2.0 * h;
    for i in 0..n {
        let (a, b) = domain.edge(i);
        for j in i + 2..n {
            if i == 0 && j == n - 1 {
                continue;
            }
            let (c, d) = domain.edge(j);
            if a.x.min(b.x) > c.x.max(d.x) + reach
                || c.x.min(d.x) > a.x.max(b.x) + reach
                || a.y.min(b.y) > c.y.max(d.y) + reach
                || c.y.min(d.y) > a.y.max(b.y) + reach
            {
                continue;
            }
            if segment_distance(a, b, c, d) >= reach {
                continue;
            }
            // Endpoint-to-segment pairs, each with its own arclength gap.
            let (li, lj) = (arc[i + 1] - arc[i], arc[j + 1] - arc[j]);
            let candidates = [
                (a, arc[i], c, d, arc[j], lj),
                (b, arc[i + 1], c, d, arc[j], lj),
                (c, arc[j], a, b, arc[i], li),
                (d, arc[j + 1], a, b, arc[i], li),
            ];
            for (p, sp, e0, e1, s0, len) in candidates {
                let (q, t) = project_on_segment(p, e0, e1);
                let dist = p.dist(q);
                let along = (sp - (s0 + t * len)).abs();
                let gap = along.min(perimeter - along);
                if dist < reach && dist < gap / 2.0 {
                    return Err(Error::Mesh(format!(
                        "domain feature thinner than 2h = {reach}: edge {i} and edge {j} are {dist} apart"
                    )));
                }
            }
        }
    }
    Ok(())
}

fn signed_area(pts: &[Point], t: &[usize; 3]) -> f64 {
    0.5 * (pts[t[1]] - pts[t[0]]).cross(pts[t[2]] - pts[t[0]])
}

fn centroid(v: [Point; 3]) -> Point {
    Point::new((v[0].x + v[1].x + v[2].x) / 3.0, (v[0].y + v[1].y + v[2].y) / 3.0)
}

fn edge_count_map(triangles: &[[usize; 3]]) -> HashMap<(usize, usize), usize> {
    let mut counts = HashMap::new();
    for t in triangles {
        for k in 0..3 {
            *counts.entry(edge_key(t[k], t[(k + 1) % 3])).or_insert(0) += 1;
        }
    }
    counts
}

/// Drops or collapses triangles below the minimum angle. A sliver made only of
/// boundary vertices is dropped; otherwise its shortest edge is collapsed when
/// that leaves every neighbouring triangle positive.
fn remove_slivers(points: &mut [Point], triangles: &mut Vec<[usize; 3]>, boundary: &[bool], area_floor: f64) {
    let floor = MIN_ANGLE_DEG.to_radians();
    for _ in 0..SLIVER_PASSES {
        let mut star: Vec<Vec<usize>> = vec![Vec::new(); points.len()];
        for (t, tri) in triangles.iter().enumerate() {
            for &v in tri {
                star[v].push(t);
            }
        }
        let mut dead = vec![false; triangles.len()];
        let mut touched = vec![false; points.len()];
        let mut redirect: Vec<usize> = (0..points.len()).collect();
        let mut changed = false;
        for t in 0..triangles.len() {
            let tri = triangles[t];
            if dead[t] || tri.iter().any(|&v| touched[v]) {
                continue;
            }
            let v = tri.map(|k| points[k]);
            if min_angle(v) >= floor {
                continue;
            }
            if tri.iter().all(|&k| boundary[k]) {
                dead[t] = true;
                changed = true;
                continue;
            }
            let k = (0..3)
                .min_by(|&x, &y| {
                    let lx = v[x].dist(v[(x + 1) % 3]);
                    let ly = v[y].dist(v[(y + 1) % 3]);
                    lx.total_cmp(&ly)
                })
                .unwrap();
            let (mut keep, mut gone) = (tri[k], tri[(k + 1) % 3]);
            if boundary[gone] && !boundary[keep] {
                std::mem::swap(&mut keep, &mut gone);
            }
            let target = if boundary[keep] || boundary[gone] {
                points[keep]
            } else {
                points[keep].lerp(points[gone], 0.5)
            };
            let moved = |i: usize| if i == keep || i == gone { target } else { points[i] };
            let ok = star[keep].iter().chain(&star[gone]).all(|&s| {
                let q = triangles[s];
                if dead[s] || (q.contains(&keep) && q.contains(&gone)) {
                    return true;
                }
                let p = q.map(moved);
                0.5 * (p[1] - p[0]).cross(p[2] - p[0]) > area_floor
            });
            if !ok {
                continue;
            }
            for &s in star[keep].iter().chain(&star[gone]) {
                if triangles[s].contains(&keep) && triangles[s].contains(&gone) {
                    dead[s] = true;
                }
                for &w in &triangles[s] {
                    touched[w] = true;
                }
            }
            points[keep] = target;
            redirect[gone] = keep;
            changed = true;
        }
        let mut next = Vec::with_capacity(triangles.len());
        for (t, tri) in triangles.iter().enumerate() {
            if !dead[t] {
                next.push(tri.map(|k| redirect[k]));
            }
        }
        *triangles = next;
        if !changed {
            break;
        }
    }
}

/// Inserts re-entrant polygon vertices that a boundary chord passes over.
///
/// Such a vertex lies inside the triangle on that chord; splitting the
/// triangle at the vertex drops the sliver outside the domain.
fn recover_reflex_vertices(
    domain: &PolygonalDomain,
    points: &mut Vec<Point>,
    triangles: &mut Vec<[usize; 3]>,
    boundary: &mut Vec<bool>,
    tol: f64,
) {
    let mut counts = edge_count_map(triangles);
    for i in 0..domain.len() {
        if domain.turning_angle(i) >= 0.0 {
            continue;
        }
        let v = domain.vertices()[i];
        let hit = triangles.iter().position(|t| {
            let [a, b, c] = t.map(|k| points[k]);
            let area = (b - a).cross(c - a);
            let w = [(b - v).cross(c - v), (c - v).cross(a - v), (a - v).cross(b - v)];
            w.iter().all(|&x| x > 1e-12 * area) && [a, b, c].iter().all(|p| p.dist(v) > tol)
        });
        let Some(t) = hit else { continue };
        let tri = triangles[t];
        let edge = (0..3)
            .filter(|&k| counts.get(&edge_key(tri[k], tri[(k + 1) % 3])) == Some(&1))
            .min_by(|&x, &y| {
                let d = |k: usize| segment_distance(v, v, points[tri[k]], points[tri[(k + 1) % 3]]);
                d(x).total_cmp(&d(y))
            });
        let Some(k) = edge else { continue };
        let (a, b, c) = (tri[k], tri[(k + 1) % 3], tri[(k + 2) % 3]);
        let id = points.len();
        points.push(v);
        boundary.push(true);
        triangles[t] = [a, id, c];
        triangles.push([id, b, c]);
        counts.remove(&edge_key(a, b));
        counts.insert(edge_key(a, id), 1);
        counts.insert(edge_key(id, b), 1);
        counts.insert(edge_key(id, c), 2);
    }
}

fn merge_coincident(points: &mut [Point], triangles: &mut [[usize; 3]], boundary: &mut [bool], tol: f64) {
    if coincident_pair(points, tol).is_none() {
        return;
    }
    let mut order: Vec<usize> = (0..points.len()).collect();
    order.sort_by(|&a, &b| points[a].x.total_cmp(&points[b].x).then(a.cmp(&b)));
    let mut redirect: Vec<usize> = (0..points.len()).collect();
    for (k, &i) in order.iter().enumerate() {
        if redirect[i] != i {
            continue;
        }
        for &j in &order[k + 1..] {
            if points[j].x - points[i].x > tol {
                break;
            }
            if redirect[j] == j && points[i].dist(points[j]) <= tol {
                let (keep, gone) = (i.min(j), i.max(j));
                redirect[gone] = keep;
                boundary[keep] |= boundary[gone];
            }
        }
    }
    for t in triangles.iter_mut() {
        *t = t.map(|v| redirect[v]);
    }
}

fn compact(points: Vec<Point>, triangles: Vec<[usize; 3]>, boundary: Vec<bool>) -> (Vec<Point>, Vec<[usize; 3]>, Vec<bool>) {
    let mut used = vec![false; points.len()];
    for t in &triangles {
        for &v in t {
            used[v] = true;
        }
    }
    let mut map = vec![usize::MAX; points.len()];
    let mut new_points = Vec::new();
    let mut new_boundary = Vec::new();
    for (i, &u) in used.iter().enumerate() {
        if u {
            map[i] = new_points.len();
            new_points.push(points[i]);
            new_boundary.push(boundary[i]);
        }
    }
    let triangles = triangles.into_iter().map(|t| t.map(|v| map[v])).collect();
    (new_points, triangles, new_boundary)
}
