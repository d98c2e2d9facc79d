//! Triangle quadrature shared by assembly and the integral functionals.

use rayon::prelude::*;

use crate::mesh::TriMesh;
use crate::point::Point;

/// Degree-2 interior rule: barycentric points and weights (weights sum to 1).
pub const TRI_RULE: [([f64; 3], f64); 3] = [
    ([2.0 / 3.0, 1.0 / 6.0, 1.0 / 6.0], 1.0 / 3.0),
    ([1.0 / 6.0, 2.0 / 3.0, 1.0 / 6.0], 1.0 / 3.0),
    ([1.0 / 6.0, 1.0 / 6.0, 2.0 / 3.0], 1.0 / 3.0),
];

/// Subdivision depth for triangles within `3h` of a singular source.
pub(crate) const SINGULAR_DEPTH: usize = 2;
/// Extra grading for the triangle that holds the singular point.
pub(crate) const SINGULAR_CORE_DEPTH: usize = 10;

pub(crate) fn bary_point(v: &[Point; 3], l: &[f64; 3]) -> Point {
    Point::new(
        l[0] * v[0].x + l[1] * v[1].x + l[2] * v[2].x,
        l[0] * v[0].y + l[1] * v[1].y + l[2] * v[2].y,
    )
}

pub(crate) fn area(v: &[Point; 3]) -> f64 {
    0.5 * (v[1] - v[0]).cross(v[2] - v[0])
}

/// `∫_T g` where `g` receives the point and its barycentric coordinates in `T`.
/// Near `singular` the triangle is split into four, `depth` times, and the
/// piece holding the singular point is graded further.
pub(crate) fn integrate_triangle<G>(v: &[Point; 3], g: &G, singular: Option<(Point, f64)>) -> f64
where
    G: Fn(Point, [f64; 3]) -> f64,
{
    let root = [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]];
    match singular {
        Some((s, reach)) if distance_to(v, s) <= reach => {
            sub_integrate(v, &root, g, s, SINGULAR_DEPTH, area(v))
        }
        _ => rule(v, &root, g, area(v)),
    }
}

fn rule<G: Fn(Point, [f64; 3]) -> f64>(v: &[Point; 3], sub: &[[f64; 3]; 3], g: &G, sub_area: f64) -> f64 {
    let mut acc = 0.0;
    for (l, w) in TRI_RULE.iter() {
        let mut b = [0.0; 3];
        for k in 0..3 {
            b[k] = l[0] * sub[0][k] + l[1] * sub[1][k] + l[2] * sub[2][k];
        }
        acc += w * g(bary_point(v, &b), b);
    }
    acc * sub_area
}

fn split(sub: &[[f64; 3]; 3]) -> [[[f64; 3]; 3]; 4] {
    let mid = |a: usize, b: usize| [0, 1, 2].map(|k| 0.5 * (sub[a][k] + sub[b][k]));
    let (m01, m12, m20) = (mid(0, 1), mid(1, 2), mid(2, 0));
    [[sub[0], m01, m20], [m01, sub[1], m12], [m20, m12, sub[2]], [m01, m12, m20]]
}

fn corners(v: &[Point; 3], sub: &[[f64; 3]; 3]) -> [Point; 3] {
    [bary_point(v, &sub[0]), bary_point(v, &sub[1]), bary_point(v, &sub[2])]
}

/// Uniform split `depth` times; the leaf holding `s` is then graded.
fn sub_integrate<G: Fn(Point, [f64; 3]) -> f64>(
    v: &[Point; 3],
    sub: &[[f64; 3]; 3],
    g: &G,
    s: Point,
    depth: usize,
    sub_area: f64,
) -> f64 {
    if depth == 0 {
        return if contains(&corners(v, sub), s) {
            graded(v, sub, g, s, SINGULAR_CORE_DEPTH, sub_area)
        } else {
            rule(v, sub, g, sub_area)
        };
    }
    split(sub).iter().map(|c| sub_integrate(v, c, g, s, depth - 1, sub_area / 4.0)).sum()
}

/// Splits only the piece holding `s`, `depth` more times.
fn graded<G: Fn(Point, [f64; 3]) -> f64>(
    v: &[Point; 3],
    sub: &[[f64; 3]; 3],
    g: &G,
    s: Point,
    depth: usize,
    sub_area: f64,
) -> f64 {
    if depth == 0 {
        return rule(v, sub, g, sub_area);
    }
    let mut acc = 0.0;
    let mut descended = false;
    for c in &split(sub) {
        if !descended && contains(&corners(v, c), s) {
            descended = true;
            acc += graded(v, c, g, s, depth - 1, sub_area / 4.0);
        } else {
            acc += rule(v, c, g, sub_area / 4.0);
        }
    }
    acc
}

fn contains(v: &[Point; 3], p: Point) -> bool {
    let d = (v[1] - v[0]).cross(v[2] - v[0]);
    let l1 = (p - v[0]).cross(v[2] - v[0]) / d;
    let l2 = (v[1] - v[0]).cross(p - v[0]) / d;
    l1 >= 0.0 && l2 >= 0.0 && l1 + l2 <= 1.0
}

pub(crate) fn distance_to(v: &[Point; 3], p: Point) -> f64 {
    if contains(v, p) {
        return 0.0;
    }
    (0..3)
        .map(|k| crate::point::dist_to_segment(p, v[k], v[(k + 1) % 3]))
        .fold(f64::INFINITY, f64::min)
}

/// `∫_mesh g` with per-triangle quadrature and a deterministic reduction.
pub fn integrate_over_mesh<G>(mesh: &TriMesh, g: G, singular: Option<Point>) -> f64
where
    G: Fn(usize, Point, [f64; 3]) -> f64 + Sync,
{
    let reach = 3.0 * mesh.h();
    let per: Vec<f64> = (0..mesh.num_triangles())
        .into_par_iter()
        .map(|t| {
            let v = mesh.vertices_of(t);
            integrate_triangle(&v, &|p, l| g(t, p, l), singular.map(|s| (s, reach)))
        })
        .collect();
    crate::sum::det_sum(&per)
}
