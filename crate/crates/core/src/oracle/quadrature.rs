use crate::point::Point;

/// Adaptive Simpson rule with absolute tolerance `tol`.
pub fn adaptive_simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64, max_depth: u32) -> f64 {
    if a == b {
        return 0.0;
    }
    let m = 0.5 * (a + b);
    let (fa, fm, fb) = (f(a), f(m), f(b));
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    simpson_step(f, a, b, fa, fm, fb, whole, tol, max_depth)
}

#[allow(clippy::too_many_arguments)]
fn simpson_step(f: &dyn Fn(f64) -> f64, a: f64, b: f64, fa: f64, fm: f64, fb: f64, whole: f64, tol: f64, depth: u32) -> f64 {
    let m = 0.5 * (a + b);
    let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
    let (flm, frm) = (f(lm), f(rm));
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    // Below a few ulps of the panel value the refinement only chases roundoff.
    let tol = tol.max(4.0 * f64::EPSILON * (left + right).abs());
    if depth == 0 || delta.abs() <= 15.0 * tol {
        return left + right + delta / 15.0;
    }
    simpson_step(f, a, m, fa, flm, fm, left, tol / 2.0, depth - 1)
        + simpson_step(f, m, b, fm, frm, fb, right, tol / 2.0, depth - 1)
}

/// `B(center, radius) ∩ Ω`, with `Ω` given by a membership test.
pub struct BallRegion<'a> {
    pub center: Point,
    pub radius: f64,
    pub inside: Option<&'a (dyn Fn(Point) -> bool + Sync)>,
}

impl BallRegion<'_> {
    fn contains(&self, p: Point) -> bool {
        p.dist(self.center) < self.radius && self.inside.map_or(true, |f| f(p))
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QuadratureEstimate {
    pub value: f64,
    /// `|I(depth) - I(depth - 1)|`.
    pub error: f64,
    /// Whether the error shrank from `depth - 1` to `depth`.
    pub converged: bool,
}

/// Quadtree quadrature over the bounding square of the ball. Cells wholly in
/// the region use a 3x3 Gauss rule and split while one-versus-four disagree;
/// cells cut by the region boundary split down to `depth` and are then sampled
/// on an 8x8 midpoint grid with the indicator.
pub fn brute_quadrature(f: &(dyn Fn(Point) -> f64 + Sync), region: &BallRegion<'_>, depth: u32) -> QuadratureEstimate {
    let depth = depth.max(3);
    let i2 = quadtree(f, region, depth - 2);
    let i1 = quadtree(f, region, depth - 1);
    let i0 = quadtree(f, region, depth);
    let error = (i0 - i1).abs();
    QuadratureEstimate { value: i0, error, converged: error <= (i1 - i2).abs() || error <= 1e-12 * i0.abs().max(1.0) }
}

fn quadtree(f: &(dyn Fn(Point) -> f64 + Sync), region: &BallRegion<'_>, depth: u32) -> f64 {
    let r = region.radius;
    let lo = region.center - Point::new(r, r);
    let tol = 1e-10 * (4.0 * r * r);
    cell(f, region, lo, 2.0 * r, depth, tol)
}

const GAUSS3: [(f64, f64); 3] = [(-0.774_596_669_241_483_4, 5.0 / 9.0), (0.0, 8.0 / 9.0), (0.774_596_669_241_483_4, 5.0 / 9.0)];

fn gauss(f: &(dyn Fn(Point) -> f64 + Sync), lo: Point, size: f64) -> f64 {
    let half = 0.5 * size;
    let c = lo + Point::new(half, half);
    let mut acc = 0.0;
    for (xi, wi) in GAUSS3 {
        for (yj, wj) in GAUSS3 {
            acc += wi * wj * f(c + Point::new(xi * half, yj * half));
        }
    }
    acc * half * half
}

/// Midpoint samples per side in a leaf cut by the region boundary.
const LEAF_SAMPLES: usize = 8;

fn cell(f: &(dyn Fn(Point) -> f64 + Sync), region: &BallRegion<'_>, lo: Point, size: f64, depth: u32, tol: f64) -> f64 {
    // Classify by a 5x5 probe lattice including the corners.
    let mut hits = 0;
    for i in 0..5 {
        for j in 0..5 {
            let p = lo + Point::new(size * i as f64 / 4.0, size * j as f64 / 4.0);
            if region.contains(p) {
                hits += 1;
            }
        }
    }
    let nearest = Point::new(
        region.center.x.clamp(lo.x, lo.x + size),
        region.center.y.clamp(lo.y, lo.y + size),
    );
    if hits == 0 && nearest.dist(region.center) >= region.radius {
        return 0.0;
    }
    let half = 0.5 * size;
    let kids = [lo, lo + Point::new(half, 0.0), lo + Point::new(0.0, half), lo + Point::new(half, half)];
    if hits == 25 {
        let one = gauss(f, lo, size);
        let four: f64 = kids.iter().map(|&k| gauss(f, k, half)).sum();
        if depth == 0 || (one - four).abs() <= tol {
            return four;
        }
        return kids.iter().map(|&k| cell(f, region, k, half, depth - 1, tol / 4.0)).sum();
    }
    if depth == 0 {
        let step = size / LEAF_SAMPLES as f64;
        let mut acc = 0.0;
        for i in 0..LEAF_SAMPLES {
            for j in 0..LEAF_SAMPLES {
                let p = lo + Point::new(step * (i as f64 + 0.5), step * (j as f64 + 0.5));
                if region.contains(p) {
                    acc += f(p);
                }
            }
        }
        return acc * step * step;
    }
    kids.iter().map(|&k| cell(f, region, k, half, depth - 1, tol / 4.0)).sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn simpson_polynomial() {
        let v = adaptive_simpson(&|x| x * x * x, 0.0, 2.0, 1e-12, 20);
        assert!((v - 4.0).abs() < 1e-12);
    }

    #[test]
    fn unit_disk_area() {
        let ball = BallRegion { center: Point::ORIGIN, radius: 1.0, inside: None };
        let q = brute_quadrature(&|_| 1.0, &ball, 8);
        assert!((q.value - PI).abs() < 1e-4, "{}", q.value);
    }

    #[test]
    fn singular_weight() {
        let ball = BallRegion { center: Point::ORIGIN, radius: 1.0, inside: None };
        let q = brute_quadrature(&|p: Point| p.norm().powf(-0.5), &ball, 8);
        assert!((q.value - 4.0 * PI / 3.0).abs() < 1e-3, "{}", q.value);
    }

    #[test]
    fn half_disk_through_membership() {
        let upper = |p: Point| p.y > 0.0;
        let ball = BallRegion { center: Point::ORIGIN, radius: 1.0, inside: Some(&upper) };
        let q = brute_quadrature(&|_| 1.0, &ball, 8);
        assert!((q.value - PI / 2.0).abs() < 1e-4, "{}", q.value);
    }
}
