use std::fmt::Write as _;
use std::sync::Arc;

use crate::mesh::TriMesh;
use crate::point::Point;
use crate::sum::det_sum_by;
use crate::{Error, Result};

use super::quad::integrate_triangle;

/// Nodal values of a P1 function on a shared mesh.
#[derive(Clone, Debug)]
pub struct ScalarField {
    mesh: Arc<TriMesh>,
    values: Vec<f64>,
}

impl ScalarField {
    pub fn new(mesh: Arc<TriMesh>, values: Vec<f64>) -> Result<Self> {
        if values.len() != mesh.num_points() {
            return Err(Error::invalid(format!(
                "{} values for a mesh with {} points",
                values.len(),
                mesh.num_points()
            )));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::invalid(format!("value at vertex {i} is not finite")));
        }
        Ok(ScalarField { mesh, values })
    }

    pub fn zeros(mesh: Arc<TriMesh>) -> Self {
        let n = mesh.num_points();
        ScalarField { mesh, values: vec![0.0; n] }
    }

    /// Nodal interpolant of `f`.
    pub fn interpolate(mesh: Arc<TriMesh>, f: impl Fn(Point) -> f64) -> Result<Self> {
        let values = mesh.points().iter().map(|&p| f(p)).collect();
        Self::new(mesh, values)
    }

    pub fn mesh(&self) -> &TriMesh {
        &self.mesh
    }

    pub fn mesh_arc(&self) -> &Arc<TriMesh> {
        &self.mesh
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Constant gradient on triangle `t`.
    pub fn gradient(&self, t: usize) -> Point {
        let [a, b, c] = self.mesh.triangles()[t];
        let pts = self.mesh.points();
        let (pa, pb, pc) = (pts[a], pts[b], pts[c]);
        let det = (pb - pa).cross(pc - pa);
        let (ua, ub, uc) = (self.values[a], self.values[b], self.values[c]);
        // Cramer's rule on g·(pb - pa) = ub - ua, g·(pc - pa) = uc - ua.
        let gx = ((ub - ua) * (pc.y - pa.y) - (uc - ua) * (pb.y - pa.y)) / det;
        let gy = ((uc - ua) * (pb.x - pa.x) - (ub - ua) * (pc.x - pa.x)) / det;
        Point::new(gx, gy)
    }

    /// Value of the linear piece on triangle `t` at `p` (extrapolated if `p` is outside `t`).
    pub fn value_in(&self, t: usize, p: Point) -> f64 {
        let a = self.mesh.triangles()[t][0];
        self.values[a] + self.gradient(t).dot(p - self.mesh.points()[a])
    }

    /// Per-triangle gradients.
    pub fn gradient_field(&self) -> Vec<Point> {
        (0..self.mesh.num_triangles()).map(|t| self.gradient(t)).collect()
    }

    /// `∫ |∇u|^2 = Σ area · |g_T|^2`.
    pub fn dirichlet_energy(&self) -> f64 {
        det_sum_by(self.mesh.num_triangles(), |t| self.mesh.triangle_area(t) * self.gradient(t).norm_sq())
    }

    /// Value at `p`, or `None` off the mesh.
    pub fn eval(&self, p: Point) -> Option<f64> {
        self.eval_with_gradient(p).map(|(u, _)| u)
    }

    /// Value extended by zero off the mesh.
    pub fn eval_or_zero(&self, p: Point) -> f64 {
        self.eval(p).unwrap_or(0.0)
    }

    pub fn eval_with_gradient(&self, p: Point) -> Option<(f64, Point)> {
        let (t, l) = self.mesh.locator().locate(&self.mesh, p)?;
        let [a, b, c] = self.mesh.triangles()[t];
        let u = l[0] * self.values[a] + l[1] * self.values[b] + l[2] * self.values[c];
        Some((u, self.gradient(t)))
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn min_value(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// Largest `|u|` over boundary-flagged vertices.
    pub fn boundary_max_abs(&self) -> f64 {
        self.values
            .iter()
            .zip(self.mesh.is_boundary())
            .filter(|(_, &b)| b)
            .fold(0.0, |m, (v, _)| m.max(v.abs()))
    }

    /// `‖u‖_{L^p}` by the interior triangle rule; `p = ∞` is the nodal maximum.
    pub fn lp_norm(&self, p: f64) -> f64 {
        if p.is_infinite() {
            return self.max_abs();
        }
        let tris = self.mesh.triangles();
        let total = det_sum_by(tris.len(), |t| {
            let [a, b, c] = tris[t];
            let v = self.mesh.vertices_of(t);
            integrate_triangle(
                &v,
                &|_, l| (l[0] * self.values[a] + l[1] * self.values[b] + l[2] * self.values[c]).abs().powf(p),
                None,
            )
        });
        total.powf(1.0 / p)
    }

    /// `∫ u` exactly (P1 mean over each triangle).
    pub fn integral(&self) -> f64 {
        let tris = self.mesh.triangles();
        det_sum_by(tris.len(), |t| {
            let [a, b, c] = tris[t];
            self.mesh.triangle_area(t) * (self.values[a] + self.values[b] + self.values[c]) / 3.0
        })
    }

    /// Applies `f` to every nodal value.
    pub fn map(&self, f: impl Fn(f64) -> f64) -> Result<Self> {
        Self::new(self.mesh.clone(), self.values.iter().map(|&v| f(v)).collect())
    }

    /// CSV with header `vertex,x,y,u`.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("vertex,x,y,u\n");
        for (i, (p, u)) in self.mesh.points().iter().zip(&self.values).enumerate() {
            let _ = writeln!(s, "{i},{},{},{u}", p.x, p.y);
        }
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::PolygonalDomain;
    use crate::mesh::triangulate;

    fn square() -> Arc<TriMesh> {
        Arc::new(triangulate(&PolygonalDomain::unit_square(), 0.1).unwrap())
    }

    #[test]
    fn affine_gradients_are_exact() {
        let m = square();
        let u = ScalarField::interpolate(m, |p| 1.0 + 2.0 * p.x - 3.0 * p.y).unwrap();
        for g in u.gradient_field() {
            assert!((g.x - 2.0).abs() < 1e-10 && (g.y + 3.0).abs() < 1e-10);
        }
        assert!((u.dirichlet_energy() - 13.0).abs() < 1e-9);
        let v = u.eval(Point::new(0.31, 0.47)).unwrap();
        assert!((v - (1.0 + 0.62 - 1.41)).abs() < 1e-12);
    }

    #[test]
    fn zero_field() {
        let u = ScalarField::zeros(square());
        assert!(u.gradient_field().iter().all(|g| g.norm() == 0.0));
        assert_eq!(u.dirichlet_energy(), 0.0);
    }

    #[test]
    fn rejects_non_finite() {
        let m = square();
        let mut v = vec![0.0; m.num_points()];
        v[3] = f64::NAN;
        assert!(ScalarField::new(m, v).is_err());
    }

    #[test]
    fn norms_of_constant() {
        let u = ScalarField::interpolate(square(), |_| 2.0).unwrap();
        assert!((u.lp_norm(2.0) - 2.0).abs() < 1e-12);
        assert!((u.integral() - 2.0).abs() < 1e-12);
    }
}
