use std::sync::Arc;

use rayon::prelude::*;
use serde::Serialize;

use crate::mesh::TriMesh;
use crate::point::Point;
use crate::sum::det_dot;
use crate::{Error, Result};

use super::quad::integrate_triangle;
use super::sparse::{conjugate_gradient, CsrMatrix};
use super::{ScalarField, SourceTerm};

/// Largest relative gap tolerated between `∫|∇u|²` and `∫ f u` before a warning.
const ENERGY_IDENTITY_TOL: f64 = 1e-6;

#[derive(Clone, Debug)]
pub struct SolveOptions {
    pub rel_tol: f64,
    pub max_iterations: usize,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions { rel_tol: 1e-10, max_iterations: 10_000 }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct SolveStats {
    pub unknowns: usize,
    pub nonzeros: usize,
    pub iterations: usize,
    pub relative_residual: f64,
    /// `∫ |∇u|^2`.
    pub energy: f64,
    /// `∫ f u` (discrete load times solution).
    pub work: f64,
    /// `|energy - work| / energy`, zero when both vanish.
    pub energy_gap: f64,
    pub warnings: Vec<String>,
}

#[derive(Clone, Debug)]
pub struct Solution {
    pub field: ScalarField,
    pub stats: SolveStats,
    /// Source actually used (a singular centre on a vertex is nudged).
    pub source: SourceTerm,
}

impl Solution {
    pub fn run_log_json(&self) -> String {
        serde_json::to_string_pretty(&self.stats).expect("stats serialise")
    }
}

pub fn solve_poisson(mesh: Arc<TriMesh>, f: &SourceTerm, rel_tol: f64) -> Result<Solution> {
    solve_poisson_with(mesh, f, &SolveOptions { rel_tol, ..Default::default() })
}

pub fn solve_poisson_with(mesh: Arc<TriMesh>, f: &SourceTerm, opts: &SolveOptions) -> Result<Solution> {
    if !(1e-14..=1e-6).contains(&opts.rel_tol) {
        return Err(Error::invalid(format!("rel_tol {} outside [1e-14, 1e-6]", opts.rel_tol)));
    }
    let mut warnings = Vec::new();
    let f = nudge_off_vertices(&mesh, f, &mut warnings);

    // Free vertices are numbered in mesh order.
    let n_pts = mesh.num_points();
    let mut dof = vec![usize::MAX; n_pts];
    let mut n_free = 0;
    for (i, &b) in mesh.is_boundary().iter().enumerate() {
        if !b {
            dof[i] = n_free;
            n_free += 1;
        }
    }

    let tris = mesh.triangles();
    let singular = f.singularity().map(|s| (s, 3.0 * mesh.h()));
    let local: Vec<([[f64; 3]; 3], [f64; 3])> = (0..tris.len())
        .into_par_iter()
        .map(|t| element(&mesh.vertices_of(t), &f, singular))
        .collect();

    let mut pattern: Vec<Vec<usize>> = vec![Vec::new(); n_free];
    for t in tris {
        for &a in t {
            if dof[a] == usize::MAX {
                continue;
            }
            for &b in t {
                if dof[b] != usize::MAX {
                    pattern[dof[a]].push(dof[b]);
                }
            }
        }
    }
    let mut k = CsrMatrix::from_pattern(pattern);
    let mut load = vec![0.0; n_free];
    let mut full_load = vec![0.0; n_pts];
    for (t, (ke, fe)) in tris.iter().zip(&local) {
        for i in 0..3 {
            full_load[t[i]] += fe[i];
            let di = dof[t[i]];
            if di == usize::MAX {
                continue;
            }
            load[di] += fe[i];
            for j in 0..3 {
                let dj = dof[t[j]];
                if dj != usize::MAX {
                    k.add(di, dj, ke[i][j]);
                }
            }
        }
    }

    let (x, outcome) = conjugate_gradient(&k, &load, opts.rel_tol, opts.max_iterations)?;
    let mut values = vec![0.0; n_pts];
    for i in 0..n_pts {
        if dof[i] != usize::MAX {
            values[i] = x[dof[i]];
        }
    }
    let field = ScalarField::new(mesh.clone(), values)?;
    let energy = field.dirichlet_energy();
    let work = det_dot(&full_load, field.values());
    let energy_gap = if energy > 0.0 { (energy - work).abs() / energy } else { work.abs() };
    if energy_gap > ENERGY_IDENTITY_TOL {
        warnings.push(format!("energy identity gap {energy_gap:.3e} exceeds {ENERGY_IDENTITY_TOL:e}"));
    }
    let stats = SolveStats {
        unknowns: n_free,
        nonzeros: k.nnz(),
        iterations: outcome.iterations,
        relative_residual: outcome.relative_residual,
        energy,
        work,
        energy_gap,
        warnings,
    };
    Ok(Solution { field, stats, source: f })
}

/// Local stiffness matrix and load vector of one triangle.
fn element(v: &[Point; 3], f: &SourceTerm, singular: Option<(Point, f64)>) -> ([[f64; 3]; 3], [f64; 3]) {
    let det = (v[1] - v[0]).cross(v[2] - v[0]);
    let area = 0.5 * det;
    // Gradient of the barycentric coordinate of vertex i.
    let g = [0, 1, 2].map(|i| {
        let a = v[(i + 1) % 3];
        let b = v[(i + 2) % 3];
        Point::new(a.y - b.y, b.x - a.x) * (1.0 / det)
    });
    let mut ke = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            ke[i][j] = area * g[i].dot(g[j]);
        }
    }
    let mut fe = [0.0; 3];
    if !f.is_zero() {
        for (i, slot) in fe.iter_mut().enumerate() {
            *slot = integrate_triangle(v, &|p, l| f.eval(p) * l[i], singular);
        }
    }
    (ke, fe)
}

/// Moves a singular source centre that sits on a mesh vertex by `1e-6 h`.
fn nudge_off_vertices(mesh: &TriMesh, f: &SourceTerm, warnings: &mut Vec<String>) -> SourceTerm {
    let Some(s) = f.singularity() else { return f.clone() };
    let tol = 1e-12 * mesh.h();
    if let Some(i) = mesh.points().iter().position(|p| p.dist(s) <= tol) {
        let shift = 1e-6 * mesh.h();
        let moved = s + Point::new(shift, shift * 0.5);
        warnings.push(format!(
            "singular source centre coincides with vertex {i}; moved by {shift:e} to ({}, {})",
            moved.x, moved.y
        ));
        return f.with_center(moved);
    }
    f.clone()
}
