//! C ABI for `reiflab`.
//!
//! Objects cross the boundary as opaque heap handles created by `*_new`/`*_build`
//! style functions and released with the matching `*_free`. Every fallible call
//! returns a [`ReiflabStatus`]; on failure the message is kept per thread and
//! can be read with [`reiflab_last_error`]. Panics are caught at the boundary
//! and reported as [`ReiflabStatus::Panic`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::sync::Arc;

use reiflab::analysis::{holder_exponent_fit, RegionSpec};
use reiflab::eigen::{cap_eigenvalue, flatness_threshold};
use reiflab::fem::{solve_poisson, Solution, SourceTerm};
use reiflab::geometry::{estimate_flatness, generate_flat_fractal, PolygonalDomain};
use reiflab::mesh::{triangulate, TriMesh};
use reiflab::pipeline::{run_pipeline, Config, Pipeline};
use reiflab::{Error, Point};

/// Result codes of every fallible call.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ReiflabStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    InvalidDomain = 3,
    Resolution = 4,
    Mesh = 5,
    Convergence = 6,
    UnderResolved = 7,
    Parse = 8,
    CheckFailed = 9,
    Io = 10,
    Utf8 = 11,
    Panic = 12,
}

impl From<&Error> for ReiflabStatus {
    fn from(e: &Error) -> Self {
        match e {
            Error::InvalidArgument(_) => ReiflabStatus::InvalidArgument,
            Error::InvalidDomain(_) | Error::NonSimple { .. } => ReiflabStatus::InvalidDomain,
            Error::Resolution(_) => ReiflabStatus::Resolution,
            Error::Mesh(_) => ReiflabStatus::Mesh,
            Error::Convergence { .. } => ReiflabStatus::Convergence,
            Error::UnderResolved(_) => ReiflabStatus::UnderResolved,
            Error::Parse(_) | Error::Json(_) => ReiflabStatus::Parse,
            Error::CheckFailed(_) => ReiflabStatus::CheckFailed,
            Error::Io(_) => ReiflabStatus::Io,
        }
    }
}

/// Polygonal domain handle.
pub struct ReiflabDomain {
    inner: PolygonalDomain,
}

/// Triangulation handle.
pub struct ReiflabMesh {
    inner: Arc<TriMesh>,
}

/// Finite element solution handle.
pub struct ReiflabSolution {
    inner: Solution,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).expect("nul bytes removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

struct Failure(ReiflabStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure((&e).into(), e.to_string())
    }
}

fn null(what: &str) -> Failure {
    Failure(ReiflabStatus::NullPointer, format!("{what} is null"))
}

/// Runs `f`, converting errors and panics into status codes.
fn guard(f: impl FnOnce() -> Result<(), Failure>) -> ReiflabStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => ReiflabStatus::Ok,
        Ok(Err(Failure(code, msg))) => {
            set_error(msg);
            code
        }
        Err(_) => {
            set_error("panic inside reiflab".into());
            ReiflabStatus::Panic
        }
    }
}

unsafe fn out<'a, T>(p: *mut T, what: &str) -> Result<&'a mut T, Failure> {
    p.as_mut().ok_or_else(|| null(what))
}

unsafe fn str_arg<'a>(p: *const c_char, what: &str) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p).to_str().map_err(|_| Failure(ReiflabStatus::Utf8, format!("{what} is not UTF-8")))
}

/// Copies the last error message of this thread into `buf` (NUL-terminated,
/// truncated to `len`) and returns the full message length, or 0 if none.
///
/// # Safety
/// `buf` must be null or point to `len` writable bytes.
#[no_mangle]
pub unsafe extern "C" fn reiflab_last_error(buf: *mut c_char, len: usize) -> usize {
    LAST_ERROR.with(|e| {
        let e = e.borrow();
        let Some(msg) = e.as_ref() else { return 0 };
        let bytes = msg.as_bytes();
        if !buf.is_null() && len > 0 {
            let n = bytes.len().min(len - 1);
            std::ptr::copy_nonoverlapping(bytes.as_ptr(), buf.cast::<u8>(), n);
            *buf.add(n) = 0;
        }
        bytes.len()
    })
}

/// Domain from `n` counter-clockwise vertices stored as `x0, y0, x1, y1, ...`.
///
/// # Safety
/// `xy` must point to `2 n` doubles; `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn reiflab_domain_from_vertices(
    xy: *const f64,
    n: usize,
    r0: f64,
    out_domain: *mut *mut ReiflabDomain,
) -> ReiflabStatus {
    guard(|| {
        let slot = out(out_domain, "out_domain")?;
        if xy.is_null() {
            return Err(null("xy"));
        }
        let flat = std::slice::from_raw_parts(xy, 2 * n);
        let verts = flat.chunks_exact(2).map(|c| Point::new(c[0], c[1])).collect();
        let d = PolygonalDomain::new(verts, r0, Default::default())?;
        *slot = Box::into_raw(Box::new(ReiflabDomain { inner: d }));
        Ok(())
    })
}

/// Koch-type refinement of a regular `sides`-gon of circumradius `radius`.
/// `seed < 0` keeps every bump outward.
///
/// # Safety
/// `out_domain` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn reiflab_domain_koch(
    sides: usize,
    radius: f64,
    r0: f64,
    bump: f64,
    depth: u32,
    seed: i64,
    out_domain: *mut *mut ReiflabDomain,
) -> ReiflabStatus {
    guard(|| {
        let slot = out(out_domain, "out_domain")?;
        let base = PolygonalDomain::regular_polygon(sides, radius, r0)?;
        let seed = u64::try_from(seed).ok();
        let d = generate_flat_fractal(&base, bump, depth, seed)?;
        *slot = Box::into_raw(Box::new(ReiflabDomain { inner: d }));
        Ok(())
    })
}

/// # Safety
/// `domain` must be null or a handle from this library, freed at most once.
#[no_mangle]
pub unsafe extern "C" fn reiflab_domain_free(domain: *mut ReiflabDomain) {
    if !domain.is_null() {
        drop(Box::from_raw(domain));
    }
}

/// Number of polygon vertices, 0 for a null handle.
///
/// # Safety
/// `domain` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn reiflab_domain_vertex_count(domain: *const ReiflabDomain) -> usize {
    domain.as_ref().map_or(0, |d| d.inner.len())
}

/// Largest sampled flatness over `n_scales` radii and `centers` boundary centres.
///
/// # Safety
/// `domain` must be a live handle, `scales` must point to `n_scales` doubles.
#[no_mangle]
pub unsafe extern "C" fn reiflab_domain_flatness(
    domain: *const ReiflabDomain,
    scales: *const f64,
    n_scales: usize,
    centers: usize,
    angular_resolution: usize,
    eps_global: *mut f64,
) -> ReiflabStatus {
    guard(|| {
        let d = domain.as_ref().ok_or_else(|| null("domain"))?;
        let slot = out(eps_global, "eps_global")?;
        if scales.is_null() {
            return Err(null("scales"));
        }
        let s = std::slice::from_raw_parts(scales, n_scales);
        *slot = estimate_flatness(&d.inner, s, centers, angular_resolution)?.eps_global;
        Ok(())
    })
}

/// # Safety
/// `domain` must be a live handle and `out_mesh` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn reiflab_mesh_build(
    domain: *const ReiflabDomain,
    h: f64,
    out_mesh: *mut *mut ReiflabMesh,
) -> ReiflabStatus {
    guard(|| {
        let d = domain.as_ref().ok_or_else(|| null("domain"))?;
        let slot = out(out_mesh, "out_mesh")?;
        let m = triangulate(&d.inner, h)?;
        *slot = Box::into_raw(Box::new(ReiflabMesh { inner: Arc::new(m) }));
        Ok(())
    })
}

/// # Safety
/// `mesh` must be null or a handle from this library, freed at most once.
#[no_mangle]
pub unsafe extern "C" fn reiflab_mesh_free(mesh: *mut ReiflabMesh) {
    if !mesh.is_null() {
        drop(Box::from_raw(mesh));
    }
}

/// # Safety
/// `mesh` must be a live handle; the outputs must be valid pointers.
#[no_mangle]
pub unsafe extern "C" fn reiflab_mesh_counts(
    mesh: *const ReiflabMesh,
    points: *mut usize,
    triangles: *mut usize,
) -> ReiflabStatus {
    guard(|| {
        let m = mesh.as_ref().ok_or_else(|| null("mesh"))?;
        *out(points, "points")? = m.inner.num_points();
        *out(triangles, "triangles")? = m.inner.num_triangles();
        Ok(())
    })
}

/// Solves `-Δu = f`, `u = 0` on the boundary, with constant `f`.
///
/// # Safety
/// `mesh` must be a live handle and `out_solution` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn reiflab_solve_constant(
    mesh: *const ReiflabMesh,
    f: f64,
    rel_tol: f64,
    out_solution: *mut *mut ReiflabSolution,
) -> ReiflabStatus {
    guard(|| {
        let m = mesh.as_ref().ok_or_else(|| null("mesh"))?;
        let slot = out(out_solution, "out_solution")?;
        let s = solve_poisson(m.inner.clone(), &SourceTerm::constant(f), rel_tol)?;
        *slot = Box::into_raw(Box::new(ReiflabSolution { inner: s }));
        Ok(())
    })
}

/// # Safety
/// `solution` must be null or a handle from this library, freed at most once.
#[no_mangle]
pub unsafe extern "C" fn reiflab_solution_free(solution: *mut ReiflabSolution) {
    if !solution.is_null() {
        drop(Box::from_raw(solution));
    }
}

/// Value of the solution at `(x, y)`; `INVALID_ARGUMENT` off the mesh.
///
/// # Safety
/// `solution` must be a live handle and `value` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn reiflab_solution_eval(
    solution: *const ReiflabSolution,
    x: f64,
    y: f64,
    value: *mut f64,
) -> ReiflabStatus {
    guard(|| {
        let s = solution.as_ref().ok_or_else(|| null("solution"))?;
        let slot = out(value, "value")?;
        *slot = s.inner.field.eval(Point::new(x, y)).ok_or_else(|| {
            Failure(ReiflabStatus::InvalidArgument, format!("({x}, {y}) lies outside the mesh"))
        })?;
        Ok(())
    })
}

/// CG iterations and Dirichlet energy of a solve.
///
/// # Safety
/// `solution` must be a live handle; the outputs must be valid pointers.
#[no_mangle]
pub unsafe extern "C" fn reiflab_solution_stats(
    solution: *const ReiflabSolution,
    iterations: *mut usize,
    energy: *mut f64,
) -> ReiflabStatus {
    guard(|| {
        let s = solution.as_ref().ok_or_else(|| null("solution"))?;
        *out(iterations, "iterations")? = s.inner.stats.iterations;
        *out(energy, "energy")? = s.inner.stats.energy;
        Ok(())
    })
}

/// Fitted Hölder exponent of the solution in `B((cx, cy), radius)`.
/// `alpha` is set to NaN when the fit is degenerate.
///
/// # Safety
/// `solution` must be a live handle and `alpha` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn reiflab_holder_fit(
    solution: *const ReiflabSolution,
    cx: f64,
    cy: f64,
    radius: f64,
    pair_budget: usize,
    seed: u64,
    alpha: *mut f64,
) -> ReiflabStatus {
    guard(|| {
        let s = solution.as_ref().ok_or_else(|| null("solution"))?;
        let slot = out(alpha, "alpha")?;
        let region = RegionSpec { center: Point::new(cx, cy), radius };
        *slot = holder_exponent_fit(&s.inner.field, region, pair_budget, seed)?.alpha_hat.unwrap_or(f64::NAN);
        Ok(())
    })
}

/// First Dirichlet eigenvalue of the spherical cap `{θ : cos θ > t}` in `S^{n-1}`.
///
/// # Safety
/// `value` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn reiflab_cap_eigenvalue(n: u32, t: f64, value: *mut f64) -> ReiflabStatus {
    guard(|| {
        *out(value, "value")? = cap_eigenvalue(n, t)?;
        Ok(())
    })
}

/// Flatness threshold for decay exponent `beta`; `unconditional` is set to 1
/// when any flatness below 1/2 suffices.
///
/// # Safety
/// The outputs must be valid pointers.
#[no_mangle]
pub unsafe extern "C" fn reiflab_flatness_threshold(
    n: u32,
    beta: f64,
    eps_max: *mut f64,
    t_star: *mut f64,
    unconditional: *mut i32,
) -> ReiflabStatus {
    guard(|| {
        let th = flatness_threshold(n, beta)?;
        *out(eps_max, "eps_max")? = th.eps_max;
        *out(t_star, "t_star")? = th.t_star;
        *out(unconditional, "unconditional")? = th.unconditional as i32;
        Ok(())
    })
}

/// Runs a pipeline. `config_path` may be null for defaults, `pipeline` may be
/// null to use the name in the config. `passed` receives 1 when every check
/// passed; a failing check is not an error.
///
/// # Safety
/// String arguments must be null or NUL-terminated; `passed` must be valid.
#[no_mangle]
pub unsafe extern "C" fn reiflab_run_pipeline(
    config_path: *const c_char,
    pipeline: *const c_char,
    out_dir: *const c_char,
    passed: *mut i32,
) -> ReiflabStatus {
    guard(|| {
        let slot = out(passed, "passed")?;
        let config = if config_path.is_null() {
            Config::default()
        } else {
            Config::read(Path::new(str_arg(config_path, "config_path")?))?
        };
        let pipeline: Option<Pipeline> =
            if pipeline.is_null() { None } else { Some(str_arg(pipeline, "pipeline")?.parse()?) };
        let outcome = run_pipeline(&config, pipeline, Path::new(str_arg(out_dir, "out_dir")?))?;
        if let Some(c) = outcome.first_failure() {
            set_error(format!("check failed: {}: {}", c.name, c.detail));
        }
        *slot = outcome.passed() as i32;
        Ok(())
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::ptr;

    fn last_error() -> String {
        let mut buf = [0 as c_char; 256];
        let n = unsafe { reiflab_last_error(buf.as_mut_ptr(), buf.len()) };
        assert!(n > 0);
        unsafe { CStr::from_ptr(buf.as_ptr()) }.to_string_lossy().into_owned()
    }

    #[test]
    fn error_codes_follow_the_error_kind() {
        assert_eq!(ReiflabStatus::from(&Error::NonSimple { first: 0, second: 2 }), ReiflabStatus::InvalidDomain);
        assert_eq!(ReiflabStatus::from(&Error::Convergence { iterations: 1, residual: 1.0 }), ReiflabStatus::Convergence);
    }

    #[test]
    fn null_outputs_are_rejected() {
        let mut v = 0.0;
        assert_eq!(unsafe { reiflab_cap_eigenvalue(2, 0.0, ptr::null_mut()) }, ReiflabStatus::NullPointer);
        assert_eq!(unsafe { reiflab_cap_eigenvalue(2, 0.0, &mut v) }, ReiflabStatus::Ok);
        assert_eq!(v, 1.0);
        assert_eq!(unsafe { reiflab_cap_eigenvalue(7, 0.0, &mut v) }, ReiflabStatus::InvalidArgument);
        assert!(last_error().contains("7"));
    }

    #[test]
    fn bow_tie_is_not_simple() {
        let xy = [0.0, 0.0, 1.0, 1.0, 1.0, 0.0, 0.0, 1.0];
        let mut d = ptr::null_mut();
        let st = unsafe { reiflab_domain_from_vertices(xy.as_ptr(), 4, 0.5, &mut d) };
        assert_eq!(st, ReiflabStatus::InvalidDomain);
        assert!(d.is_null());
        unsafe { reiflab_domain_free(d) };
    }
}
