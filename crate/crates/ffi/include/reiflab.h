#ifndef REIFLAB_H
#define REIFLAB_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result codes of every fallible call.
 */
typedef enum ReiflabStatus {
  REIFLAB_STATUS_OK = 0,
  REIFLAB_STATUS_NULL_POINTER = 1,
  REIFLAB_STATUS_INVALID_ARGUMENT = 2,
  REIFLAB_STATUS_INVALID_DOMAIN = 3,
  REIFLAB_STATUS_RESOLUTION = 4,
  REIFLAB_STATUS_MESH = 5,
  REIFLAB_STATUS_CONVERGENCE = 6,
  REIFLAB_STATUS_UNDER_RESOLVED = 7,
  REIFLAB_STATUS_PARSE = 8,
  REIFLAB_STATUS_CHECK_FAILED = 9,
  REIFLAB_STATUS_IO = 10,
  REIFLAB_STATUS_UTF8 = 11,
  REIFLAB_STATUS_PANIC = 12,
} ReiflabStatus;

/**
 * Polygonal domain handle.
 */
typedef struct ReiflabDomain ReiflabDomain;

/**
 * Triangulation handle.
 */
typedef struct ReiflabMesh ReiflabMesh;

/**
 * Finite element solution handle.
 */
typedef struct ReiflabSolution ReiflabSolution;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Copies the last error message of this thread into `buf` (NUL-terminated,
 * truncated to `len`) and returns the full message length, or 0 if none.
 *
 * # Safety
 * `buf` must be null or point to `len` writable bytes.
 */
size_t reiflab_last_error(char *buf, size_t len);

/**
 * Domain from `n` counter-clockwise vertices stored as `x0, y0, x1, y1, ...`.
 *
 * # Safety
 * `xy` must point to `2 n` doubles; `out` must be a valid pointer.
 */
enum ReiflabStatus reiflab_domain_from_vertices(const double *xy,
                                                size_t n,
                                                double r0,
                                                struct ReiflabDomain **out_domain);

/**
 * Koch-type refinement of a regular `sides`-gon of circumradius `radius`.
 * `seed < 0` keeps every bump outward.
 *
 * # Safety
 * `out_domain` must be a valid pointer.
 */
enum ReiflabStatus reiflab_domain_koch(size_t sides,
                                       double radius,
                                       double r0,
                                       double bump,
                                       uint32_t depth,
                                       int64_t seed,
                                       struct ReiflabDomain **out_domain);

/**
 * # Safety
 * `domain` must be null or a handle from this library, freed at most once.
 */
void reiflab_domain_free(struct ReiflabDomain *domain);

/**
 * Number of polygon vertices, 0 for a null handle.
 *
 * # Safety
 * `domain` must be null or a live handle.
 */
size_t reiflab_domain_vertex_count(const struct ReiflabDomain *domain);

/**
 * Largest sampled flatness over `n_scales` radii and `centers` boundary centres.
 *
 * # Safety
 * `domain` must be a live handle, `scales` must point to `n_scales` doubles.
 */
enum ReiflabStatus reiflab_domain_flatness(const struct ReiflabDomain *domain,
                                           const double *scales,
                                           size_t n_scales,
                                           size_t centers,
                                           size_t angular_resolution,
                                           double *eps_global);

/**
 * # Safety
 * `domain` must be a live handle and `out_mesh` a valid pointer.
 */
enum ReiflabStatus reiflab_mesh_build(const struct ReiflabDomain *domain,
                                      double h,
                                      struct ReiflabMesh **out_mesh);

/**
 * # Safety
 * `mesh` must be null or a handle from this library, freed at most once.
 */
void reiflab_mesh_free(struct ReiflabMesh *mesh);

/**
 * # Safety
 * `mesh` must be a live handle; the outputs must be valid pointers.
 */
enum ReiflabStatus reiflab_mesh_counts(const struct ReiflabMesh *mesh,
                                       size_t *points,
                                       size_t *triangles);

/**
 * Solves `-Δu = f`, `u = 0` on the boundary, with constant `f`.
 *
 * # Safety
 * `mesh` must be a live handle and `out_solution` a valid pointer.
 */
enum ReiflabStatus reiflab_solve_constant(const struct ReiflabMesh *mesh,
                                          double f,
                                          double rel_tol,
                                          struct ReiflabSolution **out_solution);

/**
 * # Safety
 * `solution` must be null or a handle from this library, freed at most once.
 */
void reiflab_solution_free(struct ReiflabSolution *solution);

/**
 * Value of the solution at `(x, y)`; `INVALID_ARGUMENT` off the mesh.
 *
 * # Safety
 * `solution` must be a live handle and `value` a valid pointer.
 */
enum ReiflabStatus reiflab_solution_eval(const struct ReiflabSolution *solution,
                                         double x,
                                         double y,
                                         double *value);

/**
 * CG iterations and Dirichlet energy of a solve.
 *
 * # Safety
 * `solution` must be a live handle; the outputs must be valid pointers.
 */
enum ReiflabStatus reiflab_solution_stats(const struct ReiflabSolution *solution,
                                          size_t *iterations,
                                          double *energy);

/**
 * Fitted Hölder exponent of the solution in `B((cx, cy), radius)`.
 * `alpha` is set to NaN when the fit is degenerate.
 *
 * # Safety
 * `solution` must be a live handle and `alpha` a valid pointer.
 */
enum ReiflabStatus reiflab_holder_fit(const struct ReiflabSolution *solution,
                                      double cx,
                                      double cy,
                                      double radius,
                                      size_t pair_budget,
                                      uint64_t seed,
                                      double *alpha);

/**
 * First Dirichlet eigenvalue of the spherical cap `{θ : cos θ > t}` in `S^{n-1}`.
 *
 * # Safety
 * `value` must be a valid pointer.
 */
enum ReiflabStatus reiflab_cap_eigenvalue(uint32_t n, double t, double *value);

/**
 * Flatness threshold for decay exponent `beta`; `unconditional` is set to 1
 * when any flatness below 1/2 suffices.
 *
 * # Safety
 * The outputs must be valid pointers.
 */
enum ReiflabStatus reiflab_flatness_threshold(uint32_t n,
                                              double beta,
                                              double *eps_max,
                                              double *t_star,
                                              int32_t *unconditional);

/**
 * Runs a pipeline. `config_path` may be null for defaults, `pipeline` may be
 * null to use the name in the config. `passed` receives 1 when every check
 * passed; a failing check is not an error.
 *
 * # Safety
 * String arguments must be null or NUL-terminated; `passed` must be valid.
 */
enum ReiflabStatus reiflab_run_pipeline(const char *config_path,
                                        const char *pipeline,
                                        const char *out_dir,
                                        int32_t *passed);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* REIFLAB_H */
