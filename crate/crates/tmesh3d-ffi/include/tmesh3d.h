#ifndef TMESH3D_H
#define TMESH3D_H

/* Generated by cbindgen; do not edit by hand. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Status codes returned by every fallible entry point.
 */
typedef enum TmStatus {
  TmStatus_Ok = 0,
  TmStatus_NullArgument = 1,
  TmStatus_InvalidArgument = 2,
  TmStatus_ParseError = 3,
  TmStatus_NotAdmissible = 4,
  TmStatus_NotDualCompatible = 5,
  TmStatus_EmptyActiveRegion = 6,
  TmStatus_BoundViolated = 7,
  TmStatus_InternalError = 8,
} TmStatus;

/**
 * Opaque mesh handle.
 */
typedef struct TmMesh TmMesh;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last error on this thread; valid until the next failing
 * call from the same thread. Never null.
 */
const char *tm_last_error(void);

/**
 * Release a string returned by this library.
 *
 * # Safety
 * `s` must have been returned by a `tm_*` function and not freed before.
 */
void tm_string_free(char *s);

/**
 * Create the initial tensor-product mesh.
 */
enum TmStatus tm_mesh_initial(uint32_t dim_x,
                              uint32_t dim_y,
                              uint32_t dim_z,
                              uint32_t p1,
                              uint32_t p2,
                              uint32_t p3,
                              uint32_t m,
                              struct TmMesh **out);

/**
 * Parse a mesh from canonical JSON.
 *
 * # Safety
 * `json` must be a valid NUL-terminated string.
 */
enum TmStatus tm_mesh_from_json(const char *json, struct TmMesh **out);

/**
 * Serialize a mesh to canonical JSON; the caller frees via `tm_string_free`.
 *
 * # Safety
 * `mesh` must be a live handle from this library.
 */
enum TmStatus tm_mesh_to_json(const struct TmMesh *mesh, char **out);

/**
 * Duplicate a handle.
 *
 * # Safety
 * `mesh` must be a live handle from this library.
 */
enum TmStatus tm_mesh_clone(const struct TmMesh *mesh, struct TmMesh **out);

/**
 * Release a mesh handle.
 *
 * # Safety
 * `mesh` must be a live handle from this library (or null) and is invalid
 * afterwards.
 */
void tm_mesh_free(struct TmMesh *mesh);

/**
 * Element count, maximum level and active node count (the latter is 0 for
 * meshes whose active region is empty).
 *
 * # Safety
 * `mesh` must be a live handle; out pointers may be null to skip a field.
 */
enum TmStatus tm_mesh_stats(const struct TmMesh *mesh,
                            size_t *elements,
                            uint32_t *max_level,
                            size_t *active_nodes);

/**
 * Refine by marking the element containing the given point (ties broken by
 * the lexicographically smallest element). Writes a new handle.
 *
 * # Safety
 * `mesh` must be a live handle; `out` non-null.
 */
enum TmStatus tm_mesh_refine_at_point(const struct TmMesh *mesh,
                                      double x,
                                      double y,
                                      double z,
                                      struct TmMesh **out);

/**
 * Admissibility verdict: replay certificate or violation.
 *
 * # Safety
 * `mesh` must be a live handle; `verdict` non-null.
 */
enum TmStatus tm_check_admissible(const struct TmMesh *mesh, bool *verdict);

/**
 * Analysis-suitability verdict.
 *
 * # Safety
 * `mesh` must be a live handle; `verdict` non-null.
 */
enum TmStatus tm_check_analysis_suitable(const struct TmMesh *mesh, bool *verdict);

/**
 * Dual-compatibility verdict.
 *
 * # Safety
 * `mesh` must be a live handle; `verdict` non-null.
 */
enum TmStatus tm_check_dual_compatible(const struct TmMesh *mesh, bool *verdict);

/**
 * Worst deviation of the dual functionals from the Kronecker delta over
 * all active-node pairs. Fails with `NotDualCompatible` when the mesh has
 * no dual basis.
 *
 * # Safety
 * `mesh` must be a live handle; `max_deviation` non-null.
 */
enum TmStatus tm_dual_basis_max_deviation(const struct TmMesh *mesh, double *max_deviation);

/**
 * Numerical rank of the blending-function collocation matrix.
 *
 * # Safety
 * `mesh` must be a live handle; out pointers may be null to skip a field.
 */
enum TmStatus tm_rank(const struct TmMesh *mesh,
                      bool *full_rank,
                      size_t *rank,
                      size_t *active_nodes);

/**
 * The linear-complexity constants for a degree and grading.
 *
 * # Safety
 * Out pointers may be null to skip a field.
 */
enum TmStatus tm_complexity_constants(uint32_t p1,
                                      uint32_t p2,
                                      uint32_t p3,
                                      uint32_t m,
                                      double *d1,
                                      double *d2,
                                      double *d3,
                                      double *c);

/**
 * Run the corner-marking experiment until the corner element's sides are
 * at most `1/target`; reports steps and generated elements, and checks the
 * linear bound.
 *
 * # Safety
 * Out pointers may be null to skip a field.
 */
enum TmStatus tm_corner_experiment(uint32_t dim_x,
                                   uint32_t dim_y,
                                   uint32_t dim_z,
                                   uint32_t p1,
                                   uint32_t p2,
                                   uint32_t p3,
                                   uint32_t m,
                                   uint64_t target,
                                   size_t *steps,
                                   size_t *new_elements);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* TMESH3D_H */
