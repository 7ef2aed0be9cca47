#ifndef MBFEM_H
#define MBFEM_H

/* Generated by cbindgen from mbfem-ffi; do not edit by hand. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Time integrator selector.
 */
typedef enum MbfemMethod {
  MBFEM_METHOD_BACKWARD_EULER = 0,
  MBFEM_METHOD_CRANK_NICOLSON = 1,
  MBFEM_METHOD_LINEARIZED_CRANK_NICOLSON = 2,
} MbfemMethod;

/**
 * Status code returned by every fallible entry point.
 */
typedef enum MbfemStatus {
  MBFEM_STATUS_OK = 0,
  MBFEM_STATUS_NULL_POINTER = 1,
  MBFEM_STATUS_INVALID_ARGUMENT = 2,
  MBFEM_STATUS_SOLVE_FAILED = 3,
  MBFEM_STATUS_INTERNAL_PANIC = 4,
} MbfemStatus;

/**
 * Opaque handle to a problem definition plus its reference solution.
 */
typedef struct MbfemProblem MbfemProblem;

/**
 * Opaque handle to the outcome of one solve.
 */
typedef struct MbfemSolution MbfemSolution;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message describing the most recent failure on the calling thread. The
 * pointer stays valid until the next failing call on the same thread.
 */
const char *mbfem_last_error_message(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *mbfem_version(void);

/**
 * Create one of the built-in benchmark problems by name: "sine",
 * "quartic" or "quartic-skew". On success writes a handle the caller
 * owns and must release with [`mbfem_problem_free`].
 *
 * # Safety
 * `name` must point to a NUL-terminated string and `out` to writable
 * storage for one pointer.
 */
enum MbfemStatus mbfem_problem_builtin(const char *name, struct MbfemProblem **out);

/**
 * Release a problem handle. A null pointer is a no-op.
 *
 * # Safety
 * `problem` must be null or a pointer obtained from
 * [`mbfem_problem_builtin`] that has not been freed.
 */
void mbfem_problem_free(struct MbfemProblem *problem);

/**
 * Largest stable time step of the method on the problem's boundary
 * motion.
 *
 * # Safety
 * `problem` must be a live problem handle and `out` writable.
 */
enum MbfemStatus mbfem_stability_limit(const struct MbfemProblem *problem,
                                       enum MbfemMethod method,
                                       double *out);

/**
 * Solve the problem on a uniform mesh and report errors against its
 * reference solution. `horizon <= 0` selects the problem's own horizon.
 * On success the caller owns the solution handle and must release it with
 * [`mbfem_solution_free`].
 *
 * # Safety
 * `problem` must be a live problem handle and `out` writable.
 */
enum MbfemStatus mbfem_solve(const struct MbfemProblem *problem,
                             enum MbfemMethod method,
                             uint32_t degree,
                             uint32_t elements,
                             double delta,
                             double horizon,
                             struct MbfemSolution **out);

/**
 * Release a solution handle. A null pointer is a no-op.
 *
 * # Safety
 * `solution` must be null or a pointer obtained from [`mbfem_solve`]
 * that has not been freed.
 */
void mbfem_solution_free(struct MbfemSolution *solution);

/**
 * Number of equations in the solved system.
 *
 * # Safety
 * `solution` must be a live solution handle and `out` writable.
 */
enum MbfemStatus mbfem_solution_equation_count(const struct MbfemSolution *solution, uint32_t *out);

/**
 * L2 error of equation `equation` (0-based) on the moving domain at the
 * final time.
 *
 * # Safety
 * `solution` must be a live solution handle and `out` writable.
 */
enum MbfemStatus mbfem_solution_l2_error(const struct MbfemSolution *solution,
                                         uint32_t equation,
                                         double *out);

/**
 * Largest interior-node error of equation `equation` (0-based) at the
 * final time.
 *
 * # Safety
 * `solution` must be a live solution handle and `out` writable.
 */
enum MbfemStatus mbfem_solution_max_nodal_error(const struct MbfemSolution *solution,
                                                uint32_t equation,
                                                double *out);

/**
 * Wall-clock milliseconds spent assembling and integrating.
 *
 * # Safety
 * `solution` must be a live solution handle and `out` writable.
 */
enum MbfemStatus mbfem_solution_cpu_ms(const struct MbfemSolution *solution, double *out);

/**
 * Total inner fixed-point iterations across all steps (0 for the
 * linearized scheme).
 *
 * # Safety
 * `solution` must be a live solution handle and `out` writable.
 */
enum MbfemStatus mbfem_solution_iterations(const struct MbfemSolution *solution, uint64_t *out);

#ifdef __cplusplus
} // extern "C"
#endif // __cplusplus

#endif /* MBFEM_H */
