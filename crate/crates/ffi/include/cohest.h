#ifndef COHEST_H
#define COHEST_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>

// Result code of every fallible call.
typedef enum CohestStatus {
  COHEST_STATUS_OK = 0,
  COHEST_STATUS_NULL_POINTER = 1,
  COHEST_STATUS_INVALID_INPUT = 2,
  COHEST_STATUS_RANGE = 3,
  COHEST_STATUS_BUDGET = 4,
  COHEST_STATUS_NUMERICAL = 5,
  COHEST_STATUS_IO = 6,
  COHEST_STATUS_BUFFER_TOO_SMALL = 7,
  COHEST_STATUS_PANIC = 8,
} CohestStatus;

typedef enum CohestEtaRule {
  COHEST_ETA_RULE_LINEAR = 0,
  COHEST_ETA_RULE_EXACT = 1,
} CohestEtaRule;

typedef enum CohestAlgorithm {
  COHEST_ALGORITHM_TEXTBOOK_PE = 0,
  COHEST_ALGORITHM_IMPROVED_PE = 1,
  COHEST_ALGORITHM_TEXTBOOK_EE = 2,
  COHEST_ALGORITHM_IMPROVED_EE = 3,
} CohestAlgorithm;

typedef enum CohestInstanceKind {
  COHEST_INSTANCE_KIND_UNITARY = 0,
  COHEST_INSTANCE_KIND_HAMILTONIAN = 1,
} CohestInstanceKind;

// A seeded rounding-promise instance.
typedef struct CohestInstance CohestInstance;

// Knobs shared by cost evaluation and simulation.
typedef struct CohestOptions CohestOptions;

// A polynomial in Chebyshev form.
typedef struct CohestPolynomial CohestPolynomial;

// Outcome of a dense estimator simulation.
typedef struct CohestReport CohestReport;

// Query and qubit counts of one algorithm at one parameter point.
typedef struct CohestCost {
  uint64_t queries;
  uint64_t garbage_qubits;
  uint64_t ancilla_qubits;
} CohestCost;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Library version as a static NUL-terminated string. Do not free.
const char *cohest_version(void);

// Message of the last failure on this thread, or null if there was none.
// Release with [`cohest_string_free`].
char *cohest_last_error_message(void);

// # Safety
// `s` must be null or a string returned by this library that was not freed.
void cohest_string_free(char *s);

// Options with the defaults of the cost model: exact η rule, m_svt = m_cos = 3
// and no uncompute for phase estimation.
struct CohestOptions *cohest_options_new(void);

// # Safety
// `opts` must be null or a handle from [`cohest_options_new`] not yet freed.
void cohest_options_free(struct CohestOptions *opts);

// # Safety
// `opts` must be a live handle from [`cohest_options_new`].
enum CohestStatus cohest_options_set_eta_rule(struct CohestOptions *opts, enum CohestEtaRule rule);

// Sets the SVT and cosine-approximation precision exponents.
//
// # Safety
// `opts` must be a live handle from [`cohest_options_new`].
enum CohestStatus cohest_options_set_precision(struct CohestOptions *opts,
                                               double m_svt,
                                               double m_cos);

// # Safety
// `opts` must be a live handle from [`cohest_options_new`].
enum CohestStatus cohest_options_set_uncompute(struct CohestOptions *opts, bool uncompute);

// Query cost of `alg` at `(n, alpha, delta)`. `opts` may be null for the
// defaults.
//
// # Safety
// `opts` must be null or live; `out` must point to writable memory.
enum CohestStatus cohest_cost(enum CohestAlgorithm alg,
                              uint32_t n,
                              double alpha,
                              double delta,
                              const struct CohestOptions *opts,
                              struct CohestCost *out);

// Sweep CSV (header plus one row per point) for a named preset grid,
// `"fig4"` or `"fig5"`. Release `*out` with [`cohest_string_free`].
//
// # Safety
// `figure` must be a NUL-terminated string; `opts` null or live; `out`
// writable.
enum CohestStatus cohest_figure_csv(const char *figure,
                                    const struct CohestOptions *opts,
                                    char **out);

// Seeded random instance obeying the `(n, alpha)` rounding promise.
//
// # Safety
// `out` must point to writable memory.
enum CohestStatus cohest_instance_generate(uint32_t n,
                                           double alpha,
                                           size_t dim,
                                           uint64_t seed,
                                           enum CohestInstanceKind kind,
                                           struct CohestInstance **out);

// # Safety
// `inst` must be null or a live instance handle.
void cohest_instance_free(struct CohestInstance *inst);

// Eigenvalues `λ_j ∈ [0, 1)`. See [`cohest_report_success`] for the buffer
// protocol.
//
// # Safety
// `inst` must be live; `buf` null or holding `cap` doubles; `len` writable.
enum CohestStatus cohest_instance_eigenvalues(const struct CohestInstance *inst,
                                              double *buf,
                                              size_t cap,
                                              size_t *len);

// Dense simulation of `alg` on `inst`. Textbook energy estimation has no
// dense simulation and yields `InvalidInput`.
//
// # Safety
// `inst` must be live; `opts` null or live; `out` writable.
enum CohestStatus cohest_simulate(enum CohestAlgorithm alg,
                                  const struct CohestInstance *inst,
                                  double delta,
                                  const struct CohestOptions *opts,
                                  struct CohestReport **out);

// # Safety
// `rep` must be null or a live report handle.
void cohest_report_free(struct CohestReport *rep);

// # Safety
// `rep` must be live; `out` writable.
enum CohestStatus cohest_report_query_count(const struct CohestReport *rep, uint64_t *out);

// # Safety
// `rep` must be live; `out` writable.
enum CohestStatus cohest_report_coherence_fidelity(const struct CohestReport *rep, double *out);

// Per-eigenstate success probabilities. `*len` receives the element count;
// pass `buf = NULL` to query it. A buffer shorter than the count yields
// `BufferTooSmall` and leaves the buffer untouched.
//
// # Safety
// `rep` must be live; `buf` null or holding `cap` doubles; `len` writable.
enum CohestStatus cohest_report_success(const struct CohestReport *rep,
                                        double *buf,
                                        size_t cap,
                                        size_t *len);

// The whole report as JSON. Release `*out` with [`cohest_string_free`].
//
// # Safety
// `rep` must be live; `out` writable.
enum CohestStatus cohest_report_json(const struct CohestReport *rep, char **out);

// Amplifying polynomial: at least `1 − delta` on `[0, 1/2 − eta]`, at most
// `delta` on `[1/2 + eta, 1]`.
//
// # Safety
// `out` must be writable.
enum CohestStatus cohest_poly_amplifying(double eta, double delta, struct CohestPolynomial **out);

// Even approximant of `cos(t x)` on `[-1, 1]` within `eps`.
//
// # Safety
// `out` must be writable.
enum CohestStatus cohest_poly_cos(double t, double eps, struct CohestPolynomial **out);

// Odd approximant of `sin(t x)` on `[-1, 1]` within `eps`.
//
// # Safety
// `out` must be writable.
enum CohestStatus cohest_poly_sin(double t, double eps, struct CohestPolynomial **out);

// # Safety
// `p` must be null or a live polynomial handle.
void cohest_poly_free(struct CohestPolynomial *p);

// # Safety
// `p` must be live; `out` writable.
enum CohestStatus cohest_poly_eval(const struct CohestPolynomial *p, double x, double *out);

// # Safety
// `p` must be live; `out` writable.
enum CohestStatus cohest_poly_degree(const struct CohestPolynomial *p, size_t *out);

// Chebyshev coefficients, same buffer protocol as [`cohest_report_success`].
//
// # Safety
// `p` must be live; `buf` null or holding `cap` doubles; `len` writable.
enum CohestStatus cohest_poly_coefficients(const struct CohestPolynomial *p,
                                           double *buf,
                                           size_t cap,
                                           size_t *len);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* COHEST_H */
