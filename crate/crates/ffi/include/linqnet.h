#ifndef LINQNET_H
#define LINQNET_H

/* Generated by cbindgen from src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/*
 Result of every fallible call.
 */
typedef enum LqStatus {
  LQ_STATUS_OK = 0,
  LQ_STATUS_NULL_POINTER = 1,
  /*
   Array lengths or port counts that do not fit together.
   */
  LQ_STATUS_DIMENSION_MISMATCH = 2,
  /*
   The parameters do not describe a physical component.
   */
  LQ_STATUS_INVALID_COMPONENT = 3,
  LQ_STATUS_NOT_HERMITIAN = 4,
  LQ_STATUS_NON_FINITE = 5,
  /*
   A linear solve failed, or the transfer function has a pole at `s`.
   */
  LQ_STATUS_SINGULAR = 6,
  LQ_STATUS_ALGEBRAIC_LOOP = 7,
  /*
   Input to a conversion lies outside its domain.
   */
  LQ_STATUS_OUTSIDE_DOMAIN = 8,
  LQ_STATUS_PARSE_ERROR = 9,
  LQ_STATUS_INVALID_ARGUMENT = 10,
  /*
   A bug on the Rust side; the call had no effect.
   */
  LQ_STATUS_PANIC = 11,
} LqStatus;

/*
 Opaque handle to a linear component `(S, C, Omega)`.
 */
typedef struct LqComponent LqComponent;

typedef struct LqComplex {
  double re;
  double im;
} LqComplex;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/*
 Message for the last failed call on this thread, or null after a success.

 The pointer stays valid until the next `lq_*` call on the same thread.
 */
const char *lq_last_error_message(void);

/*
 Builds a component from row-major `S` (n×n), `C` (n×m) and `Omega` (m×m).

 Rejects a non-unitary `S` (`InvalidComponent`) or non-hermitian `Omega`
 (`NotHermitian`) at the default tolerance.

 # Safety
 Each array must hold the stated number of entries (or be null when that
 number is zero); `out` must be writable.
 */
enum LqStatus lq_component_new(size_t n_ports,
                               size_t n_modes,
                               const struct LqComplex *s,
                               const struct LqComplex *c,
                               const struct LqComplex *omega,
                               struct LqComponent **out);

/*
 Single-mode cavity with decay rate `gamma`, detuning `omega`, phase `phi`.

 # Safety
 `out` must be writable.
 */
enum LqStatus lq_cavity_new(double gamma, double omega, double phi, struct LqComponent **out);

/*
 Releases a handle. Null is ignored.

 # Safety
 `comp` must come from this library and not be used afterwards.
 */
void lq_component_free(struct LqComponent *comp);

/*
 # Safety
 `comp` must be a live handle; `n_ports` and `n_modes` must be writable.
 */
enum LqStatus lq_component_dims(const struct LqComponent *comp, size_t *n_ports, size_t *n_modes);

/*
 Copies `S` into `out` (`len` must be n²).

 # Safety
 `out` must have room for `len` entries.
 */
enum LqStatus lq_component_s(const struct LqComponent *comp, struct LqComplex *out, size_t len);

/*
 Copies `C` into `out` (`len` must be n·m).

 # Safety
 `out` must have room for `len` entries.
 */
enum LqStatus lq_component_c(const struct LqComponent *comp, struct LqComplex *out, size_t len);

/*
 Copies `Omega` into `out` (`len` must be m²).

 # Safety
 `out` must have room for `len` entries.
 */
enum LqStatus lq_component_omega(const struct LqComponent *comp, struct LqComplex *out, size_t len);

/*
 `Ok` if `S` is unitary and `Omega` hermitian within `tol`; otherwise the
 same statuses as `lq_component_new`.

 # Safety
 `comp` must be a live handle.
 */
enum LqStatus lq_component_validate(const struct LqComponent *comp, double tol);

/*
 Side-by-side placement: ports and modes of `a`, then those of `b`.

 # Safety
 Both handles must be live; `out` must be writable.
 */
enum LqStatus lq_concatenate(const struct LqComponent *a,
                             const struct LqComponent *b,
                             struct LqComponent **out);

/*
 `first` feeding `second`.

 # Safety
 Both handles must be live; `out` must be writable.
 */
enum LqStatus lq_series(const struct LqComponent *first,
                        const struct LqComponent *second,
                        struct LqComponent **out);

/*
 Feeds output `from[k]` back into input `to[k]` for each of the `n_edges`
 edges and eliminates those channels. Open ports keep their relative order.

 # Safety
 `from` and `to` must hold `n_edges` entries; `out` must be writable.
 */
enum LqStatus lq_feedback(const struct LqComponent *comp,
                          const size_t *from,
                          const size_t *to,
                          size_t n_edges,
                          struct LqComponent **out);

/*
 Redheffer star product: the first `a_outer` ports of `a` and the last
 ports of `b` stay open; the rest face each other.

 # Safety
 Both handles must be live; `out` must be writable.
 */
enum LqStatus lq_star(const struct LqComponent *a,
                      const struct LqComponent *b,
                      size_t a_outer,
                      size_t b_inner,
                      struct LqComponent **out);

/*
 Closes the `n2` in-loop channels of the unitary `t` ((n1+n2)×(n1+n2),
 row-major) around `plant`.

 # Safety
 `t` must hold (n1+n2)² entries; `plant` must be live; `out` writable.
 */
enum LqStatus lq_beamsplitter_loop(const struct LqComplex *t,
                                   size_t n1,
                                   size_t n2,
                                   const struct LqComponent *plant,
                                   struct LqComponent **out);

/*
 Writes `Xi(s)` (n×n, row-major) to `out`.

 # Safety
 `comp` must be live; `out` must have room for `len` entries.
 */
enum LqStatus lq_transfer(const struct LqComponent *comp,
                          struct LqComplex s,
                          struct LqComplex *out,
                          size_t len);

/*
 Converts a Stratonovich model `E` (n×n), `F` (n×m), `K` (m×m) to a component.

 # Safety
 Arrays must hold the stated number of entries; `out` must be writable.
 */
enum LqStatus lq_strat_to_ito(size_t n_ports,
                              size_t n_modes,
                              const struct LqComplex *e,
                              const struct LqComplex *f,
                              const struct LqComplex *k,
                              struct LqComponent **out);

/*
 Parses QNET text and reduces its network (or its only component).

 # Safety
 `source` must be a NUL-terminated string; `out` must be writable.
 */
enum LqStatus lq_netfile_reduce(const char *source, struct LqComponent **out);

/*
 Canonical QNET text for one component. Free it with `lq_string_free`.

 # Safety
 `comp` must be live; `out` must be writable.
 */
enum LqStatus lq_component_to_qnet(const struct LqComponent *comp, char **out);

/*
 Releases a string returned by this library. Null is ignored.

 # Safety
 `s` must come from this library and not be used afterwards.
 */
void lq_string_free(char *s);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* LINQNET_H */
