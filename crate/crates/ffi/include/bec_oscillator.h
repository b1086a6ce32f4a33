#ifndef BEC_OSCILLATOR_H
#define BEC_OSCILLATOR_H

/* Generated by cbindgen from src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

// Coupling `εX/X₀`.
#define BEC_COUPLING_POSITION 0

// Coupling `εX²/X₀²`.
#define BEC_COUPLING_POSITION_SQUARED 1

typedef enum BecStatus {
  BEC_STATUS_OK = 0,
  BEC_STATUS_NULL_POINTER = -1,
  BEC_STATUS_INVALID_ARGUMENT = -2,
  BEC_STATUS_BREAKUP = -3,
  BEC_STATUS_TOLERANCE_NOT_MET = -4,
  BEC_STATUS_SCHEMA = -5,
  BEC_STATUS_INCOMPATIBLE_METHOD = -6,
  BEC_STATUS_IO = -7,
  BEC_STATUS_PANIC = -8,
} BecStatus;

// Opaque weighted set of couplings.
typedef struct BecEnsemble BecEnsemble;

// Opaque parsed scenario.
typedef struct BecScenario BecScenario;

// Position and momentum moments, in physical units with ħ = 1.
typedef struct BecMoments {
  double mean_x;
  double mean_p;
  double mean_x2;
  double mean_p2;
  // `⟨XP + PX⟩`
  double mean_xp_sym;
} BecMoments;

typedef struct BecComplex {
  double re;
  double im;
} BecComplex;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message for the last failed call on this thread; empty after a success.
// The pointer stays valid until the next call into this library on the
// same thread.
const char *bec_last_error_message(void);

// Library version as a static NUL-terminated string.
const char *bec_version(void);

// Moments of the coherent state with the given means.
//
// # Safety
// `out_moments` must be null or point to writable memory for one `BecMoments`.
enum BecStatus bec_coherent_state(double mass,
                                  double omega0,
                                  double mean_x,
                                  double mean_p,
                                  struct BecMoments *out_moments);

// Binomial ensemble with couplings `ε_n = δΩ(N − 2n)`.
//
// # Safety
// `out_ensemble` must be null or point to writable memory for one pointer.
enum BecStatus bec_binomial_ensemble_new(uintptr_t n_atoms,
                                         double delta_omega,
                                         struct BecEnsemble **out_ensemble);

// Weights `∝ exp(−α ω_n)` on the branches with `ε_n ≤ 0`.
//
// # Safety
// `out_ensemble` must be null or point to writable memory for one pointer.
enum BecStatus bec_truncated_exponential_ensemble_new(uintptr_t n_atoms,
                                                      double delta_omega,
                                                      double alpha,
                                                      double omega0,
                                                      struct BecEnsemble **out_ensemble);

// Number of branches (`N + 1`).
//
// # Safety
// `ensemble` must be null or a live handle; `out_len` null or writable.
enum BecStatus bec_ensemble_len(const struct BecEnsemble *ensemble, uintptr_t *out_len);

// Coupling and weight of branch `index`.
//
// # Safety
// `ensemble` must be null or a live handle; the out-pointers null or writable.
enum BecStatus bec_ensemble_entry(const struct BecEnsemble *ensemble,
                                  uintptr_t index,
                                  double *out_epsilon,
                                  double *out_weight);

// Releases an ensemble. Null is ignored.
//
// # Safety
// `ensemble` must be null or a handle not yet freed.
void bec_ensemble_free(struct BecEnsemble *ensemble);

// Ensemble-averaged moments at reduced time `tau = ω₀t`.
//
// # Safety
// `ensemble` must be null or a live handle; `initial` null or readable;
// `out_moments` null or writable.
enum BecStatus bec_ensemble_average(const struct BecEnsemble *ensemble,
                                    uint32_t coupling_kind,
                                    double mass,
                                    double omega0,
                                    double tau,
                                    const struct BecMoments *initial,
                                    struct BecMoments *out_moments);

// `f_β(τ; σ)` by adaptive quadrature. `beta` is −1, 0 or 1.
//
// # Safety
// Out-pointers must be null or writable; `out_est_error` may be null.
enum BecStatus bec_f_beta(int32_t beta,
                          double tau,
                          double sigma,
                          double abs_tol,
                          double rel_tol,
                          struct BecComplex *out_value,
                          double *out_est_error);

// Weak-coupling approximation of `f_β`, independent of β.
//
// # Safety
// `out_value` must be null or writable.
enum BecStatus bec_f_beta_gaussian_approx(double tau, double sigma, struct BecComplex *out_value);

// Power-law mean position at physical time `t`; requires `⟨X(0)⟩ = 0`.
//
// # Safety
// `initial` must be null or readable; `out_mean_x` null or writable.
enum BecStatus bec_power_law_mean_x(double mass,
                                    double omega0,
                                    double t,
                                    double alpha,
                                    const struct BecMoments *initial,
                                    double *out_mean_x);

// Mass of the Gaussian coupling density `N(0, κ²)` below `−ω₀/4`.
//
// # Safety
// `out_mass` must be null or writable.
enum BecStatus bec_breakup_mass_gaussian(double kappa, double omega0, double *out_mass);

// Parses a scenario document.
//
// # Safety
// `document` must be null or a NUL-terminated string; `out_scenario` null
// or writable.
enum BecStatus bec_scenario_parse(const char *document, struct BecScenario **out_scenario);

// Runs a scenario and writes one CSV per method plus `manifest.txt` into
// `out_dir`.
//
// # Safety
// `scenario` must be null or a live handle; `out_dir` null or a
// NUL-terminated string.
enum BecStatus bec_scenario_run_to_dir(const struct BecScenario *scenario, const char *out_dir);

// Releases a scenario. Null is ignored.
//
// # Safety
// `scenario` must be null or a handle not yet freed.
void bec_scenario_free(struct BecScenario *scenario);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* BEC_OSCILLATOR_H */
