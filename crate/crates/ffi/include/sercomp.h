#ifndef SERCOMP_H
#define SERCOMP_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Result code of every exported function.
typedef enum SercompStatus {
  SERCOMP_STATUS_OK = 0,
  // A parameter, configuration key or channel name was rejected.
  SERCOMP_STATUS_INVALID_INPUT = 1,
  // The integration diverged or the controller lost its sending bus.
  SERCOMP_STATUS_SIMULATION_FAILED = 2,
  // The requested flow is beyond the line's transfer capability.
  SERCOMP_STATUS_INFEASIBLE = 3,
  SERCOMP_STATUS_NULL_POINTER = 4,
  // A Rust panic was caught at the boundary.
  SERCOMP_STATUS_PANIC = 5,
} SercompStatus;

// Recorded time series of one run.
typedef struct SercompResult SercompResult;

// A validated run configuration.
typedef struct SercompScenario SercompScenario;

// Line constants. `c_shunt_per_end_f` is only used by the split-π model.
typedef struct SercompLine {
  double r_series_ohm;
  double l_series_h;
  double f0_hz;
  double c_shunt_per_end_f;
} SercompLine;

// Line admittance at one complex frequency. `G_ββ = G_αα` and
// `G_βα = −G_αβ`.
typedef struct SercompAdmittance {
  double g_aa_re;
  double g_aa_im;
  double g_ab_re;
  double g_ab_im;
} SercompAdmittance;

// αβ bus voltages driving the line.
typedef struct SercompBus {
  double vs_alpha;
  double vs_beta;
  double vr_alpha;
  double vr_beta;
  double vcon_alpha;
  double vcon_beta;
} SercompBus;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Library version as a static NUL-terminated string.
const char *sercomp_version(void);

// Copies the calling thread's last error message into `buf` (truncated,
// always NUL-terminated when `len > 0`) and returns the full message
// length in bytes, excluding the terminator.
//
// # Safety
// `buf` must be null or valid for `len` bytes.
size_t sercomp_last_error_message(char *buf, size_t len);

// Amplitude-invariant Clarke transform.
//
// # Safety
// `alpha` and `beta` must be valid for writes.
enum SercompStatus sercomp_clarke(double a, double b, double c, double *alpha, double *beta);

// Inverse Clarke transform with zero zero-sequence.
//
// # Safety
// `a`, `b` and `c` must be valid for writes.
enum SercompStatus sercomp_inverse_clarke(double alpha,
                                          double beta,
                                          double *a,
                                          double *b,
                                          double *c);

// Subsynchronous resonance frequency `f0·√N`, Hz.
//
// # Safety
// `out` must be valid for a write.
enum SercompStatus sercomp_ssr_frequency(double n_pu, double f0_hz, double *out);

// Transfer capability gain `1/(1 − N)`.
//
// # Safety
// `out` must be valid for a write.
enum SercompStatus sercomp_loadability_gain(double n_pu, double *out);

// Total series capacitance for compensation degree `n_pu`, F.
//
// # Safety
// `line` must point to a valid [`SercompLine`]; `c_total_f` must be valid
// for a write.
enum SercompStatus sercomp_size_series_capacitor(const struct SercompLine *line,
                                                 double n_pu,
                                                 uint32_t num_segments,
                                                 double *c_total_f);

// Instantaneous three-phase P and Q from αβ voltage and current, sending-end
// sign convention.
//
// # Safety
// `p` and `q` must be valid for writes.
enum SercompStatus sercomp_instantaneous_pq(double v_alpha,
                                            double v_beta,
                                            double i_alpha,
                                            double i_beta,
                                            double *p,
                                            double *q);

// Line admittance at `s = s_re + j·s_im`, rad/s. `n_pu = 0` gives the bare line.
//
// # Safety
// `line` must point to a valid [`SercompLine`]; `out` must be valid for a write.
enum SercompStatus sercomp_line_admittance(const struct SercompLine *line,
                                           double n_pu,
                                           double s_re,
                                           double s_im,
                                           struct SercompAdmittance *out);

// Time derivatives of P and Q for a compensated line, W/s and var/s.
//
// # Safety
// `line` and `bus` must point to valid structs; `dp_dt` and `dq_dt` must
// be valid for writes.
enum SercompStatus sercomp_pq_derivatives(const struct SercompLine *line,
                                          double n_pu,
                                          const struct SercompBus *bus,
                                          double p,
                                          double q,
                                          double *dp_dt,
                                          double *dq_dt);

// Parses and validates a JSON run configuration (the format read by the
// `sercomp` command line tool).
//
// # Safety
// `json` must be a NUL-terminated string; `out` must be valid for a write.
enum SercompStatus sercomp_scenario_from_json(const char *json, struct SercompScenario **out);

// # Safety
// `scenario` must be null or a handle from [`sercomp_scenario_from_json`]
// not freed before.
void sercomp_scenario_free(struct SercompScenario *scenario);

// Runs a scenario. The scenario stays owned by the caller.
//
// # Safety
// `scenario` must be a live handle; `out` must be valid for a write.
enum SercompStatus sercomp_scenario_run(const struct SercompScenario *scenario,
                                        struct SercompResult **out);

// # Safety
// `result` must be null or a handle from [`sercomp_scenario_run`] not
// freed before.
void sercomp_result_free(struct SercompResult *result);

// Number of samples per channel and the step size.
//
// # Safety
// `result` must be a live handle; `len` and `dt` must be valid for writes.
enum SercompStatus sercomp_result_shape(const struct SercompResult *result,
                                        size_t *len,
                                        double *dt);

// Borrows a recorded channel by name, or the sample times for `"time_s"`.
// The data stays valid until the result is freed.
//
// # Safety
// `result` must be a live handle, `name` a NUL-terminated string, `data`
// and `len` valid for writes.
enum SercompStatus sercomp_result_channel(const struct SercompResult *result,
                                          const char *name,
                                          const double **data,
                                          size_t *len);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* SERCOMP_H */
