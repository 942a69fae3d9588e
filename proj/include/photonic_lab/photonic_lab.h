/* photonic-lab C interface. All functions are thread-safe unless they share a handle. */
#ifndef PHOTONIC_LAB_H
#define PHOTONIC_LAB_H

#include <stddef.h>

#ifdef __cplusplus
extern "C" {
#endif

#if defined(PL_BUILDING_LIBRARY)
#define PL_API __attribute__((visibility("default")))
#else
#define PL_API
#endif

typedef enum pl_status {
  PL_OK = 0,
  PL_ERR_DOMAIN = 1,
  PL_ERR_NOT_FOUND = 2,
  PL_ERR_CONFIG = 3,
  PL_ERR_PARSE = 4,
  PL_ERR_VALIDATION = 5,
  PL_ERR_INSTABILITY = 6,
  PL_ERR_STENCIL = 7,
  PL_ERR_TRACKING = 8,
  PL_ERR_INSUFFICIENT_RINGDOWN = 9,
  PL_ERR_IO = 10,
  PL_ERR_INVALID_ARGUMENT = 100, /* null handle or pointer, bad size */
  PL_ERR_BUFFER_TOO_SMALL = 101, /* *count holds the required capacity */
  PL_ERR_INTERNAL = 102
} pl_status;

PL_API const char* pl_version(void);
/* Stable lower-case name, e.g. "validation". */
PL_API const char* pl_status_name(pl_status status);
/* Message of the last failed call on this thread; "" after a success. */
PL_API const char* pl_last_error_message(void);

/* ---- spectra ---------------------------------------------------------- */

typedef struct pl_spectrum pl_spectrum;

PL_API pl_status pl_spectrum_create(const double* wavelengths_nm, const double* values, size_t n,
                                    pl_spectrum** out);
PL_API void pl_spectrum_destroy(pl_spectrum* spectrum);
PL_API size_t pl_spectrum_size(const pl_spectrum* spectrum);
/* Borrowed arrays, valid while the handle lives. */
PL_API pl_status pl_spectrum_data(const pl_spectrum* spectrum, const double** wavelengths_nm,
                                  const double** values);

typedef struct pl_peak {
  double lambda0_nm;
  double fwhm_nm;
  double q;
  double amplitude;
  double baseline;
  double normalized_rms;
  int poor_fit;
} pl_peak;

PL_API pl_status pl_fit_lorentzian(const pl_spectrum* spectrum, double lo_nm, double hi_nm, pl_peak* out);
PL_API pl_status pl_to_db(double ratio, double* out_db);
/* *unbounded is set when the minimum is exactly zero; *out_db is then +inf. */
PL_API pl_status pl_extinction_ratio(const pl_spectrum* spectrum, double* out_db, int* unbounded);

/* ---- slab waveguide --------------------------------------------------- */

/* Effective indices in descending order. Pass capacity 0 to query *count. */
PL_API pl_status pl_slab_modes(double n_core, double n_sub, double n_clad, double thickness_nm,
                               double lambda_nm, int tm, double* n_eff, size_t capacity, size_t* count);

/* ---- Mach-Zehnder ----------------------------------------------------- */

typedef struct pl_mzi_config {
  double delta_l_um;
  double l_spiral_mm;
  double n_eff;
  double n_gr;
  double alpha_db_per_mm;
  double dn_dT_per_K;
  double split_ratio;
  double lambda_ref_nm;
} pl_mzi_config;

PL_API void pl_mzi_config_default(pl_mzi_config* cfg);
PL_API pl_status pl_mzi_transmission(const pl_mzi_config* cfg, double lambda_nm, double dT_long_K,
                                     double dT_short_K, double* out);
PL_API pl_status pl_mzi_switching_delta_t(double lambda_nm, double l_spiral_mm, double dn_dT_per_K,
                                          double* out_K);
PL_API pl_status pl_mzi_cascade_transmission(const pl_mzi_config* stage1, const pl_mzi_config* stage2,
                                             double dphi1, double dphi2, double* out);

/* ---- 1D photonic-crystal cavity ---------------------------------------- */

typedef struct pl_phc_spec {
  double period_nm;
  double n_high;
  double n_low;
  double ff_center;
  double ff_edge;
  int n_segments;
  double cavity_length_nm;
  double loss_k_high;
  double loss_k_low;
  double n_bound; /* 0 = n_high */
} pl_phc_spec;

typedef struct pl_resonance {
  int order;
  double lambda_res_nm;
  double q;
  double fwhm_nm;
  double peak_transmission;
} pl_resonance;

PL_API void pl_phc_spec_default(pl_phc_spec* spec);
/* In-gap resonances over a uniform wavelength grid; capacity 0 queries *count. */
PL_API pl_status pl_tmm_resonances(const pl_phc_spec* spec, double lo_nm, double hi_nm, size_t points,
                                   pl_resonance* out, size_t capacity, size_t* count);

/* ---- ring-down analysis ------------------------------------------------ */

typedef struct pl_harmonic_mode {
  double omega;
  double alpha;
  double amplitude;
  double phase;
  double q;
  double q_sigma;
  int q_lower_bound;
} pl_harmonic_mode;

PL_API pl_status pl_resonance_analysis(const double* signal, size_t n, double dt, double omega_min,
                                       double omega_max, pl_harmonic_mode* out, size_t capacity,
                                       size_t* count);

/* ---- scenarios ---------------------------------------------------------- */

PL_API size_t pl_kind_count(void);
PL_API const char* pl_kind_name(size_t index);

typedef struct pl_scenario pl_scenario;
typedef struct pl_run_result pl_run_result;
typedef void (*pl_log_fn)(const char* line, void* user);

typedef struct pl_run_options {
  const char* output_dir; /* NULL: the scenario's own output_dir */
  int jobs;               /* < 1 means 1 */
  pl_log_fn log;          /* optional progress sink */
  void* log_user;
} pl_run_options;

PL_API pl_status pl_scenario_parse(const char* json_text, pl_scenario** out);
PL_API void pl_scenario_destroy(pl_scenario* scenario);
PL_API const char* pl_scenario_kind(const pl_scenario* scenario);
PL_API size_t pl_scenario_point_count(const pl_scenario* scenario);
PL_API pl_status pl_scenario_validate(const pl_scenario* scenario);
PL_API pl_status pl_scenario_run(const pl_scenario* scenario, const pl_run_options* options,
                                 pl_run_result** out);

PL_API void pl_run_result_destroy(pl_run_result* result);
PL_API const char* pl_run_result_output_dir(const pl_run_result* result);
PL_API size_t pl_run_result_output_count(const pl_run_result* result);
PL_API const char* pl_run_result_output(const pl_run_result* result, size_t index);
PL_API size_t pl_run_result_warning_count(const pl_run_result* result);
PL_API const char* pl_run_result_warning(const pl_run_result* result, size_t index);
PL_API size_t pl_run_result_failure_count(const pl_run_result* result);
PL_API pl_status pl_run_result_failure(const pl_run_result* result, size_t index, size_t* point,
                                       pl_status* code, const char** message);

#ifdef __cplusplus
}
#endif

#endif /* PHOTONIC_LAB_H */
