#include "photonic_lab/photonic_lab.h"

#include "photonic_lab/error.hpp"
#include "photonic_lab/harmonic.hpp"
#include "photonic_lab/mzi.hpp"
#include "photonic_lab/numerics.hpp"
#include "photonic_lab/scenario.hpp"
#include "photonic_lab/slab.hpp"
#include "photonic_lab/spectra.hpp"
#include "photonic_lab/tmm.hpp"

#include <cmath>
#include <limits>
#include <new>
#include <string>
#include <vector>

namespace pl = photonic_lab;

struct pl_spectrum {
  pl::Spectrum s;
};

struct pl_scenario {
  pl::scenario::Scenario s;
};

struct pl_run_result {
  pl::scenario::RunReport r;
};

namespace {

thread_local std::string g_last_error;

pl_status status_of(pl::ErrorCode c) {
  switch (c) {
    case pl::ErrorCode::domain: return PL_ERR_DOMAIN;
    case pl::ErrorCode::not_found: return PL_ERR_NOT_FOUND;
    case pl::ErrorCode::config: return PL_ERR_CONFIG;
    case pl::ErrorCode::parse: return PL_ERR_PARSE;
    case pl::ErrorCode::validation: return PL_ERR_VALIDATION;
    case pl::ErrorCode::instability: return PL_ERR_INSTABILITY;
    case pl::ErrorCode::stencil: return PL_ERR_STENCIL;
    case pl::ErrorCode::tracking: return PL_ERR_TRACKING;
    case pl::ErrorCode::insufficient_ringdown: return PL_ERR_INSUFFICIENT_RINGDOWN;
    case pl::ErrorCode::io: return PL_ERR_IO;
  }
  return PL_ERR_INTERNAL;
}

pl_status set_error(pl_status s, std::string message) {
  g_last_error = std::move(message);
  return s;
}

// Runs `body`, translating exceptions into status codes and the thread-local message.
template <class F>
pl_status guarded(F&& body) {
  try {
    body();
    g_last_error.clear();
    return PL_OK;
  } catch (const pl::Error& e) {
    return set_error(status_of(e.code()), e.what());
  } catch (const std::bad_alloc&) {
    return set_error(PL_ERR_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return set_error(PL_ERR_INTERNAL, e.what());
  } catch (...) {
    return set_error(PL_ERR_INTERNAL, "unknown failure");
  }
}

pl_status null_argument(const char* what) { return set_error(PL_ERR_INVALID_ARGUMENT, std::string(what) + " is null"); }

pl::MziConfig to_cpp(const pl_mzi_config& c) {
  pl::MziConfig m;
  m.delta_l_um = c.delta_l_um;
  m.l_spiral_mm = c.l_spiral_mm;
  m.n_eff = c.n_eff;
  m.n_gr = c.n_gr;
  m.alpha_db_per_mm = c.alpha_db_per_mm;
  m.dn_dT_per_K = c.dn_dT_per_K;
  m.split_ratio = c.split_ratio;
  m.lambda_ref_nm = c.lambda_ref_nm;
  return m;
}

pl::PhcSpec to_cpp(const pl_phc_spec& c) {
  pl::PhcSpec s;
  s.period_nm = c.period_nm;
  s.n_high = c.n_high;
  s.n_low = c.n_low;
  s.ff_center = c.ff_center;
  s.ff_edge = c.ff_edge;
  s.n_segments = c.n_segments;
  s.cavity_length_nm = c.cavity_length_nm;
  s.loss_k_high = c.loss_k_high;
  s.loss_k_low = c.loss_k_low;
  s.n_bound = c.n_bound;
  return s;
}

// Copies up to `capacity` items; reports the full count and BUFFER_TOO_SMALL when truncated.
template <class T>
pl_status deliver(const std::vector<T>& items, T* out, size_t capacity, size_t* count) {
  *count = items.size();
  if (capacity == 0) return PL_OK;
  if (!out) return null_argument("output array");
  if (capacity < items.size())
    return set_error(PL_ERR_BUFFER_TOO_SMALL, "output capacity " + std::to_string(capacity) + " < " +
                                                  std::to_string(items.size()));
  for (size_t i = 0; i < items.size(); ++i) out[i] = items[i];
  return PL_OK;
}

}  // namespace

extern "C" {

const char* pl_version(void) { return PHOTONIC_LAB_VERSION; }

const char* pl_status_name(pl_status s) {
  switch (s) {
    case PL_OK: return "ok";
    case PL_ERR_DOMAIN: return "domain";
    case PL_ERR_NOT_FOUND: return "not_found";
    case PL_ERR_CONFIG: return "config";
    case PL_ERR_PARSE: return "parse";
    case PL_ERR_VALIDATION: return "validation";
    case PL_ERR_INSTABILITY: return "instability";
    case PL_ERR_STENCIL: return "stencil";
    case PL_ERR_TRACKING: return "tracking";
    case PL_ERR_INSUFFICIENT_RINGDOWN: return "insufficient_ringdown";
    case PL_ERR_IO: return "io";
    case PL_ERR_INVALID_ARGUMENT: return "invalid_argument";
    case PL_ERR_BUFFER_TOO_SMALL: return "buffer_too_small";
    case PL_ERR_INTERNAL: return "internal";
  }
  return "unknown";
}

const char* pl_last_error_message(void) { return g_last_error.c_str(); }

pl_status pl_spectrum_create(const double* wl, const double* v, size_t n, pl_spectrum** out) {
  if (!out) return null_argument("out");
  *out = nullptr;
  if (n > 0 && (!wl || !v)) return null_argument("sample array");
  return guarded([&] { *out = new pl_spectrum{pl::Spectrum({wl, wl + n}, {v, v + n})}; });
}

void pl_spectrum_destroy(pl_spectrum* s) { delete s; }

size_t pl_spectrum_size(const pl_spectrum* s) { return s ? s->s.size() : 0; }

pl_status pl_spectrum_data(const pl_spectrum* s, const double** wl, const double** v) {
  if (!s || !wl || !v) return null_argument("spectrum or output pointer");
  *wl = s->s.wavelengths_nm().data();
  *v = s->s.values().data();
  g_last_error.clear();
  return PL_OK;
}

pl_status pl_fit_lorentzian(const pl_spectrum* s, double lo, double hi, pl_peak* out) {
  if (!s || !out) return null_argument("spectrum or out");
  return guarded([&] {
    const auto p = pl::fit_lorentzian(s->s, {lo, hi});
    *out = {p.lambda0_nm, p.fwhm_nm, p.q, p.amplitude, p.baseline, p.normalized_rms, p.poor_fit ? 1 : 0};
  });
}

pl_status pl_to_db(double ratio, double* out) {
  if (!out) return null_argument("out_db");
  return guarded([&] { *out = pl::to_db(ratio); });
}

pl_status pl_extinction_ratio(const pl_spectrum* s, double* out, int* unbounded) {
  if (!s || !out || !unbounded) return null_argument("spectrum or output pointer");
  return guarded([&] {
    const auto e = pl::extinction_ratio(s->s);
    *out = e.value;
    *unbounded = e.infinite ? 1 : 0;
  });
}

pl_status pl_slab_modes(double n_core, double n_sub, double n_clad, double t, double lambda, int tm,
                        double* n_eff, size_t capacity, size_t* count) {
  if (!count) return null_argument("count");
  std::vector<double> found;
  const pl_status s = guarded([&] {
    pl::SlabWaveguide wg{n_core, n_sub, n_clad, t};
    for (const auto& m : pl::solve_modes(wg, lambda, tm ? pl::Polarization::TM : pl::Polarization::TE))
      found.push_back(m.n_eff);
  });
  if (s != PL_OK) return s;
  return deliver(found, n_eff, capacity, count);
}

void pl_mzi_config_default(pl_mzi_config* c) {
  if (!c) return;
  const pl::MziConfig d;
  *c = {d.delta_l_um, d.l_spiral_mm, d.n_eff, d.n_gr, d.alpha_db_per_mm, d.dn_dT_per_K, d.split_ratio, d.lambda_ref_nm};
}

pl_status pl_mzi_transmission(const pl_mzi_config* c, double lambda, double dT_long, double dT_short, double* out) {
  if (!c || !out) return null_argument("config or out");
  return guarded([&] {
    pl::HeaterDrive d;
    d.dT_long_K = dT_long;
    d.dT_short_K = dT_short;
    *out = pl::single_transmission(to_cpp(*c), lambda, d);
  });
}

pl_status pl_mzi_switching_delta_t(double lambda, double l_mm, double dn_dT, double* out) {
  if (!out) return null_argument("out_K");
  return guarded([&] { *out = pl::switching_delta_t(lambda, l_mm, dn_dT); });
}

pl_status pl_mzi_cascade_transmission(const pl_mzi_config* s1, const pl_mzi_config* s2, double dphi1,
                                      double dphi2, double* out) {
  if (!s1 || !s2 || !out) return null_argument("stage config or out");
  return guarded([&] { *out = pl::cascade_transmission({to_cpp(*s1), to_cpp(*s2)}, dphi1, dphi2); });
}

void pl_phc_spec_default(pl_phc_spec* c) {
  if (!c) return;
  const pl::PhcSpec d;
  *c = {d.period_nm, d.n_high, d.n_low, d.ff_center, d.ff_edge, d.n_segments, d.cavity_length_nm,
        d.loss_k_high, d.loss_k_low, d.n_bound};
}

pl_status pl_tmm_resonances(const pl_phc_spec* spec, double lo, double hi, size_t points, pl_resonance* out,
                            size_t capacity, size_t* count) {
  if (!spec || !count) return null_argument("spec or count");
  if (points < 2 || !(hi > lo)) return set_error(PL_ERR_INVALID_ARGUMENT, "need points >= 2 and hi > lo");
  std::vector<pl_resonance> found;
  const pl_status s = guarded([&] {
    for (const auto& m : pl::cavity_resonances(to_cpp(*spec), pl::numerics::linspace(lo, hi, points)))
      found.push_back({m.order, m.lambda_res_nm, m.q, m.fwhm_nm, m.peak_transmission});
  });
  if (s != PL_OK) return s;
  return deliver(found, out, capacity, count);
}

pl_status pl_resonance_analysis(const double* signal, size_t n, double dt, double omega_min, double omega_max,
                                pl_harmonic_mode* out, size_t capacity, size_t* count) {
  if (!signal || !count) return null_argument("signal or count");
  std::vector<pl_harmonic_mode> found;
  const pl_status s = guarded([&] {
    pl::HarmonicOptions o;
    o.omega_min = omega_min;
    o.omega_max = omega_max;
    for (const auto& m : pl::resonance_analysis({signal, signal + n}, dt, {}, o))
      found.push_back({m.omega, m.alpha, m.amplitude, m.phase, m.q, m.q_sigma, m.q_lower_bound ? 1 : 0});
  });
  if (s != PL_OK) return s;
  return deliver(found, out, capacity, count);
}

size_t pl_kind_count(void) { return pl::scenario::kinds().size(); }

const char* pl_kind_name(size_t i) {
  const auto& k = pl::scenario::kinds();
  return i < k.size() ? k[i].c_str() : nullptr;
}

pl_status pl_scenario_parse(const char* text, pl_scenario** out) {
  if (!text || !out) return null_argument("json_text or out");
  *out = nullptr;
  return guarded([&] { *out = new pl_scenario{pl::scenario::parse(text)}; });
}

void pl_scenario_destroy(pl_scenario* s) { delete s; }

const char* pl_scenario_kind(const pl_scenario* s) { return s ? s->s.kind.c_str() : nullptr; }

size_t pl_scenario_point_count(const pl_scenario* s) {
  if (!s) return 0;
  return s->s.sweep ? s->s.sweep->values.size() : 1;
}

pl_status pl_scenario_validate(const pl_scenario* s) {
  if (!s) return null_argument("scenario");
  return guarded([&] { pl::scenario::validate(s->s); });
}

pl_status pl_scenario_run(const pl_scenario* s, const pl_run_options* o, pl_run_result** out) {
  if (!s || !out) return null_argument("scenario or out");
  *out = nullptr;
  return guarded([&] {
    pl::scenario::RunOptions ro;
    if (o) {
      if (o->output_dir) ro.output_dir = o->output_dir;
      ro.jobs = o->jobs < 1 ? 1 : o->jobs;
      if (o->log) {
        const pl_log_fn fn = o->log;
        void* user = o->log_user;
        ro.log = [fn, user](const std::string& line) { fn(line.c_str(), user); };
      }
    }
    *out = new pl_run_result{pl::scenario::run(s->s, ro)};
  });
}

void pl_run_result_destroy(pl_run_result* r) { delete r; }

const char* pl_run_result_output_dir(const pl_run_result* r) { return r ? r->r.output_dir.c_str() : nullptr; }

size_t pl_run_result_output_count(const pl_run_result* r) { return r ? r->r.outputs.size() : 0; }

const char* pl_run_result_output(const pl_run_result* r, size_t i) {
  return r && i < r->r.outputs.size() ? r->r.outputs[i].c_str() : nullptr;
}

size_t pl_run_result_warning_count(const pl_run_result* r) { return r ? r->r.warnings.size() : 0; }

const char* pl_run_result_warning(const pl_run_result* r, size_t i) {
  return r && i < r->r.warnings.size() ? r->r.warnings[i].c_str() : nullptr;
}

size_t pl_run_result_failure_count(const pl_run_result* r) { return r ? r->r.failures.size() : 0; }

pl_status pl_run_result_failure(const pl_run_result* r, size_t i, size_t* point, pl_status* code,
                                const char** message) {
  if (!r || !point || !code || !message) return null_argument("result or output pointer");
  if (i >= r->r.failures.size()) return set_error(PL_ERR_INVALID_ARGUMENT, "failure index out of range");
  const auto& f = r->r.failures[i];
  *point = f.index;
  *code = status_of(f.code);
  *message = f.message.c_str();
  g_last_error.clear();
  return PL_OK;
}

}  // extern "C"
