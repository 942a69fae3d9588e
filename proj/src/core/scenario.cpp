#include "photonic_lab/scenario.hpp"

#include "photonic_lab/cavity_analysis.hpp"
#include "photonic_lab/grating.hpp"
#include "photonic_lab/mzi.hpp"
#include "photonic_lab/numerics.hpp"
#include "photonic_lab/slab.hpp"
#include "photonic_lab/tmm.hpp"

#include <openssl/evp.h>

#include <atomic>
#include <chrono>
#include <cmath>
#include <exception>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <mutex>
#include <set>
#include <thread>

namespace photonic_lab::scenario {

namespace {

using json = nlohmann::json;
namespace fs = std::filesystem;
using numerics::format_double;

constexpr double kInf = std::numeric_limits<double>::infinity();

[[noreturn]] void invalid(const std::string& message) { fail(ErrorCode::validation, message); }

// Typed reads from one JSON object; keys never read are rejected by finish().
class Params {
 public:
  Params(const json& j, std::string where) : j_(j), where_(std::move(where)) {
    if (!j_.is_object()) invalid(where_ + " must be an object");
  }

  bool has(const std::string& key) const { return j_.contains(key); }

  double number(const std::string& key, std::optional<double> fallback, double lo = -kInf,
                double hi = kInf, bool lo_open = false) {
    used_.insert(key);
    if (!j_.contains(key)) {
      if (!fallback) invalid("missing required parameter " + path(key));
      return *fallback;
    }
    const json& v = j_.at(key);
    if (!v.is_number()) invalid(path(key) + " must be a number");
    const double x = v.get<double>();
    if (!std::isfinite(x)) invalid(path(key) + " must be finite");
    if (x < lo || (lo_open && x == lo) || x > hi)
      invalid(path(key) + " = " + format_double(x) + " is outside " + (lo_open ? "(" : "[") +
              format_double(lo) + ", " + format_double(hi) + "]");
    return x;
  }

  int integer(const std::string& key, std::optional<int> fallback, int lo, int hi) {
    const double x = number(key, fallback ? std::optional<double>(*fallback) : std::nullopt, lo, hi);
    if (x != std::floor(x)) invalid(path(key) + " must be an integer");
    return static_cast<int>(x);
  }

  std::string text(const std::string& key, std::optional<std::string> fallback,
                   const std::vector<std::string>& allowed) {
    used_.insert(key);
    std::string v;
    if (!j_.contains(key)) {
      if (!fallback) invalid("missing required parameter " + path(key));
      v = *fallback;
    } else {
      if (!j_.at(key).is_string()) invalid(path(key) + " must be a string");
      v = j_.at(key).get<std::string>();
    }
    if (!allowed.empty() && std::find(allowed.begin(), allowed.end(), v) == allowed.end()) {
      std::string list;
      for (const auto& a : allowed) list += (list.empty() ? "" : ", ") + a;
      invalid(path(key) + " = '" + v + "' is not one of {" + list + "}");
    }
    return v;
  }

  bool flag(const std::string& key, bool fallback) {
    used_.insert(key);
    if (!j_.contains(key)) return fallback;
    if (!j_.at(key).is_boolean()) invalid(path(key) + " must be true or false");
    return j_.at(key).get<bool>();
  }

  std::vector<double> numbers(const std::string& key, bool required) {
    used_.insert(key);
    std::vector<double> out;
    if (!j_.contains(key)) {
      if (required) invalid("missing required parameter " + path(key));
      return out;
    }
    const json& v = j_.at(key);
    if (!v.is_array()) invalid(path(key) + " must be an array of numbers");
    for (const auto& x : v) {
      if (!x.is_number()) invalid(path(key) + " must contain only numbers");
      out.push_back(x.get<double>());
    }
    if (out.empty()) invalid(path(key) + " must not be empty");
    return out;
  }

  const json& raw(const std::string& key) {
    used_.insert(key);
    return j_.at(key);
  }

  // Sub-object; an absent key reads as an empty object so defaults apply.
  Params child(const std::string& key) {
    used_.insert(key);
    static const json empty = json::object();
    return Params(j_.contains(key) ? j_.at(key) : empty, path(key));
  }

  void finish() const {
    for (auto it = j_.begin(); it != j_.end(); ++it)
      if (!used_.count(it.key())) invalid("unknown parameter " + path(it.key()));
  }

  std::string path(const std::string& key) const { return where_ + "." + key; }

 private:
  const json& j_;
  std::string where_;
  std::set<std::string> used_;
};

struct Artifact {
  std::string name;
  std::string content;
};

struct PointResult {
  std::vector<Artifact> artifacts;
  std::vector<std::pair<std::string, double>> summary;
  std::vector<std::string> warnings;
};

using Job = std::function<PointResult()>;

std::string csv_row(const std::vector<std::string>& cells) {
  std::string out;
  for (std::size_t k = 0; k < cells.size(); ++k) {
    if (k) out += ',';
    out += cells[k];
  }
  return out + '\n';
}

std::string fmt(double x) { return format_double(x); }

std::vector<double> wavelength_grid(Params& p, double default_points) {
  const double lo = p.number("lambda_start_nm", std::nullopt, 0.0, kInf, true);
  const double hi = p.number("lambda_stop_nm", lo, lo, kInf);
  const int n = p.integer("lambda_points", hi > lo ? static_cast<int>(default_points) : 1, 1, 10000000);
  if (hi > lo && n < 2) invalid("lambda_points must be at least 2 for a wavelength range");
  if (n == 1) return {lo};
  return numerics::linspace(lo, hi, static_cast<std::size_t>(n));
}

// ---- slab ----------------------------------------------------------------

Job prepare_slab(Params& p) {
  SlabWaveguide wg;
  wg.n_core = p.number("n_core", std::nullopt, 1.0, kInf);
  wg.n_sub = p.number("n_sub", 1.0, 1.0, kInf);
  wg.n_clad = p.number("n_clad", 1.0, 1.0, kInf);
  wg.thickness_nm = p.number("thickness_nm", std::nullopt, 0.0, kInf, true);
  const Polarization pol = p.text("polarization", "TE", {"TE", "TM"}) == "TE" ? Polarization::TE : Polarization::TM;
  const bool ridge = p.has("ridge_width_nm");
  RidgeWaveguide rw{wg, 1.0, 0.0};
  if (ridge) {
    rw.width_nm = p.number("ridge_width_nm", std::nullopt, 0.0, kInf, true);
    rw.n_side = p.number("n_side", 1.0, 1.0, kInf);
  }
  const auto grid = wavelength_grid(p, 101);
  return [wg, pol, ridge, rw, grid] {
    auto solve = [&](double l) { return ridge ? solve_ridge_modes(rw, l, pol) : solve_modes(wg, l, pol); };
    PointResult r;
    std::string csv = "wavelength_nm,mode,n_eff,n_group\n";
    for (double l : grid) {
      const auto modes = solve(l);
      for (const auto& m : modes) {
        std::string ng;
        constexpr double d = 0.1;
        const auto lo = solve(l - d), hi = solve(l + d);
        if (static_cast<std::size_t>(m.m) < lo.size() && static_cast<std::size_t>(m.m) < hi.size())
          ng = fmt(m.n_eff - l * (hi[m.m].n_eff - lo[m.m].n_eff) / (2.0 * d));
        csv += csv_row({fmt(l), std::to_string(m.m), fmt(m.n_eff), ng});
      }
    }
    r.artifacts.push_back({"modes.csv", csv});
    const auto first = solve(grid.front());
    r.summary.push_back({"mode_count", static_cast<double>(first.size())});
    if (!first.empty()) r.summary.push_back({"n_eff", first.front().n_eff});
    else r.warnings.push_back("no guided mode at " + fmt(grid.front()) + " nm");
    return r;
  };
}

// ---- grating -------------------------------------------------------------

Job prepare_grating(Params& p) {
  GratingSpec g;
  g.n_eff_grating = p.number("n_eff", std::nullopt, 1.0, kInf);
  g.n_clad = p.number("n_clad", 1.0, 1.0, kInf);
  g.theta_deg = p.number("theta_deg", 0.0, -90.0, 90.0, false);
  g.diffraction_order = p.integer("diffraction_order", 1, 1, 1000);
  if (p.has("period_nm") == p.has("target_wavelength_nm"))
    invalid("grating needs exactly one of parameters.period_nm and parameters.target_wavelength_nm");
  if (p.has("period_nm")) {
    g.period_nm = p.number("period_nm", std::nullopt, 0.0, kInf, true);
  } else {
    const double target = p.number("target_wavelength_nm", std::nullopt, 0.0, kInf, true);
    g.period_nm = period_for_wavelength(target, g.n_eff_grating, g.n_clad, g.theta_deg, g.diffraction_order);
  }
  const double ff0 = p.number("fill_factor_start", 0.5, 0.0, 1.0, true);
  const double ff1 = p.number("fill_factor_end", ff0, 0.0, 1.0, true);
  const int teeth = p.integer("n_teeth", 20, 1, 1000000);
  const double lambda = central_wavelength(g);
  const auto ff = apodization_profile(ff0, ff1, teeth);
  return [g, lambda, ff] {
    PointResult r;
    std::string csv = "tooth,fill_factor\n";
    for (std::size_t k = 0; k < ff.size(); ++k) csv += csv_row({std::to_string(k), fmt(ff[k])});
    r.artifacts.push_back({"apodization.csv", csv});
    r.summary = {{"period_nm", g.period_nm}, {"central_wavelength_nm", lambda}};
    return r;
  };
}

// ---- mzi -----------------------------------------------------------------

MziConfig read_mzi(Params& p) {
  MziConfig c;
  c.delta_l_um = p.number("delta_l_um", std::nullopt, 0.0, kInf);
  c.l_spiral_mm = p.number("l_spiral_mm", 0.0, 0.0, kInf);
  c.n_eff = p.number("n_eff", 1.5, 1.0, kInf);
  c.n_gr = p.number("n_gr", c.n_eff, 1.0, kInf);
  c.alpha_db_per_mm = p.number("alpha_db_per_mm", 0.0, 0.0, kInf);
  c.dn_dT_per_K = p.number("dn_dT_per_K", 1e-5);
  c.split_ratio = p.number("split_ratio", 0.5, 0.0, 1.0);
  c.lambda_ref_nm = p.number("lambda_ref_nm", 738.0, 0.0, kInf, true);
  validate(c);
  return c;
}

HeaterDrive read_drive(Params& p) {
  HeaterDrive d;
  d.dT_long_K = p.number("dT_long_K", 0.0);
  d.dT_short_K = p.number("dT_short_K", 0.0);
  return d;
}

Job prepare_mzi(Params& p) {
  const MziConfig c = read_mzi(p);
  const HeaterDrive d = read_drive(p);
  const auto grid = wavelength_grid(p, 1601);
  return [c, d, grid] {
    PointResult r;
    const Spectrum s = mzi_wavelength_sweep(c, d, grid);
    r.artifacts.push_back({"transmission.csv", s.to_csv("wavelength_nm", "transmission")});
    const double mid = grid[grid.size() / 2];
    const Extended fsr = free_spectral_range(c, mid);
    if (fsr.is_finite()) r.summary.push_back({"fsr_nm", fsr.value});
    else r.warnings.push_back("balanced arms: free spectral range is unbounded");
    const Extended er = extinction_ratio(s);
    if (er.is_finite()) r.summary.push_back({"er_db", er.value});
    else r.warnings.push_back("transmission reaches an exact null: extinction ratio is unbounded");
    if (c.l_spiral_mm > 0.0) r.summary.push_back({"switching_delta_t_K", switching_delta_t(mid, c.l_spiral_mm, c.dn_dT_per_K)});
    return r;
  };
}

Job prepare_cascade(Params& p) {
  Params s1 = p.child("stage1"), s2 = p.child("stage2");
  CascadeConfig cc{read_mzi(s1), read_mzi(s2)};
  const HeaterDrive d1 = read_drive(s1), d2 = read_drive(s2);
  s1.finish();
  s2.finish();
  const auto grid = wavelength_grid(p, 1601);
  std::optional<std::function<HeaterMap()>> map;
  if (p.has("heater_map")) {
    Params h = p.child("heater_map");
    const double lambda = h.number("lambda_nm", std::nullopt, 0.0, kInf, true);
    const double p1 = h.number("p1_max_mW", std::nullopt, 0.0, kInf, true);
    const double p2 = h.number("p2_max_mW", std::nullopt, 0.0, kInf, true);
    const int n = h.integer("points", 64, 2, 100000);
    const double pp1 = h.number("p_pi1_mW", std::nullopt, 0.0, kInf, true);
    const double pp2 = h.number("p_pi2_mW", std::nullopt, 0.0, kInf, true);
    h.finish();
    map = [cc, lambda, p1, p2, n, pp1, pp2] {
      return heater_power_map(cc, lambda, numerics::linspace(0.0, p1, n), numerics::linspace(0.0, p2, n), pp1, pp2);
    };
  }
  return [cc, d1, d2, grid, map] {
    PointResult r;
    const Spectrum s = cascade_wavelength_sweep(cc, d1, d2, grid);
    r.artifacts.push_back({"transmission.csv", s.to_csv("wavelength_nm", "transmission")});
    const Extended er = extinction_ratio(s);
    if (er.is_finite()) r.summary.push_back({"er_db", er.value});
    else r.warnings.push_back("transmission reaches an exact null: extinction ratio is unbounded");
    if (map) r.artifacts.push_back({"heater_map.csv", (*map)().to_csv()});
    return r;
  };
}

// ---- tmm -----------------------------------------------------------------

PhcSpec read_phc(Params& p, const PhcSpec& d) {
  PhcSpec s;
  s.period_nm = p.number("period_nm", d.period_nm, 0.0, kInf, true);
  s.n_high = p.number("n_high", d.n_high, 1.0, kInf);
  s.n_low = p.number("n_low", d.n_low, 1.0, kInf);
  s.ff_center = p.number("ff_center", d.ff_center, 0.0, 1.0, true);
  s.ff_edge = p.number("ff_edge", d.ff_edge, 0.0, 1.0, true);
  s.n_segments = p.integer("n_segments", d.n_segments, 1, 100000);
  s.cavity_length_nm = p.number("cavity_length_nm", d.cavity_length_nm, 0.0, kInf);
  s.loss_k_high = p.number("loss_k_high", d.loss_k_high, 0.0, kInf);
  s.loss_k_low = p.number("loss_k_low", d.loss_k_low, 0.0, kInf);
  s.n_bound = p.number("n_bound", d.n_bound, 0.0, kInf);
  p.finish();
  validate(s);
  return s;
}

const ResonanceMode* pick_mode(const std::vector<ResonanceMode>& modes, int order) {
  if (modes.empty()) return nullptr;
  const int n = static_cast<int>(modes.size());
  const int k = order > 0 ? order - 1 : n + order;
  return k >= 0 && k < n ? &modes[k] : nullptr;
}

Job prepare_tmm(Params& p) {
  Params ph = p.child("phc");
  const PhcSpec spec = read_phc(ph, PhcSpec{});
  const auto grid = wavelength_grid(p, 3001);
  const int order = p.integer("mode_order", -1, -1000, 1000);
  if (order == 0) invalid(p.path("mode_order") + " must be nonzero (1 = shortest, -1 = longest)");
  std::vector<int> counts;
  for (double x : p.numbers("mirror_counts", false)) {
    if (x != std::floor(x) || x < 1) invalid(p.path("mirror_counts") + " must hold positive integers");
    counts.push_back(static_cast<int>(x));
  }
  return [spec, grid, order, counts] {
    PointResult r;
    const LayerStack stack = build_stack(spec);
    const auto tr = transmission_spectrum(stack, grid);
    r.artifacts.push_back({"transmission.csv", tr.transmission.to_csv("wavelength_nm", "transmission")});
    const Interval gap = mirror_bandgap(spec, grid);
    r.summary.push_back({"gap_lo_nm", gap.lo_nm});
    r.summary.push_back({"gap_hi_nm", gap.hi_nm});
    const auto modes = cavity_resonances(spec, grid);
    std::string csv = "order,lambda_res_nm,q,fwhm_nm,peak_transmission\n";
    for (const auto& m : modes) {
      csv += csv_row({std::to_string(m.order), fmt(m.lambda_res_nm), fmt(m.q), fmt(m.fwhm_nm), fmt(m.peak_transmission)});
      for (const auto& w : m.warnings) r.warnings.push_back("mode " + std::to_string(m.order) + ": " + w);
    }
    r.artifacts.push_back({"resonances.csv", csv});
    if (const ResonanceMode* m = pick_mode(modes, order)) {
      r.summary.push_back({"lambda_res_nm", m->lambda_res_nm});
      r.summary.push_back({"q", m->q});
    } else {
      r.warnings.push_back("no resonance of order " + std::to_string(order) + " inside the gap");
    }
    if (!counts.empty()) {
      const QvsN qn = q_vs_mirror_count(spec, counts, grid, order);
      std::string q = "n_segments,lambda_res_nm,q,q_model\n";
      for (const auto& pt : qn.points)
        q += csv_row({std::to_string(pt.n_segments), fmt(pt.lambda_res_nm), fmt(pt.q), fmt(qn.fit.q_model(pt.n_segments))});
      r.artifacts.push_back({"q_vs_n.csv", q});
      if (qn.fit.q_rad.is_finite()) r.summary.push_back({"q_rad", qn.fit.q_rad.value});
      else r.warnings.push_back("Q does not saturate over the mirror counts: Q_rad is unbounded");
      r.summary.push_back({"q_fit_max_relative_error", qn.fit.max_relative_error});
    }
    return r;
  };
}

// ---- fdtd / placement-study ----------------------------------------------

CavityScene read_scene(Params& p) {
  CavityScene s;
  s.geometry = scene_geometry_from(
      p.text("geometry", "nanobeam", {"nanobeam", "crossbar", "bare_waveguide", "vacuum", "stack_1d"}));
  Params ph = p.child("phc");
  s.phc = read_phc(ph, CavityScene::default_nanobeam_phc());
  s.beam_width_nm = p.number("beam_width_nm", s.beam_width_nm, 0.0, kInf, true);
  s.hole_width_nm = p.number("hole_width_nm", s.hole_width_nm, 0.0, kInf, true);
  s.crossbar_width_nm = p.number("crossbar_width_nm", s.crossbar_width_nm, 0.0, kInf);
  s.emitter_site = emitter_site_from(p.text("emitter_site", "embedded", {"embedded", "on_top"}));
  s.offset_x_a = p.number("offset_x_a", 0.0);
  s.offset_y_w = p.number("offset_y_w", 0.0, -0.5, 0.5);
  s.slab_core_index = p.number("slab_core_index", s.slab_core_index, 1.0, kInf);
  s.slab_thickness_nm = p.number("slab_thickness_nm", s.slab_thickness_nm, 0.0, kInf, true);
  s.emitter_height_nm = p.number("emitter_height_nm", s.emitter_height_nm, 0.0, kInf);
  s.dx_nm = p.number("dx_nm", s.dx_nm, 0.0, kInf, true);
  s.pml_cells = p.integer("pml_cells", s.pml_cells, 8, 10000);
  s.padding_nm = p.number("padding_nm", s.padding_nm, 0.0, kInf);
  s.lambda_center_nm = p.number("lambda_center_nm", s.lambda_center_nm, 0.0, kInf, true);
  s.bandwidth_nm = p.number("bandwidth_nm", s.bandwidth_nm, 0.0, kInf, true);
  build_scene(s);  // geometry and source placement checks
  return s;
}

SceneRunOptions read_run_options(Params& p, const CavityScene& s) {
  SceneRunOptions o;
  o.lambda_grid_nm = source_band_grid(s, p.integer("lambda_points", 181, 2, 100000));
  o.ringdown_steps = p.integer("ringdown_steps", 0, 0, std::numeric_limits<int>::max());
  o.decay_threshold = p.number("decay_threshold", o.decay_threshold, 0.0, 1.0, true);
  o.max_ringdown_steps = p.integer("max_ringdown_steps", static_cast<int>(o.max_ringdown_steps), 1,
                                   std::numeric_limits<int>::max());
  o.courant = p.number("courant", 0.5, 0.0, 1.0 / std::sqrt(2.0), true);
  return o;
}

std::string modes_csv(const std::vector<ModeRecord>& modes, const std::vector<double>& enhancement,
                      const CavityScene& s) {
  std::string csv =
      "mode,lambda_res_nm,q,q_sigma,q_lower_bound,parity,mode_volume_lambda3,purcell_qv,peak_enhancement\n";
  for (std::size_t k = 0; k < modes.size(); ++k) {
    const auto& m = modes[k];
    std::string v, f;
    if (m.mode_volume_lambda3 > 0.0) {
      v = fmt(m.mode_volume_lambda3);
      f = fmt(purcell_from_qv(m.lambda_res_nm, s.phc.n_high, m.q, m.mode_volume_lambda3));
    }
    csv += csv_row({std::to_string(k), fmt(m.lambda_res_nm), fmt(m.q), fmt(m.q_sigma), m.q_lower_bound ? "1" : "0",
                    m.field_map ? to_string(m.parity) : "", v, f, k < enhancement.size() ? fmt(enhancement[k]) : ""});
  }
  return csv;
}

std::size_t dominant(const std::vector<double>& enhancement) {
  return std::max_element(enhancement.begin(), enhancement.end()) - enhancement.begin();
}

Job prepare_fdtd(Params& p) {
  const CavityScene s = read_scene(p);
  SceneRunOptions o = read_run_options(p, s);
  const bool maps = p.flag("field_maps", false);
  return [s, o, maps] {
    PointResult r;
    SceneRun run = simulate_scene(s, o);
    std::vector<ModeRecord> modes = s.geometry == SceneGeometry::vacuum ? std::vector<ModeRecord>{} : find_modes(run, s);
    if (maps && !modes.empty()) {
      SceneRunOptions second = o;
      for (const auto& m : modes) second.field_map_wavelengths_nm.push_back(m.lambda_res_nm);
      SceneRun mapped = simulate_scene(s, second);
      for (std::size_t k = 0; k < modes.size(); ++k) {
        const FieldMap& fm = mapped.field_maps[k];
        modes[k].parity = classify_parity(fm, mapped.built.center_i);
        if (s.geometry != SceneGeometry::stack_1d)
          modes[k].mode_volume_lambda3 = mode_volume(fm, mapped.built.grid, modes[k].lambda_res_nm, s.slab_thickness_nm);
        modes[k].field_map = fm;
      }
    }
    const bool on_top = s.emitter_site == EmitterSite::on_top;
    const double eta = on_top ? vertical_overlap(s) : 1.0;
    Spectrum ldos = ldos_enhancement(run);
    std::vector<double> enh = modal_enhancement(run, modes);
    if (on_top) {
      std::vector<double> v = ldos.values();
      for (double& x : v) x = on_top_enhancement(x, eta);
      ldos = Spectrum(ldos.wavelengths_nm(), std::move(v));
      for (double& x : enh) x = on_top_enhancement(x, eta);
    }
    const Spectrum beta = on_top ? beta_factor_on_top(run, eta) : beta_factor(run);
    r.artifacts.push_back({"ldos.csv", ldos.to_csv("wavelength_nm", "ldos_enhancement")});
    r.artifacts.push_back({"beta.csv", beta.to_csv("wavelength_nm", "beta")});
    r.artifacts.push_back({"modes.csv", modes_csv(modes, enh, s)});
    for (std::size_t k = 0; k < modes.size(); ++k) {
      if (!modes[k].field_map) continue;
      const FieldMap& fm = *modes[k].field_map;
      const int nx = fm.nx, ny = fm.ny, stride = nx + 1;
      // |E| at cell centres, row-major with y outer.
      std::string csv;
      for (int j = 0; j < ny; ++j) {
        for (int i = 0; i < nx; ++i) {
          const double ex = 0.5 * (std::norm(fm.ex[j * stride + i]) + std::norm(fm.ex[(j + 1) * stride + i]));
          const double ey = 0.5 * (std::norm(fm.ey[j * stride + i]) + std::norm(fm.ey[j * stride + i + 1]));
          if (i) csv += ',';
          csv += fmt(std::sqrt(ex + ey));
        }
        csv += '\n';
      }
      const std::string stem = "field_map_" + std::to_string(k);
      r.artifacts.push_back({stem + ".csv", csv});
      json meta = {{"nx", nx}, {"ny", ny}, {"dx_nm", s.dx_nm}, {"origin_nm", {0.0, 0.0}},
                   {"quantity", "abs_E_cell_center"}, {"lambda_res_nm", modes[k].lambda_res_nm}};
      r.artifacts.push_back({stem + ".json", meta.dump(2) + "\n"});
    }
    const auto& lv = ldos.values();
    r.summary.push_back({"ldos_peak", *std::max_element(lv.begin(), lv.end())});
    r.summary.push_back({"beta_peak", *std::max_element(beta.values().begin(), beta.values().end())});
    if (!modes.empty()) {
      const std::size_t k = dominant(enh);
      r.summary.push_back({"lambda_res_nm", modes[k].lambda_res_nm});
      r.summary.push_back({"q", modes[k].q});
    }
    r.warnings = run.warnings;
    return r;
  };
}

Job prepare_placement(Params& p, int inner_jobs) {
  const CavityScene s = read_scene(p);
  const SceneRunOptions o = read_run_options(p, s);
  std::vector<Placement> places;
  const json& list = p.raw("placements");
  if (!list.is_array() || list.empty()) invalid(p.path("placements") + " must be a non-empty array");
  for (std::size_t k = 0; k < list.size(); ++k) {
    Params q(list[k], p.path("placements") + "[" + std::to_string(k) + "]");
    Placement pl;
    pl.offset_x_a = q.number("offset_x_a", 0.0);
    pl.offset_y_w = q.number("offset_y_w", 0.0, -0.5, 0.5);
    pl.site = emitter_site_from(q.text("emitter_site", "embedded", {"embedded", "on_top"}));
    q.finish();
    CavityScene probe = s;
    probe.offset_x_a = pl.offset_x_a;
    probe.offset_y_w = pl.offset_y_w;
    build_scene(probe);
    places.push_back(pl);
  }
  return [s, o, places, inner_jobs] {
    PointResult r;
    const PlacementStudy st = placement_study(s, places, o, inner_jobs);
    std::vector<std::string> head = {"offset_x_a", "offset_y_w", "emitter_site", "beta_peak"};
    for (std::size_t k = 0; k < st.modes.size(); ++k) {
      head.push_back("enhancement_mode" + std::to_string(k));
      head.push_back("beta_mode" + std::to_string(k));
    }
    std::string csv = csv_row(head);
    double best = 0.0;
    for (std::size_t i = 0; i < st.rows.size(); ++i) {
      const auto& row = st.rows[i];
      std::vector<std::string> cells = {fmt(row.placement.offset_x_a), fmt(row.placement.offset_y_w),
                                        to_string(row.placement.site), fmt(row.beta_peak)};
      for (std::size_t k = 0; k < st.modes.size(); ++k) {
        cells.push_back(fmt(row.mode_enhancement[k]));
        cells.push_back(fmt(row.beta_on_resonance[k]));
        best = std::max(best, row.mode_enhancement[k]);
      }
      csv += csv_row(cells);
      r.artifacts.push_back({"ldos_placement_" + std::to_string(i) + ".csv",
                             row.ldos.to_csv("wavelength_nm", "ldos_enhancement")});
    }
    r.artifacts.insert(r.artifacts.begin(), {"placement.csv", csv});
    r.artifacts.insert(r.artifacts.begin() + 1, {"modes.csv", modes_csv(st.modes, {}, s)});
    r.summary.push_back({"mode_count", static_cast<double>(st.modes.size())});
    if (!st.modes.empty()) r.summary.push_back({"max_mode_enhancement", best});
    return r;
  };
}

// ---- plumbing ------------------------------------------------------------

Job prepare(const std::string& kind, const json& params, int inner_jobs) {
  Params p(params, "parameters");
  Job job;
  try {
    if (kind == "slab") job = prepare_slab(p);
    else if (kind == "grating") job = prepare_grating(p);
    else if (kind == "mzi") job = prepare_mzi(p);
    else if (kind == "mzi-cascade") job = prepare_cascade(p);
    else if (kind == "tmm") job = prepare_tmm(p);
    else if (kind == "fdtd") job = prepare_fdtd(p);
    else if (kind == "placement-study") job = prepare_placement(p, inner_jobs);
    else invalid("unknown scenario kind '" + kind + "'");
    p.finish();
  } catch (const Error& e) {
    // Any inconsistency found before computing is a validation failure.
    if (e.code() == ErrorCode::validation) throw;
    invalid(e.what());
  }
  return job;
}

json& leaf(json& root, const std::string& dotted) {
  json* node = &root;
  std::size_t start = 0;
  for (;;) {
    const std::size_t dot = dotted.find('.', start);
    const std::string key = dotted.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
    if (key.empty()) invalid("sweep.parameter '" + dotted + "' is not a valid path");
    if (!node->is_object()) invalid("sweep.parameter '" + dotted + "' does not name a parameter");
    node = &(*node)[key];
    if (dot == std::string::npos) return *node;
    start = dot + 1;
  }
}

json point_parameters(const Scenario& s, std::size_t k) {
  json p = s.parameters;
  if (s.sweep) {
    const double v = s.sweep->values[k];
    json& slot = leaf(p, s.sweep->parameter);
    if (v == std::floor(v) && std::abs(v) < 9e15) slot = static_cast<long long>(v);
    else slot = v;
  }
  return p;
}

std::size_t point_count(const Scenario& s) { return s.sweep ? s.sweep->values.size() : 1; }

std::vector<Job> prepare_all(const Scenario& s, int inner_jobs) {
  std::vector<Job> jobs;
  for (std::size_t k = 0; k < point_count(s); ++k) {
    try {
      jobs.push_back(prepare(s.kind, point_parameters(s, k), inner_jobs));
    } catch (const Error& e) {
      if (!s.sweep) throw;
      fail(e.code(), "sweep point " + std::to_string(k) + " (" + s.sweep->parameter + " = " +
                         fmt(s.sweep->values[k]) + "): " + e.what());
    }
  }
  return jobs;
}

void write_file(const fs::path& path, const std::string& content) {
  fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(ErrorCode::io, "cannot open " + path.string() + " for writing");
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  if (!out) fail(ErrorCode::io, "failed writing " + path.string());
}

}  // namespace

const std::vector<std::string>& kinds() {
  static const std::vector<std::string> k = {"slab", "grating", "mzi", "mzi-cascade", "tmm", "fdtd", "placement-study"};
  return k;
}

std::string sha256_hex(std::string_view data) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (!EVP_Digest(data.data(), data.size(), digest, &len, EVP_sha256(), nullptr))
    fail(ErrorCode::io, "SHA-256 digest failed");
  static const char* hex = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < len; ++i) {
    out += hex[digest[i] >> 4];
    out += hex[digest[i] & 15];
  }
  return out;
}

Scenario parse(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    fail(ErrorCode::parse, std::string("scenario is not valid JSON: ") + e.what());
  }
  if (!doc.is_object()) fail(ErrorCode::parse, "scenario must be a JSON object");
  Scenario s;
  s.canonical = doc.dump();
  for (auto it = doc.begin(); it != doc.end(); ++it) {
    const std::string& key = it.key();
    if (key == "kind") {
      if (!it->is_string()) fail(ErrorCode::validation, "kind must be a string");
      s.kind = it->get<std::string>();
    } else if (key == "parameters") {
      if (!it->is_object()) fail(ErrorCode::validation, "parameters must be an object");
      s.parameters = *it;
    } else if (key == "sweep") {
      if (!it->is_object()) fail(ErrorCode::validation, "sweep must be an object");
      Sweep sw;
      for (auto jt = it->begin(); jt != it->end(); ++jt) {
        if (jt.key() == "parameter" && jt->is_string()) {
          sw.parameter = jt->get<std::string>();
        } else if (jt.key() == "values" && jt->is_array()) {
          for (const auto& v : *jt) {
            if (!v.is_number()) fail(ErrorCode::validation, "sweep.values must contain only numbers");
            sw.values.push_back(v.get<double>());
          }
        } else {
          fail(ErrorCode::validation, "sweep." + jt.key() + " is unknown or has the wrong type");
        }
      }
      s.sweep = std::move(sw);
    } else if (key == "output_dir") {
      if (!it->is_string()) fail(ErrorCode::validation, "output_dir must be a string");
      s.output_dir = it->get<std::string>();
    } else if (key == "name" || key == "description") {
      if (!it->is_string()) fail(ErrorCode::validation, key + " must be a string");
    } else {
      fail(ErrorCode::validation, "unknown top-level key '" + key + "'");
    }
  }
  return s;
}

void validate(const Scenario& s) {
  if (s.kind.empty()) invalid("missing scenario kind");
  if (std::find(kinds().begin(), kinds().end(), s.kind) == kinds().end())
    invalid("unknown scenario kind '" + s.kind + "'");
  if (s.sweep) {
    if (s.sweep->parameter.empty()) invalid("sweep.parameter is missing");
    if (s.sweep->values.empty()) invalid("sweep.values is empty");
  }
  prepare_all(s, 1);
}

RunReport run(const Scenario& s, const RunOptions& options) {
  const auto t0 = std::chrono::steady_clock::now();
  validate(s);
  RunReport report;
  report.output_dir = !options.output_dir.empty() ? options.output_dir : s.output_dir;
  if (report.output_dir.empty()) invalid("no output directory: set output_dir or pass one explicitly");
  const std::size_t n = point_count(s);
  report.points = n;
  const int workers = std::max(1, std::min<int>(options.jobs, static_cast<int>(n)));
  // A single placement study spreads its own scenes over the pool instead.
  const std::vector<Job> jobs = prepare_all(s, n == 1 ? std::max(1, options.jobs) : 1);

  std::vector<std::optional<PointResult>> results(n);
  std::vector<std::exception_ptr> errors(n);
  std::atomic<std::size_t> next{0}, done{0};
  std::mutex log_mutex;
  auto worker = [&] {
    for (std::size_t k; (k = next.fetch_add(1)) < n;) {
      try {
        results[k] = jobs[k]();
      } catch (...) {
        errors[k] = std::current_exception();
      }
      const std::size_t d = ++done;
      if (options.log) {
        std::lock_guard lock(log_mutex);
        options.log("point " + std::to_string(k) + " finished (" + std::to_string(d) + "/" + std::to_string(n) + ")" +
                    (errors[k] ? " with an error" : ""));
      }
    }
  };
  std::vector<std::thread> pool;
  for (int w = 1; w < workers; ++w) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();

  for (std::size_t k = 0; k < n; ++k) {
    if (!errors[k]) continue;
    PointFailure f;
    f.index = k;
    f.value = s.sweep ? s.sweep->values[k] : 0.0;
    try {
      std::rethrow_exception(errors[k]);
    } catch (const Error& e) {
      f.code = e.code();
      f.message = e.what();
    } catch (const std::exception& e) {
      f.code = ErrorCode::config;
      f.message = e.what();
    }
    if (!s.sweep) fail(f.code, f.message);
    report.failures.push_back(std::move(f));
  }
  if (report.failures.size() == n) {
    const auto& f = report.failures.front();
    fail(f.code, "every sweep point failed; first: " + f.message);
  }

  // Everything is computed; assemble and write in sweep order.
  const fs::path root(report.output_dir);
  json outputs = json::array();
  auto emit = [&](const std::string& rel, const std::string& content) {
    write_file(root / rel, content);
    report.outputs.push_back(rel);
    outputs.push_back({{"path", rel}, {"sha256", sha256_hex(content)}, {"bytes", content.size()}});
  };
  std::vector<std::string> columns;
  for (std::size_t k = 0; k < n; ++k) {
    if (!results[k]) continue;
    const std::string prefix = s.sweep ? "point_" + std::string(3 - std::min<std::size_t>(3, std::to_string(k).size()), '0') +
                                             std::to_string(k) + "/"
                                       : "";
    std::string summary = "quantity,value\n";
    for (const auto& [key, value] : results[k]->summary) {
      summary += csv_row({key, fmt(value)});
      if (std::find(columns.begin(), columns.end(), key) == columns.end()) columns.push_back(key);
    }
    for (const auto& a : results[k]->artifacts) emit(prefix + a.name, a.content);
    emit(prefix + "summary.csv", summary);
    for (const auto& w : results[k]->warnings)
      report.warnings.push_back(s.sweep ? "point " + std::to_string(k) + ": " + w : w);
  }
  if (s.sweep) {
    std::vector<std::string> head = {"point", s.sweep->parameter, "status"};
    head.insert(head.end(), columns.begin(), columns.end());
    std::string agg = csv_row(head);
    for (std::size_t k = 0; k < n; ++k) {
      std::vector<std::string> cells = {std::to_string(k), fmt(s.sweep->values[k]), results[k] ? "ok" : "failed"};
      for (const auto& c : columns) {
        std::string cell;
        if (results[k])
          for (const auto& [key, value] : results[k]->summary)
            if (key == c) cell = fmt(value);
        cells.push_back(cell);
      }
      agg += csv_row(cells);
    }
    emit("aggregate.csv", agg);
  }

  json failures = json::array();
  for (const auto& f : report.failures)
    failures.push_back({{"point", f.index}, {"value", f.value}, {"code", to_string(f.code)}, {"message", f.message}});
  const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  json manifest = {{"toolkit", "photonic-lab"},
                   {"version", PHOTONIC_LAB_VERSION},
                   {"kind", s.kind},
                   {"scenario_sha256", sha256_hex(s.canonical)},
                   {"points", n},
                   {"wall_time_s", wall},
                   {"outputs", outputs},
                   {"warnings", report.warnings},
                   {"failures", failures}};
  write_file(root / "manifest.json", manifest.dump(2) + "\n");
  report.outputs.push_back("manifest.json");
  return report;
}

}  // namespace photonic_lab::scenario
