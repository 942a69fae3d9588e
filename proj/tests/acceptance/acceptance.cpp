// Acceptance suite: one PASS/FAIL line per criterion. Optional arguments select criteria by number.
#include "photonic_lab/cavity_analysis.hpp"
#include "photonic_lab/mzi.hpp"
#include "photonic_lab/numerics.hpp"
#include "photonic_lab/spectra.hpp"
#include "photonic_lab/tmm.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <numbers>
#include <set>
#include <string>
#include <vector>

using namespace photonic_lab;
using numerics::linspace;

namespace {

constexpr double kPi = std::numbers::pi;

struct Outcome {
  bool pass = false;
  std::string detail;
};

struct Criterion {
  int id;
  const char* name;
  double budget_s;
  std::function<Outcome()> check;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

double rel(double a, double b) { return std::abs(a - b) / std::abs(b); }

// Local maxima of a sampled curve, refined by a parabola through the three samples.
std::vector<double> peak_positions(const std::vector<double>& x, const std::vector<double>& y) {
  std::vector<double> out;
  for (std::size_t i = 1; i + 1 < y.size(); ++i) {
    if (y[i] > y[i - 1] && y[i] >= y[i + 1]) {
      const double d = y[i - 1] - 2.0 * y[i] + y[i + 1];
      const double shift = d != 0.0 ? 0.5 * (y[i - 1] - y[i + 1]) / d : 0.0;
      out.push_back(x[i] + shift * (x[i + 1] - x[i]));
    }
  }
  return out;
}

// ---- 1-5: interferometer -----------------------------------------------------

Outcome switching_temperature() {
  const double dt = switching_delta_t(738.0, 1.78, 1e-5);
  return {rel(dt, 20.0) <= 0.05, fmt("dT_pi = %.3f K vs 20 K (%.1f%%)", dt, 100.0 * rel(dt, 20.0))};
}

Outcome er_arithmetic() {
  const double db = to_db(0.07 / 0.02);
  return {std::abs(db - 5.4) <= 0.05, fmt("to_db(0.07/0.02) = %.4f dB vs 5.4 dB", db)};
}

Outcome fsr_consistency() {
  MziConfig c;
  c.delta_l_um = 100.0;
  c.n_eff = 1.9;
  c.n_gr = 2.0;
  c.lambda_ref_nm = 738.0;
  const auto grid = linspace(730.0, 746.0, 160001);
  std::vector<double> t;
  for (double l : grid) t.push_back(single_transmission(c, l, {}));
  const auto peaks = peak_positions(grid, t);
  if (peaks.size() < 3) return {false, "fewer than three fringe peaks"};
  // Spacing nearest 738 nm, where the closed form is quoted.
  double best = 0.0, dist = 1e9;
  for (std::size_t i = 0; i + 1 < peaks.size(); ++i) {
    const double mid = 0.5 * (peaks[i] + peaks[i + 1]);
    if (std::abs(mid - 738.0) < dist) {
      dist = std::abs(mid - 738.0);
      best = peaks[i + 1] - peaks[i];
    }
  }
  const double expect = 2.72;
  return {rel(best, expect) <= 0.01,
          fmt("%zu peaks, spacing %.4f nm vs %.2f nm (%.2f%%)", peaks.size(), best, expect, 100.0 * rel(best, expect))};
}

Outcome loss_er_link() {
  const double dl_mm = 0.1;
  double worst = 0.0;
  for (double half : {0.01, 0.05, 0.1, 0.5}) {
    MziConfig c;
    c.delta_l_um = dl_mm * 1e3;
    const double alpha = 2.0 * half / dl_mm;  // natural units, 1/mm
    c.alpha_db_per_mm = alpha * 10.0 / std::numbers::ln10;
    // One fringe period sampled so that both extrema fall on grid points.
    const auto phase = linspace(0.0, 2.0 * kPi, 20001);
    double hi = 0.0, lo = 1e300;
    for (double p : phase) {
      const double t = transmission_from_phase(c, p);
      hi = std::max(hi, t);
      lo = std::min(lo, t);
    }
    const double measured = 10.0 * std::log10(hi / lo);
    const double closed = extinction_ratio_from_loss(alpha_natural_per_mm(c.alpha_db_per_mm), dl_mm).value;
    worst = std::max(worst, std::abs(measured - closed));
  }
  return {worst <= 0.1, fmt("max |ER_fringe - ER_closed| = %.2e dB", worst)};
}

Outcome cascade_identities() {
  MziConfig ideal;
  ideal.delta_l_um = 50.0;
  const CascadeConfig cc{ideal, ideal};
  const auto ph = linspace(0.0, 2.0 * kPi, 64);
  double worst = 0.0, worst_null = 0.0;
  for (double p1 : ph)
    for (double p2 : ph) {
      const double single1 = 0.5 * (1.0 + std::cos(p1));
      const double single2 = 0.5 * (1.0 + std::cos(p2));
      worst = std::max(worst, std::abs(cascade_transmission(cc, p1, p2) - single1 * single2));
    }
  for (double p2 : ph) worst_null = std::max(worst_null, std::abs(cascade_transmission(cc, kPi, p2)));
  return {worst <= 1e-12 && worst_null <= 1e-12,
          fmt("max product deviation %.1e, max output at dphi1=pi %.1e", worst, worst_null)};
}

// ---- 6-8: transfer matrix -------------------------------------------------------

Outcome quarter_wave_mirror() {
  const double nh = 2.0, nl = 1.45, l0 = 738.0;
  double worst = 0.0;
  bool is_peak = true;
  for (int n : {2, 5, 10}) {
    LayerStack st;  // embedded in the low-index medium
    st.n_in = nl;
    st.n_out = nl;
    for (int k = 0; k < n; ++k) {
      st.layers.push_back({nh, l0 / (4.0 * nh)});
      st.layers.push_back({nl, l0 / (4.0 * nl)});
    }
    const double rho = std::pow(nh / nl, 2 * n);
    const double analytic = std::pow((1.0 - rho) / (1.0 + rho), 2);
    const double r = stack_response(st, l0).r;
    worst = std::max(worst, std::abs(r - analytic));
    for (double l : linspace(l0 - 20.0, l0 + 20.0, 401)) is_peak = is_peak && stack_response(st, l).r <= r + 1e-12;
  }
  return {worst <= 1e-6 && is_peak, fmt("max |R - R_analytic| = %.1e, centre is the peak: %s", worst, is_peak ? "yes" : "no")};
}

Outcome q_decomposition() {
  PhcSpec spec;
  spec.loss_k_high = 2e-4;
  spec.loss_k_low = 2e-4;
  std::vector<int> ns;
  for (int n = 5; n <= 30; ++n) ns.push_back(n);
  const auto grid = linspace(650.0, 820.0, 3401);
  const QvsN q = q_vs_mirror_count(spec, ns, grid, -1);
  double worst = 0.0;
  for (const auto& pt : q.points) {
    // Direct computation at this N, independent of the tracked sweep.
    PhcSpec s = spec;
    s.n_segments = pt.n_segments;
    const auto modes = cavity_resonances(s, grid);
    const ResonanceMode* near = nullptr;
    for (const auto& m : modes)
      if (!near || std::abs(m.lambda_res_nm - pt.lambda_res_nm) < std::abs(near->lambda_res_nm - pt.lambda_res_nm))
        near = &m;
    if (!near) return {false, fmt("no resonance at N=%d", pt.n_segments)};
    worst = std::max(worst, rel(q.fit.q_model(pt.n_segments), near->q));
  }
  const double q_rad = q.fit.q_rad.infinite ? INFINITY : q.fit.q_rad.value;
  return {q.points.size() == ns.size() && worst <= 0.05,
          fmt("%zu points, Q_rad = %.0f, kappa = %.3f, max model error %.2f%%", q.points.size(), q_rad, q.fit.kappa,
              100.0 * worst)};
}

// Follows one resonance across a sweep by wavelength continuity.
std::vector<double> track(const std::vector<PhcSpec>& specs, const std::vector<double>& grid, double start_nm) {
  std::vector<double> out;
  double last = start_nm;
  for (const auto& s : specs) {
    const auto modes = cavity_resonances(s, grid);
    if (modes.empty()) return {};
    const ResonanceMode* near = &modes.front();
    for (const auto& m : modes)
      if (std::abs(m.lambda_res_nm - last) < std::abs(near->lambda_res_nm - last)) near = &m;
    last = near->lambda_res_nm;
    out.push_back(last);
  }
  return out;
}

Outcome tuning_trends() {
  const auto grid = linspace(600.0, 900.0, 3001);
  const PhcSpec base;
  const auto fundamental = cavity_resonances(base, grid);
  if (fundamental.empty()) return {false, "no resonance in the default cavity"};
  const double start = fundamental.back().lambda_res_nm;

  std::vector<PhcSpec> by_cav, by_period;
  for (double cav = 150.0; cav <= 250.0 + 1e-9; cav += 5.0) {
    PhcSpec s = base;
    s.cavity_length_nm = cav;
    by_cav.push_back(s);
  }
  for (double a = 220.0; a <= 240.0 + 1e-9; a += 2.0) {
    PhcSpec s = base;
    s.period_nm = a;
    by_period.push_back(s);
  }
  // Start each sweep from the mode nearest the default cavity's longest resonance.
  const auto cav_track = track(by_cav, grid, start - 18.0);
  const auto per_track = track(by_period, grid, start - 30.0);
  auto increasing = [](const std::vector<double>& v) {
    if (v.size() < 2) return false;
    for (std::size_t i = 1; i < v.size(); ++i)
      if (!(v[i] > v[i - 1])) return false;
    return true;
  };
  const bool ok = increasing(cav_track) && increasing(per_track);
  return {ok, fmt("cavity 150-250 nm: %.2f -> %.2f nm; period 220-240 nm: %.2f -> %.2f nm",
                  cav_track.empty() ? 0.0 : cav_track.front(), cav_track.empty() ? 0.0 : cav_track.back(),
                  per_track.empty() ? 0.0 : per_track.front(), per_track.empty() ? 0.0 : per_track.back())};
}

// ---- 9-12: FDTD --------------------------------------------------------------------

Outcome fdtd_sanity() {
  CavityScene vac;
  vac.geometry = SceneGeometry::vacuum;
  SceneRunOptions o;
  o.lambda_grid_nm = source_band_grid(vac);
  o.record_ports = false;
  o.ringdown_steps = 2000;
  const SceneRun run = simulate_scene(vac, o);
  const Spectrum ldos = ldos_enhancement(run);
  double worst_ratio = 0.0, worst_analytic = 0.0;
  for (std::size_t f = 0; f < ldos.size(); ++f) {
    worst_ratio = std::max(worst_ratio, std::abs(ldos.values()[f] - 1.0));
    // Line current in 2D: P = ω|J|²/16 with c = dx = 1.
    const double w = omega_for(run.lambda_nm[f], vac.dx_nm);
    const double analytic = w * std::norm(run.source_spectrum[f]) / 16.0;
    worst_analytic = std::max(worst_analytic, rel(run.vacuum_power[f], analytic));
  }

  // Closed PEC box with a dielectric block: energy after the source has switched off.
  Geometry g;
  g.shapes.push_back({300.0, 700.0, 200.0, 500.0, 4.0});
  const Grid2D grid = rasterize(g, 80, 60, 12.5, 0, Boundary::pec, Boundary::pec);
  FdtdSimulation sim(grid, 0.5);
  DipoleSource src;
  src.x_nm = 400.0;
  src.y_nm = 310.0;
  sim.add_source(src);
  while (sim.steps_taken() * sim.dt() < sim.source_end_time()) sim.step();
  const double e0 = sim.step_with_energy();
  for (int k = 0; k < 9999; ++k) sim.step();
  const double e1 = sim.step_with_energy();
  const double drift = std::abs(e1 - e0) / e0;

  const bool ok = worst_ratio <= 0.05 && worst_analytic <= 0.05 && drift <= 1e-3;
  return {ok, fmt("vacuum ratio max dev %.2e, vs analytic dipole power %.2f%%, energy drift per 1e4 steps %.1e",
                  worst_ratio, 100.0 * worst_analytic, drift)};
}

Outcome fdtd_vs_tmm() {
  const PhcSpec spec;
  const auto tmm = cavity_resonances(spec, linspace(600.0, 900.0, 6001));
  CavityScene s;
  s.geometry = SceneGeometry::stack_1d;
  s.phc = spec;
  s.dx_nm = 5.0;
  s.pml_cells = 20;
  s.padding_nm = 300.0;
  s.offset_x_a = 0.1;  // off the mirror plane so both parities ring
  s.lambda_center_nm = 740.0;
  s.bandwidth_nm = 60.0;
  SceneRunOptions o;
  o.lambda_grid_nm = source_band_grid(s);
  o.record_ports = false;
  o.ringdown_steps = 120000;
  const SceneRun run = simulate_scene(s, o);
  const auto modes = find_modes(run, s);
  const double lo = s.lambda_center_nm - 0.8 * s.bandwidth_nm, hi = s.lambda_center_nm + 0.8 * s.bandwidth_nm;
  int compared = 0;
  double worst_l = 0.0, worst_q = 0.0;
  std::string pairs;
  for (const auto& t : tmm) {
    if (t.lambda_res_nm < lo || t.lambda_res_nm > hi) continue;
    const ModeRecord* near = nullptr;
    for (const auto& m : modes)
      if (!near || std::abs(m.lambda_res_nm - t.lambda_res_nm) < std::abs(near->lambda_res_nm - t.lambda_res_nm))
        near = &m;
    if (!near) return {false, fmt("FDTD found no resonance near %.2f nm", t.lambda_res_nm)};
    ++compared;
    worst_l = std::max(worst_l, rel(near->lambda_res_nm, t.lambda_res_nm));
    worst_q = std::max(worst_q, rel(near->q, t.q));
    pairs += fmt(" [%.2f/%.2f nm, Q %.0f/%.0f]", near->lambda_res_nm, t.lambda_res_nm, near->q, t.q);
  }
  return {compared > 0 && worst_l <= 0.02 && worst_q <= 0.30,
          fmt("FDTD/TMM%s; max dev %.2f%% in wavelength, %.1f%% in Q", pairs.c_str(), 100.0 * worst_l,
              100.0 * worst_q)};
}

std::size_t dominant(const PlacementStudy& st, std::size_t reference_row) {
  const auto& e = st.rows[reference_row].mode_enhancement;
  return static_cast<std::size_t>(std::max_element(e.begin(), e.end()) - e.begin());
}

Outcome placement_physics() {
  CavityScene s;  // nanobeam default, emitter at 0.4a
  s.offset_x_a = 0.4;
  SceneRunOptions o;
  o.lambda_grid_nm = source_band_grid(s);
  o.field_map_wavelengths_nm = {};
  std::vector<Placement> places;
  const std::vector<double> dxs = {0.0, 0.1, 0.2, 0.3, 0.4, 0.5};
  for (double dx : dxs) places.push_back({dx, 0.0, EmitterSite::embedded});
  places.push_back({0.4, 0.25, EmitterSite::embedded});
  places.push_back({0.4, 0.5, EmitterSite::embedded});
  places.push_back({0.4, 0.0, EmitterSite::on_top});
  const PlacementStudy st = placement_study(s, places, o, 1);
  if (st.modes.empty()) return {false, "no cavity resonance found"};
  const std::size_t ref = 4;  // Δx = 0.4a, centred, embedded
  const std::size_t k = dominant(st, ref);

  // Parity of the dominant mode from a ring-down field map at its wavelength.
  SceneRunOptions om = o;
  om.record_ports = false;
  om.field_map_wavelengths_nm = {st.modes[k].lambda_res_nm};
  const SceneRun mrun = simulate_scene(s, om);
  const Parity parity = classify_parity(mrun.field_maps[0], mrun.built.center_i);

  auto enh = [&](std::size_t row) { return st.rows[row].mode_enhancement[k]; };
  const double suppression_db = 10.0 * std::log10(enh(ref) / std::max(enh(0), 1e-300));
  bool max_at_ref = true;
  for (std::size_t r = 0; r < dxs.size(); ++r)
    if (r != ref && enh(r) >= enh(ref)) max_at_ref = false;
  const bool dy_order = enh(ref) > enh(6) && enh(6) > enh(7);
  const bool embedded_wins = enh(ref) > enh(8);

  std::string scan;
  for (std::size_t r = 0; r < dxs.size(); ++r) scan += fmt(" %.1fa:%.3g", dxs[r], enh(r));
  const bool ok = parity == Parity::odd && suppression_db >= 20.0 && max_at_ref && dy_order && embedded_wins;
  return {ok, fmt("mode %.2f nm Q %.0f parity %s; dx scan%s; suppression %.1f dB; dy 0/0.25w/0.5w %.3g/%.3g/%.3g; "
                  "embedded %.3g vs on-top %.3g",
                  st.modes[k].lambda_res_nm, st.modes[k].q, to_string(parity), scan.c_str(), suppression_db, enh(ref),
                  enh(6), enh(7), enh(ref), enh(8))};
}

Outcome beta_contract() {
  const double fp = purcell_from_beta(0.14);
  const bool arithmetic = std::abs(fp - 0.163) < 5e-4;

  CavityScene cav;
  cav.geometry = SceneGeometry::crossbar;
  cav.crossbar_width_nm = 150.0;
  cav.offset_x_a = 0.4;
  SceneRunOptions o;
  o.lambda_grid_nm = source_band_grid(cav);
  const PlacementStudy st =
      placement_study(cav, {{0.4, 0.0, EmitterSite::embedded}, {0.4, 0.0, EmitterSite::on_top}}, o, 1);
  if (st.modes.empty()) return {false, "no cavity resonance found"};
  const std::size_t k = dominant(st, 0);
  const double lambda_res = st.modes[k].lambda_res_nm;

  CavityScene bare = cav;
  bare.geometry = SceneGeometry::bare_waveguide;
  const SceneRun base_run = simulate_scene(bare, o);
  const double eta = vertical_overlap(cav);
  const Spectrum base_top = beta_factor_on_top(base_run, eta);
  const Spectrum base_emb = beta_factor(base_run);

  bool bounded = true;
  for (const Spectrum* sp : {&st.rows[0].beta, &st.rows[1].beta, &base_top, &base_emb})
    for (double b : sp->values()) bounded = bounded && b >= 0.0 && b <= 1.0;

  auto at = [&](const Spectrum& sp) {
    const auto& x = sp.wavelengths_nm();
    const std::size_t i = std::lower_bound(x.begin(), x.end(), lambda_res) - x.begin();
    if (i == 0) return sp.values().front();
    if (i >= x.size()) return sp.values().back();
    const double t = (lambda_res - x[i - 1]) / (x[i] - x[i - 1]);
    return sp.values()[i - 1] + t * (sp.values()[i] - sp.values()[i - 1]);
  };
  const double beta_cav = st.rows[1].beta_on_resonance[k];
  const double beta_base = at(base_top);
  const bool beats = beta_cav > beta_base;
  return {arithmetic && bounded && beats,
          fmt("F(0.14) = %.4f; beta within [0,1]: %s; on-top at %.2f nm: cavity %.3f vs bare %.3f "
              "(embedded: cavity %.3f vs bare %.3f)",
              fp, bounded ? "yes" : "no", lambda_res, beta_cav, beta_base, st.rows[0].beta_on_resonance[k],
              at(base_emb))};
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<Criterion> all = {
      {1, "switching temperature", 1.0, switching_temperature},
      {2, "extinction ratio arithmetic", 1.0, er_arithmetic},
      {3, "free spectral range", 10.0, fsr_consistency},
      {4, "loss and extinction ratio", 10.0, loss_er_link},
      {5, "cascade identities", 10.0, cascade_identities},
      {6, "quarter-wave mirror", 10.0, quarter_wave_mirror},
      {7, "Q decomposition", 60.0, q_decomposition},
      {8, "cavity tuning trends", 60.0, tuning_trends},
      {9, "FDTD sanity", 300.0, fdtd_sanity},
      {10, "FDTD versus TMM resonances", 300.0, fdtd_vs_tmm},
      {11, "parity and placement", 900.0, placement_physics},
      {12, "beta-factor contract", 300.0, beta_contract},
  };
  std::set<int> wanted;
  for (int i = 1; i < argc; ++i) wanted.insert(std::atoi(argv[i]));

  int failed = 0;
  for (const auto& c : all) {
    if (!wanted.empty() && !wanted.count(c.id)) continue;
    const auto t0 = std::chrono::steady_clock::now();
    Outcome r;
    try {
      r = c.check();
    } catch (const std::exception& e) {
      r = {false, std::string("error: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const bool in_time = secs <= c.budget_s;
    const bool pass = r.pass && in_time;
    if (!pass) ++failed;
    std::printf("%s %2d %s: %s (%.2f s of %.0f s%s)\n", pass ? "PASS" : "FAIL", c.id, c.name, r.detail.c_str(), secs,
                c.budget_s, in_time ? "" : ", over budget");
    std::fflush(stdout);
  }
  return failed == 0 ? 0 : 1;
}
