#include "photonic_lab/cavity_analysis.hpp"

#include "photonic_lab/error.hpp"
#include "photonic_lab/numerics.hpp"
#include "photonic_lab/slab.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <map>
#include <mutex>
#include <numbers>
#include <thread>

namespace photonic_lab {

namespace {

using cd = std::complex<double>;

constexpr double kPortMarginNm = 350.0;

DipoleSource dipole_for(const CavityScene& s, const BuiltScene& b) {
  DipoleSource d;
  d.x_nm = b.source_i * s.dx_nm;
  d.y_nm = (b.source_j + 0.5) * s.dx_nm;
  d.center_wavelength_nm = s.lambda_center_nm;
  d.bandwidth_nm = s.bandwidth_nm;
  return d;
}

FluxBox source_box(const BuiltScene& b) {
  return {b.source_i - 1, b.source_i + 1, b.source_j - 1, b.source_j + 2};
}

struct Ports {
  PortLine left, right;
};

Ports port_lines(const CavityScene& s, const BuiltScene& b) {
  const double dx = s.dx_nm;
  const int di = static_cast<int>(std::lround((b.stack_half_length_nm + 0.5 * s.padding_nm) / dx));
  const double margin = std::min(kPortMarginNm, 0.8 * s.padding_nm);
  const int dj = static_cast<int>(std::lround((0.5 * s.beam_width_nm + margin) / dx));
  const int j0 = std::max(b.grid.pml_cells + 1, b.center_j - dj);
  const int j1 = std::min(b.grid.ny - b.grid.pml_cells - 1, b.center_j + dj + 1);
  Ports p{{b.center_i - di, j0, j1}, {b.center_i + di, j0, j1}};
  require(p.left.i > b.grid.pml_cells && p.right.i < b.grid.nx - b.grid.pml_cells, ErrorCode::config,
          "waveguide ports fall inside the absorber");
  const FluxBox box = source_box(b);
  for (const auto& l : {p.left, p.right})
    require(l.i < box.i0 || l.i > box.i1, ErrorCode::config, "port monitor overlaps the source box");
  return p;
}

// Forward power through a port line projected onto the fundamental strip mode.
double port_power(const CavityScene& s, const BuiltScene& b, const PortLine& line, const PortRecord& rec,
                  std::size_t f, double lambda_nm, bool outward_positive_x) {
  const SlabWaveguide strip{s.phc.n_high, 1.0, 1.0, s.beam_width_nm};
  const auto modes = solve_modes(strip, lambda_nm, Polarization::TM);
  if (modes.empty()) return 0.0;
  const double y_low = (b.center_j + 0.5) * s.dx_nm - 0.5 * s.beam_width_nm;
  std::vector<double> z;
  for (int j = line.j0; j < line.j1; ++j) z.push_back((j + 0.5) * s.dx_nm - y_low);
  const auto h = mode_profile(strip, lambda_nm, modes.front(), z);
  double norm = 0.0;
  cd proj_e = 0.0, proj_h = 0.0;
  for (int j = line.j0; j < line.j1; ++j) {
    const std::size_t r = j - line.j0;
    const double eps = b.grid.eps_ey[b.grid.node(line.i, j)];
    const double e = modes.front().n_eff * h[r] / eps;
    norm += e * h[r];
    proj_e += rec.ey[f][r] * h[r];
    proj_h += rec.hz[f][r] * e;
  }
  const cd a = outward_positive_x ? (proj_e + proj_h) / (2.0 * norm) : (proj_e - proj_h) / (2.0 * norm);
  return 0.5 * std::norm(a) * norm;
}

long pulse_steps(double end_time, double dt) { return static_cast<long>(std::ceil(end_time / dt)); }

double interpolate(const std::vector<double>& x, const std::vector<double>& y, double at) {
  if (at <= x.front()) return y.front();
  if (at >= x.back()) return y.back();
  const auto it = std::upper_bound(x.begin(), x.end(), at);
  const std::size_t k = it - x.begin();
  const double t = (at - x[k - 1]) / (x[k] - x[k - 1]);
  return y[k - 1] + t * (y[k] - y[k - 1]);
}

}  // namespace

const char* to_string(Parity p) noexcept {
  switch (p) {
    case Parity::even: return "even";
    case Parity::odd: return "odd";
    case Parity::mixed: return "mixed";
  }
  return "mixed";
}

std::vector<double> source_band_grid(const CavityScene& s, int points) {
  require(points >= 2, ErrorCode::domain, "wavelength grid needs at least two points");
  return numerics::linspace(s.lambda_center_nm - s.bandwidth_nm, s.lambda_center_nm + s.bandwidth_nm,
                  static_cast<std::size_t>(points));
}

SceneRun simulate_scene(const CavityScene& s, const SceneRunOptions& o) {
  require(!o.lambda_grid_nm.empty(), ErrorCode::config, "wavelength grid is empty");
  require(o.ringdown_steps >= 0 && o.max_ringdown_steps > 0, ErrorCode::config, "ring-down step counts must be positive");
  require(o.decay_threshold > 0.0 && o.decay_threshold < 1.0, ErrorCode::config, "decay_threshold must lie in (0, 1)");
  SceneRun out;
  out.built = build_scene(s);
  const BuiltScene& b = out.built;
  const DipoleSource dip = dipole_for(s, b);
  const double dx = s.dx_nm;
  out.lambda_nm = o.lambda_grid_nm;

  FdtdMonitors mon;
  mon.flux_boxes.push_back(source_box(b));
  for (double l : o.lambda_grid_nm) mon.dft_omegas.push_back(omega_for(l, dx));
  mon.probes.push_back({Component::ey, b.source_i, b.source_j});
  const bool ports = o.record_ports && b.has_waveguide;
  Ports pl{};
  if (ports) {
    pl = port_lines(s, b);
    mon.ports = {pl.left, pl.right};
  }
  for (double l : o.field_map_wavelengths_nm) mon.field_map_omegas.push_back(omega_for(l, dx));

  FdtdSimulation sim(b.grid, o.courant);
  sim.add_source(dip);
  mon.field_map_start_time = sim.source_end_time();
  sim.set_monitors(mon);
  const long n_pulse = pulse_steps(sim.source_end_time(), sim.dt());
  sim.run(n_pulse);
  if (o.ringdown_steps > 0) {
    sim.run(o.ringdown_steps);
  } else {
    // Stop once the source-node intensity over a chunk falls below the threshold
    // relative to the strongest chunk of the ring-down.
    constexpr long chunk = 1000;
    double first_peak = 0.0;
    long taken = 0;
    for (;;) {
      double peak = 0.0;
      for (long k = 0; k < chunk; ++k) {
        sim.step();
        const double e = sim.field(Component::ey, b.source_i, b.source_j);
        peak = std::max(peak, e * e);
      }
      taken += chunk;
      first_peak = std::max(first_peak, peak);
      if (peak <= o.decay_threshold * first_peak) break;
      if (taken >= o.max_ringdown_steps) {
        out.warnings.push_back("ring-down stopped at " + std::to_string(taken) +
                               " steps before the fields decayed; spectra carry truncation ripple");
        break;
      }
    }
  }
  MonitorRecords rec = sim.records();

  out.dt = rec.dt;
  out.eps_at_source = b.grid.eps_ey[b.grid.node(b.source_i, b.source_j)];
  out.power = rec.box_flux[0];
  out.ringdown.assign(rec.probe_series[0].begin() + n_pulse, rec.probe_series[0].end());
  out.field_maps = std::move(rec.field_maps);
  out.pulse = pulse_for(dip, dx);
  out.steps = rec.steps;
  out.ringdown_start_time = n_pulse * rec.dt;
  for (double w : mon.dft_omegas) out.source_spectrum.push_back(out.pulse.spectrum(w, rec.dt, rec.steps));

  out.guided_power.assign(o.lambda_grid_nm.size(), 0.0);
  if (ports) {
    for (std::size_t f = 0; f < o.lambda_grid_nm.size(); ++f) {
      const double l = o.lambda_grid_nm[f];
      out.guided_power[f] = port_power(s, b, pl.left, rec.ports[0], f, l, false) +
                            port_power(s, b, pl.right, rec.ports[1], f, l, true);
    }
  }

  // Scatterer-free reference on the identical grid; the pulse only has to clear the box.
  const BuiltScene ref = build_scene(s, true);
  FdtdMonitors vmon;
  vmon.flux_boxes.push_back(source_box(ref));
  vmon.dft_omegas = mon.dft_omegas;
  FdtdSimulation vac(ref.grid, o.courant);
  vac.add_source(dip);
  vac.set_monitors(vmon);
  vac.run(n_pulse + 4L * std::max(ref.grid.nx, ref.grid.ny));
  out.vacuum_power = vac.records().box_flux[0];
  return out;
}

Spectrum ldos_enhancement(const SceneRun& run) {
  std::vector<double> v(run.power.size());
  for (std::size_t f = 0; f < v.size(); ++f) {
    require(run.vacuum_power[f] > 0.0, ErrorCode::config, "vacuum reference radiated no power");
    v[f] = std::max(0.0, run.eps_at_source * run.power[f] / run.vacuum_power[f]);
  }
  return Spectrum(run.lambda_nm, std::move(v));
}

Spectrum ldos_enhancement(const CavityScene& scene, const std::vector<double>& grid) {
  SceneRunOptions o;
  o.lambda_grid_nm = grid;
  o.record_ports = false;
  return ldos_enhancement(simulate_scene(scene, o));
}

Spectrum beta_factor(const SceneRun& run) {
  std::vector<double> v(run.power.size(), 0.0);
  for (std::size_t f = 0; f < v.size(); ++f) {
    if (run.guided_power[f] == 0.0) continue;  // no ports: β is zero by construction
    require(run.power[f] > 0.0, ErrorCode::config, "source box radiated no power");
    v[f] = run.guided_power[f] / run.power[f];
  }
  return Spectrum(run.lambda_nm, std::move(v));
}

Spectrum beta_factor_on_top(const SceneRun& run, double eta) {
  require(eta >= 0.0 && eta <= 1.0, ErrorCode::domain, "overlap factor must lie in [0, 1]");
  std::vector<double> v(run.power.size(), 0.0);
  for (std::size_t f = 0; f < v.size(); ++f) {
    require(run.vacuum_power[f] > 0.0, ErrorCode::config, "vacuum reference radiated no power");
    const double total = run.eps_at_source * run.power[f] / run.vacuum_power[f];
    const double guided = run.eps_at_source * run.guided_power[f] / run.vacuum_power[f];
    v[f] = eta * guided / on_top_enhancement(total, eta);
  }
  return Spectrum(run.lambda_nm, std::move(v));
}

Spectrum beta_factor(const CavityScene& scene, const std::vector<double>& grid) {
  SceneRunOptions o;
  o.lambda_grid_nm = grid;
  return beta_factor(simulate_scene(scene, o));
}

std::vector<ModeRecord> find_modes(const SceneRun& run, const CavityScene& s) {
  HarmonicOptions ho;
  ho.omega_min = omega_for(s.lambda_center_nm + s.bandwidth_nm, s.dx_nm);
  ho.omega_max = omega_for(s.lambda_center_nm - s.bandwidth_nm, s.dx_nm);
  const auto hm = resonance_analysis(run.ringdown, run.dt, {}, ho);
  std::vector<ModeRecord> out;
  for (const auto& m : hm) {
    ModeRecord r;
    r.omega = m.omega;
    r.alpha = m.alpha;
    r.lambda_res_nm = lambda_for(m.omega, s.dx_nm);
    r.q = m.q;
    r.q_sigma = m.q_sigma;
    r.q_lower_bound = m.q_lower_bound;
    out.push_back(std::move(r));
  }
  // Longest wavelength first: the lowest-order cavity mode leads.
  std::reverse(out.begin(), out.end());
  return out;
}

std::vector<ModeRecord> analyze_modes(const CavityScene& s, const SceneRunOptions& o) {
  SceneRunOptions first = o;
  first.field_map_wavelengths_nm.clear();
  auto modes = find_modes(simulate_scene(s, first), s);
  if (modes.empty()) return modes;
  SceneRunOptions second = o;
  second.field_map_wavelengths_nm.clear();
  for (const auto& m : modes) second.field_map_wavelengths_nm.push_back(m.lambda_res_nm);
  SceneRun run = simulate_scene(s, second);
  for (std::size_t k = 0; k < modes.size(); ++k) {
    const FieldMap& map = run.field_maps[k];
    modes[k].parity = classify_parity(map, run.built.center_i);
    if (s.geometry != SceneGeometry::stack_1d)
      modes[k].mode_volume_lambda3 = mode_volume(map, run.built.grid, modes[k].lambda_res_nm, s.slab_thickness_nm);
    modes[k].field_map = map;
  }
  return modes;
}

std::vector<double> modal_enhancement(const SceneRun& run, const std::vector<ModeRecord>& modes) {
  std::vector<double> out;
  if (modes.empty()) return out;
  std::vector<HarmonicMode> fixed;
  for (const auto& m : modes) fixed.push_back({m.omega, m.alpha, 0.0, 0.0, 0.0, 0.0, false});
  const auto c = modal_amplitudes(run.ringdown, run.dt, {}, fixed);
  const double lead = run.ringdown_start_time - run.pulse.t0;
  for (std::size_t k = 0; k < modes.size(); ++k) {
    const double w = modes[k].omega, a = modes[k].alpha;
    // One-sided Lorentzian from the pulse centre: |E(ω_k)| = |c(t0)|/α, P = ½|E||J|.
    const double c0 = std::abs(c[k]) * std::exp(a * lead);
    const double j = std::abs(run.pulse.spectrum(w, run.dt, run.steps));
    const double p_vac = interpolate(run.lambda_nm, run.vacuum_power, modes[k].lambda_res_nm);
    out.push_back(run.eps_at_source * 0.5 * c0 * j / std::max(a, 1e-300) / p_vac);
  }
  return out;
}

Parity classify_parity(const FieldMap& map, int center_i, double* agreement) {
  const int nx = map.nx, ny = map.ny, stride = nx + 1;
  require(center_i > 0 && center_i < nx, ErrorCode::domain, "mirror column outside the map");
  std::size_t k_max = 0;
  double peak = 0.0;
  for (std::size_t k = 0; k < map.ey.size(); ++k)
    if (std::abs(map.ey[k]) > peak) {
      peak = std::abs(map.ey[k]);
      k_max = k;
    }
  require(peak > 0.0, ErrorCode::domain, "field map is identically zero");
  // Rotate so the strongest sample is real; a standing mode is then real up to noise.
  const cd rot = std::conj(map.ey[k_max]) / peak;
  std::size_t same = 0, opposite = 0;
  const int reach = std::min(center_i, nx - center_i);
  for (int j = 0; j < ny; ++j)
    for (int d = 1; d <= reach; ++d) {
      const cd a = map.ey[j * stride + center_i + d], b = map.ey[j * stride + center_i - d];
      if (std::abs(a) < 0.1 * peak || std::abs(b) < 0.1 * peak) continue;
      ((a * rot).real() * (b * rot).real() > 0.0 ? same : opposite) += 1;
    }
  const std::size_t total = same + opposite;
  const double frac = total ? static_cast<double>(std::max(same, opposite)) / total : 0.0;
  if (agreement) *agreement = frac;
  if (frac <= 0.9) return Parity::mixed;
  return same > opposite ? Parity::even : Parity::odd;
}

double mode_volume(const FieldMap& map, const Grid2D& g, double lambda_nm, double thickness_nm) {
  require(lambda_nm > 0.0 && thickness_nm > 0.0, ErrorCode::domain, "wavelength and thickness must be positive");
  const int px = g.x_boundary == Boundary::pml ? g.pml_cells : 0;
  const int py = g.y_boundary == Boundary::pml ? g.pml_cells : 0;
  double sum = 0.0, peak = 0.0, eps_peak = 1.0;
  for (int j = py; j < g.ny - py; ++j)
    for (int i = px; i < g.nx - px; ++i) {
      const double ex = 0.5 * (std::norm(map.ex[g.node(i, j)]) + std::norm(map.ex[g.node(i, j + 1)]));
      const double ey = 0.5 * (std::norm(map.ey[g.node(i, j)]) + std::norm(map.ey[g.node(i + 1, j)]));
      const double eps = g.eps_cell[static_cast<std::size_t>(j) * g.nx + i];
      const double w = eps * (ex + ey);
      sum += w;
      if (w > peak) {
        peak = w;
        eps_peak = eps;
      }
    }
  require(peak > 0.0, ErrorCode::domain, "field map is identically zero");
  const double volume = sum / peak * g.dx_nm * g.dx_nm * thickness_nm;
  const double unit = std::pow(lambda_nm / std::sqrt(eps_peak), 3);
  return volume / unit;
}

double purcell_from_qv(double lambda_vac_nm, double n_host, double q, double v_lambda3) {
  require(lambda_vac_nm > 0.0 && n_host > 0.0, ErrorCode::domain, "wavelength and index must be positive");
  require(q > 0.0 && v_lambda3 > 0.0, ErrorCode::domain, "Q and V must be positive");
  const double unit = std::pow(lambda_vac_nm / n_host, 3);
  return 3.0 / (4.0 * std::numbers::pi * std::numbers::pi) * unit * q / (v_lambda3 * unit);
}

double purcell_from_beta(double beta) {
  require(beta >= 0.0 && beta < 1.0, ErrorCode::domain, "beta must lie in [0, 1)");
  return beta / (1.0 - beta);
}

PlacementStudy placement_study(const CavityScene& tmpl, const std::vector<Placement>& placements,
                               const SceneRunOptions& o, int jobs,
                               const std::function<void(std::size_t, std::size_t)>& progress) {
  require(!placements.empty(), ErrorCode::validation, "placement list is empty");
  validate(tmpl);
  for (const auto& p : placements)
    require(std::abs(p.offset_y_w) <= 0.5 && std::abs(p.offset_x_a) * tmpl.phc.period_nm <=
                                                 0.5 * tmpl.phc.cavity_length_nm +
                                                     tmpl.phc.n_segments * tmpl.phc.period_nm,
            ErrorCode::validation, "placement offset lies outside the waveguide footprint");

  PlacementStudy study;
  const SceneRun reference = simulate_scene(tmpl, o);
  study.modes = find_modes(reference, tmpl);

  // On-top and embedded emitters at the same in-plane spot share one simulation.
  std::vector<std::pair<double, double>> spots;
  std::vector<std::size_t> spot_of(placements.size());
  for (std::size_t k = 0; k < placements.size(); ++k) {
    const std::pair<double, double> xy{placements[k].offset_x_a, placements[k].offset_y_w};
    auto it = std::find(spots.begin(), spots.end(), xy);
    spot_of[k] = it - spots.begin();
    if (it == spots.end()) spots.push_back(xy);
  }

  std::vector<std::optional<SceneRun>> runs(spots.size());
  std::vector<std::exception_ptr> errors(spots.size());
  std::atomic<std::size_t> next{0}, done{0};
  std::mutex progress_mutex;
  auto worker = [&] {
    for (std::size_t k; (k = next.fetch_add(1)) < spots.size();) {
      CavityScene s = tmpl;
      s.offset_x_a = spots[k].first;
      s.offset_y_w = spots[k].second;
      try {
        if (s.offset_x_a == tmpl.offset_x_a && s.offset_y_w == tmpl.offset_y_w)
          runs[k] = reference;
        else
          runs[k] = simulate_scene(s, o);
      } catch (...) {
        errors[k] = std::current_exception();
      }
      const std::size_t n = ++done;
      if (progress) {
        std::lock_guard lock(progress_mutex);
        progress(n, spots.size());
      }
    }
  };
  const int workers = std::max(1, std::min<int>(jobs, static_cast<int>(spots.size())));
  std::vector<std::thread> pool;
  for (int w = 1; w < workers; ++w) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();

  for (std::size_t k = 0; k < spots.size(); ++k) {
    if (!errors[k]) continue;
    const std::string where = "placement (dx=" + numerics::format_double(spots[k].first) +
                              " a, dy=" + numerics::format_double(spots[k].second) + " w): ";
    try {
      std::rethrow_exception(errors[k]);
    } catch (const Error& e) {
      fail(e.code(), where + e.what());
    }
  }

  const double eta = vertical_overlap(tmpl);
  for (std::size_t k = 0; k < placements.size(); ++k) {
    const SceneRun& run = *runs[spot_of[k]];
    const bool on_top = placements[k].site == EmitterSite::on_top;
    Spectrum ldos = ldos_enhancement(run);
    std::vector<double> enh = modal_enhancement(run, study.modes);
    if (on_top) {
      std::vector<double> v = ldos.values();
      for (double& x : v) x = on_top_enhancement(x, eta);
      ldos = Spectrum(ldos.wavelengths_nm(), std::move(v));
      for (double& x : enh) x = on_top_enhancement(x, eta);
    }
    Spectrum beta = on_top ? beta_factor_on_top(run, eta) : beta_factor(run);
    std::vector<double> beta_res;
    for (const auto& m : study.modes)
      beta_res.push_back(interpolate(beta.wavelengths_nm(), beta.values(), m.lambda_res_nm));
    const double beta_peak = *std::max_element(beta.values().begin(), beta.values().end());
    study.rows.push_back({placements[k], std::move(enh), std::move(beta_res), beta_peak, std::move(ldos),
                          std::move(beta)});
  }
  return study;
}

}  // namespace photonic_lab
