#include "photonic_lab/fdtd.hpp"

#include "photonic_lab/error.hpp"
#include "photonic_lab/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace photonic_lab {

namespace {
using cd = std::complex<double>;
constexpr double kPmlOrder = 3.0;
constexpr double kPmlReflection = 1e-6;
constexpr int kFiniteCheckInterval = 256;
}  // namespace

double Geometry::eps_at(double x, double y) const {
  for (auto it = shapes.rbegin(); it != shapes.rend(); ++it)
    if (x >= it->x0_nm && x < it->x1_nm && y >= it->y0_nm && y < it->y1_nm) return it->eps;
  return background_eps;
}

double Grid2D::max_index() const {
  double m = 1.0;
  for (double e : eps_cell) m = std::max(m, e);
  return std::sqrt(m);
}

Grid2D rasterize(const Geometry& g, int nx, int ny, double dx, int pml_cells, Boundary xb,
                 Boundary yb, int sub) {
  require(nx >= 1 && ny >= 1, ErrorCode::config, "grid needs at least one cell per axis");
  require(dx > 0.0, ErrorCode::config, "cell size must be positive");
  require(sub >= 1, ErrorCode::config, "subsampling must be >= 1");
  Grid2D grid;
  grid.nx = nx;
  grid.ny = ny;
  grid.dx_nm = dx;
  grid.pml_cells = pml_cells;
  grid.x_boundary = xb;
  grid.y_boundary = yb;
  grid.eps_cell.assign(static_cast<std::size_t>(nx) * ny, 1.0);
  const std::size_t nodes = static_cast<std::size_t>(nx + 1) * (ny + 1);
  grid.eps_ex.assign(nodes, 1.0);
  grid.eps_ey.assign(nodes, 1.0);
  auto offset = [&](int k) { return (k + 0.5) / sub - 0.5; };  // in (-½, ½)

  for (int j = 0; j < ny; ++j)
    for (int i = 0; i < nx; ++i) {
      double acc = 0.0;
      for (int a = 0; a < sub; ++a)
        for (int b = 0; b < sub; ++b)
          acc += g.eps_at((i + 0.5 + offset(a)) * dx, (j + 0.5 + offset(b)) * dx);
      grid.eps_cell[static_cast<std::size_t>(j) * nx + i] = acc / (sub * sub);
    }
  for (int j = 0; j <= ny; ++j)
    for (int i = 0; i <= nx; ++i) {
      // Ex at (i+½, j): harmonic along x of column-wise arithmetic means over y.
      double inv = 0.0;
      for (int a = 0; a < sub; ++a) {
        double col = 0.0;
        for (int b = 0; b < sub; ++b) col += g.eps_at((i + 0.5 + offset(a)) * dx, (j + offset(b)) * dx);
        inv += sub / col;
      }
      grid.eps_ex[grid.node(i, j)] = sub / inv;
      // Ey at (i, j+½): harmonic along y of row-wise arithmetic means over x.
      inv = 0.0;
      for (int b = 0; b < sub; ++b) {
        double row = 0.0;
        for (int a = 0; a < sub; ++a) row += g.eps_at((i + offset(a)) * dx, (j + 0.5 + offset(b)) * dx);
        inv += sub / row;
      }
      grid.eps_ey[grid.node(i, j)] = sub / inv;
    }
  return grid;
}

double PulseShape::value(double t) const {
  const double u = (t - t0) / width;
  return amplitude * std::sin(omega0 * (t - t0)) * std::exp(-u * u);
}

std::complex<double> PulseShape::spectrum(double omega, double dt, long steps) const {
  cd acc = 0.0;
  const long last = std::min<long>(steps, static_cast<long>(std::ceil(end_time() / dt)) + 1);
  for (long n = 0; n < last; ++n) {
    const double t = (n + 0.5) * dt;
    acc += value(t) * std::polar(1.0, omega * t);
  }
  return acc * dt;
}

PulseShape pulse_for(const DipoleSource& src, double dx_nm) {
  require(src.bandwidth_nm > 0.0, ErrorCode::config, "source bandwidth must be positive");
  require(src.center_wavelength_nm > src.bandwidth_nm, ErrorCode::config,
          "source bandwidth exceeds its center wavelength");
  PulseShape p;
  p.omega0 = omega_for(src.center_wavelength_nm, dx_nm);
  // Half width at half maximum of the amplitude spectrum equals the requested bandwidth.
  const double dw = p.omega0 * src.bandwidth_nm / src.center_wavelength_nm;
  p.width = 2.0 * std::sqrt(std::numbers::ln2) / dw;
  p.t0 = 5.0 * p.width;
  p.amplitude = src.amplitude;
  return p;
}

FdtdSimulation::FdtdSimulation(Grid2D grid, double courant) : grid_(std::move(grid)) {
  require(courant > 0.0 && courant <= 1.0 / std::sqrt(2.0), ErrorCode::config,
          "Courant factor must lie in (0, 1/sqrt(2)]");
  const int nx = grid_.nx, ny = grid_.ny;
  const std::size_t nodes = static_cast<std::size_t>(nx + 1) * (ny + 1);
  require(grid_.eps_ex.size() == nodes && grid_.eps_ey.size() == nodes, ErrorCode::config,
          "permittivity arrays do not match the grid");
  const bool px = grid_.x_boundary == Boundary::pml, py = grid_.y_boundary == Boundary::pml;
  if (px || py) {
    require(grid_.pml_cells >= 8, ErrorCode::config, "PML needs at least 8 cells");
    if (px) require(nx > 2 * grid_.pml_cells, ErrorCode::config, "grid too small for its PML in x");
    if (py) require(ny > 2 * grid_.pml_cells, ErrorCode::config, "grid too small for its PML in y");
  }
  if (grid_.x_boundary == Boundary::periodic)
    require(nx >= 1, ErrorCode::config, "periodic axis needs at least one cell");
  dt_ = courant;
  ex_.assign(nodes, 0.0);
  ey_.assign(nodes, 0.0);
  hzx_.assign(nodes, 0.0);
  hzy_.assign(nodes, 0.0);
  inv_eps_ex_.resize(nodes);
  inv_eps_ey_.resize(nodes);
  for (std::size_t k = 0; k < nodes; ++k) {
    require(grid_.eps_ex[k] >= 1.0 && grid_.eps_ey[k] >= 1.0, ErrorCode::config,
            "permittivity must be >= 1");
    inv_eps_ex_[k] = 1.0 / grid_.eps_ex[k];
    inv_eps_ey_[k] = 1.0 / grid_.eps_ey[k];
  }

  auto profile = [&](bool active, int n, double pos, std::vector<double>& a, std::vector<double>& b, int idx) {
    double s = 0.0;
    if (active) {
      const double l = grid_.pml_cells;
      const double depth = std::max({l - pos, pos - (n - l), 0.0});
      const double s_max = (kPmlOrder + 1.0) * std::log(1.0 / kPmlReflection) / (2.0 * l);
      s = s_max * std::pow(depth / l, kPmlOrder);
    }
    if (s == 0.0) {
      a[idx] = 1.0;
      b[idx] = dt_;
    } else {
      a[idx] = std::exp(-s * dt_);
      b[idx] = -std::expm1(-s * dt_) / s;
    }
  };
  ax_e_.resize(nx + 1);
  bx_e_.resize(nx + 1);
  ax_h_.resize(nx + 1);
  bx_h_.resize(nx + 1);
  ay_e_.resize(ny + 1);
  by_e_.resize(ny + 1);
  ay_h_.resize(ny + 1);
  by_h_.resize(ny + 1);
  for (int i = 0; i <= nx; ++i) {
    profile(px, nx, i, ax_e_, bx_e_, i);
    profile(px, nx, i + 0.5, ax_h_, bx_h_, i);
  }
  for (int j = 0; j <= ny; ++j) {
    profile(py, ny, j, ay_e_, by_e_, j);
    profile(py, ny, j + 0.5, ay_h_, by_h_, j);
  }
}

int FdtdSimulation::ey_node_i(double x_nm) const {
  return static_cast<int>(std::lround(x_nm / grid_.dx_nm));
}

int FdtdSimulation::ey_node_j(double y_nm) const {
  return static_cast<int>(std::floor(y_nm / grid_.dx_nm));
}

void FdtdSimulation::add_source(const DipoleSource& src) {
  const int i = ey_node_i(src.x_nm), j = ey_node_j(src.y_nm);
  auto inside = [&](int v, int n, Boundary b) {
    const int margin = b == Boundary::pml ? grid_.pml_cells : 0;
    return v > margin && v < n - margin;
  };
  const bool ok_x = grid_.x_boundary == Boundary::periodic ? (i >= 0 && i < grid_.nx)
                                                            : inside(i, grid_.nx, grid_.x_boundary);
  const bool ok_y = grid_.y_boundary == Boundary::periodic ? (j >= 0 && j < grid_.ny)
                                                            : (j >= (grid_.y_boundary == Boundary::pml ? grid_.pml_cells : 0) &&
                                                               j < grid_.ny - (grid_.y_boundary == Boundary::pml ? grid_.pml_cells : 0));
  require(ok_x && ok_y, ErrorCode::config, "dipole source lies outside the interior region");
  sources_.push_back({grid_.node(i, j), pulse_for(src, grid_.dx_nm)});
}

double FdtdSimulation::source_end_time() const {
  double t = 0.0;
  for (const auto& s : sources_) t = std::max(t, s.pulse.end_time());
  return t;
}

void FdtdSimulation::set_monitors(FdtdMonitors monitors) {
  mon_ = std::move(monitors);
  rec_ = MonitorRecords{};
  rec_.dt = dt_;
  rec_.probe_series.assign(mon_.probes.size(), {});
  const std::size_t nf = mon_.dft_omegas.size();
  box_e_.clear();
  box_h_.clear();
  for (const auto& b : mon_.flux_boxes) {
    require(b.i0 < b.i1 && b.j0 < b.j1, ErrorCode::config, "degenerate flux box");
    require(b.i0 >= 1 && b.i1 < grid_.nx && b.j0 >= 1 && b.j1 < grid_.ny, ErrorCode::config,
            "flux box leaves the grid");
    const std::size_t samples = 2 * (b.j1 - b.j0) + 2 * (b.i1 - b.i0);
    box_e_.emplace_back(nf * samples, 0.0);
    box_h_.emplace_back(nf * samples, 0.0);
  }
  port_e_.clear();
  port_h_.clear();
  for (const auto& p : mon_.ports) {
    require(p.i >= 1 && p.i < grid_.nx && p.j0 >= 0 && p.j1 <= grid_.ny && p.j0 < p.j1, ErrorCode::config,
            "port line leaves the grid");
    port_e_.emplace_back(nf * (p.j1 - p.j0), 0.0);
    port_h_.emplace_back(nf * (p.j1 - p.j0), 0.0);
  }
  src_e_.assign(nf, 0.0);
  rec_.field_maps.clear();
  for (double w : mon_.field_map_omegas) {
    FieldMap m;
    m.omega = w;
    m.nx = grid_.nx;
    m.ny = grid_.ny;
    m.ex.assign(ex_.size(), 0.0);
    m.ey.assign(ey_.size(), 0.0);
    rec_.field_maps.push_back(std::move(m));
  }
}

void FdtdSimulation::update_h() {
  const int nx = grid_.nx, ny = grid_.ny, s = grid_.stride();
  for (int j = 0; j < ny; ++j) {
    const double ay = ay_h_[j], by = by_h_[j];
    for (int i = 0; i < nx; ++i) {
      const int k = j * s + i;
      const double d_ey = ey_[k + 1] - ey_[k];
      const double d_ex = ex_[k + s] - ex_[k];
      hzx_[k] = ax_h_[i] * hzx_[k] - bx_h_[i] * d_ey;
      hzy_[k] = ay * hzy_[k] + by * d_ex;
    }
  }
}

void FdtdSimulation::update_e() {
  const int nx = grid_.nx, ny = grid_.ny, s = grid_.stride();
  const bool per_x = grid_.x_boundary == Boundary::periodic;
  const bool per_y = grid_.y_boundary == Boundary::periodic;
  auto hz = [&](int k) { return hzx_[k] + hzy_[k]; };

  // Ex at (i+½, j): ∂Ex/∂t = (1/ε) ∂Hz/∂y.
  const int jx0 = per_y ? 0 : 1;
  for (int j = jx0; j < ny; ++j) {
    const int jm = j == 0 ? ny - 1 : j - 1;
    const double ay = ay_e_[j], by = by_e_[j];
    for (int i = 0; i < nx; ++i) {
      const int k = j * s + i;
      ex_[k] = ay * ex_[k] + by * inv_eps_ex_[k] * (hz(k) - hz(jm * s + i));
    }
  }
  if (per_y)
    for (int i = 0; i < nx; ++i) ex_[ny * s + i] = ex_[i];

  // Ey at (i, j+½): ∂Ey/∂t = −(1/ε) ∂Hz/∂x.
  const int ix0 = per_x ? 0 : 1;
  for (int j = 0; j < ny; ++j) {
    for (int i = ix0; i < nx; ++i) {
      const int k = j * s + i;
      const int km = i == 0 ? j * s + nx - 1 : k - 1;
      ey_[k] = ax_e_[i] * ey_[k] - bx_e_[i] * inv_eps_ey_[k] * (hz(k) - hz(km));
    }
  }

  const double t_half = (n_ + 0.5) * dt_;
  for (const auto& src : sources_) ey_[src.node] -= dt_ * inv_eps_ey_[src.node] * src.pulse.value(t_half);

  if (per_x)
    for (int j = 0; j < ny; ++j) ey_[j * s + nx] = ey_[j * s];
}

void FdtdSimulation::accumulate() {
  const int s = grid_.stride();
  const double te = (n_ + 1) * dt_;      // E just advanced to step n+1
  const double th = (n_ + 0.5) * dt_;    // H at n+½
  auto hz = [&](int k) { return hzx_[k] + hzy_[k]; };

  for (std::size_t p = 0; p < mon_.probes.size(); ++p)
    rec_.probe_series[p].push_back(field(mon_.probes[p].component, mon_.probes[p].i, mon_.probes[p].j));

  const std::size_t nf = mon_.dft_omegas.size();
  if (nf > 0) {
    std::vector<cd> pe(nf), ph(nf);
    for (std::size_t f = 0; f < nf; ++f) {
      pe[f] = std::polar(dt_, mon_.dft_omegas[f] * te);
      ph[f] = std::polar(dt_, mon_.dft_omegas[f] * th);
    }
    for (std::size_t b = 0; b < mon_.flux_boxes.size(); ++b) {
      const auto& bx = mon_.flux_boxes[b];
      const std::size_t samples = 2 * (bx.j1 - bx.j0) + 2 * (bx.i1 - bx.i0);
      std::size_t q = 0;
      auto push = [&](double e, double h) {
        for (std::size_t f = 0; f < nf; ++f) {
          box_e_[b][f * samples + q] += e * pe[f];
          box_h_[b][f * samples + q] += h * ph[f];
        }
        ++q;
      };
      for (int j = bx.j0; j < bx.j1; ++j) {
        for (int i : {bx.i0, bx.i1}) {
          const int k = j * s + i;
          push(ey_[k], 0.5 * (hz(k - 1) + hz(k)));
        }
      }
      for (int i = bx.i0; i < bx.i1; ++i) {
        for (int j : {bx.j0, bx.j1}) {
          const int k = j * s + i;
          push(ex_[k], 0.5 * (hz(k - s) + hz(k)));
        }
      }
    }
    for (std::size_t p = 0; p < mon_.ports.size(); ++p) {
      const auto& pl = mon_.ports[p];
      const int rows = pl.j1 - pl.j0;
      for (int j = pl.j0; j < pl.j1; ++j) {
        const int k = j * s + pl.i;
        const double e = ey_[k], h = 0.5 * (hz(k - 1) + hz(k));
        for (std::size_t f = 0; f < nf; ++f) {
          port_e_[p][f * rows + (j - pl.j0)] += e * pe[f];
          port_h_[p][f * rows + (j - pl.j0)] += h * ph[f];
        }
      }
    }
    if (!sources_.empty()) {
      const double e = ey_[sources_.front().node];
      for (std::size_t f = 0; f < nf; ++f) src_e_[f] += e * pe[f];
    }
  }

  if (te < mon_.field_map_start_time) return;
  for (auto& m : rec_.field_maps) {
    const cd w = std::polar(dt_, m.omega * te);
    const double wr = w.real(), wi = w.imag();
    for (std::size_t k = 0; k < ex_.size(); ++k) {
      m.ex[k] += cd(ex_[k] * wr, ex_[k] * wi);
      m.ey[k] += cd(ey_[k] * wr, ey_[k] * wi);
    }
  }
}

void FdtdSimulation::check_finite() const {
  double acc = 0.0;
  for (std::size_t k = 0; k < hzx_.size(); ++k) acc += hzx_[k] + hzy_[k];
  for (double v : ey_) acc += v;
  if (!std::isfinite(acc))
    fail(ErrorCode::instability, "non-finite field detected at step " + std::to_string(n_));
}

void FdtdSimulation::step() {
  update_h();
  update_e();
  accumulate();
  ++n_;
  if (n_ % kFiniteCheckInterval == 0) check_finite();
}

void FdtdSimulation::run(long steps) {
  for (long k = 0; k < steps; ++k) step();
  check_finite();
}

double FdtdSimulation::step_with_energy() {
  const int nx = grid_.nx, ny = grid_.ny;
  double we = 0.0;
  for (int j = 0; j < ny; ++j)
    for (int i = 0; i < nx; ++i) {
      const int k = grid_.node(i, j);
      we += grid_.eps_ex[k] * ex_[k] * ex_[k] + grid_.eps_ey[k] * ey_[k] * ey_[k];
    }
  std::vector<double> h_old(hzx_.size());
  for (std::size_t k = 0; k < h_old.size(); ++k) h_old[k] = hzx_[k] + hzy_[k];
  update_h();
  double wh = 0.0;
  for (int j = 0; j < ny; ++j)
    for (int i = 0; i < nx; ++i) {
      const int k = grid_.node(i, j);
      wh += h_old[k] * (hzx_[k] + hzy_[k]);
    }
  update_e();
  accumulate();
  ++n_;
  return 0.5 * (we + wh);
}

double FdtdSimulation::field(Component c, int i, int j) const {
  const int k = grid_.node(i, j);
  switch (c) {
    case Component::ex: return ex_[k];
    case Component::ey: return ey_[k];
    case Component::hz: return hzx_[k] + hzy_[k];
  }
  return 0.0;
}

MonitorRecords FdtdSimulation::records() const {
  MonitorRecords out = rec_;
  out.dt = dt_;
  out.steps = n_;
  const std::size_t nf = mon_.dft_omegas.size();
  out.box_flux.clear();
  for (std::size_t b = 0; b < mon_.flux_boxes.size(); ++b) {
    const auto& bx = mon_.flux_boxes[b];
    const std::size_t samples = 2 * (bx.j1 - bx.j0) + 2 * (bx.i1 - bx.i0);
    std::vector<double> flux(nf, 0.0);
    for (std::size_t f = 0; f < nf; ++f) {
      std::size_t q = 0;
      double acc = 0.0;
      for (int j = bx.j0; j < bx.j1; ++j)
        for (int side = 0; side < 2; ++side, ++q) {
          const double sx = 0.5 * (box_e_[b][f * samples + q] * std::conj(box_h_[b][f * samples + q])).real();
          acc += side == 0 ? -sx : sx;
        }
      for (int i = bx.i0; i < bx.i1; ++i)
        for (int side = 0; side < 2; ++side, ++q) {
          // S_y = −Ex·Hz
          const double sy = -0.5 * (box_e_[b][f * samples + q] * std::conj(box_h_[b][f * samples + q])).real();
          acc += side == 0 ? -sy : sy;
        }
      flux[f] = acc;
    }
    out.box_flux.push_back(std::move(flux));
  }
  out.ports.clear();
  for (std::size_t p = 0; p < mon_.ports.size(); ++p) {
    const int rows = mon_.ports[p].j1 - mon_.ports[p].j0;
    PortRecord r;
    for (std::size_t f = 0; f < nf; ++f) {
      r.ey.emplace_back(port_e_[p].begin() + f * rows, port_e_[p].begin() + (f + 1) * rows);
      r.hz.emplace_back(port_h_[p].begin() + f * rows, port_h_[p].begin() + (f + 1) * rows);
    }
    out.ports.push_back(std::move(r));
  }
  out.source_e_dft = src_e_;
  return out;
}

MonitorRecords run_fdtd(const Grid2D& grid, const std::vector<DipoleSource>& sources,
                        const FdtdMonitors& monitors, double t_max, double courant) {
  FdtdSimulation sim(grid, courant);
  for (const auto& s : sources) sim.add_source(s);
  sim.set_monitors(monitors);
  require(t_max > 0.0, ErrorCode::config, "t_max must be positive");
  const long steps = static_cast<long>(std::ceil(t_max / sim.dt()));
  require(t_max >= sim.source_end_time(), ErrorCode::config,
          "t_max does not cover the source pulse");
  sim.run(steps);
  return sim.records();
}

}  // namespace photonic_lab
