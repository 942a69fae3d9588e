#include "photonic_lab/cavity_analysis.hpp"
#include "photonic_lab/fdtd.hpp"

#include "photonic_lab/error.hpp"
#include "photonic_lab/numerics.hpp"

#include <doctest.h>

#include <cmath>
#include <complex>
#include <numbers>

using namespace photonic_lab;

namespace {

using cd = std::complex<double>;

// Plane-wave transmission through a y-uniform slab: probe spectrum with the slab over
// the probe spectrum without it.
std::vector<double> slab_transmission(double dx, double n_slab, double d_nm, const std::vector<double>& lambdas) {
  const double length = 6000.0;
  const int nx = static_cast<int>(std::lround(length / dx));
  auto probe_spectrum = [&](bool with_slab) {
    Geometry g;
    if (with_slab) g.shapes.push_back({3000.0 - 0.5 * d_nm, 3000.0 + 0.5 * d_nm, -1e9, 1e9, n_slab * n_slab});
    const Grid2D grid = rasterize(g, nx, 1, dx, 20, Boundary::pml, Boundary::periodic);
    DipoleSource src;
    src.x_nm = 1000.0;
    src.y_nm = 0.5 * dx;
    src.center_wavelength_nm = 750.0;
    src.bandwidth_nm = 150.0;
    FdtdMonitors mon;
    mon.probes.push_back({Component::ey, static_cast<int>(std::lround(4800.0 / dx)), 0});
    FdtdSimulation probe_sim(grid);
    probe_sim.add_source(src);
    const double t_max = probe_sim.source_end_time() + 3.0 * nx;
    const MonitorRecords rec = run_fdtd(grid, {src}, mon, t_max);
    std::vector<cd> out;
    for (double l : lambdas) {
      const double w = omega_for(l, dx);
      cd acc = 0.0;
      for (std::size_t n = 0; n < rec.probe_series[0].size(); ++n)
        acc += rec.probe_series[0][n] * std::polar(1.0, w * (n + 1) * rec.dt);
      out.push_back(acc);
    }
    return out;
  };
  const auto with = probe_spectrum(true), without = probe_spectrum(false);
  std::vector<double> t;
  for (std::size_t k = 0; k < lambdas.size(); ++k) t.push_back(std::norm(with[k]) / std::norm(without[k]));
  return t;
}

double airy(double n, double d, double l) {
  const double r = std::pow((n - 1.0) / (n + 1.0), 2);
  const double f = 4.0 * r / std::pow(1.0 - r, 2);
  return 1.0 / (1.0 + f * std::pow(std::sin(2.0 * std::numbers::pi * n * d / l), 2));
}

}  // namespace

TEST_SUITE("fdtd") {
  TEST_CASE("courant limit and absorber size are enforced") {
    const Grid2D g = rasterize({}, 60, 60, 10.0, 10, Boundary::pml, Boundary::pml);
    CHECK_THROWS_AS(FdtdSimulation(g, 0.75), Error);
    const Grid2D thin = rasterize({}, 60, 60, 10.0, 4, Boundary::pml, Boundary::pml);
    CHECK_THROWS_AS(FdtdSimulation(thin, 0.5), Error);
  }

  TEST_CASE("source inside the absorber is rejected") {
    const Grid2D g = rasterize({}, 60, 60, 10.0, 10, Boundary::pml, Boundary::pml);
    FdtdSimulation sim(g);
    DipoleSource src;
    src.x_nm = 30.0;
    src.y_nm = 300.0;
    try {
      sim.add_source(src);
      FAIL("expected config error");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::config);
    }
  }

  TEST_CASE("rasterized permittivity") {
    Geometry g;
    g.shapes.push_back({0.0, 105.0, -1e9, 1e9, 4.0});
    const Grid2D grid = rasterize(g, 20, 4, 10.0, 0, Boundary::pec, Boundary::periodic);
    CHECK(grid.eps_cell[0] == doctest::Approx(4.0));
    CHECK(grid.eps_cell[10] == doctest::Approx(2.5));  // half-filled cell
    CHECK(grid.eps_cell[15] == doctest::Approx(1.0));
    CHECK(grid.max_index() == doctest::Approx(2.0));
  }

  TEST_CASE("energy in a closed lossless box is conserved") {
    Geometry g;
    g.shapes.push_back({200.0, 500.0, 150.0, 450.0, 6.0});
    const Grid2D grid = rasterize(g, 64, 64, 10.0, 0, Boundary::pec, Boundary::pec);
    FdtdSimulation sim(grid);
    DipoleSource src;
    src.x_nm = 310.0;
    src.y_nm = 250.0;
    src.center_wavelength_nm = 700.0;
    src.bandwidth_nm = 200.0;
    sim.add_source(src);
    while (sim.steps_taken() * sim.dt() < sim.source_end_time()) sim.step();
    const double e0 = sim.step_with_energy();
    REQUIRE(e0 > 0.0);
    for (int k = 0; k < 9999; ++k) sim.step();
    CHECK(std::abs(sim.step_with_energy() - e0) / e0 < 1e-3);
  }

  TEST_CASE("energy in open vacuum only drains") {
    const Grid2D grid = rasterize({}, 400, 400, 10.0, 10, Boundary::pml, Boundary::pml);
    FdtdSimulation sim(grid);
    DipoleSource src;
    src.x_nm = 2000.0;
    src.y_nm = 2000.0;
    src.bandwidth_nm = 300.0;
    sim.add_source(src);
    double peak = 0.0;
    while (sim.steps_taken() * sim.dt() < sim.source_end_time()) {
      sim.step();
      peak = std::max(peak, sim.step_with_energy());
    }
    double last = sim.step_with_energy();
    REQUIRE(last > 1e-4 * peak);
    while (last > 1e-9 * peak) {
      for (int s = 0; s < 24; ++s) sim.step();
      const double e = sim.step_with_energy();
      REQUIRE(e <= last * (1.0 + 1e-12));
      last = e;
    }
  }

  TEST_CASE("dipole power in vacuum matches the analytic line-source result") {
    CavityScene vac;
    vac.geometry = SceneGeometry::vacuum;
    SceneRunOptions o;
    o.lambda_grid_nm = source_band_grid(vac, 21);
    o.record_ports = false;
    o.ringdown_steps = 500;
    const SceneRun run = simulate_scene(vac, o);
    for (std::size_t f = 0; f < run.lambda_nm.size(); ++f) {
      const double w = omega_for(run.lambda_nm[f], vac.dx_nm);
      CHECK(run.vacuum_power[f] == doctest::Approx(w * std::norm(run.source_spectrum[f]) / 16.0).epsilon(0.05));
    }
    const Spectrum ldos = ldos_enhancement(run);
    for (double v : ldos.values()) CHECK(v == doctest::Approx(1.0).epsilon(0.05));
    const Spectrum beta = beta_factor(run);
    for (double b : beta.values()) CHECK(b == 0.0);  // nothing to couple into
  }

  TEST_CASE("index-matched slab is invisible") {
    const std::vector<double> ls = {700.0, 750.0, 800.0};
    for (double t : slab_transmission(10.0, 1.0, 400.0, ls)) CHECK(t == doctest::Approx(1.0).epsilon(0.01));
  }

  TEST_CASE("dielectric slab transmission: Airy oracle and self-convergence") {
    const auto ls = numerics::linspace(680.0, 820.0, 15);
    const auto coarse = slab_transmission(10.0, 2.0, 400.0, ls);
    const auto fine = slab_transmission(5.0, 2.0, 400.0, ls);
    for (std::size_t k = 0; k < ls.size(); ++k) {
      CHECK(fine[k] == doctest::Approx(airy(2.0, 400.0, ls[k])).epsilon(0.02));
      CHECK(std::abs(fine[k] - coarse[k]) < 0.02 * fine[k]);
    }
  }

  TEST_CASE("run_fdtd rejects a window shorter than the source") {
    const Grid2D grid = rasterize({}, 60, 60, 10.0, 10, Boundary::pml, Boundary::pml);
    DipoleSource src;
    src.x_nm = 300.0;
    src.y_nm = 300.0;
    CHECK_THROWS_AS(run_fdtd(grid, {src}, {}, 1.0), Error);
  }

  TEST_CASE("parity of synthetic field maps") {
    FieldMap m;
    m.nx = 40;
    m.ny = 5;
    m.ex.assign(41 * 6, 0.0);
    m.ey.assign(41 * 6, 0.0);
    for (int j = 0; j < 6; ++j)
      for (int i = 0; i <= 40; ++i) m.ey[j * 41 + i] = std::cos(0.3 * (i - 20)) * std::exp(-0.01 * (i - 20) * (i - 20));
    double agree = 0.0;
    CHECK(classify_parity(m, 20, &agree) == Parity::even);
    CHECK(agree == doctest::Approx(1.0));
    for (int j = 0; j < 6; ++j)
      for (int i = 0; i <= 40; ++i)
        m.ey[j * 41 + i] = cd(0.0, 1.0) * std::sin(0.3 * (i - 20)) * std::exp(-0.01 * (i - 20) * (i - 20));
    CHECK(classify_parity(m, 20) == Parity::odd);
    for (int j = 0; j < 6; ++j)
      for (int i = 0; i <= 40; ++i) m.ey[j * 41 + i] = std::cos(0.3 * (i - 20)) + std::sin(0.3 * (i - 20));
    CHECK(classify_parity(m, 20) == Parity::mixed);
  }

  TEST_CASE("mode volume of a flat field") {
    const Grid2D g = rasterize({}, 30, 20, 10.0, 0, Boundary::pec, Boundary::pec);
    FieldMap m;
    m.nx = 30;
    m.ny = 20;
    m.ex.assign(31 * 21, 0.0);
    m.ey.assign(31 * 21, 1.0);
    const double v = mode_volume(m, g, 700.0, 200.0);
    CHECK(v == doctest::Approx(30 * 20 * 100.0 * 200.0 / std::pow(700.0, 3)).epsilon(1e-12));
    m.ey.assign(31 * 21, 0.0);
    CHECK_THROWS_AS(mode_volume(m, g, 700.0, 200.0), Error);
  }

  TEST_CASE("purcell arithmetic") {
    const double unit = 3.0 / (4.0 * std::numbers::pi * std::numbers::pi);
    CHECK(purcell_from_qv(738.0, 2.0, 1.0, 1.0) == doctest::Approx(unit));
    CHECK(unit == doctest::Approx(0.07599).epsilon(1e-4));
    CHECK(purcell_from_qv(738.0, 2.0, 200.0, 0.5) == doctest::Approx(2.0 * purcell_from_qv(738.0, 2.0, 100.0, 0.5)));
    CHECK(purcell_from_beta(0.14) == doctest::Approx(0.163).epsilon(2e-3));
    CHECK_THROWS_AS(purcell_from_beta(1.0), Error);
    CHECK(on_top_enhancement(1.0, 0.2) == doctest::Approx(1.0));
  }
}
