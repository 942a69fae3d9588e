#include "photonic_lab/mzi.hpp"

#include "photonic_lab/error.hpp"
#include "photonic_lab/numerics.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>

using namespace photonic_lab;

namespace {
constexpr double kPi = std::numbers::pi;

MziConfig unbalanced(double dl_um = 100.0) {
  MziConfig c;
  c.delta_l_um = dl_um;
  c.n_eff = 1.9;
  c.n_gr = 2.0;
  return c;
}
}  // namespace

TEST_SUITE("mzi") {
  TEST_CASE("phase difference") {
    MziConfig c;
    CHECK(phase_difference(c, 738.0, {}) == 0.0);

    c.l_spiral_mm = 1.78;
    HeaterDrive d;
    d.dT_long_K = switching_delta_t(738.0, 1.78, 1e-5);
    CHECK(std::abs(phase_difference(c, 738.0, d) - kPi) < 1e-3);

    d.dT_short_K = d.dT_long_K;  // symmetric heating of a balanced pair cancels
    CHECK(std::abs(phase_difference(c, 738.0, d)) < 1e-12);

    // Oracle: (2π/λ)·Δl·n_eff at the reference wavelength.
    const MziConfig u = unbalanced();
    CHECK(phase_difference(u, 738.0, {}) == doctest::Approx(2.0 * kPi / 738.0 * 1e5 * 1.9));
  }

  TEST_CASE("lossless fringe extremes") {
    MziConfig c;
    CHECK(transmission_from_phase(c, 0.0) == doctest::Approx(1.0));
    CHECK(std::abs(transmission_from_phase(c, kPi)) < 1e-15);
  }

  TEST_CASE("lossy fringe matches the closed-form extinction ratio") {
    MziConfig c = unbalanced();
    const double alpha = 2.0 * 0.1 / 0.1;  // αΔl/2 = 0.1 with Δl = 0.1 mm
    c.alpha_db_per_mm = alpha * 10.0 / std::numbers::ln10;
    const double hi = transmission_from_phase(c, 0.0), lo = transmission_from_phase(c, kPi);
    const double e = std::exp(-0.1);
    const double oracle = 10.0 * std::log10(std::pow((1 + e) / (1 - e), 2));
    CHECK(oracle == doctest::Approx(26.03).epsilon(1e-4));
    CHECK(10.0 * std::log10(hi / lo) == doctest::Approx(oracle).epsilon(1e-10));
    CHECK(extinction_ratio_from_loss(alpha, 0.1).value == doctest::Approx(oracle).epsilon(1e-12));
  }

  TEST_CASE("extinction ratio from loss") {
    CHECK(extinction_ratio_from_loss(0.0, 0.1).infinite);
    double last = INFINITY;
    for (double x : {0.01, 0.05, 0.1, 0.5, 1.0, 3.0}) {
      const double er = extinction_ratio_from_loss(x / 0.1, 0.1).value;
      CHECK(er < last);
      last = er;
    }
  }

  TEST_CASE("free spectral range") {
    const MziConfig c = unbalanced();
    CHECK(free_spectral_range(c, 738.0).value == doctest::Approx(738.0 * 738.0 / (2.0 * 1e5)));
    CHECK(free_spectral_range(c, 738.0).value == doctest::Approx(2.723).epsilon(1e-3));
    CHECK(free_spectral_range(unbalanced(200.0), 738.0).value ==
          doctest::Approx(0.5 * free_spectral_range(c, 738.0).value));
    CHECK(free_spectral_range(MziConfig{}, 738.0).infinite);
  }

  TEST_CASE("swept fringes are spaced by the FSR") {
    const MziConfig c = unbalanced();
    const auto grid = numerics::linspace(730.0, 746.0, 16001);
    const Spectrum s = mzi_wavelength_sweep(c, {}, grid);
    int peaks = 0;
    double first = 0.0, last = 0.0;
    for (std::size_t i = 1; i + 1 < s.size(); ++i)
      if (s.values()[i] > s.values()[i - 1] && s.values()[i] >= s.values()[i + 1]) {
        if (peaks == 0) first = grid[i];
        last = grid[i];
        ++peaks;
      }
    CHECK(peaks >= 2);
    CHECK((last - first) / (peaks - 1) == doctest::Approx(free_spectral_range(c, 738.0).value).epsilon(0.01));
  }

  TEST_CASE("switching temperature") {
    CHECK(switching_delta_t(738.0, 1.78, 1e-5) == doctest::Approx(20.73).epsilon(1e-3));
    CHECK(switching_delta_t(738.0, 3.56, 1e-5) == doctest::Approx(0.5 * switching_delta_t(738.0, 1.78, 1e-5)));
    CHECK(switching_delta_t(532.0, 1.78, 1e-5) == doctest::Approx(14.94).epsilon(1e-3));
    CHECK_THROWS_AS(switching_delta_t(738.0, 0.0, 1e-5), Error);
  }

  TEST_CASE("cascade") {
    CHECK(cascade_transmission_ideal(0.0, 0.0) == doctest::Approx(1.0));
    const auto ph = numerics::linspace(0.0, 2.0 * kPi, 64);
    for (double p2 : ph) CHECK(std::abs(cascade_transmission_ideal(kPi, p2)) < 1e-12);
    for (double p1 : ph)
      for (double p2 : ph)
        CHECK(std::abs(cascade_transmission_ideal(p1, p2) - 0.25 * (1 + std::cos(p1)) * (1 + std::cos(p2))) < 1e-12);

    MziConfig lossy = unbalanced();
    lossy.alpha_db_per_mm = 1.0;
    const CascadeConfig cc{lossy, lossy};
    CHECK(cascade_transmission(cc, 0.3, 1.1) ==
          doctest::Approx(transmission_from_phase(lossy, 0.3) * transmission_from_phase(lossy, 1.1)));
  }

  TEST_CASE("heater power map") {
    MziConfig c;
    const CascadeConfig cc{c, c};
    const auto p = numerics::linspace(0.0, 2.0 * 12.2, 33);
    const HeaterMap m = heater_power_map(cc, 738.0, p, p, 12.2, 14.83);
    CHECK(m.at(0, 0) == doctest::Approx(1.0));
    for (std::size_t i = 0; i < p.size(); ++i)
      for (std::size_t j = 0; j < p.size(); ++j)
        CHECK(m.at(i, j) == doctest::Approx(cascade_transmission_ideal(kPi * p[i] / 12.2, kPi * p[j] / 14.83)));
    // 2π-periodic along the first axis: P = 0 and P = 2·Pπ give the same row.
    for (std::size_t j = 0; j < p.size(); ++j) CHECK(m.at(0, j) == doctest::Approx(m.at(p.size() - 1, j)));
    CHECK(m.to_csv().rfind("p1_mW,p2_mW,intensity\n", 0) == 0);
  }

  TEST_CASE("heater calibration") {
    const HeaterDrive d = HeaterDrive::from_power(10.0, 5.0, 0.5);
    CHECK(d.dT_long_K == doctest::Approx(20.0));
    CHECK(d.dT_short_K == doctest::Approx(10.0));
    CHECK_THROWS_AS(HeaterDrive::from_power(1.0, 1.0, 0.0), Error);
  }

  TEST_CASE("invalid configs") {
    MziConfig c;
    c.split_ratio = 1.0;
    CHECK_THROWS_AS(validate(c), Error);
    c = MziConfig{};
    c.alpha_db_per_mm = -1.0;
    CHECK_THROWS_AS(validate(c), Error);
  }

  TEST_CASE("unequal splitting limits the extinction") {
    MziConfig c;
    c.split_ratio = 0.4;
    CHECK(transmission_from_phase(c, kPi) == doctest::Approx(0.04));
  }
}
