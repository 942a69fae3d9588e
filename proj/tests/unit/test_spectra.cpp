#include "photonic_lab/spectra.hpp"

#include "photonic_lab/error.hpp"
#include "photonic_lab/numerics.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

using namespace photonic_lab;

namespace {

// Analytic Lorentzian used as the generating oracle.
Spectrum lorentzian(double l0, double fwhm, double amp, double base, double lo, double hi, double step) {
  std::vector<double> x, y;
  const auto n = static_cast<std::size_t>(std::llround((hi - lo) / step)) + 1;
  for (std::size_t i = 0; i < n; ++i) {
    const double l = lo + step * static_cast<double>(i);
    const double z = 2.0 * (l - l0) / fwhm;
    x.push_back(l);
    y.push_back(amp / (1.0 + z * z) + base);
  }
  return Spectrum(x, y);
}

}  // namespace

TEST_SUITE("spectra") {
  TEST_CASE("spectrum rejects malformed samples") {
    CHECK_THROWS_AS(Spectrum({1.0}, {1.0}), Error);
    CHECK_THROWS_AS(Spectrum({1.0, 2.0}, {1.0}), Error);
    CHECK_THROWS_AS(Spectrum({2.0, 1.0}, {1.0, 1.0}), Error);
    CHECK_THROWS_AS(Spectrum({1.0, 2.0}, {1.0, -0.5}), Error);
    CHECK_THROWS_AS(Spectrum({1.0, NAN}, {1.0, 1.0}), Error);
  }

  TEST_CASE("csv round trip is bit exact") {
    const Spectrum s({700.0, 700.1, 738.123456789012}, {0.1, 1.0 / 3.0, 2e-300});
    const Spectrum back = Spectrum::from_csv(s.to_csv());
    CHECK(back.wavelengths_nm() == s.wavelengths_nm());
    CHECK(back.values() == s.values());
    CHECK_THROWS_AS(Spectrum::from_csv("wavelength_nm,value\n700 1\n701 2\n"), Error);
  }

  TEST_CASE("to_db") {
    CHECK(to_db(1.0) == doctest::Approx(0.0));
    CHECK(to_db(100.0) == doctest::Approx(20.0));
    CHECK(to_db(0.07 / 0.02) == doctest::Approx(5.44).epsilon(1e-3));
    CHECK_THROWS_AS(to_db(0.0), Error);
    CHECK_THROWS_AS(to_db(-1.0), Error);
  }

  TEST_CASE("extinction ratio") {
    CHECK(extinction_ratio(Spectrum({1.0, 2.0, 3.0}, {0.5, 0.5, 0.5})).value == doctest::Approx(0.0));
    const Extended er = extinction_ratio(Spectrum({1.0, 2.0, 3.0}, {0.02, 0.05, 0.07}));
    CHECK_FALSE(er.infinite);
    CHECK(er.value == doctest::Approx(5.44).epsilon(1e-3));

    // Ideal lossless fringe over one period hits an exact null.
    std::vector<double> x, y;
    for (int i = 0; i <= 200; ++i) {
      x.push_back(i);
      const double c = std::cos(M_PI * i / 100.0);
      y.push_back(i == 100 ? 0.0 : 0.5 * (1.0 + c));
    }
    CHECK(extinction_ratio(Spectrum(x, y)).infinite);
  }

  TEST_CASE("lorentzian fit recovers generating parameters") {
    const double l0 = 775.0, fwhm = 0.0165;
    const Spectrum s = lorentzian(l0, fwhm, 1.0, 0.05, l0 - 0.2, l0 + 0.2, 0.001);
    const ResonancePeak p = fit_lorentzian(s, {l0 - 0.2, l0 + 0.2});
    CHECK(p.q == doctest::Approx(l0 / fwhm).epsilon(0.01));
    CHECK(p.q == doctest::Approx(46970.0).epsilon(0.01));
    CHECK(p.lambda0_nm == doctest::Approx(l0).epsilon(1e-9));
    CHECK(p.baseline == doctest::Approx(0.05).epsilon(1e-6));
    CHECK_FALSE(p.poor_fit);
  }

  TEST_CASE("flat spectrum has no peak") {
    const Spectrum flat({1, 2, 3, 4, 5, 6, 7, 8, 9}, {1, 1, 1, 1, 1, 1, 1, 1, 1});
    try {
      fit_lorentzian(flat, {0.0, 10.0});
      FAIL("expected not_found");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::not_found);
    }
  }

  TEST_CASE("noisy peak centre within half a sample") {
    const double l0 = 738.0123, fwhm = 0.2, step = 0.01;
    const Spectrum clean = lorentzian(l0, fwhm, 1.0, 0.0, 737.0, 739.0, step);
    int within = 0;
    for (unsigned seed = 0; seed < 100; ++seed) {
      std::mt19937_64 rng(seed);
      std::normal_distribution<double> noise(0.0, 0.01);
      std::vector<double> y = clean.values();
      for (double& v : y) v = std::max(0.0, v + noise(rng));
      const ResonancePeak p = fit_lorentzian(Spectrum(clean.wavelengths_nm(), y), {737.0, 739.0});
      if (std::abs(p.lambda0_nm - l0) <= 0.5 * step) ++within;
    }
    CHECK(within == 100);
  }

  TEST_CASE("poor fit is flagged") {
    std::vector<double> x, y;
    // Two equal, well separated lines cannot be one Lorentzian.
    for (int i = 0; i <= 400; ++i) {
      x.push_back(700.0 + 0.1 * i);
      const double a = (x.back() - 712.0) / 0.5, b = (x.back() - 728.0) / 0.5;
      y.push_back(1.0 / (1.0 + a * a) + 1.0 / (1.0 + b * b));
    }
    const ResonancePeak p = fit_lorentzian(Spectrum(x, y), {700.0, 740.0});
    CHECK(p.poor_fit);
    CHECK_FALSE(p.warnings.empty());
  }
}
