#include "photonic_lab/tmm.hpp"

#include "photonic_lab/error.hpp"
#include "photonic_lab/numerics.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>

using namespace photonic_lab;
using numerics::linspace;

namespace {

LayerStack quarter_wave(double nh, double nl, int periods, double l0) {
  LayerStack st;
  st.n_in = st.n_out = nl;
  for (int k = 0; k < periods; ++k) {
    st.layers.push_back({nh, l0 / (4.0 * nh)});
    st.layers.push_back({nl, l0 / (4.0 * nl)});
  }
  return st;
}

std::vector<std::size_t> local_maxima(const std::vector<double>& v) {
  std::vector<std::size_t> out;
  for (std::size_t i = 1; i + 1 < v.size(); ++i)
    if (v[i] > v[i - 1] && v[i] >= v[i + 1]) out.push_back(i);
  return out;
}

}  // namespace

TEST_SUITE("tmm") {
  TEST_CASE("bragg period") {
    CHECK(bragg_period(738.0, 1.546) == doctest::Approx(238.68).epsilon(1e-4));
    CHECK(bragg_period(738.0, 1.0) == doctest::Approx(369.0));
    const double a = bragg_period(738.0, 1.546);
    PhcSpec s;
    s.period_nm = a;
    s.n_high = 1.9;
    s.n_low = 1.2;
    const LayerStack m = uniform_mirror(s, 0.5, 40);
    const Interval gap = bandgap(m, linspace(550.0, 950.0, 2001));
    CHECK(gap.contains(738.0));
  }

  TEST_CASE("taper fill fractions") {
    PhcSpec s;
    s.n_segments = 4;
    s.ff_center = 0.3;
    s.ff_edge = 0.7;
    const auto f = taper_fill_fractions(s);
    REQUIRE(f.size() == 4);
    const double expect[] = {0.325, 0.4, 0.525, 0.7};
    for (int i = 0; i < 4; ++i) CHECK(f[i] == doctest::Approx(expect[i]));
    s.ff_edge = s.ff_center;
    for (double x : taper_fill_fractions(s)) CHECK(x == doctest::Approx(0.3));
  }

  TEST_CASE("cavity stack is a palindrome") {
    const LayerStack st = build_stack(PhcSpec{});
    const std::size_t n = st.layers.size();
    for (std::size_t i = 0; i < n / 2; ++i) {
      CHECK(st.layers[i].n == st.layers[n - 1 - i].n);
      CHECK(st.layers[i].length_nm == doctest::Approx(st.layers[n - 1 - i].length_nm));
    }
  }

  TEST_CASE("index-matched layer is transparent") {
    LayerStack st;
    st.n_in = st.n_out = 1.5;
    st.layers.push_back({1.5, 1234.0});
    for (double l : linspace(500.0, 1000.0, 51)) {
      const RT rt = stack_response(st, l);
      CHECK(rt.t == doctest::Approx(1.0).epsilon(1e-12));
      CHECK(rt.r < 1e-24);
    }
  }

  TEST_CASE("single slab matches the Airy formula") {
    const double n = 2.0, d = 300.0;
    LayerStack st;
    st.layers.push_back({n, d});
    const double r = std::pow((n - 1.0) / (n + 1.0), 2);
    const double f = 4.0 * r / std::pow(1.0 - r, 2);
    for (double l : linspace(500.0, 1000.0, 101)) {
      const double delta = 2.0 * std::numbers::pi * n * d / l;
      CHECK(stack_response(st, l).t == doctest::Approx(1.0 / (1.0 + f * std::pow(std::sin(delta), 2))).epsilon(1e-12));
    }
  }

  TEST_CASE("quarter-wave mirror peak reflectance") {
    for (int periods : {2, 5, 10}) {
      const LayerStack st = quarter_wave(2.0, 1.45, periods, 738.0);
      const double rho = std::pow(2.0 / 1.45, 2 * periods);
      CHECK(std::abs(stack_response(st, 738.0).r - std::pow((1 - rho) / (1 + rho), 2)) < 1e-6);
    }
  }

  TEST_CASE("lossless energy conservation") {
    const LayerStack st = build_stack(PhcSpec{});
    for (double l : linspace(600.0, 900.0, 301)) {
      const RT rt = stack_response(st, l);
      CHECK(std::abs(rt.t + rt.r - 1.0) < 1e-10);
    }
  }

  TEST_CASE("absorbing layers lose energy") {
    PhcSpec s;
    s.loss_k_high = 1e-3;
    const RT rt = stack_response(build_stack(s), 700.0);
    CHECK(rt.t + rt.r < 1.0);
  }

  TEST_CASE("bandgap") {
    LayerStack matched;
    matched.n_in = matched.n_out = 1.5;
    for (int i = 0; i < 20; ++i) matched.layers.push_back({1.5, 100.0});
    try {
      bandgap(matched, linspace(500.0, 1000.0, 201));
      FAIL("expected not_found");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::not_found);
    }

    const Interval g = bandgap(quarter_wave(2.0, 1.45, 30, 738.0), linspace(550.0, 1000.0, 4501));
    CHECK(g.contains(738.0));

    double last = 0.0;
    for (double nh : {1.6, 1.8, 2.0, 2.2, 2.4}) {
      const Interval gi = bandgap(quarter_wave(nh, 1.45, 40, 738.0), linspace(450.0, 1200.0, 7501));
      CHECK(gi.hi_nm - gi.lo_nm > last);
      last = gi.hi_nm - gi.lo_nm;
    }
  }

  TEST_CASE("cavity resonances") {
    PhcSpec s;
    const auto grid = linspace(600.0, 900.0, 3001);
    const auto modes = cavity_resonances(s, grid);
    REQUIRE_FALSE(modes.empty());
    const Interval gap = mirror_bandgap(s, grid);
    for (std::size_t i = 0; i < modes.size(); ++i) {
      CHECK(modes[i].order == static_cast<int>(i) + 1);
      CHECK(gap.contains(modes[i].lambda_res_nm));
      CHECK(modes[i].q == doctest::Approx(modes[i].lambda_res_nm / modes[i].fwhm_nm));
    }

    s.cavity_length_nm = 0.0;
    s.ff_edge = s.ff_center;  // unbroken uniform mirror
    CHECK(cavity_resonances(s, grid).empty());
  }

  TEST_CASE("resonance tracks cavity length and period") {
    const auto grid = linspace(600.0, 900.0, 3001);
    double last = 0.0;
    for (double cav = 150.0; cav <= 250.0; cav += 10.0) {
      PhcSpec s;
      s.cavity_length_nm = cav;
      const double l = cavity_resonances(s, grid).back().lambda_res_nm;
      CHECK(l > last);
      last = l;
    }
  }

  TEST_CASE("lossless Q grows with mirror count and has no radiation floor") {
    std::vector<int> ns = {4, 5, 6, 7, 8, 9, 10};
    const QvsN q = q_vs_mirror_count(PhcSpec{}, ns, linspace(650.0, 820.0, 3401), -1);
    for (std::size_t i = 1; i < q.points.size(); ++i) CHECK(q.points[i].q >= q.points[i - 1].q);
    // Without loss, ln Q keeps climbing at a steady rate instead of levelling off.
    const double first = std::log(q.points[1].q / q.points[0].q);
    const double last = std::log(q.points.back().q / q.points[q.points.size() - 2].q);
    CHECK(first > 0.0);
    CHECK(last > 0.5 * first);
  }

  TEST_CASE("injected loss saturates Q") {
    PhcSpec s;
    s.loss_k_high = s.loss_k_low = 2e-4;
    std::vector<int> ns;
    for (int n = 5; n <= 30; ++n) ns.push_back(n);
    const QvsN q = q_vs_mirror_count(s, ns, linspace(650.0, 820.0, 3401), -1);
    REQUIRE_FALSE(q.fit.q_rad.infinite);
    CHECK(q.fit.max_relative_error < 0.05);
    CHECK(q.points.back().q == doctest::Approx(q.fit.q_rad.value).epsilon(0.05));
    CHECK(q.points.front().q < 0.5 * q.fit.q_rad.value);
  }

  TEST_CASE("saturation fit recovers synthetic parameters") {
    std::vector<QPoint> pts;
    for (int n = 3; n <= 25; ++n) {
      const double qwg = std::exp(4.0 + 0.4 * n);
      pts.push_back({n, 738.0, 1.0 / (1.0 / qwg + 1.0 / 20000.0)});
    }
    const QSaturationFit f = fit_q_saturation(pts);
    CHECK(f.q_rad.value == doctest::Approx(20000.0).epsilon(1e-6));
    CHECK(f.kappa == doctest::Approx(0.4).epsilon(1e-6));
  }

  TEST_CASE("tracking failure names the last good N") {
    try {
      q_vs_mirror_count(PhcSpec{}, {5, 6}, linspace(600.0, 610.0, 11), -1);
      FAIL("expected tracking error");
    } catch (const Error& e) {
      CHECK((e.code() == ErrorCode::tracking || e.code() == ErrorCode::not_found));
    }
  }

  TEST_CASE("standing wave") {
    PhcSpec s;
    const auto grid = linspace(600.0, 900.0, 3001);
    const auto modes = cavity_resonances(s, grid);
    const StandingWave w = standing_wave_profile(s, modes.back(), 0.5);
    const double c = w.cavity_center_nm;

    // Near the cavity centre E maxima sit on H minima.
    std::vector<double> neg_h(w.h_abs.size());
    for (std::size_t i = 0; i < neg_h.size(); ++i) neg_h[i] = -w.h_abs[i];
    const auto e_max = local_maxima(w.e_abs);
    const auto h_min = local_maxima(neg_h);
    int checked = 0;
    for (std::size_t i : e_max) {
      if (std::abs(w.x_nm[i] - c) > 3.0 * s.period_nm) continue;
      double best = 1e9;
      for (std::size_t j : h_min) best = std::min(best, std::abs(w.x_nm[j] - w.x_nm[i]));
      CHECK(best <= 1.0 + 1e-9);
      ++checked;
    }
    CHECK(checked >= 2);

    // |S| oscillation has twice the spatial frequency of |E|.
    auto count_in = [&](const std::vector<std::size_t>& idx) {
      return std::count_if(idx.begin(), idx.end(), [&](std::size_t i) { return std::abs(w.x_nm[i] - c) < 2.0 * s.period_nm; });
    };
    const auto n_e = count_in(e_max), n_s = count_in(local_maxima(w.s_osc));
    CHECK(n_s >= 2 * n_e - 2);
    CHECK(n_s <= 2 * n_e + 2);

    // Envelope decays into the mirror: peak |E| of outer maxima falls with distance.
    std::vector<double> xs, ls;
    for (std::size_t i : e_max)
      if (w.x_nm[i] > c + s.period_nm) {
        xs.push_back(w.x_nm[i] - c);
        ls.push_back(std::log(w.e_abs[i]));
      }
    REQUIRE(xs.size() >= 3);
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
      sx += xs[i];
      sy += ls[i];
      sxx += xs[i] * xs[i];
      sxy += xs[i] * ls[i];
    }
    const double m = static_cast<double>(xs.size());
    const double slope = (m * sxy - sx * sy) / (m * sxx - sx * sx);
    CHECK(slope < 0.0);
  }

  TEST_CASE("invalid specs") {
    PhcSpec s;
    s.ff_center = 1.2;
    CHECK_THROWS_AS(validate(s), Error);
    s = PhcSpec{};
    s.n_segments = 0;
    CHECK_THROWS_AS(validate(s), Error);
  }
}
