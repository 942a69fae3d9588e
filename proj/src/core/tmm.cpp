#include "photonic_lab/tmm.hpp"

#include "photonic_lab/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace photonic_lab {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr int kGapReferencePeriods = 40;
constexpr int kFitSamples = 401;
constexpr double kFitHalfWidths = 5.0;
constexpr double kMinContrast = 3.0;

using Mat = std::array<cplx, 4>;  // row-major 2x2

Mat mul(const Mat& a, const Mat& b) {
  return {a[0] * b[0] + a[1] * b[2], a[0] * b[1] + a[1] * b[3], a[2] * b[0] + a[3] * b[2],
          a[2] * b[1] + a[3] * b[3]};
}

Mat layer_matrix(cplx n, double length_nm, double lambda_nm) {
  const cplx delta = kTwoPi / lambda_nm * n * length_nm;
  const cplx c = std::cos(delta), s = std::sin(delta);
  const cplx i(0.0, 1.0);
  return {c, -i * s / n, -i * n * s, c};
}

Mat total_matrix(const std::vector<Layer>& layers, double lambda_nm) {
  Mat m{1.0, 0.0, 0.0, 1.0};
  for (const auto& l : layers) m = mul(m, layer_matrix(l.n, l.length_nm, lambda_nm));
  return m;
}

struct Amplitudes {
  cplx r, t;
};

Amplitudes amplitudes(const std::vector<Layer>& layers, cplx n_in, cplx n_out, double lambda_nm) {
  const Mat m = total_matrix(layers, lambda_nm);
  const cplx b = m[0] + m[1] * n_out;
  const cplx c = m[2] + m[3] * n_out;
  const cplx den = n_in * b + c;
  return {(n_in * b - c) / den, 2.0 * n_in / den};
}

// Append with merging of equal-index neighbours.
void push_layer(std::vector<Layer>& out, cplx n, double length) {
  if (length <= 0.0) return;
  if (!out.empty() && out.back().n == n)
    out.back().length_nm += length;
  else
    out.push_back({n, length});
}

double bound_index(const PhcSpec& spec) { return spec.n_bound > 0.0 ? spec.n_bound : spec.n_high; }
cplx high_index(const PhcSpec& spec) { return {spec.n_high, spec.loss_k_high}; }
cplx low_index(const PhcSpec& spec) { return {spec.n_low, spec.loss_k_low}; }

// Layers from the cavity center plane outward (right half of the symmetric stack).
std::vector<Layer> right_half(const PhcSpec& spec) {
  const auto ffs = taper_fill_fractions(spec);
  const double a = spec.period_nm;
  std::vector<Layer> out;
  push_layer(out, high_index(spec), 0.5 * spec.cavity_length_nm);
  for (double ff : ffs) {
    push_layer(out, high_index(spec), 0.5 * ff * a);
    push_layer(out, low_index(spec), (1.0 - ff) * a);
    push_layer(out, high_index(spec), 0.5 * ff * a);
  }
  return out;
}

// Round-trip factor r_L·r_R seen from the cavity center.
cplx round_trip(const std::vector<Layer>& half, cplx n_center, double n_bound, double lambda_nm) {
  const cplx r = amplitudes(half, n_center, n_bound, lambda_nm).r;
  return r * r;
}

}  // namespace

double bragg_period(double lambda0_nm, double n_eff) {
  require(n_eff > 0.0, ErrorCode::domain, "effective index must be positive");
  return lambda0_nm / (2.0 * n_eff);
}

std::vector<double> taper_fill_fractions(const PhcSpec& spec) {
  require(spec.n_segments >= 1, ErrorCode::domain, "n_segments must be >= 1");
  std::vector<double> ffs(spec.n_segments);
  for (int i = 1; i <= spec.n_segments; ++i) {
    const double x = static_cast<double>(i) / spec.n_segments;
    ffs[i - 1] = spec.ff_center + (spec.ff_edge - spec.ff_center) * x * x;
    require(ffs[i - 1] > 0.0 && ffs[i - 1] < 1.0, ErrorCode::domain,
            "taper fill fraction leaves (0, 1)");
  }
  return ffs;
}

void validate(const PhcSpec& spec) {
  require(spec.period_nm > 0.0, ErrorCode::domain, "period_nm must be positive");
  require(spec.n_high >= 1.0 && spec.n_low >= 1.0, ErrorCode::domain, "indices must be >= 1");
  require(spec.n_bound == 0.0 || spec.n_bound >= 1.0, ErrorCode::domain, "n_bound must be >= 1");
  require(spec.cavity_length_nm >= 0.0, ErrorCode::domain, "cavity_length_nm must be >= 0");
  require(spec.loss_k_high >= 0.0 && spec.loss_k_low >= 0.0, ErrorCode::domain,
          "injected extinction must be >= 0");
  require(spec.ff_center > 0.0 && spec.ff_center < 1.0 && spec.ff_edge > 0.0 && spec.ff_edge < 1.0,
          ErrorCode::domain, "fill fractions must lie in (0, 1)");
  taper_fill_fractions(spec);
}

LayerStack build_stack(const PhcSpec& spec) {
  validate(spec);
  const auto half = right_half(spec);
  LayerStack stack;
  stack.n_in = stack.n_out = bound_index(spec);
  // Left half is the mirror image; the two central half-defects merge.
  for (auto it = half.rbegin(); it != half.rend(); ++it) push_layer(stack.layers, it->n, it->length_nm);
  for (const auto& l : half) push_layer(stack.layers, l.n, l.length_nm);
  return stack;
}

LayerStack uniform_mirror(const PhcSpec& spec, double ff, int periods) {
  require(ff > 0.0 && ff < 1.0, ErrorCode::domain, "fill fraction must lie in (0, 1)");
  require(periods >= 1, ErrorCode::domain, "mirror needs at least one period");
  LayerStack stack;
  stack.n_in = stack.n_out = bound_index(spec);
  const double a = spec.period_nm;
  for (int i = 0; i < periods; ++i) {
    push_layer(stack.layers, high_index(spec), 0.5 * ff * a);
    push_layer(stack.layers, low_index(spec), (1.0 - ff) * a);
    push_layer(stack.layers, high_index(spec), 0.5 * ff * a);
  }
  return stack;
}

std::array<cplx, 4> characteristic_matrix(const Layer& layer, double lambda_nm) {
  return layer_matrix(layer.n, layer.length_nm, lambda_nm);
}

RT stack_response(const LayerStack& stack, double lambda_nm) {
  require(lambda_nm > 0.0, ErrorCode::domain, "wavelength must be positive");
  const auto a = amplitudes(stack.layers, stack.n_in, stack.n_out, lambda_nm);
  return {std::norm(a.t) * stack.n_out / stack.n_in, std::norm(a.r)};
}

cplx reflection_amplitude(const LayerStack& stack, double lambda_nm) {
  return amplitudes(stack.layers, stack.n_in, stack.n_out, lambda_nm).r;
}

TransmissionResult transmission_spectrum(const LayerStack& stack,
                                         const std::vector<double>& lambda_grid) {
  std::vector<double> t(lambda_grid.size()), r(lambda_grid.size());
  for (std::size_t i = 0; i < lambda_grid.size(); ++i) {
    const RT v = stack_response(stack, lambda_grid[i]);
    t[i] = v.t;
    r[i] = v.r;
  }
  return {Spectrum(lambda_grid, std::move(t)), Spectrum(lambda_grid, std::move(r))};
}

Interval bandgap(const LayerStack& stack, const std::vector<double>& lambda_grid,
                 double threshold_db) {
  const double limit = std::pow(10.0, threshold_db / 10.0);
  std::size_t best_start = 0, best_len = 0;
  std::size_t start = 0, len = 0;
  for (std::size_t i = 0; i < lambda_grid.size(); ++i) {
    if (stack_response(stack, lambda_grid[i]).t < limit) {
      if (len == 0) start = i;
      ++len;
      if (len > best_len) {
        best_len = len;
        best_start = start;
      }
    } else {
      len = 0;
    }
  }
  if (best_len == 0) fail(ErrorCode::not_found, "no sub-threshold band in the wavelength grid");
  return {lambda_grid[best_start], lambda_grid[best_start + best_len - 1]};
}

Interval mirror_bandgap(const PhcSpec& spec, const std::vector<double>& lambda_grid) {
  return bandgap(uniform_mirror(spec, spec.ff_edge, kGapReferencePeriods), lambda_grid);
}

std::vector<ResonanceMode> cavity_resonances(const PhcSpec& spec,
                                             const std::vector<double>& lambda_grid) {
  validate(spec);
  require(lambda_grid.size() >= 2, ErrorCode::domain, "wavelength grid needs two samples");
  const Interval gap = mirror_bandgap(spec, lambda_grid);
  const auto half = right_half(spec);
  const cplx n_center = high_index(spec);
  const double n_b = bound_index(spec);
  const LayerStack stack = build_stack(spec);
  auto f = [&](double l) { return round_trip(half, n_center, n_b, l); };
  auto transmission = [&](double l) { return stack_response(stack, l).t; };

  std::vector<ResonanceMode> modes;
  cplx prev = f(lambda_grid[0]);
  for (std::size_t i = 0; i + 1 < lambda_grid.size(); ++i) {
    const cplx next = f(lambda_grid[i + 1]);
    const double lo = lambda_grid[i], hi = lambda_grid[i + 1];
    const bool crossing = (prev.imag() < 0.0) != (next.imag() < 0.0);
    const cplx here = prev;
    prev = next;
    if (!crossing || here.real() + next.real() <= 0.0) continue;
    if (!(gap.contains(lo) && gap.contains(hi))) continue;

    const double l0 = numerics::bisect([&](double l) { return f(l).imag(); }, lo, hi, 1e-12);
    const cplx at = f(l0);
    if (at.real() <= 0.0) continue;
    const double rho = std::abs(at);
    const double h = 1e-6;
    const double dtheta = (std::arg(f(l0 + h) / f(l0 - h))) / (2.0 * h);
    if (!(rho < 1.0) || dtheta == 0.0) continue;
    const double gamma = 2.0 * (1.0 - rho) / (std::sqrt(rho) * std::abs(dtheta));
    if (!(gamma > 0.0) || !std::isfinite(gamma)) continue;

    const double peak = transmission(l0);
    // Background is sampled no further out than the gap edges.
    const double side = std::max(transmission(std::max(l0 - 3.0 * gamma, gap.lo_nm)),
                                 transmission(std::min(l0 + 3.0 * gamma, gap.hi_nm)));
    if (!(peak > kMinContrast * side)) continue;
    if (!gap.contains(l0)) continue;

    const double w = kFitHalfWidths * gamma;
    const auto local = numerics::linspace(std::max(l0 - w, gap.lo_nm), std::min(l0 + w, gap.hi_nm),
                                          kFitSamples);
    std::vector<double> tv(local.size());
    for (std::size_t k = 0; k < local.size(); ++k) tv[k] = transmission(local[k]);
    ResonancePeak fit;
    try {
      fit = fit_lorentzian(Spectrum(local, tv), {local.front(), local.back()});
    } catch (const Error& e) {
      if (e.code() != ErrorCode::not_found) throw;
      continue;
    }
    if (!modes.empty() && std::abs(modes.back().lambda_res_nm - fit.lambda0_nm) < fit.fwhm_nm)
      continue;
    ResonanceMode m;
    m.lambda_res_nm = fit.lambda0_nm;
    m.q = fit.q;
    m.fwhm_nm = fit.fwhm_nm;
    m.peak_transmission = peak;
    m.warnings = fit.warnings;
    modes.push_back(std::move(m));
  }
  std::sort(modes.begin(), modes.end(),
            [](const ResonanceMode& a, const ResonanceMode& b) { return a.lambda_res_nm < b.lambda_res_nm; });
  for (std::size_t i = 0; i < modes.size(); ++i) modes[i].order = static_cast<int>(i) + 1;
  return modes;
}

double QSaturationFit::q_wg(int n) const { return std::exp(ln_c + kappa * n); }

double QSaturationFit::q_model(int n) const { return 1.0 / (inv_q_rad + 1.0 / q_wg(n)); }

QSaturationFit fit_q_saturation(const std::vector<QPoint>& points) {
  require(points.size() >= 3, ErrorCode::domain, "saturation fit needs at least three points");
  const std::size_t m = points.size();
  std::vector<double> n(m), q(m);
  for (std::size_t i = 0; i < m; ++i) {
    n[i] = points[i].n_segments;
    q[i] = points[i].q;
    require(q[i] > 0.0, ErrorCode::domain, "Q values must be positive");
  }
  // Start from a pure exponential through the first two points.
  const double k0 = std::log(q[1] / q[0]) / (n[1] - n[0]);
  Eigen::VectorXd p(3);
  p << 0.5 / *std::max_element(q.begin(), q.end()), std::log(q[0]) - k0 * n[0], k0;

  auto residual = [&](const Eigen::VectorXd& x, Eigen::VectorXd& r, Eigen::MatrixXd* jac) {
    for (std::size_t i = 0; i < m; ++i) {
      const double e = std::exp(-(x[1] + x[2] * n[i]));
      const double d = x[0] + e;
      r[i] = 1.0 / (d * q[i]) - 1.0;
      if (jac) {
        const double g = 1.0 / (d * d * q[i]);
        (*jac)(i, 0) = -g;
        (*jac)(i, 1) = g * e;
        (*jac)(i, 2) = g * e * n[i];
      }
    }
  };
  const auto res = numerics::levenberg_marquardt(residual, p, static_cast<int>(m));

  QSaturationFit fit;
  fit.inv_q_rad = res.params[0];
  fit.inv_q_rad_sigma = std::sqrt(std::max(res.covariance(0, 0), 0.0));
  fit.q_rad = fit.inv_q_rad > 0.0 ? Extended::finite(1.0 / fit.inv_q_rad) : Extended::unbounded();
  fit.ln_c = res.params[1];
  fit.kappa = res.params[2];
  for (std::size_t i = 0; i < m; ++i)
    fit.max_relative_error =
        std::max(fit.max_relative_error, std::abs(fit.q_model(points[i].n_segments) / q[i] - 1.0));
  return fit;
}

QvsN q_vs_mirror_count(const PhcSpec& spec, const std::vector<int>& n_values,
                       const std::vector<double>& lambda_grid, int mode_order) {
  require(!n_values.empty(), ErrorCode::domain, "mirror-count list is empty");
  QvsN out;
  for (int n : n_values) {
    PhcSpec s = spec;
    s.n_segments = n;
    const auto modes = cavity_resonances(s, lambda_grid);
    const ResonanceMode* pick = nullptr;
    if (out.points.empty()) {
      const int count = static_cast<int>(modes.size());
      const int idx = mode_order > 0 ? mode_order - 1 : count + mode_order;
      if (mode_order != 0 && idx >= 0 && idx < count) pick = &modes[idx];
    } else {
      const double prev = out.points.back().lambda_res_nm;
      double best = 0.02 * prev;
      for (const auto& m : modes) {
        const double d = std::abs(m.lambda_res_nm - prev);
        if (d < best) {
          best = d;
          pick = &m;
        }
      }
    }
    if (!pick) {
      std::string msg = "resonance lost at N=" + std::to_string(n);
      msg += out.points.empty() ? "; no earlier N resolved it"
                                : "; last good N=" + std::to_string(out.points.back().n_segments);
      fail(ErrorCode::tracking, msg);
    }
    out.points.push_back({n, pick->lambda_res_nm, pick->q});
  }
  if (out.points.size() >= 3) out.fit = fit_q_saturation(out.points);
  return out;
}

StandingWave standing_wave_profile(const PhcSpec& spec, const ResonanceMode& mode, double step_nm) {
  require(step_nm > 0.0, ErrorCode::domain, "sampling step must be positive");
  const LayerStack stack = build_stack(spec);
  const double lambda = mode.lambda_res_nm;
  const std::size_t nl = stack.layers.size();

  // Fields at each layer's exit face, walking back from the output face where E=1, H=n_out.
  std::vector<std::array<cplx, 2>> exit_fields(nl);
  std::array<cplx, 2> f{1.0, stack.n_out};
  for (std::size_t k = nl; k-- > 0;) {
    exit_fields[k] = f;
    const Mat m = layer_matrix(stack.layers[k].n, stack.layers[k].length_nm, lambda);
    f = {m[0] * f[0] + m[1] * f[1], m[2] * f[0] + m[3] * f[1]};
  }

  StandingWave out;
  double x0 = 0.0;
  for (std::size_t k = 0; k < nl; ++k) {
    const Layer& layer = stack.layers[k];
    const int samples = std::max(1, static_cast<int>(std::ceil(layer.length_nm / step_nm)));
    for (int s = 0; s < samples; ++s) {
      const double depth = layer.length_nm * s / samples;
      const Mat m = layer_matrix(layer.n, layer.length_nm - depth, lambda);
      const cplx e = m[0] * exit_fields[k][0] + m[1] * exit_fields[k][1];
      const cplx h = m[2] * exit_fields[k][0] + m[3] * exit_fields[k][1];
      out.x_nm.push_back(x0 + depth);
      out.e_abs.push_back(std::abs(e));
      out.h_abs.push_back(std::abs(h));
      out.s_avg.push_back(0.5 * (e * std::conj(h)).real());
      out.s_osc.push_back(0.5 * std::abs(e * h));
      out.index_real.push_back(layer.n.real());
    }
    x0 += layer.length_nm;
  }
  out.cavity_center_nm = 0.5 * x0;

  const double emax = *std::max_element(out.e_abs.begin(), out.e_abs.end());
  require(emax > 0.0, ErrorCode::domain, "field vanishes everywhere");
  for (std::size_t i = 0; i < out.x_nm.size(); ++i) {
    out.e_abs[i] /= emax;
    out.h_abs[i] /= emax;
    out.s_avg[i] /= emax * emax;
    out.s_osc[i] /= emax * emax;
  }
  return out;
}

}  // namespace photonic_lab
