#include "photonic_lab/harmonic.hpp"

#include "photonic_lab/error.hpp"
#include "photonic_lab/numerics.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <numbers>

namespace photonic_lab {

namespace {

using cd = std::complex<double>;

struct Decimated {
  std::vector<double> x;
  double dt = 0.0;
};

Decimated decimate(const std::vector<double>& signal, double dt, std::size_t begin, std::size_t end,
                   const HarmonicOptions& opt) {
  const double period = 2.0 * std::numbers::pi / opt.omega_max;
  const std::size_t stride =
      std::max<std::size_t>(1, static_cast<std::size_t>(std::floor(period / (opt.samples_per_period * dt))));
  Decimated d;
  d.dt = stride * dt;
  for (std::size_t k = begin; k < end && d.x.size() < opt.max_samples; k += stride) d.x.push_back(signal[k]);
  return d;
}

struct PencilMode {
  cd z;
  cd residue;
};

std::vector<PencilMode> matrix_pencil(const std::vector<double>& x, int max_order) {
  const int n = static_cast<int>(x.size());
  const int l = n / 3;
  const int rows = n - l;
  Eigen::MatrixXd y(rows, l + 1);
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j <= l; ++j) y(i, j) = x[i + j];
  Eigen::BDCSVD<Eigen::MatrixXd> svd(y, Eigen::ComputeThinV);
  const auto& sv = svd.singularValues();
  int m = 0;
  while (m < sv.size() && m < max_order && sv[m] > 1e-9 * sv[0]) ++m;
  if (m == 0) return {};
  const Eigen::MatrixXd v = svd.matrixV().leftCols(m);
  const Eigen::MatrixXd v1 = v.topRows(l);
  const Eigen::MatrixXd v2 = v.bottomRows(l);
  const Eigen::MatrixXd a = v1.completeOrthogonalDecomposition().solve(v2);
  Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(a.cast<cd>());
  const Eigen::VectorXcd z = es.eigenvalues();

  // Residues from the Vandermonde system.
  Eigen::MatrixXcd vm(n, m);
  for (int k = 0; k < m; ++k) {
    cd p = 1.0;
    for (int i = 0; i < n; ++i) {
      vm(i, k) = p;
      p *= z[k];
    }
  }
  Eigen::VectorXcd rhs(n);
  for (int i = 0; i < n; ++i) rhs[i] = x[i];
  const Eigen::VectorXcd res = vm.colPivHouseholderQr().solve(rhs);
  std::vector<PencilMode> out;
  for (int k = 0; k < m; ++k) out.push_back({z[k], res[k]});
  return out;
}

}  // namespace

std::vector<HarmonicMode> resonance_analysis(const std::vector<double>& signal, double dt,
                                             SignalWindow window, const HarmonicOptions& opt) {
  require(dt > 0.0, ErrorCode::domain, "time step must be positive");
  require(opt.omega_max > opt.omega_min && opt.omega_max > 0.0, ErrorCode::domain,
          "frequency band of interest is empty");
  const std::size_t end = window.end == 0 ? signal.size() : std::min(window.end, signal.size());
  require(window.begin < end, ErrorCode::domain, "empty analysis window");

  const double slowest = opt.omega_min > 0.0 ? opt.omega_min : opt.omega_max;
  const double span = static_cast<double>(end - window.begin) * dt;
  if (span < 2.0 * 2.0 * std::numbers::pi / slowest)
    fail(ErrorCode::insufficient_ringdown, "window shorter than two periods");

  const Decimated d = decimate(signal, dt, window.begin, end, opt);
  require(d.x.size() >= 12, ErrorCode::insufficient_ringdown, "too few samples in the window");
  const double t_window = d.dt * static_cast<double>(d.x.size() - 1);

  auto pencil = matrix_pencil(d.x, 2 * opt.max_modes);

  // Real-signal components: keep one member of each conjugate pair (ω ≥ 0).
  struct Seed {
    double omega, alpha, amplitude, phase;
  };
  std::vector<Seed> seeds;
  for (const auto& p : pencil) {
    const double w = std::arg(p.z) / d.dt;
    if (w < 0.0) continue;
    const double a = -std::log(std::abs(p.z)) / d.dt;
    const double amp = (w == 0.0 ? 1.0 : 2.0) * std::abs(p.residue);
    seeds.push_back({w, a, amp, std::arg(p.residue)});
  }
  double max_amp = 0.0;
  for (const auto& s : seeds)
    if (s.omega >= opt.omega_min && s.omega <= opt.omega_max) max_amp = std::max(max_amp, s.amplitude);
  if (max_amp == 0.0) return {};
  std::erase_if(seeds, [&](const Seed& s) { return s.amplitude < opt.min_relative_amplitude * max_amp; });

  // Joint refinement in scaled time τ = t/T.
  const int nm = static_cast<int>(seeds.size());
  const int ns = static_cast<int>(d.x.size());
  double xscale = 0.0;
  for (double v : d.x) xscale = std::max(xscale, std::abs(v));
  if (xscale == 0.0) return {};
  Eigen::VectorXd p(4 * nm);
  for (int k = 0; k < nm; ++k) {
    p[4 * k + 0] = seeds[k].amplitude / xscale;
    p[4 * k + 1] = seeds[k].phase;
    p[4 * k + 2] = seeds[k].alpha * t_window;
    p[4 * k + 3] = seeds[k].omega * t_window;
  }
  auto residual = [&](const Eigen::VectorXd& q, Eigen::VectorXd& r, Eigen::MatrixXd* jac) {
    for (int i = 0; i < ns; ++i) {
      const double tau = static_cast<double>(i) / (ns - 1);
      double model = 0.0;
      for (int k = 0; k < nm; ++k) {
        const double amp = q[4 * k], ph = q[4 * k + 1], al = q[4 * k + 2], om = q[4 * k + 3];
        const double e = std::exp(-al * tau);
        const double c = std::cos(om * tau + ph), s = std::sin(om * tau + ph);
        model += amp * e * c;
        if (jac) {
          (*jac)(i, 4 * k + 0) = e * c;
          (*jac)(i, 4 * k + 1) = -amp * e * s;
          (*jac)(i, 4 * k + 2) = -tau * amp * e * c;
          (*jac)(i, 4 * k + 3) = -tau * amp * e * s;
        }
      }
      r[i] = model - d.x[i] / xscale;
    }
  };
  const auto fit = numerics::levenberg_marquardt(residual, p, ns);

  std::vector<HarmonicMode> out;
  double strongest = 0.0;
  for (int k = 0; k < nm; ++k) {
    const double om = fit.params[4 * k + 3] / t_window;
    if (om >= opt.omega_min && om <= opt.omega_max)
      strongest = std::max(strongest, std::abs(fit.params[4 * k]));
  }
  for (int k = 0; k < nm; ++k) {
    HarmonicMode m;
    double amp = fit.params[4 * k];
    double ph = fit.params[4 * k + 1];
    if (amp < 0.0) {
      amp = -amp;
      ph += std::numbers::pi;
    }
    const double al_s = fit.params[4 * k + 2], om_s = fit.params[4 * k + 3];
    m.omega = om_s / t_window;
    m.alpha = al_s / t_window;
    m.amplitude = amp * xscale;
    m.phase = std::remainder(ph, 2.0 * std::numbers::pi);
    if (m.omega < opt.omega_min || m.omega > opt.omega_max) continue;
    if (amp < opt.min_relative_amplitude * strongest) continue;
    if (al_s < opt.lossless_decay_bound) {
      m.q_lower_bound = true;
      m.q = om_s / (2.0 * opt.lossless_decay_bound);
      m.q_sigma = 0.0;
    } else {
      m.q = om_s / (2.0 * al_s);
      // Gradient of Q = ω/(2α) in scaled parameters.
      const double gw = 1.0 / (2.0 * al_s), ga = -om_s / (2.0 * al_s * al_s);
      const int ia = 4 * k + 2, iw = 4 * k + 3;
      const double var = gw * gw * fit.covariance(iw, iw) + ga * ga * fit.covariance(ia, ia) +
                         2.0 * gw * ga * fit.covariance(iw, ia);
      m.q_sigma = std::sqrt(std::max(var, 0.0));
      if (m.q_sigma > opt.max_relative_q_sigma * m.q) {
        if (amp == strongest)
          fail(ErrorCode::insufficient_ringdown,
               "ring-down too short: relative Q uncertainty " + numerics::format_double(m.q_sigma / m.q));
        continue;
      }
    }
    out.push_back(m);
  }
  std::sort(out.begin(), out.end(), [](const HarmonicMode& a, const HarmonicMode& b) { return a.omega < b.omega; });
  return out;
}

std::vector<std::complex<double>> modal_amplitudes(const std::vector<double>& signal, double dt,
                                                   SignalWindow window,
                                                   const std::vector<HarmonicMode>& modes) {
  const std::size_t end = window.end == 0 ? signal.size() : std::min(window.end, signal.size());
  require(window.begin < end, ErrorCode::domain, "empty analysis window");
  const int n = static_cast<int>(end - window.begin);
  const int m = static_cast<int>(modes.size());
  // Real basis: e^{−αt}cos(ωt), e^{−αt}sin(ωt) per mode.
  Eigen::MatrixXd a(n, 2 * m);
  Eigen::VectorXd b(n);
  for (int i = 0; i < n; ++i) {
    const double t = i * dt;
    for (int k = 0; k < m; ++k) {
      const double e = std::exp(-modes[k].alpha * t);
      a(i, 2 * k) = e * std::cos(modes[k].omega * t);
      a(i, 2 * k + 1) = e * std::sin(modes[k].omega * t);
    }
    b[i] = signal[window.begin + i];
  }
  const Eigen::VectorXd c = a.colPivHouseholderQr().solve(b);
  std::vector<std::complex<double>> out(m);
  // C cos − S sin ↔ A cos(ωt+φ) with c_k = (A/2)e^{iφ}: C = A cosφ, S = −A sinφ.
  for (int k = 0; k < m; ++k) out[k] = 0.5 * cd(c[2 * k], -c[2 * k + 1]);
  return out;
}

}  // namespace photonic_lab
