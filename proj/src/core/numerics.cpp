#include "photonic_lab/numerics.hpp"

#include "photonic_lab/error.hpp"

#include <charconv>
#include <cmath>
#include <limits>
#include <system_error>

namespace photonic_lab::numerics {

Eigen::MatrixXd numeric_jacobian(const ResidualFn& fn, const Eigen::VectorXd& params,
                                 int residual_count) {
  Eigen::MatrixXd jac(residual_count, params.size());
  Eigen::VectorXd plus(residual_count), minus(residual_count);
  for (Eigen::Index k = 0; k < params.size(); ++k) {
    const double h = 1e-6 * std::max(std::abs(params[k]), 1e-3);
    Eigen::VectorXd p = params;
    p[k] = params[k] + h;
    fn(p, plus, nullptr);
    p[k] = params[k] - h;
    fn(p, minus, nullptr);
    jac.col(k) = (plus - minus) / (2.0 * h);
  }
  return jac;
}

LeastSquaresResult levenberg_marquardt(const ResidualFn& fn, Eigen::VectorXd params,
                                       int residual_count, const LeastSquaresOptions& options) {
  const Eigen::Index n = params.size();
  Eigen::VectorXd r(residual_count), r_trial(residual_count);
  Eigen::MatrixXd jac(residual_count, n);

  auto evaluate = [&](const Eigen::VectorXd& p, Eigen::VectorXd& res, Eigen::MatrixXd* j) {
    fn(p, res, j);
  };

  evaluate(params, r, &jac);
  double cost = 0.5 * r.squaredNorm();
  double lambda = options.initial_damping;

  LeastSquaresResult out;
  int it = 0;
  for (; it < options.max_iterations; ++it) {
    const Eigen::MatrixXd jtj = jac.transpose() * jac;
    const Eigen::VectorXd g = jac.transpose() * r;
    bool improved = false;
    Eigen::VectorXd step;
    for (int tries = 0; tries < 40; ++tries) {
      Eigen::MatrixXd a = jtj;
      for (Eigen::Index k = 0; k < n; ++k) a(k, k) += lambda * std::max(jtj(k, k), 1e-300);
      step = a.ldlt().solve(-g);
      if (!step.allFinite()) {
        lambda *= 10.0;
        continue;
      }
      const Eigen::VectorXd trial = params + step;
      evaluate(trial, r_trial, nullptr);
      const double trial_cost = 0.5 * r_trial.squaredNorm();
      if (std::isfinite(trial_cost) && trial_cost <= cost) {
        const double decrease = cost - trial_cost;
        params = trial;
        r = r_trial;
        lambda = std::max(lambda * 0.3, 1e-15);
        improved = true;
        const bool small_step =
            step.norm() <= options.step_tolerance * (params.norm() + options.step_tolerance);
        const bool small_decrease = decrease <= options.cost_tolerance * std::max(cost, 1e-300);
        cost = trial_cost;
        evaluate(params, r, &jac);
        if (small_step || small_decrease) {
          out.converged = true;
        }
        break;
      }
      lambda *= 10.0;
    }
    if (!improved) {
      // No downhill step at any damping: we sit at a (numerical) minimum.
      out.converged = true;
      break;
    }
    if (out.converged) break;
  }

  out.params = params;
  out.cost = cost;
  out.iterations = it;
  out.rms = std::sqrt(2.0 * cost / std::max(residual_count, 1));
  const int dof = residual_count - static_cast<int>(n);
  const double sigma2 = dof > 0 ? 2.0 * cost / dof : 0.0;
  const Eigen::MatrixXd jtj = jac.transpose() * jac;
  Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(jtj);
  out.covariance = sigma2 * cod.pseudoInverse();
  return out;
}

std::vector<double> linspace(double lo, double hi, std::size_t count) {
  require(count >= 2, ErrorCode::domain, "linspace needs at least two points");
  std::vector<double> out(count);
  const double step = (hi - lo) / static_cast<double>(count - 1);
  for (std::size_t i = 0; i < count; ++i) out[i] = lo + step * static_cast<double>(i);
  out.back() = hi;
  return out;
}

std::string format_double(double value) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, res.ptr);
}

double parse_double(std::string_view text) {
  while (!text.empty() && (text.front() == ' ' || text.front() == '\t')) text.remove_prefix(1);
  while (!text.empty() && (text.back() == ' ' || text.back() == '\t' || text.back() == '\r'))
    text.remove_suffix(1);
  double value = 0.0;
  const auto res = std::from_chars(text.data(), text.data() + text.size(), value);
  if (res.ec != std::errc() || res.ptr != text.data() + text.size())
    fail(ErrorCode::parse, "not a number: '" + std::string(text) + "'");
  return value;
}

double bisect(const std::function<double(double)>& f, double lo, double hi, double tolerance,
              int max_iterations) {
  double flo = f(lo);
  const double fhi = f(hi);
  if (flo == 0.0) return lo;
  if (fhi == 0.0) return hi;
  require((flo < 0.0) != (fhi < 0.0), ErrorCode::domain, "bisection interval does not bracket a sign change");
  for (int i = 0; i < max_iterations && (hi - lo) > tolerance; ++i) {
    const double mid = 0.5 * (lo + hi);
    const double fmid = f(mid);
    if (fmid == 0.0) return mid;
    if ((fmid < 0.0) == (flo < 0.0)) {
      lo = mid;
      flo = fmid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

}  // namespace photonic_lab::numerics
