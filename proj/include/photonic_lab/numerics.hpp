#pragma once

#include <Eigen/Dense>

#include <functional>
#include <string>
#include <vector>

namespace photonic_lab::numerics {

// Residual callback for nonlinear least squares. When `jacobian` is non-null it
// must be filled with d(residual)/d(params) (rows = residuals).
using ResidualFn = std::function<void(const Eigen::VectorXd& params, Eigen::VectorXd& residual,
                                      Eigen::MatrixXd* jacobian)>;

struct LeastSquaresOptions {
  int max_iterations = 300;
  double step_tolerance = 1e-14;
  double cost_tolerance = 1e-16;
  double initial_damping = 1e-3;
};

struct LeastSquaresResult {
  Eigen::VectorXd params;
  Eigen::MatrixXd covariance;  // sigma^2 (J^T J)^-1 at the solution
  double cost = 0.0;           // 0.5 * |r|^2
  double rms = 0.0;
  int iterations = 0;
  bool converged = false;
};

LeastSquaresResult levenberg_marquardt(const ResidualFn& fn, Eigen::VectorXd initial,
                                       int residual_count, const LeastSquaresOptions& options = {});

// Central-difference Jacobian for callers without an analytic one.
Eigen::MatrixXd numeric_jacobian(const ResidualFn& fn, const Eigen::VectorXd& params,
                                 int residual_count);

std::vector<double> linspace(double lo, double hi, std::size_t count);

// Shortest decimal text that parses back to exactly the same double.
std::string format_double(double value);
double parse_double(std::string_view text);

// Bisection on a sign change of f over [lo, hi]; stops when the bracket is below `tolerance`.
double bisect(const std::function<double(double)>& f, double lo, double hi, double tolerance,
              int max_iterations = 200);

}  // namespace photonic_lab::numerics
