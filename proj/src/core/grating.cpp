#include "photonic_lab/grating.hpp"

#include "photonic_lab/error.hpp"

#include <cmath>
#include <numbers>

namespace photonic_lab {

namespace {

double bragg_denominator(double n_eff, double n_clad, double theta_deg) {
  return n_eff - n_clad * std::sin(theta_deg * std::numbers::pi / 180.0);
}

}  // namespace

double central_wavelength(const GratingSpec& g) {
  require(g.diffraction_order >= 1, ErrorCode::domain, "diffraction order must be >= 1");
  require(g.period_nm > 0.0, ErrorCode::domain, "grating period must be positive");
  require(g.fill_factor > 0.0 && g.fill_factor < 1.0, ErrorCode::domain,
          "fill factor must lie in (0, 1)");
  const double lambda =
      g.period_nm * bragg_denominator(g.n_eff_grating, g.n_clad, g.theta_deg) / g.diffraction_order;
  require(lambda > 0.0, ErrorCode::domain, "non-physical grating: wavelength <= 0");
  return lambda;
}

double period_for_wavelength(double lambda_nm, double n_eff, double n_clad, double theta_deg,
                             int order) {
  require(order >= 1, ErrorCode::domain, "diffraction order must be >= 1");
  require(lambda_nm > 0.0, ErrorCode::domain, "wavelength must be positive");
  const double den = bragg_denominator(n_eff, n_clad, theta_deg);
  require(den > 0.0, ErrorCode::domain, "n_eff - n_clad*sin(theta) must be positive");
  return order * lambda_nm / den;
}

std::vector<double> apodization_profile(double ff_start, double ff_end, int n_teeth) {
  require(ff_start > 0.0 && ff_start < 1.0 && ff_end > 0.0 && ff_end < 1.0, ErrorCode::domain,
          "fill factors must lie in (0, 1)");
  require(n_teeth >= 2, ErrorCode::domain, "apodization needs at least two teeth");
  std::vector<double> out(n_teeth);
  for (int i = 0; i < n_teeth; ++i)
    out[i] = ff_start + (ff_end - ff_start) * static_cast<double>(i) / (n_teeth - 1);
  out.back() = ff_end;
  return out;
}

}  // namespace photonic_lab
