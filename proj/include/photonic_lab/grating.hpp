#pragma once

#include <vector>

namespace photonic_lab {

struct GratingSpec {
  double period_nm = 0.0;
  double n_eff_grating = 0.0;
  double n_clad = 1.0;
  double theta_deg = 0.0;
  int diffraction_order = 1;
  double fill_factor = 0.5;
};

// λ = Λ·(n_eff − n_clad·sinθ)/m.
double central_wavelength(const GratingSpec& g);

double period_for_wavelength(double lambda_nm, double n_eff, double n_clad, double theta_deg,
                             int order);

// Linear fill-factor ramp from ff_start to ff_end inclusive.
std::vector<double> apodization_profile(double ff_start, double ff_end, int n_teeth);

}  // namespace photonic_lab
