#pragma once

#include "photonic_lab/error.hpp"
#include "photonic_lab/spectra.hpp"

#include <vector>

namespace photonic_lab {

struct MziConfig {
  double delta_l_um = 0.0;
  double l_spiral_mm = 0.0;
  double n_eff = 1.5;
  double n_gr = 1.5;
  double alpha_db_per_mm = 0.0;
  double dn_dT_per_K = 1e-5;
  double split_ratio = 0.5;
  // n_eff is quoted at this wavelength; away from it n_eff follows the first-order
  // dispersion implied by n_gr.
  double lambda_ref_nm = 738.0;
};

struct HeaterDrive {
  double dT_long_K = 0.0;
  double dT_short_K = 0.0;
  double power_per_K_mW = 1.0;

  // Linear calibration: ΔT = P / power_per_K.
  static HeaterDrive from_power(double p_long_mW, double p_short_mW, double power_per_K_mW);
};

struct CascadeConfig {
  MziConfig stage1;
  MziConfig stage2;
};

void validate(const MziConfig& cfg);

double alpha_natural_per_mm(double alpha_db_per_mm);
double effective_index_at(const MziConfig& cfg, double lambda_nm);

double phase_difference(const MziConfig& cfg, double lambda_nm, const HeaterDrive& drive);

// Output intensity for a given arm phase difference; arm 1 is the long arm.
double transmission_from_phase(const MziConfig& cfg, double dphi);
double single_transmission(const MziConfig& cfg, double lambda_nm, const HeaterDrive& drive);

Extended free_spectral_range(const MziConfig& cfg, double lambda_nm);
Extended extinction_ratio_from_loss(double alpha_per_mm, double delta_l_mm);
double switching_delta_t(double lambda_nm, double l_spiral_mm, double dn_dT);

// Closed form for ideal stages, product of lossy or unbalanced stages otherwise.
double cascade_transmission(const CascadeConfig& cc, double dphi1, double dphi2);
double cascade_transmission_ideal(double dphi1, double dphi2);

struct HeaterMap {
  std::vector<double> p1_mW;
  std::vector<double> p2_mW;
  std::vector<double> intensity;  // row-major, p1 outer
  double at(std::size_t i, std::size_t j) const { return intensity[i * p2_mW.size() + j]; }
  std::string to_csv() const;
};

// Δφ_i = (2π/λ)Δl_i·n_eff_i + π·P_i/Pπ_i.
HeaterMap heater_power_map(const CascadeConfig& cc, double lambda_nm,
                           const std::vector<double>& p1_grid_mW,
                           const std::vector<double>& p2_grid_mW, double p_pi1_mW,
                           double p_pi2_mW);

Spectrum mzi_wavelength_sweep(const MziConfig& cfg, const HeaterDrive& drive,
                              const std::vector<double>& lambda_nm);
Spectrum cascade_wavelength_sweep(const CascadeConfig& cc, const HeaterDrive& drive1,
                                  const HeaterDrive& drive2, const std::vector<double>& lambda_nm);

}  // namespace photonic_lab
