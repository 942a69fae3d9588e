#pragma once

#include <vector>

namespace photonic_lab {

enum class Polarization { TE, TM };

const char* to_string(Polarization p) noexcept;

// Constant index, or n²(λ) = A + B·λ²/(λ² − C) with λ in µm.
class RefractiveIndex {
 public:
  RefractiveIndex(double n = 1.0) : a_(n * n), b_(0.0), c_(0.0), constant_(n) {}  // NOLINT
  static RefractiveIndex sellmeier(double a, double b, double c_um2);

  double at(double lambda_nm) const;
  bool is_constant() const { return b_ == 0.0; }

 private:
  double a_, b_, c_;
  double constant_;
};

struct SlabWaveguide {
  RefractiveIndex n_core;
  RefractiveIndex n_sub;
  RefractiveIndex n_clad;
  double thickness_nm = 0.0;
};

struct GuidedMode {
  int m = 0;
  Polarization polarization = Polarization::TE;
  double n_eff = 0.0;
  double beta_per_um = 0.0;
};

// All guided solutions ordered by descending n_eff (ascending m).
std::vector<GuidedMode> solve_modes(const SlabWaveguide& wg, double lambda_nm, Polarization pol);

int count_modes(const SlabWaveguide& wg, double lambda_nm, Polarization pol);

// n_gr = n_eff − λ·dn_eff/dλ by central difference with step delta_nm.
double group_index(const SlabWaveguide& wg, double lambda_nm, const GuidedMode& mode,
                   double delta_nm = 0.1);

// Transverse profile of the principal field (E_y for TE, H_y for TM) at heights z_nm,
// measured from the substrate/core interface. Normalized to 1 at the core maximum.
std::vector<double> mode_profile(const SlabWaveguide& wg, double lambda_nm, const GuidedMode& mode,
                                 const std::vector<double>& z_nm);

// Rectangular ridge reduced by the two-step effective-index method: a vertical slab
// in thickness, then a lateral slab in width with the sides at n_side.
struct RidgeWaveguide {
  SlabWaveguide vertical;
  RefractiveIndex n_side;
  double width_nm = 0.0;
};

// Quasi-TE ridge modes (vertical TE, lateral TM), or quasi-TM for pol=TM.
// Every lateral order built on the fundamental vertical mode.
std::vector<GuidedMode> solve_ridge_modes(const RidgeWaveguide& ridge, double lambda_nm,
                                          Polarization pol);

}  // namespace photonic_lab
