#include "photonic_lab/slab.hpp"

#include "photonic_lab/error.hpp"
#include "photonic_lab/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace photonic_lab {

const char* to_string(Polarization p) noexcept { return p == Polarization::TE ? "TE" : "TM"; }

RefractiveIndex RefractiveIndex::sellmeier(double a, double b, double c_um2) {
  RefractiveIndex n;
  n.a_ = a;
  n.b_ = b;
  n.c_ = c_um2;
  n.constant_ = 0.0;
  return n;
}

double RefractiveIndex::at(double lambda_nm) const {
  if (b_ == 0.0) return constant_ != 0.0 ? constant_ : std::sqrt(a_);
  const double l2 = (lambda_nm * 1e-3) * (lambda_nm * 1e-3);
  const double n2 = a_ + b_ * l2 / (l2 - c_);
  require(n2 >= 1.0, ErrorCode::domain, "Sellmeier index below 1 at this wavelength");
  return std::sqrt(n2);
}

namespace {

constexpr int kGridPoints = 2000;

struct Indices {
  double core, sub, clad;
};

Indices indices_at(const SlabWaveguide& wg, double lambda_nm) {
  return {wg.n_core.at(lambda_nm), wg.n_sub.at(lambda_nm), wg.n_clad.at(lambda_nm)};
}

struct Dispersion {
  Indices n;
  double k0_d;  // k0·thickness
  double rs, rc;  // TE: 1; TM: (n_core/n_side)²

  // κd − atan(rs γs/κ) − atan(rc γc/κ); strictly decreasing in N.
  double g(double neff) const {
    const double kappa = std::sqrt(std::max(n.core * n.core - neff * neff, 0.0));
    const double gs = std::sqrt(std::max(neff * neff - n.sub * n.sub, 0.0));
    const double gc = std::sqrt(std::max(neff * neff - n.clad * n.clad, 0.0));
    if (kappa == 0.0) return -std::numbers::pi;
    return kappa * k0_d - std::atan(rs * gs / kappa) - std::atan(rc * gc / kappa);
  }
};

Dispersion make_dispersion(const SlabWaveguide& wg, double lambda_nm, Polarization pol) {
  require(lambda_nm > 0.0, ErrorCode::domain, "wavelength must be positive");
  require(wg.thickness_nm >= 0.0, ErrorCode::domain, "slab thickness must be non-negative");
  Dispersion d{indices_at(wg, lambda_nm), 2.0 * std::numbers::pi / lambda_nm * wg.thickness_nm,
               1.0, 1.0};
  require(d.n.core > std::max(d.n.sub, d.n.clad), ErrorCode::domain,
          "core index must exceed both cladding indices");
  if (pol == Polarization::TM) {
    d.rs = (d.n.core / d.n.sub) * (d.n.core / d.n.sub);
    d.rc = (d.n.core / d.n.clad) * (d.n.core / d.n.clad);
  }
  return d;
}

}  // namespace

std::vector<GuidedMode> solve_modes(const SlabWaveguide& wg, double lambda_nm, Polarization pol) {
  const Dispersion d = make_dispersion(wg, lambda_nm, pol);
  const double n_cut = std::max(d.n.sub, d.n.clad);
  const double span = d.n.core - n_cut;

  std::vector<double> grid(kGridPoints + 1), values(kGridPoints + 1);
  for (int i = 0; i <= kGridPoints; ++i) {
    grid[i] = n_cut + span * static_cast<double>(i) / kGridPoints;
    values[i] = i == kGridPoints ? -std::numbers::pi : d.g(grid[i]);
  }

  std::vector<GuidedMode> modes;
  for (int m = 0;; ++m) {
    const double target = m * std::numbers::pi;
    if (!(values[0] > target)) break;  // mode m is cut off
    int hit = -1;
    for (int i = 0; i < kGridPoints; ++i) {
      if (values[i] > target && values[i + 1] <= target) {
        hit = i;
        break;
      }
    }
    if (hit < 0) break;
    const double neff = numerics::bisect([&](double n) { return d.g(n) - target; }, grid[hit],
                                         grid[hit + 1], 1e-12);
    if (!modes.empty() && std::abs(modes.back().n_eff - neff) <= 1e-9) break;
    GuidedMode mode;
    mode.m = m;
    mode.polarization = pol;
    mode.n_eff = neff;
    mode.beta_per_um = 2.0 * std::numbers::pi * neff / (lambda_nm * 1e-3);
    modes.push_back(mode);
  }
  return modes;
}

int count_modes(const SlabWaveguide& wg, double lambda_nm, Polarization pol) {
  return static_cast<int>(solve_modes(wg, lambda_nm, pol).size());
}

double group_index(const SlabWaveguide& wg, double lambda_nm, const GuidedMode& mode,
                   double delta_nm) {
  require(delta_nm > 0.0 && delta_nm < lambda_nm, ErrorCode::domain, "invalid stencil step");
  auto neff_at = [&](double l) {
    const auto modes = solve_modes(wg, l, mode.polarization);
    if (static_cast<int>(modes.size()) <= mode.m)
      fail(ErrorCode::stencil, "mode " + std::to_string(mode.m) + " is cut off at " +
                                   numerics::format_double(l) + " nm inside the stencil");
    return modes[mode.m].n_eff;
  };
  const double n0 = neff_at(lambda_nm);
  const double dn = (neff_at(lambda_nm + delta_nm) - neff_at(lambda_nm - delta_nm)) / (2.0 * delta_nm);
  return n0 - lambda_nm * dn;
}

std::vector<double> mode_profile(const SlabWaveguide& wg, double lambda_nm, const GuidedMode& mode,
                                 const std::vector<double>& z_nm) {
  const Dispersion d = make_dispersion(wg, lambda_nm, mode.polarization);
  const double k0 = 2.0 * std::numbers::pi / lambda_nm;
  const double ne = mode.n_eff;
  const double kappa = k0 * std::sqrt(d.n.core * d.n.core - ne * ne);
  const double gs = k0 * std::sqrt(ne * ne - d.n.sub * d.n.sub);
  const double gc = k0 * std::sqrt(ne * ne - d.n.clad * d.n.clad);
  const double phi_s = std::atan(d.rs * gs / kappa);
  const double t = wg.thickness_nm;
  std::vector<double> out(z_nm.size());
  for (std::size_t i = 0; i < z_nm.size(); ++i) {
    const double z = z_nm[i];
    if (z < 0.0)
      out[i] = std::cos(phi_s) * std::exp(gs * z);
    else if (z <= t)
      out[i] = std::cos(kappa * z - phi_s);
    else
      out[i] = std::cos(kappa * t - phi_s) * std::exp(-gc * (z - t));
  }
  // Core maximum of |cos(κz − φs)| over [0, t].
  double peak = std::max(std::abs(std::cos(phi_s)), std::abs(std::cos(kappa * t - phi_s)));
  const double z_star = phi_s / kappa;
  if (z_star >= 0.0 && z_star <= t) peak = 1.0;
  for (double& v : out) v /= peak;
  return out;
}

std::vector<GuidedMode> solve_ridge_modes(const RidgeWaveguide& ridge, double lambda_nm,
                                          Polarization pol) {
  const auto vertical = solve_modes(ridge.vertical, lambda_nm, pol);
  if (vertical.empty()) return {};
  SlabWaveguide lateral;
  lateral.n_core = RefractiveIndex(vertical.front().n_eff);
  lateral.n_sub = ridge.n_side;
  lateral.n_clad = ridge.n_side;
  lateral.thickness_nm = ridge.width_nm;
  if (!(vertical.front().n_eff > ridge.n_side.at(lambda_nm))) return {};
  const Polarization lateral_pol = pol == Polarization::TE ? Polarization::TM : Polarization::TE;
  auto modes = solve_modes(lateral, lambda_nm, lateral_pol);
  for (auto& m : modes) m.polarization = pol;
  return modes;
}

}  // namespace photonic_lab
