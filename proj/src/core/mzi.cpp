#include "photonic_lab/mzi.hpp"

#include "photonic_lab/numerics.hpp"

#include <cmath>
#include <numbers>

namespace photonic_lab {

namespace {
constexpr double kTwoPi = 2.0 * std::numbers::pi;
}

HeaterDrive HeaterDrive::from_power(double p_long_mW, double p_short_mW, double power_per_K_mW) {
  require(power_per_K_mW > 0.0, ErrorCode::domain, "heater calibration must be positive");
  require(p_long_mW >= 0.0 && p_short_mW >= 0.0, ErrorCode::domain,
          "heater powers must be non-negative");
  return {p_long_mW / power_per_K_mW, p_short_mW / power_per_K_mW, power_per_K_mW};
}

void validate(const MziConfig& cfg) {
  require(cfg.delta_l_um >= 0.0, ErrorCode::domain, "delta_l_um must be >= 0");
  require(cfg.l_spiral_mm >= 0.0, ErrorCode::domain, "l_spiral_mm must be >= 0");
  require(cfg.alpha_db_per_mm >= 0.0, ErrorCode::domain, "alpha_db_per_mm must be >= 0");
  require(cfg.split_ratio > 0.0 && cfg.split_ratio < 1.0, ErrorCode::domain,
          "split_ratio must lie in (0, 1)");
  require(cfg.dn_dT_per_K >= 0.0, ErrorCode::domain, "dn_dT_per_K must be >= 0");
  require(cfg.n_eff > 0.0 && cfg.n_gr > 0.0, ErrorCode::domain, "indices must be positive");
  require(cfg.lambda_ref_nm > 0.0, ErrorCode::domain, "lambda_ref_nm must be positive");
}

double alpha_natural_per_mm(double alpha_db_per_mm) {
  return alpha_db_per_mm * std::numbers::ln10 / 10.0;
}

double effective_index_at(const MziConfig& cfg, double lambda_nm) {
  return cfg.n_eff + (cfg.n_eff - cfg.n_gr) * (lambda_nm - cfg.lambda_ref_nm) / cfg.lambda_ref_nm;
}

double phase_difference(const MziConfig& cfg, double lambda_nm, const HeaterDrive& drive) {
  require(lambda_nm > 0.0, ErrorCode::domain, "wavelength must be positive");
  const double k = kTwoPi / lambda_nm;  // per nm
  const double dl_nm = cfg.delta_l_um * 1e3;
  const double ls_nm = cfg.l_spiral_mm * 1e6;
  return k * dl_nm * effective_index_at(cfg, lambda_nm) +
         k * (ls_nm + dl_nm) * cfg.dn_dT_per_K * drive.dT_long_K -
         k * ls_nm * cfg.dn_dT_per_K * drive.dT_short_K;
}

double transmission_from_phase(const MziConfig& cfg, double dphi) {
  const double alpha = alpha_natural_per_mm(cfg.alpha_db_per_mm);
  const double l = cfg.l_spiral_mm;
  const double dl = cfg.delta_l_um * 1e-3;
  const double s = cfg.split_ratio;
  if (s == 0.5) {
    return 0.25 * (2.0 * std::cos(dphi) * std::exp(-alpha * (l + 0.5 * dl)) +
                   std::exp(-alpha * l) + std::exp(-alpha * (l + dl)));
  }
  const double a1 = std::exp(-0.5 * alpha * (l + dl));
  const double a2 = std::exp(-0.5 * alpha * l);
  const double t = 1.0 - s;
  return s * s * a1 * a1 + t * t * a2 * a2 + 2.0 * s * t * a1 * a2 * std::cos(dphi);
}

double single_transmission(const MziConfig& cfg, double lambda_nm, const HeaterDrive& drive) {
  return transmission_from_phase(cfg, phase_difference(cfg, lambda_nm, drive));
}

Extended free_spectral_range(const MziConfig& cfg, double lambda_nm) {
  require(cfg.n_gr > 0.0, ErrorCode::domain, "group index must be positive");
  if (cfg.delta_l_um == 0.0) return Extended::unbounded();
  require(cfg.delta_l_um > 0.0, ErrorCode::domain, "delta_l_um must be >= 0");
  return Extended::finite(lambda_nm * lambda_nm / (cfg.n_gr * cfg.delta_l_um * 1e3));
}

Extended extinction_ratio_from_loss(double alpha_per_mm, double delta_l_mm) {
  require(alpha_per_mm >= 0.0 && delta_l_mm >= 0.0, ErrorCode::domain,
          "loss and length must be non-negative");
  const double x = alpha_per_mm * delta_l_mm;
  if (x == 0.0) return Extended::unbounded();
  const double e = std::exp(-0.5 * x);
  const double ratio = (1.0 + e) / (1.0 - e);
  return Extended::finite(to_db(ratio * ratio));
}

double switching_delta_t(double lambda_nm, double l_spiral_mm, double dn_dT) {
  require(l_spiral_mm > 0.0 && dn_dT > 0.0, ErrorCode::domain,
          "spiral length and dn/dT must be positive");
  return lambda_nm * 1e-6 / (2.0 * l_spiral_mm * dn_dT);
}

double cascade_transmission_ideal(double p1, double p2) {
  return (4.0 + 4.0 * std::cos(p1) + 4.0 * std::cos(p2) + 2.0 * std::cos(p1 + p2) +
          2.0 * std::cos(p1 - p2)) /
         16.0;
}

namespace {
bool ideal(const MziConfig& c) { return c.alpha_db_per_mm == 0.0 && c.split_ratio == 0.5; }
}  // namespace

double cascade_transmission(const CascadeConfig& cc, double dphi1, double dphi2) {
  if (ideal(cc.stage1) && ideal(cc.stage2)) return cascade_transmission_ideal(dphi1, dphi2);
  return transmission_from_phase(cc.stage1, dphi1) * transmission_from_phase(cc.stage2, dphi2);
}

std::string HeaterMap::to_csv() const {
  std::string out = "p1_mW,p2_mW,intensity\n";
  for (std::size_t i = 0; i < p1_mW.size(); ++i)
    for (std::size_t j = 0; j < p2_mW.size(); ++j) {
      out += numerics::format_double(p1_mW[i]);
      out += ',';
      out += numerics::format_double(p2_mW[j]);
      out += ',';
      out += numerics::format_double(at(i, j));
      out += '\n';
    }
  return out;
}

HeaterMap heater_power_map(const CascadeConfig& cc, double lambda_nm,
                           const std::vector<double>& p1_grid_mW,
                           const std::vector<double>& p2_grid_mW, double p_pi1_mW,
                           double p_pi2_mW) {
  require(p_pi1_mW > 0.0 && p_pi2_mW > 0.0, ErrorCode::domain,
          "switching-power calibrations must be positive");
  const HeaterDrive none{};
  const double bias1 = phase_difference(cc.stage1, lambda_nm, none);
  const double bias2 = phase_difference(cc.stage2, lambda_nm, none);
  HeaterMap map{p1_grid_mW, p2_grid_mW, {}};
  map.intensity.reserve(p1_grid_mW.size() * p2_grid_mW.size());
  for (double p1 : p1_grid_mW)
    for (double p2 : p2_grid_mW)
      map.intensity.push_back(cascade_transmission(cc, bias1 + std::numbers::pi * p1 / p_pi1_mW,
                                                   bias2 + std::numbers::pi * p2 / p_pi2_mW));
  return map;
}

Spectrum mzi_wavelength_sweep(const MziConfig& cfg, const HeaterDrive& drive,
                              const std::vector<double>& lambda_nm) {
  validate(cfg);
  std::vector<double> v(lambda_nm.size());
  for (std::size_t i = 0; i < v.size(); ++i)
    v[i] = std::max(0.0, single_transmission(cfg, lambda_nm[i], drive));
  return Spectrum(lambda_nm, std::move(v));
}

Spectrum cascade_wavelength_sweep(const CascadeConfig& cc, const HeaterDrive& drive1,
                                  const HeaterDrive& drive2, const std::vector<double>& lambda_nm) {
  validate(cc.stage1);
  validate(cc.stage2);
  std::vector<double> v(lambda_nm.size());
  for (std::size_t i = 0; i < v.size(); ++i)
    v[i] = std::max(0.0, cascade_transmission(cc, phase_difference(cc.stage1, lambda_nm[i], drive1),
                                              phase_difference(cc.stage2, lambda_nm[i], drive2)));
  return Spectrum(lambda_nm, std::move(v));
}

}  // namespace photonic_lab
