#pragma once

#include "photonic_lab/error.hpp"

#include <string>
#include <string_view>
#include <vector>

namespace photonic_lab {

// Real, non-negative intensity sampled on a strictly increasing vacuum-wavelength grid (nm).
class Spectrum {
 public:
  Spectrum(std::vector<double> wavelengths_nm, std::vector<double> values);

  const std::vector<double>& wavelengths_nm() const { return wavelengths_; }
  const std::vector<double>& values() const { return values_; }
  std::size_t size() const { return values_.size(); }

  // Two-column CSV with a header row. Round-trips bit-exactly.
  std::string to_csv(std::string_view x_header = "wavelength_nm",
                     std::string_view y_header = "value") const;
  static Spectrum from_csv(std::string_view text);

 private:
  std::vector<double> wavelengths_;
  std::vector<double> values_;
};

struct WavelengthWindow {
  double lo_nm = 0.0;
  double hi_nm = 0.0;
};

struct ResonancePeak {
  double lambda0_nm = 0.0;
  double fwhm_nm = 0.0;
  double q = 0.0;
  double amplitude = 0.0;
  double baseline = 0.0;
  double normalized_rms = 0.0;  // RMS residual / amplitude
  bool poor_fit = false;
  std::vector<std::string> warnings;
};

double to_db(double ratio);

// Least-squares A/(1+((λ−λ0)/(Γ/2))²)+B over the samples inside `window`.
ResonancePeak fit_lorentzian(const Spectrum& s, WavelengthWindow window);

// Max/min contrast in dB; unbounded when the minimum is exactly zero.
Extended extinction_ratio(const Spectrum& s);

inline constexpr double kPoorFitThreshold = 0.05;

}  // namespace photonic_lab
