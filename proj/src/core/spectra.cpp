#include "photonic_lab/spectra.hpp"

#include "photonic_lab/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace photonic_lab {

Spectrum::Spectrum(std::vector<double> wavelengths_nm, std::vector<double> values)
    : wavelengths_(std::move(wavelengths_nm)), values_(std::move(values)) {
  require(wavelengths_.size() == values_.size(), ErrorCode::domain,
          "spectrum grid and values differ in length");
  require(wavelengths_.size() >= 2, ErrorCode::domain, "spectrum needs at least two samples");
  for (std::size_t i = 0; i < values_.size(); ++i) {
    require(std::isfinite(wavelengths_[i]), ErrorCode::domain, "non-finite wavelength");
    require(std::isfinite(values_[i]) && values_[i] >= 0.0, ErrorCode::domain,
            "spectrum values must be finite and non-negative");
    if (i > 0)
      require(wavelengths_[i] > wavelengths_[i - 1], ErrorCode::domain,
              "wavelength grid must be strictly increasing");
  }
}

std::string Spectrum::to_csv(std::string_view x_header, std::string_view y_header) const {
  std::string out;
  out.reserve(32 * values_.size() + 32);
  out.append(x_header).append(",").append(y_header).append("\n");
  for (std::size_t i = 0; i < values_.size(); ++i) {
    out += numerics::format_double(wavelengths_[i]);
    out += ',';
    out += numerics::format_double(values_[i]);
    out += '\n';
  }
  return out;
}

Spectrum Spectrum::from_csv(std::string_view text) {
  std::vector<double> x, y;
  std::size_t pos = 0;
  bool header = true;
  while (pos < text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(pos, end - pos);
    pos = end + 1;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.empty()) continue;
    if (header) {
      header = false;
      continue;
    }
    const auto comma = line.find(',');
    if (comma == std::string_view::npos) fail(ErrorCode::parse, "spectrum row lacks a comma");
    x.push_back(numerics::parse_double(line.substr(0, comma)));
    y.push_back(numerics::parse_double(line.substr(comma + 1)));
  }
  return Spectrum(std::move(x), std::move(y));
}

double to_db(double ratio) {
  if (!(ratio > 0.0) || !std::isfinite(ratio)) fail(ErrorCode::domain, "to_db needs a positive ratio");
  return 10.0 * std::log10(ratio);
}

Extended extinction_ratio(const Spectrum& s) {
  const auto [lo, hi] = std::minmax_element(s.values().begin(), s.values().end());
  if (*lo == 0.0) return Extended::unbounded();
  return Extended::finite(to_db(*hi / *lo));
}

namespace {

// Linear interpolation of the half-maximum crossing on one side of the peak.
double half_crossing(const std::vector<double>& x, const std::vector<double>& y, std::size_t peak,
                     double level, int dir) {
  std::ptrdiff_t i = static_cast<std::ptrdiff_t>(peak);
  const std::ptrdiff_t n = static_cast<std::ptrdiff_t>(x.size());
  while (i + dir >= 0 && i + dir < n) {
    const std::ptrdiff_t j = i + dir;
    if (y[j] <= level) {
      const double t = (y[i] - level) / (y[i] - y[j]);
      return x[i] + t * (x[j] - x[i]);
    }
    i = j;
  }
  return x[i];
}

}  // namespace

ResonancePeak fit_lorentzian(const Spectrum& s, WavelengthWindow window) {
  std::vector<double> x, y;
  for (std::size_t i = 0; i < s.size(); ++i) {
    const double l = s.wavelengths_nm()[i];
    if (l >= window.lo_nm && l <= window.hi_nm) {
      x.push_back(l);
      y.push_back(s.values()[i]);
    }
  }
  require(x.size() >= 7, ErrorCode::domain, "Lorentzian fit window needs at least 7 samples");

  const std::size_t n = x.size();
  const auto peak_it = std::max_element(y.begin(), y.end());
  const std::size_t peak = static_cast<std::size_t>(peak_it - y.begin());
  std::vector<double> sorted = y;
  std::nth_element(sorted.begin(), sorted.begin() + n / 2, sorted.end());
  const double median = sorted[n / 2];
  const double ymax = *peak_it;
  if (!(ymax - median > 1e-12 * std::max(std::abs(ymax), 1e-300)) || peak == 0 || peak == n - 1)
    fail(ErrorCode::not_found, "no resonance peak inside the fit window");

  const double baseline0 = 0.5 * (y.front() + y.back());
  const double amp0 = ymax - baseline0;
  const double half = baseline0 + 0.5 * amp0;
  const double left = half_crossing(x, y, peak, half, -1);
  const double right = half_crossing(x, y, peak, half, +1);
  const double spacing = (x.back() - x.front()) / static_cast<double>(n - 1);
  const double gamma0 = std::max(right - left, spacing);

  // Work in units of the initial width around the initial center so that all
  // four parameters are O(1).
  const double x_ref = x[peak];
  const double scale = gamma0;
  const double y_scale = std::max(std::abs(amp0), 1e-300);
  Eigen::VectorXd p(4);
  p << 0.0, 1.0, amp0 / y_scale, baseline0 / y_scale;

  auto residual = [&](const Eigen::VectorXd& q, Eigen::VectorXd& r, Eigen::MatrixXd* jac) {
    const double d0 = q[0], g = q[1], a = q[2], b = q[3];
    for (std::size_t i = 0; i < n; ++i) {
      const double u = (x[i] - x_ref) / scale;
      const double z = 2.0 * (u - d0) / g;
      const double den = 1.0 + z * z;
      r[i] = a / den + b - y[i] / y_scale;
      if (jac) {
        const double dden_dz = 2.0 * z;
        const double common = -a / (den * den) * dden_dz;
        (*jac)(i, 0) = common * (-2.0 / g);
        (*jac)(i, 1) = common * (-z / g);
        (*jac)(i, 2) = 1.0 / den;
        (*jac)(i, 3) = 1.0;
      }
    }
  };
  const auto fit = numerics::levenberg_marquardt(residual, p, static_cast<int>(n));

  ResonancePeak out;
  out.lambda0_nm = x_ref + fit.params[0] * scale;
  out.fwhm_nm = std::abs(fit.params[1]) * scale;
  out.amplitude = fit.params[2] * y_scale;
  out.baseline = fit.params[3] * y_scale;
  if (!(out.fwhm_nm > 0.0) || !std::isfinite(out.lambda0_nm))
    fail(ErrorCode::not_found, "Lorentzian fit collapsed");
  out.q = out.lambda0_nm / out.fwhm_nm;
  out.normalized_rms = fit.rms * y_scale / std::max(std::abs(out.amplitude), 1e-300);
  if (out.normalized_rms > kPoorFitThreshold) {
    out.poor_fit = true;
    out.warnings.push_back("poor Lorentzian fit: normalized RMS residual " +
                           numerics::format_double(out.normalized_rms));
  }
  return out;
}

}  // namespace photonic_lab
