#pragma once

#include "photonic_lab/error.hpp"
#include "photonic_lab/spectra.hpp"

#include <array>
#include <complex>
#include <optional>
#include <vector>

namespace photonic_lab {

using cplx = std::complex<double>;

struct Layer {
  cplx n;  // Im(n) > 0 is absorption
  double length_nm = 0.0;
};

struct LayerStack {
  std::vector<Layer> layers;
  double n_in = 1.0;
  double n_out = 1.0;
};

// Defaults: a design whose longest-wavelength mode sits at 738 nm.
struct PhcSpec {
  double period_nm = 230.0;
  double n_high = 1.9;
  double n_low = 1.2;
  double ff_center = 0.8;
  double ff_edge = 0.4;
  int n_segments = 10;
  double cavity_length_nm = 200.0;
  // Injected per-layer extinction (imaginary index) standing in for scattering loss.
  double loss_k_high = 0.0;
  double loss_k_low = 0.0;
  // Semi-infinite media on both sides; 0 selects n_high (the unpatterned beam).
  double n_bound = 0.0;
};

struct ResonanceMode {
  int order = 0;  // 1, 2, 3, ... by ascending wavelength inside the gap
  double lambda_res_nm = 0.0;
  double q = 0.0;
  std::optional<double> q_wg;
  std::optional<double> q_rad;
  double fwhm_nm = 0.0;
  double peak_transmission = 0.0;
  std::vector<std::string> warnings;
};

struct Interval {
  double lo_nm = 0.0;
  double hi_nm = 0.0;
  bool contains(double x) const { return x > lo_nm && x < hi_nm; }
};

struct RT {
  double t = 0.0;
  double r = 0.0;
};

double bragg_period(double lambda0_nm, double n_eff);

// Per-mirror fill fractions ff_1..ff_N of the quadratic taper.
std::vector<double> taper_fill_fractions(const PhcSpec& spec);
void validate(const PhcSpec& spec);
LayerStack build_stack(const PhcSpec& spec);
// A single mirror of `periods` identical periods at fill fraction ff.
LayerStack uniform_mirror(const PhcSpec& spec, double ff, int periods);

// 2x2 characteristic matrix of one layer; maps fields at its exit face to its entry face.
std::array<cplx, 4> characteristic_matrix(const Layer& layer, double lambda_nm);

RT stack_response(const LayerStack& stack, double lambda_nm);
cplx reflection_amplitude(const LayerStack& stack, double lambda_nm);

struct TransmissionResult {
  Spectrum transmission;
  Spectrum reflection;
};
TransmissionResult transmission_spectrum(const LayerStack& stack,
                                         const std::vector<double>& lambda_grid);

inline constexpr double kDefaultBandgapThresholdDb = -20.0;
Interval bandgap(const LayerStack& stack, const std::vector<double>& lambda_grid,
                 double threshold_db = kDefaultBandgapThresholdDb);

// Gap of the cavity's outermost (edge) mirror segment.
Interval mirror_bandgap(const PhcSpec& spec, const std::vector<double>& lambda_grid);

std::vector<ResonanceMode> cavity_resonances(const PhcSpec& spec,
                                             const std::vector<double>& lambda_grid);

struct QPoint {
  int n_segments = 0;
  double lambda_res_nm = 0.0;
  double q = 0.0;
};

struct QSaturationFit {
  double inv_q_rad = 0.0;        // fitted 1/Q_rad
  double inv_q_rad_sigma = 0.0;  // 1σ from the fit covariance
  Extended q_rad;                // unbounded when 1/Q_rad <= 0
  double ln_c = 0.0;             // Q_wg(N) = exp(ln_c + kappa·N)
  double kappa = 0.0;
  double max_relative_error = 0.0;

  double q_wg(int n) const;
  double q_model(int n) const;
};

struct QvsN {
  std::vector<QPoint> points;
  QSaturationFit fit;
};

// Follows the mode of order `mode_order` at the first N and tracks it by wavelength.
// Negative orders count from the long-wavelength end (-1 = longest).
QvsN q_vs_mirror_count(const PhcSpec& spec, const std::vector<int>& n_values,
                       const std::vector<double>& lambda_grid, int mode_order = 1);

QSaturationFit fit_q_saturation(const std::vector<QPoint>& points);

struct StandingWave {
  std::vector<double> x_nm;  // measured from the stack entry face
  std::vector<double> e_abs;
  std::vector<double> h_abs;
  std::vector<double> s_avg;  // time-averaged flux ½Re(E·H*)
  std::vector<double> s_osc;  // amplitude of the 2ω flux oscillation ½|E·H|
  std::vector<double> index_real;
  double cavity_center_nm = 0.0;
};

// Internal fields at λ_res for illumination from the input side, normalized to max|E| = 1.
StandingWave standing_wave_profile(const PhcSpec& spec, const ResonanceMode& mode,
                                   double step_nm = 1.0);

}  // namespace photonic_lab
