#pragma once

#include <complex>
#include <vector>

namespace photonic_lab {

// One damped sinusoid A·e^{−α t}·cos(ω t + φ), t measured from the window start.
struct HarmonicMode {
  double omega = 0.0;
  double alpha = 0.0;
  double amplitude = 0.0;
  double phase = 0.0;
  double q = 0.0;        // ω/(2α); a measurement bound when q_lower_bound is set
  double q_sigma = 0.0;  // 1σ from the fit covariance
  bool q_lower_bound = false;
};

struct SignalWindow {
  std::size_t begin = 0;
  std::size_t end = 0;  // exclusive; 0 selects the end of the signal
};

struct HarmonicOptions {
  double omega_min = 0.0;
  double omega_max = 0.0;  // required: highest angular frequency of interest
  double min_relative_amplitude = 1e-3;
  int max_modes = 24;
  double samples_per_period = 6.0;
  std::size_t max_samples = 1500;
  double max_relative_q_sigma = 0.2;
  double lossless_decay_bound = 1e-4;  // α·T below this reports Q as a lower bound
};

// Ring-down analysis: matrix-pencil estimate refined by a joint damped-sinusoid
// least-squares fit. Returns in-band modes ordered by ascending ω.
std::vector<HarmonicMode> resonance_analysis(const std::vector<double>& signal, double dt,
                                             SignalWindow window, const HarmonicOptions& options);

// Complex amplitudes of known (ω, α) components in a window, by linear least squares.
// Each returned value c_k models c_k·e^{(iω_k − α_k) t}+c.c.; |2c_k| is the real amplitude.
std::vector<std::complex<double>> modal_amplitudes(const std::vector<double>& signal, double dt,
                                                   SignalWindow window,
                                                   const std::vector<HarmonicMode>& modes);

}  // namespace photonic_lab
