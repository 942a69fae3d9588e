#pragma once

#include "photonic_lab/harmonic.hpp"
#include "photonic_lab/scene.hpp"
#include "photonic_lab/spectra.hpp"

#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace photonic_lab {

enum class Parity { even, odd, mixed };
const char* to_string(Parity p) noexcept;

struct SceneRunOptions {
  std::vector<double> lambda_grid_nm;  // spectra are reported on this grid
  // Steps after the source pulse ends; 0 runs until the source-node intensity has
  // decayed by decay_threshold, capped at max_ringdown_steps.
  long ringdown_steps = 0;
  double decay_threshold = 1e-6;
  long max_ringdown_steps = 400000;
  double courant = 0.5;
  bool record_ports = true;
  // Ring-down field maps at these wavelengths (empty: none).
  std::vector<double> field_map_wavelengths_nm;
};

// Default probing grid: `points` samples across the source band.
std::vector<double> source_band_grid(const CavityScene& scene, int points = 181);

// Raw outcome of one emitter placement: dipole power in the scene and in the
// scatterer-free reference on the identical grid, guided port power and the
// source-node ring-down.
struct SceneRun {
  BuiltScene built;
  std::vector<double> lambda_nm;
  std::vector<double> power;          // flux out of the source box
  std::vector<double> vacuum_power;   // same box, same grid, no scatterers
  std::vector<double> guided_power;   // both ports, forward-projected onto the strip mode
  std::vector<std::complex<double>> source_spectrum;  // J(ω) at each grid frequency
  std::vector<double> ringdown;       // Ey at the source node, from the end of the pulse
  double ringdown_start_time = 0.0;
  PulseShape pulse;
  double dt = 0.0;
  long steps = 0;
  double eps_at_source = 1.0;
  std::vector<FieldMap> field_maps;
  std::vector<std::string> warnings;
};

SceneRun simulate_scene(const CavityScene& scene, const SceneRunOptions& options);

// ε(x₀)·P_scene/P_vacuum per wavelength.
Spectrum ldos_enhancement(const SceneRun& run);
Spectrum ldos_enhancement(const CavityScene& scene, const std::vector<double>& lambda_grid_nm);

// Guided power in both waveguide ports over the total power leaving the source box.
Spectrum beta_factor(const SceneRun& run);
Spectrum beta_factor(const CavityScene& scene, const std::vector<double>& lambda_grid_nm);

// β for an emitter resting on the film: guided and total emission both pass through the
// on-top LDOS surrogate, with a vacuum-like unit background for the unguided remainder.
Spectrum beta_factor_on_top(const SceneRun& run, double eta);

struct ModeRecord {
  double lambda_res_nm = 0.0;
  double q = 0.0;
  double q_sigma = 0.0;
  bool q_lower_bound = false;
  double omega = 0.0;  // normalized, c = dx = 1
  double alpha = 0.0;
  double mode_volume_lambda3 = 0.0;  // 0 when no field map was recorded
  Parity parity = Parity::mixed;
  std::optional<FieldMap> field_map;
};

// Resonances in the ring-down of a run, strongest-first filtering as in resonance_analysis.
std::vector<ModeRecord> find_modes(const SceneRun& run, const CavityScene& scene);

// Two passes: locate the resonances, then rerun with ring-down field maps at each one
// and attach parity and mode volume.
std::vector<ModeRecord> analyze_modes(const CavityScene& scene, const SceneRunOptions& options);

// Peak LDOS enhancement contributed by each given mode: the Lorentzian height implied by
// the mode's amplitude in this run's ring-down, referenced to the vacuum power at ω_k.
std::vector<double> modal_enhancement(const SceneRun& run, const std::vector<ModeRecord>& modes);

// Sign agreement of mirrored Ey samples about the Ey column `center_i`, over nodes with
// |Ey| above 10% of the maximum. Returns `mixed` below 90% agreement.
Parity classify_parity(const FieldMap& map, int center_i, double* agreement = nullptr);

// V = Σε|E|²·dx²·t_eff / max(ε|E|²), expressed in (λ/n)³ with n the index at the maximum.
// Only nodes outside the absorbing layers are summed.
double mode_volume(const FieldMap& map, const Grid2D& grid, double lambda_nm,
                   double thickness_nm = 200.0);

double purcell_from_qv(double lambda_vac_nm, double n_host, double q, double v_lambda3);
double purcell_from_beta(double beta);

// Emitter above the film surface: in-plane enhancement F scaled by the vertical overlap η.
inline double on_top_enhancement(double embedded, double eta) { return 1.0 + eta * (embedded - 1.0); }

struct Placement {
  double offset_x_a = 0.0;
  double offset_y_w = 0.0;
  EmitterSite site = EmitterSite::embedded;
};

struct PlacementRow {
  Placement placement;
  std::vector<double> mode_enhancement;  // per reference mode
  std::vector<double> beta_on_resonance; // per reference mode
  double beta_peak = 0.0;                // max β over the grid
  Spectrum ldos;
  Spectrum beta;
};

struct PlacementStudy {
  std::vector<ModeRecord> modes;  // found at the template's own placement
  std::vector<PlacementRow> rows;
};

// Runs the template at its own placement to identify modes, then every placement in
// parallel (`jobs` workers). Per-mode values use fixed (ω, α) from the reference modes.
PlacementStudy placement_study(const CavityScene& scene_template, const std::vector<Placement>& placements,
                               const SceneRunOptions& options, int jobs = 1,
                               const std::function<void(std::size_t done, std::size_t total)>& progress = {});

}  // namespace photonic_lab
