#pragma once

#include "photonic_lab/fdtd.hpp"
#include "photonic_lab/tmm.hpp"

#include <string>

namespace photonic_lab {

enum class SceneGeometry { nanobeam, crossbar, bare_waveguide, vacuum, stack_1d };
enum class EmitterSite { on_top, embedded };

const char* to_string(SceneGeometry g) noexcept;
const char* to_string(EmitterSite s) noexcept;
SceneGeometry scene_geometry_from(const std::string& name);
EmitterSite emitter_site_from(const std::string& name);

// 2D effective-index surrogate of a suspended nanobeam cavity. The PhC segments use
// phc.n_high as the beam index; the low-index layers of the stack become holes of
// index phc.n_low and lateral size hole_width_nm.
struct CavityScene {
  SceneGeometry geometry = SceneGeometry::nanobeam;
  PhcSpec phc = default_nanobeam_phc();
  double beam_width_nm = 450.0;
  double hole_width_nm = 300.0;
  double crossbar_width_nm = 0.0;  // crossing waveguide for crossbar and bare_waveguide scenes

  EmitterSite emitter_site = EmitterSite::embedded;
  double offset_x_a = 0.0;  // emitter shift along the beam, in units of the period
  double offset_y_w = 0.0;  // emitter shift across the beam, in units of beam_width

  // Vertical slab used for the on-top overlap factor.
  double slab_core_index = 2.0;
  double slab_thickness_nm = 200.0;
  double emitter_height_nm = 25.0;  // above the top surface

  double dx_nm = 14.0;
  int pml_cells = 16;
  double padding_nm = 560.0;  // clearance between structure and absorber
  double lambda_center_nm = 738.0;
  double bandwidth_nm = 90.0;

  static PhcSpec default_nanobeam_phc();
};

void validate(const CavityScene& scene);

struct BuiltScene {
  Grid2D grid;
  int center_i = 0;  // Ey column on the cavity mirror plane
  int center_j = 0;  // Ey row on the beam axis
  int source_i = 0;
  int source_j = 0;
  int beam_j0 = 0, beam_j1 = 0;  // Ey rows inside the beam (exclusive end)
  double stack_half_length_nm = 0.0;
  bool has_waveguide = false;
};

// Grid for the scene; `reference` builds the same grid with no scatterers.
BuiltScene build_scene(const CavityScene& scene, bool reference = false);

// |f(z_top)|²/|f(z_mid)|² of the vertical slab TE0 profile: the fraction of in-plane
// enhancement an emitter resting on the surface experiences.
double vertical_overlap(const CavityScene& scene);

}  // namespace photonic_lab
