#include "photonic_lab/scene.hpp"

#include "photonic_lab/error.hpp"
#include "photonic_lab/slab.hpp"

#include <cmath>

namespace photonic_lab {

const char* to_string(SceneGeometry g) noexcept {
  switch (g) {
    case SceneGeometry::nanobeam: return "nanobeam";
    case SceneGeometry::crossbar: return "crossbar";
    case SceneGeometry::bare_waveguide: return "bare_waveguide";
    case SceneGeometry::vacuum: return "vacuum";
    case SceneGeometry::stack_1d: return "stack_1d";
  }
  return "unknown";
}

const char* to_string(EmitterSite s) noexcept { return s == EmitterSite::on_top ? "on_top" : "embedded"; }

SceneGeometry scene_geometry_from(const std::string& name) {
  for (auto g : {SceneGeometry::nanobeam, SceneGeometry::crossbar, SceneGeometry::bare_waveguide,
                 SceneGeometry::vacuum, SceneGeometry::stack_1d})
    if (name == to_string(g)) return g;
  fail(ErrorCode::validation, "unknown scene geometry '" + name + "'");
}

EmitterSite emitter_site_from(const std::string& name) {
  if (name == "on_top") return EmitterSite::on_top;
  if (name == "embedded") return EmitterSite::embedded;
  fail(ErrorCode::validation, "unknown emitter site '" + name + "'");
}

PhcSpec CavityScene::default_nanobeam_phc() {
  PhcSpec p;
  p.period_nm = 280.0;
  p.n_high = 1.69;
  p.n_low = 1.0;
  p.ff_center = 0.55;
  p.ff_edge = 0.4;
  p.n_segments = 7;
  p.cavity_length_nm = 130.0;
  return p;
}

void validate(const CavityScene& s) {
  validate(s.phc);
  require(s.dx_nm > 0.0, ErrorCode::config, "dx_nm must be positive");
  require(s.beam_width_nm > 0.0 && s.hole_width_nm > 0.0, ErrorCode::config,
          "beam and hole widths must be positive");
  require(s.crossbar_width_nm >= 0.0, ErrorCode::config, "crossbar width must be >= 0");
  require(s.padding_nm >= 0.0, ErrorCode::config, "padding must be >= 0");
  require(s.pml_cells >= 8, ErrorCode::config, "PML needs at least 8 cells");
  require(s.bandwidth_nm > 0.0 && s.bandwidth_nm < s.lambda_center_nm, ErrorCode::config,
          "source bandwidth must lie in (0, lambda_center)");
  const double n_max = std::max({s.phc.n_high, s.phc.n_low, 1.0});
  const double lambda_min = s.lambda_center_nm - s.bandwidth_nm;
  require(s.dx_nm <= lambda_min / (20.0 * n_max) + 1e-9, ErrorCode::config,
          "dx_nm does not resolve the shortest wavelength with 20 cells in the densest medium");
  require(std::abs(s.offset_y_w) * s.beam_width_nm <= 0.5 * s.beam_width_nm + s.padding_nm,
          ErrorCode::config, "emitter offset leaves the domain");
}

BuiltScene build_scene(const CavityScene& s, bool reference) {
  validate(s);
  const LayerStack stack = build_stack(s.phc);
  double length = 0.0;
  for (const auto& l : stack.layers) length += l.length_nm;
  const double dx = s.dx_nm;
  const bool one_d = s.geometry == SceneGeometry::stack_1d;

  BuiltScene out;
  out.stack_half_length_nm = 0.5 * length;
  out.center_i = s.pml_cells + static_cast<int>(std::ceil((s.padding_nm + 0.5 * length) / dx));
  const int nx = 2 * out.center_i;
  int ny = 5;  // 1D stacks: a thin periodic strip, wide enough for the source flux box
  if (one_d) {
    out.center_j = 2;
  } else {
    out.center_j = s.pml_cells + static_cast<int>(std::ceil((0.5 * s.beam_width_nm + s.padding_nm) / dx));
    ny = 2 * out.center_j + 1;
  }
  const double xc = out.center_i * dx;
  const double yc = (out.center_j + 0.5) * dx;
  const double far = 1e9;

  Geometry g;
  if (!reference) {
    const double n_high2 = s.phc.n_high * s.phc.n_high;
    const double n_low2 = s.phc.n_low * s.phc.n_low;
    if (one_d) {
      const double nb = s.phc.n_bound > 0.0 ? s.phc.n_bound : s.phc.n_high;
      g.background_eps = nb * nb;
      double x = xc - 0.5 * length;
      for (const auto& l : stack.layers) {
        g.shapes.push_back({x, x + l.length_nm, -far, far, l.n.real() * l.n.real()});
        x += l.length_nm;
      }
    } else if (s.geometry != SceneGeometry::vacuum) {
      const double hw = 0.5 * s.beam_width_nm;
      g.shapes.push_back({-far, far, yc - hw, yc + hw, n_high2});
      if ((s.geometry == SceneGeometry::crossbar || s.geometry == SceneGeometry::bare_waveguide) &&
          s.crossbar_width_nm > 0.0) {
        const double cw = 0.5 * s.crossbar_width_nm;
        g.shapes.push_back({xc - cw, xc + cw, -far, far, n_high2});
      }
      if (s.geometry == SceneGeometry::nanobeam || s.geometry == SceneGeometry::crossbar) {
        const double hh = 0.5 * s.hole_width_nm;
        double x = xc - 0.5 * length;
        for (const auto& l : stack.layers) {
          if (l.n.real() == s.phc.n_low && s.phc.n_low != s.phc.n_high)
            g.shapes.push_back({x, x + l.length_nm, yc - hh, yc + hh, n_low2});
          x += l.length_nm;
        }
      }
      out.has_waveguide = true;
    }
  }
  const Boundary yb = one_d ? Boundary::periodic : Boundary::pml;
  out.grid = rasterize(g, nx, ny, dx, s.pml_cells, Boundary::pml, yb);

  out.source_i = out.center_i + static_cast<int>(std::lround(s.offset_x_a * s.phc.period_nm / dx));
  out.source_j = one_d ? out.center_j : out.center_j + static_cast<int>(std::lround(s.offset_y_w * s.beam_width_nm / dx));
  require(out.source_i > s.pml_cells + 1 && out.source_i < nx - s.pml_cells - 2, ErrorCode::config,
          "emitter offset places the source inside the absorber");
  out.beam_j0 = out.center_j;
  out.beam_j1 = out.center_j + 1;
  if (!one_d) {
    const double hw = 0.5 * s.beam_width_nm;
    out.beam_j0 = 0;
    out.beam_j1 = 0;
    for (int j = 0; j < ny; ++j) {
      const double y = (j + 0.5) * dx;
      if (std::abs(y - yc) < hw) {
        if (out.beam_j1 == 0) out.beam_j0 = j;
        out.beam_j1 = j + 1;
      }
    }
  }
  return out;
}

double vertical_overlap(const CavityScene& s) {
  SlabWaveguide slab{s.slab_core_index, 1.0, 1.0, s.slab_thickness_nm};
  const auto modes = solve_modes(slab, s.lambda_center_nm, Polarization::TE);
  require(!modes.empty(), ErrorCode::config, "vertical slab guides no mode");
  const auto f = mode_profile(slab, s.lambda_center_nm, modes.front(),
                              {0.5 * s.slab_thickness_nm, s.slab_thickness_nm + s.emitter_height_nm});
  return (f[1] * f[1]) / (f[0] * f[0]);
}

}  // namespace photonic_lab
