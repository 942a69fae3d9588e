#pragma once

#include <complex>
#include <functional>
#include <string>
#include <vector>

namespace photonic_lab {

enum class Boundary { pml, pec, periodic };

// Axis-aligned rectangle of constant permittivity; later shapes paint over earlier ones.
struct Rect {
  double x0_nm, x1_nm, y0_nm, y1_nm;
  double eps;
};

struct Geometry {
  double background_eps = 1.0;
  std::vector<Rect> shapes;
  double eps_at(double x_nm, double y_nm) const;
};

// Staggered TE grid (Ex, Ey, Hz). Node layout, in cell units from the lower-left corner:
// Hz at (i+½, j+½), Ex at (i+½, j), Ey at (i, j+½). Arrays are (nx+1)·(ny+1), x fastest.
struct Grid2D {
  int nx = 0;
  int ny = 0;
  double dx_nm = 0.0;
  int pml_cells = 10;
  Boundary x_boundary = Boundary::pml;
  Boundary y_boundary = Boundary::pml;
  std::vector<double> eps_cell;  // nx·ny, cell averages (for output and mode volume)
  std::vector<double> eps_ex;    // effective ε at Ex nodes
  std::vector<double> eps_ey;    // effective ε at Ey nodes

  int stride() const { return nx + 1; }
  int node(int i, int j) const { return j * (nx + 1) + i; }
  double max_index() const;
};

// Rasterizes with sub-cell sampling: harmonic averaging along each E component,
// arithmetic averaging across it.
Grid2D rasterize(const Geometry& geometry, int nx, int ny, double dx_nm, int pml_cells,
                 Boundary x_boundary, Boundary y_boundary, int subsamples = 4);

// Point current J_y on the nearest Ey node; Gaussian-enveloped sine carrier.
struct DipoleSource {
  double x_nm = 0.0;
  double y_nm = 0.0;
  double center_wavelength_nm = 738.0;
  double bandwidth_nm = 100.0;  // half width of the amplitude spectrum at half maximum
  double amplitude = 1.0;
};

struct PulseShape {
  double omega0 = 0.0;  // normalized angular frequency (c = dx = 1)
  double width = 0.0;
  double t0 = 0.0;
  double amplitude = 1.0;
  double value(double t) const;
  double end_time() const { return 2.0 * t0; }
  // ∫ J(t) e^{iωt} dt evaluated on the same time samples the engine uses.
  std::complex<double> spectrum(double omega, double dt, long steps) const;
};

PulseShape pulse_for(const DipoleSource& src, double dx_nm);

inline double omega_for(double lambda_nm, double dx_nm) { return 2.0 * 3.14159265358979323846 * dx_nm / lambda_nm; }
inline double lambda_for(double omega, double dx_nm) { return 2.0 * 3.14159265358979323846 * dx_nm / omega; }

enum class Component { ex, ey, hz };

struct Probe {
  Component component = Component::ey;
  int i = 0, j = 0;
};

// Closed rectangular DFT contour: x faces on Ey columns i0, i1 (rows j0..j1−1), y faces on
// Ex rows j0, j1 (columns i0..i1−1). Outward flux per frequency.
struct FluxBox {
  int i0, i1, j0, j1;
};

// DFT of (Ey, Hz) on an Ey column across rows j0..j1−1, for modal projection.
struct PortLine {
  int i;
  int j0, j1;
};

struct FdtdMonitors {
  std::vector<Probe> probes;
  std::vector<FluxBox> flux_boxes;
  std::vector<PortLine> ports;
  std::vector<double> dft_omegas;        // frequencies for boxes and ports
  std::vector<double> field_map_omegas;  // full-domain Ex/Ey DFTs
  double field_map_start_time = 0.0;     // accumulate maps only after this time (ring-down)
};

struct PortRecord {
  // Per frequency, per row: Ey and Hz (averaged onto the Ey column) DFTs.
  std::vector<std::vector<std::complex<double>>> ey, hz;
};

struct FieldMap {
  double omega = 0.0;
  int nx = 0, ny = 0;
  std::vector<std::complex<double>> ex, ey;  // node arrays, same layout as Grid2D
};

struct MonitorRecords {
  double dt = 0.0;
  long steps = 0;
  std::vector<std::vector<double>> probe_series;
  std::vector<std::vector<double>> box_flux;  // [box][frequency]
  std::vector<PortRecord> ports;
  std::vector<FieldMap> field_maps;
  std::vector<std::complex<double>> source_e_dft;  // E at the first source, per dft frequency
};

class FdtdSimulation {
 public:
  FdtdSimulation(Grid2D grid, double courant = 0.5);

  void add_source(const DipoleSource& src);
  void set_monitors(FdtdMonitors monitors);
  void step();
  void run(long steps);
  // ½Σε|E^n|² + ½ΣH^{n−½}H^{n+½}, computed across the next magnetic update.
  double step_with_energy();

  const Grid2D& grid() const { return grid_; }
  double dt() const { return dt_; }
  long steps_taken() const { return n_; }
  double source_end_time() const;
  MonitorRecords records() const;

  double field(Component c, int i, int j) const;
  int ey_node_i(double x_nm) const;
  int ey_node_j(double y_nm) const;

 private:
  void update_h();
  void update_e();
  void accumulate();
  void check_finite() const;

  Grid2D grid_;
  double dt_;
  long n_ = 0;
  std::vector<double> ex_, ey_, hzx_, hzy_;
  std::vector<double> inv_eps_ex_, inv_eps_ey_;
  // PML coefficients: a = e^{−s dt}, b = (1−a)/s, per x for Ey/Hz, per y for Ex/Hz.
  std::vector<double> ax_e_, bx_e_, ax_h_, bx_h_, ay_e_, by_e_, ay_h_, by_h_;

  struct Src {
    int node;
    PulseShape pulse;
  };
  std::vector<Src> sources_;

  FdtdMonitors mon_;
  MonitorRecords rec_;
  // Running DFT sums for boxes/ports: per frequency, per sample.
  std::vector<std::vector<std::complex<double>>> box_e_, box_h_;
  std::vector<std::vector<std::complex<double>>> port_e_, port_h_;
  std::vector<std::complex<double>> src_e_;
};

struct FdtdRunOptions {
  long steps = 0;
  std::function<void(long step, long total)> progress;
};

// One-shot convenience: builds the simulation, runs it, returns the monitor records.
MonitorRecords run_fdtd(const Grid2D& grid, const std::vector<DipoleSource>& sources,
                        const FdtdMonitors& monitors, double t_max, double courant = 0.5);

}  // namespace photonic_lab
