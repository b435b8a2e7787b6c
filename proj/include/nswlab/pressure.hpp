#pragma once

#include <array>
#include <cstddef>
#include <string>
#include <vector>

#include "nswlab/cube_cover.hpp"
#include "nswlab/grid_field.hpp"

namespace nswlab {

using Mat3 = std::array<std::array<double, 3>, 3>;

/// K_ij(y) = (-delta_ij |y|^2 + 3 y_i y_j) / (4 pi |y|^5).
Mat3 kernel(const Vec3& y);

/// p = R_i R_j (u_i u_j) on the periodic box, zero mean.
GridField global_pressure(const GridField& u);

/// Half-open index box [lo, hi) per axis.
struct IndexBox {
  std::array<int, 3> lo{0, 0, 0};
  std::array<int, 3> hi{0, 0, 0};
  int extent(int a) const { return hi[a] - lo[a]; }
  std::size_t size() const {
    return static_cast<std::size_t>(extent(0)) * extent(1) * extent(2);
  }
  bool empty() const { return extent(0) <= 0 || extent(1) <= 0 || extent(2) <= 0; }
  std::size_t local(int i, int j, int k) const {
    return (static_cast<std::size_t>(i - lo[0]) * extent(1) + (j - lo[1])) * extent(2) + (k - lo[2]);
  }
};

/// Grid points whose centers lie in the closed cube.
IndexBox points_in(const GridField& f, const Cube& q);
/// Cells with positive overlap with the cube.
IndexBox cells_touching(const GridField& f, const Cube& q);
IndexBox full_box(const GridField& f);
IndexBox bounding(const IndexBox& a, const IndexBox& b);

/// sum over source points y != x of w(y) sum_ij K_ij(x - y) u_i u_j (y) h^3 for
/// every target point x. An empty weight vector means w = 1 on the source box.
/// Aperiodic: computed by zero-padded FFT convolution.
std::vector<double> pv_convolve(const GridField& u, const IndexBox& src, const std::vector<double>& weight,
                                const IndexBox& tgt);

struct KernelSplit {
  Cube q;
  IndexBox box;              // points of Q*
  std::vector<double> near;  // -|u|^2/3 + pv integral over Q**
  std::vector<double> far;   // difference-kernel integral over box minus Q**
  std::vector<double> total() const;
  double tail_bound = 0.0;   // analytic bound on the neglected exterior of the field box
};

/// Localized pressure operator G^Q applied to u (x) u on the points of Q*.
/// Reuses a precomputed whole-box pv field when one covering Q* is supplied.
class LocalPressure {
 public:
  /// Precomputes the whole-box pv convolution on `window` (defaults to the full grid).
  explicit LocalPressure(const GridField& u);
  LocalPressure(const GridField& u, const IndexBox& window);

  const GridField& velocity() const { return u_; }
  /// Values of G^Q(u (x) u) on the points of Q*.
  std::vector<double> apply(const Cube& q) const;
  /// Full near/far decomposition (one local FFT for the near part).
  KernelSplit split(const Cube& q) const;
  /// sum over cells outside Q** of K(x_Q - y) u_i u_j h^3.
  double far_constant(const Cube& q) const;

 private:
  const GridField& u_;
  IndexBox window_;
  std::vector<double> pv_;   // on window_
  std::vector<double> usq_;  // |u|^2 on the full grid
};

KernelSplit local_pressure(const GridField& u, const Cube& q);

struct ExpansionResidual {
  double residual = 0.0;  // (sup d - inf d) / scale
  double p_q = 0.0;       // mean of d over Q*
  double scale = 0.0;     // ||p||_{L^{3/2}(Q*)} |Q*|^{-2/3}
};

ExpansionResidual pressure_expansion_residual(const GridField& p, const LocalPressure& lp, const Cube& q);
double pressure_expansion_residual(const GridField& p, const GridField& u, const Cube& q);

/// Bounding index box of Q* over the listed cubes.
IndexBox star_window(const GridField& f, const CubeCover& cover, const std::vector<std::size_t>& cubes);

struct PressureRow {
  std::size_t cube_id = 0;
  double t = 0.0;
  double lhs = 0.0;
  double rhs_near = 0.0;
  double rhs_far = 0.0;
  double ratio = 0.0;
};

struct PressureEstimateReport {
  std::vector<PressureRow> rows;
  double max_ratio = 0.0;
  std::string to_csv() const;
};

/// (log <x>)^{3/2} with <x> = (1 + x^2)^{1/2}.
double log_bracket_factor(double x);

/// Per-cube check of the pressure estimate over the interior cubes of cover_n
/// (a refined cover), integrating in time over the samples with t_k <= t.
PressureEstimateReport pressure_estimate_check(const std::vector<GridField>& u, const std::vector<GridField>& p,
                                               const CubeCover& cover_n, double q, double t);

}  // namespace nswlab
