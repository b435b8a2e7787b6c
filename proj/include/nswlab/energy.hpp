#pragma once

#include <array>
#include <cstddef>
#include <string>
#include <vector>

#include "nswlab/cube_cover.hpp"
#include "nswlab/grid_field.hpp"
#include "nswlab/pressure.hpp"

namespace nswlab {

/// Radial-in-|.|_inf profile: 1 on [0, 1/2], 0 from 2/3 on, order-7 smoothstep between.
double cutoff_profile(double tau);
double cutoff_profile_d1(double tau);
double cutoff_profile_d2(double tau);

/// phi_Q(x) = prod_a eta(|x_a - c_a| / side) sampled on the full grid. grad and lap
/// are spectral derivatives of the samples, so discrete integration by parts
/// against band-limited fields is exact.
struct CutoffField {
  Cube q;
  IndexBox box;
  std::vector<double> phi;
  std::array<std::vector<double>, 3> grad;
  std::vector<double> lap;
  /// max over multi-indices of order l = 1, 2 of sup |d^l phi| |Q|^{l/3}, sampled
  /// at 8 points per cell along each axis.
  std::array<double, 2> deriv_bound{0.0, 0.0};

  GridField field(const GridField& grid) const;
};

CutoffField make_cutoff(const Cube& q, const GridField& grid);

/// |u|^2 and |grad u|^2 (spectral) for every sample of a series.
struct SeriesDensities {
  std::vector<double> times;
  std::vector<std::vector<double>> usq;
  std::vector<std::vector<double>> grad_sq;
};
SeriesDensities series_densities(const std::vector<GridField>& u);

enum class LeiMode { full, stokes };

struct LeiResult {
  double residual = 0.0;      // rhs - lhs
  double lhs = 0.0;           // int |u(t)|^2 phi + 2 int int |grad u|^2 phi
  double rhs = 0.0;
  double energy_scale = 0.0;  // int |u(0)|^2 phi
  double flux_scale = 0.0;    // int int |u|^3 |grad phi|
};

/// RHS - LHS of the local energy inequality for a time-independent cutoff over
/// the whole series. Stokes mode drops the transport and pressure flux, and
/// accepts an empty pressure series.
LeiResult lei_residual(const std::vector<GridField>& u, const std::vector<GridField>& p, const CutoffField& phi,
                       LeiMode mode);
LeiResult lei_residual(const std::vector<GridField>& u, const std::vector<GridField>& p, const SeriesDensities& dens,
                       const CutoffField& phi, LeiMode mode);

struct DiagnosticSeries {
  int n = 0;
  double q = 2.0;
  std::vector<double> times;
  std::vector<double> alpha;
  std::vector<double> beta;
  std::vector<std::size_t> alpha_argmax;
  std::vector<std::size_t> beta_argmax;
  /// Per-cube |Q|^{-q/3} int_Q |u|^2 and |Q|^{-q/3} int_0^t int_Q |grad u|^2, [sample][cube].
  std::vector<std::vector<double>> alpha_cube;
  std::vector<std::vector<double>> beta_cube;

  std::string to_csv() const;
};

/// alpha_n and beta_n over the cubes of C_n built from `cover`.
DiagnosticSeries track_series(const std::vector<GridField>& u, const SeriesDensities& dens, const CubeCover& cover,
                              int n, double q);

struct CubicReport {
  double lhs = 0.0;      // |Q|^{-1/3} int_Q |u|^3
  double group_a = 0.0;  // |Q|^{q - 4/3} avg^3
  double group_b = 0.0;  // eps int_Q |grad u|^2
  double group_c = 0.0;  // |Q|^{q/2 - 5/6} avg^{3/2}
  double c_eps = 0.0;    // lhs / (a + b + c)
  double gn_first = 0.0;   // |Q|^{-1/3} (int |grad u|^2)^{3/4} (int |u|^2)^{3/4}
  double gn_second = 0.0;  // |Q|^{-5/6} (int |u|^2)^{3/2}
  double c_gn = 0.0;       // lhs / (gn_first + gn_second)
};

/// avg = |Q|^{-q/3} int_Q |u|^2.
CubicReport cubic_estimate_check(const GridField& u, const Cube& q_cube, double q, double eps);
CubicReport cubic_estimate_check(const GridField& u, const std::vector<double>& grad_sq, const Cube& q_cube, double q,
                                 double eps);
/// Time-integrated form over a series (groups integrated in time, then compared).
CubicReport cubic_estimate_series(const std::vector<GridField>& u, const SeriesDensities& dens, const Cube& q_cube,
                                  double q, double eps);

/// a / (2 a b1 + b2 (2a)^m); +inf when b1 = b2 = 0.
double gronwall_time(double a, double b1, double b2, double m);

struct BarrierRun {
  double max_f = 0.0;
  double error_estimate = 0.0;  // |f_h - f_{h/2}| at the end point
};
/// Integrates f' = b1 f + b2 f^m, f(0) = a on [0, t_end] with classical RK4.
BarrierRun integrate_barrier(double a, double b1, double b2, double m, double t_end, int steps);

/// q = 2: c1 / (2^{-2n} + |u0|^4); q = 1: c_star 2^{2n} / (1 + |u0|^4).
double existence_time(double u0_norm_sq, int n, int q, double c1, double c_star);

/// (log <x>)^2 / x^2.
double log_ratio_factor(double x);

struct AprioriResult {
  bool pass = false;
  double bound = 0.0;  // 2 c0 |u0|^2
  double used = 0.0;   // sup_{t <= T} alpha + beta(T)
  double margin = 0.0;
};
AprioriResult apriori_bound_check(const DiagnosticSeries& series, double u0_norm_sq, int n, double c0, double T);

/// sup over cubes of C_n with Q* inside the box of |Q|^{-2/3} int |u0|^2 phi_Q,
/// divided by |u0|^2_{C_n}.
double cutoff_normalization(const GridField& u0, const CubeCover& cover, int n);

struct Calibration {
  double c0 = 1.0;
  double c1 = 1.0;
  bool c1_lower_bound = true;  // no failure observed within the simulated horizon
  double c_star = 1.0;
  double eps_star = 0.05;
  double lei_tol = 0.0;        // relative to the energy scale
  double cubic_c_max = 0.0;
  double scan_c0 = 0.0;
  std::vector<int> resolutions;

  std::string to_json() const;
  static Calibration from_json(const std::string& text);
};

}  // namespace nswlab
