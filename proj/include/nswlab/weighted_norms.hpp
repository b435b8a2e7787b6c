#pragma once

#include <cstddef>
#include <limits>
#include <string>
#include <vector>

#include "nswlab/cube_cover.hpp"
#include "nswlab/grid_field.hpp"

namespace nswlab {

enum class NormFamily { m_c, m_cn, herz };

struct NormSpec {
  NormFamily family = NormFamily::m_c;
  double p = 2.0;
  double q = 2.0;
  int n = 1;                 // m_cn refinement level
  double s = -1.0;           // herz weight exponent
  double q_outer = std::numeric_limits<double>::infinity();
  bool homogeneous = false;
  int k_lo = 0, k_hi = 1;
};

void validate(const NormSpec& spec);

struct NormResult {
  double value = 0.0;
  std::size_t argmax = 0;
  /// |Q|^{-q/3} int_Q |f|^p for every cube, in cover order.
  std::vector<double> per_cube;
};

NormResult m_norm(const GridField& f, const CubeCover& cover, double p, double q);
/// Same with |f|^p precomputed on f's grid.
NormResult m_norm_density(const GridField& f, const CubeCover& cover, const std::vector<double>& density, double p,
                          double q);
NormResult cn_norm(const GridField& f, const CubeCover& cover, int n, double q);

/// Integrals of a density over the radial shells {r_{i-1} <= |x| < r_i}, r_{-1} = 0,
/// with 8^3 subcell sampling on cells cut by a sphere. Every r_i must fit in the box.
std::vector<double> radial_shell_integrals(const GridField& f, const std::vector<double>& density,
                                           const std::vector<double>& radii);

/// (sum_k (2^{ks} ||f||_{L^p(A_k)})^q)^{1/q}, sup for q = inf. In the
/// non-homogeneous form A_0 is the unit ball and k starts at 0.
double herz_norm(const GridField& f, double s, double p, double q, bool homogeneous, int k_lo, int k_hi);
double herz_norm_density(const GridField& f, const std::vector<double>& density, double s, double p, double q,
                         bool homogeneous, int k_lo, int k_hi);

struct RingProfile {
  std::vector<double> radii;   // R_k = 2^k
  std::vector<double> values;  // E(R_k) / R_k^2
};
RingProfile ring_profile(const GridField& f, int k_max);

struct EquivalenceReport {
  int n_max = 0;
  double tail_threshold = 512.0;
  double m_norm = 0.0;         // M^{2,2} over the full cover
  double m_tail = 0.0;         // same sup restricted to |Q| >= tail_threshold
  std::vector<double> cn;      // ||f||_{C_n}, n = 1..n_max
  RingProfile ring;            // k = 1..n_max+1
  double herz = 0.0;           // non-homogeneous K^{-1}_{2,inf} over k = 0..n_max+1
  double ratio_m_herz = 0.0;
  double ring_over_cn_max = 0.0;  // max_n E(2^{n+1}) 2^{-2(n+1)} / ||f||^2_{C_n}
};

EquivalenceReport equivalence_report(const GridField& f, int n_max, double tail_threshold = 512.0);
std::string to_json(const EquivalenceReport& r);

struct L2Approximation {
  GridField g;
  double g_l2 = 0.0;
  double distance_mc = 0.0;
  std::vector<double> distance_cn;  // n = 1..n_max
  int n_max = 0;
};

/// Indicator of B_R convolved with an isotropic Gaussian of standard deviation
/// `width`, as a function of |x|; the plain indicator for width 0.
double mollified_ball(double r, double R, double width);

/// Smooth, solenoidal, finite-energy approximation of f: multiply by the
/// mollified indicator of B_R, then re-project.
L2Approximation l2_approximation(const GridField& f, double R, double width);

/// Largest cover whose box fits inside the field box.
int largest_cover_level(const GridField& f);

}  // namespace nswlab
