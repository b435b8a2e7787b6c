#pragma once

#include <cstddef>
#include <iosfwd>
#include <string>
#include <vector>

#include "nswlab/cube_cover.hpp"
#include "nswlab/grid_field.hpp"

namespace nswlab {

/// Z_r(x0, t0) = B_r(x0) x (t0 - r^2, t0).
struct ParabolicCylinder {
  Vec3 x0{0.0, 0.0, 0.0};
  double t0 = 0.0;
  double r = 1.0;

  double t_lo() const { return t0 - r * r; }
  bool contains(const Vec3& x, double t) const;
};

struct CylinderValue {
  double eps3 = 0.0;      // (1/r^2) int_Z (|u|^3 + |p - p_Q|^{3/2})
  double u_part = 0.0;
  double p_part = 0.0;
  std::vector<double> p_mean;  // p_Q(s) per sample, Q the cube of side 2r about x0
};

/// Spatial integrals per sample are integrated in time as the piecewise linear
/// interpolant over the window, so stacked windows add up exactly.
CylinderValue cylinder_quantity(const std::vector<GridField>& u, const std::vector<GridField>& p,
                                const ParabolicCylinder& z);

/// sigma^2 = 1 / (1 + delta/4).
double sigma_sq(double delta);

struct CylinderResult {
  ParabolicCylinder z;
  double eps3 = 0.0;
  bool pass = false;
  double sup_u = 0.0;   // max |u| over grid points of Z_{sigma r}
  double ratio = 0.0;   // sup_u r / eps
  bool outlier = false;
};

struct RegionMask {
  std::vector<CylinderResult> cylinders;
  double eps_star = 0.05;
  double delta = 1.0;
  double sigma = 0.0;
  double c_star = 1.0;
  double tau = 0.0;
  double c0 = 0.0;       // sup-norm constant the outliers are judged against
  std::size_t passed = 0;
  std::size_t outliers = 0;

  bool all_pass() const { return passed == cylinders.size(); }
};

/// Cylinders centered on the cube centers of `cover` with r = side/2, one per
/// sample time t0 with t0 - r^2 >= first time, keeping balls inside the field box.
std::vector<ParabolicCylinder> cover_cylinders(const CubeCover& cover, const std::vector<GridField>& u,
                                               double max_side = 0.0);

/// eps^3 per cylinder and pass = eps^3 < eps_star. c0_hist <= 0 uses the median
/// ratio of the passing cylinders; outliers have ratio > 10 c0.
RegionMask scan(const std::vector<GridField>& u, const std::vector<GridField>& p,
                const std::vector<ParabolicCylinder>& cylinders, double eps_star, double delta,
                double c0_hist = 0.0);

/// Same cylinder values judged against a different threshold.
RegionMask rethreshold(const RegionMask& mask, double eps_star);

struct RegionBand {
  int n = 0;
  double z_radius = 0.0;  // sigma sqrt(c_star) 2^n
  double z_t_lo = 0.0;    // (1 - sigma^2) c_star 2^{2n}
  double z_t_hi = 0.0;    // c_star 2^{2n}
  double p_t_lo = 0.0;    // (1 - sigma^2) c_star 2^{2n}
  double p_t_hi = 0.0;    // 4 (1 - sigma^2) c_star 2^{2n}
};

struct AnalyticRegion {
  double delta = 0.0;
  double c_star = 1.0;
  int n2 = 0;
  int n_last = 0;
  double sigma_sq = 0.0;
  double sigma = 0.0;
  double tau = 0.0;
  std::vector<RegionBand> bands;
  bool abut = false;          // upper(P_n) == lower(P_{n+1}) bit for bit
  bool nested = false;        // P_n inside Z_n for every band
  double nest_margin = 0.0;   // min over bands of sigma^2 c 2^{2n} - sup_{P_n} |x|^2, relative
  std::size_t lattice_points = 0;
  std::size_t covered = 0;
  double coverage = 0.0;

  /// Index of a band whose P_n holds (|x|, t), or -1.
  int band_of(double radius, double t) const;
  bool in_region(double radius, double t) const;
};

/// Builds sigma, tau, the Z_n and P_n bands for n = n2..n_last and checks
/// {t >= max(tau, delta |x|^2)} against the union of the P_n on a lattice of
/// lattice^3 points x by lattice times, up to the top of the last band.
AnalyticRegion eventual_region(double delta, double c_star, int n2, int n_last = -1, int lattice = 17);

struct RegionCheck {
  std::size_t points = 0;     // lattice points in the analytic region
  std::size_t covered = 0;    // of those, inside some passing cylinder
  double coverage = 1.0;
  std::vector<std::size_t> violations;  // indices into the lattice
};

/// The lattice is the set of cylinder tops (x0, t0) of the scan.
RegionCheck region_check(const RegionMask& mask, const AnalyticRegion& region);

std::string mask_csv(const RegionMask& mask);
std::string region_summary_json(const RegionMask& mask, const AnalyticRegion& region, const RegionCheck& check);

/// Binary PPM of the z = z0 plane at time t over [-L, L]^2: green passing,
/// red failing, grey no cylinder; analytic region pixels are brightened.
void write_slice_ppm(std::ostream& out, const RegionMask& mask, const AnalyticRegion& region, double L, double z0,
                     double t, int pixels = 128);

}  // namespace nswlab
