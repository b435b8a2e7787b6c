#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "nswlab/cube_cover.hpp"

namespace nswlab {

/// Cell-centered samples on the box [-L, L]^3. Point (i,j,k) sits at
/// x = -L + (i + 1/2) h along each axis, h = 2L/N. Components are stored
/// one after another, each as an N^3 block with k fastest.
class GridField {
 public:
  GridField() = default;
  GridField(double L, int N, int ncomp, std::optional<double> time = std::nullopt);

  double L() const { return L_; }
  int N() const { return N_; }
  int ncomp() const { return ncomp_; }
  double h() const { return 2.0 * L_ / N_; }
  std::size_t points() const { return static_cast<std::size_t>(N_) * N_ * N_; }
  std::optional<double> time() const { return time_; }
  void set_time(std::optional<double> t) { time_ = t; }

  double coord(int i) const { return -L_ + (i + 0.5) * h(); }
  std::size_t index(int i, int j, int k) const {
    return (static_cast<std::size_t>(i) * N_ + j) * N_ + k;
  }

  double* component(int c) { return data_.data() + c * points(); }
  const double* component(int c) const { return data_.data() + c * points(); }
  double& at(int c, int i, int j, int k) { return data_[c * points() + index(i, j, k)]; }
  double at(int c, int i, int j, int k) const { return data_[c * points() + index(i, j, k)]; }

  std::vector<double>& data() { return data_; }
  const std::vector<double>& data() const { return data_; }

  bool same_grid(const GridField& o) const { return L_ == o.L_ && N_ == o.N_; }
  /// Pointwise |f|^2 summed over components.
  std::vector<double> magnitude_sq() const;
  double max_abs() const;

 private:
  double L_ = 1.0;
  int N_ = 0;
  int ncomp_ = 0;
  std::optional<double> time_;
  std::vector<double> data_;
};

GridField scaled(const GridField& f, double c);

/// Per-axis overlap lengths of grid cells with [lo, hi]; cells outside get 0.
/// `first` is the index of the first nonzero entry.
struct AxisWeights {
  int first = 0;
  std::vector<double> w;
};
AxisWeights axis_weights(double L, int N, double lo, double hi);

/// Cube weights w(i,j,k) = product of axis overlaps; exact for fields that are
/// constant on cells.
struct CubeWeights {
  AxisWeights x, y, z;
};
CubeWeights cube_weights(const GridField& f, const Cube& q);
bool cube_inside_box(const GridField& f, const Cube& q);

/// Sum of w * s over the weighted cells, with s an N^3 scalar array.
double weighted_sum(const GridField& f, const CubeWeights& cw, const double* s);

/// Volume fraction of each cell covered by the ball B_R(c), from 8^3 subcell
/// samples on cells cut by the sphere. Only cells in the bounding box are listed.
struct BallWeights {
  std::vector<std::size_t> cells;
  std::vector<double> frac;
};
BallWeights ball_weights(double L, int N, const Vec3& c, double R);

void write_nswf(std::ostream& out, const GridField& f);
GridField read_nswf(std::istream& in);
void save_nswf(const std::string& path, const GridField& f);
GridField load_nswf(const std::string& path);

}  // namespace nswlab
