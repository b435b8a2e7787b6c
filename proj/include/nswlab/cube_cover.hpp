#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <vector>

#include "nswlab/vec3.hpp"

namespace nswlab {

/// Axis-aligned cube. Cover members have a power-of-two side and half-integer
/// (or integer) centers, so every coordinate is an exact binary64 value.
struct Cube {
  Vec3 center{0.0, 0.0, 0.0};
  double side = 1.0;
  /// Shell S_n the cube belongs to; empty for synthetic cubes and for the
  /// merged core cube Q_{n-1} of a refined cover.
  std::optional<int> shell;

  double volume() const { return side * side * side; }
  double lo(int axis) const { return center[axis] - 0.5 * side; }
  double hi(int axis) const { return center[axis] + 0.5 * side; }
  bool same_geometry(const Cube& other) const { return center == other.center && side == other.side; }
};

enum class CoverKind { full, refined };

class CubeCover {
 public:
  CubeCover() = default;
  CubeCover(CoverKind kind, int n_max, int refinement, std::vector<Cube> cubes);

  CoverKind kind() const { return kind_; }
  int n_max() const { return n_max_; }
  /// Refinement level n for a refined cover, 0 for the full cover.
  int refinement() const { return refinement_; }
  /// Half-length of the covered box Q_{n_max} = [-2^{n_max+1}, 2^{n_max+1}]^3.
  double box_half() const;

  const std::vector<Cube>& cubes() const { return cubes_; }
  std::size_t size() const { return cubes_.size(); }
  const Cube& operator[](std::size_t i) const { return cubes_[i]; }
  auto begin() const { return cubes_.begin(); }
  auto end() const { return cubes_.end(); }

  std::optional<std::size_t> index_of(const Cube& q) const;

 private:
  CoverKind kind_ = CoverKind::full;
  int n_max_ = 0;
  int refinement_ = 0;
  std::vector<Cube> cubes_;
};

/// Cover of Q_{n_max}: 64 unit cubes in S_0 and 56 cubes of side 2^n in each S_n.
/// Cubes are ordered by (shell, center) lexicographically.
CubeCover build_cover(int n_max);

/// C_n: the single core cube Q_{n-1} (side 2^{n+1}) followed by every cube of
/// the full cover lying in a shell S_k with k >= n.
CubeCover build_refined_cover(const CubeCover& cover, int n);

enum class Dilation { star, double_star };

/// Concentric cube with side 4/3 (star) or 5/3 (double star) of the original.
Cube dilate(const Cube& q, Dilation which);

/// Cover cubes meeting q** in a set of positive volume (q itself included).
std::vector<std::size_t> neighbor_indices(const CubeCover& cover, const Cube& q);
std::vector<Cube> neighbors(const CubeCover& cover, const Cube& q);

/// Index of the cover cube containing x. Among cubes whose closure contains x
/// the one with the lexicographically smallest center wins.
std::size_t containing_cube(const CubeCover& cover, const Vec3& x);

/// True when q** lies inside Q_{n_max-1}, i.e. the outermost shell acts as a buffer
/// between the cube's neighborhood and the box boundary.
bool is_interior(const CubeCover& cover, const Cube& q);
std::vector<std::size_t> interior_indices(const CubeCover& cover);

struct RatioRange {
  double min = 0.0;
  double max = 0.0;
  std::size_t samples = 0;
};

struct PropertyReport {
  bool partition_ok = false;       // pairwise disjoint interiors, all inside the box
  bool volume_ok = false;          // integer volume sum equals (2^{n_max+2})^3
  bool shell_counts_ok = false;    // 64 in S_0, 56 in every S_n
  bool cumulative_affine = false;  // cumulative count = 64 + 56 n
  std::vector<int> cubes_per_shell;
  std::vector<int> cumulative_counts;
  RatioRange side_over_distance;        // (i) cubes outside S_0
  RatioRange adjacent_volume_ratio;     // (ii) |Q'|/|Q| over touching pairs
  RatioRange center_distance_ratio;     // (iii) dist(x_Q, x_Q')/|Q|^{1/3} for |Q'| < |Q|
  std::vector<int> smaller_cube_counts; // (iv) per shell m >= 1
  double log_count_bound = 0.0;         // max over m of count / log|Q|
  double log_count_slope = 0.0;         // least-squares slope of count vs log|Q|
  std::size_t max_neighbor_count = 0;   // sup over cubes of |neighbors(Q)|
};

PropertyReport verify_cover_properties(const CubeCover& cover);

/// Line format: `shell cx cy cz side`, every number scaled by 2 so that all
/// values are integers; the core cube of a refined cover has shell -1.
void write_cover(std::ostream& out, const CubeCover& cover);
CubeCover read_cover(std::istream& in);

}  // namespace nswlab
