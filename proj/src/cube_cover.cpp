#include "nswlab/cube_cover.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>
#include <string>

#include "nswlab/error.hpp"

namespace nswlab {

namespace {

using i64 = std::int64_t;

// Cover cubes live on the unit lattice: integer lower corner, integer side.
struct LatticeCube {
  std::array<i64, 3> lo;
  i64 side;
};

LatticeCube to_lattice(const Cube& q) {
  LatticeCube c{};
  c.side = static_cast<i64>(q.side);
  for (int a = 0; a < 3; ++a) c.lo[a] = static_cast<i64>(std::llround(q.center[a] - 0.5 * q.side));
  return c;
}

bool on_lattice(const Cube& q) {
  if (q.side < 1.0 || q.side != std::floor(q.side)) return false;
  for (int a = 0; a < 3; ++a) {
    const double lo = q.center[a] - 0.5 * q.side;
    if (lo != std::floor(lo)) return false;
  }
  return true;
}

bool center_less(const Cube& a, const Cube& b) { return a.center < b.center; }

// Positive-length overlap of open intervals (a0,a1) and (b0,b1).
bool overlaps(i64 a0, i64 a1, i64 b0, i64 b1) { return std::max(a0, b0) < std::min(a1, b1); }
// Closed intervals touch or overlap.
bool touches(i64 a0, i64 a1, i64 b0, i64 b1) { return std::max(a0, b0) <= std::min(a1, b1); }

bool closures_intersect(const LatticeCube& a, const LatticeCube& b) {
  for (int k = 0; k < 3; ++k)
    if (!touches(a.lo[k], a.lo[k] + a.side, b.lo[k], b.lo[k] + b.side)) return false;
  return true;
}

bool interiors_intersect(const LatticeCube& a, const LatticeCube& b) {
  for (int k = 0; k < 3; ++k)
    if (!overlaps(a.lo[k], a.lo[k] + a.side, b.lo[k], b.lo[k] + b.side)) return false;
  return true;
}

// q** meets q' in positive volume. Work in units of 1/12 so that the 5/3
// dilation of a lattice cube has integer faces: 12 x_c -+ 10 s.
bool double_star_meets(const Cube& q, const LatticeCube& other) {
  const i64 s = static_cast<i64>(std::llround(q.side));
  for (int k = 0; k < 3; ++k) {
    const i64 c12 = static_cast<i64>(std::llround(q.center[k] * 12.0));
    const i64 lo = c12 - 10 * s;
    const i64 hi = c12 + 10 * s;
    if (!overlaps(lo, hi, 12 * other.lo[k], 12 * (other.lo[k] + other.side))) return false;
  }
  return true;
}

std::vector<Cube> shell_cubes(int n) {
  std::vector<Cube> out;
  if (n == 0) {
    out.reserve(64);
    for (int i = 0; i < 4; ++i)
      for (int j = 0; j < 4; ++j)
        for (int k = 0; k < 4; ++k)
          out.push_back(Cube{{-1.5 + i, -1.5 + j, -1.5 + k}, 1.0, 0});
  } else {
    const double s = std::ldexp(1.0, n);
    out.reserve(56);
    for (int i = 0; i < 4; ++i)
      for (int j = 0; j < 4; ++j)
        for (int k = 0; k < 4; ++k) {
          const bool inner = (i == 1 || i == 2) && (j == 1 || j == 2) && (k == 1 || k == 2);
          if (inner) continue;
          out.push_back(Cube{{s * (-1.5 + i), s * (-1.5 + j), s * (-1.5 + k)}, s, n});
        }
  }
  std::sort(out.begin(), out.end(), center_less);
  return out;
}

int shell_of_point(double r_inf) {
  int n = 0;
  while (r_inf > std::ldexp(1.0, n + 1)) ++n;
  return n;
}

void update(RatioRange& r, double v) {
  if (r.samples == 0) {
    r.min = r.max = v;
  } else {
    r.min = std::min(r.min, v);
    r.max = std::max(r.max, v);
  }
  ++r.samples;
}

}  // namespace

const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::invalid_argument: return "invalid-argument";
    case ErrorKind::domain_mismatch: return "domain-mismatch";
    case ErrorKind::not_found: return "not-found";
    case ErrorKind::out_of_domain: return "out-of-domain";
    case ErrorKind::singular_point: return "singular-point";
    case ErrorKind::resolution_error: return "resolution-error";
    case ErrorKind::io_error: return "io-error";
    case ErrorKind::runtime_abort: return "runtime-abort";
  }
  return "unknown";
}

CubeCover::CubeCover(CoverKind kind, int n_max, int refinement, std::vector<Cube> cubes)
    : kind_(kind), n_max_(n_max), refinement_(refinement), cubes_(std::move(cubes)) {}

double CubeCover::box_half() const { return std::ldexp(1.0, n_max_ + 1); }

std::optional<std::size_t> CubeCover::index_of(const Cube& q) const {
  for (std::size_t i = 0; i < cubes_.size(); ++i)
    if (cubes_[i].same_geometry(q)) return i;
  return std::nullopt;
}

CubeCover build_cover(int n_max) {
  require(n_max >= 1, ErrorKind::invalid_argument, "build_cover needs n_max >= 1, got " + std::to_string(n_max));
  require(n_max <= 40, ErrorKind::invalid_argument, "n_max too large for exact lattice arithmetic");
  std::vector<Cube> cubes;
  cubes.reserve(64 + 56 * static_cast<std::size_t>(n_max));
  for (int n = 0; n <= n_max; ++n) {
    auto shell = shell_cubes(n);
    cubes.insert(cubes.end(), shell.begin(), shell.end());
  }
  return CubeCover(CoverKind::full, n_max, 0, std::move(cubes));
}

CubeCover build_refined_cover(const CubeCover& cover, int n) {
  require(cover.kind() == CoverKind::full, ErrorKind::invalid_argument, "refinement needs a full cover");
  require(n >= 1 && n <= cover.n_max(), ErrorKind::invalid_argument,
          "refinement level " + std::to_string(n) + " outside [1, " + std::to_string(cover.n_max()) + "]");
  std::vector<Cube> cubes;
  cubes.push_back(Cube{{0.0, 0.0, 0.0}, std::ldexp(1.0, n + 1), std::nullopt});
  for (const auto& q : cover)
    if (q.shell && *q.shell >= n) cubes.push_back(q);
  return CubeCover(CoverKind::refined, cover.n_max(), n, std::move(cubes));
}

Cube dilate(const Cube& q, Dilation which) {
  const double factor = which == Dilation::star ? 4.0 / 3.0 : 5.0 / 3.0;
  return Cube{q.center, q.side * factor, std::nullopt};
}

std::vector<std::size_t> neighbor_indices(const CubeCover& cover, const Cube& q) {
  require(cover.index_of(q).has_value(), ErrorKind::not_found, "cube is not a member of the cover");
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < cover.size(); ++i)
    if (double_star_meets(q, to_lattice(cover[i]))) out.push_back(i);
  return out;
}

std::vector<Cube> neighbors(const CubeCover& cover, const Cube& q) {
  std::vector<Cube> out;
  for (auto i : neighbor_indices(cover, q)) out.push_back(cover[i]);
  return out;
}

std::size_t containing_cube(const CubeCover& cover, const Vec3& x) {
  const double half = cover.box_half();
  for (int a = 0; a < 3; ++a)
    require(std::isfinite(x[a]) && std::fabs(x[a]) <= half, ErrorKind::out_of_domain,
            "point outside the covered box");
  const int shell = shell_of_point(norm_inf(x));
  std::optional<std::size_t> best;
  for (std::size_t i = 0; i < cover.size(); ++i) {
    const Cube& q = cover[i];
    // Only cubes from neighboring shells can contain x; the core cube always qualifies.
    if (q.shell && std::abs(*q.shell - shell) > 1) continue;
    bool inside = true;
    for (int a = 0; a < 3 && inside; ++a) inside = x[a] >= q.lo(a) && x[a] <= q.hi(a);
    if (!inside) continue;
    if (!best || center_less(q, cover[*best])) best = i;
  }
  require(best.has_value(), ErrorKind::out_of_domain, "no cover cube contains the point");
  return *best;
}

bool is_interior(const CubeCover& cover, const Cube& q) {
  const double limit = std::ldexp(1.0, cover.n_max());
  const double half = q.side * 5.0 / 6.0;
  for (int a = 0; a < 3; ++a)
    if (std::fabs(q.center[a]) + half > limit) return false;
  return true;
}

std::vector<std::size_t> interior_indices(const CubeCover& cover) {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < cover.size(); ++i)
    if (is_interior(cover, cover[i])) out.push_back(i);
  return out;
}

PropertyReport verify_cover_properties(const CubeCover& cover) {
  require(cover.kind() == CoverKind::full, ErrorKind::invalid_argument, "property check needs a full cover");
  PropertyReport rep;
  const int n_max = cover.n_max();
  const std::size_t m = cover.size();
  std::vector<LatticeCube> lat(m);
  for (std::size_t i = 0; i < m; ++i) lat[i] = to_lattice(cover[i]);

  // Partition and exact volume.
  const i64 half = i64{1} << (n_max + 1);
  bool inside = true;
  i64 volume = 0;
  for (std::size_t i = 0; i < m; ++i) {
    if (!on_lattice(cover[i])) inside = false;
    for (int a = 0; a < 3; ++a)
      if (lat[i].lo[a] < -half || lat[i].lo[a] + lat[i].side > half) inside = false;
    volume += lat[i].side * lat[i].side * lat[i].side;
  }
  bool disjoint = true;
  for (std::size_t i = 0; i < m && disjoint; ++i)
    for (std::size_t j = i + 1; j < m; ++j)
      if (interiors_intersect(lat[i], lat[j])) {
        disjoint = false;
        break;
      }
  rep.partition_ok = inside && disjoint;
  const i64 edge = 2 * half;
  rep.volume_ok = volume == edge * edge * edge;

  rep.cubes_per_shell.assign(static_cast<std::size_t>(n_max) + 1, 0);
  for (const auto& q : cover) rep.cubes_per_shell[static_cast<std::size_t>(*q.shell)]++;
  rep.shell_counts_ok = rep.cubes_per_shell[0] == 64;
  for (int n = 1; n <= n_max; ++n) rep.shell_counts_ok = rep.shell_counts_ok && rep.cubes_per_shell[n] == 56;
  int running = 0;
  rep.cumulative_affine = true;
  for (int n = 0; n <= n_max; ++n) {
    running += rep.cubes_per_shell[n];
    rep.cumulative_counts.push_back(running);
    if (running != 64 + 56 * n) rep.cumulative_affine = false;
  }

  for (std::size_t i = 0; i < m; ++i) {
    const Cube& q = cover[i];
    if (*q.shell >= 1) update(rep.side_over_distance, q.side / norm(q.center));
    for (std::size_t j = 0; j < m; ++j) {
      if (i == j) continue;
      const Cube& o = cover[j];
      if (closures_intersect(lat[i], lat[j])) update(rep.adjacent_volume_ratio, o.volume() / q.volume());
      if (o.volume() < q.volume()) update(rep.center_distance_ratio, norm(o.center - q.center) / q.side);
    }
  }

  // (iv): count of strictly smaller cubes against log|Q|, one sample per shell.
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int samples = 0;
  for (int shell = 1; shell <= n_max; ++shell) {
    int count = 0;
    const double vol = std::ldexp(1.0, 3 * shell);
    for (const auto& o : cover)
      if (o.volume() < vol) ++count;
    rep.smaller_cube_counts.push_back(count);
    const double lg = std::log(vol);
    rep.log_count_bound = std::max(rep.log_count_bound, count / lg);
    sx += lg;
    sy += count;
    sxx += lg * lg;
    sxy += lg * count;
    ++samples;
  }
  if (samples >= 2) rep.log_count_slope = (samples * sxy - sx * sy) / (samples * sxx - sx * sx);

  for (const auto& q : cover) rep.max_neighbor_count = std::max(rep.max_neighbor_count, neighbor_indices(cover, q).size());
  return rep;
}

void write_cover(std::ostream& out, const CubeCover& cover) {
  out << "# nswlab-cover v1 kind=" << (cover.kind() == CoverKind::full ? "full" : "refined")
      << " n_max=" << cover.n_max() << " refinement=" << cover.refinement() << " scale=2\n";
  for (const auto& q : cover) {
    out << (q.shell ? *q.shell : -1);
    for (int a = 0; a < 3; ++a) out << ' ' << std::llround(2.0 * q.center[a]);
    out << ' ' << std::llround(2.0 * q.side) << '\n';
  }
}

CubeCover read_cover(std::istream& in) {
  std::string line;
  require(static_cast<bool>(std::getline(in, line)), ErrorKind::io_error, "empty cover file");
  CoverKind kind = CoverKind::full;
  int n_max = -1, refinement = 0;
  {
    std::istringstream hs(line);
    std::string tok;
    hs >> tok >> tok;
    require(tok == "nswlab-cover", ErrorKind::io_error, "missing cover header");
    while (hs >> tok) {
      const auto eq = tok.find('=');
      if (eq == std::string::npos) continue;
      const auto key = tok.substr(0, eq), val = tok.substr(eq + 1);
      if (key == "kind") kind = val == "refined" ? CoverKind::refined : CoverKind::full;
      if (key == "n_max") n_max = std::stoi(val);
      if (key == "refinement") refinement = std::stoi(val);
    }
  }
  require(n_max >= 1, ErrorKind::io_error, "cover header lacks n_max");
  std::vector<Cube> cubes;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ls(line);
    long long shell, cx, cy, cz, side;
    require(static_cast<bool>(ls >> shell >> cx >> cy >> cz >> side), ErrorKind::io_error, "bad cover line: " + line);
    Cube q{{0.5 * cx, 0.5 * cy, 0.5 * cz}, 0.5 * side, std::nullopt};
    if (shell >= 0) q.shell = static_cast<int>(shell);
    cubes.push_back(q);
  }
  return CubeCover(kind, n_max, refinement, std::move(cubes));
}

}  // namespace nswlab
