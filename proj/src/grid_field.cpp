#include "nswlab/grid_field.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <istream>
#include <limits>
#include <ostream>

#include "nswlab/error.hpp"

namespace nswlab {

static_assert(std::endian::native == std::endian::little, "NSWF I/O assumes a little-endian host");

GridField::GridField(double L, int N, int ncomp, std::optional<double> time)
    : L_(L), N_(N), ncomp_(ncomp), time_(time) {
  require(L > 0 && std::isfinite(L), ErrorKind::invalid_argument, "box half-length must be positive");
  require(N >= 2 && std::has_single_bit(static_cast<unsigned>(N)), ErrorKind::invalid_argument,
          "N must be a power of two");
  require(ncomp == 1 || ncomp == 3, ErrorKind::invalid_argument, "fields have 1 or 3 components");
  data_.assign(static_cast<std::size_t>(ncomp) * points(), 0.0);
}

std::vector<double> GridField::magnitude_sq() const {
  const std::size_t n = points();
  std::vector<double> out(n, 0.0);
  for (int c = 0; c < ncomp_; ++c) {
    const double* p = component(c);
    for (std::size_t i = 0; i < n; ++i) out[i] += p[i] * p[i];
  }
  return out;
}

double GridField::max_abs() const {
  double m = 0.0;
  for (double v : data_) m = std::max(m, std::fabs(v));
  return m;
}

GridField scaled(const GridField& f, double c) {
  GridField g = f;
  for (double& v : g.data()) v *= c;
  return g;
}

AxisWeights axis_weights(double L, int N, double lo, double hi) {
  const double h = 2.0 * L / N;
  AxisWeights aw;
  lo = std::max(lo, -L);
  hi = std::min(hi, L);
  if (hi <= lo) return aw;
  int i0 = static_cast<int>(std::floor((lo + L) / h));
  int i1 = static_cast<int>(std::ceil((hi + L) / h));
  i0 = std::clamp(i0, 0, N - 1);
  i1 = std::clamp(i1, i0 + 1, N);
  aw.first = i0;
  for (int i = i0; i < i1; ++i) {
    const double a = -L + i * h, b = a + h;
    aw.w.push_back(std::max(0.0, std::min(b, hi) - std::max(a, lo)));
  }
  while (!aw.w.empty() && aw.w.back() == 0.0) aw.w.pop_back();
  while (!aw.w.empty() && aw.w.front() == 0.0) {
    aw.w.erase(aw.w.begin());
    ++aw.first;
  }
  return aw;
}

bool cube_inside_box(const GridField& f, const Cube& q) {
  const double tol = 1e-12 * f.L();
  for (int a = 0; a < 3; ++a)
    if (q.lo(a) < -f.L() - tol || q.hi(a) > f.L() + tol) return false;
  return true;
}

CubeWeights cube_weights(const GridField& f, const Cube& q) {
  require(cube_inside_box(f, q), ErrorKind::domain_mismatch, "cube extends beyond the field box");
  return CubeWeights{axis_weights(f.L(), f.N(), q.lo(0), q.hi(0)), axis_weights(f.L(), f.N(), q.lo(1), q.hi(1)),
                     axis_weights(f.L(), f.N(), q.lo(2), q.hi(2))};
}

double weighted_sum(const GridField& f, const CubeWeights& cw, const double* s) {
  const int N = f.N();
  double total = 0.0;
  for (std::size_t a = 0; a < cw.x.w.size(); ++a) {
    const int i = cw.x.first + static_cast<int>(a);
    double plane = 0.0;
    for (std::size_t b = 0; b < cw.y.w.size(); ++b) {
      const int j = cw.y.first + static_cast<int>(b);
      const double* row = s + (static_cast<std::size_t>(i) * N + j) * N + cw.z.first;
      double line = 0.0;
      for (std::size_t c = 0; c < cw.z.w.size(); ++c) line += cw.z.w[c] * row[c];
      plane += cw.y.w[b] * line;
    }
    total += cw.x.w[a] * plane;
  }
  return total;
}

BallWeights ball_weights(double L, int N, const Vec3& c, double R) {
  const double h = 2.0 * L / N;
  BallWeights bw;
  int lo[3], hi[3];
  for (int a = 0; a < 3; ++a) {
    lo[a] = std::max(0, static_cast<int>(std::floor((c[a] - R + L) / h)));
    hi[a] = std::min(N - 1, static_cast<int>(std::floor((c[a] + R + L) / h)));
  }
  const double half_diag = 0.5 * std::sqrt(3.0) * h;
  constexpr int sub = 8;
  for (int i = lo[0]; i <= hi[0]; ++i)
    for (int j = lo[1]; j <= hi[1]; ++j)
      for (int k = lo[2]; k <= hi[2]; ++k) {
        const Vec3 x{-L + (i + 0.5) * h, -L + (j + 0.5) * h, -L + (k + 0.5) * h};
        const double d = norm(x - c);
        double frac;
        if (d + half_diag <= R) {
          frac = 1.0;
        } else if (d - half_diag >= R) {
          continue;
        } else {
          int inside = 0;
          for (int a = 0; a < sub; ++a)
            for (int b = 0; b < sub; ++b)
              for (int e = 0; e < sub; ++e) {
                const Vec3 y{x[0] + ((a + 0.5) / sub - 0.5) * h, x[1] + ((b + 0.5) / sub - 0.5) * h,
                             x[2] + ((e + 0.5) / sub - 0.5) * h};
                if (norm(y - c) < R) ++inside;
              }
          if (inside == 0) continue;
          frac = static_cast<double>(inside) / (sub * sub * sub);
        }
        bw.cells.push_back((static_cast<std::size_t>(i) * N + j) * N + k);
        bw.frac.push_back(frac);
      }
  return bw;
}

namespace {

constexpr char kMagic[4] = {'N', 'S', 'W', 'F'};
constexpr std::uint32_t kVersion = 1;

template <class T>
void put(std::ostream& out, T v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof v);
}

template <class T>
T get(std::istream& in) {
  T v{};
  in.read(reinterpret_cast<char*>(&v), sizeof v);
  require(static_cast<bool>(in), ErrorKind::io_error, "truncated NSWF header");
  return v;
}

}  // namespace

void write_nswf(std::ostream& out, const GridField& f) {
  out.write(kMagic, 4);
  put<std::uint32_t>(out, kVersion);
  put<std::uint32_t>(out, static_cast<std::uint32_t>(f.N()));
  put<std::uint32_t>(out, static_cast<std::uint32_t>(f.ncomp()));
  put<double>(out, f.L());
  put<double>(out, f.time() ? *f.time() : std::numeric_limits<double>::quiet_NaN());
  out.write(reinterpret_cast<const char*>(f.data().data()),
            static_cast<std::streamsize>(f.data().size() * sizeof(double)));
  require(static_cast<bool>(out), ErrorKind::io_error, "failed writing NSWF data");
}

GridField read_nswf(std::istream& in) {
  char magic[4];
  in.read(magic, 4);
  require(static_cast<bool>(in) && std::memcmp(magic, kMagic, 4) == 0, ErrorKind::io_error, "not an NSWF file");
  const auto version = get<std::uint32_t>(in);
  require(version == kVersion, ErrorKind::io_error,
          "unsupported NSWF version " + std::to_string(version) + " (expected 1)");
  const auto N = get<std::uint32_t>(in);
  const auto nc = get<std::uint32_t>(in);
  const double L = get<double>(in);
  const double t = get<double>(in);
  require(N >= 2 && N <= 4096 && (nc == 1 || nc == 3), ErrorKind::io_error, "bad NSWF dimensions");
  GridField f(L, static_cast<int>(N), static_cast<int>(nc),
              std::isnan(t) ? std::nullopt : std::optional<double>(t));
  in.read(reinterpret_cast<char*>(f.data().data()), static_cast<std::streamsize>(f.data().size() * sizeof(double)));
  require(static_cast<bool>(in), ErrorKind::io_error, "truncated NSWF data");
  for (double v : f.data()) require(std::isfinite(v), ErrorKind::io_error, "non-finite value in NSWF data");
  return f;
}

void save_nswf(const std::string& path, const GridField& f) {
  std::ofstream out(path, std::ios::binary);
  require(static_cast<bool>(out), ErrorKind::io_error, "cannot open " + path + " for writing");
  write_nswf(out, f);
}

GridField load_nswf(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  require(static_cast<bool>(in), ErrorKind::io_error, "cannot open " + path);
  return read_nswf(in);
}

}  // namespace nswlab
