#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <complex>
#include <random>

#include "nswlab/error.hpp"
#include "nswlab/field_lab.hpp"
#include "nswlab/pressure.hpp"

using namespace nswlab;

namespace {

GridField fill(double L, int N, auto&& fn) {
  GridField f(L, N, 3);
  for (int i = 0; i < N; ++i)
    for (int j = 0; j < N; ++j)
      for (int k = 0; k < N; ++k) {
        const Vec3 v = fn(Vec3{f.coord(i), f.coord(j), f.coord(k)});
        for (int c = 0; c < 3; ++c) f.at(c, i, j, k) = v[c];
      }
  return f;
}

GridField random_field(double L, int N, unsigned seed) {
  GridField f(L, N, 3);
  std::mt19937 rng(seed);
  std::uniform_real_distribution<double> d(-1.0, 1.0);
  for (double& v : f.data()) v = d(rng);
  return f;
}

GridField bump_swirl(double L, int N, double r0) {
  const Vec3 a{0.3, -0.5, 0.81};
  return fill(L, N, [&](const Vec3& x) {
    const double s = dot(x, x) / (r0 * r0);
    return s >= 1.0 ? Vec3{0, 0, 0} : std::pow(1.0 - s, 4) * cross(a, x);
  });
}

// Pressure by a naive O(N^6) DFT with the same mode conventions.
std::vector<double> naive_pressure(const GridField& u) {
  using C = std::complex<double>;
  const int N = u.N();
  const std::size_t n3 = u.points();
  const double kf = M_PI / u.L();
  auto mode = [&](int i) { return i < N / 2 ? i : i - N; };
  std::vector<C> ph(N);
  for (int i = 0; i < N; ++i) ph[i] = std::polar(1.0, -2.0 * M_PI * i / N);
  std::vector<C> acc(n3, 0.0);
  for (int a = 0; a < 3; ++a)
    for (int b = 0; b < 3; ++b)
      for (int p = 0; p < N; ++p)
        for (int q = 0; q < N; ++q)
          for (int r = 0; r < N; ++r) {
            if (p == N / 2 || q == N / 2 || r == N / 2) continue;
            const double kv[3] = {kf * mode(p), kf * mode(q), kf * mode(r)};
            const double k2 = kv[0] * kv[0] + kv[1] * kv[1] + kv[2] * kv[2];
            if (k2 == 0) continue;
            C s = 0.0;
            for (int i = 0; i < N; ++i)
              for (int j = 0; j < N; ++j)
                for (int k = 0; k < N; ++k) {
                  const std::size_t g = u.index(i, j, k);
                  s += u.component(a)[g] * u.component(b)[g] * ph[(p * i) % N] * ph[(q * j) % N] * ph[(r * k) % N];
                }
            acc[u.index(p, q, r)] -= kv[a] * kv[b] / k2 * s;
          }
  std::vector<double> out(n3);
  for (int i = 0; i < N; ++i)
    for (int j = 0; j < N; ++j)
      for (int k = 0; k < N; ++k) {
        C s = 0.0;
        for (int p = 0; p < N; ++p)
          for (int q = 0; q < N; ++q)
            for (int r = 0; r < N; ++r)
              s += acc[u.index(p, q, r)] * std::conj(ph[(p * i) % N] * ph[(q * j) % N] * ph[(r * k) % N]);
        out[u.index(i, j, k)] = s.real() / static_cast<double>(n3);
      }
  return out;
}

}  // namespace

TEST_CASE("kernel is symmetric, traceless and homogeneous") {
  const Vec3 y{0.3, -1.2, 0.7};
  const Mat3 K = kernel(y), K2 = kernel(2.0 * y);
  CHECK(std::fabs(K[0][0] + K[1][1] + K[2][2]) <= 1e-15);
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) {
      CHECK(K[i][j] == K[j][i]);
      CHECK(K2[i][j] == doctest::Approx(K[i][j] / 8).epsilon(1e-14));
    }
  CHECK(kernel(Vec3{1, 0, 0})[0][0] == doctest::Approx(1.0 / (2.0 * M_PI)).epsilon(1e-15));
  CHECK(kernel(Vec3{1, 0, 0})[1][1] == doctest::Approx(-1.0 / (4.0 * M_PI)).epsilon(1e-15));
  CHECK_THROWS_AS(kernel(Vec3{0, 0, 0}), Error);
}

TEST_CASE("global pressure of a shear pair") {
  // u = (cos ky, cos kx, 0) gives p = sin kx sin ky.
  const double L = 2.0;
  const double k = 2 * M_PI / L;
  const auto u = fill(L, 16, [&](const Vec3& x) { return Vec3{std::cos(k * x[1]), std::cos(k * x[0]), 0.0}; });
  const auto p = global_pressure(u);
  double err = 0.0;
  for (int i = 0; i < 16; ++i)
    for (int j = 0; j < 16; ++j)
      for (int l = 0; l < 16; ++l)
        err = std::max(err, std::fabs(p.at(0, i, j, l) - std::sin(k * u.coord(i)) * std::sin(k * u.coord(j))));
  CHECK(err <= 1e-12);
}

TEST_CASE("global pressure matches a naive transform") {
  const auto u = random_field(1.5, 8, 7);
  const auto p = global_pressure(u);
  const auto ref = naive_pressure(u);
  double err = 0.0, mag = 0.0;
  for (std::size_t i = 0; i < ref.size(); ++i) {
    err = std::max(err, std::fabs(p.data()[i] - ref[i]));
    mag = std::max(mag, std::fabs(ref[i]));
  }
  CHECK(err <= 1e-12 * mag);
}

TEST_CASE("global pressure is quadratic and vanishes for zero data") {
  const auto u = random_field(1.0, 16, 3);
  const auto p1 = global_pressure(u), p3 = global_pressure(scaled(u, 3.0));
  for (std::size_t i = 0; i < p1.points(); ++i) CHECK(p3.data()[i] == doctest::Approx(9 * p1.data()[i]).epsilon(1e-11));
  const auto z = global_pressure(GridField(1.0, 16, 3));
  CHECK(z.max_abs() == 0.0);
  CHECK_THROWS_AS(global_pressure(GridField(1.0, 8, 1)), Error);
}

TEST_CASE("pv convolution matches a direct sum") {
  const auto u = random_field(2.0, 8, 11);
  const IndexBox src{{1, 0, 2}, {7, 5, 8}};
  const IndexBox tgt{{0, 3, 1}, {4, 8, 6}};
  std::vector<double> w(src.size());
  for (std::size_t i = 0; i < w.size(); ++i) w[i] = 0.25 + 0.5 * std::sin(0.3 * i) * std::sin(0.3 * i);
  const auto got = pv_convolve(u, src, w, tgt);
  const double h3 = std::pow(u.h(), 3);
  double err = 0.0, mag = 0.0;
  for (int i = tgt.lo[0]; i < tgt.hi[0]; ++i)
    for (int j = tgt.lo[1]; j < tgt.hi[1]; ++j)
      for (int k = tgt.lo[2]; k < tgt.hi[2]; ++k) {
        const Vec3 x{u.coord(i), u.coord(j), u.coord(k)};
        double s = 0.0;
        for (int a = src.lo[0]; a < src.hi[0]; ++a)
          for (int b = src.lo[1]; b < src.hi[1]; ++b)
            for (int c = src.lo[2]; c < src.hi[2]; ++c) {
              if (a == i && b == j && c == k) continue;
              const Mat3 K = kernel(x - Vec3{u.coord(a), u.coord(b), u.coord(c)});
              const std::size_t g = u.index(a, b, c);
              for (int m = 0; m < 3; ++m)
                for (int n = 0; n < 3; ++n) s += w[src.local(a, b, c)] * K[m][n] * u.component(m)[g] * u.component(n)[g];
            }
        s *= h3;
        err = std::max(err, std::fabs(got[tgt.local(i, j, k)] - s));
        mag = std::max(mag, std::fabs(s));
      }
  CHECK(mag > 0.0);
  CHECK(err <= 1e-12 * mag);
}

TEST_CASE("index boxes") {
  GridField f(2.0, 8, 1);  // h = 0.5, centers at -1.75 .. 1.75
  const IndexBox b = points_in(f, Cube{{0, 0, 0}, 1.5});
  for (int a = 0; a < 3; ++a) {
    CHECK(b.lo[a] == 2);
    CHECK(b.hi[a] == 6);
  }
  const IndexBox t = cells_touching(f, Cube{{0, 0, 0}, 1.5});
  CHECK(t.lo[0] == 2);
  CHECK(t.hi[0] == 6);
  const IndexBox closed = points_in(f, Cube{{0.25, 0.25, 0.25}, 1.0});  // faces on centers
  CHECK(closed.extent(0) == 3);
  CHECK(bounding(IndexBox{}, b).size() == b.size());
}

TEST_CASE("local expansion reproduces the pressure of a windowed mode") {
  // mode windowed well inside the box so that periodic images stay small
  const auto u = windowed_beltrami(8.0, 128, 3, 0.225, 0.425);
  const auto p = global_pressure(u);
  const auto cover = build_cover(1);
  const auto cubes = interior_indices(cover);
  REQUIRE(cubes.size() == 8);
  const LocalPressure lp(u, star_window(u, cover, cubes));
  for (auto c : cubes) {
    const auto r = pressure_expansion_residual(p, lp, cover[c]);
    CHECK(r.scale > 0.0);
    CHECK(r.residual <= 0.05);
  }
}

TEST_CASE("near and far parts add up to the expansion") {
  const auto u = bump_swirl(4.0, 32, 1.5);
  const Cube q{{0.5, 0.5, 0.5}, 1.0};
  const LocalPressure lp(u);
  const auto ks = lp.split(q);
  const auto g = lp.apply(q);
  const auto tot = ks.total();
  REQUIRE(tot.size() == g.size());
  for (std::size_t i = 0; i < g.size(); ++i) CHECK(tot[i] == doctest::Approx(g[i]).epsilon(1e-12));
  CHECK(ks.tail_bound == 0.0);

  const auto single = local_pressure(u, q);
  for (std::size_t i = 0; i < g.size(); ++i) CHECK(single.total()[i] == doctest::Approx(g[i]).epsilon(1e-10));
}

TEST_CASE("far part vanishes for data supported in the double star") {
  // support radius 1.2 inside Q** = [-5/3, 5/3]^3
  const auto u = bump_swirl(4.0, 64, 1.2);
  const Cube q{{0, 0, 0}, 2.0};
  const auto ks = LocalPressure(u).split(q);
  double fmax = 0.0, nmax = 0.0;
  for (std::size_t i = 0; i < ks.far.size(); ++i) {
    fmax = std::max(fmax, std::fabs(ks.far[i]));
    nmax = std::max(nmax, std::fabs(ks.near[i]));
  }
  CHECK(nmax > 0.0);
  CHECK(fmax <= 1e-12 * nmax);
}

TEST_CASE("residual is zero for zero data") {
  const GridField u(4.0, 16, 3);
  const GridField p(4.0, 16, 1);
  CHECK(pressure_expansion_residual(p, u, Cube{{0.5, 0.5, 0.5}, 1.0}) == 0.0);
  CHECK_THROWS_AS(pressure_expansion_residual(p, u, Cube{{3.5, 0.5, 0.5}, 1.0}), Error);
}

TEST_CASE("log bracket factor") {
  CHECK(log_bracket_factor(0.0) == 0.0);
  CHECK(log_bracket_factor(1.0) == doctest::Approx(std::pow(std::log(std::sqrt(2.0)), 1.5)).epsilon(1e-15));
}

TEST_CASE("pressure estimate check on a short series") {
  std::vector<GridField> us, ps;
  for (int s = 0; s < 3; ++s) {
    auto u = scaled(windowed_beltrami(8.0, 32, 2), 1.0 - 0.1 * s);
    u.set_time(0.05 * s);
    auto p = global_pressure(u);
    us.push_back(u);
    ps.push_back(p);
  }
  const auto cover = build_refined_cover(build_cover(2), 1);
  const auto rep = pressure_estimate_check(us, ps, cover, 1.0, 0.1);
  REQUIRE(!rep.rows.empty());
  for (const auto& r : rep.rows) {
    CHECK(r.lhs > 0.0);
    CHECK(r.rhs_near > 0.0);
    CHECK(r.rhs_far > 0.0);
    CHECK(std::isfinite(r.ratio));
    CHECK(r.t == doctest::Approx(0.1));
  }
  CHECK(rep.to_csv().rfind("cube_id,t,lhs,rhs_near,rhs_far,ratio\n", 0) == 0);

  CHECK_THROWS_AS(pressure_estimate_check(us, {}, cover, 1.0, 0.1), Error);
  CHECK_THROWS_AS(pressure_estimate_check(us, ps, build_cover(2), 1.0, 0.1), Error);
  std::swap(us[0], us[1]);
  std::swap(ps[0], ps[1]);
  CHECK_THROWS_AS(pressure_estimate_check(us, ps, cover, 1.0, 0.1), Error);
}
