#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <limits>

#include "nswlab/error.hpp"
#include "nswlab/field_lab.hpp"
#include "nswlab/spectral.hpp"
#include "nswlab/weighted_norms.hpp"

using namespace nswlab;

namespace {

const double kInf = std::numeric_limits<double>::infinity();
const double kUnitCubeInvR = 1.5 * std::log(2.0 + std::sqrt(3.0)) - M_PI / 4.0;

GridField indicator_of(double L, int N, auto&& inside) {
  GridField f(L, N, 1);
  for (int i = 0; i < N; ++i)
    for (int j = 0; j < N; ++j)
      for (int k = 0; k < N; ++k)
        if (inside(Vec3{f.coord(i), f.coord(j), f.coord(k)})) f.at(0, i, j, k) = 1.0;
  return f;
}

// Swirl with a compactly supported radial bump: solenoidal, support in B_r0.
GridField bump_swirl(double L, int N, double r0) {
  GridField f(L, N, 3);
  const Vec3 a{0.3, -0.5, 0.81};
  for (int i = 0; i < N; ++i)
    for (int j = 0; j < N; ++j)
      for (int k = 0; k < N; ++k) {
        const Vec3 x{f.coord(i), f.coord(j), f.coord(k)};
        const double s = dot(x, x) / (r0 * r0);
        if (s >= 1.0) continue;
        const Vec3 v = std::pow(1.0 - s, 4) * cross(a, x);
        for (int c = 0; c < 3; ++c) f.at(c, i, j, k) = v[c];
      }
  return f;
}

}  // namespace

TEST_CASE("zero field has zero norms") {
  GridField z(8.0, 32, 3);
  const auto c = build_cover(2);
  CHECK(m_norm(z, c, 2.0, 2.0).value == 0.0);
  for (int n = 1; n <= 2; ++n) CHECK(cn_norm(z, c, n, 2.0).value == 0.0);
  CHECK(herz_norm(z, -1.0, 2.0, kInf, false, 0, 3) == 0.0);
}

TEST_CASE("indicator of one unit cube") {
  const auto f = indicator_of(4.0, 32, [](const Vec3& x) {
    return x[0] > 0 && x[0] < 1 && x[1] > 0 && x[1] < 1 && x[2] > 0 && x[2] < 1;
  });
  const auto r = m_norm(f, build_cover(1), 2.0, 2.0);
  CHECK(r.value == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(build_cover(1)[r.argmax].same_geometry(Cube{{0.5, 0.5, 0.5}, 1.0}));
}

TEST_CASE("cover larger than field is a domain mismatch") {
  GridField f(4.0, 16, 1);
  CHECK_THROWS_AS(m_norm(f, build_cover(2), 2.0, 2.0), Error);
}

TEST_CASE("singular radial field: sup attained on a unit cube at the origin") {
  // Corner cubes of S_0 at the origin give int_{[0,1]^3} |x|^{-1}; every other
  // cover cube gives less.
  const double expected = std::sqrt(kUnitCubeInvR);
  double prev = 0.0;
  for (int N : {64, 128}) {
    const auto f = radial_power_field(8.0, N, -0.5);
    const double v = m_norm(f, build_cover(2), 2.0, 2.0).value;
    CHECK(v == doctest::Approx(expected).epsilon(0.03));
    if (prev > 0.0) CHECK(v == doctest::Approx(prev).epsilon(0.02));
    prev = v;
  }
}

TEST_CASE("homogeneity and monotonicity") {
  GeneratorSpec s;
  s.kind = GeneratorKind::log_damped_radial;
  const auto f = generate(s, 16.0, 32);
  const auto c = build_cover(2);
  const double base = m_norm(f, c, 2.0, 2.0).value;
  for (double k : {-3.0, 0.5, 7.0}) {
    CHECK(m_norm(scaled(f, k), c, 2.0, 2.0).value == doctest::Approx(std::fabs(k) * base).epsilon(1e-13));
    CHECK(cn_norm(scaled(f, k), c, 1, 2.0).value ==
          doctest::Approx(std::fabs(k) * cn_norm(f, c, 1, 2.0).value).epsilon(1e-13));
    CHECK(herz_norm(scaled(f, k), -1.0, 2.0, kInf, false, 0, 3) ==
          doctest::Approx(std::fabs(k) * herz_norm(f, -1.0, 2.0, kInf, false, 0, 3)).epsilon(1e-13));
  }
  GridField g = f;
  for (std::size_t i = 0; i < g.points(); i += 7) g.data()[i] += (g.data()[i] >= 0 ? 1.0 : -1.0);
  CHECK(m_norm(g, c, 3.0, 1.0).value >= m_norm(f, c, 3.0, 1.0).value);
  CHECK(herz_norm(g, 0.5, 2.0, 2.0, false, 0, 3) >= herz_norm(f, 0.5, 2.0, 2.0, false, 0, 3));
}

TEST_CASE("C_n norm of data supported in [-1,1]^3") {
  GeneratorSpec s;
  GridField f = generate(s, 16.0, 64);
  for (int i = 0; i < f.N(); ++i)
    for (int j = 0; j < f.N(); ++j)
      for (int k = 0; k < f.N(); ++k)
        if (norm_inf(Vec3{f.coord(i), f.coord(j), f.coord(k)}) > 1.0)
          for (int c = 0; c < 3; ++c) f.at(c, i, j, k) = 0.0;
  double l2 = 0.0;
  for (double v : f.data()) l2 += v * v;
  l2 *= std::pow(f.h(), 3);
  const auto c = build_cover(3);
  double prev = kInf;
  for (int n = 1; n <= 3; ++n) {
    const double v = cn_norm(f, c, n, 2.0).value;
    CHECK(v * v == doctest::Approx(l2 / std::ldexp(1.0, 2 * (n + 1))).epsilon(1e-12));
    CHECK(v < prev);
    prev = v;
  }
}

TEST_CASE("herz norm of the A_1 indicator") {
  const auto f = indicator_of(4.0, 128, [](const Vec3& x) {
    const double r = norm(x);
    return r >= 1.0 && r < 2.0;
  });
  CHECK(herz_norm(f, 0.0, 2.0, kInf, true, 1, 1) ==
        doctest::Approx(std::sqrt(4.0 * M_PI / 3.0 * 7.0)).epsilon(0.01));
  CHECK_THROWS_AS(herz_norm(f, 0.0, 2.0, kInf, true, 2, 1), Error);
}

TEST_CASE("herz annulus values of |x|^{-1/2}") {
  // 2^{-2k} int_{A_k} |x|^{-1} = 2^{-2k} 2 pi (2^{2k} - 2^{2k-2}) = 3 pi / 2.
  const auto f = radial_power_field(16.0, 128, -0.5);
  for (int k = 1; k <= 4; ++k)
    CHECK(herz_norm(f, -1.0, 2.0, kInf, true, k, k) == doctest::Approx(std::sqrt(1.5 * M_PI)).epsilon(0.02));
  CHECK(herz_norm(f, -1.0, 2.0, kInf, true, 1, 4) == doctest::Approx(std::sqrt(1.5 * M_PI)).epsilon(0.02));
  // Non-homogeneous: A_0 = B_1 carries 2 pi.
  CHECK(herz_norm(f, -1.0, 2.0, kInf, false, 0, 0) == doctest::Approx(std::sqrt(2 * M_PI)).epsilon(0.02));
  CHECK_THROWS_AS(herz_norm(f, -1.0, 2.0, kInf, true, -6, 1), Error);
}

TEST_CASE("ring profile of |x|^{-1/2} is 2 pi") {
  const auto f = radial_power_field(16.0, 128, -0.5);
  const auto rp = ring_profile(f, 4);
  for (std::size_t k = 1; k < rp.values.size(); ++k) CHECK(rp.values[k] == doctest::Approx(2 * M_PI).epsilon(0.03));
}

TEST_CASE("equivalence report indicators") {
  const auto compact = bump_swirl(32.0, 64, 2.0);
  const auto a = equivalence_report(compact, 4);
  CHECK(a.cn.back() == doctest::Approx(a.cn.front() / 8).epsilon(1e-9));  // support inside Q_0
  CHECK(a.ring.values.back() < 0.05 * a.ring.values.front());
  CHECK(a.m_tail < 0.1 * a.m_norm);

  GeneratorSpec s;

  const auto flat = equivalence_report(radial_power_field(32.0, 64, -0.5), 4);
  CHECK(flat.ring.values.back() == doctest::Approx(2 * M_PI).epsilon(0.05));
  CHECK(flat.cn.back() == doctest::Approx(flat.cn.front()).epsilon(0.05));
  CHECK(flat.ring_over_cn_max <= 64.0);

  s.kind = GeneratorKind::log_damped_radial;
  const auto damped = equivalence_report(generate(s, 32.0, 64), 4);
  for (std::size_t n = 1; n < damped.cn.size(); ++n) CHECK(damped.cn[n] < damped.cn[n - 1]);
  CHECK(damped.ring.values[4] < damped.ring.values[1]);
  CHECK(to_json(damped).find("ratio_m_herz") != std::string::npos);
}

TEST_CASE("cn from shared integrals equals cn on the refined cover") {
  GeneratorSpec s;
  s.kind = GeneratorKind::dss;
  const auto f = generate(s, 16.0, 32);
  const auto rep = equivalence_report(f, 3);
  const auto c = build_cover(3);
  for (int n = 1; n <= 3; ++n) CHECK(rep.cn[n - 1] == doctest::Approx(cn_norm(f, c, n, 2.0).value).epsilon(1e-12));
}

TEST_CASE("mollified ball indicator") {
  CHECK(mollified_ball(0.99, 1.0, 0.0) == 1.0);
  CHECK(mollified_ball(1.0, 1.0, 0.0) == 0.0);
  CHECK(mollified_ball(3.0, 3.0, 0.01) == doctest::Approx(0.5).epsilon(0.01));
  // Oracle: integrate the Gaussian over the ball in spherical coordinates
  // about the evaluation point's axis.
  const double R = 1.0, w = 0.4;
  for (double r : {0.0, 0.5, 1.0, 1.6}) {
    const int n = 400;
    double acc = 0.0;
    for (int a = 0; a < n; ++a) {
      const double rho = (a + 0.5) * R / n;
      for (int b = 0; b < n; ++b) {
        const double th = (b + 0.5) * M_PI / n;
        const double d2 = rho * rho + r * r - 2 * rho * r * std::cos(th);
        acc += rho * rho * std::sin(th) * std::exp(-d2 / (2 * w * w));
      }
    }
    acc *= (R / n) * (M_PI / n) * 2 * M_PI / std::pow(2 * M_PI * w * w, 1.5);
    CHECK(mollified_ball(r, R, w) == doctest::Approx(acc).epsilon(1e-4));
  }
}

TEST_CASE("l2 approximation of compactly supported data") {
  const auto f = bump_swirl(16.0, 32, 5.0);
  const auto res = l2_approximation(f, 6.0, 0.0);
  GridField resid = f;
  const auto pf = leray_project(f);
  for (std::size_t i = 0; i < resid.data().size(); ++i) resid.data()[i] -= pf.data()[i];
  const double tol = m_norm(resid, build_cover(res.n_max), 2.0, 2.0).value;
  CHECK(res.distance_mc <= tol + 1e-12);
  CHECK(res.distance_mc <= 1e-2 * m_norm(f, build_cover(res.n_max), 2.0, 2.0).value);
  CHECK(std::isfinite(res.g_l2));
  CHECK_THROWS_AS(l2_approximation(f, 8.0, 0.0), Error);
}

TEST_CASE("l2 approximation distances: ring versus non-ring data") {
  GeneratorSpec s;
  s.kind = GeneratorKind::dss;
  const auto dss = generate(s, 32.0, 64);
  double prev = kInf;
  for (double R : {2.0, 4.0, 8.0}) {
    const auto res = l2_approximation(dss, R, 0.5);
    CHECK(res.distance_mc < prev);
    CHECK(res.distance_cn.size() == static_cast<std::size_t>(res.n_max));
    prev = res.distance_mc;
  }
  s.kind = GeneratorKind::growth_radial;
  s.gamma = -0.5;
  const auto flat = generate(s, 32.0, 64);
  double lo = kInf;
  for (double R : {2.0, 4.0, 8.0}) lo = std::min(lo, l2_approximation(flat, R, 0.5).distance_mc);
  CHECK(lo > 0.3 * m_norm(flat, build_cover(4), 2.0, 2.0).value);
}
