#include "nswlab/weighted_norms.hpp"

#include <algorithm>
#include <cmath>
#include <json.hpp>

#include "nswlab/error.hpp"
#include "nswlab/field_lab.hpp"
#include "nswlab/spectral.hpp"

namespace nswlab {

void validate(const NormSpec& spec) {
  require(spec.p >= 1.0 && std::isfinite(spec.p), ErrorKind::invalid_argument, "p must lie in [1, inf)");
  require(spec.q >= 0.0, ErrorKind::invalid_argument, "q must be >= 0");
  if (spec.family == NormFamily::herz) {
    require(std::isfinite(spec.s), ErrorKind::invalid_argument, "herz weight must be finite");
    require(spec.q_outer > 0.0, ErrorKind::invalid_argument, "herz outer exponent must be positive");
    require(spec.k_hi >= spec.k_lo, ErrorKind::invalid_argument, "empty k range");
  }
}

namespace {

void check_cover_fits(const GridField& f, const CubeCover& cover) {
  require(cover.box_half() <= f.L() * (1.0 + 1e-12), ErrorKind::domain_mismatch,
          "cover box [-" + std::to_string(cover.box_half()) + ", " + std::to_string(cover.box_half()) +
              "]^3 exceeds field box of half-length " + std::to_string(f.L()));
}

NormResult sup_of(std::vector<double> per_cube, double p) {
  NormResult r;
  r.per_cube = std::move(per_cube);
  double best = -1.0;
  for (std::size_t i = 0; i < r.per_cube.size(); ++i)
    if (r.per_cube[i] > best) {
      best = r.per_cube[i];
      r.argmax = i;
    }
  r.value = best > 0.0 ? std::pow(best, 1.0 / p) : 0.0;
  return r;
}

}  // namespace

NormResult m_norm_density(const GridField& f, const CubeCover& cover, const std::vector<double>& density, double p,
                          double q) {
  require(p >= 1.0, ErrorKind::invalid_argument, "p must be >= 1");
  require(q >= 0.0, ErrorKind::invalid_argument, "q must be >= 0");
  check_cover_fits(f, cover);
  std::vector<double> per(cover.size());
  const long n = static_cast<long>(cover.size());
#pragma omp parallel for schedule(dynamic)
  for (long i = 0; i < n; ++i) {
    const Cube& Q = cover[static_cast<std::size_t>(i)];
    per[static_cast<std::size_t>(i)] = std::pow(Q.volume(), -q / 3.0) * cube_integral_density(f, Q, density);
  }
  return sup_of(std::move(per), p);
}

NormResult m_norm(const GridField& f, const CubeCover& cover, double p, double q) {
  check_cover_fits(f, cover);
  return m_norm_density(f, cover, power_density(f, p), p, q);
}

NormResult cn_norm(const GridField& f, const CubeCover& cover, int n, double q) {
  return m_norm(f, build_refined_cover(cover, n), 2.0, q);
}

std::vector<double> radial_shell_integrals(const GridField& f, const std::vector<double>& density,
                                           const std::vector<double>& radii) {
  require(!radii.empty() && std::is_sorted(radii.begin(), radii.end()), ErrorKind::invalid_argument,
          "radii must be a non-empty increasing list");
  require(radii.back() <= f.L() * (1.0 + 1e-12), ErrorKind::domain_mismatch, "ball exceeds the field box");
  const int N = f.N();
  const double h = f.h();
  const double hd = 0.5 * std::sqrt(3.0) * h;
  const double rmax = radii.back();
  const std::size_t m = radii.size();
  auto shell_of = [&](double r) {
    return static_cast<std::size_t>(std::upper_bound(radii.begin(), radii.end(), r) - radii.begin());
  };
  std::vector<std::vector<double>> partial(static_cast<std::size_t>(N), std::vector<double>(m + 1, 0.0));
  constexpr int sub = 8;
#pragma omp parallel for schedule(static)
  for (int i = 0; i < N; ++i) {
    auto& acc = partial[static_cast<std::size_t>(i)];
    const double x = f.coord(i);
    for (int j = 0; j < N; ++j) {
      const double y = f.coord(j);
      for (int k = 0; k < N; ++k) {
        const double z = f.coord(k);
        const double r = std::sqrt(x * x + y * y + z * z);
        if (r - hd >= rmax) continue;
        const double v = density[f.index(i, j, k)];
        const std::size_t a = shell_of(std::max(0.0, r - hd)), b = shell_of(r + hd);
        if (a == b) {
          acc[a] += v;
          continue;
        }
        for (int p = 0; p < sub; ++p)
          for (int q = 0; q < sub; ++q)
            for (int e = 0; e < sub; ++e) {
              const double sx = x + ((p + 0.5) / sub - 0.5) * h;
              const double sy = y + ((q + 0.5) / sub - 0.5) * h;
              const double sz = z + ((e + 0.5) / sub - 0.5) * h;
              acc[shell_of(std::sqrt(sx * sx + sy * sy + sz * sz))] += v / (sub * sub * sub);
            }
      }
    }
  }
  std::vector<double> out(m, 0.0);
  for (const auto& acc : partial)
    for (std::size_t s = 0; s < m; ++s) out[s] += acc[s];
  for (double& v : out) v *= h * h * h;
  return out;
}

double herz_norm_density(const GridField& f, const std::vector<double>& density, double s, double p, double q,
                         bool homogeneous, int k_lo, int k_hi) {
  require(k_hi >= k_lo, ErrorKind::invalid_argument, "empty k range");
  require(p >= 1.0 && q > 0.0, ErrorKind::invalid_argument, "herz exponents out of range");
  if (!homogeneous) require(k_lo >= 0, ErrorKind::invalid_argument, "non-homogeneous herz starts at k = 0");
  if (homogeneous && k_lo < 1)
    require(std::ldexp(1.0, k_lo - 1) >= f.h(), ErrorKind::resolution_error,
            "annulus A_" + std::to_string(k_lo) + " is below grid resolution");
  std::vector<double> radii;
  if (!homogeneous && k_lo == 0) {
    for (int k = 0; k <= k_hi; ++k) radii.push_back(std::ldexp(1.0, k));
  } else {
    for (int k = k_lo - 1; k <= k_hi; ++k) radii.push_back(std::ldexp(1.0, k));
  }
  const auto shells = radial_shell_integrals(f, density, radii);
  // shells[0] is B_{radii[0]}; shell i >= 1 is A_{k} with 2^k = radii[i].
  double agg = 0.0;
  for (int k = k_lo; k <= k_hi; ++k) {
    const std::size_t idx = (!homogeneous && k_lo == 0) ? static_cast<std::size_t>(k) : static_cast<std::size_t>(k - k_lo + 1);
    const double term = std::pow(2.0, k * s) * std::pow(std::max(0.0, shells[idx]), 1.0 / p);
    if (std::isinf(q))
      agg = std::max(agg, term);
    else
      agg += std::pow(term, q);
  }
  return std::isinf(q) ? agg : std::pow(agg, 1.0 / q);
}

double herz_norm(const GridField& f, double s, double p, double q, bool homogeneous, int k_lo, int k_hi) {
  require(k_hi >= k_lo, ErrorKind::invalid_argument, "empty k range");
  return herz_norm_density(f, power_density(f, p), s, p, q, homogeneous, k_lo, k_hi);
}

RingProfile ring_profile(const GridField& f, int k_max) {
  require(k_max >= 1, ErrorKind::invalid_argument, "ring profile needs k_max >= 1");
  RingProfile rp;
  for (int k = 1; k <= k_max; ++k) rp.radii.push_back(std::ldexp(1.0, k));
  const auto shells = radial_shell_integrals(f, f.magnitude_sq(), rp.radii);
  double e = 0.0;
  for (std::size_t i = 0; i < shells.size(); ++i) {
    e += shells[i];
    rp.values.push_back(e / (rp.radii[i] * rp.radii[i]));
  }
  return rp;
}

double mollified_ball(double r, double R, double width) {
  if (width == 0.0) return r < R ? 1.0 : 0.0;
  const double a = (R - r) / (std::sqrt(2.0) * width), b = (R + r) / (std::sqrt(2.0) * width);
  double v = 0.5 * (std::erf(a) + std::erf(b));
  if (r > 1e-12 * width) {
    v -= width / (r * std::sqrt(2.0 * M_PI)) * (std::exp(-a * a) - std::exp(-b * b));
  } else {
    v -= std::sqrt(2.0 / M_PI) * (R / width) * std::exp(-b * b);
  }
  return std::clamp(v, 0.0, 1.0);
}

int largest_cover_level(const GridField& f) {
  int n = 0;
  while (std::ldexp(1.0, n + 2) <= f.L() * (1.0 + 1e-12)) ++n;
  return n;
}

EquivalenceReport equivalence_report(const GridField& f, int n_max, double tail_threshold) {
  const CubeCover cover = build_cover(n_max);
  check_cover_fits(f, cover);
  EquivalenceReport rep;
  rep.n_max = n_max;
  rep.tail_threshold = tail_threshold;
  const auto dens = f.magnitude_sq();
  std::vector<double> integral(cover.size());
  const long nc = static_cast<long>(cover.size());
#pragma omp parallel for schedule(dynamic)
  for (long i = 0; i < nc; ++i)
    integral[static_cast<std::size_t>(i)] = cube_integral_density(f, cover[static_cast<std::size_t>(i)], dens);

  double sup_all = 0.0, sup_tail = 0.0;
  for (std::size_t i = 0; i < cover.size(); ++i) {
    const double v = integral[i] / std::pow(cover[i].volume(), 2.0 / 3.0);
    sup_all = std::max(sup_all, v);
    if (cover[i].volume() >= tail_threshold) sup_tail = std::max(sup_tail, v);
  }
  rep.m_norm = std::sqrt(sup_all);
  rep.m_tail = std::sqrt(sup_tail);

  // C_n from the same cube integrals: the core cube is the union of shells below n.
  for (int n = 1; n <= n_max; ++n) {
    double core = 0.0, sup = 0.0;
    for (std::size_t i = 0; i < cover.size(); ++i) {
      if (*cover[i].shell < n)
        core += integral[i];
      else
        sup = std::max(sup, integral[i] / std::pow(cover[i].volume(), 2.0 / 3.0));
    }
    sup = std::max(sup, core / std::ldexp(1.0, 2 * (n + 1)));
    rep.cn.push_back(std::sqrt(sup));
  }

  rep.ring = ring_profile(f, n_max + 1);
  rep.herz = herz_norm_density(f, dens, -1.0, 2.0, std::numeric_limits<double>::infinity(), false, 0, n_max + 1);
  rep.ratio_m_herz = rep.herz > 0.0 ? rep.m_norm / rep.herz : 0.0;
  for (int n = 1; n <= n_max; ++n) {
    const double c2 = rep.cn[n - 1] * rep.cn[n - 1];
    if (c2 > 0.0) rep.ring_over_cn_max = std::max(rep.ring_over_cn_max, rep.ring.values[n] / c2);
  }
  return rep;
}

std::string to_json(const EquivalenceReport& r) {
  nlohmann::json j;
  j["n_max"] = r.n_max;
  j["tail_threshold"] = r.tail_threshold;
  j["m_norm"] = r.m_norm;
  j["m_tail"] = r.m_tail;
  j["cn"] = r.cn;
  j["ring_radii"] = r.ring.radii;
  j["ring_values"] = r.ring.values;
  j["herz"] = r.herz;
  j["ratio_m_herz"] = r.ratio_m_herz;
  j["ring_over_cn_max"] = r.ring_over_cn_max;
  return j.dump(2);
}

L2Approximation l2_approximation(const GridField& f, double R, double width) {
  require(f.ncomp() == 3, ErrorKind::invalid_argument, "approximation needs a velocity field");
  require(R > 0.0 && R < 0.5 * f.L(), ErrorKind::invalid_argument, "R must lie in (0, L/2)");
  require(width >= 0.0, ErrorKind::invalid_argument, "mollification width must be >= 0");
  const int n_max = largest_cover_level(f);
  require(n_max >= 1, ErrorKind::invalid_argument, "field box too small for a cover");
  const int N = f.N();
  GridField cut(f.L(), N, 3, f.time());
  for (int i = 0; i < N; ++i)
    for (int j = 0; j < N; ++j)
      for (int k = 0; k < N; ++k) {
        const double chi = mollified_ball(norm(Vec3{f.coord(i), f.coord(j), f.coord(k)}), R, width);
        if (chi == 0.0) continue;
        for (int c = 0; c < 3; ++c) cut.at(c, i, j, k) = chi * f.at(c, i, j, k);
      }
  L2Approximation res;
  res.g = leray_project(cut);
  res.n_max = n_max;
  double e = 0.0;
  for (double v : res.g.data()) e += v * v;
  res.g_l2 = std::sqrt(e * std::pow(f.h(), 3));
  GridField d = f;
  for (std::size_t p = 0; p < d.data().size(); ++p) d.data()[p] -= res.g.data()[p];
  const auto dens = d.magnitude_sq();
  const CubeCover cover = build_cover(n_max);
  res.distance_mc = m_norm_density(d, cover, dens, 2.0, 2.0).value;
  for (int n = 1; n <= n_max; ++n)
    res.distance_cn.push_back(m_norm_density(d, build_refined_cover(cover, n), dens, 2.0, 2.0).value);
  return res;
}

}  // namespace nswlab
