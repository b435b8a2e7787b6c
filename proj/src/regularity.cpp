#include "nswlab/regularity.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <sstream>

#include "json.hpp"

#include "nswlab/error.hpp"

namespace nswlab {

namespace {

constexpr double kTimeTol = 1e-12;

void check_series(const std::vector<GridField>& u, const std::vector<GridField>& p) {
  require(!u.empty(), ErrorKind::invalid_argument, "empty velocity series");
  require(p.size() == u.size(), ErrorKind::invalid_argument, "pressure series length differs from velocity");
  for (std::size_t s = 0; s < u.size(); ++s) {
    require(u[s].time().has_value() && p[s].time().has_value(), ErrorKind::invalid_argument,
            "series samples need time stamps");
    require(u[s].ncomp() == 3 && p[s].ncomp() == 1 && u[s].same_grid(u[0]) && p[s].same_grid(u[0]),
            ErrorKind::domain_mismatch, "series samples on different grids");
    require(*p[s].time() == *u[s].time(), ErrorKind::invalid_argument, "velocity and pressure times differ");
    if (s > 0) require(*u[s].time() > *u[s - 1].time(), ErrorKind::invalid_argument, "times must increase");
  }
}

// Exact integral over [a, b] of the piecewise linear interpolant of g on times t.
double integrate_window(const std::vector<double>& t, const std::vector<double>& g, double a, double b) {
  double s = 0.0;
  for (std::size_t i = 0; i + 1 < t.size(); ++i) {
    const double lo = std::max(a, t[i]), hi = std::min(b, t[i + 1]);
    if (hi <= lo) continue;
    const double len = t[i + 1] - t[i];
    const double ga = g[i] + (g[i + 1] - g[i]) * (lo - t[i]) / len;
    const double gb = g[i] + (g[i + 1] - g[i]) * (hi - t[i]) / len;
    s += 0.5 * (hi - lo) * (ga + gb);
  }
  return s;
}

double median(std::vector<double> v) {
  if (v.empty()) return 0.0;
  std::sort(v.begin(), v.end());
  const std::size_t m = v.size() / 2;
  return v.size() % 2 ? v[m] : 0.5 * (v[m - 1] + v[m]);
}

void finish_mask(RegionMask& m, double c0_hist) {
  m.passed = 0;
  std::vector<double> ratios;
  for (auto& c : m.cylinders) {
    c.pass = c.eps3 < m.eps_star;
    if (c.pass) {
      ++m.passed;
      if (std::isfinite(c.ratio) && c.ratio > 0.0) ratios.push_back(c.ratio);
    }
  }
  m.c0 = c0_hist > 0.0 ? c0_hist : median(ratios);
  m.outliers = 0;
  for (auto& c : m.cylinders) {
    c.outlier = c.pass && m.c0 > 0.0 && c.ratio > 10.0 * m.c0;
    m.outliers += c.outlier;
  }
}

double sup_speed(const std::vector<GridField>& u, const ParabolicCylinder& z, double sigma) {
  const GridField& g = u[0];
  const int N = g.N();
  const double R = sigma * z.r, h = g.h(), L = g.L();
  std::vector<std::size_t> pts;
  int lo[3], hi[3];
  for (int a = 0; a < 3; ++a) {
    lo[a] = std::max(0, static_cast<int>(std::floor((z.x0[a] - R + L) / h - 0.5)));
    hi[a] = std::min(N - 1, static_cast<int>(std::ceil((z.x0[a] + R + L) / h - 0.5)));
  }
  for (int i = lo[0]; i <= hi[0]; ++i)
    for (int j = lo[1]; j <= hi[1]; ++j)
      for (int k = lo[2]; k <= hi[2]; ++k)
        if (norm(Vec3{g.coord(i), g.coord(j), g.coord(k)} - z.x0) <= R) pts.push_back(g.index(i, j, k));
  if (pts.empty()) {
    int idx[3];
    for (int a = 0; a < 3; ++a) idx[a] = std::clamp(static_cast<int>(std::floor((z.x0[a] + L) / h)), 0, N - 1);
    pts.push_back(g.index(idx[0], idx[1], idx[2]));
  }
  const double t_lo = z.t0 - sigma * sigma * z.r * z.r;
  std::vector<std::size_t> samples;
  for (std::size_t s = 0; s < u.size(); ++s) {
    const double t = *u[s].time();
    if (t >= t_lo - kTimeTol && t <= z.t0 + kTimeTol) samples.push_back(s);
  }
  if (samples.empty()) {
    std::size_t best = 0;
    for (std::size_t s = 1; s < u.size(); ++s)
      if (std::fabs(*u[s].time() - z.t0) < std::fabs(*u[best].time() - z.t0)) best = s;
    samples.push_back(best);
  }
  double m = 0.0;
  for (std::size_t s : samples)
    for (std::size_t i : pts) {
      double v = 0.0;
      for (int c = 0; c < 3; ++c) v += u[s].component(c)[i] * u[s].component(c)[i];
      m = std::max(m, v);
    }
  return std::sqrt(m);
}

}  // namespace

bool ParabolicCylinder::contains(const Vec3& x, double t) const {
  const double tol = kTimeTol * std::max(1.0, std::fabs(t0));
  return norm(x - x0) <= r * (1 + 1e-12) && t >= t_lo() - tol && t <= t0 + tol;
}

CylinderValue cylinder_quantity(const std::vector<GridField>& u, const std::vector<GridField>& p,
                                const ParabolicCylinder& z) {
  check_series(u, p);
  require(z.r > 0.0, ErrorKind::invalid_argument, "cylinder radius must be positive");
  const GridField& g = u[0];
  const Cube q{z.x0, 2.0 * z.r, std::nullopt};
  require(cube_inside_box(g, q), ErrorKind::domain_mismatch, "cylinder ball leaves the field box");
  const double t_first = *u.front().time(), t_last = *u.back().time();
  const double tol = kTimeTol * std::max(1.0, std::fabs(t_last));
  require(z.t_lo() >= t_first - tol && z.t0 <= t_last + tol, ErrorKind::domain_mismatch,
          "cylinder time window leaves the series range");
  const double a = std::max(z.t_lo(), t_first), b = std::min(z.t0, t_last);

  const BallWeights bw = ball_weights(g.L(), g.N(), z.x0, z.r);
  const CubeWeights cw = cube_weights(g, q);
  const double h3 = g.h() * g.h() * g.h();

  std::vector<double> times(u.size());
  std::vector<double> gu(u.size(), 0.0), gp(u.size(), 0.0);
  CylinderValue out;
  out.p_mean.assign(u.size(), 0.0);
  std::size_t s_lo = 0, s_hi = u.size() - 1;
  for (std::size_t s = 0; s < u.size(); ++s) {
    times[s] = *u[s].time();
    if (times[s] <= a) s_lo = s;
  }
  for (std::size_t s = u.size(); s-- > 0;)
    if (times[s] >= b) s_hi = s;
  for (std::size_t s = s_lo; s <= s_hi; ++s) {
    const double pq = weighted_sum(g, cw, p[s].component(0)) / q.volume();
    out.p_mean[s] = pq;
    double su = 0.0, sp = 0.0;
    for (std::size_t c = 0; c < bw.cells.size(); ++c) {
      const std::size_t i = bw.cells[c];
      double v = 0.0;
      for (int d = 0; d < 3; ++d) v += u[s].component(d)[i] * u[s].component(d)[i];
      su += bw.frac[c] * v * std::sqrt(v);
      const double dp = std::fabs(p[s].component(0)[i] - pq);
      sp += bw.frac[c] * dp * std::sqrt(dp);
    }
    gu[s] = su * h3;
    gp[s] = sp * h3;
  }
  const double r2 = z.r * z.r;
  out.u_part = integrate_window(times, gu, a, b) / r2;
  out.p_part = integrate_window(times, gp, a, b) / r2;
  out.eps3 = out.u_part + out.p_part;
  return out;
}

double sigma_sq(double delta) {
  require(delta > 0.0 && delta <= 1.0, ErrorKind::invalid_argument, "delta must lie in (0, 1]");
  return 1.0 / (1.0 + delta / 4.0);
}

std::vector<ParabolicCylinder> cover_cylinders(const CubeCover& cover, const std::vector<GridField>& u,
                                               double max_side) {
  require(!u.empty() && u.front().time().has_value(), ErrorKind::invalid_argument, "series needs time stamps");
  const double t_first = *u.front().time();
  std::vector<ParabolicCylinder> out;
  for (const Cube& q : cover) {
    if (max_side > 0.0 && q.side > max_side) continue;
    if (!cube_inside_box(u.front(), q)) continue;
    const double r = 0.5 * q.side;
    for (const auto& f : u) {
      const double t0 = *f.time();
      if (t0 - r * r >= t_first - kTimeTol * std::max(1.0, std::fabs(t0))) out.push_back({q.center, t0, r});
    }
  }
  return out;
}

RegionMask scan(const std::vector<GridField>& u, const std::vector<GridField>& p,
                const std::vector<ParabolicCylinder>& cylinders, double eps_star, double delta, double c0_hist) {
  require(eps_star > 0.0, ErrorKind::invalid_argument, "eps_star must be positive");
  check_series(u, p);
  RegionMask m;
  m.eps_star = eps_star;
  m.delta = delta;
  m.sigma = std::sqrt(sigma_sq(delta));
  m.cylinders.resize(cylinders.size());
  std::vector<std::string> errors(cylinders.size());
#pragma omp parallel for schedule(dynamic)
  for (std::size_t i = 0; i < cylinders.size(); ++i) {
    CylinderResult& c = m.cylinders[i];
    c.z = cylinders[i];
    try {
      c.eps3 = cylinder_quantity(u, p, c.z).eps3;
      c.sup_u = sup_speed(u, c.z, m.sigma);
    } catch (const std::exception& e) {
      errors[i] = e.what();
      continue;
    }
    const double eps = std::cbrt(c.eps3);
    c.ratio = eps > 0.0 ? c.sup_u * c.z.r / eps : (c.sup_u > 0.0 ? std::numeric_limits<double>::infinity() : 0.0);
  }
  for (const auto& e : errors)
    if (!e.empty()) fail(ErrorKind::domain_mismatch, e);
  finish_mask(m, c0_hist);
  return m;
}

RegionMask rethreshold(const RegionMask& mask, double eps_star) {
  require(eps_star > 0.0, ErrorKind::invalid_argument, "eps_star must be positive");
  RegionMask m = mask;
  m.eps_star = eps_star;
  finish_mask(m, mask.c0);
  return m;
}

int AnalyticRegion::band_of(double radius, double t) const {
  for (const auto& b : bands)
    if (t >= b.p_t_lo && t <= b.p_t_hi && delta * radius * radius <= t) return b.n;
  return -1;
}

bool AnalyticRegion::in_region(double radius, double t) const { return t >= tau && t >= delta * radius * radius; }

AnalyticRegion eventual_region(double delta, double c_star, int n2, int n_last, int lattice) {
  require(c_star > 0.0, ErrorKind::invalid_argument, "c_star must be positive");
  require(n2 >= 0, ErrorKind::invalid_argument, "N2 must be non-negative");
  if (n_last < 0) n_last = n2 + 5;
  require(n_last >= n2 && n_last <= 60, ErrorKind::invalid_argument, "band range out of bounds");
  require(lattice >= 2, ErrorKind::invalid_argument, "lattice needs at least 2 points per axis");
  AnalyticRegion r;
  r.delta = delta;
  r.c_star = c_star;
  r.n2 = n2;
  r.n_last = n_last;
  r.sigma_sq = sigma_sq(delta);
  r.sigma = std::sqrt(r.sigma_sq);
  const double a = (1.0 - r.sigma_sq) * c_star;
  r.tau = std::ldexp(a, 2 * n2);
  r.nested = true;
  r.nest_margin = std::numeric_limits<double>::infinity();
  for (int n = n2; n <= n_last; ++n) {
    RegionBand b;
    b.n = n;
    b.z_radius = r.sigma * std::sqrt(c_star) * std::ldexp(1.0, n);
    b.z_t_lo = std::ldexp(a, 2 * n);
    b.z_t_hi = std::ldexp(c_star, 2 * n);
    b.p_t_lo = std::ldexp(a, 2 * n);
    b.p_t_hi = std::ldexp(a, 2 * n + 2);
    const double z_r2 = r.sigma_sq * std::ldexp(c_star, 2 * n);
    const double p_r2 = b.p_t_hi / delta;
    const double margin = (z_r2 - p_r2) / z_r2;
    r.nest_margin = std::min(r.nest_margin, margin);
    if (b.p_t_lo < b.z_t_lo || b.p_t_hi > b.z_t_hi || margin < -1e-12) r.nested = false;
    r.bands.push_back(b);
  }
  r.abut = true;
  for (std::size_t i = 0; i + 1 < r.bands.size(); ++i)
    if (r.bands[i].p_t_hi != r.bands[i + 1].p_t_lo) r.abut = false;

  const double t_top = r.bands.back().p_t_hi;
  const double X = 1.05 * std::sqrt(t_top / delta);
  const int nt = 8 * lattice;
  for (int it = 0; it < nt; ++it) {
    const double t = it == nt - 1 ? t_top : r.tau * std::pow(t_top / r.tau, static_cast<double>(it) / (nt - 1));
    for (int i = 0; i < lattice; ++i)
      for (int j = 0; j < lattice; ++j)
        for (int k = 0; k < lattice; ++k) {
          const double s = 2.0 / (lattice - 1);
          const Vec3 x{X * (-1 + s * i), X * (-1 + s * j), X * (-1 + s * k)};
          const double rad = norm(x);
          if (!r.in_region(rad, t)) continue;
          ++r.lattice_points;
          r.covered += r.band_of(rad, t) >= 0;
        }
  }
  r.coverage = r.lattice_points ? static_cast<double>(r.covered) / r.lattice_points : 1.0;
  return r;
}

RegionCheck region_check(const RegionMask& mask, const AnalyticRegion& region) {
  RegionCheck rc;
  const auto& cyl = mask.cylinders;
  for (std::size_t i = 0; i < cyl.size(); ++i) {
    const Vec3& x = cyl[i].z.x0;
    const double t = cyl[i].z.t0;
    if (!region.in_region(norm(x), t)) continue;
    ++rc.points;
    bool ok = false;
    for (const auto& c : cyl)
      if (c.pass && c.z.contains(x, t)) {
        ok = true;
        break;
      }
    if (ok)
      ++rc.covered;
    else
      rc.violations.push_back(i);
  }
  rc.coverage = rc.points ? static_cast<double>(rc.covered) / rc.points : 1.0;
  return rc;
}

std::string mask_csv(const RegionMask& mask) {
  std::ostringstream os;
  os.precision(17);
  os << "x,y,z,t,pass\n";
  for (const auto& c : mask.cylinders)
    os << c.z.x0[0] << ',' << c.z.x0[1] << ',' << c.z.x0[2] << ',' << c.z.t0 << ',' << (c.pass ? 1 : 0) << '\n';
  return os.str();
}

std::string region_summary_json(const RegionMask& mask, const AnalyticRegion& region, const RegionCheck& check) {
  nlohmann::ordered_json j;
  j["delta"] = region.delta;
  j["sigma"] = region.sigma;
  j["sigma_sq"] = region.sigma_sq;
  j["tau"] = region.tau;
  j["c_star"] = region.c_star;
  j["N2"] = region.n2;
  j["eps_star"] = mask.eps_star;
  j["eps_star_note"] = "configured threshold; no computable universal value is known";
  j["cylinders"] = mask.cylinders.size();
  j["passed"] = mask.passed;
  j["c0"] = mask.c0;
  j["outliers"] = mask.outliers;
  j["region_points"] = check.points;
  j["coverage"] = check.coverage;
  j["violations"] = check.violations.size();
  j["bands_abut"] = region.abut;
  j["bands_nested"] = region.nested;
  j["lattice_coverage"] = region.coverage;
  return j.dump(2);
}

void write_slice_ppm(std::ostream& out, const RegionMask& mask, const AnalyticRegion& region, double L, double z0,
                     double t, int pixels) {
  require(pixels > 0 && L > 0.0, ErrorKind::invalid_argument, "bad image size");
  out << "P6\n" << pixels << ' ' << pixels << "\n255\n";
  std::vector<unsigned char> row(3 * static_cast<std::size_t>(pixels));
  for (int py = pixels - 1; py >= 0; --py) {
    for (int px = 0; px < pixels; ++px) {
      const Vec3 x{-L + (px + 0.5) * 2 * L / pixels, -L + (py + 0.5) * 2 * L / pixels, z0};
      bool any = false, good = false;
      for (const auto& c : mask.cylinders) {
        if (!c.z.contains(x, t)) continue;
        any = true;
        if (c.pass) {
          good = true;
          break;
        }
      }
      int rgb[3] = {90, 90, 90};
      if (good) {
        rgb[0] = 0, rgb[1] = 170, rgb[2] = 0;
      } else if (any) {
        rgb[0] = 200, rgb[1] = 0, rgb[2] = 0;
      }
      if (region.in_region(norm(x), t))
        for (int& v : rgb) v = std::min(255, v + 60);
      for (int c = 0; c < 3; ++c) row[3 * px + c] = static_cast<unsigned char>(rgb[c]);
    }
    out.write(reinterpret_cast<const char*>(row.data()), static_cast<std::streamsize>(row.size()));
  }
}

}  // namespace nswlab
