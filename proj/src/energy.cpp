#include "nswlab/energy.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "json.hpp"

#include "nswlab/error.hpp"
#include "nswlab/field_lab.hpp"
#include "nswlab/spectral.hpp"

namespace nswlab {

namespace {

constexpr double kInner = 0.5, kOuter = 2.0 / 3.0;
constexpr double kWidth = kOuter - kInner;

double trapezoid(const std::vector<double>& t, const std::vector<double>& v) {
  double acc = 0.0;
  for (std::size_t i = 1; i < t.size(); ++i) acc += 0.5 * (v[i] + v[i - 1]) * (t[i] - t[i - 1]);
  return acc;
}

std::vector<double> sample_times(const std::vector<GridField>& u) {
  std::vector<double> t;
  for (std::size_t i = 0; i < u.size(); ++i) {
    require(u[i].time().has_value(), ErrorKind::invalid_argument, "series sample without a time stamp");
    if (i > 0) require(*u[i].time() > t.back(), ErrorKind::invalid_argument, "series times must increase");
    t.push_back(*u[i].time());
  }
  return t;
}

}  // namespace

double cutoff_profile(double tau) {
  if (tau <= kInner) return 1.0;
  if (tau >= kOuter) return 0.0;
  const double s = (tau - kInner) / kWidth;
  return 1.0 - s * s * s * s * (35.0 - 84.0 * s + 70.0 * s * s - 20.0 * s * s * s);
}

double cutoff_profile_d1(double tau) {
  if (tau <= kInner || tau >= kOuter) return 0.0;
  const double s = (tau - kInner) / kWidth;
  return -140.0 * std::pow(s * (1.0 - s), 3) / kWidth;
}

double cutoff_profile_d2(double tau) {
  if (tau <= kInner || tau >= kOuter) return 0.0;
  const double s = (tau - kInner) / kWidth;
  return -420.0 * std::pow(s * (1.0 - s), 2) * (1.0 - 2.0 * s) / (kWidth * kWidth);
}

GridField CutoffField::field(const GridField& grid) const {
  GridField f(grid.L(), grid.N(), 1);
  for (int i = box.lo[0]; i < box.hi[0]; ++i)
    for (int j = box.lo[1]; j < box.hi[1]; ++j)
      for (int k = box.lo[2]; k < box.hi[2]; ++k) f.at(0, i, j, k) = phi[box.local(i, j, k)];
  return f;
}

CutoffField make_cutoff(const Cube& q, const GridField& grid) {
  const Cube star = dilate(q, Dilation::star);
  require(cube_inside_box(grid, star), ErrorKind::domain_mismatch, "Q* exceeds the field box");
  require(q.side >= 8.0 * grid.h() * (1.0 - 1e-12), ErrorKind::resolution_error,
          "cube side below 8 grid cells; cutoff is not resolvable");
  CutoffField c;
  c.q = q;
  c.box = full_box(grid);
  const IndexBox support = cells_touching(grid, star);
  const int N = grid.N();
  c.phi.assign(grid.points(), 0.0);
  const double s = q.side;
  for (int i = support.lo[0]; i < support.hi[0]; ++i)
    for (int j = support.lo[1]; j < support.hi[1]; ++j)
      for (int k = support.lo[2]; k < support.hi[2]; ++k) {
        const int idx[3] = {i, j, k};
        double e = 1.0;
        for (int a = 0; a < 3; ++a) e *= cutoff_profile(std::fabs(grid.coord(idx[a]) - q.center[a]) / s);
        c.phi[grid.index(i, j, k)] = e;
      }
  Fft3 fft(N, N, N);
  const auto spec = fft.forward_copy(c.phi.data());
  const int nc = fft.n2c();
  const double kf = M_PI / grid.L();
  const double scale = 1.0 / static_cast<double>(grid.points());
  std::vector<cplx> work(fft.complex_size());
  for (int axis = -1; axis < 3; ++axis) {
    for (int i = 0; i < N; ++i)
      for (int j = 0; j < N; ++j)
        for (int k = 0; k < nc; ++k) {
          const std::size_t id = (static_cast<std::size_t>(i) * N + j) * nc + k;
          const double kv[3] = {kf * mode_of(i, N), kf * mode_of(j, N), kf * k};
          if (axis < 0) {
            work[id] = -(kv[0] * kv[0] + kv[1] * kv[1] + kv[2] * kv[2]) * spec[id];
          } else {
            const int idx = axis == 0 ? i : axis == 1 ? j : k;
            work[id] = idx == N / 2 ? cplx(0.0) : spec[id] * cplx(0.0, kv[axis]);
          }
        }
    auto& out = axis < 0 ? c.lap : c.grad[static_cast<std::size_t>(axis)];
    out.resize(grid.points());
    fft.inverse_into(work.data(), out.data(), scale);
  }
  // Every partial derivative factors into per-axis profiles with sup eta = 1.
  double s1 = 0.0, s2 = 0.0;
  const int sub = 8;
  for (int i = support.lo[0]; i < support.hi[0]; ++i)
    for (int m = 0; m < sub; ++m) {
      const double tau = std::fabs(grid.coord(i) + m * grid.h() / sub - q.center[0]) / s;
      s1 = std::max(s1, std::fabs(cutoff_profile_d1(tau)));
      s2 = std::max(s2, std::fabs(cutoff_profile_d2(tau)));
    }
  const double g1 = s1 / s, g2 = std::max(s2, s1 * s1) / (s * s);
  c.deriv_bound = {g1 * s, g2 * s * s};
  return c;
}

SeriesDensities series_densities(const std::vector<GridField>& u) {
  SeriesDensities d;
  d.times = sample_times(u);
  for (const auto& f : u) {
    require(f.ncomp() == 3 && f.same_grid(u.front()), ErrorKind::invalid_argument, "series grids differ");
    d.usq.push_back(f.magnitude_sq());
    d.grad_sq.push_back(spectral_gradient_sq(f));
  }
  return d;
}

LeiResult lei_residual(const std::vector<GridField>& u, const std::vector<GridField>& p, const CutoffField& phi,
                       LeiMode mode) {
  return lei_residual(u, p, series_densities(u), phi, mode);
}

LeiResult lei_residual(const std::vector<GridField>& u, const std::vector<GridField>& p, const SeriesDensities& dens,
                       const CutoffField& phi, LeiMode mode) {
  require(!u.empty(), ErrorKind::invalid_argument, "empty series");
  require(dens.usq.size() == u.size(), ErrorKind::invalid_argument, "densities do not match the series");
  const bool full = mode == LeiMode::full;
  if (full) {
    require(p.size() == u.size(), ErrorKind::invalid_argument, "velocity and pressure series are misaligned");
    for (std::size_t s = 0; s < u.size(); ++s)
      require(p[s].ncomp() == 1 && p[s].same_grid(u[s]) && p[s].time() == u[s].time(), ErrorKind::invalid_argument,
              "velocity and pressure series are misaligned");
  }
  const GridField& g = u.front();
  const IndexBox& b = phi.box;
  const double h3 = std::pow(g.h(), 3);
  const std::size_t ns = u.size();
  std::vector<double> energy(ns), diss(ns), lap(ns), flux(ns), flux3(ns);
  for (std::size_t s = 0; s < ns; ++s) {
    double e = 0, d = 0, l = 0, f = 0, f3 = 0;
    for (int i = b.lo[0]; i < b.hi[0]; ++i)
      for (int j = b.lo[1]; j < b.hi[1]; ++j)
        for (int k = b.lo[2]; k < b.hi[2]; ++k) {
          const std::size_t gi = g.index(i, j, k), li = b.local(i, j, k);
          const double usq = dens.usq[s][gi];
          e += usq * phi.phi[li];
          d += dens.grad_sq[s][gi] * phi.phi[li];
          l += usq * phi.lap[li];
          double udg = 0.0, gn = 0.0;
          for (int a = 0; a < 3; ++a) {
            udg += u[s].component(a)[gi] * phi.grad[a][li];
            gn += phi.grad[a][li] * phi.grad[a][li];
          }
          f3 += usq * std::sqrt(usq) * std::sqrt(gn);
          if (full) f += (usq + 2.0 * p[s].component(0)[gi]) * udg;
        }
    energy[s] = e * h3;
    diss[s] = d * h3;
    lap[s] = l * h3;
    flux[s] = f * h3;
    flux3[s] = f3 * h3;
  }
  LeiResult r;
  r.lhs = energy.back() + 2.0 * trapezoid(dens.times, diss);
  r.rhs = energy.front() + trapezoid(dens.times, lap) + (full ? trapezoid(dens.times, flux) : 0.0);
  r.residual = r.rhs - r.lhs;
  r.energy_scale = energy.front();
  r.flux_scale = trapezoid(dens.times, flux3);
  return r;
}

std::string DiagnosticSeries::to_csv() const {
  std::ostringstream os;
  os.precision(17);
  os << "t,alpha_n,beta_n,argmax_cube\n";
  for (std::size_t i = 0; i < times.size(); ++i)
    os << times[i] << ',' << alpha[i] << ',' << beta[i] << ',' << alpha_argmax[i] << '\n';
  return os.str();
}

DiagnosticSeries track_series(const std::vector<GridField>& u, const SeriesDensities& dens, const CubeCover& cover,
                              int n, double q) {
  require(q == 1.0 || q == 2.0, ErrorKind::invalid_argument, "q must be 1 or 2");
  require(!u.empty() && dens.usq.size() == u.size(), ErrorKind::invalid_argument, "densities do not match the series");
  require(cover.box_half() <= u.front().L() * (1.0 + 1e-12), ErrorKind::domain_mismatch,
          "cover box exceeds the field box");
  const CubeCover cn = build_refined_cover(cover, n);
  DiagnosticSeries ds;
  ds.n = n;
  ds.q = q;
  ds.times = dens.times;
  const std::size_t ns = u.size(), m = cn.size();
  std::vector<double> weight(m);
  for (std::size_t c = 0; c < m; ++c) weight[c] = std::pow(cn[c].volume(), -q / 3.0);
  std::vector<std::vector<double>> diss(ns, std::vector<double>(m));
  ds.alpha_cube.assign(ns, std::vector<double>(m));
  const long lm = static_cast<long>(m);
  for (std::size_t s = 0; s < ns; ++s) {
#pragma omp parallel for schedule(dynamic)
    for (long c = 0; c < lm; ++c) {
      const auto cw = cube_weights(u[s], cn[static_cast<std::size_t>(c)]);
      ds.alpha_cube[s][static_cast<std::size_t>(c)] = weight[static_cast<std::size_t>(c)] * weighted_sum(u[s], cw, dens.usq[s].data());
      diss[s][static_cast<std::size_t>(c)] = weighted_sum(u[s], cw, dens.grad_sq[s].data());
    }
  }
  ds.beta_cube.assign(ns, std::vector<double>(m, 0.0));
  for (std::size_t s = 1; s < ns; ++s)
    for (std::size_t c = 0; c < m; ++c)
      ds.beta_cube[s][c] = ds.beta_cube[s - 1][c] +
                           weight[c] * 0.5 * (diss[s][c] + diss[s - 1][c]) * (ds.times[s] - ds.times[s - 1]);
  for (std::size_t s = 0; s < ns; ++s) {
    const auto& a = ds.alpha_cube[s];
    const auto& b = ds.beta_cube[s];
    const auto ia = static_cast<std::size_t>(std::max_element(a.begin(), a.end()) - a.begin());
    const auto ib = static_cast<std::size_t>(std::max_element(b.begin(), b.end()) - b.begin());
    ds.alpha.push_back(a[ia]);
    ds.alpha_argmax.push_back(ia);
    ds.beta.push_back(b[ib]);
    ds.beta_argmax.push_back(ib);
  }
  return ds;
}

CubicReport cubic_estimate_check(const GridField& u, const Cube& q_cube, double q, double eps) {
  return cubic_estimate_check(u, spectral_gradient_sq(u), q_cube, q, eps);
}

namespace {

CubicReport cubic_groups(double vol, double q, double eps, double i3, double i2, double g) {
  CubicReport r;
  const double avg = i2 / std::pow(vol, q / 3.0);
  r.lhs = i3 / std::cbrt(vol);
  r.group_a = std::pow(vol, q - 4.0 / 3.0) * avg * avg * avg;
  r.group_b = eps * g;
  r.group_c = std::pow(vol, q / 2.0 - 5.0 / 6.0) * std::pow(avg, 1.5);
  r.gn_first = std::pow(g, 0.75) * std::pow(i2, 0.75) / std::cbrt(vol);
  r.gn_second = std::pow(vol, -5.0 / 6.0) * std::pow(i2, 1.5);
  return r;
}

void finish(CubicReport& r) {
  const double rhs = r.group_a + r.group_b + r.group_c;
  const double gn = r.gn_first + r.gn_second;
  r.c_eps = r.lhs > 0.0 ? r.lhs / rhs : 0.0;
  r.c_gn = r.lhs > 0.0 ? r.lhs / gn : 0.0;
}

}  // namespace

CubicReport cubic_estimate_check(const GridField& u, const std::vector<double>& grad_sq, const Cube& q_cube, double q,
                                 double eps) {
  require(eps > 0.0, ErrorKind::invalid_argument, "eps must be positive");
  require(u.ncomp() == 3, ErrorKind::invalid_argument, "cubic estimate needs a velocity field");
  const auto cw = cube_weights(u, q_cube);
  const auto usq = u.magnitude_sq();
  const auto u3 = power_density(u, 3.0);
  CubicReport r = cubic_groups(q_cube.volume(), q, eps, weighted_sum(u, cw, u3.data()), weighted_sum(u, cw, usq.data()),
                               weighted_sum(u, cw, grad_sq.data()));
  finish(r);
  return r;
}

CubicReport cubic_estimate_series(const std::vector<GridField>& u, const SeriesDensities& dens, const Cube& q_cube,
                                  double q, double eps) {
  require(eps > 0.0, ErrorKind::invalid_argument, "eps must be positive");
  require(!u.empty() && dens.usq.size() == u.size(), ErrorKind::invalid_argument, "densities do not match the series");
  const std::size_t ns = u.size();
  std::vector<double> lhs(ns), a(ns), b(ns), c(ns), g1(ns), g2(ns);
  for (std::size_t s = 0; s < ns; ++s) {
    const auto cw = cube_weights(u[s], q_cube);
    std::vector<double> u3(dens.usq[s].size());
    for (std::size_t i = 0; i < u3.size(); ++i) u3[i] = dens.usq[s][i] * std::sqrt(dens.usq[s][i]);
    const auto r = cubic_groups(q_cube.volume(), q, eps, weighted_sum(u[s], cw, u3.data()),
                                weighted_sum(u[s], cw, dens.usq[s].data()),
                                weighted_sum(u[s], cw, dens.grad_sq[s].data()));
    lhs[s] = r.lhs;
    a[s] = r.group_a;
    b[s] = r.group_b;
    c[s] = r.group_c;
    g1[s] = r.gn_first;
    g2[s] = r.gn_second;
  }
  CubicReport r;
  const auto& t = dens.times;
  r.lhs = trapezoid(t, lhs);
  r.group_a = trapezoid(t, a);
  r.group_b = trapezoid(t, b);
  r.group_c = trapezoid(t, c);
  r.gn_first = trapezoid(t, g1);
  r.gn_second = trapezoid(t, g2);
  finish(r);
  return r;
}

double gronwall_time(double a, double b1, double b2, double m) {
  require(a > 0.0 && b1 >= 0.0 && b2 >= 0.0 && m >= 1.0, ErrorKind::invalid_argument, "bad barrier parameters");
  if (b1 == 0.0 && b2 == 0.0) return std::numeric_limits<double>::infinity();
  return a / (b1 * 2.0 * a + b2 * std::pow(2.0 * a, m));
}

BarrierRun integrate_barrier(double a, double b1, double b2, double m, double t_end, int steps) {
  require(steps > 0 && t_end >= 0.0, ErrorKind::invalid_argument, "bad integration range");
  auto rhs = [&](double f) { return b1 * f + b2 * std::pow(f, m); };
  auto run = [&](int n, double& peak) {
    const double dt = t_end / n;
    double f = a;
    peak = f;
    for (int i = 0; i < n; ++i) {
      const double k1 = rhs(f), k2 = rhs(f + 0.5 * dt * k1), k3 = rhs(f + 0.5 * dt * k2), k4 = rhs(f + dt * k3);
      f += dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
      if (!std::isfinite(f)) {
        peak = std::numeric_limits<double>::infinity();
        return f;
      }
      peak = std::max(peak, f);
    }
    return f;
  };
  BarrierRun r;
  double coarse_peak = 0.0;
  const double coarse = run(steps, coarse_peak);
  const double fine = run(2 * steps, r.max_f);
  r.error_estimate = std::fabs(fine - coarse);
  return r;
}

double existence_time(double u0_norm_sq, int n, int q, double c1, double c_star) {
  require(q == 1 || q == 2, ErrorKind::invalid_argument, "q must be 1 or 2");
  const double u4 = u0_norm_sq * u0_norm_sq;
  if (q == 2) return c1 / (std::ldexp(1.0, -2 * n) + u4);
  return c_star * std::ldexp(1.0, 2 * n) / (1.0 + u4);
}

double log_ratio_factor(double x) {
  require(x > 0.0, ErrorKind::invalid_argument, "argument must be positive");
  const double l = 0.5 * std::log1p(x * x);
  return l * l / (x * x);
}

AprioriResult apriori_bound_check(const DiagnosticSeries& series, double u0_norm_sq, int n, double c0, double T) {
  require(series.n == n, ErrorKind::invalid_argument, "series was tracked at a different level");
  require(!series.times.empty() && series.times.back() >= T * (1.0 - 1e-12), ErrorKind::invalid_argument,
          "series does not reach T");
  AprioriResult r;
  r.bound = 2.0 * c0 * u0_norm_sq;
  double sup_alpha = 0.0;
  std::size_t last = 0;
  for (std::size_t s = 0; s < series.times.size() && series.times[s] <= T * (1.0 + 1e-12); ++s) {
    sup_alpha = std::max(sup_alpha, series.alpha[s]);
    last = s;
  }
  double beta_t = series.beta[last];
  if (series.times[last] < T && last + 1 < series.times.size()) {
    const double w = (T - series.times[last]) / (series.times[last + 1] - series.times[last]);
    beta_t = 0.0;
    for (std::size_t c = 0; c < series.beta_cube[last].size(); ++c)
      beta_t = std::max(beta_t, (1 - w) * series.beta_cube[last][c] + w * series.beta_cube[last + 1][c]);
    // alpha between samples is bounded by its larger endpoint
    sup_alpha = std::max(sup_alpha, series.alpha[last + 1]);
  }
  r.used = sup_alpha + beta_t;
  r.margin = r.bound - r.used;
  r.pass = r.margin >= 0.0;
  return r;
}

double cutoff_normalization(const GridField& u0, const CubeCover& cover, int n) {
  require(cover.box_half() <= u0.L() * (1.0 + 1e-12), ErrorKind::domain_mismatch, "cover box exceeds the field box");
  const CubeCover cn = build_refined_cover(cover, n);
  const auto usq = u0.magnitude_sq();
  const double h3 = std::pow(u0.h(), 3);
  double norm = 0.0, num = 0.0;
  for (const Cube& q : cn) {
    const double w = std::pow(q.volume(), -2.0 / 3.0);
    norm = std::max(norm, w * weighted_sum(u0, cube_weights(u0, q), usq.data()));
    if (!cube_inside_box(u0, dilate(q, Dilation::star)) || q.side < 8.0 * u0.h()) continue;
    const CutoffField c = make_cutoff(q, u0);
    double acc = 0.0;
    for (int i = c.box.lo[0]; i < c.box.hi[0]; ++i)
      for (int j = c.box.lo[1]; j < c.box.hi[1]; ++j)
        for (int k = c.box.lo[2]; k < c.box.hi[2]; ++k) acc += c.phi[c.box.local(i, j, k)] * usq[u0.index(i, j, k)];
    num = std::max(num, w * acc * h3);
  }
  return norm > 0.0 ? num / norm : 1.0;
}

std::string Calibration::to_json() const {
  nlohmann::ordered_json j;
  j["c0"] = c0;
  j["c1"] = c1;
  j["c1_lower_bound"] = c1_lower_bound;
  j["c_star"] = c_star;
  j["eps_star"] = eps_star;
  j["eps_star_note"] = "not a derived value; the threshold is existential";
  j["lei_tol"] = lei_tol;
  j["cubic_c_max"] = cubic_c_max;
  j["scan_c0"] = scan_c0;
  j["resolutions"] = resolutions;
  return j.dump(2);
}

Calibration Calibration::from_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const std::exception& e) {
    fail(ErrorKind::io_error, std::string("calibration file: ") + e.what());
  }
  Calibration c;
  c.c0 = j.value("c0", c.c0);
  c.c1 = j.value("c1", c.c1);
  c.c1_lower_bound = j.value("c1_lower_bound", c.c1_lower_bound);
  c.c_star = j.value("c_star", c.c_star);
  c.eps_star = j.value("eps_star", c.eps_star);
  c.lei_tol = j.value("lei_tol", c.lei_tol);
  c.cubic_c_max = j.value("cubic_c_max", c.cubic_c_max);
  c.scan_c0 = j.value("scan_c0", c.scan_c0);
  c.resolutions = j.value("resolutions", c.resolutions);
  return c;
}

}  // namespace nswlab
