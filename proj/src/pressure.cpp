#include "nswlab/pressure.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "nswlab/error.hpp"
#include "nswlab/field_lab.hpp"
#include "nswlab/spectral.hpp"

namespace nswlab {

namespace {

constexpr int kPairs[6][2] = {{0, 0}, {1, 1}, {2, 2}, {0, 1}, {0, 2}, {1, 2}};

int good_fft_size(int n) {
  for (int m = std::max(n, 2);; ++m) {
    int r = m;
    for (int p : {2, 3, 5, 7})
      while (r % p == 0) r /= p;
    if (r == 1) return m;
  }
}

// Symmetric kernel entry for integer offset d, zero at the origin.
double kernel_entry(int a, int b, double dx, double dy, double dz) {
  const double r2 = dx * dx + dy * dy + dz * dz;
  if (r2 == 0.0) return 0.0;
  const double d[3] = {dx, dy, dz};
  const double r = std::sqrt(r2);
  return ((a == b ? -r2 : 0.0) + 3.0 * d[a] * d[b]) / (4.0 * M_PI * r2 * r2 * r);
}

}  // namespace

Mat3 kernel(const Vec3& y) {
  const double r2 = dot(y, y);
  require(r2 > 0.0, ErrorKind::singular_point, "kernel evaluated at y = 0");
  Mat3 K{};
  const double r = std::sqrt(r2);
  const double c = 1.0 / (4.0 * M_PI * r2 * r2 * r);
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) K[i][j] = c * ((i == j ? -r2 : 0.0) + 3.0 * y[i] * y[j]);
  return K;
}

GridField global_pressure(const GridField& u) {
  require(u.ncomp() == 3, ErrorKind::invalid_argument, "pressure needs a velocity field");
  const int N = u.N();
  Fft3 fft(N, N, N);
  const int nc = fft.n2c();
  std::vector<cplx> acc(fft.complex_size(), 0.0);
  const double kf = M_PI / u.L();
  std::vector<double> prod(u.points());
  for (const auto& pr : kPairs) {
    const int a = pr[0], b = pr[1];
    const double* ua = u.component(a);
    const double* ub = u.component(b);
    for (std::size_t s = 0; s < prod.size(); ++s) prod[s] = ua[s] * ub[s];
    fft.forward(prod.data());
    const cplx* s = fft.spectrum();
    const double mult = a == b ? 1.0 : 2.0;
    for (int i = 0; i < N; ++i)
      for (int j = 0; j < N; ++j)
        for (int k = 0; k < nc; ++k) {
          if (i == N / 2 || j == N / 2 || k == N / 2) continue;
          const double kv[3] = {kf * mode_of(i, N), kf * mode_of(j, N), kf * k};
          const double k2 = kv[0] * kv[0] + kv[1] * kv[1] + kv[2] * kv[2];
          if (k2 == 0.0) continue;
          const std::size_t id = (static_cast<std::size_t>(i) * N + j) * nc + k;
          acc[id] -= mult * kv[a] * kv[b] / k2 * s[id];
        }
  }
  GridField p(u.L(), N, 1, u.time());
  fft.inverse_into(acc.data(), p.component(0), 1.0 / static_cast<double>(u.points()));
  return p;
}

IndexBox points_in(const GridField& f, const Cube& q) {
  IndexBox b;
  const double h = f.h();
  for (int a = 0; a < 3; ++a) {
    // coord(i) = -L + (i + 1/2) h  in [lo, hi]
    const double tol = 1e-9 * h;
    b.lo[a] = std::max(0, static_cast<int>(std::ceil((q.lo(a) + f.L() - tol) / h - 0.5)));
    b.hi[a] = std::min(f.N(), static_cast<int>(std::floor((q.hi(a) + f.L() + tol) / h - 0.5)) + 1);
  }
  return b;
}

IndexBox cells_touching(const GridField& f, const Cube& q) {
  IndexBox b;
  const CubeWeights cw = cube_weights(f, q);
  const AxisWeights* ax[3] = {&cw.x, &cw.y, &cw.z};
  for (int a = 0; a < 3; ++a) {
    b.lo[a] = ax[a]->first;
    b.hi[a] = ax[a]->first + static_cast<int>(ax[a]->w.size());
  }
  return b;
}

IndexBox full_box(const GridField& f) { return IndexBox{{0, 0, 0}, {f.N(), f.N(), f.N()}}; }

IndexBox bounding(const IndexBox& a, const IndexBox& b) {
  if (a.empty()) return b;
  if (b.empty()) return a;
  IndexBox r;
  for (int k = 0; k < 3; ++k) {
    r.lo[k] = std::min(a.lo[k], b.lo[k]);
    r.hi[k] = std::max(a.hi[k], b.hi[k]);
  }
  return r;
}

std::vector<double> pv_convolve(const GridField& u, const IndexBox& src, const std::vector<double>& weight,
                                const IndexBox& tgt) {
  require(u.ncomp() == 3, ErrorKind::invalid_argument, "pv convolution needs a velocity field");
  require(weight.empty() || weight.size() == src.size(), ErrorKind::invalid_argument, "weight size mismatch");
  std::vector<double> out(tgt.size(), 0.0);
  if (src.empty() || tgt.empty()) return out;
  int S[3], T[3], P[3], D[3];
  for (int a = 0; a < 3; ++a) {
    S[a] = src.extent(a);
    T[a] = tgt.extent(a);
    P[a] = good_fft_size(S[a] + T[a] - 1);
    D[a] = tgt.lo[a] - src.lo[a] - (S[a] - 1);
  }
  Fft3 fft(P[0], P[1], P[2]);
  const std::size_t ncs = fft.complex_size();
  std::vector<cplx> acc(ncs, 0.0), kspec(ncs);
  double* buf = fft.real();
  const std::size_t P12 = static_cast<std::size_t>(P[1]) * P[2];
  for (const auto& pr : kPairs) {
    const int a = pr[0], b = pr[1];
    const double mult = a == b ? 1.0 : 2.0;
    // b-array: kernel at offset j + D, j in [0, S + T - 1).
    std::fill(buf, buf + fft.real_size(), 0.0);
    for (int i = 0; i < S[0] + T[0] - 1; ++i)
      for (int j = 0; j < S[1] + T[1] - 1; ++j)
        for (int k = 0; k < S[2] + T[2] - 1; ++k)
          buf[i * P12 + static_cast<std::size_t>(j) * P[2] + k] =
              mult * kernel_entry(a, b, i + D[0], j + D[1], k + D[2]);
    fft.forward();
    std::copy(fft.spectrum(), fft.spectrum() + ncs, kspec.begin());
    // a-array: weighted products on the source box.
    std::fill(buf, buf + fft.real_size(), 0.0);
    const double* ua = u.component(a);
    const double* ub = u.component(b);
    for (int i = 0; i < S[0]; ++i)
      for (int j = 0; j < S[1]; ++j)
        for (int k = 0; k < S[2]; ++k) {
          const std::size_t g = u.index(src.lo[0] + i, src.lo[1] + j, src.lo[2] + k);
          const double w = weight.empty() ? 1.0 : weight[(static_cast<std::size_t>(i) * S[1] + j) * S[2] + k];
          buf[i * P12 + static_cast<std::size_t>(j) * P[2] + k] = w * ua[g] * ub[g];
        }
    fft.forward();
    const cplx* s = fft.spectrum();
    for (std::size_t m = 0; m < ncs; ++m) acc[m] += s[m] * kspec[m];
  }
  std::copy(acc.begin(), acc.end(), fft.spectrum());
  fft.inverse();
  const double scale = 1.0 / static_cast<double>(fft.real_size());
  for (int i = 0; i < T[0]; ++i)
    for (int j = 0; j < T[1]; ++j)
      for (int k = 0; k < T[2]; ++k)
        out[(static_cast<std::size_t>(i) * T[1] + j) * T[2] + k] =
            buf[(i + S[0] - 1) * P12 + static_cast<std::size_t>(j + S[1] - 1) * P[2] + (k + S[2] - 1)] * scale;
  return out;
}

std::vector<double> KernelSplit::total() const {
  std::vector<double> t(near.size());
  for (std::size_t i = 0; i < t.size(); ++i) t[i] = near[i] + far[i];
  return t;
}

LocalPressure::LocalPressure(const GridField& u) : LocalPressure(u, full_box(u)) {}

LocalPressure::LocalPressure(const GridField& u, const IndexBox& window)
    : u_(u), window_(window), usq_(u.magnitude_sq()) {
  require(u.ncomp() == 3, ErrorKind::invalid_argument, "local pressure needs a velocity field");
  pv_ = pv_convolve(u, full_box(u), {}, window);
}

namespace {

void check_star_inside(const GridField& u, const Cube& q) {
  require(cube_inside_box(u, dilate(q, Dilation::double_star)), ErrorKind::domain_mismatch,
          "Q** exceeds the field box");
}

// Weights of Q** on its touching cells, as fractions of a cell.
std::vector<double> double_star_fraction(const GridField& u, const Cube& dq, const IndexBox& box) {
  const CubeWeights cw = cube_weights(u, dq);
  const double h = u.h();
  std::vector<double> w(box.size(), 0.0);
  for (std::size_t a = 0; a < cw.x.w.size(); ++a)
    for (std::size_t b = 0; b < cw.y.w.size(); ++b)
      for (std::size_t c = 0; c < cw.z.w.size(); ++c)
        w[box.local(cw.x.first + int(a), cw.y.first + int(b), cw.z.first + int(c))] =
            cw.x.w[a] * cw.y.w[b] * cw.z.w[c] / (h * h * h);
  return w;
}

}  // namespace

double LocalPressure::far_constant(const Cube& q) const {
  check_star_inside(u_, q);
  const Cube dq = dilate(q, Dilation::double_star);
  const IndexBox box = cells_touching(u_, dq);
  const auto frac = double_star_fraction(u_, dq, box);
  const int N = u_.N();
  const double h3 = std::pow(u_.h(), 3);
  double sum = 0.0;
  for (int i = 0; i < N; ++i)
    for (int j = 0; j < N; ++j)
      for (int k = 0; k < N; ++k) {
        double w = 1.0;
        if (i >= box.lo[0] && i < box.hi[0] && j >= box.lo[1] && j < box.hi[1] && k >= box.lo[2] && k < box.hi[2])
          w = 1.0 - frac[box.local(i, j, k)];
        if (w <= 0.0) continue;
        const Vec3 y{u_.coord(i), u_.coord(j), u_.coord(k)};
        const Mat3 K = kernel(q.center - y);
        const std::size_t g = u_.index(i, j, k);
        double s = 0.0;
        for (int a = 0; a < 3; ++a)
          for (int b = 0; b < 3; ++b) s += K[a][b] * u_.component(a)[g] * u_.component(b)[g];
        sum += w * s;
      }
  return sum * h3;
}

std::vector<double> LocalPressure::apply(const Cube& q) const {
  check_star_inside(u_, q);
  const IndexBox box = points_in(u_, dilate(q, Dilation::star));
  for (int a = 0; a < 3; ++a)
    require(box.lo[a] >= window_.lo[a] && box.hi[a] <= window_.hi[a], ErrorKind::domain_mismatch,
            "Q* lies outside the precomputed pv window");
  const double cq = far_constant(q);
  std::vector<double> g(box.size());
  for (int i = box.lo[0]; i < box.hi[0]; ++i)
    for (int j = box.lo[1]; j < box.hi[1]; ++j)
      for (int k = box.lo[2]; k < box.hi[2]; ++k)
        g[box.local(i, j, k)] = -usq_[u_.index(i, j, k)] / 3.0 + pv_[window_.local(i, j, k)] - cq;
  return g;
}

KernelSplit LocalPressure::split(const Cube& q) const {
  KernelSplit ks;
  ks.q = q;
  const auto g = apply(q);
  ks.box = points_in(u_, dilate(q, Dilation::star));
  const Cube dq = dilate(q, Dilation::double_star);
  const IndexBox src = cells_touching(u_, dq);
  const auto near_pv = pv_convolve(u_, src, double_star_fraction(u_, dq, src), ks.box);
  ks.near.resize(ks.box.size());
  ks.far.resize(ks.box.size());
  for (int i = ks.box.lo[0]; i < ks.box.hi[0]; ++i)
    for (int j = ks.box.lo[1]; j < ks.box.hi[1]; ++j)
      for (int k = ks.box.lo[2]; k < ks.box.hi[2]; ++k) {
        const std::size_t l = ks.box.local(i, j, k);
        ks.near[l] = -usq_[u_.index(i, j, k)] / 3.0 + near_pv[l];
        ks.far[l] = g[l] - ks.near[l];
      }
  // Exterior of the box: |K(x - y) - K(x_Q - y)| <= c |x - x_Q| / |x_Q - y|^4,
  // with |u|^2 outside bounded by its collar maximum.
  const double collar = collar_leakage(u_);
  const double rho = u_.L() - norm_inf(q.center);
  const double reach = 0.5 * std::sqrt(3.0) * dilate(q, Dilation::star).side;
  ks.tail_bound = 15.0 / (4.0 * M_PI) * reach * collar * collar * 4.0 * M_PI / rho;
  return ks;
}

KernelSplit local_pressure(const GridField& u, const Cube& q) {
  check_star_inside(u, q);
  const LocalPressure lp(u, points_in(u, dilate(q, Dilation::star)));
  return lp.split(q);
}

ExpansionResidual pressure_expansion_residual(const GridField& p, const LocalPressure& lp, const Cube& q) {
  const GridField& u = lp.velocity();
  require(p.ncomp() == 1 && p.same_grid(u), ErrorKind::invalid_argument, "pressure and velocity grids differ");
  const auto g = lp.apply(q);
  const IndexBox box = points_in(u, dilate(q, Dilation::star));
  ExpansionResidual r;
  double lo = 1e300, hi = -1e300, mean = 0.0, l32 = 0.0;
  for (int i = box.lo[0]; i < box.hi[0]; ++i)
    for (int j = box.lo[1]; j < box.hi[1]; ++j)
      for (int k = box.lo[2]; k < box.hi[2]; ++k) {
        const double pv = p.component(0)[p.index(i, j, k)];
        const double d = pv - g[box.local(i, j, k)];
        lo = std::min(lo, d);
        hi = std::max(hi, d);
        mean += d;
        l32 += std::pow(std::fabs(pv), 1.5);
      }
  const double n = static_cast<double>(box.size());
  const double h3 = std::pow(u.h(), 3);
  r.p_q = mean / n;
  const double vol = std::pow(dilate(q, Dilation::star).side, 3);
  r.scale = std::pow(l32 * h3, 2.0 / 3.0) / std::pow(vol, 2.0 / 3.0);
  r.residual = r.scale > 0.0 ? (hi - lo) / r.scale : 0.0;
  return r;
}

double pressure_expansion_residual(const GridField& p, const GridField& u, const Cube& q) {
  check_star_inside(u, q);
  const LocalPressure lp(u, points_in(u, dilate(q, Dilation::star)));
  return pressure_expansion_residual(p, lp, q).residual;
}

IndexBox star_window(const GridField& f, const CubeCover& cover, const std::vector<std::size_t>& cubes) {
  IndexBox w;
  for (auto i : cubes) w = bounding(w, points_in(f, dilate(cover[i], Dilation::star)));
  return w;
}

double log_bracket_factor(double x) { return std::pow(0.5 * std::log1p(x * x), 1.5); }

std::string PressureEstimateReport::to_csv() const {
  std::ostringstream os;
  os.precision(17);
  os << "cube_id,t,lhs,rhs_near,rhs_far,ratio\n";
  for (const auto& r : rows)
    os << r.cube_id << ',' << r.t << ',' << r.lhs << ',' << r.rhs_near << ',' << r.rhs_far << ',' << r.ratio << '\n';
  return os.str();
}

PressureEstimateReport pressure_estimate_check(const std::vector<GridField>& u, const std::vector<GridField>& p,
                                               const CubeCover& cover_n, double q, double t) {
  require(!u.empty() && u.size() == p.size(), ErrorKind::invalid_argument, "velocity and pressure series differ");
  for (std::size_t k = 0; k < u.size(); ++k) {
    require(u[k].ncomp() == 3 && p[k].ncomp() == 1 && u[k].same_grid(u[0]) && p[k].same_grid(u[0]),
            ErrorKind::invalid_argument, "series grids differ");
    require(u[k].time().has_value() && p[k].time() == u[k].time(), ErrorKind::invalid_argument,
            "series samples need matching time stamps");
    if (k > 0) require(*u[k].time() > *u[k - 1].time(), ErrorKind::invalid_argument, "times must increase");
  }
  require(q >= 0.0 && q <= 2.0, ErrorKind::invalid_argument, "q must lie in [0, 2]");
  require(cover_n.kind() == CoverKind::refined, ErrorKind::invalid_argument, "pressure check needs a C_n cover");
  const int n = cover_n.refinement();
  const GridField& g0 = u[0];

  std::size_t nt = 0;
  while (nt < u.size() && *u[nt].time() <= t + 1e-12) ++nt;
  require(nt >= 1, ErrorKind::invalid_argument, "no samples up to t");

  const auto cubes = interior_indices(cover_n);
  const IndexBox window = star_window(g0, cover_n, cubes);
  const std::size_t m = cover_n.size();
  std::vector<std::vector<double>> lhs_t(nt, std::vector<double>(cubes.size())), cube3_t(nt, std::vector<double>(m));
  std::vector<double> msup_t(nt);
  const double h3 = std::pow(g0.h(), 3);
  for (std::size_t s = 0; s < nt; ++s) {
    const LocalPressure lp(u[s], window);
    const auto d3 = power_density(u[s], 3.0);
    const auto d2 = u[s].magnitude_sq();
    double sup = 0.0;
    for (std::size_t c = 0; c < m; ++c) {
      cube3_t[s][c] = cube_integral_density(u[s], cover_n[c], d3);
      sup = std::max(sup, cube_integral_density(u[s], cover_n[c], d2) / std::pow(cover_n[c].volume(), q / 3.0));
    }
    msup_t[s] = sup;
    const long nc = static_cast<long>(cubes.size());
#pragma omp parallel for schedule(dynamic)
    for (long ci = 0; ci < nc; ++ci) {
      const Cube& Q = cover_n[cubes[static_cast<std::size_t>(ci)]];
      const auto g = lp.apply(Q);
      const IndexBox box = points_in(g0, dilate(Q, Dilation::star));
      double mean = 0.0;
      for (int i = box.lo[0]; i < box.hi[0]; ++i)
        for (int j = box.lo[1]; j < box.hi[1]; ++j)
          for (int k = box.lo[2]; k < box.hi[2]; ++k) mean += p[s].component(0)[g0.index(i, j, k)] - g[box.local(i, j, k)];
      mean /= static_cast<double>(box.size());
      double acc = 0.0;
      for (int i = box.lo[0]; i < box.hi[0]; ++i)
        for (int j = box.lo[1]; j < box.hi[1]; ++j)
          for (int k = box.lo[2]; k < box.hi[2]; ++k)
            acc += std::pow(std::fabs(p[s].component(0)[g0.index(i, j, k)] - mean), 1.5);
      lhs_t[s][static_cast<std::size_t>(ci)] = acc * h3;
    }
  }

  auto trapezoid = [&](auto&& value) {
    if (nt == 1) return 0.0;
    double acc = 0.0;
    for (std::size_t s = 1; s < nt; ++s)
      acc += 0.5 * (value(s) + value(s - 1)) * (*u[s].time() - *u[s - 1].time());
    return acc;
  };

  PressureEstimateReport rep;
  const double far_time = trapezoid([&](std::size_t s) { return std::pow(msup_t[s], 1.5); });
  for (std::size_t ci = 0; ci < cubes.size(); ++ci) {
    const Cube& Q = cover_n[cubes[ci]];
    PressureRow row;
    row.cube_id = cubes[ci];
    row.t = *u[nt - 1].time();
    row.lhs = trapezoid([&](std::size_t s) { return lhs_t[s][ci]; }) / std::cbrt(Q.volume());
    double near = 0.0;
    for (auto j : neighbor_indices(cover_n, Q))
      near = std::max(near, trapezoid([&](std::size_t s) { return cube3_t[s][j]; }) / std::cbrt(cover_n[j].volume()));
    row.rhs_near = near;
    row.rhs_far = std::pow(Q.volume(), q / 2.0 - 5.0 / 6.0) * log_bracket_factor(Q.side / std::ldexp(1.0, n)) * far_time;
    const double rhs = row.rhs_near + row.rhs_far;
    row.ratio = rhs > 0.0 ? row.lhs / rhs : 0.0;
    rep.max_ratio = std::max(rep.max_ratio, row.ratio);
    rep.rows.push_back(row);
  }
  return rep;
}

}  // namespace nswlab
