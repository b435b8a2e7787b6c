#include "nswlab/field_lab.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "nswlab/error.hpp"
#include "nswlab/spectral.hpp"

namespace nswlab {

namespace {

double smoothstep5(double t) {
  t = std::clamp(t, 0.0, 1.0);
  return t * t * t * (10.0 + t * (-15.0 + 6.0 * t));
}

double smoothstep5_deriv(double t) {
  if (t <= 0.0 || t >= 1.0) return 0.0;
  return 30.0 * t * t * (1.0 - t) * (1.0 - t);
}

struct SwirlParams {
  Vec3 axis;
  Vec3 center{0.0, 0.0, 0.0};
  double phase = 0.0;
};

SwirlParams draw_params(const GeneratorSpec& spec, double L) {
  std::mt19937_64 rng(spec.seed);
  const double z = 2.0 * unit_double(rng()) - 1.0;
  const double phi = 2.0 * M_PI * unit_double(rng());
  const double s = std::sqrt(std::max(0.0, 1.0 - z * z));
  SwirlParams p;
  p.axis = {s * std::cos(phi), s * std::sin(phi), z};
  if (spec.kind == GeneratorKind::gaussian_vortex)
    for (int a = 0; a < 3; ++a) p.center[a] = 0.1 * L * (unit_double(rng()) - 0.5);
  p.phase = 2.0 * M_PI * unit_double(rng());
  return p;
}

double profile(const GeneratorSpec& spec, const SwirlParams& p, double r, double L) {
  switch (spec.kind) {
    case GeneratorKind::gaussian_vortex: {
      const double sigma = L / 8.0;
      return std::exp(-r * r / (sigma * sigma));
    }
    case GeneratorKind::growth_radial:
      return std::pow(r, spec.gamma - 1.0);
    case GeneratorKind::dss:
      return (1.0 + 0.5 * std::cos(2.0 * M_PI * std::log(r) / std::log(spec.lambda) + p.phase)) / (r * r);
    case GeneratorKind::log_damped_radial:
      return std::pow(r, -1.5) / (1.0 + 0.5 * std::log1p(r * r));
  }
  return 0.0;
}

}  // namespace

double unit_double(std::uint64_t bits) { return static_cast<double>(bits >> 11) * 0x1.0p-53; }

const char* to_string(GeneratorKind kind) {
  switch (kind) {
    case GeneratorKind::gaussian_vortex: return "gaussian_vortex";
    case GeneratorKind::growth_radial: return "growth_radial";
    case GeneratorKind::dss: return "dss";
    case GeneratorKind::log_damped_radial: return "log_damped_radial";
  }
  return "?";
}

GeneratorKind generator_kind_from(const std::string& name) {
  for (auto k : {GeneratorKind::gaussian_vortex, GeneratorKind::growth_radial, GeneratorKind::dss,
                 GeneratorKind::log_damped_radial})
    if (name == to_string(k)) return k;
  fail(ErrorKind::invalid_argument, "unknown generator kind '" + name + "'");
}

void validate(const GeneratorSpec& spec) {
  require(std::isfinite(spec.amplitude), ErrorKind::invalid_argument, "amplitude must be finite");
  if (spec.kind == GeneratorKind::dss)
    require(spec.lambda > 1.0 && std::isfinite(spec.lambda), ErrorKind::invalid_argument, "dss needs lambda > 1");
  if (spec.kind == GeneratorKind::growth_radial)
    require(spec.gamma > -1.5 && spec.gamma <= 0.5, ErrorKind::invalid_argument,
            "growth_radial needs gamma in (-3/2, 1/2]");
}

double collar_window(double r, double L) { return 1.0 - smoothstep5((r - 0.7 * L) / (0.25 * L)); }

double generator_profile(const GeneratorSpec& spec, double r) {
  return profile(spec, draw_params(spec, 1.0), r, 1.0);
}

GridField generate_unprojected(const GeneratorSpec& spec, double L, int N) {
  validate(spec);
  GridField f(L, N, 3);
  const SwirlParams p = draw_params(spec, L);
  const double rmin = 0.5 * f.h();
  const bool singular = spec.kind != GeneratorKind::gaussian_vortex;
  constexpr double core_cells = 6.0;
  constexpr int sub = 8;
#pragma omp parallel for schedule(static)
  for (int i = 0; i < N; ++i)
    for (int j = 0; j < N; ++j)
      for (int k = 0; k < N; ++k) {
        const Vec3 x{f.coord(i), f.coord(j), f.coord(k)};
        const double w = collar_window(norm(x), L);
        if (w == 0.0) continue;
        const Vec3 y = x - p.center;
        const double r = std::max(norm(y), rmin);
        const Vec3 v = cross(p.axis, y);
        double g = spec.amplitude * w * profile(spec, p, r, L);
        // Near the core the point value misrepresents the cell energy; rescale
        // so that |u|^2 at the center equals its cell average.
        if (r < core_cells * f.h() && singular) {
          const double s2 = norm(v) * norm(v) * profile(spec, p, r, L) * profile(spec, p, r, L);
          double avg = 0.0;
          for (int a = 0; a < sub; ++a)
            for (int b = 0; b < sub; ++b)
              for (int e = 0; e < sub; ++e) {
                const Vec3 z = y + Vec3{((a + 0.5) / sub - 0.5) * f.h(), ((b + 0.5) / sub - 0.5) * f.h(),
                                        ((e + 0.5) / sub - 0.5) * f.h()};
                const Vec3 vz = cross(p.axis, z);
                const double gz = profile(spec, p, std::max(norm(z), 1e-300), L);
                avg += dot(vz, vz) * gz * gz;
              }
          avg /= sub * sub * sub;
          if (s2 > 0.0) g *= std::sqrt(avg / s2);
        }
        for (int c = 0; c < 3; ++c) f.at(c, i, j, k) = g * v[c];
      }
  return f;
}

GridField generate(const GeneratorSpec& spec, double L, int N) {
  return leray_project(generate_unprojected(spec, L, N));
}

GridField radial_power_field(double L, int N, double gamma) {
  GridField f(L, N, 1);
  const double rmin = 0.5 * f.h();
  for (int i = 0; i < N; ++i)
    for (int j = 0; j < N; ++j)
      for (int k = 0; k < N; ++k) {
        const double r = std::max(norm(Vec3{f.coord(i), f.coord(j), f.coord(k)}), rmin);
        f.at(0, i, j, k) = std::pow(r, gamma);
      }
  return f;
}

GridField windowed_beltrami(double L, int N, int m, double inner, double outer) {
  require(0.0 <= inner && inner < outer && outer <= 1.0, ErrorKind::invalid_argument, "bad window radii");
  GridField f(L, N, 3);
  const double kw = m * M_PI / L;
  const double r0 = inner * L, r1 = outer * L;
  for (int i = 0; i < N; ++i)
    for (int j = 0; j < N; ++j)
      for (int k = 0; k < N; ++k) {
        const Vec3 x{f.coord(i), f.coord(j), f.coord(k)};
        const double r = norm(x);
        if (r >= r1) continue;
        const double t = (r - r0) / (r1 - r0);
        const double w = 1.0 - smoothstep5(t);
        const double dw = -smoothstep5_deriv(t) / (r1 - r0);
        const Vec3 F{std::sin(kw * x[2]) + std::cos(kw * x[1]), std::sin(kw * x[0]) + std::cos(kw * x[2]),
                     std::sin(kw * x[1]) + std::cos(kw * x[0])};
        Vec3 u = w * F;
        if (dw != 0.0) u = u + cross((dw / r) * x, (1.0 / kw) * F);
        for (int c = 0; c < 3; ++c) f.at(c, i, j, k) = u[c];
      }
  return f;
}

std::vector<double> power_density(const GridField& f, double power) {
  std::vector<double> s = f.magnitude_sq();
  if (power == 2.0) return s;
  const double e = 0.5 * power;
  for (double& v : s) v = std::pow(v, e);
  return s;
}

double cube_integral_density(const GridField& f, const Cube& q, const std::vector<double>& density) {
  return weighted_sum(f, cube_weights(f, q), density.data());
}

double cube_integral(const GridField& f, const Cube& q, double power) {
  require(power >= 1.0, ErrorKind::invalid_argument, "power must be >= 1");
  cube_weights(f, q);
  return cube_integral_density(f, q, power_density(f, power));
}

std::vector<double> gradient_sq_density(const GridField& f) {
  const int N = f.N();
  const double inv2h = 1.0 / (2.0 * f.h());
  std::vector<double> out(f.points(), 0.0);
  for (int c = 0; c < f.ncomp(); ++c) {
    const double* u = f.component(c);
#pragma omp parallel for schedule(static)
    for (int i = 0; i < N; ++i) {
      const int ip = (i + 1) % N, im = (i + N - 1) % N;
      for (int j = 0; j < N; ++j) {
        const int jp = (j + 1) % N, jm = (j + N - 1) % N;
        for (int k = 0; k < N; ++k) {
          const int kp = (k + 1) % N, km = (k + N - 1) % N;
          const double dx = (u[f.index(ip, j, k)] - u[f.index(im, j, k)]) * inv2h;
          const double dy = (u[f.index(i, jp, k)] - u[f.index(i, jm, k)]) * inv2h;
          const double dz = (u[f.index(i, j, kp)] - u[f.index(i, j, km)]) * inv2h;
          out[f.index(i, j, k)] += dx * dx + dy * dy + dz * dz;
        }
      }
    }
  }
  return out;
}

double discrete_gradient_sq(const GridField& f, const Cube& q) {
  cube_weights(f, q);
  return cube_integral_density(f, q, gradient_sq_density(f));
}

double ball_integral(const GridField& f, const Vec3& c, double R, const std::vector<double>& density) {
  const BallWeights bw = ball_weights(f.L(), f.N(), c, R);
  double s = 0.0;
  for (std::size_t i = 0; i < bw.cells.size(); ++i) s += bw.frac[i] * density[bw.cells[i]];
  const double h = f.h();
  return s * h * h * h;
}

double collar_leakage(const GridField& f) {
  const int N = f.N();
  const double edge = 0.9 * f.L();
  double m = 0.0;
  for (int i = 0; i < N; ++i)
    for (int j = 0; j < N; ++j)
      for (int k = 0; k < N; ++k) {
        const Vec3 x{f.coord(i), f.coord(j), f.coord(k)};
        if (norm_inf(x) <= edge) continue;
        double s = 0.0;
        for (int c = 0; c < f.ncomp(); ++c) s += f.at(c, i, j, k) * f.at(c, i, j, k);
        m = std::max(m, std::sqrt(s));
      }
  return m;
}

}  // namespace nswlab
