#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "nswlab/cube_cover.hpp"
#include "nswlab/grid_field.hpp"

namespace nswlab {

enum class GeneratorKind { gaussian_vortex, growth_radial, dss, log_damped_radial };

const char* to_string(GeneratorKind kind);
GeneratorKind generator_kind_from(const std::string& name);

struct GeneratorSpec {
  GeneratorKind kind = GeneratorKind::gaussian_vortex;
  double amplitude = 1.0;
  std::uint64_t seed = 0;
  double gamma = -0.5;   // growth_radial exponent
  double lambda = 2.0;   // dss factor
};

void validate(const GeneratorSpec& spec);

/// Swirl field A * W(r) * g(r) * (a x (x - c)) with a seeded unit axis a, a
/// kind-specific radial profile g and an outer collar window W; Leray-projected.
GridField generate(const GeneratorSpec& spec, double L, int N);

/// Same construction before projection, for oracle comparisons.
GridField generate_unprojected(const GeneratorSpec& spec, double L, int N);

/// Radial profile g(r) of a generator (without window and amplitude).
double generator_profile(const GeneratorSpec& spec, double r);

/// Collar window: 1 for r <= 0.7 L, 0 for r >= 0.95 L, quintic smoothstep between.
double collar_window(double r, double L);

/// Scalar |x|^gamma sampled at cell centers, clamped to its value at radius h/2.
GridField radial_power_field(double L, int N, double gamma);

/// Beltrami mode of wavenumber m*pi/L under a compact radial window,
/// u = curl(W A) with curl A = k A; exactly solenoidal. W falls from 1 to 0
/// between inner*L and outer*L.
GridField windowed_beltrami(double L, int N, int m, double inner = 0.45, double outer = 0.85);

/// |f|^power per grid point.
std::vector<double> power_density(const GridField& f, double power);

/// Integral over Q of a per-point density (N^3 array on f's grid).
double cube_integral_density(const GridField& f, const Cube& q, const std::vector<double>& density);

/// Midpoint quadrature of |f|^power over Q with partial-cell weights.
double cube_integral(const GridField& f, const Cube& q, double power);

/// sum_ij (D_j f_i)^2 with centered differences, periodic wrap.
std::vector<double> gradient_sq_density(const GridField& f);
double discrete_gradient_sq(const GridField& f, const Cube& q);

/// Integral of a density over the ball B_R(c).
double ball_integral(const GridField& f, const Vec3& c, double R, const std::vector<double>& density);

/// Max |f| over points with |x|_inf > 0.9 L.
double collar_leakage(const GridField& f);

/// Uniform double in [0,1) from a 64-bit draw; identical on every platform.
double unit_double(std::uint64_t bits);

}  // namespace nswlab
