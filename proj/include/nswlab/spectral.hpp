#pragma once

#include <complex>
#include <cstddef>
#include <vector>

#include "nswlab/grid_field.hpp"

namespace nswlab {

using cplx = std::complex<double>;

/// Real-to-complex 3D transform of an n0 x n1 x n2 array (last index fastest).
/// Plans are made with FFTW_ESTIMATE so results never depend on timing.
/// forward() leaves the half spectrum in spectrum(); inverse() is unnormalized.
class Fft3 {
 public:
  Fft3(int n0, int n1, int n2);
  ~Fft3();
  Fft3(const Fft3&) = delete;
  Fft3& operator=(const Fft3&) = delete;

  int n0() const { return n_[0]; }
  int n1() const { return n_[1]; }
  int n2() const { return n_[2]; }
  int n2c() const { return n_[2] / 2 + 1; }
  std::size_t real_size() const { return static_cast<std::size_t>(n_[0]) * n_[1] * n_[2]; }
  std::size_t complex_size() const { return static_cast<std::size_t>(n_[0]) * n_[1] * n2c(); }

  double* real() { return real_; }
  cplx* spectrum() { return spec_; }

  void forward();  // real() -> spectrum()
  void inverse();  // spectrum() -> real(); spectrum() is clobbered

  void forward(const double* in);
  std::vector<cplx> forward_copy(const double* in);
  void inverse_into(const cplx* in, double* out, double scale);

 private:
  int n_[3];
  double* real_ = nullptr;
  cplx* spec_ = nullptr;
  void* fwd_ = nullptr;
  void* inv_ = nullptr;
};

/// Signed mode number along a full axis.
inline int mode_of(int i, int N) { return i < N / 2 ? i : i - N; }

/// Leray projection on the periodic extension. Nyquist planes are zeroed, so the
/// spectral divergence of the result vanishes identically.
GridField leray_project(const GridField& f);

/// Max over grid points of |spectral divergence|.
double spectral_divergence_max(const GridField& f);

/// Spectral derivative d/dx_axis of one component.
std::vector<double> spectral_derivative(const GridField& f, int comp, int axis);

/// sum_ij (d_j f_i)^2 with spectral derivatives.
std::vector<double> spectral_gradient_sq(const GridField& f);

}  // namespace nswlab
