#include "nswlab/spectral.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <mutex>

#include "nswlab/error.hpp"

namespace nswlab {

namespace {
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}
}  // namespace

Fft3::Fft3(int n0, int n1, int n2) : n_{n0, n1, n2} {
  require(n0 > 0 && n1 > 0 && n2 > 1, ErrorKind::invalid_argument, "bad FFT dimensions");
  real_ = static_cast<double*>(fftw_malloc(sizeof(double) * real_size()));
  spec_ = reinterpret_cast<cplx*>(fftw_malloc(sizeof(fftw_complex) * complex_size()));
  require(real_ && spec_, ErrorKind::runtime_abort, "FFT buffer allocation failed");
  std::lock_guard<std::mutex> lock(planner_mutex());
  fwd_ = fftw_plan_dft_r2c_3d(n0, n1, n2, real_, reinterpret_cast<fftw_complex*>(spec_), FFTW_ESTIMATE);
  inv_ = fftw_plan_dft_c2r_3d(n0, n1, n2, reinterpret_cast<fftw_complex*>(spec_), real_, FFTW_ESTIMATE);
}

Fft3::~Fft3() {
  std::lock_guard<std::mutex> lock(planner_mutex());
  fftw_destroy_plan(static_cast<fftw_plan>(fwd_));
  fftw_destroy_plan(static_cast<fftw_plan>(inv_));
  fftw_free(real_);
  fftw_free(spec_);
}

void Fft3::forward() { fftw_execute(static_cast<fftw_plan>(fwd_)); }
void Fft3::inverse() { fftw_execute(static_cast<fftw_plan>(inv_)); }

void Fft3::forward(const double* in) {
  std::copy(in, in + real_size(), real_);
  forward();
}

std::vector<cplx> Fft3::forward_copy(const double* in) {
  forward(in);
  return std::vector<cplx>(spec_, spec_ + complex_size());
}

void Fft3::inverse_into(const cplx* in, double* out, double scale) {
  std::copy(in, in + complex_size(), spec_);
  inverse();
  const std::size_t n = real_size();
  for (std::size_t i = 0; i < n; ++i) out[i] = real_[i] * scale;
}

GridField leray_project(const GridField& f) {
  require(f.ncomp() == 3, ErrorKind::invalid_argument, "Leray projection needs a 3-component field");
  const int N = f.N();
  Fft3 fft(N, N, N);
  std::vector<cplx> u[3];
  for (int c = 0; c < 3; ++c) u[c] = fft.forward_copy(f.component(c));
  const int nc = fft.n2c();
  const double kf = M_PI / f.L();
  for (int i = 0; i < N; ++i)
    for (int j = 0; j < N; ++j)
      for (int k = 0; k < nc; ++k) {
        const std::size_t s = (static_cast<std::size_t>(i) * N + j) * nc + k;
        if (i == N / 2 || j == N / 2 || k == N / 2) {
          for (int c = 0; c < 3; ++c) u[c][s] = 0.0;
          continue;
        }
        const double kv[3] = {kf * mode_of(i, N), kf * mode_of(j, N), kf * k};
        const double k2 = kv[0] * kv[0] + kv[1] * kv[1] + kv[2] * kv[2];
        if (k2 == 0.0) continue;
        const cplx kdotu = kv[0] * u[0][s] + kv[1] * u[1][s] + kv[2] * u[2][s];
        for (int c = 0; c < 3; ++c) u[c][s] -= kv[c] * kdotu / k2;
      }
  GridField out(f.L(), N, 3, f.time());
  const double scale = 1.0 / static_cast<double>(f.points());
  for (int c = 0; c < 3; ++c) fft.inverse_into(u[c].data(), out.component(c), scale);
  return out;
}

double spectral_divergence_max(const GridField& f) {
  require(f.ncomp() == 3, ErrorKind::invalid_argument, "divergence needs a 3-component field");
  const int N = f.N();
  Fft3 fft(N, N, N);
  const int nc = fft.n2c();
  std::vector<cplx> div(fft.complex_size(), 0.0);
  const double kf = M_PI / f.L();
  for (int c = 0; c < 3; ++c) {
    fft.forward(f.component(c));
    const cplx* s = fft.spectrum();
    for (int i = 0; i < N; ++i)
      for (int j = 0; j < N; ++j)
        for (int k = 0; k < nc; ++k) {
          if (i == N / 2 || j == N / 2 || k == N / 2) continue;
          const int m = c == 0 ? mode_of(i, N) : c == 1 ? mode_of(j, N) : k;
          const std::size_t id = (static_cast<std::size_t>(i) * N + j) * nc + k;
          div[id] += cplx(0.0, kf * m) * s[id];
        }
  }
  std::vector<double> out(f.points());
  fft.inverse_into(div.data(), out.data(), 1.0 / static_cast<double>(f.points()));
  double m = 0.0;
  for (double v : out) m = std::max(m, std::fabs(v));
  return m;
}

std::vector<double> spectral_derivative(const GridField& f, int comp, int axis) {
  const int N = f.N();
  Fft3 fft(N, N, N);
  const int nc = fft.n2c();
  fft.forward(f.component(comp));
  cplx* s = fft.spectrum();
  const double kf = M_PI / f.L();
  for (int i = 0; i < N; ++i)
    for (int j = 0; j < N; ++j)
      for (int k = 0; k < nc; ++k) {
        const std::size_t id = (static_cast<std::size_t>(i) * N + j) * nc + k;
        const int idx = axis == 0 ? i : axis == 1 ? j : k;
        const int m = axis == 2 ? k : mode_of(idx, N);
        if (idx == N / 2) {
          s[id] = 0.0;
          continue;
        }
        s[id] *= cplx(0.0, kf * m);
      }
  std::vector<double> out(f.points());
  fft.inverse();
  const double scale = 1.0 / static_cast<double>(f.points());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = fft.real()[i] * scale;
  return out;
}

std::vector<double> spectral_gradient_sq(const GridField& f) {
  const int N = f.N();
  Fft3 fft(N, N, N);
  const int nc = fft.n2c();
  const double kf = M_PI / f.L();
  const double scale = 1.0 / static_cast<double>(f.points());
  std::vector<double> out(f.points(), 0.0), d(f.points());
  std::vector<cplx> work(fft.complex_size());
  for (int c = 0; c < f.ncomp(); ++c) {
    const auto spec = fft.forward_copy(f.component(c));
    for (int axis = 0; axis < 3; ++axis) {
      for (int i = 0; i < N; ++i)
        for (int j = 0; j < N; ++j)
          for (int k = 0; k < nc; ++k) {
            const std::size_t id = (static_cast<std::size_t>(i) * N + j) * nc + k;
            const int idx = axis == 0 ? i : axis == 1 ? j : k;
            const int m = axis == 2 ? k : mode_of(idx, N);
            work[id] = idx == N / 2 ? cplx(0.0) : spec[id] * cplx(0.0, kf * m);
          }
      fft.inverse_into(work.data(), d.data(), scale);
      for (std::size_t s2 = 0; s2 < out.size(); ++s2) out[s2] += d[s2] * d[s2];
    }
  }
  return out;
}

}  // namespace nswlab
