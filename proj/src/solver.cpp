#include "nswlab/solver.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>

#include "json.hpp"

#include "nswlab/error.hpp"
#include "nswlab/pressure.hpp"

namespace nswlab {

namespace {

constexpr char kCheckpointMagic[8] = {'N', 'S', 'W', 'C', 'K', 'P', 'T', '\0'};
constexpr std::uint32_t kCheckpointVersion = 1;

std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

bool is_pow2(int n) { return n > 0 && (n & (n - 1)) == 0; }

template <class T>
void put(std::ostream& os, const T& v) {
  os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <class T>
T get(std::istream& is) {
  T v{};
  is.read(reinterpret_cast<char*>(&v), sizeof(T));
  require(static_cast<bool>(is), ErrorKind::io_error, "checkpoint truncated");
  return v;
}

}  // namespace

const char* to_string(SolverMode mode) {
  return mode == SolverMode::navier_stokes ? "navier_stokes" : "stokes_heat";
}

SolverMode solver_mode_from(const std::string& name) {
  if (name == "navier_stokes") return SolverMode::navier_stokes;
  if (name == "stokes_heat") return SolverMode::stokes_heat;
  fail(ErrorKind::invalid_argument, "unknown solver mode '" + name + "'");
}

void SolverConfig::validate() const {
  require(is_pow2(N) && N >= 8, ErrorKind::invalid_argument, "N must be a power of two >= 8");
  require(L > 0.0 && dt > 0.0 && t_end >= 0.0, ErrorKind::invalid_argument, "L and dt must be positive, t_end >= 0");
  require(output_every >= 1, ErrorKind::invalid_argument, "output_every must be >= 1");
  require(cfl > 0.0, ErrorKind::invalid_argument, "cfl must be positive");
  const double n = t_end / dt;
  require(std::fabs(n - std::round(n)) <= 1e-9 * std::max(1.0, n), ErrorKind::invalid_argument,
          "t_end must be a whole number of steps");
}

long SolverConfig::steps() const { return std::lround(t_end / dt); }

std::string SolverConfig::to_json() const {
  nlohmann::ordered_json j;
  j["N"] = N;
  j["L"] = L;
  j["dt"] = dt;
  j["t_end"] = t_end;
  j["mode"] = to_string(mode);
  j["output_every"] = output_every;
  j["cfl"] = cfl;
  j["top_octave_threshold"] = top_octave_threshold;
  j["init"] = init;
  return j.dump(2);
}

SolverConfig SolverConfig::from_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const std::exception& e) {
    fail(ErrorKind::io_error, std::string("solver config: ") + e.what());
  }
  SolverConfig c;
  try {
    c.N = j.value("N", c.N);
    c.L = j.value("L", c.L);
    c.dt = j.value("dt", c.dt);
    c.t_end = j.value("t_end", c.t_end);
    c.mode = solver_mode_from(j.value("mode", std::string(to_string(c.mode))));
    c.output_every = j.value("output_every", c.output_every);
    c.cfl = j.value("cfl", c.cfl);
    c.top_octave_threshold = j.value("top_octave_threshold", c.top_octave_threshold);
    c.init = j.value("init", c.init);
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::io_error, std::string("solver config: ") + e.what());
  }
  return c;
}

std::uint64_t SolverConfig::hash() const { return fnv1a(to_json()); }

std::uint64_t SolverConfig::dynamics_hash() const {
  nlohmann::ordered_json j;
  j["N"] = N;
  j["L"] = L;
  j["dt"] = dt;
  j["mode"] = to_string(mode);
  return fnv1a(j.dump());
}

std::string step_log_csv(const std::vector<StepLog>& log) {
  std::ostringstream os;
  os.precision(17);
  os << "step,t,energy,dissipation,cfl,top_octave\n";
  for (const auto& s : log)
    os << s.step << ',' << s.t << ',' << s.energy << ',' << s.dissipation << ',' << s.cfl_number << ','
       << s.top_octave << '\n';
  return os.str();
}

Solver::Solver(const SolverConfig& config) : config_(config) {
  config_.validate();
  const int N = config_.N;
  fft_ = std::make_unique<Fft3>(N, N, N);
  const std::size_t nc = fft_->complex_size();
  k2_.resize(nc);
  keep_.resize(nc);
  const double kf = M_PI / config_.L;
  const int cut = N / 3;
  for (int i = 0; i < N; ++i)
    for (int j = 0; j < N; ++j)
      for (int k = 0; k < fft_->n2c(); ++k) {
        const std::size_t id = (static_cast<std::size_t>(i) * N + j) * fft_->n2c() + k;
        const int a = mode_of(i, N), b = mode_of(j, N);
        k2_[id] = kf * kf * (double(a) * a + double(b) * b + double(k) * k);
        keep_[id] = std::abs(a) <= cut && std::abs(b) <= cut && k <= cut;
      }
  for (auto& c : u_) c.assign(nc, 0.0);
}

Solver::Solver(const SolverConfig& config, const GridField& u0) : Solver(config) {
  require(u0.ncomp() == 3 && u0.N() == config_.N && u0.L() == config_.L, ErrorKind::invalid_argument,
          "initial field does not match the solver grid");
  const double div = spectral_divergence_max(u0);
  require(div <= 1e-8 * std::max(1.0, u0.max_abs() * M_PI * config_.N / config_.L), ErrorKind::invalid_argument,
          "initial field is not divergence-free; project it first");
  const int N = config_.N;
  for (int c = 0; c < 3; ++c) {
    u_[c] = fft_->forward_copy(u0.component(c));
    for (int i = 0; i < N; ++i)
      for (int j = 0; j < N; ++j)
        for (int k = 0; k < fft_->n2c(); ++k)
          if (i == N / 2 || j == N / 2 || k == N / 2)
            u_[c][(static_cast<std::size_t>(i) * N + j) * fft_->n2c() + k] = 0.0;
  }
}

std::vector<double> Solver::physical(const std::vector<cplx>& s) {
  std::vector<double> out(fft_->real_size());
  fft_->inverse_into(s.data(), out.data(), 1.0 / static_cast<double>(fft_->real_size()));
  return out;
}

double Solver::max_speed(const std::vector<cplx> (&u)[3]) {
  std::vector<double> sq(fft_->real_size(), 0.0);
  for (int c = 0; c < 3; ++c) {
    const auto v = physical(u[c]);
    for (std::size_t i = 0; i < sq.size(); ++i) sq[i] += v[i] * v[i];
  }
  double m = 0.0;
  for (double v : sq) {
    require(std::isfinite(v), ErrorKind::runtime_abort, "non-finite velocity at step " + std::to_string(step_));
    m = std::max(m, v);
  }
  return std::sqrt(m);
}

void Solver::nonlinear(const std::vector<cplx> (&u)[3], std::vector<cplx> (&out)[3]) {
  const int N = config_.N;
  const int nc = fft_->n2c();
  const double kf = M_PI / config_.L;
  std::vector<double> up[3], wp[3];
  std::vector<cplx> w(fft_->complex_size());
  for (int c = 0; c < 3; ++c) up[c] = physical(u[c]);
  for (int c = 0; c < 3; ++c) {
    // omega_c = i (k_a u_b - k_b u_a) with (c, a, b) cyclic
    const int a = (c + 1) % 3, b = (c + 2) % 3;
    for (int i = 0; i < N; ++i)
      for (int j = 0; j < N; ++j)
        for (int k = 0; k < nc; ++k) {
          const std::size_t id = (static_cast<std::size_t>(i) * N + j) * nc + k;
          const double kv[3] = {kf * mode_of(i, N), kf * mode_of(j, N), kf * k};
          w[id] = cplx(0.0, 1.0) * (kv[a] * u[b][id] - kv[b] * u[a][id]);
        }
    wp[c] = physical(w);
  }
  double speed = 0.0;
  for (std::size_t i = 0; i < up[0].size(); ++i) {
    const double s = up[0][i] * up[0][i] + up[1][i] * up[1][i] + up[2][i] * up[2][i];
    require(std::isfinite(s), ErrorKind::runtime_abort, "non-finite velocity at step " + std::to_string(step_));
    speed = std::max(speed, s);
  }
  cfl_last_ = std::max(cfl_last_, config_.dt * std::sqrt(speed) * config_.N / (2.0 * config_.L));
  std::vector<double> cr(up[0].size());
  for (int c = 0; c < 3; ++c) {
    const int a = (c + 1) % 3, b = (c + 2) % 3;
    for (std::size_t i = 0; i < cr.size(); ++i) cr[i] = up[a][i] * wp[b][i] - up[b][i] * wp[a][i];
    out[c] = fft_->forward_copy(cr.data());
  }
  for (int i = 0; i < N; ++i)
    for (int j = 0; j < N; ++j)
      for (int k = 0; k < nc; ++k) {
        const std::size_t id = (static_cast<std::size_t>(i) * N + j) * nc + k;
        if (!keep_[id] || k2_[id] == 0.0) {
          for (auto& o : out) o[id] = 0.0;
          continue;
        }
        const double kv[3] = {kf * mode_of(i, N), kf * mode_of(j, N), kf * k};
        const cplx kd = (kv[0] * out[0][id] + kv[1] * out[1][id] + kv[2] * out[2][id]) / k2_[id];
        for (int c = 0; c < 3; ++c) out[c][id] -= kv[c] * kd;
      }
}

void Solver::step() {
  const double dt = config_.dt;
  const std::size_t nc = fft_->complex_size();
  cfl_last_ = 0.0;
  if (config_.mode == SolverMode::stokes_heat) {
    cfl_last_ = dt * max_speed(u_) * config_.N / (2.0 * config_.L);
    for (std::size_t id = 0; id < nc; ++id) {
      const double e = std::exp(-k2_[id] * dt);
      for (auto& c : u_) c[id] *= e;
    }
    ++step_;
    return;
  }
  std::vector<cplx> n1[3], n2[3], n3[3], s2[3], s3[3];
  nonlinear(u_, n1);
  require(cfl_last_ <= config_.cfl, ErrorKind::runtime_abort,
          "CFL violation at step " + std::to_string(step_) + ": dt max|u| / h = " + std::to_string(cfl_last_) +
              " > " + std::to_string(config_.cfl));
  for (int c = 0; c < 3; ++c) s2[c].resize(nc);
  for (std::size_t id = 0; id < nc; ++id) {
    const double e1 = std::exp(-k2_[id] * dt / 3.0);
    for (int c = 0; c < 3; ++c) s2[c][id] = e1 * (u_[c][id] + dt / 3.0 * n1[c][id]);
  }
  nonlinear(s2, n2);
  for (int c = 0; c < 3; ++c) s3[c].resize(nc);
  for (std::size_t id = 0; id < nc; ++id) {
    const double e1 = std::exp(-k2_[id] * dt / 3.0), e2 = std::exp(-k2_[id] * 2.0 * dt / 3.0);
    for (int c = 0; c < 3; ++c) s3[c][id] = e2 * u_[c][id] + 2.0 * dt / 3.0 * e1 * n2[c][id];
  }
  nonlinear(s3, n3);
  for (std::size_t id = 0; id < nc; ++id) {
    const double e1 = std::exp(-k2_[id] * dt / 3.0), e3 = std::exp(-k2_[id] * dt);
    for (int c = 0; c < 3; ++c)
      u_[c][id] = e3 * (u_[c][id] + dt / 4.0 * n1[c][id]) + 3.0 * dt / 4.0 * e1 * n3[c][id];
  }
  ++step_;
}

GridField Solver::velocity() const {
  GridField f(config_.L, config_.N, 3, time());
  const double scale = 1.0 / static_cast<double>(fft_->real_size());
  for (int c = 0; c < 3; ++c) fft_->inverse_into(u_[c].data(), f.component(c), scale);
  return f;
}

GridField Solver::pressure() const { return global_pressure(velocity()); }

StepLog Solver::monitor() const {
  StepLog s;
  s.step = step_;
  s.t = time();
  const int N = config_.N, nc = fft_->n2c();
  const double norm = std::pow(2.0 * config_.L, 3) / std::pow(static_cast<double>(N), 6);
  const double kmax = N / 3;
  double e = 0.0, d = 0.0, top = 0.0;
  for (int i = 0; i < N; ++i)
    for (int j = 0; j < N; ++j)
      for (int k = 0; k < nc; ++k) {
        const std::size_t id = (static_cast<std::size_t>(i) * N + j) * nc + k;
        const double w = (k == 0 || k == N / 2) ? 1.0 : 2.0;
        double m = 0.0;
        for (const auto& c : u_) m += std::norm(c[id]);
        e += w * m;
        d += w * m * k2_[id];
        const double a = mode_of(i, N), b = mode_of(j, N);
        if (std::sqrt(a * a + b * b + double(k) * k) > 0.5 * kmax) top += w * m;
      }
  s.energy = e * norm;
  s.dissipation = d * norm;
  s.top_octave = e > 0.0 ? top / e : 0.0;
  s.cfl_number = cfl_last_;
  return s;
}

void Solver::save_checkpoint(const std::string& path) const {
  std::ofstream os(path, std::ios::binary);
  require(static_cast<bool>(os), ErrorKind::io_error, "cannot write checkpoint " + path);
  os.write(kCheckpointMagic, sizeof kCheckpointMagic);
  put(os, kCheckpointVersion);
  put(os, static_cast<std::uint32_t>(config_.N));
  put(os, config_.L);
  put(os, config_.dynamics_hash());
  put(os, static_cast<std::int64_t>(step_));
  for (const auto& c : u_) os.write(reinterpret_cast<const char*>(c.data()), sizeof(cplx) * c.size());
  require(static_cast<bool>(os), ErrorKind::io_error, "checkpoint write failed");
}

Solver Solver::resume(const SolverConfig& config, const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  require(static_cast<bool>(is), ErrorKind::io_error, "cannot open checkpoint " + path);
  char magic[8];
  is.read(magic, sizeof magic);
  require(is && std::memcmp(magic, kCheckpointMagic, sizeof magic) == 0, ErrorKind::io_error, "not a checkpoint file");
  const auto version = get<std::uint32_t>(is);
  require(version == kCheckpointVersion, ErrorKind::io_error,
          "checkpoint version " + std::to_string(version) + ", expected " + std::to_string(kCheckpointVersion));
  const auto n = get<std::uint32_t>(is);
  const auto L = get<double>(is);
  const auto h = get<std::uint64_t>(is);
  require(static_cast<int>(n) == config.N && L == config.L, ErrorKind::invalid_argument,
          "checkpoint grid differs from the config");
  require(h == config.dynamics_hash(), ErrorKind::invalid_argument,
          "checkpoint config hash differs (dt, mode or grid changed)");
  Solver s(config);
  s.step_ = get<std::int64_t>(is);
  for (auto& c : s.u_) {
    is.read(reinterpret_cast<char*>(c.data()), static_cast<std::streamsize>(sizeof(cplx) * c.size()));
    require(static_cast<bool>(is), ErrorKind::io_error, "checkpoint truncated");
  }
  return s;
}

SolverRun run(const SolverConfig& config, const GridField& u0) {
  Solver s(config, u0);
  return run(s);
}

SolverRun run(Solver& solver) {
  SolverRun r;
  const SolverConfig& c = solver.config();
  const long total = c.steps();
  auto record = [&] {
    r.u.push_back(solver.velocity());
    r.p.push_back(global_pressure(r.u.back()));
  };
  r.log.push_back(solver.monitor());
  if (solver.step_count() % c.output_every == 0 || solver.step_count() == total) record();
  while (solver.step_count() < total) {
    solver.step();
    r.log.push_back(solver.monitor());
    if (solver.step_count() % c.output_every == 0 || solver.step_count() == total) record();
  }
  return r;
}

}  // namespace nswlab
