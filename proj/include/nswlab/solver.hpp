#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "nswlab/grid_field.hpp"
#include "nswlab/spectral.hpp"

namespace nswlab {

enum class SolverMode { navier_stokes, stokes_heat };

const char* to_string(SolverMode mode);
SolverMode solver_mode_from(const std::string& name);

struct SolverConfig {
  int N = 64;
  double L = 8.0;
  double dt = 0.01;
  double t_end = 0.1;
  SolverMode mode = SolverMode::navier_stokes;
  int output_every = 1;
  double cfl = 0.5;                  // abort when dt max|u| / h exceeds this
  double top_octave_threshold = 1e-4;  // resolution monitor, reported only
  std::string init;                  // description or path of the initial field

  void validate() const;
  long steps() const;
  std::string to_json() const;
  static SolverConfig from_json(const std::string& text);
  /// FNV-1a over the canonical JSON form.
  std::uint64_t hash() const;
  /// Same over the fields that determine the discrete dynamics (N, L, dt, mode).
  std::uint64_t dynamics_hash() const;
};

struct StepLog {
  long step = 0;
  double t = 0.0;
  double energy = 0.0;       // int |u|^2
  double dissipation = 0.0;  // int |grad u|^2
  double cfl_number = 0.0;
  double top_octave = 0.0;   // energy fraction in the upper half of the dealiased band
};

std::string step_log_csv(const std::vector<StepLog>& log);

/// Pseudo-spectral integrator on the periodic box: exact integrating factor for
/// the Laplacian, third-order Heun stages for the dealiased rotational
/// nonlinearity, Leray projection at every stage.
class Solver {
 public:
  Solver(const SolverConfig& config, const GridField& u0);

  const SolverConfig& config() const { return config_; }
  long step_count() const { return step_; }
  double time() const { return static_cast<double>(step_) * config_.dt; }

  void step();
  GridField velocity() const;
  GridField pressure() const;
  StepLog monitor() const;

  void save_checkpoint(const std::string& path) const;
  /// Refuses files whose version, grid or config hash differ from `config`.
  static Solver resume(const SolverConfig& config, const std::string& path);

 private:
  explicit Solver(const SolverConfig& config);
  void nonlinear(const std::vector<cplx> (&u)[3], std::vector<cplx> (&out)[3]);
  double max_speed(const std::vector<cplx> (&u)[3]);
  std::vector<double> physical(const std::vector<cplx>& s);

  SolverConfig config_;
  long step_ = 0;
  std::unique_ptr<Fft3> fft_;
  std::vector<cplx> u_[3];
  std::vector<double> k2_;
  std::vector<unsigned char> keep_;  // 2/3 rule mask
  double cfl_last_ = 0.0;
};

struct SolverRun {
  std::vector<GridField> u;
  std::vector<GridField> p;
  std::vector<StepLog> log;  // one entry per step, including step 0
};

/// Advances to t_end, recording (u, p) every `output_every` steps and at the start.
SolverRun run(const SolverConfig& config, const GridField& u0);
/// Continues an existing solver to t_end.
SolverRun run(Solver& solver);

}  // namespace nswlab
