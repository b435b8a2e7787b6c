// Acceptance run: one PASS/FAIL line per criterion.
#include <unistd.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "nswlab/cli.hpp"
#include "nswlab/cube_cover.hpp"
#include "nswlab/energy.hpp"
#include "nswlab/field_lab.hpp"
#include "nswlab/pressure.hpp"
#include "nswlab/regularity.hpp"
#include "nswlab/solver.hpp"
#include "nswlab/weighted_norms.hpp"

using namespace nswlab;
namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, double a) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

// 1
Outcome cover_structure() {
  const auto t0 = std::chrono::steady_clock::now();
  const CubeCover c = build_cover(6);
  const PropertyReport r = verify_cover_properties(c);
  bool counts = c.size() == 64 + 56 * 6;
  for (std::size_t s = 0; s < r.cubes_per_shell.size(); ++s) counts = counts && r.cubes_per_shell[s] == (s ? 56 : 64);
  const double t = seconds_since(t0);
  Outcome o;
  o.pass = r.partition_ok && r.volume_ok && r.shell_counts_ok && counts && r.adjacent_volume_ratio.max == 8.0 &&
           r.cumulative_affine && t < 5.0;
  o.detail = std::to_string(c.size()) + " cubes, adjacent volume ratio max " + fmt("%g", r.adjacent_volume_ratio.max);
  return o;
}

std::vector<GeneratorSpec> generator_suite() {
  std::vector<GeneratorSpec> s;
  auto add = [&](GeneratorKind k, std::uint64_t seed, double gamma) {
    GeneratorSpec g;
    g.kind = k;
    g.seed = seed;
    g.gamma = gamma;
    s.push_back(g);
  };
  for (std::uint64_t k = 0; k < 3; ++k) add(GeneratorKind::gaussian_vortex, k, -0.5);
  add(GeneratorKind::growth_radial, 0, -0.5);
  add(GeneratorKind::growth_radial, 1, -0.8);
  add(GeneratorKind::growth_radial, 2, -0.25);
  add(GeneratorKind::dss, 0, -0.5);
  add(GeneratorKind::dss, 1, -0.5);
  add(GeneratorKind::log_damped_radial, 0, -0.5);
  add(GeneratorKind::log_damped_radial, 1, -0.5);
  return s;
}

// 2
Outcome norm_equivalence() {
  const auto t0 = std::chrono::steady_clock::now();
  std::map<int, double> c;
  for (int N : {128, 256}) {
    double lo = INFINITY, hi = 0.0;
    for (const auto& g : generator_suite()) {
      const double r = equivalence_report(generate(g, 32.0, N), 4).ratio_m_herz;
      lo = std::min(lo, r);
      hi = std::max(hi, r);
    }
    c[N] = std::max(1.0 / lo, hi);
  }
  const double t = seconds_since(t0);
  Outcome o;
  const double drift = std::fabs(c[256] / c[128] - 1.0);
  o.pass = std::isfinite(c[256]) && drift <= 0.1 && t < 120.0;
  o.detail = "c = " + fmt("%.4f", c[256]) + " at N=256, " + fmt("%.4f", c[128]) + " at N=128";
  return o;
}

// 3
Outcome ring_scale() {
  const double L = 128;
  const int N = 256;
  GeneratorSpec g;
  g.kind = GeneratorKind::dss;
  const auto dss = equivalence_report(generate(g, L, N), 6);
  g.kind = GeneratorKind::log_damped_radial;
  const auto logd = equivalence_report(generate(g, L, N), 6);
  const auto pw = equivalence_report(radial_power_field(L, N, -0.5), 6);
  const double drop_dss = dss.cn[1] / dss.cn[5], drop_log = logd.cn[1] / logd.cn[5];
  double mean = 0.0;
  for (double v : pw.cn) mean += v / pw.cn.size();
  double flat = 0.0, ring = 0.0;
  for (double v : pw.cn) flat = std::max(flat, std::fabs(v / mean - 1.0));
  for (double v : pw.ring.values) ring = std::max(ring, std::fabs(v / (2 * M_PI) - 1.0));
  Outcome o;
  o.pass = drop_dss >= 2.0 && drop_log >= 2.0 && flat <= 0.2 && ring <= 0.1;
  o.detail = "drop n=2..6: dss " + fmt("%.2f", drop_dss) + ", log-damped " + fmt("%.2f", drop_log) +
             "; power field spread " + fmt("%.3f", flat) + ", ring vs 2pi " + fmt("%.3f", ring);
  return o;
}

double dss_energy_oracle(const GeneratorSpec& g, double R) {
  // E(R) = 8 pi/3 int_0^R g(r)^2 r^4 dr, midpoint rule in s = log r
  const int n = 200000;
  const double a = std::log(R) - 60.0, b = std::log(R);
  double s = 0.0;
  for (int i = 0; i < n; ++i) {
    const double r = std::exp(a + (i + 0.5) * (b - a) / n), p = generator_profile(g, r);
    s += p * p * std::pow(r, 5);
  }
  return 8 * M_PI / 3 * s * (b - a) / n;
}

// 4
Outcome dss_scaling() {
  GeneratorSpec g;
  g.kind = GeneratorKind::dss;
  const GridField f = generate(g, 16.0, 256);
  const std::vector<double> radii{0.5, 1, 2, 4, 8};
  const auto shells = radial_shell_integrals(f, f.magnitude_sq(), radii);
  std::vector<double> E;
  double acc = 0.0;
  for (double s : shells) E.push_back(acc += s);
  double worst = 0.0, oracle = 0.0;
  for (std::size_t i = 0; i + 1 < E.size(); ++i) worst = std::max(worst, std::fabs(E[i + 1] / (2 * E[i]) - 1.0));
  for (std::size_t i = 0; i < E.size(); ++i)
    oracle = std::max(oracle, std::fabs(E[i] / dss_energy_oracle(g, radii[i]) - 1.0));
  Outcome o;
  o.pass = worst <= 0.05 && oracle <= 0.05;
  o.detail = "max |E(2R)/2E(R) - 1| " + fmt("%.4f", worst) + ", max deviation from oracle " + fmt("%.4f", oracle);
  return o;
}

double max_expansion_residual(int N) {
  const GridField u = windowed_beltrami(8.0, N, 3);
  const GridField p = global_pressure(u);
  const CubeCover cover = build_cover(2);
  const auto idx = interior_indices(cover);
  const LocalPressure lp(u, star_window(u, cover, idx));
  double worst = 0.0;
  for (auto i : idx) worst = std::max(worst, pressure_expansion_residual(p, lp, cover[i]).residual);
  return worst;
}

// 5
Outcome pressure_expansion() {
  const auto t0 = std::chrono::steady_clock::now();
  const double r128 = max_expansion_residual(128), r256 = max_expansion_residual(256);
  const double t = seconds_since(t0), ratio = r256 / r128;
  Outcome o;
  o.pass = r128 <= 0.05 && ratio >= 0.25 && ratio <= 0.75 && t < 300.0;
  o.detail = "max residual " + fmt("%.4f", r128) + " at N=128, " + fmt("%.4f", r256) + " at N=256 (ratio " +
             fmt("%.3f", ratio) + ")";
  return o;
}

// 6
Outcome pressure_estimate() {
  std::map<int, double> mx;
  bool finite = true;
  for (int N : {64, 128}) {
    GeneratorSpec g;
    g.seed = 1;
    SolverConfig c;
    c.N = N;
    c.L = 16;
    c.dt = 0.02;
    c.t_end = 10 * c.dt;
    const SolverRun r = run(c, generate(g, c.L, N));
    const auto rep = pressure_estimate_check(r.u, r.p, build_refined_cover(build_cover(3), 1), 2.0, c.t_end);
    for (const auto& row : rep.rows) finite = finite && std::isfinite(row.ratio);
    mx[N] = rep.max_ratio;
  }
  const double drift = std::fabs(mx[128] / mx[64] - 1.0);
  Outcome o;
  o.pass = finite && mx[64] > 0.0 && drift <= 0.2;
  o.detail = "max ratio " + fmt("%.4f", mx[64]) + " at N=64, " + fmt("%.4f", mx[128]) + " at N=128";
  return o;
}

struct LeiSweep {
  double max_abs = 0.0;
  double min_rel = INFINITY;
};

LeiSweep lei_sweep(const SolverRun& r, const CubeCover& cover, LeiMode mode) {
  const auto dens = series_densities(r.u);
  LeiSweep s;
  for (auto i : interior_indices(cover)) {
    const auto res = lei_residual(r.u, r.p, dens, make_cutoff(cover[i], r.u[0]), mode);
    const double rel = res.residual / res.energy_scale;
    s.max_abs = std::max(s.max_abs, std::fabs(rel));
    s.min_rel = std::min(s.min_rel, rel);
  }
  return s;
}

// 7
Outcome local_energy() {
  const CubeCover cover = build_cover(1);
  GeneratorSpec g;
  g.amplitude = 20;
  g.seed = 1;
  std::map<int, double> calib;
  double h2dt = 0.0, nse_min = 0.0;
  for (int N : {64, 128}) {
    SolverConfig c;
    c.N = N;
    c.L = 4;
    c.t_end = 0.1;
    c.dt = 0.01 * 64 / N;
    const GridField u0 = generate(g, c.L, N);
    c.mode = SolverMode::stokes_heat;
    calib[N] = lei_sweep(run(c, u0), cover, LeiMode::stokes).max_abs;
    if (N == 64) {
      h2dt = u0.h() * u0.h() + c.dt;
      c.mode = SolverMode::navier_stokes;
      nse_min = lei_sweep(run(c, u0), cover, LeiMode::full).min_rel;
    }
  }
  const double tol = 2.0 * calib[64], reduction = calib[64] / calib[128];
  Outcome o;
  o.pass = reduction >= 3.0 && nse_min >= -tol;
  o.detail = "calibration C = " + fmt("%.4f", calib[64] / h2dt) + ", reduction " + fmt("%.2f", reduction) +
             "x; NSE min residual " + fmt("%.4g", nse_min) + " vs tol " + fmt("%.4g", tol);
  return o;
}

// 8
Outcome barrier() {
  std::mt19937_64 rng(20240);
  std::uniform_real_distribution<double> U(0.0, 1.0);
  int violations = 0;
  double worst = 0.0;
  for (int d = 0; d < 100; ++d) {
    const double a = 0.1 + 2 * U(rng), b1 = 2 * U(rng), b2 = 2 * U(rng), m = 1 + 4 * U(rng);
    const double T = gronwall_time(a, b1, b2, m);
    const auto r = integrate_barrier(a, b1, b2, m, T, 4000);
    if (!(r.max_f < 2 * a + r.error_estimate)) ++violations;
    worst = std::max(worst, r.max_f / (2 * a));
  }
  Outcome o;
  o.pass = violations == 0;
  o.detail = std::to_string(violations) + " violations in 100 draws, max f/2a " + fmt("%.6f", worst);
  return o;
}

// 9
Outcome apriori() {
  const double L = 32;
  const int N = 64;
  const CubeCover cover = build_cover(4);
  GeneratorSpec g;
  g.amplitude = 0.3;
  g.seed = 2;
  SolverConfig c;
  c.N = N;
  c.L = L;
  c.dt = 0.1;
  c.t_end = 8;
  const GridField u0 = generate(g, L, N);
  const SolverRun r = run(c, u0);
  const auto dens = series_densities(r.u);
  Calibration cal;
  bool pass = true;
  double prev_T = 0.0, prev_norm = INFINITY;
  std::ostringstream d;
  for (int n = 2; n <= 4; ++n) {
    const double ns = std::pow(cn_norm(u0, cover, n, 2.0).value, 2);
    const double Tn = existence_time(ns, n, 2, cal.c1, cal.c_star);
    const double c0 = std::max(1.0, cutoff_normalization(u0, cover, n));
    const auto a = apriori_bound_check(track_series(r.u, dens, cover, n, 2.0), ns, n, c0, std::min(Tn, c.t_end));
    pass = pass && a.pass && Tn >= prev_T && ns < prev_norm;
    prev_T = Tn;
    prev_norm = ns;
    d << "n=" << n << " T=" << fmt("%.3g", Tn) << " c0=" << fmt("%.3f", c0) << " used/bound=" << fmt("%.3f", a.used / a.bound)
      << (n < 4 ? "; " : "");
  }
  Outcome o;
  o.pass = pass;
  o.detail = d.str() + " (c1 = " + fmt("%g", cal.c1) + ")";
  return o;
}

// 10
Outcome region_geometry() {
  const auto t0 = std::chrono::steady_clock::now();
  bool pass = sigma_sq(1.0) == 0.8;
  double cov = 1.0;
  for (double delta : {0.25, 0.5, 1.0}) {
    const auto r = eventual_region(delta, 1.0, 3);
    bool bands = true;
    for (std::size_t i = 0; i < r.bands.size(); ++i) {
      bands = bands && r.bands[i].p_t_hi == 4 * r.bands[i].p_t_lo;
      if (i + 1 < r.bands.size()) bands = bands && r.bands[i].p_t_hi == r.bands[i + 1].p_t_lo;
    }
    pass = pass && bands && r.abut && r.nested && r.coverage == 1.0;
    cov = std::min(cov, r.coverage);
  }
  const double t = seconds_since(t0);
  Outcome o;
  o.pass = pass && t < 60.0;
  o.detail = "sigma^2(1) = " + fmt("%.17g", sigma_sq(1.0)) + ", min lattice coverage " + fmt("%g", cov);
  return o;
}

// 11
Outcome regularity_scan() {
  const CubeCover cover = build_cover(2);
  std::vector<GridField> zu, zp;
  for (int s = 0; s <= 4; ++s) {
    zu.emplace_back(8.0, 32, 3, 0.5 * s);
    zp.emplace_back(8.0, 32, 1, 0.5 * s);
  }
  const auto zero = scan(zu, zp, cover_cylinders(cover, zu, 2.0), 0.05, 1.0);

  GeneratorSpec g;
  g.seed = 4;
  SolverConfig c;
  c.N = 64;
  c.L = 8;
  c.dt = 0.1;
  c.t_end = 4;
  c.output_every = 2;
  const SolverRun r = run(c, generate(g, c.L, c.N));
  std::vector<GridField> u, p;
  for (std::size_t i = 0; i < r.u.size(); ++i)
    if (r.u[i].time() >= 2.0 - 1e-9) {
      u.push_back(r.u[i]);
      p.push_back(r.p[i]);
    }
  const auto late = scan(u, p, cover_cylinders(cover, u, 2.0), 0.05, 1.0);
  double eps_max = 0.0;
  for (const auto& z : late.cylinders) eps_max = std::max(eps_max, z.eps3);
  Outcome o;
  o.pass = zero.all_pass() && zero.outliers == 0 && late.all_pass() && late.outliers == 0 && !late.cylinders.empty();
  o.detail = "zero " + std::to_string(zero.passed) + "/" + std::to_string(zero.cylinders.size()) + ", late run " +
             std::to_string(late.passed) + "/" + std::to_string(late.cylinders.size()) + " (max eps^3 " +
             fmt("%.3g", eps_max) + ", C0 " + fmt("%.4f", late.c0) + ", outliers " + std::to_string(late.outliers) + ")";
  return o;
}

int tool(const std::vector<std::string>& args) {
  if (const char* t = std::getenv("NSWTOOL")) {
    std::string cmd = t;
    for (const auto& a : args) cmd += " '" + a + "'";
    const int st = std::system((cmd + " > /dev/null 2>&1").c_str());
    return WEXITSTATUS(st);
  }
  std::ostringstream out, err;
  return cli::run(args, out, err);
}

std::map<std::string, std::string> output_hashes(const fs::path& manifest) {
  std::ifstream in(manifest);
  const json m = json::parse(in);
  std::map<std::string, std::string> h;
  for (const auto& o : m["outputs"]) h[o["path"].get<std::string>()] = o["sha256"].get<std::string>();
  return h;
}

// 12
Outcome reproducibility() {
  const fs::path dir = fs::temp_directory_path() / ("nswlab_accept_" + std::to_string(::getpid()));
  fs::remove_all(dir);
  fs::create_directories(dir);
  auto pipeline = [&](const fs::path& d) {
    fs::create_directories(d);
    const std::string init = (d / "init.nswf").string();
    int code = tool({"generate", "--kind", "gaussian_vortex", "--amplitude", "0.5", "--seed", "3", "--L", "8", "--N",
                     "32", "--out", init});
    code = std::max(code, tool({"solve", "--init", init, "--dt", "0.1", "--t-end", "1", "--out-dir",
                                (d / "run").string()}));
    code = std::max(code, tool({"diagnose", "--run-dir", (d / "run").string(), "--n", "1", "--out",
                                (d / "diag").string()}));
    code = std::max(code, tool({"regularity", "--run-dir", (d / "run").string(), "--sweep", "0.01,0.05", "--out",
                                (d / "reg").string()}));
    return code;
  };
  const std::vector<std::string> manifests{"init.nswf.manifest.json", "run/manifest.json", "diag/manifest.json",
                                           "reg/manifest.json"};
  Outcome o;
  const int c1 = pipeline(dir / "a"), c2 = pipeline(dir / "b");
  bool same = c1 == 0 && c2 == 0;
  std::size_t files = 0;
  int replays = 0;
  for (const auto& m : manifests) {
    const auto ha = output_hashes(dir / "a" / m), hb = output_hashes(dir / "b" / m);
    same = same && ha == hb && !ha.empty();
    files += ha.size();
    const fs::path out = dir / ("replay_" + std::to_string(replays));
    if (tool({"replay", "--manifest", (dir / "a" / m).string(), "--out-dir", out.string()}) == 0) ++replays;
  }
  fs::remove_all(dir);
  o.pass = same && replays == static_cast<int>(manifests.size());
  o.detail = std::to_string(files) + " outputs identical across reruns, " + std::to_string(replays) + "/" +
             std::to_string(manifests.size()) + " manifests replayed byte-identical";
  return o;
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"cover structure", cover_structure},
      {"norm equivalence", norm_equivalence},
      {"ring scale", ring_scale},
      {"dss scaling", dss_scaling},
      {"pressure expansion", pressure_expansion},
      {"pressure estimate", pressure_estimate},
      {"local energy inequality", local_energy},
      {"barrier", barrier},
      {"a priori bound", apriori},
      {"eventual region geometry", region_geometry},
      {"regularity scan", regularity_scan},
      {"reproducibility", reproducibility},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o.detail = std::string("error: ") + e.what();
    }
    if (!o.pass) ++failed;
    std::printf("criterion %2zu %s  %s: %s (%.1f s)\n", i + 1, o.pass ? "PASS" : "FAIL", criteria[i].first.c_str(),
                o.detail.c_str(), seconds_since(t0));
    std::fflush(stdout);
  }
  std::printf("%zu/%zu passed\n", criteria.size() - failed, criteria.size());
  return failed ? 1 : 0;
}
