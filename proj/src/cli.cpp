#include "nswlab/cli.hpp"

#include <openssl/evp.h>
#include <omp.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <limits>
#include <set>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"

#include "nswlab/cube_cover.hpp"
#include "nswlab/energy.hpp"
#include "nswlab/error.hpp"
#include "nswlab/field_lab.hpp"
#include "nswlab/pressure.hpp"
#include "nswlab/regularity.hpp"
#include "nswlab/solver.hpp"
#include "nswlab/weighted_norms.hpp"

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

namespace nswlab::cli {

namespace {

const std::set<std::string> kInputFlags = {"--field", "--init", "--config", "--run-dir", "--calibration", "--manifest"};

std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  require(static_cast<bool>(in), ErrorKind::io_error, "cannot read " + path);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  require(static_cast<bool>(out), ErrorKind::io_error, "cannot write " + path.string());
  out << text;
  require(static_cast<bool>(out), ErrorKind::io_error, "write failed: " + path.string());
}

std::string fmt_double(double v) {
  std::ostringstream os;
  os << std::setprecision(17) << v;
  return os.str();
}

/// Collects what a command read and wrote, then emits the manifest.
struct Run {
  std::string command;
  std::vector<std::string> argv;
  std::string output_flag;
  bool output_is_dir = true;
  fs::path out_base;  // directory holding outputs
  json config = json::object();
  json calibration = json::object();
  std::vector<std::string> inputs;
  std::vector<fs::path> outputs;

  void input(const std::string& path) { inputs.push_back(fs::absolute(path).lexically_normal().string()); }
  fs::path output(const std::string& name) {
    outputs.push_back(out_base / name);
    return out_base / name;
  }

  void write_manifest(const fs::path& path, int code, double seconds) const {
    json m;
    m["command"] = command;
    m["argv"] = argv;
    m["output_flag"] = output_flag;
    m["output_kind"] = output_is_dir ? "dir" : "file";
    m["config"] = config;
    m["config_hash"] = sha256_hex(config.dump());
    m["calibration"] = calibration;
    json in = json::array();
    for (const auto& p : inputs) in.push_back({{"path", p}, {"sha256", sha256_file(p)}});
    m["inputs"] = in;
    json out = json::array();
    for (const auto& p : outputs)
      out.push_back({{"path", p.lexically_relative(out_base).string()}, {"sha256", sha256_file(p.string())}});
    m["outputs"] = out;
    m["exit_code"] = code;
    m["timings"] = {{"wall_seconds", seconds}};
    write_text(path, m.dump(2) + "\n");
  }
};

std::vector<std::string> absolutize_inputs(const std::vector<std::string>& args) {
  std::vector<std::string> out = args;
  for (std::size_t i = 0; i < out.size(); ++i) {
    const auto eq = out[i].find('=');
    if (eq != std::string::npos && kInputFlags.count(out[i].substr(0, eq))) {
      out[i] = out[i].substr(0, eq + 1) + fs::absolute(out[i].substr(eq + 1)).lexically_normal().string();
    } else if (kInputFlags.count(out[i]) && i + 1 < out.size() && fs::exists(out[i + 1])) {
      out[i + 1] = fs::absolute(out[i + 1]).lexically_normal().string();
      ++i;
    }
  }
  return out;
}

Calibration load_calibration(const std::string& path, Run& run) {
  Calibration c;
  if (!path.empty()) {
    run.input(path);
    c = Calibration::from_json(read_text(path));
  }
  run.calibration = json::parse(c.to_json());
  return c;
}

struct Series {
  std::vector<GridField> u, p;
};

Series load_series(const std::string& dir, Run& run) {
  const fs::path base(dir);
  require(fs::is_directory(base), ErrorKind::io_error, "run directory not found: " + dir);
  const fs::path index = base / "series.json";
  run.input(index.string());
  json j;
  try {
    j = json::parse(read_text(index.string()));
  } catch (const json::exception& e) {
    fail(ErrorKind::io_error, std::string("series.json: ") + e.what());
  }
  Series s;
  for (const auto& e : j.at("samples")) {
    const std::string up = (base / e.at("u").get<std::string>()).string();
    const std::string pp = (base / e.at("p").get<std::string>()).string();
    run.input(up);
    run.input(pp);
    s.u.push_back(load_nswf(up));
    s.p.push_back(load_nswf(pp));
    const double t = e.at("t").get<double>();
    s.u.back().set_time(t);
    s.p.back().set_time(t);
  }
  require(!s.u.empty(), ErrorKind::io_error, "run directory holds no samples");
  return s;
}

Series truncate(const Series& s, double T) {
  Series out;
  for (std::size_t i = 0; i < s.u.size(); ++i)
    if (*s.u[i].time() <= T * (1 + 1e-12) + 1e-300) {
      out.u.push_back(s.u[i]);
      out.p.push_back(s.p[i]);
    }
  return out;
}

std::vector<double> parse_list(const std::string& text) {
  std::vector<double> v;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ','))
    if (!item.empty()) {
      try {
        v.push_back(std::stod(item));
      } catch (const std::exception&) {
        fail(ErrorKind::invalid_argument, "bad number '" + item + "'");
      }
    }
  return v;
}

// ---------------------------------------------------------------- commands

int cmd_cover(int n_max, int refine, bool verify, Run& run, std::ostream& out) {
  require(n_max >= 1 && n_max <= 10, ErrorKind::invalid_argument, "--n-max must lie in [1, 10]");
  require(refine >= 0 && refine <= n_max, ErrorKind::invalid_argument, "--refine must lie in [0, n-max]");
  run.config = {{"n_max", n_max}, {"refine", refine}, {"verify", verify}};
  const CubeCover full = build_cover(n_max);
  const CubeCover cover = refine > 0 ? build_refined_cover(full, refine) : full;
  std::ostringstream os;
  write_cover(os, cover);
  write_text(run.outputs.front(), os.str());
  out << "cubes: " << cover.size() << "\n";
  if (!verify) return exit_pass;
  const PropertyReport r = verify_cover_properties(full);
  json j;
  j["partition_ok"] = r.partition_ok;
  j["volume_ok"] = r.volume_ok;
  j["shell_counts_ok"] = r.shell_counts_ok;
  j["cumulative_affine"] = r.cumulative_affine;
  j["cubes_per_shell"] = r.cubes_per_shell;
  j["cumulative_counts"] = r.cumulative_counts;
  j["adjacent_volume_ratio"] = {{"min", r.adjacent_volume_ratio.min}, {"max", r.adjacent_volume_ratio.max}};
  j["side_over_distance"] = {{"min", r.side_over_distance.min}, {"max", r.side_over_distance.max}};
  j["center_distance_ratio"] = {{"min", r.center_distance_ratio.min}, {"max", r.center_distance_ratio.max}};
  j["smaller_cube_counts"] = r.smaller_cube_counts;
  j["log_count_bound"] = r.log_count_bound;
  j["max_neighbor_count"] = r.max_neighbor_count;
  const bool ok = r.partition_ok && r.volume_ok && r.shell_counts_ok && r.cumulative_affine;
  j["pass"] = ok;
  write_text(run.output(run.outputs.front().filename().string() + ".report.json"), j.dump(2) + "\n");
  out << "verification: " << (ok ? "pass" : "FAIL") << "\n";
  return ok ? exit_pass : exit_check_failed;
}

int cmd_norm(const std::string& field, const std::string& family, double p, double q, int n, double s, bool homog,
             int k_lo, int k_hi, Run& run, std::ostream& out) {
  run.input(field);
  run.config = {{"family", family}, {"p", p}, {"q", q}, {"n", n}, {"s", s}, {"homogeneous", homog},
                {"k_lo", k_lo}, {"k_hi", k_hi}};
  const GridField f = load_nswf(field);
  const int n_max = largest_cover_level(f);
  require(n_max >= 1, ErrorKind::domain_mismatch, "field box too small for a cover");
  json j;
  j["family"] = family;
  j["n_max"] = n_max;
  if (family == "equivalence") {
    j = json::parse(to_json(equivalence_report(f, n_max)));
    out << "m_norm " << fmt_double(j["m_norm"].get<double>()) << "\n";
  } else if (family == "herz") {
    NormSpec spec;
    spec.family = NormFamily::herz;
    spec.p = p;
    spec.q = q;
    spec.s = s;
    validate(spec);
    const double v = herz_norm(f, s, p, q, homog, k_lo, k_hi);
    j["value"] = v;
    out << "value " << fmt_double(v) << "\n";
  } else if (family == "m" || family == "cn") {
    NormSpec spec;
    spec.p = p;
    spec.q = q;
    validate(spec);
    const CubeCover cover = build_cover(n_max);
    NormResult r;
    if (family == "m") {
      r = m_norm(f, cover, p, q);
    } else {
      require(n >= 1 && n <= n_max, ErrorKind::invalid_argument, "--n must lie in [1, " + std::to_string(n_max) + "]");
      r = cn_norm(f, cover, n, q);
    }
    j["value"] = r.value;
    j["argmax"] = r.argmax;
    j["per_cube"] = r.per_cube;
    out << "value " << fmt_double(r.value) << "\n";
  } else {
    fail(ErrorKind::invalid_argument, "unknown norm family '" + family + "'");
  }
  write_text(run.outputs.front(), j.dump(2) + "\n");
  return exit_pass;
}

int cmd_generate(const GeneratorSpec& spec, double L, int N, Run& run, std::ostream& out) {
  run.config = {{"kind", to_string(spec.kind)}, {"amplitude", spec.amplitude}, {"seed", spec.seed},
                {"gamma", spec.gamma}, {"lambda", spec.lambda}, {"L", L}, {"N", N}};
  require(N >= 8 && L > 0, ErrorKind::invalid_argument, "need N >= 8 and L > 0");
  save_nswf(run.outputs.front().string(), generate(spec, L, N));
  out << "wrote " << run.outputs.front().string() << "\n";
  return exit_pass;
}

struct SolveFlags {
  std::string config, init = "gaussian_vortex", mode;
  std::optional<int> N, output_every;
  std::optional<double> L, dt, t_end, amplitude;
  std::optional<std::uint64_t> seed;
};

int cmd_solve(const SolveFlags& fl, Run& run, std::ostream& out) {
  SolverConfig c;
  if (!fl.config.empty()) {
    run.input(fl.config);
    c = SolverConfig::from_json(read_text(fl.config));
  }
  if (fl.N) c.N = *fl.N;
  if (fl.L) c.L = *fl.L;
  if (fl.dt) c.dt = *fl.dt;
  if (fl.t_end) c.t_end = *fl.t_end;
  if (fl.output_every) c.output_every = *fl.output_every;
  if (!fl.mode.empty()) c.mode = solver_mode_from(fl.mode);

  GridField u0;
  const std::string init = fl.init.empty() ? c.init : fl.init;
  if (fs::exists(init)) {
    run.input(init);
    u0 = load_nswf(init);
    if (!fl.N) c.N = u0.N();
    if (!fl.L) c.L = u0.L();
  }
  c.validate();
  if (init == "zero") {
    u0 = GridField(c.L, c.N, 3, 0.0);
  } else if (fs::exists(init)) {
    require(u0.N() == c.N && u0.L() == c.L, ErrorKind::domain_mismatch, "initial field grid differs from --N/--L");
  } else {
    GeneratorSpec g;
    g.kind = generator_kind_from(init);
    if (fl.amplitude) g.amplitude = *fl.amplitude;
    if (fl.seed) g.seed = *fl.seed;
    u0 = generate(g, c.L, c.N);
  }
  u0.set_time(0.0);
  c.init = fs::exists(init) ? fs::path(init).filename().string() : init;
  run.config = json::parse(c.to_json());
  if (fl.amplitude) run.config["amplitude"] = *fl.amplitude;
  if (fl.seed) run.config["seed"] = *fl.seed;

  Solver solver(c, u0);
  json samples = json::array();
  std::vector<StepLog> log{solver.monitor()};
  auto record = [&] {
    char name[32];
    std::snprintf(name, sizeof name, "%06ld", solver.step_count());
    const std::string un = std::string("u_") + name + ".nswf", pn = std::string("p_") + name + ".nswf";
    save_nswf(run.output(un).string(), solver.velocity());
    save_nswf(run.output(pn).string(), solver.pressure());
    samples.push_back({{"step", solver.step_count()}, {"t", solver.time()}, {"u", un}, {"p", pn}});
  };
  record();
  const long total = c.steps();
  while (solver.step_count() < total) {
    solver.step();
    log.push_back(solver.monitor());
    if (solver.step_count() % c.output_every == 0 || solver.step_count() == total) record();
  }
  write_text(run.output("config.json"), c.to_json() + "\n");
  write_text(run.output("log.csv"), step_log_csv(log));
  json idx;
  idx["N"] = c.N;
  idx["L"] = c.L;
  idx["samples"] = samples;
  write_text(run.output("series.json"), idx.dump(2) + "\n");
  solver.save_checkpoint(run.output("checkpoint.bin").string());
  const StepLog& last = log.back();
  out << "steps " << total << " energy " << fmt_double(last.energy) << " top_octave " << fmt_double(last.top_octave)
      << "\n";
  if (last.top_octave > c.top_octave_threshold)
    out << "warning: top-octave energy fraction " << last.top_octave << " above " << c.top_octave_threshold << "\n";
  return exit_pass;
}

struct DiagnoseFlags {
  std::string run_dir, checks = "lei,pressure,cubic,apriori", calibration;
  int n = 1;
  double q = 2.0;
  std::optional<double> T;
  double cubic_eps = 1.0;
};

int cmd_diagnose(const DiagnoseFlags& fl, Run& run, std::ostream& out) {
  const Calibration cal = load_calibration(fl.calibration, run);
  Series all = load_series(fl.run_dir, run);
  const double t_last = *all.u.back().time();
  if (fl.T) require(*fl.T <= t_last * (1 + 1e-12), ErrorKind::invalid_argument,
                    "requested T = " + fmt_double(*fl.T) + " beyond the run end " + fmt_double(t_last));
  const double T = fl.T ? *fl.T : t_last;
  const Series s = truncate(all, T);
  require(s.u.size() >= 2, ErrorKind::invalid_argument, "need at least two samples up to T");

  std::set<std::string> checks;
  {
    std::stringstream ss(fl.checks);
    std::string c;
    while (std::getline(ss, c, ',')) {
      require(c == "lei" || c == "pressure" || c == "cubic" || c == "apriori", ErrorKind::invalid_argument,
              "unknown check '" + c + "'");
      checks.insert(c);
    }
  }
  run.config = {{"checks", fl.checks}, {"n", fl.n}, {"q", fl.q}, {"T", T}, {"cubic_eps", fl.cubic_eps}};

  const GridField& u0 = s.u.front();
  const int n_max = largest_cover_level(u0);
  require(n_max >= 1, ErrorKind::domain_mismatch, "field box too small for a cover");
  require(fl.n >= 1 && fl.n <= n_max, ErrorKind::invalid_argument,
          "--n must lie in [1, " + std::to_string(n_max) + "]");
  const CubeCover cover = build_cover(n_max);
  const SeriesDensities dens = series_densities(s.u);
  json report;
  bool ok = true;

  if (checks.count("lei")) {
    std::ostringstream csv;
    csv << std::setprecision(17) << "cube,cx,cy,cz,side,residual,lhs,rhs,energy_scale,pass\n";
    double worst = std::numeric_limits<double>::infinity();
    bool pass = true;
    std::size_t count = 0;
    for (std::size_t i : interior_indices(cover)) {
      const Cube& q = cover[i];
      if (q.side < 8.0 * u0.h() || !cube_inside_box(u0, dilate(q, Dilation::star))) continue;
      const LeiResult r = lei_residual(s.u, s.p, dens, make_cutoff(q, u0), LeiMode::full);
      const bool p = r.residual >= -cal.lei_tol * r.energy_scale;
      pass = pass && p;
      if (r.energy_scale > 0) worst = std::min(worst, r.residual / r.energy_scale);
      ++count;
      csv << i << ',' << q.center[0] << ',' << q.center[1] << ',' << q.center[2] << ',' << q.side << ','
          << r.residual << ',' << r.lhs << ',' << r.rhs << ',' << r.energy_scale << ',' << p << '\n';
    }
    write_text(run.output("lei.csv"), csv.str());
    report["lei"] = {{"cubes", count}, {"tol", cal.lei_tol},
                     {"min_relative_residual", std::isfinite(worst) ? worst : 0.0}, {"pass", pass}};
    ok = ok && pass;
  }
  if (checks.count("pressure")) {
    const auto rep = pressure_estimate_check(s.u, s.p, build_refined_cover(cover, fl.n), fl.q, T);
    bool finite = true;
    for (const auto& r : rep.rows) finite = finite && std::isfinite(r.ratio);
    write_text(run.output("pressure.csv"), rep.to_csv());
    report["pressure"] = {{"rows", rep.rows.size()}, {"max_ratio", rep.max_ratio}, {"pass", finite}};
    ok = ok && finite;
  }
  if (checks.count("cubic")) {
    const CubeCover cn = build_refined_cover(cover, fl.n);
    std::ostringstream csv;
    csv << std::setprecision(17) << "cube,side,lhs,group_a,group_b,group_c,c_eps,c_gn\n";
    double c_max = 0.0;
    for (std::size_t i : interior_indices(cn)) {
      const CubicReport r = cubic_estimate_series(s.u, dens, cn[i], fl.q, fl.cubic_eps);
      c_max = std::max(c_max, r.c_gn);
      csv << i << ',' << cn[i].side << ',' << r.lhs << ',' << r.group_a << ',' << r.group_b << ',' << r.group_c
          << ',' << r.c_eps << ',' << r.c_gn << '\n';
    }
    const bool pass = std::isfinite(c_max) && (cal.cubic_c_max <= 0.0 || c_max <= cal.cubic_c_max);
    write_text(run.output("cubic.csv"), csv.str());
    report["cubic"] = {{"c_gn_max", c_max}, {"calibrated_max", cal.cubic_c_max}, {"pass", pass}};
    ok = ok && pass;
  }
  if (checks.count("apriori")) {
    require(fl.q == 1.0 || fl.q == 2.0, ErrorKind::invalid_argument, "apriori check needs q = 1 or 2");
    const double norm_sq = std::pow(cn_norm(u0, cover, fl.n, fl.q).value, 2);
    const double Tn = existence_time(norm_sq, fl.n, static_cast<int>(fl.q), cal.c1, cal.c_star);
    const double c0 = fl.calibration.empty() ? std::max(1.0, cutoff_normalization(u0, cover, fl.n)) : cal.c0;
    const double horizon = std::min(Tn, T);
    const DiagnosticSeries ds = track_series(s.u, dens, cover, fl.n, fl.q);
    write_text(run.output("alpha_beta.csv"), ds.to_csv());
    const AprioriResult r = apriori_bound_check(ds, norm_sq, fl.n, c0, horizon);
    report["apriori"] = {{"u0_norm_sq", norm_sq}, {"existence_time", Tn}, {"checked_up_to", horizon},
                         {"horizon_limited", Tn > T}, {"c0", c0}, {"bound", r.bound}, {"used", r.used},
                         {"margin", r.margin}, {"pass", r.pass}};
    ok = ok && r.pass;
  }
  report["pass"] = ok;
  write_text(run.output("report.json"), report.dump(2) + "\n");
  for (const auto& [k, v] : report.items())
    if (v.is_object()) out << k << ": " << (v["pass"].get<bool>() ? "pass" : "FAIL") << "\n";
  return ok ? exit_pass : exit_check_failed;
}

struct RegularityFlags {
  std::string run_dir, sweep, calibration;
  double delta = 1.0, c_star = 1.0, max_side = 2.0;
  std::optional<double> eps_star;
  int n2 = 0;
};

int cmd_regularity(const RegularityFlags& fl, Run& run, std::ostream& out) {
  const Calibration cal = load_calibration(fl.calibration, run);
  const Series s = load_series(fl.run_dir, run);
  const double eps_star = fl.eps_star ? *fl.eps_star : cal.eps_star;
  const double c_star = fl.calibration.empty() ? fl.c_star : cal.c_star;
  run.config = {{"delta", fl.delta}, {"eps_star", eps_star}, {"c_star", c_star}, {"N2", fl.n2},
                {"max_side", fl.max_side}, {"sweep", fl.sweep}};
  const GridField& u0 = s.u.front();
  const int n_max = largest_cover_level(u0);
  require(n_max >= 1, ErrorKind::domain_mismatch, "field box too small for a cover");
  const auto cyl = cover_cylinders(build_cover(n_max), s.u, fl.max_side);
  require(!cyl.empty(), ErrorKind::invalid_argument, "no cylinder fits the run's time range");
  const AnalyticRegion region = eventual_region(fl.delta, c_star, fl.n2);
  RegionMask mask = scan(s.u, s.p, cyl, eps_star, fl.delta, cal.scan_c0);
  mask.c_star = c_star;
  mask.tau = region.tau;
  const RegionCheck rc = region_check(mask, region);
  write_text(run.output("mask.csv"), mask_csv(mask));
  write_text(run.output("summary.json"), region_summary_json(mask, region, rc) + "\n");
  {
    std::ofstream img(run.output("slice.ppm"), std::ios::binary);
    write_slice_ppm(img, mask, region, u0.L(), 0.0, *s.u.back().time());
  }
  for (double e : parse_list(fl.sweep)) {
    const RegionMask m = rethreshold(mask, e);
    const RegionCheck c = region_check(m, region);
    std::ostringstream name;
    name << "sweep_eps_" << std::setprecision(6) << e;
    write_text(run.output(name.str() + ".csv"), mask_csv(m));
    write_text(run.output(name.str() + ".json"), region_summary_json(m, region, c) + "\n");
  }
  out << "cylinders " << mask.cylinders.size() << " passed " << mask.passed << " outliers " << mask.outliers
      << " coverage " << fmt_double(rc.coverage) << " sigma_sq " << fmt_double(region.sigma_sq) << "\n";
  return rc.coverage == 1.0 && mask.outliers == 0 ? exit_pass : exit_check_failed;
}

int cmd_replay(const std::string& manifest, const std::string& out_dir, std::ostream& out, std::ostream& err) {
  json m;
  try {
    m = json::parse(read_text(manifest));
  } catch (const json::exception& e) {
    fail(ErrorKind::io_error, std::string("manifest: ") + e.what());
  }
  std::vector<std::string> argv = m.at("argv").get<std::vector<std::string>>();
  const std::string flag = m.at("output_flag").get<std::string>();
  const bool is_dir = m.at("output_kind").get<std::string>() == "dir";
  fs::create_directories(out_dir);
  fs::path target = fs::absolute(out_dir);
  bool replaced = false;
  for (std::size_t i = 0; i + 1 < argv.size(); ++i)
    if (argv[i] == flag) {
      if (!is_dir) target /= fs::path(argv[i + 1]).filename();
      argv[i + 1] = target.string();
      replaced = true;
    }
  require(replaced, ErrorKind::io_error, "manifest argv lacks its output flag " + flag);
  const int code = run(argv, out, err);
  const fs::path new_manifest = is_dir ? target / "manifest.json" : fs::path(target.string() + ".manifest.json");
  const json n = json::parse(read_text(new_manifest.string()));
  bool same = code == m.at("exit_code").get<int>() && n.at("outputs").size() == m.at("outputs").size();
  for (std::size_t i = 0; same && i < n.at("outputs").size(); ++i) {
    const auto& a = m["outputs"][i];
    const auto& b = n["outputs"][i];
    const bool eq = a["path"] == b["path"] && a["sha256"] == b["sha256"];
    if (!eq) out << "differs: " << a["path"].get<std::string>() << "\n";
    same = same && eq;
  }
  out << "replay: " << (same ? "identical" : "DIFFERENT") << " (" << n.at("outputs").size() << " outputs)\n";
  return same ? exit_pass : exit_check_failed;
}

int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"nswtool: weighted-space diagnostics for Navier-Stokes fields"};
  app.require_subcommand(1);
  std::string out_path;

  auto* cover = app.add_subcommand("cover", "build (and verify) the dyadic cube cover");
  int n_max = 0, refine = 0;
  bool verify = false;
  cover->add_option("--n-max", n_max)->required();
  cover->add_option("--refine", refine, "replace all cubes below side 2^n by Q_{n-1}");
  cover->add_flag("--verify", verify);
  cover->add_option("--out", out_path)->required();

  auto* norm = app.add_subcommand("norm", "weighted norms of a field");
  std::string field, family = "m";
  double p = 2, q = 2, s = -1;
  int n = 1, k_lo = 0, k_hi = 1;
  bool homog = false;
  norm->add_option("--field", field)->required();
  norm->add_option("--family", family, "m, cn, herz or equivalence");
  norm->add_option("--p", p);
  norm->add_option("--q", q);
  norm->add_option("--n", n);
  norm->add_option("--s", s);
  norm->add_flag("--homogeneous", homog);
  norm->add_option("--k-lo", k_lo);
  norm->add_option("--k-hi", k_hi);
  norm->add_option("--report", out_path)->required();

  auto* gen = app.add_subcommand("generate", "write a generated initial field");
  GeneratorSpec spec;
  std::string kind = "gaussian_vortex";
  double gL = 8;
  int gN = 64;
  gen->add_option("--kind", kind);
  gen->add_option("--amplitude", spec.amplitude);
  gen->add_option("--seed", spec.seed);
  gen->add_option("--gamma", spec.gamma);
  gen->add_option("--lambda", spec.lambda);
  gen->add_option("--L", gL);
  gen->add_option("--N", gN);
  gen->add_option("--out", out_path)->required();

  auto* solve = app.add_subcommand("solve", "run the pseudo-spectral solver");
  SolveFlags sf;
  solve->add_option("--config", sf.config);
  solve->add_option("--init", sf.init, "NSWF file, 'zero' or a generator kind");
  solve->add_option("--mode", sf.mode);
  solve->add_option("--N", sf.N);
  solve->add_option("--L", sf.L);
  solve->add_option("--dt", sf.dt);
  solve->add_option("--t-end", sf.t_end);
  solve->add_option("--output-every", sf.output_every);
  solve->add_option("--amplitude", sf.amplitude);
  solve->add_option("--seed", sf.seed);
  solve->add_option("--out-dir", out_path)->required();

  auto* diag = app.add_subcommand("diagnose", "energy, pressure and a-priori checks on a run");
  DiagnoseFlags df;
  diag->add_option("--run-dir", df.run_dir)->required();
  diag->add_option("--checks", df.checks);
  diag->add_option("--n", df.n);
  diag->add_option("--q", df.q);
  diag->add_option("--T", df.T);
  diag->add_option("--cubic-eps", df.cubic_eps);
  diag->add_option("--calibration", df.calibration);
  diag->add_option("--out", out_path)->required();

  auto* reg = app.add_subcommand("regularity", "cylinder scan and eventual-regularity region");
  RegularityFlags rf;
  reg->add_option("--run-dir", rf.run_dir)->required();
  reg->add_option("--delta", rf.delta);
  reg->add_option("--eps-star", rf.eps_star);
  reg->add_option("--sweep", rf.sweep, "comma-separated eps_star values");
  reg->add_option("--c-star", rf.c_star);
  reg->add_option("--N2", rf.n2);
  reg->add_option("--max-side", rf.max_side);
  reg->add_option("--calibration", rf.calibration);
  reg->add_option("--out", out_path)->required();

  auto* replay = app.add_subcommand("replay", "rerun a manifest and compare output hashes");
  std::string manifest;
  replay->add_option("--manifest", manifest)->required();
  replay->add_option("--out-dir", out_path)->required();

  std::vector<std::string> rev(args.rbegin(), args.rend());
  try {
    app.parse(rev);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return exit_pass;
  } catch (const CLI::ParseError& e) {
    err << "usage error: " << e.what() << "\n";
    return exit_usage;
  }

  if (replay->parsed()) return cmd_replay(manifest, out_path, out, err);

  Run r;
  r.command = app.get_subcommands().front()->get_name();
  r.argv = absolutize_inputs(args);
  const auto t0 = std::chrono::steady_clock::now();
  fs::path manifest_path;
  if (cover->parsed() || norm->parsed() || gen->parsed()) {
    r.output_flag = cover->parsed() ? "--out" : norm->parsed() ? "--report" : "--out";
    r.output_is_dir = false;
    const fs::path target = fs::absolute(out_path);
    r.out_base = target.parent_path();
    fs::create_directories(r.out_base);
    r.outputs.push_back(target);
    manifest_path = target.string() + ".manifest.json";
  } else {
    r.output_flag = solve->parsed() ? "--out-dir" : "--out";
    r.out_base = fs::absolute(out_path);
    fs::create_directories(r.out_base);
    manifest_path = r.out_base / "manifest.json";
  }

  int code = exit_pass;
  if (cover->parsed()) code = cmd_cover(n_max, refine, verify, r, out);
  if (norm->parsed()) code = cmd_norm(field, family, p, q, n, s, homog, k_lo, k_hi, r, out);
  if (gen->parsed()) {
    spec.kind = generator_kind_from(kind);
    validate(spec);
    code = cmd_generate(spec, gL, gN, r, out);
  }
  if (solve->parsed()) code = cmd_solve(sf, r, out);
  if (diag->parsed()) code = cmd_diagnose(df, r, out);
  if (reg->parsed()) code = cmd_regularity(rf, r, out);
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  r.write_manifest(manifest_path, code, secs);
  return code;
}

}  // namespace

std::string sha256_hex(const std::string& bytes) {
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_Digest(bytes.data(), bytes.size(), md, &len, EVP_sha256(), nullptr);
  std::ostringstream os;
  for (unsigned int i = 0; i < len; ++i) os << std::hex << std::setw(2) << std::setfill('0') << int(md[i]);
  return os.str();
}

std::string sha256_file(const std::string& path) { return sha256_hex(read_text(path)); }

void apply_thread_env() {
  if (const char* v = std::getenv("NSW_THREADS")) {
    const int n = std::atoi(v);
    if (n > 0) omp_set_num_threads(n);
  }
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  try {
    return dispatch(args, out, err);
  } catch (const Error& e) {
    err << e.what() << "\n";
    return e.kind() == ErrorKind::runtime_abort ? exit_abort : exit_usage;
  } catch (const fs::filesystem_error& e) {
    err << "io_error: " << e.what() << "\n";
    return exit_usage;
  } catch (const nlohmann::json::exception& e) {
    err << "io_error: " << e.what() << "\n";
    return exit_usage;
  }
}

}  // namespace nswlab::cli
