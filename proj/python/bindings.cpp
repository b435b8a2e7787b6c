#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <cstring>
#include <sstream>

#include "nswlab/cli.hpp"
#include "nswlab/cube_cover.hpp"
#include "nswlab/energy.hpp"
#include "nswlab/error.hpp"
#include "nswlab/field_lab.hpp"
#include "nswlab/pressure.hpp"
#include "nswlab/regularity.hpp"
#include "nswlab/solver.hpp"
#include "nswlab/spectral.hpp"
#include "nswlab/weighted_norms.hpp"

namespace py = pybind11;
using namespace nswlab;

namespace {

using Array = py::array_t<double, py::array::c_style | py::array::forcecast>;

Array to_array(const GridField& f) {
  const py::ssize_t N = f.N();
  Array a({static_cast<py::ssize_t>(f.ncomp()), N, N, N});
  std::memcpy(a.mutable_data(), f.data().data(), sizeof(double) * f.data().size());
  return a;
}

GridField from_array(Array a, double L, std::optional<double> t) {
  py::buffer_info b = a.request();
  if (b.ndim == 3) {
    if (b.shape[0] != b.shape[1] || b.shape[1] != b.shape[2]) throw py::value_error("expected an N x N x N array");
  } else if (b.ndim != 4 || b.shape[1] != b.shape[2] || b.shape[2] != b.shape[3]) {
    throw py::value_error("expected shape (ncomp, N, N, N) or (N, N, N)");
  }
  const int ncomp = b.ndim == 3 ? 1 : static_cast<int>(b.shape[0]);
  const int N = static_cast<int>(b.shape[b.ndim - 1]);
  GridField f(L, N, ncomp, t);
  std::memcpy(f.data().data(), a.data(), sizeof(double) * f.data().size());
  return f;
}

py::dict cube_dict(const Cube& q) {
  py::dict d;
  d["center"] = q.center;
  d["side"] = q.side;
  d["shell"] = q.shell ? py::cast(*q.shell) : py::none();
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "weighted-space diagnostics for Navier-Stokes fields";

  static py::exception<Error> error(m, "NswError");
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      PyErr_SetString(error.ptr(), e.what());
    }
  });

  py::class_<GridField>(m, "GridField")
      .def(py::init([](Array a, double L, std::optional<double> t) { return from_array(a, L, t); }), py::arg("data"),
           py::arg("L"), py::arg("time") = py::none())
      .def_property_readonly("L", &GridField::L)
      .def_property_readonly("N", &GridField::N)
      .def_property_readonly("ncomp", &GridField::ncomp)
      .def_property_readonly("h", &GridField::h)
      .def_property("time", &GridField::time, &GridField::set_time)
      .def("to_numpy", &to_array)
      .def("max_abs", &GridField::max_abs)
      .def("coords", [](const GridField& f) {
        std::vector<double> x(f.N());
        for (int i = 0; i < f.N(); ++i) x[i] = f.coord(i);
        return x;
      });

  m.def("load_nswf", &load_nswf, py::arg("path"));
  m.def("save_nswf", &save_nswf, py::arg("path"), py::arg("field"));

  m.def("build_cover", [](int n_max, int refine) {
    CubeCover c = build_cover(n_max);
    if (refine > 0) c = build_refined_cover(c, refine);
    py::list out;
    for (const Cube& q : c) out.append(cube_dict(q));
    return out;
  }, py::arg("n_max"), py::arg("refine") = 0);
  m.def("verify_cover", [](int n_max) {
    const PropertyReport r = verify_cover_properties(build_cover(n_max));
    py::dict d;
    d["partition_ok"] = r.partition_ok;
    d["volume_ok"] = r.volume_ok;
    d["shell_counts_ok"] = r.shell_counts_ok;
    d["cumulative_affine"] = r.cumulative_affine;
    d["cubes_per_shell"] = r.cubes_per_shell;
    d["adjacent_volume_ratio_max"] = r.adjacent_volume_ratio.max;
    return d;
  }, py::arg("n_max"));

  m.def("generate", [](const std::string& kind, double L, int N, double amplitude, std::uint64_t seed, double gamma,
                       double lambda) {
    GeneratorSpec g;
    g.kind = generator_kind_from(kind);
    g.amplitude = amplitude;
    g.seed = seed;
    g.gamma = gamma;
    g.lambda = lambda;
    validate(g);
    return generate(g, L, N);
  }, py::arg("kind"), py::arg("L"), py::arg("N"), py::arg("amplitude") = 1.0, py::arg("seed") = 0,
        py::arg("gamma") = -0.5, py::arg("lambda_") = 2.0);
  m.def("leray_project", &leray_project);
  m.def("divergence_max", &spectral_divergence_max);

  m.def("m_norm", [](const GridField& f, int n_max, double p, double q) {
    return m_norm(f, build_cover(n_max), p, q).value;
  }, py::arg("field"), py::arg("n_max"), py::arg("p") = 2.0, py::arg("q") = 2.0);
  m.def("cn_norm", [](const GridField& f, int n_max, int n, double q) {
    return cn_norm(f, build_cover(n_max), n, q).value;
  }, py::arg("field"), py::arg("n_max"), py::arg("n"), py::arg("q") = 2.0);
  m.def("herz_norm", &herz_norm, py::arg("field"), py::arg("s"), py::arg("p"), py::arg("q"),
        py::arg("homogeneous"), py::arg("k_lo"), py::arg("k_hi"));
  m.def("equivalence_report", [](const GridField& f, int n_max) {
    return to_json(equivalence_report(f, n_max));
  }, py::arg("field"), py::arg("n_max"));
  m.def("largest_cover_level", &largest_cover_level);

  m.def("global_pressure", &global_pressure);
  m.def("pressure_expansion_residual", [](const GridField& p, const GridField& u, const Vec3& center, double side) {
    return pressure_expansion_residual(p, u, Cube{center, side, std::nullopt});
  }, py::arg("p"), py::arg("u"), py::arg("center"), py::arg("side"));

  m.def("solve", [](const GridField& u0, double dt, double t_end, const std::string& mode, int output_every) {
    SolverConfig c;
    c.N = u0.N();
    c.L = u0.L();
    c.dt = dt;
    c.t_end = t_end;
    c.mode = solver_mode_from(mode);
    c.output_every = output_every;
    SolverRun r;
    {
      py::gil_scoped_release release;
      r = run(c, u0);
    }
    py::list log;
    for (const auto& s : r.log) {
      py::dict d;
      d["step"] = s.step;
      d["t"] = s.t;
      d["energy"] = s.energy;
      d["dissipation"] = s.dissipation;
      d["cfl"] = s.cfl_number;
      d["top_octave"] = s.top_octave;
      log.append(d);
    }
    return py::make_tuple(r.u, r.p, log);
  }, py::arg("u0"), py::arg("dt"), py::arg("t_end"), py::arg("mode") = "navier_stokes", py::arg("output_every") = 1);

  m.def("gronwall_time", &gronwall_time, py::arg("a"), py::arg("b1"), py::arg("b2"), py::arg("m"));
  m.def("existence_time", &existence_time, py::arg("u0_norm_sq"), py::arg("n"), py::arg("q"), py::arg("c1") = 1.0,
        py::arg("c_star") = 1.0);
  m.def("log_ratio_factor", &log_ratio_factor);

  m.def("sigma_sq", &sigma_sq, py::arg("delta"));
  m.def("eventual_region", [](double delta, double c_star, int n2, int n_last) {
    const AnalyticRegion r = eventual_region(delta, c_star, n2, n_last);
    py::dict d;
    d["sigma_sq"] = r.sigma_sq;
    d["tau"] = r.tau;
    d["abut"] = r.abut;
    d["nested"] = r.nested;
    d["coverage"] = r.coverage;
    d["lattice_points"] = r.lattice_points;
    return d;
  }, py::arg("delta"), py::arg("c_star") = 1.0, py::arg("n2") = 3, py::arg("n_last") = -1);
  m.def("cylinder_quantity", [](const std::vector<GridField>& u, const std::vector<GridField>& p, const Vec3& x0,
                                double t0, double r) {
    return cylinder_quantity(u, p, ParabolicCylinder{x0, t0, r}).eps3;
  }, py::arg("u"), py::arg("p"), py::arg("x0"), py::arg("t0"), py::arg("r"));

  m.def("cli", [](const std::vector<std::string>& args) {
    std::ostringstream out, err;
    const int code = cli::run(args, out, err);
    return py::make_tuple(code, out.str(), err.str());
  }, py::arg("args"));
}
