#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <array>

#include "xcf/grid.hpp"
#include "xcf/presets.hpp"
#include "xcf/trace_io.hpp"

namespace py = pybind11;
using namespace xcf;

namespace {

using PyMat = std::array<std::array<double, 3>, 3>;

PyMat to_py(const Mat3& m) {
  PyMat out;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) out[i][j] = m(i, j);
  return out;
}

Branch branch_from_string(const std::string& s) {
  if (s == "auto") return Branch::Auto;
  if (s == "negative") return Branch::Negative;
  if (s == "positive") return Branch::Positive;
  throw ConfigError("branch must be auto, negative, or positive");
}

py::dict sample_to_dict(const FlowSample& s) {
  py::dict d;
  d["t"] = s.t;
  d["dt"] = s.dt;
  d["sec_min"] = std::array<double, 3>{s.a_min, s.b_min, s.c_min};
  d["sec_max"] = std::array<double, 3>{s.a_max, s.b_max, s.c_max};
  d["detP_min"] = s.detP_min;
  d["detP_max"] = s.detP_max;
  d["H_min"] = s.H_min;
  d["H_max"] = s.H_max;
  d["volume"] = s.functionals.volume;
  d["P_integral"] = s.functionals.P_integral;
  d["detP_integral"] = s.functionals.detP_integral;
  d["J"] = s.functionals.J;
  d["eta_values"] = s.functionals.eta_values;
  d["mask_fraction"] = s.functionals.mask_fraction;
  return d;
}

py::dict trace_to_dict(const FlowTrace& trace) {
  py::dict d;
  py::list samples;
  for (const FlowSample& s : trace.samples) samples.append(sample_to_dict(s));
  d["samples"] = samples;
  if (trace.breakdown) {
    py::dict b;
    b["reason"] = to_string(trace.breakdown->reason);
    b["time"] = trace.breakdown->time;
    b["location"] = trace.breakdown->location;
    d["breakdown"] = b;
  } else {
    d["breakdown"] = py::none();
  }
  if (trace.final_q)
    d["final_metric"] = to_py(trace.final_q->m);
  else
    d["final_metric"] = py::none();
  return d;
}

FlowConfig make_config(const std::string& branch, double t_end, double dt,
                       bool adaptive, const std::vector<double>& etas) {
  FlowConfig cfg;
  cfg.branch = branch_from_string(branch);
  cfg.t_end = t_end;
  cfg.dt_init = dt;
  cfg.adaptive = adaptive;
  cfg.etas = etas;
  return cfg;
}

}  // namespace

PYBIND11_MODULE(_xcflow, m) {
  m.doc() = "cross curvature flow laboratory (native core)";
  m.attr("__version__") = kVersion;

  m.def("presets", [] {
    return std::vector<std::string>{"hyperbolic_solvable(alpha,beta)", "nil",
                                    "su2_round", "su2_berger(lambda)", "sol",
                                    "abelian_flat"};
  });

  m.def(
      "curvature",
      [](const std::string& preset) {
        auto [L, st] = build_preset(PresetId::parse(preset));
        const CurvatureBundle B = curvature_homogeneous(L, st.q);
        py::dict d;
        d["scalar"] = B.Rscal;
        d["detP"] = B.detP;
        d["H"] = B.H;
        d["sec"] = std::array<double, 3>{B.sec(0), B.sec(1), B.sec(2)};
        d["ricci"] = to_py(B.Ric.m);
        d["einstein"] = to_py(B.P_up.m);
        d["cross_curvature"] = to_py(B.h.m);
        return d;
      },
      py::arg("preset"),
      "Pointwise curvature of a homogeneous preset: scalar curvature, "
      "Einstein spectrum, cross curvature tensor.");

  m.def(
      "run_flow",
      [](const std::string& preset, const std::string& branch, double t_end,
         double dt, bool adaptive, const std::vector<double>& etas) {
        auto [L, st] = build_preset(PresetId::parse(preset));
        return trace_to_dict(run_flow_homogeneous(
            L, st.q, make_config(branch, t_end, dt, adaptive, etas)));
      },
      py::arg("preset"), py::arg("branch") = "auto", py::arg("t_end") = 1.0,
      py::arg("dt") = 1e-3, py::arg("adaptive") = true,
      py::arg("etas") = std::vector<double>{0.5},
      "Run the flow from a homogeneous preset; returns the sampled trace.");

  m.def(
      "run_flow_grid",
      [](int n, int order, double eps, std::uint64_t seed,
         const std::string& branch, double t_end, double dt, bool adaptive) {
        const TrigMetric tm = TrigMetric::random(seed, eps, 3, 1);
        const MetricGrid m0 = sample(tm, GridSpec(n, order));
        return trace_to_dict(run_flow_grid(
            m0, make_config(branch, t_end, dt, adaptive, {0.5}), nullptr));
      },
      py::arg("n"), py::arg("order") = 4, py::arg("eps") = 0.03,
      py::arg("seed") = 1, py::arg("branch") = "negative",
      py::arg("t_end") = 0.01, py::arg("dt") = 1e-3,
      py::arg("adaptive") = true,
      "Run the flow on a random periodic metric grid.");

  m.def(
      "sweep",
      [](const std::string& preset, const std::string& parameter,
         const std::vector<double>& values, double t_end) {
        FlowConfig cfg;
        cfg.t_end = t_end;
        const auto results =
            sweep_family(PresetId::parse(preset), parameter, values, cfg);
        py::list out;
        for (const SweepResult& r : results) {
          py::dict d;
          d["preset"] = r.id.name();
          d["error"] = r.error;
          d["pinching"] = r.pinching;
          if (r.error.empty()) d["trace"] = trace_to_dict(r.trace);
          out.append(d);
        }
        return out;
      },
      py::arg("preset"), py::arg("parameter"), py::arg("values"),
      py::arg("t_end") = 0.5,
      "Run a one-parameter family sweep of a preset.");

  m.def(
      "verify",
      [](const std::vector<std::string>& only, std::uint64_t seed,
         const std::vector<int>& grid_ns, int ensemble,
         const std::string& mutate) {
        VerifySettings s;
        s.only = only;
        s.seed = seed;
        s.grid_ns = grid_ns;
        s.ensemble = ensemble;
        s.mutate = mutate;
        const VerificationReport rep = run_suite(s);
        py::dict d;
        d["all_pass"] = rep.all_pass;
        d["environment"] = rep.environment;
        py::list checks;
        for (const CheckResult& c : rep.checks) {
          py::dict cd;
          cd["id"] = c.id;
          cd["backend"] = c.backend;
          cd["residual"] = c.residual;
          cd["tolerance"] = c.tolerance;
          cd["pass"] = c.pass;
          if (c.order) cd["order"] = *c.order;
          cd["note"] = c.note;
          checks.append(cd);
        }
        d["checks"] = checks;
        return d;
      },
      py::arg("only") = std::vector<std::string>{},
      py::arg("seed") = VerifySettings{}.seed,
      py::arg("grid_ns") = std::vector<int>{16, 32, 64},
      py::arg("ensemble") = 2000, py::arg("mutate") = std::string{},
      "Run the verification suite (optionally a subset) and report results.");

  m.def("set_threads", &set_threads, py::arg("n"),
        "Cap the data-parallel width (0 restores the hardware default).");

  py::register_exception<ConfigError>(m, "ConfigError");
  py::register_exception<InvalidParameter>(m, "InvalidParameter");
  static py::exception<Error> base_error(m, "XcfError");
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const ConfigError&) {
      throw;  // handled by the registered exception above
    } catch (const InvalidParameter&) {
      throw;
    } catch (const Error& e) {
      base_error(e.what());
    }
  });
}
