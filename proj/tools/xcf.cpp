#include <cstdio>
#include <cstdlib>
#include <iostream>
#include <set>

#include "CLI11.hpp"
#include "json.hpp"
#include "xcf/grid.hpp"
#include "xcf/presets.hpp"
#include "xcf/trace_io.hpp"

using json = nlohmann::json;
using namespace xcf;

namespace {

struct GridGenOptions {
  int n = 0;  // 0 = homogeneous preset run
  int order = 4;
  double eps = 0.05;
  std::uint64_t seed = 1;
  int modes = 4;
  int max_freq = 2;
};

struct RunOptions {
  std::string preset = "hyperbolic_solvable(1,1)";
  GridGenOptions grid;
  std::string branch = "auto";
  FlowConfig flow;
  std::string out = "xcf_run";
  bool snapshot = true;
};

struct VerifyOptions {
  VerifySettings settings;
  std::string report = "xcf_report.json";
};

struct SweepOptions {
  std::string preset = "hyperbolic_solvable(1,1)";
  std::string parameter = "alphabeta";
  std::vector<double> values;
  std::string branch = "auto";
  FlowConfig flow;
  std::string out = "xcf_sweep";
};

Branch parse_branch(const std::string& s) {
  if (s == "auto") return Branch::Auto;
  if (s == "negative") return Branch::Negative;
  if (s == "positive") return Branch::Positive;
  throw ConfigError("branch must be auto, negative, or positive (got '" + s +
                    "')");
}

void reject_unknown(const json& j, const std::set<std::string>& allowed,
                    const std::string& where) {
  for (const auto& [key, value] : j.items())
    if (!allowed.count(key))
      throw ConfigError("unknown config key '" + key + "' in " + where);
}

template <typename T>
void maybe(const json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

void load_flow(const json& j, FlowConfig& f, std::string& branch,
               const std::string& where) {
  reject_unknown(j,
                 {"branch", "t_end", "dt_init", "dt_max", "adaptive", "safety",
                  "max_growth", "sample_every", "retry_budget", "etas",
                  "preset", "grid", "out", "snapshot", "parameter", "values"},
                 where);
  maybe(j, "branch", branch);
  maybe(j, "t_end", f.t_end);
  maybe(j, "dt_init", f.dt_init);
  maybe(j, "dt_max", f.dt_max);
  maybe(j, "adaptive", f.adaptive);
  maybe(j, "safety", f.safety);
  maybe(j, "max_growth", f.max_growth);
  maybe(j, "sample_every", f.sample_every);
  maybe(j, "retry_budget", f.retry_budget);
  maybe(j, "etas", f.etas);
}

void load_config(const std::string& path, RunOptions& run, VerifyOptions& ver,
                 SweepOptions& sweep, int& threads) {
  json j;
  try {
    j = json::parse(read_text_file(path));
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config parse error: ") + e.what());
  }
  reject_unknown(j, {"threads", "run", "verify", "sweep"}, "top level");
  maybe(j, "threads", threads);
  if (j.contains("run")) {
    const json& r = j["run"];
    load_flow(r, run.flow, run.branch, "run");
    maybe(r, "preset", run.preset);
    maybe(r, "out", run.out);
    maybe(r, "snapshot", run.snapshot);
    if (r.contains("grid")) {
      const json& g = r["grid"];
      reject_unknown(g, {"n", "order", "eps", "seed", "modes", "max_freq"},
                     "run.grid");
      maybe(g, "n", run.grid.n);
      maybe(g, "order", run.grid.order);
      maybe(g, "eps", run.grid.eps);
      maybe(g, "seed", run.grid.seed);
      maybe(g, "modes", run.grid.modes);
      maybe(g, "max_freq", run.grid.max_freq);
    }
  }
  if (j.contains("verify")) {
    const json& v = j["verify"];
    reject_unknown(v,
                   {"seed", "grid_ns", "stencil_order", "eps", "ensemble",
                    "mutate", "only", "report"},
                   "verify");
    maybe(v, "seed", ver.settings.seed);
    maybe(v, "grid_ns", ver.settings.grid_ns);
    maybe(v, "stencil_order", ver.settings.stencil_order);
    maybe(v, "eps", ver.settings.eps);
    maybe(v, "ensemble", ver.settings.ensemble);
    maybe(v, "mutate", ver.settings.mutate);
    maybe(v, "only", ver.settings.only);
    maybe(v, "report", ver.report);
  }
  if (j.contains("sweep")) {
    const json& sw = j["sweep"];
    load_flow(sw, sweep.flow, sweep.branch, "sweep");
    maybe(sw, "preset", sweep.preset);
    maybe(sw, "parameter", sweep.parameter);
    maybe(sw, "values", sweep.values);
    maybe(sw, "out", sweep.out);
  }
}

json flow_echo(const FlowConfig& f, const std::string& branch) {
  return json{{"branch", branch},
              {"t_end", f.t_end},
              {"dt_init", f.dt_init},
              {"dt_max", f.dt_max},
              {"adaptive", f.adaptive},
              {"safety", f.safety},
              {"max_growth", f.max_growth},
              {"sample_every", f.sample_every},
              {"retry_budget", f.retry_budget},
              {"etas", f.etas}};
}

int cmd_run(RunOptions& o) {
  o.flow.branch = parse_branch(o.branch);
  json echo{{"command", "run"}, {"preset", o.preset},
            {"flow", flow_echo(o.flow, o.branch)}};
  FlowTrace trace;
  std::uint64_t seed = 0;
  if (o.grid.n > 0) {
    seed = o.grid.seed;
    echo["grid"] = {{"n", o.grid.n},       {"order", o.grid.order},
                    {"eps", o.grid.eps},   {"seed", o.grid.seed},
                    {"modes", o.grid.modes}, {"max_freq", o.grid.max_freq}};
    const TrigMetric tm = TrigMetric::random(o.grid.seed, o.grid.eps,
                                             o.grid.modes, o.grid.max_freq);
    const MetricGrid m0 = sample(tm, GridSpec(o.grid.n, o.grid.order));
    MetricGrid mf;
    trace = run_flow_grid(m0, o.flow, &mf);
    if (o.snapshot)
      write_snapshot(o.out + ".snap", mf, trace.samples.back().t);
  } else {
    auto [L, st] = build_preset(PresetId::parse(o.preset));
    trace = run_flow_homogeneous(L, st.q, o.flow);
  }
  const std::string cfg = echo.dump();
  write_text_file(o.out + ".csv", trace_csv(trace, cfg, seed));
  write_text_file(o.out + ".json", trace_json(trace, cfg, seed));
  const FlowSample& last = trace.samples.back();
  std::printf("run: t_final=%.12g samples=%zu", last.t, trace.samples.size());
  if (trace.breakdown)
    std::printf(" breakdown=%s t=%.12g",
                to_string(trace.breakdown->reason).c_str(),
                trace.breakdown->time);
  std::printf("\n");
  return 0;
}

int cmd_verify(VerifyOptions& o) {
  for (std::string& id : o.settings.only)
    if (id.rfind("check_", 0) == 0) id = id.substr(6);
  if (o.settings.mutate.rfind("check_", 0) == 0)
    o.settings.mutate = o.settings.mutate.substr(6);
  const VerificationReport rep = run_suite(o.settings);
  std::fputs(report_table(rep).c_str(), stdout);
  write_text_file(o.report, report_json(rep));
  return rep.all_pass ? 0 : 1;
}

int cmd_sweep(SweepOptions& o) {
  if (o.values.empty())
    throw ConfigError("sweep: empty parameter value list");
  o.flow.branch = parse_branch(o.branch);
  const PresetId base = PresetId::parse(o.preset);
  const auto results = sweep_family(base, o.parameter, o.values, o.flow);
  std::ostringstream summary;
  summary << "preset,parameter,value,final_t,final_pinching,breakdown_reason,"
             "breakdown_time,error\n";
  for (std::size_t i = 0; i < results.size(); ++i) {
    const SweepResult& r = results[i];
    json echo{{"command", "sweep"},
              {"preset", r.id.name()},
              {"parameter", o.parameter},
              {"value", o.values[i]},
              {"flow", flow_echo(o.flow, o.branch)}};
    if (r.error.empty()) {
      const std::string cfg = echo.dump();
      const std::string stem = o.out + "_" + std::to_string(i);
      write_text_file(stem + ".csv", trace_csv(r.trace, cfg, 0));
      write_text_file(stem + ".json", trace_json(r.trace, cfg, 0));
    }
    summary << r.id.name() << ',' << o.parameter << ',' << o.values[i] << ',';
    if (r.error.empty()) {
      summary << r.trace.samples.back().t << ',' << r.pinching.back() << ',';
      if (r.trace.breakdown)
        summary << to_string(r.trace.breakdown->reason) << ','
                << r.trace.breakdown->time << ',';
      else
        summary << ",,";
      summary << '\n';
    } else {
      summary << ",,,,\"" << r.error << "\"\n";
    }
  }
  write_text_file(o.out + "_summary.csv", summary.str());
  std::printf("sweep: %zu parameter points -> %s_summary.csv\n",
              results.size(), o.out.c_str());
  return 0;
}

void add_flow_flags(CLI::App* app, FlowConfig& f, std::string& branch) {
  app->add_option("--branch", branch, "auto, negative, or positive");
  app->add_option("--t-end", f.t_end, "flow end time");
  app->add_option("--dt", f.dt_init, "initial (or fixed) step size");
  app->add_option("--dt-max", f.dt_max, "adaptive step cap");
  app->add_flag("--adaptive,!--fixed-dt", f.adaptive,
                "adaptive step control (default on)");
  app->add_option("--safety", f.safety, "fraction of the curvature timescale");
  app->add_option("--sample-every", f.sample_every, "trace cadence in steps");
  app->add_option("--eta", f.etas, "eta functionals recorded in the trace");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"cross curvature flow laboratory"};
  app.require_subcommand(1);
  int threads = 0;
  std::string config_path;
  app.add_option("--threads", threads, "data-parallel width (0 = cores)")
      ->envname("XCF_THREADS");
  app.add_option("--config", config_path, "JSON config file (flags override)");

  RunOptions run;
  VerifyOptions ver;
  SweepOptions sweep;

  CLI::App* crun = app.add_subcommand("run", "run a flow and write its trace");
  crun->add_option("--preset", run.preset, "homogeneous preset id");
  crun->add_option("--grid-n", run.grid.n, "grid nodes per axis (grid mode)");
  crun->add_option("--grid-order", run.grid.order, "stencil order (2, 4, 6)");
  crun->add_option("--grid-eps", run.grid.eps, "perturbation amplitude");
  crun->add_option("--grid-seed", run.grid.seed, "metric generator seed");
  crun->add_option("--out", run.out, "output path prefix");
  crun->add_flag("--snapshot,!--no-snapshot", run.snapshot,
                 "write the final grid metric snapshot");
  add_flow_flags(crun, run.flow, run.branch);

  CLI::App* cver = app.add_subcommand("verify", "run the identity suite");
  cver->add_option("--seed", ver.settings.seed, "ensemble seed");
  cver->add_option("--grid-n", ver.settings.grid_ns, "grid resolutions");
  cver->add_option("--order", ver.settings.stencil_order, "stencil order");
  cver->add_option("--eps", ver.settings.eps, "perturbation amplitude");
  cver->add_option("--ensemble", ver.settings.ensemble, "random sample count");
  cver->add_option("--only", ver.settings.only, "run only these checks");
  cver->add_option("--mutate", ver.settings.mutate,
                   "flip the documented sign in one check (self-test)");
  cver->add_option("--report", ver.report, "report JSON path");

  CLI::App* cswp = app.add_subcommand("sweep", "run a preset family sweep");
  cswp->add_option("--preset", sweep.preset, "base preset id");
  cswp->add_option("--param", sweep.parameter,
                   "alpha, beta, alphabeta, or lambda");
  cswp->add_option("--values", sweep.values, "parameter values");
  cswp->add_option("--out", sweep.out, "output path prefix");
  add_flow_flags(cswp, sweep.flow, sweep.branch);

  // The config file seeds the defaults; command-line flags then override.
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }
  try {
    if (!config_path.empty()) {
      load_config(config_path, run, ver, sweep, threads);
      // re-apply flags on top of the file values
      app.clear();
      app.parse(argc, argv);
    }
    if (threads > 0) set_threads(threads);
    if (crun->parsed()) return cmd_run(run);
    if (cver->parsed()) return cmd_verify(ver);
    return cmd_sweep(sweep);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 2;
  } catch (const InvalidParameter& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 2;
  } catch (const Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
}
