#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cstdio>
#include <sstream>

#include "doctest.h"
#include "xcf/presets.hpp"
#include "xcf/trace_io.hpp"

using namespace xcf;

namespace {

FlowTrace short_trace() {
  auto [L, st] = build_preset(PresetId::parse("hyperbolic_solvable(1,1)"));
  FlowConfig cfg;
  cfg.adaptive = false;
  cfg.dt_init = 1e-3;
  cfg.t_end = 0.02;
  cfg.sample_every = 5;
  cfg.etas = {0.5, 1.0};
  return run_flow_homogeneous(L, st.q, cfg);
}

}  // namespace

TEST_CASE("config hash is a pure function of the text") {
  CHECK(config_hash("abc") == config_hash("abc"));
  CHECK(config_hash("abc") != config_hash("abd"));
  CHECK(config_hash("") != config_hash("a"));
}

TEST_CASE("csv header embeds version, config hash, and seed") {
  const FlowTrace trace = short_trace();
  const std::string csv = trace_csv(trace, R"({"demo":1})", 42);
  CHECK(csv.find(std::string("# xcflow ") + kVersion) != std::string::npos);
  CHECK(csv.find("# config_hash ") != std::string::npos);
  CHECK(csv.find("# seed 42") != std::string::npos);
  CHECK(csv.find("t,dt,a_min,a_max") != std::string::npos);
  CHECK(csv.find("eta_0.5") != std::string::npos);
  CHECK(csv.find("eta_1") != std::string::npos);
  // one data row per sample
  std::size_t rows = 0;
  std::istringstream is(csv);
  for (std::string line; std::getline(is, line);)
    if (!line.empty() && line[0] != '#' && line[0] != 't') ++rows;
  CHECK(rows == trace.samples.size());
}

TEST_CASE("serialization is deterministic") {
  const FlowTrace a = short_trace();
  const FlowTrace b = short_trace();
  const std::string cfg = R"({"demo":2})";
  CHECK(trace_csv(a, cfg, 7) == trace_csv(b, cfg, 7));
  CHECK(trace_json(a, cfg, 7) == trace_json(b, cfg, 7));
}

TEST_CASE("json trace records breakdown events") {
  auto [L, st] = build_preset(PresetId::parse("su2_round"));
  FlowConfig cfg;
  cfg.branch = Branch::Positive;
  cfg.t_end = 0.5;
  const FlowTrace trace = run_flow_homogeneous(L, st.q, cfg);
  REQUIRE(trace.breakdown.has_value());
  const std::string js = trace_json(trace, "{}", 0);
  CHECK(js.find("\"breakdown\"") != std::string::npos);
  CHECK(js.find("H_exceeded") != std::string::npos);
  const std::string csv = trace_csv(trace, "{}", 0);
  CHECK(csv.find("# breakdown H_exceeded") != std::string::npos);
}

TEST_CASE("text file round trip") {
  const std::string path = "test_traceio_roundtrip.txt";
  const std::string payload = "line1\nline2\x01\xff\n";
  write_text_file(path, payload);
  CHECK(read_text_file(path) == payload);
  std::remove(path.c_str());
  CHECK_THROWS_AS(read_text_file("missing_file.txt"), Error);
}

TEST_CASE("report json is parseable and complete") {
  VerifySettings s;
  s.ensemble = 100;
  s.only = {"symbol"};
  const VerificationReport rep = run_suite(s);
  const std::string js = report_json(rep);
  CHECK(js.find("\"all_pass\": true") != std::string::npos);
  CHECK(js.find("\"symbol\"") != std::string::npos);
  CHECK(js.find("\"residual\"") != std::string::npos);
}
