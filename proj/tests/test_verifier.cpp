#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <algorithm>

#include "doctest.h"
#include "xcf/verify.hpp"

using namespace xcf;

TEST_CASE("check registry") {
  const auto& ids = check_ids();
  CHECK(ids.size() == 16);
  for (const char* expected :
       {"bianchi", "dual_bianchi", "h_equivalence", "P_mu", "detP_identity",
        "norm_decomposition", "E_traces", "symbol", "eta_half", "evolution_P",
        "evolution_Riem", "volume_evolution", "eta_lemma", "logdetP",
        "harmonicity", "J_theorem"}) {
    CAPTURE(expected);
    CHECK(std::find(ids.begin(), ids.end(), expected) != ids.end());
  }
}

TEST_CASE("algebraic subset passes at tight tolerance") {
  VerifySettings s;
  s.ensemble = 300;
  s.grid_ns = {12};
  s.only = {"h_equivalence", "P_mu", "detP_identity", "norm_decomposition",
            "E_traces", "eta_half", "symbol"};
  const VerificationReport rep = run_suite(s);
  CHECK(rep.all_pass);
  REQUIRE(rep.checks.size() == s.only.size());
  for (const CheckResult& c : rep.checks) {
    CAPTURE(c.id);
    CHECK(c.pass);
    CHECK(c.residual <= c.tolerance);
    CHECK(c.residual <= 1e-10);
  }
}

TEST_CASE("unknown check id in the filter is an error") {
  VerifySettings s;
  s.only = {"nonexistent_check"};
  CHECK_THROWS_AS(run_suite(s), ConfigError);
}

TEST_CASE("mutation flips its target check to FAIL") {
  VerifySettings s;
  s.ensemble = 300;
  s.grid_ns = {12};
  s.only = {"eta_half", "norm_decomposition"};
  s.mutate = "eta_half";
  const VerificationReport rep = run_suite(s);
  CHECK(!rep.all_pass);
  for (const CheckResult& c : rep.checks) {
    if (c.id == "eta_half")
      CHECK(!c.pass);
    else
      CHECK(c.pass);  // mutation is local to its target
  }
}

TEST_CASE("suite output is deterministic for a fixed seed") {
  VerifySettings s;
  s.ensemble = 200;
  s.only = {"norm_decomposition", "E_traces", "symbol"};
  const VerificationReport a = run_suite(s);
  const VerificationReport b = run_suite(s);
  REQUIRE(a.checks.size() == b.checks.size());
  for (std::size_t i = 0; i < a.checks.size(); ++i)
    CHECK(a.checks[i].residual == b.checks[i].residual);
  s.seed += 1;
  const VerificationReport c = run_suite(s);
  bool any_diff = false;
  for (std::size_t i = 0; i < a.checks.size(); ++i)
    any_diff = any_diff || a.checks[i].residual != c.checks[i].residual;
  CHECK(any_diff);
}

TEST_CASE("report table lists every executed check") {
  VerifySettings s;
  s.ensemble = 100;
  s.only = {"symbol", "eta_half"};
  const VerificationReport rep = run_suite(s);
  const std::string table = report_table(rep);
  CHECK(table.find("symbol") != std::string::npos);
  CHECK(table.find("eta_half") != std::string::npos);
  CHECK(table.find("PASS") != std::string::npos);
  CHECK(!rep.environment.empty());
}

TEST_CASE("temporal convergence check runs on a reduced budget") {
  VerifySettings s;
  s.only = {"volume_evolution"};
  s.grid_ns = {12};
  s.temporal_dts = {1e-2, 5e-3};
  const VerificationReport rep = run_suite(s);
  REQUIRE(rep.checks.size() == 1);
  CHECK(rep.checks[0].pass);
  REQUIRE(rep.checks[0].order.has_value());
  CHECK(*rep.checks[0].order > 1.8);
}
