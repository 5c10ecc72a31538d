#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>

#include "doctest.h"
#include "xcf/flow.hpp"
#include "xcf/presets.hpp"

using namespace xcf;

TEST_CASE("branch sign resolution") {
  const Vec3 neg(-3, -2, -1), pos(1, 2, 3), mixed_lo(-1, 1, 2);
  CHECK(resolve_branch_sign(Branch::Auto, pos, pos) == 1);
  CHECK(resolve_branch_sign(Branch::Auto, neg, neg) == -1);
  CHECK(resolve_branch_sign(Branch::Negative, mixed_lo, pos) == 1);
  CHECK(resolve_branch_sign(Branch::Positive, mixed_lo, pos) == -1);
  CHECK_THROWS_AS(resolve_branch_sign(Branch::Auto, mixed_lo, pos),
                  MixedCurvatureSign);
}

TEST_CASE("hyperbolic space form: exact scaling solution") {
  // At constant curvature -1 the flow reduces to c' = 2/c for g = c^2 g0,
  // i.e. g(t) = sqrt(1 + 4 t) g0.
  auto [L, st] = build_preset(PresetId::parse("hyperbolic_solvable(1,1)"));
  FlowConfig cfg;
  cfg.adaptive = false;
  cfg.dt_init = 1e-3;
  cfg.t_end = 1.0;
  const FlowTrace trace = run_flow_homogeneous(L, st.q, cfg);
  CHECK(!trace.breakdown.has_value());
  REQUIRE(trace.final_q.has_value());
  const double scale = std::sqrt(5.0);
  const double err =
      (trace.final_q->m - scale * st.q.m).cwiseAbs().maxCoeff() / scale;
  CHECK(err < 1e-8);
  // eigenvalue diagnostics stay pinched at the space-form value a=b=c
  const FlowSample& last = trace.samples.back();
  CHECK(last.c_max / last.a_min == doctest::Approx(1.0));
  CHECK(last.t == doctest::Approx(1.0));
}

TEST_CASE("round sphere: extinction on the positive branch at t = 1/4") {
  auto [L, st] = build_preset(PresetId::parse("su2_round"));
  FlowConfig cfg;
  cfg.branch = Branch::Positive;
  cfg.t_end = 0.5;
  cfg.dt_init = 1e-4;
  cfg.dt_max = 1e-3;
  const FlowTrace trace = run_flow_homogeneous(L, st.q, cfg);
  REQUIRE(trace.breakdown.has_value());
  CHECK(trace.breakdown->reason == BreakdownReason::HExceeded);
  CHECK(std::fabs(trace.breakdown->time - 0.25) < 1e-4);
}

TEST_CASE("sphere shrinks along the exact profile before extinction") {
  auto [L, st] = build_preset(PresetId::parse("su2_round"));
  FlowConfig cfg;
  cfg.branch = Branch::Positive;
  cfg.adaptive = false;
  cfg.dt_init = 1e-4;
  cfg.t_end = 0.2;
  const FlowTrace trace = run_flow_homogeneous(L, st.q, cfg);
  REQUIRE(trace.final_q.has_value());
  // Unit-curvature sphere: with g = c^2 g0 the flow reduces to
  // (c^2)' = -2 / c^2, so g(t) = sqrt(1 - 4t) g0 (extinction at t = 1/4).
  const double c2 = std::sqrt(1.0 - 4.0 * 0.2);
  const double err =
      (trace.final_q->m - c2 * st.q.m).cwiseAbs().maxCoeff() / c2;
  CHECK(err < 1e-7);
}

TEST_CASE("analytic rate of P matches a central time difference (nil)") {
  auto [L, st] = build_preset(PresetId::parse("nil"));
  const double dt = 1e-5;
  const Sym2 qp = step_rk4_homogeneous(L, st.q, dt, 1);
  const Sym2 qm = step_rk4_homogeneous(L, st.q, -dt, 1);
  const Sym2 Pp = curvature_homogeneous(L, qp).P_up;
  const Sym2 Pm = curvature_homogeneous(L, qm).P_up;
  const Mat3 fd = (Pp.m - Pm.m) / (2.0 * dt);
  const Sym2 an = analytic_dP_dt_homogeneous(L, st.q);
  CHECK((fd - an.m).cwiseAbs().maxCoeff() < 1e-7);
}

TEST_CASE("volume density rate") {
  auto [L, st] = build_preset(PresetId::parse("hyperbolic_solvable(1,2)"));
  const CurvatureBundle B = curvature_homogeneous(L, st.q);
  const double dt = 1e-6;
  const Sym2 qp = step_rk4_homogeneous(L, st.q, dt, 1);
  const Sym2 qm = step_rk4_homogeneous(L, st.q, -dt, 1);
  const double fd = (std::sqrt(qp.det()) - std::sqrt(qm.det())) / (2.0 * dt);
  CHECK(fd == doctest::Approx(analytic_dmu_dt(B)).epsilon(1e-6));
}

TEST_CASE("adaptive controller respects its caps") {
  auto [L, st] = build_preset(PresetId::parse("hyperbolic_solvable(1,1)"));
  FlowConfig cfg;
  cfg.dt_max = 5e-3;
  const double dt = adapt_dt_homogeneous(L, st.q, cfg, 1e-3);
  CHECK(dt <= cfg.dt_max);
  CHECK(dt <= cfg.max_growth * 1e-3);
  CHECK(dt > 0.0);
}

TEST_CASE("grid flow on a perturbed periodic metric") {
  const TrigMetric tm = TrigMetric::random(20240801, 0.03, 3, 1);
  const GridSpec spec(16, 4);
  const MetricGrid m0 = sample(tm, spec);
  FlowConfig cfg;
  cfg.branch = Branch::Negative;  // mixed sign class: branch must be forced
  cfg.adaptive = false;
  cfg.dt_init = 1e-3;
  cfg.t_end = 0.01;
  cfg.sample_every = 2;
  MetricGrid mf;
  const FlowTrace trace = run_flow_grid(m0, cfg, &mf);
  CHECK(!trace.breakdown.has_value());
  REQUIRE(trace.samples.size() >= 2);
  CHECK(trace.samples.front().t == 0.0);
  CHECK(trace.samples.back().t == doctest::Approx(0.01));
  for (const Sym2& g : mf.g) CHECK(g.positive_definite());
  const double v0 = trace.samples.front().functionals.volume;
  const double v1 = trace.samples.back().functionals.volume;
  CHECK(std::isfinite(v1));
  CHECK(std::fabs(v1 - v0) / v0 < 1e-2);  // near-flat: volume moves slowly
  CHECK(v1 != v0);
}

TEST_CASE("flow trace sampling includes endpoints") {
  auto [L, st] = build_preset(PresetId::parse("hyperbolic_solvable(1,1)"));
  FlowConfig cfg;
  cfg.adaptive = false;
  cfg.dt_init = 1e-3;
  cfg.t_end = 0.05;
  cfg.sample_every = 7;
  const FlowTrace trace = run_flow_homogeneous(L, st.q, cfg);
  REQUIRE(trace.samples.size() >= 2);
  CHECK(trace.samples.front().t == 0.0);
  CHECK(trace.samples.back().t == doctest::Approx(0.05));
}
