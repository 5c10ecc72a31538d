#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <random>

#include "doctest.h"
#include "xcf/functionals.hpp"
#include "xcf/presets.hpp"

using namespace xcf;

namespace {

TDecomposition decomposition_of(const LieAlgebraData& L, const Sym2& q,
                                const CurvatureBundle& B) {
  REQUIRE(B.V.has_value());
  return compute_T(B.P_up, frame_nabla_P(L, q, B), *B.V);
}

}  // namespace

TEST_CASE("nil geometry: exact Einstein data") {
  auto [L, st] = build_preset(PresetId::parse("nil"));
  const CurvatureBundle B = curvature_homogeneous(L, st.q);
  CHECK(B.detP == doctest::Approx(3.0 / 64.0).epsilon(1e-14));
  CHECK(B.sec(0) == doctest::Approx(-0.25));
  CHECK(B.sec(1) == doctest::Approx(-0.25));
  CHECK(B.sec(2) == doctest::Approx(0.75));
  const TDecomposition td = decomposition_of(L, st.q, B);
  CHECK(td.Ttr.norm() < 1e-14);  // unimodular: no trace part
  CHECK(antisym_norm_sq(td.T, *B.V) == doctest::Approx(4.0).epsilon(1e-12));
}

TEST_CASE("decomposition reassembles T and E is V-trace-free") {
  for (const char* name :
       {"nil", "sol", "su2_round", "hyperbolic_solvable(1,2)"}) {
    CAPTURE(name);
    auto [L, st] = build_preset(PresetId::parse(name));
    const CurvatureBundle B = curvature_homogeneous(L, st.q);
    const TDecomposition td = decomposition_of(L, st.q, B);
    const Sym2& V = *B.V;
    double recon = 0.0, traces = 0.0;
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j)
        for (int k = 0; k < 3; ++k) {
          const double rhs = td.E.get({i, j, k}) -
                             0.1 * (B.P_up(i, j) * td.Ttr(k) +
                                    B.P_up(i, k) * td.Ttr(j)) +
                             0.4 * B.P_up(j, k) * td.Ttr(i);
          recon = std::max(recon, std::fabs(td.T.get({i, j, k}) - rhs));
        }
    for (int i = 0; i < 3; ++i)
      for (int a = 0; a < 3; ++a) {
        double t1 = 0, t2 = 0, t3 = 0;
        for (int j = 0; j < 3; ++j)
          for (int k = 0; k < 3; ++k) {
            t1 += V(j, k) * td.E.get({a, j, k});
            t2 += V(j, k) * td.E.get({j, a, k});
            t3 += V(j, k) * td.E.get({j, k, a});
          }
        traces = std::max({traces, std::fabs(t1), std::fabs(t2), std::fabs(t3)});
      }
    CHECK(recon < 1e-12);
    CHECK(traces < 1e-12);
  }
}

TEST_CASE("eta = 1/2 rate density is the nonnegative E-quadratic") {
  for (const char* name : {"nil", "su2_round", "hyperbolic_solvable(2,1)"}) {
    CAPTURE(name);
    auto [L, st] = build_preset(PresetId::parse(name));
    const CurvatureBundle B = curvature_homogeneous(L, st.q);
    if (B.detP <= 0.0) continue;
    const TDecomposition td = decomposition_of(L, st.q, B);
    const double lhs = eta_rhs_density(td, *B.V, B.detP, B.H, 0.5);
    FrameTensor<3> anti = td.E;
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j)
        for (int k = 0; k < 3; ++k)
          anti.set({i, j, k}, td.E.get({i, j, k}) - td.E.get({j, i, k}));
    const double rhs = 0.25 * vnorm_sq(anti, *B.V) * std::sqrt(B.detP);
    CHECK(lhs == doctest::Approx(rhs).epsilon(1e-10));
    CHECK(lhs >= -1e-15);
  }
}

TEST_CASE("pow_detP domain handling") {
  CHECK(pow_detP(2.0, 2.0) == doctest::Approx(4.0));
  CHECK(pow_detP(-2.0, 2.0) == doctest::Approx(4.0));
  CHECK(pow_detP(-2.0, 1.0) == doctest::Approx(-2.0));
  CHECK(pow_detP(4.0, 0.5) == doctest::Approx(2.0));
  CHECK_THROWS_AS(pow_detP(-1.0, 0.5), DomainError);
}

TEST_CASE("J vanishes exactly on space forms, with zero rate") {
  auto [L, st] = build_preset(PresetId::parse("hyperbolic_solvable(1,1)"));
  const CurvatureBundle B = curvature_homogeneous(L, st.q);
  CHECK(std::fabs(J_density(B)) < 1e-14);
  const TDecomposition td = decomposition_of(L, st.q, B);
  CHECK(std::fabs(J_rhs_density(td, B)) < 1e-13);
}

TEST_CASE("J rate is nonpositive on the solvable family") {
  for (double alpha : {0.5, 1.0, 1.7}) {
    for (double beta : {0.8, 1.3}) {
      PresetId id;
      id.kind = PresetId::Kind::HyperbolicSolvable;
      id.alpha = alpha;
      id.beta = beta;
      auto [L, st] = build_preset(id);
      const CurvatureBundle B = curvature_homogeneous(L, st.q);
      const TDecomposition td = decomposition_of(L, st.q, B);
      CHECK(J_density(B) >= -1e-14);  // AM-GM
      CHECK(J_rhs_density(td, B) <= 1e-14);
      if (alpha != beta) CHECK(J_rhs_density(td, B) < 0.0);
    }
  }
}

TEST_CASE("homogeneous functional sample") {
  auto [L, st] = build_preset(PresetId::parse("nil"));
  const FunctionalSample fs = functionals_homogeneous(L, st.q, 0.25, {0.5, 1.0});
  CHECK(fs.t == 0.25);
  CHECK(fs.volume == doctest::Approx(1.0));  // det q = 1
  CHECK(fs.detP_integral == doctest::Approx(3.0 / 64.0));
  CHECK(fs.mask_fraction == 0.0);
  REQUIRE(fs.eta_values.size() == 2);
  CHECK(fs.eta_values[0].first == 0.5);
  CHECK(fs.eta_values[0].second ==
        doctest::Approx(std::sqrt(3.0 / 64.0)));
  CHECK(fs.eta_values[1].second == doctest::Approx(3.0 / 64.0));
  CHECK(fs.volP == doctest::Approx(std::sqrt(3.0 / 64.0)));
}

TEST_CASE("grid functionals mask indefinite nodes instead of throwing") {
  const TrigMetric tm = TrigMetric::random(3, 0.05, 3, 1);
  const GridSpec spec(12, 2);
  const MetricGrid m = sample(tm, spec);
  const auto bundles = bundles_at_nodes(m);
  const FunctionalSample fs = functionals_grid(m, bundles, 0.0, {0.5});
  CHECK(std::isfinite(fs.volume));
  CHECK(fs.volume > 0.0);
  CHECK(std::isfinite(fs.P_integral));
  CHECK(std::isfinite(fs.detP_integral));
  // near-flat data: det P changes sign across the domain, so fractional
  // powers are either masked or reported as NaN, never thrown
  CHECK(fs.mask_fraction >= 0.0);
  CHECK(fs.mask_fraction <= 1.0);
}
