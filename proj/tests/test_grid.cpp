#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <cstdio>

#include "doctest.h"
#include "xcf/grid.hpp"

using namespace xcf;

namespace {

double jet_error(const TrigMetric& tm, int n, int order) {
  const GridSpec spec(n, order);
  const MetricGrid m = sample(tm, spec);
  const auto jets = jet_at_nodes(m);
  double err = 0.0;
  for (std::int64_t node = 0; node < spec.nodes(); ++node) {
    const MetricJet2 exact = tm.analytic_jet(spec.coords(node));
    for (int k = 0; k < 3; ++k) {
      err = std::max(err,
                     (jets[node].dg[k] - exact.dg[k]).cwiseAbs().maxCoeff());
      for (int l = 0; l < 3; ++l)
        err = std::max(
            err, (jets[node].ddg[k][l] - exact.ddg[k][l]).cwiseAbs().maxCoeff());
    }
  }
  return err;
}

}  // namespace

TEST_CASE("stencil derivatives converge at the declared order") {
  const TrigMetric tm = TrigMetric::random(5, 0.1, 3, 2);
  for (int order : {2, 4, 6}) {
    const double e16 = jet_error(tm, 16, order);
    const double e32 = jet_error(tm, 32, order);
    const double slope = std::log2(e16 / e32);
    CHECK(slope > order - 0.4);
  }
  CHECK_THROWS_AS(GridSpec(16, 3), InvalidParameter);
  CHECK_THROWS_AS(GridSpec(2, 4), InvalidParameter);
}

TEST_CASE("integration: flat volume and partition of the domain") {
  const GridSpec spec(16, 4);
  MetricGrid m(spec);
  for (auto& g : m.g) g = Sym2::diag(4.0, 1.0, 1.0, Variance::Covariant);
  ScalarGrid one(spec);
  for (double& v : one.v) v = 1.0;
  const double vol = integrate(one, m);
  const double expect = 2.0 * std::pow(2.0 * M_PI, 3);  // sqrt(det g) = 2
  CHECK(vol == doctest::Approx(expect).epsilon(1e-12));
}

TEST_CASE("divergence theorem residual vanishes with resolution") {
  const TrigMetric tm = TrigMetric::random(9, 0.08, 3, 1);
  const TrigVectorField tv = TrigVectorField::random(10, 3, 1);
  double prev = 0.0;
  for (int n : {16, 32}) {
    const GridSpec spec(n, 4);
    const MetricGrid m = sample(tm, spec);
    const TensorGrid W = sample(tv, spec);
    const double r = divergence_residual(W, m);
    // must either shrink at the stencil order or already sit at the
    // floating-point floor
    if (prev > 1e-14) CHECK(r < prev / 8.0);
    prev = r;
  }
  CHECK(prev < 1e-6);
}

TEST_CASE("covariant derivative of the metric itself vanishes") {
  const TrigMetric tm = TrigMetric::random(21, 0.05, 3, 1);
  const GridSpec spec(24, 4);
  const MetricGrid m = sample(tm, spec);
  const auto jets = jet_at_nodes(m);
  const TensorGrid gammas = gamma_grid(m, jets);
  TensorGrid gfield(spec, {Variance::Covariant, Variance::Covariant});
  for (std::int64_t node = 0; node < spec.nodes(); ++node)
    for (int c = 0; c < 9; ++c) gfield.at(node, c) = m.g[node](c / 3, c % 3);
  const TensorGrid nabla_g = covariant_derivative(gfield, gammas);
  double err = 0.0;
  for (double v : nabla_g.v) err = std::max(err, std::fabs(v));
  CHECK(err < 1e-5);  // limited by the stencil truncation of Gamma
}

TEST_CASE("snapshot round trip is bit exact") {
  const TrigMetric tm = TrigMetric::random(31, 0.05, 4, 2);
  const MetricGrid m = sample(tm, GridSpec(16, 6));
  const std::string path = "test_grid_snapshot.snap";
  write_snapshot(path, m, 0.625);
  double t = 0.0;
  const MetricGrid back = read_snapshot(path, &t);
  CHECK(t == 0.625);
  CHECK(back.spec == m.spec);
  REQUIRE(back.g.size() == m.g.size());
  for (std::size_t i = 0; i < m.g.size(); ++i)
    CHECK((back.g[i].m - m.g[i].m).cwiseAbs().maxCoeff() == 0.0);
  std::remove(path.c_str());
  CHECK_THROWS_AS(read_snapshot("does_not_exist.snap"), Error);
}

TEST_CASE("thread count does not change results") {
  const TrigMetric tm = TrigMetric::random(41, 0.05, 3, 2);
  const GridSpec spec(16, 4);
  const MetricGrid m = sample(tm, spec);
  set_threads(1);
  const auto b1 = bundles_at_nodes(m);
  set_threads(4);
  const auto b4 = bundles_at_nodes(m);
  set_threads(0);
  REQUIRE(b1.size() == b4.size());
  double err = 0.0;
  for (std::size_t i = 0; i < b1.size(); ++i) {
    err = std::max(err, std::fabs(b1[i].detP - b4[i].detP));
    err = std::max(err, std::fabs(b1[i].H - b4[i].H));
  }
  CHECK(err == 0.0);
}

TEST_CASE("trig metric generator is deterministic and positive definite") {
  const TrigMetric a = TrigMetric::random(77, 0.05, 4, 2);
  const TrigMetric b = TrigMetric::random(77, 0.05, 4, 2);
  REQUIRE(a.modes.size() == b.modes.size());
  for (std::size_t i = 0; i < a.modes.size(); ++i)
    CHECK((a.modes[i].amplitude - b.modes[i].amplitude).cwiseAbs().maxCoeff() ==
          0.0);
  const MetricGrid m = sample(a, GridSpec(16, 4));
  for (const Sym2& g : m.g) CHECK(g.positive_definite());
}
