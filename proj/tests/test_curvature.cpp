#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <algorithm>
#include <cmath>
#include <random>

#include "doctest.h"
#include "xcf/curvature.hpp"
#include "xcf/lie.hpp"
#include "xcf/presets.hpp"

using namespace xcf;

namespace {

// Coordinate-chart model of the solvable negatively curved family:
//   g = dx^2 + e^{2 alpha x} dy^2 + e^{2 beta x} dz^2.
// Closed-form 2-jet and connection derivative at a point, used as an
// independent oracle for the jet-based curvature pipeline.
MetricJet2 solvable_jet(double alpha, double beta, double x) {
  MetricJet2 J;
  const double ey = std::exp(2.0 * alpha * x);
  const double ez = std::exp(2.0 * beta * x);
  J.g = Sym2::diag(1.0, ey, ez, Variance::Covariant);
  J.dg[0](1, 1) = 2.0 * alpha * ey;
  J.dg[0](2, 2) = 2.0 * beta * ez;
  J.ddg[0][0](1, 1) = 4.0 * alpha * alpha * ey;
  J.ddg[0][0](2, 2) = 4.0 * beta * beta * ez;
  return J;
}

GammaJet solvable_dgamma(double alpha, double beta, double x) {
  GammaJet dG;
  const double ey = std::exp(2.0 * alpha * x);
  const double ez = std::exp(2.0 * beta * x);
  dG.at(0, 0, 1, 1) = -2.0 * alpha * alpha * ey;
  dG.at(0, 0, 2, 2) = -2.0 * beta * beta * ez;
  return dG;
}

}  // namespace

TEST_CASE("flat jet: zero connection, zero curvature bundle") {
  MetricJet2 J;
  J.g = Sym2::identity(Variance::Covariant);
  const Gamma G = christoffels_from_jet(J);
  CHECK(G.max_abs() == 0.0);
  const CurvatureBundle B = curvature_from_jet(J, GammaJet{});
  CHECK(B.Riem.max_abs() == 0.0);
  CHECK(B.detP == 0.0);
  CHECK(B.H == 0.0);
  CHECK(!B.V.has_value());
}

TEST_CASE("Christoffels of the solvable chart match the closed form") {
  const double alpha = 0.7, beta = 1.3, x = 0.25;
  const Gamma G = christoffels_from_jet(solvable_jet(alpha, beta, x));
  const double ey = std::exp(2.0 * alpha * x);
  const double ez = std::exp(2.0 * beta * x);
  CHECK(G(0, 1, 1) == doctest::Approx(-alpha * ey));
  CHECK(G(0, 2, 2) == doctest::Approx(-beta * ez));
  CHECK(G(1, 0, 1) == doctest::Approx(alpha));
  CHECK(G(2, 0, 2) == doctest::Approx(beta));
  CHECK(G(0, 0, 0) == doctest::Approx(0.0));
}

TEST_CASE("space-form bundle values") {
  for (double K : {-1.0, 1.0, 0.5}) {
    const Sym2 g = Sym2::diag(1.3, 0.8, 2.1, Variance::Covariant);
    const CurvatureBundle B = assemble_bundle(g, Riem4::space_form(K, g));
    CHECK(B.Rscal == doctest::Approx(6.0 * K));
    CHECK(B.detP == doctest::Approx(-K * K * K));
    CHECK(B.H == doctest::Approx(3.0 * K * K));
    for (int i = 0; i < 3; ++i) CHECK(B.sec(i) == doctest::Approx(-K));
    // h = K^2 g, so V = h / det P relates P and h consistently
    CHECK((B.h.m - K * K * g.m).cwiseAbs().maxCoeff() < 1e-10);
    REQUIRE(B.V.has_value());
    CHECK((B.V->m - B.h.m / B.detP).cwiseAbs().maxCoeff() < 1e-9);
  }
}

TEST_CASE("jet pipeline vs frame pipeline on the solvable geometry") {
  const double alpha = 1.0, beta = 2.0, x = 0.3;
  const CurvatureBundle Bj =
      curvature_from_jet(solvable_jet(alpha, beta, x), solvable_dgamma(alpha, beta, x));
  auto [L, st] = build_preset(PresetId::parse("hyperbolic_solvable(1,2)"));
  const CurvatureBundle Bf = curvature_homogeneous(L, st.q);
  // Both compute the same geometry; every scalar invariant must agree.
  CHECK(Bj.Rscal == doctest::Approx(Bf.Rscal));
  CHECK(Bj.detP == doctest::Approx(Bf.detP));
  CHECK(Bj.H == doctest::Approx(Bf.H));
  for (int i = 0; i < 3; ++i) CHECK(Bj.sec(i) == doctest::Approx(Bf.sec(i)));
  // Einstein spectrum oracle: {alpha beta, beta^2, alpha^2} sorted ascending
  std::array<double, 3> expect{alpha * beta, beta * beta, alpha * alpha};
  std::sort(expect.begin(), expect.end());
  for (int i = 0; i < 3; ++i) CHECK(Bj.sec(i) == doctest::Approx(expect[i]));
  CHECK(Bj.Riem.symmetry_residual() < 1e-12);
}

TEST_CASE("symbol: nonnegative spectrum and gauge kernel for P > 0") {
  std::mt19937_64 rng(29);
  std::normal_distribution<double> nd;
  for (int trial = 0; trial < 200; ++trial) {
    Mat3 a;
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) a(i, j) = nd(rng);
    const Sym2 P(a * a.transpose() + 0.2 * Mat3::Identity(),
                 Variance::Contravariant);
    Covec3 zeta(nd(rng), nd(rng), nd(rng));
    if (zeta.norm() < 1e-3) zeta = Covec3(1, 0, 0);
    const auto ev = symbol_eigenvalues(P, zeta);
    const double scale = std::abs(ev(5)) + 1e-30;
    CHECK(ev(0) / scale > -1e-12);
    int near_zero = 0;
    for (int i = 0; i < 6; ++i)
      if (std::abs(ev(i)) / scale < 1e-9) ++near_zero;
    CHECK(near_zero >= 3);
  }
}

TEST_CASE("sym2 basis maps are mutually inverse isometries") {
  Mat3 s;
  s << 1, 4, 5, 4, 2, 6, 5, 6, 3;
  const auto v = sym2_to_vec6(s);
  CHECK((vec6_to_sym2(v) - s).cwiseAbs().maxCoeff() < 1e-15);
  CHECK(v.squaredNorm() == doctest::Approx(s.squaredNorm()));
}

TEST_CASE("integrability operator on hand-computable data") {
  const Sym2 h = Sym2::identity(Variance::Covariant);
  Rank3 zero;
  for (auto& m : zero) m.setZero();
  CHECK(integrability_L(h, zero).norm() == 0.0);
  // nabla_i T_jk = a_i b_jk => L_k = sum_i a_i b_ik - 1/2 a_k tr(b)
  const Vec3 a(0.3, -1.1, 0.7);
  Mat3 b;
  b << 2, 1, 0, 1, -1, 3, 0, 3, 4;
  Rank3 nablaT;
  for (int i = 0; i < 3; ++i) nablaT[i] = a(i) * b;
  const Covec3 Lval = integrability_L(h, nablaT);
  for (int k = 0; k < 3; ++k) {
    double expect = -0.5 * a(k) * b.trace();
    for (int i = 0; i < 3; ++i) expect += a(i) * b(i, k);
    CHECK(Lval(k) == doctest::Approx(expect));
  }
  CHECK_THROWS_AS(
      integrability_L(Sym2::diag(1, 1, 0, Variance::Covariant), nablaT),
      SingularTensor);
}

TEST_CASE("tension of the identity map") {
  MetricJet2 J;
  J.g = Sym2::identity(Variance::Covariant);
  const Gamma G0 = christoffels_from_jet(J);
  CHECK(tension_of_identity(J.g, G0, G0).norm() == 0.0);
  Gamma Gt = G0;
  Gt.at(0, 1, 1) = 0.8;
  const Vec3 tau = tension_of_identity(J.g, G0, Gt);
  CHECK(tau(0) == doctest::Approx(0.8));
  CHECK(tau(1) == doctest::Approx(0.0));
}
