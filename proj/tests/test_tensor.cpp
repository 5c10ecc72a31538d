#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <random>

#include "doctest.h"
#include "xcf/tensor.hpp"

using namespace xcf;

namespace {

Mat3 random_spd(std::mt19937_64& rng) {
  std::normal_distribution<double> nd;
  Mat3 a;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) a(i, j) = nd(rng);
  return a * a.transpose() + 0.5 * Mat3::Identity();
}

Mat3 random_mat(std::mt19937_64& rng) {
  std::normal_distribution<double> nd;
  Mat3 a;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) a(i, j) = nd(rng);
  return a;
}

}  // namespace

TEST_CASE("Sym2 symmetrizes its input and tracks variance") {
  Mat3 a;
  a << 1, 2, 3, 0, 5, 6, 0, 0, 9;
  const Sym2 s(a, Variance::Contravariant);
  CHECK(s(0, 1) == doctest::Approx(1.0));
  CHECK(s(1, 0) == doctest::Approx(1.0));
  CHECK(s.var == Variance::Contravariant);
  CHECK(Sym2::diag(1, 2, 3, Variance::Covariant).det() == doctest::Approx(6.0));
  CHECK(Sym2::identity(Variance::Covariant).positive_definite());
  CHECK(!Sym2::diag(1, -1, 1, Variance::Covariant).positive_definite());
}

TEST_CASE("Levi-Civita symbol: alternation and metric weighting") {
  CHECK(LeviCivita::eps(0, 1, 2) == 1.0);
  CHECK(LeviCivita::eps(1, 0, 2) == -1.0);
  CHECK(LeviCivita::eps(2, 0, 1) == 1.0);
  CHECK(LeviCivita::eps(0, 0, 2) == 0.0);
  const Sym2 g = Sym2::diag(4, 1, 1, Variance::Covariant);
  const LeviCivita mu(g);
  CHECK(mu.lo(0, 1, 2) == doctest::Approx(2.0));
  CHECK(mu.up(0, 1, 2) == doctest::Approx(0.5));
  // mu_ijk mu^ijk = 6 independently of the metric
  double total = 0.0;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      for (int k = 0; k < 3; ++k) total += mu.lo(i, j, k) * mu.up(i, j, k);
  CHECK(total == doctest::Approx(6.0));
}

TEST_CASE("invert_sym2: round trip, variance flip, singular rejection") {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 50; ++trial) {
    const Sym2 g(random_spd(rng), Variance::Covariant);
    const Sym2 gi = invert_sym2(g);
    CHECK(gi.var == Variance::Contravariant);
    CHECK((g.m * gi.m - Mat3::Identity()).cwiseAbs().maxCoeff() < 1e-12);
  }
  CHECK_THROWS_AS(invert_sym2(Sym2::diag(1, 1, 0, Variance::Covariant)),
                  SingularTensor);
}

TEST_CASE("det_rel is invariant under change of basis") {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 50; ++trial) {
    const Sym2 g(random_spd(rng), Variance::Covariant);
    const Sym2 s(random_mat(rng) + random_mat(rng).transpose(),
                 Variance::Contravariant);
    const double d = det_rel(s, g);
    const Mat3 A = random_mat(rng) + 3.0 * Mat3::Identity();
    // g_ij pulls back with A, s^ij pushes forward with A^{-1}
    const Sym2 g2(A.transpose() * g.m * A, Variance::Covariant);
    const Mat3 Ai = A.inverse();
    const Sym2 s2(Ai * s.m * Ai.transpose(), Variance::Contravariant);
    CHECK(det_rel(s2, g2) == doctest::Approx(d).epsilon(1e-9));
    const Sym2 s_cov = lower_lower(s, g);
    CHECK(det_rel_cov(s_cov, g) == doctest::Approx(d).epsilon(1e-10));
  }
}

TEST_CASE("generalized eigenvalues: diagonal oracle and ascending order") {
  const Sym2 g = Sym2::diag(2, 2, 2, Variance::Covariant);
  const Sym2 s = Sym2::diag(6, 2, 4, Variance::Covariant);
  const Vec3 ev = generalized_eigenvalues(s, g);
  CHECK(ev(0) == doctest::Approx(1.0));
  CHECK(ev(1) == doctest::Approx(2.0));
  CHECK(ev(2) == doctest::Approx(3.0));
  // contravariant input: s^ij against g gives the lowered-index spectrum
  const Sym2 s_up = raise_raise(s, invert_sym2(g));
  const Vec3 ev2 = generalized_eigenvalues(s_up, g);
  for (int i = 0; i < 3; ++i) CHECK(ev2(i) == doctest::Approx(ev(i)));
}

TEST_CASE("raise/lower round trip") {
  std::mt19937_64 rng(13);
  const Sym2 g(random_spd(rng), Variance::Covariant);
  const Sym2 s(random_spd(rng), Variance::Covariant);
  const Sym2 back = lower_lower(raise_raise(s, invert_sym2(g)), g);
  CHECK((back.m - s.m).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("space form curvature: unit-sphere sign fix and contractions") {
  const Sym2 g = Sym2::identity(Variance::Covariant);
  const Riem4 R = Riem4::space_form(1.0, g);
  CHECK(R(0, 1, 0, 1) == doctest::Approx(1.0));  // R_1212 = +1 on the sphere
  CHECK(R.symmetry_residual() < 1e-15);

  std::mt19937_64 rng(17);
  for (double K : {1.0, -1.0, 0.35}) {
    const Sym2 gg(random_spd(rng), Variance::Covariant);
    const Riem4 RR = Riem4::space_form(K, gg);
    const LeviCivita mu(gg);
    // P^ij = -K g^ij and h_ij = K^2 g_ij at constant curvature K
    const Sym2 P = mu_contract_P(RR, mu);
    const Sym2 gi = invert_sym2(gg);
    CHECK((P.m + K * gi.m).cwiseAbs().maxCoeff() < 1e-10);
    const Sym2 h = mu_contract_h(RR, mu);
    CHECK((h.m - K * K * gg.m).cwiseAbs().maxCoeff() < 1e-10);
  }
}

TEST_CASE("mu-contractions are total on flat input") {
  const Sym2 g = Sym2::identity(Variance::Covariant);
  const Riem4 R{};  // flat
  const LeviCivita mu(g);
  CHECK(mu_contract_h(R, mu).max_abs() == 0.0);
  CHECK(mu_contract_P(R, mu).max_abs() == 0.0);
}
