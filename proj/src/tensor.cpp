#include "xcf/tensor.hpp"

#include <cmath>

namespace xcf {

double Riem4::max_abs() const {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::fabs(x));
  return m;
}

double Riem4::symmetry_residual() const {
  const Riem4& R = *this;
  double r = 0.0;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      for (int k = 0; k < 3; ++k)
        for (int l = 0; l < 3; ++l) {
          r = std::max(r, std::fabs(R(i, j, k, l) + R(j, i, k, l)));
          r = std::max(r, std::fabs(R(i, j, k, l) + R(i, j, l, k)));
          r = std::max(r, std::fabs(R(i, j, k, l) - R(k, l, i, j)));
          r = std::max(r, std::fabs(R(i, j, k, l) + R(i, k, l, j) + R(i, l, j, k)));
        }
  return r;
}

Riem4 Riem4::space_form(double K, const Sym2& g) {
  Riem4 R;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      for (int k = 0; k < 3; ++k)
        for (int l = 0; l < 3; ++l)
          R.at(i, j, k, l) = K * (g(i, k) * g(j, l) - g(i, l) * g(j, k));
  return R;
}

LeviCivita::LeviCivita(const Sym2& g_cov) {
  const double d = g_cov.det();
  if (!(d > 0.0) || !g_cov.positive_definite())
    throw NonPositiveMetric("LeviCivita: metric is not positive definite");
  sqrt_det_g = std::sqrt(d);
}

double det_tolerance(const Sym2& s) {
  const double scale = s.max_abs();
  return 1e-12 * scale * scale * scale;
}

Sym2 invert_sym2(const Sym2& s) {
  const double d = s.det();
  if (std::fabs(d) <= det_tolerance(s))
    throw SingularTensor("invert_sym2: |det| below tolerance");
  Sym2 out(s.m.inverse(), s.var == Variance::Covariant ? Variance::Contravariant
                                                       : Variance::Covariant);
  return out;
}

double det_rel(const Sym2& s_up, const Sym2& g_cov) {
  if (!g_cov.positive_definite())
    throw NonPositiveMetric("det_rel: metric is not positive definite");
  return s_up.det() * g_cov.det();
}

double det_rel_cov(const Sym2& s_cov, const Sym2& g_cov) {
  if (!g_cov.positive_definite())
    throw NonPositiveMetric("det_rel_cov: metric is not positive definite");
  return s_cov.det() / g_cov.det();
}

Vec3 generalized_eigenvalues(const Sym2& s, const Sym2& g_cov) {
  if (!g_cov.positive_definite())
    throw NonPositiveMetric("generalized_eigenvalues: metric not positive definite");
  Mat3 a = s.m;
  if (s.var == Variance::Contravariant) {
    // Lower both indices first; eigenvalues w.r.t. g are those of g^-1 (g s g).
    a = g_cov.m * s.m * g_cov.m;
  }
  Eigen::GeneralizedSelfAdjointEigenSolver<Mat3> es(a, g_cov.m,
                                                    Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success)
    throw Error("generalized_eigenvalues: eigensolver failed");
  return es.eigenvalues();
}

Sym2 mu_contract_h(const Riem4& R, const LeviCivita& mu) {
  Mat3 h = Mat3::Zero();
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) {
      double sum = 0.0;
      for (int l = 0; l < 3; ++l)
        for (int p = 0; p < 3; ++p)
          for (int q = 0; q < 3; ++q) {
            if (p == q) continue;
            for (int k = 0; k < 3; ++k)
              for (int r = 0; r < 3; ++r)
                for (int s = 0; s < 3; ++s) {
                  if (r == s) continue;
                  sum += R(i, l, p, q) * mu.up(p, q, k) * R(k, j, r, s) *
                         mu.up(r, s, l);
                }
          }
      h(i, j) = 0.125 * sum;
    }
  return Sym2(h, Variance::Covariant);
}

Sym2 mu_contract_P(const Riem4& R, const LeviCivita& mu) {
  Mat3 P = Mat3::Zero();
  for (int m = 0; m < 3; ++m)
    for (int n = 0; n < 3; ++n) {
      double sum = 0.0;
      for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) {
          if (i == j) continue;
          for (int k = 0; k < 3; ++k)
            for (int l = 0; l < 3; ++l) {
              if (k == l) continue;
              sum += mu.up(i, j, m) * mu.up(k, l, n) * R(i, j, k, l);
            }
        }
      P(m, n) = -0.25 * sum;
    }
  return Sym2(P, Variance::Contravariant);
}

Sym2 raise_raise(const Sym2& s_cov, const Sym2& g_inv_up) {
  return Sym2(g_inv_up.m * s_cov.m * g_inv_up.m, Variance::Contravariant);
}

Sym2 lower_lower(const Sym2& s_up, const Sym2& g_cov) {
  return Sym2(g_cov.m * s_up.m * g_cov.m, Variance::Covariant);
}

}  // namespace xcf
