#include "xcf/lie.hpp"

#include <cmath>

namespace xcf {

double LieAlgebraData::jacobi_residual() const {
  const LieAlgebraData& L = *this;
  double r = 0.0;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      for (int k = 0; k < 3; ++k)
        for (int m = 0; m < 3; ++m) {
          double sum = 0.0;
          for (int l = 0; l < 3; ++l)
            sum += L(m, i, l) * L(l, j, k) + L(m, j, l) * L(l, k, i) +
                   L(m, k, l) * L(l, i, j);
          r = std::max(r, std::fabs(sum));
        }
  return r;
}

bool LieAlgebraData::unimodular(double tol) const {
  for (int i = 0; i < 3; ++i) {
    double tr = 0.0;
    for (int j = 0; j < 3; ++j) tr += (*this)(j, i, j);
    if (std::fabs(tr) > tol) return false;
  }
  return true;
}

bool validate_jacobi(const LieAlgebraData& L) {
  double scale = 0.0;
  for (const auto& m : L.C) scale = std::max(scale, m.cwiseAbs().maxCoeff());
  return L.jacobi_residual() <= 1e-14 * (1.0 + scale * scale);
}

Gamma frame_connection(const LieAlgebraData& L, const Sym2& q) {
  if (!q.positive_definite())
    throw NonPositiveMetric("frame_connection: inner product not positive definite");
  const Mat3 qinv = q.m.inverse();
  Gamma G;
  for (int k = 0; k < 3; ++k)
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) {
        double sum = 0.0;
        for (int l = 0; l < 3; ++l)
          for (int m = 0; m < 3; ++m)
            sum += qinv(k, l) * (L(m, i, j) * q(m, l) - L(m, j, l) * q(m, i) +
                                 L(m, l, i) * q(m, j));
        G.at(k, i, j) = 0.5 * sum;
      }
  return G;
}

Riem4 frame_riemann(const LieAlgebraData& L, const Sym2& q) {
  const Gamma G = frame_connection(L, q);
  Riem4 R;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      for (int k = 0; k < 3; ++k)
        for (int l = 0; l < 3; ++l) {
          double sum = 0.0;
          for (int p = 0; p < 3; ++p) {
            double t = 0.0;
            for (int m = 0; m < 3; ++m)
              t += G(m, j, l) * G(p, i, m) - G(m, i, l) * G(p, j, m) -
                   L(m, i, j) * G(p, m, l);
            sum += q(k, p) * t;
          }
          R.at(i, j, k, l) = sum;
        }
  return R;
}

CurvatureBundle curvature_homogeneous(const LieAlgebraData& L, const Sym2& q) {
  if (!validate_jacobi(L))
    throw JacobiViolation("curvature_homogeneous: structure constants fail Jacobi");
  return assemble_bundle(q, frame_riemann(L, q));
}

FrameTensor<2> frame_from_sym2(const Sym2& s) {
  FrameTensor<2> T;
  T.var = {s.var, s.var};
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) T.set({i, j}, s(i, j));
  return T;
}

Sym2 sym2_from_frame(const FrameTensor<2>& T, Variance var) {
  Mat3 m;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) m(i, j) = T.get({i, j});
  return Sym2(m, var);
}

}  // namespace xcf
