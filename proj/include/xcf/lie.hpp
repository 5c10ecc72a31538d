#pragma once

#include <array>

#include "xcf/curvature.hpp"

namespace xcf {

/// Structure constants of a 3-dimensional Lie algebra, [e_i, e_j] = C^k_ij e_k.
struct LieAlgebraData {
  std::array<Mat3, 3> C;  // C[k](i,j), antisymmetric in (i,j)

  LieAlgebraData() {
    for (auto& m : C) m.setZero();
  }

  double operator()(int k, int i, int j) const { return C[k](i, j); }
  double& at(int k, int i, int j) { return C[k](i, j); }

  /// Max violation of the cyclic Jacobi sum over all index combinations.
  double jacobi_residual() const;

  /// Trace of ad: unimodular iff C^j_ij = 0 for every i.
  bool unimodular(double tol = 1e-12) const;
};

/// Validates the Jacobi identity within 1e-14 (relative to the constants'
/// scale).
bool validate_jacobi(const LieAlgebraData& L);

/// A left-invariant metric in flight: the inner product on the algebra and
/// the flow time it belongs to.
struct HomogeneousState {
  Sym2 q = Sym2::identity(Variance::Covariant);
  double t = 0.0;
};

/// Levi-Civita connection of the left-invariant metric q in the frame:
/// Gamma^k_ij = 1/2 q^kl (C^m_ij q_ml - C^m_jl q_mi + C^m_li q_mj).
Gamma frame_connection(const LieAlgebraData& L, const Sym2& q);

/// Frame curvature R_ijkl = q_kp (Gamma^m_jl Gamma^p_im
///   - Gamma^m_il Gamma^p_jm - C^m_ij Gamma^p_ml).
Riem4 frame_riemann(const LieAlgebraData& L, const Sym2& q);

/// Full curvature bundle of a left-invariant metric. Exact (no
/// discretization). Throws JacobiViolation / NonPositiveMetric.
CurvatureBundle curvature_homogeneous(const LieAlgebraData& L, const Sym2& q);

// --- exact frame calculus for left-invariant tensor fields ----------------
// Components of left-invariant tensors are constant in the frame, so the
// covariant derivative is pure Gamma algebra. Tensors are stored dense with
// the derivative index prepended on differentiation.

constexpr int ipow3(int r) { return r == 0 ? 1 : 3 * ipow3(r - 1); }

template <int R>
struct FrameTensor {
  static constexpr int size() { return ipow3(R); }
  std::array<double, ipow3(R)> v{};
  std::array<Variance, R> var{};

  double get(const std::array<int, R>& idx) const { return v[flat(idx)]; }
  void set(const std::array<int, R>& idx, double x) { v[flat(idx)] = x; }

  static int flat(const std::array<int, R>& idx) {
    int f = 0;
    for (int i = 0; i < R; ++i) f = f * 3 + idx[i];
    return f;
  }
  double max_abs() const {
    double m = 0.0;
    for (double x : v) m = std::max(m, std::fabs(x));
    return m;
  }
};

/// nabla T with the derivative index first:
/// (out)[k, a...] = -Gamma^m_{k a_s} T[...m...]  (covariant slot s)
///                  +Gamma^{a_s}_{k m} T[...m...] (contravariant slot s).
template <int R>
FrameTensor<R + 1> frame_covariant_derivative(const FrameTensor<R>& T,
                                              const Gamma& G) {
  FrameTensor<R + 1> out;
  out.var[0] = Variance::Covariant;
  for (int s = 0; s < R; ++s) out.var[s + 1] = T.var[s];
  std::array<int, R + 1> oidx{};
  const int n = FrameTensor<R>::size();
  for (int k = 0; k < 3; ++k) {
    for (int f = 0; f < n; ++f) {
      std::array<int, R> idx{};
      int rem = f;
      for (int s = R - 1; s >= 0; --s) {
        idx[s] = rem % 3;
        rem /= 3;
      }
      double sum = 0.0;
      for (int s = 0; s < R; ++s) {
        const int a = idx[s];
        for (int m = 0; m < 3; ++m) {
          std::array<int, R> jdx = idx;
          jdx[s] = m;
          if (T.var[s] == Variance::Covariant)
            sum -= G(m, k, a) * T.get(jdx);
          else
            sum += G(a, k, m) * T.get(jdx);
        }
      }
      oidx[0] = k;
      for (int s = 0; s < R; ++s) oidx[s + 1] = idx[s];
      out.set(oidx, sum);
    }
  }
  return out;
}

FrameTensor<2> frame_from_sym2(const Sym2& s);
Sym2 sym2_from_frame(const FrameTensor<2>& T, Variance var);

}  // namespace xcf
