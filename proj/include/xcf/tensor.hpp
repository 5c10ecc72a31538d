#pragma once

#include <Eigen/Dense>
#include <array>

#include "xcf/errors.hpp"

namespace xcf {

using Mat3 = Eigen::Matrix3d;
using Vec3 = Eigen::Vector3d;    // vectors (upper index)
using Covec3 = Eigen::Vector3d;  // covectors (lower index)

enum class Variance { Covariant, Contravariant };

/// Symmetric rank-2 tensor on a 3-dimensional tangent space.
/// The variance flag records whether the components are g_ij-like
/// (covariant) or g^ij-like (contravariant).
struct Sym2 {
  Mat3 m = Mat3::Zero();
  Variance var = Variance::Covariant;

  Sym2() = default;
  Sym2(const Mat3& a, Variance v) : m(0.5 * (a + a.transpose())), var(v) {}

  static Sym2 identity(Variance v) { return Sym2(Mat3::Identity(), v); }
  static Sym2 diag(double a, double b, double c, Variance v) {
    return Sym2(Vec3(a, b, c).asDiagonal(), v);
  }

  double operator()(int i, int j) const { return m(i, j); }
  double& at(int i, int j) { return m(i, j); }

  double det() const { return m.determinant(); }
  double max_abs() const { return m.cwiseAbs().maxCoeff(); }

  bool positive_definite() const {
    Eigen::LLT<Mat3> llt(m);
    return llt.info() == Eigen::Success && m(0, 0) > 0.0;
  }
};

/// Rank-4 covariant curvature-type tensor R_ijkl, stored as a full 3^4 array.
struct Riem4 {
  std::array<double, 81> v{};

  double operator()(int i, int j, int k, int l) const {
    return v[((i * 3 + j) * 3 + k) * 3 + l];
  }
  double& at(int i, int j, int k, int l) {
    return v[((i * 3 + j) * 3 + k) * 3 + l];
  }

  double max_abs() const;

  /// Max violation of antisymmetry, pair symmetry and first Bianchi.
  double symmetry_residual() const;

  /// R_ijkl = K (g_ik g_jl - g_il g_jk); round unit sphere: R_1212 = +1.
  static Riem4 space_form(double K, const Sym2& g);
};

/// Alternating symbol weighted by the metric volume density:
/// mu_ijk = sqrt(det g) eps_ijk, mu^ijk = eps_ijk / sqrt(det g).
struct LeviCivita {
  double sqrt_det_g = 1.0;

  explicit LeviCivita(const Sym2& g_cov);

  double lo(int i, int j, int k) const { return sqrt_det_g * eps(i, j, k); }
  double up(int i, int j, int k) const { return eps(i, j, k) / sqrt_det_g; }

  static double eps(int i, int j, int k) {
    return static_cast<double>((j - i) * (k - i) * (k - j)) / 2.0;
  }
};

/// Scale-aware singularity tolerance: 1e-12 * (max |component|)^3.
double det_tolerance(const Sym2& s);

/// Inverse of a symmetric 2-tensor; variance flips. Throws SingularTensor
/// when |det| is below the scale-aware tolerance.
Sym2 invert_sym2(const Sym2& s);

/// Basis-invariant relative determinant det(s^ij) * det(g_ij) of a
/// contravariant s against the metric g.
double det_rel(const Sym2& s_up, const Sym2& g_cov);

/// Relative determinant det(s_ij) / det(g_ij) of a covariant tensor.
double det_rel_cov(const Sym2& s_cov, const Sym2& g_cov);

/// Eigenvalues of s with respect to the metric g, ascending. For covariant s
/// these solve s x = lambda g x; for contravariant s the mixed tensor s.g is
/// diagonalized, which is the same multiset as for s with indices lowered.
Vec3 generalized_eigenvalues(const Sym2& s, const Sym2& g_cov);

/// Cross curvature tensor by the polynomial contraction
///   h_ij = (1/8) R_ilpq mu^pqk R_kjrs mu^rsl.
/// Total on all inputs, including flat and det P = 0 points.
Sym2 mu_contract_h(const Riem4& R, const LeviCivita& mu);

/// Einstein tensor by the volume-form contraction
///   P^mn = -(1/4) mu^ijm mu^kln R_ijkl.
Sym2 mu_contract_P(const Riem4& R, const LeviCivita& mu);

/// Raise both indices of a covariant tensor with g^ij (or lower with g_ij).
Sym2 raise_raise(const Sym2& s_cov, const Sym2& g_inv_up);
Sym2 lower_lower(const Sym2& s_up, const Sym2& g_cov);

}  // namespace xcf
