#pragma once

#include <array>
#include <optional>

#include "xcf/tensor.hpp"

namespace xcf {

/// 2-jet of a metric at a point. dg[k](i,j) = d_k g_ij,
/// ddg[k][l](i,j) = d_k d_l g_ij (symmetric in k,l).
struct MetricJet2 {
  Sym2 g;
  std::array<Mat3, 3> dg;
  std::array<std::array<Mat3, 3>, 3> ddg;

  MetricJet2() {  // Eigen members are not zeroed by value-initialization
    for (auto& m : dg) m.setZero();
    for (auto& row : ddg)
      for (auto& m : row) m.setZero();
  }
};

/// Connection coefficients Gamma^k_ij, symmetric in i,j.
struct Gamma {
  std::array<Mat3, 3> c;  // c[k](i,j) = Gamma^k_ij

  Gamma() {
    for (auto& m : c) m.setZero();
  }
  double operator()(int k, int i, int j) const { return c[k](i, j); }
  double& at(int k, int i, int j) { return c[k](i, j); }
  double max_abs() const {
    double m = 0.0;
    for (const auto& a : c) m = std::max(m, a.cwiseAbs().maxCoeff());
    return m;
  }
};

/// First derivatives of the connection: d[l][k](i,j) = d_l Gamma^k_ij.
struct GammaJet {
  std::array<std::array<Mat3, 3>, 3> d;

  GammaJet() {
    for (auto& row : d)
      for (auto& m : row) m.setZero();
  }
  double operator()(int l, int k, int i, int j) const { return d[l][k](i, j); }
  double& at(int l, int k, int i, int j) { return d[l][k](i, j); }
};

/// Every pointwise curvature quantity used by the flow and the verifier.
struct CurvatureBundle {
  Sym2 g;                    // the metric the bundle was computed from
  Sym2 g_inv;                // g^ij
  Riem4 Riem;                // R_ijkl, sign fixed by R_1212 = +1 on the unit sphere
  Sym2 Ric;                  // R_ij (covariant)
  double Rscal = 0.0;        // scalar curvature
  Sym2 P_up;                 // Einstein tensor P^ij = R^ij - R/2 g^ij
  std::optional<Sym2> V;     // V_ij = (P^ij)^-1, only when det P is safely nonzero
  Sym2 h;                    // cross curvature tensor, via the mu-contraction
  double H = 0.0;            // g^ij h_ij
  double detP = 0.0;         // det P^ij * det g_ij (relative determinant)
  Vec3 sec;                  // eigenvalues (a,b,c) of P w.r.t. g, ascending
};

/// Levi-Civita connection from a metric 2-jet:
/// Gamma^k_ij = 1/2 g^kl (d_i g_jl + d_j g_il - d_l g_ij).
Gamma christoffels_from_jet(const MetricJet2& J);

/// Curvature from the connection and its derivatives:
/// R_ijkl = g_km (d_i Gamma^m_jl - d_j Gamma^m_il
///               + Gamma^m_ip Gamma^p_jl - Gamma^m_jp Gamma^p_il).
Riem4 riemann_from_gamma(const Sym2& g, const Gamma& G, const GammaJet& dG);

/// Assemble the full bundle from a metric and its Riemann tensor.
/// h always comes from the polynomial mu-contraction; V is populated only
/// when |det P| clears the scale-aware tolerance.
CurvatureBundle assemble_bundle(const Sym2& g, const Riem4& Riem);

/// Bundle from a coordinate 2-jet. dGamma is an explicit input so that the
/// grid backend can differentiate the Gamma field at the stencil order.
CurvatureBundle curvature_from_jet(const MetricJet2& J, const GammaJet& dGamma);

// --- Sym2 <-> R^6 in an orthonormal basis of symmetric tensors ------------
// Component order (11, 22, 33, 23, 13, 12); off-diagonal slots carry sqrt(2)
// so the Euclidean inner product on R^6 matches the Frobenius one on Sym2.
Eigen::Matrix<double, 6, 1> sym2_to_vec6(const Mat3& s);
Mat3 vec6_to_sym2(const Eigen::Matrix<double, 6, 1>& v);

/// 6x6 matrix of the linearization symbol
///   sigma(zeta) s_ij = -P^ml (z_i z_m s_lj + z_l z_j s_im
///                             - z_i z_j s_lm - z_l z_m s_ij),
/// symmetrized over (i,j) and expressed in the orthonormal Sym2 basis.
/// The map is not self-adjoint in the Frobenius product, but its spectrum
/// is real, nonnegative for positive definite P, and contains the gauge
/// kernel zeta (.) w for every zeta != 0.
Eigen::Matrix<double, 6, 6> symbol_matrix(const Sym2& P_up, const Covec3& zeta);

/// Real eigenvalues of the symbol map, ascending. Throws if the spectrum
/// picks up a non-real pair (never observed for symmetric P).
Eigen::Matrix<double, 6, 1> symbol_eigenvalues(const Sym2& P_up,
                                               const Covec3& zeta);

using Rank3 = std::array<Mat3, 3>;  // first slot is the leading index

/// L(T)_k = h^ij nabla_i T_jk - 1/2 h^ij nabla_k T_ij,
/// with nablaT[i](j,k) = nabla_i T_jk. Throws SingularTensor when h is not
/// invertible.
Covec3 integrability_L(const Sym2& h, const Rank3& nablaT);

/// Tension field of the identity map (M, domain) -> (M, target):
/// tau^k = domain^ij (Gamma_target^k_ij - Gamma_domain^k_ij).
Vec3 tension_of_identity(const Sym2& domain_g, const Gamma& domain_gamma,
                         const Gamma& target_gamma);

}  // namespace xcf
