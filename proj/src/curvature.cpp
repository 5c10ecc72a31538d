#include "xcf/curvature.hpp"

#include <cmath>

namespace xcf {

Gamma christoffels_from_jet(const MetricJet2& J) {
  if (!J.g.positive_definite())
    throw NonPositiveMetric("christoffels_from_jet: metric not positive definite");
  const Mat3 ginv = J.g.m.inverse();
  Gamma G;
  for (int k = 0; k < 3; ++k)
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) {
        double sum = 0.0;
        for (int l = 0; l < 3; ++l)
          sum += ginv(k, l) *
                 (J.dg[i](j, l) + J.dg[j](i, l) - J.dg[l](i, j));
        G.at(k, i, j) = 0.5 * sum;
      }
  return G;
}

Riem4 riemann_from_gamma(const Sym2& g, const Gamma& G, const GammaJet& dG) {
  Riem4 R;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      for (int k = 0; k < 3; ++k)
        for (int l = 0; l < 3; ++l) {
          double sum = 0.0;
          for (int m = 0; m < 3; ++m) {
            double t = dG(i, m, j, l) - dG(j, m, i, l);
            for (int p = 0; p < 3; ++p)
              t += G(m, i, p) * G(p, j, l) - G(m, j, p) * G(p, i, l);
            sum += g(k, m) * t;
          }
          R.at(i, j, k, l) = sum;
        }
  // Project onto the algebraic curvature symmetry class. Discretized
  // connection derivatives break the pair symmetry R_ijkl = R_klij at
  // truncation level, which would leak into the pointwise algebraic
  // identities relating P, h, and detP. In three dimensions the first
  // Bianchi identity is implied by the antisymmetries plus pair symmetry,
  // so this projection restores a genuine curvature tensor.
  Riem4 A;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      for (int k = 0; k < 3; ++k)
        for (int l = 0; l < 3; ++l)
          A.at(i, j, k, l) = 0.25 * (R(i, j, k, l) - R(j, i, k, l) -
                                     R(i, j, l, k) + R(j, i, l, k));
  Riem4 S;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      for (int k = 0; k < 3; ++k)
        for (int l = 0; l < 3; ++l)
          S.at(i, j, k, l) = 0.5 * (A(i, j, k, l) + A(k, l, i, j));
  return S;
}

CurvatureBundle assemble_bundle(const Sym2& g, const Riem4& Riem) {
  if (!g.positive_definite())
    throw NonPositiveMetric("assemble_bundle: metric not positive definite");
  CurvatureBundle B;
  B.g = g;
  B.g_inv = Sym2(g.m.inverse(), Variance::Contravariant);
  B.Riem = Riem;

  Mat3 ric = Mat3::Zero();
  for (int j = 0; j < 3; ++j)
    for (int l = 0; l < 3; ++l) {
      double sum = 0.0;
      for (int i = 0; i < 3; ++i)
        for (int k = 0; k < 3; ++k) sum += B.g_inv(i, k) * Riem(i, j, k, l);
      ric(j, l) = sum;
    }
  B.Ric = Sym2(ric, Variance::Covariant);
  B.Rscal = (B.g_inv.m * B.Ric.m).trace();

  const Mat3 ric_up = B.g_inv.m * B.Ric.m * B.g_inv.m;
  B.P_up = Sym2(ric_up - 0.5 * B.Rscal * B.g_inv.m, Variance::Contravariant);

  const LeviCivita mu(g);
  B.h = mu_contract_h(Riem, mu);
  B.H = (B.g_inv.m * B.h.m).trace();
  B.detP = det_rel(B.P_up, g);

  if (std::fabs(B.P_up.det()) > det_tolerance(B.P_up))
    B.V = invert_sym2(B.P_up);

  B.sec = generalized_eigenvalues(B.P_up, g);
  return B;
}

CurvatureBundle curvature_from_jet(const MetricJet2& J, const GammaJet& dGamma) {
  const Gamma G = christoffels_from_jet(J);
  const Riem4 R = riemann_from_gamma(J.g, G, dGamma);
  return assemble_bundle(J.g, R);
}

namespace {
constexpr int kIdx[6][2] = {{0, 0}, {1, 1}, {2, 2}, {1, 2}, {0, 2}, {0, 1}};
const double kSqrt2 = std::sqrt(2.0);
}  // namespace

Eigen::Matrix<double, 6, 1> sym2_to_vec6(const Mat3& s) {
  Eigen::Matrix<double, 6, 1> v;
  for (int a = 0; a < 6; ++a) {
    const double w = (a < 3) ? 1.0 : kSqrt2;
    v(a) = w * s(kIdx[a][0], kIdx[a][1]);
  }
  return v;
}

Mat3 vec6_to_sym2(const Eigen::Matrix<double, 6, 1>& v) {
  Mat3 s = Mat3::Zero();
  for (int a = 0; a < 6; ++a) {
    const double w = (a < 3) ? 1.0 : 1.0 / kSqrt2;
    s(kIdx[a][0], kIdx[a][1]) = w * v(a);
    s(kIdx[a][1], kIdx[a][0]) = w * v(a);
  }
  return s;
}

Eigen::Matrix<double, 6, 6> symbol_matrix(const Sym2& P_up, const Covec3& zeta) {
  const Mat3& P = P_up.m;
  const Covec3& z = zeta;
  Eigen::Matrix<double, 6, 6> M;
  for (int a = 0; a < 6; ++a) {
    const Mat3 s = vec6_to_sym2(Eigen::Matrix<double, 6, 1>::Unit(a));
    Mat3 out = Mat3::Zero();
    const Vec3 Pz = P * z;                 // (Pz)^l = P^ml z_m
    const Vec3 sPz = s * Pz;               // s_lj P^ml z_m summed over l
    const double trPs = (P * s).trace();   // P^ml s_lm
    const double zPz = z.dot(Pz);          // P^ml z_l z_m
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j)
        out(i, j) = -(z(i) * sPz(j) + z(j) * sPz(i) - z(i) * z(j) * trPs -
                      zPz * s(i, j));
    out = 0.5 * (out + out.transpose());
    M.col(a) = sym2_to_vec6(out);
  }
  return M;
}

Eigen::Matrix<double, 6, 1> symbol_eigenvalues(const Sym2& P_up,
                                               const Covec3& zeta) {
  const Eigen::Matrix<double, 6, 6> M = symbol_matrix(P_up, zeta);
  Eigen::EigenSolver<Eigen::Matrix<double, 6, 6>> es(M);
  const auto ev = es.eigenvalues();
  const double scale = 1.0 + M.cwiseAbs().maxCoeff();
  Eigen::Matrix<double, 6, 1> out;
  for (int i = 0; i < 6; ++i) {
    if (std::fabs(ev(i).imag()) > 1e-9 * scale)
      throw Error("symbol_eigenvalues: unexpected complex eigenvalue");
    out(i) = ev(i).real();
  }
  std::sort(out.data(), out.data() + 6);
  return out;
}

Covec3 integrability_L(const Sym2& h, const Rank3& nablaT) {
  const Sym2 h_inv = invert_sym2(h);  // throws SingularTensor
  Covec3 out = Covec3::Zero();
  for (int k = 0; k < 3; ++k) {
    double sum = 0.0;
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j)
        sum += h_inv(i, j) * (nablaT[i](j, k) - 0.5 * nablaT[k](i, j));
    out(k) = sum;
  }
  return out;
}

Vec3 tension_of_identity(const Sym2& domain_g, const Gamma& domain_gamma,
                         const Gamma& target_gamma) {
  if (!domain_g.positive_definite())
    throw NonPositiveMetric("tension_of_identity: domain metric not positive definite");
  const Mat3 dinv = domain_g.m.inverse();
  Vec3 tau = Vec3::Zero();
  for (int k = 0; k < 3; ++k) {
    double sum = 0.0;
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j)
        sum += dinv(i, j) * (target_gamma(k, i, j) - domain_gamma(k, i, j));
    tau(k) = sum;
  }
  return tau;
}

}  // namespace xcf
