#pragma once

#include <vector>

#include "xcf/grid.hpp"
#include "xcf/lie.hpp"

namespace xcf {

/// Irreducible decomposition of T^ijk = P^il nabla_l P^jk:
///   T^ijk = E^ijk - 1/10 (P^ij T^k + P^ik T^j) + 2/5 P^jk T^i,
/// with all three V-traces of E vanishing.
struct TDecomposition {
  FrameTensor<3> T;   // T^ijk, all contravariant
  Vec3 Ttr;           // T^i = V_jk T^ijk = P^ij nabla_j log det P
  FrameTensor<3> E;
};

/// nablaP[l](j,k) = nabla_l P^jk.
TDecomposition compute_T(const Sym2& P_up, const Rank3& nablaP, const Sym2& V);

/// Full contraction of X (x) X against V on every index; may be negative
/// when V is indefinite.
double vnorm_sq(const FrameTensor<3>& X, const Sym2& V);
double vnorm_sq(const Vec3& X, const Sym2& V);

/// |T^ijk - T^jik|^2 with respect to V.
double antisym_norm_sq(const FrameTensor<3>& X, const Sym2& V);

/// (det P)^eta; integer eta is total, non-integer eta requires det P > 0.
double pow_detP(double detP, double eta);

/// Integrand of the eta-monotonicity lemma:
///   eta (1/2 |T-T^t|^2 - eta |T^i|^2) (det P)^eta + (1-2 eta)(det P)^eta H.
double eta_rhs_density(const TDecomposition& td, const Sym2& V, double detP,
                       double H, double eta);

/// P/3 - (det P)^(1/3) with P = g_ij P^ij; the AM-GM pinching density.
double J_density(const CurvatureBundle& B);

/// dJ/dt integrand:
///  -1/6 (|E-E^t|^2 + 1/3 |T^i|^2)(det P)^(1/3)
///  - (H/3 - (det h)^(1/3))(det P)^(1/3);  <= 0 whenever P > 0.
double J_rhs_density(const TDecomposition& td, const CurvatureBundle& B);

/// d/dt of the P-integral density: 3 det P.
double dPintegral_rhs_density(const CurvatureBundle& B);

/// RHS of the log det P evolution: box log det P + 1/2 |T-T^t|^2 - 2H.
/// The box term is backend-supplied (identically 0 on homogeneous states).
double logdetP_rhs(double box_logdetP, const TDecomposition& td, const Sym2& V,
                   double H);

/// One row of functional diagnostics.
struct FunctionalSample {
  double t = 0.0;
  std::vector<std::pair<double, double>> eta_values;  // (eta, integral)
  double volume = 0.0;
  double P_integral = 0.0;
  double detP_integral = 0.0;
  double J = 0.0;     // NaN outside the det P > 0 regime
  double volP = 0.0;  // integral of (det P)^(1/2); NaN outside det P > 0
  double mask_fraction = 0.0;
};

/// Exact frame gradient nabla_l P^jk of a left-invariant Einstein tensor.
Rank3 frame_nabla_P(const LieAlgebraData& L, const Sym2& q,
                    const CurvatureBundle& B);

/// Homogeneous "integrals": densities times reference volume 1, i.e. value
/// times sqrt(det q).
FunctionalSample functionals_homogeneous(const LieAlgebraData& L, const Sym2& q,
                                         double t,
                                         const std::vector<double>& etas);

/// Grid functionals with det P-safe masking: nodes with |det P| <= 10 tau are
/// excluded from V-dependent and fractional-power integrands and counted in
/// mask_fraction. Non-integer powers over a negative unmasked det P raise
/// DomainError (reported as NaN in the sample).
FunctionalSample functionals_grid(const MetricGrid& m,
                                  const std::vector<CurvatureBundle>& bundles,
                                  double t, const std::vector<double>& etas);

/// nabla_l P^jk as a grid field (rank 3: cov, contra, contra).
TensorGrid grid_nabla_P(const MetricGrid& m,
                        const std::vector<CurvatureBundle>& bundles,
                        const TensorGrid& gammas);

}  // namespace xcf
