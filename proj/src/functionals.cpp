#include "xcf/functionals.hpp"

#include <cmath>
#include <limits>

namespace xcf {

TDecomposition compute_T(const Sym2& P_up, const Rank3& nablaP, const Sym2& V) {
  TDecomposition td;
  td.T.var = {Variance::Contravariant, Variance::Contravariant,
              Variance::Contravariant};
  td.E.var = td.T.var;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      for (int k = 0; k < 3; ++k) {
        double sum = 0.0;
        for (int l = 0; l < 3; ++l) sum += P_up(i, l) * nablaP[l](j, k);
        td.T.set({i, j, k}, sum);
      }
  for (int i = 0; i < 3; ++i) {
    double sum = 0.0;
    for (int j = 0; j < 3; ++j)
      for (int k = 0; k < 3; ++k) sum += V(j, k) * td.T.get({i, j, k});
    td.Ttr(i) = sum;
  }
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      for (int k = 0; k < 3; ++k) {
        const double e = td.T.get({i, j, k}) +
                         0.1 * (P_up(i, j) * td.Ttr(k) + P_up(i, k) * td.Ttr(j)) -
                         0.4 * P_up(j, k) * td.Ttr(i);
        td.E.set({i, j, k}, e);
      }
  return td;
}

double vnorm_sq(const FrameTensor<3>& X, const Sym2& V) {
  double sum = 0.0;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      for (int k = 0; k < 3; ++k) {
        const double x = X.get({i, j, k});
        if (x == 0.0) continue;
        for (int a = 0; a < 3; ++a)
          for (int b = 0; b < 3; ++b)
            for (int c = 0; c < 3; ++c)
              sum += x * V(i, a) * V(j, b) * V(k, c) * X.get({a, b, c});
      }
  return sum;
}

double vnorm_sq(const Vec3& X, const Sym2& V) { return X.dot(V.m * X); }

double antisym_norm_sq(const FrameTensor<3>& X, const Sym2& V) {
  FrameTensor<3> A;
  A.var = X.var;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      for (int k = 0; k < 3; ++k)
        A.set({i, j, k}, X.get({i, j, k}) - X.get({j, i, k}));
  return vnorm_sq(A, V);
}

double pow_detP(double detP, double eta) {
  const double rounded = std::round(eta);
  if (std::fabs(eta - rounded) < 1e-12) {
    return std::pow(detP, rounded);
  }
  if (!(detP > 0.0))
    throw DomainError("pow_detP: non-integer power of a nonpositive det P");
  return std::pow(detP, eta);
}

double eta_rhs_density(const TDecomposition& td, const Sym2& V, double detP,
                       double H, double eta) {
  const double p = pow_detP(detP, eta);
  const double quad =
      0.5 * antisym_norm_sq(td.T, V) - eta * vnorm_sq(td.Ttr, V);
  return eta * quad * p + (1.0 - 2.0 * eta) * p * H;
}

double J_density(const CurvatureBundle& B) {
  const double Ptrace = (B.g.m * B.P_up.m).trace();
  if (!(B.detP > 0.0))
    throw DomainError("J_density: det P must be positive");
  return Ptrace / 3.0 - std::cbrt(B.detP);
}

double J_rhs_density(const TDecomposition& td, const CurvatureBundle& B) {
  if (!(B.detP > 0.0))
    throw DomainError("J_rhs_density: det P must be positive");
  if (!B.V) throw SingularTensor("J_rhs_density: V unavailable");
  const double cbrtP = std::cbrt(B.detP);
  const double deth = det_rel_cov(B.h, B.g);
  if (!(deth > 0.0))
    throw DomainError("J_rhs_density: det h must be positive");
  const double quad =
      antisym_norm_sq(td.E, *B.V) + vnorm_sq(td.Ttr, *B.V) / 3.0;
  return -quad * cbrtP / 6.0 - (B.H / 3.0 - std::cbrt(deth)) * cbrtP;
}

double dPintegral_rhs_density(const CurvatureBundle& B) { return 3.0 * B.detP; }

double logdetP_rhs(double box_logdetP, const TDecomposition& td, const Sym2& V,
                   double H) {
  return box_logdetP + 0.5 * antisym_norm_sq(td.T, V) - 2.0 * H;
}

Rank3 frame_nabla_P(const LieAlgebraData& L, const Sym2& q,
                    const CurvatureBundle& B) {
  const Gamma G = frame_connection(L, q);
  const FrameTensor<3> dP =
      frame_covariant_derivative(frame_from_sym2(B.P_up), G);
  Rank3 out;
  for (int l = 0; l < 3; ++l)
    for (int j = 0; j < 3; ++j)
      for (int k = 0; k < 3; ++k) out[l](j, k) = dP.get({l, j, k});
  return out;
}

namespace {

const double kNaN = std::numeric_limits<double>::quiet_NaN();

}  // namespace

FunctionalSample functionals_homogeneous(const LieAlgebraData& L, const Sym2& q,
                                         double t,
                                         const std::vector<double>& etas) {
  const CurvatureBundle B = curvature_homogeneous(L, q);
  const double vol = std::sqrt(q.det());
  FunctionalSample s;
  s.t = t;
  s.volume = vol;
  s.P_integral = (B.g.m * B.P_up.m).trace() * vol;
  s.detP_integral = B.detP * vol;
  for (double eta : etas) {
    double val = kNaN;
    try {
      val = pow_detP(B.detP, eta) * vol;
    } catch (const DomainError&) {
    }
    s.eta_values.emplace_back(eta, val);
  }
  try {
    s.J = J_density(B) * vol;
  } catch (const DomainError&) {
    s.J = kNaN;
  }
  try {
    s.volP = pow_detP(B.detP, 0.5) * vol;
  } catch (const DomainError&) {
    s.volP = kNaN;
  }
  s.mask_fraction = 0.0;
  return s;
}

FunctionalSample functionals_grid(const MetricGrid& m,
                                  const std::vector<CurvatureBundle>& bundles,
                                  double t, const std::vector<double>& etas) {
  FunctionalSample s;
  s.t = t;
  const double w = std::pow(m.spec.dx(), 3);
  const std::int64_t n = m.spec.nodes();

  std::vector<bool> mask(n);
  std::int64_t masked = 0;
  for (std::int64_t node = 0; node < n; ++node) {
    const CurvatureBundle& B = bundles[node];
    const bool safe = std::fabs(B.P_up.det()) > 10.0 * det_tolerance(B.P_up);
    mask[node] = safe;
    if (!safe) ++masked;
  }
  s.mask_fraction = static_cast<double>(masked) / static_cast<double>(n);

  double vol = 0.0, pint = 0.0, dint = 0.0;
  for (std::int64_t node = 0; node < n; ++node) {
    const CurvatureBundle& B = bundles[node];
    const double dmu = std::sqrt(B.g.det()) * w;
    vol += dmu;
    pint += (B.g.m * B.P_up.m).trace() * dmu;
    dint += B.detP * dmu;
  }
  s.volume = vol;
  s.P_integral = pint;
  s.detP_integral = dint;

  for (double eta : etas) {
    double val = 0.0;
    bool ok = true;
    const bool integer_eta = std::fabs(eta - std::round(eta)) < 1e-12;
    for (std::int64_t node = 0; node < n && ok; ++node) {
      const CurvatureBundle& B = bundles[node];
      if (!integer_eta && !mask[node]) continue;
      try {
        val += pow_detP(B.detP, eta) * std::sqrt(B.g.det()) * w;
      } catch (const DomainError&) {
        ok = false;
      }
    }
    s.eta_values.emplace_back(eta, ok ? val : kNaN);
  }

  double J = 0.0, volP = 0.0;
  bool okJ = true, okV = true;
  for (std::int64_t node = 0; node < n; ++node) {
    if (!mask[node]) continue;
    const CurvatureBundle& B = bundles[node];
    const double dmu = std::sqrt(B.g.det()) * w;
    try {
      if (okJ) J += J_density(B) * dmu;
    } catch (const DomainError&) {
      okJ = false;
    }
    try {
      if (okV) volP += pow_detP(B.detP, 0.5) * dmu;
    } catch (const DomainError&) {
      okV = false;
    }
  }
  s.J = okJ ? J : kNaN;
  s.volP = okV ? volP : kNaN;
  return s;
}

TensorGrid grid_nabla_P(const MetricGrid& m,
                        const std::vector<CurvatureBundle>& bundles,
                        const TensorGrid& gammas) {
  TensorGrid P(m.spec, {Variance::Contravariant, Variance::Contravariant});
  parallel_for(m.spec.nodes(), [&](std::int64_t lo, std::int64_t hi) {
    for (std::int64_t node = lo; node < hi; ++node)
      for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j)
          P.at(node, i * 3 + j) = bundles[node].P_up(i, j);
  });
  return covariant_derivative(P, gammas);
}

}  // namespace xcf
