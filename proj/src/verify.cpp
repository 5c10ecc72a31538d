#include "xcf/verify.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include "json.hpp"
#include "xcf/grid.hpp"

namespace xcf {

namespace {

using json = nlohmann::json;

// Least-squares slope of log2(err) against halving level (positive = decay).
double fit_slope(const std::vector<double>& errs) {
  const int n = static_cast<int>(errs.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (int i = 0; i < n; ++i) {
    const double y = std::log2(std::max(errs[i], 1e-300));
    sx += i;
    sy += y;
    sxx += double(i) * i;
    sxy += i * y;
  }
  return -(n * sxy - sx * sy) / (n * sxx - sx * sx);
}

Mat3 random_orthogonal(std::mt19937_64& rng) {
  std::normal_distribution<double> nd;
  Mat3 A;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) A(i, j) = nd(rng);
  return Eigen::HouseholderQR<Mat3>(A).householderQ();
}

// Well-conditioned SPD sample: eigenvalues uniform in [lo, hi]. Keeps the
// pointwise algebraic identities free of cancellation noise.
Mat3 random_spd(std::mt19937_64& rng, double lo, double hi) {
  const Mat3 Q = random_orthogonal(rng);
  std::uniform_real_distribution<double> ud(lo, hi);
  const Vec3 d(ud(rng), ud(rng), ud(rng));
  return Q * d.asDiagonal() * Q.transpose();
}

Mat3 random_sym(std::mt19937_64& rng) {
  const Mat3 Q = random_orthogonal(rng);
  std::uniform_real_distribution<double> ud(-2.0, 2.0);
  const Vec3 d(ud(rng), ud(rng), ud(rng));
  return Q * d.asDiagonal() * Q.transpose();
}

/// Bundle with prescribed contravariant Einstein tensor P^ij on the metric g.
/// In three dimensions the Riemann tensor is determined by the Ricci tensor
/// through the Kulkarni-Nomizu product g (x) (Ric - R/4 g).
CurvatureBundle synthetic_bundle(const Sym2& g, const Mat3& P_up) {
  const double R = -2.0 * (g.m * P_up).trace();
  const Mat3 Ric = g.m * P_up * g.m + 0.5 * R * g.m;
  const Mat3 A = Ric - 0.25 * R * g.m;
  Riem4 Rm;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      for (int k = 0; k < 3; ++k)
        for (int l = 0; l < 3; ++l)
          Rm.at(i, j, k, l) = g.m(i, k) * A(j, l) + g.m(j, l) * A(i, k) -
                              g.m(i, l) * A(j, k) - g.m(j, k) * A(i, l);
  return assemble_bundle(g, Rm);
}

/// Random candidate for nabla_l P^{jk}, projected onto the contracted
/// Bianchi constraint sum_l D[l](l,k) = 0; the T-decomposition identities
/// hold only on that constraint surface.
Rank3 random_nabla_P(std::mt19937_64& rng) {
  Rank3 out;
  for (int l = 0; l < 3; ++l) out[l] = random_sym(rng);
  Vec3 v = Vec3::Zero();
  for (int k = 0; k < 3; ++k)
    for (int l = 0; l < 3; ++l) v(k) += out[l](l, k);
  for (int l = 0; l < 3; ++l)
    for (int j = 0; j < 3; ++j)
      for (int k = 0; k < 3; ++k)
        out[l](j, k) -= 0.25 * ((l == j ? v(k) : 0.0) + (l == k ? v(j) : 0.0));
  return out;
}

struct HomCase {
  std::string name;
  LieAlgebraData L;
  Sym2 q = Sym2::identity(Variance::Covariant);
};

std::vector<HomCase> hom_cases() {
  std::vector<HomCase> out;
  for (const char* name :
       {"hyperbolic_solvable(1,1)", "hyperbolic_solvable(1,2)", "nil",
        "su2_round", "sol"}) {
    auto [L, st] = build_preset(PresetId::parse(name));
    out.push_back({name, L, st.q});
  }
  return out;
}

// Shared grid state per resolution.
struct GridLevel {
  MetricGrid m;
  std::vector<MetricJet2> jets;
  TensorGrid gammas;
  std::vector<CurvatureBundle> b0;
  // temporal neighbors for evolution checks (small fixed dt)
  double dt = 0.0;
  std::vector<CurvatureBundle> bp, bm;
};

struct GridData {
  TrigMetric tm;
  std::vector<GridLevel> levels;
};

GridData build_grid_data(const VerifySettings& s, bool need_evolution) {
  GridData gd;
  gd.tm = TrigMetric::random(s.seed, s.eps, 3, 1);
  for (int n : s.grid_ns) {
    GridLevel lv;
    GridSpec spec(n, s.stencil_order);
    lv.m = sample(gd.tm, spec);
    lv.jets = jet_at_nodes(lv.m);
    lv.gammas = gamma_grid(lv.m, lv.jets);
    lv.b0 = bundles_at_nodes(lv.m);
    if (need_evolution) {
      lv.dt = 1e-5;
      lv.bp = bundles_at_nodes(step_rk4_grid(lv.m, lv.dt, +1));
      lv.bm = bundles_at_nodes(step_rk4_grid(lv.m, -lv.dt, +1));
    }
    gd.levels.push_back(std::move(lv));
  }
  return gd;
}

TensorGrid p_field(const GridLevel& lv) {
  TensorGrid P(lv.m.spec, {Variance::Contravariant, Variance::Contravariant});
  for (std::int64_t node = 0; node < lv.m.spec.nodes(); ++node)
    for (int c = 0; c < 9; ++c) P.at(node, c) = lv.b0[node].P_up(c / 3, c % 3);
  return P;
}

TensorGrid h_field(const GridLevel& lv) {
  TensorGrid h(lv.m.spec, {Variance::Covariant, Variance::Covariant});
  for (std::int64_t node = 0; node < lv.m.spec.nodes(); ++node)
    for (int c = 0; c < 9; ++c) h.at(node, c) = lv.b0[node].h(c / 3, c % 3);
  return h;
}

TensorGrid negate(TensorGrid t) {
  for (double& x : t.v) x = -x;
  return t;
}

// Frame divergence nabla_i P^{ij} of a left-invariant contravariant 2-tensor.
Vec3 frame_divergence(const Sym2& P, const Gamma& G) {
  const FrameTensor<3> d = frame_covariant_derivative(frame_from_sym2(P), G);
  Vec3 out = Vec3::Zero();
  for (int j = 0; j < 3; ++j)
    for (int i = 0; i < 3; ++i) out(j) += d.get({i, i, j});
  return out;
}

struct TemporalPair {
  Sym2 qp, qm;
  CurvatureBundle Bp, Bm;
};

TemporalPair temporal_pair(const LieAlgebraData& L, const Sym2& q, double dt) {
  TemporalPair tp{step_rk4_homogeneous(L, q, dt, +1),
                  step_rk4_homogeneous(L, q, -dt, +1),
                  {},
                  {}};
  tp.Bp = curvature_homogeneous(L, tp.qp);
  tp.Bm = curvature_homogeneous(L, tp.qm);
  return tp;
}

// ---------------------------------------------------------------------------

CheckResult check_bianchi(const VerifySettings& s, const GridData& gd,
                          bool mutate) {
  CheckResult r;
  r.id = "bianchi";
  r.backend = "homogeneous+grid";
  r.declared_order = s.stencil_order;
  double worst_hom = 0.0;
  for (const HomCase& hc : hom_cases()) {
    const CurvatureBundle B = curvature_homogeneous(hc.L, hc.q);
    Gamma G = frame_connection(hc.L, hc.q);
    if (mutate)
      for (auto& m : G.c) m = -m;
    const double scale = 1.0 + B.P_up.m.cwiseAbs().maxCoeff() * G.max_abs();
    worst_hom =
        std::max(worst_hom, frame_divergence(B.P_up, G).cwiseAbs().maxCoeff() / scale);
  }
  std::vector<double> errs;
  for (const GridLevel& lv : gd.levels) {
    const TensorGrid gammas = mutate ? negate(lv.gammas) : lv.gammas;
    const TensorGrid div = covariant_divergence(p_field(lv), gammas, 0);
    double e = 0.0;
    for (double x : div.v) e = std::max(e, std::fabs(x));
    errs.push_back(e);
  }
  r.order = fit_slope(errs);
  r.residual = std::max(worst_hom, errs.back());
  r.tolerance = 1e-2;  // finest-grid cap; the slope carries the real content
  r.metadata["hom_residual"] = worst_hom;
  r.metadata["finest_residual"] = errs.back();
  r.pass = worst_hom <= 1e-12 && r.residual <= r.tolerance &&
           *r.order >= *r.declared_order - 0.2;
  r.note = mutate ? "mutated: covariant correction sign (Gamma -> -Gamma)"
                  : "nabla_i P^{ij} = 0; exact in the frame, stencil-order on the grid";
  return r;
}

CheckResult check_dual_bianchi(const VerifySettings& s, const GridData& gd,
                               bool mutate) {
  CheckResult r;
  r.id = "dual_bianchi";
  r.backend = "homogeneous+grid";
  r.declared_order = 2;  // conservative; order-4 stencils fit ~3.8
  const double half = mutate ? -0.5 : 0.5;
  double worst_hom = 0.0;
  for (const HomCase& hc : hom_cases()) {
    if (hc.name == "sol") continue;  // h not invertible away from its locus
    const CurvatureBundle B = curvature_homogeneous(hc.L, hc.q);
    const Gamma G = frame_connection(hc.L, hc.q);
    const FrameTensor<3> dh =
        frame_covariant_derivative(frame_from_sym2(B.h), G);
    const Mat3 hinv = B.h.m.inverse();
    double e = 0.0;
    for (int k = 0; k < 3; ++k) {
      double lhs = 0.0, rhs = 0.0;
      for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) {
          lhs += hinv(i, j) * dh.get({i, j, k});
          rhs += half * hinv(i, j) * dh.get({k, i, j});
        }
      e = std::max(e, std::fabs(lhs - rhs) / (1.0 + std::fabs(lhs)));
    }
    worst_hom = std::max(worst_hom, e);
  }
  // Grid: adjugate form adj(h)^{ij} nabla_i h_jk = 1/2 adj(h)^{ij} nabla_k h_ij,
  // polynomial in h so the near-flat regime stays well-conditioned.
  std::vector<double> errs;
  for (const GridLevel& lv : gd.levels) {
    const TensorGrid dh = covariant_derivative(h_field(lv), lv.gammas);
    double e = 0.0;
    for (std::int64_t node = 0; node < lv.m.spec.nodes(); ++node) {
      const Mat3& H = lv.b0[node].h.m;
      const Mat3 adj = H.determinant() * H.inverse();
      for (int k = 0; k < 3; ++k) {
        double lhs = 0.0, rhs = 0.0;
        for (int i = 0; i < 3; ++i)
          for (int j = 0; j < 3; ++j) {
            lhs += adj(i, j) * dh.get(node, (i * 3 + j) * 3 + k);
            rhs += half * adj(i, j) * dh.get(node, (k * 3 + i) * 3 + j);
          }
        e = std::max(e, std::fabs(lhs - rhs));
      }
    }
    errs.push_back(e);
  }
  r.order = fit_slope(errs);
  r.residual = std::max(worst_hom, errs.back());
  r.tolerance = 1e-2;
  r.metadata["hom_residual"] = worst_hom;
  r.metadata["finest_residual"] = errs.back();
  r.pass = worst_hom <= 1e-12 && *r.order >= *r.declared_order - 0.2;
  r.note = mutate ? "mutated: 1/2 trace term sign"
                  : "h^{ij} nabla_i h_jk = 1/2 h^{ij} nabla_k h_ij (adjugate form on grid)";
  return r;
}

Mat3 adjugate(const Mat3& M) {
  Mat3 a;
  a(0, 0) = M(1, 1) * M(2, 2) - M(1, 2) * M(2, 1);
  a(0, 1) = M(0, 2) * M(2, 1) - M(0, 1) * M(2, 2);
  a(0, 2) = M(0, 1) * M(1, 2) - M(0, 2) * M(1, 1);
  a(1, 0) = M(1, 2) * M(2, 0) - M(1, 0) * M(2, 2);
  a(1, 1) = M(0, 0) * M(2, 2) - M(0, 2) * M(2, 0);
  a(1, 2) = M(0, 2) * M(1, 0) - M(0, 0) * M(1, 2);
  a(2, 0) = M(1, 0) * M(2, 1) - M(1, 1) * M(2, 0);
  a(2, 1) = M(0, 1) * M(2, 0) - M(0, 0) * M(2, 1);
  a(2, 2) = M(0, 0) * M(1, 1) - M(0, 1) * M(1, 0);
  return a;
}

// detP * V = det(g) * adj(P^ij): polynomial in the bundle, so the
// comparison stays exact even where P is nearly singular.
double h_equiv_residual(const CurvatureBundle& B, double sign) {
  const Mat3 ref = sign * B.g.det() * adjugate(B.P_up.m);
  return (B.h.m - ref).cwiseAbs().maxCoeff() /
         (1.0 + B.h.m.cwiseAbs().maxCoeff());
}

CheckResult check_h_equivalence(const VerifySettings& s, const GridData& gd,
                                bool mutate) {
  CheckResult r;
  r.id = "h_equivalence";
  r.backend = "algebraic";
  r.tolerance = 1e-10;
  const double sign = mutate ? -1.0 : 1.0;
  double worst = 0.0;
  for (const HomCase& hc : hom_cases())
    worst = std::max(worst,
                     h_equiv_residual(curvature_homogeneous(hc.L, hc.q), sign));
  std::mt19937_64 rng(s.seed);
  for (int t = 0; t < 200; ++t) {
    const Sym2 g(random_spd(rng, 0.5, 2.0), Variance::Covariant);
    worst = std::max(
        worst, h_equiv_residual(synthetic_bundle(g, random_sym(rng)), sign));
  }
  for (const CurvatureBundle& B : gd.levels.front().b0)
    worst = std::max(worst, h_equiv_residual(B, sign));
  r.residual = worst;
  r.pass = worst <= r.tolerance;
  r.note = mutate ? "mutated: detP V compared with opposite sign"
                  : "h = detP * V vs the 1/8 R mu R mu contraction";
  return r;
}

double p_mu_residual(const CurvatureBundle& B, double sign) {
  const Mat3 direct =
      B.g_inv.m * B.Ric.m * B.g_inv.m - 0.5 * B.Rscal * B.g_inv.m;
  const Mat3 viaMu = sign * mu_contract_P(B.Riem, LeviCivita(B.g)).m;
  return (direct - viaMu).cwiseAbs().maxCoeff() /
         (1.0 + direct.cwiseAbs().maxCoeff());
}

CheckResult check_P_mu(const VerifySettings& s, const GridData& gd,
                       bool mutate) {
  CheckResult r;
  r.id = "P_mu";
  r.backend = "algebraic";
  r.tolerance = 1e-10;
  const double sign = mutate ? -1.0 : 1.0;
  double worst = 0.0;
  for (const HomCase& hc : hom_cases())
    worst =
        std::max(worst, p_mu_residual(curvature_homogeneous(hc.L, hc.q), sign));
  std::mt19937_64 rng(s.seed + 1);
  for (int t = 0; t < 200; ++t) {
    const Sym2 g(random_spd(rng, 0.5, 2.0), Variance::Covariant);
    worst = std::max(worst,
                     p_mu_residual(synthetic_bundle(g, random_sym(rng)), sign));
  }
  for (const CurvatureBundle& B : gd.levels.front().b0)
    worst = std::max(worst, p_mu_residual(B, sign));
  r.residual = worst;
  r.pass = worst <= r.tolerance;
  r.note = mutate ? "mutated: -1/4 mu mu R flipped to +1/4"
                  : "P^ij = R^ij - R/2 g^ij vs -1/4 mu mu R";
  return r;
}

double detp_identity_residual(const CurvatureBundle& B, double hp_sign) {
  const LeviCivita mu(B.g);
  Mat3 lhs = Mat3::Zero();
  for (int m = 0; m < 3; ++m)
    for (int n = 0; n < 3; ++n) {
      double sum = 0.0;
      for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j)
          for (int k = 0; k < 3; ++k)
            for (int l = 0; l < 3; ++l)
              for (int p = 0; p < 3; ++p)
                for (int q = 0; q < 3; ++q)
                  sum += 0.5 * mu.up(i, j, m) * mu.up(k, l, n) *
                         B.g_inv(p, q) * B.Riem(i, j, p, l) * B.h(q, k);
      lhs(m, n) = sum;
    }
  const Mat3 resid = lhs + hp_sign * B.H * B.P_up.m - B.detP * B.g_inv.m;
  return resid.cwiseAbs().maxCoeff() /
         (1.0 + std::fabs(B.detP) * B.g_inv.m.cwiseAbs().maxCoeff() +
          std::fabs(B.H) * B.P_up.m.cwiseAbs().maxCoeff());
}

CheckResult check_detP_identity(const VerifySettings& s, const GridData& gd,
                                bool mutate) {
  CheckResult r;
  r.id = "detP_identity";
  r.backend = "algebraic";
  r.tolerance = 1e-10;
  const double hp = mutate ? -1.0 : 1.0;
  double worst = 0.0;
  for (const HomCase& hc : hom_cases())
    worst = std::max(
        worst, detp_identity_residual(curvature_homogeneous(hc.L, hc.q), hp));
  std::mt19937_64 rng(s.seed + 2);
  for (int t = 0; t < 200; ++t) {
    const Sym2 g(random_spd(rng, 0.5, 2.0), Variance::Covariant);
    worst = std::max(
        worst, detp_identity_residual(synthetic_bundle(g, random_sym(rng)), hp));
  }
  const auto& b16 = gd.levels.front().b0;
  for (std::size_t i = 0; i < b16.size(); i += 64)
    worst = std::max(worst, detp_identity_residual(b16[i], hp));
  r.residual = worst;
  r.pass = worst <= r.tolerance;
  r.note = mutate ? "mutated: H P term sign"
                  : "1/2 mu mu g R h + H P = detP g^{-1}";
  return r;
}

CheckResult check_norm_decomposition(const VerifySettings& s, bool mutate) {
  CheckResult r;
  r.id = "norm_decomposition";
  r.backend = "algebraic";
  r.tolerance = 1e-9;
  const double tr_sign = mutate ? -1.0 : 1.0;
  std::mt19937_64 rng(s.seed + 3);
  double worst = 0.0;
  for (int t = 0; t < 300; ++t) {
    const Sym2 g(random_spd(rng, 0.5, 2.0), Variance::Covariant);
    const CurvatureBundle B = synthetic_bundle(g, random_spd(rng, 0.2, 2.0));
    if (!B.V) continue;
    const TDecomposition td = compute_T(B.P_up, random_nabla_P(rng), *B.V);
    const double lhs = antisym_norm_sq(td.T, *B.V);
    const double rhs =
        antisym_norm_sq(td.E, *B.V) + tr_sign * vnorm_sq(td.Ttr, *B.V);
    worst = std::max(worst, std::fabs(lhs - rhs) / (1.0 + std::fabs(lhs)));
  }
  r.residual = worst;
  r.pass = worst <= r.tolerance;
  r.note = mutate ? "mutated: |T^i|^2 subtracted instead of added"
                  : "|T - T^t|^2 = |E - E^t|^2 + |T^i|^2";
  return r;
}

CheckResult check_E_traces(const VerifySettings& s, bool mutate) {
  CheckResult r;
  r.id = "E_traces";
  r.backend = "algebraic";
  r.tolerance = 1e-10;
  std::mt19937_64 rng(s.seed + 4);
  double worst = 0.0;
  for (int t = 0; t < 300; ++t) {
    const Sym2 g(random_spd(rng, 0.5, 2.0), Variance::Covariant);
    const CurvatureBundle B = synthetic_bundle(g, random_spd(rng, 0.2, 2.0));
    if (!B.V) continue;
    TDecomposition td = compute_T(B.P_up, random_nabla_P(rng), *B.V);
    if (mutate) {
      // flip the -2/5 coefficient in the reconstruction
      for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j)
          for (int k = 0; k < 3; ++k)
            td.E.set({i, j, k},
                     td.E.get({i, j, k}) + 0.8 * B.P_up(j, k) * td.Ttr(i));
    }
    const double scale = 1.0 + td.T.max_abs();
    for (int k = 0; k < 3; ++k) {
      double t01 = 0.0, t02 = 0.0, t12 = 0.0;
      for (int a = 0; a < 3; ++a)
        for (int b = 0; b < 3; ++b) {
          t01 += (*B.V)(a, b) * td.E.get({a, b, k});
          t02 += (*B.V)(a, b) * td.E.get({a, k, b});
          t12 += (*B.V)(a, b) * td.E.get({k, a, b});
        }
      worst = std::max({worst, std::fabs(t01) / scale, std::fabs(t02) / scale,
                        std::fabs(t12) / scale});
    }
  }
  r.residual = worst;
  r.pass = worst <= r.tolerance;
  r.note = mutate ? "mutated: -2/5 trace coefficient sign"
                  : "all three V-traces of E vanish";
  return r;
}

CheckResult check_symbol(const VerifySettings& s, bool mutate) {
  CheckResult r;
  r.id = "symbol";
  r.backend = "algebraic";
  r.tolerance = 1e-12;
  const double sign = mutate ? -1.0 : 1.0;
  std::mt19937_64 rng(s.seed + 5);
  std::normal_distribution<double> nd;
  double worst_neg = 0.0;
  int min_kernel = 6;
  const int n = std::max(s.ensemble, 1000);
  for (int t = 0; t < n; ++t) {
    const Mat3 P = random_spd(rng, 0.1, 3.0);
    Covec3 z;
    z << nd(rng), nd(rng), nd(rng);
    if (z.norm() < 1e-8) continue;
    z.normalize();
    Eigen::Matrix<double, 6, 1> ev =
        symbol_eigenvalues(Sym2(sign * P, Variance::Contravariant), z);
    const double scale = 1.0 + P.cwiseAbs().maxCoeff();
    worst_neg = std::max(worst_neg, -ev(0) / scale);
    int kernel = 0;
    for (int i = 0; i < 6; ++i)
      if (std::fabs(ev(i)) < 1e-9 * scale) ++kernel;
    min_kernel = std::min(min_kernel, kernel);
  }
  r.residual = worst_neg;
  r.metadata["min_kernel_dim"] = min_kernel;
  r.metadata["ensemble"] = n;
  r.pass = worst_neg <= r.tolerance && min_kernel >= 3;
  r.note = mutate ? "mutated: symbol map negated"
                  : "symbol spectrum nonnegative; gauge kernel dim >= 3";
  return r;
}

CheckResult check_eta_half(const VerifySettings& s, bool mutate) {
  CheckResult r;
  r.id = "eta_half";
  r.backend = "algebraic";
  r.tolerance = 1e-10;
  const double quarter = mutate ? -0.25 : 0.25;
  std::mt19937_64 rng(s.seed + 6);
  double worst = 0.0;
  bool nonneg = true;
  for (int t = 0; t < 300; ++t) {
    const Sym2 g(random_spd(rng, 0.5, 2.0), Variance::Covariant);
    const CurvatureBundle B = synthetic_bundle(g, random_spd(rng, 0.2, 2.0));
    if (!B.V || !(B.detP > 0.0)) continue;
    const TDecomposition td = compute_T(B.P_up, random_nabla_P(rng), *B.V);
    const double lhs = eta_rhs_density(td, *B.V, B.detP, B.H, 0.5);
    const double rhs =
        quarter * antisym_norm_sq(td.E, *B.V) * std::sqrt(B.detP);
    worst = std::max(worst, std::fabs(lhs - rhs) / (1.0 + std::fabs(lhs)));
    if (rhs < 0.0) nonneg = false;
  }
  r.residual = worst;
  r.metadata["nonnegative"] = nonneg ? 1.0 : 0.0;
  r.pass = worst <= r.tolerance && nonneg;
  r.note = mutate ? "mutated: 1/4 coefficient sign"
                  : "eta=1/2 density equals 1/4 |E - E^t|^2 sqrt(detP) >= 0";
  return r;
}

CheckResult check_evolution_P(const VerifySettings& s, const GridData& gd,
                              bool mutate) {
  CheckResult r;
  r.id = "evolution_P";
  r.backend = "homogeneous+grid";
  r.declared_order = 2;
  // Homogeneous: temporal slope against the exact frame rate.
  std::vector<double> terrs;
  double tslope = 1e9;
  for (const HomCase& hc : hom_cases()) {
    terrs.clear();
    const Sym2 an0 = analytic_dP_dt_homogeneous(hc.L, hc.q);
    const CurvatureBundle B0 = curvature_homogeneous(hc.L, hc.q);
    Mat3 an = an0.m;
    if (mutate) an += 2.0 * B0.H * B0.P_up.m;  // -H P flipped to +H P
    for (double dt : s.temporal_dts) {
      const TemporalPair tp = temporal_pair(hc.L, hc.q, dt);
      const Mat3 fd = (tp.Bp.P_up.m - tp.Bm.P_up.m) / (2.0 * dt);
      terrs.push_back((fd - an).cwiseAbs().maxCoeff() /
                      (1.0 + an.cwiseAbs().maxCoeff()));
    }
    tslope = std::min(tslope, fit_slope(terrs));
  }
  // Grid: spatial residual decay at fixed tiny dt (order-4 stencils decay
  // near 4; declared conservatively as 2).
  std::vector<double> serrs;
  for (const GridLevel& lv : gd.levels) {
    const TensorGrid an = analytic_dP_dt_grid(lv.m, lv.b0);
    double e = 0.0;
    for (std::int64_t node = 0; node < lv.m.spec.nodes(); ++node)
      for (int c = 0; c < 9; ++c) {
        const int i = c / 3, j = c % 3;
        const double fd =
            (lv.bp[node].P_up(i, j) - lv.bm[node].P_up(i, j)) / (2.0 * lv.dt);
        double a = an.get(node, c);
        if (mutate)
          a += 2.0 * lv.b0[node].H * lv.b0[node].P_up(i, j);
        e = std::max(e, std::fabs(fd - a));
      }
    serrs.push_back(e);
  }
  const double sslope = fit_slope(serrs);
  r.order = std::min(tslope, sslope);
  r.residual = serrs.back();
  r.tolerance = 1e-2;
  r.metadata["temporal_slope"] = tslope;
  r.metadata["spatial_slope"] = sslope;
  r.pass = *r.order >= *r.declared_order - 0.2 && r.residual <= r.tolerance;
  r.note = mutate ? "mutated: H P^{ij} term sign"
                  : "dP/dt = div div (PP - PP) - detP g^{-1} - H P";
  return r;
}

CheckResult check_evolution_Riem(const VerifySettings& s, const GridData& gd,
                                 bool mutate) {
  CheckResult r;
  r.id = "evolution_Riem";
  r.backend = "homogeneous+grid";
  r.declared_order = 2;
  auto coupling = [](const CurvatureBundle& B, int i, int j, int k, int l) {
    double sum = 0.0;
    for (int p = 0; p < 3; ++p)
      for (int q = 0; q < 3; ++q)
        sum += B.g_inv(p, q) *
               (B.Riem(i, j, k, p) * B.h(q, l) + B.Riem(i, j, p, l) * B.h(q, k));
    return sum;
  };
  std::vector<double> terrs;
  double tslope = 1e9;
  for (const HomCase& hc : hom_cases()) {
    terrs.clear();
    const Riem4 an = analytic_dRiem_dt_homogeneous(hc.L, hc.q);
    const CurvatureBundle B0 = curvature_homogeneous(hc.L, hc.q);
    for (double dt : s.temporal_dts) {
      const TemporalPair tp = temporal_pair(hc.L, hc.q, dt);
      double e = 0.0, scale = 1.0;
      for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j)
          for (int k = 0; k < 3; ++k)
            for (int l = 0; l < 3; ++l) {
              const double fd =
                  (tp.Bp.Riem(i, j, k, l) - tp.Bm.Riem(i, j, k, l)) / (2.0 * dt);
              double a = an(i, j, k, l);
              if (mutate) a -= 2.0 * coupling(B0, i, j, k, l);
              e = std::max(e, std::fabs(fd - a));
              scale = std::max(scale, std::fabs(a));
            }
      terrs.push_back(e / scale);
    }
    tslope = std::min(tslope, fit_slope(terrs));
  }
  std::vector<double> serrs;
  for (const GridLevel& lv : gd.levels) {
    const std::vector<Riem4> an = analytic_dRiem_dt_grid(lv.m, lv.b0);
    double e = 0.0;
    for (std::int64_t node = 0; node < lv.m.spec.nodes(); ++node)
      for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j)
          for (int k = 0; k < 3; ++k)
            for (int l = 0; l < 3; ++l) {
              const double fd = (lv.bp[node].Riem(i, j, k, l) -
                                 lv.bm[node].Riem(i, j, k, l)) /
                                (2.0 * lv.dt);
              double a = an[node](i, j, k, l);
              if (mutate) a -= 2.0 * coupling(lv.b0[node], i, j, k, l);
              e = std::max(e, std::fabs(fd - a));
            }
    serrs.push_back(e);
  }
  const double sslope = fit_slope(serrs);
  r.order = std::min(tslope, sslope);
  r.residual = serrs.back();
  r.tolerance = 1e-2;
  r.metadata["temporal_slope"] = tslope;
  r.metadata["spatial_slope"] = sslope;
  r.pass = *r.order >= *r.declared_order - 0.2 && r.residual <= r.tolerance;
  r.note = mutate ? "mutated: curvature coupling term sign"
                  : "dRiem/dt = nabla nabla h terms + g^{pq}(R h + R h)";
  return r;
}

CheckResult check_volume_evolution(const VerifySettings& s, const GridData& gd,
                                   bool mutate) {
  CheckResult r;
  r.id = "volume_evolution";
  r.backend = "homogeneous+grid";
  r.declared_order = 2;
  const double sign = mutate ? -1.0 : 1.0;
  double slope = 1e9;
  std::vector<double> errs;
  for (const HomCase& hc : hom_cases()) {
    errs.clear();
    const CurvatureBundle B0 = curvature_homogeneous(hc.L, hc.q);
    const double an = sign * analytic_dmu_dt(B0);
    for (double dt : s.temporal_dts) {
      const TemporalPair tp = temporal_pair(hc.L, hc.q, dt);
      const double fd =
          (std::sqrt(tp.qp.det()) - std::sqrt(tp.qm.det())) / (2.0 * dt);
      errs.push_back(std::fabs(fd - an) / (1.0 + std::fabs(an)));
    }
    slope = std::min(slope, fit_slope(errs));
  }
  // Grid at the coarsest level: same temporal FD per node.
  {
    const MetricGrid& m = gd.levels.front().m;
    const auto& b0 = gd.levels.front().b0;
    errs.clear();
    for (double dt : s.temporal_dts) {
      const MetricGrid mp = step_rk4_grid(m, dt, +1);
      const MetricGrid mm = step_rk4_grid(m, -dt, +1);
      double e = 0.0;
      for (std::int64_t node = 0; node < m.spec.nodes(); ++node) {
        const double fd =
            (std::sqrt(mp.g[node].det()) - std::sqrt(mm.g[node].det())) /
            (2.0 * dt);
        const double an = sign * analytic_dmu_dt(b0[node]);
        e = std::max(e, std::fabs(fd - an));
      }
      errs.push_back(e);
    }
    slope = std::min(slope, fit_slope(errs));
  }
  r.order = slope;
  r.residual = errs.back();
  r.tolerance = 1e-2;
  r.pass = slope >= *r.declared_order - 0.2;
  r.note = mutate ? "mutated: H sqrt(det g) negated"
                  : "d/dt sqrt(det g) = H sqrt(det g)";
  return r;
}

CheckResult check_eta_lemma(const VerifySettings& s, bool mutate) {
  CheckResult r;
  r.id = "eta_lemma";
  r.backend = "homogeneous";
  r.declared_order = 2;
  auto [L, st] = build_preset(PresetId::parse("nil"));
  const Sym2& q = st.q;
  const CurvatureBundle B = curvature_homogeneous(L, q);
  const TDecomposition td =
      compute_T(B.P_up, frame_nabla_P(L, q, B), *B.V);
  const double vol = std::sqrt(q.det());
  double slope = 1e9, worst = 0.0;
  int k = 0;
  for (double eta : {1.0 / 3.0, 0.5, 1.0, 2.0}) {
    double rhs = eta_rhs_density(td, *B.V, B.detP, B.H, eta) * vol;
    if (mutate)
      rhs -= eta * antisym_norm_sq(td.T, *B.V) * pow_detP(B.detP, eta) * vol;
    std::vector<double> errs;
    for (double dt : s.temporal_dts) {
      const TemporalPair tp = temporal_pair(L, q, dt);
      const double fd = (pow_detP(tp.Bp.detP, eta) * std::sqrt(tp.qp.det()) -
                         pow_detP(tp.Bm.detP, eta) * std::sqrt(tp.qm.det())) /
                        (2.0 * dt);
      errs.push_back(std::fabs(fd - rhs) / (1.0 + std::fabs(rhs)));
    }
    const double sl = fit_slope(errs);
    slope = std::min(slope, sl);
    worst = std::max(worst, errs.back());
    r.metadata["slope_eta_" + std::to_string(k++)] = sl;
  }
  r.order = slope;
  r.residual = worst;
  r.tolerance = 1e-2;
  r.pass = slope >= 1.8 && worst <= r.tolerance;
  r.note = mutate
               ? "mutated: 1/2 |T - T^t|^2 term sign"
               : "d/dt[(detP)^eta sqrt(g)] density identity on Nil, eta in {1/3,1/2,1,2}";
  return r;
}

CheckResult check_logdetP(const VerifySettings& s, bool mutate) {
  CheckResult r;
  r.id = "logdetP";
  r.backend = "homogeneous";
  r.declared_order = 2;
  const double hsign = mutate ? +2.0 : -2.0;
  double slope = 1e9, worst = 0.0;
  for (const char* name :
       {"hyperbolic_solvable(1,1)", "nil", "hyperbolic_solvable(1,2)"}) {
    auto [L, st] = build_preset(PresetId::parse(name));
    const Sym2& q = st.q;
    const CurvatureBundle B = curvature_homogeneous(L, q);
    const TDecomposition td = compute_T(B.P_up, frame_nabla_P(L, q, B), *B.V);
    // box log detP vanishes for left-invariant scalars; the frame RHS is
    // the quadratic term plus the H term.
    const double rhs =
        0.5 * antisym_norm_sq(td.T, *B.V) + hsign * B.H;
    std::vector<double> errs;
    for (double dt : s.temporal_dts) {
      const TemporalPair tp = temporal_pair(L, q, dt);
      const double fd =
          (std::log(tp.Bp.detP) - std::log(tp.Bm.detP)) / (2.0 * dt);
      errs.push_back(std::fabs(fd - rhs) / (1.0 + std::fabs(rhs)));
    }
    slope = std::min(slope, fit_slope(errs));
    worst = std::max(worst, errs.back());
  }
  r.order = slope;
  r.residual = worst;
  r.tolerance = 1e-2;
  r.pass = slope >= 1.8 && worst <= r.tolerance;
  r.note = mutate ? "mutated: -2H flipped to +2H"
                  : "d/dt log detP = box log detP + 1/2 |T - T^t|^2 - 2H";
  return r;
}

CheckResult check_harmonicity(const VerifySettings& s, const GridData& gd,
                              bool mutate) {
  CheckResult r;
  r.id = "harmonicity";
  r.backend = "homogeneous+grid";
  r.declared_order = s.stencil_order;
  const double dsign = mutate ? +1.0 : -1.0;  // tau = g^{ij}(Gt + dsign*Gd)
  auto tension = [&](const Sym2& domain, const Gamma& Gd, const Gamma& Gt) {
    const Mat3 ginv = domain.m.inverse();
    Vec3 tau = Vec3::Zero();
    for (int k = 0; k < 3; ++k)
      for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j)
          tau(k) += ginv(i, j) * (Gt(k, i, j) + dsign * Gd(k, i, j));
    return tau;
  };
  double worst_hom = 0.0;
  // Part 1: identity (M, g) -> (M, Ric) on positive-Ricci states.
  for (const char* name : {"su2_round", "su2_berger(1.5)"}) {
    auto [L, st] = build_preset(PresetId::parse(name));
    const CurvatureBundle B = curvature_homogeneous(L, st.q);
    const Sym2 ric(B.Ric.m, Variance::Covariant);
    const Vec3 tau = tension(st.q, frame_connection(L, st.q),
                             frame_connection(L, ric));
    worst_hom = std::max(worst_hom, tau.cwiseAbs().maxCoeff());
  }
  // Part 2: identity (M, h) -> (M, g) on negative-curvature states.
  for (const char* name :
       {"hyperbolic_solvable(1,1)", "hyperbolic_solvable(1,2)"}) {
    auto [L, st] = build_preset(PresetId::parse(name));
    const CurvatureBundle B = curvature_homogeneous(L, st.q);
    const Vec3 tau = tension(B.h, frame_connection(L, B.h),
                             frame_connection(L, st.q));
    worst_hom = std::max(worst_hom, tau.cwiseAbs().maxCoeff());
  }
  // Grid: tension of the identity between a sampled metric and its own
  // analytic jet vanishes in the continuum; the residual is pure
  // discretization error and decays at the stencil order.
  std::vector<double> errs;
  for (const GridLevel& lv : gd.levels) {
    double e = 0.0;
    for (std::int64_t node = 0; node < lv.m.spec.nodes(); ++node) {
      const Gamma Gd = christoffels_from_jet(lv.jets[node]);
      const Gamma Gt =
          christoffels_from_jet(gd.tm.analytic_jet(lv.m.spec.coords(node)));
      const Vec3 tau = tension(lv.m.g[node], Gd, Gt);
      e = std::max(e, tau.cwiseAbs().maxCoeff());
    }
    errs.push_back(e);
  }
  r.order = fit_slope(errs);
  r.residual = std::max(worst_hom, errs.back());
  r.tolerance = 1e-2;
  r.metadata["hom_residual"] = worst_hom;
  r.pass = worst_hom <= 1e-10 && *r.order >= *r.declared_order - 0.2;
  r.note = mutate ? "mutated: Gamma difference flipped to a sum"
                  : "identity maps (g -> Ric) and (h -> g) are harmonic";
  return r;
}

CheckResult check_J_theorem(const VerifySettings& s, bool mutate) {
  CheckResult r;
  r.id = "J_theorem";
  r.backend = "homogeneous+algebraic";
  r.declared_order = 2;
  const double three = mutate ? -3.0 : 3.0;
  double worst = 0.0;
  bool signs_ok = true;
  // Space forms: J density and its rate vanish.
  {
    auto [L, st] = build_preset(PresetId::parse("hyperbolic_solvable(1,1)"));
    const CurvatureBundle B = curvature_homogeneous(L, st.q);
    const TDecomposition td = compute_T(B.P_up, frame_nabla_P(L, st.q, B), *B.V);
    worst = std::max(worst, std::fabs(J_density(B)));
    worst = std::max(worst, std::fabs(J_rhs_density(td, B)));
  }
  // Random P > 0 states: J_rhs_density <= 0.
  std::mt19937_64 rng(s.seed + 7);
  int tested = 0;
  for (int t = 0; t < 2000 && tested < 1000; ++t) {
    const Sym2 g(random_spd(rng, 0.5, 2.0), Variance::Covariant);
    const CurvatureBundle B = synthetic_bundle(g, random_spd(rng, 0.2, 2.0));
    if (!B.V || !(B.detP > 0.0)) continue;
    const TDecomposition td = compute_T(B.P_up, random_nabla_P(rng), *B.V);
    const double d = J_rhs_density(td, B);
    if (d > 1e-12 * (1.0 + std::fabs(d))) signs_ok = false;
    ++tested;
  }
  // Solvable anisotropic state: strict signs.
  {
    auto [L, st] = build_preset(PresetId::parse("hyperbolic_solvable(1,2)"));
    const CurvatureBundle B = curvature_homogeneous(L, st.q);
    const TDecomposition td = compute_T(B.P_up, frame_nabla_P(L, st.q, B), *B.V);
    if (!(J_density(B) > 0.0) || !(J_rhs_density(td, B) < 0.0))
      signs_ok = false;
  }
  // d/dt of the P-integral density equals 3 detP sqrt(det q) on unimodular
  // presets (left-invariant divergence terms vanish pointwise).
  double slope = 1e9;
  for (const char* name : {"nil", "su2_round", "sol"}) {
    auto [L, st] = build_preset(PresetId::parse(name));
    const Sym2& q = st.q;
    const CurvatureBundle B = curvature_homogeneous(L, q);
    const double rhs = three * B.detP * std::sqrt(q.det());
    std::vector<double> errs;
    for (double dt : s.temporal_dts) {
      const TemporalPair tp = temporal_pair(L, q, dt);
      const double fd =
          ((tp.Bp.g.m * tp.Bp.P_up.m).trace() * std::sqrt(tp.qp.det()) -
           (tp.Bm.g.m * tp.Bm.P_up.m).trace() * std::sqrt(tp.qm.det())) /
          (2.0 * dt);
      errs.push_back(std::fabs(fd - rhs) / (1.0 + std::fabs(rhs)));
    }
    slope = std::min(slope, fit_slope(errs));
  }
  r.order = slope;
  r.residual = worst;
  r.tolerance = 1e-10;
  r.metadata["ensemble"] = tested;
  r.metadata["signs_ok"] = signs_ok ? 1.0 : 0.0;
  r.pass = worst <= r.tolerance && signs_ok && slope >= 1.8;
  r.note = mutate
               ? "mutated: 3 detP flipped to -3 detP"
               : "J = 0 on space forms; J rate <= 0 for P > 0; d/dt P-integral = 3 detP-integral";
  return r;
}

}  // namespace

const std::vector<std::string>& check_ids() {
  static const std::vector<std::string> ids = {
      "bianchi",         "dual_bianchi", "h_equivalence",
      "P_mu",            "detP_identity", "norm_decomposition",
      "E_traces",        "symbol",        "eta_half",
      "evolution_P",     "evolution_Riem", "volume_evolution",
      "eta_lemma",       "logdetP",       "harmonicity",
      "J_theorem"};
  return ids;
}

VerificationReport run_suite(const VerifySettings& s) {
  const auto& ids = check_ids();
  for (const std::string& id : s.only)
    if (std::find(ids.begin(), ids.end(), id) == ids.end())
      throw ConfigError("run_suite: unknown check id '" + id + "'");
  if (!s.mutate.empty() &&
      std::find(ids.begin(), ids.end(), s.mutate) == ids.end())
    throw ConfigError("run_suite: unknown mutation target '" + s.mutate + "'");
  VerificationReport rep;
  auto wanted = [&](const std::string& id) {
    return s.only.empty() ||
           std::find(s.only.begin(), s.only.end(), id) != s.only.end();
  };
  auto mut = [&](const std::string& id) { return s.mutate == id; };

  const bool need_grid =
      wanted("bianchi") || wanted("dual_bianchi") || wanted("h_equivalence") ||
      wanted("P_mu") || wanted("detP_identity") || wanted("evolution_P") ||
      wanted("evolution_Riem") || wanted("volume_evolution") ||
      wanted("harmonicity");
  const bool need_evolution = wanted("evolution_P") || wanted("evolution_Riem");
  GridData gd;
  if (need_grid) gd = build_grid_data(s, need_evolution);

  for (const std::string& id : check_ids()) {
    if (!wanted(id)) continue;
    CheckResult r;
    if (id == "bianchi") r = check_bianchi(s, gd, mut(id));
    else if (id == "dual_bianchi") r = check_dual_bianchi(s, gd, mut(id));
    else if (id == "h_equivalence") r = check_h_equivalence(s, gd, mut(id));
    else if (id == "P_mu") r = check_P_mu(s, gd, mut(id));
    else if (id == "detP_identity") r = check_detP_identity(s, gd, mut(id));
    else if (id == "norm_decomposition") r = check_norm_decomposition(s, mut(id));
    else if (id == "E_traces") r = check_E_traces(s, mut(id));
    else if (id == "symbol") r = check_symbol(s, mut(id));
    else if (id == "eta_half") r = check_eta_half(s, mut(id));
    else if (id == "evolution_P") r = check_evolution_P(s, gd, mut(id));
    else if (id == "evolution_Riem") r = check_evolution_Riem(s, gd, mut(id));
    else if (id == "volume_evolution") r = check_volume_evolution(s, gd, mut(id));
    else if (id == "eta_lemma") r = check_eta_lemma(s, mut(id));
    else if (id == "logdetP") r = check_logdetP(s, mut(id));
    else if (id == "harmonicity") r = check_harmonicity(s, gd, mut(id));
    else if (id == "J_theorem") r = check_J_theorem(s, mut(id));
    r.metadata["seed"] = static_cast<double>(s.seed);
    rep.checks.push_back(std::move(r));
  }

  std::ostringstream env;
  env << "compiler=" << __VERSION__ << "; eigen=" << EIGEN_WORLD_VERSION << '.'
      << EIGEN_MAJOR_VERSION << '.' << EIGEN_MINOR_VERSION
      << "; threads=" << threads();
  rep.environment = env.str();
  json cfg{{"seed", s.seed},
           {"grid_ns", s.grid_ns},
           {"stencil_order", s.stencil_order},
           {"eps", s.eps},
           {"ensemble", s.ensemble},
           {"temporal_dts", s.temporal_dts},
           {"mutate", s.mutate},
           {"only", s.only}};
  rep.config_echo = cfg.dump();
  rep.all_pass = !rep.checks.empty();
  for (const CheckResult& c : rep.checks) rep.all_pass = rep.all_pass && c.pass;
  return rep;
}

std::string report_table(const VerificationReport& rep) {
  std::ostringstream os;
  char line[256];
  std::snprintf(line, sizeof line, "%-20s %-22s %-12s %-10s %-8s %s\n",
                "check", "backend", "residual", "order", "pass", "note");
  os << line;
  for (const CheckResult& c : rep.checks) {
    char order[32];
    if (c.order)
      std::snprintf(order, sizeof order, "%.2f/%.1f", *c.order,
                    c.declared_order.value_or(0.0));
    else
      std::snprintf(order, sizeof order, "-");
    std::snprintf(line, sizeof line, "%-20s %-22s %-12.3e %-10s %-8s %s\n",
                  c.id.c_str(), c.backend.c_str(), c.residual, order,
                  c.pass ? "PASS" : "FAIL", c.note.c_str());
    os << line;
  }
  os << (rep.all_pass ? "ALL CHECKS PASS\n" : "FAILURES PRESENT\n");
  return os.str();
}

}  // namespace xcf
