#include "xcf/flow.hpp"

#include <cmath>
#include <functional>

namespace xcf {

std::string to_string(BreakdownReason r) {
  switch (r) {
    case BreakdownReason::DetPBelowThreshold: return "detP_below_threshold";
    case BreakdownReason::CurvatureSignChange: return "curvature_sign_change";
    case BreakdownReason::HExceeded: return "H_exceeded";
    default: return "nonfinite";
  }
}

int resolve_branch_sign(Branch branch, const Vec3& sec_min, const Vec3& sec_max) {
  switch (branch) {
    case Branch::Negative: return +1;
    case Branch::Positive: return -1;
    default: break;
  }
  if (sec_min(0) > 0.0) return +1;  // all eigenvalues positive: K < 0
  if (sec_max(2) < 0.0) return -1;  // all negative: K > 0
  throw MixedCurvatureSign(
      "resolve_branch_sign: (a,b,c) sign class is not uniform at t = 0");
}

// --- homogeneous backend ---------------------------------------------------

Sym2 xcf_rhs_homogeneous(const LieAlgebraData& L, const Sym2& q, int sign) {
  const CurvatureBundle B = curvature_homogeneous(L, q);
  return Sym2(2.0 * sign * B.h.m, Variance::Covariant);
}

Sym2 step_rk4_homogeneous(const LieAlgebraData& L, const Sym2& q, double dt,
                          int sign) {
  try {
    const Mat3 k1 = xcf_rhs_homogeneous(L, q, sign).m;
    const Mat3 k2 =
        xcf_rhs_homogeneous(L, Sym2(q.m + 0.5 * dt * k1, q.var), sign).m;
    const Mat3 k3 =
        xcf_rhs_homogeneous(L, Sym2(q.m + 0.5 * dt * k2, q.var), sign).m;
    const Mat3 k4 = xcf_rhs_homogeneous(L, Sym2(q.m + dt * k3, q.var), sign).m;
    Sym2 out(q.m + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4), q.var);
    if (!out.m.allFinite() || !out.positive_definite())
      throw StepProducedInvalidMetric("step_rk4: result metric invalid");
    return out;
  } catch (const NonPositiveMetric&) {
    throw StepProducedInvalidMetric("step_rk4: stage metric degenerated");
  }
}

double adapt_dt_homogeneous(const LieAlgebraData& L, const Sym2& q,
                            const FlowConfig& cfg, double dt_prev) {
  const CurvatureBundle B = curvature_homogeneous(L, q);
  const Vec3 rates = generalized_eigenvalues(B.h, q);
  const double rate = 2.0 * rates.cwiseAbs().maxCoeff();
  double dt = cfg.dt_max;
  if (rate > 0.0) dt = std::min(dt, cfg.safety / rate);
  if (dt_prev > 0.0) dt = std::min(dt, cfg.max_growth * dt_prev);
  return dt;
}

namespace {

struct Diag {
  Vec3 sec_min, sec_max;
  double detP_min = 0.0, detP_max = 0.0;
  double H_min = 0.0, H_max = 0.0;
  std::int64_t argmin_detP = -1;
  double H_at_argmin = 0.0;
  bool finite = true;
};

Diag diag_of_bundle(const CurvatureBundle& B) {
  Diag d;
  d.sec_min = d.sec_max = B.sec;
  d.detP_min = d.detP_max = B.detP;
  d.H_min = d.H_max = B.H;
  d.H_at_argmin = B.H;
  d.finite = std::isfinite(B.detP) && std::isfinite(B.H) && B.sec.allFinite();
  return d;
}

Diag diag_of_bundles(const std::vector<CurvatureBundle>& bs) {
  Diag d = diag_of_bundle(bs[0]);
  d.argmin_detP = 0;
  for (std::int64_t i = 1; i < static_cast<std::int64_t>(bs.size()); ++i) {
    const CurvatureBundle& B = bs[i];
    d.sec_min = d.sec_min.cwiseMin(B.sec);
    d.sec_max = d.sec_max.cwiseMax(B.sec);
    if (B.detP < d.detP_min) {
      d.detP_min = B.detP;
      d.argmin_detP = i;
      d.H_at_argmin = B.H;
    }
    d.detP_max = std::max(d.detP_max, B.detP);
    d.H_min = std::min(d.H_min, B.H);
    d.H_max = std::max(d.H_max, B.H);
    d.finite = d.finite && std::isfinite(B.detP) && std::isfinite(B.H) &&
               B.sec.allFinite();
  }
  return d;
}

int sign_class(const Diag& d) {
  if (d.sec_min(0) > 0.0) return +1;
  if (d.sec_max(2) < 0.0) return -1;
  return 0;
}

std::optional<BreakdownEvent> breakdown_check(const Diag& d, const Diag& init,
                                              int init_class, double t,
                                              const FlowConfig& cfg,
                                              const std::string& loc) {
  auto mk = [&](BreakdownReason r) {
    BreakdownEvent e;
    e.reason = r;
    e.time = t;
    e.location = loc;
    e.detP_at_argmin = d.detP_min;
    e.H_at_argmin = d.H_at_argmin;
    return e;
  };
  if (!d.finite) return mk(BreakdownReason::NonFinite);
  if (init_class != 0 && sign_class(d) != init_class)
    return mk(BreakdownReason::CurvatureSignChange);
  if (init.detP_min > 0.0 && d.detP_min < cfg.detP_collapse_factor * init.detP_min)
    return mk(BreakdownReason::DetPBelowThreshold);
  const double H0 = std::max(std::fabs(init.H_min), std::fabs(init.H_max));
  const double H1 = std::max(std::fabs(d.H_min), std::fabs(d.H_max));
  if (H0 > 0.0 && H1 > cfg.H_blowup_factor * H0)
    return mk(BreakdownReason::HExceeded);
  return std::nullopt;
}

FlowSample make_sample(double t, double dt, const Diag& d,
                       FunctionalSample fs) {
  FlowSample s;
  s.t = t;
  s.dt = dt;
  s.a_min = d.sec_min(0);
  s.a_max = d.sec_max(0);
  s.b_min = d.sec_min(1);
  s.b_max = d.sec_max(1);
  s.c_min = d.sec_min(2);
  s.c_max = d.sec_max(2);
  s.detP_min = d.detP_min;
  s.detP_max = d.detP_max;
  s.H_min = d.H_min;
  s.H_max = d.H_max;
  s.functionals = std::move(fs);
  return s;
}

}  // namespace

FlowTrace run_flow_homogeneous(const LieAlgebraData& L, const Sym2& q0,
                               const FlowConfig& cfg) {
  if (cfg.t_end <= 0.0 || cfg.dt_init <= 0.0)
    throw InvalidParameter("run_flow: t_end and dt_init must be positive");
  FlowTrace trace;
  trace.etas = cfg.etas;
  Sym2 q = q0;
  double t = 0.0, dt_prev = 0.0;
  long step = 0;

  Diag init = diag_of_bundle(curvature_homogeneous(L, q));
  const int sign = resolve_branch_sign(cfg.branch, init.sec_min, init.sec_max);
  const int init_class = sign_class(init);

  double last_recorded = -1.0;
  while (true) {
    const Diag d = diag_of_bundle(curvature_homogeneous(L, q));
    const auto ev = breakdown_check(d, init, init_class, t, cfg, "homogeneous");
    const bool done = ev.has_value() || t >= cfg.t_end - 1e-14;
    if (done || step % cfg.sample_every == 0) {
      if (t != last_recorded) {
        trace.samples.push_back(
            make_sample(t, dt_prev, d, functionals_homogeneous(L, q, t, cfg.etas)));
        last_recorded = t;
      }
    }
    if (ev) {
      trace.breakdown = ev;
      break;
    }
    if (done) break;

    double dt = cfg.adaptive ? adapt_dt_homogeneous(L, q, cfg, dt_prev)
                             : cfg.dt_init;
    dt = std::min(dt, cfg.t_end - t);
    int tries = 0;
    while (true) {
      try {
        q = step_rk4_homogeneous(L, q, dt, sign);
        break;
      } catch (const StepProducedInvalidMetric&) {
        if (++tries > cfg.retry_budget) throw;
        dt *= 0.5;
      }
    }
    t += dt;
    dt_prev = dt;
    ++step;
  }
  trace.final_q = q;
  return trace;
}

Sym2 analytic_dP_dt_homogeneous(const LieAlgebraData& L, const Sym2& q) {
  const CurvatureBundle B = curvature_homogeneous(L, q);
  const Gamma G = frame_connection(L, q);

  FrameTensor<4> S;
  S.var = {Variance::Contravariant, Variance::Contravariant,
           Variance::Contravariant, Variance::Contravariant};
  for (int k = 0; k < 3; ++k)
    for (int l = 0; l < 3; ++l)
      for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j)
          S.set({k, l, i, j},
                B.P_up(k, l) * B.P_up(i, j) - B.P_up(i, k) * B.P_up(j, l));

  const FrameTensor<5> dS = frame_covariant_derivative(S, G);
  FrameTensor<3> Bt;
  Bt.var = {Variance::Contravariant, Variance::Contravariant,
            Variance::Contravariant};
  for (int k = 0; k < 3; ++k)
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) {
        double sum = 0.0;
        for (int l = 0; l < 3; ++l) sum += dS.get({l, k, l, i, j});
        Bt.set({k, i, j}, sum);
      }
  const FrameTensor<4> dB = frame_covariant_derivative(Bt, G);

  Mat3 rate;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) {
      double sum = 0.0;
      for (int k = 0; k < 3; ++k) sum += dB.get({k, k, i, j});
      rate(i, j) = sum - B.detP * B.g_inv(i, j) - B.H * B.P_up(i, j);
    }
  return Sym2(rate, Variance::Contravariant);
}

namespace {

Riem4 riem_rate_from_parts(const CurvatureBundle& B,
                           const std::function<double(int, int, int, int)>& ddh) {
  // ddh(a,b,j,k) = nabla_a nabla_b h_jk
  Riem4 rate;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      for (int k = 0; k < 3; ++k)
        for (int l = 0; l < 3; ++l) {
          double sum = ddh(i, l, j, k) + ddh(j, k, i, l) - ddh(i, k, j, l) -
                       ddh(j, l, i, k);
          for (int p = 0; p < 3; ++p)
            for (int q = 0; q < 3; ++q)
              sum += B.g_inv(p, q) * (B.Riem(i, j, k, p) * B.h(q, l) +
                                      B.Riem(i, j, p, l) * B.h(q, k));
          rate.at(i, j, k, l) = sum;
        }
  return rate;
}

}  // namespace

Riem4 analytic_dRiem_dt_homogeneous(const LieAlgebraData& L, const Sym2& q) {
  const CurvatureBundle B = curvature_homogeneous(L, q);
  const Gamma G = frame_connection(L, q);
  const FrameTensor<4> ddh =
      frame_covariant_derivative(frame_covariant_derivative(frame_from_sym2(B.h), G), G);
  return riem_rate_from_parts(B, [&](int a, int b, int j, int k) {
    return ddh.get({a, b, j, k});
  });
}

double analytic_dmu_dt(const CurvatureBundle& B) {
  return B.H * std::sqrt(B.g.det());
}

// --- grid backend ----------------------------------------------------------

GridRhs xcf_rhs_grid(const MetricGrid& m, int sign) {
  GridRhs rhs;
  rhs.bundles = bundles_at_nodes(m);
  rhs.dgdt.resize(m.spec.nodes());
  parallel_for(m.spec.nodes(), [&](std::int64_t lo, std::int64_t hi) {
    for (std::int64_t node = lo; node < hi; ++node)
      rhs.dgdt[node] =
          Sym2(2.0 * sign * rhs.bundles[node].h.m, Variance::Covariant);
  });
  return rhs;
}

namespace {

MetricGrid axpy(const MetricGrid& m, double a, const std::vector<Sym2>& k) {
  MetricGrid out(m.spec);
  parallel_for(m.spec.nodes(), [&](std::int64_t lo, std::int64_t hi) {
    for (std::int64_t node = lo; node < hi; ++node)
      out.g[node] = Sym2(m.g[node].m + a * k[node].m, Variance::Covariant);
  });
  return out;
}

}  // namespace

MetricGrid step_rk4_grid(const MetricGrid& m, double dt, int sign) {
  try {
    const auto k1 = xcf_rhs_grid(m, sign).dgdt;
    const auto k2 = xcf_rhs_grid(axpy(m, 0.5 * dt, k1), sign).dgdt;
    const auto k3 = xcf_rhs_grid(axpy(m, 0.5 * dt, k2), sign).dgdt;
    const auto k4 = xcf_rhs_grid(axpy(m, dt, k3), sign).dgdt;
    MetricGrid out(m.spec);
    for (std::int64_t node = 0; node < m.spec.nodes(); ++node) {
      out.g[node] = Sym2(m.g[node].m + dt / 6.0 *
                                           (k1[node].m + 2.0 * k2[node].m +
                                            2.0 * k3[node].m + k4[node].m),
                         Variance::Covariant);
      if (!out.g[node].m.allFinite() || !out.g[node].positive_definite())
        throw StepProducedInvalidMetric("step_rk4_grid: node metric invalid");
    }
    return out;
  } catch (const NonPositiveMetric&) {
    throw StepProducedInvalidMetric("step_rk4_grid: stage metric degenerated");
  }
}

double adapt_dt_grid(const MetricGrid& m,
                     const std::vector<CurvatureBundle>& bundles,
                     const FlowConfig& cfg, double dt_prev) {
  double rate = 0.0, symbol_max = 0.0;
  for (std::int64_t node = 0; node < m.spec.nodes(); ++node) {
    const CurvatureBundle& B = bundles[node];
    const Vec3 hr = generalized_eigenvalues(B.h, B.g);
    rate = std::max(rate, 2.0 * hr.cwiseAbs().maxCoeff());
    symbol_max = std::max(symbol_max, 2.0 * B.sec.cwiseAbs().maxCoeff());
  }
  double dt = cfg.dt_max;
  if (rate > 0.0) dt = std::min(dt, cfg.safety / rate);
  if (symbol_max > 0.0) {
    const double dx = m.spec.dx();
    dt = std::min(dt, dx * dx / (2.0 * symbol_max));
  }
  if (dt_prev > 0.0) dt = std::min(dt, cfg.max_growth * dt_prev);
  return dt;
}

FlowTrace run_flow_grid(const MetricGrid& m0, const FlowConfig& cfg,
                        MetricGrid* final_out) {
  if (cfg.t_end <= 0.0 || cfg.dt_init <= 0.0)
    throw InvalidParameter("run_flow: t_end and dt_init must be positive");
  FlowTrace trace;
  trace.etas = cfg.etas;
  MetricGrid m = m0;
  double t = 0.0, dt_prev = 0.0;
  long step = 0;

  auto bundles = bundles_at_nodes(m);
  Diag init = diag_of_bundles(bundles);
  const int sign = resolve_branch_sign(cfg.branch, init.sec_min, init.sec_max);
  const int init_class = sign_class(init);

  double last_recorded = -1.0;
  while (true) {
    const Diag d = diag_of_bundles(bundles);
    const std::string loc =
        d.argmin_detP >= 0 ? std::to_string(d.argmin_detP) : "grid";
    const auto ev = breakdown_check(d, init, init_class, t, cfg, loc);
    const bool done = ev.has_value() || t >= cfg.t_end - 1e-14;
    if (done || step % cfg.sample_every == 0) {
      if (t != last_recorded) {
        trace.samples.push_back(
            make_sample(t, dt_prev, d, functionals_grid(m, bundles, t, cfg.etas)));
        last_recorded = t;
      }
    }
    if (ev) {
      trace.breakdown = ev;
      break;
    }
    if (done) break;

    double dt = cfg.adaptive ? adapt_dt_grid(m, bundles, cfg, dt_prev)
                             : cfg.dt_init;
    dt = std::min(dt, cfg.t_end - t);
    int tries = 0;
    while (true) {
      try {
        m = step_rk4_grid(m, dt, sign);
        break;
      } catch (const StepProducedInvalidMetric&) {
        if (++tries > cfg.retry_budget) throw;
        dt *= 0.5;
      }
    }
    t += dt;
    dt_prev = dt;
    ++step;
    bundles = bundles_at_nodes(m);
  }
  if (final_out) *final_out = m;
  return trace;
}

TensorGrid analytic_dP_dt_grid(const MetricGrid& m,
                               const std::vector<CurvatureBundle>& bundles) {
  const auto jets = jet_at_nodes(m);
  const TensorGrid G = gamma_grid(m, jets);

  TensorGrid S(m.spec, {Variance::Contravariant, Variance::Contravariant,
                        Variance::Contravariant, Variance::Contravariant});
  parallel_for(m.spec.nodes(), [&](std::int64_t lo, std::int64_t hi) {
    for (std::int64_t node = lo; node < hi; ++node) {
      const Sym2& P = bundles[node].P_up;
      for (int k = 0; k < 3; ++k)
        for (int l = 0; l < 3; ++l)
          for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j)
              S.at(node, ((k * 3 + l) * 3 + i) * 3 + j) =
                  P(k, l) * P(i, j) - P(i, k) * P(j, l);
    }
  });
  const TensorGrid Bt = covariant_divergence(S, G, 1);  // nabla_l S^klij
  const TensorGrid C = covariant_divergence(Bt, G, 0);  // nabla_k (...)^kij

  TensorGrid rate(m.spec, {Variance::Contravariant, Variance::Contravariant});
  parallel_for(m.spec.nodes(), [&](std::int64_t lo, std::int64_t hi) {
    for (std::int64_t node = lo; node < hi; ++node) {
      const CurvatureBundle& B = bundles[node];
      for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j)
          rate.at(node, i * 3 + j) = C.get(node, i * 3 + j) -
                                     B.detP * B.g_inv(i, j) -
                                     B.H * B.P_up(i, j);
    }
  });
  return rate;
}

std::vector<Riem4> analytic_dRiem_dt_grid(
    const MetricGrid& m, const std::vector<CurvatureBundle>& bundles) {
  const auto jets = jet_at_nodes(m);
  const TensorGrid G = gamma_grid(m, jets);
  TensorGrid h(m.spec, {Variance::Covariant, Variance::Covariant});
  parallel_for(m.spec.nodes(), [&](std::int64_t lo, std::int64_t hi) {
    for (std::int64_t node = lo; node < hi; ++node)
      for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j)
          h.at(node, i * 3 + j) = bundles[node].h(i, j);
  });
  const TensorGrid ddh = covariant_derivative(covariant_derivative(h, G), G);

  std::vector<Riem4> out(m.spec.nodes());
  parallel_for(m.spec.nodes(), [&](std::int64_t lo, std::int64_t hi) {
    for (std::int64_t node = lo; node < hi; ++node) {
      out[node] = riem_rate_from_parts(
          bundles[node], [&](int a, int b, int j, int k) {
            return ddh.get(node, ((a * 3 + b) * 3 + j) * 3 + k);
          });
    }
  });
  return out;
}

}  // namespace xcf
