#pragma once

#include <optional>
#include <string>
#include <variant>

#include "xcf/functionals.hpp"

namespace xcf {

enum class Branch { Negative, Positive, Auto };

struct FlowConfig {
  Branch branch = Branch::Auto;
  double t_end = 1.0;
  double dt_init = 1e-3;
  double dt_max = 1e-2;
  bool adaptive = true;
  double safety = 0.1;         // fraction of the local curvature timescale
  double max_growth = 1.5;     // dt may not grow faster than this per step
  int sample_every = 10;       // trace cadence in accepted steps
  int retry_budget = 12;       // dt halvings before a step error propagates
  double detP_collapse_factor = 1e-8;
  double H_blowup_factor = 1e6;
  std::vector<double> etas = {0.5};  // eta-functionals recorded in the trace
};

enum class BreakdownReason {
  DetPBelowThreshold,
  CurvatureSignChange,
  HExceeded,
  NonFinite,
};

std::string to_string(BreakdownReason r);

struct BreakdownEvent {
  BreakdownReason reason;
  double time = 0.0;
  std::string location;  // node index or "homogeneous"
  double detP_at_argmin = 0.0;
  double H_at_argmin = 0.0;  // the §6-style diagnostic pair
};

struct FlowSample {
  double t = 0.0;
  double dt = 0.0;
  double a_min = 0.0, a_max = 0.0;  // per-eigenvalue extrema over the domain
  double b_min = 0.0, b_max = 0.0;
  double c_min = 0.0, c_max = 0.0;
  double detP_min = 0.0, detP_max = 0.0;
  double H_min = 0.0, H_max = 0.0;
  FunctionalSample functionals;
};

struct FlowTrace {
  std::vector<FlowSample> samples;
  std::optional<BreakdownEvent> breakdown;
  std::vector<double> etas;
  std::optional<Sym2> final_q;  // homogeneous backend: the last valid metric
};

/// Sign of dg/dt = sign * 2h: +1 on the negative-curvature branch, -1 on
/// the positive one. Auto samples the (a,b,c) sign class of the initial
/// data and throws MixedCurvatureSign when it is not uniform.
int resolve_branch_sign(Branch branch, const Vec3& sec_min, const Vec3& sec_max);

// --- homogeneous backend ---------------------------------------------------

/// dq/dt = sign * 2 h(q).
Sym2 xcf_rhs_homogeneous(const LieAlgebraData& L, const Sym2& q, int sign);

/// One classical RK4 step; curvature recomputed at every stage. Throws
/// StepProducedInvalidMetric when any stage or the result degenerates.
Sym2 step_rk4_homogeneous(const LieAlgebraData& L, const Sym2& q, double dt,
                          int sign);

FlowTrace run_flow_homogeneous(const LieAlgebraData& L, const Sym2& q0,
                               const FlowConfig& config);

/// Analytic evolution of the Einstein tensor:
///   dP^ij/dt = nabla_k nabla_l (P^kl P^ij - P^ik P^jl) - det P g^ij - H P^ij.
Sym2 analytic_dP_dt_homogeneous(const LieAlgebraData& L, const Sym2& q);

/// Analytic evolution of the Riemann tensor under dg/dt = 2h.
Riem4 analytic_dRiem_dt_homogeneous(const LieAlgebraData& L, const Sym2& q);

/// Rate of the volume density: H sqrt(det g).
double analytic_dmu_dt(const CurvatureBundle& B);

// --- grid backend ----------------------------------------------------------

struct GridRhs {
  std::vector<Sym2> dgdt;  // per node
  std::vector<CurvatureBundle> bundles;
};

GridRhs xcf_rhs_grid(const MetricGrid& m, int sign);

MetricGrid step_rk4_grid(const MetricGrid& m, double dt, int sign);

/// When `final_out` is given it receives the last valid metric field.
FlowTrace run_flow_grid(const MetricGrid& m0, const FlowConfig& config,
                        MetricGrid* final_out = nullptr);

/// Per-node dP^ij/dt field (rank 2, contravariant).
TensorGrid analytic_dP_dt_grid(const MetricGrid& m,
                               const std::vector<CurvatureBundle>& bundles);

/// Per-node Riemann rate.
std::vector<Riem4> analytic_dRiem_dt_grid(const MetricGrid& m,
                                          const std::vector<CurvatureBundle>& bundles);

/// Step-size controller: safety times the inverse of the fastest relative
/// metric rate, capped by dt_max, the growth factor, and (on grids) the
/// parabolic bound dx^2 / (2 max symbol eigenvalue).
double adapt_dt_homogeneous(const LieAlgebraData& L, const Sym2& q,
                            const FlowConfig& cfg, double dt_prev);
double adapt_dt_grid(const MetricGrid& m,
                     const std::vector<CurvatureBundle>& bundles,
                     const FlowConfig& cfg, double dt_prev);

}  // namespace xcf
