#pragma once

#include <string>
#include <utility>
#include <vector>

#include "xcf/flow.hpp"

namespace xcf {

/// Curated left-invariant geometries. Parameter ranges: alpha, beta > 0 for
/// the solvable family; lambda > 0 for the Berger family.
struct PresetId {
  enum class Kind {
    HyperbolicSolvable,  // [e1,e2] = alpha e2, [e1,e3] = beta e3
    Nil,                 // [e1,e2] = e3
    Su2Round,            // [e_i,e_j] = 2 eps_ijk e_k, round metric
    Su2Berger,           // su(2) with q = lambda-squashed, volume-normalized
    Sol,                 // [e3,e1] = e1, [e3,e2] = -e2
    AbelianFlat,         // abelian
  };

  Kind kind = Kind::Nil;
  double alpha = 1.0;
  double beta = 1.0;
  double lambda = 1.0;

  /// Accepts "nil", "sol", "abelian_flat", "su2_round",
  /// "hyperbolic_solvable(a,b)", "su2_berger(l)". Throws InvalidParameter.
  static PresetId parse(const std::string& text);
  std::string name() const;
};

/// Structure constants and initial state for a preset. The result is
/// Jacobi-validated; the solvable family additionally asserts uniformly
/// negative sectional curvature. Throws InvalidParameter.
std::pair<LieAlgebraData, HomogeneousState> build_preset(const PresetId& id);

struct SweepResult {
  PresetId id;
  FlowTrace trace;
  std::string error;             // empty on success; sweep continues on error
  std::vector<double> pinching;  // max(a,b,c)/min(a,b,c) per recorded sample
};

/// Runs the flow across a one-parameter slice of a preset family.
/// `parameter` is one of "alpha", "beta", "alphabeta" (locks alpha = beta),
/// or "lambda".
std::vector<SweepResult> sweep_family(const PresetId& base,
                                      const std::string& parameter,
                                      const std::vector<double>& values,
                                      const FlowConfig& config);

}  // namespace xcf
