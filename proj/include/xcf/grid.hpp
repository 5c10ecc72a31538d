#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "xcf/curvature.hpp"

namespace xcf {

/// Global width for data-parallel node loops (default: hardware threads).
void set_threads(int n);
int threads();
void parallel_for(std::int64_t n, const std::function<void(std::int64_t, std::int64_t)>& chunk_fn);

/// Periodic N^3 grid over [0, 2pi)^3.
struct GridSpec {
  int n = 32;
  int stencil_order = 4;  // one of 2, 4, 6

  GridSpec() = default;
  GridSpec(int n_, int order_);

  double dx() const { return 2.0 * M_PI / n; }
  std::int64_t nodes() const { return static_cast<std::int64_t>(n) * n * n; }
  std::int64_t node(int ix, int iy, int iz) const {
    return (static_cast<std::int64_t>(ix) * n + iy) * n + iz;
  }
  Vec3 coords(std::int64_t node) const;
  bool operator==(const GridSpec&) const = default;
};

struct ScalarGrid {
  GridSpec spec;
  std::vector<double> v;

  ScalarGrid() = default;
  explicit ScalarGrid(const GridSpec& s) : spec(s), v(s.nodes(), 0.0) {}
};

/// Dense rank-r tensor field; node-major storage, component index is the
/// base-3 flattening of the tensor indices.
struct TensorGrid {
  GridSpec spec;
  int rank = 0;
  std::vector<Variance> var;
  std::vector<double> v;

  TensorGrid() = default;
  TensorGrid(const GridSpec& s, std::vector<Variance> variances);

  int ncomp() const { return static_cast<int>(v.size() / spec.nodes()); }
  double& at(std::int64_t node, int comp) { return v[node * ncomp() + comp]; }
  double get(std::int64_t node, int comp) const { return v[node * ncomp() + comp]; }
};

struct MetricGrid {
  GridSpec spec;
  std::vector<Sym2> g;  // positive definite at every node

  MetricGrid() = default;
  explicit MetricGrid(const GridSpec& s) : spec(s), g(s.nodes()) {}
};

// --- periodic central differences -----------------------------------------

/// d/dx_axis of a per-component field at the spec's stencil order.
ScalarGrid deriv1(const ScalarGrid& f, int axis);
ScalarGrid deriv2(const ScalarGrid& f, int axis);
TensorGrid deriv1(const TensorGrid& f, int axis);

/// Metric 2-jet at every node by central differences with periodic wrap.
std::vector<MetricJet2> jet_at_nodes(const MetricGrid& m);

/// Christoffel field Gamma^k_ij (rank 3: contra, cov, cov).
TensorGrid gamma_grid(const MetricGrid& m, const std::vector<MetricJet2>& jets);

/// d_l Gamma^k_ij at every node, from stencil differentiation of the Gamma
/// field (not from analytic expansion in ddg).
std::vector<GammaJet> gamma_jet_at_nodes(const MetricGrid& m,
                                         const TensorGrid& gammas);

/// Full curvature bundle field. Differentiates the Gamma field at the
/// stencil order.
std::vector<CurvatureBundle> bundles_at_nodes(const MetricGrid& m);

/// nabla T with the (covariant) derivative index prepended.
TensorGrid covariant_derivative(const TensorGrid& T, const TensorGrid& gammas);

/// Sum_m nabla_m T^{... m ...} with the derivative index contracted against
/// the contravariant slot `slot`, without materializing the rank+1 field.
TensorGrid covariant_divergence(const TensorGrid& T, const TensorGrid& gammas,
                                int slot);

/// Sum_nodes f sqrt(det g) dx^3; fixed summation order for reproducibility.
double integrate(const ScalarGrid& f, const MetricGrid& m);

/// | integral of nabla_i W^i dmu | for a contravariant vector field W.
double divergence_residual(const TensorGrid& W, const MetricGrid& m);

// --- synthetic analytic fields ---------------------------------------------

struct TrigMode {
  Mat3 amplitude;  // symmetric
  int k[3];
  double phase;
};

/// g(x) = delta + eps * sum_m A_m cos(k_m . x + phi_m), with closed-form
/// first and second derivatives for discretization-free oracles.
struct TrigMetric {
  double eps = 0.05;
  std::vector<TrigMode> modes;

  Sym2 eval(const Vec3& x) const;
  MetricJet2 analytic_jet(const Vec3& x) const;

  /// Deterministic seeded generator; retries until the sample is positive
  /// definite on a probe grid.
  static TrigMetric random(std::uint64_t seed, double eps = 0.05,
                           int nmodes = 4, int max_freq = 2);
};

MetricGrid sample(const TrigMetric& tm, const GridSpec& spec);

/// Smooth periodic vector field with closed-form derivatives.
struct TrigVectorField {
  std::vector<TrigMode> modes;  // row 0 of amplitude used per component

  Vec3 eval(const Vec3& x) const;
  static TrigVectorField random(std::uint64_t seed, int nmodes = 4,
                                int max_freq = 2);
};

TensorGrid sample(const TrigVectorField& tv, const GridSpec& spec);

// --- snapshot serialization ------------------------------------------------
// Binary layout: magic "XCFGRID1", int32 N, int32 stencil order, float64
// time, then row-major node records of 6 little-endian float64 metric
// components (g11, g22, g33, g23, g13, g12).

void write_snapshot(const std::string& path, const MetricGrid& m, double time);
MetricGrid read_snapshot(const std::string& path, double* time_out = nullptr);

}  // namespace xcf
