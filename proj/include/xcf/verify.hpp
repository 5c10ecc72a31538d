#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "xcf/presets.hpp"

namespace xcf {

struct CheckResult {
  std::string id;
  std::string backend;  // "algebraic", "homogeneous", "grid", or combinations
  double residual = 0.0;
  double tolerance = 0.0;
  std::optional<double> order;           // fitted slope, when applicable
  std::optional<double> declared_order;  // pass needs order >= declared - 0.2
  bool pass = false;
  std::map<std::string, double> metadata;  // N, dt, seed, mask_fraction, ...
  std::string note;
};

struct VerifySettings {
  std::uint64_t seed = 20240801;
  std::vector<int> grid_ns = {16, 32, 64};
  int stencil_order = 4;
  double eps = 0.03;  // amplitude of the random periodic metrics
  int ensemble = 2000;
  std::vector<double> temporal_dts = {1e-2, 5e-3, 2.5e-3};
  /// Id of a single check whose formula receives its documented sign flip
  /// (suite self-test: that check must then fail). Empty = no mutation.
  std::string mutate;
  std::vector<std::string> only;  // run only these checks (empty = all)
};

struct VerificationReport {
  std::vector<CheckResult> checks;
  std::string environment;
  std::string config_echo;
  bool all_pass = false;
};

/// Registered check ids, in execution order.
const std::vector<std::string>& check_ids();

/// Runs every registered check (or the `only` subset). Deterministic for a
/// fixed seed; failures are aggregated, never thrown.
VerificationReport run_suite(const VerifySettings& settings);

/// Plain-text summary table.
std::string report_table(const VerificationReport& report);

}  // namespace xcf
