#pragma once

#include <cstdint>
#include <string>

#include "xcf/flow.hpp"
#include "xcf/verify.hpp"

namespace xcf {

inline constexpr const char* kVersion = "0.1.0";

/// FNV-1a over the serialized configuration; embedded in every output
/// header so experiment records are diffable.
std::uint64_t config_hash(const std::string& config_json);

/// CSV with '#'-prefixed header lines (version, config hash, seed) and a
/// stable column contract: the FlowSample fields in declaration order, the
/// FunctionalSample fields, then one eta_<value> column per requested eta.
/// All values printed with %.17g for bit-faithful round trips.
std::string trace_csv(const FlowTrace& trace, const std::string& config_json,
                      std::uint64_t seed);

std::string trace_json(const FlowTrace& trace, const std::string& config_json,
                       std::uint64_t seed);

std::string report_json(const VerificationReport& report);

void write_text_file(const std::string& path, const std::string& content);
std::string read_text_file(const std::string& path);

}  // namespace xcf
