#include "xcf/trace_io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "json.hpp"

namespace xcf {

namespace {

using json = nlohmann::json;

std::string g17(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::string gshort(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%g", x);
  return buf;
}

json sample_json(const FlowSample& s) {
  json fs{{"t", s.functionals.t},
          {"volume", s.functionals.volume},
          {"P_integral", s.functionals.P_integral},
          {"detP_integral", s.functionals.detP_integral},
          {"J", s.functionals.J},
          {"volP", s.functionals.volP},
          {"mask_fraction", s.functionals.mask_fraction}};
  json etas = json::array();
  for (const auto& [eta, value] : s.functionals.eta_values)
    etas.push_back({{"eta", eta}, {"value", value}});
  fs["eta_values"] = etas;
  return json{{"t", s.t},
              {"dt", s.dt},
              {"a_min", s.a_min},
              {"a_max", s.a_max},
              {"b_min", s.b_min},
              {"b_max", s.b_max},
              {"c_min", s.c_min},
              {"c_max", s.c_max},
              {"detP_min", s.detP_min},
              {"detP_max", s.detP_max},
              {"H_min", s.H_min},
              {"H_max", s.H_max},
              {"functionals", fs}};
}

}  // namespace

std::uint64_t config_hash(const std::string& config_json) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : config_json) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string trace_csv(const FlowTrace& trace, const std::string& config_json,
                      std::uint64_t seed) {
  std::ostringstream os;
  char hex[32];
  std::snprintf(hex, sizeof hex, "%016llx",
                static_cast<unsigned long long>(config_hash(config_json)));
  os << "# xcflow " << kVersion << "\n";
  os << "# config_hash " << hex << "\n";
  os << "# seed " << seed << "\n";
  if (trace.breakdown) {
    const BreakdownEvent& e = *trace.breakdown;
    os << "# breakdown " << to_string(e.reason) << " t=" << g17(e.time)
       << " location=" << e.location << " detP=" << g17(e.detP_at_argmin)
       << " H=" << g17(e.H_at_argmin) << "\n";
  }
  os << "t,dt,a_min,a_max,b_min,b_max,c_min,c_max,detP_min,detP_max,H_min,"
        "H_max,volume,P_integral,detP_integral,J,volP,mask_fraction";
  for (double eta : trace.etas) os << ",eta_" << gshort(eta);
  os << "\n";
  for (const FlowSample& s : trace.samples) {
    os << g17(s.t) << ',' << g17(s.dt) << ',' << g17(s.a_min) << ','
       << g17(s.a_max) << ',' << g17(s.b_min) << ',' << g17(s.b_max) << ','
       << g17(s.c_min) << ',' << g17(s.c_max) << ',' << g17(s.detP_min) << ','
       << g17(s.detP_max) << ',' << g17(s.H_min) << ',' << g17(s.H_max) << ','
       << g17(s.functionals.volume) << ',' << g17(s.functionals.P_integral)
       << ',' << g17(s.functionals.detP_integral) << ','
       << g17(s.functionals.J) << ',' << g17(s.functionals.volP) << ','
       << g17(s.functionals.mask_fraction);
    for (const auto& [eta, value] : s.functionals.eta_values)
      os << ',' << g17(value);
    os << "\n";
  }
  return os.str();
}

std::string trace_json(const FlowTrace& trace, const std::string& config_json,
                       std::uint64_t seed) {
  json j{{"version", kVersion},
         {"config_hash", config_hash(config_json)},
         {"seed", seed},
         {"etas", trace.etas}};
  if (!config_json.empty()) j["config"] = json::parse(config_json);
  json samples = json::array();
  for (const FlowSample& s : trace.samples) samples.push_back(sample_json(s));
  j["samples"] = samples;
  if (trace.breakdown) {
    const BreakdownEvent& e = *trace.breakdown;
    j["breakdown"] = {{"reason", to_string(e.reason)},
                      {"time", e.time},
                      {"location", e.location},
                      {"detP_at_argmin", e.detP_at_argmin},
                      {"H_at_argmin", e.H_at_argmin}};
  }
  return j.dump(2);
}

std::string report_json(const VerificationReport& report) {
  json j{{"version", kVersion},
         {"environment", report.environment},
         {"all_pass", report.all_pass}};
  if (!report.config_echo.empty()) j["config"] = json::parse(report.config_echo);
  json checks = json::array();
  for (const CheckResult& c : report.checks) {
    json cj{{"id", c.id},
            {"backend", c.backend},
            {"residual", c.residual},
            {"tolerance", c.tolerance},
            {"pass", c.pass},
            {"note", c.note},
            {"metadata", c.metadata}};
    if (c.order) cj["order"] = *c.order;
    if (c.declared_order) cj["declared_order"] = *c.declared_order;
    checks.push_back(cj);
  }
  j["checks"] = checks;
  return j.dump(2);
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw Error("cannot open for writing: " + path);
  f << content;
  if (!f) throw Error("write failed: " + path);
}

std::string read_text_file(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw Error("cannot open: " + path);
  std::ostringstream os;
  os << f.rdbuf();
  return os.str();
}

}  // namespace xcf
