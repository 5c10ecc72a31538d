#include "xcf/presets.hpp"

#include <cmath>
#include <regex>

namespace xcf {

namespace {

void set_bracket(LieAlgebraData& L, int i, int j, int k, double c) {
  L.C[k](i, j) = c;
  L.C[k](j, i) = -c;
}

}  // namespace

PresetId PresetId::parse(const std::string& text_in) {
  static const std::regex plain(R"(^\s*(nil|sol|abelian_flat|su2_round)\s*$)");
  static const std::regex one_arg(R"(^\s*su2_berger\s*\(\s*([^,()]+)\s*\)\s*$)");
  static const std::regex two_arg(
      R"(^\s*hyperbolic_solvable\s*\(\s*([^,()]+)\s*,\s*([^,()]+)\s*\)\s*$)");
  // "name:a,b" is accepted as shorthand for "name(a,b)".
  std::string text = text_in;
  if (const auto colon = text.find(':'); colon != std::string::npos)
    text = text.substr(0, colon) + "(" + text.substr(colon + 1) + ")";
  std::smatch m;
  PresetId id;
  try {
    if (std::regex_match(text, m, plain)) {
      const std::string& name = m[1];
      id.kind = name == "nil"   ? Kind::Nil
                : name == "sol" ? Kind::Sol
                : name == "abelian_flat" ? Kind::AbelianFlat
                                         : Kind::Su2Round;
      return id;
    }
    if (std::regex_match(text, m, one_arg)) {
      id.kind = Kind::Su2Berger;
      id.lambda = std::stod(m[1]);
      return id;
    }
    if (std::regex_match(text, m, two_arg)) {
      id.kind = Kind::HyperbolicSolvable;
      id.alpha = std::stod(m[1]);
      id.beta = std::stod(m[2]);
      return id;
    }
  } catch (const std::exception&) {
    throw InvalidParameter("preset: malformed numeric parameter in '" + text + "'");
  }
  throw InvalidParameter("preset: unrecognized id '" + text + "'");
}

std::string PresetId::name() const {
  char buf[96];
  switch (kind) {
    case Kind::Nil: return "nil";
    case Kind::Sol: return "sol";
    case Kind::AbelianFlat: return "abelian_flat";
    case Kind::Su2Round: return "su2_round";
    case Kind::Su2Berger:
      std::snprintf(buf, sizeof buf, "su2_berger(%g)", lambda);
      return buf;
    default:
      std::snprintf(buf, sizeof buf, "hyperbolic_solvable(%g,%g)", alpha, beta);
      return buf;
  }
}

std::pair<LieAlgebraData, HomogeneousState> build_preset(const PresetId& id) {
  LieAlgebraData L{};
  HomogeneousState st;
  switch (id.kind) {
    case PresetId::Kind::HyperbolicSolvable:
      if (!(id.alpha > 0.0) || !(id.beta > 0.0))
        throw InvalidParameter("hyperbolic_solvable: alpha, beta must be > 0");
      set_bracket(L, 0, 1, 1, id.alpha);
      set_bracket(L, 0, 2, 2, id.beta);
      break;
    case PresetId::Kind::Nil:
      set_bracket(L, 0, 1, 2, 1.0);
      break;
    case PresetId::Kind::Su2Round:
    case PresetId::Kind::Su2Berger:
      set_bracket(L, 0, 1, 2, 2.0);
      set_bracket(L, 1, 2, 0, 2.0);
      set_bracket(L, 2, 0, 1, 2.0);
      if (id.kind == PresetId::Kind::Su2Berger) {
        if (!(id.lambda > 0.0))
          throw InvalidParameter("su2_berger: lambda must be > 0");
        Mat3 q = Mat3::Identity();
        q(0, 0) = id.lambda;
        st.q = Sym2(std::cbrt(1.0 / id.lambda) * q, Variance::Covariant);
      }
      break;
    case PresetId::Kind::Sol:
      set_bracket(L, 2, 0, 0, 1.0);
      set_bracket(L, 2, 1, 1, -1.0);
      break;
    case PresetId::Kind::AbelianFlat:
      break;
  }
  if (!validate_jacobi(L))
    throw InvalidParameter("preset: structure constants violate Jacobi");
  if (id.kind == PresetId::Kind::HyperbolicSolvable) {
    const CurvatureBundle B = curvature_homogeneous(L, st.q);
    if (!(B.sec(0) > 0.0))
      throw InvalidParameter(
          "hyperbolic_solvable: sectional curvature not uniformly negative");
  }
  return {L, st};
}

std::vector<SweepResult> sweep_family(const PresetId& base,
                                      const std::string& parameter,
                                      const std::vector<double>& values,
                                      const FlowConfig& config) {
  std::vector<SweepResult> out;
  out.reserve(values.size());
  for (double v : values) {
    SweepResult r;
    r.id = base;
    if (parameter == "alpha") {
      r.id.alpha = v;
    } else if (parameter == "beta") {
      r.id.beta = v;
    } else if (parameter == "alphabeta") {
      r.id.alpha = r.id.beta = v;
    } else if (parameter == "lambda") {
      r.id.lambda = v;
    } else {
      throw InvalidParameter("sweep_family: unknown parameter '" + parameter +
                             "'");
    }
    try {
      auto [L, st] = build_preset(r.id);
      r.trace = run_flow_homogeneous(L, st.q, config);
      for (const FlowSample& s : r.trace.samples)
        r.pinching.push_back(s.c_max / s.a_min);
    } catch (const Error& e) {
      r.error = e.what();
    }
    out.push_back(std::move(r));
  }
  return out;
}

}  // namespace xcf
