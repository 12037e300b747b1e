#include "lbmh/presets.hpp"

#include <cmath>
#include <cstdio>
#include <string>

#include "lbmh/error.hpp"

namespace lbmh {

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t");
  return std::string(s.substr(b, e - b + 1));
}

std::string format_number(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", v);
  return buf;
}

}  // namespace

std::string PresetSpec::label() const {
  if (args.empty()) return kind;
  std::string out = kind + "(";
  for (std::size_t i = 0; i < args.size(); ++i) out += (i ? ";" : "") + format_number(args[i]);
  return out + ")";
}

PresetSpec parse_preset(std::string_view text) {
  const std::string s = trim(text);
  PresetSpec spec;
  const auto open = s.find('(');
  if (open == std::string::npos) {
    spec.kind = s;
  } else {
    if (s.back() != ')') throw ConfigError("malformed preset '" + s + "'");
    spec.kind = trim(std::string_view(s).substr(0, open));
    const std::string inner = s.substr(open + 1, s.size() - open - 2);
    std::size_t start = 0;
    while (start <= inner.size()) {
      const auto comma = inner.find_first_of(",;", start);
      const std::string tok = trim(std::string_view(inner).substr(start, comma - start));
      if (!tok.empty()) {
        try {
          std::size_t used = 0;
          spec.args.push_back(std::stod(tok, &used));
          if (used != tok.size()) throw std::invalid_argument(tok);
        } catch (const std::exception&) {
          throw ConfigError("bad numeric argument '" + tok + "' in preset '" + s + "'");
        }
      }
      if (comma == std::string::npos) break;
      start = comma + 1;
    }
  }
  static const char* known[] = {"mala",        "barker",         "barker-rademacher", "barker-bimodal",
                                "three-point", "gamma-gaussian", "rwm"};
  bool ok = false;
  for (const char* k : known) ok = ok || spec.kind == k;
  if (!ok) throw ConfigError("unknown preset '" + spec.kind + "'");
  return spec;
}

std::vector<PresetSpec> parse_preset_list(std::string_view text) {
  std::vector<PresetSpec> out;
  int depth = 0;
  std::size_t start = 0;
  for (std::size_t i = 0; i <= text.size(); ++i) {
    if (i == text.size() || (text[i] == ',' && depth == 0)) {
      const std::string tok = trim(text.substr(start, i - start));
      if (!tok.empty()) out.push_back(parse_preset(tok));
      start = i + 1;
    } else if (text[i] == '(') {
      ++depth;
    } else if (text[i] == ')') {
      --depth;
    }
  }
  if (out.empty()) throw ConfigError("empty preset list");
  return out;
}

Preset resolve_preset(const PresetSpec& spec, const std::optional<TargetFunctionals<double>>& functionals) {
  auto arg = [&](std::size_t i, double fallback) { return i < spec.args.size() ? spec.args[i] : fallback; };
  const std::string& k = spec.kind;
  const std::size_t max_args = k == "three-point" ? 2 : (k == "barker-bimodal" || k == "gamma-gaussian") ? 1 : 0;
  if (spec.args.size() > max_args) throw ConfigError("too many parameters for preset '" + k + "'");
  if (k == "mala") {
    return {"mala", BalancingFunction::sqrt(), make_gaussian_noise(), ProposalPath::gamma_gaussian};
  }
  if (k == "barker") {
    return {"barker", BalancingFunction::barker(), make_gaussian_noise(), ProposalPath::barker_flip};
  }
  if (k == "barker-rademacher") {
    return {"barker-rademacher", BalancingFunction::barker(), make_rademacher(), ProposalPath::barker_flip};
  }
  if (k == "barker-bimodal") {
    const double sb = arg(0, 0.1);
    return {"barker-bimodal(" + format_number(sb) + ")", BalancingFunction::barker(), make_bimodal(sb),
            ProposalPath::barker_flip};
  }
  if (k == "gamma-gaussian") {
    const double gamma = arg(0, 0.0);
    return {"gamma-gaussian(" + format_number(gamma) + ")", BalancingFunction::g_gamma(gamma),
            make_gaussian_noise(), ProposalPath::gamma_gaussian};
  }
  if (k == "three-point") {
    const double a = arg(0, 2.0);
    double gfrak = 0.0;
    std::string label = "three-point(" + format_number(a);
    if (spec.args.size() >= 2) {
      gfrak = spec.args[1];
      label += ";" + format_number(gfrak);
    } else {
      if (!functionals) throw ConfigError("three-point without g''(1) needs target functionals");
      gfrak = optimal_gfrak_joint(*functionals, a);
    }
    label += ")";
    if (gfrak < -0.25) {
      throw ConfigError("g''(1) = " + format_number(gfrak) + " < -1/4 is outside the g_gamma family");
    }
    return {label, BalancingFunction::g_gamma(std::sqrt(gfrak + 0.25)), make_three_point(a),
            ProposalPath::discrete_atoms};
  }
  if (k == "rwm") {
    Preset p{"rwm", BalancingFunction::sqrt(), make_gaussian_noise(), ProposalPath::rwm};
    p.locally_balanced = false;
    return p;
  }
  throw ConfigError("unknown preset '" + k + "'");
}

double preset_theta_squared(const Preset& preset, const TargetFunctionals<double>& f) {
  if (!preset.locally_balanced) throw ConfigError(preset.label + " is not a locally-balanced design");
  const auto gfrak = preset.g.gfrak();
  if (!gfrak) throw ConfigError("non-smooth balancing function");
  return theta_squared(f, preset.mu.mu4(), preset.mu.mu6(), *gfrak);
}

}  // namespace lbmh
