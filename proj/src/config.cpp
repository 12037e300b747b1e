#include "lbmh/config.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>

#include "lbmh/error.hpp"

namespace lbmh {

namespace {

std::pair<std::string, std::optional<double>> split_param(std::string_view text) {
  const auto colon = text.find(':');
  std::string name(text.substr(0, colon));
  if (colon == std::string_view::npos) return {name, std::nullopt};
  const std::string arg(text.substr(colon + 1));
  try {
    std::size_t used = 0;
    const double v = std::stod(arg, &used);
    if (used != arg.size()) throw std::invalid_argument(arg);
    return {name, v};
  } catch (const std::exception&) {
    throw ConfigError("bad numeric parameter in '" + std::string(text) + "'");
  }
}

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", v);
  return buf;
}

template <typename T>
std::vector<T> parse_list(std::string_view text) {
  std::vector<T> out;
  std::size_t start = 0;
  while (start <= text.size()) {
    const auto comma = text.find(',', start);
    const std::string tok(text.substr(start, comma == std::string_view::npos ? text.size() - start : comma - start));
    if (!tok.empty()) {
      try {
        std::size_t used = 0;
        if constexpr (std::is_same_v<T, int>) {
          out.push_back(std::stoi(tok, &used));
        } else {
          out.push_back(std::stod(tok, &used));
        }
        if (used != tok.size()) throw std::invalid_argument(tok);
      } catch (const std::exception&) {
        throw ConfigError("bad list entry '" + tok + "'");
      }
    }
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  if (out.empty()) throw ConfigError("empty list '" + std::string(text) + "'");
  return out;
}

}  // namespace

std::string TargetSpec::describe() const {
  switch (kind) {
    case Kind::gaussian:
      return "gaussian";
    case Kind::hyperbolic:
      return "hyperbolic:" + num(delta_sq);
    case Kind::correlated:
      return std::string(structure == CovStructure::ar1 ? "ar1:" : "equicorrelated:") + num(rho);
    case Kind::poisson:
      return "poisson:" + num(sigma_eta);
  }
  return {};
}

ProductFactor TargetSpec::factor() const {
  if (kind == Kind::gaussian) return make_gaussian_factor();
  if (kind == Kind::hyperbolic) return make_hyperbolic_factor(delta_sq);
  throw ConfigError("target " + describe() + " is not a product target");
}

TargetModel TargetSpec::build(int n, std::uint64_t data_seed) const {
  switch (kind) {
    case Kind::gaussian:
    case Kind::hyperbolic:
      return TargetModel::product(factor(), n);
    case Kind::correlated:
      return TargetModel::correlated_gaussian(CovSpec(n, structure, rho));
    case Kind::poisson:
      return TargetModel::poisson_re(poisson_generate(data_seed, sigma_eta));
  }
  throw ConfigError("unknown target kind");
}

TargetSpec parse_target(std::string_view text) {
  const auto [name, arg] = split_param(text);
  TargetSpec t;
  if (name == "gaussian") {
    if (arg) throw ConfigError("gaussian target takes no parameter");
    t.kind = TargetSpec::Kind::gaussian;
  } else if (name == "hyperbolic") {
    t.kind = TargetSpec::Kind::hyperbolic;
    t.delta_sq = arg.value_or(0.1);
    if (!(t.delta_sq > 0.0)) throw ConfigError("hyperbolic delta^2 must be positive");
  } else if (name == "ar1" || name == "equicorrelated") {
    t.kind = TargetSpec::Kind::correlated;
    t.structure = name == "ar1" ? CovStructure::ar1 : CovStructure::equicorrelated;
    t.rho = arg.value_or(0.99);
    if (!(std::abs(t.rho) < 1.0)) throw ConfigError("correlation must lie in (-1, 1)");
  } else if (name == "poisson") {
    t.kind = TargetSpec::Kind::poisson;
    t.sigma_eta = arg.value_or(1.0);
    if (!(t.sigma_eta > 0.0)) throw ConfigError("sigma_eta must be positive");
  } else {
    throw ConfigError("unknown target '" + std::string(text) + "'");
  }
  return t;
}

TargetSpec target_from_json(const nlohmann::json& j) {
  if (j.is_string()) return parse_target(j.get<std::string>());
  if (!j.is_object() || !j.contains("kind")) throw ConfigError("target must be a string or an object with 'kind'");
  try {
    const std::string kind = j.at("kind").get<std::string>();
    std::string text = kind;
    for (const char* key : {"delta_sq", "rho", "sigma_eta"}) {
      if (j.contains(key)) text += ":" + num(j.at(key).get<double>());
    }
    return parse_target(text);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("bad target object: ") + e.what());
  }
}

BalancingFunction parse_balancing(std::string_view text) {
  const auto [name, arg] = split_param(text);
  if (name == "sqrt") return BalancingFunction::sqrt();
  if (name == "barker") return BalancingFunction::barker();
  if (name == "min") return BalancingFunction::min();
  if (name == "max") return BalancingFunction::max();
  if (name == "g_gamma") {
    if (!arg) throw ConfigError("g_gamma needs a parameter, e.g. g_gamma:0.5");
    return BalancingFunction::g_gamma(*arg);
  }
  throw ConfigError("unknown balancing function '" + std::string(text) + "'");
}

NoiseDistribution parse_noise(std::string_view text) {
  const auto [name, arg] = split_param(text);
  if (name == "gaussian") return make_gaussian_noise();
  if (name == "rademacher") return make_rademacher();
  if (name == "bimodal") return make_bimodal(arg.value_or(0.1));
  if (name == "three_point") {
    if (!arg) throw ConfigError("three_point needs a parameter, e.g. three_point:2");
    return make_three_point(*arg);
  }
  throw ConfigError("unknown noise distribution '" + std::string(text) + "'");
}

std::vector<int> parse_int_list(std::string_view text) { return parse_list<int>(text); }
std::vector<double> parse_double_list(std::string_view text) { return parse_list<double>(text); }

void apply_json(RunConfig& cfg, const nlohmann::json& j) {
  if (!j.is_object()) throw ConfigError("config must be a JSON object");
  static const std::set<std::string> known = {
      "target", "presets", "n_grid", "seed", "samples", "threads", "out", "full", "ell", "sigma",
      "iterations", "reps", "mu4", "golden_iterations", "scenarios", "fixed_data", "poisson_data_csv"};
  for (const auto& [key, value] : j.items()) {
    if (!known.count(key)) throw ConfigError("unknown config key '" + key + "'");
  }
  try {
    if (j.contains("target")) {
      const auto& t = j.at("target");
      cfg.target = t.is_string() ? t.get<std::string>() : target_from_json(t).describe();
    }
    if (j.contains("presets")) {
      const auto& p = j.at("presets");
      if (p.is_string()) {
        cfg.presets = p.get<std::string>();
      } else {
        std::string joined;
        for (const auto& item : p) joined += (joined.empty() ? "" : ",") + item.get<std::string>();
        cfg.presets = joined;
      }
    }
    if (j.contains("n_grid")) cfg.n_grid = j.at("n_grid").get<std::vector<int>>();
    if (j.contains("seed")) cfg.seed = j.at("seed").get<std::uint64_t>();
    if (j.contains("samples")) cfg.samples = j.at("samples").get<long>();
    if (j.contains("threads")) cfg.threads = j.at("threads").get<unsigned>();
    if (j.contains("out")) cfg.out = j.at("out").get<std::string>();
    if (j.contains("full")) cfg.full = j.at("full").get<bool>();
    if (j.contains("ell")) cfg.ell = j.at("ell").get<double>();
    if (j.contains("sigma")) cfg.sigma = j.at("sigma").get<double>();
    if (j.contains("iterations")) cfg.iterations = j.at("iterations").get<long>();
    if (j.contains("reps")) cfg.reps = j.at("reps").get<int>();
    if (j.contains("mu4")) cfg.mu4 = j.at("mu4").get<std::vector<double>>();
    if (j.contains("golden_iterations")) cfg.golden_iterations = j.at("golden_iterations").get<int>();
    if (j.contains("scenarios")) cfg.scenarios = j.at("scenarios").get<std::vector<double>>();
    if (j.contains("fixed_data")) cfg.fixed_data = j.at("fixed_data").get<bool>();
    if (j.contains("poisson_data_csv")) cfg.poisson_data_csv = j.at("poisson_data_csv").get<bool>();
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("bad config value: ") + e.what());
  }
}

void apply_json_file(RunConfig& cfg, const std::string& path) {
  std::ifstream is(path);
  if (!is) throw ConfigError("cannot read config file '" + path + "'");
  nlohmann::json j;
  try {
    is >> j;
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError("malformed JSON in '" + path + "': " + e.what());
  }
  apply_json(cfg, j);
}

}  // namespace lbmh
