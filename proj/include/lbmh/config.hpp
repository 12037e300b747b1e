#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "lbmh/balancing.hpp"
#include "lbmh/noise.hpp"
#include "lbmh/targets.hpp"

namespace lbmh {

/// Target family without a dimension. String forms: "gaussian",
/// "hyperbolic[:delta_sq]", "ar1[:rho]", "equicorrelated[:rho]", "poisson[:sigma_eta]".
struct TargetSpec {
  enum class Kind { gaussian, hyperbolic, correlated, poisson };
  Kind kind = Kind::gaussian;
  double delta_sq = 0.1;
  CovStructure structure = CovStructure::ar1;
  double rho = 0.99;
  double sigma_eta = 1.0;

  bool is_product() const { return kind == Kind::gaussian || kind == Kind::hyperbolic; }
  std::string describe() const;
  ProductFactor factor() const;
  /// Poisson targets need a data seed; others ignore it.
  TargetModel build(int n, std::uint64_t data_seed = 0) const;
};

TargetSpec parse_target(std::string_view text);
/// Accepts the string form or an object such as
/// {"kind": "hyperbolic", "delta_sq": 0.1} / {"kind": "ar1", "rho": 0.99}.
TargetSpec target_from_json(const nlohmann::json& j);

/// "sqrt", "barker", "min", "max", "g_gamma:<gamma>".
BalancingFunction parse_balancing(std::string_view text);
/// "gaussian", "rademacher", "bimodal[:sigma_b]", "three_point:<a>".
NoiseDistribution parse_noise(std::string_view text);

std::vector<int> parse_int_list(std::string_view text);
std::vector<double> parse_double_list(std::string_view text);

/// Settings shared by every subcommand; unset optionals fall back to
/// per-subcommand defaults.
struct RunConfig {
  std::optional<std::string> target;
  std::optional<std::string> presets;
  std::optional<std::vector<int>> n_grid;
  std::optional<std::uint64_t> seed;
  std::optional<long> samples;
  unsigned threads = 1;
  std::string out = "out";
  bool full = false;

  std::optional<double> ell;
  std::optional<double> sigma;
  std::optional<long> iterations;
  std::optional<int> reps;
  std::optional<std::vector<double>> mu4;
  std::optional<int> golden_iterations;
  std::optional<std::vector<double>> scenarios;
  bool fixed_data = false;
  bool poisson_data_csv = false;
};

/// Overwrites fields of `cfg` present in the JSON object; unknown keys are errors.
void apply_json(RunConfig& cfg, const nlohmann::json& j);
void apply_json_file(RunConfig& cfg, const std::string& path);

}  // namespace lbmh
