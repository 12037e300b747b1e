#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "lbmh/asymptotics.hpp"
#include "lbmh/balancing.hpp"
#include "lbmh/noise.hpp"
#include "lbmh/proposal.hpp"

namespace lbmh {

/// A named algorithm as written on the command line, e.g. "barker-bimodal(0.1)"
/// or "three-point(2)". Arguments stay unresolved until a target is known.
struct PresetSpec {
  std::string kind;          // mala | barker | barker-rademacher | barker-bimodal | three-point | gamma-gaussian | rwm
  std::vector<double> args;  // optional parenthesised parameters

  /// Canonical name; arguments are joined with ";" so labels are CSV-safe.
  std::string label() const;
};

PresetSpec parse_preset(std::string_view text);
/// Comma-separated list; commas inside parentheses separate arguments.
std::vector<PresetSpec> parse_preset_list(std::string_view text);

struct Preset {
  std::string label;
  BalancingFunction g;
  NoiseDistribution mu;
  ProposalPath path;
  bool locally_balanced = true;

  LBProposal make(double sigma) const { return LBProposal(g, mu, sigma, path); }
};

/// Builds the (g, mu, path) triple. "three-point(a)" without an explicit
/// g''(1) takes the joint optimum for the supplied target functionals.
Preset resolve_preset(const PresetSpec& spec,
                      const std::optional<TargetFunctionals<double>>& functionals = std::nullopt);

/// theta^2 for a locally-balanced preset on a product factor with the given functionals.
double preset_theta_squared(const Preset& preset, const TargetFunctionals<double>& f);

}  // namespace lbmh
