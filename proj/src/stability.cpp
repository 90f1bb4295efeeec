#include "hrfi/stability.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <utility>

#include "hrfi/errors.hpp"
#include "hrfi/stats.hpp"

namespace hrfi {
namespace {

double round_half_up(double x, int decimals) {
  const double scale = std::pow(10.0, decimals);
  // Values such as 0.7265 sit a hair below the decimal midpoint in binary.
  return std::floor(x * scale * (1.0 + 1e-12) + 0.5) / scale;
}

double radius_of(double lower, double upper) {
  return 0.5 * (std::abs(1.0 - lower) + std::abs(1.0 - upper));
}

LevelTest test_level(const LevelSamples& level, double significance) {
  if (level.e_values.size() < 2) {
    throw DomainError("each force level needs at least two E samples");
  }
  LevelTest out;
  out.level = level.level;
  out.source_id = level.source_id;
  out.n = level.e_values.size();
  out.mean_e = stats::mean(level.e_values);
  try {
    out.p_value = stats::one_sample_t_less(level.e_values).p_value;
  } catch (const DegenerateError&) {
    out.p_value = out.mean_e < 0.0 ? 0.0 : 1.0;
  }
  out.significant = out.p_value < significance;
  return out;
}

// `side` is ordered from the outermost level toward 1.
std::optional<double> first_transition(const std::vector<LevelTest>& side) {
  for (std::size_t i = 0; i + 1 < side.size(); ++i) {
    if (side[i].significant && !side[i + 1].significant) {
      return 0.5 * (side[i].level + side[i + 1].level);
    }
  }
  return std::nullopt;
}

}  // namespace

UnstableRegion::UnstableRegion(double lower, double upper)
    : lower_(lower), upper_(upper), error_radius_(radius_of(lower, upper)) {
  if (!(lower > 0.0 && lower < 1.0 && upper > 1.0 && std::isfinite(upper))) {
    throw DomainError("unstable region must satisfy 0 < lower < 1 < upper");
  }
}

UnstableRegion::Reported UnstableRegion::reported(int decimals) const {
  const double lo = round_half_up(lower_, decimals);
  const double hi = round_half_up(upper_, decimals);
  return {lo, hi, round_half_up(radius_of(lo, hi), decimals)};
}

double evaluation_value(double gamma, double r, double delta) {
  return (r * delta - 2.0 * std::abs(gamma - r)) * delta;
}

double empirical_gain(ForceLevel r, ForceLevel h) {
  return std::abs(h.value() / r.value() - 1.0);
}

double delta_v_closed_form(double gamma, double r, double delta, int sign_e) {
  if (sign_e < -1 || sign_e > 1) throw DomainError("sign_e must be -1, 0 or 1");
  const double s2 = static_cast<double>(sign_e * sign_e);
  return -2.0 * delta * std::abs(gamma - r) * r + delta * delta * s2 * r * r;
}

double delta_v_direct(double gamma, double r, double h_next) {
  return (gamma - h_next) * (gamma - h_next) - (gamma - r) * (gamma - r);
}

bool lyapunov_chain_check(const BiasParameters& params, ForceLevel r) {
  const double gamma = implicit_equilibrium(params).value();
  const double rv = r.value();
  const double direct = delta_v_direct(gamma, rv, reproduce(params, r).value());
  const double closed = delta_v_closed_form(
      gamma, rv, implicit_gain(params, r), sign_of(gamma - rv));
  const double scale = std::max(std::abs(direct), std::abs(closed));
  // Both routes are O(eps * gamma * |gamma - r|) when r sits on gamma.
  const double floor = 1e-13 * gamma * std::max(gamma, rv);
  return std::abs(direct - closed) <= 1e-9 * scale + floor;
}

std::vector<LevelSamples> group_by_level(
    const std::vector<EvaluationSample>& samples) {
  std::map<std::pair<double, std::string>, std::vector<double>> grouped;
  for (const auto& s : samples) {
    if (!(s.normalized_force > 0.0)) {
      throw DomainError("normalized force must be positive");
    }
    grouped[{s.normalized_force, s.source_id}].push_back(s.e_value);
  }
  std::vector<LevelSamples> out;
  out.reserve(grouped.size());
  for (auto& [key, values] : grouped) {
    out.push_back({key.first, key.second, std::move(values)});
  }
  return out;
}

RegionEstimate estimate_unstable_region(const std::vector<LevelSamples>& levels,
                                        double significance) {
  if (!(significance > 0.0 && significance < 1.0)) {
    throw DomainError("significance must lie in (0, 1)");
  }
  RegionEstimate estimate;
  for (const auto& level : levels) {
    estimate.levels.push_back(test_level(level, significance));
  }
  std::stable_sort(estimate.levels.begin(), estimate.levels.end(),
                   [](const LevelTest& a, const LevelTest& b) {
                     return a.level < b.level;
                   });

  std::vector<LevelTest> below;
  std::vector<LevelTest> above;
  for (const auto& t : estimate.levels) {
    if (t.level < 1.0) below.push_back(t);
    if (t.level > 1.0) above.push_back(t);
  }
  if (below.size() < 2 || above.size() < 2) {
    throw DomainError(
        "need at least two force levels on each side of the equilibrium");
  }
  std::reverse(above.begin(), above.end());

  const auto lower = first_transition(below);
  const auto upper = first_transition(above);
  if (lower && upper) estimate.region.emplace(*lower, *upper);
  return estimate;
}

}  // namespace hrfi
