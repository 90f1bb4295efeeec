#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "hrfi/bias_model.hpp"

namespace hrfi {

struct EvaluationSample {
  double normalized_force = 0.0;  // r / gamma
  double e_value = 0.0;
  std::string source_id;
  std::size_t trial_id = 0;
};

// All evaluation values observed at one normalized force level.
struct LevelSamples {
  double level = 0.0;
  std::string source_id;
  std::vector<double> e_values;
};

class UnstableRegion {
 public:
  // Requires 0 < lower < 1 < upper. The error radius is derived:
  // 0.5 (|1 - lower| + |1 - upper|).
  UnstableRegion(double lower, double upper);

  double lower() const { return lower_; }
  double upper() const { return upper_; }
  double error_radius() const { return error_radius_; }

  bool contains(double normalized_force) const {
    return normalized_force > lower_ && normalized_force < upper_;
  }

  // The region as it reads when boundaries are rounded half-up to `decimals`
  // places and the radius is recomputed from the rounded boundaries and
  // rounded in turn (three-decimal reporting).
  struct Reported {
    double lower;
    double upper;
    double error_radius;
  };
  Reported reported(int decimals = 3) const;

 private:
  double lower_;
  double upper_;
  double error_radius_;
};

// E = [r delta - 2 |gamma - r|] delta. E < 0 certifies a one-step decrease
// of V = (gamma - r)^2.
double evaluation_value(double gamma, double r, double delta);

// Per-trial implicit gain estimate |h / r - 1|.
double empirical_gain(ForceLevel r, ForceLevel h);

// Lyapunov increment with the error eliminated:
//   dV = -2 delta |gamma - r| r + delta^2 sgn^2(gamma - r) r^2
double delta_v_closed_form(double gamma, double r, double delta, int sign_e);

// dV = (gamma - h_{k+1})^2 - (gamma - r_k)^2
double delta_v_direct(double gamma, double r, double h_next);

// True when both dV routes agree within 1e-9 relative for the bias model.
bool lyapunov_chain_check(const BiasParameters& params, ForceLevel r);

// Groups samples by (source, normalized force), sorted by level.
std::vector<LevelSamples> group_by_level(
    const std::vector<EvaluationSample>& samples);

struct LevelTest {
  double level = 0.0;
  std::string source_id;
  std::size_t n = 0;
  double mean_e = 0.0;
  double p_value = 1.0;
  bool significant = false;
};

struct RegionEstimate {
  std::vector<LevelTest> levels;  // every tested level, ascending
  std::optional<UnstableRegion> region;
};

// Tests H1: mean E < 0 at every level, then on each side of 1 scans from the
// outermost level inward and places the boundary at the mean of the first
// significant level and its non-significant inner neighbour. No region is
// returned unless both sides have such a transition.
//
// A level whose E values have zero spread is resolved by the limit of the
// t statistic: significant iff its mean is negative.
RegionEstimate estimate_unstable_region(const std::vector<LevelSamples>& levels,
                                        double significance = 0.05);

}  // namespace hrfi
