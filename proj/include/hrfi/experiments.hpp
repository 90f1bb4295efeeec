#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "hrfi/bias_model.hpp"
#include "hrfi/dynamics.hpp"
#include "hrfi/fitting.hpp"
#include "hrfi/random.hpp"
#include "hrfi/stability.hpp"
#include "hrfi/stats.hpp"

namespace hrfi {

// Stochastic stand-in for a participant: the bias model with multiplicative
// lognormal noise.
struct NoisyHumanConfig {
  BiasParameters params;
  double noise_sigma = 0.0;
  std::uint64_t seed = 0;
};

// Force-reproduction runs: every level presented `repetitions` times in a
// seeded random order.
struct ExperimentAConfig {
  std::vector<double> force_levels;
  std::size_t repetitions = 5;
  std::uint64_t shuffle_seed = 0;
};

// Interaction runs: one trace per initial force, `phases` robot/human pairs.
struct ExperimentBConfig {
  std::vector<double> initial_forces;
  std::size_t phases = 20;
  double robot_noise_sigma = 0.0;
};

void validate(const NoisyHumanConfig& cfg);
void validate(const ExperimentAConfig& cfg);
void validate(const ExperimentBConfig& cfg);

// h = alpha r^(1 + beta) exp(sigma xi), xi ~ N(0, 1) drawn from `rng`.
ForceLevel reproduce_noisy(const NoisyHumanConfig& cfg, ForceLevel r, Rng& rng);

std::vector<ReproductionTrial> run_reproduction_experiment(
    const NoisyHumanConfig& human, const ExperimentAConfig& cfg);

// Traces come back in the order of cfg.initial_forces. The human noise
// stream is seeded from human.seed and consumed trace by trace.
std::vector<InteractionTrace> run_interaction_experiment(
    const NoisyHumanConfig& human, const ExperimentBConfig& cfg);

struct NormalizedError {
  double robot = 0.0;  // |gamma - r_k| / gamma
  double human = 0.0;  // |gamma - h_{k+1}| / gamma
};

std::vector<NormalizedError> normalized_errors(const InteractionTrace& trace,
                                               double gamma);

struct InteractionGroup {
  std::size_t group = 0;  // 1 (i) .. 10 (x)
  std::size_t trace_index = 0;
  double initial_error = 0.0;  // eps_r0
  double final_error = 0.0;    // eps_h at the last phase
};

// Groups i..x by descending initial normalized error; ties go to the smaller
// initial force first. Requires exactly ten traces.
std::vector<InteractionGroup> group_interactions(
    const std::vector<InteractionTrace>& traces, double gamma);

double divergence_rate(std::size_t n_convergent, std::size_t n_divergent);

// Percentage of traces whose final human force lies strictly inside
// (0.75 gamma, 1.25 gamma).
double asymptotic_convergence_rate(const std::vector<InteractionTrace>& traces,
                                   double gamma);

// Per-trial evaluation values: r / gamma with delta estimated as |h / r - 1|.
std::vector<EvaluationSample> evaluation_samples(
    const std::vector<ReproductionTrial>& trials, double gamma,
    const std::string& source_id);

struct EvaluationCounts {
  std::size_t convergent = 0;  // E < 0
  std::size_t divergent = 0;   // E >= 0
};

EvaluationCounts count_evaluations(const std::vector<EvaluationSample>& samples,
                                   double lo = 0.5, double hi = 1.5);

// ---------------------------------------------------------------------------
// Cohort pipeline: Experiment A, fit, stability estimate, Experiment B.

struct CohortConfig {
  std::uint64_t seed = 1;
  std::size_t agents = 12;
  double beta = -0.625;
  double gamma_mean = 2.133;  // newtons
  double gamma_sd = 0.944;
  double noise_sigma = 0.0;
  double robot_noise_sigma = 0.0;
  std::vector<double> force_levels{1, 2, 3, 4, 5, 6, 7, 8, 9, 10};
  std::size_t repetitions = 5;
  std::size_t phases = 20;
  double significance = 0.05;
  bool exclude_outliers = true;
  std::size_t threads = 0;  // 0: hardware concurrency
};

void validate(const CohortConfig& cfg);

struct AgentRun {
  std::size_t index = 0;
  std::uint64_t seed = 0;
  BiasParameters true_params{1.0, -1.0};
  std::vector<ReproductionTrial> trials;
  FitResult fit;
  double gamma_hat = 0.0;
  std::vector<EvaluationSample> samples;
  std::vector<InteractionTrace> traces;
};

struct GroupTest {
  std::size_t group = 0;
  std::size_t n = 0;
  double mean_initial = 0.0;
  double mean_final = 0.0;
  bool initial_in_unstable_region = false;
  stats::Direction direction = stats::Direction::kGreater;
  std::optional<stats::TestResult> test;  // empty when degenerate
};

struct CohortResult {
  std::vector<AgentRun> agents;
  std::optional<RegionEstimate> stability;
  std::string stability_error;  // why no estimate could be made
  std::set<std::size_t> outliers;
  std::vector<GroupTest> group_tests;
  EvaluationCounts counts;
  double divergence_rate = 0.0;
  double asymptotic_convergence_rate = 0.0;
};

// Agent i draws from derive_seed(cfg.seed, i); runs are independent and
// merged by index, so the thread count does not affect the result.
AgentRun run_agent(const CohortConfig& cfg, std::size_t index);

CohortResult run_cohort(const CohortConfig& cfg);

}  // namespace hrfi
