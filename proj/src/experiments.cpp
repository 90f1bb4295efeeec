#include "hrfi/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <numeric>
#include <thread>

#include "hrfi/errors.hpp"

namespace hrfi {
namespace {

// Sub-streams of one agent's seed.
enum Stream : std::uint64_t {
  kGammaDraw = 0,
  kReproductionNoise = 1,
  kReproductionOrder = 2,
  kInteractionNoise = 3,
  kInteractionOrder = 4,
};

void require_distinct_positive(const std::vector<double>& forces,
                               const char* what) {
  if (forces.empty()) throw DomainError(std::string(what) + " is empty");
  std::vector<double> sorted = forces;
  std::sort(sorted.begin(), sorted.end());
  if (!(sorted.front() > 0.0)) {
    throw DomainError(std::string(what) + " must be positive");
  }
  if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
    throw DomainError(std::string(what) + " must be distinct");
  }
}

}  // namespace

void validate(const NoisyHumanConfig& cfg) {
  if (!(cfg.noise_sigma >= 0.0) || !std::isfinite(cfg.noise_sigma)) {
    throw DomainError("noise_sigma must be finite and non-negative");
  }
}

void validate(const ExperimentAConfig& cfg) {
  require_distinct_positive(cfg.force_levels, "force_levels");
  if (cfg.repetitions < 1) throw DomainError("repetitions must be >= 1");
}

void validate(const ExperimentBConfig& cfg) {
  require_distinct_positive(cfg.initial_forces, "initial_forces");
  if (cfg.phases < 1) throw DomainError("phases must be >= 1");
  if (!(cfg.robot_noise_sigma >= 0.0)) {
    throw DomainError("robot_noise_sigma must be non-negative");
  }
}

ForceLevel reproduce_noisy(const NoisyHumanConfig& cfg, ForceLevel r,
                           Rng& rng) {
  const double deterministic =
      cfg.params.alpha() * std::pow(r.value(), 1.0 + cfg.params.beta());
  if (cfg.noise_sigma == 0.0) return reproduce(cfg.params, r);
  std::normal_distribution<double> normal(0.0, 1.0);
  return ForceLevel(deterministic * std::exp(cfg.noise_sigma * normal(rng)));
}

std::vector<ReproductionTrial> run_reproduction_experiment(
    const NoisyHumanConfig& human, const ExperimentAConfig& cfg) {
  validate(human);
  validate(cfg);
  std::vector<double> order;
  order.reserve(cfg.force_levels.size() * cfg.repetitions);
  for (std::size_t rep = 0; rep < cfg.repetitions; ++rep) {
    order.insert(order.end(), cfg.force_levels.begin(), cfg.force_levels.end());
  }
  Rng shuffle_rng(cfg.shuffle_seed);
  std::shuffle(order.begin(), order.end(), shuffle_rng);

  Rng noise_rng(human.seed);
  std::vector<ReproductionTrial> trials;
  trials.reserve(order.size());
  for (double r : order) {
    const ForceLevel stimulus(r);
    trials.push_back({stimulus, reproduce_noisy(human, stimulus, noise_rng)});
  }
  return trials;
}

std::vector<InteractionTrace> run_interaction_experiment(
    const NoisyHumanConfig& human, const ExperimentBConfig& cfg) {
  validate(human);
  validate(cfg);
  Rng rng(human.seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<InteractionTrace> traces;
  traces.reserve(cfg.initial_forces.size());
  for (double r0 : cfg.initial_forces) {
    InteractionTrace trace;
    trace.pairs.reserve(cfg.phases);
    ForceLevel r(r0);
    for (std::size_t k = 0; k < cfg.phases; ++k) {
      const ForceLevel h = reproduce_noisy(human, r, rng);
      trace.pairs.push_back({k, r.value(), h.value()});
      // The robot replays the last human force.
      r = cfg.robot_noise_sigma > 0.0
              ? ForceLevel(h.value() *
                           std::exp(cfg.robot_noise_sigma * normal(rng)))
              : h;
    }
    traces.push_back(std::move(trace));
  }
  return traces;
}

std::vector<NormalizedError> normalized_errors(const InteractionTrace& trace,
                                               double gamma) {
  if (!(gamma > 0.0)) throw DomainError("gamma must be positive");
  std::vector<NormalizedError> out;
  out.reserve(trace.pairs.size());
  for (const auto& p : trace.pairs) {
    out.push_back({std::abs(gamma - p.robot) / gamma,
                   std::abs(gamma - p.human) / gamma});
  }
  return out;
}

std::vector<InteractionGroup> group_interactions(
    const std::vector<InteractionTrace>& traces, double gamma) {
  if (traces.size() != 10) {
    throw DomainError("grouping needs exactly ten interactions per agent");
  }
  if (!(gamma > 0.0)) throw DomainError("gamma must be positive");
  std::vector<InteractionGroup> groups;
  groups.reserve(traces.size());
  for (std::size_t i = 0; i < traces.size(); ++i) {
    if (traces[i].pairs.empty()) throw DomainError("empty interaction trace");
    groups.push_back(
        {0, i, std::abs(gamma - traces[i].initial_force()) / gamma,
         std::abs(gamma - traces[i].final_force()) / gamma});
  }
  std::sort(groups.begin(), groups.end(),
            [&](const InteractionGroup& a, const InteractionGroup& b) {
              if (a.initial_error != b.initial_error) {
                return a.initial_error > b.initial_error;
              }
              const double fa = traces[a.trace_index].initial_force();
              const double fb = traces[b.trace_index].initial_force();
              if (fa != fb) return fa < fb;
              return a.trace_index < b.trace_index;
            });
  for (std::size_t g = 0; g < groups.size(); ++g) groups[g].group = g + 1;
  return groups;
}

double divergence_rate(std::size_t n_convergent, std::size_t n_divergent) {
  const std::size_t total = n_convergent + n_divergent;
  if (total == 0) throw DomainError("divergence rate of an empty bin");
  return 100.0 * static_cast<double>(n_divergent) /
         static_cast<double>(total);
}

double asymptotic_convergence_rate(const std::vector<InteractionTrace>& traces,
                                   double gamma) {
  if (!(gamma > 0.0)) throw DomainError("gamma must be positive");
  if (traces.empty()) return 0.0;
  std::size_t inside = 0;
  for (const auto& t : traces) {
    if (t.pairs.empty()) throw DomainError("trace has no final human force");
    const double x = t.final_force() / gamma;
    if (x > 0.75 && x < 1.25) ++inside;
  }
  return 100.0 * static_cast<double>(inside) /
         static_cast<double>(traces.size());
}

std::vector<EvaluationSample> evaluation_samples(
    const std::vector<ReproductionTrial>& trials, double gamma,
    const std::string& source_id) {
  if (!(gamma > 0.0)) throw DomainError("gamma must be positive");
  std::vector<EvaluationSample> out;
  out.reserve(trials.size());
  for (std::size_t i = 0; i < trials.size(); ++i) {
    const double rn = trials[i].stimulus.value() / gamma;
    const double delta = empirical_gain(trials[i].stimulus, trials[i].response);
    out.push_back({rn, evaluation_value(1.0, rn, delta), source_id, i});
  }
  return out;
}

EvaluationCounts count_evaluations(const std::vector<EvaluationSample>& samples,
                                   double lo, double hi) {
  EvaluationCounts counts;
  for (const auto& s : samples) {
    if (s.normalized_force < lo || s.normalized_force > hi) continue;
    if (s.e_value < 0.0) {
      ++counts.convergent;
    } else {
      ++counts.divergent;
    }
  }
  return counts;
}

void validate(const CohortConfig& cfg) {
  if (cfg.agents < 1) throw DomainError("agents must be >= 1");
  if (!(cfg.beta < 0.0)) throw DomainError("beta must be negative");
  if (!(cfg.gamma_mean > 0.0) || !(cfg.gamma_sd >= 0.0)) {
    throw DomainError("gamma distribution must have positive mean, sd >= 0");
  }
  if (!(cfg.noise_sigma >= 0.0) || !(cfg.robot_noise_sigma >= 0.0)) {
    throw DomainError("noise levels must be non-negative");
  }
  if (!(cfg.significance > 0.0 && cfg.significance < 1.0)) {
    throw DomainError("significance must lie in (0, 1)");
  }
  validate(ExperimentAConfig{cfg.force_levels, cfg.repetitions, 0});
  validate(ExperimentBConfig{cfg.force_levels, cfg.phases, 0.0});
}

AgentRun run_agent(const CohortConfig& cfg, std::size_t index) {
  AgentRun run;
  run.index = index;
  run.seed = derive_seed(cfg.seed, index);

  // Lognormal equilibrium with the configured mean and SD.
  double gamma = cfg.gamma_mean;
  if (cfg.gamma_sd > 0.0) {
    const double s2 = std::log1p((cfg.gamma_sd * cfg.gamma_sd) /
                                 (cfg.gamma_mean * cfg.gamma_mean));
    Rng rng(derive_seed(run.seed, kGammaDraw));
    std::normal_distribution<double> normal(0.0, 1.0);
    gamma = std::exp(std::log(cfg.gamma_mean) - 0.5 * s2 +
                     std::sqrt(s2) * normal(rng));
  }
  run.true_params = BiasParameters::from_equilibrium(gamma, cfg.beta);

  NoisyHumanConfig human{run.true_params, cfg.noise_sigma,
                         derive_seed(run.seed, kReproductionNoise)};
  run.trials = run_reproduction_experiment(
      human, {cfg.force_levels, cfg.repetitions,
              derive_seed(run.seed, kReproductionOrder)});
  run.fit = fit_power_law(run.trials);
  run.gamma_hat = implicit_equilibrium(run.fit.params).value();
  run.samples = evaluation_samples(run.trials, run.gamma_hat,
                                   "agent" + std::to_string(index));

  std::vector<double> initials = cfg.force_levels;
  Rng order_rng(derive_seed(run.seed, kInteractionOrder));
  std::shuffle(initials.begin(), initials.end(), order_rng);
  human.seed = derive_seed(run.seed, kInteractionNoise);
  run.traces = run_interaction_experiment(
      human, {initials, cfg.phases, cfg.robot_noise_sigma});
  return run;
}

CohortResult run_cohort(const CohortConfig& cfg) {
  validate(cfg);
  CohortResult result;
  result.agents.resize(cfg.agents);

  std::size_t threads = cfg.threads;
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = std::min(threads, cfg.agents);
  {
    std::vector<std::future<void>> workers;
    for (std::size_t w = 0; w < threads; ++w) {
      workers.push_back(std::async(std::launch::async, [&, w] {
        for (std::size_t i = w; i < cfg.agents; i += threads) {
          result.agents[i] = run_agent(cfg, i);
        }
      }));
    }
    for (auto& f : workers) f.get();
  }

  std::vector<EvaluationSample> pooled;
  for (const auto& a : result.agents) {
    pooled.insert(pooled.end(), a.samples.begin(), a.samples.end());
  }
  result.counts = count_evaluations(pooled);
  if (result.counts.convergent + result.counts.divergent > 0) {
    result.divergence_rate =
        divergence_rate(result.counts.convergent, result.counts.divergent);
  }
  try {
    result.stability =
        estimate_unstable_region(group_by_level(pooled), cfg.significance);
  } catch (const DomainError& e) {
    result.stability_error = e.what();
  }

  if (cfg.exclude_outliers && cfg.agents >= 3) {
    std::vector<std::vector<double>> finals;
    for (const auto& a : result.agents) {
      std::vector<double> f;
      for (const auto& t : a.traces) {
        f.push_back(std::abs(a.gamma_hat - t.final_force()) / a.gamma_hat);
      }
      finals.push_back(std::move(f));
    }
    try {
      result.outliers = stats::outlier_flag(finals);
    } catch (const DomainError&) {
      // Leave-one-out SD undefined; nothing to flag.
    }
  }

  std::vector<InteractionTrace> all_traces;
  std::size_t n_inside = 0;
  std::vector<std::vector<InteractionGroup>> grouped;
  for (const auto& a : result.agents) {
    for (const auto& t : a.traces) {
      const double x = t.final_force() / a.gamma_hat;
      if (x > 0.75 && x < 1.25) ++n_inside;
    }
    all_traces.insert(all_traces.end(), a.traces.begin(), a.traces.end());
    if (result.outliers.count(a.index) == 0 && a.traces.size() == 10) {
      grouped.push_back(group_interactions(a.traces, a.gamma_hat));
    }
  }
  if (!all_traces.empty()) {
    result.asymptotic_convergence_rate =
        100.0 * static_cast<double>(n_inside) /
        static_cast<double>(all_traces.size());
  }

  // Groups whose mean initial error falls below this are expected to grow.
  double unstable_radius = -1.0;
  if (result.stability && result.stability->region) {
    unstable_radius = result.stability->region->error_radius();
  }
  for (std::size_t g = 0; g < 10 && !grouped.empty(); ++g) {
    GroupTest gt;
    gt.group = g + 1;
    std::vector<double> initial;
    std::vector<double> final;
    for (const auto& groups : grouped) {
      initial.push_back(groups[g].initial_error);
      final.push_back(groups[g].final_error);
    }
    gt.n = initial.size();
    gt.mean_initial = stats::mean(initial);
    gt.mean_final = stats::mean(final);
    gt.initial_in_unstable_region = gt.mean_initial < unstable_radius;
    gt.direction = gt.initial_in_unstable_region ? stats::Direction::kLess
                                                 : stats::Direction::kGreater;
    try {
      gt.test = stats::paired_t_one_sided(initial, final, gt.direction);
    } catch (const std::exception&) {
      gt.test.reset();
    }
    result.group_tests.push_back(gt);
  }
  return result;
}

}  // namespace hrfi
