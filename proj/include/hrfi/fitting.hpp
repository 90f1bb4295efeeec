#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "hrfi/bias_model.hpp"

namespace hrfi {

// One (stimulus r_k, reproduction h_{k+1}) pair.
struct ReproductionTrial {
  ForceLevel stimulus;
  ForceLevel response;
};

enum class FitStatus {
  kConverged,
  kIterationLimit,
  kBoundary,  // beta pinned at an interior-clip bound; data has no optimum
};

struct FitResult {
  BiasParameters params{1.0, -1.0};
  double rmse = 0.0;
  std::size_t n_trials = 0;
  bool converged = false;
  FitStatus status = FitStatus::kIterationLimit;
  std::size_t iterations = 0;
  double gradient_norm = 0.0;
  // Objective after initialization and after every accepted step.
  std::vector<double> objective_history;
};

struct FitOptions {
  // Starting point; log-linear regression when absent.
  std::optional<BiasParameters> initial;
  std::size_t max_iterations = 500;
  double relative_tolerance = 1e-12;
  double gradient_tolerance = 1e-10;
  double beta_min = -10.0;
  double beta_max = -1e-6;
};

// Minimizes sum_i (h_i / r_i - alpha r_i^beta)^2 over alpha > 0, beta < 0.
// Throws DegenerateError for fewer than three trials or a single stimulus
// level. A fit that ends on the beta clip is returned with
// status == kBoundary and converged == false.
FitResult fit_power_law(std::span<const ReproductionTrial> trials,
                        const FitOptions& options = {});

double rmse(std::span<const ReproductionTrial> trials,
            const BiasParameters& params);

std::vector<ReproductionTrial> normalize_trials(
    std::span<const ReproductionTrial> trials, ForceLevel gamma);

}  // namespace hrfi
