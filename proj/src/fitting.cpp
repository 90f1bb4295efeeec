#include "hrfi/fitting.hpp"

#include <algorithm>
#include <cmath>

#include "hrfi/errors.hpp"

namespace hrfi {
namespace {

struct Sample {
  double log_r;
  double ratio;
};

// Parameterized as (a, beta) with alpha = exp(a).
struct Point {
  double a;
  double beta;
};

double objective(const std::vector<Sample>& data, Point p) {
  double sum = 0.0;
  for (const auto& s : data) {
    const double res = s.ratio - std::exp(p.a + p.beta * s.log_r);
    sum += res * res;
  }
  return sum;
}

struct Linearization {
  // J^T J and J^T res for res_i = ratio_i - m_i, dm/da = m, dm/dbeta = m ln r.
  double jtj[2][2] = {{0, 0}, {0, 0}};
  double jtr[2] = {0, 0};
};

Linearization linearize(const std::vector<Sample>& data, Point p) {
  Linearization lin;
  for (const auto& s : data) {
    const double m = std::exp(p.a + p.beta * s.log_r);
    const double ja = m;
    const double jb = m * s.log_r;
    const double res = s.ratio - m;
    lin.jtj[0][0] += ja * ja;
    lin.jtj[0][1] += ja * jb;
    lin.jtj[1][1] += jb * jb;
    lin.jtr[0] += ja * res;
    lin.jtr[1] += jb * res;
  }
  lin.jtj[1][0] = lin.jtj[0][1];
  return lin;
}

Point log_linear_start(const std::vector<Sample>& data) {
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (const auto& s : data) {
    const double y = std::log(s.ratio);
    sx += s.log_r;
    sy += y;
    sxx += s.log_r * s.log_r;
    sxy += s.log_r * y;
  }
  const double n = static_cast<double>(data.size());
  const double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  return {(sy - slope * sx) / n, slope};
}

}  // namespace

FitResult fit_power_law(std::span<const ReproductionTrial> trials,
                        const FitOptions& options) {
  if (trials.size() < 3) throw DegenerateError("fit needs at least 3 trials");
  std::vector<Sample> data;
  data.reserve(trials.size());
  for (const auto& t : trials) {
    data.push_back({std::log(t.stimulus.value()),
                    t.response.value() / t.stimulus.value()});
  }
  const auto [lo, hi] = std::minmax_element(
      data.begin(), data.end(),
      [](const Sample& x, const Sample& y) { return x.log_r < y.log_r; });
  if (lo->log_r == hi->log_r) {
    throw DegenerateError("a single stimulus level cannot identify beta");
  }

  auto clip = [&](Point p) {
    p.beta = std::clamp(p.beta, options.beta_min, options.beta_max);
    return p;
  };

  Point p = options.initial
                ? Point{std::log(options.initial->alpha()),
                        options.initial->beta()}
                : log_linear_start(data);
  p = clip(p);
  double f = objective(data, p);

  FitResult result;
  result.n_trials = trials.size();
  result.objective_history.push_back(f);

  double grad_norm = 0.0;
  std::size_t iter = 0;
  bool done = false;
  while (!done && iter < options.max_iterations) {
    const Linearization lin = linearize(data, p);
    // Gradient of the objective is -2 J^T res.
    grad_norm = 2.0 * std::hypot(lin.jtr[0], lin.jtr[1]);
    if (grad_norm < options.gradient_tolerance) {
      done = true;
      break;
    }
    const double det =
        lin.jtj[0][0] * lin.jtj[1][1] - lin.jtj[0][1] * lin.jtj[1][0];
    if (!(std::abs(det) > 0.0)) break;
    const double da = (lin.jtj[1][1] * lin.jtr[0] - lin.jtj[0][1] * lin.jtr[1]) / det;
    const double db = (lin.jtj[0][0] * lin.jtr[1] - lin.jtj[1][0] * lin.jtr[0]) / det;

    // Step halving until the objective does not increase.
    double scale = 1.0;
    Point trial{};
    double f_trial = f;
    bool accepted = false;
    for (int halving = 0; halving < 60; ++halving, scale *= 0.5) {
      trial = clip({p.a + scale * da, p.beta + scale * db});
      f_trial = objective(data, trial);
      if (f_trial <= f) {
        accepted = true;
        break;
      }
    }
    ++iter;
    if (!accepted) {
      done = true;
      break;
    }
    const double decrease = f - f_trial;
    p = trial;
    const double f_prev = f;
    f = f_trial;
    result.objective_history.push_back(f);
    if (f == 0.0 || decrease <= options.relative_tolerance * f_prev) {
      done = true;
    }
  }

  const Linearization final_lin = linearize(data, p);
  result.gradient_norm = 2.0 * std::hypot(final_lin.jtr[0], final_lin.jtr[1]);
  result.iterations = iter;
  result.params = BiasParameters(std::exp(p.a), p.beta);
  result.rmse = rmse(trials, result.params);

  // A minimum on the clip is not an interior optimum: the unconstrained
  // gradient still pushes beta outward.
  const double beta_grad = -2.0 * final_lin.jtr[1];
  const bool at_upper = p.beta >= options.beta_max && beta_grad < 0.0;
  const bool at_lower = p.beta <= options.beta_min && beta_grad > 0.0;
  if (at_upper || at_lower) {
    result.status = FitStatus::kBoundary;
  } else if (done) {
    result.status = FitStatus::kConverged;
  } else {
    result.status = FitStatus::kIterationLimit;
  }
  result.converged = result.status == FitStatus::kConverged;
  return result;
}

double rmse(std::span<const ReproductionTrial> trials,
            const BiasParameters& params) {
  if (trials.empty()) throw DomainError("rmse of an empty trial set");
  double sum = 0.0;
  for (const auto& t : trials) {
    const double r = t.stimulus.value();
    const double res = t.response.value() / r -
                       params.alpha() * std::pow(r, params.beta());
    sum += res * res;
  }
  return std::sqrt(sum / static_cast<double>(trials.size()));
}

std::vector<ReproductionTrial> normalize_trials(
    std::span<const ReproductionTrial> trials, ForceLevel gamma) {
  std::vector<ReproductionTrial> out;
  out.reserve(trials.size());
  for (const auto& t : trials) {
    out.push_back({ForceLevel(t.stimulus.value() / gamma.value()),
                   ForceLevel(t.response.value() / gamma.value())});
  }
  return out;
}

}  // namespace hrfi
