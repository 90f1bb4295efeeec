#pragma once

#include <cstddef>
#include <set>
#include <span>
#include <vector>

namespace hrfi::stats {

// Alternative hypothesis of a one-sided test.
enum class Direction { kLess, kGreater };

struct TestResult {
  double statistic = 0.0;
  double dof = 0.0;
  double p_value = 1.0;
  Direction direction = Direction::kLess;

  bool significant(double alpha = 0.05) const { return p_value < alpha; }
};

struct SummaryStats {
  double mean = 0.0;
  double sd = 0.0;
  std::size_t n = 0;
};

// Regularized incomplete beta function I_x(a, b).
double incomplete_beta(double a, double b, double x);

// Student's t cumulative distribution.
double t_cdf(double t, double dof);

double mean(std::span<const double> xs);
double sample_variance(std::span<const double> xs);

// H1: mean < 0. Throws DomainError for n < 2, DegenerateError for zero
// variance.
TestResult one_sample_t_less(std::span<const double> samples);

TestResult one_sample_t(std::span<const double> samples, Direction direction,
                        double mu0 = 0.0);

// One-sample test on x - y.
TestResult paired_t_one_sided(std::span<const double> x,
                              std::span<const double> y, Direction direction);

// Welch's t with Welch-Satterthwaite degrees of freedom; H1 compares
// mean(x) against mean(y).
TestResult welch_t_one_sided(std::span<const double> x,
                             std::span<const double> y, Direction direction);

TestResult welch_t_one_sided(const SummaryStats& x, const SummaryStats& y,
                             Direction direction);

// Participants whose mean final error exceeds the mean + 10 SD of the other
// participants' means. Returns zero-based participant indices.
std::set<std::size_t> outlier_flag(
    const std::vector<std::vector<double>>& final_errors_by_participant,
    double sd_multiplier = 10.0);

}  // namespace hrfi::stats
