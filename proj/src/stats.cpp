#include "hrfi/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "hrfi/errors.hpp"

namespace hrfi::stats {
namespace {

// Continued fraction for I_x(a, b), modified Lentz. Converges quickly for
// x < (a + 1) / (a + b + 2).
double beta_continued_fraction(double a, double b, double x) {
  constexpr int kMaxIterations = 10000;
  constexpr double kEps = 1e-16;
  constexpr double kTiny = 1e-300;

  const double qab = a + b;
  const double qap = a + 1.0;
  const double qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::abs(d) < kTiny) d = kTiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= kMaxIterations; ++m) {
    const double m2 = 2.0 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::abs(del - 1.0) < kEps) return h;
  }
  throw DivergenceError("incomplete beta continued fraction did not converge");
}

TestResult finish(double t, double dof, Direction direction) {
  TestResult result;
  result.statistic = t;
  result.dof = dof;
  result.direction = direction;
  result.p_value =
      direction == Direction::kLess ? t_cdf(t, dof) : t_cdf(-t, dof);
  return result;
}

}  // namespace

double incomplete_beta(double a, double b, double x) {
  if (!(a > 0.0) || !(b > 0.0)) throw DomainError("incomplete_beta: a, b > 0");
  if (!(x >= 0.0 && x <= 1.0)) throw DomainError("incomplete_beta: x in [0,1]");
  if (x == 0.0) return 0.0;
  if (x == 1.0) return 1.0;
  const double log_front = std::lgamma(a + b) - std::lgamma(a) -
                           std::lgamma(b) + a * std::log(x) +
                           b * std::log1p(-x);
  const double front = std::exp(log_front);
  if (x < (a + 1.0) / (a + b + 2.0)) {
    return front * beta_continued_fraction(a, b, x) / a;
  }
  return 1.0 - front * beta_continued_fraction(b, a, 1.0 - x) / b;
}

double t_cdf(double t, double dof) {
  if (!(dof > 0.0)) throw DomainError("t_cdf: dof must be positive");
  if (std::isnan(t)) return t;
  if (t == 0.0) return 0.5;
  if (std::isinf(t)) return t > 0.0 ? 1.0 : 0.0;
  // Lower tail mass beyond |t|. Using x = dof / (dof + t^2) directly loses
  // digits for small |t|; the complementary form keeps them.
  const double t2 = t * t;
  double tail;
  if (t2 < dof) {
    const double y = t2 / (dof + t2);
    tail = 0.5 * (1.0 - incomplete_beta(0.5, 0.5 * dof, y));
  } else {
    tail = 0.5 * incomplete_beta(0.5 * dof, 0.5, dof / (dof + t2));
  }
  return t < 0.0 ? tail : 1.0 - tail;
}

double mean(std::span<const double> xs) {
  if (xs.empty()) throw DomainError("mean of empty sample");
  return std::accumulate(xs.begin(), xs.end(), 0.0) /
         static_cast<double>(xs.size());
}

double sample_variance(std::span<const double> xs) {
  if (xs.size() < 2) throw DomainError("variance needs at least two samples");
  const double m = mean(xs);
  double ss = 0.0;
  for (double x : xs) ss += (x - m) * (x - m);
  return ss / static_cast<double>(xs.size() - 1);
}

TestResult one_sample_t(std::span<const double> samples, Direction direction,
                        double mu0) {
  if (samples.size() < 2) {
    throw DomainError("one-sample t-test needs at least two samples");
  }
  const double var = sample_variance(samples);
  if (!(var > 0.0)) throw DegenerateError("zero sample variance");
  const double n = static_cast<double>(samples.size());
  const double t = (mean(samples) - mu0) / std::sqrt(var / n);
  return finish(t, n - 1.0, direction);
}

TestResult one_sample_t_less(std::span<const double> samples) {
  return one_sample_t(samples, Direction::kLess);
}

TestResult paired_t_one_sided(std::span<const double> x,
                              std::span<const double> y, Direction direction) {
  if (x.size() != y.size()) throw DomainError("paired samples differ in size");
  std::vector<double> diff(x.size());
  std::transform(x.begin(), x.end(), y.begin(), diff.begin(),
                 std::minus<>());
  return one_sample_t(diff, direction);
}

TestResult welch_t_one_sided(const SummaryStats& x, const SummaryStats& y,
                             Direction direction) {
  if (x.n < 2 || y.n < 2) throw DomainError("Welch test needs n >= 2 per group");
  if (!(x.sd >= 0.0) || !(y.sd >= 0.0)) throw DomainError("negative SD");
  const double vx = x.sd * x.sd / static_cast<double>(x.n);
  const double vy = y.sd * y.sd / static_cast<double>(y.n);
  if (!(vx + vy > 0.0)) throw DegenerateError("both groups have zero variance");
  const double t = (x.mean - y.mean) / std::sqrt(vx + vy);
  const double dof =
      (vx + vy) * (vx + vy) /
      (vx * vx / static_cast<double>(x.n - 1) +
       vy * vy / static_cast<double>(y.n - 1));
  return finish(t, dof, direction);
}

TestResult welch_t_one_sided(std::span<const double> x,
                             std::span<const double> y, Direction direction) {
  if (x.size() < 2 || y.size() < 2) {
    throw DomainError("Welch test needs n >= 2 per group");
  }
  return welch_t_one_sided(
      SummaryStats{mean(x), std::sqrt(sample_variance(x)), x.size()},
      SummaryStats{mean(y), std::sqrt(sample_variance(y)), y.size()},
      direction);
}

std::set<std::size_t> outlier_flag(
    const std::vector<std::vector<double>>& final_errors_by_participant,
    double sd_multiplier) {
  const std::size_t n = final_errors_by_participant.size();
  if (n < 3) throw DomainError("outlier rule needs at least three participants");
  std::vector<double> means;
  means.reserve(n);
  for (const auto& errors : final_errors_by_participant) {
    means.push_back(mean(errors));
  }
  std::set<std::size_t> flagged;
  std::vector<double> others;
  for (std::size_t i = 0; i < n; ++i) {
    others.clear();
    for (std::size_t j = 0; j < n; ++j) {
      if (j != i) others.push_back(means[j]);
    }
    const double threshold =
        mean(others) + sd_multiplier * std::sqrt(sample_variance(others));
    if (means[i] > threshold) flagged.insert(i);
  }
  return flagged;
}

}  // namespace hrfi::stats
