#include "hrfi/bias_model.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "hrfi/errors.hpp"

namespace hrfi {
namespace {

const BiasParameters kNormalizedHand(1.006, -0.625);
const BiasParameters kSqrt(1.0, -0.5);

TEST(ForceLevelTest, RejectsNonPositive) {
  EXPECT_THROW(ForceLevel(0.0), DomainError);
  EXPECT_THROW(ForceLevel(-1.0), DomainError);
  EXPECT_THROW(ForceLevel(std::nan("")), DomainError);
  EXPECT_DOUBLE_EQ(ForceLevel(2.5).value(), 2.5);
}

TEST(BiasParametersTest, Invariants) {
  EXPECT_THROW(BiasParameters(0.0, -0.5), DomainError);
  EXPECT_THROW(BiasParameters(-1.0, -0.5), DomainError);
  EXPECT_THROW(BiasParameters(1.0, 0.0), DomainError);
  EXPECT_THROW(BiasParameters(1.0, 0.3), DomainError);
  EXPECT_NO_THROW(BiasParameters(1.0, -3.0));
}

TEST(ImplicitEquilibriumTest, Examples) {
  // alpha_n, beta_n are three-decimal values; gamma from them is 1.0096.
  EXPECT_NEAR(implicit_equilibrium(kNormalizedHand).value(), 1.009, 1e-3);
  EXPECT_NEAR(implicit_equilibrium(kNormalizedHand).value(),
              1.009617266204947, 1e-13);
  EXPECT_DOUBLE_EQ(implicit_equilibrium(kSqrt).value(), 1.0);
  EXPECT_DOUBLE_EQ(implicit_equilibrium(BiasParameters(2.0, -1.0)).value(),
                   2.0);
}

TEST(ImplicitEquilibriumTest, FromEquilibriumRoundTrip) {
  const auto p = BiasParameters::from_equilibrium(2.133, -0.625);
  EXPECT_NEAR(implicit_equilibrium(p).value(), 2.133, 1e-12);
}

TEST(ImplicitGainTest, Examples) {
  const ForceLevel gamma = implicit_equilibrium(kNormalizedHand);
  EXPECT_NEAR(implicit_gain(kNormalizedHand, gamma), 0.0, 1e-15);
  EXPECT_NEAR(implicit_gain(kNormalizedHand, ForceLevel(0.5)),
              0.55146409036038847, 1e-14);
  EXPECT_DOUBLE_EQ(implicit_gain(kSqrt, ForceLevel(4.0)), 0.5);
}

TEST(BiasTest, Examples) {
  EXPECT_EQ(bias(kSqrt, ForceLevel(1.0)), 0.0);
  EXPECT_DOUBLE_EQ(bias(kSqrt, ForceLevel(4.0)), -0.5);
  EXPECT_DOUBLE_EQ(bias(kSqrt, ForceLevel(0.25)), 1.0);
}

TEST(ReproduceTest, Examples) {
  EXPECT_DOUBLE_EQ(reproduce(kSqrt, ForceLevel(4.0)).value(), 2.0);
  const ForceLevel gamma = implicit_equilibrium(kNormalizedHand);
  EXPECT_NEAR(reproduce(kNormalizedHand, gamma).value(), gamma.value(), 1e-15);
  EXPECT_NEAR(reproduce(kNormalizedHand, ForceLevel(1.009)).value(), 1.009,
              1e-3);
}

TEST(SignTest, ZeroIsZero) {
  EXPECT_EQ(sign_of(0.0), 0);
  EXPECT_EQ(sign_of(-0.0), 0);
  EXPECT_EQ(sign_of(3.0), 1);
  EXPECT_EQ(sign_of(-1e-300), -1);
}

// Randomized properties over alpha in (0.5, 2), beta in (-1.9, -0.05),
// r in (0.01 gamma, 100 gamma).
class BiasPropertyTest : public ::testing::Test {
 protected:
  std::mt19937_64 rng{20240611};
  std::uniform_real_distribution<double> alpha{0.5, 2.0};
  std::uniform_real_distribution<double> beta{-1.9, -0.05};
  std::uniform_real_distribution<double> log_ratio{std::log(0.01),
                                                   std::log(100.0)};
};

TEST_F(BiasPropertyTest, SignMatchesSideOfEquilibrium) {
  for (int i = 0; i < 20000; ++i) {
    const BiasParameters p(alpha(rng), beta(rng));
    const double gamma = implicit_equilibrium(p).value();
    const ForceLevel r(gamma * std::exp(log_ratio(rng)));
    const double u = bias(p, r);
    if (u != 0.0) {
      ASSERT_EQ(sign_of(u), sign_of(gamma - r.value()));
    }
  }
}

TEST_F(BiasPropertyTest, ClosedFormIdentity) {
  for (int i = 0; i < 20000; ++i) {
    const BiasParameters p(alpha(rng), beta(rng));
    const double gamma = implicit_equilibrium(p).value();
    const ForceLevel r(gamma * std::exp(log_ratio(rng)));
    const double lhs = 1.0 + bias(p, r);
    const double rhs = p.alpha() * std::pow(r.value(), p.beta());
    ASSERT_LT(std::abs(lhs - rhs), 1e-12 * std::max(1.0, rhs));
  }
}

TEST_F(BiasPropertyTest, OverBelowUnderAbove) {
  for (int i = 0; i < 20000; ++i) {
    const BiasParameters p(alpha(rng), beta(rng));
    const double gamma = implicit_equilibrium(p).value();
    const double x = std::exp(log_ratio(rng));
    if (std::abs(x - 1.0) < 1e-9) continue;
    const ForceLevel r(gamma * x);
    const double h = reproduce(p, r).value();
    if (x < 1.0) {
      ASSERT_GT(h, r.value());
    } else {
      ASSERT_LT(h, r.value());
    }
  }
}

TEST_F(BiasPropertyTest, MonotoneWhenExponentAboveMinusOne) {
  std::uniform_real_distribution<double> mild_beta{-0.99, -0.01};
  for (int i = 0; i < 5000; ++i) {
    const BiasParameters p(alpha(rng), mild_beta(rng));
    const double gamma = implicit_equilibrium(p).value();
    const double r1 = gamma * std::exp(log_ratio(rng));
    const double r2 = r1 * 1.01;
    ASSERT_LT(reproduce(p, ForceLevel(r1)).value(),
              reproduce(p, ForceLevel(r2)).value());
  }
}

}  // namespace
}  // namespace hrfi
