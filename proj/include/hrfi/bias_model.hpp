#pragma once

// Power-law force-reproduction bias.
//
// A human asked to reproduce a force r applies h = alpha * r^(1 + beta).
// Written as a signed multiplicative error, h = [1 + U(r)] r with
//
//   U(r)     = delta(r) * sgn(gamma - r)
//   delta(r) = |1 - alpha r^beta|          (implicit gain)
//   gamma    = (1 / alpha)^(1 / beta)      (implicit equilibrium point)
//
// so that 1 + U(r) = alpha r^beta for every r > 0.

namespace hrfi {

// Strictly positive force in newtons.
class ForceLevel {
 public:
  explicit ForceLevel(double newtons);

  double value() const { return value_; }

  friend bool operator==(ForceLevel, ForceLevel) = default;
  friend auto operator<=>(ForceLevel, ForceLevel) = default;

 private:
  double value_;
};

class BiasParameters {
 public:
  // Requires alpha > 0 and beta < 0; beta == 0 leaves gamma undefined.
  BiasParameters(double alpha, double beta);

  double alpha() const { return alpha_; }
  double beta() const { return beta_; }

  // Parameters whose implicit equilibrium point is `gamma`.
  static BiasParameters from_equilibrium(double gamma, double beta);

 private:
  double alpha_;
  double beta_;
};

// sgn with sgn(0) == 0.
constexpr int sign_of(double x) { return (x > 0.0) - (x < 0.0); }

ForceLevel implicit_equilibrium(const BiasParameters& params);

double implicit_gain(const BiasParameters& params, ForceLevel r);

double bias(const BiasParameters& params, ForceLevel r);

ForceLevel reproduce(const BiasParameters& params, ForceLevel r);

}  // namespace hrfi
