#include "hrfi/bias_model.hpp"

#include <cmath>
#include <string>

#include "hrfi/errors.hpp"

namespace hrfi {

ForceLevel::ForceLevel(double newtons) : value_(newtons) {
  if (!(newtons > 0.0) || !std::isfinite(newtons)) {
    throw DomainError("force must be finite and strictly positive, got " +
                      std::to_string(newtons));
  }
}

BiasParameters::BiasParameters(double alpha, double beta)
    : alpha_(alpha), beta_(beta) {
  if (!(alpha > 0.0) || !std::isfinite(alpha)) {
    throw DomainError("alpha must be finite and positive");
  }
  if (!(beta < 0.0) || !std::isfinite(beta)) {
    throw DomainError("beta must be finite and negative");
  }
}

BiasParameters BiasParameters::from_equilibrium(double gamma, double beta) {
  if (!(gamma > 0.0)) throw DomainError("gamma must be positive");
  // alpha * gamma^beta == 1
  return BiasParameters(std::pow(gamma, -beta), beta);
}

ForceLevel implicit_equilibrium(const BiasParameters& params) {
  return ForceLevel(std::pow(1.0 / params.alpha(), 1.0 / params.beta()));
}

double implicit_gain(const BiasParameters& params, ForceLevel r) {
  return std::abs(1.0 - params.alpha() * std::pow(r.value(), params.beta()));
}

double bias(const BiasParameters& params, ForceLevel r) {
  const double gamma = implicit_equilibrium(params).value();
  return implicit_gain(params, r) * sign_of(gamma - r.value());
}

ForceLevel reproduce(const BiasParameters& params, ForceLevel r) {
  return ForceLevel((1.0 + bias(params, r)) * r.value());
}

}  // namespace hrfi
