#include "hrfi/dynamics.hpp"

#include <cmath>
#include <string>

#include "hrfi/errors.hpp"

namespace hrfi {

GeneralInteractionParams::GeneralInteractionParams(double human_gain,
                                                   double robot_gain)
    : human_gain_(human_gain), robot_gain_(robot_gain) {
  if (!(human_gain > 0.0) || !(robot_gain > 0.0) ||
      !std::isfinite(human_gain) || !std::isfinite(robot_gain)) {
    throw DomainError("voluntary gains must be finite and positive");
  }
}

ForceLevel step(const BiasParameters& params, ForceLevel r) {
  return reproduce(params, r);
}

InteractionTrace simulate(const BiasParameters& params, ForceLevel r0,
                          std::size_t n_phases, BiasMode mode) {
  if (n_phases < 1) throw DomainError("n_phases must be at least 1");
  InteractionTrace trace;
  trace.pairs.reserve(n_phases);
  ForceLevel r = r0;
  for (std::size_t k = 0; k < n_phases; ++k) {
    const ForceLevel h = mode == BiasMode::kEnabled ? step(params, r) : r;
    trace.pairs.push_back({k, r.value(), h.value()});
    r = h;
  }
  return trace;
}

double variable_gain(const BiasParameters& params, ForceLevel r) {
  const double gamma = implicit_equilibrium(params).value();
  const double distance = std::abs(gamma - r.value());
  if (distance == 0.0) return std::abs(params.beta());
  return implicit_gain(params, r) * r.value() / distance;
}

double implicit_input(const BiasParameters& params, ForceLevel r) {
  return bias(params, r) * r.value();
}

GeneralStep general_step(const GeneralInteractionParams& gains,
                         const BiasParameters& params, ForceLevel r) {
  const double human =
      gains.human_gain() * r.value() + implicit_input(params, r);
  if (!(human > 0.0)) {
    throw DomainError("general interaction left the positive domain: h = " +
                      std::to_string(human));
  }
  const double robot = gains.robot_gain() * human;
  return {ForceLevel(human), ForceLevel(robot)};
}

double transition_bound(const GeneralInteractionParams& gains,
                        double gain_k) {
  if (!(gain_k >= 0.0 && gain_k <= 1.0)) {
    throw DomainError("variable gain must lie in [0, 1]");
  }
  return std::abs(gains.robot_gain() * (gains.human_gain() - gain_k));
}

double general_error_step(const GeneralInteractionParams& gains,
                          const BiasParameters& params, double error) {
  const double gamma = implicit_equilibrium(params).value();
  const double rg = gains.robot_gain();
  const double hg = gains.human_gain();
  const double k = variable_gain(params, ForceLevel(gamma - error));
  return gamma * (1.0 - rg * hg) + rg * (hg - k) * error;
}

}  // namespace hrfi
