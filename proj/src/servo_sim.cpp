#include "hrfi/servo_sim.hpp"

#include <cmath>
#include <string>

#include "hrfi/errors.hpp"

namespace hrfi::servo {
namespace {

void require_positive(double x, const char* name) {
  if (!(x > 0.0) || !std::isfinite(x)) {
    throw DomainError(std::string(name) + " must be finite and positive");
  }
}

// Estimates shared by both controllers, evaluated on the measured angle
// before the current for this sample is chosen.
struct Observed {
  double velocity;
  double disturbance_current;
  double reaction;
};

Observed observe(ServoState& s, const ControllerParams& ctrl) {
  const double omega_pd = s.velocity.update(s.theta);
  const double accel_pd = s.acceleration.update(omega_pd);
  const double motor_torque =
      ctrl.nominal_torque_constant * s.previous_current;
  const double inertial = ctrl.nominal_inertia * accel_pd;
  const double dist = s.dob.update(motor_torque - inertial);
  const double reaction = s.reaction_observer.update(
      motor_torque - inertial - ctrl.nominal_friction * omega_pd);
  return {omega_pd, dist / ctrl.nominal_torque_constant, reaction};
}

void advance_plant(ServoState& s, const PlantParams& plant, double current,
                   double dt) {
  const double load = plant.load_stiffness * s.theta +
                      plant.load_damping * s.omega + plant.tau_ext;
  const double accel = (plant.torque_constant * current -
                        plant.friction * s.omega - load) /
                       plant.inertia;
  s.omega += dt * accel;
  s.theta += dt * s.omega;
  s.time += dt;
}

void require_finite(const ServoState& s) {
  if (!s.finite()) throw DivergenceError("servo state is not finite");
}

}  // namespace

void validate(const PlantParams& plant) {
  require_positive(plant.inertia, "inertia");
  require_positive(plant.torque_constant, "torque constant");
  if (!(plant.friction >= 0.0)) throw DomainError("friction must be >= 0");
  if (!(plant.load_stiffness >= 0.0) || !(plant.load_damping >= 0.0)) {
    throw DomainError("load impedance must be non-negative");
  }
  if (!std::isfinite(plant.tau_ext)) throw DomainError("tau_ext not finite");
}

void validate(const ControllerParams& ctrl) {
  require_positive(ctrl.nominal_inertia, "nominal inertia");
  require_positive(ctrl.nominal_torque_constant, "nominal torque constant");
  require_positive(ctrl.force_gain, "force gain");
  require_positive(ctrl.position_gain, "position gain");
  require_positive(ctrl.velocity_gain, "velocity gain");
  require_positive(ctrl.dob_cutoff, "DOB cutoff");
  require_positive(ctrl.pd_cutoff, "pseudo-differentiation cutoff");
  require_positive(ctrl.observer_cutoff, "observer cutoff");
  require_positive(ctrl.dt, "dt");
  if (ctrl.dt > 1e-3) throw DomainError("dt must not exceed 1 ms");
  if (!(ctrl.nominal_friction >= 0.0)) {
    throw DomainError("nominal friction must be >= 0");
  }
}

LowPass::LowPass(double cutoff, double dt) {
  const double w = cutoff * dt;
  a_ = (2.0 - w) / (2.0 + w);
  b_ = w / (2.0 + w);
}

double LowPass::update(double input) {
  output_ = a_ * output_ + b_ * (input + prev_input_);
  prev_input_ = input;
  return output_;
}

PseudoDifferentiator::PseudoDifferentiator(double cutoff, double dt) {
  const double w = cutoff * dt;
  a_ = (2.0 - w) / (2.0 + w);
  b_ = 2.0 * cutoff / (2.0 + w);
}

double PseudoDifferentiator::update(double input) {
  output_ = a_ * output_ + b_ * (input - prev_input_);
  prev_input_ = input;
  return output_;
}

bool ServoState::finite() const {
  return std::isfinite(theta) && std::isfinite(omega) &&
         std::isfinite(previous_current) && std::isfinite(velocity.output()) &&
         std::isfinite(acceleration.output()) && std::isfinite(dob.output()) &&
         std::isfinite(reaction_observer.output());
}

ServoState initial_state(const ControllerParams& ctrl) {
  validate(ctrl);
  ServoState s;
  s.velocity = PseudoDifferentiator(ctrl.pd_cutoff, ctrl.dt);
  s.acceleration = PseudoDifferentiator(ctrl.pd_cutoff, ctrl.dt);
  s.dob = LowPass(ctrl.dob_cutoff, ctrl.dt);
  s.reaction_observer = LowPass(ctrl.observer_cutoff, ctrl.dt);
  return s;
}

std::pair<ServoState, StepOutput> force_control_step(
    ServoState state, const ControllerParams& ctrl, const PlantParams& plant,
    double torque_cmd) {
  require_finite(state);
  const Observed obs = observe(state, ctrl);
  const double current = ctrl.nominal_inertia / ctrl.nominal_torque_constant *
                             ctrl.force_gain * (torque_cmd - obs.reaction) +
                         obs.disturbance_current;
  advance_plant(state, plant, current, ctrl.dt);
  state.previous_current = current;
  require_finite(state);
  return {state, {current, obs.reaction}};
}

std::pair<ServoState, StepOutput> position_control_step(
    ServoState state, const ControllerParams& ctrl, const PlantParams& plant) {
  require_finite(state);
  const Observed obs = observe(state, ctrl);
  const double current =
      ctrl.nominal_inertia / ctrl.nominal_torque_constant *
          (ctrl.position_gain * (0.0 - state.theta) +
           ctrl.velocity_gain * (0.0 - obs.velocity)) +
      obs.disturbance_current;
  advance_plant(state, plant, current, ctrl.dt);
  state.previous_current = current;
  require_finite(state);
  return {state, {current, obs.reaction}};
}

double kinetic_energy(const ServoState& state, const PlantParams& plant) {
  return 0.5 * plant.inertia * state.omega * state.omega;
}

ServoState open_loop_step(ServoState state, const PlantParams& plant,
                          double current, double dt) {
  advance_plant(state, plant, current, dt);
  return state;
}

std::vector<Sample> run(Mode mode, ServoState& state,
                        const ControllerParams& ctrl,
                        const std::function<PlantParams(double)>& plant_at,
                        const std::function<double(double)>& command,
                        double seconds, double theta_limit) {
  validate(ctrl);
  if (!(seconds > 0.0)) throw DomainError("run length must be positive");
  const auto steps = static_cast<std::size_t>(std::llround(seconds / ctrl.dt));
  std::vector<Sample> samples;
  samples.reserve(steps);
  for (std::size_t i = 0; i < steps; ++i) {
    const double t = state.time;
    const PlantParams plant = plant_at(t);
    auto [next, out] =
        mode == Mode::kForce
            ? force_control_step(std::move(state), ctrl, plant, command(t))
            : position_control_step(std::move(state), ctrl, plant);
    state = std::move(next);
    if (std::abs(state.theta) > theta_limit) {
      throw DivergenceError("joint angle left the +/-" +
                            std::to_string(theta_limit) + " rad envelope at t=" +
                            std::to_string(state.time));
    }
    samples.push_back({t, state.theta, out.current, out.reaction_estimate});
  }
  return samples;
}

double settling_time(const std::vector<Sample>& samples, double target,
                     double tolerance) {
  const double band = tolerance * std::abs(target);
  double settled = -1.0;
  for (auto it = samples.rbegin(); it != samples.rend(); ++it) {
    if (std::abs(it->reaction_estimate - target) > band) break;
    settled = it->time;
  }
  return settled;
}

double window_mean(const std::vector<Sample>& samples, double window) {
  if (samples.empty()) throw DomainError("no samples to average");
  const double t_end = samples.back().time;
  double sum = 0.0;
  std::size_t n = 0;
  for (auto it = samples.rbegin(); it != samples.rend(); ++it) {
    if (t_end - it->time >= window) break;
    sum += it->reaction_estimate;
    ++n;
  }
  return sum / static_cast<double>(n);
}

PhasePairResult simulate_phase_pair(const ControllerParams& ctrl,
                                    const PlantParams& plant,
                                    const NoisyHumanConfig& human, Rng& rng,
                                    ForceLevel r_cmd, const PhaseSetup& setup) {
  validate(ctrl);
  validate(plant);
  if (!(setup.phase_seconds > 0.0) || !(setup.steady_window_seconds > 0.0) ||
      setup.steady_window_seconds > setup.phase_seconds) {
    throw DomainError("need phase_seconds >= steady_window_seconds > 0");
  }
  require_positive(setup.lever_arm, "lever arm");

  PhasePairResult result;

  PlantParams contact = plant;
  contact.load_stiffness += setup.human_stiffness;
  contact.load_damping += setup.human_damping;
  ServoState state = initial_state(ctrl);
  const double torque_cmd = r_cmd.value() * setup.lever_arm;
  result.robot_phase =
      run(Mode::kForce, state, ctrl, [&](double) { return contact; },
          [&](double) { return torque_cmd; }, setup.phase_seconds);
  result.robot_force =
      window_mean(result.robot_phase, setup.steady_window_seconds) /
      setup.lever_arm;

  // The human answers the force it felt.
  const ForceLevel h =
      reproduce_noisy(human, ForceLevel(result.robot_force), rng);
  PlantParams pushing = plant;
  pushing.tau_ext += h.value() * setup.lever_arm;
  state = initial_state(ctrl);
  result.human_phase =
      run(Mode::kPosition, state, ctrl, [&](double) { return pushing; },
          [](double) { return 0.0; }, setup.phase_seconds);
  result.human_force =
      window_mean(result.human_phase, setup.steady_window_seconds) /
      setup.lever_arm;
  return result;
}

}  // namespace hrfi::servo
