#pragma once

// One-DOF direct-drive joint under force control (robot phase) and
// zero-command position control (human phase), both with a disturbance
// observer (DOB). The reaction torque is estimated by a reaction torque
// observer with the DOB's structure instead of a force sensor.
//
// Plant (true parameters):
//   J theta'' = K_t I_a - b omega - (k_load theta + c_load omega + tau_ext)
//
// Force controller:
//   I_a = (J_n / K_tn) C_f (T_cmd - T_res) + I_cmp
// Position controller:
//   I_a = (J_n / K_tn) [K_p (0 - theta) + K_v (0 - omega_pd)] + I_cmp
// DOB:
//   I_cmp = g/(s+g) [K_tn I_a - J_n (g_pd s/(s+g_pd))^2 theta] / K_tn
// Reaction torque observer:
//   T_res = g_r/(s+g_r) [K_tn I_a - J_n (g_pd s/(s+g_pd))^2 theta - b_n omega_pd]
//
// Every first-order filter is Tustin-discretized; the plant is advanced with
// semi-implicit Euler.

#include <cstddef>
#include <functional>
#include <utility>
#include <vector>

#include "hrfi/bias_model.hpp"
#include "hrfi/experiments.hpp"
#include "hrfi/random.hpp"

namespace hrfi::servo {

struct PlantParams {
  double inertia = 0.005;          // J [kg m^2]
  double torque_constant = 1.0;    // K_t [N m / A]
  double friction = 0.01;          // b [N m s / rad]
  double tau_ext = 0.0;            // constant external torque [N m]
  double load_stiffness = 0.0;     // spring of the contact [N m / rad]
  double load_damping = 0.0;       // damper of the contact [N m s / rad]
};

// None of the numeric defaults are published hardware values; they are
// chosen for a well-damped loop at dt = 0.1 ms.
struct ControllerParams {
  double nominal_inertia = 0.005;        // J_n
  double nominal_torque_constant = 1.0;  // K_tn
  double force_gain = 200.0;             // C_f
  double position_gain = 2500.0;         // K_p
  double velocity_gain = 100.0;          // K_v
  double dob_cutoff = 100.0;             // g [rad/s]
  double pd_cutoff = 2000.0;             // g_pd [rad/s]
  double observer_cutoff = 200.0;        // g_r [rad/s]
  double nominal_friction = 0.0;         // b_n in the reaction observer
  double dt = 1e-4;                      // [s]
};

void validate(const PlantParams& plant);
void validate(const ControllerParams& ctrl);

// g/(s+g), Tustin.
class LowPass {
 public:
  LowPass() = default;
  LowPass(double cutoff, double dt);

  double update(double input);
  double output() const { return output_; }

 private:
  double a_ = 0.0;  // output feedback
  double b_ = 0.0;  // input weight
  double prev_input_ = 0.0;
  double output_ = 0.0;
};

// g s/(s+g), Tustin.
class PseudoDifferentiator {
 public:
  PseudoDifferentiator() = default;
  PseudoDifferentiator(double cutoff, double dt);

  double update(double input);
  double output() const { return output_; }

 private:
  double a_ = 0.0;
  double b_ = 0.0;
  double prev_input_ = 0.0;
  double output_ = 0.0;
};

struct ServoState {
  double theta = 0.0;
  double omega = 0.0;
  double time = 0.0;
  double previous_current = 0.0;
  PseudoDifferentiator velocity;      // theta -> omega_pd
  PseudoDifferentiator acceleration;  // omega_pd -> theta''_pd
  LowPass dob;
  LowPass reaction_observer;

  bool finite() const;
};

ServoState initial_state(const ControllerParams& ctrl);

struct StepOutput {
  double current = 0.0;             // I_a [A]
  double reaction_estimate = 0.0;   // T_res [N m]
};

std::pair<ServoState, StepOutput> force_control_step(
    ServoState state, const ControllerParams& ctrl, const PlantParams& plant,
    double torque_cmd);

std::pair<ServoState, StepOutput> position_control_step(
    ServoState state, const ControllerParams& ctrl, const PlantParams& plant);

// Kinetic energy of the true plant.
double kinetic_energy(const ServoState& state, const PlantParams& plant);

// Advances the plant alone by one dt with the given motor current.
ServoState open_loop_step(ServoState state, const PlantParams& plant,
                          double current, double dt);

struct Sample {
  double time = 0.0;
  double theta = 0.0;
  double current = 0.0;
  double reaction_estimate = 0.0;
};

enum class Mode { kForce, kPosition };

// Runs `seconds` of closed-loop control. `command(t)` is the torque command
// in force mode and is ignored in position mode; `plant_at(t)` lets the
// external torque change during the run. Throws DivergenceError when the
// state stops being finite or |theta| exceeds `theta_limit`.
std::vector<Sample> run(Mode mode, ServoState& state,
                        const ControllerParams& ctrl,
                        const std::function<PlantParams(double)>& plant_at,
                        const std::function<double(double)>& command,
                        double seconds, double theta_limit = 100.0);

// Earliest time after which |reaction_estimate - target| stays within
// tolerance * |target| until the end of `samples`; negative if never.
double settling_time(const std::vector<Sample>& samples, double target,
                     double tolerance);

// Mean reaction estimate over the trailing `window` seconds.
double window_mean(const std::vector<Sample>& samples, double window);

struct PhaseSetup {
  double phase_seconds = 2.0;
  double steady_window_seconds = 1.0;
  double lever_arm = 0.05;          // force [N] -> joint torque [N m]
  double human_stiffness = 20.0;    // contact during the robot phase
  double human_damping = 1.0;
};

struct PhasePairResult {
  double robot_force = 0.0;  // r measured [N]
  double human_force = 0.0;  // h measured [N]
  std::vector<Sample> robot_phase;
  std::vector<Sample> human_phase;
};

// Robot phase: force control at r_cmd against the passive human contact.
// Human phase: zero-command position control while the noisy human pushes
// with its reproduction of the measured robot force. Both forces are
// windowed means of the reaction estimate.
PhasePairResult simulate_phase_pair(const ControllerParams& ctrl,
                                    const PlantParams& plant,
                                    const NoisyHumanConfig& human, Rng& rng,
                                    ForceLevel r_cmd,
                                    const PhaseSetup& setup = {});

}  // namespace hrfi::servo
