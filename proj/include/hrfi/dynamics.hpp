#pragma once

#include <cstddef>
#include <vector>

#include "hrfi/bias_model.hpp"

namespace hrfi {

// One robot phase followed by one human phase: the robot applies r_k and the
// human answers with h_{k+1}.
struct PhasePair {
  std::size_t k = 0;
  double robot = 0.0;  // r_k
  double human = 0.0;  // h_{k+1}
};

// Alternating robot/human forces. In the marginally stable interaction the
// robot replays the human exactly, so pairs[k + 1].robot == pairs[k].human.
struct InteractionTrace {
  std::vector<PhasePair> pairs;

  double initial_force() const { return pairs.front().robot; }
  double final_force() const { return pairs.back().human; }
};

enum class BiasMode { kEnabled, kDisabled };

// Voluntary human (H) and robot (R) gains of the general interaction.
class GeneralInteractionParams {
 public:
  GeneralInteractionParams(double human_gain, double robot_gain);

  double human_gain() const { return human_gain_; }
  double robot_gain() const { return robot_gain_; }

 private:
  double human_gain_;
  double robot_gain_;
};

struct GeneralStep {
  ForceLevel human;  // h_{k+1} = H r_k + u_k
  ForceLevel robot;  // r_{k+1} = R h_{k+1}
};

// r_{k+1} = h_{k+1} = [1 + U(r_k)] r_k
ForceLevel step(const BiasParameters& params, ForceLevel r);

InteractionTrace simulate(const BiasParameters& params, ForceLevel r0,
                          std::size_t n_phases,
                          BiasMode mode = BiasMode::kEnabled);

// K(r) = delta(r) r / |gamma - r|, with the removable singularity at gamma
// filled by its limit |beta|. Lies in [0, 1] for -1 <= beta < 0.
double variable_gain(const BiasParameters& params, ForceLevel r);

// u = U(r) r, which equals K(r) (gamma - r).
double implicit_input(const BiasParameters& params, ForceLevel r);

// Throws DomainError when h_{k+1} or r_{k+1} leaves the positive domain.
GeneralStep general_step(const GeneralInteractionParams& gains,
                         const BiasParameters& params, ForceLevel r);

// |R (H - K)|. Bounded by R H when K <= H and by R when H < K.
double transition_bound(const GeneralInteractionParams& gains, double gain_k);

// Exact error recursion of the general interaction for e = gamma - r:
//   e_{k+1} = gamma (1 - R H) + R (H - K(r_k)) e_k
double general_error_step(const GeneralInteractionParams& gains,
                          const BiasParameters& params, double error);

}  // namespace hrfi
