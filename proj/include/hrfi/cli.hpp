#pragma once

// Command implementations behind the `hrfi` tool. Each command validates its
// configuration, writes its outputs under `out_dir` and returns the process
// exit code.

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "hrfi/experiments.hpp"
#include "hrfi/servo_sim.hpp"

namespace hrfi::cli {

enum ExitCode : int {
  kSuccess = 0,
  kIoOrSchema = 1,
  kDegenerate = 2,
  kDivergence = 3,
};

inline constexpr int kSchemaVersion = 1;

struct SimulateConfig {
  double alpha = 1.006;
  double beta = -0.625;
  double r0 = 2.0;
  std::size_t phases = 20;
  double noise_sigma = 0.0;
  bool bias = true;
  std::uint64_t seed = 1;
};

struct ServoScenario {
  double torque_cmd = 1.0;          // force-control step [N m]
  double duration = 3.0;            // per scenario [s]
  double load_stiffness = 100.0;    // contact during force control
  double load_damping = 2.0;
  double disturbance_torque = 0.5;  // injected during force control
  double disturbance_time = 1.5;
  double hold_torque = 0.2;         // human torque during position control
  double lever_arm = 0.05;          // torque -> force for the CSV dump
  double tolerance = 0.01;          // settling band, relative
  std::size_t decimation = 10;
};

struct ServoConfig {
  servo::ControllerParams controller;
  servo::PlantParams plant;
  ServoScenario scenario;
};

// Parsers reject unknown keys and a schema_version other than 1.
CohortConfig parse_experiment_config(const std::string& json_text);
ServoConfig parse_servo_config(const std::string& json_text);
SimulateConfig parse_simulate_config(const std::string& json_text);

std::string read_file(const std::string& path);

struct Streams {
  std::ostream& out;
  std::ostream& err;
};

int cmd_fit(const std::string& trials_csv, const std::string& out_dir,
            Streams io);

int cmd_simulate(const SimulateConfig& cfg, const std::string& out_dir,
                 Streams io);

int cmd_stability(const std::vector<std::string>& trial_csvs,
                  double significance, const std::string& out_dir, Streams io);

int cmd_experiment(const CohortConfig& cfg, const std::string& out_dir,
                   Streams io);

int cmd_servo(const ServoConfig& cfg, const std::string& out_dir, Streams io);

int cmd_report(const std::string& traces_csv, double gamma,
               const std::string& out_dir, Streams io);

}  // namespace hrfi::cli
