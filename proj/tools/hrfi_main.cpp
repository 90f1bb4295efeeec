// hrfi: command-line front end for the force-interaction toolkit.

#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "hrfi/cli.hpp"
#include "hrfi/errors.hpp"

namespace {

using hrfi::cli::ExitCode;

template <typename Fn>
int with_config_errors(Fn&& fn) {
  try {
    return fn();
  } catch (const hrfi::SchemaError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return ExitCode::kIoOrSchema;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Discrete-event human-robot force interaction toolkit"};
  app.require_subcommand(1);

  std::string out_dir = ".";
  std::string config_path;
  std::optional<std::uint64_t> seed;

  auto add_common = [&](CLI::App* cmd, bool with_config, bool with_seed) {
    cmd->add_option("--out-dir", out_dir, "Directory for output files");
    if (with_config) {
      cmd->add_option("--config", config_path, "JSON configuration file");
    }
    if (with_seed) cmd->add_option("--seed", seed, "Top-level random seed");
  };

  // fit
  std::string trials_path;
  auto* fit = app.add_subcommand("fit", "Fit alpha r^beta to a trial CSV");
  fit->add_option("trials", trials_path, "Trial CSV")->required();
  add_common(fit, false, false);

  // simulate
  hrfi::cli::SimulateConfig sim;
  bool no_bias = false;
  auto* simulate =
      app.add_subcommand("simulate", "Iterate the interaction map");
  std::optional<double> alpha, beta, r0, sigma;
  std::optional<std::size_t> phases;
  simulate->add_option("--alpha", alpha, "Bias gain alpha");
  simulate->add_option("--beta", beta, "Bias exponent beta (< 0)");
  simulate->add_option("--r0", r0, "Initial robot force [N]");
  simulate->add_option("--phases", phases, "Robot/human phase pairs");
  simulate->add_option("--sigma", sigma, "Lognormal human noise SD");
  simulate->add_flag("--no-bias", no_bias, "Disable the bias (U = 0)");
  add_common(simulate, true, true);

  // stability
  std::vector<std::string> stability_inputs;
  double significance = 0.05;
  auto* stability = app.add_subcommand(
      "stability", "Estimate the unstable region from trial CSVs");
  stability->add_option("trials", stability_inputs, "One trial CSV per agent")
      ->required();
  stability->add_option("--significance", significance, "Test level");
  add_common(stability, false, false);

  // experiment
  auto* experiment = app.add_subcommand(
      "experiment", "Run the synthetic reproduction/interaction cohort");
  add_common(experiment, true, true);

  // servo
  auto* servo_cmd =
      app.add_subcommand("servo", "Simulate the force/position servo loops");
  add_common(servo_cmd, true, false);

  // report
  std::string traces_path;
  double gamma = 0.0;
  auto* report = app.add_subcommand(
      "report", "Normalized errors, groups and convergence rate of traces");
  report->add_option("traces", traces_path, "Trace CSV")->required();
  report->add_option("--gamma", gamma, "Implicit equilibrium point [N]")
      ->required();
  add_common(report, false, false);

  CLI11_PARSE(app, argc, argv);

  const hrfi::cli::Streams io{std::cout, std::cerr};

  if (fit->parsed()) return hrfi::cli::cmd_fit(trials_path, out_dir, io);

  if (simulate->parsed()) {
    return with_config_errors([&] {
      if (!config_path.empty()) {
        sim = hrfi::cli::parse_simulate_config(
            hrfi::cli::read_file(config_path));
      }
      if (alpha) sim.alpha = *alpha;
      if (beta) sim.beta = *beta;
      if (r0) sim.r0 = *r0;
      if (phases) sim.phases = *phases;
      if (sigma) sim.noise_sigma = *sigma;
      if (no_bias) sim.bias = false;
      if (seed) sim.seed = *seed;
      return hrfi::cli::cmd_simulate(sim, out_dir, io);
    });
  }

  if (stability->parsed()) {
    return hrfi::cli::cmd_stability(stability_inputs, significance, out_dir,
                                    io);
  }

  if (experiment->parsed()) {
    return with_config_errors([&] {
      hrfi::CohortConfig cfg;
      if (!config_path.empty()) {
        cfg = hrfi::cli::parse_experiment_config(
            hrfi::cli::read_file(config_path));
      }
      if (seed) cfg.seed = *seed;
      return hrfi::cli::cmd_experiment(cfg, out_dir, io);
    });
  }

  if (servo_cmd->parsed()) {
    return with_config_errors([&] {
      hrfi::cli::ServoConfig cfg;
      if (!config_path.empty()) {
        cfg = hrfi::cli::parse_servo_config(hrfi::cli::read_file(config_path));
      }
      return hrfi::cli::cmd_servo(cfg, out_dir, io);
    });
  }

  if (report->parsed()) {
    return hrfi::cli::cmd_report(traces_path, gamma, out_dir, io);
  }
  return ExitCode::kIoOrSchema;
}
