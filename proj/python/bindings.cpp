#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "hrfi/bias_model.hpp"
#include "hrfi/dynamics.hpp"
#include "hrfi/errors.hpp"
#include "hrfi/experiments.hpp"
#include "hrfi/fitting.hpp"
#include "hrfi/servo_sim.hpp"
#include "hrfi/stability.hpp"
#include "hrfi/stats.hpp"

namespace py = pybind11;
using namespace pybind11::literals;

namespace {

using hrfi::BiasParameters;
using hrfi::ForceLevel;

py::dict trace_dict(const hrfi::InteractionTrace& trace) {
  std::vector<double> robot;
  std::vector<double> human;
  for (const auto& p : trace.pairs) {
    robot.push_back(p.robot);
    human.push_back(p.human);
  }
  return py::dict("robot"_a = robot, "human"_a = human);
}

std::vector<hrfi::ReproductionTrial> make_trials(
    const std::vector<double>& stimuli, const std::vector<double>& responses) {
  if (stimuli.size() != responses.size()) {
    throw hrfi::DomainError("stimuli and responses differ in length");
  }
  std::vector<hrfi::ReproductionTrial> trials;
  for (std::size_t i = 0; i < stimuli.size(); ++i) {
    trials.push_back({ForceLevel(stimuli[i]), ForceLevel(responses[i])});
  }
  return trials;
}

py::object region_object(const std::optional<hrfi::UnstableRegion>& region) {
  if (!region) return py::none();
  const auto rep = region->reported();
  return py::dict("lower"_a = region->lower(), "upper"_a = region->upper(),
                  "error_radius"_a = region->error_radius(),
                  "reported"_a = py::make_tuple(rep.lower, rep.upper,
                                                rep.error_radius));
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Human-robot force interaction: bias model, dynamics, stability, "
            "fitting, statistics and servo simulation";

  py::register_exception<hrfi::DegenerateError>(m, "DegenerateError",
                                                PyExc_RuntimeError);
  py::register_exception<hrfi::DivergenceError>(m, "DivergenceError",
                                                PyExc_RuntimeError);
  py::register_exception<hrfi::SchemaError>(m, "SchemaError",
                                            PyExc_RuntimeError);

  // bias model
  py::class_<BiasParameters>(m, "BiasParameters")
      .def(py::init<double, double>(), "alpha"_a, "beta"_a)
      .def_static("from_equilibrium", &BiasParameters::from_equilibrium,
                  "gamma"_a, "beta"_a)
      .def_property_readonly("alpha", &BiasParameters::alpha)
      .def_property_readonly("beta", &BiasParameters::beta)
      .def("__repr__", [](const BiasParameters& p) {
        return "BiasParameters(alpha=" + std::to_string(p.alpha()) +
               ", beta=" + std::to_string(p.beta()) + ")";
      });

  m.def("implicit_equilibrium", [](const BiasParameters& p) {
    return hrfi::implicit_equilibrium(p).value();
  });
  m.def("implicit_gain", [](const BiasParameters& p, double r) {
    return hrfi::implicit_gain(p, ForceLevel(r));
  });
  m.def("bias", [](const BiasParameters& p, double r) {
    return hrfi::bias(p, ForceLevel(r));
  });
  m.def("reproduce", [](const BiasParameters& p, double r) {
    return hrfi::reproduce(p, ForceLevel(r)).value();
  });

  // dynamics
  m.def("step", [](const BiasParameters& p, double r) {
    return hrfi::step(p, ForceLevel(r)).value();
  });
  m.def(
      "simulate",
      [](const BiasParameters& p, double r0, std::size_t phases, bool bias) {
        return trace_dict(hrfi::simulate(
            p, ForceLevel(r0), phases,
            bias ? hrfi::BiasMode::kEnabled : hrfi::BiasMode::kDisabled));
      },
      "params"_a, "r0"_a, "phases"_a, "bias"_a = true);
  m.def("variable_gain", [](const BiasParameters& p, double r) {
    return hrfi::variable_gain(p, ForceLevel(r));
  });

  // stability
  m.def("evaluation_value", &hrfi::evaluation_value, "gamma"_a, "r"_a,
        "delta"_a);
  m.def("delta_v_closed_form", &hrfi::delta_v_closed_form, "gamma"_a, "r"_a,
        "delta"_a, "sign_e"_a);
  m.def("delta_v_direct", &hrfi::delta_v_direct, "gamma"_a, "r"_a,
        "h_next"_a);
  m.def(
      "estimate_unstable_region",
      [](const std::map<double, std::vector<double>>& levels,
         double significance) {
        std::vector<hrfi::LevelSamples> in;
        for (const auto& [x, e] : levels) in.push_back({x, "python", e});
        const auto est = hrfi::estimate_unstable_region(in, significance);
        py::list tests;
        for (const auto& t : est.levels) {
          tests.append(py::dict("level"_a = t.level, "mean_e"_a = t.mean_e,
                                "p_value"_a = t.p_value,
                                "significant"_a = t.significant));
        }
        return py::dict("levels"_a = tests,
                        "region"_a = region_object(est.region));
      },
      "levels"_a, "significance"_a = 0.05,
      "Map of normalized force level -> per-trial E values.");

  // fitting
  py::enum_<hrfi::FitStatus>(m, "FitStatus")
      .value("converged", hrfi::FitStatus::kConverged)
      .value("iteration_limit", hrfi::FitStatus::kIterationLimit)
      .value("boundary", hrfi::FitStatus::kBoundary);
  py::class_<hrfi::FitResult>(m, "FitResult")
      .def_readonly("params", &hrfi::FitResult::params)
      .def_readonly("rmse", &hrfi::FitResult::rmse)
      .def_readonly("converged", &hrfi::FitResult::converged)
      .def_readonly("status", &hrfi::FitResult::status)
      .def_readonly("iterations", &hrfi::FitResult::iterations)
      .def_property_readonly("gamma", [](const hrfi::FitResult& f) {
        return hrfi::implicit_equilibrium(f.params).value();
      });
  m.def(
      "fit_power_law",
      [](const std::vector<double>& stimuli,
         const std::vector<double>& responses) {
        return hrfi::fit_power_law(make_trials(stimuli, responses));
      },
      "stimuli"_a, "responses"_a);
  m.def(
      "rmse",
      [](const std::vector<double>& stimuli,
         const std::vector<double>& responses, const BiasParameters& p) {
        return hrfi::rmse(make_trials(stimuli, responses), p);
      },
      "stimuli"_a, "responses"_a, "params"_a);

  // statistics
  auto st = m.def_submodule("stats", "One-sided t tests");
  py::class_<hrfi::stats::TestResult>(st, "TestResult")
      .def_readonly("statistic", &hrfi::stats::TestResult::statistic)
      .def_readonly("dof", &hrfi::stats::TestResult::dof)
      .def_readonly("p_value", &hrfi::stats::TestResult::p_value)
      .def("significant", &hrfi::stats::TestResult::significant,
           "alpha"_a = 0.05);
  auto direction = [](const std::string& d) {
    if (d == "less") return hrfi::stats::Direction::kLess;
    if (d == "greater") return hrfi::stats::Direction::kGreater;
    throw hrfi::DomainError("direction must be 'less' or 'greater'");
  };
  st.def("t_cdf", &hrfi::stats::t_cdf, "t"_a, "dof"_a);
  st.def(
      "one_sample_t",
      [=](const std::vector<double>& x, const std::string& d, double mu0) {
        return hrfi::stats::one_sample_t(x, direction(d), mu0);
      },
      "x"_a, "direction"_a = "less", "mu0"_a = 0.0);
  st.def(
      "paired_t",
      [=](const std::vector<double>& x, const std::vector<double>& y,
          const std::string& d) {
        return hrfi::stats::paired_t_one_sided(x, y, direction(d));
      },
      "x"_a, "y"_a, "direction"_a);
  st.def(
      "welch_t",
      [=](const std::vector<double>& x, const std::vector<double>& y,
          const std::string& d) {
        return hrfi::stats::welch_t_one_sided(x, y, direction(d));
      },
      "x"_a, "y"_a, "direction"_a);
  st.def("outlier_flag", &hrfi::stats::outlier_flag, "per_participant"_a,
         "sd_multiplier"_a = 10.0);

  // experiments
  py::class_<hrfi::CohortConfig>(m, "CohortConfig")
      .def(py::init<>())
      .def_readwrite("seed", &hrfi::CohortConfig::seed)
      .def_readwrite("agents", &hrfi::CohortConfig::agents)
      .def_readwrite("beta", &hrfi::CohortConfig::beta)
      .def_readwrite("gamma_mean", &hrfi::CohortConfig::gamma_mean)
      .def_readwrite("gamma_sd", &hrfi::CohortConfig::gamma_sd)
      .def_readwrite("noise_sigma", &hrfi::CohortConfig::noise_sigma)
      .def_readwrite("robot_noise_sigma",
                     &hrfi::CohortConfig::robot_noise_sigma)
      .def_readwrite("force_levels", &hrfi::CohortConfig::force_levels)
      .def_readwrite("repetitions", &hrfi::CohortConfig::repetitions)
      .def_readwrite("phases", &hrfi::CohortConfig::phases)
      .def_readwrite("significance", &hrfi::CohortConfig::significance)
      .def_readwrite("exclude_outliers", &hrfi::CohortConfig::exclude_outliers)
      .def_readwrite("threads", &hrfi::CohortConfig::threads);
  m.def(
      "run_cohort",
      [](const hrfi::CohortConfig& cfg) {
        hrfi::CohortResult r;
        {
          py::gil_scoped_release release;
          r = hrfi::run_cohort(cfg);
        }
        py::list agents;
        for (const auto& a : r.agents) {
          py::list traces;
          for (const auto& t : a.traces) traces.append(trace_dict(t));
          agents.append(py::dict(
              "true_params"_a = a.true_params, "fit"_a = a.fit,
              "gamma_hat"_a = a.gamma_hat, "traces"_a = traces));
        }
        py::object region = py::none();
        if (r.stability) region = region_object(r.stability->region);
        return py::dict("agents"_a = agents, "region"_a = region,
                        "outliers"_a = r.outliers,
                        "divergence_rate"_a = r.divergence_rate,
                        "asymptotic_convergence_rate"_a =
                            r.asymptotic_convergence_rate);
      },
      "config"_a);

  // servo
  auto sv = m.def_submodule("servo", "Force/position servo with DOB");
  py::class_<hrfi::servo::PlantParams>(sv, "PlantParams")
      .def(py::init<>())
      .def_readwrite("inertia", &hrfi::servo::PlantParams::inertia)
      .def_readwrite("torque_constant",
                     &hrfi::servo::PlantParams::torque_constant)
      .def_readwrite("friction", &hrfi::servo::PlantParams::friction)
      .def_readwrite("tau_ext", &hrfi::servo::PlantParams::tau_ext)
      .def_readwrite("load_stiffness", &hrfi::servo::PlantParams::load_stiffness)
      .def_readwrite("load_damping", &hrfi::servo::PlantParams::load_damping);
  py::class_<hrfi::servo::ControllerParams>(sv, "ControllerParams")
      .def(py::init<>())
      .def_readwrite("nominal_inertia",
                     &hrfi::servo::ControllerParams::nominal_inertia)
      .def_readwrite("nominal_torque_constant",
                     &hrfi::servo::ControllerParams::nominal_torque_constant)
      .def_readwrite("force_gain", &hrfi::servo::ControllerParams::force_gain)
      .def_readwrite("position_gain",
                     &hrfi::servo::ControllerParams::position_gain)
      .def_readwrite("velocity_gain",
                     &hrfi::servo::ControllerParams::velocity_gain)
      .def_readwrite("dob_cutoff", &hrfi::servo::ControllerParams::dob_cutoff)
      .def_readwrite("pd_cutoff", &hrfi::servo::ControllerParams::pd_cutoff)
      .def_readwrite("observer_cutoff",
                     &hrfi::servo::ControllerParams::observer_cutoff)
      .def_readwrite("dt", &hrfi::servo::ControllerParams::dt);
  sv.def(
      "run",
      [](const std::string& mode, const hrfi::servo::ControllerParams& ctrl,
         const hrfi::servo::PlantParams& plant, double torque_cmd,
         double seconds) {
        using namespace hrfi::servo;
        validate(ctrl);
        validate(plant);
        const Mode md = mode == "force"      ? Mode::kForce
                        : mode == "position" ? Mode::kPosition
                                             : throw hrfi::DomainError(
                                                   "mode must be 'force' or "
                                                   "'position'");
        auto state = initial_state(ctrl);
        const auto samples = run(
            md, state, ctrl, [&](double) { return plant; },
            [&](double) { return torque_cmd; }, seconds);
        std::vector<double> t, theta, current, reaction;
        for (const auto& s : samples) {
          t.push_back(s.time);
          theta.push_back(s.theta);
          current.push_back(s.current);
          reaction.push_back(s.reaction_estimate);
        }
        return py::dict("time"_a = t, "theta"_a = theta, "current"_a = current,
                        "reaction_estimate"_a = reaction);
      },
      "mode"_a, "controller"_a, "plant"_a, "torque_cmd"_a = 0.0,
      "seconds"_a = 1.0);
}
