#include "hrfi/cli.hpp"

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "hrfi/errors.hpp"
#include "hrfi/io.hpp"
#include "json.hpp"

namespace hrfi {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

class TempDir {
 public:
  TempDir() {
    static int counter = 0;
    path_ = fs::temp_directory_path() /
            ("hrfi_cli_test_" + std::to_string(::getpid()) + "_" +
             std::to_string(counter++));
    fs::remove_all(path_);
    fs::create_directories(path_);
  }
  ~TempDir() { fs::remove_all(path_); }
  std::string operator/(const std::string& name) const {
    return (path_ / name).string();
  }

 private:
  fs::path path_;
};

void write_text(const std::string& path, const std::string& text) {
  std::ofstream(path) << text;
}

json read_json(const std::string& path) {
  return json::parse(cli::read_file(path));
}

struct Capture {
  std::ostringstream out;
  std::ostringstream err;
  cli::Streams streams() { return {out, err}; }
};

TEST(IoTest, TrialsRoundTripExactly) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(1e-3, 1e3);
  std::vector<ReproductionTrial> trials;
  for (int i = 0; i < 200; ++i) {
    trials.push_back({ForceLevel(u(rng)), ForceLevel(u(rng))});
  }
  std::stringstream buf;
  io::write_trials(buf, trials);
  const auto back = io::read_trials(buf);
  ASSERT_EQ(back.size(), trials.size());
  for (std::size_t i = 0; i < trials.size(); ++i) {
    EXPECT_EQ(back[i].stimulus, trials[i].stimulus);
    EXPECT_EQ(back[i].response, trials[i].response);
  }
}

TEST(IoTest, TracesRoundTripExactly) {
  const auto traces = std::vector<InteractionTrace>{
      simulate(BiasParameters(1.006, -0.625), ForceLevel(0.3), 20),
      simulate(BiasParameters(1.006, -0.625), ForceLevel(7.0), 20)};
  std::stringstream buf;
  io::write_traces(buf, traces);
  const auto back = io::read_traces(buf);
  ASSERT_EQ(back.size(), 2u);
  for (std::size_t t = 0; t < 2; ++t) {
    ASSERT_EQ(back[t].pairs.size(), traces[t].pairs.size());
    for (std::size_t k = 0; k < traces[t].pairs.size(); ++k) {
      EXPECT_EQ(back[t].pairs[k].robot, traces[t].pairs[k].robot);
      EXPECT_EQ(back[t].pairs[k].human, traces[t].pairs[k].human);
    }
  }
}

TEST(IoTest, SchemaErrors) {
  std::istringstream empty("");
  EXPECT_THROW(io::read_trials(empty), SchemaError);
  std::istringstream header("trial,stimulus,response\n0,1,1\n");
  EXPECT_THROW(io::read_trials(header), SchemaError);
  std::istringstream bad_row("trial,stimulus_n,response_n\n0,abc,1\n");
  EXPECT_THROW(io::read_trials(bad_row), SchemaError);
  std::istringstream negative("trial,stimulus_n,response_n\n0,-1,1\n");
  EXPECT_THROW(io::read_trials(negative), SchemaError);
}

TEST(IoTest, GitBlobHash) {
  // `git hash-object` of an empty file and of "hello\n".
  EXPECT_EQ(io::git_blob_hash(""), "e69de29bb2d1d6434b8b29ae775ad8c2e48c5391");
  EXPECT_EQ(io::git_blob_hash("hello\n"),
            "ce013625030ba8dba906f756967f9e9ca394464a");
}

TEST(ConfigTest, RejectsUnknownKeysAndVersions) {
  EXPECT_THROW(cli::parse_experiment_config(R"({"schema_version":1,"sigma":1})"),
               SchemaError);
  EXPECT_THROW(cli::parse_experiment_config(R"({"schema_version":2})"),
               SchemaError);
  EXPECT_THROW(cli::parse_experiment_config(R"({"agents":3})"), SchemaError);
  EXPECT_THROW(cli::parse_experiment_config("not json"), SchemaError);
  EXPECT_THROW(cli::parse_experiment_config(
                   R"({"schema_version":1,"noise_sigma":-1})"),
               SchemaError);
  const auto c = cli::parse_experiment_config(
      R"({"schema_version":1,"agents":3,"noise_sigma":0.2,"seed":9})");
  EXPECT_EQ(c.agents, 3u);
  EXPECT_EQ(c.seed, 9u);
  EXPECT_DOUBLE_EQ(c.noise_sigma, 0.2);
}

TEST(ConfigTest, ServoValidation) {
  EXPECT_THROW(cli::parse_servo_config(
                   R"({"schema_version":1,"controller":{"dt":0.002}})"),
               SchemaError);
  EXPECT_THROW(cli::parse_servo_config(
                   R"({"schema_version":1,"scenario":{"duration":0}})"),
               SchemaError);
  EXPECT_THROW(cli::parse_servo_config(
                   R"({"schema_version":1,"plant":{"mass":1}})"),
               SchemaError);
  EXPECT_NO_THROW(cli::parse_servo_config(R"({"schema_version":1})"));
}

TEST(CmdFitTest, NoiselessFixtureReportsUnitEquilibrium) {
  TempDir dir;
  const BiasParameters p(1.0, -0.5);
  std::vector<ReproductionTrial> trials;
  for (double r : {0.5, 1.0, 2.0, 4.0, 8.0}) {
    trials.push_back({ForceLevel(r), reproduce(p, ForceLevel(r))});
  }
  {
    std::ofstream out(dir / "trials.csv");
    io::write_trials(out, trials);
  }
  Capture cap;
  ASSERT_EQ(cli::cmd_fit(dir / "trials.csv", dir / "out", cap.streams()),
            cli::kSuccess);
  const auto j = read_json(dir / "out/fit.json");
  EXPECT_NEAR(j["gamma"].get<double>(), 1.0, 1e-8);
  EXPECT_NEAR(j["beta"].get<double>(), -0.5, 1e-8);
}

TEST(CmdFitTest, ExitCodes) {
  TempDir dir;
  write_text(dir / "empty.csv", "");
  Capture cap;
  EXPECT_EQ(cli::cmd_fit(dir / "empty.csv", dir / "o", cap.streams()),
            cli::kIoOrSchema);
  EXPECT_EQ(cli::cmd_fit(dir / "missing.csv", dir / "o", cap.streams()),
            cli::kIoOrSchema);
  write_text(dir / "one_level.csv",
             "trial,stimulus_n,response_n\n0,2,1.5\n1,2,1.6\n2,2,1.4\n");
  EXPECT_EQ(cli::cmd_fit(dir / "one_level.csv", dir / "o", cap.streams()),
            cli::kDegenerate);
  EXPECT_FALSE(cap.err.str().empty());
}

TEST(CmdServoTest, DefaultScenarioTracks) {
  TempDir dir;
  Capture cap;
  ASSERT_EQ(cli::cmd_servo({}, dir / "s", cap.streams()), cli::kSuccess);
  const auto j = read_json(dir / "s/servo_metrics.json");
  EXPECT_LT(j["force_control"]["steady_error"].get<double>(), 0.01);
  EXPECT_GT(j["force_control"]["settling_time"].get<double>(), 0.0);
  EXPECT_LT(j["force_control"]["settling_time"].get<double>(), 2.0);
  EXPECT_TRUE(fs::exists(dir / "s/servo_timeseries.csv"));
}

TEST(CmdServoTest, DivergentConfigurationExitsWithThree) {
  TempDir dir;
  Capture cap;
  auto cfg = cli::parse_servo_config(
      R"({"schema_version":1,"controller":{"force_gain":1e7}})");
  EXPECT_EQ(cli::cmd_servo(cfg, dir / "s", cap.streams()), cli::kDivergence);
}

TEST(CmdExperimentTest, NoiseFreeCohortHasNoRegion) {
  TempDir dir;
  Capture cap;
  CohortConfig cfg;
  cfg.agents = 4;
  ASSERT_EQ(cli::cmd_experiment(cfg, dir / "e", cap.streams()), cli::kSuccess);
  const auto j = read_json(dir / "e/report.json");
  EXPECT_TRUE(j["stability"]["region"].is_null());
}

TEST(CmdExperimentTest, NoisyCohortRegionContainsOne) {
  TempDir dir;
  Capture cap;
  CohortConfig cfg;
  cfg.noise_sigma = 0.2;
  ASSERT_EQ(cli::cmd_experiment(cfg, dir / "e", cap.streams()), cli::kSuccess);
  const auto region = read_json(dir / "e/report.json")["stability"]["region"];
  ASSERT_FALSE(region.is_null());
  EXPECT_LT(region["lower"].get<double>(), 1.0);
  EXPECT_GT(region["upper"].get<double>(), 1.0);
}

TEST(CmdExperimentTest, SameSeedIsByteIdentical) {
  TempDir dir;
  Capture cap;
  CohortConfig cfg;
  cfg.agents = 5;
  cfg.noise_sigma = 0.2;
  cfg.threads = 1;
  ASSERT_EQ(cli::cmd_experiment(cfg, dir / "a", cap.streams()), cli::kSuccess);
  cfg.threads = 4;
  ASSERT_EQ(cli::cmd_experiment(cfg, dir / "b", cap.streams()), cli::kSuccess);
  std::size_t files = 0;
  for (const auto& entry : fs::directory_iterator(dir / "a")) {
    const auto name = entry.path().filename().string();
    EXPECT_EQ(cli::read_file(entry.path().string()),
              cli::read_file(dir / ("b/" + name)))
        << name;
    ++files;
  }
  EXPECT_EQ(files, 11u);
}

TEST(CmdReportTest, WritesErrorsAndRate) {
  TempDir dir;
  std::vector<InteractionTrace> traces;
  for (double r : {1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0, 8.0, 9.0, 10.0}) {
    traces.push_back(simulate(BiasParameters(1.0, -0.5), ForceLevel(r), 20));
  }
  {
    std::ofstream out(dir / "traces.csv");
    io::write_traces(out, traces);
  }
  Capture cap;
  ASSERT_EQ(cli::cmd_report(dir / "traces.csv", 1.0, dir / "r", cap.streams()),
            cli::kSuccess);
  const auto j = read_json(dir / "r/report.json");
  EXPECT_DOUBLE_EQ(j["asymptotic_convergence_rate"].get<double>(), 100.0);
  EXPECT_TRUE(fs::exists(dir / "r/errors.csv"));
}

}  // namespace
}  // namespace hrfi
