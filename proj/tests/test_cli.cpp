#include <cstdlib>
#include <filesystem>
#include <sstream>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "cli.hpp"
#include "lobforge/agents.hpp"
#include "lobforge/calibrate.hpp"
#include "lobforge/data_io.hpp"
#include "lobforge/params_io.hpp"
#include "lobforge/snapshot.hpp"
#include "test_support.hpp"

using namespace lobforge;
namespace fs = std::filesystem;
using lobforge::testing::fresh_dir;
using lobforge::testing::read_file;
using lobforge::testing::table1_row1;

namespace {

int run(const std::vector<std::string>& args) { return cli::run(args); }

const std::string kConfigDir = std::string(LOBFORGE_SOURCE_DIR) + "/config";

struct Fixture {
  fs::path dir;
  std::string params;
  std::string bounds;
  std::string day;
  std::string events;
  std::string initial;
};

// Writes one simulated day (snapshots plus events) once per test binary.
const Fixture& fixture() {
  static const Fixture f = [] {
    Fixture x;
    x.dir = fresh_dir("cli_fixture");
    x.params = kConfigDir + "/reference_params.json";
    x.bounds = kConfigDir + "/bounds.json";
    SimConfig c;
    c.T = 600;
    c.seed = 3;
    SimOptions o;
    o.keep_trace = true;
    const SimResult r = simulate(table1_row1(), c, o);
    x.day = (x.dir / "day.csv").string();
    write_snapshot_csv_file(x.day, r.snapshots);
    x.events = (x.dir / "events.csv").string();
    write_events_file(x.events, trace_to_events(r.traces, 10.0));
    x.initial = (x.dir / "initial.json").string();
    write_json_file(x.initial, initial_book_to_json(default_initial_book(table1_row1())));
    return x;
  }();
  return f;
}

std::vector<std::vector<std::string>> read_csv(const fs::path& p) {
  std::vector<std::vector<std::string>> rows;
  std::istringstream in(read_file(p));
  std::string line;
  while (std::getline(in, line)) {
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    rows.push_back(cells);
  }
  return rows;
}

}  // namespace

TEST(Cli, SimulateWritesPair) {
  const fs::path out = fresh_dir("cli_sim");
  EXPECT_EQ(run({"simulate", "--params", fixture().params, "--T", "100", "--seed", "4", "--out", out.string()}), 0);
  EXPECT_TRUE(fs::exists(out / "sim_000.csv"));
  EXPECT_TRUE(fs::exists(out / "sim_000.json"));
  EXPECT_FALSE(fs::exists(out / "sim_001.csv"));
}

TEST(Cli, SimulateByteIdentical) {
  const fs::path a = fresh_dir("cli_sim_a");
  const fs::path b = fresh_dir("cli_sim_b");
  for (const auto& out : {a, b})
    ASSERT_EQ(run({"simulate", "--params", fixture().params, "--T", "200", "--reps", "2", "--seed", "11", "--out",
                   out.string()}),
              0);
  for (const char* f : {"sim_000.csv", "sim_000.json", "sim_001.csv", "sim_001.json"})
    EXPECT_EQ(read_file(a / f), read_file(b / f)) << f;
  EXPECT_NE(read_file(a / "sim_000.csv"), read_file(a / "sim_001.csv"));
}

TEST(Cli, SeedFromEnvironment) {
  const fs::path a = fresh_dir("cli_env_a");
  const fs::path b = fresh_dir("cli_env_b");
  ASSERT_EQ(setenv("LOBFORGE_SEED", "21", 1), 0);
  EXPECT_EQ(run({"simulate", "--params", fixture().params, "--T", "50", "--out", a.string()}), 0);
  unsetenv("LOBFORGE_SEED");
  EXPECT_EQ(run({"simulate", "--params", fixture().params, "--T", "50", "--seed", "21", "--out", b.string()}), 0);
  EXPECT_EQ(read_file(a / "sim_000.csv"), read_file(b / "sim_000.csv"));
}

TEST(Cli, QuoteToTradeAtMostOne) {
  const fs::path out = fresh_dir("cli_qtt");
  ::testing::internal::CaptureStderr();
  const int code = run({"simulate", "--params", fixture().params, "--qtt-ratio", "1", "--out", out.string()});
  const std::string err = ::testing::internal::GetCapturedStderr();
  EXPECT_EQ(code, 2);
  EXPECT_NE(err.find("--qtt-ratio"), std::string::npos);
}

TEST(Cli, ConfigAndRuntimeErrors) {
  const fs::path out = fresh_dir("cli_errors");
  ::testing::internal::CaptureStderr();
  EXPECT_EQ(run({"simulate", "--params", fixture().params, "--bogus", "--out", out.string()}), 2);
  EXPECT_EQ(run({"simulate", "--out", out.string()}), 2);
  EXPECT_EQ(run({"simulate", "--params", (out / "missing.json").string(), "--out", out.string()}), 2);
  EXPECT_EQ(run({"analyze", "coverage", "--data", fixture().day, "--out", out.string()}), 2);
  EXPECT_EQ(run({"calibrate", "--data", fixture().day, "--bounds", fixture().bounds, "--pop", "1", "--out",
                 out.string()}),
            2);
  ::testing::internal::GetCapturedStderr();
}

TEST(Cli, HelpExitsZero) {
  ::testing::internal::CaptureStdout();
  EXPECT_EQ(run({"simulate", "--help"}), 0);
  const std::string help = ::testing::internal::GetCapturedStdout();
  for (const char* flag : {"--params", "--config", "--out", "--qtt-ratio", "--reps", "--seed", "--jobs"})
    EXPECT_NE(help.find(flag), std::string::npos) << flag;
}

TEST(Cli, CalibrateZeroGenerations) {
  const fs::path out = fresh_dir("cli_cal0");
  ASSERT_EQ(run({"calibrate", "--data", fixture().day, "--bounds", fixture().bounds, "--pop", "6", "--gens", "0",
                 "--T", "300", "--out", out.string()}),
            0);
  const Json r = read_json_file((out / "report.json").string());
  EXPECT_EQ(r["population"].size(), 6u);
  EXPECT_TRUE(fs::exists(out / "front.csv"));
  EXPECT_TRUE(fs::exists(out / "target.json"));
}

TEST(Cli, CalibrateSingleObjective) {
  const fs::path out = fresh_dir("cli_single");
  ASSERT_EQ(run({"calibrate", "--data", fixture().day, "--bounds", fixture().bounds, "--single-objective",
                 "--iterations", "4", "--T", "300", "--out", out.string()}),
            0);
  const Json r = read_json_file((out / "single.json").string());
  EXPECT_EQ(r["trace"].size(), 4u);
}

TEST(Cli, AnalyzeAuxWritesCoefficients) {
  const fs::path out = fresh_dir("cli_aux");
  ASSERT_EQ(run({"analyze", "aux", "--data", fixture().day, "--out", out.string()}), 0);
  const Json j = read_json_file((out / "aux.json").string());
  EXPECT_EQ(j["beta1"].size(), 3u);
  EXPECT_EQ(j["beta2"].size(), 4u);
}

TEST(Cli, CorrelationCsvSymmetric) {
  const fs::path out = fresh_dir("cli_corr");
  ASSERT_EQ(run({"analyze", "correlations", "--data", fixture().events, "--initial", fixture().initial, "--out",
                 out.string()}),
            0);
  const auto rows = read_csv(out / "correlations.csv");
  ASSERT_GT(rows.size(), 2u);
  const std::size_t n = rows.size() - 1;
  for (std::size_t i = 1; i <= n; ++i) {
    ASSERT_EQ(rows[i].size(), n + 1);
    EXPECT_EQ(rows[i][0], rows[0][i]);
    for (std::size_t j = 1; j <= n; ++j) EXPECT_EQ(rows[i][j], rows[j][i]);
    EXPECT_EQ(std::stod(rows[i][i]), 1.0);
  }
}

TEST(Cli, SizesHistogram) {
  const fs::path out = fresh_dir("cli_sizes");
  ASSERT_EQ(run({"analyze", "sizes", "--data", fixture().events, "--out", out.string()}), 0);
  EXPECT_TRUE(fs::exists(out / "sizes.csv"));
}

TEST(Cli, CoverageFromParameterFile) {
  const fs::path out = fresh_dir("cli_cov");
  ::testing::internal::CaptureStderr();
  EXPECT_EQ(run({"analyze", "coverage", "--data", fixture().day, "--front", fixture().params, "--reps", "2", "--out",
                 out.string()}),
            2);
  ::testing::internal::GetCapturedStderr();
  ASSERT_EQ(run({"analyze", "coverage", "--data", fixture().day, "--front", fixture().params, "--reps", "20",
                 "--out", out.string()}),
            0);
  const Json j = read_json_file((out / "coverage.json").string());
  const double overall = j["overall"].get<double>();
  EXPECT_GE(overall, 0.0);
  EXPECT_LE(overall, 1.0);
}
