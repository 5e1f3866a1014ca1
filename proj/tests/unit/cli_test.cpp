#include "cli.hpp"

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

namespace fs = std::filesystem;

namespace {

struct Outcome {
  int code;
  std::string out;
  std::string err;
};

Outcome run(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = kato::cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("kato_cli_test_" + name);
  fs::remove_all(dir);
  return dir;
}

TEST(Cli, UsageAndHelp) {
  EXPECT_EQ(run({}).code, 1);
  EXPECT_EQ(run({"--help"}).code, 0);
  EXPECT_EQ(run({"evolve", "--help"}).code, 0);
  const Outcome bad = run({"launch"});
  EXPECT_EQ(bad.code, 1);
  EXPECT_FALSE(bad.err.empty());
}

TEST(Cli, InputErrorsExitWithOne) {
  EXPECT_EQ(run({"semigroup", "--preset", "NOPE", "--s", "0.5"}).code, 1);
  EXPECT_EQ(run({"product", "--preset", "DIFF1", "--plan", "0:0.3"}).code, 1);
  EXPECT_EQ(run({"product", "--preset", "DIFF1"}).code, 1);
  EXPECT_EQ(run({"semigroup", "--preset", "SCAL0", "--s", "0.5", "--profile", "wavy"}).code, 1);

  const fs::path dir = scratch("config");
  fs::create_directories(dir);
  const fs::path cfg = dir / "bad.json";
  std::ofstream(cfg) << R"({"preset": "SCAL0", "operator": {"type": "zero", "mu0": 1}})";
  const Outcome o = run({"semigroup", "--scenario", cfg.string(), "--s", "0.5"});
  EXPECT_EQ(o.code, 1);
  EXPECT_NE(o.err.find("operator.mu0"), std::string::npos) << o.err;
  fs::remove_all(dir);
}

TEST(Cli, SemigroupWritesItsState) {
  const fs::path dir = scratch("semigroup");
  const Outcome o = run({"semigroup", "--preset", "SCAL0", "--t", "0", "--s", "0.5", "--out", dir.string()});
  ASSERT_EQ(o.code, 0) << o.err;
  EXPECT_NE(o.out.find("\"command\": \"semigroup\""), std::string::npos);
  std::ifstream csv(dir / "semigroup_state.csv");
  std::string header;
  std::getline(csv, header);
  EXPECT_EQ(header, "a,u0");
  fs::remove_all(dir);
}

TEST(Cli, StateRoundTripThroughFiles) {
  const fs::path dir = scratch("roundtrip");
  ASSERT_EQ(run({"semigroup", "--preset", "MORT1", "--s", "0.25", "--out", dir.string()}).code, 0);
  const fs::path state = dir / "semigroup_state.csv";
  const Outcome again = run({"semigroup", "--preset", "MORT1", "--s", "0", "--state", state.string()});
  EXPECT_EQ(again.code, 0) << again.err;
  EXPECT_EQ(run({"semigroup", "--preset", "DIFF1", "--s", "0", "--state", state.string()}).code, 1);
  fs::remove_all(dir);
}

TEST(Cli, ConvergenceStudyPrintsATable) {
  const Outcome o = run({"convergence-study", "--preset", "DIFF1", "--t", "1", "--n-max", "16"});
  ASSERT_EQ(o.code, 0) << o.err;
  EXPECT_EQ(o.out.rfind("n,gap,ratio,order\n", 0), 0u);
}

TEST(Cli, VerifyIsDeterministic) {
  const Outcome a = run({"verify", "--preset", "MORT1", "--seed", "3"});
  const Outcome b = run({"verify", "--preset", "MORT1", "--seed", "3"});
  ASSERT_EQ(a.code, 0) << a.out;
  EXPECT_EQ(a.out, b.out);
  EXPECT_NE(a.out, run({"verify", "--preset", "MORT1", "--seed", "4"}).out);
}

TEST(Cli, VerifyFailureExitsWithTwo) {
  // Strongly time-modulated scalar mortality: the Kato approximants converge
  // at first order and cannot reach 1e-7 on the admissible partitions.
  const Outcome o = run({"verify", "--preset", "SCAL1", "--seed", "1", "--tol", "1e-7"});
  EXPECT_EQ(o.code, 2);
  EXPECT_NE(o.out.find("\"all_pass\": false"), std::string::npos);
}

}  // namespace
