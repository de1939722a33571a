#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "cli.hpp"
#include "mdbell/serialization.hpp"

using namespace mdbell;

namespace {

struct Result {
  int code = -1;
  std::string out;
  std::string err;
};

Result run(std::vector<std::string> args) {
  std::ostringstream out, err;
  Result r;
  r.code = cli::run(args, out, err);
  r.out = out.str();
  r.err = err.str();
  return r;
}

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = std::filesystem::temp_directory_path() /
           ("mdbell_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    std::filesystem::remove_all(dir_);
    std::filesystem::create_directories(dir_);
  }
  void TearDown() override { std::filesystem::remove_all(dir_); }
  std::string path(const std::string& name) const { return (dir_ / name).string(); }
  static std::string slurp(const std::string& p) {
    std::ifstream in(p);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
  }

  std::filesystem::path dir_;
};

}  // namespace

TEST(CliFormat, TwelveSignificantDigits) {
  EXPECT_EQ(cli::format_number(0.1 + 0.2), "0.3");
  EXPECT_EQ(cli::format_number(1.0 / 3.0), "0.333333333333");
  EXPECT_EQ(cli::format_number(-0.0), "0");
  EXPECT_EQ(cli::format_number(2.0), "2");
}

TEST_F(CliTest, BoundExamples) {
  auto r = run({"bound", "--cond", "general", "--P", "0.3", "--Q", "0.05"});
  ASSERT_EQ(r.code, 0) << r.err;
  auto j = parse_json(r.out);
  EXPECT_NEAR(j.at("value").get<double>(), 0.5, 1e-12);
  EXPECT_EQ(j.at("condition"), "general");

  r = run({"bound", "--cond", "ns", "--delta", "0.104"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NEAR(parse_json(r.out).at("value").get<double>(), 0.208, 1e-12);

  r = run({"bound", "--cond", "general", "--P", "0.2", "--Q", "0.3"});
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("Q exceeds 1/4"), std::string::npos) << r.err;

  EXPECT_EQ(run({"bound", "--cond", "quantum", "--P", "0.3", "--Q", "0"}).code, 2);
  EXPECT_EQ(run({"bound", "--P", "0.3"}).code, 2);
  EXPECT_EQ(run({"bound", "--P", "0.3", "--Q", "0", "--delta", "0.1"}).code, 2);
  EXPECT_EQ(run({}).code, 2);
}

TEST_F(CliTest, AttackSimulateVerifyRoundTrip) {
  const std::string file = path("a.json");
  auto r = run({"attack", "--cond", "general", "--P", "0.3333", "--Q", "0", "--out", file});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("valid=yes"), std::string::npos);
  EXPECT_NE(r.out.find("achieved=0.833"), std::string::npos) << r.out;

  r = run({"verify", file, "--P", "0.3333", "--Q", "0", "--cond", "general", "--json"});
  ASSERT_EQ(r.code, 0) << r.err;
  auto j = parse_json(r.out);
  EXPECT_TRUE(j.at("valid").get<bool>());
  EXPECT_NEAR(j.at("ch").get<double>(), 0.833, 1e-12);
  EXPECT_NEAR(j.at("gap").get<double>(), 0.0, 1e-12);

  r = run({"simulate", file, "-n", "1000000", "--seed", "42"});
  ASSERT_EQ(r.code, 0) << r.err;
  j = parse_json(r.out);
  EXPECT_EQ(j.at("generator"), std::string(kGeneratorId));
  EXPECT_EQ(j.at("config").at("seed"), 42);
  EXPECT_LE(std::abs(j.at("j_estimate").get<double>() - 0.8333), 4 * j.at("std_error").get<double>());

  EXPECT_EQ(run({"simulate", file, "-n", "0"}).code, 2);
}

TEST_F(CliTest, AttackTopCaseReachesOne) {
  const std::string file = path("b.json");
  auto r = run({"attack", "--cond", "general", "--P", "0.375", "--Q", "0", "--out", file, "--json"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NEAR(parse_json(r.out).at("achieved").get<double>(), 1.0, 1e-12);
}

TEST_F(CliTest, AttackNumericalUsesSeed) {
  auto a = run({"attack", "--cond", "factorizable", "--P", "0.3", "--Q", "0.1", "--method", "numerical", "--seed", "3"});
  auto b = run({"attack", "--cond", "factorizable", "--P", "0.3", "--Q", "0.1", "--method", "numerical", "--seed", "3"});
  ASSERT_EQ(a.code, 0) << a.err;
  EXPECT_EQ(a.out, b.out);
  EXPECT_EQ(parse_json(a.out).at("label"), "numerically constructed");
}

TEST_F(CliTest, VerifyRejectsTamperedEnsemble) {
  const std::string file = path("a.json");
  ASSERT_EQ(run({"attack", "--cond", "general", "--P", "0.3", "--Q", "0", "--out", file}).code, 0);
  Json j = parse_json(slurp(file));
  j["atoms"][0]["q"] = j["atoms"][0]["q"].get<double>() + 0.1;
  std::ofstream(file) << j.dump();
  auto r = run({"verify", file, "--P", "0.3", "--Q", "0"});
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.out.find("valid=no"), std::string::npos);

  std::ofstream(file) << "{\"atoms\": [{\"q\": 1}]}";
  r = run({"simulate", file, "-n", "10"});
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("$.atoms[0].p"), std::string::npos) << r.err;
}

TEST_F(CliTest, OracleExamples) {
  auto r = run({"oracle", "--cond", "general", "--func", "ch", "--P", "0.34", "--Q", "0.02"});
  ASSERT_EQ(r.code, 0) << r.err;
  auto j = parse_json(r.out);
  EXPECT_NEAR(j.at("value").get<double>(), 0.82, 1e-9);
  EXPECT_LE(j.at("gap").get<double>(), 1e-9);
  EXPECT_EQ(j.at("certificate").at("kind"), "exact");

  r = run({"oracle", "--cond", "factorizable", "--func", "ch", "--P", "0.3", "--Q", "0", "--grid", "512"});
  ASSERT_EQ(r.code, 0) << r.err;
  j = parse_json(r.out);
  EXPECT_LE(std::abs(j.at("value").get<double>() - 0.2), j.at("certificate").at("error_bound").get<double>());

  r = run({"oracle", "--cond", "general", "--func", "chsh", "--P", "0.25", "--Q", "0.25"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_DOUBLE_EQ(parse_json(r.out).at("value").get<double>(), 2.0);

  r = run({"oracle", "--cond", "ns", "--func", "ch", "--P", "0.3", "--Q", "0.05"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NEAR(parse_json(r.out).at("value").get<double>(), 0.3, 1e-9);

  EXPECT_EQ(run({"oracle", "--cond", "factorizable", "--P", "0.3", "--Q", "0", "--grid", "8"}).code, 2);
}

TEST_F(CliTest, DeltaSweep) {
  auto r = run({"sweep", "--mode", "delta", "--cond", "general", "--cond", "ns", "--delta-range", "0:0.25:0.005"});
  ASSERT_EQ(r.code, 0) << r.err;
  std::istringstream lines(r.out);
  std::string line;
  std::getline(lines, line);
  EXPECT_EQ(line, "condition,P,Q,delta,closed_form,branch");
  int rows = 0;
  while (std::getline(lines, line)) {
    ++rows;
    std::stringstream row(line);
    std::string cond, p, q, delta, value;
    std::getline(row, cond, ',');
    std::getline(row, p, ',');
    std::getline(row, q, ',');
    std::getline(row, delta, ',');
    std::getline(row, value, ',');
    const double d = std::stod(delta);
    EXPECT_NEAR(std::stod(value), cond == "ns" ? 2 * d : 4 * d, 1e-11) << line;
  }
  EXPECT_EQ(rows, 2 * 51);
}

TEST_F(CliTest, CriticalSweepEndpoints) {
  auto r = run({"sweep", "--mode", "critical", "--cond", "general", "--cond", "ns", "--Q-range", "0:0.25:0.001",
                "--json"});
  ASSERT_EQ(r.code, 0) << r.err;
  const Json rows = parse_json(r.out);
  double last_q_general = 0, last_q_ns = 0, p0_general = 0;
  for (const auto& row : rows) {
    EXPECT_NEAR(row.at("closed_form").get<double>(), kQuantumChBound, 1e-9);
    const double q = row.at("Q").get<double>();
    if (row.at("condition") == "general") {
      last_q_general = std::max(last_q_general, q);
      if (q == 0.0) p0_general = row.at("P").get<double>();
    } else {
      last_q_ns = std::max(last_q_ns, q);
    }
  }
  EXPECT_NEAR(p0_general, 0.27071, 1e-5);
  EXPECT_NEAR(last_q_general, 0.19822, 1e-3);
  EXPECT_NEAR(last_q_ns, 0.14645, 1e-3);
}

TEST_F(CliTest, SweepIsDeterministicAndWritesFiles) {
  const std::string a = path("a.csv");
  const std::string b = path("b.csv");
  const std::vector<std::string> base = {"sweep", "--cond", "general", "--P-range", "0.25:1:0.05",
                                         "--Q-range", "0:0.25:0.05", "--oracle"};
  auto args = base;
  args.insert(args.end(), {"--out", a});
  ASSERT_EQ(run(args).code, 0);
  args = base;
  args.insert(args.end(), {"--out", b});
  ASSERT_EQ(run(args).code, 0);
  const std::string text = slurp(a);
  EXPECT_EQ(text, slurp(b));
  EXPECT_EQ(text.rfind("condition,P,Q,delta,closed_form,branch,oracle,gap\n", 0), 0u);
  std::istringstream lines(text);
  std::string line;
  std::getline(lines, line);
  while (std::getline(lines, line)) {
    const double gap = std::stod(line.substr(line.rfind(',') + 1));
    EXPECT_LE(gap, 1e-9) << line;
  }
}

TEST_F(CliTest, SweepEmptyGridWritesHeaderOnly) {
  auto r = run({"sweep", "--P-range", "0.1:0.2:0.05", "--Q-range", "0:0.1:0.05"});
  ASSERT_EQ(r.code, 0);
  EXPECT_EQ(r.out, "condition,P,Q,delta,closed_form,branch\n");
  EXPECT_NE(r.err.find("warning"), std::string::npos);
}

TEST_F(CliTest, UnwritablePathFailsWithoutPartialOutput) {
  const std::string bad = path("missing/dir/out.csv");
  auto r = run({"sweep", "--out", bad});
  EXPECT_NE(r.code, 0);
  EXPECT_FALSE(std::filesystem::exists(bad));
}
