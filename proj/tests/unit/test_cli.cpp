#include "kaczmarz/cli.hpp"
#include "kaczmarz/io.hpp"

#include "json.hpp"

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

using namespace kaczmarz;

namespace {

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result run_cli(std::vector<std::string> args) {
  args.insert(args.begin(), "kaczmarz");
  std::vector<const char *> argv;
  for (const auto &a : args)
    argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = cli_main(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

std::filesystem::path temp_dir() {
  auto dir = std::filesystem::temp_directory_path() /
             ("kaczmarz_cli_" +
              std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

std::string slurp(const std::filesystem::path &path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// `key = value` lines of a report.
std::map<std::string, std::string> key_values(const std::string &text) {
  std::map<std::string, std::string> out;
  std::istringstream in(text);
  for (std::string line; std::getline(in, line);) {
    const auto eq = line.find(" = ");
    if (eq != std::string::npos)
      out[line.substr(0, eq)] = line.substr(eq + 3);
  }
  return out;
}

nlohmann::json json_line(const std::string &text) {
  std::istringstream in(text);
  for (std::string line; std::getline(in, line);)
    if (!line.empty() && line.front() == '{')
      return nlohmann::json::parse(line);
  return {};
}

} // namespace

TEST(Cli, AnalyzeIdentityFile) {
  const auto dir = temp_dir();
  write_matrix_market(dir / "I.mtx", RowMatrixXd::Identity(5, 5));
  const auto r = run_cli({"analyze", "--input", (dir / "I.mtx").string()});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto kv = key_values(r.out);
  EXPECT_EQ(std::stod(kv.at("delta")), 0.0);
  EXPECT_EQ(std::stod(kv.at("Delta")), 0.0);
  EXPECT_EQ(std::stod(kv.at("D")), 0.0);
  EXPECT_NEAR(std::stod(kv.at("R")), 5.0, 1e-12);
  EXPECT_NEAR(std::stod(kv.at("R_hat")), 5.0, 1e-12);
  EXPECT_EQ(kv.at("Q"), "inf");
  EXPECT_FALSE(std::filesystem::exists(dir / "analysis.json"));
  std::filesystem::remove_all(dir);
}

TEST(Cli, AnalyzeKeyValueAndJsonAgree) {
  const auto dir = temp_dir();
  const auto r = run_cli({"analyze", "--m", "40", "--n", "8", "--c", "0.4", "--seed", "3",
                          "--output-dir", dir.string()});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto kv = key_values(r.out);
  const auto j = json_line(r.out);
  ASSERT_TRUE(j.is_object());
  ASSERT_EQ(j.size(), kv.size());
  for (const auto &[key, value] : j.items()) {
    ASSERT_TRUE(kv.count(key)) << key;
    if (value.is_number())
      EXPECT_EQ(value.get<double>(), std::stod(kv.at(key))) << key;
    else
      EXPECT_EQ(value.get<std::string>(), kv.at(key)) << key;
  }
  for (const char *key : {"delta", "Delta", "D", "R", "R_hat", "E", "Q"})
    EXPECT_TRUE(kv.count(key)) << key;
  EXPECT_EQ(nlohmann::json::parse(slurp(dir / "analysis.json")), j);
  std::filesystem::remove_all(dir);
}

TEST(Cli, AnalyzeOmitsRefinementForNegativeCorrelations) {
  const auto r = run_cli({"analyze", "--m", "40", "--n", "8", "--c", "-0.5"});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto kv = key_values(r.out);
  EXPECT_TRUE(kv.count("R_hat"));
  EXPECT_FALSE(kv.count("E"));
  EXPECT_FALSE(kv.count("Q"));
}

TEST(Cli, SolveWritesTrace) {
  const auto dir = temp_dir();
  const auto r = run_cli({"solve", "--m", "50", "--n", "10", "--c", "0.5", "--method", "2srk",
                          "--iterations", "100", "--output-dir", dir.string()});
  ASSERT_EQ(r.code, 0) << r.err;
  std::ifstream in(dir / "trace.csv");
  const auto rows = read_trace_csv(in);
  ASSERT_EQ(rows.size(), 101u);
  EXPECT_EQ(rows.back().row_touches, 200u);
  EXPECT_EQ(rows.back().method, "2srk");
  EXPECT_FALSE(std::isnan(rows.back().bound_2srk));
  EXPECT_FALSE(std::filesystem::exists(dir / "residuals.csv"));
  std::filesystem::remove_all(dir);
}

TEST(Cli, SolveFromFilesWithoutSolutionRecordsResiduals) {
  const auto dir = temp_dir();
  RowMatrixXd A(4, 2);
  A << 1, 0, 0, 2, 1, 1, 3, -1;
  RowMatrixXd b = A * Eigen::Vector2d(1, -2);
  write_matrix_market(dir / "A.mtx", A);
  write_matrix_market(dir / "b.mtx", b);
  const auto r = run_cli({"solve", "--input", (dir / "A.mtx").string(), "--rhs",
                          (dir / "b.mtx").string(), "--method", "rk", "--tol", "1e-10",
                          "--iterations", "10000", "--output-dir", dir.string()});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(key_values(r.out).at("converged"), "true");
  EXPECT_TRUE(std::filesystem::exists(dir / "residuals.csv"));
  std::filesystem::remove_all(dir);
}

TEST(Cli, SolveWithNoiseReportsThreshold) {
  const auto r = run_cli({"solve", "--m", "50", "--n", "10", "--c", "0.5", "--method", "rk",
                          "--noise", "1e-3", "--output-dir",
                          (std::filesystem::temp_directory_path() / "kaczmarz_cli_noise").string()});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto kv = key_values(r.out);
  EXPECT_LE(std::stod(kv.at("noise_inf")), 1e-3);
  EXPECT_GT(std::stod(kv.at("threshold")), 0.0);
}

TEST(Cli, ExperimentPresetIsByteIdentical) {
  const auto dir = temp_dir();
  const std::vector<std::string> base{"experiment", "--preset", "fig4a", "--seed", "7",
                                      "--trials", "4", "--iterations", "50"};
  auto first = base;
  first.insert(first.end(), {"--output-dir", (dir / "a").string(), "--threads", "1"});
  auto second = base;
  second.insert(second.end(), {"--output-dir", (dir / "b").string(), "--threads", "3", "--plot"});
  ASSERT_EQ(run_cli(first).code, 0);
  ASSERT_EQ(run_cli(second).code, 0);
  const auto a = slurp(dir / "a" / "fig4a.csv");
  EXPECT_FALSE(a.empty());
  EXPECT_EQ(a, slurp(dir / "b" / "fig4a.csv"));
  EXPECT_TRUE(std::filesystem::exists(dir / "b" / "fig4a.gp"));
  std::filesystem::remove_all(dir);
}

TEST(Cli, PresetTable) {
  const std::map<std::string, double> expected{
      {"fig3", 0.9}, {"fig4a", 0.5}, {"fig4b", 0.2}, {"fig4c", -0.1}, {"fig4d", -0.5}};
  ASSERT_EQ(presets().size(), expected.size());
  for (const auto &p : presets()) {
    EXPECT_EQ(p.c, expected.at(std::string(p.name)));
    const auto spec = experiment_preset(p.name, 5);
    EXPECT_EQ(spec.generator.m, 300);
    EXPECT_EQ(spec.generator.n, 100);
    EXPECT_EQ(spec.generator.seed, 5u);
    EXPECT_EQ(spec.trials, 40u);
  }
  EXPECT_THROW(experiment_preset("fig5", 0), UsageError);
}

TEST(Cli, ConfigFileWithFlagOverride) {
  const auto dir = temp_dir();
  {
    std::ofstream f(dir / "run.json");
    f << R"({"command": "experiment", "m": 40, "n": 8, "c": 0.3, "seed": 11,
             "trials": 2, "iterations": 20, "methods": ["rk", "2srk"],
             "output_dir": ")"
      << dir.string() << R"("})";
  }
  const auto config = parse_run_config({"--config", (dir / "run.json").string(), "--trials", "3"});
  EXPECT_EQ(config.command, Command::experiment);
  ASSERT_TRUE(config.experiment);
  EXPECT_EQ(config.experiment->trials, 3u);
  EXPECT_EQ(config.experiment->iterations, 20u);
  EXPECT_EQ(config.experiment->generator.m, 40);
  EXPECT_EQ(config.experiment->generator.seed, 11u);
  EXPECT_EQ(config.experiment->methods.size(), 2u);
  EXPECT_EQ(config.output_dir, dir);
  // An explicit command wins over the file's.
  EXPECT_EQ(parse_run_config({"analyze", "--config", (dir / "run.json").string()}).command,
            Command::analyze);
  std::filesystem::remove_all(dir);
}

TEST(Cli, SeedAcceptsFullRange) {
  const auto config =
      parse_run_config({"experiment", "--preset", "fig3", "--seed", "18446744073709551615"});
  EXPECT_EQ(config.experiment->generator.seed, 18446744073709551615ull);
}

TEST(Cli, VerifyLemmaSuite) {
  const auto r = run_cli({"verify", "--suite", "lemma"});
  EXPECT_EQ(r.code, 0) << r.out << r.err;
  EXPECT_EQ(r.out.rfind("PASS lemma", 0), 0u);
}

TEST(Cli, DFactorWritesGrid) {
  const auto dir = temp_dir();
  const auto r = run_cli({"dfactor", "--resolution", "11", "--output-dir", dir.string(), "--plot"});
  ASSERT_EQ(r.code, 0) << r.err;
  std::ifstream in(dir / "dfactor.csv");
  std::string line;
  std::size_t lines = 0;
  while (std::getline(in, line))
    ++lines;
  EXPECT_EQ(lines, 1u + 66u);
  EXPECT_TRUE(std::filesystem::exists(dir / "dfactor.dat"));
  EXPECT_TRUE(std::filesystem::exists(dir / "dfactor.gp"));
  const auto kv = key_values(r.out);
  EXPECT_EQ(std::stod(kv.at("argmax_delta")), std::stod(kv.at("argmax_Delta")));
  std::filesystem::remove_all(dir);
}

TEST(Cli, UsageErrors) {
  const std::vector<std::vector<std::string>> bad{
      {},
      {"frobnicate"},
      {"analyze"},
      {"analyze", "--m", "10", "--input", "x.mtx"},
      {"solve", "--input", "x.mtx"},
      {"experiment"},
      {"experiment", "--preset", "fig9"},
      {"solve", "--m", "10", "--n", "20"},
      {"solve", "--m", "30", "--method", "sor"},
      {"verify", "--suite", "everything"},
      {"dfactor", "--resolution", "1"},
      {"analyze", "--m", "ten"},
      {"analyze", "--m", "30", "--unknown-flag"},
      {"analyze", "--m", "30", "stray"},
      {"analyze", "--config", "/nonexistent/config.json"},
  };
  for (const auto &args : bad) {
    const auto r = run_cli(args);
    EXPECT_EQ(r.code, 1) << (args.empty() ? "" : args.front());
    EXPECT_EQ(r.err.rfind("error: ", 0), 0u);
    EXPECT_EQ(std::count(r.err.begin(), r.err.end(), '\n'), 1);
  }
}

TEST(Cli, MissingInputFileIsInputError) {
  const auto r = run_cli({"analyze", "--input", "/nonexistent/A.mtx"});
  EXPECT_EQ(r.code, 1);
}

TEST(Cli, Help) {
  const auto r = run_cli({"--help"});
  EXPECT_EQ(r.code, 0);
  EXPECT_NE(r.out.find("--preset"), std::string::npos);
}
