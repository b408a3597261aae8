#ifndef KACZMARZ_CLI_HPP
#define KACZMARZ_CLI_HPP

#include "kaczmarz/errors.hpp"
#include "kaczmarz/experiments.hpp"

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace kaczmarz {

class UsageError : public Error {
public:
  using Error::Error;
};

enum class Command { analyze, solve, experiment, verify, dfactor };

/// Fully parsed command line (flags merged over an optional JSON config).
struct RunConfig {
  Command command = Command::analyze;
  std::optional<std::filesystem::path> input;
  std::optional<std::filesystem::path> rhs;
  std::optional<std::filesystem::path> solution;
  std::optional<GeneratorSpec> generator;
  std::optional<SolverConfig> solver;
  std::optional<ExperimentSpec> experiment;
  std::string preset;
  std::string suite = "all";
  std::size_t resolution = 1001;
  std::size_t verify_trials = 200;
  double noise = 0;
  std::filesystem::path output_dir = ".";
  bool output_dir_given = false;
  bool emit_plot_data = false;
};

/// Figure presets: 300 x 100, U[c, 1], 40 trials.
struct Preset {
  std::string_view name;
  double c;
  std::size_t iterations;
};

const std::vector<Preset> &presets();
ExperimentSpec experiment_preset(std::string_view name, std::uint64_t seed);

/// Throws UsageError on bad flags.
RunConfig parse_run_config(const std::vector<std::string> &args);

/// Exit codes: 0 success, 1 usage or input error, 2 verification failure.
int run(const RunConfig &config, std::ostream &out, std::ostream &err);

int cli_main(int argc, const char *const *argv, std::ostream &out,
             std::ostream &err);

} // namespace kaczmarz

#endif // KACZMARZ_CLI_HPP
