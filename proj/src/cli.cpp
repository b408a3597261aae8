#include "kaczmarz/cli.hpp"

#include "kaczmarz/analysis.hpp"
#include "kaczmarz/io.hpp"

#include "CLI11.hpp"
#include "json.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <iostream>
#include <sstream>
#include <utility>
#include <variant>

namespace kaczmarz {

namespace {

using json = nlohmann::ordered_json;

constexpr std::array<std::pair<std::string_view, Command>, 5> command_names{{
    {"analyze", Command::analyze},
    {"solve", Command::solve},
    {"experiment", Command::experiment},
    {"verify", Command::verify},
    {"dfactor", Command::dfactor},
}};

std::optional<Command> parse_command(std::string_view name) {
  for (const auto &[n, c] : command_names)
    if (n == name)
      return c;
  return std::nullopt;
}

class HelpRequested : public std::exception {
public:
  explicit HelpRequested(std::string text) : text(std::move(text)) {}
  std::string text;
};

std::vector<std::string> split(const std::string &s, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  for (std::string item; std::getline(ss, item, sep);)
    if (!item.empty())
      out.push_back(item);
  return out;
}

/// JSON config entries become flags placed before the user's own flags, so
/// the command line wins (options keep their last value).
std::vector<std::string> config_tokens(const std::filesystem::path &path,
                                       std::optional<std::string> &command) {
  std::ifstream in(path);
  if (!in)
    throw UsageError("cannot read config '" + path.string() + "'");
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception &e) {
    throw UsageError("config '" + path.string() + "': " + e.what());
  }
  if (!j.is_object())
    throw UsageError("config must be a JSON object");
  std::vector<std::string> tokens;
  for (const auto &[key, value] : j.items()) {
    if (key == "command") {
      if (!value.is_string())
        throw UsageError("config 'command' must be a string");
      if (!command)
        command = value.get<std::string>();
      continue;
    }
    std::string flag = "--" + key;
    std::replace(flag.begin(), flag.end(), '_', '-');
    if (value.is_boolean()) {
      if (value.get<bool>())
        tokens.push_back(flag);
    } else if (value.is_string()) {
      tokens.push_back(flag);
      tokens.push_back(value.get<std::string>());
    } else if (value.is_number()) {
      tokens.push_back(flag);
      tokens.push_back(value.dump());
    } else if (value.is_array()) {
      std::string joined;
      for (const auto &item : value)
        joined += (joined.empty() ? "" : ",") +
                  (item.is_string() ? item.get<std::string>() : item.dump());
      tokens.push_back(flag);
      tokens.push_back(joined);
    } else {
      throw UsageError("config key '" + key + "' has an unsupported type");
    }
  }
  return tokens;
}

std::vector<SolverConfig> parse_methods(const std::string &list,
                                        const SolverConfig &base) {
  std::vector<SolverConfig> out;
  for (const auto &name : split(list, ',')) {
    SolverConfig config = base;
    config.method = parse_method(name);
    out.push_back(config);
  }
  if (out.empty())
    throw UsageError("--methods is empty");
  return out;
}

void ensure_dir(const std::filesystem::path &dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec)
    throw IoError("cannot create '" + dir.string() + "': " + ec.message());
}

/// Ordered key/value report printed both as `key = value` lines and as one
/// JSON object, from the same values.
class Report {
public:
  void add(std::string key, double value) { items_.emplace_back(std::move(key), value); }
  void add(std::string key, long long value) { items_.emplace_back(std::move(key), value); }
  void add(std::string key, std::string value) {
    items_.emplace_back(std::move(key), std::move(value));
  }

  void print(std::ostream &out) const {
    for (const auto &[key, value] : items_) {
      out << key << " = ";
      std::visit(
          [&](const auto &v) {
            using T = std::decay_t<decltype(v)>;
            if constexpr (std::is_same_v<T, double>)
              out << format_number(v);
            else
              out << v;
          },
          value);
      out << '\n';
    }
    out << to_json().dump() << '\n';
  }

  json to_json() const {
    json j = json::object();
    for (const auto &[key, value] : items_) {
      std::visit(
          [&](const auto &v) {
            using T = std::decay_t<decltype(v)>;
            if constexpr (std::is_same_v<T, double>)
              j[key] = std::isfinite(v) ? json(v) : json(format_number(v));
            else
              j[key] = v;
          },
          value);
    }
    return j;
  }

private:
  std::vector<std::pair<std::string, std::variant<double, long long, std::string>>>
      items_;
};

LinearSystemXd load_system(const RunConfig &config) {
  if (config.generator)
    return generate_system(*config.generator);
  LinearSystemXd system;
  system.A = read_matrix_market(*config.input);
  if (config.rhs)
    system.b = read_vector_market(*config.rhs);
  else
    system.b = VectorXd::Zero(system.rows());
  if (config.solution)
    system.solution = read_vector_market(*config.solution);
  validate(system);
  return system;
}

int run_analyze(const RunConfig &config, std::ostream &out) {
  const auto system = load_system(config);
  const auto standardized = standardize(system.A);
  const auto coh = coherence(standardized.A);
  const auto cond = scaled_condition_number(standardized.A);
  const auto weighted = weighted_condition_number(system.A);

  Report report;
  report.add("m", static_cast<long long>(system.rows()));
  report.add("n", static_cast<long long>(system.cols()));
  report.add("delta", coh.delta);
  report.add("Delta", coh.Delta);
  report.add("D", coh.D);
  report.add("frob_sq", cond.frob_sq);
  report.add("sigma_min", cond.sigma_min);
  report.add("R", cond.R);
  report.add("R_hat", weighted.R);
  report.add("base_2srk", two_subspace_base(cond.R, coh.D).value);
  try {
    const auto refined = nonneg_correlation_bound(standardized.A);
    report.add("E", refined.E);
    report.add("Q", refined.Q);
    report.add("refined_base", refined.refined_base);
  } catch (const NegativeCorrelation &) {
  }
  report.print(out);
  if (config.output_dir_given) {
    ensure_dir(config.output_dir);
    std::ofstream f(config.output_dir / "analysis.json", std::ios::binary);
    f << report.to_json().dump(2) << '\n';
  }
  return 0;
}

int run_solve(const RunConfig &config, std::ostream &out) {
  const auto system = load_system(config);
  const SolverConfig &solver = *config.solver;

  std::optional<CoherenceProfile<double>> coh;
  std::optional<ConditioningProfile<double>> cond;
  try {
    const auto standardized = standardize(system.A);
    cond = scaled_condition_number(standardized.A);
    coh = coherence(standardized.A);
  } catch (const Error &) {
  }

  Report report;
  IterateTrace trace;
  if (config.noise > 0) {
    if (!system.solution)
      throw UsageError("--noise needs a known solution");
    const auto noisy = add_noise(system, config.noise,
                                 derive_seed(solver.seed, Stream::noise, 0));
    auto result = noisy_solve(system, noisy.noise, solver);
    trace = std::move(result.trace);
    report.add("noise_inf", result.noise_inf);
    report.add("threshold", result.threshold);
  } else {
    trace = solve(system, solver);
  }

  ensure_dir(config.output_dir);
  write_trace_csv(config.output_dir / "trace.csv",
                  envelope_from_trace(trace, solver.method, coh, cond));
  if (!trace.residuals.empty()) {
    std::ofstream f(config.output_dir / "residuals.csv", std::ios::binary);
    f << "k,residual\n";
    for (std::size_t k = 0; k < trace.residuals.size(); ++k)
      f << k << ',' << format_number(trace.residuals[k]) << '\n';
  }

  report.add("method", std::string(to_string(solver.method)));
  report.add("iterations_run", static_cast<long long>(trace.iterations_run));
  report.add("row_touches", static_cast<long long>(trace.row_touches));
  report.add("converged", std::string(trace.converged ? "true" : "false"));
  report.add("pair_resamples", static_cast<long long>(trace.pair_resamples));
  report.add("single_fallbacks", static_cast<long long>(trace.single_fallbacks));
  if (!trace.errors_sq.empty())
    report.add("final_err_sq", trace.errors_sq.back());
  if (!trace.residuals.empty())
    report.add("final_residual", trace.residuals.back());
  report.print(out);
  return 0;
}

void write_envelope_plot(const std::filesystem::path &script,
                         const std::string &csv) {
  std::ofstream f(script, std::ios::binary);
  f << "set datafile separator ','\n"
    << "set logscale y\n"
    << "set xlabel 'row touches'\n"
    << "set ylabel 'squared error'\n"
    << "plot '" << csv << "' skip 1 using 2:(stringcolumn(3) eq 'rk' ? $4 : 1/0) "
    << "with lines title 'RK', \\\n"
    << "     '' skip 1 using 2:(stringcolumn(3) eq '2srk' ? $4 : 1/0) "
    << "with lines title '2SRK'\n";
}

int run_experiment(const RunConfig &config, std::ostream &out) {
  const ExperimentSpec &spec = *config.experiment;
  const auto env = run_envelope(spec);
  const std::string name = config.preset.empty() ? "experiment" : config.preset;

  ensure_dir(config.output_dir);
  write_trace_csv(config.output_dir / (name + ".csv"), env);
  if (config.emit_plot_data)
    write_envelope_plot(config.output_dir / (name + ".gp"), name + ".csv");

  Report report;
  report.add("name", name);
  report.add("m", static_cast<long long>(spec.generator.m));
  report.add("n", static_cast<long long>(spec.generator.n));
  report.add("c", spec.generator.c);
  report.add("trials", static_cast<long long>(spec.trials));
  report.add("iterations", static_cast<long long>(spec.iterations));
  report.add("delta", env.coherence.delta);
  report.add("Delta", env.coherence.Delta);
  report.add("D", env.coherence.D);
  report.add("R", env.conditioning.R);
  report.add("initial_err_sq", env.initial_error_sq);
  for (const auto &m : env.methods)
    report.add("final_mean_err_sq_" + std::string(to_string(m.method)), m.mean.back());
  report.print(out);
  return 0;
}

/// Default sizes of the verification harnesses.
ExperimentSpec theorem_spec(std::uint64_t seed) {
  ExperimentSpec spec;
  spec.generator = {40, 10, 0.7, seed, SolutionStyle::gaussian};
  spec.trials = 500;
  spec.iterations = 200;
  return spec;
}

ExperimentSpec noise_spec(std::uint64_t seed) {
  ExperimentSpec spec;
  spec.generator = {100, 20, 0.8, seed, SolutionStyle::gaussian};
  spec.trials = 40;
  spec.iterations = 100000;
  return spec;
}

int run_verify(const RunConfig &config, std::ostream &out) {
  const std::uint64_t seed = config.generator ? config.generator->seed : 0;
  const std::string &suite = config.suite;
  const bool all = suite == "all";
  bool ok = true;
  auto line = [&](std::string_view name, bool passed, const std::string &detail) {
    out << (passed ? "PASS " : "FAIL ") << name << ": " << detail << '\n';
    ok = ok && passed;
  };

  if (all || suite == "identity") {
    const auto r = verify_step_identity(config.verify_trials, seed);
    line("identity", r.passed(),
         std::to_string(r.pairs) + " pairs, max violation " +
             format_number(r.max_violation));
  }
  if (all || suite == "lemma") {
    const auto r = verify_lemma_expectation(config.verify_trials, seed);
    line("lemma", r.passed(),
         std::to_string(r.instances) + " systems, min margins " +
             format_number(r.min_margin_pairwise) + " (pairwise) " +
             format_number(r.min_margin_coherence) + " (coherence), " +
             std::to_string(r.ordering_violations) + " ordering violations");
  }
  if (all || suite == "theorem") {
    auto spec = theorem_spec(seed);
    spec.threads = config.experiment ? config.experiment->threads : 0;
    const auto r = verify_theorem_bound(spec);
    line("theorem", r.passed(),
         std::to_string(r.flagged.size()) + " of " + std::to_string(r.mean.size()) +
             " iterations above bound + 3 SE (R " + format_number(r.conditioning.R) +
             ", D " + format_number(r.coherence.D) + ")");
  }
  if (all || suite == "noise") {
    auto spec = noise_spec(seed);
    spec.threads = config.experiment ? config.experiment->threads : 0;
    const auto r = noisy_threshold_experiment(spec, 1e-3);
    line("noise", r.check.passed(),
         std::to_string(r.check.flagged.size()) + " iterations above curve + 3 SE, "
             "plateau " + format_number(r.plateau) + " vs threshold " +
             format_number(r.threshold));
  }
  return ok ? 0 : 2;
}

int run_dfactor(const RunConfig &config, std::ostream &out) {
  const auto grid = dfactor_grid(config.resolution);
  ensure_dir(config.output_dir);
  {
    std::ofstream f(config.output_dir / "dfactor.csv", std::ios::binary);
    f << "delta,Delta,D\n";
    for (const auto &p : grid)
      f << format_number(p.delta) << ',' << format_number(p.Delta) << ','
        << format_number(p.D) << '\n';
  }
  if (config.emit_plot_data) {
    // gnuplot grid layout: one block per delta, blank line between blocks.
    std::ofstream f(config.output_dir / "dfactor.dat", std::ios::binary);
    double current = -1;
    for (const auto &p : grid) {
      if (p.delta != current && current >= 0)
        f << '\n';
      current = p.delta;
      f << format_number(p.delta) << ' ' << format_number(p.Delta) << ' '
        << format_number(p.D) << '\n';
    }
    std::ofstream gp(config.output_dir / "dfactor.gp", std::ios::binary);
    gp << "set xlabel 'delta'\nset ylabel 'Delta'\nset zlabel 'D'\n"
       << "set pm3d\nsplot 'dfactor.dat' using 1:2:3 with pm3d notitle\n";
  }
  const auto best = dfactor_argmax(grid);
  Report report;
  report.add("points", static_cast<long long>(grid.size()));
  report.add("argmax_delta", best.delta);
  report.add("argmax_Delta", best.Delta);
  report.add("max_D", best.D);
  report.print(out);
  return 0;
}

} // namespace

const std::vector<Preset> &presets() {
  static const std::vector<Preset> table{
      {"fig3", 0.9, 8000},  {"fig4a", 0.5, 2000},  {"fig4b", 0.2, 2000},
      {"fig4c", -0.1, 2000}, {"fig4d", -0.5, 2000},
  };
  return table;
}

ExperimentSpec experiment_preset(std::string_view name, std::uint64_t seed) {
  for (const auto &p : presets()) {
    if (p.name != name)
      continue;
    ExperimentSpec spec;
    spec.generator = {300, 100, p.c, seed, SolutionStyle::gaussian};
    spec.trials = 40;
    spec.iterations = p.iterations;
    spec.methods = default_methods();
    return spec;
  }
  throw UsageError("unknown preset '" + std::string(name) + "'");
}

RunConfig parse_run_config(const std::vector<std::string> &args_in) {
  std::vector<std::string> args = args_in;
  std::optional<std::filesystem::path> config_path;
  for (std::size_t i = 0; i < args.size();) {
    if (args[i] == "--config") {
      if (i + 1 >= args.size())
        throw UsageError("--config needs a file");
      config_path = args[i + 1];
      args.erase(args.begin() + static_cast<std::ptrdiff_t>(i),
                 args.begin() + static_cast<std::ptrdiff_t>(i + 2));
    } else if (args[i].rfind("--config=", 0) == 0) {
      config_path = args[i].substr(9);
      args.erase(args.begin() + static_cast<std::ptrdiff_t>(i));
    } else {
      ++i;
    }
  }

  std::optional<std::string> command_name;
  if (!args.empty() && !args.front().empty() && args.front().front() != '-') {
    command_name = args.front();
    args.erase(args.begin());
  }
  std::vector<std::string> tokens;
  if (config_path)
    tokens = config_tokens(*config_path, command_name);
  tokens.insert(tokens.end(), args.begin(), args.end());

  CLI::App app{"Randomized and two-subspace Kaczmarz solvers and analysis",
               "kaczmarz"};
  app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);

  std::string input, rhs, solution, style = "gaussian", method = "2srk",
              replacement = "with", pair_sampling = "uniform", preset,
              methods = "rk,2srk", suite = "all", output_dir = ".";
  Index m = 300, n = 100;
  double c = 0.9, tolerance = 0, noise = 0;
  std::uint64_t seed = 0;
  std::size_t iterations = 1000, trials = 40, resolution = 1001;
  unsigned threads = 0;
  bool plot = false, no_pairing = false;

  app.add_option("--input", input, "MatrixMarket matrix file");
  app.add_option("--rhs", rhs, "MatrixMarket right-hand side (m x 1)");
  app.add_option("--solution", solution, "MatrixMarket known solution (n x 1)");
  app.add_option("--m", m, "generated rows");
  app.add_option("--n", n, "generated columns");
  app.add_option("--c", c, "generated entries ~ U[c, 1]");
  app.add_option("--solution-style", style, "gaussian | uniform_sphere");
  app.add_option("--seed", seed, "64-bit master seed");
  app.add_option("--method", method, "cyclic | rk | rk_weighted | 2srk | two_step");
  app.add_option("--methods", methods, "comma-separated methods for experiment");
  app.add_option("--iterations", iterations, "iteration budget");
  app.add_option("--tol", tolerance, "relative stopping tolerance (0 = off)");
  app.add_option("--replacement", replacement, "with | without");
  app.add_option("--pair-sampling", pair_sampling, "uniform | weighted");
  app.add_option("--trials", trials, "trials per experiment or harness");
  app.add_option("--preset", preset, "fig3 | fig4a | fig4b | fig4c | fig4d");
  app.add_option("--threads", threads, "worker threads (0 = all cores)");
  app.add_flag("--no-pairing", no_pairing,
               "do not give single-row methods twice the iterations");
  app.add_option("--noise", noise, "uniform noise level added to b");
  app.add_option("--suite", suite, "identity | lemma | theorem | noise | all");
  app.add_option("--resolution", resolution, "D grid points per axis");
  app.add_option("--output-dir", output_dir, "directory for output files");
  app.add_flag("--plot", plot, "also write gnuplot-ready data and scripts");

  std::vector<std::string> reversed(tokens.rbegin(), tokens.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp &) {
    throw HelpRequested(app.help() +
                        "\nCommands: analyze, solve, experiment, verify, dfactor\n");
  } catch (const CLI::ParseError &e) {
    throw UsageError(e.what());
  }
  if (!reversed.empty())
    throw UsageError("unexpected argument '" + reversed.back() + "'");
  if (!command_name)
    throw UsageError("missing command (analyze, solve, experiment, verify, dfactor)");
  const auto command = parse_command(*command_name);
  if (!command)
    throw UsageError("unknown command '" + *command_name + "'");
  auto given = [&](const char *flag) { return app.count(flag) > 0; };

  RunConfig config;
  config.command = *command;
  config.output_dir = output_dir;
  config.output_dir_given = given("--output-dir");
  config.emit_plot_data = plot;
  config.suite = suite;
  config.resolution = resolution;
  config.noise = noise;
  config.preset = preset;
  if (given("--input"))
    config.input = input;
  if (given("--rhs"))
    config.rhs = rhs;
  if (given("--solution"))
    config.solution = solution;

  try {
    const bool generated = given("--m") || given("--n") || given("--c");
    GeneratorSpec gen{m, n, c, seed, parse_solution_style(style)};

    SolverConfig solver;
    solver.method = parse_method(method);
    solver.max_iterations = iterations;
    solver.stop_tolerance = tolerance;
    solver.seed = seed;
    solver.replacement = parse_replacement(replacement);
    solver.pair_sampling = parse_pair_sampling(pair_sampling);

    switch (config.command) {
    case Command::analyze:
    case Command::solve:
      if (generated == config.input.has_value())
        throw UsageError("give exactly one of --input or generator flags (--m/--n/--c)");
      if (config.input && config.command == Command::solve && !config.rhs)
        throw UsageError("solve --input needs --rhs");
      if (generated) {
        validate(gen);
        config.generator = gen;
      }
      config.solver = solver;
      break;
    case Command::experiment: {
      ExperimentSpec spec;
      if (!preset.empty()) {
        spec = experiment_preset(preset, seed);
      } else if (generated) {
        validate(gen);
        spec.generator = gen;
      } else {
        throw UsageError("experiment needs --preset or generator flags");
      }
      if (given("--trials") || preset.empty())
        spec.trials = trials;
      if (given("--iterations") || preset.empty())
        spec.iterations = iterations;
      if (given("--methods") || preset.empty())
        spec.methods = parse_methods(methods, solver);
      spec.pair_row_touches = !no_pairing;
      spec.threads = threads;
      config.generator = spec.generator;
      config.experiment = spec;
      break;
    }
    case Command::verify: {
      if (suite != "all" && suite != "identity" && suite != "lemma" &&
          suite != "theorem" && suite != "noise")
        throw UsageError("unknown suite '" + suite + "'");
      config.generator = gen;
      config.verify_trials = given("--trials") ? trials : 200;
      ExperimentSpec spec;
      spec.threads = threads;
      config.experiment = spec;
      break;
    }
    case Command::dfactor:
      if (resolution < 2)
        throw UsageError("--resolution must be at least 2");
      break;
    }
  } catch (const UsageError &) {
    throw;
  } catch (const Error &e) {
    throw UsageError(e.what());
  }
  return config;
}

int run(const RunConfig &config, std::ostream &out, std::ostream &) {
  switch (config.command) {
  case Command::analyze:
    return run_analyze(config, out);
  case Command::solve:
    return run_solve(config, out);
  case Command::experiment:
    return run_experiment(config, out);
  case Command::verify:
    return run_verify(config, out);
  case Command::dfactor:
    return run_dfactor(config, out);
  }
  return 1;
}

int cli_main(int argc, const char *const *argv, std::ostream &out,
             std::ostream &err) {
  std::vector<std::string> args(argv + std::min(argc, 1), argv + argc);
  try {
    return run(parse_run_config(args), out, err);
  } catch (const HelpRequested &help) {
    out << help.text;
    return 0;
  } catch (const UsageError &e) {
    err << "error: " << e.what() << '\n';
    return 1;
  } catch (const Error &e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
}

} // namespace kaczmarz
