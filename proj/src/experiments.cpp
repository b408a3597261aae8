#include "kaczmarz/experiments.hpp"

#include "kaczmarz/projections.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <limits>
#include <random>
#include <string>
#include <thread>

namespace kaczmarz {

namespace {

std::uint64_t trial_seed(std::uint64_t master, std::size_t trial,
                         std::size_t method) {
  return derive_seed(master, Stream::trial, (trial << 8) | method);
}

void require_trials(const ExperimentSpec &spec) {
  if (spec.trials < 1)
    throw DomainError("experiment needs at least one trial");
  if (spec.iterations < 1)
    throw DomainError("experiment needs at least one iteration");
}

/// errors_sq of every trial for one solver configuration.
std::vector<std::vector<double>>
run_trials(const LinearSystemXd &system, const VectorXd &x0,
           const ExperimentSpec &spec, SolverConfig config,
           std::size_t method_index) {
  config.max_iterations = iterations_for(spec, config.method);
  config.initial = x0;
  config.stop_tolerance = 0;
  config.record_residuals = false;

  std::vector<std::vector<double>> traces(spec.trials);
  parallel_for(spec.trials, spec.threads, [&](std::size_t t) {
    SolverConfig local = config;
    local.seed = trial_seed(spec.generator.seed, t, method_index);
    try {
      traces[t] = solve(system, local).errors_sq;
    } catch (const Error &e) {
      throw Error("trial " + std::to_string(t) + ": " + e.what());
    }
  });
  return traces;
}

struct Moments {
  std::vector<double> mean;
  std::vector<double> standard_error;
};

/// Per-k mean in trial order, accumulated as offsets from the first trial so
/// identical samples (k = 0) give exactly that value.
std::vector<double> column_mean(const std::vector<std::vector<double>> &traces) {
  const std::vector<double> &first = traces.front();
  std::vector<double> offset(first.size(), 0.0);
  for (std::size_t t = 1; t < traces.size(); ++t)
    for (std::size_t k = 0; k < first.size(); ++k)
      offset[k] += traces[t][k] - first[k];
  const double count = static_cast<double>(traces.size());
  for (std::size_t k = 0; k < first.size(); ++k)
    offset[k] = first[k] + offset[k] / count;
  return offset;
}

/// Column statistics over trials, reduced in trial order.
Moments moments(const std::vector<std::vector<double>> &traces) {
  const std::size_t len = traces.front().size();
  const double count = static_cast<double>(traces.size());
  Moments out{column_mean(traces), std::vector<double>(len, 0.0)};
  if (traces.size() > 1) {
    for (const auto &trace : traces)
      for (std::size_t k = 0; k < len; ++k) {
        const double d = trace[k] - out.mean[k];
        out.standard_error[k] += d * d;
      }
    for (auto &v : out.standard_error)
      v = std::sqrt(v / (count - 1)) / std::sqrt(count);
  }
  return out;
}

void flag_exceedances(BoundCheckReport &report) {
  for (std::size_t k = 0; k < report.mean.size(); ++k) {
    const double allowed = report.bound[k] +
                           standard_errors_allowed * report.standard_error[k] +
                           1e-12 * report.bound[k];
    if (report.mean[k] > allowed)
      report.flagged.push_back(k);
  }
}

} // namespace

std::vector<SolverConfig> default_methods() {
  SolverConfig rk;
  rk.method = Method::rk_uniform;
  SolverConfig two;
  two.method = Method::two_subspace;
  return {rk, two};
}

std::size_t iterations_for(const ExperimentSpec &spec, Method method) {
  return (spec.pair_row_touches && !uses_pairs(method)) ? 2 * spec.iterations
                                                        : spec.iterations;
}

void parallel_for(std::size_t count, unsigned threads,
                  const std::function<void(std::size_t)> &fn) {
  if (threads == 0)
    threads = std::max(1u, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, count));
  std::vector<std::exception_ptr> errors(count);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i; (i = next.fetch_add(1)) < count;) {
      try {
        fn(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(threads);
    for (unsigned t = 0; t < threads; ++t)
      pool.emplace_back(worker);
  }
  for (const auto &e : errors)
    if (e)
      std::rethrow_exception(e);
}

double TrialEnvelope::bound_rk_at(double row_touches) const {
  return bound_rk(conditioning.R, row_touches) * initial_error_sq;
}

double TrialEnvelope::bound_two_subspace_at(double row_touches) const {
  return bound_two_subspace(conditioning.R, coherence.D, row_touches / 2) *
         initial_error_sq;
}

const MethodEnvelope &TrialEnvelope::envelope(Method method) const {
  for (const auto &m : methods)
    if (m.method == method)
      return m;
  throw DomainError("method " + std::string(to_string(method)) +
                    " is not part of the envelope");
}

TrialEnvelope run_envelope(const ExperimentSpec &spec) {
  require_trials(spec);
  const auto system = generate_system(spec.generator);
  const VectorXd x0 = initial_estimate(spec.generator.n, spec.generator.seed);
  const auto methods = spec.methods.empty() ? default_methods() : spec.methods;

  TrialEnvelope env;
  env.coherence = coherence(system.A);
  env.conditioning = scaled_condition_number(system.A);
  env.initial_error_sq = (x0 - *system.solution).squaredNorm();
  env.trials = spec.trials;

  for (std::size_t j = 0; j < methods.size(); ++j) {
    const auto traces = run_trials(system, x0, spec, methods[j], j);
    const std::size_t len = traces.front().size();
    MethodEnvelope m{methods[j].method,
                     uses_pairs(methods[j].method) ? 2u : 1u,
                     column_mean(traces), traces.front(), traces.front()};
    for (const auto &trace : traces)
      for (std::size_t k = 0; k < len; ++k) {
        m.min[k] = std::min(m.min[k], trace[k]);
        m.max[k] = std::max(m.max[k], trace[k]);
      }
    // Offsets keep the mean within rounding of [min, max]; clamp the rest.
    for (std::size_t k = 0; k < len; ++k)
      m.mean[k] = std::clamp(m.mean[k], m.min[k], m.max[k]);
    env.methods.push_back(std::move(m));
  }
  return env;
}

// Near-parallel pairs (1 - mu ~ 1e-8 at n = 2) amplify the O(eps) departure
// of stored rows from unit length by 1 / (1 - mu^2), so the identity is
// evaluated in extended precision on rows re-standardized at that precision.
IdentityReport verify_step_identity(std::size_t trials, std::uint64_t seed) {
  using Wide = long double;
  IdentityReport report;
  Engine rng = make_engine(seed, Stream::harness, 1);
  std::normal_distribution<double> normal;
  for (std::size_t t = 0; t < trials; ++t) {
    const auto sys = random_small_system(rng);
    const RowMatrix<Wide> A = standardize(sys.A.cast<Wide>()).A;
    const Vector<Wide> x = sys.solution->cast<Wide>();
    const Vector<Wide> b = A * x;
    Vector<Wide> previous = x;
    for (Index j = 0; j < previous.size(); ++j)
      previous(j) += normal(rng);
    const Vector<Wide> e = x - previous;
    const Wide scale = std::max<Wide>(e.squaredNorm(), 1e-300L);

    for (Index r = 0; r < A.rows(); ++r) {
      for (Index s = 0; s < A.rows(); ++s) {
        if (r == s)
          continue;
        const auto a_r = A.row(r).transpose();
        const auto a_s = A.row(s).transpose();
        const auto step = two_subspace_step(previous, a_r, b(r), a_s, b(s));
        const Vector<Wide> z = rk_step(previous, a_r, b(r));
        const Vector<Wide> z_prime = rk_step(z, a_s, b(s));
        const Wide gamma = std::sqrt(1 - step.mu * step.mu);
        const Wide correction =
            step.mu * step.mu * e.dot(step.v) - gamma * step.mu * e.dot(a_s);
        const Wide lhs = (x - step.x_next).squaredNorm();
        const Wide rhs = (x - z_prime).squaredNorm() - correction * correction;
        const double violation = static_cast<double>(std::abs(lhs - rhs) / scale);
        report.max_violation = std::max(report.max_violation, violation);
        if (violation > identity_tolerance)
          ++report.violations;
        ++report.pairs;
      }
    }
    ++report.instances;
  }
  return report;
}

double exact_step_expectation(const LinearSystemXd &system, const VectorXd &x) {
  const Index m = system.rows();
  if (m < 2)
    throw DegenerateMatrix("pair enumeration needs at least two rows");
  double total = 0;
  for (Index r = 0; r < m; ++r)
    for (Index s = 0; s < m; ++s) {
      if (r == s)
        continue;
      const auto step = two_subspace_step(system.A, system.b, x, r, s);
      total += (*system.solution - step.x_next).squaredNorm();
    }
  return total / static_cast<double>(m * m - m);
}

double pairwise_step_bound(const RowMatrixXd &A, const VectorXd &error,
                           double R) {
  const Index m = A.rows();
  const VectorXd projections = A * error;
  double sum = 0;
  for (Index r = 0; r < m; ++r)
    for (Index s = r + 1; s < m; ++s) {
      const double mu = A.row(r).dot(A.row(s));
      const double c = (std::abs(mu) - mu * mu) / std::sqrt(1 - mu * mu);
      sum += c * c *
             (projections(r) * projections(r) + projections(s) * projections(s));
    }
  const double rk = 1 - 1 / R;
  return rk * rk * error.squaredNorm() - sum / static_cast<double>(m * m - m);
}

LemmaReport verify_lemma_expectation(std::size_t trials, std::uint64_t seed) {
  LemmaReport report;
  report.min_margin_pairwise = std::numeric_limits<double>::infinity();
  report.min_margin_coherence = std::numeric_limits<double>::infinity();
  Engine rng = make_engine(seed, Stream::harness, 2);
  std::normal_distribution<double> normal;
  for (std::size_t t = 0; t < trials; ++t) {
    const auto sys = random_small_system(rng);
    VectorXd previous = *sys.solution;
    for (Index j = 0; j < previous.size(); ++j)
      previous(j) += normal(rng);
    const VectorXd e = *sys.solution - previous;
    const double e_sq = e.squaredNorm();

    const auto cond = scaled_condition_number(sys.A);
    const auto coh = coherence(sys.A);
    const double exact = exact_step_expectation(sys, previous);
    const double pairwise = pairwise_step_bound(sys.A, e, cond.R);
    const double simple = two_subspace_base(cond.R, coh.D).value * e_sq;

    const double margin_pairwise = (pairwise - exact) / e_sq;
    const double margin_coherence = (simple - exact) / e_sq;
    report.min_margin_pairwise = std::min(report.min_margin_pairwise, margin_pairwise);
    report.min_margin_coherence =
        std::min(report.min_margin_coherence, margin_coherence);
    if (margin_pairwise < -lemma_slack)
      ++report.pairwise_violations;
    if (margin_coherence < -lemma_slack)
      ++report.coherence_violations;
    if (margin_pairwise > margin_coherence + 1e-12)
      ++report.ordering_violations;
    ++report.instances;
  }
  return report;
}

BoundCheckReport verify_theorem_bound(const ExperimentSpec &spec) {
  require_trials(spec);
  const auto system = generate_system(spec.generator);
  const VectorXd x0 = initial_estimate(spec.generator.n, spec.generator.seed);
  SolverConfig config;
  config.method = Method::two_subspace;

  BoundCheckReport report;
  report.coherence = coherence(system.A);
  report.conditioning = scaled_condition_number(system.A);
  const auto traces = run_trials(system, x0, spec, config, 0);
  auto stats = moments(traces);
  report.mean = std::move(stats.mean);
  report.standard_error = std::move(stats.standard_error);

  const double e0 = (x0 - *system.solution).squaredNorm();
  for (std::size_t k = 0; k < report.mean.size(); ++k)
    report.bound.push_back(bound_two_subspace(report.conditioning.R,
                                              report.coherence.D,
                                              static_cast<double>(k)) *
                           e0);
  flag_exceedances(report);
  return report;
}

NoiseReport noisy_threshold_experiment(const ExperimentSpec &spec,
                                       double level) {
  require_trials(spec);
  if (!(level >= 0))
    throw DomainError("noise level must be non-negative");
  const auto system = generate_system(spec.generator);
  const VectorXd x0 = initial_estimate(spec.generator.n, spec.generator.seed);
  const auto noisy = add_noise(system, level,
                               derive_seed(spec.generator.seed, Stream::noise, 0));

  SolverConfig config;
  config.method = Method::rk_uniform;
  config.max_iterations = spec.iterations;
  config.initial = x0;

  NoiseReport report;
  std::vector<std::vector<double>> errors(spec.trials);
  std::vector<NoisyTrace> runs(spec.trials);
  parallel_for(spec.trials, spec.threads, [&](std::size_t t) {
    SolverConfig local = config;
    local.seed = trial_seed(spec.generator.seed, t, 0);
    runs[t] = noisy_solve(system, noisy.noise, local);
    errors[t].reserve(runs[t].trace.errors_sq.size());
    for (double e_sq : runs[t].trace.errors_sq)
      errors[t].push_back(std::sqrt(e_sq));
  });
  report.noise_inf = runs.front().noise_inf;
  report.threshold = runs.front().threshold;

  auto stats = moments(errors);
  report.check.mean = std::move(stats.mean);
  report.check.standard_error = std::move(stats.standard_error);
  report.check.coherence = coherence(system.A);
  report.check.conditioning = scaled_condition_number(system.A);

  const double e0 = (x0 - *system.solution).norm();
  const double R = runs.front().R;
  for (std::size_t k = 0; k < report.check.mean.size(); ++k)
    report.check.bound.push_back(
        bound_rk(R, static_cast<double>(k) / 2) * e0 + report.threshold);
  flag_exceedances(report.check);

  const std::size_t tail = std::max<std::size_t>(1, report.check.mean.size() / 10);
  double sum = 0;
  for (std::size_t k = report.check.mean.size() - tail; k < report.check.mean.size(); ++k)
    sum += report.check.mean[k];
  report.plateau = sum / static_cast<double>(tail);
  return report;
}

std::vector<DGridPoint> dfactor_grid(std::size_t resolution) {
  if (resolution < 2)
    throw DomainError("D grid needs at least two points per axis");
  const double last = static_cast<double>(resolution - 1);
  auto coord = [&](std::size_t i) { return static_cast<double>(i) / last; };
  std::vector<DGridPoint> grid;
  grid.reserve(resolution * (resolution + 1) / 2);
  for (std::size_t i = 0; i < resolution; ++i) {
    const double delta = coord(i);
    for (std::size_t j = i; j < resolution; ++j) {
      const double Delta = coord(j);
      grid.push_back({delta, Delta, improvement_factor(delta, Delta)});
    }
  }
  return grid;
}

DGridPoint dfactor_argmax(const std::vector<DGridPoint> &grid) {
  if (grid.empty())
    throw DomainError("empty D grid");
  return *std::max_element(grid.begin(), grid.end(),
                           [](const DGridPoint &a, const DGridPoint &b) {
                             return a.D < b.D;
                           });
}

} // namespace kaczmarz
