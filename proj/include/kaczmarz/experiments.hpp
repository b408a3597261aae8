#ifndef KACZMARZ_EXPERIMENTS_HPP
#define KACZMARZ_EXPERIMENTS_HPP

#include "kaczmarz/analysis.hpp"
#include "kaczmarz/generators.hpp"
#include "kaczmarz/solvers.hpp"

#include <cstddef>
#include <cstdint>
#include <functional>
#include <vector>

namespace kaczmarz {

/// Repeated seeded runs on one fixed matrix and one fixed starting point;
/// trials differ only in the rows each method selects. generator.seed is the
/// master seed for the matrix, the start and every trial stream.
struct ExperimentSpec {
  GeneratorSpec generator;
  std::size_t trials = 40;
  /// Iterations of the pair methods. Single-row methods run twice as many
  /// when pair_row_touches is set, so both use the same number of rows.
  std::size_t iterations = 1000;
  std::vector<SolverConfig> methods;
  bool pair_row_touches = true;
  unsigned threads = 0; ///< 0 = hardware concurrency
};

/// RK against 2SRK, the comparison every figure makes.
std::vector<SolverConfig> default_methods();

std::size_t iterations_for(const ExperimentSpec &spec, Method method);

struct MethodEnvelope {
  Method method;
  std::size_t touches_per_iteration;
  std::vector<double> mean; ///< indexed by iteration k = 0..iterations
  std::vector<double> min;
  std::vector<double> max;
};

struct TrialEnvelope {
  std::vector<MethodEnvelope> methods;
  CoherenceProfile<double> coherence{};
  ConditioningProfile<double> conditioning{};
  double initial_error_sq = 0;
  std::size_t trials = 0;

  /// Absolute bound curves at a given number of row touches.
  double bound_rk_at(double row_touches) const;
  double bound_two_subspace_at(double row_touches) const;
  const MethodEnvelope &envelope(Method method) const;
};

TrialEnvelope run_envelope(const ExperimentSpec &spec);

/// Runs fn(i) for i in [0, count) on up to `threads` workers.
void parallel_for(std::size_t count, unsigned threads,
                  const std::function<void(std::size_t)> &fn);

struct IdentityReport {
  std::size_t instances = 0;
  std::size_t pairs = 0;
  double max_violation = 0; ///< relative to |e_{k-1}|^2
  std::size_t violations = 0;
  bool passed() const { return violations == 0; }
};

/// Per-pair check of |x - x_k|^2 = |x - z'|^2 - (mu^2 <e, v> - gamma mu
/// <e, a_s>)^2 where z' is two successive Kaczmarz projections (a_r then
/// a_s) and x_k the two-subspace step from the same point.
IdentityReport verify_step_identity(std::size_t trials, std::uint64_t seed);

inline constexpr double identity_tolerance = 1e-10;
inline constexpr double lemma_slack = 1e-10;

struct LemmaReport {
  std::size_t instances = 0;
  /// Margins (bound - exact expectation) / |e|^2; negative means violated.
  double min_margin_pairwise = 0;
  double min_margin_coherence = 0;
  std::size_t pairwise_violations = 0;
  std::size_t coherence_violations = 0;
  std::size_t ordering_violations = 0; ///< pairwise margin above coherence one
  bool passed() const {
    return pairwise_violations == 0 && coherence_violations == 0 &&
           ordering_violations == 0;
  }
};

/// Exact one-step expectation of the two-subspace method by enumerating all
/// m^2 - m ordered pairs.
double exact_step_expectation(const LinearSystemXd &system, const VectorXd &x);

/// Right-hand side of the pairwise one-step bound: (1 - 1/R)^2 |e|^2 minus
/// the average of C_rs^2 (<e, a_r>^2 + <e, a_s>^2) over r < s, with
/// C_rs = (|mu| - mu^2) / sqrt(1 - mu^2).
double pairwise_step_bound(const RowMatrixXd &A, const VectorXd &error,
                           double R);

/// Verifies both one-step bounds (pairwise and coherence-based) against the
/// enumerated expectation on random small systems.
LemmaReport verify_lemma_expectation(std::size_t trials, std::uint64_t seed);

/// Per-k sample statistics against a theoretical curve; k is flagged when
/// mean > bound + 3 standard errors.
struct BoundCheckReport {
  std::vector<double> mean;
  std::vector<double> standard_error;
  std::vector<double> bound;
  std::vector<std::size_t> flagged;
  CoherenceProfile<double> coherence{};
  ConditioningProfile<double> conditioning{};
  bool passed() const { return flagged.empty(); }
};

inline constexpr double standard_errors_allowed = 3.0;

/// Monte Carlo check of E|x - x_k|^2 <= ((1-1/R)^2 - D/R)^k |x - x_0|^2 for
/// the two-subspace method. spec.methods is ignored.
BoundCheckReport verify_theorem_bound(const ExperimentSpec &spec);

struct NoiseReport {
  BoundCheckReport check; ///< on E|x_k - x| (not squared)
  double noise_inf = 0;
  double threshold = 0; ///< sqrt(R) |w|_inf
  double plateau = 0;   ///< mean error over the last tenth of the run
};

/// Randomized Kaczmarz on b + w against
/// (1 - 1/R)^{k/2} |x_0 - x| + sqrt(R) |w|_inf.
NoiseReport noisy_threshold_experiment(const ExperimentSpec &spec,
                                       double level);

struct DGridPoint {
  double delta;
  double Delta;
  double D;
};

/// D over the triangle 0 <= delta <= Delta <= 1 with `resolution` points per
/// axis, row-major in delta.
std::vector<DGridPoint> dfactor_grid(std::size_t resolution);
DGridPoint dfactor_argmax(const std::vector<DGridPoint> &grid);

} // namespace kaczmarz

#endif // KACZMARZ_EXPERIMENTS_HPP
