#ifndef KACZMARZ_SOLVERS_HPP
#define KACZMARZ_SOLVERS_HPP

#include "kaczmarz/analysis.hpp"
#include "kaczmarz/linalg.hpp"

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string_view>
#include <vector>

namespace kaczmarz {

enum class Method {
  cyclic,           ///< row k mod m
  rk_uniform,       ///< randomized Kaczmarz, uniform rows
  rk_weighted,      ///< randomized Kaczmarz, rows drawn proportional to |a_i|^2
  two_subspace,     ///< projection onto the intersection of two random rows
  two_step_eps_opt, ///< two sequential projections scaled by eps_opt
};

enum class Replacement { with, without_consecutive_repeat };
enum class PairSampling { uniform, weighted };

std::string_view to_string(Method method);
Method parse_method(std::string_view name);
std::string_view to_string(Replacement replacement);
Replacement parse_replacement(std::string_view name);
std::string_view to_string(PairSampling sampling);
PairSampling parse_pair_sampling(std::string_view name);

/// True for methods that use two rows per iteration.
bool uses_pairs(Method method);

struct SolverConfig {
  Method method = Method::rk_uniform;
  std::size_t max_iterations = 1000;
  /// Stop once |x_k - x| <= tol |x_0 - x| when the system carries its
  /// solution, otherwise once |A x_k - b| <= tol max(1, |b|). 0 disables.
  double stop_tolerance = 0;
  std::uint64_t seed = 0;
  /// Applies to single-row random methods: forbid drawing the previous row.
  Replacement replacement = Replacement::with;
  PairSampling pair_sampling = PairSampling::uniform;
  std::optional<VectorXd> initial; ///< zero vector when unset
  /// Residuals cost O(mn) per iteration; they are always recorded when the
  /// system has no attached solution.
  bool record_residuals = false;
};

/// Near-parallel pairs are redrawn this many times before the iteration falls
/// back to a single projection onto a_s.
inline constexpr int max_pair_resamples = 16;

struct IterateTrace {
  std::vector<double> errors_sq; ///< |x - x_k|^2 for k = 0..iterations_run
  std::vector<double> residuals; ///< |A x_k - b| for k = 0..iterations_run
  std::size_t iterations_run = 0;
  std::size_t row_touches = 0;
  std::size_t pair_resamples = 0;
  std::size_t single_fallbacks = 0;
  bool converged = false;
  VectorXd x;
};

/// Runs one method on the system. Rows are standardized internally (together
/// with b), so arbitrary row norms are accepted; rk_weighted and weighted pair
/// sampling use the original norms.
IterateTrace solve(const LinearSystemXd &system, const SolverConfig &config);

struct NoisyTrace {
  IterateTrace trace;
  double noise_inf = 0; ///< |w|_inf on the standardized scale
  double R = 0;
  double threshold = 0; ///< sqrt(R) |w|_inf
};

/// Runs the method on b + w while measuring error against the noiseless
/// solution carried by `system`.
NoisyTrace noisy_solve(const LinearSystemXd &system, const VectorXd &noise,
                       const SolverConfig &config);

} // namespace kaczmarz

#endif // KACZMARZ_SOLVERS_HPP
