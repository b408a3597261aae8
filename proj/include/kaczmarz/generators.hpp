#ifndef KACZMARZ_GENERATORS_HPP
#define KACZMARZ_GENERATORS_HPP

#include "kaczmarz/linalg.hpp"
#include "kaczmarz/random.hpp"

#include <cstdint>
#include <string_view>

namespace kaczmarz {

enum class SolutionStyle { gaussian, uniform_sphere };

std::string_view to_string(SolutionStyle style);
SolutionStyle parse_solution_style(std::string_view name);

/// m x n matrix with i.i.d. U[c, 1] entries, rows standardized afterwards.
struct GeneratorSpec {
  Index m = 300;
  Index n = 100;
  double c = 0.9;
  std::uint64_t seed = 0;
  SolutionStyle solution_style = SolutionStyle::gaussian;
};

void validate(const GeneratorSpec &spec);

/// Maximum number of matrix draws before generate_system gives up on a
/// rank-deficient realization.
inline constexpr int max_generator_attempts = 8;

/// Standardized consistent system b = A x with its solution attached.
/// Deterministic in spec.seed.
LinearSystemXd generate_system(const GeneratorSpec &spec);

/// Seeded standard normal starting point.
VectorXd initial_estimate(Index n, std::uint64_t seed);

struct NoisySystem {
  LinearSystemXd system; ///< b + w, with the noiseless solution retained
  VectorXd noise;        ///< w, uniform on [-level, level]^m
};

NoisySystem add_noise(const LinearSystemXd &system, double level,
                      std::uint64_t seed);

/// Small standardized system for the exact-enumeration harnesses:
/// m in [4, 20], n in [2, min(6, m - 1)], entries U[c, 1] with c drawn from
/// [-0.5, 0.9]. Draws with a pair closer to parallel than
/// small_system_max_coherence are redrawn (dimensions and c included).
inline constexpr double small_system_max_coherence = 1 - 1e-6;
LinearSystemXd random_small_system(Engine &rng);

} // namespace kaczmarz

#endif // KACZMARZ_GENERATORS_HPP
