#include "kaczmarz/generators.hpp"

#include <random>
#include <string>

namespace kaczmarz {

namespace {

RowMatrixXd uniform_matrix(Index m, Index n, double c, Engine &rng) {
  std::uniform_real_distribution<double> entry(c, 1.0);
  RowMatrixXd A(m, n);
  for (Index i = 0; i < m; ++i)
    for (Index j = 0; j < n; ++j)
      A(i, j) = entry(rng);
  return A;
}

VectorXd gaussian_vector(Index n, Engine &rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  VectorXd v(n);
  for (Index j = 0; j < n; ++j)
    v(j) = normal(rng);
  return v;
}

/// Standardized full-rank draw, or nullopt when the draw is unusable.
std::optional<RowMatrixXd> standardized_draw(Index m, Index n, double c,
                                             Engine &rng) {
  try {
    auto s = standardize(uniform_matrix(m, n, c, rng));
    smallest_singular_value(s.A);
    return std::move(s.A);
  } catch (const ZeroRow &) {
  } catch (const RankDeficient &) {
  }
  return std::nullopt;
}

} // namespace

std::string_view to_string(SolutionStyle style) {
  return style == SolutionStyle::gaussian ? "gaussian" : "uniform_sphere";
}

SolutionStyle parse_solution_style(std::string_view name) {
  if (name == "gaussian")
    return SolutionStyle::gaussian;
  if (name == "uniform_sphere")
    return SolutionStyle::uniform_sphere;
  throw DomainError("unknown solution style '" + std::string(name) + "'");
}

void validate(const GeneratorSpec &spec) {
  if (!(spec.c < 1))
    throw DomainError("interval lower endpoint c must be below 1");
  if (!(spec.n >= 1 && spec.m > spec.n))
    throw DomainError("generator needs m > n >= 1");
}

LinearSystemXd generate_system(const GeneratorSpec &spec) {
  validate(spec);
  for (int attempt = 0; attempt < max_generator_attempts; ++attempt) {
    Engine rng = make_engine(spec.seed, Stream::matrix, attempt);
    auto A = standardized_draw(spec.m, spec.n, spec.c, rng);
    if (!A)
      continue;

    Engine solution_rng = make_engine(spec.seed, Stream::solution);
    VectorXd x = gaussian_vector(spec.n, solution_rng);
    if (spec.solution_style == SolutionStyle::uniform_sphere)
      x.normalize();
    VectorXd b = *A * x;
    return {std::move(*A), std::move(b), std::move(x)};
  }
  throw RankDeficient(0);
}

VectorXd initial_estimate(Index n, std::uint64_t seed) {
  Engine rng = make_engine(seed, Stream::initial);
  return gaussian_vector(n, rng);
}

NoisySystem add_noise(const LinearSystemXd &system, double level,
                      std::uint64_t seed) {
  if (!(level >= 0))
    throw DomainError("noise level must be non-negative");
  VectorXd w = VectorXd::Zero(system.rows());
  if (level > 0) {
    Engine rng = make_engine(seed, Stream::noise);
    std::uniform_real_distribution<double> entry(-level, level);
    for (Index i = 0; i < w.size(); ++i)
      w(i) = entry(rng);
  }
  return {{system.A, system.b + w, system.solution}, std::move(w)};
}

LinearSystemXd random_small_system(Engine &rng) {
  for (;;) {
    const Index m = std::uniform_int_distribution<Index>(4, 20)(rng);
    const Index n =
        std::uniform_int_distribution<Index>(2, std::min<Index>(6, m - 1))(rng);
    const double c = std::uniform_real_distribution<double>(-0.5, 0.9)(rng);
    auto A = standardized_draw(m, n, c, rng);
    if (!A)
      continue;
    const RowMatrixXd gram = *A * A->transpose();
    const double Delta = (gram - RowMatrixXd::Identity(m, m)).cwiseAbs().maxCoeff();
    if (Delta > small_system_max_coherence)
      continue;
    VectorXd x = gaussian_vector(n, rng);
    VectorXd b = *A * x;
    return {std::move(*A), std::move(b), std::move(x)};
  }
}

} // namespace kaczmarz
