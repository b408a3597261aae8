#include "kaczmarz/solvers.hpp"

#include "kaczmarz/projections.hpp"
#include "kaczmarz/random.hpp"
#include "kaczmarz/sampling.hpp"

#include <array>
#include <cmath>
#include <string>

namespace kaczmarz {

namespace {

constexpr std::array<std::pair<Method, std::string_view>, 5> method_names{{
    {Method::cyclic, "cyclic"},
    {Method::rk_uniform, "rk"},
    {Method::rk_weighted, "rk_weighted"},
    {Method::two_subspace, "2srk"},
    {Method::two_step_eps_opt, "two_step"},
}};

class Runner {
public:
  Runner(const LinearSystemXd &system, const SolverConfig &config)
      : config_(config), original_(system), rng_(make_engine(config.seed)) {
    if (system.b.size() != system.rows())
      throw DimensionMismatch("right-hand side length does not match rows");
    if (system.solution && system.solution->size() != system.cols())
      throw DimensionMismatch("solution length does not match columns");
    if (config.max_iterations < 1)
      throw DomainError("max_iterations must be at least 1");
    if (!(config.stop_tolerance >= 0))
      throw DomainError("stop_tolerance must be non-negative");
    if (uses_pairs(config.method) && system.rows() < 2)
      throw DegenerateMatrix("pair methods need at least two rows");

    auto standardized = standardize(system.A);
    A_ = std::move(standardized.A);
    norms_ = std::move(standardized.row_norms);
    b_ = system.b.cwiseQuotient(norms_);

    if (config.method == Method::rk_weighted)
      row_sampler_.emplace(norms_);
    if (uses_pairs(config.method) &&
        config.pair_sampling == PairSampling::weighted)
      pair_sampler_.emplace(norms_);

    x_ = config.initial ? *config.initial : VectorXd::Zero(system.cols());
    if (x_.size() != system.cols())
      throw DimensionMismatch("initial estimate length does not match columns");
  }

  IterateTrace run() {
    const bool track_error = original_.solution.has_value();
    const bool track_residual = config_.record_residuals || !track_error;
    trace_.errors_sq.reserve(track_error ? config_.max_iterations + 1 : 0);
    record(track_error, track_residual);
    const double e0 = track_error ? std::sqrt(trace_.errors_sq.front()) : 0;
    const double b_scale = std::max(1.0, original_.b.norm());

    for (std::size_t k = 0; k < config_.max_iterations; ++k) {
      iterate(k);
      ++trace_.iterations_run;
      record(track_error, track_residual);
      if (config_.stop_tolerance > 0) {
        const bool done =
            track_error
                ? std::sqrt(trace_.errors_sq.back()) <= config_.stop_tolerance * e0
                : trace_.residuals.back() <= config_.stop_tolerance * b_scale;
        if (done) {
          trace_.converged = true;
          break;
        }
      }
    }
    trace_.x = x_;
    return std::move(trace_);
  }

private:
  void record(bool error, bool residual) {
    if (error)
      trace_.errors_sq.push_back((x_ - *original_.solution).squaredNorm());
    if (residual)
      trace_.residuals.push_back((original_.A * x_ - original_.b).norm());
  }

  Index next_row(std::size_t k) {
    const Index m = A_.rows();
    const bool avoid_repeat =
        config_.replacement == Replacement::without_consecutive_repeat &&
        previous_row_ >= 0 && m > 1;
    Index i = 0;
    switch (config_.method) {
    case Method::cyclic:
      i = static_cast<Index>(k % static_cast<std::size_t>(m));
      break;
    case Method::rk_uniform:
      i = avoid_repeat ? sample_row_excluding(m, previous_row_, rng_)
                       : sample_row(m, rng_);
      break;
    case Method::rk_weighted:
      i = (*row_sampler_)(rng_);
      while (avoid_repeat && i == previous_row_)
        i = (*row_sampler_)(rng_);
      break;
    default:
      break;
    }
    previous_row_ = i;
    return i;
  }

  RowPair next_pair() {
    return pair_sampler_ ? (*pair_sampler_)(rng_) : sample_pair(A_.rows(), rng_);
  }

  /// Draws a pair whose rows are not numerically parallel. The flag is false
  /// when every redraw failed; the last pair drawn is returned regardless.
  std::pair<RowPair, bool> usable_pair() {
    RowPair pair = next_pair();
    for (int attempt = 0;; ++attempt) {
      const double mu = A_.row(pair.first).dot(A_.row(pair.second));
      if (std::abs(mu) < 1 - tol::parallel)
        return {pair, true};
      if (attempt == max_pair_resamples)
        return {pair, false};
      ++trace_.pair_resamples;
      pair = next_pair();
    }
  }

  void single_projection(Index i) {
    x_ = rk_step(x_, A_.row(i).transpose(), b_(i));
  }

  void iterate(std::size_t k) {
    if (!uses_pairs(config_.method)) {
      single_projection(next_row(k));
      trace_.row_touches += 1;
      return;
    }
    trace_.row_touches += 2;
    const auto [pair, usable] = usable_pair();
    const auto [r, s] = pair;
    if (!usable) {
      ++trace_.single_fallbacks;
      single_projection(s);
      return;
    }
    const auto a_r = A_.row(r).transpose();
    const auto a_s = A_.row(s).transpose();
    if (config_.method == Method::two_subspace) {
      x_ = two_subspace_step(x_, a_r, b_(r), a_s, b_(s)).x_next;
      return;
    }
    try {
      const double eps = epsilon_opt(x_, a_r, b_(r), a_s, b_(s));
      x_ = two_step_with_eps(x_, a_r, b_(r), a_s, b_(s), eps);
    } catch (const ZeroDenominator &) {
      single_projection(s);
    }
  }

  const SolverConfig &config_;
  const LinearSystemXd &original_;
  Engine rng_;
  RowMatrixXd A_;
  VectorXd norms_;
  VectorXd b_;
  VectorXd x_;
  std::optional<WeightedRowSampler> row_sampler_;
  std::optional<WeightedPairSampler> pair_sampler_;
  Index previous_row_ = -1;
  IterateTrace trace_;
};

} // namespace

std::string_view to_string(Method method) {
  for (const auto &[m, name] : method_names)
    if (m == method)
      return name;
  return "unknown";
}

Method parse_method(std::string_view name) {
  for (const auto &[m, n] : method_names)
    if (n == name)
      return m;
  if (name == "rk_uniform")
    return Method::rk_uniform;
  if (name == "two_subspace")
    return Method::two_subspace;
  if (name == "two_step_eps_opt")
    return Method::two_step_eps_opt;
  throw DomainError("unknown method '" + std::string(name) + "'");
}

std::string_view to_string(Replacement replacement) {
  return replacement == Replacement::with ? "with" : "without";
}

Replacement parse_replacement(std::string_view name) {
  if (name == "with")
    return Replacement::with;
  if (name == "without" || name == "without-consecutive-repeat")
    return Replacement::without_consecutive_repeat;
  throw DomainError("unknown replacement '" + std::string(name) + "'");
}

std::string_view to_string(PairSampling sampling) {
  return sampling == PairSampling::uniform ? "uniform" : "weighted";
}

PairSampling parse_pair_sampling(std::string_view name) {
  if (name == "uniform")
    return PairSampling::uniform;
  if (name == "weighted")
    return PairSampling::weighted;
  throw DomainError("unknown pair sampling '" + std::string(name) + "'");
}

bool uses_pairs(Method method) {
  return method == Method::two_subspace || method == Method::two_step_eps_opt;
}

IterateTrace solve(const LinearSystemXd &system, const SolverConfig &config) {
  return Runner(system, config).run();
}

NoisyTrace noisy_solve(const LinearSystemXd &system, const VectorXd &noise,
                       const SolverConfig &config) {
  if (!system.solution)
    throw DomainError("noisy_solve needs the noiseless solution");
  if (noise.size() != system.rows())
    throw DimensionMismatch("noise length does not match rows");

  const auto standardized = standardize(system.A);
  NoisyTrace out;
  out.noise_inf = noise.cwiseQuotient(standardized.row_norms).lpNorm<Eigen::Infinity>();
  out.R = scaled_condition_number(standardized.A).R;
  out.threshold = noise_threshold(out.R, out.noise_inf);

  LinearSystemXd noisy{system.A, system.b + noise, system.solution};
  out.trace = solve(noisy, config);
  return out;
}

} // namespace kaczmarz
