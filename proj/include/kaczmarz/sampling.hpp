#ifndef KACZMARZ_SAMPLING_HPP
#define KACZMARZ_SAMPLING_HPP

#include "kaczmarz/linalg.hpp"

#include <random>
#include <utility>
#include <vector>

namespace kaczmarz {

using RowPair = std::pair<Index, Index>;

/// Uniform row index in [0, m).
template <typename URBG> Index sample_row(Index m, URBG &rng) {
  if (m < 1)
    throw DegenerateMatrix("cannot sample a row of an empty matrix");
  return std::uniform_int_distribution<Index>(0, m - 1)(rng);
}

/// Uniform row index in [0, m) different from `previous`.
template <typename URBG>
Index sample_row_excluding(Index m, Index previous, URBG &rng) {
  if (m < 2)
    return sample_row(m, rng);
  Index i = std::uniform_int_distribution<Index>(0, m - 2)(rng);
  return i >= previous ? i + 1 : i;
}

/// Ordered pair (r, s), r != s, uniform over all m^2 - m choices.
template <typename URBG> RowPair sample_pair(Index m, URBG &rng) {
  if (m < 2)
    throw DegenerateMatrix("pair sampling needs at least two rows");
  const Index r = std::uniform_int_distribution<Index>(0, m - 1)(rng);
  const Index s = std::uniform_int_distribution<Index>(0, m - 2)(rng);
  return {r, s >= r ? s + 1 : s};
}

/// Row sampling with probability proportional to |a_i|^2.
class WeightedRowSampler {
public:
  explicit WeightedRowSampler(const VectorXd &row_norms) {
    std::vector<double> w(static_cast<std::size_t>(row_norms.size()));
    for (Index i = 0; i < row_norms.size(); ++i) {
      if (!(row_norms(i) > 0))
        throw ZeroRow(static_cast<std::size_t>(i));
      w[static_cast<std::size_t>(i)] = row_norms(i) * row_norms(i);
    }
    dist_ = std::discrete_distribution<Index>(w.begin(), w.end());
  }

  template <typename URBG> Index operator()(URBG &rng) { return dist_(rng); }

private:
  std::discrete_distribution<Index> dist_;
};

/// Ordered pairs of distinct rows with P(r, s) proportional to
/// |a_r|^2 |a_s|^2. Draws r from its marginal w_r (W - w_r), then s from w
/// restricted to s != r.
class WeightedPairSampler {
public:
  explicit WeightedPairSampler(const VectorXd &row_norms) {
    const Index m = row_norms.size();
    if (m < 2)
      throw DegenerateMatrix("pair sampling needs at least two rows");
    std::vector<double> w(static_cast<std::size_t>(m));
    double total = 0;
    for (Index i = 0; i < m; ++i) {
      if (!(row_norms(i) > 0))
        throw ZeroRow(static_cast<std::size_t>(i));
      w[static_cast<std::size_t>(i)] = row_norms(i) * row_norms(i);
      total += w[static_cast<std::size_t>(i)];
    }
    std::vector<double> marginal(w.size());
    for (std::size_t i = 0; i < w.size(); ++i)
      marginal[i] = w[i] * (total - w[i]);
    first_ = std::discrete_distribution<Index>(marginal.begin(), marginal.end());
    second_ = std::discrete_distribution<Index>(w.begin(), w.end());
  }

  template <typename URBG> RowPair operator()(URBG &rng) {
    const Index r = first_(rng);
    Index s = second_(rng);
    while (s == r)
      s = second_(rng);
    return {r, s};
  }

private:
  std::discrete_distribution<Index> first_;
  std::discrete_distribution<Index> second_;
};

template <typename URBG>
RowPair sample_pair_weighted(const VectorXd &row_norms, URBG &rng) {
  return WeightedPairSampler(row_norms)(rng);
}

} // namespace kaczmarz

#endif // KACZMARZ_SAMPLING_HPP
