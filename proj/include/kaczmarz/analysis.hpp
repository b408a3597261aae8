#ifndef KACZMARZ_ANALYSIS_HPP
#define KACZMARZ_ANALYSIS_HPP

#include "kaczmarz/linalg.hpp"

#include <cmath>
#include <limits>

namespace kaczmarz {

/// Pairwise row coherence of a standardized matrix: delta = min and
/// Delta = max of |<a_j, a_k>| over j != k, with the improvement factor D.
template <typename Scalar> struct CoherenceProfile {
  Scalar delta;
  Scalar Delta;
  Scalar D;
};

/// Frobenius norm squared, smallest singular value and the scaled condition
/// number R = |A|_F^2 / sigma_min^2.
template <typename Scalar> struct ConditioningProfile {
  Scalar frob_sq;
  Scalar sigma_min;
  Scalar R;
};

/// Improvement factor D = min{f(delta), f(Delta)} with
/// f(t) = t^2 (1 - t) / (1 + t).
template <typename Scalar> Scalar improvement_factor(Scalar delta, Scalar Delta) {
  if (!(delta >= 0 && Delta <= 1 && delta <= Delta))
    throw DomainError("improvement_factor requires 0 <= delta <= Delta <= 1");
  auto f = [](Scalar t) { return t * t * (1 - t) / (1 + t); };
  return std::min(f(delta), f(Delta));
}

template <typename Derived>
CoherenceProfile<typename Derived::Scalar>
coherence(const Eigen::MatrixBase<Derived> &A) {
  using Scalar = typename Derived::Scalar;
  if (A.rows() < 2)
    throw DegenerateMatrix("coherence needs at least two rows");
  if (!is_standardized(A))
    throw DomainError("coherence requires a standardized matrix");

  const Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> gram =
      A * A.transpose();
  Scalar lo = std::numeric_limits<Scalar>::infinity();
  Scalar hi = 0;
  for (Index j = 0; j < A.rows(); ++j) {
    for (Index k = j + 1; k < A.rows(); ++k) {
      const Scalar mu = std::abs(gram(j, k));
      if (mu >= 1 - tol::parallel)
        throw DependentRows(static_cast<std::size_t>(j),
                            static_cast<std::size_t>(k));
      lo = std::min(lo, mu);
      hi = std::max(hi, mu);
    }
  }
  return {lo, hi, improvement_factor(lo, hi)};
}

template <typename Derived>
ConditioningProfile<typename Derived::Scalar>
scaled_condition_number(const Eigen::MatrixBase<Derived> &A) {
  const auto frob_sq = A.squaredNorm();
  const auto sigma = smallest_singular_value(A);
  return {frob_sq, sigma, frob_sq / (sigma * sigma)};
}

/// Conditioning of A_hat = diag(d) A with d_j = sqrt(|A|_F^2 - |a_j|^2), the
/// matrix governing pair sampling proportional to |a_r|^2 |a_s|^2.
template <typename Derived>
ConditioningProfile<typename Derived::Scalar>
weighted_condition_number(const Eigen::MatrixBase<Derived> &A) {
  using Scalar = typename Derived::Scalar;
  if (A.rows() < 2)
    throw DegenerateMatrix("weighted conditioning needs at least two rows");
  const Scalar frob_sq = A.squaredNorm();
  RowMatrix<Scalar> weighted = A;
  for (Index j = 0; j < A.rows(); ++j) {
    const Scalar d_sq = frob_sq - A.row(j).squaredNorm();
    if (!(d_sq > 0))
      throw DomainError("row carries the whole Frobenius norm");
    weighted.row(j) *= std::sqrt(d_sq);
  }
  return scaled_condition_number(weighted);
}

/// Randomized Kaczmarz bound factor (1 - 1/R)^k on E|x_k - x|^2 / |x_0 - x|^2.
template <typename Scalar> Scalar bound_rk(Scalar R, Scalar k) {
  if (!(R >= 1) || !(k >= 0))
    throw DomainError("bound_rk requires R >= 1 and k >= 0");
  return std::pow(1 - 1 / R, k);
}

template <typename Scalar> struct ContractionBase {
  Scalar value;
  bool clamped; ///< the raw base was negative and has been set to 0
};

/// Per-iteration contraction (1 - 1/R)^2 - D/R of the two-subspace method,
/// clamped at 0.
template <typename Scalar>
ContractionBase<Scalar> two_subspace_base(Scalar R, Scalar D) {
  if (!(R >= 1) || !(D >= 0))
    throw DomainError("two-subspace base requires R >= 1 and D >= 0");
  const Scalar rk = 1 - 1 / R;
  const Scalar raw = rk * rk - D / R;
  return raw < 0 ? ContractionBase<Scalar>{0, true}
                 : ContractionBase<Scalar>{raw, false};
}

template <typename Scalar>
Scalar bound_two_subspace(Scalar R, Scalar D, Scalar k) {
  if (!(k >= 0))
    throw DomainError("bound_two_subspace requires k >= 0");
  if (D == 0)
    return bound_rk(R, 2 * k);
  return std::pow(two_subspace_base(R, D).value, k);
}

/// Iteration count after which the two-subspace bound guarantees
/// E|x_k - x|^2 <= eps^2 |x_0 - x|^2. Callers round up.
template <typename Scalar>
Scalar iterations_to_accuracy(Scalar R, Scalar D, Scalar eps) {
  if (!(eps > 0 && eps < 1))
    throw DomainError("accuracy must lie in (0, 1)");
  const auto base = two_subspace_base(R, D);
  if (base.clamped || !(base.value > 0 && base.value < 1))
    throw DegenerateBase(static_cast<double>(base.value));
  return 2 * std::log(eps) / std::log(base.value);
}

/// Error floor sqrt(R) |w|_inf reached by randomized Kaczmarz on noisy data.
template <typename Scalar> Scalar noise_threshold(Scalar R, Scalar w_inf) {
  return std::sqrt(R) * w_inf;
}

/// Refinement available when all row correlations are non-negative:
/// E = 4 delta^3 and Q the scaled condition number of the matrix Omega of
/// normalized row differences.
template <typename Scalar> struct NonnegCorrelationBound {
  Scalar E;
  Scalar Q; ///< +inf when Omega is rank deficient
  Scalar omega_frob_sq;
  Scalar omega_sigma_min;
  Scalar base;         ///< (1 - 1/R)^2 - D/R
  Scalar refined_base; ///< base - E/Q
};

/// Omega holds one row (a_j - a_i)/|a_j - a_i| per ordered pair i != j, so it
/// has m^2 - m rows; the zero diagonal differences are left out.
template <typename Derived>
RowMatrix<typename Derived::Scalar>
row_difference_matrix(const Eigen::MatrixBase<Derived> &A) {
  using Scalar = typename Derived::Scalar;
  const Index m = A.rows();
  RowMatrix<Scalar> omega(m * (m - 1), A.cols());
  Index row = 0;
  for (Index i = 0; i < m; ++i) {
    for (Index j = 0; j < m; ++j) {
      if (i == j)
        continue;
      omega.row(row) = A.row(j) - A.row(i);
      const Scalar norm = omega.row(row).norm();
      if (!(norm > tol::zero_row))
        throw ZeroDifference(static_cast<std::size_t>(i),
                             static_cast<std::size_t>(j));
      omega.row(row++) /= norm;
    }
  }
  return omega;
}

template <typename Derived>
NonnegCorrelationBound<typename Derived::Scalar>
nonneg_correlation_bound(const Eigen::MatrixBase<Derived> &A) {
  using Scalar = typename Derived::Scalar;
  if (A.rows() < 2)
    throw DegenerateMatrix("correlation bound needs at least two rows");
  if (!is_standardized(A))
    throw DomainError("correlation bound requires a standardized matrix");
  for (Index j = 0; j < A.rows(); ++j)
    for (Index k = j + 1; k < A.rows(); ++k)
      if (A.row(j).dot(A.row(k)) < -tol::parallel)
        throw NegativeCorrelation(static_cast<std::size_t>(j),
                                  static_cast<std::size_t>(k));

  const auto coh = coherence(A);
  const auto cond = scaled_condition_number(A);
  const auto omega = row_difference_matrix(A);

  NonnegCorrelationBound<Scalar> out{};
  out.E = 4 * coh.delta * coh.delta * coh.delta;
  out.omega_frob_sq = omega.squaredNorm();
  try {
    if (omega.rows() < omega.cols())
      throw RankDeficient(0);
    out.omega_sigma_min = smallest_singular_value(omega);
    out.Q = out.omega_frob_sq / (out.omega_sigma_min * out.omega_sigma_min);
  } catch (const RankDeficient &) {
    out.omega_sigma_min = 0;
    out.Q = std::numeric_limits<Scalar>::infinity();
  }
  out.base = two_subspace_base(cond.R, coh.D).value;
  out.refined_base = std::isinf(out.Q) ? out.base : out.base - out.E / out.Q;
  return out;
}

} // namespace kaczmarz

#endif // KACZMARZ_ANALYSIS_HPP
