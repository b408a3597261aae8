#ifndef KACZMARZ_PROJECTIONS_HPP
#define KACZMARZ_PROJECTIONS_HPP

#include "kaczmarz/linalg.hpp"

#include <cmath>

// Single-iteration kernels of the row-action solvers. Rows are passed as unit
// column vectors (A.row(i).transpose()).

namespace kaczmarz {

namespace detail {
template <typename Derived> void require_unit(const Eigen::MatrixBase<Derived> &a) {
  const auto norm = a.norm();
  if (std::abs(norm - 1) > tol::unit_row)
    throw NotUnitRow(static_cast<double>(norm));
}
} // namespace detail

/// One Kaczmarz projection x + (b - <a, x>) a.
template <typename DerivedX, typename DerivedA>
Vector<typename DerivedX::Scalar> rk_step(const Eigen::MatrixBase<DerivedX> &x,
                                          const Eigen::MatrixBase<DerivedA> &a,
                                          typename DerivedX::Scalar b) {
  return project_hyperplane(x, a, b);
}

/// Intermediate quantities of one two-subspace iteration.
template <typename Scalar> struct TwoSubspaceStep {
  Index r = -1;
  Index s = -1;
  Scalar mu{};        ///< <a_r, a_s>
  Vector<Scalar> v;   ///< unit vector orthogonal to a_s in the span of a_r, a_s
  Scalar beta{};      ///< measurement matching v
  Vector<Scalar> y;   ///< projection of x onto the a_s hyperplane
  Vector<Scalar> x_next;
};

/// Projects x onto {z : <a_r, z> = b_r, <a_s, z> = b_s}: first onto the a_s
/// hyperplane, then along v = (a_r - mu a_s) / sqrt(1 - mu^2).
template <typename DerivedX, typename DerivedR, typename DerivedS>
TwoSubspaceStep<typename DerivedX::Scalar>
two_subspace_step(const Eigen::MatrixBase<DerivedX> &x,
                  const Eigen::MatrixBase<DerivedR> &a_r,
                  typename DerivedX::Scalar b_r,
                  const Eigen::MatrixBase<DerivedS> &a_s,
                  typename DerivedX::Scalar b_s) {
  using Scalar = typename DerivedX::Scalar;
  detail::require_unit(a_r);
  detail::require_unit(a_s);
  TwoSubspaceStep<Scalar> step;
  step.mu = a_r.dot(a_s);
  if (std::abs(step.mu) >= 1 - tol::parallel)
    throw NearParallelRows(static_cast<double>(step.mu));
  const Scalar gamma = std::sqrt(1 - step.mu * step.mu);
  step.y = x + (b_s - x.dot(a_s)) * a_s;
  step.v = (a_r - step.mu * a_s) / gamma;
  step.beta = (b_r - b_s * step.mu) / gamma;
  step.x_next = step.y + (step.beta - step.y.dot(step.v)) * step.v;
  return step;
}

/// Row-indexed form of two_subspace_step that records the pair.
template <typename Scalar>
TwoSubspaceStep<Scalar> two_subspace_step(const RowMatrix<Scalar> &A,
                                          const Vector<Scalar> &b,
                                          const Vector<Scalar> &x, Index r,
                                          Index s) {
  auto step = two_subspace_step(x, A.row(r).transpose(), b(r),
                                A.row(s).transpose(), b(s));
  step.r = r;
  step.s = s;
  return step;
}

/// Scaling of the first projection in the two-step procedure
/// y = x + eps (b_r - <x, a_r>) a_r,  x' = P_s(y)
/// that minimizes the distance from x' to every solution. It depends on the
/// unknown solution only through <a_r, x*> = b_r and <a_s, x*> = b_s.
template <typename DerivedX, typename DerivedR, typename DerivedS>
typename DerivedX::Scalar epsilon_opt(const Eigen::MatrixBase<DerivedX> &x,
                                      const Eigen::MatrixBase<DerivedR> &a_r,
                                      typename DerivedX::Scalar b_r,
                                      const Eigen::MatrixBase<DerivedS> &a_s,
                                      typename DerivedX::Scalar b_s) {
  using Scalar = typename DerivedX::Scalar;
  detail::require_unit(a_r);
  detail::require_unit(a_s);
  const Scalar mu = a_r.dot(a_s);
  if (std::abs(mu) >= 1 - tol::parallel)
    throw NearParallelRows(static_cast<double>(mu));
  const Scalar rho_r = b_r - a_r.dot(x);
  const Scalar rho_s = b_s - a_s.dot(x);
  if (std::abs(rho_r) <= 1e-14 * std::max<Scalar>(1, std::abs(b_r)))
    throw ZeroDenominator();
  return (rho_r - mu * rho_s) / (rho_r * (1 - mu * mu));
}

/// The literal two-step procedure for a given eps.
template <typename DerivedX, typename DerivedR, typename DerivedS>
Vector<typename DerivedX::Scalar>
two_step_with_eps(const Eigen::MatrixBase<DerivedX> &x,
                  const Eigen::MatrixBase<DerivedR> &a_r,
                  typename DerivedX::Scalar b_r,
                  const Eigen::MatrixBase<DerivedS> &a_s,
                  typename DerivedX::Scalar b_s,
                  typename DerivedX::Scalar eps) {
  detail::require_unit(a_r);
  detail::require_unit(a_s);
  const Vector<typename DerivedX::Scalar> y =
      x + eps * (b_r - x.dot(a_r)) * a_r;
  return y + (b_s - y.dot(a_s)) * a_s;
}

/// Projection onto the intersection of two hyperplanes by solving the 2x2
/// Gram system G lambda = residuals directly; x' = x + lambda_r a_r +
/// lambda_s a_s. Serves as the reference for two_subspace_step.
template <typename DerivedX, typename DerivedR, typename DerivedS>
Vector<typename DerivedX::Scalar>
pair_projection_oracle(const Eigen::MatrixBase<DerivedX> &x,
                       const Eigen::MatrixBase<DerivedR> &a_r,
                       typename DerivedX::Scalar b_r,
                       const Eigen::MatrixBase<DerivedS> &a_s,
                       typename DerivedX::Scalar b_s) {
  using Scalar = typename DerivedX::Scalar;
  const Scalar g_rr = a_r.squaredNorm();
  const Scalar g_ss = a_s.squaredNorm();
  const Scalar mu = a_r.dot(a_s);
  const Scalar det = g_rr * g_ss - mu * mu;
  if (std::abs(det) <= 1e-14)
    throw SingularGram(static_cast<double>(mu));
  const Scalar rho_r = b_r - a_r.dot(x);
  const Scalar rho_s = b_s - a_s.dot(x);
  const Scalar lambda_r = (g_ss * rho_r - mu * rho_s) / det;
  const Scalar lambda_s = (g_rr * rho_s - mu * rho_r) / det;
  return x + lambda_r * a_r + lambda_s * a_s;
}

} // namespace kaczmarz

#endif // KACZMARZ_PROJECTIONS_HPP
