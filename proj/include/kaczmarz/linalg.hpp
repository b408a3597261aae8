#ifndef KACZMARZ_LINALG_HPP
#define KACZMARZ_LINALG_HPP

#include "kaczmarz/errors.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <optional>

namespace kaczmarz {

/// Dense matrices are stored row-major: every solver touches one or two rows
/// per iteration, and `A.row(i)` must be a contiguous O(n) view.
template <typename Scalar>
using RowMatrix =
    Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
template <typename Scalar> using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

using RowMatrixXd = RowMatrix<double>;
using VectorXd = Vector<double>;
using Index = Eigen::Index;

namespace tol {
inline constexpr double zero_row = 1e-14;
inline constexpr double unit_row = 1e-12;
inline constexpr double rank = 1e-12;
inline constexpr double parallel = 1e-12;
inline constexpr double consistency = 1e-10;
} // namespace tol

/// A consistent overdetermined system A x = b, optionally carrying the exact
/// solution used as ground truth for error traces.
template <typename Scalar> struct LinearSystem {
  RowMatrix<Scalar> A;
  Vector<Scalar> b;
  std::optional<Vector<Scalar>> solution;

  Index rows() const { return A.rows(); }
  Index cols() const { return A.cols(); }
};

using LinearSystemXd = LinearSystem<double>;

template <typename Scalar> struct Standardized {
  RowMatrix<Scalar> A;
  Vector<Scalar> row_norms;
};

template <typename Derived>
bool is_standardized(const Eigen::MatrixBase<Derived> &A,
                     double tolerance = tol::unit_row) {
  for (Index i = 0; i < A.rows(); ++i)
    if (std::abs(A.row(i).norm() - 1) > tolerance)
      return false;
  return true;
}

/// Scales every row of A to unit Euclidean norm. The returned norms rescale
/// the right-hand side (b_i / |a_i|) so the solution set is unchanged.
template <typename Derived>
Standardized<typename Derived::Scalar>
standardize(const Eigen::MatrixBase<Derived> &A) {
  using Scalar = typename Derived::Scalar;
  Standardized<Scalar> out{A, A.rowwise().norm()};
  for (Index i = 0; i < A.rows(); ++i) {
    if (!(out.row_norms(i) > tol::zero_row))
      throw ZeroRow(static_cast<std::size_t>(i));
    out.A.row(i) /= out.row_norms(i);
  }
  return out;
}

/// Standardized copy of the system; rows and b are scaled together.
template <typename Scalar>
LinearSystem<Scalar> standardize(const LinearSystem<Scalar> &system) {
  auto s = standardize(system.A);
  return {std::move(s.A), system.b.cwiseQuotient(s.row_norms),
          system.solution};
}

/// Orthogonal projection of x onto the hyperplane {z : <a, z> = beta}, with a
/// a unit vector.
template <typename DerivedX, typename DerivedA>
Vector<typename DerivedX::Scalar>
project_hyperplane(const Eigen::MatrixBase<DerivedX> &x,
                   const Eigen::MatrixBase<DerivedA> &a,
                   typename DerivedX::Scalar beta) {
  const auto norm = a.norm();
  if (std::abs(norm - 1) > tol::unit_row)
    throw NotUnitRow(static_cast<double>(norm));
  const auto scale = beta - a.dot(x);
  return x + scale * a;
}

/// Smallest singular value of a tall matrix (m >= n), i.e. 1 / |A^{-1}|.
/// Computed with a QR-preconditioned two-sided Jacobi SVD, which is accurate
/// to high relative precision even for the smallest singular value.
template <typename Derived>
typename Derived::Scalar
smallest_singular_value(const Eigen::MatrixBase<Derived> &A) {
  using Scalar = typename Derived::Scalar;
  if (A.rows() < A.cols())
    throw DimensionMismatch("smallest_singular_value requires m >= n");
  Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> dense = A;
  Eigen::JacobiSVD<decltype(dense)> svd(dense);
  const Scalar sigma = svd.singularValues()(svd.singularValues().size() - 1);
  if (sigma <= tol::rank * dense.norm())
    throw RankDeficient(static_cast<double>(sigma));
  return sigma;
}

/// Throws unless the system is consistent (to tol::consistency) and full
/// column rank.
template <typename Scalar> void validate(const LinearSystem<Scalar> &system) {
  if (system.b.size() != system.rows())
    throw DimensionMismatch("right-hand side length does not match rows");
  if (system.rows() < 1 || system.cols() < 1)
    throw DimensionMismatch("empty system");
  if (!system.A.allFinite() || !system.b.allFinite())
    throw DomainError("system has non-finite entries");
  if (system.solution) {
    if (system.solution->size() != system.cols())
      throw DimensionMismatch("solution length does not match columns");
    const Scalar residual = (system.A * *system.solution - system.b).norm();
    if (residual > tol::consistency * std::max<Scalar>(1, system.b.norm()))
      throw DomainError("system is inconsistent with the attached solution");
  }
  smallest_singular_value(system.A);
}

} // namespace kaczmarz

#endif // KACZMARZ_LINALG_HPP
