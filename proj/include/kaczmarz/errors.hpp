#ifndef KACZMARZ_ERRORS_HPP
#define KACZMARZ_ERRORS_HPP

#include <cstddef>
#include <stdexcept>
#include <string>

namespace kaczmarz {

/// Base class of every error thrown by the library.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

class ZeroRow : public Error {
public:
  explicit ZeroRow(std::size_t row)
      : Error("row " + std::to_string(row) + " has zero norm"), row(row) {}
  std::size_t row;
};

class NotUnitRow : public Error {
public:
  explicit NotUnitRow(double norm)
      : Error("row is not unit length (norm " + std::to_string(norm) + ")"),
        norm(norm) {}
  double norm;
};

class RankDeficient : public Error {
public:
  explicit RankDeficient(double sigma_min)
      : Error("matrix is rank deficient (sigma_min " +
              std::to_string(sigma_min) + ")"),
        sigma_min(sigma_min) {}
  double sigma_min;
};

class DimensionMismatch : public Error {
public:
  using Error::Error;
};

class DomainError : public Error {
public:
  using Error::Error;
};

class DegenerateBase : public Error {
public:
  explicit DegenerateBase(double base)
      : Error("contraction base " + std::to_string(base) +
              " is outside (0, 1)"),
        base(base) {}
  double base;
};

/// Two rows whose absolute inner product is numerically 1.
class DependentRows : public Error {
public:
  DependentRows(std::size_t j, std::size_t k)
      : Error("rows " + std::to_string(j) + " and " + std::to_string(k) +
              " are linearly dependent"),
        j(j), k(k) {}
  std::size_t j, k;
};

class NearParallelRows : public Error {
public:
  explicit NearParallelRows(double mu)
      : Error("pair correlation |mu| = " + std::to_string(mu) +
              " is too close to 1"),
        mu(mu) {}
  double mu;
};

class ZeroDenominator : public Error {
public:
  ZeroDenominator() : Error("estimate already lies on the first hyperplane") {}
};

class SingularGram : public Error {
public:
  explicit SingularGram(double mu)
      : Error("2x2 Gram matrix is singular (mu " + std::to_string(mu) + ")"),
        mu(mu) {}
  double mu;
};

class DegenerateMatrix : public Error {
public:
  using Error::Error;
};

class NegativeCorrelation : public Error {
public:
  NegativeCorrelation(std::size_t j, std::size_t k)
      : Error("rows " + std::to_string(j) + " and " + std::to_string(k) +
              " have negative correlation"),
        j(j), k(k) {}
  std::size_t j, k;
};

class ZeroDifference : public Error {
public:
  ZeroDifference(std::size_t i, std::size_t j)
      : Error("rows " + std::to_string(i) + " and " + std::to_string(j) +
              " are identical"),
        i(i), j(j) {}
  std::size_t i, j;
};

class ParseError : public Error {
public:
  ParseError(std::size_t line, const std::string &what)
      : Error("line " + std::to_string(line) + ": " + what), line(line) {}
  std::size_t line;
};

class IoError : public Error {
public:
  using Error::Error;
};

} // namespace kaczmarz

#endif // KACZMARZ_ERRORS_HPP
