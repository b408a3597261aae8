#ifndef KACZMARZ_IO_HPP
#define KACZMARZ_IO_HPP

#include "kaczmarz/experiments.hpp"
#include "kaczmarz/linalg.hpp"

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace kaczmarz {

/// Reads a real (or integer) general MatrixMarket file in array or coordinate
/// format into a dense matrix. Coordinate entries not listed are zero; a
/// repeated coordinate is a ParseError.
RowMatrixXd read_matrix_market(std::istream &in);
RowMatrixXd read_matrix_market(const std::filesystem::path &path);

/// Array format, 17 significant digits.
void write_matrix_market(std::ostream &out, const RowMatrixXd &A);
void write_matrix_market(const std::filesystem::path &path, const RowMatrixXd &A);

/// A single-column MatrixMarket file as a vector.
VectorXd read_vector_market(const std::filesystem::path &path);

/// %.16e: round-trips every finite double.
std::string format_number(double value);

inline constexpr const char *trace_csv_header =
    "k,row_touches,method,mean_err_sq,min_err_sq,max_err_sq,bound_rk,bound_2srk";

/// One CSV row per iteration per method, methods in envelope order.
void write_trace_csv(std::ostream &out, const TrialEnvelope &envelope);
void write_trace_csv(const std::filesystem::path &path,
                     const TrialEnvelope &envelope);

/// Single-run envelope (mean = min = max). Bound columns need the profiles;
/// they are NaN when absent. A trace without errors yields no rows.
TrialEnvelope envelope_from_trace(
    const IterateTrace &trace, Method method,
    std::optional<CoherenceProfile<double>> coherence = std::nullopt,
    std::optional<ConditioningProfile<double>> conditioning = std::nullopt);

struct TraceRow {
  std::size_t k;
  std::size_t row_touches;
  std::string method;
  double mean_err_sq;
  double min_err_sq;
  double max_err_sq;
  double bound_rk;
  double bound_2srk;
};

std::vector<TraceRow> read_trace_csv(std::istream &in);

} // namespace kaczmarz

#endif // KACZMARZ_IO_HPP
