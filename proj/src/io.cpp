#include "kaczmarz/io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>
#include <utility>

namespace kaczmarz {

namespace {

std::string lower(std::string s) {
  for (auto &ch : s)
    ch = static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
  return s;
}

/// Next line that is neither a comment nor blank.
bool next_data_line(std::istream &in, std::string &line, std::size_t &line_no) {
  while (std::getline(in, line)) {
    ++line_no;
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '%')
      continue;
    return true;
  }
  return false;
}

double parse_value(const std::string &token, std::size_t line_no) {
  std::size_t used = 0;
  double v = 0;
  try {
    v = std::stod(token, &used);
  } catch (const std::exception &) {
    throw ParseError(line_no, "bad number '" + token + "'");
  }
  if (used != token.size() || !std::isfinite(v))
    throw ParseError(line_no, "bad number '" + token + "'");
  return v;
}

Index parse_index(const std::string &token, std::size_t line_no) {
  std::size_t used = 0;
  long long v = 0;
  try {
    v = std::stoll(token, &used);
  } catch (const std::exception &) {
    throw ParseError(line_no, "bad integer '" + token + "'");
  }
  if (used != token.size())
    throw ParseError(line_no, "bad integer '" + token + "'");
  return static_cast<Index>(v);
}

std::vector<std::string> tokens(const std::string &line) {
  std::istringstream ss(line);
  std::vector<std::string> out;
  for (std::string t; ss >> t;)
    out.push_back(t);
  return out;
}

std::ifstream open_in(const std::filesystem::path &path) {
  std::ifstream in(path);
  if (!in)
    throw IoError("cannot open '" + path.string() + "' for reading");
  return in;
}

std::ofstream open_out(const std::filesystem::path &path) {
  std::ofstream out(path, std::ios::binary);
  if (!out)
    throw IoError("cannot open '" + path.string() + "' for writing");
  return out;
}

double bound_or_nan(const TrialEnvelope &env, double touches, bool two) {
  if (!std::isfinite(env.conditioning.R) || env.conditioning.R < 1 ||
      !std::isfinite(env.initial_error_sq))
    return std::numeric_limits<double>::quiet_NaN();
  if (two && !std::isfinite(env.coherence.D))
    return std::numeric_limits<double>::quiet_NaN();
  return two ? env.bound_two_subspace_at(touches) : env.bound_rk_at(touches);
}

} // namespace

RowMatrixXd read_matrix_market(std::istream &in) {
  std::string line;
  std::size_t line_no = 0;
  if (!std::getline(in, line))
    throw ParseError(1, "empty file");
  ++line_no;
  const auto header = tokens(lower(line));
  if (header.size() != 5 || header[0] != "%%matrixmarket" || header[1] != "matrix")
    throw ParseError(line_no, "missing %%MatrixMarket matrix header");
  const bool array = header[2] == "array";
  if (!array && header[2] != "coordinate")
    throw ParseError(line_no, "unsupported format '" + header[2] + "'");
  if (header[3] != "real" && header[3] != "integer" && header[3] != "double")
    throw ParseError(line_no, "unsupported field '" + header[3] + "'");
  if (header[4] != "general")
    throw ParseError(line_no, "unsupported symmetry '" + header[4] + "'");

  if (!next_data_line(in, line, line_no))
    throw ParseError(line_no, "missing size line");
  const auto size = tokens(line);
  if (size.size() != (array ? 2u : 3u))
    throw ParseError(line_no, "malformed size line");
  const Index m = parse_index(size[0], line_no);
  const Index n = parse_index(size[1], line_no);
  if (m < 1 || n < 1)
    throw ParseError(line_no, "matrix dimensions must be positive");

  RowMatrixXd A = RowMatrixXd::Zero(m, n);
  if (array) {
    for (Index j = 0; j < n; ++j)
      for (Index i = 0; i < m; ++i) {
        if (!next_data_line(in, line, line_no))
          throw DimensionMismatch("array file ends after " +
                                  std::to_string(j * m + i) + " of " +
                                  std::to_string(m * n) + " entries");
        const auto t = tokens(line);
        if (t.size() != 1)
          throw ParseError(line_no, "expected one value per line");
        A(i, j) = parse_value(t[0], line_no);
      }
  } else {
    const Index nnz = parse_index(size[2], line_no);
    std::set<std::pair<Index, Index>> seen;
    for (Index e = 0; e < nnz; ++e) {
      if (!next_data_line(in, line, line_no))
        throw DimensionMismatch("coordinate file ends after " +
                                std::to_string(e) + " of " +
                                std::to_string(nnz) + " entries");
      const auto t = tokens(line);
      if (t.size() != 3)
        throw ParseError(line_no, "expected 'row col value'");
      const Index i = parse_index(t[0], line_no);
      const Index j = parse_index(t[1], line_no);
      if (i < 1 || i > m || j < 1 || j > n)
        throw ParseError(line_no, "index out of range");
      if (!seen.emplace(i, j).second)
        throw ParseError(line_no, "duplicate entry");
      A(i - 1, j - 1) = parse_value(t[2], line_no);
    }
  }
  if (next_data_line(in, line, line_no))
    throw DimensionMismatch("trailing data at line " + std::to_string(line_no));
  return A;
}

RowMatrixXd read_matrix_market(const std::filesystem::path &path) {
  auto in = open_in(path);
  return read_matrix_market(in);
}

VectorXd read_vector_market(const std::filesystem::path &path) {
  const RowMatrixXd A = read_matrix_market(path);
  if (A.cols() != 1)
    throw DimensionMismatch("'" + path.string() + "' is not a single column");
  return A.col(0);
}

std::string format_number(double value) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.16e", value);
  return buf;
}

void write_matrix_market(std::ostream &out, const RowMatrixXd &A) {
  out << "%%MatrixMarket matrix array real general\n"
      << A.rows() << ' ' << A.cols() << '\n';
  for (Index j = 0; j < A.cols(); ++j)
    for (Index i = 0; i < A.rows(); ++i)
      out << format_number(A(i, j)) << '\n';
}

void write_matrix_market(const std::filesystem::path &path,
                         const RowMatrixXd &A) {
  auto out = open_out(path);
  write_matrix_market(out, A);
  if (!out)
    throw IoError("write to '" + path.string() + "' failed");
}

TrialEnvelope envelope_from_trace(
    const IterateTrace &trace, Method method,
    std::optional<CoherenceProfile<double>> coherence,
    std::optional<ConditioningProfile<double>> conditioning) {
  constexpr double nan = std::numeric_limits<double>::quiet_NaN();
  TrialEnvelope env;
  env.coherence = coherence.value_or(CoherenceProfile<double>{nan, nan, nan});
  env.conditioning =
      conditioning.value_or(ConditioningProfile<double>{nan, nan, nan});
  env.initial_error_sq = trace.errors_sq.empty() ? nan : trace.errors_sq.front();
  env.trials = 1;
  env.methods.push_back({method, uses_pairs(method) ? 2u : 1u, trace.errors_sq,
                         trace.errors_sq, trace.errors_sq});
  return env;
}

void write_trace_csv(std::ostream &out, const TrialEnvelope &envelope) {
  out << trace_csv_header << '\n';
  for (const auto &m : envelope.methods) {
    const std::string name(to_string(m.method));
    for (std::size_t k = 0; k < m.mean.size(); ++k) {
      const std::size_t touches = k * m.touches_per_iteration;
      out << k << ',' << touches << ',' << name << ','
          << format_number(m.mean[k]) << ',' << format_number(m.min[k]) << ','
          << format_number(m.max[k]) << ','
          << format_number(bound_or_nan(envelope, static_cast<double>(touches), false))
          << ','
          << format_number(bound_or_nan(envelope, static_cast<double>(touches), true))
          << '\n';
    }
  }
}

void write_trace_csv(const std::filesystem::path &path,
                     const TrialEnvelope &envelope) {
  auto out = open_out(path);
  write_trace_csv(out, envelope);
  if (!out)
    throw IoError("write to '" + path.string() + "' failed");
}

std::vector<TraceRow> read_trace_csv(std::istream &in) {
  std::string line;
  std::size_t line_no = 1;
  if (!std::getline(in, line) || line != trace_csv_header)
    throw ParseError(line_no, "missing trace header");
  std::vector<TraceRow> rows;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty())
      continue;
    std::vector<std::string> f;
    std::stringstream ss(line);
    for (std::string cell; std::getline(ss, cell, ',');)
      f.push_back(cell);
    if (f.size() != 8)
      throw ParseError(line_no, "expected 8 columns");
    auto num = [&](const std::string &s) {
      try {
        return std::stod(s);
      } catch (const std::exception &) {
        throw ParseError(line_no, "bad number '" + s + "'");
      }
    };
    rows.push_back({static_cast<std::size_t>(parse_index(f[0], line_no)),
                    static_cast<std::size_t>(parse_index(f[1], line_no)), f[2],
                    num(f[3]), num(f[4]), num(f[5]), num(f[6]), num(f[7])});
  }
  return rows;
}

} // namespace kaczmarz
