#include "sparsestab/dictionary.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "sparsestab/error.hpp"
#include "sparsestab/format.hpp"
#include "sparsestab/random.hpp"

namespace sparsestab {
namespace {

Eigen::MatrixXd rows_to_matrix(const std::vector<std::vector<double>>& rows) {
  if (rows.empty() || rows.front().empty())
    throw Error(Errc::NonRectangular, "matrix must have at least one row and one column");
  const auto m = rows.front().size();
  Eigen::MatrixXd out(static_cast<Index>(rows.size()), static_cast<Index>(m));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].size() != m) {
      throw Error(Errc::NonRectangular,
                  "row " + std::to_string(i) + " has " + std::to_string(rows[i].size()) +
                      " entries, expected " + std::to_string(m));
    }
    for (std::size_t j = 0; j < m; ++j)
      out(static_cast<Index>(i), static_cast<Index>(j)) = rows[i][j];
  }
  return out;
}

void require_finite(const Eigen::MatrixXd& a) {
  for (Index j = 0; j < a.cols(); ++j)
    for (Index i = 0; i < a.rows(); ++i)
      if (!std::isfinite(a(i, j)))
        throw Error(Errc::NonFinite, "entry (" + std::to_string(i) + ", " +
                                         std::to_string(j) + ") is not finite");
}

void require_unit_columns(const Eigen::MatrixXd& a) {
  Index worst = -1;
  double worst_dev = 0.0;
  for (Index j = 0; j < a.cols(); ++j) {
    const double dev = std::abs(a.col(j).norm() - 1.0);
    if (dev > worst_dev) {
      worst_dev = dev;
      worst = j;
    }
  }
  if (worst >= 0 && worst_dev > kUnitNormTolerance) {
    throw Error(Errc::ColumnNotUnitNorm,
                "column " + std::to_string(worst) + " has norm " +
                    format_real(a.col(worst).norm()) + " (worst column)");
  }
}

bool is_power_of_two(Index n) { return n > 0 && (n & (n - 1)) == 0; }

[[noreturn]] void parse_error(const std::filesystem::path& path, std::size_t line,
                              std::size_t column, const std::string& what) {
  throw Error(Errc::ParseFailure, path.string() + ":" + std::to_string(line) + ":" +
                                      std::to_string(column) + ": " + what);
}

struct Token {
  std::string_view text;
  std::size_t column;  // 1-based
};

std::vector<Token> tokenize(std::string_view line) {
  std::vector<Token> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t' || line[i] == '\r')) ++i;
    if (i >= line.size()) break;
    const std::size_t start = i;
    while (i < line.size() && line[i] != ' ' && line[i] != '\t' && line[i] != '\r') ++i;
    out.push_back({line.substr(start, i - start), start + 1});
  }
  return out;
}

bool is_skippable(std::string_view line) {
  for (char c : line) {
    if (c == '#') return true;
    if (c != ' ' && c != '\t' && c != '\r') return false;
  }
  return true;
}

}  // namespace

Dictionary Dictionary::from_entries(const std::vector<std::vector<double>>& rows,
                                    std::string label) {
  return from_matrix(rows_to_matrix(rows), std::move(label));
}

Dictionary Dictionary::from_matrix(Eigen::MatrixXd entries, std::string label) {
  if (entries.rows() < 1 || entries.cols() < 1)
    throw Error(Errc::NonRectangular, "matrix must have at least one row and one column");
  require_finite(entries);
  require_unit_columns(entries);
  return Dictionary(std::move(entries), std::move(label));
}

Dictionary Dictionary::normalize_columns(const std::vector<std::vector<double>>& rows,
                                         std::string label) {
  return normalize_columns(rows_to_matrix(rows), std::move(label));
}

Dictionary Dictionary::normalize_columns(Eigen::MatrixXd entries, std::string label) {
  if (entries.rows() < 1 || entries.cols() < 1)
    throw Error(Errc::NonRectangular, "matrix must have at least one row and one column");
  require_finite(entries);
  for (Index j = 0; j < entries.cols(); ++j) {
    const double norm = entries.col(j).norm();
    if (norm <= 1e-12)
      throw Error(Errc::ZeroColumn, "column " + std::to_string(j) + " has zero norm");
    entries.col(j) /= norm;
  }
  return from_matrix(std::move(entries), std::move(label));
}

Eigen::MatrixXd Dictionary::submatrix(const Support& support) const {
  Eigen::MatrixXd out(entries_.rows(), static_cast<Index>(support.size()));
  for (std::size_t c = 0; c < support.size(); ++c)
    out.col(static_cast<Index>(c)) = entries_.col(support[c]);
  return out;
}

Dictionary random_gaussian(Index n, Index m, std::uint64_t seed) {
  if (n < 1 || m < 1)
    throw Error(Errc::InvalidArgument, "random_gaussian requires n >= 1 and m >= 1");
  Rng rng(seed);
  Eigen::MatrixXd a(n, m);
  // Column-major fill order is part of the determinism contract.
  for (Index j = 0; j < m; ++j)
    for (Index i = 0; i < n; ++i) a(i, j) = standard_normal(rng);
  std::ostringstream label;
  label << "gaussian(n=" << n << ",m=" << m << ",seed=" << seed
        << ",rng=" << kGeneratorName << ")";
  return Dictionary::normalize_columns(std::move(a), label.str());
}

Dictionary dirac_hadamard(Index n) {
  if (!is_power_of_two(n))
    throw Error(Errc::NotPowerOfTwo, "dirac_hadamard requires a power of two, got " +
                                         std::to_string(n));
  // Sylvester construction: H(i, j) = (-1)^popcount(i & j).
  Eigen::MatrixXd a(n, 2 * n);
  a.leftCols(n).setIdentity();
  const double scale = 1.0 / std::sqrt(static_cast<double>(n));
  for (Index i = 0; i < n; ++i) {
    for (Index j = 0; j < n; ++j) {
      const bool odd = __builtin_popcountll(static_cast<unsigned long long>(i & j)) & 1;
      a(i, n + j) = odd ? -scale : scale;
    }
  }
  return Dictionary::from_matrix(std::move(a), "dirac_hadamard(n=" + std::to_string(n) + ")");
}

void write_matrix(const Eigen::MatrixXd& values, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(Errc::IoFailure, "cannot open " + path.string() + " for writing");
  out << values.rows() << ' ' << values.cols() << '\n';
  for (Index i = 0; i < values.rows(); ++i) {
    for (Index j = 0; j < values.cols(); ++j) {
      if (j) out << ' ';
      out << format_real(values(i, j));
    }
    out << '\n';
  }
  if (!out) throw Error(Errc::IoFailure, "failed writing " + path.string());
}

void save(const Dictionary& dict, const std::filesystem::path& path) {
  write_matrix(dict.matrix(), path);
}

Eigen::MatrixXd read_matrix(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::IoFailure, "cannot open " + path.string());

  std::string line;
  std::size_t lineno = 0;
  Index n = -1, m = -1;
  Index row = 0;
  Eigen::MatrixXd out;

  while (std::getline(in, line)) {
    ++lineno;
    if (is_skippable(line)) continue;
    const auto tokens = tokenize(line);
    if (n < 0) {
      if (tokens.size() != 2)
        parse_error(path, lineno, 1, "header must be two integers 'n m'");
      Index dims[2];
      for (int t = 0; t < 2; ++t) {
        const auto& tok = tokens[static_cast<std::size_t>(t)];
        long long v = 0;
        auto [ptr, ec] = std::from_chars(tok.text.data(), tok.text.data() + tok.text.size(), v);
        if (ec != std::errc{} || ptr != tok.text.data() + tok.text.size() || v < 1)
          parse_error(path, lineno, tok.column, "expected a positive integer, got '" +
                                                    std::string(tok.text) + "'");
        dims[t] = static_cast<Index>(v);
      }
      n = dims[0];
      m = dims[1];
      out.resize(n, m);
      continue;
    }
    if (row >= n) parse_error(path, lineno, 1, "more than " + std::to_string(n) + " data rows");
    if (static_cast<Index>(tokens.size()) != m) {
      const std::size_t col = tokens.size() > static_cast<std::size_t>(m)
                                  ? tokens[static_cast<std::size_t>(m)].column
                                  : line.size() + 1;
      parse_error(path, lineno, col,
                  "expected " + std::to_string(m) + " values, found " + std::to_string(tokens.size()));
    }
    for (Index j = 0; j < m; ++j) {
      const auto& tok = tokens[static_cast<std::size_t>(j)];
      double v = 0.0;
      auto [ptr, ec] = std::from_chars(tok.text.data(), tok.text.data() + tok.text.size(), v);
      if (ec != std::errc{} || ptr != tok.text.data() + tok.text.size())
        parse_error(path, lineno, tok.column, "not a real number: '" + std::string(tok.text) + "'");
      if (!std::isfinite(v)) parse_error(path, lineno, tok.column, "value is not finite");
      out(row, j) = v;
    }
    ++row;
  }
  if (in.bad()) throw Error(Errc::IoFailure, "read error on " + path.string());
  if (n < 0) parse_error(path, lineno + 1, 1, "empty file: missing 'n m' header");
  if (row != n)
    parse_error(path, lineno + 1, 1,
                "expected " + std::to_string(n) + " data rows, found " + std::to_string(row));
  return out;
}

Dictionary load(const std::filesystem::path& path) {
  return Dictionary::from_matrix(read_matrix(path), "file:" + path.string());
}

Eigen::VectorXd read_vector(const std::filesystem::path& path) {
  Eigen::MatrixXd v = read_matrix(path);
  if (v.cols() == 1) return v.col(0);
  if (v.rows() == 1) return v.row(0).transpose();
  throw Error(Errc::DimensionMismatch, path.string() + ": signal must be n×1 or 1×n, got " +
                                           std::to_string(v.rows()) + "×" + std::to_string(v.cols()));
}

}  // namespace sparsestab
