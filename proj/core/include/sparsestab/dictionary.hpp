#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "sparsestab/combinations.hpp"

namespace sparsestab {

/// Maximum tolerated deviation |‖a_i‖₂ − 1| for a dictionary atom.
inline constexpr double kUnitNormTolerance = 1e-12;

/// An n×m real matrix whose columns (atoms) all have unit Euclidean norm.
///
/// Instances are immutable once built. The only constructors that rescale
/// their input are normalize_columns() and random_gaussian(); everything else
/// validates strictly and reports the worst offending column.
class Dictionary {
 public:
  static Dictionary from_entries(const std::vector<std::vector<double>>& rows,
                                 std::string label = "entries");
  static Dictionary from_matrix(Eigen::MatrixXd entries,
                                std::string label = "matrix");

  static Dictionary normalize_columns(const std::vector<std::vector<double>>& rows,
                                     std::string label = "normalized");
  static Dictionary normalize_columns(Eigen::MatrixXd entries,
                                      std::string label = "normalized");

  Index rows() const noexcept { return entries_.rows(); }
  Index cols() const noexcept { return entries_.cols(); }

  const Eigen::MatrixXd& matrix() const noexcept { return entries_; }
  auto atom(Index i) const { return entries_.col(i); }

  /// Columns of the dictionary restricted to `support`, in support order.
  Eigen::MatrixXd submatrix(const Support& support) const;

  const std::string& label() const noexcept { return label_; }

  friend bool operator==(const Dictionary& a, const Dictionary& b) {
    return a.entries_ == b.entries_;
  }

 private:
  Dictionary(Eigen::MatrixXd entries, std::string label)
      : entries_(std::move(entries)), label_(std::move(label)) {}

  Eigen::MatrixXd entries_;
  std::string label_;
};

/// i.i.d. standard normal entries from Rng seeded with `seed`, then
/// column-normalized. Bit-identical for identical (n, m, seed).
Dictionary random_gaussian(Index n, Index m, std::uint64_t seed);

/// [I | H/√n] with H the Sylvester ±1 Hadamard matrix; n must be a power of 2.
/// Coherence is exactly 1/√n.
Dictionary dirac_hadamard(Index n);

// Plain-text matrix format:
//   line 1: "n m"
//   then n lines of m reals; '#'-prefixed lines are comments.
// Reals are written with 17 significant digits.
void save(const Dictionary& dict, const std::filesystem::path& path);
Dictionary load(const std::filesystem::path& path);

/// Reads the matrix format above without any unit-norm validation
/// (signals are stored as n×1 or 1×n matrices).
Eigen::MatrixXd read_matrix(const std::filesystem::path& path);
void write_matrix(const Eigen::MatrixXd& values,
                  const std::filesystem::path& path);

/// Reads a signal file and returns it as a column vector.
Eigen::VectorXd read_vector(const std::filesystem::path& path);

}  // namespace sparsestab
