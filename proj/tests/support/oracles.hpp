#pragma once

// Test-side reference computations. Nothing here calls into the library's
// certificate or solver code: subsets are enumerated recursively, ranks come
// from full-pivot LU and singular values from Gram eigenvalues.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <vector>

namespace oracle {

using Subset = std::vector<Eigen::Index>;

inline void for_each_subset(Eigen::Index m, Eigen::Index k,
                            const std::function<void(const Subset&)>& fn) {
  Subset cur;
  std::function<void(Eigen::Index)> rec = [&](Eigen::Index start) {
    if (static_cast<Eigen::Index>(cur.size()) == k) {
      fn(cur);
      return;
    }
    for (Eigen::Index i = start; i < m; ++i) {
      cur.push_back(i);
      rec(i + 1);
      cur.pop_back();
    }
  };
  rec(0);
}

inline Eigen::MatrixXd columns(const Eigen::MatrixXd& a, const Subset& s) {
  Eigen::MatrixXd b(a.rows(), static_cast<Eigen::Index>(s.size()));
  for (std::size_t j = 0; j < s.size(); ++j) b.col(static_cast<Eigen::Index>(j)) = a.col(s[j]);
  return b;
}

inline double coherence(const Eigen::MatrixXd& a) {
  const Eigen::MatrixXd g = a.transpose() * a;
  double best = 0.0;
  for (Eigen::Index i = 0; i < g.rows(); ++i)
    for (Eigen::Index j = 0; j < g.cols(); ++j)
      if (i != j) best = std::max(best, std::abs(g(i, j)));
  return best;
}

inline bool dependent(const Eigen::MatrixXd& b, double threshold = 1e-9) {
  if (b.cols() > b.rows()) return true;
  Eigen::FullPivLU<Eigen::MatrixXd> lu(b);
  lu.setThreshold(threshold);
  return lu.rank() < b.cols();
}

/// Smallest dependent column count, scanning every subset of every size
/// (no early exit inside a size). nullopt: all columns independent.
inline std::optional<Eigen::Index> spark(const Eigen::MatrixXd& a, double threshold = 1e-9) {
  std::optional<Eigen::Index> found;
  for (Eigen::Index k = 1; k <= std::min(a.cols(), a.rows() + 1); ++k) {
    bool any = false;
    for_each_subset(a.cols(), k, [&](const Subset& s) { any = any || dependent(columns(a, s), threshold); });
    if (any && !found) found = k;
  }
  return found;
}

/// Smallest singular value of B from the smallest eigenvalue of BᵀB.
inline double sigma_min_gram(const Eigen::MatrixXd& b) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(b.transpose() * b, Eigen::EigenvaluesOnly);
  return std::sqrt(std::max(0.0, es.eigenvalues()(0)));
}

/// σ_min(j) for j = 1..q over all j-subsets.
inline std::vector<double> sigma_profile(const Eigen::MatrixXd& a, Eigen::Index q) {
  std::vector<double> out;
  for (Eigen::Index j = 1; j <= q; ++j) {
    double best = std::numeric_limits<double>::infinity();
    for_each_subset(a.cols(), j, [&](const Subset& s) { best = std::min(best, sigma_min_gram(columns(a, s))); });
    out.push_back(best);
  }
  return out;
}

/// All supports of size ≤ max_size on which x has an exact least-squares fit
/// with every coefficient nonzero.
inline std::vector<Subset> exact_supports(const Eigen::MatrixXd& a, const Eigen::VectorXd& x,
                                          Eigen::Index max_size, double tol) {
  std::vector<Subset> out;
  if (x.norm() <= tol) out.push_back({});
  for (Eigen::Index k = 1; k <= max_size; ++k) {
    for_each_subset(a.cols(), k, [&](const Subset& s) {
      const Eigen::MatrixXd b = columns(a, s);
      if (dependent(b)) return;
      const Eigen::VectorXd c = b.fullPivHouseholderQr().solve(x);
      if ((x - b * c).norm() > tol) return;
      for (Eigen::Index i = 0; i < c.size(); ++i)
        if (std::abs(c(i)) <= 1e-9) return;
      out.push_back(s);
    });
  }
  return out;
}

/// Smallest feasible support size for ‖x − As‖₂ ≤ delta.
inline Eigen::Index min_feasible_size(const Eigen::MatrixXd& a, const Eigen::VectorXd& x, double delta) {
  if (x.norm() <= delta) return 0;
  for (Eigen::Index k = 1; k <= a.cols(); ++k) {
    bool ok = false;
    for_each_subset(a.cols(), k, [&](const Subset& s) {
      if (ok) return;
      const Eigen::MatrixXd b = columns(a, s);
      const Eigen::VectorXd c = b.completeOrthogonalDecomposition().solve(x);
      ok = (x - b * c).norm() <= delta;
    });
    if (ok) return k;
  }
  return -1;
}

/// Minimum ℓ1 norm over basic feasible solutions of As = x (A full row rank).
inline double l1_min_by_vertices(const Eigen::MatrixXd& a, const Eigen::VectorXd& x) {
  double best = std::numeric_limits<double>::infinity();
  for_each_subset(a.cols(), a.rows(), [&](const Subset& s) {
    const Eigen::MatrixXd b = columns(a, s);
    Eigen::FullPivLU<Eigen::MatrixXd> lu(b);
    if (!lu.isInvertible()) return;
    best = std::min(best, lu.solve(x).lpNorm<1>());
  });
  return best;
}

/// Optimality conditions of min ‖s‖₁ s.t. ‖x − As‖₂ ≤ δ at an active
/// constraint: with r = x − As and λ = ‖Aᵀr‖∞, Aᵀr = λ·sign(s) on the support
/// and |Aᵀr| ≤ λ elsewhere. Returns the largest relative violation.
inline double l1_delta_kkt_violation(const Eigen::MatrixXd& a, const Eigen::VectorXd& x,
                                     const Eigen::VectorXd& s) {
  const Eigen::VectorXd c = a.transpose() * (x - a * s);
  const double lambda = c.cwiseAbs().maxCoeff();
  if (lambda == 0.0) return 0.0;
  double worst = 0.0;
  for (Eigen::Index i = 0; i < s.size(); ++i) {
    if (s(i) != 0.0) {
      const double sign = s(i) > 0 ? 1.0 : -1.0;
      worst = std::max(worst, std::abs(c(i) - lambda * sign) / lambda);
    } else {
      worst = std::max(worst, std::abs(c(i)) / lambda - 1.0);
    }
  }
  return worst;
}

/// i.i.d. N(0,1) via Box-Muller on a 64-bit LCG, then unit-norm columns. Used
/// where a test needs matrices that do not come from the library generator.
inline Eigen::MatrixXd gaussian_unit_columns(Eigen::Index n, Eigen::Index m, std::uint64_t seed) {
  std::uint64_t state = seed * 6364136223846793005ULL + 1442695040888963407ULL;
  auto next_uniform = [&] {
    state = state * 6364136223846793005ULL + 1442695040888963407ULL;
    return (static_cast<double>(state >> 11) + 0.5) * 0x1.0p-53;
  };
  Eigen::MatrixXd a(n, m);
  for (Eigen::Index j = 0; j < m; ++j)
    for (Eigen::Index i = 0; i < n; ++i)
      a(i, j) = std::sqrt(-2.0 * std::log(next_uniform())) * std::cos(6.283185307179586 * next_uniform());
  a.colwise().normalize();
  return a;
}

}  // namespace oracle
