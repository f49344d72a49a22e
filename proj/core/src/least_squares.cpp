#include <Eigen/QR>

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

#include "sparsestab/error.hpp"
#include "sparsestab/solvers.hpp"

namespace sparsestab {
namespace {

constexpr double kQrRankThreshold = 1e-10;

struct SupportFit {
  bool full_rank = false;
  Eigen::VectorXd coefficients;
  double residual = 0.0;
};

SupportFit fit_support(const Dictionary& dict, const Support& support, const Eigen::VectorXd& x) {
  SupportFit fit;
  if (support.empty()) {
    fit.full_rank = true;
    fit.residual = x.norm();
    return fit;
  }
  const Eigen::MatrixXd sub = dict.submatrix(support);
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(sub);
  qr.setThreshold(kQrRankThreshold);
  fit.full_rank = qr.rank() == sub.cols();
  fit.coefficients = qr.solve(x);
  fit.residual = (x - sub * fit.coefficients).norm();
  return fit;
}

Index effective_max_support(const Dictionary& dict, Index requested) {
  const Index cap = std::min(dict.rows(), dict.cols());
  if (requested < 0) throw Error(Errc::InvalidArgument, "max_support must be non-negative");
  return requested == 0 ? cap : std::min(requested, dict.cols());
}

void check_signal(const Dictionary& dict, const Eigen::VectorXd& x) {
  if (x.size() != dict.rows())
    throw Error(Errc::DimensionMismatch, "signal has length " + std::to_string(x.size()) +
                                             ", dictionary has " + std::to_string(dict.rows()) +
                                             " rows");
  if (!x.allFinite()) throw Error(Errc::NonFinite, "signal has non-finite entries");
}

SparseSolution exhaustive_search(const Dictionary& dict, const Eigen::VectorXd& x, double tol,
                                 const ExhaustiveOptions& options, std::string name) {
  check_signal(dict, x);
  const Index m = dict.cols();
  const Index max_size = effective_max_support(dict, options.max_support);
  std::uint64_t solved = 0;

  for (Index size = 0; size <= max_size; ++size) {
    const std::uint64_t count = binomial(static_cast<std::uint64_t>(m), static_cast<std::uint64_t>(size));
    if (count > options.budget || solved > options.budget - count)
      throw Error(Errc::BudgetExceeded,
                  name + ": support size " + std::to_string(size) + " needs " +
                      std::to_string(solved + count) + " subproblems, budget is " +
                      std::to_string(options.budget));
    solved += count;

    bool found = false;
    Support best_support;
    Eigen::VectorXd best_coeffs;
    double best_residual = std::numeric_limits<double>::infinity();
    for_each_combination(m, size, [&](const Support& support) {
      const SupportFit fit = fit_support(dict, support, x);
      // A dependent support reaches no residual that a smaller subset of it
      // does not already reach, and that subset was enumerated earlier.
      if (!fit.full_rank) return true;
      if (fit.residual <= tol && fit.residual < best_residual) {
        found = true;
        best_residual = fit.residual;
        best_support = support;
        best_coeffs = fit.coefficients;
      }
      return true;
    });

    if (found) {
      Eigen::VectorXd s = Eigen::VectorXd::Zero(m);
      for (std::size_t i = 0; i < best_support.size(); ++i)
        s(best_support[i]) = best_coeffs(static_cast<Index>(i));
      SparseSolution out;
      out.coefficients = std::move(s);
      out.support = std::move(best_support);
      out.residual_norm = (x - dict.matrix() * out.coefficients).norm();
      out.solver_name = std::move(name);
      out.iterations = static_cast<int>(std::min<std::uint64_t>(solved, std::numeric_limits<int>::max()));
      out.converged = true;
      return out;
    }
  }
  throw Error(Errc::NoSolutionWithinBudget,
              name + ": no support of size <= " + std::to_string(max_size) +
                  " reaches residual " + std::to_string(tol));
}

}  // namespace

Eigen::VectorXd least_squares_on_support(const Dictionary& dict, const Support& support,
                                         const Eigen::VectorXd& x) {
  check_signal(dict, x);
  for (Index i : support)
    if (i < 0 || i >= dict.cols())
      throw Error(Errc::InvalidArgument, "support index " + std::to_string(i) + " out of range");
  if (static_cast<Index>(support.size()) > dict.rows())
    throw Error(Errc::SupportTooLarge, "support of size " + std::to_string(support.size()) +
                                           " exceeds n=" + std::to_string(dict.rows()));
  const SupportFit fit = fit_support(dict, support, x);
  if (!fit.full_rank)
    throw Error(Errc::SupportTooLarge, "columns on the support are linearly dependent");
  return fit.coefficients.size() ? fit.coefficients : Eigen::VectorXd(0);
}

SparseSolution exhaustive_p0(const Dictionary& dict, const Eigen::VectorXd& x,
                             const ExhaustiveOptions& options) {
  const double tol = options.zero_tol >= 0.0 ? options.zero_tol : 1e-10 * x.norm();
  return exhaustive_search(dict, x, tol, options, "exhaustive_p0");
}

SparseSolution exhaustive_p0_delta(const Dictionary& dict, const Eigen::VectorXd& x, double delta,
                                   const ExhaustiveOptions& options) {
  if (!(delta >= 0.0) || !std::isfinite(delta))
    throw Error(Errc::InvalidArgument, "delta must be finite and non-negative");
  // δ = 0 means exact representation, which needs the round-off allowance.
  const double zero_tol = options.zero_tol >= 0.0 ? options.zero_tol : 1e-10 * x.norm();
  return exhaustive_search(dict, x, std::max(delta, zero_tol), options, "exhaustive_p0_delta");
}

std::vector<Support> enumerate_representations(const Dictionary& dict, const Eigen::VectorXd& x,
                                               Index max_size, double zero_tol,
                                               std::uint64_t budget) {
  check_signal(dict, x);
  const Index m = dict.cols();
  max_size = std::min(max_size, m);
  if (subset_count(static_cast<std::uint64_t>(m), 0, static_cast<std::uint64_t>(max_size)) > budget)
    throw Error(Errc::BudgetExceeded, "representation search exceeds budget of " +
                                          std::to_string(budget) + " supports");

  std::set<Support> seen;
  std::vector<Support> out;
  for (Index size = 0; size <= max_size; ++size) {
    for_each_combination(m, size, [&](const Support& support) {
      const SupportFit fit = fit_support(dict, support, x);
      if (fit.residual > zero_tol) return true;
      Support effective;
      if (!fit.full_rank) {
        // A whole affine family of representations lives on this support.
        effective = support;
      } else {
        const double scale = fit.coefficients.size() ? fit.coefficients.cwiseAbs().maxCoeff() : 0.0;
        for (std::size_t i = 0; i < support.size(); ++i)
          if (std::abs(fit.coefficients(static_cast<Index>(i))) > 1e-12 * std::max(1.0, scale))
            effective.push_back(support[i]);
      }
      if (seen.insert(effective).second) out.push_back(std::move(effective));
      return true;
    });
  }
  return out;
}

}  // namespace sparsestab
