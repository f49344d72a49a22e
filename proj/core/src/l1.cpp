// ℓ1 minimization: an exact dense simplex for the equality-constrained problem,
// the Lasso homotopy for the δ-relaxed problem, and a basis-enumeration oracle.

#include <Eigen/Cholesky>
#include <Eigen/QR>

#include <algorithm>
#include <cmath>
#include <limits>

#include "sparsestab/error.hpp"
#include "sparsestab/solvers.hpp"

namespace sparsestab {
namespace {

void check_signal(const Dictionary& dict, const Eigen::VectorXd& x, std::string_view who) {
  if (x.size() != dict.rows())
    throw Error(Errc::DimensionMismatch, std::string(who) + ": signal length " +
                                             std::to_string(x.size()) + " differs from n=" +
                                             std::to_string(dict.rows()));
  if (!x.allFinite()) throw Error(Errc::NonFinite, std::string(who) + ": non-finite signal");
}

// Dense tableau simplex for  min cᵀy  s.t.  My = b, y ≥ 0  (b ≥ 0 after row
// sign flips). Bland's rule throughout, so no cycling.
class Simplex {
 public:
  Simplex(const Eigen::MatrixXd& m, const Eigen::VectorXd& b, int max_iterations)
      : rows_(m.rows()), vars_(m.cols()), max_iterations_(max_iterations) {
    // Columns: structural [0, vars), artificial [vars, vars + rows), rhs.
    t_ = Eigen::MatrixXd::Zero(rows_ + 1, vars_ + rows_ + 1);
    for (Index i = 0; i < rows_; ++i) {
      const double sign = b(i) < 0 ? -1.0 : 1.0;
      t_.row(i).head(vars_) = sign * m.row(i);
      t_(i, vars_ + i) = 1.0;
      t_(i, rhs()) = sign * b(i);
      basis_.push_back(vars_ + i);
    }
  }

  // Phase 1. Returns the minimal total artificial mass (0 when feasible).
  double phase_one() {
    objective_.assign(static_cast<std::size_t>(vars_ + rows_), 0.0);
    for (Index i = 0; i < rows_; ++i) objective_[static_cast<std::size_t>(vars_ + i)] = 1.0;
    price();
    run(/*allow_artificial=*/true);
    return -t_(rows_, rhs());
  }

  // Removes artificials still basic at level zero; drops redundant rows.
  void expel_artificials() {
    for (Index i = 0; i < rows_; ++i) {
      if (basis_[static_cast<std::size_t>(i)] < vars_) continue;
      Index col = -1;
      for (Index j = 0; j < vars_; ++j)
        if (std::abs(t_(i, j)) > 1e-9) {
          col = j;
          break;
        }
      if (col >= 0) {
        pivot(i, col);
      } else {
        redundant_.push_back(i);
      }
    }
  }

  void phase_two(const Eigen::VectorXd& cost) {
    objective_.assign(static_cast<std::size_t>(vars_ + rows_), 0.0);
    for (Index j = 0; j < vars_; ++j) objective_[static_cast<std::size_t>(j)] = cost(j);
    price();
    run(/*allow_artificial=*/false);
  }

  Eigen::VectorXd primal() const {
    Eigen::VectorXd y = Eigen::VectorXd::Zero(vars_);
    for (Index i = 0; i < rows_; ++i) {
      const Index var = basis_[static_cast<std::size_t>(i)];
      if (var < vars_ && !is_redundant(i)) y(var) = t_(i, rhs());
    }
    return y;
  }

  int iterations() const { return iterations_; }

 private:
  static constexpr double kCostTol = 1e-11;
  static constexpr double kPivotTol = 1e-11;

  Index rhs() const { return vars_ + rows_; }

  bool is_redundant(Index i) const {
    return std::find(redundant_.begin(), redundant_.end(), i) != redundant_.end();
  }

  void price() {
    for (Index j = 0; j <= rhs(); ++j)
      t_(rows_, j) = j < rhs() ? objective_[static_cast<std::size_t>(j)] : 0.0;
    for (Index i = 0; i < rows_; ++i) {
      if (is_redundant(i)) continue;
      const double cb = objective_[static_cast<std::size_t>(basis_[static_cast<std::size_t>(i)])];
      if (cb != 0.0) t_.row(rows_) -= cb * t_.row(i);
    }
  }

  void pivot(Index r, Index c) {
    t_.row(r) /= t_(r, c);
    for (Index i = 0; i <= rows_; ++i) {
      if (i == r) continue;
      const double f = t_(i, c);
      if (f != 0.0) t_.row(i) -= f * t_.row(r);
    }
    basis_[static_cast<std::size_t>(r)] = c;
  }

  void run(bool allow_artificial) {
    const Index limit = allow_artificial ? vars_ + rows_ : vars_;
    while (true) {
      Index enter = -1;
      for (Index j = 0; j < limit; ++j)
        if (t_(rows_, j) < -kCostTol) {
          enter = j;
          break;
        }
      if (enter < 0) return;

      Index leave = -1;
      double best_ratio = std::numeric_limits<double>::infinity();
      for (Index i = 0; i < rows_; ++i) {
        if (is_redundant(i) || t_(i, enter) <= kPivotTol) continue;
        const double ratio = t_(i, rhs()) / t_(i, enter);
        const bool better = ratio < best_ratio - 1e-14 ||
                            (ratio <= best_ratio + 1e-14 && leave >= 0 &&
                             basis_[static_cast<std::size_t>(i)] < basis_[static_cast<std::size_t>(leave)]);
        if (leave < 0 || better) {
          leave = i;
          best_ratio = std::min(best_ratio, ratio);
        }
      }
      if (leave < 0) throw Error(Errc::NotConverged, "l1_eq: linear program is unbounded");
      pivot(leave, enter);
      if (++iterations_ > max_iterations_)
        throw Error(Errc::NotConverged, "l1_eq: simplex iteration limit reached");
    }
  }

  Index rows_;
  Index vars_;
  int max_iterations_;
  int iterations_ = 0;
  Eigen::MatrixXd t_;
  std::vector<Index> basis_;
  std::vector<Index> redundant_;
  std::vector<double> objective_;
};

// Replaces coefficients by the least-squares fit on their own support when
// that keeps every sign and does not worsen the residual.
Eigen::VectorXd polish_on_support(const Dictionary& dict, const Eigen::VectorXd& x,
                                  Eigen::VectorXd s) {
  Support support;
  for (Index i = 0; i < s.size(); ++i)
    if (s(i) != 0.0) support.push_back(i);
  if (support.empty() || static_cast<Index>(support.size()) > dict.rows()) return s;
  const Eigen::MatrixXd sub = dict.submatrix(support);
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(sub);
  qr.setThreshold(1e-10);
  if (qr.rank() < sub.cols()) return s;
  const Eigen::VectorXd c = qr.solve(x);
  Eigen::VectorXd polished = Eigen::VectorXd::Zero(s.size());
  for (std::size_t i = 0; i < support.size(); ++i) {
    const double v = c(static_cast<Index>(i));
    if (v * s(support[i]) <= 0.0) return s;
    polished(support[i]) = v;
  }
  const double before = (x - dict.matrix() * s).norm();
  const double after = (x - dict.matrix() * polished).norm();
  return after <= std::max(before, 1e-15) ? polished : s;
}

SparseSolution finish_iterative(const Dictionary& dict, const Eigen::VectorXd& x,
                                Eigen::VectorXd s, std::string name, int iterations,
                                double bound, double tolerance, double eta) {
  const double residual = (x - dict.matrix() * s).norm();
  if (residual > bound + tolerance)
    throw Error(Errc::NotConverged, name + ": residual " + std::to_string(residual) +
                                        " exceeds " + std::to_string(bound + tolerance));
  Eigen::VectorXd truncated = truncate(s, eta);
  // Truncation must not cost more than one extra tolerance of feasibility.
  if ((x - dict.matrix() * truncated).norm() <= bound + 2.0 * tolerance) s = std::move(truncated);
  return make_solution(dict, x, std::move(s), std::move(name), iterations, true);
}

}  // namespace

SparseSolution l1_eq(const Dictionary& dict, const Eigen::VectorXd& x, const L1Options& options) {
  check_signal(dict, x, "l1_eq");
  const Index m = dict.cols();
  const Eigen::MatrixXd& a = dict.matrix();

  // s = u − v with u, v ≥ 0; minimize Σu + Σv.
  Eigen::MatrixXd lp(a.rows(), 2 * m);
  lp.leftCols(m) = a;
  lp.rightCols(m) = -a;
  Simplex simplex(lp, x, options.max_iterations);
  const double infeasibility = simplex.phase_one();
  if (infeasibility > 1e-9 * std::max(1.0, x.lpNorm<1>()))
    throw Error(Errc::NotConverged, "l1_eq: signal is not in the column span of the dictionary");
  simplex.expel_artificials();
  simplex.phase_two(Eigen::VectorXd::Ones(2 * m));

  const Eigen::VectorXd y = simplex.primal();
  Eigen::VectorXd s = y.head(m) - y.tail(m);
  s = polish_on_support(dict, x, std::move(s));
  return finish_iterative(dict, x, std::move(s), "l1_eq", simplex.iterations(), 0.0,
                          options.feasibility_tolerance, options.zero_threshold);
}

SparseSolution l1_delta(const Dictionary& dict, const Eigen::VectorXd& x, double delta,
                        const L1Options& options) {
  check_signal(dict, x, "l1_delta");
  if (!(delta >= 0.0) || !std::isfinite(delta))
    throw Error(Errc::InvalidArgument, "l1_delta: delta must be finite and non-negative");
  if (delta == 0.0) {
    SparseSolution out = l1_eq(dict, x, options);
    out.solver_name = "l1_delta";
    return out;
  }
  const Index m = dict.cols();
  const Eigen::MatrixXd& a = dict.matrix();
  if (x.norm() <= delta)
    return make_solution(dict, x, Eigen::VectorXd::Zero(m), "l1_delta", 0, true);

  // Aim a hair inside the ball so the returned point is strictly feasible.
  const double target = delta * (1.0 - 1e-12);

  // Along the Lasso path s(λ) = argmin ½‖x − As‖² + λ‖s‖₁ the residual norm
  // grows with λ. Between breakpoints, with active set S and signs z,
  //   s_S(λ) = a − λb,  a = (A_SᵀA_S)⁻¹A_Sᵀx,  b = (A_SᵀA_S)⁻¹z,
  //   r(λ) = r_a + λw,  r_a ⟂ w = A_S b,  so ‖r(λ)‖² = ‖r_a‖² + λ²‖w‖².
  Eigen::VectorXd corr = a.transpose() * x;
  Index first = 0;
  for (Index j = 1; j < m; ++j)
    if (std::abs(corr(j)) > std::abs(corr(first)) * (1.0 + 1e-12)) first = j;
  double lambda = std::abs(corr(first));

  Support active{first};
  std::vector<double> signs{corr(first) > 0 ? 1.0 : -1.0};
  Index last_added = first;
  Index last_dropped = -1;

  for (int iter = 1; iter <= options.max_iterations; ++iter) {
    if (static_cast<Index>(active.size()) > dict.rows())
      throw Error(Errc::NotConverged, "l1_delta: active set exceeds n (degenerate path)");
    const Eigen::MatrixXd sub = dict.submatrix(active);
    const Eigen::MatrixXd gram = sub.transpose() * sub;
    Eigen::LDLT<Eigen::MatrixXd> ldlt(gram);
    if (ldlt.info() != Eigen::Success || !ldlt.isPositive())
      throw Error(Errc::NotConverged, "l1_delta: active columns are dependent");
    const Eigen::VectorXd z = Eigen::Map<const Eigen::VectorXd>(signs.data(), static_cast<Index>(signs.size()));
    const Eigen::VectorXd coef_a = ldlt.solve(sub.transpose() * x);
    const Eigen::VectorXd coef_b = ldlt.solve(z);
    const Eigen::VectorXd r_a = x - sub * coef_a;
    const Eigen::VectorXd w = sub * coef_b;

    // Next breakpoint below the current λ.
    double next = 0.0;
    Index join = -1, drop = -1;
    double join_sign = 0.0;
    const double ceiling = lambda * (1.0 + 1e-12);
    std::vector<bool> in_active(static_cast<std::size_t>(m), false);
    for (Index i : active) in_active[static_cast<std::size_t>(i)] = true;
    for (Index j = 0; j < m; ++j) {
      if (in_active[static_cast<std::size_t>(j)] || j == last_dropped) continue;
      const double p = a.col(j).dot(r_a);
      const double q = a.col(j).dot(w);
      for (double sgn : {1.0, -1.0}) {
        const double den = sgn - q;
        if (std::abs(den) < 1e-14) continue;
        const double cand = p / den;
        if (cand > next && cand <= ceiling) {
          next = std::min(cand, lambda);
          join = j;
          join_sign = sgn;
          drop = -1;
        }
      }
    }
    for (std::size_t i = 0; i < active.size(); ++i) {
      if (active[i] == last_added || coef_b(static_cast<Index>(i)) == 0.0) continue;
      const double cand = coef_a(static_cast<Index>(i)) / coef_b(static_cast<Index>(i));
      if (cand > next && cand <= ceiling) {
        next = std::min(cand, lambda);
        drop = static_cast<Index>(i);
        join = -1;
      }
    }

    const double ra2 = r_a.squaredNorm();
    const double w2 = w.squaredNorm();
    if (ra2 + next * next * w2 <= target * target) {
      double lambda_star = w2 > 0.0 ? std::sqrt(std::max(0.0, target * target - ra2) / w2) : next;
      lambda_star = std::clamp(lambda_star, next, lambda);
      Eigen::VectorXd s = Eigen::VectorXd::Zero(m);
      const Eigen::VectorXd coef = coef_a - lambda_star * coef_b;
      for (std::size_t i = 0; i < active.size(); ++i) s(active[i]) = coef(static_cast<Index>(i));

      // Optimality certificate: |A_jᵀr| ≤ λ* off the support, = λ*·z on it.
      const Eigen::VectorXd c = a.transpose() * (x - a * s);
      if (c.cwiseAbs().maxCoeff() > lambda_star * (1.0 + 1e-6) + 1e-12)
        throw Error(Errc::NotConverged, "l1_delta: homotopy lost optimality (KKT check failed)");
      return finish_iterative(dict, x, std::move(s), "l1_delta", iter, delta,
                              options.feasibility_tolerance, options.zero_threshold);
    }
    if (join < 0 && drop < 0)
      throw Error(Errc::NotConverged, "l1_delta: path ended above the residual target");

    lambda = next;
    if (join >= 0) {
      active.push_back(join);
      signs.push_back(join_sign);
      last_added = join;
      last_dropped = -1;
    } else {
      last_dropped = active[static_cast<std::size_t>(drop)];
      active.erase(active.begin() + drop);
      signs.erase(signs.begin() + drop);
      last_added = -1;
      if (active.empty())
        throw Error(Errc::NotConverged, "l1_delta: active set emptied on the path");
    }
  }
  throw Error(Errc::NotConverged, "l1_delta: homotopy iteration limit reached");
}

SparseSolution l1_vertex_oracle(const Dictionary& dict, const Eigen::VectorXd& x,
                                std::uint64_t budget) {
  check_signal(dict, x, "l1_vertex_oracle");
  const Index n = dict.rows();
  const Index m = dict.cols();
  if (m < n) throw Error(Errc::InvalidArgument, "l1_vertex_oracle: needs rank(A) = n, but m < n");
  const std::uint64_t bases = binomial(static_cast<std::uint64_t>(m), static_cast<std::uint64_t>(n));
  if (bases > budget)
    throw Error(Errc::BudgetExceeded, "l1_vertex_oracle: " + std::to_string(bases) +
                                          " bases exceed budget " + std::to_string(budget));

  Eigen::VectorXd best;
  double best_l1 = std::numeric_limits<double>::infinity();
  int examined = 0;
  for_each_combination(m, n, [&](const Support& basis) {
    ++examined;
    const Eigen::MatrixXd sub = dict.submatrix(basis);
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(sub);
    qr.setThreshold(1e-10);
    if (qr.rank() < n) return true;
    const Eigen::VectorXd c = qr.solve(x);
    if ((x - sub * c).norm() > 1e-9 * std::max(1.0, x.norm())) return true;
    const double l1 = c.lpNorm<1>();
    if (!std::isfinite(best_l1) || l1 < best_l1 - 1e-12 * std::max(1.0, best_l1)) {
      best_l1 = l1;
      best = Eigen::VectorXd::Zero(m);
      for (std::size_t i = 0; i < basis.size(); ++i) best(basis[i]) = c(static_cast<Index>(i));
    }
    return true;
  });
  if (!std::isfinite(best_l1))
    throw Error(Errc::InvalidArgument, "l1_vertex_oracle: dictionary has no nonsingular n-column basis");
  // Degenerate vertices carry exact-zero basic values only up to round-off.
  const double scale = best.cwiseAbs().maxCoeff();
  for (Index i = 0; i < m; ++i)
    if (std::abs(best(i)) <= 1e-13 * std::max(1.0, scale)) best(i) = 0.0;
  return make_solution(dict, x, std::move(best), "l1_vertex_oracle", examined, true);
}

}  // namespace sparsestab
