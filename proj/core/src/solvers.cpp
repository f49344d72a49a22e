#include "sparsestab/solvers.hpp"

#include <Eigen/QR>

#include <cmath>

#include "detail/json_writer.hpp"
#include "sparsestab/error.hpp"

namespace sparsestab {

SparseSolution make_solution(const Dictionary& dict, const Eigen::VectorXd& x,
                             Eigen::VectorXd coefficients, std::string solver_name,
                             int iterations, bool converged) {
  SparseSolution out;
  for (Index i = 0; i < coefficients.size(); ++i)
    if (coefficients(i) != 0.0) out.support.push_back(i);
  out.residual_norm = (x - dict.matrix() * coefficients).norm();
  out.coefficients = std::move(coefficients);
  out.solver_name = std::move(solver_name);
  out.iterations = iterations;
  out.converged = converged;
  return out;
}

Index l0_count(const Eigen::VectorXd& v, double eta) {
  if (eta < 0.0) throw Error(Errc::InvalidArgument, "eta must be non-negative");
  Index count = 0;
  for (Index i = 0; i < v.size(); ++i)
    if (std::abs(v(i)) > eta) ++count;
  return count;
}

Eigen::VectorXd truncate(Eigen::VectorXd v, double eta) {
  for (Index i = 0; i < v.size(); ++i)
    if (std::abs(v(i)) <= eta) v(i) = 0.0;
  return v;
}

SparseSolution omp(const Dictionary& dict, const Eigen::VectorXd& x, const OmpOptions& options) {
  if (x.size() != dict.rows())
    throw Error(Errc::DimensionMismatch, "omp: signal length differs from dictionary rows");
  if (options.max_atoms < 1) throw Error(Errc::InvalidArgument, "omp: max_atoms must be >= 1");
  if (!(options.residual_target >= 0.0))
    throw Error(Errc::InvalidArgument, "omp: residual_target must be non-negative");

  const Eigen::MatrixXd& a = dict.matrix();
  const Index m = dict.cols();
  const Index cap = std::min({options.max_atoms, dict.rows(), m});

  Support support;
  std::vector<bool> chosen(static_cast<std::size_t>(m), false);
  Eigen::VectorXd coeffs;
  Eigen::VectorXd residual = x;
  int iterations = 0;

  while (residual.norm() > options.residual_target && static_cast<Index>(support.size()) < cap) {
    const Eigen::VectorXd corr = a.transpose() * residual;
    Index best = -1;
    double best_abs = 0.0;
    for (Index j = 0; j < m; ++j) {
      if (chosen[static_cast<std::size_t>(j)]) continue;
      const double c = std::abs(corr(j));
      // Strictly larger (beyond round-off) replaces, so ties keep the lowest index.
      if (best < 0 || c > best_abs * (1.0 + 1e-12) + 1e-300) {
        best = j;
        best_abs = c;
      }
    }
    if (best < 0 || best_abs <= 1e-14 * x.norm()) break;

    support.push_back(best);
    chosen[static_cast<std::size_t>(best)] = true;
    ++iterations;

    const Eigen::MatrixXd sub = dict.submatrix(support);
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(sub);
    qr.setThreshold(1e-10);
    if (qr.rank() < sub.cols()) {
      // The new atom lies in the span of the current support; drop it.
      support.pop_back();
      break;
    }
    coeffs = qr.solve(x);
    residual = x - sub * coeffs;
  }

  Eigen::VectorXd s = Eigen::VectorXd::Zero(m);
  for (std::size_t i = 0; i < support.size(); ++i) s(support[i]) = coeffs(static_cast<Index>(i));
  const bool converged = residual.norm() <= options.residual_target;
  return make_solution(dict, x, std::move(s), "omp", iterations, converged);
}

std::string_view to_string(SolverKind kind) noexcept {
  switch (kind) {
    case SolverKind::ExhaustiveP0: return "exhaustive_p0";
    case SolverKind::ExhaustiveP0Delta: return "exhaustive_p0_delta";
    case SolverKind::L1Eq: return "l1_eq";
    case SolverKind::L1Delta: return "l1_delta";
    case SolverKind::Omp: return "omp";
    case SolverKind::Sl0: return "sl0";
    case SolverKind::RobustSl0: return "robust_sl0";
  }
  return "unknown";
}

std::optional<SolverKind> parse_solver_kind(std::string_view name) noexcept {
  std::string canonical(name);
  for (char& c : canonical)
    if (c == '-') c = '_';
  for (auto kind : {SolverKind::ExhaustiveP0, SolverKind::ExhaustiveP0Delta, SolverKind::L1Eq,
                    SolverKind::L1Delta, SolverKind::Omp, SolverKind::Sl0, SolverKind::RobustSl0})
    if (to_string(kind) == canonical) return kind;
  return std::nullopt;
}

SparseSolution run_solver(SolverKind kind, const Dictionary& dict, const Eigen::VectorXd& x,
                          const SolverConfig& config) {
  ExhaustiveOptions ex;
  ex.max_support = config.max_support;
  ex.budget = config.budget;

  L1Options l1;
  l1.zero_threshold = config.zero_threshold;
  l1.max_iterations = config.max_iterations;

  Sl0Options sl = config.sl0;
  sl.zero_threshold = config.zero_threshold;

  switch (kind) {
    case SolverKind::ExhaustiveP0: return exhaustive_p0(dict, x, ex);
    case SolverKind::ExhaustiveP0Delta: return exhaustive_p0_delta(dict, x, config.delta, ex);
    case SolverKind::L1Eq: return l1_eq(dict, x, l1);
    case SolverKind::L1Delta: return l1_delta(dict, x, config.delta, l1);
    case SolverKind::Omp: {
      OmpOptions o;
      o.max_atoms = config.max_support > 0 ? config.max_support : dict.rows();
      // An exact fit is only reachable up to round-off.
      o.residual_target = std::max(config.delta, 1e-12 * x.norm());
      return omp(dict, x, o);
    }
    case SolverKind::Sl0: return sl0(dict, x, sl);
    case SolverKind::RobustSl0: return robust_sl0(dict, x, config.delta, sl);
  }
  throw Error(Errc::InvalidArgument, "unknown solver");
}

std::string to_json(const SparseSolution& solution) {
  detail::JsonWriter w;
  w.begin_object();
  w.key("solver_name").value(solution.solver_name);
  w.key("support").begin_array();
  for (Index i : solution.support) w.value(static_cast<long long>(i));
  w.end_array();
  w.key("coefficients").begin_array();
  for (Index i : solution.support) {
    w.begin_array();
    w.value(static_cast<long long>(i));
    w.value(solution.coefficients(i));
    w.end_array();
  }
  w.end_array();
  w.key("residual_norm").value(solution.residual_norm);
  w.key("iterations").value(static_cast<long long>(solution.iterations));
  w.key("converged").value(solution.converged);
  w.end_object();
  return w.str();
}

}  // namespace sparsestab
