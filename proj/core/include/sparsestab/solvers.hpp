#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

#include "sparsestab/combinations.hpp"
#include "sparsestab/dictionary.hpp"

namespace sparsestab {

/// Default magnitude below which iterative solver outputs are set to zero.
inline constexpr double kDefaultZeroThreshold = 1e-6;

/// Output of every solver: coefficients plus the support they are nonzero on.
/// Coefficients are exactly zero off `support`.
struct SparseSolution {
  Eigen::VectorXd coefficients;
  Support support;
  double residual_norm = 0.0;  ///< ‖x − Aŝ‖₂
  std::string solver_name;
  int iterations = 0;
  bool converged = false;

  Index l0() const noexcept { return static_cast<Index>(support.size()); }
};

/// Builds a SparseSolution from dense coefficients: support is every index
/// with a nonzero entry, residual is recomputed against x.
SparseSolution make_solution(const Dictionary& dict, const Eigen::VectorXd& x,
                             Eigen::VectorXd coefficients, std::string solver_name,
                             int iterations, bool converged);

/// Number of entries with |v_i| > eta.
Index l0_count(const Eigen::VectorXd& v, double eta);

/// Zeroes every entry with |v_i| ≤ eta.
Eigen::VectorXd truncate(Eigen::VectorXd v, double eta);

// ---------------------------------------------------------------------------
// Least squares

/// Minimizer of ‖x − A_S c‖₂ via column-pivoted Householder QR. Returns the
/// |S| coefficients in support order. Throws SupportTooLarge when A_S does not
/// have full column rank (|S| > q for this dictionary).
Eigen::VectorXd least_squares_on_support(const Dictionary& dict, const Support& support,
                                         const Eigen::VectorXd& x);

// ---------------------------------------------------------------------------
// Exhaustive ℓ0 oracles

struct ExhaustiveOptions {
  /// Largest support size searched; 0 means min(n, m).
  Index max_support = 0;
  /// Number of least-squares subproblems allowed before BudgetExceeded.
  std::uint64_t budget = 10'000'000;
  /// Residual regarded as exact equality; negative means 1e-10·‖x‖₂.
  double zero_tol = -1.0;
};

/// Global minimizer of ‖s‖₀ subject to ‖x − As‖₂ ≤ zero_tol. Supports are
/// enumerated by increasing size; among feasible supports of the minimal size
/// the smallest residual wins, then the lexicographically smallest support.
SparseSolution exhaustive_p0(const Dictionary& dict, const Eigen::VectorXd& x,
                             const ExhaustiveOptions& options = {});

/// Global minimizer of ‖s‖₀ subject to ‖x − As‖₂ ≤ δ, with the same search
/// order and tie-breaking as exhaustive_p0. δ = 0 coincides with exhaustive_p0.
SparseSolution exhaustive_p0_delta(const Dictionary& dict, const Eigen::VectorXd& x,
                                   double delta, const ExhaustiveOptions& options = {});

/// Every exact representation of x on supports of size ≤ max_size: each entry
/// is the effective support of the least-squares fit (zero coefficients
/// dropped), deduplicated and ordered lexicographically by enumeration.
std::vector<Support> enumerate_representations(const Dictionary& dict, const Eigen::VectorXd& x,
                                               Index max_size, double zero_tol,
                                               std::uint64_t budget);

// ---------------------------------------------------------------------------
// ℓ1 minimization

struct L1Options {
  double zero_threshold = kDefaultZeroThreshold;
  int max_iterations = 10'000;
  /// Feasibility tolerance: ‖x − Aŝ‖₂ ≤ tol (l1_eq) or ≤ δ + tol (l1_delta).
  double feasibility_tolerance = 1e-8;
};

/// min ‖s‖₁ s.t. As = x, solved as a linear program with a dense two-phase
/// simplex (Bland's rule) and polished by least squares on the optimal basis.
SparseSolution l1_eq(const Dictionary& dict, const Eigen::VectorXd& x,
                     const L1Options& options = {});

/// min ‖s‖₁ s.t. ‖x − As‖₂ ≤ δ, solved by following the Lasso homotopy path
/// until the residual reaches δ. δ = 0 delegates to l1_eq.
SparseSolution l1_delta(const Dictionary& dict, const Eigen::VectorXd& x, double delta,
                        const L1Options& options = {});

/// Independent ℓ1 oracle: enumerates all n-column bases, solves each square
/// system and keeps the feasible candidate of least ℓ1 norm (ties: lexicographic
/// support). Requires rank(A) = n and C(m, n) ≤ budget.
SparseSolution l1_vertex_oracle(const Dictionary& dict, const Eigen::VectorXd& x,
                                std::uint64_t budget = 100'000);

// ---------------------------------------------------------------------------
// Greedy

struct OmpOptions {
  Index max_atoms = 0;           ///< must be ≥ 1
  double residual_target = 0.0;  ///< stop once ‖r‖₂ ≤ target
};

/// Orthogonal matching pursuit. Picks the atom of largest |correlation| with
/// the residual (lowest index on ties), refits on the support, repeats.
SparseSolution omp(const Dictionary& dict, const Eigen::VectorXd& x, const OmpOptions& options);

// ---------------------------------------------------------------------------
// Smoothed ℓ0

struct Sl0Options {
  double sigma_scale = 2.0;     ///< σ₀ = sigma_scale · max|s_init|
  double sigma_decay = 0.5;     ///< σ ← decay · σ
  double sigma_floor = 1e-4;    ///< relative stop level, see sl0()
  int inner_iterations = 3;     ///< ascent steps per σ
  double step = 2.0;            ///< μ in s ← s − μ·s·exp(−s²/2σ²)
  double zero_threshold = kDefaultZeroThreshold;
  double feasibility_tolerance = 1e-8;
};

/// Smoothed-ℓ0 with exact affine projection. The σ schedule runs from σ₀ down
/// to σ₀·max(sigma_floor, δ/‖x‖₂) (δ = 0 here). The final iterate is
/// truncated (first below the last σ, then at zero_threshold) and refit by
/// least squares on the surviving support; the first feasible candidate is
/// returned, else the untruncated iterate. NotConverged if even that misses
/// ‖x − Aŝ‖₂ ≤ feasibility_tolerance.
SparseSolution sl0(const Dictionary& dict, const Eigen::VectorXd& x, const Sl0Options& options = {});

/// Noise-aware smoothed-ℓ0: same schedule, projecting onto the ellipsoidal
/// set {s : ‖x − As‖₂ ≤ δ} instead of the affine one.
SparseSolution robust_sl0(const Dictionary& dict, const Eigen::VectorXd& x, double delta,
                          const Sl0Options& options = {});

// ---------------------------------------------------------------------------
// Dispatch

enum class SolverKind { ExhaustiveP0, ExhaustiveP0Delta, L1Eq, L1Delta, Omp, Sl0, RobustSl0 };

/// Canonical snake_case name ("exhaustive_p0_delta", "omp", ...).
std::string_view to_string(SolverKind kind) noexcept;
/// Accepts the snake_case name or its kebab-case spelling.
std::optional<SolverKind> parse_solver_kind(std::string_view name) noexcept;

/// Everything needed to run any solver on a signal.
struct SolverConfig {
  double delta = 0.0;
  Index max_support = 0;  ///< exhaustive search cap and OMP atom cap; 0 → n
  double zero_threshold = kDefaultZeroThreshold;
  std::uint64_t budget = 10'000'000;
  int max_iterations = 10'000;
  Sl0Options sl0;
};

SparseSolution run_solver(SolverKind kind, const Dictionary& dict, const Eigen::VectorXd& x,
                          const SolverConfig& config);

/// JSON: solver_name, support, coefficients (sparse [index, value] pairs),
/// residual_norm, iterations, converged.
std::string to_json(const SparseSolution& solution);

}  // namespace sparsestab
