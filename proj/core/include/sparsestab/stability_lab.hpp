#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "sparsestab/certificate.hpp"
#include "sparsestab/combinations.hpp"
#include "sparsestab/dictionary.hpp"
#include "sparsestab/solvers.hpp"

namespace sparsestab {

/// Additive tolerance on every "error ≤ bound" comparison.
inline constexpr double kBoundTolerance = 1e-9;
/// Slack on the "residual ≤ δ" hypothesis, covering round-off in least squares.
inline constexpr double kResidualGateSlack = 1e-12;

struct CoefficientDistribution {
  double min_magnitude = 0.5;
  double max_magnitude = 1.5;
};

struct SparseSignal {
  Eigen::VectorXd coefficients;  ///< s₀
  Support support;
  Eigen::VectorXd clean_signal;  ///< x₀ = As₀
};

/// Support uniform over k-subsets, magnitudes uniform in [min, max] with
/// independent random signs.
SparseSignal gen_sparse_signal(const Dictionary& dict, Index k,
                               const CoefficientDistribution& dist, std::uint64_t seed);

/// Uniform on the sphere of radius exactly ε (a rescaled Gaussian sample).
Eigen::VectorXd gen_noise(Index dimension, double epsilon, std::uint64_t seed);

struct NoisyInstance {
  SparseSignal truth;
  Eigen::VectorXd noise;
  Eigen::VectorXd noisy_signal;  ///< x = x₀ + n
  double epsilon = 0.0;
  std::uint64_t seed = 0;

  Index k() const noexcept { return static_cast<Index>(truth.support.size()); }
};

/// Signal and noise draw from independent streams derived from `seed`.
NoisyInstance make_instance(const Dictionary& dict, Index k, const CoefficientDistribution& dist,
                            double epsilon, std::uint64_t seed);

// ---------------------------------------------------------------------------
// Checks

/// Outcome of one "error ≤ bound" statement. Not applicable is never a
/// violation.
struct BoundCheck {
  bool applicable = false;
  double error = 0.0;
  double bound = 0.0;  ///< NaN when not applicable
  bool satisfied = true;
  std::string reason;  ///< why the check is not applicable

  bool violated() const noexcept { return applicable && !satisfied; }
};

/// (ε + δ)/√(1 − M(2k − 1)) for a P0,δ minimizer with δ ≥ ε and k < (1 + 1/M)/2.
BoundCheck verify_theorem3(const NoisyInstance& inst, const SparseSolution& solution,
                           SolverKind solver, double delta, const DictionaryCertificate& cert);

/// (δ + ε)/σ_min(2k) for a P0,δ minimizer with δ ≥ ε and 2k < spark.
BoundCheck verify_theorem4(const NoisyInstance& inst, const SparseSolution& solution,
                           SolverKind solver, double delta, const DictionaryCertificate& cert);

/// (δ + ε)/σ_min(q) under the hypotheses of verify_theorem4 (k unknown to the bound).
BoundCheck verify_looser_bound(const NoisyInstance& inst, const SparseSolution& solution,
                               SolverKind solver, double delta, const DictionaryCertificate& cert);

/// (δ + ε)/σ_min(q) for any estimate with ‖ŝ‖₀ < spark/2 (after truncation at
/// eta) and ‖x − Aŝ‖₂ ≤ δ; δ ≥ ε is not required.
BoundCheck verify_theorem5(const Dictionary& dict, const NoisyInstance& inst,
                           const SparseSolution& solution, double delta, double eta,
                           const DictionaryCertificate& cert);

/// The nonzero part of s₀ − ŝ and the matching columns of A.
struct DifferenceWitness {
  Support diff_support;
  Eigen::VectorXd v;
  Eigen::MatrixXd b;
  Index ell_actual = 0;
};
DifferenceWitness make_difference_witness(const Dictionary& dict, const Eigen::VectorXd& truth,
                                          const Eigen::VectorXd& estimate);

/// The three inequalities of the stability argument, checked numerically:
///   (a) ‖x₀ − Aŝ‖₂ ≤ δ + ε whenever the residual satisfies ‖x − Aŝ‖₂ ≤ δ;
///   (b) Bv = A(s₀ − ŝ);
///   (c) ‖Bv‖₂ ≥ σ_min(ℓ)·‖v‖₂ with ℓ = |supp(s₀ − ŝ)|.
struct ChainCheck {
  bool applicable = false;
  Index ell_actual = 0;
  bool residual_gate = false;  ///< (a) is only asserted when this holds
  double clean_misfit = 0.0;   ///< ‖x₀ − Aŝ‖₂
  bool a_ok = true;
  double b_mismatch = 0.0;     ///< ‖Bv − A(s₀ − ŝ)‖₂
  bool b_ok = true;
  double bv_norm = 0.0;
  double lower_bound = 0.0;    ///< σ_min(ℓ)·‖v‖₂
  bool c_ok = true;
  std::string reason;

  bool ok() const noexcept { return !applicable || (a_ok && b_ok && c_ok); }
};
ChainCheck verify_proof_chain(const Dictionary& dict, const NoisyInstance& inst,
                              const SparseSolution& solution, double delta,
                              const DictionaryCertificate& cert);

struct UniquenessCheck {
  Index k = 0;
  bool below_half_spark = false;
  bool unique = false;
  std::vector<Support> representations;  ///< every exact representation with ‖s‖₀ ≤ k
};

/// Brute-force search over all supports of size ≤ ‖s₀‖₀ for exact
/// representations of x₀ = As₀ (residual ≤ zero_tol; negative means
/// 1e-10·max(1, ‖x₀‖₂)).
UniquenessCheck verify_uniqueness(const Dictionary& dict, const Eigen::VectorXd& truth,
                                  const DictionaryCertificate& cert, double zero_tol = -1.0,
                                  std::uint64_t budget = 10'000'000);

// ---------------------------------------------------------------------------
// Trials

struct TrialSpec {
  Index k = 1;
  double epsilon = 0.0;
  double delta = 0.0;
  CoefficientDistribution dist;
  std::vector<SolverKind> solvers;
  SolverConfig config;  ///< config.delta is overridden by `delta`
  std::uint64_t seed = 0;
};

struct SolverRecord {
  SolverKind solver = SolverKind::ExhaustiveP0Delta;
  std::string status = "ok";  ///< "ok" or the error code name
  std::string message;
  std::optional<SparseSolution> solution;
  double error = 0.0;     ///< ‖ŝ − s₀‖₂
  double residual = 0.0;  ///< ‖x − Aŝ‖₂
  Index l0 = 0;
  BoundCheck eq5;   ///< coherence bound
  BoundCheck eq8;   ///< σ_min(2k) bound
  BoundCheck eq13;  ///< σ_min(q) bound under the P0,δ hypotheses
  BoundCheck eq14;  ///< σ_min(q) bound for arbitrary estimates
  ChainCheck chain;
  std::optional<BoundComparison> comparison;

  bool has_violation() const noexcept {
    return eq5.violated() || eq8.violated() || eq13.violated() || eq14.violated() || !chain.ok();
  }
};

struct TrialResult {
  Index trial_id = 0;
  Index n = 0;
  Index m = 0;
  Index k = 0;
  double epsilon = 0.0;
  double delta = 0.0;
  std::uint64_t seed = 0;
  Support truth_support;
  std::vector<SolverRecord> records;
};

/// Builds the instance, runs each solver, and evaluates every applicable
/// bound plus the proof chain. Solver failures are recorded, not thrown.
TrialResult run_trial(const Dictionary& dict, const DictionaryCertificate& cert,
                      const TrialSpec& spec, Index trial_id = 0);

// ---------------------------------------------------------------------------
// Aggregation

struct RatioStats {
  Index count = 0;
  double min = 0.0;
  double median = 0.0;
  double max = 0.0;
};

struct CheckTally {
  Index applicable = 0;
  Index violations = 0;
  RatioStats ratio;  ///< error / bound over applicable checks with bound > 0
};

struct SolverAggregate {
  SolverKind solver = SolverKind::ExhaustiveP0Delta;
  Index trials = 0;
  Index failures = 0;
  CheckTally eq5;
  CheckTally eq8;
  CheckTally eq13;
  CheckTally eq14;
  CheckTally chain;
  Index bound_order_checked = 0;     ///< trials where both coherence and σ bounds apply
  Index bound_order_violations = 0;  ///< main bound > coherence bound + 1e-12
};

struct ExperimentReport {
  Index trials = 0;
  std::vector<SolverAggregate> solvers;  ///< in first-appearance order
  std::vector<TightnessCase> tightness;  ///< coherence-side sweep of the certificate
  Index tightness_failures = 0;
  Index tightness_equalities = 0;

  Index total_violations() const noexcept;
};

/// Throws EmptyInput for an empty batch.
ExperimentReport aggregate_report(std::span<const TrialResult> results,
                                  const DictionaryCertificate& cert);

}  // namespace sparsestab
