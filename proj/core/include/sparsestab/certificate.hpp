#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "sparsestab/combinations.hpp"
#include "sparsestab/dictionary.hpp"

namespace sparsestab {

inline constexpr double kDefaultRankTolerance = 1e-10;
inline constexpr std::uint64_t kDefaultSubsetBudget = 10'000'000;

/// Maximum |a_iᵀa_j| over distinct atoms. Returns 0 for a single-atom
/// dictionary, where the quantity is undefined.
double coherence(const Dictionary& dict);

/// Smallest and largest singular values of the columns of `dict` on `subset`.
struct SubsetSpectrum {
  double sigma_min = 0.0;
  double sigma_max = 0.0;
};
SubsetSpectrum subset_spectrum(const Dictionary& dict, const Support& subset);

struct SparkResult {
  /// nullopt encodes NoDependentSubset: all m columns are independent (m ≤ n).
  std::optional<Index> spark;
  /// First dependent subset in lexicographic order, empty if none.
  Support witness;
};

/// Smallest number of linearly dependent columns. A subset counts as
/// dependent when σ_min ≤ τ·σ_max. Sizes are scanned in increasing order and
/// subsets lexicographically within a size, stopping at the first hit; for
/// m > n the scan never goes past n+1. Throws BudgetExceeded when the number
/// of subsets that may have to be inspected exceeds `budget`.
SparkResult spark_exact(const Dictionary& dict,
                        double rank_tolerance = kDefaultRankTolerance,
                        std::uint64_t budget = kDefaultSubsetBudget);

/// q = spark − 1, or m when no dependent subset exists.
Index kruskal_rank(const SparkResult& spark, Index m) noexcept;
Index kruskal_rank(const Dictionary& dict,
                   double rank_tolerance = kDefaultRankTolerance,
                   std::uint64_t budget = kDefaultSubsetBudget);

/// σ_min(j) for j = 1..q: the minimum over all j-column submatrices of their
/// smallest singular value. Exhaustive; element [j-1] holds σ_min(j).
std::vector<double> sigma_min_profile(const Dictionary& dict, Index q,
                                      std::uint64_t budget = kDefaultSubsetBudget);

struct CertifyOptions {
  double rank_tolerance = kDefaultRankTolerance;
  std::uint64_t budget = kDefaultSubsetBudget;
};

struct DictionaryCertificate {
  Index n = 0;
  Index m = 0;
  double coherence = 0.0;
  std::optional<Index> spark;
  Support spark_witness;
  Index kruskal_rank = 0;
  std::vector<double> sigma_profile;
  double rank_tolerance = kDefaultRankTolerance;
  std::string dictionary_label;

  /// σ_min(j) with the convention σ_min(0) = 1. Throws PreconditionViolated
  /// for j outside [0, q].
  double sigma_min(Index j) const;

  /// True when 2·k < spark (always true for NoDependentSubset).
  bool below_half_spark(Index k) const noexcept;
};

DictionaryCertificate certify(const Dictionary& dict, const CertifyOptions& options = {});

std::string to_json(const DictionaryCertificate& cert);
DictionaryCertificate certificate_from_json(std::string_view text);

// ---------------------------------------------------------------------------
// Sparsity thresholds and stability bounds.

struct BoundInputs {
  Index k = 0;         ///< ‖s₀‖₀
  double epsilon = 0;  ///< noise budget, ‖n‖₂ ≤ ε
  double delta = 0;    ///< decomposition slack, ‖x − Aŝ‖₂ ≤ δ
};

/// Largest k with k < spark/2, i.e. ⌈spark/2⌉ − 1.
Index uniqueness_threshold(Index spark);

/// Sparsity levels guaranteed by the coherence alone. nullopt means unbounded
/// (M = 0, an orthonormal dictionary).
struct CoherenceThresholds {
  std::optional<Index> equivalence;  ///< largest k with k < (1 + 1/M)/2
  std::optional<Index> p1_delta;     ///< largest k with k < (1 + 1/M)/4
};
CoherenceThresholds equivalence_threshold(double coherence);

/// (ε + δ)/√(1 − M(2k − 1)). Throws PreconditionViolated unless
/// k < (1 + 1/M)/2; callers must read that as "no guarantee".
double donoho_stability_bound(const BoundInputs& in, double coherence);

/// (δ + ε)/σ_min(2k). Throws PreconditionViolated when 2k > q.
double main_stability_bound(const BoundInputs& in, const DictionaryCertificate& cert);

/// (δ + ε)/σ_min(q); does not depend on k.
double looser_bound(const BoundInputs& in, const DictionaryCertificate& cert);

struct BoundComparison {
  double main_bound = 0.0;
  std::optional<double> donoho_bound;  ///< nullopt: Inapplicable
  bool tightness_checked = false;      ///< ℓ < 1 + 1/M
  bool tightness_ok = true;            ///< σ_min(ℓ)² ≥ 1 − M(ℓ − 1) − 1e-9
  bool equality = false;               ///< both sides agree within 1e-12
  double sigma_squared = 0.0;          ///< σ_min(ℓ)²
  double coherence_side = 0.0;         ///< 1 − M(ℓ − 1)
};

/// Evaluates both bounds at ℓ = 2k and the coherence-side inequality
/// σ_min(ℓ)² ≥ 1 − M(ℓ − 1) whenever ℓ < 1 + 1/M.
BoundComparison compare_bounds(const BoundInputs& in, const DictionaryCertificate& cert,
                               double coherence);

/// One row of the coherence-side tightness sweep over ℓ = 1..q.
struct TightnessCase {
  Index ell = 0;
  double sigma_squared = 0.0;
  double coherence_side = 0.0;
  bool ok = true;
  bool equality = false;
};

/// Every ℓ in [1, q] with ℓ < 1 + 1/M.
std::vector<TightnessCase> coherence_tightness(const DictionaryCertificate& cert);

}  // namespace sparsestab
