#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <limits>
#include <numeric>
#include <vector>

namespace sparsestab {

using Index = Eigen::Index;
using Support = std::vector<Index>;

/// C(n, k), saturating at UINT64_MAX instead of overflowing.
inline std::uint64_t binomial(std::uint64_t n, std::uint64_t k) noexcept {
  if (k > n) return 0;
  k = std::min(k, n - k);
  constexpr auto kMax = std::numeric_limits<std::uint64_t>::max();
  std::uint64_t result = 1;
  for (std::uint64_t i = 1; i <= k; ++i) {
    const std::uint64_t num = n - k + i;
    // result * num / i is exact at every step; guard the multiplication.
    const std::uint64_t g = std::gcd(result, i);
    const std::uint64_t r = result / g;
    const std::uint64_t d = i / g;
    const std::uint64_t nn = num / d;
    if (r != 0 && nn > kMax / r) return kMax;
    result = r * nn;
  }
  return result;
}

/// Sum of C(m, j) for j in [lo, hi], saturating.
inline std::uint64_t subset_count(std::uint64_t m, std::uint64_t lo,
                                  std::uint64_t hi) noexcept {
  constexpr auto kMax = std::numeric_limits<std::uint64_t>::max();
  std::uint64_t total = 0;
  for (std::uint64_t j = lo; j <= hi && j <= m; ++j) {
    const std::uint64_t c = binomial(m, j);
    if (c > kMax - total) return kMax;
    total += c;
  }
  return total;
}

/// First k-subset of {0..m-1} in lexicographic order.
inline Support first_combination(Index k) {
  Support idx(static_cast<std::size_t>(k));
  std::iota(idx.begin(), idx.end(), Index{0});
  return idx;
}

/// Advances idx to the next k-subset of {0..m-1} in lexicographic order.
/// Returns false (leaving idx unspecified) once the last subset is passed.
inline bool next_combination(Support& idx, Index m) {
  const auto k = static_cast<Index>(idx.size());
  Index i = k - 1;
  while (i >= 0 && idx[static_cast<std::size_t>(i)] == m - k + i) --i;
  if (i < 0) return false;
  ++idx[static_cast<std::size_t>(i)];
  for (Index j = i + 1; j < k; ++j)
    idx[static_cast<std::size_t>(j)] = idx[static_cast<std::size_t>(j - 1)] + 1;
  return true;
}

/// Calls fn(subset) for every k-subset of {0..m-1} in lexicographic order.
/// fn may return false to stop early; the return value reports whether the
/// enumeration ran to completion.
template <typename Fn>
bool for_each_combination(Index m, Index k, Fn&& fn) {
  if (k < 0 || k > m) return true;
  Support idx = first_combination(k);
  do {
    if (!fn(static_cast<const Support&>(idx))) return false;
  } while (next_combination(idx, m));
  return true;
}

}  // namespace sparsestab
