#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace sparsestab {

// All randomness in the library flows through this engine so that a
// (seed, parameters) pair reproduces bit-identical output within a build.
using Rng = std::mt19937_64;

/// Name of the generator recorded in labels and experiment reports.
inline constexpr std::string_view kGeneratorName =
    "mt19937_64+std::normal_distribution/std::uniform_real_distribution";

/// SplitMix64 finalizer applied to (master, stream). Gives every trial an
/// independent, schedule-free random stream.
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream) noexcept;

double standard_normal(Rng& rng);
double uniform(Rng& rng, double lo, double hi);

}  // namespace sparsestab
