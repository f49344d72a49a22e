#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>

#include "sparsestab/certificate.hpp"

namespace sparsestab::cli {

struct CommonOptions {
  std::optional<std::uint64_t> seed;
  std::optional<std::uint64_t> budget;  ///< unset → library / config default
  std::filesystem::path output;  ///< empty → subcommand default
  std::string format;            ///< empty → subcommand default
  unsigned workers = 1;
};

struct AnalyzeOptions {
  std::filesystem::path matrix;
  std::optional<Index> dirac_hadamard;  ///< build dirac_hadamard(n) instead of reading a file
  std::optional<Index> gaussian_n;      ///< build random_gaussian(n, m, --seed)
  std::optional<Index> gaussian_m;
  double rank_tolerance = kDefaultRankTolerance;
};

struct SolveOptions {
  std::filesystem::path matrix;
  std::filesystem::path signal;
  std::string solver;
  double delta = 0.0;
  std::optional<Index> max_atoms;
  std::optional<double> residual_target;
  double eta = 1e-6;
  Index max_support = 0;
  int max_iterations = 10'000;
};

struct ExperimentOptions {
  std::filesystem::path config;
};

struct ThresholdOptions {
  std::optional<double> coherence;
  std::optional<Index> spark;
  std::filesystem::path certificate;
  std::optional<Index> k;
  double epsilon = 0.0;
  double delta = 0.0;
};

// Each command throws sparsestab::Error on failure and returns the process
// exit status otherwise. Human-readable summaries go to `out`.
int cmd_analyze(const AnalyzeOptions& opt, const CommonOptions& common, std::ostream& out);
int cmd_solve(const SolveOptions& opt, const CommonOptions& common, std::ostream& out);
int cmd_experiment(const ExperimentOptions& opt, const CommonOptions& common, std::ostream& out);
int cmd_thresholds(const ThresholdOptions& opt, const CommonOptions& common, std::ostream& out);

/// Full command line: parses, dispatches, and turns errors into the one-line
///   error: code=<Name> exit=<n> message="..."
/// report on `err`.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace sparsestab::cli
