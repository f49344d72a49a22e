#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "sparsestab/certificate.hpp"
#include "sparsestab/dictionary.hpp"
#include "sparsestab/solvers.hpp"
#include "sparsestab/stability_lab.hpp"

namespace sparsestab {

struct DictionarySpec {
  std::string kind = "gaussian";  ///< "gaussian", "dirac_hadamard" or "file"
  Index n = 0;
  Index m = 0;
  std::uint64_t seed = 0;
  std::filesystem::path path;  ///< kind == "file"
};

Dictionary build_dictionary(const DictionarySpec& spec);

// Experiment config (JSON, unknown keys rejected):
//
//   {
//     "dictionary": {"kind": "gaussian", "n": 8, "m": 12, "seed": 1},
//     "trials": 500,
//     "master_seed": 20240101,
//     "k": [1, 2, 3, 4],
//     "epsilon": [0, 0.001, 0.01, 0.1],
//     "delta_factors": [1, 2],
//     "coefficients": {"min_magnitude": 0.5, "max_magnitude": 1.5},
//     "solvers": ["exhaustive_p0_delta", "omp"],
//     "solver_options": {"max_support": 0, "zero_threshold": 1e-6, "budget": 10000000,
//                        "max_iterations": 10000,
//                        "sl0": {"sigma_scale": 2, "sigma_decay": 0.5, "sigma_floor": 1e-4,
//                                "inner_iterations": 3, "step": 2}},
//     "rank_tolerance": 1e-10,
//     "budget": 10000000
//   }
//
// Only "dictionary", "trials", "k", "epsilon" and "solvers" are required.
// Trial i runs grid cell i mod |k|·|epsilon|·|delta_factors| (k outermost,
// delta factor innermost) with δ = factor·ε and seed derive_seed(master_seed, i).
struct ExperimentConfig {
  DictionarySpec dictionary;
  Index trials = 0;
  std::uint64_t master_seed = 0;
  std::vector<Index> k;
  std::vector<double> epsilon;
  std::vector<double> delta_factors{1.0};
  CoefficientDistribution coefficients;
  std::vector<SolverKind> solvers;
  SolverConfig solver_options;
  double rank_tolerance = kDefaultRankTolerance;
  std::uint64_t budget = kDefaultSubsetBudget;
};

/// Throws ConfigInvalid (with "line L:" context where it can be located) or
/// ParseFailure for malformed JSON. Relative file paths resolve against
/// `base_dir`.
ExperimentConfig parse_experiment_config(std::string_view text,
                                         const std::filesystem::path& base_dir = {});
ExperimentConfig load_experiment_config(const std::filesystem::path& path);

std::vector<TrialSpec> expand_trials(const ExperimentConfig& config);

/// Runs specs on `workers` threads. Results come back in spec order and do
/// not depend on the worker count.
std::vector<TrialResult> run_trials(const Dictionary& dict, const DictionaryCertificate& cert,
                                    std::span<const TrialSpec> specs, unsigned workers = 1);

struct ExperimentRun {
  ExperimentConfig config;
  DictionaryCertificate certificate;
  std::vector<TrialResult> results;
  ExperimentReport report;
};

ExperimentRun run_experiment(const ExperimentConfig& config, unsigned workers = 1);

std::string to_json(const TrialResult& result);
std::string to_json(const ExperimentReport& report);
/// Certificate summary, aggregates and every trial.
std::string to_json(const ExperimentRun& run);
/// One row per trial × solver; not-applicable bounds and flags are empty fields.
std::string to_csv(std::span<const TrialResult> results);

}  // namespace sparsestab
