#include "sparsestab/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <fstream>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>

#include "json.hpp"
#include "sparsestab/error.hpp"
#include "sparsestab/random.hpp"

namespace sparsestab {
namespace {

using nlohmann::json;

// Locates config problems in the source text. Keys are searched literally,
// which is good enough for the flat schema used here.
class ConfigContext {
 public:
  explicit ConfigContext(std::string_view text) : text_(text) {}

  [[noreturn]] void fail(std::string_view key, const std::string& message) const {
    std::string where;
    const std::string needle = "\"" + std::string(key) + "\"";
    const auto pos = text_.find(needle);
    if (!key.empty() && pos != std::string_view::npos) where = "line " + std::to_string(line_of(pos)) + ": ";
    throw Error(Errc::ConfigInvalid, "config: " + where + message);
  }

  std::size_t line_of(std::size_t byte) const {
    byte = std::min(byte, text_.size());
    return 1 + static_cast<std::size_t>(std::count(text_.begin(), text_.begin() + byte, '\n'));
  }

 private:
  std::string_view text_;
};

void reject_unknown(const json& obj, std::initializer_list<std::string_view> allowed,
                    const ConfigContext& ctx, std::string_view where) {
  for (const auto& [key, _] : obj.items()) {
    if (std::find(allowed.begin(), allowed.end(), key) == allowed.end())
      ctx.fail(key, "unknown key \"" + key + "\" in " + std::string(where));
  }
}

const json& require(const json& obj, const char* key, const ConfigContext& ctx,
                    std::string_view where) {
  if (!obj.contains(key))
    ctx.fail("", "missing required key \"" + std::string(key) + "\" in " + std::string(where));
  return obj.at(key);
}

double get_real(const json& v, const char* key, const ConfigContext& ctx) {
  if (!v.is_number()) ctx.fail(key, std::string(key) + " must be a number");
  const double d = v.get<double>();
  if (!std::isfinite(d)) ctx.fail(key, std::string(key) + " must be finite");
  return d;
}

long long get_int(const json& v, const char* key, const ConfigContext& ctx) {
  if (!v.is_number_integer()) ctx.fail(key, std::string(key) + " must be an integer");
  return v.get<long long>();
}

std::uint64_t get_uint(const json& v, const char* key, const ConfigContext& ctx) {
  if (!v.is_number_unsigned()) ctx.fail(key, std::string(key) + " must be a non-negative integer");
  return v.get<std::uint64_t>();
}

const json& get_array(const json& v, const char* key, const ConfigContext& ctx) {
  if (!v.is_array() || v.empty()) ctx.fail(key, std::string(key) + " must be a non-empty array");
  return v;
}

DictionarySpec parse_dictionary(const json& d, const ConfigContext& ctx,
                                const std::filesystem::path& base_dir) {
  if (!d.is_object()) ctx.fail("dictionary", "dictionary must be an object");
  DictionarySpec spec;
  const json& kind = require(d, "kind", ctx, "dictionary");
  if (!kind.is_string()) ctx.fail("kind", "dictionary.kind must be a string");
  spec.kind = kind.get<std::string>();
  if (spec.kind == "gaussian") {
    reject_unknown(d, {"kind", "n", "m", "seed"}, ctx, "dictionary");
    spec.n = get_int(require(d, "n", ctx, "dictionary"), "n", ctx);
    spec.m = get_int(require(d, "m", ctx, "dictionary"), "m", ctx);
    if (d.contains("seed")) spec.seed = get_uint(d.at("seed"), "seed", ctx);
    if (spec.n < 1 || spec.m < 1) ctx.fail("n", "dictionary dimensions must be >= 1");
  } else if (spec.kind == "dirac_hadamard") {
    reject_unknown(d, {"kind", "n"}, ctx, "dictionary");
    spec.n = get_int(require(d, "n", ctx, "dictionary"), "n", ctx);
    if (spec.n < 1) ctx.fail("n", "dictionary dimensions must be >= 1");
    spec.m = 2 * spec.n;
  } else if (spec.kind == "file") {
    reject_unknown(d, {"kind", "path"}, ctx, "dictionary");
    const json& p = require(d, "path", ctx, "dictionary");
    if (!p.is_string()) ctx.fail("path", "dictionary.path must be a string");
    spec.path = p.get<std::string>();
    if (spec.path.is_relative() && !base_dir.empty()) spec.path = base_dir / spec.path;
  } else {
    ctx.fail("kind", "unknown dictionary kind \"" + spec.kind + "\"");
  }
  return spec;
}

void parse_solver_options(const json& o, SolverConfig& cfg, const ConfigContext& ctx) {
  if (!o.is_object()) ctx.fail("solver_options", "solver_options must be an object");
  reject_unknown(o, {"max_support", "zero_threshold", "budget", "max_iterations", "sl0"}, ctx,
                 "solver_options");
  if (o.contains("max_support")) {
    cfg.max_support = get_int(o.at("max_support"), "max_support", ctx);
    if (cfg.max_support < 0) ctx.fail("max_support", "max_support must be >= 0");
  }
  if (o.contains("zero_threshold")) {
    cfg.zero_threshold = get_real(o.at("zero_threshold"), "zero_threshold", ctx);
    if (!(cfg.zero_threshold > 0.0)) ctx.fail("zero_threshold", "zero_threshold must be > 0");
  }
  if (o.contains("budget")) cfg.budget = get_uint(o.at("budget"), "budget", ctx);
  if (o.contains("max_iterations")) {
    const long long it = get_int(o.at("max_iterations"), "max_iterations", ctx);
    if (it < 1 || it > 100'000'000) ctx.fail("max_iterations", "max_iterations out of range");
    cfg.max_iterations = static_cast<int>(it);
  }
  if (o.contains("sl0")) {
    const json& s = o.at("sl0");
    if (!s.is_object()) ctx.fail("sl0", "sl0 must be an object");
    reject_unknown(s, {"sigma_scale", "sigma_decay", "sigma_floor", "inner_iterations", "step"},
                   ctx, "sl0");
    Sl0Options& sl = cfg.sl0;
    if (s.contains("sigma_scale")) sl.sigma_scale = get_real(s.at("sigma_scale"), "sigma_scale", ctx);
    if (s.contains("sigma_decay")) sl.sigma_decay = get_real(s.at("sigma_decay"), "sigma_decay", ctx);
    if (s.contains("sigma_floor")) sl.sigma_floor = get_real(s.at("sigma_floor"), "sigma_floor", ctx);
    if (s.contains("step")) sl.step = get_real(s.at("step"), "step", ctx);
    if (s.contains("inner_iterations")) {
      const long long it = get_int(s.at("inner_iterations"), "inner_iterations", ctx);
      if (it < 1 || it > 1000) ctx.fail("inner_iterations", "inner_iterations out of range");
      sl.inner_iterations = static_cast<int>(it);
    }
    if (!(sl.sigma_scale > 0.0)) ctx.fail("sigma_scale", "sigma_scale must be > 0");
    if (!(sl.sigma_decay > 0.0 && sl.sigma_decay < 1.0))
      ctx.fail("sigma_decay", "sigma_decay must lie in (0, 1)");
    if (!(sl.sigma_floor > 0.0)) ctx.fail("sigma_floor", "sigma_floor must be > 0");
    if (!(sl.step > 0.0)) ctx.fail("step", "step must be > 0");
  }
}

}  // namespace

Dictionary build_dictionary(const DictionarySpec& spec) {
  if (spec.kind == "gaussian") return random_gaussian(spec.n, spec.m, spec.seed);
  if (spec.kind == "dirac_hadamard") return dirac_hadamard(spec.n);
  if (spec.kind == "file") return load(spec.path);
  throw Error(Errc::ConfigInvalid, "unknown dictionary kind \"" + spec.kind + "\"");
}

ExperimentConfig parse_experiment_config(std::string_view text,
                                         const std::filesystem::path& base_dir) {
  const ConfigContext ctx(text);
  json root;
  try {
    root = json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    throw Error(Errc::ParseFailure,
                "config: line " + std::to_string(ctx.line_of(e.byte > 0 ? e.byte - 1 : 0)) +
                    ": malformed JSON");
  }
  if (!root.is_object()) ctx.fail("", "top level must be an object");
  reject_unknown(root,
                 {"dictionary", "trials", "master_seed", "k", "epsilon", "delta_factors",
                  "coefficients", "solvers", "solver_options", "rank_tolerance", "budget"},
                 ctx, "config");

  ExperimentConfig cfg;
  cfg.dictionary = parse_dictionary(require(root, "dictionary", ctx, "config"), ctx, base_dir);

  cfg.trials = get_int(require(root, "trials", ctx, "config"), "trials", ctx);
  if (cfg.trials < 1) ctx.fail("trials", "trials must be >= 1");
  if (root.contains("master_seed")) cfg.master_seed = get_uint(root.at("master_seed"), "master_seed", ctx);

  for (const json& v : get_array(require(root, "k", ctx, "config"), "k", ctx)) {
    const long long k = get_int(v, "k", ctx);
    if (k < 0) ctx.fail("k", "k values must be >= 0");
    cfg.k.push_back(static_cast<Index>(k));
  }
  for (const json& v : get_array(require(root, "epsilon", ctx, "config"), "epsilon", ctx)) {
    const double e = get_real(v, "epsilon", ctx);
    if (e < 0.0) ctx.fail("epsilon", "epsilon values must be >= 0");
    cfg.epsilon.push_back(e);
  }
  if (root.contains("delta_factors")) {
    cfg.delta_factors.clear();
    for (const json& v : get_array(root.at("delta_factors"), "delta_factors", ctx)) {
      const double f = get_real(v, "delta_factors", ctx);
      if (f < 0.0) ctx.fail("delta_factors", "delta factors must be >= 0");
      cfg.delta_factors.push_back(f);
    }
  }
  if (root.contains("coefficients")) {
    const json& c = root.at("coefficients");
    if (!c.is_object()) ctx.fail("coefficients", "coefficients must be an object");
    reject_unknown(c, {"min_magnitude", "max_magnitude"}, ctx, "coefficients");
    if (c.contains("min_magnitude"))
      cfg.coefficients.min_magnitude = get_real(c.at("min_magnitude"), "min_magnitude", ctx);
    if (c.contains("max_magnitude"))
      cfg.coefficients.max_magnitude = get_real(c.at("max_magnitude"), "max_magnitude", ctx);
    if (!(cfg.coefficients.min_magnitude > 0.0))
      ctx.fail("min_magnitude", "min_magnitude must be > 0");
    if (cfg.coefficients.max_magnitude < cfg.coefficients.min_magnitude)
      ctx.fail("max_magnitude", "max_magnitude must be >= min_magnitude");
  }
  std::set<SolverKind> seen;
  for (const json& v : get_array(require(root, "solvers", ctx, "config"), "solvers", ctx)) {
    if (!v.is_string()) ctx.fail("solvers", "solver names must be strings");
    const auto name = v.get<std::string>();
    const auto kind = parse_solver_kind(name);
    if (!kind) ctx.fail(name, "unknown solver \"" + name + "\"");
    if (!seen.insert(*kind).second) ctx.fail(name, "duplicate solver \"" + name + "\"");
    cfg.solvers.push_back(*kind);
  }
  if (root.contains("solver_options")) parse_solver_options(root.at("solver_options"), cfg.solver_options, ctx);
  if (root.contains("rank_tolerance")) {
    cfg.rank_tolerance = get_real(root.at("rank_tolerance"), "rank_tolerance", ctx);
    if (!(cfg.rank_tolerance > 0.0 && cfg.rank_tolerance <= 1e-3))
      ctx.fail("rank_tolerance", "rank_tolerance must lie in (0, 1e-3]");
  }
  if (root.contains("budget")) cfg.budget = get_uint(root.at("budget"), "budget", ctx);
  return cfg;
}

ExperimentConfig load_experiment_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::IoFailure, "cannot open config " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  try {
    return parse_experiment_config(buf.str(), path.parent_path());
  } catch (const Error& e) {
    throw Error(e.code(), path.string() + ": " + e.what());
  }
}

std::vector<TrialSpec> expand_trials(const ExperimentConfig& config) {
  if (config.k.empty() || config.epsilon.empty() || config.delta_factors.empty())
    throw Error(Errc::ConfigInvalid, "empty trial grid");
  std::vector<TrialSpec> specs;
  specs.reserve(static_cast<std::size_t>(config.trials));
  const std::size_t ne = config.epsilon.size();
  const std::size_t nd = config.delta_factors.size();
  const std::size_t cells = config.k.size() * ne * nd;
  for (Index i = 0; i < config.trials; ++i) {
    const std::size_t cell = static_cast<std::size_t>(i) % cells;
    TrialSpec s;
    s.k = config.k[cell / (ne * nd)];
    s.epsilon = config.epsilon[(cell / nd) % ne];
    s.delta = config.delta_factors[cell % nd] * s.epsilon;
    s.dist = config.coefficients;
    s.solvers = config.solvers;
    s.config = config.solver_options;
    s.seed = derive_seed(config.master_seed, static_cast<std::uint64_t>(i));
    specs.push_back(std::move(s));
  }
  return specs;
}

std::vector<TrialResult> run_trials(const Dictionary& dict, const DictionaryCertificate& cert,
                                    std::span<const TrialSpec> specs, unsigned workers) {
  std::vector<TrialResult> results(specs.size());
  workers = std::max(1U, std::min<unsigned>(workers, static_cast<unsigned>(specs.size())));
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;

  auto work = [&] {
    for (std::size_t i = next++; i < specs.size(); i = next++) {
      try {
        results[i] = run_trial(dict, cert, specs[i], static_cast<Index>(i));
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        next = specs.size();
      }
    }
  };
  if (workers == 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(work);
    for (auto& t : pool) t.join();
  }
  if (failure) std::rethrow_exception(failure);
  return results;
}

ExperimentRun run_experiment(const ExperimentConfig& config, unsigned workers) {
  const Dictionary dict = build_dictionary(config.dictionary);
  for (Index k : config.k)
    if (k > dict.cols())
      throw Error(Errc::ConfigInvalid, "k=" + std::to_string(k) + " exceeds m=" + std::to_string(dict.cols()));
  ExperimentRun run;
  run.config = config;
  run.certificate = certify(dict, {config.rank_tolerance, config.budget});
  const auto specs = expand_trials(config);
  run.results = run_trials(dict, run.certificate, specs, workers);
  run.report = aggregate_report(run.results, run.certificate);
  return run;
}

}  // namespace sparsestab
