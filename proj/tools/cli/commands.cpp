#include "commands.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <sstream>
#include <vector>

#include "sparsestab/dictionary.hpp"
#include "sparsestab/error.hpp"
#include "sparsestab/experiment.hpp"
#include "sparsestab/format.hpp"
#include "sparsestab/solvers.hpp"

namespace sparsestab::cli {
namespace {

void write_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw Error(Errc::IoFailure, "cannot open " + path.string() + " for writing");
  f << content;
  f.close();
  if (!f) throw Error(Errc::IoFailure, "failed writing " + path.string());
}

void require_readable(const std::filesystem::path& path, const char* what) {
  std::ifstream f(path);
  if (!f) throw Error(Errc::IoFailure, std::string("cannot read ") + what + " " + path.string());
}

std::string format_or(const CommonOptions& common, const char* fallback) {
  const std::string f = common.format.empty() ? fallback : common.format;
  if (f != "json" && f != "csv")
    throw Error(Errc::InvalidArgument, "--format must be json or csv, got \"" + f + "\"");
  return f;
}

std::string optional_index(const std::optional<Index>& v) {
  return v ? std::to_string(*v) : "Unbounded";
}

}  // namespace

int cmd_analyze(const AnalyzeOptions& opt, const CommonOptions& common, std::ostream& out) {
  const int sources = !opt.matrix.empty() + opt.dirac_hadamard.has_value() + opt.gaussian_n.has_value();
  if (sources != 1)
    throw Error(Errc::InvalidArgument, "analyze needs exactly one of MATRIX, --dirac-hadamard, --gaussian");
  const std::string format = format_or(common, "json");
  const std::filesystem::path output = common.output.empty() ? std::filesystem::path("certificate." + format) : common.output;

  Dictionary dict = [&] {
    if (opt.dirac_hadamard) return dirac_hadamard(*opt.dirac_hadamard);
    if (opt.gaussian_n) return random_gaussian(*opt.gaussian_n, *opt.gaussian_m, common.seed.value_or(0));
    require_readable(opt.matrix, "matrix");
    return load(opt.matrix);
  }();

  const DictionaryCertificate cert = certify(dict, {opt.rank_tolerance, common.budget.value_or(kDefaultSubsetBudget)});
  if (format == "json") {
    write_file(output, to_json(cert));
  } else {
    std::ostringstream csv;
    csv << "j,sigma_min\n";
    for (std::size_t j = 0; j < cert.sigma_profile.size(); ++j)
      csv << j + 1 << ',' << format_real(cert.sigma_profile[j]) << '\n';
    write_file(output, csv.str());
  }

  const CoherenceThresholds th = equivalence_threshold(cert.coherence);
  out << "dictionary:            " << cert.dictionary_label << " (" << cert.n << " x " << cert.m << ")\n"
      << "coherence M:           " << format_real(cert.coherence) << '\n'
      << "spark:                 " << (cert.spark ? std::to_string(*cert.spark) : "none (no dependent subset)")
      << '\n'
      << "kruskal rank q:        " << cert.kruskal_rank << '\n'
      << "sigma_min(q):          " << format_real(cert.sigma_min(cert.kruskal_rank)) << '\n'
      << "uniqueness threshold:  "
      << (cert.spark ? std::to_string(uniqueness_threshold(*cert.spark)) : std::to_string(cert.m)) << '\n'
      << "equivalence threshold: " << optional_index(th.equivalence) << '\n'
      << "P1,delta threshold:    " << optional_index(th.p1_delta) << '\n'
      << "certificate written to " << output.string() << '\n';
  return 0;
}

int cmd_solve(const SolveOptions& opt, const CommonOptions& common, std::ostream& out) {
  const auto kind = parse_solver_kind(opt.solver);
  if (!kind) throw Error(Errc::InvalidArgument, "unknown solver \"" + opt.solver + "\"");
  if (opt.max_atoms && *opt.max_atoms < 1) throw Error(Errc::InvalidArgument, "--max-atoms must be >= 1");
  if (!(opt.delta >= 0.0)) throw Error(Errc::InvalidArgument, "--delta must be non-negative");
  if (!(opt.eta > 0.0)) throw Error(Errc::InvalidArgument, "--eta must be positive");
  if (opt.residual_target && !(*opt.residual_target >= 0.0))
    throw Error(Errc::InvalidArgument, "--residual-target must be non-negative");
  if (opt.max_support < 0) throw Error(Errc::InvalidArgument, "--max-support must be >= 0");
  const std::string format = format_or(common, "json");
  const std::filesystem::path output = common.output.empty() ? std::filesystem::path("solution." + format) : common.output;
  require_readable(opt.matrix, "matrix");
  require_readable(opt.signal, "signal");

  const Dictionary dict = load(opt.matrix);
  const Eigen::VectorXd x = read_vector(opt.signal);
  if (x.size() != dict.rows())
    throw Error(Errc::DimensionMismatch, "signal has length " + std::to_string(x.size()) +
                                             ", dictionary has " + std::to_string(dict.rows()) + " rows");

  SparseSolution sol;
  if (*kind == SolverKind::Omp) {
    OmpOptions o;
    o.max_atoms = opt.max_atoms.value_or(dict.rows());
    o.residual_target = opt.residual_target.value_or(std::max(opt.delta, 1e-12 * x.norm()));
    sol = omp(dict, x, o);
  } else {
    SolverConfig cfg;
    cfg.delta = opt.delta;
    cfg.max_support = opt.max_support;
    cfg.zero_threshold = opt.eta;
    cfg.budget = common.budget.value_or(cfg.budget);
    cfg.max_iterations = opt.max_iterations;
    sol = run_solver(*kind, dict, x, cfg);
  }

  if (format == "json") {
    write_file(output, to_json(sol) + "\n");
  } else {
    std::ostringstream csv;
    csv << "index,value\n";
    for (Index i : sol.support) csv << i << ',' << format_real(sol.coefficients(i)) << '\n';
    write_file(output, csv.str());
  }

  out << "solver:   " << sol.solver_name << '\n' << "support: ";
  for (Index i : sol.support) out << ' ' << i;
  out << "\nl0:       " << sol.support.size() << '\n'
      << "residual: " << format_real(sol.residual_norm) << '\n'
      << "solution written to " << output.string() << '\n';
  return 0;
}

int cmd_experiment(const ExperimentOptions& opt, const CommonOptions& common, std::ostream& out) {
  if (opt.config.empty()) throw Error(Errc::InvalidArgument, "experiment needs a config file");
  if (common.workers < 1) throw Error(Errc::InvalidArgument, "--workers must be >= 1");
  require_readable(opt.config, "config");
  ExperimentConfig cfg = load_experiment_config(opt.config);
  if (common.seed) cfg.master_seed = *common.seed;
  cfg.budget = common.budget.value_or(cfg.budget);

  const std::filesystem::path prefix = common.output.empty() ? std::filesystem::path("experiment") : common.output;
  const bool json = common.format.empty() || format_or(common, "json") == "json";
  const bool csv = common.format.empty() || format_or(common, "csv") == "csv";

  const ExperimentRun run = run_experiment(cfg, common.workers);
  if (json) write_file(prefix.string() + ".json", to_json(run));
  if (csv) write_file(prefix.string() + ".csv", to_csv(run.results));

  const ExperimentReport& r = run.report;
  out << "dictionary " << run.certificate.dictionary_label << ": M=" << format_real(run.certificate.coherence)
      << " spark=" << (run.certificate.spark ? std::to_string(*run.certificate.spark) : "none")
      << " q=" << run.certificate.kruskal_rank << '\n'
      << "trials: " << r.trials << '\n'
      << "solver                 eq5        eq8        eq13       eq14       chain      failures\n";
  auto cell = [](const CheckTally& t) {
    std::string s = std::to_string(t.violations) + "/" + std::to_string(t.applicable);
    s.resize(std::max<std::size_t>(s.size(), 10), ' ');
    return s + ' ';
  };
  for (const SolverAggregate& s : r.solvers) {
    std::string name(to_string(s.solver));
    name.resize(std::max<std::size_t>(name.size(), 22), ' ');
    out << name << ' ' << cell(s.eq5) << cell(s.eq8) << cell(s.eq13) << cell(s.eq14) << cell(s.chain)
        << s.failures << '\n';
  }
  out << "(violations/applicable)\n"
      << "tightness cases: " << r.tightness.size() << ", failures " << r.tightness_failures
      << ", equalities " << r.tightness_equalities << '\n'
      << "total violations: " << r.total_violations() << '\n';
  if (json) out << "wrote " << prefix.string() << ".json\n";
  if (csv) out << "wrote " << prefix.string() << ".csv\n";
  return r.total_violations() == 0 ? 0 : 1;
}

int cmd_thresholds(const ThresholdOptions& opt, const CommonOptions&, std::ostream& out) {
  std::optional<DictionaryCertificate> cert;
  if (!opt.certificate.empty()) {
    require_readable(opt.certificate, "certificate");
    std::ifstream f(opt.certificate, std::ios::binary);
    std::ostringstream buf;
    buf << f.rdbuf();
    cert = certificate_from_json(buf.str());
  }
  std::optional<double> coherence = opt.coherence;
  std::optional<Index> spark = opt.spark;
  if (cert) {
    if (!coherence) coherence = cert->coherence;
    if (!spark) spark = cert->spark;
  }
  if (!coherence && !spark && !cert)
    throw Error(Errc::InvalidArgument, "thresholds needs --coherence, --spark or --certificate");
  if (coherence && !(*coherence >= 0.0 && *coherence <= 1.0))
    throw Error(Errc::InvalidArgument, "--coherence must lie in [0, 1]");
  if (opt.k && !cert) throw Error(Errc::InvalidArgument, "--k needs --certificate");

  if (spark) out << "uniqueness threshold:  " << uniqueness_threshold(*spark) << '\n';
  else if (cert) out << "uniqueness threshold:  " << cert->m << " (no dependent subset)\n";
  if (coherence) {
    const CoherenceThresholds th = equivalence_threshold(*coherence);
    out << "equivalence threshold: " << optional_index(th.equivalence) << '\n'
        << "P1,delta threshold:    " << optional_index(th.p1_delta) << '\n';
  }
  if (opt.k) {
    const BoundInputs in{*opt.k, opt.epsilon, opt.delta};
    auto print = [&](const char* label, auto&& compute) {
      out << label;
      try {
        out << format_real(compute()) << '\n';
      } catch (const Error& e) {
        if (e.code() != Errc::PreconditionViolated) throw;
        out << "not applicable (" << e.what() << ")\n";
      }
    };
    print("coherence bound (eq5): ", [&] { return donoho_stability_bound(in, cert->coherence); });
    print("sigma bound (eq8):     ", [&] { return main_stability_bound(in, *cert); });
    print("looser bound (eq13):   ", [&] { return looser_bound(in, *cert); });
  }
  return 0;
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Sparse decomposition stability toolkit"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "sparsestab 0.1.0");

  CommonOptions common;
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--seed", common.seed, "Random seed (master seed for experiments)");
    sub->add_option("--budget", common.budget, "Subset enumeration budget")->check(CLI::PositiveNumber);
    sub->add_option("--output", common.output, "Output file (experiment: path prefix)");
    sub->add_option("--format", common.format, "json or csv");
    sub->add_option("--workers", common.workers, "Worker threads for experiments");
  };

  AnalyzeOptions analyze;
  auto* a = app.add_subcommand("analyze", "Certify a dictionary: coherence, spark, sigma_min profile");
  a->add_option("matrix", analyze.matrix, "Matrix file");
  a->add_option("--dirac-hadamard", analyze.dirac_hadamard, "Analyze [I | H/sqrt(n)] instead of a file");
  std::vector<Index> gaussian;
  a->add_option("--gaussian", gaussian, "Analyze a seeded Gaussian N M dictionary")->expected(2);
  a->add_option("--rank-tolerance", analyze.rank_tolerance, "Relative singular value cutoff");
  add_common(a);

  SolveOptions solve;
  auto* s = app.add_subcommand("solve", "Sparse decomposition of a signal");
  s->add_option("matrix", solve.matrix, "Matrix file")->required();
  s->add_option("signal", solve.signal, "Signal file (n x 1 or 1 x n)")->required();
  s->add_option("--solver", solve.solver,
                "exhaustive-p0, exhaustive-p0-delta, l1-eq, l1-delta, omp, sl0, robust-sl0")
      ->required();
  s->add_option("--delta", solve.delta, "Residual slack");
  s->add_option("--max-atoms", solve.max_atoms, "OMP atom cap");
  s->add_option("--residual-target", solve.residual_target, "OMP stopping residual");
  s->add_option("--eta", solve.eta, "Zero threshold for iterative solvers");
  s->add_option("--max-support", solve.max_support, "Exhaustive search support cap (0: n)");
  s->add_option("--max-iterations", solve.max_iterations, "Simplex/homotopy iteration cap");
  add_common(s);

  ExperimentOptions experiment;
  auto* e = app.add_subcommand("experiment", "Run a seeded stability experiment");
  e->add_option("config", experiment.config, "Experiment config (JSON)")->required();
  add_common(e);

  ThresholdOptions thresholds;
  auto* t = app.add_subcommand("thresholds", "Sparsity thresholds and stability bounds");
  t->add_option("--coherence", thresholds.coherence, "Mutual coherence M");
  t->add_option("--spark", thresholds.spark, "Spark of the dictionary");
  t->add_option("--certificate", thresholds.certificate, "Certificate JSON from analyze");
  t->add_option("--k", thresholds.k, "Sparsity level for bound values");
  t->add_option("--epsilon", thresholds.epsilon, "Noise level");
  t->add_option("--delta", thresholds.delta, "Residual slack");
  add_common(t);

  auto report = [&](std::string_view code, int status, const std::string& message) {
    std::string escaped;
    for (char c : message) {
      if (c == '"' || c == '\\') escaped += '\\';
      escaped += c == '\n' ? ' ' : c;
    }
    err << "error: code=" << code << " exit=" << status << " message=\"" << escaped << "\"\n";
    return status;
  };

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::CallForVersion& v) {
    out << v.what() << '\n';
    return 0;
  } catch (const CLI::ParseError& pe) {
    return report(to_string(Errc::InvalidArgument), exit_code(Errc::InvalidArgument), pe.what());
  }

  try {
    if (a->parsed()) {
      if (!gaussian.empty()) {
        analyze.gaussian_n = gaussian[0];
        analyze.gaussian_m = gaussian[1];
      }
      return cmd_analyze(analyze, common, out);
    }
    if (s->parsed()) return cmd_solve(solve, common, out);
    if (e->parsed()) return cmd_experiment(experiment, common, out);
    return cmd_thresholds(thresholds, common, out);
  } catch (const Error& ex) {
    return report(to_string(ex.code()), exit_code(ex.code()), ex.what());
  } catch (const std::exception& ex) {
    return report("Unknown", 99, ex.what());
  }
}

}  // namespace sparsestab::cli
