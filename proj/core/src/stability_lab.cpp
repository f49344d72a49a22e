#include "sparsestab/stability_lab.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "sparsestab/error.hpp"
#include "sparsestab/random.hpp"

namespace sparsestab {
namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

bool is_p0_delta_minimizer(SolverKind kind) {
  return kind == SolverKind::ExhaustiveP0Delta || kind == SolverKind::ExhaustiveP0;
}

BoundCheck not_applicable(std::string reason) {
  BoundCheck c;
  c.bound = kNaN;
  c.reason = std::move(reason);
  return c;
}

BoundCheck evaluate(double error, double bound) {
  BoundCheck c;
  c.applicable = true;
  c.error = error;
  c.bound = bound;
  c.satisfied = error <= bound + kBoundTolerance;
  return c;
}

// Shared hypothesis gate for statements about P0,δ minimizers.
std::optional<BoundCheck> p0_delta_gate(const NoisyInstance& inst, SolverKind solver,
                                        double delta, const DictionaryCertificate& cert) {
  if (!is_p0_delta_minimizer(solver)) return not_applicable("solver is not a P0,delta minimizer");
  if (delta < inst.epsilon) return not_applicable("delta < epsilon");
  if (!cert.below_half_spark(inst.k()) || 2 * inst.k() > cert.kruskal_rank)
    return not_applicable("2k >= spark");
  return std::nullopt;
}

RatioStats ratio_stats(std::vector<double> ratios) {
  RatioStats s;
  s.count = static_cast<Index>(ratios.size());
  if (ratios.empty()) return s;
  std::sort(ratios.begin(), ratios.end());
  s.min = ratios.front();
  s.max = ratios.back();
  const std::size_t mid = ratios.size() / 2;
  s.median = ratios.size() % 2 ? ratios[mid] : 0.5 * (ratios[mid - 1] + ratios[mid]);
  return s;
}

}  // namespace

SparseSignal gen_sparse_signal(const Dictionary& dict, Index k, const CoefficientDistribution& dist,
                               std::uint64_t seed) {
  const Index m = dict.cols();
  if (k < 0 || k > m)
    throw Error(Errc::InvalidArgument, "k=" + std::to_string(k) + " outside [0, m]");
  if (!(dist.min_magnitude > 0.0) || !(dist.max_magnitude >= dist.min_magnitude) ||
      !std::isfinite(dist.max_magnitude))
    throw Error(Errc::InvalidArgument, "coefficient magnitudes need 0 < min <= max < inf");

  Rng rng(seed);
  // Partial Fisher–Yates: the first k slots are a uniform k-subset.
  std::vector<Index> perm(static_cast<std::size_t>(m));
  std::iota(perm.begin(), perm.end(), Index{0});
  for (Index i = 0; i < k; ++i) {
    std::uniform_int_distribution<Index> pick(i, m - 1);
    std::swap(perm[static_cast<std::size_t>(i)], perm[static_cast<std::size_t>(pick(rng))]);
  }
  SparseSignal out;
  out.support.assign(perm.begin(), perm.begin() + k);
  std::sort(out.support.begin(), out.support.end());
  out.coefficients = Eigen::VectorXd::Zero(m);
  for (Index i : out.support) {
    const double magnitude = uniform(rng, dist.min_magnitude, dist.max_magnitude);
    const bool negative = (rng() & 1U) != 0;
    out.coefficients(i) = negative ? -magnitude : magnitude;
  }
  out.clean_signal = dict.matrix() * out.coefficients;
  return out;
}

Eigen::VectorXd gen_noise(Index dimension, double epsilon, std::uint64_t seed) {
  if (dimension < 1) throw Error(Errc::InvalidArgument, "noise dimension must be >= 1");
  if (!(epsilon >= 0.0) || !std::isfinite(epsilon))
    throw Error(Errc::InvalidArgument, "epsilon must be finite and non-negative");
  Eigen::VectorXd g = Eigen::VectorXd::Zero(dimension);
  if (epsilon == 0.0) return g;
  Rng rng(seed);
  do {
    for (Index i = 0; i < dimension; ++i) g(i) = standard_normal(rng);
  } while (g.norm() == 0.0);
  return g * (epsilon / g.norm());
}

NoisyInstance make_instance(const Dictionary& dict, Index k, const CoefficientDistribution& dist,
                            double epsilon, std::uint64_t seed) {
  NoisyInstance inst;
  inst.truth = gen_sparse_signal(dict, k, dist, derive_seed(seed, 0));
  inst.noise = gen_noise(dict.rows(), epsilon, derive_seed(seed, 1));
  inst.noisy_signal = inst.truth.clean_signal + inst.noise;
  inst.epsilon = epsilon;
  inst.seed = seed;
  return inst;
}

BoundCheck verify_theorem3(const NoisyInstance& inst, const SparseSolution& solution,
                           SolverKind solver, double delta, const DictionaryCertificate& cert) {
  if (auto gate = p0_delta_gate(inst, solver, delta, cert)) return *gate;
  const double k = static_cast<double>(inst.k());
  if (!(1.0 - cert.coherence * (2.0 * k - 1.0) > 0.0))
    return not_applicable("k >= (1 + 1/M)/2");
  const double bound = donoho_stability_bound({inst.k(), inst.epsilon, delta}, cert.coherence);
  return evaluate((solution.coefficients - inst.truth.coefficients).norm(), bound);
}

BoundCheck verify_theorem4(const NoisyInstance& inst, const SparseSolution& solution,
                           SolverKind solver, double delta, const DictionaryCertificate& cert) {
  if (auto gate = p0_delta_gate(inst, solver, delta, cert)) return *gate;
  const double bound = main_stability_bound({inst.k(), inst.epsilon, delta}, cert);
  return evaluate((solution.coefficients - inst.truth.coefficients).norm(), bound);
}

BoundCheck verify_looser_bound(const NoisyInstance& inst, const SparseSolution& solution,
                               SolverKind solver, double delta, const DictionaryCertificate& cert) {
  if (auto gate = p0_delta_gate(inst, solver, delta, cert)) return *gate;
  const double bound = looser_bound({inst.k(), inst.epsilon, delta}, cert);
  return evaluate((solution.coefficients - inst.truth.coefficients).norm(), bound);
}

BoundCheck verify_theorem5(const Dictionary& dict, const NoisyInstance& inst,
                           const SparseSolution& solution, double delta, double eta,
                           const DictionaryCertificate& cert) {
  if (!(eta >= 0.0)) throw Error(Errc::InvalidArgument, "eta must be non-negative");
  if (!cert.below_half_spark(inst.k())) return not_applicable("2k >= spark");
  const Eigen::VectorXd estimate = truncate(solution.coefficients, eta);
  if (!cert.below_half_spark(l0_count(estimate, 0.0)))
    return not_applicable("2*l0(estimate) >= spark");
  // The gate is evaluated on the truncated estimate, which is what the bound is about.
  const double residual = (inst.noisy_signal - dict.matrix() * estimate).norm();
  if (residual > delta + kResidualGateSlack) return not_applicable("residual > delta");
  const double bound = looser_bound({inst.k(), inst.epsilon, delta}, cert);
  return evaluate((estimate - inst.truth.coefficients).norm(), bound);
}

DifferenceWitness make_difference_witness(const Dictionary& dict, const Eigen::VectorXd& truth,
                                          const Eigen::VectorXd& estimate) {
  if (truth.size() != dict.cols() || estimate.size() != dict.cols())
    throw Error(Errc::DimensionMismatch, "coefficient vectors must have length m");
  DifferenceWitness w;
  const Eigen::VectorXd diff = truth - estimate;
  for (Index i = 0; i < diff.size(); ++i)
    if (diff(i) != 0.0) w.diff_support.push_back(i);
  w.ell_actual = static_cast<Index>(w.diff_support.size());
  w.v.resize(w.ell_actual);
  for (Index i = 0; i < w.ell_actual; ++i) w.v(i) = diff(w.diff_support[static_cast<std::size_t>(i)]);
  w.b = dict.submatrix(w.diff_support);
  return w;
}

ChainCheck verify_proof_chain(const Dictionary& dict, const NoisyInstance& inst,
                              const SparseSolution& solution, double delta,
                              const DictionaryCertificate& cert) {
  ChainCheck c;
  const Eigen::VectorXd& s0 = inst.truth.coefficients;
  const Eigen::VectorXd& s = solution.coefficients;
  const DifferenceWitness w = make_difference_witness(dict, s0, s);
  c.ell_actual = w.ell_actual;
  if (w.ell_actual > cert.kruskal_rank) {
    c.reason = "|supp(s0 - s)| > q";
    return c;
  }
  c.applicable = true;
  const Eigen::MatrixXd& a = dict.matrix();

  const double residual = (inst.noisy_signal - a * s).norm();
  c.residual_gate = residual <= delta + kResidualGateSlack;
  c.clean_misfit = (inst.truth.clean_signal - a * s).norm();
  c.a_ok = !c.residual_gate || c.clean_misfit <= delta + inst.epsilon + kBoundTolerance;

  const Eigen::VectorXd bv = w.ell_actual ? Eigen::VectorXd(w.b * w.v)
                                          : Eigen::VectorXd::Zero(dict.rows()).eval();
  c.b_mismatch = (bv - a * (s0 - s)).norm();
  c.b_ok = c.b_mismatch <= kBoundTolerance;

  c.bv_norm = bv.norm();
  c.lower_bound = cert.sigma_min(w.ell_actual) * w.v.norm();
  c.c_ok = c.bv_norm >= c.lower_bound - kBoundTolerance;
  return c;
}

UniquenessCheck verify_uniqueness(const Dictionary& dict, const Eigen::VectorXd& truth,
                                  const DictionaryCertificate& cert, double zero_tol,
                                  std::uint64_t budget) {
  if (truth.size() != dict.cols())
    throw Error(Errc::DimensionMismatch, "coefficient vector must have length m");
  UniquenessCheck u;
  Support support;
  for (Index i = 0; i < truth.size(); ++i)
    if (truth(i) != 0.0) support.push_back(i);
  u.k = static_cast<Index>(support.size());
  u.below_half_spark = cert.below_half_spark(u.k);
  const Eigen::VectorXd x0 = dict.matrix() * truth;
  if (zero_tol < 0.0) zero_tol = 1e-10 * std::max(1.0, x0.norm());
  u.representations = enumerate_representations(dict, x0, u.k, zero_tol, budget);
  u.unique = u.representations.size() == 1 && u.representations.front() == support;
  return u;
}

TrialResult run_trial(const Dictionary& dict, const DictionaryCertificate& cert,
                      const TrialSpec& spec, Index trial_id) {
  if (!(spec.delta >= 0.0) || !std::isfinite(spec.delta))
    throw Error(Errc::InvalidArgument, "delta must be finite and non-negative");
  const NoisyInstance inst = make_instance(dict, spec.k, spec.dist, spec.epsilon, spec.seed);

  TrialResult out;
  out.trial_id = trial_id;
  out.n = dict.rows();
  out.m = dict.cols();
  out.k = spec.k;
  out.epsilon = spec.epsilon;
  out.delta = spec.delta;
  out.seed = spec.seed;
  out.truth_support = inst.truth.support;

  SolverConfig config = spec.config;
  config.delta = spec.delta;

  for (SolverKind kind : spec.solvers) {
    SolverRecord rec;
    rec.solver = kind;
    try {
      rec.solution = run_solver(kind, dict, inst.noisy_signal, config);
    } catch (const Error& e) {
      rec.status = std::string(to_string(e.code()));
      rec.message = e.what();
      out.records.push_back(std::move(rec));
      continue;
    }
    const SparseSolution& sol = *rec.solution;
    rec.error = (sol.coefficients - inst.truth.coefficients).norm();
    rec.residual = (inst.noisy_signal - dict.matrix() * sol.coefficients).norm();
    rec.l0 = l0_count(sol.coefficients, 0.0);
    rec.eq5 = verify_theorem3(inst, sol, kind, spec.delta, cert);
    rec.eq8 = verify_theorem4(inst, sol, kind, spec.delta, cert);
    rec.eq13 = verify_looser_bound(inst, sol, kind, spec.delta, cert);
    rec.eq14 = verify_theorem5(dict, inst, sol, spec.delta, config.zero_threshold, cert);
    rec.chain = verify_proof_chain(dict, inst, sol, spec.delta, cert);
    if (rec.eq8.applicable)
      rec.comparison = compare_bounds({spec.k, spec.epsilon, spec.delta}, cert, cert.coherence);
    out.records.push_back(std::move(rec));
  }
  return out;
}

Index ExperimentReport::total_violations() const noexcept {
  Index total = tightness_failures;
  for (const auto& s : solvers)
    total += s.eq5.violations + s.eq8.violations + s.eq13.violations + s.eq14.violations +
             s.chain.violations + s.bound_order_violations;
  return total;
}

ExperimentReport aggregate_report(std::span<const TrialResult> results,
                                  const DictionaryCertificate& cert) {
  if (results.empty()) throw Error(Errc::EmptyInput, "no trial results to aggregate");

  struct Acc {
    SolverAggregate agg;
    std::vector<double> r5, r8, r13, r14, rchain;
  };
  std::vector<Acc> accs;
  auto slot = [&](SolverKind kind) -> Acc& {
    for (auto& a : accs)
      if (a.agg.solver == kind) return a;
    accs.emplace_back();
    accs.back().agg.solver = kind;
    return accs.back();
  };
  auto tally = [](const BoundCheck& b, CheckTally& t, std::vector<double>& ratios) {
    if (!b.applicable) return;
    ++t.applicable;
    if (!b.satisfied) ++t.violations;
    if (b.bound > 0.0) ratios.push_back(b.error / b.bound);
  };

  ExperimentReport report;
  report.trials = static_cast<Index>(results.size());
  for (const TrialResult& trial : results) {
    for (const SolverRecord& rec : trial.records) {
      Acc& a = slot(rec.solver);
      ++a.agg.trials;
      if (!rec.solution) {
        ++a.agg.failures;
        continue;
      }
      tally(rec.eq5, a.agg.eq5, a.r5);
      tally(rec.eq8, a.agg.eq8, a.r8);
      tally(rec.eq13, a.agg.eq13, a.r13);
      tally(rec.eq14, a.agg.eq14, a.r14);
      if (rec.chain.applicable) {
        ++a.agg.chain.applicable;
        if (!rec.chain.ok()) ++a.agg.chain.violations;
        if (rec.chain.bv_norm > 0.0) a.rchain.push_back(rec.chain.lower_bound / rec.chain.bv_norm);
      }
      if (rec.comparison && rec.comparison->donoho_bound) {
        ++a.agg.bound_order_checked;
        if (rec.comparison->main_bound > *rec.comparison->donoho_bound + 1e-12)
          ++a.agg.bound_order_violations;
      }
    }
  }
  for (auto& a : accs) {
    a.agg.eq5.ratio = ratio_stats(std::move(a.r5));
    a.agg.eq8.ratio = ratio_stats(std::move(a.r8));
    a.agg.eq13.ratio = ratio_stats(std::move(a.r13));
    a.agg.eq14.ratio = ratio_stats(std::move(a.r14));
    a.agg.chain.ratio = ratio_stats(std::move(a.rchain));
    report.solvers.push_back(a.agg);
  }
  report.tightness = coherence_tightness(cert);
  for (const auto& t : report.tightness) {
    if (!t.ok) ++report.tightness_failures;
    if (t.equality) ++report.tightness_equalities;
  }
  return report;
}

}  // namespace sparsestab
