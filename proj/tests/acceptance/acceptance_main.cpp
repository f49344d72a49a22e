// Acceptance run: one PASS/FAIL line per criterion, nonzero exit on any FAIL.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "sparsestab/certificate.hpp"
#include "sparsestab/error.hpp"
#include "sparsestab/experiment.hpp"
#include "sparsestab/format.hpp"
#include "sparsestab/random.hpp"
#include "sparsestab/solvers.hpp"
#include "sparsestab/stability_lab.hpp"

using namespace sparsestab;

namespace {

// Pinned tolerances.
constexpr double kCoherenceTol = 1e-12;
constexpr double kProfileTol = 1e-12;
constexpr double kBoundTol = 1e-9;
constexpr double kOrderTol = 1e-12;
constexpr double kTightTol = 1e-9;
constexpr double kL1RelTol = 1e-6;

struct Outcome {
  bool pass = true;
  std::string detail;
};

void require(Outcome& o, bool cond, const std::string& what) {
  if (!cond && o.pass) {
    o.pass = false;
    o.detail = what;
  }
}

std::vector<TrialSpec> suite(const std::vector<SolverKind>& solvers) {
  ExperimentConfig cfg;
  cfg.dictionary = {"gaussian", 8, 12, 1, {}};
  cfg.trials = 500;
  cfg.master_seed = 20240101;
  cfg.k = {1, 2, 3, 4};
  cfg.epsilon = {0.0, 1e-3, 1e-2, 1e-1};
  cfg.delta_factors = {1.0, 2.0};
  cfg.solvers = solvers;
  return expand_trials(cfg);
}

Dictionary suite_dictionary() { return random_gaussian(8, 12, 1); }

// Certificate restricted to ℓ ≤ q_lower, for dictionaries whose full spark
// search is out of budget. spark ≥ 1 + 1/M makes ⌊1/M⌋ a valid lower bound on q.
DictionaryCertificate partial_certificate(const Dictionary& d) {
  DictionaryCertificate c;
  c.n = d.rows();
  c.m = d.cols();
  c.coherence = coherence(d);
  c.kruskal_rank = static_cast<Index>(std::floor(1.0 / c.coherence + 1e-9));
  c.sigma_profile = sigma_min_profile(d, c.kruskal_rank);
  c.spark = c.kruskal_rank + 1;  // lower bound; only used for gating below
  c.dictionary_label = d.label() + " (l <= " + std::to_string(c.kruskal_rank) + ")";
  return c;
}

// Tightness and bound order over one certificate; equality cases go to the log.
void check_tightness(Outcome& o, const DictionaryCertificate& cert, std::vector<std::string>& log) {
  for (const TightnessCase& t : coherence_tightness(cert)) {
    require(o, t.sigma_squared + cert.coherence * double(t.ell - 1) >= 1.0 - kTightTol,
            cert.dictionary_label + " ell=" + std::to_string(t.ell));
    // ℓ = 2 is an identity for every dictionary (σ_min(2)² = 1 − M); log it only for e1_e2_u.
    if (t.equality && (t.ell >= 3 || (t.ell == 2 && cert.dictionary_label == "e1_e2_u")))
      log.push_back(cert.dictionary_label + " ell=" + std::to_string(t.ell) +
                    " sigma^2=" + format_real(t.sigma_squared) + " 1-M(ell-1)=" + format_real(t.coherence_side));
  }
  for (Index k = 1; 2 * k <= cert.kruskal_rank; ++k) {
    const auto c = compare_bounds({k, 0.1, 0.1}, cert, cert.coherence);
    if (c.donoho_bound)
      require(o, c.main_bound <= *c.donoho_bound + kOrderTol,
              cert.dictionary_label + " bound order at k=" + std::to_string(k));
  }
}

Outcome criterion1() {
  Outcome o;
  const auto t = equivalence_threshold(1.0 / std::sqrt(500.0));
  require(o, t.equivalence && *t.equivalence == 11, "equivalence threshold != 11");
  require(o, t.p1_delta && *t.p1_delta == 5, "P1,delta threshold != 5");
  require(o, uniqueness_threshold(501) == 250, "uniqueness threshold != 250");
  o.detail = o.pass ? "equivalence=11 p1_delta=5 uniqueness=250" : o.detail;
  return o;
}

Outcome criterion2() {
  Outcome o;
  for (Index n : {4, 8, 16}) {
    const auto d = dirac_hadamard(n);
    require(o, std::abs(coherence(d) - 1.0 / std::sqrt(double(n))) <= kCoherenceTol,
            "coherence of dirac_hadamard(" + std::to_string(n) + ")");
  }
  const auto d4 = dirac_hadamard(4);
  const auto cert = certify(d4);
  const auto oracle_spark = oracle::spark(d4.matrix());
  require(o, oracle_spark && *oracle_spark == 4, "oracle spark of dirac_hadamard(4) != 4");
  require(o, cert.spark && *cert.spark == 4 && cert.kruskal_rank == 3, "library spark/q of dirac_hadamard(4)");
  if (o.pass) o.detail = "coherence 1/sqrt(n) for n=4,8,16; dirac_hadamard(4) spark=4 q=3";
  return o;
}

Outcome criterion3(std::vector<DictionaryCertificate>& certs) {
  Outcome o;
  int count = 0;
  for (int t = 0; t < 200; ++t) {
    const Index n = 6 + t % 3;
    const Index m = n + 1 + (t / 3) % 4;
    const auto d = random_gaussian(n, m, derive_seed(3, static_cast<std::uint64_t>(t)));
    const auto cert = certify(d);
    const std::string tag = "trial " + std::to_string(t);
    require(o, cert.spark && *cert.spark == n + 1, tag + ": spark != n+1");
    require(o, cert.kruskal_rank == n, tag + ": q != n");
    for (Index j = 1; j <= cert.kruskal_rank; ++j) {
      require(o, cert.sigma_min(j) > 0.0, tag + ": sigma_min not positive");
      require(o, cert.sigma_min(j) <= cert.sigma_min(j - 1) + kProfileTol, tag + ": profile increases");
    }
    certs.push_back(cert);
    ++count;
  }
  if (o.pass) o.detail = std::to_string(count) + " dictionaries, spark=n+1, profile positive and non-increasing";
  return o;
}

Outcome criterion4(const DictionaryCertificate& cert) {
  Outcome o;
  const auto d = suite_dictionary();
  const auto specs = suite({SolverKind::ExhaustiveP0Delta});
  const auto results = run_trials(d, cert, specs, 4);
  Index applicable = 0, chains = 0;
  for (const TrialResult& r : results) {
    const SolverRecord& rec = r.records.at(0);
    require(o, rec.status == "ok", "trial " + std::to_string(r.trial_id) + ": " + rec.status);
    if (!rec.solution) continue;
    if (rec.eq8.applicable) {
      ++applicable;
      require(o, rec.error <= rec.eq8.bound + kBoundTol, "trial " + std::to_string(r.trial_id) + ": bound violated");
    }
    if (rec.chain.applicable) {
      ++chains;
      require(o, rec.chain.ok(), "trial " + std::to_string(r.trial_id) + ": proof chain");
    }
  }
  require(o, applicable > 0, "no applicable trials");
  if (o.pass)
    o.detail = std::to_string(results.size()) + " trials, " + std::to_string(applicable) +
               " applicable, 0 violations, " + std::to_string(chains) + " chains ok";
  return o;
}

Outcome criterion5(const DictionaryCertificate& cert) {
  Outcome o;
  const auto d = suite_dictionary();
  const auto specs = suite({SolverKind::Omp, SolverKind::Sl0, SolverKind::RobustSl0, SolverKind::L1Delta});
  const auto results = run_trials(d, cert, specs, 4);
  Index applicable = 0, gated = 0;
  for (const TrialResult& r : results) {
    for (const SolverRecord& rec : r.records) {
      if (!rec.solution || !rec.eq14.applicable) {
        ++gated;
        continue;
      }
      ++applicable;
      require(o, rec.eq14.error <= rec.eq14.bound + kBoundTol,
              "trial " + std::to_string(r.trial_id) + " " + std::string(to_string(rec.solver)));
    }
  }
  require(o, applicable > 0, "no applicable outputs");
  if (o.pass)
    o.detail = std::to_string(applicable) + " gated outputs within bound, " + std::to_string(gated) +
               " not applicable";
  return o;
}

Outcome criterion6(const std::vector<DictionaryCertificate>& certs) {
  Outcome o;
  std::vector<std::string> log;
  for (const auto& c : certs) check_tightness(o, c, log);
  const auto e = certify(Dictionary::from_entries(
      {{1.0, 0.0, 1.0 / std::sqrt(2.0)}, {0.0, 1.0, 1.0 / std::sqrt(2.0)}}, "e1_e2_u"));
  check_tightness(o, e, log);
  const double expected = 1.0 - 1.0 / std::sqrt(2.0);
  require(o, std::abs(e.sigma_min(2) * e.sigma_min(2) - expected) <= kOrderTol, "e1_e2_u sigma_min(2)^2");
  for (const auto& line : log) std::printf("  equality: %s\n", line.c_str());
  if (o.pass) o.detail = std::to_string(certs.size() + 1) + " dictionaries, " + std::to_string(log.size()) +
                         " equality cases";
  return o;
}

Outcome criterion7() {
  Outcome o;
  int unique = 0;
  for (int t = 0; t < 100; ++t) {
    const auto d = random_gaussian(8, 12, derive_seed(7, static_cast<std::uint64_t>(t)));
    const auto cert = certify(d);
    const Index k = 1 + t % 4;  // spark = 9, so k ≤ 4 < 9/2
    const auto inst = make_instance(d, k, {}, 0.0, derive_seed(70, static_cast<std::uint64_t>(t)));
    const auto u = verify_uniqueness(d, inst.truth.coefficients, cert);
    require(o, u.below_half_spark && u.unique, "instance " + std::to_string(t) + " not unique");
    unique += u.unique;
  }
  const auto dh = dirac_hadamard(4);
  Eigen::VectorXd e13 = Eigen::VectorXd::Zero(8);
  e13(0) = 1.0;
  e13(2) = 1.0;
  const auto v = verify_uniqueness(dh, e13, certify(dh));
  require(o, !v.unique && v.representations.size() >= 2, "e1+e3 on dirac_hadamard(4) reported unique");
  if (o.pass)
    o.detail = std::to_string(unique) + "/100 unique; e1+e3 has " + std::to_string(v.representations.size()) +
               " 2-sparse representations";
  return o;
}

Outcome criterion8() {
  Outcome o;
  int matched = 0, equivalence_checked = 0;
  for (int t = 0; t < 100; ++t) {
    const bool small = t % 2 == 0;
    const Index n = small ? 4 : 6, m = small ? 6 : 9;
    const auto d = random_gaussian(n, m, derive_seed(8, static_cast<std::uint64_t>(t)));
    const Index k = 1 + t % 2;
    const auto inst = make_instance(d, k, {}, 0.0, derive_seed(80, static_cast<std::uint64_t>(t)));
    const auto& x = inst.noisy_signal;
    const auto l1 = l1_eq(d, x);
    const auto ref = l1_vertex_oracle(d, x);
    const double a = l1.coefficients.lpNorm<1>(), b = ref.coefficients.lpNorm<1>();
    const bool ok = std::abs(a - b) <= kL1RelTol * std::max(1.0, b);
    require(o, ok, "instance " + std::to_string(t) + ": l1 objective");
    matched += ok;
    const auto thr = equivalence_threshold(coherence(d));
    if (!thr.equivalence || k <= *thr.equivalence) {
      ++equivalence_checked;
      require(o, l1.support == exhaustive_p0(d, x).support, "instance " + std::to_string(t) + ": support");
    }
  }
  if (o.pass)
    o.detail = std::to_string(matched) + "/100 objectives match; " + std::to_string(equivalence_checked) +
               " supports equal exhaustive_p0";
  return o;
}

Outcome criterion9() {
  Outcome o;
  const auto cfg = load_experiment_config(SPARSESTAB_DEFAULT_CONFIG);
  const auto one = run_experiment(cfg, 1);
  const auto four = run_experiment(cfg, 4);
  const std::string a = to_csv(one.results), b = to_csv(four.results);
  require(o, a == b, "CSV differs between worker counts");
  require(o, to_json(one) == to_json(four), "JSON differs between worker counts");
  if (o.pass) o.detail = std::to_string(a.size()) + " CSV bytes identical at workers 1 and 4";
  return o;
}

}  // namespace

int main() {
  int failures = 0;
  auto report = [&](int id, const std::function<Outcome()>& fn) {
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = fn();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::printf("%s criterion %d (%.2fs): %s\n", o.pass ? "PASS" : "FAIL", id, secs, o.detail.c_str());
    std::fflush(stdout);
    failures += !o.pass;
  };

  const auto suite_cert = certify(suite_dictionary());
  std::vector<DictionaryCertificate> certs{certify(dirac_hadamard(4)), certify(dirac_hadamard(8)),
                                           partial_certificate(dirac_hadamard(16)), suite_cert};

  report(1, criterion1);
  report(2, criterion2);
  report(3, [&] { return criterion3(certs); });
  report(4, [&] { return criterion4(suite_cert); });
  report(5, [&] { return criterion5(suite_cert); });
  report(6, [&] { return criterion6(certs); });
  report(7, criterion7);
  report(8, criterion8);
  report(9, criterion9);
  return failures == 0 ? 0 : 1;
}
