#include <gtest/gtest.h>

#include <cmath>
#include <set>

#include "oracles.hpp"
#include "sparsestab/certificate.hpp"
#include "sparsestab/random.hpp"
#include "sparsestab/solvers.hpp"
#include "sparsestab/stability_lab.hpp"
#include "test_util.hpp"

using namespace sparsestab;

namespace {

SparseSolution solution_of(const Dictionary& d, const NoisyInstance& inst, Eigen::VectorXd s) {
  return make_solution(d, inst.noisy_signal, std::move(s), "manual", 0, true);
}

// Hand-built instance on a dictionary with an explicit truth vector.
NoisyInstance manual_instance(const Dictionary& d, Eigen::VectorXd truth, Eigen::VectorXd noise) {
  NoisyInstance inst;
  for (Index i = 0; i < truth.size(); ++i)
    if (truth(i) != 0.0) inst.truth.support.push_back(i);
  inst.truth.coefficients = truth;
  inst.truth.clean_signal = d.matrix() * truth;
  inst.noise = noise;
  inst.noisy_signal = inst.truth.clean_signal + noise;
  inst.epsilon = noise.norm();
  return inst;
}

}  // namespace

TEST(Generators, SparseSignalShape) {
  const auto d = random_gaussian(6, 10, 3);
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    const auto s = gen_sparse_signal(d, 3, {0.5, 1.5}, seed);
    ASSERT_EQ(s.support.size(), 3u);
    EXPECT_TRUE(std::is_sorted(s.support.begin(), s.support.end()));
    EXPECT_EQ(std::set<Index>(s.support.begin(), s.support.end()).size(), 3u);
    for (Index i = 0; i < 10; ++i) {
      const bool in = std::find(s.support.begin(), s.support.end(), i) != s.support.end();
      if (in) {
        EXPECT_GE(std::abs(s.coefficients(i)), 0.5);
        EXPECT_LE(std::abs(s.coefficients(i)), 1.5);
      } else {
        EXPECT_EQ(s.coefficients(i), 0.0);
      }
    }
    EXPECT_LT((s.clean_signal - d.matrix() * s.coefficients).norm(), 1e-14);
  }
  EXPECT_ERRC(gen_sparse_signal(d, 11, {}, 0), Errc::InvalidArgument);
  EXPECT_ERRC(gen_sparse_signal(d, 2, {0.0, 1.0}, 0), Errc::InvalidArgument);
  EXPECT_ERRC(gen_sparse_signal(d, 2, {2.0, 1.0}, 0), Errc::InvalidArgument);
}

TEST(Generators, SupportIsRoughlyUniform) {
  const auto d = random_gaussian(4, 6, 1);
  std::vector<int> hits(6, 0);
  const int draws = 6000;
  for (int t = 0; t < draws; ++t)
    for (Index i : gen_sparse_signal(d, 2, {}, static_cast<std::uint64_t>(t)).support) ++hits[i];
  // Each atom appears with probability 1/3.
  for (int h : hits) EXPECT_NEAR(h / double(draws), 1.0 / 3.0, 0.03);
}

TEST(Generators, NoiseHasExactNorm) {
  for (double eps : {1e-3, 0.1, 2.0}) {
    const auto n = gen_noise(8, eps, 11);
    EXPECT_NEAR(n.norm(), eps, 1e-15 * std::max(1.0, eps));
  }
  EXPECT_EQ(gen_noise(5, 0.0, 1), Eigen::VectorXd::Zero(5));
  EXPECT_ERRC(gen_noise(5, -1.0, 1), Errc::InvalidArgument);
  EXPECT_ERRC(gen_noise(0, 1.0, 1), Errc::InvalidArgument);
}

TEST(Generators, InstanceIsDeterministic) {
  const auto d = random_gaussian(8, 12, 1);
  const auto a = make_instance(d, 3, {}, 0.01, 42);
  const auto b = make_instance(d, 3, {}, 0.01, 42);
  const auto c = make_instance(d, 3, {}, 0.01, 43);
  EXPECT_EQ(a.noisy_signal, b.noisy_signal);
  EXPECT_NE(a.noisy_signal, c.noisy_signal);
  EXPECT_EQ(a.k(), 3);
  EXPECT_NEAR((a.noisy_signal - a.truth.clean_signal).norm(), 0.01, 1e-15);
}

TEST(SigmaBound, ExhaustiveMinimizerRespectsBound) {
  const auto d = random_gaussian(8, 12, 1);
  const auto cert = certify(d);
  int applicable = 0;
  for (std::uint64_t seed = 0; seed < 60; ++seed) {
    const Index k = 1 + static_cast<Index>(seed % 4);
    const double eps = 0.05;
    const auto inst = make_instance(d, k, {}, eps, seed);
    const auto s = exhaustive_p0_delta(d, inst.noisy_signal, eps);
    const auto c = verify_theorem4(inst, s, SolverKind::ExhaustiveP0Delta, eps, cert);
    ASSERT_TRUE(c.applicable) << c.reason;
    ++applicable;
    EXPECT_TRUE(c.satisfied) << c.error << " > " << c.bound;
    // The Gram-based oracle loses relative accuracy as σ_min shrinks.
    const double ref = 2 * eps / oracle::sigma_profile(d.matrix(), 2 * k).back();
    EXPECT_NEAR(c.bound, ref, 1e-6 * ref);
    const auto l = verify_looser_bound(inst, s, SolverKind::ExhaustiveP0Delta, eps, cert);
    EXPECT_GE(l.bound, c.bound - 1e-12);
  }
  EXPECT_EQ(applicable, 60);
}

TEST(SigmaBound, GateRejectsWrongHypotheses) {
  const auto d = random_gaussian(8, 12, 1);
  const auto cert = certify(d);
  const auto inst = make_instance(d, 2, {}, 0.1, 5);
  const auto s = omp(d, inst.noisy_signal, {.max_atoms = 2});
  EXPECT_FALSE(verify_theorem4(inst, s, SolverKind::Omp, 0.1, cert).applicable);
  EXPECT_FALSE(verify_theorem4(inst, s, SolverKind::ExhaustiveP0Delta, 0.05, cert).applicable);
  const auto big = make_instance(d, 5, {}, 0.1, 5);
  const auto c = verify_theorem4(big, s, SolverKind::ExhaustiveP0Delta, 0.1, cert);
  EXPECT_FALSE(c.applicable);
  EXPECT_TRUE(std::isnan(c.bound));
  EXPECT_FALSE(c.violated());
}

TEST(SigmaBound, ViolationIsReported) {
  const auto d = random_gaussian(8, 12, 1);
  const auto cert = certify(d);
  const auto inst = make_instance(d, 1, {}, 0.01, 9);
  Eigen::VectorXd wrong = inst.truth.coefficients;
  wrong(inst.truth.support[0]) += 10.0;
  const auto c = verify_theorem4(inst, solution_of(d, inst, wrong), SolverKind::ExhaustiveP0Delta, 0.01, cert);
  ASSERT_TRUE(c.applicable);
  EXPECT_FALSE(c.satisfied);
  EXPECT_TRUE(c.violated());
  EXPECT_NEAR(c.error, 10.0, 1e-12);
}

TEST(CoherenceBound, GateOnlyAdmitsSmallKForDiracHadamard) {
  const auto d = dirac_hadamard(8);
  const auto cert = certify(d);
  // M = 1/√8: k < (1 + √8)/2 ≈ 1.91, so only k = 1.
  for (Index k = 1; k <= 2; ++k) {
    const auto inst = make_instance(d, k, {}, 0.01, 3);
    const auto s = exhaustive_p0_delta(d, inst.noisy_signal, 0.01);
    const auto c = verify_theorem3(inst, s, SolverKind::ExhaustiveP0Delta, 0.01, cert);
    EXPECT_EQ(c.applicable, k == 1) << c.reason;
    if (c.applicable) {
      EXPECT_TRUE(c.satisfied);
      EXPECT_NEAR(c.bound, 0.02 / std::sqrt(1.0 - 1.0 / std::sqrt(8.0)), 1e-12);
    }
  }
}

TEST(ArbitraryEstimateBound, GatesAndBound) {
  const auto d = random_gaussian(8, 12, 1);
  const auto cert = certify(d);
  const double sq = oracle::sigma_profile(d.matrix(), 8).back();
  const auto inst = make_instance(d, 2, {}, 0.01, 4);
  const auto s = omp(d, inst.noisy_signal, {.max_atoms = 8, .residual_target = 0.01});

  const auto c = verify_theorem5(d, inst, s, 0.01, 1e-6, cert);
  ASSERT_TRUE(c.applicable) << c.reason;
  EXPECT_TRUE(c.satisfied);
  EXPECT_NEAR(c.bound, 0.02 / sq, 1e-6 * c.bound);

  // δ < ε is allowed as long as the residual gate holds.
  const auto tight = verify_theorem5(d, inst, s, s.residual_norm, 1e-6, cert);
  EXPECT_TRUE(tight.applicable) << tight.reason;

  // Residual gate fails.
  EXPECT_FALSE(verify_theorem5(d, inst, s, s.residual_norm * 0.5, 1e-6, cert).applicable);

  // Dense estimate fails the ℓ0 gate.
  const auto dense = solution_of(d, inst, Eigen::VectorXd::Constant(12, 0.1));
  EXPECT_FALSE(verify_theorem5(d, inst, dense, 100.0, 1e-6, cert).applicable);

  // k at half spark fails.
  const auto big = make_instance(d, 5, {}, 0.0, 4);
  EXPECT_FALSE(verify_theorem5(d, big, solution_of(d, big, big.truth.coefficients), 0.1, 1e-6, cert).applicable);
}

TEST(ArbitraryEstimateBound, TruncationAtEta) {
  const auto d = random_gaussian(8, 12, 1);
  const auto cert = certify(d);
  const auto inst = make_instance(d, 1, {}, 0.0, 2);
  Eigen::VectorXd s = inst.truth.coefficients;
  for (Index i = 0; i < 12; ++i)
    if (s(i) == 0.0) s(i) = 1e-9;  // dust below η
  const auto sol = solution_of(d, inst, s);
  const auto c = verify_theorem5(d, inst, sol, 1e-6, 1e-6, cert);
  ASSERT_TRUE(c.applicable) << c.reason;
  EXPECT_LT(c.error, 1e-15);
  EXPECT_FALSE(verify_theorem5(d, inst, sol, 1e-6, 1e-10, cert).applicable);
}

TEST(ProofChain, WitnessAndInequalities) {
  const auto d = random_gaussian(8, 12, 1);
  const auto cert = certify(d);
  const auto inst = make_instance(d, 3, {}, 0.05, 8);
  const auto s = exhaustive_p0_delta(d, inst.noisy_signal, 0.05);

  const auto w = make_difference_witness(d, inst.truth.coefficients, s.coefficients);
  EXPECT_EQ(w.ell_actual, static_cast<Index>(w.diff_support.size()));
  EXPECT_EQ(w.b.cols(), w.ell_actual);
  EXPECT_LT((w.b * w.v - d.matrix() * (inst.truth.coefficients - s.coefficients)).norm(), 1e-12);

  const auto c = verify_proof_chain(d, inst, s, 0.05, cert);
  ASSERT_TRUE(c.applicable) << c.reason;
  EXPECT_TRUE(c.residual_gate);
  EXPECT_TRUE(c.ok());
  EXPECT_LE(c.clean_misfit, 0.1 + 1e-9);
  EXPECT_GE(c.bv_norm, c.lower_bound - 1e-9);
  if (c.ell_actual > 0)
    EXPECT_NEAR(c.lower_bound, oracle::sigma_profile(d.matrix(), c.ell_actual).back() * w.v.norm(), 1e-9);
}

TEST(ProofChain, NotApplicableAboveKruskalRank) {
  const auto d = testutil::e1_e2_u();
  const auto cert = certify(d);
  const auto inst = manual_instance(d, Eigen::Vector3d(1, 0, 0), Eigen::Vector2d::Zero());
  const auto c = verify_proof_chain(d, inst, solution_of(d, inst, Eigen::Vector3d(0, 1, 1)), 0.0, cert);
  EXPECT_EQ(c.ell_actual, 3);
  EXPECT_FALSE(c.applicable);
  EXPECT_TRUE(c.ok());
}

TEST(Uniqueness, BelowHalfSparkAndCounterexample) {
  const auto g = random_gaussian(8, 12, 1);
  const auto cg = certify(g);
  const auto inst = make_instance(g, 4, {}, 0.0, 6);
  const auto u = verify_uniqueness(g, inst.truth.coefficients, cg);
  EXPECT_TRUE(u.below_half_spark);
  EXPECT_TRUE(u.unique);
  ASSERT_EQ(u.representations.size(), 1u);
  EXPECT_EQ(u.representations[0], inst.truth.support);

  const auto dh = dirac_hadamard(4);
  const auto cdh = certify(dh);
  const Eigen::VectorXd e13 = testutil::unit(8, 0) + testutil::unit(8, 2);
  const auto v = verify_uniqueness(dh, e13, cdh);
  EXPECT_FALSE(v.below_half_spark);
  EXPECT_FALSE(v.unique);
  EXPECT_EQ(v.representations.size(), 2u);
  const auto oracle_sets = oracle::exact_supports(dh.matrix(), dh.matrix() * e13, 2, 1e-10);
  EXPECT_EQ(oracle_sets.size(), v.representations.size());
}

TEST(Trial, RunTrialRecordsEveryCheck) {
  const auto d = random_gaussian(8, 12, 1);
  const auto cert = certify(d);
  TrialSpec spec;
  spec.k = 2;
  spec.epsilon = 0.01;
  spec.delta = 0.02;
  spec.solvers = {SolverKind::ExhaustiveP0Delta, SolverKind::Omp, SolverKind::L1Delta};
  spec.seed = 77;
  const auto r = run_trial(d, cert, spec, 5);
  EXPECT_EQ(r.trial_id, 5);
  EXPECT_EQ(r.k, 2);
  ASSERT_EQ(r.records.size(), 3u);
  const auto& ex = r.records[0];
  EXPECT_EQ(ex.status, "ok");
  EXPECT_TRUE(ex.eq8.applicable);
  EXPECT_TRUE(ex.eq13.applicable);
  EXPECT_TRUE(ex.comparison.has_value());
  EXPECT_FALSE(ex.has_violation());
  EXPECT_LE(ex.residual, 0.02 + 1e-12);
  EXPECT_FALSE(r.records[1].eq8.applicable);
  for (const auto& rec : r.records) EXPECT_FALSE(rec.has_violation()) << to_string(rec.solver);
  EXPECT_EQ(run_trial(d, cert, spec, 5).records[1].error, r.records[1].error);
}

TEST(Trial, SolverFailureIsRecorded) {
  const auto d = random_gaussian(8, 12, 1);
  const auto cert = certify(d);
  TrialSpec spec;
  spec.k = 3;
  spec.solvers = {SolverKind::ExhaustiveP0Delta};
  spec.config.budget = 1;
  const auto r = run_trial(d, cert, spec);
  ASSERT_EQ(r.records.size(), 1u);
  EXPECT_EQ(r.records[0].status, "BudgetExceeded");
  EXPECT_FALSE(r.records[0].solution.has_value());
  EXPECT_FALSE(r.records[0].has_violation());
}

TEST(Aggregate, CountsAndMedians) {
  const auto d = random_gaussian(8, 12, 1);
  const auto cert = certify(d);
  std::vector<TrialResult> results;
  for (Index i = 0; i < 8; ++i) {
    TrialSpec spec;
    spec.k = 1 + i % 3;
    spec.epsilon = 0.01;
    spec.delta = 0.01;
    spec.solvers = {SolverKind::Omp, SolverKind::ExhaustiveP0Delta};
    spec.seed = derive_seed(1, static_cast<std::uint64_t>(i));
    results.push_back(run_trial(d, cert, spec, i));
  }
  const auto rep = aggregate_report(results, cert);
  EXPECT_EQ(rep.trials, 8);
  ASSERT_EQ(rep.solvers.size(), 2u);
  EXPECT_EQ(rep.solvers[0].solver, SolverKind::Omp);
  EXPECT_EQ(rep.solvers[1].eq8.applicable, 8);
  EXPECT_EQ(rep.solvers[1].eq8.ratio.count, 8);
  EXPECT_LE(rep.solvers[1].eq8.ratio.min, rep.solvers[1].eq8.ratio.median);
  EXPECT_LE(rep.solvers[1].eq8.ratio.median, rep.solvers[1].eq8.ratio.max);
  EXPECT_LE(rep.solvers[1].eq8.ratio.max, 1.0);
  EXPECT_EQ(rep.total_violations(), 0);
  EXPECT_EQ(rep.tightness.size(), coherence_tightness(cert).size());
  EXPECT_ERRC(aggregate_report(std::span<const TrialResult>{}, cert), Errc::EmptyInput);
}
