#include <cstdio>
#include <sstream>

#include "detail/json_writer.hpp"
#include "sparsestab/experiment.hpp"
#include "sparsestab/format.hpp"

namespace sparsestab {

std::string format_real(double value) {
  char buf[32];
  const int len = std::snprintf(buf, sizeof buf, "%.17g", value);
  return std::string(buf, static_cast<std::size_t>(len));
}

namespace {

using detail::JsonWriter;

void write_support(JsonWriter& w, const Support& s) {
  w.begin_array();
  for (Index i : s) w.value(static_cast<long long>(i));
  w.end_array();
}

void write_check(JsonWriter& w, const BoundCheck& c) {
  w.begin_object();
  w.key("applicable").value(c.applicable);
  if (c.applicable) {
    w.key("error").value(c.error);
    w.key("bound").value(c.bound);
    w.key("satisfied").value(c.satisfied);
  } else {
    w.key("reason").value(c.reason);
  }
  w.end_object();
}

void write_chain(JsonWriter& w, const ChainCheck& c) {
  w.begin_object();
  w.key("applicable").value(c.applicable);
  w.key("ell_actual").value(static_cast<long long>(c.ell_actual));
  if (c.applicable) {
    w.key("residual_gate").value(c.residual_gate);
    w.key("clean_misfit").value(c.clean_misfit);
    w.key("a_ok").value(c.a_ok);
    w.key("b_mismatch").value(c.b_mismatch);
    w.key("b_ok").value(c.b_ok);
    w.key("bv_norm").value(c.bv_norm);
    w.key("lower_bound").value(c.lower_bound);
    w.key("c_ok").value(c.c_ok);
  } else {
    w.key("reason").value(c.reason);
  }
  w.end_object();
}

void write_trial(JsonWriter& w, const TrialResult& t) {
  w.begin_object();
  w.key("trial_id").value(static_cast<long long>(t.trial_id));
  w.key("n").value(static_cast<long long>(t.n));
  w.key("m").value(static_cast<long long>(t.m));
  w.key("k").value(static_cast<long long>(t.k));
  w.key("epsilon").value(t.epsilon);
  w.key("delta").value(t.delta);
  w.key("seed").value(static_cast<unsigned long long>(t.seed));
  w.key("truth_support");
  write_support(w, t.truth_support);
  w.key("records").begin_array();
  for (const SolverRecord& r : t.records) {
    w.begin_object();
    w.key("solver").value(to_string(r.solver));
    w.key("status").value(r.status);
    if (!r.solution) {
      w.key("message").value(r.message);
      w.end_object();
      continue;
    }
    w.key("support");
    write_support(w, r.solution->support);
    w.key("coefficients").begin_array();
    for (Index i : r.solution->support) {
      w.begin_array();
      w.value(static_cast<long long>(i));
      w.value(r.solution->coefficients(i));
      w.end_array();
    }
    w.end_array();
    w.key("error").value(r.error);
    w.key("residual").value(r.residual);
    w.key("l0").value(static_cast<long long>(r.l0));
    w.key("eq5");
    write_check(w, r.eq5);
    w.key("eq8");
    write_check(w, r.eq8);
    w.key("eq13");
    write_check(w, r.eq13);
    w.key("eq14");
    write_check(w, r.eq14);
    w.key("chain");
    write_chain(w, r.chain);
    if (r.comparison) {
      const BoundComparison& c = *r.comparison;
      w.key("bound_comparison").begin_object();
      w.key("main_bound").value(c.main_bound);
      w.key("donoho_bound");
      if (c.donoho_bound) w.value(*c.donoho_bound);
      else w.null();
      w.key("tightness_checked").value(c.tightness_checked);
      w.key("tightness_ok").value(c.tightness_ok);
      w.key("equality").value(c.equality);
      w.end_object();
    }
    w.end_object();
  }
  w.end_array();
  w.end_object();
}

void write_tally(JsonWriter& w, const CheckTally& t) {
  w.begin_object();
  w.key("applicable").value(static_cast<long long>(t.applicable));
  w.key("violations").value(static_cast<long long>(t.violations));
  w.key("ratio").begin_object();
  w.key("count").value(static_cast<long long>(t.ratio.count));
  if (t.ratio.count > 0) {
    w.key("min").value(t.ratio.min);
    w.key("median").value(t.ratio.median);
    w.key("max").value(t.ratio.max);
  }
  w.end_object();
  w.end_object();
}

void write_report(JsonWriter& w, const ExperimentReport& r) {
  w.begin_object();
  w.key("trials").value(static_cast<long long>(r.trials));
  w.key("bound_tolerance").value(kBoundTolerance);
  w.key("total_violations").value(static_cast<long long>(r.total_violations()));
  w.key("solvers").begin_array();
  for (const SolverAggregate& s : r.solvers) {
    w.begin_object();
    w.key("solver").value(to_string(s.solver));
    w.key("trials").value(static_cast<long long>(s.trials));
    w.key("failures").value(static_cast<long long>(s.failures));
    w.key("eq5");
    write_tally(w, s.eq5);
    w.key("eq8");
    write_tally(w, s.eq8);
    w.key("eq13");
    write_tally(w, s.eq13);
    w.key("eq14");
    write_tally(w, s.eq14);
    w.key("chain");
    write_tally(w, s.chain);
    w.key("bound_order_checked").value(static_cast<long long>(s.bound_order_checked));
    w.key("bound_order_violations").value(static_cast<long long>(s.bound_order_violations));
    w.end_object();
  }
  w.end_array();
  w.key("tightness").begin_array();
  for (const TightnessCase& t : r.tightness) {
    w.begin_object();
    w.key("ell").value(static_cast<long long>(t.ell));
    w.key("sigma_squared").value(t.sigma_squared);
    w.key("coherence_side").value(t.coherence_side);
    w.key("ok").value(t.ok);
    w.key("equality").value(t.equality);
    w.end_object();
  }
  w.end_array();
  w.key("tightness_failures").value(static_cast<long long>(r.tightness_failures));
  w.key("tightness_equalities").value(static_cast<long long>(r.tightness_equalities));
  w.end_object();
}

std::string csv_real(const BoundCheck& c, double v) { return c.applicable ? format_real(v) : ""; }
std::string csv_flag(bool applicable, bool v) { return applicable ? (v ? "1" : "0") : ""; }

}  // namespace

std::string to_json(const TrialResult& result) {
  JsonWriter w;
  write_trial(w, result);
  return w.str() + "\n";
}

std::string to_json(const ExperimentReport& report) {
  JsonWriter w;
  write_report(w, report);
  return w.str() + "\n";
}

std::string to_json(const ExperimentRun& run) {
  const DictionaryCertificate& c = run.certificate;
  JsonWriter w;
  w.begin_object();
  w.key("dictionary").begin_object();
  w.key("label").value(c.dictionary_label);
  w.key("n").value(static_cast<long long>(c.n));
  w.key("m").value(static_cast<long long>(c.m));
  w.key("coherence").value(c.coherence);
  w.key("spark");
  if (c.spark) w.value(static_cast<long long>(*c.spark));
  else w.value("none");
  w.key("kruskal_rank").value(static_cast<long long>(c.kruskal_rank));
  w.key("sigma_profile").begin_array();
  for (double s : c.sigma_profile) w.value(s);
  w.end_array();
  w.end_object();
  w.key("master_seed").value(static_cast<unsigned long long>(run.config.master_seed));
  w.key("report");
  write_report(w, run.report);
  w.key("results").begin_array();
  for (const TrialResult& t : run.results) write_trial(w, t);
  w.end_array();
  w.end_object();
  return w.str() + "\n";
}

std::string to_csv(std::span<const TrialResult> results) {
  std::ostringstream out;
  out << "trial_id,solver,n,m,k,epsilon,delta,error,residual,l0,"
         "bound_eq5,bound_eq8,bound_eq13,bound_eq14,"
         "applicable_eq5,applicable_eq8,applicable_eq13,applicable_eq14,"
         "satisfied_eq5,satisfied_eq8,satisfied_eq13,satisfied_eq14,"
         "chain_applicable,chain_ok,status\n";
  for (const TrialResult& t : results) {
    for (const SolverRecord& r : t.records) {
      out << t.trial_id << ',' << to_string(r.solver) << ',' << t.n << ',' << t.m << ',' << t.k
          << ',' << format_real(t.epsilon) << ',' << format_real(t.delta) << ',';
      if (!r.solution) {
        out << ",,,,,,,,,,,,,,,,," << r.status << '\n';
        continue;
      }
      out << format_real(r.error) << ',' << format_real(r.residual) << ',' << r.l0 << ',';
      for (const BoundCheck* c : {&r.eq5, &r.eq8, &r.eq13, &r.eq14}) out << csv_real(*c, c->bound) << ',';
      for (const BoundCheck* c : {&r.eq5, &r.eq8, &r.eq13, &r.eq14}) out << (c->applicable ? 1 : 0) << ',';
      for (const BoundCheck* c : {&r.eq5, &r.eq8, &r.eq13, &r.eq14})
        out << csv_flag(c->applicable, c->satisfied) << ',';
      out << (r.chain.applicable ? 1 : 0) << ',' << csv_flag(r.chain.applicable, r.chain.ok()) << ','
          << r.status << '\n';
    }
  }
  return out.str();
}

}  // namespace sparsestab
