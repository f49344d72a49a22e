#include "sparsestab/certificate.hpp"

#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <limits>

#include "detail/json_writer.hpp"
#include "json.hpp"
#include "sparsestab/error.hpp"

namespace sparsestab {
namespace {

void require_budget(std::uint64_t needed, std::uint64_t budget, std::string_view what) {
  if (needed > budget) {
    throw Error(Errc::BudgetExceeded,
                std::string(what) + " needs " + std::to_string(needed) +
                    " subsets, budget is " + std::to_string(budget));
  }
}

// Largest integer strictly below t, tolerant to t landing a few ulps above an
// integer (e.g. 1/M evaluated for M = 1/3).
Index largest_integer_below(double t) {
  return static_cast<Index>(std::ceil(t - 1e-12)) - 1;
}

}  // namespace

double coherence(const Dictionary& dict) {
  const Index m = dict.cols();
  if (m < 2) return 0.0;
  const Eigen::MatrixXd gram = dict.matrix().transpose() * dict.matrix();
  double best = 0.0;
  for (Index j = 1; j < m; ++j)
    for (Index i = 0; i < j; ++i) best = std::max(best, std::abs(gram(i, j)));
  return best;
}

SubsetSpectrum subset_spectrum(const Dictionary& dict, const Support& subset) {
  if (subset.empty()) return {1.0, 1.0};
  const Eigen::MatrixXd sub = dict.submatrix(subset);
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(sub);
  const auto& sv = svd.singularValues();
  // A j-column matrix in n < j rows has j − n structurally zero singular values.
  const double smin = static_cast<Index>(subset.size()) > dict.rows() ? 0.0 : sv(sv.size() - 1);
  return {smin, sv(0)};
}

SparkResult spark_exact(const Dictionary& dict, double rank_tolerance, std::uint64_t budget) {
  if (!(rank_tolerance > 0.0) || rank_tolerance > 1e-3)
    throw Error(Errc::InvalidArgument, "rank tolerance must lie in (0, 1e-3]");
  const Index n = dict.rows();
  const Index m = dict.cols();
  const Index last = std::min(m, n);
  require_budget(subset_count(static_cast<std::uint64_t>(m), 2, static_cast<std::uint64_t>(last)),
                 budget, "spark enumeration");

  SparkResult result;
  for (Index j = 2; j <= last; ++j) {
    for_each_combination(m, j, [&](const Support& subset) {
      const auto spec = subset_spectrum(dict, subset);
      if (spec.sigma_min <= rank_tolerance * spec.sigma_max) {
        result.witness = subset;
        return false;
      }
      return true;
    });
    if (!result.witness.empty()) {
      result.spark = j;
      return result;
    }
  }
  if (m > n) {
    // Any n+1 vectors in n dimensions are dependent; report the first such set.
    result.spark = n + 1;
    result.witness = first_combination(n + 1);
  }
  return result;
}

Index kruskal_rank(const SparkResult& spark, Index m) noexcept {
  return spark.spark ? *spark.spark - 1 : m;
}

Index kruskal_rank(const Dictionary& dict, double rank_tolerance, std::uint64_t budget) {
  return kruskal_rank(spark_exact(dict, rank_tolerance, budget), dict.cols());
}

std::vector<double> sigma_min_profile(const Dictionary& dict, Index q, std::uint64_t budget) {
  const Index m = dict.cols();
  if (q < 0 || q > std::min(m, dict.rows()))
    throw Error(Errc::InvalidArgument, "profile length q=" + std::to_string(q) +
                                           " outside [0, min(n, m)]");
  require_budget(subset_count(static_cast<std::uint64_t>(m), 1, static_cast<std::uint64_t>(q)),
                 budget, "sigma_min profile");

  std::vector<double> profile;
  profile.reserve(static_cast<std::size_t>(q));
  for (Index j = 1; j <= q; ++j) {
    double best = std::numeric_limits<double>::infinity();
    for_each_combination(m, j, [&](const Support& subset) {
      best = std::min(best, subset_spectrum(dict, subset).sigma_min);
      return true;
    });
    profile.push_back(best);
  }
  return profile;
}

double DictionaryCertificate::sigma_min(Index j) const {
  if (j == 0) return 1.0;
  if (j < 0 || j > static_cast<Index>(sigma_profile.size()))
    throw Error(Errc::PreconditionViolated,
                "sigma_min(" + std::to_string(j) + ") requested but q=" +
                    std::to_string(sigma_profile.size()));
  return sigma_profile[static_cast<std::size_t>(j - 1)];
}

bool DictionaryCertificate::below_half_spark(Index k) const noexcept {
  return !spark || 2 * k < *spark;
}

DictionaryCertificate certify(const Dictionary& dict, const CertifyOptions& options) {
  DictionaryCertificate cert;
  cert.n = dict.rows();
  cert.m = dict.cols();
  cert.coherence = coherence(dict);
  auto spark = spark_exact(dict, options.rank_tolerance, options.budget);
  cert.spark = spark.spark;
  cert.spark_witness = std::move(spark.witness);
  cert.kruskal_rank = cert.spark ? *cert.spark - 1 : cert.m;
  cert.sigma_profile = sigma_min_profile(dict, cert.kruskal_rank, options.budget);
  cert.rank_tolerance = options.rank_tolerance;
  cert.dictionary_label = dict.label();
  return cert;
}

std::string to_json(const DictionaryCertificate& cert) {
  detail::JsonWriter w;
  w.begin_object();
  w.key("coherence").value(cert.coherence);
  w.key("spark");
  if (cert.spark)
    w.value(static_cast<long long>(*cert.spark));
  else
    w.value("none");
  w.key("kruskal_rank").value(static_cast<long long>(cert.kruskal_rank));
  w.key("sigma_profile").begin_array();
  for (double s : cert.sigma_profile) w.value(s);
  w.end_array();
  w.key("rank_tolerance").value(cert.rank_tolerance);
  w.key("dictionary_label").value(cert.dictionary_label);
  w.key("n").value(static_cast<long long>(cert.n));
  w.key("m").value(static_cast<long long>(cert.m));
  w.key("spark_witness").begin_array();
  for (Index i : cert.spark_witness) w.value(static_cast<long long>(i));
  w.end_array();
  w.end_object();
  return w.str();
}

DictionaryCertificate certificate_from_json(std::string_view text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(Errc::ParseFailure, std::string("certificate: ") + e.what());
  }
  try {
    DictionaryCertificate cert;
    cert.coherence = j.at("coherence").get<double>();
    const auto& spark = j.at("spark");
    if (spark.is_string()) {
      if (spark.get<std::string>() != "none")
        throw Error(Errc::ParseFailure, "certificate: spark must be an integer or \"none\"");
    } else {
      cert.spark = spark.get<Index>();
    }
    cert.kruskal_rank = j.at("kruskal_rank").get<Index>();
    cert.sigma_profile = j.at("sigma_profile").get<std::vector<double>>();
    cert.rank_tolerance = j.at("rank_tolerance").get<double>();
    cert.dictionary_label = j.at("dictionary_label").get<std::string>();
    cert.n = j.value("n", Index{0});
    cert.m = j.value("m", Index{0});
    if (j.contains("spark_witness")) cert.spark_witness = j["spark_witness"].get<Support>();
    if (static_cast<Index>(cert.sigma_profile.size()) != cert.kruskal_rank)
      throw Error(Errc::ParseFailure, "certificate: sigma_profile length differs from kruskal_rank");
    return cert;
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::ParseFailure, std::string("certificate: ") + e.what());
  }
}

Index uniqueness_threshold(Index spark) {
  if (spark < 2) throw Error(Errc::InvalidArgument, "spark must be >= 2");
  return (spark + 1) / 2 - 1;
}

CoherenceThresholds equivalence_threshold(double coherence) {
  if (!(coherence >= 0.0) || coherence > 1.0 + 1e-12)
    throw Error(Errc::InvalidArgument, "coherence must lie in [0, 1]");
  if (coherence == 0.0) return {};  // Unbounded
  const double t = 1.0 + 1.0 / coherence;
  return {largest_integer_below(t / 2.0), largest_integer_below(t / 4.0)};
}

namespace {
void validate(const BoundInputs& in) {
  if (in.k < 0) throw Error(Errc::InvalidArgument, "k must be non-negative");
  if (!std::isfinite(in.epsilon) || in.epsilon < 0.0 || !std::isfinite(in.delta) || in.delta < 0.0)
    throw Error(Errc::InvalidArgument, "epsilon and delta must be finite and non-negative");
}
}  // namespace

double donoho_stability_bound(const BoundInputs& in, double coherence) {
  validate(in);
  const double radicand = 1.0 - coherence * (2.0 * static_cast<double>(in.k) - 1.0);
  if (!(radicand > 0.0))
    throw Error(Errc::PreconditionViolated,
                "k=" + std::to_string(in.k) + " violates k < (1 + 1/M)/2");
  return (in.epsilon + in.delta) / std::sqrt(radicand);
}

double main_stability_bound(const BoundInputs& in, const DictionaryCertificate& cert) {
  validate(in);
  const Index ell = 2 * in.k;
  if (ell > cert.kruskal_rank)
    throw Error(Errc::PreconditionViolated, "2k=" + std::to_string(ell) + " exceeds q=" +
                                                std::to_string(cert.kruskal_rank));
  return (in.delta + in.epsilon) / cert.sigma_min(ell);
}

double looser_bound(const BoundInputs& in, const DictionaryCertificate& cert) {
  validate(in);
  return (in.delta + in.epsilon) / cert.sigma_min(cert.kruskal_rank);
}

BoundComparison compare_bounds(const BoundInputs& in, const DictionaryCertificate& cert,
                               double coherence) {
  BoundComparison out;
  out.main_bound = main_stability_bound(in, cert);
  const Index ell = 2 * in.k;
  try {
    out.donoho_bound = donoho_stability_bound(in, coherence);
  } catch (const Error& e) {
    if (e.code() != Errc::PreconditionViolated) throw;
  }
  const double ell_d = static_cast<double>(ell);
  if (ell >= 1 && (coherence == 0.0 || ell_d < 1.0 + 1.0 / coherence)) {
    const double s = cert.sigma_min(ell);
    out.tightness_checked = true;
    out.sigma_squared = s * s;
    out.coherence_side = 1.0 - coherence * (ell_d - 1.0);
    out.tightness_ok = out.sigma_squared >= out.coherence_side - 1e-9;
    out.equality = std::abs(out.sigma_squared - out.coherence_side) <= 1e-12;
  }
  return out;
}

std::vector<TightnessCase> coherence_tightness(const DictionaryCertificate& cert) {
  std::vector<TightnessCase> out;
  for (Index ell = 1; ell <= cert.kruskal_rank; ++ell) {
    const double ell_d = static_cast<double>(ell);
    if (cert.coherence > 0.0 && !(ell_d < 1.0 + 1.0 / cert.coherence)) break;
    TightnessCase c;
    c.ell = ell;
    const double s = cert.sigma_min(ell);
    c.sigma_squared = s * s;
    c.coherence_side = 1.0 - cert.coherence * (ell_d - 1.0);
    c.ok = c.sigma_squared >= c.coherence_side - 1e-9;
    c.equality = std::abs(c.sigma_squared - c.coherence_side) <= 1e-12;
    out.push_back(c);
  }
  return out;
}

}  // namespace sparsestab
