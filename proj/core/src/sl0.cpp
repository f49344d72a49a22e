#include <Eigen/QR>
#include <Eigen/SVD>

#include <algorithm>
#include <cmath>

#include "sparsestab/error.hpp"
#include "sparsestab/solvers.hpp"

namespace sparsestab {
namespace {

// Projection onto {s : ‖x − As‖₂ ≤ radius} in the Euclidean metric.
//
// With A = UΣVᵀ (thin SVD over the nonzero singular values) the projection of
// s₀ is s₀ − Aᵀ U diag(μ/(1 + μσᵢ²)) Uᵀ r₀, r₀ = As₀ − x, where μ ≥ 0 solves
// Σ (r₀ᵢ/(1 + μσᵢ²))² + ‖r₀⊥‖² = radius². radius = 0 is the affine projection
// s₀ − A⁺r₀ (μ → ∞).
class BallProjector {
 public:
  explicit BallProjector(const Eigen::MatrixXd& a) : a_(a) {
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const auto& sv = svd.singularValues();
    const double cutoff = 1e-12 * (sv.size() ? sv(0) : 0.0);
    Index r = 0;
    while (r < sv.size() && sv(r) > cutoff) ++r;
    u_ = svd.matrixU().leftCols(r);
    v_ = svd.matrixV().leftCols(r);
    sigma_ = sv.head(r);
  }

  /// Minimum-norm point of the set (the pseudo-inverse solution pulled toward 0).
  Eigen::VectorXd min_norm_point(const Eigen::VectorXd& x, double radius) const {
    return project(Eigen::VectorXd::Zero(a_.cols()), x, radius);
  }

  Eigen::VectorXd project(const Eigen::VectorXd& s, const Eigen::VectorXd& x, double radius) const {
    const Eigen::VectorXd r0 = a_ * s - x;
    if (r0.norm() <= radius) return s;
    const Eigen::VectorXd coeff = u_.transpose() * r0;
    const double perp2 = std::max(0.0, r0.squaredNorm() - coeff.squaredNorm());
    if (radius <= 0.0 || perp2 >= radius * radius) {
      // Affine projection (or the closest the range of A can get).
      return s - v_ * coeff.cwiseQuotient(sigma_);
    }
    auto residual2 = [&](double mu) {
      double acc = perp2;
      for (Index i = 0; i < coeff.size(); ++i) {
        const double t = coeff(i) / (1.0 + mu * sigma_(i) * sigma_(i));
        acc += t * t;
      }
      return acc;
    };
    const double target = radius * radius;
    double lo = 0.0, hi = 1.0;
    while (residual2(hi) > target && hi < 1e300) hi *= 2.0;
    for (int it = 0; it < 200 && hi - lo > 1e-15 * hi; ++it) {
      const double mid = 0.5 * (lo + hi);
      (residual2(mid) > target ? lo : hi) = mid;
    }
    const double mu = hi;  // residual2(hi) ≤ target keeps the point feasible
    Eigen::VectorXd weights(coeff.size());
    for (Index i = 0; i < coeff.size(); ++i)
      weights(i) = mu * sigma_(i) / (1.0 + mu * sigma_(i) * sigma_(i));
    return s - v_ * weights.cwiseProduct(coeff);
  }

 private:
  const Eigen::MatrixXd& a_;
  Eigen::MatrixXd u_;
  Eigen::MatrixXd v_;
  Eigen::VectorXd sigma_;
};

// Least squares on the nonzeros of t when that support is small and well
// conditioned; otherwise t unchanged.
Eigen::VectorXd refit_on_support(const Dictionary& dict, const Eigen::VectorXd& x,
                                 Eigen::VectorXd t) {
  Support support;
  for (Index i = 0; i < t.size(); ++i)
    if (t(i) != 0.0) support.push_back(i);
  if (support.empty() || static_cast<Index>(support.size()) > dict.rows()) return t;
  const Eigen::MatrixXd sub = dict.submatrix(support);
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(sub);
  qr.setThreshold(1e-10);
  if (qr.rank() < sub.cols()) return t;
  const Eigen::VectorXd c = qr.solve(x);
  Eigen::VectorXd out = Eigen::VectorXd::Zero(t.size());
  for (std::size_t i = 0; i < support.size(); ++i) out(support[i]) = c(static_cast<Index>(i));
  return out;
}

SparseSolution smoothed_l0(const Dictionary& dict, const Eigen::VectorXd& x, double delta,
                           const Sl0Options& opt, std::string name) {
  if (x.size() != dict.rows())
    throw Error(Errc::DimensionMismatch, name + ": signal length differs from dictionary rows");
  if (!x.allFinite()) throw Error(Errc::NonFinite, name + ": non-finite signal");
  if (!(delta >= 0.0) || !std::isfinite(delta))
    throw Error(Errc::InvalidArgument, name + ": delta must be finite and non-negative");
  if (!(opt.sigma_decay > 0.0 && opt.sigma_decay < 1.0) || !(opt.sigma_scale > 0.0) ||
      !(opt.sigma_floor > 0.0) || opt.inner_iterations < 1 || !(opt.step > 0.0) ||
      !(opt.zero_threshold > 0.0))
    throw Error(Errc::InvalidArgument, name + ": parameters out of range");

  const Eigen::MatrixXd& a = dict.matrix();
  const BallProjector projector(a);

  Eigen::VectorXd s = projector.min_norm_point(x, delta);
  const double sigma0 = opt.sigma_scale * (s.size() ? s.cwiseAbs().maxCoeff() : 0.0);
  const double xnorm = x.norm();
  const double stop = sigma0 * std::max(opt.sigma_floor, xnorm > 0.0 ? delta / xnorm : 0.0);

  int iterations = 0;
  double last_sigma = 0.0;
  for (double sigma = sigma0; sigma > stop && sigma > 0.0; sigma *= opt.sigma_decay) {
    last_sigma = sigma;
    const double inv2s2 = 1.0 / (2.0 * sigma * sigma);
    for (int l = 0; l < opt.inner_iterations; ++l) {
      // Ascent on Σ exp(−sᵢ²/2σ²) with the step scaled by σ².
      s -= opt.step * s.cwiseProduct((-s.array().square() * inv2s2).exp().matrix());
      s = projector.project(s, x, delta);
      ++iterations;
    }
  }

  // Entries below the last smoothing width are treated as zero by the
  // surrogate; try that support first, then plain η-truncation, each refit by
  // least squares. The first feasible candidate wins, else the raw iterate.
  const double feasible = delta + opt.feasibility_tolerance;
  Eigen::VectorXd t = s;
  for (double cut : {std::max(last_sigma, opt.zero_threshold), opt.zero_threshold}) {
    Eigen::VectorXd candidate = refit_on_support(dict, x, truncate(s, cut));
    if ((x - a * candidate).norm() <= feasible) {
      t = std::move(candidate);
      break;
    }
  }
  const double residual = (x - a * t).norm();
  if (residual > feasible)
    throw Error(Errc::NotConverged, name + ": final residual " + std::to_string(residual) +
                                        " exceeds " + std::to_string(feasible));
  return make_solution(dict, x, std::move(t), std::move(name), iterations, true);
}

}  // namespace

SparseSolution sl0(const Dictionary& dict, const Eigen::VectorXd& x, const Sl0Options& options) {
  return smoothed_l0(dict, x, 0.0, options, "sl0");
}

SparseSolution robust_sl0(const Dictionary& dict, const Eigen::VectorXd& x, double delta,
                          const Sl0Options& options) {
  return smoothed_l0(dict, x, delta, options, "robust_sl0");
}

}  // namespace sparsestab
