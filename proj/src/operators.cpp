#include "lobforge/operators.hpp"

#include <cmath>

#include "lobforge/error.hpp"
#include "lobforge/stochastic.hpp"

namespace lobforge {

void Bounds::validate() const {
  if (lower.size() != upper.size() || static_cast<std::size_t>(lower.size()) != names.size())
    throw Error(ErrorCode::InvalidConfig, "bounds have inconsistent lengths");
  for (Eigen::Index i = 0; i < lower.size(); ++i) {
    if (!std::isfinite(lower(i)) || !std::isfinite(upper(i)) || !(lower(i) < upper(i)))
      throw Error(ErrorCode::InvalidConfig, "bounds for '" + names[static_cast<std::size_t>(i)] +
                                                "' need finite lower < upper");
  }
}

bool Bounds::contains(const Eigen::VectorXd& x) const {
  if (x.size() != lower.size()) return false;
  return (x.array() >= lower.array()).all() && (x.array() <= upper.array()).all();
}

Eigen::VectorXd Bounds::clamp(Eigen::VectorXd x) const {
  if (x.size() != lower.size()) throw Error(ErrorCode::LengthMismatch, "point and bounds differ in length");
  return x.cwiseMax(lower).cwiseMin(upper);
}

Eigen::VectorXd Bounds::sample_uniform(Rng& rng) const {
  Eigen::VectorXd x(lower.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) x(i) = lower(i) + rng.uniform() * (upper(i) - lower(i));
  return x;
}

Eigen::Index Bounds::find(const std::string& name) const {
  for (std::size_t i = 0; i < names.size(); ++i)
    if (names[i] == name) return static_cast<Eigen::Index>(i);
  return -1;
}

double sbx_alpha(double u, double eta) {
  const double e = 1.0 / (eta + 1.0);
  if (u <= 0.5) return std::pow(2.0 * u, e);
  return std::pow(1.0 / (2.0 * (1.0 - u)), e);
}

std::pair<double, double> sbx_blend(double x1, double x2, double alpha) {
  return {0.5 * ((1.0 - alpha) * x1 + (1.0 + alpha) * x2), 0.5 * ((1.0 + alpha) * x1 + (1.0 - alpha) * x2)};
}

std::pair<Eigen::VectorXd, Eigen::VectorXd> sbx_crossover(const Eigen::VectorXd& parent1,
                                                          const Eigen::VectorXd& parent2, const Bounds& bounds,
                                                          Rng& rng, const SbxOptions& options) {
  if (parent1.size() != parent2.size() || parent1.size() != bounds.dim())
    throw Error(ErrorCode::LengthMismatch, "parents and bounds differ in length");
  Eigen::VectorXd c1 = parent1;
  Eigen::VectorXd c2 = parent2;
  for (Eigen::Index k = 0; k < c1.size(); ++k) {
    if (rng.uniform() >= options.probability) continue;
    const auto [a, b] = sbx_blend(parent1(k), parent2(k), sbx_alpha(rng.uniform(), options.eta));
    c1(k) = a;
    c2(k) = b;
  }
  return {bounds.clamp(std::move(c1)), bounds.clamp(std::move(c2))};
}

double poly_delta(double u, double eta) {
  const double e = 1.0 / (eta + 1.0);
  if (u < 0.5) return std::pow(2.0 * u, e) - 1.0;
  return 1.0 - std::pow(2.0 * (1.0 - u), e);
}

Eigen::VectorXd polynomial_mutation(const Eigen::VectorXd& x, const Bounds& bounds, Rng& rng,
                                    const MutationOptions& options) {
  if (x.size() != bounds.dim()) throw Error(ErrorCode::LengthMismatch, "point and bounds differ in length");
  Eigen::VectorXd out = x;
  for (Eigen::Index k = 0; k < out.size(); ++k) {
    if (rng.uniform() >= options.probability) continue;
    out(k) += poly_delta(rng.uniform(), options.eta) * (bounds.upper(k) - bounds.lower(k));
  }
  return bounds.clamp(std::move(out));
}

CovarianceKernel::CovarianceKernel(Eigen::Index dim, KernelConfig config)
    : dim_(dim), config_(std::move(config)) {
  if (dim_ < 1) throw Error(ErrorCode::InvalidConfig, "covariance dimension must be >= 1");
  const double d = static_cast<double>(dim_);
  p1_ = config_.p1 > 0.0 ? config_.p1 : d + 10.0;
  p2_ = config_.p2 > 0.0 ? config_.p2 : d + 2.0;
  if (!(p1_ > d - 1.0) || !(p2_ > d - 1.0))
    throw Error(ErrorCode::NotPositiveDefinite, "inverse-Wishart dof must exceed d - 1");
  if (config_.match_mean && !(p1_ > d + 1.0))
    throw Error(ErrorCode::InvalidConfig, "matching the local mean needs p1 > d + 1");
  if (!(config_.w1 >= 0.0 && config_.w1 <= 1.0)) throw Error(ErrorCode::InvalidConfig, "w1 must lie in [0, 1]");
  if (!(config_.w > 0.0)) throw Error(ErrorCode::InvalidConfig, "w must be positive");
  psi_prior_ = config_.psi_prior.size() == 0 ? Eigen::MatrixXd(0.5 * Eigen::MatrixXd::Identity(dim_, dim_))
                                             : config_.psi_prior;
  if (psi_prior_.rows() != dim_) throw Error(ErrorCode::NotPositiveDefinite, "psi_prior has the wrong dimension");
  cholesky_lower(psi_prior_);
}

void CovarianceKernel::record_generation(std::vector<Entry> accepted) {
  if (accepted.empty()) throw Error(ErrorCode::InvalidConfig, "a generation needs at least one matrix");
  Eigen::MatrixXd mean = Eigen::MatrixXd::Zero(dim_, dim_);
  double total = 0.0;
  for (const auto& e : accepted) {
    if (e.sigma.rows() != dim_ || e.sigma.cols() != dim_)
      throw Error(ErrorCode::NotPositiveDefinite, "history matrix has the wrong dimension");
    if (e.rank < 1) throw Error(ErrorCode::InvalidConfig, "ranks start at 1");
    const double wi = 1.0 / static_cast<double>(e.rank);
    mean += wi * e.sigma;
    total += wi;
  }
  generation_means_.push_back(mean / total);
  history_.push_back(std::move(accepted));
}

Eigen::MatrixXd CovarianceKernel::psi_n() const {
  const std::size_t n = generation_means_.size();
  if (n == 0) return psi_prior_;
  Eigen::MatrixXd acc = Eigen::MatrixXd::Zero(dim_, dim_);
  double total = 0.0;
  for (std::size_t t = 1; t <= n; ++t) {
    const double power = config_.literal_weights ? static_cast<double>(t) : static_cast<double>(n - t);
    const double wt = std::pow(config_.w, power);
    acc += wt * generation_means_[t - 1];
    total += wt;
  }
  Eigen::MatrixXd out = acc / total;
  return 0.5 * (out + out.transpose());
}

Eigen::MatrixXd CovarianceKernel::sample_local(Rng& rng) const {
  Eigen::MatrixXd scale = psi_n();
  if (config_.match_mean) scale *= p1_ - static_cast<double>(dim_) - 1.0;
  return sample_inverse_wishart(scale, p1_, rng);
}

Eigen::MatrixXd CovarianceKernel::sample_diffuse(Rng& rng) const {
  return sample_inverse_wishart(psi_prior_, p2_, rng);
}

Eigen::MatrixXd CovarianceKernel::sample(Rng& rng) const {
  return rng.uniform() < config_.w1 ? sample_diffuse(rng) : sample_local(rng);
}

}  // namespace lobforge
