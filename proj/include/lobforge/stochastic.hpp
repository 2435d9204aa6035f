#pragma once

#include <cstdint>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "lobforge/book.hpp"
#include "lobforge/rng.hpp"

namespace lobforge {

/// Multivariate skew-t MSt(m, beta, nu, Sigma) in normal variance-mean mixture form.
struct SkewTParams {
  Eigen::VectorXd m;
  Eigen::VectorXd beta;
  double nu = 1.0;
  Eigen::MatrixXd sigma;

  int dim() const { return static_cast<int>(m.size()); }
};

/// Throws InvalidConfig on shape mismatches or nu <= 0.
void validate(const SkewTParams& params);

/// Lower Cholesky factor of an SPD matrix. Throws NotPositiveDefinite.
Eigen::MatrixXd cholesky_lower(const Eigen::MatrixXd& a);

/// Gamma = m + beta*w + sqrt(w)*z for a given mixing value w and Gaussian z ~ N(0, Sigma).
Eigen::VectorXd skew_t_compose(const SkewTParams& params, double w, const Eigen::VectorXd& z);

/// W ~ InverseGamma(nu/2, nu/2).
double sample_mixing_weight(double nu, Rng& rng);

/// Holds the Cholesky factor so repeated draws skip the factorisation.
class SkewTSampler {
 public:
  explicit SkewTSampler(SkewTParams params);

  Eigen::VectorXd sample(Rng& rng) const;
  const SkewTParams& params() const noexcept { return params_; }

 private:
  SkewTParams params_;
  Eigen::MatrixXd chol_;
};

Eigen::VectorXd sample_skew_t(const SkewTParams& params, Rng& rng);

/// Univariate draw; sigma is the scale (standard deviation) of the Gaussian part.
double sample_skew_t_1d(double m, double beta, double nu, double sigma, Rng& rng);

/// log K_v(z), modified Bessel function of the second kind, by adaptive quadrature
/// of its integral representation (relative tolerance 1e-10).
double log_bessel_k(double v, double z);

/// Log density of the generalized-hyperbolic skew-t; beta = 0 reduces to the Student-t.
double skew_t_log_density(const Eigen::VectorXd& x, const SkewTParams& params);

/// Standard normal CDF.
double normal_cdf(double x);

/// lambda_s = mu0_s * Phi(gamma_s).
Eigen::VectorXd intensity_transform(const Eigen::VectorXd& gamma, const Eigen::VectorXd& mu0);

std::vector<std::int64_t> sample_poisson_vector(const Eigen::VectorXd& lambda, Rng& rng);

/// Poisson(lambda) conditioned on {0, ..., v}.
std::int64_t sample_truncated_poisson(double lambda, std::int64_t v, Rng& rng);

struct ConstantSize {
  Shares c = 1;
};

/// w * Gamma(kappa1, theta1) + (1 - w) * Gamma(kappa2, theta2); shape/scale form.
struct GammaMixtureSize {
  double w = 0.5;
  double kappa1 = 1.0;
  double theta1 = 1.0;
  double kappa2 = 2.0;
  double theta2 = 1.0;
};

using OrderSizeModel = std::variant<ConstantSize, GammaMixtureSize>;

void validate(const OrderSizeModel& model);
/// Sizes from the Gamma mixture are rounded up, so every draw is at least 1.
Shares sample_order_size(const OrderSizeModel& model, Rng& rng);
/// Mean of the continuous model (before rounding).
double mean_order_size(const OrderSizeModel& model);

/// Draw from IW(psi, dof) through the Bartlett factor of W(psi^{-1}, dof).
/// Throws NotPositiveDefinite if psi is not SPD, InvalidConfig if dof <= d - 1.
Eigen::MatrixXd sample_inverse_wishart(const Eigen::MatrixXd& psi, double dof, Rng& rng);

}  // namespace lobforge
