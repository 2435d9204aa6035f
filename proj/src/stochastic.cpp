#include "lobforge/stochastic.hpp"

#include <cmath>
#include <limits>
#include <string>

#include <gsl/gsl_errno.h>
#include <gsl/gsl_integration.h>

#include "gsl_quiet.hpp"
#include "lobforge/error.hpp"

namespace lobforge {

void validate(const SkewTParams& p) {
  const auto d = p.m.size();
  if (d < 1) throw Error(ErrorCode::InvalidConfig, "skew-t dimension must be >= 1");
  if (p.beta.size() != d || p.sigma.rows() != d || p.sigma.cols() != d)
    throw Error(ErrorCode::InvalidConfig, "skew-t parameter shapes disagree");
  if (!(p.nu > 0.0) || !std::isfinite(p.nu)) throw Error(ErrorCode::InvalidConfig, "nu must be positive");
}

Eigen::MatrixXd cholesky_lower(const Eigen::MatrixXd& a) {
  if (a.rows() != a.cols() || a.rows() == 0) throw Error(ErrorCode::NotPositiveDefinite, "matrix is not square");
  if (!a.allFinite()) throw Error(ErrorCode::NotPositiveDefinite, "matrix has non-finite entries");
  if (!a.isApprox(a.transpose(), 1e-9)) throw Error(ErrorCode::NotPositiveDefinite, "matrix is not symmetric");
  Eigen::LLT<Eigen::MatrixXd> llt(a);
  if (llt.info() != Eigen::Success) throw Error(ErrorCode::NotPositiveDefinite, "Cholesky factorisation failed");
  Eigen::MatrixXd l = llt.matrixL();
  for (Eigen::Index i = 0; i < l.rows(); ++i)
    if (!(l(i, i) > 0.0)) throw Error(ErrorCode::NotPositiveDefinite, "Cholesky factor has a zero pivot");
  return l;
}

Eigen::VectorXd skew_t_compose(const SkewTParams& p, double w, const Eigen::VectorXd& z) {
  return p.m + p.beta * w + std::sqrt(w) * z;
}

double sample_mixing_weight(double nu, Rng& rng) { return 1.0 / rng.gamma(nu / 2.0, 2.0 / nu); }

SkewTSampler::SkewTSampler(SkewTParams params) : params_(std::move(params)) {
  validate(params_);
  chol_ = cholesky_lower(params_.sigma);
}

Eigen::VectorXd SkewTSampler::sample(Rng& rng) const {
  const double w = sample_mixing_weight(params_.nu, rng);
  Eigen::VectorXd e(params_.dim());
  for (Eigen::Index i = 0; i < e.size(); ++i) e(i) = rng.normal();
  return skew_t_compose(params_, w, chol_ * e);
}

Eigen::VectorXd sample_skew_t(const SkewTParams& params, Rng& rng) { return SkewTSampler(params).sample(rng); }

double sample_skew_t_1d(double m, double beta, double nu, double sigma, Rng& rng) {
  if (!(nu > 0.0) || !(sigma > 0.0)) throw Error(ErrorCode::InvalidConfig, "univariate skew-t needs nu, sigma > 0");
  const double w = sample_mixing_weight(nu, rng);
  return m + beta * w + std::sqrt(w) * sigma * rng.normal();
}

namespace {

struct BesselArgs {
  double v;
  double z;
};

// e^z K_v(z) = int_0^inf cosh(v u) exp(-z (cosh u - 1)) du, split to avoid overflow.
double bessel_integrand(double u, void* params) {
  const auto* a = static_cast<const BesselArgs*>(params);
  const double damp = a->z * (std::cosh(u) - 1.0);
  return 0.5 * (std::exp(a->v * u - damp) + std::exp(-a->v * u - damp));
}

}  // namespace

double log_bessel_k(double v, double z) {
  if (!(z > 0.0)) throw Error(ErrorCode::InvalidConfig, "Bessel K needs z > 0");
  v = std::fabs(v);
  BesselArgs args{v, z};
  gsl_function f{&bessel_integrand, &args};
  constexpr std::size_t kLimit = 1000;
  gsl_integration_workspace* ws = gsl_integration_workspace_alloc(kLimit);
  double result = 0.0;
  double abserr = 0.0;
  detail::gsl_quiet();
  const int status = gsl_integration_qagiu(&f, 0.0, 0.0, 1e-10, kLimit, ws, &result, &abserr);
  gsl_integration_workspace_free(ws);
  if (status != GSL_SUCCESS && status != GSL_EROUND)
    throw Error(ErrorCode::InvalidConfig, std::string("Bessel quadrature failed: ") + gsl_strerror(status));
  return std::log(result) - z;
}

double skew_t_log_density(const Eigen::VectorXd& x, const SkewTParams& p) {
  validate(p);
  if (x.size() != p.m.size()) throw Error(ErrorCode::LengthMismatch, "point and location differ in dimension");
  const double d = static_cast<double>(p.dim());
  const double nu = p.nu;
  Eigen::LLT<Eigen::MatrixXd> llt(p.sigma);
  if (llt.info() != Eigen::Success) throw Error(ErrorCode::NotPositiveDefinite, "Cholesky factorisation failed");
  const Eigen::MatrixXd l = llt.matrixL();
  const double log_det = 2.0 * l.diagonal().array().log().sum();
  const Eigen::VectorXd dx = x - p.m;
  const Eigen::VectorXd sdx = llt.solve(dx);
  const double q = dx.dot(sdx);
  const double half = (nu + d) / 2.0;

  if (p.beta.isZero(0.0)) {
    return std::lgamma(half) - std::lgamma(nu / 2.0) - 0.5 * d * std::log(M_PI * nu) - 0.5 * log_det -
           half * std::log1p(q / nu);
  }
  const double b = p.beta.dot(llt.solve(p.beta));
  const double arg = std::sqrt((nu + q) * b);
  const double log_c = (1.0 - half) * std::log(2.0) - std::lgamma(nu / 2.0) - 0.5 * d * std::log(M_PI * nu) -
                       0.5 * log_det;
  return log_c + log_bessel_k(half, arg) + sdx.dot(p.beta) + half * std::log(arg) - half * std::log1p(q / nu);
}

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

Eigen::VectorXd intensity_transform(const Eigen::VectorXd& gamma, const Eigen::VectorXd& mu0) {
  if (gamma.size() != mu0.size()) throw Error(ErrorCode::LengthMismatch, "gamma and mu0 differ in length");
  Eigen::VectorXd out(gamma.size());
  for (Eigen::Index i = 0; i < gamma.size(); ++i) out(i) = mu0(i) * normal_cdf(gamma(i));
  return out;
}

std::vector<std::int64_t> sample_poisson_vector(const Eigen::VectorXd& lambda, Rng& rng) {
  std::vector<std::int64_t> out(static_cast<std::size_t>(lambda.size()));
  for (Eigen::Index i = 0; i < lambda.size(); ++i) out[static_cast<std::size_t>(i)] = rng.poisson(lambda(i));
  return out;
}

std::int64_t sample_truncated_poisson(double lambda, std::int64_t v, Rng& rng) {
  if (v <= 0 || !(lambda > 0.0)) return 0;
  if (static_cast<double>(v) >= lambda) {
    // At least about half the mass lies in the support; rejection is exact.
    for (;;) {
      const auto n = rng.poisson(lambda);
      if (n <= v) return n;
    }
  }
  // v < lambda: inverse CDF over the finite support, weights relative to the top term.
  std::vector<double> logw(static_cast<std::size_t>(v) + 1);
  for (std::int64_t j = 0; j <= v; ++j)
    logw[static_cast<std::size_t>(j)] = static_cast<double>(j) * std::log(lambda) - std::lgamma(static_cast<double>(j) + 1.0);
  const double top = logw.back();
  double total = 0.0;
  for (auto& lw : logw) {
    lw = std::exp(lw - top);
    total += lw;
  }
  const double u = rng.uniform() * total;
  double acc = 0.0;
  for (std::int64_t j = 0; j <= v; ++j) {
    acc += logw[static_cast<std::size_t>(j)];
    if (u < acc) return j;
  }
  return v;
}

void validate(const OrderSizeModel& model) {
  if (const auto* c = std::get_if<ConstantSize>(&model)) {
    if (c->c < 1) throw Error(ErrorCode::InvalidConfig, "constant order size must be >= 1");
    return;
  }
  const auto& g = std::get<GammaMixtureSize>(model);
  if (!(g.w >= 0.0 && g.w <= 1.0)) throw Error(ErrorCode::InvalidConfig, "mixture weight must lie in [0, 1]");
  if (!(g.kappa1 > 0.0 && g.theta1 > 0.0 && g.kappa2 > 0.0 && g.theta2 > 0.0))
    throw Error(ErrorCode::InvalidConfig, "gamma shapes and scales must be positive");
}

Shares sample_order_size(const OrderSizeModel& model, Rng& rng) {
  if (const auto* c = std::get_if<ConstantSize>(&model)) return c->c;
  const auto& g = std::get<GammaMixtureSize>(model);
  const bool first = rng.uniform() < g.w;
  const double x = first ? rng.gamma(g.kappa1, g.theta1) : rng.gamma(g.kappa2, g.theta2);
  return std::max<Shares>(1, static_cast<Shares>(std::ceil(x)));
}

double mean_order_size(const OrderSizeModel& model) {
  if (const auto* c = std::get_if<ConstantSize>(&model)) return static_cast<double>(c->c);
  const auto& g = std::get<GammaMixtureSize>(model);
  return g.w * g.kappa1 * g.theta1 + (1.0 - g.w) * g.kappa2 * g.theta2;
}

Eigen::MatrixXd sample_inverse_wishart(const Eigen::MatrixXd& psi, double dof, Rng& rng) {
  const Eigen::Index d = psi.rows();
  const Eigen::MatrixXd psi_l = cholesky_lower(psi);
  if (!(dof > static_cast<double>(d) - 1.0))
    throw Error(ErrorCode::InvalidConfig, "inverse-Wishart dof must exceed d - 1");
  const Eigen::MatrixXd identity = Eigen::MatrixXd::Identity(d, d);
  const Eigen::MatrixXd psi_inv = psi_l.triangularView<Eigen::Lower>().solve(identity);
  const Eigen::MatrixXd scale = psi_inv.transpose() * psi_inv;  // psi^{-1}
  const Eigen::MatrixXd l = cholesky_lower(0.5 * (scale + scale.transpose()));

  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(d, d);
  for (Eigen::Index i = 0; i < d; ++i) {
    a(i, i) = std::sqrt(rng.gamma((dof - static_cast<double>(i)) / 2.0, 2.0));
    for (Eigen::Index j = 0; j < i; ++j) a(i, j) = rng.normal();
  }
  const Eigen::MatrixXd la = l * a;
  const Eigen::MatrixXd la_inv = la.triangularView<Eigen::Lower>().solve(identity);
  Eigen::MatrixXd out = la_inv.transpose() * la_inv;
  return 0.5 * (out + out.transpose());
}

}  // namespace lobforge
