#pragma once

#include <limits>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "lobforge/snapshot.hpp"

namespace lobforge {

struct AuxSeries {
  std::vector<double> returns;  // log mid-price returns between minute marks
  std::vector<double> vol_bid;  // share volume on passive levels 1..l_p, one per interval
  std::vector<double> vol_ask;
};

/// Mid-prices sampled every delta_minutes at snapshot boundaries, plus per-interval
/// passive-level volumes from rows 1..T. Throws DegenerateDay if a sampled row lacks
/// a two-sided book, InvalidConfig if the interval does not divide the sampling step.
AuxSeries transform(const SnapshotSeries& series, int delta_minutes = 1);

struct GarchFit {
  double a0 = 0.0;
  double a1 = 0.0;
  double b1 = 0.0;
  double loglik = 0.0;  // total Gaussian log-likelihood on the original scale
  Eigen::Vector3d se = Eigen::Vector3d::Constant(std::numeric_limits<double>::quiet_NaN());
  bool converged = false;
  bool at_boundary = false;  // persistence pinned at the stationarity limit
};

/// Gaussian QMLE of r_t = sqrt(h_t) e_t, h_t = a0 + a1 r_{t-1}^2 + b1 h_{t-1}, h_1 the
/// sample variance. Throws DegenerateSeries for short or constant input.
GarchFit fit_garch11(const std::vector<double>& returns);
/// Shared coefficients over several independent series.
GarchFit fit_garch11_pooled(const std::vector<std::vector<double>>& returns);

struct Ma1Fit {
  double theta = 0.0;
  double log_sigma = 0.0;
  double intercept = 0.0;
  double loglik = 0.0;
  double se_theta = std::numeric_limits<double>::quiet_NaN();
  double se_log_sigma = std::numeric_limits<double>::quiet_NaN();
  bool converged = false;
  bool at_boundary = false;
};

/// ARIMA(0,1,1) with drift: difference once, then fit MA(1) with intercept by
/// conditional sum of squares refined by the exact Gaussian likelihood.
Ma1Fit fit_arima011(const std::vector<double>& series);
Ma1Fit fit_arima011_pooled(const std::vector<std::vector<double>>& series);
/// MA(1) with intercept on an already differenced series.
Ma1Fit fit_ma1_pooled(const std::vector<std::vector<double>>& increments);

struct AuxCoefficients {
  Eigen::Vector3d beta1 = Eigen::Vector3d::Zero();  // a0, a1, b1
  Eigen::Vector4d beta2 = Eigen::Vector4d::Zero();  // theta_bid, log_sigma_bid, theta_ask, log_sigma_ask
  Eigen::Vector3d se1 = Eigen::Vector3d::Zero();
  Eigen::Vector4d se2 = Eigen::Vector4d::Zero();
  bool converged = false;

  Eigen::VectorXd concatenated() const;
};

/// Pooled fit over M days (shared coefficients).
AuxCoefficients fit_auxiliary(const std::vector<AuxSeries>& days);
AuxCoefficients fit_auxiliary(const std::vector<SnapshotSeries>& days);

struct AcfPacf {
  std::vector<double> acf;   // lags 0..max_lag
  std::vector<double> pacf;  // lags 0..max_lag, pacf[0] = 1
};

AcfPacf acf_pacf(const std::vector<double>& series, int max_lag);

struct ArchLm {
  double statistic = 0.0;
  double p_value = 1.0;
  int lags = 0;
};

/// Regresses squared returns on `lags` of their own lags; statistic n R^2.
ArchLm arch_lm_test(const std::vector<double>& returns, int lags);

}  // namespace lobforge
