#include "lobforge/auxiliary.hpp"

#include <cmath>
#include <numeric>

#include <gsl/gsl_cdf.h>

#include "lobforge/error.hpp"
#include "lobforge/optimize.hpp"

namespace lobforge {

namespace {

constexpr double kLog2Pi = 1.8378770664093453;
constexpr double kEdge = 1.0 - 1e-6;
constexpr std::size_t kMinLength = 50;

double logistic(double x) { return 1.0 / (1.0 + std::exp(-x)); }
double logit(double p) { return std::log(p / (1.0 - p)); }

bool is_constant(const std::vector<double>& x) {
  for (double v : x)
    if (v != x.front()) return false;
  return true;
}

double sample_variance(const std::vector<double>& x) {
  const double n = static_cast<double>(x.size());
  const double mean = std::accumulate(x.begin(), x.end(), 0.0) / n;
  double ss = 0.0;
  for (double v : x) ss += (v - mean) * (v - mean);
  return ss / n;
}

// Identical series are merged and weighted by their share of all observations,
// so M copies of one series give exactly the single-series objective.
struct Group {
  const std::vector<double>* x;
  double weight;
};

std::vector<Group> group_series(const std::vector<std::vector<double>>& xs) {
  std::vector<const std::vector<double>*> uniq;
  std::vector<std::size_t> count;
  std::size_t total = 0;
  for (const auto& x : xs) {
    total += x.size();
    std::size_t k = 0;
    while (k < uniq.size() && *uniq[k] != x) ++k;
    if (k == uniq.size()) {
      uniq.push_back(&x);
      count.push_back(0);
    }
    ++count[k];
  }
  std::vector<Group> out;
  for (std::size_t k = 0; k < uniq.size(); ++k)
    out.push_back({uniq[k], static_cast<double>(count[k] * uniq[k]->size()) / static_cast<double>(total)});
  return out;
}

double mean_of(const std::vector<double>& x) {
  return std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(x.size());
}

std::size_t total_length(const std::vector<std::vector<double>>& xs) {
  std::size_t n = 0;
  for (const auto& x : xs) n += x.size();
  return n;
}

// --- GARCH(1,1) -----------------------------------------------------------

struct GarchPoint {
  double a0, a1, b1;
};

GarchPoint garch_decode(const Eigen::VectorXd& u, double scale) {
  const double p = kEdge * logistic(u(1));
  const double a1 = p * logistic(u(2));
  return {std::exp(u(0)) * scale, a1, p - a1};
}

Eigen::VectorXd garch_encode(double a0, double a1, double b1) {
  const double p = a1 + b1;
  return Eigen::Vector3d(std::log(a0), logit(p / kEdge), logit(a1 / p));
}

// Average over t of [log h_t + r_t^2 / h_t]; +inf if a variance turns non-positive.
double garch_core(const std::vector<double>& xs, double h1, double a0, double a1, double b1) {
  double total = 0.0;
  double h = h1;
  for (double r : xs) {
    if (!(h > 0.0)) return std::numeric_limits<double>::infinity();
    const double r2 = r * r;
    total += std::log(h) + r2 / h;
    h = a0 + a1 * r2 + b1 * h;
  }
  return total / static_cast<double>(xs.size());
}

// --- MA(1) with intercept ----------------------------------------------------

double ma_theta(double u) { return kEdge * std::tanh(u); }

double ma_css(const std::vector<Group>& gs, double c, double theta) {
  double out = 0.0;
  for (const auto& g : gs) {
    double e = 0.0;
    double s = 0.0;
    for (double x : *g.x) {
      e = x - c - theta * e;
      s += e * e;
    }
    out += g.weight * (s / static_cast<double>(g.x->size()));
  }
  return out;
}

// Innovations algorithm with unit innovation variance; sigma^2 is concentrated out.
// Returns the average negative log-likelihood per observation.
double ma_exact(const std::vector<Group>& gs, double c, double theta, double* sigma2_out = nullptr) {
  double sigma2 = 0.0;
  double logv = 0.0;
  const double t2 = theta * theta;
  for (const auto& g : gs) {
    const auto& d = *g.x;
    double v = 1.0 + t2;
    double pred = 0.0;
    double prev_resid = 0.0;
    double s = 0.0;
    double lv = 0.0;
    for (std::size_t t = 0; t < d.size(); ++t) {
      if (t > 0) {
        const double coef = theta / v;
        pred = coef * prev_resid;
        v = 1.0 + t2 - theta * coef;
      }
      const double resid = (d[t] - c) - pred;
      s += resid * resid / v;
      lv += std::log(v);
      prev_resid = resid;
    }
    const double n = static_cast<double>(d.size());
    sigma2 += g.weight * (s / n);
    logv += g.weight * (lv / n);
  }
  if (sigma2_out) *sigma2_out = sigma2;
  if (!(sigma2 > 0.0)) return std::numeric_limits<double>::infinity();
  return 0.5 * (kLog2Pi + std::log(sigma2) + 1.0) + 0.5 * logv;
}

}  // namespace

AuxSeries transform(const SnapshotSeries& series, int delta_minutes) {
  if (delta_minutes < 1) throw Error(ErrorCode::InvalidConfig, "delta_minutes must be >= 1");
  const double step_d = 60.0 * delta_minutes / series.interval_seconds;
  const auto step = static_cast<std::int64_t>(std::llround(step_d));
  if (step < 1 || std::fabs(step_d - static_cast<double>(step)) > 1e-9)
    throw Error(ErrorCode::InvalidConfig, "interval length must divide the return horizon");
  if (series.rows.empty()) throw Error(ErrorCode::DegenerateDay, "no snapshots");
  const auto T = static_cast<std::int64_t>(series.rows.size()) - 1;
  const std::int64_t marks = T / step;
  if (marks < 2) throw Error(ErrorCode::DegenerateDay, "fewer than two mid-price samples");
  for (std::int64_t j = 1; j <= marks; ++j)
    if (!series.rows[static_cast<std::size_t>(j * step)].two_sided())
      throw Error(ErrorCode::DegenerateDay, "interval " + std::to_string(j * step) + " lacks a two-sided book");

  AuxSeries out;
  auto mid = [&](std::int64_t t) {
    const auto& r = series.rows[static_cast<std::size_t>(t)];
    return 0.5 * static_cast<double>(*r.best_bid + *r.best_ask);
  };
  out.returns.reserve(static_cast<std::size_t>(marks - 1));
  for (std::int64_t j = 2; j <= marks; ++j) out.returns.push_back(std::log(mid(j * step) / mid((j - 1) * step)));

  const auto l_d = static_cast<std::size_t>(series.l_d);
  for (std::int64_t t = 1; t <= T; ++t) {
    const auto& r = series.rows[static_cast<std::size_t>(t)];
    double vb = 0.0;
    double va = 0.0;
    for (int s = 1; s <= series.l_p; ++s) {
      const auto i = static_cast<std::size_t>(s) + l_d - 1;
      vb += static_cast<double>(r.bid_v.at(i));
      va += static_cast<double>(r.ask_v.at(i));
    }
    out.vol_bid.push_back(vb);
    out.vol_ask.push_back(va);
  }
  return out;
}

GarchFit fit_garch11(const std::vector<double>& returns) { return fit_garch11_pooled({returns}); }

GarchFit fit_garch11_pooled(const std::vector<std::vector<double>>& returns) {
  if (returns.empty()) throw Error(ErrorCode::DegenerateSeries, "no return series");
  for (const auto& r : returns) {
    if (r.size() < kMinLength) throw Error(ErrorCode::DegenerateSeries, "return series shorter than 50");
    if (is_constant(r)) throw Error(ErrorCode::DegenerateSeries, "constant return series");
  }
  const auto groups = group_series(returns);
  double scale = 0.0;
  for (const auto& g : groups) {
    double sq = 0.0;
    for (double x : *g.x) sq += x * x;
    scale += g.weight * (sq / static_cast<double>(g.x->size()));
  }
  if (!(scale > 0.0) || !std::isfinite(scale)) throw Error(ErrorCode::DegenerateSeries, "returns have no variation");

  // Fit on returns standardised by their root mean square.
  const double sd = std::sqrt(scale);
  std::vector<std::vector<double>> z(groups.size());
  std::vector<double> h1(groups.size());
  for (std::size_t k = 0; k < groups.size(); ++k) {
    for (double x : *groups[k].x) z[k].push_back(x / sd);
    h1[k] = sample_variance(z[k]);
  }
  const ScalarObjective nll = [&](const Eigen::VectorXd& u) {
    const GarchPoint g = garch_decode(u, 1.0);
    double avg = 0.0;
    for (std::size_t k = 0; k < groups.size(); ++k) avg += groups[k].weight * garch_core(z[k], h1[k], g.a0, g.a1, g.b1);
    return 0.5 * (kLog2Pi + avg);
  };

  const OptimResult best = minimize(nll, garch_encode(0.9, 0.05, 0.05));
  if (!std::isfinite(best.f)) throw Error(ErrorCode::DegenerateSeries, "GARCH likelihood is not finite");

  GarchFit fit;
  const GarchPoint g = garch_decode(best.x, scale);
  fit.a0 = g.a0;
  fit.a1 = g.a1;
  fit.b1 = g.b1;
  fit.converged = best.converged;
  fit.at_boundary = g.a1 + g.b1 > 1.0 - 1e-5;

  const double n = static_cast<double>(total_length(returns));
  std::vector<double> h1_raw(groups.size());
  for (std::size_t k = 0; k < groups.size(); ++k) h1_raw[k] = sample_variance(*groups[k].x);
  const ScalarObjective total_nll = [&](const Eigen::VectorXd& p) {
    double avg = 0.0;
    for (std::size_t k = 0; k < groups.size(); ++k)
      avg += groups[k].weight * garch_core(*groups[k].x, h1_raw[k], p(0), p(1), p(2));
    return 0.5 * n * (kLog2Pi + avg);
  };
  const Eigen::Vector3d p(g.a0, g.a1, g.b1);
  fit.loglik = -total_nll(p);
  const Eigen::Vector3d steps(1e-3 * g.a0, 1e-4, 1e-4);
  const Eigen::Matrix3d h = numeric_hessian(total_nll, p, steps);
  Eigen::LLT<Eigen::Matrix3d> llt(h);
  if (llt.info() == Eigen::Success && h.allFinite()) {
    const Eigen::Matrix3d cov = llt.solve(Eigen::Matrix3d::Identity());
    fit.se = cov.diagonal().cwiseSqrt();
  }
  return fit;
}

Ma1Fit fit_arima011(const std::vector<double>& series) { return fit_arima011_pooled({series}); }

Ma1Fit fit_arima011_pooled(const std::vector<std::vector<double>>& series) {
  std::vector<std::vector<double>> diffs;
  diffs.reserve(series.size());
  for (const auto& x : series) {
    if (x.size() < kMinLength) throw Error(ErrorCode::DegenerateSeries, "series shorter than 50");
    std::vector<double> d(x.size() - 1);
    for (std::size_t t = 1; t < x.size(); ++t) d[t - 1] = x[t] - x[t - 1];
    diffs.push_back(std::move(d));
  }
  return fit_ma1_pooled(diffs);
}

Ma1Fit fit_ma1_pooled(const std::vector<std::vector<double>>& ds) {
  if (ds.empty()) throw Error(ErrorCode::DegenerateSeries, "no series");
  bool all_constant = true;
  for (const auto& d : ds) {
    if (d.size() < 2) throw Error(ErrorCode::DegenerateSeries, "series too short");
    if (!is_constant(d) || d.front() != ds.front().front()) all_constant = false;
  }
  if (all_constant) throw Error(ErrorCode::DegenerateSeries, "differences are constant");
  const auto groups = group_series(ds);
  double mean = 0.0;
  for (const auto& g : groups) mean += g.weight * mean_of(*g.x);

  // Moment start from the lag-one autocorrelation.
  double g0 = 0.0;
  double g1 = 0.0;
  for (const auto& g : groups) {
    const auto& d = *g.x;
    double s0 = 0.0;
    double s1 = 0.0;
    for (std::size_t t = 0; t < d.size(); ++t) {
      s0 += (d[t] - mean) * (d[t] - mean);
      if (t > 0) s1 += (d[t] - mean) * (d[t - 1] - mean);
    }
    g0 += g.weight * (s0 / static_cast<double>(d.size()));
    g1 += g.weight * (s1 / static_cast<double>(d.size()));
  }
  const double rho = g0 > 0.0 ? g1 / g0 : 0.0;
  double theta0 = 0.0;
  if (std::fabs(rho) >= 0.49) {
    theta0 = rho > 0 ? 0.9 : -0.9;
  } else if (rho != 0.0) {
    theta0 = (1.0 - std::sqrt(1.0 - 4.0 * rho * rho)) / (2.0 * rho);
  }
  const double cscale = g0 > 0.0 ? std::sqrt(g0) : 1.0;

  // Intercept is optimised in units of the series' spread.
  const ScalarObjective css = [&](const Eigen::VectorXd& u) {
    return ma_css(groups, u(0) * cscale, ma_theta(u(1))) / (cscale * cscale);
  };
  const Eigen::Vector2d x0(mean / cscale, std::atanh(theta0 / kEdge));
  const OptimResult r_css = minimize(css, x0);
  const ScalarObjective exact = [&](const Eigen::VectorXd& u) { return ma_exact(groups, u(0) * cscale, ma_theta(u(1))); };
  OptimResult r = minimize(exact, std::isfinite(r_css.f) ? r_css.x : Eigen::VectorXd(x0));
  if (!std::isfinite(r.f)) throw Error(ErrorCode::DegenerateSeries, "MA(1) likelihood is not finite");

  const double n = static_cast<double>(total_length(ds));
  Ma1Fit fit;
  fit.intercept = r.x(0) * cscale;
  fit.theta = ma_theta(r.x(1));
  double sigma2 = 0.0;
  const double avg = ma_exact(groups, fit.intercept, fit.theta, &sigma2);
  fit.log_sigma = 0.5 * std::log(sigma2);
  fit.loglik = -avg * n;
  fit.converged = r.converged;
  fit.at_boundary = std::fabs(fit.theta) > 1.0 - 1e-5;

  const ScalarObjective total = [&](const Eigen::VectorXd& p) { return n * ma_exact(groups, p(0), p(1)); };
  const Eigen::Vector2d p(fit.intercept, fit.theta);
  const Eigen::Vector2d steps(1e-4 * cscale, 1e-4);
  const Eigen::Matrix2d h = numeric_hessian(total, p, steps);
  Eigen::LLT<Eigen::Matrix2d> llt(h);
  if (llt.info() == Eigen::Success && h.allFinite()) {
    const Eigen::Matrix2d cov = llt.solve(Eigen::Matrix2d::Identity());
    fit.se_theta = std::sqrt(cov(1, 1));
  }
  fit.se_log_sigma = 1.0 / std::sqrt(2.0 * n);
  return fit;
}

Eigen::VectorXd AuxCoefficients::concatenated() const {
  Eigen::VectorXd v(7);
  v << beta1, beta2;
  return v;
}

AuxCoefficients fit_auxiliary(const std::vector<AuxSeries>& days) {
  if (days.empty()) throw Error(ErrorCode::DegenerateSeries, "no days to fit");
  std::vector<std::vector<double>> r;
  std::vector<std::vector<double>> vb;
  std::vector<std::vector<double>> va;
  for (const auto& d : days) {
    r.push_back(d.returns);
    vb.push_back(d.vol_bid);
    va.push_back(d.vol_ask);
  }
  const GarchFit g = fit_garch11_pooled(r);
  const Ma1Fit b = fit_arima011_pooled(vb);
  const Ma1Fit a = fit_arima011_pooled(va);
  AuxCoefficients c;
  c.beta1 = Eigen::Vector3d(g.a0, g.a1, g.b1);
  c.beta2 = Eigen::Vector4d(b.theta, b.log_sigma, a.theta, a.log_sigma);
  c.se1 = g.se;
  c.se2 = Eigen::Vector4d(b.se_theta, b.se_log_sigma, a.se_theta, a.se_log_sigma);
  c.converged = g.converged && b.converged && a.converged;
  return c;
}

AuxCoefficients fit_auxiliary(const std::vector<SnapshotSeries>& days) {
  std::vector<AuxSeries> aux;
  aux.reserve(days.size());
  for (const auto& d : days) aux.push_back(transform(d));
  return fit_auxiliary(aux);
}

AcfPacf acf_pacf(const std::vector<double>& x, int max_lag) {
  if (max_lag < 0 || x.size() <= static_cast<std::size_t>(max_lag) + 1)
    throw Error(ErrorCode::DegenerateSeries, "series too short for the requested lags");
  const double n = static_cast<double>(x.size());
  const double mean = std::accumulate(x.begin(), x.end(), 0.0) / n;
  double c0 = 0.0;
  for (double v : x) c0 += (v - mean) * (v - mean);
  if (!(c0 > 0.0)) throw Error(ErrorCode::DegenerateSeries, "series has zero variance");

  AcfPacf out;
  const auto K = static_cast<std::size_t>(max_lag);
  out.acf.assign(K + 1, 0.0);
  out.acf[0] = 1.0;
  for (std::size_t k = 1; k <= K; ++k) {
    double ck = 0.0;
    for (std::size_t t = k; t < x.size(); ++t) ck += (x[t] - mean) * (x[t - k] - mean);
    out.acf[k] = ck / c0;
  }

  // Durbin-Levinson recursion.
  out.pacf.assign(K + 1, 0.0);
  out.pacf[0] = 1.0;
  std::vector<double> phi;
  for (std::size_t k = 1; k <= K; ++k) {
    double num = out.acf[k];
    double den = 1.0;
    for (std::size_t j = 1; j < k; ++j) {
      num -= phi[j - 1] * out.acf[k - j];
      den -= phi[j - 1] * out.acf[j];
    }
    const double pkk = num / den;
    std::vector<double> next(k);
    for (std::size_t j = 1; j < k; ++j) next[j - 1] = phi[j - 1] - pkk * phi[k - j - 1];
    next[k - 1] = pkk;
    phi = std::move(next);
    out.pacf[k] = pkk;
  }
  return out;
}

ArchLm arch_lm_test(const std::vector<double>& returns, int lags) {
  if (lags < 1) throw Error(ErrorCode::InvalidConfig, "lags must be >= 1");
  const auto L = static_cast<std::size_t>(lags);
  if (returns.size() <= L + 10) throw Error(ErrorCode::DegenerateSeries, "series too short for the requested lags");
  std::vector<double> y2(returns.size());
  for (std::size_t t = 0; t < returns.size(); ++t) y2[t] = returns[t] * returns[t];
  if (is_constant(y2)) throw Error(ErrorCode::DegenerateSeries, "squared returns are constant");

  const auto n = static_cast<Eigen::Index>(returns.size() - L);
  Eigen::MatrixXd X(n, lags + 1);
  Eigen::VectorXd y(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const std::size_t t = static_cast<std::size_t>(i) + L;
    y(i) = y2[t];
    X(i, 0) = 1.0;
    for (std::size_t k = 1; k <= L; ++k) X(i, static_cast<Eigen::Index>(k)) = y2[t - k];
  }
  const Eigen::VectorXd coef = X.colPivHouseholderQr().solve(y);
  const Eigen::VectorXd resid = y - X * coef;
  const double sst = (y.array() - y.mean()).square().sum();
  if (!(sst > 0.0)) throw Error(ErrorCode::DegenerateSeries, "squared returns are constant");
  const double r2 = 1.0 - resid.squaredNorm() / sst;
  ArchLm out;
  out.lags = lags;
  out.statistic = static_cast<double>(n) * r2;
  out.p_value = gsl_cdf_chisq_Q(std::max(out.statistic, 0.0), static_cast<double>(lags));
  return out;
}

}  // namespace lobforge
