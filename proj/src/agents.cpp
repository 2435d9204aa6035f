#include "lobforge/agents.hpp"

#include <cmath>
#include <string>

#include "lobforge/error.hpp"

namespace lobforge {

Eigen::VectorXd AgentParams::lo_baselines() const {
  Eigen::VectorXd mu(levels());
  for (int i = 0; i < levels(); ++i) mu(i) = (i - l_d + 1) <= 0 ? mu0_lo_direct : mu0_lo_passive;
  return mu;
}

SkewTParams AgentParams::lo_skew_t() const { return SkewTParams{m_lo, skew_lo, nu, sigma}; }

void AgentParams::validate() const {
  if (l_p < 1 || l_d < 1) throw Error(ErrorCode::InvalidConfig, "l_p and l_d must be positive");
  const auto n = static_cast<Eigen::Index>(levels());
  auto positive = [](double x) { return x > 0.0 && std::isfinite(x); };
  if (!positive(mu0_lo_passive) || !positive(mu0_lo_direct) || !positive(mu0_mo))
    throw Error(ErrorCode::InvalidConfig, "baseline intensities must be positive");
  if (!(cancel_factor >= 0.0) || !std::isfinite(cancel_factor))
    throw Error(ErrorCode::InvalidConfig, "cancel_factor must be non-negative");
  if (skew_lo.size() != n || m_lo.size() != n)
    throw Error(ErrorCode::InvalidConfig, "skew_lo and m_lo need " + std::to_string(n) + " entries");
  if (sigma.rows() != n || sigma.cols() != n)
    throw Error(ErrorCode::InvalidConfig, "sigma must be " + std::to_string(n) + "x" + std::to_string(n));
  if (!positive(nu)) throw Error(ErrorCode::InvalidConfig, "nu must be positive");
  if (!positive(sigma_mo)) throw Error(ErrorCode::InvalidConfig, "sigma_mo must be positive");
  if (!std::isfinite(skew_mo) || !std::isfinite(m_mo) || !skew_lo.allFinite() || !m_lo.allFinite())
    throw Error(ErrorCode::InvalidConfig, "skew and location parameters must be finite");
  lobforge::validate(order_sizes);
  cholesky_lower(sigma);
}

AgentParams AgentParams::reference(double mu0_lo_passive, double mu0_lo_direct, double mu0_mo, double gamma0,
                                   double nu, double sigma_mo, const Eigen::MatrixXd& sigma, int l_p, int l_d) {
  AgentParams p;
  p.l_p = l_p;
  p.l_d = l_d;
  p.mu0_lo_passive = mu0_lo_passive;
  p.mu0_lo_direct = mu0_lo_direct;
  p.mu0_mo = mu0_mo;
  p.skew_lo = Eigen::VectorXd::Constant(l_p + l_d, gamma0);
  p.m_lo = Eigen::VectorXd::Zero(l_p + l_d);
  p.skew_mo = gamma0;
  p.nu = nu;
  p.sigma_mo = sigma_mo;
  p.sigma = sigma;
  return p;
}

AgentParams apply_quote_to_trade(const AgentParams& theta, double q) {
  if (!(q > 1.0)) throw Error(ErrorCode::InvalidRatio, "quote-to-trade ratio must exceed 1");
  AgentParams out = theta;
  out.cancel_factor = std::isinf(q) ? 1.0 : 1.0 - 1.0 / q;
  return out;
}

InitialBookSpec default_initial_book(const AgentParams& theta) {
  const auto size = std::max<Shares>(1, static_cast<Shares>(std::llround(mean_order_size(theta.order_sizes))));
  InitialBookSpec spec;
  spec.bid_levels.assign(static_cast<std::size_t>(theta.l_p), std::vector<Shares>(10, size));
  spec.ask_levels = spec.bid_levels;
  return spec;
}

BookState seed_initial_book(const InitialBookSpec& spec, double tick_size) {
  if (spec.best_bid >= spec.best_ask)
    throw Error(ErrorCode::CrossedSpec, "best bid " + std::to_string(spec.best_bid) + " is not below best ask " +
                                            std::to_string(spec.best_ask));
  BookState book(tick_size);
  const auto depth = std::max(spec.bid_levels.size(), spec.ask_levels.size());
  for (std::size_t i = 0; i < depth; ++i) {
    const auto off = static_cast<Tick>(i);
    if (i < spec.bid_levels.size())
      for (Shares s : spec.bid_levels[i]) book.add_resting(Side::Bid, spec.best_bid - off, s);
    if (i < spec.ask_levels.size())
      for (Shares s : spec.ask_levels[i]) book.add_resting(Side::Ask, spec.best_ask + off, s);
  }
  return book;
}

namespace {

std::vector<Shares> split_volume(Shares volume, Shares order_size) {
  std::vector<Shares> out;
  while (volume > 0) {
    const Shares s = std::min(volume, order_size);
    out.push_back(s);
    volume -= s;
  }
  return out;
}

void put_level(std::vector<std::vector<Shares>>& levels, Tick offset, std::vector<Shares> orders) {
  if (orders.empty()) return;
  if (offset < 0) throw Error(ErrorCode::CrossedSpec, "snapshot volume lies inside the spread");
  const auto i = static_cast<std::size_t>(offset);
  if (levels.size() <= i) levels.resize(i + 1);
  for (Shares s : orders) levels[i].push_back(s);
}

}  // namespace

InitialBookSpec spec_from_snapshot(const SnapshotRow& row, int l_p, int l_d, Shares order_size) {
  if (!row.two_sided()) throw Error(ErrorCode::EmptySide, "snapshot row " + std::to_string(row.t) + " is one-sided");
  if (order_size < 1) throw Error(ErrorCode::InvalidConfig, "order size must be >= 1");
  const ActiveWindow w{row.ref_bid, row.ref_ask, l_p, l_d};
  const auto n = static_cast<std::size_t>(w.levels());
  if (row.bid_v.size() != n || row.ask_v.size() != n)
    throw Error(ErrorCode::LengthMismatch, "snapshot row does not match the window size");
  InitialBookSpec spec;
  spec.best_bid = *row.best_bid;
  spec.best_ask = *row.best_ask;
  if (spec.best_bid >= spec.best_ask) throw Error(ErrorCode::CrossedSpec, "snapshot row is crossed");
  for (int s = w.min_level(); s <= w.max_level(); ++s) {
    put_level(spec.bid_levels, spec.best_bid - w.tick(Side::Bid, s), split_volume(row.bid_v[w.index(s)], order_size));
    put_level(spec.ask_levels, w.tick(Side::Ask, s) - spec.best_ask, split_volume(row.ask_v[w.index(s)], order_size));
  }
  const Tick bid_ext = std::min(w.tick(Side::Bid, l_p) - 1, spec.best_bid);
  const Tick ask_ext = std::max(w.tick(Side::Ask, l_p) + 1, spec.best_ask);
  put_level(spec.bid_levels, spec.best_bid - bid_ext, split_volume(row.bid_ext, order_size));
  put_level(spec.ask_levels, ask_ext - spec.best_ask, split_volume(row.ask_ext, order_size));
  return spec;
}

void SimConfig::validate() const {
  if (T < 1) throw Error(ErrorCode::InvalidConfig, "T must be >= 1");
  if (!(interval_seconds > 0.0)) throw Error(ErrorCode::InvalidConfig, "interval_seconds must be positive");
  if (!(tick_size > 0.0)) throw Error(ErrorCode::InvalidConfig, "tick_size must be positive");
  if (qtt_ratio && !(*qtt_ratio > 1.0)) throw Error(ErrorCode::InvalidRatio, "quote-to-trade ratio must exceed 1");
}

SimResult simulate(const AgentParams& theta, const SimConfig& config, const SimOptions& options) {
  theta.validate();
  config.validate();
  const InitialBookSpec spec = config.initial_book ? *config.initial_book : default_initial_book(theta);
  return simulate_from(theta, config, seed_initial_book(spec, config.tick_size), options);
}

SimResult simulate_from(const AgentParams& theta_in, const SimConfig& config, BookState book,
                        const SimOptions& options) {
  config.validate();
  const AgentParams theta = config.qtt_ratio ? apply_quote_to_trade(theta_in, *config.qtt_ratio) : theta_in;
  theta.validate();

  const int n = theta.levels();
  const auto nz = static_cast<std::size_t>(n);
  const SkewTSampler sampler(theta.lo_skew_t());
  const Eigen::VectorXd lo_mu = theta.lo_baselines();
  const Eigen::VectorXd c_mu = theta.cancel_baselines();
  Rng rng(config.seed);

  SimResult result;
  result.snapshots.interval_seconds = config.interval_seconds;
  result.snapshots.l_p = theta.l_p;
  result.snapshots.l_d = theta.l_d;
  result.snapshots.rows.reserve(static_cast<std::size_t>(config.T) + 1);

  ActiveWindow window = build_window(book, theta.l_p, theta.l_d);
  result.snapshots.rows.push_back(make_snapshot(book, window, 0, config.interval_seconds));

  const bool want_trace = options.keep_trace || static_cast<bool>(options.observer);
  for (std::int64_t t = 1; t <= config.T; ++t) {
    window = build_window(book, theta.l_p, theta.l_d, window);
    std::optional<BookState> before;
    if (options.observer) before = book;

    IntervalActivity act = IntervalActivity::empty(n);
    Ledger ledger;
    std::vector<AppliedEvent> trace;
    const ApplySinks sinks{&ledger, want_trace ? &trace : nullptr};

    // Limit orders.
    for (Side side : {Side::Ask, Side::Bid}) {
      auto& a = act.side(side);
      const Eigen::VectorXd lambda = intensity_transform(sampler.sample(rng), lo_mu);
      for (std::size_t i = 0; i < nz; ++i) {
        a.lo_intensity[i] = lambda(static_cast<Eigen::Index>(i));
        a.lo_counts[i] = rng.poisson(a.lo_intensity[i]);
        a.lo_sizes[i].reserve(static_cast<std::size_t>(a.lo_counts[i]));
        for (std::int64_t k = 0; k < a.lo_counts[i]; ++k) a.lo_sizes[i].push_back(sample_order_size(theta.order_sizes, rng));
      }
    }
    apply_passive_limits(book, window, act, sinks);
    apply_aggressive_limits(book, window, act, sinks);

    // Cancellations, capped by the orders resting after the limit-order phase.
    const WindowVolumes after_limits = window_volumes(book, window);
    for (Side side : {Side::Ask, Side::Bid}) {
      auto& a = act.side(side);
      const auto& resting = after_limits.side(side).orders;
      const Eigen::VectorXd lambda = intensity_transform(sampler.sample(rng), c_mu);
      for (std::size_t i = 0; i < nz; ++i) {
        a.cancel_intensity[i] = lambda(static_cast<Eigen::Index>(i));
        a.cancel_counts[i] = sample_truncated_poisson(a.cancel_intensity[i], resting[i], rng);
      }
    }
    apply_cancellations(book, window, act, sinks);

    // Market orders, capped by opposite resting orders on the passive levels.
    const WindowVolumes after_cancels = window_volumes(book, window);
    for (Side side : {Side::Bid, Side::Ask}) {
      auto& a = act.side(side);
      const auto& opp = after_cancels.side(opposite(side)).orders;
      std::int64_t cap = 0;
      for (int s = 1; s <= theta.l_p; ++s) cap += opp[window.index(s)];
      const double gamma = sample_skew_t_1d(theta.m_mo, theta.skew_mo, theta.nu, theta.sigma_mo, rng);
      a.mo_intensity = theta.mu0_mo * normal_cdf(gamma);
      a.mo_count = sample_truncated_poisson(a.mo_intensity, cap, rng);
      for (std::int64_t k = 0; k < a.mo_count; ++k) a.mo_sizes.push_back(sample_order_size(theta.order_sizes, rng));
    }
    apply_market_orders(book, window, act, sinks);

    SnapshotRow row = make_snapshot(book, window, t, config.interval_seconds);
    auto& tot = result.totals;
    for (Side side : {Side::Bid, Side::Ask}) {
      const auto& a = act.side(side);
      std::int64_t lo = 0;
      std::int64_t c = 0;
      for (std::size_t i = 0; i < nz; ++i) {
        const bool passive = window.level_at(i) >= 1;
        (passive ? tot.lo_orders_passive : tot.lo_orders_direct) += a.lo_counts[i];
        (passive ? tot.cancel_orders_passive : tot.cancel_orders_direct) += a.cancel_counts[i];
        lo += a.lo_counts[i];
        c += a.cancel_counts[i];
      }
      tot.mo_orders += a.mo_count;
      (side == Side::Bid ? row.lo_bid : row.lo_ask) = lo;
      (side == Side::Bid ? row.c_bid : row.c_ask) = c;
      (side == Side::Bid ? row.mo_bid : row.mo_ask) = a.mo_count;
    }
    for (Side side : {Side::Bid, Side::Ask})
      for (const auto& a_size : act.side(side).mo_sizes) tot.mo_shares_filled += a_size;
    tot.mo_shares_filled -= ledger.discarded_market;
    tot.discarded_shares += ledger.discarded_market + ledger.discarded_limit;
    result.snapshots.rows.push_back(std::move(row));

    if (options.observer)
      options.observer(IntervalRecord{t, window, *before, book, act, ledger, trace, after_limits});
    if (options.keep_activity) result.activity.push_back(std::move(act));
    if (options.keep_trace) result.traces.push_back(std::move(trace));
  }
  result.final_book = std::move(book);
  return result;
}

}  // namespace lobforge
