#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "lobforge/book.hpp"
#include "lobforge/snapshot.hpp"
#include "lobforge/stochastic.hpp"

namespace lobforge {

/// Parameters of both agents. Bid and ask share one parameter set; cancellations
/// reuse the limit-order distribution with baselines scaled by cancel_factor.
struct AgentParams {
  int l_p = 5;
  int l_d = 3;
  double mu0_lo_passive = 1.0;
  double mu0_lo_direct = 1.0;
  double mu0_mo = 1.0;
  double cancel_factor = 1.0;
  Eigen::VectorXd skew_lo;  // l_t, index s + l_d - 1
  Eigen::VectorXd m_lo;     // l_t
  double skew_mo = 0.0;
  double m_mo = 0.0;
  double nu = 10.0;
  double sigma_mo = 1.0;
  Eigen::MatrixXd sigma;  // l_t x l_t
  OrderSizeModel order_sizes = ConstantSize{1};

  int levels() const { return l_p + l_d; }
  /// Limit-order baselines per level: direct for s <= 0, passive for s >= 1.
  Eigen::VectorXd lo_baselines() const;
  Eigen::VectorXd cancel_baselines() const { return cancel_factor * lo_baselines(); }
  SkewTParams lo_skew_t() const;

  /// Throws InvalidConfig (or NotPositiveDefinite for Sigma).
  void validate() const;

  /// Reference model: zero locations, one skew gamma0 for every level and for
  /// market orders, constant unit order sizes.
  static AgentParams reference(double mu0_lo_passive, double mu0_lo_direct, double mu0_mo, double gamma0,
                               double nu, double sigma_mo, const Eigen::MatrixXd& sigma, int l_p = 5,
                               int l_d = 3);
};

/// Cancellation baselines become (1 - 1/q) times the limit-order baselines.
/// Throws InvalidRatio for q <= 1.
AgentParams apply_quote_to_trade(const AgentParams& theta, double q);

/// Explicit initial book: bid_levels[i] lists the orders at best_bid - i,
/// ask_levels[i] those at best_ask + i.
struct InitialBookSpec {
  Tick best_bid = 10000;
  Tick best_ask = 10002;
  std::vector<std::vector<Shares>> bid_levels;
  std::vector<std::vector<Shares>> ask_levels;
};

/// 10 orders of the model's mean size at each of l_p levels per side, spread 2.
InitialBookSpec default_initial_book(const AgentParams& theta);

/// Orders get sequence numbers level by level, bid before ask. Throws CrossedSpec.
BookState seed_initial_book(const InitialBookSpec& spec, double tick_size);

/// Rebuilds a book spec from a snapshot row: each level's volume is split into
/// orders of `order_size` (the last one takes the remainder); exterior volume is
/// placed just beyond the window.
InitialBookSpec spec_from_snapshot(const SnapshotRow& row, int l_p, int l_d, Shares order_size);

struct SimConfig {
  std::int64_t T = 3060;
  double interval_seconds = 10.0;
  double tick_size = 0.01;
  std::uint64_t seed = 1;
  std::optional<double> qtt_ratio;
  std::optional<InitialBookSpec> initial_book;

  void validate() const;
};

struct EventTotals {
  std::int64_t lo_orders_passive = 0;
  std::int64_t lo_orders_direct = 0;
  std::int64_t cancel_orders_passive = 0;
  std::int64_t cancel_orders_direct = 0;
  std::int64_t mo_orders = 0;
  Shares mo_shares_filled = 0;
  Shares discarded_shares = 0;

  std::int64_t lo_orders() const { return lo_orders_passive + lo_orders_direct; }
  std::int64_t cancel_orders() const { return cancel_orders_passive + cancel_orders_direct; }
  bool operator==(const EventTotals&) const = default;
};

/// Per-interval data handed to an observer while simulating.
struct IntervalRecord {
  std::int64_t t;
  const ActiveWindow& window;
  const BookState& before;
  const BookState& after;
  const IntervalActivity& activity;
  const Ledger& ledger;
  const std::vector<AppliedEvent>& trace;
  /// Resting orders per level after the limit-order phase (the cancellation caps).
  const WindowVolumes& after_limits;
};

struct SimOptions {
  bool keep_activity = false;
  bool keep_trace = false;
  std::function<void(const IntervalRecord&)> observer;
};

struct SimResult {
  SnapshotSeries snapshots;                           // T + 1 rows
  std::vector<IntervalActivity> activity;             // filled when keep_activity
  std::vector<std::vector<AppliedEvent>> traces;      // filled when keep_trace
  EventTotals totals;
  BookState final_book;
};

/// Runs T intervals of both agents. Deterministic given (theta, config).
SimResult simulate(const AgentParams& theta, const SimConfig& config, const SimOptions& options = {});

/// Same, starting from an explicit book.
SimResult simulate_from(const AgentParams& theta, const SimConfig& config, BookState book,
                        const SimOptions& options = {});

}  // namespace lobforge
