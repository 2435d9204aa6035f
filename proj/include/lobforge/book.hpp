#pragma once

#include <cstddef>
#include <cstdint>
#include <deque>
#include <map>
#include <optional>
#include <string_view>
#include <vector>

namespace lobforge {

using Tick = std::int64_t;
using Shares = std::int64_t;

enum class Side : std::uint8_t { Bid, Ask };

constexpr Side opposite(Side side) noexcept { return side == Side::Bid ? Side::Ask : Side::Bid; }
std::string_view to_string(Side side) noexcept;

struct Order {
  Shares size = 0;
  std::uint64_t seq = 0;  // time priority, unique within a book

  bool operator==(const Order&) const = default;
};

using OrderQueue = std::deque<Order>;
using Ladder = std::map<Tick, OrderQueue>;

/// Two-sided book of FIFO queues keyed by absolute price tick. Empty levels are
/// never stored, so best_bid < best_ask holds whenever both sides are non-empty
/// (the matching routines below keep it that way).
class BookState {
 public:
  explicit BookState(double tick_size = 0.01);

  double tick_size() const noexcept { return tick_size_; }

  std::optional<Tick> best(Side side) const;
  std::optional<Tick> best_bid() const { return best(Side::Bid); }
  std::optional<Tick> best_ask() const { return best(Side::Ask); }
  bool two_sided() const { return !bids_.empty() && !asks_.empty(); }

  const Ladder& ladder(Side side) const { return side == Side::Bid ? bids_ : asks_; }
  /// nullptr when the level is empty.
  const OrderQueue* queue(Side side, Tick tick) const;
  Shares volume_at(Side side, Tick tick) const;
  std::size_t orders_at(Side side, Tick tick) const;
  Shares total_volume(Side side) const;
  std::size_t total_orders(Side side) const;

  /// Appends at the back of the queue without matching; returns the sequence number.
  std::uint64_t add_resting(Side side, Tick tick, Shares size);
  /// Removes and returns the oldest order at the level. The level must be non-empty.
  Order pop_oldest(Side side, Tick tick);
  /// Takes up to `size` shares from the oldest order at the level; a fully
  /// consumed order is removed. Returns the consumed order (with the traded size).
  Order consume_oldest(Side side, Tick tick, Shares size);
  /// Removes the oldest order at the level with exactly `size` shares; false if none.
  bool remove_first_of_size(Side side, Tick tick, Shares size);

  std::uint64_t next_seq() const noexcept { return next_seq_; }

  bool operator==(const BookState&) const = default;

 private:
  Ladder& ladder_mut(Side side) { return side == Side::Bid ? bids_ : asks_; }

  double tick_size_;
  Ladder bids_;
  Ladder asks_;
  std::uint64_t next_seq_ = 1;
};

/// Actively modelled levels s in {-l_d+1, ..., l_p} around the interval-start
/// reference prices. Bid level s sits at ref_ask - s, ask level s at ref_bid + s;
/// s <= 0 are the aggressive (direct) levels.
struct ActiveWindow {
  Tick ref_bid = 0;
  Tick ref_ask = 0;
  int l_p = 5;
  int l_d = 3;

  int levels() const noexcept { return l_p + l_d; }
  int min_level() const noexcept { return 1 - l_d; }
  int max_level() const noexcept { return l_p; }
  /// Position of level s in level-indexed vectors (0 for s = -l_d+1).
  std::size_t index(int s) const noexcept { return static_cast<std::size_t>(s + l_d - 1); }
  int level_at(std::size_t index) const noexcept { return static_cast<int>(index) - l_d + 1; }

  Tick tick(Side side, int s) const noexcept { return side == Side::Bid ? ref_ask - s : ref_bid + s; }
  int level_of(Side side, Tick tick) const noexcept {
    return static_cast<int>(side == Side::Bid ? ref_ask - tick : tick - ref_bid);
  }
  bool contains(Side side, Tick tick) const noexcept {
    const int s = level_of(side, tick);
    return s >= min_level() && s <= max_level();
  }

  bool operator==(const ActiveWindow&) const = default;
};

/// Window anchored at the current best bid/ask. Throws EmptySide.
ActiveWindow build_window(const BookState& book, int l_p, int l_d);
/// Same, but a side with no resting orders keeps the reference of `previous`.
ActiveWindow build_window(const BookState& book, int l_p, int l_d, const ActiveWindow& previous);

struct LevelVolumes {
  std::vector<std::int64_t> orders;
  std::vector<Shares> shares;

  bool operator==(const LevelVolumes&) const = default;
};

struct WindowVolumes {
  LevelVolumes bid;
  LevelVolumes ask;

  const LevelVolumes& side(Side s) const { return s == Side::Bid ? bid : ask; }
};

WindowVolumes window_volumes(const BookState& book, const ActiveWindow& window);

/// One side's sampled activity for an interval, indexed by window level.
struct SideActivity {
  std::vector<std::int64_t> lo_counts;
  std::vector<std::vector<Shares>> lo_sizes;
  std::vector<std::int64_t> cancel_counts;
  std::int64_t mo_count = 0;
  std::vector<Shares> mo_sizes;

  // Sampled intensities, kept for logging only.
  std::vector<double> lo_intensity;
  std::vector<double> cancel_intensity;
  double mo_intensity = 0.0;

  bool operator==(const SideActivity&) const = default;
};

/// Everything sampled for one interval. For market orders, `bid` holds the buy
/// orders (they consume the ask side) and `ask` the sell orders.
struct IntervalActivity {
  SideActivity bid;
  SideActivity ask;

  static IntervalActivity empty(int levels);

  SideActivity& side(Side s) { return s == Side::Bid ? bid : ask; }
  const SideActivity& side(Side s) const { return s == Side::Bid ? bid : ask; }

  /// Throws InconsistentActivity on length mismatches or non-positive sizes.
  void validate(int levels) const;

  bool operator==(const IntervalActivity&) const = default;
};

enum class EventKind : std::uint8_t { PassiveLimit, AggressiveLimit, Cancel, Market };

std::string_view to_string(EventKind kind) noexcept;

/// One event as the matching routine applied it.
struct AppliedEvent {
  EventKind kind;
  Side side;        // side of the incoming order (Bid = buy for market orders)
  Tick tick;        // limit or cancel price; deepest price reached for market orders
  Shares size;      // shares submitted less any discarded residue (limit), cancelled, or filled (market)
  Shares executed;  // shares traded on arrival

  bool operator==(const AppliedEvent&) const = default;
};

/// Per-level share flows for one interval. At every tick on both sides:
/// volume_after - volume_before == submitted - cancelled - executed.
struct LevelFlow {
  Shares submitted = 0;
  Shares cancelled = 0;
  Shares executed = 0;
  std::int64_t orders_submitted = 0;
  std::int64_t orders_cancelled = 0;

  bool operator==(const LevelFlow&) const = default;
};

struct Ledger {
  std::map<Tick, LevelFlow> bid;
  std::map<Tick, LevelFlow> ask;
  // Shares of incoming orders that could not trade inside the window.
  Shares discarded_market = 0;
  Shares discarded_limit = 0;

  LevelFlow& at(Side side, Tick tick) { return (side == Side::Bid ? bid : ask)[tick]; }
  const std::map<Tick, LevelFlow>& side(Side s) const { return s == Side::Bid ? bid : ask; }
};

struct IntervalOutcome {
  BookState book;
  Ledger ledger;
  std::vector<AppliedEvent> trace;
};

/// Optional sinks filled while events are applied.
struct ApplySinks {
  Ledger* ledger = nullptr;
  std::vector<AppliedEvent>* trace = nullptr;
};

// The update map G, split into its four phases so that a simulator can sample
// later phases conditional on the state left by earlier ones. Each phase walks
// the ask side first, then the bid side, levels in window order.
//
// Incoming orders only trade against opposite volume inside the window: limit
// order residue that would rest crossed against frozen exterior volume and
// market order residue beyond the window are discarded (and counted in the ledger).
void apply_passive_limits(BookState& book, const ActiveWindow& window, const IntervalActivity& activity,
                          const ApplySinks& sinks = {});
void apply_aggressive_limits(BookState& book, const ActiveWindow& window,
                             const IntervalActivity& activity, const ApplySinks& sinks = {});
/// Removes the oldest orders in full. Throws InconsistentActivity when a count
/// exceeds the orders resting at its level.
void apply_cancellations(BookState& book, const ActiveWindow& window, const IntervalActivity& activity,
                         const ApplySinks& sinks = {});
/// Buy orders first, then sell orders; each walks the opposite window in price-time priority.
void apply_market_orders(BookState& book, const ActiveWindow& window, const IntervalActivity& activity,
                         const ApplySinks& sinks = {});

/// All four phases in order, in place.
void apply_interval_in_place(BookState& book, const ActiveWindow& window,
                             const IntervalActivity& activity, const ApplySinks& sinks = {});

/// Pure form of G: the input book is left untouched.
IntervalOutcome apply_interval(const BookState& book, const ActiveWindow& window,
                               const IntervalActivity& activity);

/// Limit order against the whole book (no window restriction), as used when
/// replaying recorded events. Returns executed shares.
Shares submit_limit(BookState& book, Side side, Tick tick, Shares size);
/// Market order against the whole book. Returns filled shares.
Shares submit_market(BookState& book, Side side, Shares size);

}  // namespace lobforge
