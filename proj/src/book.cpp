#include "lobforge/book.hpp"

#include <algorithm>
#include <string>

#include "lobforge/error.hpp"

namespace lobforge {

std::string_view to_string(Side side) noexcept { return side == Side::Bid ? "bid" : "ask"; }

std::string_view to_string(EventKind kind) noexcept {
  switch (kind) {
    case EventKind::PassiveLimit: return "passive_limit";
    case EventKind::AggressiveLimit: return "aggressive_limit";
    case EventKind::Cancel: return "cancel";
    case EventKind::Market: return "market";
  }
  return "unknown";
}

BookState::BookState(double tick_size) : tick_size_(tick_size) {
  if (!(tick_size > 0.0)) throw Error(ErrorCode::InvalidConfig, "tick_size must be positive");
}

std::optional<Tick> BookState::best(Side side) const {
  if (side == Side::Bid) {
    if (bids_.empty()) return std::nullopt;
    return bids_.rbegin()->first;
  }
  if (asks_.empty()) return std::nullopt;
  return asks_.begin()->first;
}

const OrderQueue* BookState::queue(Side side, Tick tick) const {
  const auto& l = ladder(side);
  auto it = l.find(tick);
  return it == l.end() ? nullptr : &it->second;
}

Shares BookState::volume_at(Side side, Tick tick) const {
  const auto* q = queue(side, tick);
  if (!q) return 0;
  Shares v = 0;
  for (const auto& o : *q) v += o.size;
  return v;
}

std::size_t BookState::orders_at(Side side, Tick tick) const {
  const auto* q = queue(side, tick);
  return q ? q->size() : 0;
}

Shares BookState::total_volume(Side side) const {
  Shares v = 0;
  for (const auto& [tick, q] : ladder(side))
    for (const auto& o : q) v += o.size;
  return v;
}

std::size_t BookState::total_orders(Side side) const {
  std::size_t n = 0;
  for (const auto& [tick, q] : ladder(side)) n += q.size();
  return n;
}

std::uint64_t BookState::add_resting(Side side, Tick tick, Shares size) {
  if (size < 1) throw Error(ErrorCode::InconsistentActivity, "order size must be >= 1");
  const auto seq = next_seq_++;
  ladder_mut(side)[tick].push_back(Order{size, seq});
  return seq;
}

Order BookState::pop_oldest(Side side, Tick tick) {
  auto& l = ladder_mut(side);
  auto it = l.find(tick);
  if (it == l.end()) throw Error(ErrorCode::InconsistentActivity, "no resting order at tick " + std::to_string(tick));
  Order o = it->second.front();
  it->second.pop_front();
  if (it->second.empty()) l.erase(it);
  return o;
}

bool BookState::remove_first_of_size(Side side, Tick tick, Shares size) {
  auto& l = ladder_mut(side);
  auto it = l.find(tick);
  if (it == l.end()) return false;
  auto& q = it->second;
  const auto pos = std::find_if(q.begin(), q.end(), [size](const Order& o) { return o.size == size; });
  if (pos == q.end()) return false;
  q.erase(pos);
  if (q.empty()) l.erase(it);
  return true;
}

Order BookState::consume_oldest(Side side, Tick tick, Shares size) {
  auto& l = ladder_mut(side);
  auto it = l.find(tick);
  if (it == l.end()) throw Error(ErrorCode::InconsistentActivity, "no resting order at tick " + std::to_string(tick));
  Order& front = it->second.front();
  const Shares take = std::min(size, front.size);
  Order traded{take, front.seq};
  front.size -= take;
  if (front.size == 0) {
    it->second.pop_front();
    if (it->second.empty()) l.erase(it);
  }
  return traded;
}

namespace {

void check_levels(int l_p, int l_d) {
  if (l_p < 1 || l_d < 1) throw Error(ErrorCode::InvalidConfig, "l_p and l_d must be positive");
}

// Best opposite tick that an incoming order on `side` would meet, if any.
std::optional<Tick> opposite_best(const BookState& book, Side side) { return book.best(opposite(side)); }

bool crosses(Side side, Tick limit, Tick opposite_tick) {
  return side == Side::Bid ? opposite_tick <= limit : opposite_tick >= limit;
}

// Matches an incoming order against the opposite side. When `window` is given,
// only opposite volume inside it is eligible. Returns executed shares.
Shares match(BookState& book, Side side, std::optional<Tick> limit, Shares size, const ActiveWindow* window,
             Ledger* ledger, Tick* deepest) {
  const Side other = opposite(side);
  Shares done = 0;
  while (done < size) {
    auto best = opposite_best(book, side);
    if (!best) break;
    if (limit && !crosses(side, *limit, *best)) break;
    if (window && !window->contains(other, *best)) break;
    const Order traded = book.consume_oldest(other, *best, size - done);
    done += traded.size;
    if (ledger) ledger->at(other, *best).executed += traded.size;
    if (deepest) *deepest = *best;
  }
  return done;
}

void submit_windowed_limit(BookState& book, const ActiveWindow& window, Side side, int s, Shares size,
                           EventKind kind, const ApplySinks& sinks) {
  if (size < 1) throw Error(ErrorCode::InconsistentActivity, "order size must be >= 1");
  const Tick tick = window.tick(side, s);
  const Shares executed = match(book, side, tick, size, &window, sinks.ledger, nullptr);
  Shares rest = size - executed;
  Shares entered = size;
  if (rest > 0) {
    auto best = opposite_best(book, side);
    if (best && crosses(side, tick, *best)) {
      // Remaining opposite liquidity at this price lies outside the window.
      entered = executed;
      if (sinks.ledger) sinks.ledger->discarded_limit += rest;
      rest = 0;
    }
  }
  if (entered == 0) return;
  if (sinks.ledger) {
    auto& f = sinks.ledger->at(side, tick);
    f.submitted += entered;
    f.orders_submitted += 1;
    // Shares that traded on arrival never rest; book them as executed at the
    // submission level so the per-level identity holds.
    f.executed += executed;
  }
  if (rest > 0) book.add_resting(side, tick, rest);
  if (sinks.trace) sinks.trace->push_back(AppliedEvent{kind, side, tick, entered, executed});
}

void limit_phase(BookState& book, const ActiveWindow& window, const IntervalActivity& activity, bool passive,
                 const ApplySinks& sinks) {
  const int lo = passive ? 1 : window.min_level();
  const int hi = passive ? window.max_level() : 0;
  const EventKind kind = passive ? EventKind::PassiveLimit : EventKind::AggressiveLimit;
  for (Side side : {Side::Ask, Side::Bid}) {
    const auto& a = activity.side(side);
    for (int s = lo; s <= hi; ++s) {
      for (Shares size : a.lo_sizes[window.index(s)]) submit_windowed_limit(book, window, side, s, size, kind, sinks);
    }
  }
}

}  // namespace

ActiveWindow build_window(const BookState& book, int l_p, int l_d) {
  check_levels(l_p, l_d);
  auto bid = book.best_bid();
  auto ask = book.best_ask();
  if (!bid) throw Error(ErrorCode::EmptySide, "bid side is empty");
  if (!ask) throw Error(ErrorCode::EmptySide, "ask side is empty");
  return ActiveWindow{*bid, *ask, l_p, l_d};
}

ActiveWindow build_window(const BookState& book, int l_p, int l_d, const ActiveWindow& previous) {
  check_levels(l_p, l_d);
  return ActiveWindow{book.best_bid().value_or(previous.ref_bid), book.best_ask().value_or(previous.ref_ask), l_p,
                      l_d};
}

WindowVolumes window_volumes(const BookState& book, const ActiveWindow& window) {
  const auto n = static_cast<std::size_t>(window.levels());
  WindowVolumes out;
  for (Side side : {Side::Bid, Side::Ask}) {
    LevelVolumes& lv = side == Side::Bid ? out.bid : out.ask;
    lv.orders.assign(n, 0);
    lv.shares.assign(n, 0);
    for (int s = window.min_level(); s <= window.max_level(); ++s) {
      const auto* q = book.queue(side, window.tick(side, s));
      if (!q) continue;
      const auto i = window.index(s);
      lv.orders[i] = static_cast<std::int64_t>(q->size());
      for (const auto& o : *q) lv.shares[i] += o.size;
    }
  }
  return out;
}

IntervalActivity IntervalActivity::empty(int levels) {
  const auto n = static_cast<std::size_t>(levels);
  SideActivity s;
  s.lo_counts.assign(n, 0);
  s.lo_sizes.assign(n, {});
  s.cancel_counts.assign(n, 0);
  s.lo_intensity.assign(n, 0.0);
  s.cancel_intensity.assign(n, 0.0);
  return IntervalActivity{s, s};
}

void IntervalActivity::validate(int levels) const {
  const auto n = static_cast<std::size_t>(levels);
  for (Side side : {Side::Bid, Side::Ask}) {
    const auto& a = this->side(side);
    const std::string who(to_string(side));
    if (a.lo_counts.size() != n || a.lo_sizes.size() != n || a.cancel_counts.size() != n)
      throw Error(ErrorCode::InconsistentActivity, who + ": per-level vectors must have " + std::to_string(n) + " entries");
    for (std::size_t i = 0; i < n; ++i) {
      if (a.lo_counts[i] < 0 || a.cancel_counts[i] < 0)
        throw Error(ErrorCode::InconsistentActivity, who + ": negative count");
      if (static_cast<std::size_t>(a.lo_counts[i]) != a.lo_sizes[i].size())
        throw Error(ErrorCode::InconsistentActivity, who + ": limit order count does not match size list");
      for (Shares s : a.lo_sizes[i])
        if (s < 1) throw Error(ErrorCode::InconsistentActivity, who + ": order size must be >= 1");
    }
    if (a.mo_count < 0 || static_cast<std::size_t>(a.mo_count) != a.mo_sizes.size())
      throw Error(ErrorCode::InconsistentActivity, who + ": market order count does not match size list");
    for (Shares s : a.mo_sizes)
      if (s < 1) throw Error(ErrorCode::InconsistentActivity, who + ": order size must be >= 1");
  }
}

void apply_passive_limits(BookState& book, const ActiveWindow& window, const IntervalActivity& activity,
                          const ApplySinks& sinks) {
  activity.validate(window.levels());
  limit_phase(book, window, activity, true, sinks);
}

void apply_aggressive_limits(BookState& book, const ActiveWindow& window, const IntervalActivity& activity,
                             const ApplySinks& sinks) {
  activity.validate(window.levels());
  limit_phase(book, window, activity, false, sinks);
}

void apply_cancellations(BookState& book, const ActiveWindow& window, const IntervalActivity& activity,
                         const ApplySinks& sinks) {
  activity.validate(window.levels());
  for (Side side : {Side::Ask, Side::Bid}) {
    const auto& a = activity.side(side);
    for (int s = window.min_level(); s <= window.max_level(); ++s) {
      const auto count = a.cancel_counts[window.index(s)];
      if (count == 0) continue;
      const Tick tick = window.tick(side, s);
      const auto resting = static_cast<std::int64_t>(book.orders_at(side, tick));
      if (count > resting)
        throw Error(ErrorCode::InconsistentActivity,
                    std::string(to_string(side)) + " level " + std::to_string(s) + ": cancelling " +
                        std::to_string(count) + " of " + std::to_string(resting) + " resting orders");
      for (std::int64_t k = 0; k < count; ++k) {
        const Order o = book.pop_oldest(side, tick);
        if (sinks.ledger) {
          auto& f = sinks.ledger->at(side, tick);
          f.cancelled += o.size;
          f.orders_cancelled += 1;
        }
        if (sinks.trace) sinks.trace->push_back(AppliedEvent{EventKind::Cancel, side, tick, o.size, 0});
      }
    }
  }
}

void apply_market_orders(BookState& book, const ActiveWindow& window, const IntervalActivity& activity,
                         const ApplySinks& sinks) {
  activity.validate(window.levels());
  for (Side side : {Side::Bid, Side::Ask}) {
    for (Shares size : activity.side(side).mo_sizes) {
      Tick deepest = 0;
      const Shares filled = match(book, side, std::nullopt, size, &window, sinks.ledger, &deepest);
      if (sinks.ledger) sinks.ledger->discarded_market += size - filled;
      if (filled > 0 && sinks.trace)
        sinks.trace->push_back(AppliedEvent{EventKind::Market, side, deepest, filled, filled});
    }
  }
}

void apply_interval_in_place(BookState& book, const ActiveWindow& window, const IntervalActivity& activity,
                             const ApplySinks& sinks) {
  activity.validate(window.levels());
  limit_phase(book, window, activity, true, sinks);
  limit_phase(book, window, activity, false, sinks);
  apply_cancellations(book, window, activity, sinks);
  apply_market_orders(book, window, activity, sinks);
}

IntervalOutcome apply_interval(const BookState& book, const ActiveWindow& window, const IntervalActivity& activity) {
  IntervalOutcome out{book, {}, {}};
  apply_interval_in_place(out.book, window, activity, ApplySinks{&out.ledger, &out.trace});
  return out;
}

Shares submit_limit(BookState& book, Side side, Tick tick, Shares size) {
  if (size < 1) throw Error(ErrorCode::ReplayError, "order size must be >= 1");
  const Shares executed = match(book, side, tick, size, nullptr, nullptr, nullptr);
  if (executed < size) book.add_resting(side, tick, size - executed);
  return executed;
}

Shares submit_market(BookState& book, Side side, Shares size) {
  if (size < 1) throw Error(ErrorCode::ReplayError, "order size must be >= 1");
  return match(book, side, std::nullopt, size, nullptr, nullptr, nullptr);
}

}  // namespace lobforge
