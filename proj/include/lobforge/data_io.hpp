#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "lobforge/book.hpp"
#include "lobforge/snapshot.hpp"

namespace lobforge {

enum class EventType : std::uint8_t { LimitOrder, Cancel, MarketOrder };

std::string_view to_string(EventType type) noexcept;

/// One Level-2 event. For market orders, side Bid is a buy; price_tick is informational.
struct EventRecord {
  std::int64_t ts_ms = 0;
  EventType event = EventType::LimitOrder;
  Side side = Side::Bid;
  Tick price_tick = 0;
  Shares size = 1;

  bool operator==(const EventRecord&) const = default;
};

inline constexpr const char* kEventHeader = "ts_ms,event,side,price_tick,size";

/// Header `ts_ms,event,side,price_tick,size`; event is limit|cancel|market and
/// side is bid|ask. Throws ParseError (with line number) or MonotonicityError.
std::vector<EventRecord> read_events(std::istream& in);
std::vector<EventRecord> ingest_events(const std::string& path);
void write_events(std::ostream& out, const std::vector<EventRecord>& events);
void write_events_file(const std::string& path, const std::vector<EventRecord>& events);

struct ReplayConfig {
  double interval_seconds = 10.0;
  int l_p = 5;
  int l_d = 3;
  /// Number of intervals; 0 means enough to cover the last event.
  std::int64_t T = 0;
};

/// Replays the events on top of `initial` (which must be two-sided) and samples
/// the book at every boundary k * interval: row k holds the state after all
/// events with ts_ms < k * interval. Interval counts are event counts.
/// Throws ReplayError naming the offending record (e.g. cancelling an absent order).
SnapshotSeries events_to_snapshots(const std::vector<EventRecord>& events, const BookState& initial,
                                   const ReplayConfig& config = {});

struct IntensityCorrelation {
  std::vector<std::string> labels;  // retained levels, e.g. "bid_1", "ask_-2"
  Eigen::MatrixXd matrix;
  std::vector<std::string> excluded;  // zero-variance levels
  std::int64_t intervals = 0;
  std::int64_t overflow_deep = 0;     // orders beyond level l_p
  std::int64_t overflow_through = 0;  // orders beyond level 1 - l_d
};

inline constexpr std::int64_t kMinCorrelationIntervals = 30;

/// Pearson correlation of per-interval limit-order counts per level, with levels
/// measured from the references at the start of each interval. Throws
/// DegenerateSeries for fewer than kMinCorrelationIntervals intervals.
IntensityCorrelation intensity_correlation(const std::vector<EventRecord>& events, const BookState& initial,
                                           const ReplayConfig& config = {});

struct SizeHistogram {
  double bin_width = 1.0;
  std::vector<std::int64_t> counts;  // bin k covers [k w, (k + 1) w)
  std::int64_t total = 0;

  std::size_t mode_bin() const;
};

/// Limit-order sizes only. Throws InvalidConfig for a non-positive bin width.
SizeHistogram order_size_histogram(const std::vector<EventRecord>& events, double bin_width);

/// Events reproducing simulator traces when replayed: interval t's events are
/// spread over [(t - 1) I, t I) in their applied order.
std::vector<EventRecord> trace_to_events(const std::vector<std::vector<AppliedEvent>>& traces,
                                         double interval_seconds);

}  // namespace lobforge
