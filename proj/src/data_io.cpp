#include "lobforge/data_io.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <istream>
#include <ostream>

#include "lobforge/csv.hpp"
#include "lobforge/error.hpp"

namespace lobforge {

std::string_view to_string(EventType type) noexcept {
  switch (type) {
    case EventType::LimitOrder: return "limit";
    case EventType::Cancel: return "cancel";
    case EventType::MarketOrder: return "market";
  }
  return "unknown";
}

namespace {

EventType parse_event_type(const std::string& s, std::size_t lineno) {
  if (s == "limit") return EventType::LimitOrder;
  if (s == "cancel") return EventType::Cancel;
  if (s == "market") return EventType::MarketOrder;
  throw Error(ErrorCode::ParseError, "line " + std::to_string(lineno) + ": unknown event '" + s + "'");
}

Side parse_side(const std::string& s, std::size_t lineno) {
  if (s == "bid") return Side::Bid;
  if (s == "ask") return Side::Ask;
  throw Error(ErrorCode::ParseError, "line " + std::to_string(lineno) + ": unknown side '" + s + "'");
}

std::string describe(const EventRecord& e, std::size_t index) {
  return "record " + std::to_string(index) + " (ts_ms=" + std::to_string(e.ts_ms) + ", " +
         std::string(to_string(e.event)) + ", " + std::string(to_string(e.side)) + ", tick " +
         std::to_string(e.price_tick) + ", size " + std::to_string(e.size) + ")";
}

void check_replay_config(const ReplayConfig& c) {
  if (!(c.interval_seconds > 0.0)) throw Error(ErrorCode::InvalidConfig, "interval_seconds must be positive");
  if (c.l_p < 1 || c.l_d < 1) throw Error(ErrorCode::InvalidConfig, "l_p and l_d must be >= 1");
  if (c.T < 0) throw Error(ErrorCode::InvalidConfig, "T must be >= 0");
}

// Interval (1-based) containing a timestamp.
std::int64_t interval_of(std::int64_t ts_ms, double interval_ms) {
  return static_cast<std::int64_t>(std::floor(static_cast<double>(ts_ms) / interval_ms)) + 1;
}

using EventHook = std::function<void(std::int64_t, const ActiveWindow&, const EventRecord&)>;
using BoundaryHook = std::function<void(std::int64_t, const BookState&, const ActiveWindow&)>;

// Replays events interval by interval; returns the number of intervals.
std::int64_t replay(const std::vector<EventRecord>& events, const BookState& initial, const ReplayConfig& config,
                    const EventHook& on_event, const BoundaryHook& on_boundary) {
  check_replay_config(config);
  const double interval_ms = config.interval_seconds * 1000.0;
  for (std::size_t i = 0; i < events.size(); ++i) {
    if (events[i].ts_ms < 0) throw Error(ErrorCode::ReplayError, describe(events[i], i) + ": negative timestamp");
    if (i > 0 && events[i].ts_ms < events[i - 1].ts_ms)
      throw Error(ErrorCode::MonotonicityError, describe(events[i], i) + ": timestamp decreases");
  }
  const std::int64_t T =
      config.T > 0 ? config.T : (events.empty() ? 0 : interval_of(events.back().ts_ms, interval_ms));

  BookState book = initial;
  ActiveWindow window = build_window(book, config.l_p, config.l_d);
  on_boundary(0, book, window);
  std::size_t next = 0;
  for (std::int64_t k = 1; k <= T; ++k) {
    window = build_window(book, config.l_p, config.l_d, window);
    for (; next < events.size() && interval_of(events[next].ts_ms, interval_ms) <= k; ++next) {
      const EventRecord& e = events[next];
      on_event(k, window, e);
      switch (e.event) {
        case EventType::LimitOrder:
          submit_limit(book, e.side, e.price_tick, e.size);
          break;
        case EventType::MarketOrder:
          submit_market(book, e.side, e.size);
          break;
        case EventType::Cancel:
          if (!book.remove_first_of_size(e.side, e.price_tick, e.size))
            throw Error(ErrorCode::ReplayError, describe(e, next) + ": no resting order of that size");
          break;
      }
    }
    on_boundary(k, book, window);
  }
  return T;
}

}  // namespace

std::vector<EventRecord> read_events(std::istream& in) {
  std::vector<EventRecord> out;
  std::string line;
  std::size_t lineno = 0;
  if (!std::getline(in, line)) throw Error(ErrorCode::ParseError, "line 1: missing header");
  ++lineno;
  if (csv::chomp(line) != kEventHeader)
    throw Error(ErrorCode::ParseError, "line 1: expected header '" + std::string(kEventHeader) + "'");
  while (std::getline(in, line)) {
    ++lineno;
    line = csv::chomp(line);
    if (line.empty()) continue;
    const auto f = csv::split(line);
    if (f.size() != 5)
      throw Error(ErrorCode::ParseError, "line " + std::to_string(lineno) + ": expected 5 fields");
    EventRecord e;
    e.ts_ms = csv::parse_int<std::int64_t>(f[0], lineno);
    e.event = parse_event_type(f[1], lineno);
    e.side = parse_side(f[2], lineno);
    e.price_tick = csv::parse_int<Tick>(f[3], lineno);
    e.size = csv::parse_int<Shares>(f[4], lineno);
    if (e.size < 1) throw Error(ErrorCode::ParseError, "line " + std::to_string(lineno) + ": size must be >= 1");
    if (!out.empty() && e.ts_ms < out.back().ts_ms)
      throw Error(ErrorCode::MonotonicityError, "line " + std::to_string(lineno) + ": timestamp decreases");
    out.push_back(e);
  }
  return out;
}

std::vector<EventRecord> ingest_events(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot open " + path);
  return read_events(in);
}

void write_events(std::ostream& out, const std::vector<EventRecord>& events) {
  std::string buf;
  buf.reserve(32 * (events.size() + 1));
  buf += kEventHeader;
  buf += '\n';
  for (const auto& e : events) {
    buf += std::to_string(e.ts_ms);
    buf += ',';
    buf += to_string(e.event);
    buf += ',';
    buf += to_string(e.side);
    buf += ',';
    buf += std::to_string(e.price_tick);
    buf += ',';
    buf += std::to_string(e.size);
    buf += '\n';
  }
  out << buf;
}

void write_events_file(const std::string& path, const std::vector<EventRecord>& events) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::IoError, "cannot write " + path);
  write_events(out, events);
}

SnapshotSeries events_to_snapshots(const std::vector<EventRecord>& events, const BookState& initial,
                                   const ReplayConfig& config) {
  SnapshotSeries series;
  series.interval_seconds = config.interval_seconds;
  series.l_p = config.l_p;
  series.l_d = config.l_d;
  SnapshotRow counts;
  replay(
      events, initial, config,
      [&](std::int64_t, const ActiveWindow&, const EventRecord& e) {
        const bool bid = e.side == Side::Bid;
        switch (e.event) {
          case EventType::LimitOrder: ++(bid ? counts.lo_bid : counts.lo_ask); break;
          case EventType::Cancel: ++(bid ? counts.c_bid : counts.c_ask); break;
          case EventType::MarketOrder: ++(bid ? counts.mo_bid : counts.mo_ask); break;
        }
      },
      [&](std::int64_t k, const BookState& book, const ActiveWindow& window) {
        SnapshotRow row = make_snapshot(book, window, k, config.interval_seconds);
        row.lo_bid = counts.lo_bid;
        row.lo_ask = counts.lo_ask;
        row.c_bid = counts.c_bid;
        row.c_ask = counts.c_ask;
        row.mo_bid = counts.mo_bid;
        row.mo_ask = counts.mo_ask;
        counts = SnapshotRow{};
        series.rows.push_back(std::move(row));
      });
  return series;
}

IntensityCorrelation intensity_correlation(const std::vector<EventRecord>& events, const BookState& initial,
                                           const ReplayConfig& config) {
  const int levels = config.l_p + config.l_d;
  const auto width = static_cast<std::size_t>(2 * levels);
  IntensityCorrelation out;
  std::vector<std::vector<double>> counts;  // per interval, bid levels then ask levels
  replay(
      events, initial, config,
      [&](std::int64_t k, const ActiveWindow& w, const EventRecord& e) {
        if (e.event != EventType::LimitOrder) return;
        if (counts.size() < static_cast<std::size_t>(k)) counts.resize(static_cast<std::size_t>(k), std::vector<double>(width, 0.0));
        const Tick s = e.side == Side::Bid ? w.ref_ask - e.price_tick : e.price_tick - w.ref_bid;
        if (s > config.l_p) {
          ++out.overflow_deep;
        } else if (s < 1 - config.l_d) {
          ++out.overflow_through;
        } else {
          const std::size_t col = (e.side == Side::Bid ? 0 : static_cast<std::size_t>(levels)) +
                                  static_cast<std::size_t>(s + config.l_d - 1);
          counts[static_cast<std::size_t>(k - 1)][col] += 1.0;
        }
      },
      [&](std::int64_t k, const BookState&, const ActiveWindow&) { out.intervals = k; });
  if (out.intervals < kMinCorrelationIntervals)
    throw Error(ErrorCode::DegenerateSeries,
                "correlations need at least " + std::to_string(kMinCorrelationIntervals) + " intervals");
  counts.resize(static_cast<std::size_t>(out.intervals), std::vector<double>(width, 0.0));

  const auto n = static_cast<Eigen::Index>(out.intervals);
  Eigen::MatrixXd x(n, static_cast<Eigen::Index>(width));
  for (Eigen::Index t = 0; t < n; ++t)
    for (std::size_t c = 0; c < width; ++c) x(t, static_cast<Eigen::Index>(c)) = counts[static_cast<std::size_t>(t)][c];
  std::vector<Eigen::Index> kept;
  for (std::size_t c = 0; c < width; ++c) {
    const std::string label = std::string(c < static_cast<std::size_t>(levels) ? "bid_" : "ask_") +
                              std::to_string(static_cast<int>(c % static_cast<std::size_t>(levels)) + 1 - config.l_d);
    const auto col = x.col(static_cast<Eigen::Index>(c));
    if ((col.array() == col(0)).all()) {
      out.excluded.push_back(label);
    } else {
      out.labels.push_back(label);
      kept.push_back(static_cast<Eigen::Index>(c));
    }
  }
  const auto m = static_cast<Eigen::Index>(kept.size());
  Eigen::MatrixXd centered(n, m);
  for (Eigen::Index j = 0; j < m; ++j) {
    const auto col = x.col(kept[static_cast<std::size_t>(j)]);
    centered.col(j) = col.array() - col.mean();
  }
  const Eigen::MatrixXd cov = centered.transpose() * centered;
  out.matrix = Eigen::MatrixXd::Identity(m, m);
  for (Eigen::Index i = 0; i < m; ++i)
    for (Eigen::Index j = 0; j < i; ++j) {
      const double r = cov(i, j) / std::sqrt(cov(i, i) * cov(j, j));
      out.matrix(i, j) = r;
      out.matrix(j, i) = r;
    }
  return out;
}

std::size_t SizeHistogram::mode_bin() const {
  return static_cast<std::size_t>(std::max_element(counts.begin(), counts.end()) - counts.begin());
}

SizeHistogram order_size_histogram(const std::vector<EventRecord>& events, double bin_width) {
  if (!(bin_width > 0.0) || !std::isfinite(bin_width))
    throw Error(ErrorCode::InvalidConfig, "bin width must be positive");
  SizeHistogram h;
  h.bin_width = bin_width;
  for (const auto& e : events) {
    if (e.event != EventType::LimitOrder) continue;
    const auto bin = static_cast<std::size_t>(std::floor(static_cast<double>(e.size) / bin_width));
    if (h.counts.size() <= bin) h.counts.resize(bin + 1, 0);
    ++h.counts[bin];
    ++h.total;
  }
  return h;
}

std::vector<EventRecord> trace_to_events(const std::vector<std::vector<AppliedEvent>>& traces,
                                         double interval_seconds) {
  if (!(interval_seconds > 0.0)) throw Error(ErrorCode::InvalidConfig, "interval_seconds must be positive");
  const auto interval_ms = static_cast<std::int64_t>(std::llround(interval_seconds * 1000.0));
  std::vector<EventRecord> out;
  for (std::size_t t = 0; t < traces.size(); ++t) {
    const auto& trace = traces[t];
    const auto base = static_cast<std::int64_t>(t) * interval_ms;
    const auto n = static_cast<std::int64_t>(trace.size());
    for (std::int64_t j = 0; j < n; ++j) {
      const AppliedEvent& a = trace[static_cast<std::size_t>(j)];
      EventRecord e;
      e.ts_ms = base + j * interval_ms / n;
      e.side = a.side;
      e.price_tick = a.tick;
      switch (a.kind) {
        case EventKind::PassiveLimit:
        case EventKind::AggressiveLimit:
          e.event = EventType::LimitOrder;
          e.size = a.size;
          break;
        case EventKind::Cancel:
          e.event = EventType::Cancel;
          e.size = a.size;
          break;
        case EventKind::Market:
          e.event = EventType::MarketOrder;
          e.size = a.size;
          break;
      }
      if (e.size >= 1) out.push_back(e);
    }
  }
  return out;
}

}  // namespace lobforge
