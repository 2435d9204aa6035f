#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "lobforge/book.hpp"

namespace lobforge {

/// Book state at an interval boundary, reduced to the modelled window (anchored
/// at the snapshot's own best prices) plus aggregate exterior volume.
struct SnapshotRow {
  std::int64_t t = 0;
  double time_s = 0.0;
  std::optional<Tick> best_bid;
  std::optional<Tick> best_ask;
  Tick ref_bid = 0;
  Tick ref_ask = 0;
  std::vector<Shares> bid_v;  // share volume per window level, index = s + l_d - 1
  std::vector<Shares> ask_v;
  Shares bid_ext = 0;
  Shares ask_ext = 0;
  // Orders seen during the interval ending at this row (zero for t = 0).
  std::int64_t lo_bid = 0;
  std::int64_t lo_ask = 0;
  std::int64_t c_bid = 0;
  std::int64_t c_ask = 0;
  std::int64_t mo_bid = 0;  // buy market orders
  std::int64_t mo_ask = 0;  // sell market orders

  bool two_sided() const { return best_bid.has_value() && best_ask.has_value(); }
  bool operator==(const SnapshotRow&) const = default;
};

struct SnapshotSeries {
  double interval_seconds = 10.0;
  int l_p = 5;
  int l_d = 3;
  std::vector<SnapshotRow> rows;  // rows[0] is the initial state

  int levels() const { return l_p + l_d; }
  bool operator==(const SnapshotSeries&) const = default;
};

/// Snapshot of `book` at boundary t; the window is rebuilt from the book,
/// keeping the references of `fallback` for an empty side.
SnapshotRow make_snapshot(const BookState& book, const ActiveWindow& fallback, std::int64_t t,
                          double interval_seconds);

/// Columnar CSV, one row per boundary. Numbers are written in shortest
/// round-trip form so write(read(text)) reproduces the text.
void write_snapshot_csv(std::ostream& out, const SnapshotSeries& series);
std::string snapshot_csv_string(const SnapshotSeries& series);
/// Infers l_p and l_d from the header and the interval from the time column.
/// Throws ParseError with the offending line.
SnapshotSeries read_snapshot_csv(std::istream& in);
SnapshotSeries read_snapshot_csv_file(const std::string& path);
void write_snapshot_csv_file(const std::string& path, const SnapshotSeries& series);

/// True if the first line looks like a snapshot CSV header.
bool is_snapshot_header(const std::string& line);

/// Shortest decimal that parses back to the same double.
std::string format_double(double x);

}  // namespace lobforge
