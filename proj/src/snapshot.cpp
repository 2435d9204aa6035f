#include "lobforge/snapshot.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include "lobforge/error.hpp"
#include "lobforge/csv.hpp"

namespace lobforge {

std::string format_double(double x) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), x);
  return std::string(buf, res.ptr);
}

SnapshotRow make_snapshot(const BookState& book, const ActiveWindow& fallback, std::int64_t t,
                          double interval_seconds) {
  const ActiveWindow w = build_window(book, fallback.l_p, fallback.l_d, fallback);
  SnapshotRow row;
  row.t = t;
  row.time_s = static_cast<double>(t) * interval_seconds;
  row.best_bid = book.best_bid();
  row.best_ask = book.best_ask();
  row.ref_bid = w.ref_bid;
  row.ref_ask = w.ref_ask;
  const auto vols = window_volumes(book, w);
  row.bid_v = vols.bid.shares;
  row.ask_v = vols.ask.shares;
  Shares in_bid = 0;
  Shares in_ask = 0;
  for (auto v : row.bid_v) in_bid += v;
  for (auto v : row.ask_v) in_ask += v;
  row.bid_ext = book.total_volume(Side::Bid) - in_bid;
  row.ask_ext = book.total_volume(Side::Ask) - in_ask;
  return row;
}

namespace {

std::string level_name(const char* side, int s) { return std::string(side) + "_v_" + std::to_string(s); }

std::vector<std::string> header_for(int l_p, int l_d) {
  std::vector<std::string> h{"t", "time_s", "best_bid", "best_ask", "ref_bid", "ref_ask"};
  for (int s = 1 - l_d; s <= l_p; ++s) h.push_back(level_name("bid", s));
  for (int s = 1 - l_d; s <= l_p; ++s) h.push_back(level_name("ask", s));
  for (const char* c : {"bid_ext", "ask_ext", "lo_bid", "lo_ask", "c_bid", "c_ask", "mo_bid", "mo_ask"})
    h.emplace_back(c);
  return h;
}

std::string opt_tick(const std::optional<Tick>& t) { return t ? std::to_string(*t) : std::string(); }

}  // namespace

bool is_snapshot_header(const std::string& line) {
  return line.rfind("t,time_s,best_bid,best_ask,ref_bid,ref_ask", 0) == 0;
}

void write_snapshot_csv(std::ostream& out, const SnapshotSeries& series) {
  const auto header = header_for(series.l_p, series.l_d);
  out << csv::join(header) << '\n';
  const auto n = static_cast<std::size_t>(series.levels());
  for (const auto& r : series.rows) {
    if (r.bid_v.size() != n || r.ask_v.size() != n)
      throw Error(ErrorCode::LengthMismatch, "snapshot row " + std::to_string(r.t) + " has the wrong level count");
    std::vector<std::string> f{std::to_string(r.t), format_double(r.time_s), opt_tick(r.best_bid),
                               opt_tick(r.best_ask), std::to_string(r.ref_bid), std::to_string(r.ref_ask)};
    for (auto v : r.bid_v) f.push_back(std::to_string(v));
    for (auto v : r.ask_v) f.push_back(std::to_string(v));
    for (auto v : {r.bid_ext, r.ask_ext, r.lo_bid, r.lo_ask, r.c_bid, r.c_ask, r.mo_bid, r.mo_ask})
      f.push_back(std::to_string(v));
    out << csv::join(f) << '\n';
  }
}

std::string snapshot_csv_string(const SnapshotSeries& series) {
  std::ostringstream os;
  write_snapshot_csv(os, series);
  return os.str();
}

SnapshotSeries read_snapshot_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw Error(ErrorCode::ParseError, "line 1: missing header");
  const auto header = csv::split(csv::chomp(line));
  if (!is_snapshot_header(csv::chomp(line))) throw Error(ErrorCode::ParseError, "line 1: not a snapshot header");
  int l_d = 0;
  int l_p = 0;
  for (const auto& h : header) {
    if (h.rfind("bid_v_", 0) != 0) continue;
    const int s = csv::parse_int<int>(h.substr(6), 1);
    l_d = std::max(l_d, 1 - s);
    l_p = std::max(l_p, s);
  }
  if (l_p < 1 || l_d < 1) throw Error(ErrorCode::ParseError, "line 1: no level columns");
  if (header != header_for(l_p, l_d)) throw Error(ErrorCode::ParseError, "line 1: unexpected column layout");

  SnapshotSeries series;
  series.l_p = l_p;
  series.l_d = l_d;
  const auto n = static_cast<std::size_t>(l_p + l_d);
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    line = csv::chomp(line);
    if (line.empty()) continue;
    const auto f = csv::split(line);
    if (f.size() != header.size())
      throw Error(ErrorCode::ParseError, "line " + std::to_string(lineno) + ": expected " +
                                             std::to_string(header.size()) + " fields, got " + std::to_string(f.size()));
    SnapshotRow r;
    std::size_t i = 0;
    r.t = csv::parse_int<std::int64_t>(f[i++], lineno);
    r.time_s = csv::parse_double(f[i++], lineno);
    if (!f[i].empty()) r.best_bid = csv::parse_int<Tick>(f[i], lineno);
    ++i;
    if (!f[i].empty()) r.best_ask = csv::parse_int<Tick>(f[i], lineno);
    ++i;
    r.ref_bid = csv::parse_int<Tick>(f[i++], lineno);
    r.ref_ask = csv::parse_int<Tick>(f[i++], lineno);
    for (std::size_t k = 0; k < n; ++k) r.bid_v.push_back(csv::parse_int<Shares>(f[i++], lineno));
    for (std::size_t k = 0; k < n; ++k) r.ask_v.push_back(csv::parse_int<Shares>(f[i++], lineno));
    for (auto* p : {&r.bid_ext, &r.ask_ext, &r.lo_bid, &r.lo_ask, &r.c_bid, &r.c_ask, &r.mo_bid, &r.mo_ask})
      *p = csv::parse_int<std::int64_t>(f[i++], lineno);
    series.rows.push_back(std::move(r));
  }
  if (series.rows.size() >= 2) {
    series.interval_seconds = series.rows[1].time_s - series.rows[0].time_s;
    if (!(series.interval_seconds > 0.0)) throw Error(ErrorCode::ParseError, "time column is not increasing");
  }
  return series;
}

SnapshotSeries read_snapshot_csv_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot open " + path);
  return read_snapshot_csv(in);
}

void write_snapshot_csv_file(const std::string& path, const SnapshotSeries& series) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::IoError, "cannot write " + path);
  write_snapshot_csv(out, series);
}

}  // namespace lobforge
