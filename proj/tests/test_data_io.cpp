#include <algorithm>
#include <cmath>
#include <functional>
#include <iterator>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "lobforge/agents.hpp"
#include "lobforge/data_io.hpp"
#include "lobforge/error.hpp"
#include "test_support.hpp"

using namespace lobforge;
using lobforge::testing::NaiveBook;
using lobforge::testing::table1_row1;

namespace {

BookState small_book() {
  BookState b;
  for (int i = 0; i < 3; ++i)
    for (int k = 0; k < 4; ++k) {
      b.add_resting(Side::Bid, 1000 - i, 2);
      b.add_resting(Side::Ask, 1002 + i, 2);
    }
  return b;
}

NaiveBook naive_from(const BookState& b) {
  NaiveBook n;
  for (Side side : {Side::Bid, Side::Ask})
    for (const auto& [tick, q] : b.ladder(side))
      for (const auto& o : q) (side == Side::Bid ? n.bid : n.ask)[tick].push_back(o.size);
  return n;
}

std::vector<EventRecord> parse(const std::string& text) {
  std::istringstream in(text);
  return read_events(in);
}

void expect_code(ErrorCode code, const std::function<void()>& fn) {
  try {
    fn();
    ADD_FAILURE() << "no exception";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), code) << e.what();
  }
}

double pearson(const std::vector<double>& x, const std::vector<double>& y) {
  const double n = static_cast<double>(x.size());
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxy = 0, sxx = 0, syy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
  }
  return sxy / std::sqrt(sxx * syy);
}

}  // namespace

TEST(Events, HeaderOnlyIsEmpty) { EXPECT_TRUE(parse(std::string(kEventHeader) + "\n").empty()); }

TEST(Events, ParseAndErrors) {
  const auto e = parse("ts_ms,event,side,price_tick,size\n5,limit,bid,1000,3\n5,cancel,ask,1002,1\n9,market,bid,0,2\n");
  ASSERT_EQ(e.size(), 3u);
  EXPECT_EQ(e[1].event, EventType::Cancel);
  EXPECT_EQ(e[1].side, Side::Ask);
  EXPECT_EQ(e[2].size, 2);
  expect_code(ErrorCode::MonotonicityError, [] { parse("ts_ms,event,side,price_tick,size\n5,limit,bid,1,1\n4,limit,bid,1,1\n"); });
  expect_code(ErrorCode::ParseError, [] { parse("ts_ms,event,side,price_tick,size\n5,limit,up,1,1\n"); });
  expect_code(ErrorCode::ParseError, [] { parse("ts_ms,event,side,price_tick,size\n5,limit,bid,1,0\n"); });
  try {
    parse("ts_ms,event,side,price_tick,size\n1,limit,bid,1,1\n2,swap,bid,1,1\n");
    FAIL();
  } catch (const Error& err) {
    EXPECT_NE(std::string(err.what()).find("line 3"), std::string::npos);
  }
}

TEST(Events, MillionRowRoundTrip) {
  Rng rng(1);
  std::vector<EventRecord> events(1000000);
  std::int64_t ts = 0;
  for (auto& e : events) {
    ts += static_cast<std::int64_t>(rng.below(3));
    e.ts_ms = ts;
    e.event = static_cast<EventType>(rng.below(3));
    e.side = rng.below(2) == 0 ? Side::Bid : Side::Ask;
    e.price_tick = 9000 + static_cast<Tick>(rng.below(2000));
    e.size = 1 + static_cast<Shares>(rng.below(10000));
  }
  std::ostringstream out;
  write_events(out, events);
  const std::string text = out.str();
  const auto back = parse(text);
  EXPECT_EQ(back, events);
  std::ostringstream again;
  write_events(again, back);
  EXPECT_EQ(again.str(), text);
}

TEST(Replay, NoEventsKeepsInitialState) {
  ReplayConfig cfg;
  cfg.T = 5;
  const SnapshotSeries s = events_to_snapshots({}, small_book(), cfg);
  ASSERT_EQ(s.rows.size(), 6u);
  for (const auto& r : s.rows) {
    EXPECT_EQ(r.bid_v, s.rows[0].bid_v);
    EXPECT_EQ(r.ask_v, s.rows[0].ask_v);
    EXPECT_EQ(r.best_bid, s.rows[0].best_bid);
  }
}

TEST(Replay, LimitThenCancel) {
  const auto e = parse("ts_ms,event,side,price_tick,size\n1000,limit,bid,1001,5\n4000,cancel,bid,1001,5\n");
  const SnapshotSeries s = events_to_snapshots(e, small_book());
  ASSERT_EQ(s.rows.size(), 2u);
  EXPECT_EQ(s.rows[1].bid_v, s.rows[0].bid_v);
  EXPECT_EQ(s.rows[1].best_bid, s.rows[0].best_bid);
  EXPECT_EQ(s.rows[1].lo_bid, 1);
  EXPECT_EQ(s.rows[1].c_bid, 1);
}

TEST(Replay, MissingOrderNamesRecord) {
  const auto e = parse("ts_ms,event,side,price_tick,size\n10,cancel,bid,1001,5\n");
  try {
    events_to_snapshots(e, small_book());
    FAIL();
  } catch (const Error& err) {
    EXPECT_EQ(err.code(), ErrorCode::ReplayError);
    EXPECT_NE(std::string(err.what()).find("ts_ms=10"), std::string::npos);
  }
}

TEST(Replay, MatchesNaiveReplayer) {
  Rng rng(2);
  for (int script = 0; script < 40; ++script) {
    const BookState initial = small_book();
    NaiveBook naive = naive_from(initial);
    std::vector<EventRecord> events;
    std::vector<NaiveBook> at_boundary{naive};
    std::int64_t ts = 0;
    for (int k = 0; k < 300; ++k) {
      ts += static_cast<std::int64_t>(rng.below(400));
      while (ts >= 10000 * static_cast<std::int64_t>(at_boundary.size())) at_boundary.push_back(naive);
      EventRecord e;
      e.ts_ms = ts;
      e.side = rng.below(2) == 0 ? Side::Bid : Side::Ask;
      const auto kind = rng.below(3);
      auto& book = e.side == Side::Bid ? naive.bid : naive.ask;
      if (kind == 2 && !book.empty()) {
        auto it = book.begin();
        std::advance(it, static_cast<long>(rng.below(book.size())));
        e.event = EventType::Cancel;
        e.price_tick = it->first;
        e.size = it->second[rng.below(it->second.size())];
      } else if (kind == 1) {
        e.event = EventType::MarketOrder;
        e.size = 1 + static_cast<Shares>(rng.below(3));
      } else {
        e.event = EventType::LimitOrder;
        e.price_tick = 995 + static_cast<Tick>(rng.below(12));
        e.size = 1 + static_cast<Shares>(rng.below(4));
      }
      naive.apply(e);
      events.push_back(e);
      if (naive.bid.empty() || naive.ask.empty()) break;
    }
    ReplayConfig cfg;
    cfg.T = static_cast<std::int64_t>(at_boundary.size());
    at_boundary.push_back(naive);
    const SnapshotSeries s = events_to_snapshots(events, initial, cfg);
    ASSERT_EQ(s.rows.size(), at_boundary.size());
    for (std::size_t t = 0; t < s.rows.size(); ++t) {
      const auto& row = s.rows[t];
      const NaiveBook& nb = at_boundary[t];
      if (!row.two_sided()) continue;
      const ActiveWindow w{row.ref_bid, row.ref_ask, s.l_p, s.l_d};
      for (int lvl = w.min_level(); lvl <= w.max_level(); ++lvl) {
        EXPECT_EQ(row.bid_v[w.index(lvl)], nb.at(Side::Bid, w.tick(Side::Bid, lvl))) << "script " << script;
        EXPECT_EQ(row.ask_v[w.index(lvl)], nb.at(Side::Ask, w.tick(Side::Ask, lvl))) << "script " << script;
      }
      EXPECT_EQ(row.best_bid, nb.bid.empty() ? std::nullopt : std::optional<Tick>(nb.bid.rbegin()->first));
    }
  }
}

TEST(Replay, SimulatorTraceReproducesSnapshots) {
  SimConfig c;
  c.T = 300;
  c.seed = 5;
  SimOptions o;
  o.keep_trace = true;
  const SimResult r = simulate(table1_row1(), c, o);
  const auto events = trace_to_events(r.traces, 10.0);
  ReplayConfig cfg;
  cfg.T = c.T;
  const SnapshotSeries s =
      events_to_snapshots(events, seed_initial_book(default_initial_book(table1_row1()), 0.01), cfg);
  ASSERT_EQ(s.rows.size(), r.snapshots.rows.size());
  for (std::size_t t = 0; t < s.rows.size(); ++t) {
    EXPECT_EQ(s.rows[t].best_bid, r.snapshots.rows[t].best_bid) << t;
    EXPECT_EQ(s.rows[t].best_ask, r.snapshots.rows[t].best_ask) << t;
    EXPECT_EQ(s.rows[t].bid_v, r.snapshots.rows[t].bid_v) << t;
    EXPECT_EQ(s.rows[t].ask_v, r.snapshots.rows[t].ask_v) << t;
    EXPECT_EQ(s.rows[t].bid_ext, r.snapshots.rows[t].bid_ext) << t;
  }
}

TEST(Correlation, Properties) {
  SimConfig c;
  c.T = 600;
  c.seed = 6;
  SimOptions o;
  o.keep_trace = true;
  const SimResult r = simulate(table1_row1(), c, o);
  const auto events = trace_to_events(r.traces, 10.0);
  const IntensityCorrelation ic =
      intensity_correlation(events, seed_initial_book(default_initial_book(table1_row1()), 0.01));
  const auto n = ic.matrix.rows();
  ASSERT_GT(n, 0);
  EXPECT_EQ(static_cast<std::size_t>(n), ic.labels.size());
  for (Eigen::Index i = 0; i < n; ++i) {
    EXPECT_EQ(ic.matrix(i, i), 1.0);
    for (Eigen::Index j = 0; j < n; ++j) EXPECT_EQ(ic.matrix(i, j), ic.matrix(j, i));
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(ic.matrix);
  EXPECT_GE(es.eigenvalues().minCoeff(), -1e-10);
  expect_code(ErrorCode::DegenerateSeries, [&] {
    ReplayConfig short_day;
    short_day.T = 10;
    intensity_correlation({}, small_book(), short_day);
  });
}

TEST(Correlation, MatchesModelImplied) {
  // Strongly correlated passive levels on the bid side.
  Eigen::MatrixXd sigma = 0.3 * Eigen::MatrixXd::Identity(8, 8);
  for (int i = 3; i < 8; ++i)
    for (int j = 3; j < 8; ++j) sigma(i, j) += 0.6;
  const AgentParams p = AgentParams::reference(30.84, 8.16, 4.75, -0.18, 33.70, 1.78, sigma);

  SimConfig day;
  day.T = 3060;
  day.seed = 7;
  SimOptions keep;
  keep.keep_trace = true;
  const SimResult r = simulate(p, day, keep);
  const IntensityCorrelation ic =
      intensity_correlation(trace_to_events(r.traces, 10.0), seed_initial_book(default_initial_book(p), 0.01));

  // Oracle: correlations of the sampled counts over a much longer independent run.
  SimConfig long_run;
  long_run.T = 30000;
  long_run.seed = 8;
  SimOptions act;
  act.keep_activity = true;
  const SimResult lr = simulate(p, long_run, act);
  auto counts = [&](int s) {
    std::vector<double> v;
    for (const auto& a : lr.activity) v.push_back(static_cast<double>(a.bid.lo_counts[static_cast<std::size_t>(s + 2)]));
    return v;
  };
  auto find = [&](const std::string& label) {
    return static_cast<Eigen::Index>(std::find(ic.labels.begin(), ic.labels.end(), label) - ic.labels.begin());
  };
  for (int a = 2; a <= 5; ++a)
    for (int b = a + 1; b <= 5; ++b) {
      const Eigen::Index i = find("bid_" + std::to_string(a));
      const Eigen::Index j = find("bid_" + std::to_string(b));
      ASSERT_LT(i, ic.matrix.rows());
      ASSERT_LT(j, ic.matrix.rows());
      EXPECT_NEAR(ic.matrix(i, j), pearson(counts(a), counts(b)), 0.1) << "levels " << a << ", " << b;
    }
}

TEST(Histogram, Properties) {
  std::vector<EventRecord> events;
  for (int i = 0; i < 50; ++i) events.push_back({i, EventType::LimitOrder, Side::Bid, 1000, 100});
  events.push_back({60, EventType::Cancel, Side::Bid, 1000, 100});
  events.push_back({61, EventType::MarketOrder, Side::Ask, 0, 7});
  const SizeHistogram h = order_size_histogram(events, 10.0);
  EXPECT_EQ(h.total, 50);
  EXPECT_EQ(std::count_if(h.counts.begin(), h.counts.end(), [](auto c) { return c > 0; }), 1);
  EXPECT_EQ(h.mode_bin(), 10u);
  EXPECT_THROW(order_size_histogram(events, 0.0), Error);
}

TEST(Histogram, GammaMixtureMode) {
  // Mixture 0.3 Gamma(2, 20) + 0.7 Gamma(6, 40): the density peaks near the second mode, 200.
  const GammaMixtureSize m{0.3, 2.0, 20.0, 6.0, 40.0};
  auto density = [&](double x) {
    auto g = [](double k, double th, double y) { return std::exp((k - 1) * std::log(y) - y / th - std::lgamma(k) - k * std::log(th)); };
    return m.w * g(m.kappa1, m.theta1, x) + (1 - m.w) * g(m.kappa2, m.theta2, x);
  };
  double best_x = 1.0;
  for (double x = 1.0; x < 1000.0; x += 0.01)
    if (density(x) > density(best_x)) best_x = x;
  Rng rng(9);
  std::vector<EventRecord> events;
  for (int i = 0; i < 200000; ++i) events.push_back({i, EventType::LimitOrder, Side::Ask, 1, sample_order_size(m, rng)});
  const double width = 25.0;
  const SizeHistogram h = order_size_histogram(events, width);
  const double mode_centre = (static_cast<double>(h.mode_bin()) + 0.5) * width;
  EXPECT_NEAR(mode_centre, best_x, width);
}
