#include <gtest/gtest.h>

#include "lobforge/book.hpp"
#include "lobforge/error.hpp"
#include "lobforge/rng.hpp"

using namespace lobforge;

namespace {

BookState unit_book(Tick best_bid, Tick best_ask, int levels, int orders) {
  BookState b;
  for (int i = 0; i < levels; ++i)
    for (int k = 0; k < orders; ++k) {
      b.add_resting(Side::Bid, best_bid - i, 1);
      b.add_resting(Side::Ask, best_ask + i, 1);
    }
  return b;
}

}  // namespace

TEST(Window, LevelTicks) {
  const BookState b = unit_book(1000, 1002, 5, 1);
  const ActiveWindow w = build_window(b, 5, 3);
  EXPECT_EQ(w.levels(), 8);
  EXPECT_EQ(w.tick(Side::Ask, -2), 998);
  EXPECT_EQ(w.tick(Side::Ask, 5), 1005);
  EXPECT_EQ(w.tick(Side::Bid, -2), 1004);
  EXPECT_EQ(w.tick(Side::Bid, 5), 997);
  EXPECT_EQ(w.level_of(Side::Bid, 1001), 1);
  EXPECT_TRUE(w.contains(Side::Ask, 1005));
  EXPECT_FALSE(w.contains(Side::Ask, 1006));
}

TEST(Window, EmptySideThrows) {
  BookState b;
  b.add_resting(Side::Bid, 1000, 1);
  try {
    build_window(b, 5, 3);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::EmptySide);
  }
}

TEST(Window, FallbackKeepsPreviousReference) {
  BookState b;
  b.add_resting(Side::Bid, 1000, 1);
  const ActiveWindow prev{999, 1003, 5, 3};
  const ActiveWindow w = build_window(b, 5, 3, prev);
  EXPECT_EQ(w.ref_bid, 1000);
  EXPECT_EQ(w.ref_ask, 1003);
}

TEST(Interval, EmptyActivityLeavesBook) {
  const BookState b = unit_book(1000, 1002, 5, 3);
  const ActiveWindow w = build_window(b, 5, 3);
  const IntervalOutcome out = apply_interval(b, w, IntervalActivity::empty(8));
  EXPECT_EQ(out.book, b);
  EXPECT_TRUE(out.trace.empty());
}

TEST(Interval, MarketOrderTakesOldest) {
  BookState b;
  b.add_resting(Side::Bid, 1000, 1);
  const auto first = b.add_resting(Side::Ask, 1002, 1);
  b.add_resting(Side::Ask, 1002, 1);
  b.add_resting(Side::Ask, 1002, 1);
  const ActiveWindow w = build_window(b, 5, 3);
  IntervalActivity a = IntervalActivity::empty(8);
  a.bid.mo_count = 1;
  a.bid.mo_sizes = {1};
  const IntervalOutcome out = apply_interval(b, w, a);
  ASSERT_NE(out.book.queue(Side::Ask, 1002), nullptr);
  EXPECT_EQ(out.book.orders_at(Side::Ask, 1002), 2u);
  EXPECT_NE(out.book.queue(Side::Ask, 1002)->front().seq, first);
  EXPECT_EQ(out.book.volume_at(Side::Bid, 1000), 1);
  const WindowVolumes v = window_volumes(out.book, w);
  EXPECT_EQ(v.ask.orders[w.index(2)], 2);
  EXPECT_EQ(out.ledger.side(Side::Ask).at(1002).executed, 1);
}

TEST(Interval, WindowVolumesEmpty) {
  BookState b;
  b.add_resting(Side::Bid, 1000, 1);
  b.add_resting(Side::Ask, 1100, 1);
  const ActiveWindow w = build_window(b, 5, 3);
  const WindowVolumes v = window_volumes(b, w);
  for (std::size_t i = 0; i < 8; ++i) {
    if (i == w.index(-2) || i == w.index(1)) continue;
    EXPECT_EQ(v.bid.shares[i], 0);
  }
}

TEST(Interval, WindowVolumesMatchLadderScan) {
  Rng rng(5);
  for (int rep = 0; rep < 50; ++rep) {
    BookState b;
    for (int k = 0; k < 60; ++k) {
      b.add_resting(Side::Bid, 995 + static_cast<Tick>(rng.below(6)), 1 + static_cast<Shares>(rng.below(5)));
      b.add_resting(Side::Ask, 1001 + static_cast<Tick>(rng.below(8)), 1 + static_cast<Shares>(rng.below(5)));
    }
    const ActiveWindow w = build_window(b, 5, 3);
    const WindowVolumes v = window_volumes(b, w);
    for (Side side : {Side::Bid, Side::Ask}) {
      for (int s = w.min_level(); s <= w.max_level(); ++s) {
        Shares shares = 0;
        std::int64_t orders = 0;
        for (const auto& [tick, q] : b.ladder(side))
          if (tick == w.tick(side, s))
            for (const auto& o : q) {
              shares += o.size;
              ++orders;
            }
        EXPECT_EQ(v.side(side).shares[w.index(s)], shares);
        EXPECT_EQ(v.side(side).orders[w.index(s)], orders);
      }
    }
  }
}

TEST(Interval, CancellationBeyondRestingThrows) {
  const BookState b = unit_book(1000, 1002, 5, 2);
  const ActiveWindow w = build_window(b, 5, 3);
  IntervalActivity a = IntervalActivity::empty(8);
  a.ask.cancel_counts[w.index(1)] = 3;
  try {
    apply_interval(b, w, a);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::InconsistentActivity);
  }
}

TEST(Interval, AggressiveLimitTradesThenRests) {
  const BookState b = unit_book(1000, 1002, 5, 2);
  const ActiveWindow w = build_window(b, 5, 3);
  IntervalActivity a = IntervalActivity::empty(8);
  // Bid level 0 sits at the best ask.
  a.bid.lo_counts[w.index(0)] = 1;
  a.bid.lo_sizes[w.index(0)] = {3};
  const IntervalOutcome out = apply_interval(b, w, a);
  EXPECT_EQ(out.book.volume_at(Side::Ask, 1002), 0);
  EXPECT_EQ(out.book.volume_at(Side::Bid, 1002), 1);
  ASSERT_EQ(out.trace.size(), 1u);
  EXPECT_EQ(out.trace[0].kind, EventKind::AggressiveLimit);
  EXPECT_EQ(out.trace[0].size, 3);
  EXPECT_EQ(out.trace[0].executed, 2);
}

TEST(Book, PriceTimePriority) {
  BookState b;
  b.add_resting(Side::Ask, 1002, 2);
  b.add_resting(Side::Ask, 1001, 1);
  b.add_resting(Side::Ask, 1001, 4);
  EXPECT_EQ(submit_market(b, Side::Bid, 3), 3);
  EXPECT_EQ(b.volume_at(Side::Ask, 1001), 2);
  EXPECT_EQ(b.volume_at(Side::Ask, 1002), 2);
  EXPECT_EQ(submit_limit(b, Side::Bid, 1001, 5), 2);
  EXPECT_EQ(b.volume_at(Side::Bid, 1001), 3);
  EXPECT_EQ(b.best_ask(), 1002);
}

TEST(Book, RemoveFirstOfSize) {
  BookState b;
  b.add_resting(Side::Bid, 1000, 2);
  const auto keep = b.add_resting(Side::Bid, 1000, 1);
  b.add_resting(Side::Bid, 1000, 2);
  EXPECT_TRUE(b.remove_first_of_size(Side::Bid, 1000, 2));
  EXPECT_EQ(b.queue(Side::Bid, 1000)->front().seq, keep);
  EXPECT_FALSE(b.remove_first_of_size(Side::Bid, 1000, 7));
  EXPECT_TRUE(b.remove_first_of_size(Side::Bid, 1000, 1));
  EXPECT_TRUE(b.remove_first_of_size(Side::Bid, 1000, 2));
  EXPECT_EQ(b.queue(Side::Bid, 1000), nullptr);
  EXPECT_FALSE(b.best_bid().has_value());
}
