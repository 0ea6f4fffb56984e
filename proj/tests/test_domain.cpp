#include <gtest/gtest.h>

#include <map>
#include <set>
#include <sstream>

#include "spaarc/domain.hpp"
#include "spaarc/geometry.hpp"
#include "spaarc/rng.hpp"
#include "spaarc/trace_io.hpp"

namespace {

using namespace spaarc;

TEST(Distance, KnownValues) {
  EXPECT_DOUBLE_EQ(distance({0, 0}, {0, 0}), 0.0);
  EXPECT_DOUBLE_EQ(distance({0, 0}, {3, 4}), 5.0);
  EXPECT_DOUBLE_EQ(distance({1, 2}, {4, 6}), 5.0);
}

TEST(Distance, SymmetricAndTriangleInequality) {
  Rng rng(42);
  for (int i = 0; i < 500; ++i) {
    const Point2 a{rng.uniform(-50, 50), rng.uniform(-50, 50)};
    const Point2 b{rng.uniform(-50, 50), rng.uniform(-50, 50)};
    const Point2 c{rng.uniform(-50, 50), rng.uniform(-50, 50)};
    EXPECT_DOUBLE_EQ(distance(a, b), distance(b, a));
    EXPECT_LE(distance(a, c), distance(a, b) + distance(b, c) + 1e-12);
  }
}

TEST(Distance, RejectsNonFinitePoints) {
  EXPECT_THROW(distance({std::numeric_limits<double>::infinity(), 0}, {0, 0}),
               std::invalid_argument);
}

TEST(Catalog, RejectsDuplicateIdsAndBadSizes) {
  EXPECT_THROW(Catalog({{1, 10.0, {0, 0}}, {1, 11.0, {5, 5}}}), std::invalid_argument);
  EXPECT_THROW(Catalog({{1, 0.0, {0, 0}}}), std::invalid_argument);
  EXPECT_THROW(Catalog({{1, 10.0, {std::numeric_limits<double>::quiet_NaN(), 0}}}),
               std::invalid_argument);
}

TEST(Sessionize, DeduplicatesWithinSession) {
  const std::vector<AccessEvent> trace = {
      {0.0, 7, 1, {}}, {5.0, 7, 1, {}}, {10.0, 7, 2, {}}};
  const auto txs = sessionize(trace, 60.0);
  ASSERT_EQ(txs.size(), 1u);
  EXPECT_EQ(txs[0].items, (Itemset{1, 2}));
}

TEST(Sessionize, SplitsOnGap) {
  const std::vector<AccessEvent> trace = {{0.0, 7, 1, {}}, {100.0, 7, 2, {}}};
  const auto txs = sessionize(trace, 60.0);
  ASSERT_EQ(txs.size(), 2u);
  EXPECT_EQ(txs[0].items, (Itemset{1}));
  EXPECT_EQ(txs[1].items, (Itemset{2}));
}

TEST(Sessionize, SeparatesInterleavedUsers) {
  const std::vector<AccessEvent> trace = {
      {0.0, 1, 10, {}}, {1.0, 2, 20, {}}, {2.0, 1, 11, {}}, {3.0, 2, 21, {}}};
  const auto txs = sessionize(trace, 60.0);
  ASSERT_EQ(txs.size(), 2u);
  EXPECT_EQ(txs[0].items, (Itemset{10, 11}));  // user 1's session started first
  EXPECT_EQ(txs[1].items, (Itemset{20, 21}));
}

TEST(Sessionize, EmptyTraceGivesEmptyResult) {
  EXPECT_TRUE(sessionize(std::span<const AccessEvent>{}, 60.0).empty());
}

TEST(Sessionize, RejectsUnorderedTrace) {
  const std::vector<AccessEvent> trace = {{5.0, 1, 1, {}}, {1.0, 1, 2, {}}};
  EXPECT_THROW(sessionize(trace, 60.0), std::invalid_argument);
}

// No events lost or invented: the union of session itemsets must equal the
// distinct objects each user touched, grouped by an independent pass.
TEST(Sessionize, ConservesEventsOnRandomTraces) {
  Rng rng(7);
  const double gap = 10.0;
  for (int round = 0; round < 20; ++round) {
    std::vector<AccessEvent> trace;
    double t = 0.0;
    for (int i = 0; i < 200; ++i) {
      t += rng.uniform(0.0, 8.0);
      trace.push_back({t, rng.uniform_int(0, 3), rng.uniform_int(0, 9), {}});
    }
    const auto txs = sessionize(trace, gap);

    // Reference grouping: walk each user's events, cut on gap.
    std::vector<std::set<ObjectId>> expected;
    std::map<UserId, double> last;
    std::map<UserId, std::size_t> open;
    for (const AccessEvent& e : trace) {
      auto it = open.find(e.user_id);
      if (it == open.end() || e.time - last[e.user_id] > gap) {
        expected.emplace_back();
        open[e.user_id] = expected.size() - 1;
      }
      expected[open[e.user_id]].insert(e.object_id);
      last[e.user_id] = e.time;
    }
    ASSERT_EQ(txs.size(), expected.size());
    std::multiset<Itemset> got_sets, want_sets;
    for (const auto& tx : txs) got_sets.insert(tx.items);
    for (const auto& s : expected) want_sets.insert(Itemset(s.begin(), s.end()));
    EXPECT_EQ(got_sets, want_sets);
  }
}

TEST(TraceIo, TraceRoundTrip) {
  const std::vector<AccessEvent> trace = {
      {0.5, 1, 2, {3.25, -4.5}}, {1.75, 2, 3, {0.1, 0.2}}};
  std::ostringstream out;
  write_trace_csv(out, trace);
  EXPECT_EQ(out.str().substr(0, 25), "time,user_id,object_id,x,");
  std::istringstream in(out.str());
  const auto back = read_trace_csv(in);
  ASSERT_EQ(back.size(), trace.size());
  for (std::size_t i = 0; i < trace.size(); ++i) {
    EXPECT_DOUBLE_EQ(back[i].time, trace[i].time);
    EXPECT_EQ(back[i].user_id, trace[i].user_id);
    EXPECT_EQ(back[i].object_id, trace[i].object_id);
    EXPECT_DOUBLE_EQ(back[i].user_position.x, trace[i].user_position.x);
  }
}

TEST(TraceIo, CatalogRoundTrip) {
  const Catalog catalog({{1, 10.5, {0, 0}}, {2, 12.25, {30, 40}}});
  std::ostringstream out;
  write_catalog_csv(out, catalog);
  std::istringstream in(out.str());
  const auto back = read_catalog_csv(in);
  ASSERT_EQ(back.size(), 2u);
  EXPECT_DOUBLE_EQ(back.at(2).size_mb, 12.25);
  EXPECT_DOUBLE_EQ(back.at(2).position.y, 40.0);
}

TEST(TraceIo, RejectsMissingHeader) {
  std::istringstream in("1,2,3,4,5\n");
  EXPECT_THROW(read_trace_csv(in), std::invalid_argument);
}

TEST(Spmf, ParsesAndDeduplicates) {
  std::istringstream in("1 2 3\n5 5 7\n\n9\n");
  const auto txs = load_spmf(in);
  ASSERT_EQ(txs.size(), 3u);
  EXPECT_EQ(txs[0].items, (Itemset{1, 2, 3}));
  EXPECT_EQ(txs[1].items, (Itemset{5, 7}));
  EXPECT_EQ(txs[2].items, (Itemset{9}));
}

TEST(Spmf, ReportsLineNumberOnBadToken) {
  std::istringstream in("1 2\n3 x 4\n");
  try {
    load_spmf(in);
    FAIL() << "expected parse error";
  } catch (const std::invalid_argument& e) {
    EXPECT_NE(std::string(e.what()).find("line 2"), std::string::npos);
  }
}

TEST(FormatDouble, RoundTripsShortestForm) {
  EXPECT_EQ(format_double(0.5), "0.5");
  EXPECT_EQ(format_double(15), "15");
  EXPECT_EQ(format_double(0.1), "0.1");
}

}  // namespace
