#include <gtest/gtest.h>

#include "spaarc/cache.hpp"
#include "spaarc/rng.hpp"

#include "support/cache_checks.hpp"
#include "support/oracles.hpp"

namespace {

using namespace spaarc;
using spaarc_test::unit_catalog;

TEST(Cache, ColdLookupMisses) {
  const auto catalog = unit_catalog(4);
  Cache cache({30.0, EvictionPolicy::Fifo}, catalog);
  EXPECT_EQ(cache.lookup(0), LookupResult::Miss);
  cache.insert(0, FetchOrigin::OnDemand);
  EXPECT_EQ(cache.lookup(0), LookupResult::Hit);
}

TEST(Cache, FifoEvictsOldestInsertion) {
  const auto catalog = unit_catalog(4);
  Cache cache({20.0, EvictionPolicy::Fifo}, catalog);  // two objects fit
  cache.lookup(0);
  cache.insert(0, FetchOrigin::OnDemand);
  cache.lookup(1);
  cache.insert(1, FetchOrigin::OnDemand);
  cache.lookup(2);
  EXPECT_EQ(cache.insert(2, FetchOrigin::OnDemand), (std::vector<ObjectId>{0}));
  EXPECT_EQ(cache.lookup(0), LookupResult::Miss);
}

TEST(Cache, LruEvictsLeastRecentlyUsed) {
  // 25 MB capacity, 10 MB objects: after touching 0, inserting 2 evicts 1.
  const auto catalog = unit_catalog(4);
  Cache cache({25.0, EvictionPolicy::Lru}, catalog);
  cache.insert(0, FetchOrigin::OnDemand);
  cache.insert(1, FetchOrigin::OnDemand);
  cache.lookup(0);
  EXPECT_EQ(cache.insert(2, FetchOrigin::OnDemand), (std::vector<ObjectId>{1}));
}

TEST(Cache, LfuEvictsLowestResidentCount) {
  const auto catalog = unit_catalog(4);
  Cache cache({20.0, EvictionPolicy::Lfu}, catalog);
  cache.insert(0, FetchOrigin::OnDemand);
  cache.lookup(0);
  cache.lookup(0);
  cache.lookup(0);
  cache.insert(1, FetchOrigin::OnDemand);
  cache.lookup(1);
  EXPECT_EQ(cache.insert(2, FetchOrigin::OnDemand), (std::vector<ObjectId>{1}));
}

TEST(Cache, InsertIsIdempotentForResidentObjects) {
  const auto catalog = unit_catalog(4);
  Cache cache({20.0, EvictionPolicy::Lru}, catalog);
  cache.insert(0, FetchOrigin::OnDemand);
  cache.insert(1, FetchOrigin::OnDemand);
  EXPECT_TRUE(cache.insert(0, FetchOrigin::OnDemand).empty());
  EXPECT_EQ(cache.stats().insertions, 2u);
}

TEST(Cache, ContainsIsPure) {
  const auto catalog = unit_catalog(4);
  Cache cache({30.0, EvictionPolicy::Lfu}, catalog);
  EXPECT_FALSE(cache.contains(0));
  cache.insert(0, FetchOrigin::OnDemand);
  EXPECT_TRUE(cache.contains(0));
  const auto hits_before = cache.stats().hits;
  const auto pop_before = cache.popularity(0);
  cache.contains(0);
  EXPECT_EQ(cache.stats().hits, hits_before);
  EXPECT_EQ(cache.popularity(0), pop_before);
}

TEST(Cache, ContainsFalseAfterEviction) {
  const auto catalog = unit_catalog(4);
  Cache cache({10.0, EvictionPolicy::Fifo}, catalog);
  cache.insert(0, FetchOrigin::OnDemand);
  cache.insert(1, FetchOrigin::OnDemand);
  EXPECT_FALSE(cache.contains(0));
}

TEST(Cache, UnknownObjectSignalsTraceMismatch) {
  const auto catalog = unit_catalog(2);
  Cache cache({30.0, EvictionPolicy::Lru}, catalog);
  EXPECT_THROW(cache.lookup(99), std::invalid_argument);
  EXPECT_THROW(cache.insert(99, FetchOrigin::OnDemand), std::invalid_argument);
}

TEST(Cache, RejectsUnfittableObjectWithoutEvicting) {
  const Catalog catalog({{0, 10.0, {0, 0}}, {1, 50.0, {10, 0}}});
  Cache cache({30.0, EvictionPolicy::Lru}, catalog);
  cache.insert(0, FetchOrigin::OnDemand);
  EXPECT_THROW(cache.insert(1, FetchOrigin::OnDemand), std::invalid_argument);
  EXPECT_TRUE(cache.contains(0));  // nothing was sacrificed for it
}

TEST(Cache, VariableSizesEvictUntilFit) {
  const Catalog catalog(
      {{0, 8.0, {0, 0}}, {1, 8.0, {10, 0}}, {2, 8.0, {20, 0}}, {3, 20.0, {30, 0}}});
  Cache cache({24.0, EvictionPolicy::Fifo}, catalog);
  cache.insert(0, FetchOrigin::OnDemand);
  cache.insert(1, FetchOrigin::OnDemand);
  cache.insert(2, FetchOrigin::OnDemand);
  EXPECT_EQ(cache.insert(3, FetchOrigin::OnDemand), (std::vector<ObjectId>{0, 1, 2}));
  EXPECT_LE(cache.resident_mb(), cache.capacity_mb());
}

TEST(Cache, PrefetchInsertionCountsNoInterest) {
  const auto catalog = unit_catalog(4);
  Cache cache({30.0, EvictionPolicy::Lfu}, catalog);
  cache.insert(0, FetchOrigin::Prefetch);
  cache.insert(1, FetchOrigin::OnDemand);
  cache.insert(2, FetchOrigin::OnDemand);
  cache.lookup(1);
  cache.lookup(2);
  // 0 was never looked up: resident count 0, the LFU victim.
  EXPECT_EQ(cache.insert(3, FetchOrigin::OnDemand), (std::vector<ObjectId>{0}));
  EXPECT_EQ(cache.stats().prefetch_insertions, 1u);
}

TEST(Cache, GoldenTraces) {
  for (EvictionPolicy policy : {EvictionPolicy::Fifo, EvictionPolicy::Lru, EvictionPolicy::Lfu,
                                EvictionPolicy::Pop}) {
    EXPECT_EQ(spaarc_test::check_golden_trace(policy), "") << to_string(policy);
  }
}

// POP degenerates to LFU while nothing is ever evicted and re-inserted: the
// all-history count equals the resident count for every resident object.
TEST(Cache, PopMatchesLfuWithoutReinsertions) {
  Rng rng(11);
  const auto catalog = unit_catalog(6);
  Cache lfu({60.0, EvictionPolicy::Lfu}, catalog);  // roomy: no evictions
  Cache pop({60.0, EvictionPolicy::Pop}, catalog);
  for (int i = 0; i < 500; ++i) {
    const ObjectId id = rng.uniform_int(0, 5);
    const auto a = lfu.lookup(id);
    const auto b = pop.lookup(id);
    ASSERT_EQ(a, b);
    if (a == LookupResult::Miss) {
      ASSERT_EQ(lfu.insert(id, FetchOrigin::OnDemand), pop.insert(id, FetchOrigin::OnDemand));
    }
  }
  EXPECT_EQ(lfu.stats().evictions, 0u);
}

// Dual-route check: eviction and hit sequences match a naive single-file
// re-implementation on small unit-size catalogs.
TEST(Cache, MatchesReferenceImplementationOnRandomTraces) {
  for (EvictionPolicy policy : {EvictionPolicy::Fifo, EvictionPolicy::Lru, EvictionPolicy::Lfu,
                                EvictionPolicy::Pop}) {
    Rng rng(1000 + static_cast<int>(policy));
    for (int round = 0; round < 10; ++round) {
      const int n_objects = static_cast<int>(rng.uniform_int(4, 10));
      const int capacity = static_cast<int>(rng.uniform_int(2, n_objects - 1));
      const auto catalog = unit_catalog(n_objects);
      Cache cache({10.0 * capacity, policy}, catalog);
      spaarc_test::ReferenceCache reference(static_cast<std::size_t>(capacity), policy);
      for (int op = 0; op < 400; ++op) {
        const ObjectId id = rng.uniform_int(0, n_objects - 1);
        const bool hit = cache.lookup(id) == LookupResult::Hit;
        const bool ref_hit = reference.lookup(id);
        ASSERT_EQ(hit, ref_hit) << to_string(policy) << " op " << op;
        if (!hit) {
          ASSERT_EQ(cache.insert(id, FetchOrigin::OnDemand), reference.insert(id))
              << to_string(policy) << " op " << op;
        }
      }
    }
  }
}

TEST(Cache, FuzzNeverExceedsCapacity) {
  EXPECT_EQ(spaarc_test::fuzz_capacity_violations(2024, 20000), 0u);
}

TEST(Cache, StatsStayConsistent) {
  Rng rng(3);
  const auto catalog = unit_catalog(8);
  Cache cache({30.0, EvictionPolicy::Lru}, catalog);
  std::uint64_t lookups = 0;
  for (int i = 0; i < 1000; ++i) {
    const ObjectId id = rng.uniform_int(0, 7);
    if (cache.lookup(id) == LookupResult::Miss) cache.insert(id, FetchOrigin::OnDemand);
    ++lookups;
  }
  EXPECT_EQ(cache.stats().hits + cache.stats().misses, lookups);
}

}  // namespace
