#pragma once

// Independent reference implementations used to cross-check the library:
// a power-set frequent-itemset miner and a naive reference cache. These stay
// deliberately brute-force and share no code with the implementations they
// audit.

#include <algorithm>
#include <cstdint>
#include <deque>
#include <map>
#include <vector>

#include "spaarc/arm.hpp"
#include "spaarc/cache.hpp"
#include "spaarc/domain.hpp"

namespace spaarc_test {

// Enumerates every nonempty subset of the item universe and keeps those whose
// support meets min_support. Output ordering matches the library contract:
// by size, then lexicographically.
inline std::vector<spaarc::FrequentItemset> brute_force_itemsets(
    const std::vector<spaarc::Transaction>& transactions, double min_support,
    std::size_t max_size) {
  std::vector<spaarc::ObjectId> universe;
  for (const auto& tx : transactions) {
    universe.insert(universe.end(), tx.items.begin(), tx.items.end());
  }
  universe = spaarc::make_itemset(std::move(universe));

  const double total = static_cast<double>(transactions.size());
  std::vector<spaarc::FrequentItemset> out;
  const std::size_t n = universe.size();
  for (std::uint32_t mask = 1; mask < (1u << n); ++mask) {
    spaarc::Itemset items;
    for (std::size_t i = 0; i < n; ++i) {
      if (mask & (1u << i)) items.push_back(universe[i]);
    }
    if (items.size() > max_size) continue;
    std::size_t count = 0;
    for (const auto& tx : transactions) {
      if (spaarc::itemset_includes(tx.items, items)) ++count;
    }
    const double support = static_cast<double>(count) / total;
    if (support >= min_support) out.push_back({items, support});
  }
  std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) {
    if (a.items.size() != b.items.size()) return a.items.size() < b.items.size();
    return a.items < b.items;
  });
  return out;
}

// Minimal unit-size reference cache: FIFO/LRU/LFU/POP over explicit lists.
// Capacity counts objects, all metadata is kept as plain vectors.
class ReferenceCache {
 public:
  ReferenceCache(std::size_t capacity_objects, spaarc::EvictionPolicy policy)
      : capacity_(capacity_objects), policy_(policy) {}

  bool lookup(spaarc::ObjectId id) {
    ++clock_;
    ++all_history_[id];
    for (auto& entry : resident_) {
      if (entry.id == id) {
        entry.last_access = clock_;
        ++entry.accesses;
        return true;
      }
    }
    return false;
  }

  // Returns evicted ids, oldest-evicted first.
  std::vector<spaarc::ObjectId> insert(spaarc::ObjectId id) {
    ++clock_;
    for (const auto& entry : resident_) {
      if (entry.id == id) return {};
    }
    std::vector<spaarc::ObjectId> evicted;
    while (resident_.size() >= capacity_) {
      std::size_t victim = 0;
      for (std::size_t i = 1; i < resident_.size(); ++i) {
        if (key_of(resident_[i]) < key_of(resident_[victim])) victim = i;
      }
      evicted.push_back(resident_[victim].id);
      resident_.erase(resident_.begin() + static_cast<std::ptrdiff_t>(victim));
    }
    resident_.push_back(Entry{id, clock_, clock_, 1});
    return evicted;
  }

  bool contains(spaarc::ObjectId id) const {
    for (const auto& entry : resident_) {
      if (entry.id == id) return true;
    }
    return false;
  }

 private:
  struct Entry {
    spaarc::ObjectId id;
    std::uint64_t inserted;
    std::uint64_t last_access;
    std::uint64_t accesses;
  };

  // (primary key, tiebreak by insertion order)
  std::pair<std::uint64_t, std::uint64_t> key_of(const Entry& e) const {
    switch (policy_) {
      case spaarc::EvictionPolicy::Fifo: return {e.inserted, e.inserted};
      case spaarc::EvictionPolicy::Lru: return {e.last_access, e.inserted};
      case spaarc::EvictionPolicy::Lfu: return {e.accesses, e.inserted};
      case spaarc::EvictionPolicy::Pop: {
        auto it = all_history_.find(e.id);
        return {it == all_history_.end() ? 0 : it->second, e.inserted};
      }
    }
    return {0, 0};
  }

  std::size_t capacity_;
  spaarc::EvictionPolicy policy_;
  std::uint64_t clock_ = 0;
  std::vector<Entry> resident_;
  std::map<spaarc::ObjectId, std::uint64_t> all_history_;
};

// Unit-size catalog 0..n-1 at harmless positions.
inline spaarc::Catalog unit_catalog(int n, double size_mb = 10.0) {
  std::vector<spaarc::VirtualObject> objects;
  for (int i = 0; i < n; ++i) {
    objects.push_back(spaarc::VirtualObject{
        i, size_mb, {static_cast<double>(12 * i), 0.0}});
  }
  return spaarc::Catalog(std::move(objects));
}

inline std::vector<spaarc::Transaction> make_transactions(
    std::vector<std::vector<spaarc::ObjectId>> rows) {
  std::vector<spaarc::Transaction> out;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    out.push_back(spaarc::Transaction{static_cast<std::int64_t>(i),
                                      spaarc::make_itemset(std::move(rows[i]))});
  }
  return out;
}

}  // namespace spaarc_test
