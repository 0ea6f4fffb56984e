#pragma once

#include <cstdint>
#include <limits>
#include <map>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "spaarc/domain.hpp"

namespace spaarc {

enum class EvictionPolicy { Fifo, Lru, Lfu, Pop };

inline std::string_view to_string(EvictionPolicy p) {
  switch (p) {
    case EvictionPolicy::Fifo: return "FIFO";
    case EvictionPolicy::Lru: return "LRU";
    case EvictionPolicy::Lfu: return "LFU";
    case EvictionPolicy::Pop: return "POP";
  }
  return "?";
}

inline EvictionPolicy parse_policy(std::string_view name) {
  if (name == "FIFO" || name == "fifo") return EvictionPolicy::Fifo;
  if (name == "LRU" || name == "lru") return EvictionPolicy::Lru;
  if (name == "LFU" || name == "lfu") return EvictionPolicy::Lfu;
  if (name == "POP" || name == "pop") return EvictionPolicy::Pop;
  throw std::invalid_argument("unknown cache policy '" + std::string(name) +
                              "' (expected FIFO, LRU, LFU or POP)");
}

enum class FetchOrigin { OnDemand, Prefetch };
enum class LookupResult { Hit, Miss };

struct CacheConfig {
  double capacity_mb = 0.0;
  EvictionPolicy policy = EvictionPolicy::Lru;

  void validate() const {
    if (!(capacity_mb > 0.0)) throw std::invalid_argument("cache.capacity_mb must be > 0");
  }
};

struct CacheStats {
  std::uint64_t hits = 0;
  std::uint64_t misses = 0;
  std::uint64_t insertions = 0;
  std::uint64_t evictions = 0;
  std::uint64_t prefetch_insertions = 0;

  std::uint64_t lookups() const { return hits + misses; }
  double hit_rate() const { return lookups() == 0 ? 0.0 : static_cast<double>(hits) / lookups(); }
};

// Byte-capacity-bounded object cache with pluggable eviction. LFU counts
// accesses while resident; POP counts all-history accesses and so remembers
// objects across evictions. On-demand insertion counts as the access that
// missed; prefetch insertion expresses no user interest and counts nothing
// until a later lookup.
class Cache {
 public:
  Cache(CacheConfig config, const Catalog& catalog) : config_(config), catalog_(&catalog) {
    config_.validate();
  }

  LookupResult lookup(ObjectId id) {
    require_known(id);
    ++popularity_[id];
    auto it = entries_.find(id);
    if (it == entries_.end()) {
      ++stats_.misses;
      return LookupResult::Miss;
    }
    ++stats_.hits;
    it->second.last_access_seq = ++seq_;
    ++it->second.resident_accesses;
    return LookupResult::Hit;
  }

  // Makes the object resident, evicting per policy until it fits. Returns the
  // evicted ids in eviction order. Inserting a resident object is a no-op.
  std::vector<ObjectId> insert(ObjectId id, FetchOrigin origin) {
    const double size = require_known(id).size_mb;
    if (entries_.count(id) != 0) return {};
    if (size > config_.capacity_mb) {
      throw std::invalid_argument("object " + std::to_string(id) + " (" +
                                  std::to_string(size) + " MB) exceeds cache capacity");
    }
    std::vector<ObjectId> evicted;
    while (resident_mb_ + size > config_.capacity_mb && !entries_.empty()) {
      const ObjectId victim = pick_victim();
      resident_mb_ -= entries_.at(victim).size_mb;
      entries_.erase(victim);
      ++stats_.evictions;
      evicted.push_back(victim);
    }
    if (entries_.empty()) resident_mb_ = 0.0;  // cancel any float drift
    Entry entry;
    entry.size_mb = size;
    entry.inserted_seq = ++seq_;
    entry.last_access_seq = entry.inserted_seq;
    entry.resident_accesses = origin == FetchOrigin::OnDemand ? 1 : 0;
    entry.origin = origin;
    entries_.emplace(id, entry);
    resident_mb_ += size;
    ++stats_.insertions;
    if (origin == FetchOrigin::Prefetch) ++stats_.prefetch_insertions;
    return evicted;
  }

  // Pure residency probe; never touches policy metadata.
  bool contains(ObjectId id) const { return entries_.count(id) != 0; }

  const CacheStats& stats() const { return stats_; }
  double resident_mb() const { return resident_mb_; }
  double capacity_mb() const { return config_.capacity_mb; }
  EvictionPolicy policy() const { return config_.policy; }
  std::size_t resident_count() const { return entries_.size(); }

  std::uint64_t popularity(ObjectId id) const {
    auto it = popularity_.find(id);
    return it == popularity_.end() ? 0 : it->second;
  }

 private:
  struct Entry {
    double size_mb = 0.0;
    std::uint64_t inserted_seq = 0;
    std::uint64_t last_access_seq = 0;
    std::uint64_t resident_accesses = 0;
    FetchOrigin origin = FetchOrigin::OnDemand;
  };

  const VirtualObject& require_known(ObjectId id) const {
    const VirtualObject* obj = catalog_->find(id);
    if (obj == nullptr) {
      throw std::invalid_argument("object " + std::to_string(id) +
                                  " is not in the catalog (trace/catalog mismatch)");
    }
    return *obj;
  }

  ObjectId pick_victim() const {
    // Lower key evicts first; insertion sequence breaks ties deterministically.
    ObjectId victim = 0;
    std::uint64_t best_key = std::numeric_limits<std::uint64_t>::max();
    std::uint64_t best_seq = std::numeric_limits<std::uint64_t>::max();
    for (const auto& [id, entry] : entries_) {
      std::uint64_t key = 0;
      switch (config_.policy) {
        case EvictionPolicy::Fifo: key = entry.inserted_seq; break;
        case EvictionPolicy::Lru: key = entry.last_access_seq; break;
        case EvictionPolicy::Lfu: key = entry.resident_accesses; break;
        case EvictionPolicy::Pop: key = popularity(id); break;
      }
      if (key < best_key || (key == best_key && entry.inserted_seq < best_seq)) {
        best_key = key;
        best_seq = entry.inserted_seq;
        victim = id;
      }
    }
    return victim;
  }

  CacheConfig config_;
  const Catalog* catalog_;
  std::map<ObjectId, Entry> entries_;  // ordered: victim scans are deterministic
  std::unordered_map<ObjectId, std::uint64_t> popularity_;
  double resident_mb_ = 0.0;
  std::uint64_t seq_ = 0;
  CacheStats stats_;
};

}  // namespace spaarc
