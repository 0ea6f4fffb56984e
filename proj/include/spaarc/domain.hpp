#pragma once

#include <algorithm>
#include <cstdint>
#include <deque>
#include <set>
#include <span>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include "spaarc/geometry.hpp"

namespace spaarc {

using ObjectId = std::int64_t;
using UserId = std::int64_t;

// Sorted, duplicate-free set of object ids.
using Itemset = std::vector<ObjectId>;

inline Itemset make_itemset(std::vector<ObjectId> ids) {
  std::sort(ids.begin(), ids.end());
  ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
  return ids;
}

inline bool itemset_contains(const Itemset& set, ObjectId id) {
  return std::binary_search(set.begin(), set.end(), id);
}

inline bool itemset_includes(const Itemset& outer, const Itemset& inner) {
  return std::includes(outer.begin(), outer.end(), inner.begin(), inner.end());
}

// A cacheable AR asset. Sizes are in megabytes; positions live in the same
// abstract unit distance the proximity threshold is expressed in.
struct VirtualObject {
  ObjectId id = 0;
  double size_mb = 0.0;
  Point2 position;
};

// One user/object interaction, the unit of trace replay.
struct AccessEvent {
  double time = 0.0;  // simulated seconds, nondecreasing within a trace
  UserId user_id = 0;
  ObjectId object_id = 0;
  Point2 user_position;
};

// The distinct objects one user touched in one session; the unit of rule mining.
struct Transaction {
  std::int64_t tx_id = 0;
  Itemset items;
};

class Catalog {
 public:
  Catalog() = default;

  explicit Catalog(std::vector<VirtualObject> objects) : objects_(std::move(objects)) {
    std::sort(objects_.begin(), objects_.end(),
              [](const VirtualObject& a, const VirtualObject& b) { return a.id < b.id; });
    index_.reserve(objects_.size());
    for (std::size_t i = 0; i < objects_.size(); ++i) {
      const VirtualObject& obj = objects_[i];
      if (obj.size_mb <= 0.0) {
        throw std::invalid_argument("catalog: object " + std::to_string(obj.id) +
                                    " has non-positive size");
      }
      if (!is_finite(obj.position)) {
        throw std::invalid_argument("catalog: object " + std::to_string(obj.id) +
                                    " has non-finite position");
      }
      if (!index_.emplace(obj.id, i).second) {
        throw std::invalid_argument("catalog: duplicate object id " + std::to_string(obj.id));
      }
    }
  }

  bool contains(ObjectId id) const { return index_.count(id) != 0; }

  const VirtualObject* find(ObjectId id) const {
    auto it = index_.find(id);
    return it == index_.end() ? nullptr : &objects_[it->second];
  }

  const VirtualObject& at(ObjectId id) const {
    const VirtualObject* obj = find(id);
    if (obj == nullptr) {
      throw std::out_of_range("catalog: unknown object id " + std::to_string(id));
    }
    return *obj;
  }

  // Sorted by id.
  const std::vector<VirtualObject>& objects() const { return objects_; }

  std::size_t size() const { return objects_.size(); }
  bool empty() const { return objects_.empty(); }

  double total_size_mb() const {
    double total = 0.0;
    for (const VirtualObject& obj : objects_) total += obj.size_mb;
    return total;
  }

  double max_object_size_mb() const {
    double m = 0.0;
    for (const VirtualObject& obj : objects_) m = std::max(m, obj.size_mb);
    return m;
  }

 private:
  std::vector<VirtualObject> objects_;
  std::unordered_map<ObjectId, std::size_t> index_;
};

// Incremental sessionizer: groups each user's events into sessions separated
// by more than `gap` seconds of that user's inactivity. snapshot() reflects
// everything seen so far, trailing open sessions included, so mining over a
// replay prefix sees the same transactions a batch pass over that prefix would.
class StreamSessionizer {
 public:
  explicit StreamSessionizer(double gap_seconds) : gap_(gap_seconds) {
    if (!(gap_ > 0.0)) throw std::invalid_argument("sessionize: gap must be > 0");
  }

  void add(const AccessEvent& event) {
    if (event.time < last_time_) {
      throw std::invalid_argument("sessionize: trace is not time-ordered");
    }
    last_time_ = event.time;
    auto it = open_.find(event.user_id);
    if (it != open_.end() && event.time - sessions_[it->second].last <= gap_) {
      Session& s = sessions_[it->second];
      s.last = event.time;
      s.items.insert(event.object_id);
      return;
    }
    sessions_.push_back(Session{event.time, event.time, {event.object_id}});
    open_[event.user_id] = sessions_.size() - 1;
  }

  // Transactions in session start order.
  std::vector<Transaction> snapshot() const {
    std::vector<Transaction> out;
    out.reserve(sessions_.size());
    for (std::size_t i = 0; i < sessions_.size(); ++i) {
      out.push_back(Transaction{static_cast<std::int64_t>(i),
                                Itemset(sessions_[i].items.begin(), sessions_[i].items.end())});
    }
    return out;
  }

  std::size_t session_count() const { return sessions_.size(); }

 private:
  struct Session {
    double start;
    double last;
    std::set<ObjectId> items;
  };

  double gap_;
  double last_time_ = 0.0;
  std::vector<Session> sessions_;
  std::unordered_map<UserId, std::size_t> open_;
};

inline std::vector<Transaction> sessionize(std::span<const AccessEvent> trace,
                                           double gap_seconds) {
  StreamSessionizer s(gap_seconds);
  for (const AccessEvent& event : trace) s.add(event);
  return s.snapshot();
}

}  // namespace spaarc
