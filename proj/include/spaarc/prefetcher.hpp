#pragma once

#include <algorithm>
#include <cstdint>
#include <deque>
#include <limits>
#include <memory>
#include <mutex>
#include <stdexcept>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "spaarc/arm.hpp"
#include "spaarc/cache.hpp"
#include "spaarc/domain.hpp"
#include "spaarc/geometry.hpp"

namespace spaarc {

struct SpaarcParams {
  double min_support = 0.30;
  double min_confidence = 0.45;
  double association_factor_threshold = 1.0;
  int window = 10;             // recent-interaction window for the factor EWMA
  double proximity_threshold = 15.0;
  int history_window = 10;     // context size for rule matching
  std::size_t lazy_queue_capacity = 1024;
  bool per_user_factors = false;  // default: one global table

  // alpha in (0, 1]; window >= 1 guarantees it.
  double alpha() const { return 2.0 / (1.0 + static_cast<double>(window)); }

  void validate() const {
    if (window < 1) throw std::invalid_argument("spaarc.window must be >= 1");
    if (history_window < 1) throw std::invalid_argument("spaarc.history_window must be >= 1");
    if (!(proximity_threshold > 0.0)) {
      throw std::invalid_argument("spaarc.proximity_threshold must be > 0");
    }
    if (association_factor_threshold < 0.0) {
      throw std::invalid_argument("spaarc.association_factor must be >= 0");
    }
    if (!(min_support > 0.0 && min_support <= 1.0)) {
      throw std::invalid_argument("spaarc.min_support must be in (0, 1]");
    }
    if (!(min_confidence > 0.0 && min_confidence <= 1.0)) {
      throw std::invalid_argument("spaarc.min_confidence must be in (0, 1]");
    }
  }
};

// Per-object recency/frequency score: an EWMA of the object's reference count
// within the recent-interaction window.
class AssociationFactorTable {
 public:
  explicit AssociationFactorTable(double alpha) : alpha_(alpha) {
    if (!(alpha > 0.0 && alpha <= 1.0)) throw std::invalid_argument("alpha must be in (0, 1]");
  }

  // A_new = F·α + A_old·(1−α); unseen objects start from A_old = 0.
  double update(ObjectId object, std::uint64_t reference_count) {
    double& factor = factors_[object];
    factor = static_cast<double>(reference_count) * alpha_ + factor * (1.0 - alpha_);
    return factor;
  }

  double factor(ObjectId object) const {
    auto it = factors_.find(object);
    return it == factors_.end() ? 0.0 : it->second;
  }

  double alpha() const { return alpha_; }

 private:
  double alpha_;
  std::unordered_map<ObjectId, double> factors_;
};

struct LazyEntry {
  ObjectId object = 0;
  double lift = 0.0;
  UserId user = 0;  // whose approach we are waiting for
};

// Relevant-but-distant prefetch candidates awaiting user approach. Bounded
// FIFO: when full the oldest entry is dropped. Holds no duplicates and never
// an object the caller knows to be resident.
class LazyFetchQueue {
 public:
  explicit LazyFetchQueue(std::size_t capacity) : capacity_(capacity) {}

  void enqueue(LazyEntry entry) {
    auto it = index_.find(entry.object);
    if (it != index_.end()) {
      // Refresh the existing intent; keep the strongest lift.
      for (LazyEntry& e : entries_) {
        if (e.object == entry.object) {
          e.lift = std::max(e.lift, entry.lift);
          e.user = entry.user;
          break;
        }
      }
      return;
    }
    if (entries_.size() >= capacity_ && capacity_ > 0) {
      index_.erase(entries_.front().object);
      entries_.pop_front();
    }
    if (capacity_ == 0) return;
    index_.insert(entry.object);
    entries_.push_back(entry);
  }

  // Removes and returns entries selected by `take`; silently drops entries
  // selected by `drop`. Both are checked in queue order, drop first.
  template <typename DropFn, typename TakeFn>
  std::vector<LazyEntry> poll(DropFn&& drop, TakeFn&& take) {
    std::vector<LazyEntry> taken;
    std::deque<LazyEntry> kept;
    for (LazyEntry& entry : entries_) {
      if (drop(entry)) {
        index_.erase(entry.object);
      } else if (take(entry)) {
        index_.erase(entry.object);
        taken.push_back(entry);
      } else {
        kept.push_back(entry);
      }
    }
    entries_ = std::move(kept);
    return taken;
  }

  bool contains(ObjectId object) const { return index_.count(object) != 0; }
  std::size_t size() const { return entries_.size(); }
  const std::deque<LazyEntry>& entries() const { return entries_; }

 private:
  std::size_t capacity_;
  std::deque<LazyEntry> entries_;
  std::unordered_set<ObjectId> index_;
};

// Atomically swappable reference to the active ruleset. The tuner installs,
// the replay path acquires; neither blocks on rule generation.
class RulesetSlot {
 public:
  void install(std::shared_ptr<const RuleSet> ruleset) {
    std::lock_guard<std::mutex> lock(mutex_);
    ruleset_ = std::move(ruleset);
  }

  std::shared_ptr<const RuleSet> acquire() const {
    std::lock_guard<std::mutex> lock(mutex_);
    return ruleset_;
  }

 private:
  mutable std::mutex mutex_;
  std::shared_ptr<const RuleSet> ruleset_;
};

struct PrefetchDecision {
  std::vector<ObjectId> fetch_now;  // missed object first, then by lift desc, id asc
  std::vector<ObjectId> deferred;   // enqueued for lazy fetch, same ordering
};

// The SPAARC policy. On each miss: match rules against the user's recent
// context, gate candidates on the association factor, split survivors by
// proximity, and defer the distant ones until the user approaches.
class Prefetcher {
 public:
  Prefetcher(SpaarcParams params, const Catalog& catalog, double session_gap_seconds = 60.0)
      : params_(params),
        catalog_(&catalog),
        session_gap_(session_gap_seconds),
        factors_(params.alpha()),
        lazy_(params.lazy_queue_capacity) {
    params_.validate();
  }

  void set_ruleset(std::shared_ptr<const RuleSet> ruleset) { slot_.install(std::move(ruleset)); }
  std::shared_ptr<const RuleSet> ruleset() const { return slot_.acquire(); }
  RulesetSlot& ruleset_slot() { return slot_; }

  PrefetchDecision on_miss(ObjectId missed, UserId user, Point2 user_position,
                           const Cache& cache) {
    if (!catalog_->contains(missed)) {
      throw std::invalid_argument("on_miss: object " + std::to_string(missed) +
                                  " is not in the catalog");
    }
    PrefetchDecision decision;
    decision.fetch_now.push_back(missed);

    const auto ruleset = slot_.acquire();
    if (!ruleset || ruleset->empty()) return decision;

    const Itemset context = context_for(user, missed);
    const std::vector<RuleMatch> matches = ruleset->match(context);
    if (matches.empty()) return decision;

    struct Candidate {
      ObjectId object;
      double lift;
    };
    std::vector<Candidate> near, far;
    for (const RuleMatch& m : matches) {
      const std::uint64_t refs = window_references(user, m.object);
      const double factor = factors_.update(factor_key(user, m.object), refs);
      if (factor < params_.association_factor_threshold) continue;
      const VirtualObject& obj = catalog_->at(m.object);
      if (distance(user_position, obj.position) <= params_.proximity_threshold) {
        near.push_back({m.object, m.rule->lift});
      } else {
        far.push_back({m.object, m.rule->lift});
      }
    }

    const auto by_lift_then_id = [](const Candidate& a, const Candidate& b) {
      if (a.lift != b.lift) return a.lift > b.lift;
      return a.object < b.object;
    };
    std::sort(near.begin(), near.end(), by_lift_then_id);
    std::sort(far.begin(), far.end(), by_lift_then_id);

    for (const Candidate& c : near) {
      if (c.object == missed || cache.contains(c.object)) continue;
      decision.fetch_now.push_back(c.object);
    }
    for (const Candidate& c : far) {
      if (c.object == missed || cache.contains(c.object)) continue;
      lazy_.enqueue(LazyEntry{c.object, c.lift, user});
      decision.deferred.push_back(c.object);
    }
    return decision;
  }

  // Drains queue entries the moving user has come close to. Entries that
  // became resident in the meantime, or whose triggering user's session has
  // ended, are dropped without fetching.
  std::vector<ObjectId> poll_lazy_queue(UserId /*user*/, Point2 user_position, double now,
                                        const Cache& cache) {
    auto taken = lazy_.poll(
        [&](const LazyEntry& e) {
          if (cache.contains(e.object)) return true;
          auto seen = last_seen_.find(e.user);
          return seen != last_seen_.end() && now - seen->second > session_gap_;
        },
        [&](const LazyEntry& e) {
          return distance(user_position, catalog_->at(e.object).position) <=
                 params_.proximity_threshold;
        });
    std::sort(taken.begin(), taken.end(), [](const LazyEntry& a, const LazyEntry& b) {
      if (a.lift != b.lift) return a.lift > b.lift;
      return a.object < b.object;
    });
    std::vector<ObjectId> out;
    out.reserve(taken.size());
    for (const LazyEntry& e : taken) out.push_back(e.object);
    return out;
  }

  // Feed every replayed event (hits included) so windows and session
  // liveness track actual interactions. Call after on_miss for the event.
  void record_event(const AccessEvent& event) {
    auto& history = history_[event.user_id];
    history.push_back(event.object_id);
    const std::size_t keep =
        static_cast<std::size_t>(std::max(params_.window, params_.history_window));
    while (history.size() > keep) history.pop_front();
    last_seen_[event.user_id] = event.time;
  }

  double association_factor(UserId user, ObjectId object) const {
    return factors_.factor(factor_key(user, object));
  }
  const LazyFetchQueue& lazy_queue() const { return lazy_; }
  const SpaarcParams& params() const { return params_; }

 private:
  Itemset context_for(UserId user, ObjectId missed) const {
    std::vector<ObjectId> ids{missed};
    auto it = history_.find(user);
    if (it != history_.end()) {
      const auto& history = it->second;
      const std::size_t n = std::min<std::size_t>(history.size(),
                                                  static_cast<std::size_t>(params_.history_window));
      ids.insert(ids.end(), history.end() - static_cast<std::ptrdiff_t>(n), history.end());
    }
    return make_itemset(std::move(ids));
  }

  std::uint64_t window_references(UserId user, ObjectId object) const {
    auto it = history_.find(user);
    if (it == history_.end()) return 0;
    const auto& history = it->second;
    const std::size_t n =
        std::min<std::size_t>(history.size(), static_cast<std::size_t>(params_.window));
    std::uint64_t count = 0;
    for (auto h = history.end() - static_cast<std::ptrdiff_t>(n); h != history.end(); ++h) {
      if (*h == object) ++count;
    }
    return count;
  }

  ObjectId factor_key(UserId user, ObjectId object) const {
    if (!params_.per_user_factors) return object;
    // Disjoint per-user key space; object ids are dense small integers.
    return (user + 1) * (std::int64_t{1} << 32) + object;
  }

  SpaarcParams params_;
  const Catalog* catalog_;
  double session_gap_;
  RulesetSlot slot_;
  AssociationFactorTable factors_;
  std::unordered_map<UserId, std::deque<ObjectId>> history_;
  std::unordered_map<UserId, double> last_seen_;
  LazyFetchQueue lazy_;
};

}  // namespace spaarc
