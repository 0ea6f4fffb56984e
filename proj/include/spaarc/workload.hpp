#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

#include "spaarc/domain.hpp"
#include "spaarc/geometry.hpp"
#include "spaarc/rng.hpp"

namespace spaarc {

// Objects are spaced so each one's nearest neighbour sits within this band,
// and synthetic sizes are drawn uniformly from the same numeric range in MB.
inline constexpr double kMinObjectSpacing = 10.0;
inline constexpr double kMaxObjectSpacing = 15.0;
inline constexpr double kMinObjectSizeMb = 10.0;
inline constexpr double kMaxObjectSizeMb = 15.0;
inline constexpr double kDwellFloorSeconds = 0.1;

struct WorkloadConfig {
  int n_objects = 50;
  int n_users = 100;  // one session per user
  double planted_support = 0.30;
  double planted_itemset_fraction = 0.40;  // fraction of items grouped into planted itemsets
  double region_size = 200.0;
  std::vector<Rect> obstacle_rects;
  double arrival_rate = 0.5;      // session starts per second (Poisson)
  double interaction_mean = 5.0;  // dwell seconds (normal, truncated positive)
  double interaction_std = 2.0;
  double walk_speed = 1.0;  // unit distance per second
  int session_min_items = 4;
  int session_max_items = 10;
  // When in (0, 1): users starting after this fraction of arrivals draw from a
  // second, disjoint group of planted itemsets. Models an access-pattern shift.
  double pattern_shift_at = 0.0;
  std::uint64_t seed = 1;

  void validate() const {
    if (n_objects < 1) throw std::invalid_argument("workload.objects must be >= 1");
    if (n_users < 1) throw std::invalid_argument("workload.users must be >= 1");
    if (!(planted_support > 0.0 && planted_support < 1.0) && planted_support != 1.0) {
      throw std::invalid_argument("workload.planted_support must be in (0, 1]");
    }
    if (planted_itemset_fraction < 0.0 || planted_itemset_fraction > 1.0) {
      throw std::invalid_argument("workload.planted_fraction must be in [0, 1]");
    }
    if (!(region_size > 0.0)) throw std::invalid_argument("workload.region must be > 0");
    if (!(arrival_rate > 0.0)) throw std::invalid_argument("workload.arrival_rate must be > 0");
    if (!(interaction_mean > 0.0)) {
      throw std::invalid_argument("workload.interaction_mean must be > 0");
    }
    if (!(interaction_std > 0.0) || interaction_std >= interaction_mean) {
      throw std::invalid_argument("workload.interaction_std must be in (0, interaction_mean)");
    }
    if (!(walk_speed > 0.0)) throw std::invalid_argument("workload.walk_speed must be > 0");
    if (session_min_items < 1 || session_max_items < session_min_items) {
      throw std::invalid_argument("workload.session item bounds invalid");
    }
    if (pattern_shift_at < 0.0 || pattern_shift_at >= 1.0) {
      throw std::invalid_argument("workload.shift_at must be in [0, 1)");
    }
  }
};

struct GeneratedWorkload {
  Catalog catalog;
  std::vector<AccessEvent> trace;
  std::vector<Itemset> planted_itemsets;  // ground truth for audits
};

namespace detail {

inline bool inside_obstacle(const std::vector<Rect>& obstacles, Point2 p) {
  for (const Rect& r : obstacles) {
    if (r.contains(p)) return true;
  }
  return false;
}

inline double min_distance_to(const std::vector<Point2>& points, Point2 p) {
  double best = std::numeric_limits<double>::infinity();
  for (Point2 q : points) best = std::min(best, distance(p, q));
  return best;
}

// Nearest-neighbour visiting order over the given object positions, starting
// from `from`. Ties go to the smaller id.
inline std::vector<ObjectId> nearest_neighbor_tour(const Catalog& catalog,
                                                   std::vector<ObjectId> items, Point2 from) {
  std::sort(items.begin(), items.end());
  std::vector<ObjectId> tour;
  tour.reserve(items.size());
  Point2 at = from;
  while (!items.empty()) {
    std::size_t best = 0;
    double best_dist = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < items.size(); ++i) {
      const double d = distance(at, catalog.at(items[i]).position);
      if (d < best_dist) {
        best_dist = d;
        best = i;
      }
    }
    at = catalog.at(items[best]).position;
    tour.push_back(items[best]);
    items.erase(items.begin() + static_cast<std::ptrdiff_t>(best));
  }
  return tour;
}

// Appends one user session walking a nearest-neighbour tour over `items`,
// dwelling a truncated-normal time at each object.
inline void emit_session(std::vector<AccessEvent>& trace, const Catalog& catalog,
                         const WorkloadConfig& config, Rng& rng, UserId user, double start_time,
                         std::vector<ObjectId> items) {
  Point2 at{rng.uniform(0.0, config.region_size), rng.uniform(0.0, config.region_size)};
  double now = start_time;
  for (ObjectId id : nearest_neighbor_tour(catalog, std::move(items), at)) {
    const Point2 target = catalog.at(id).position;
    now += distance(at, target) / config.walk_speed;
    at = target;
    trace.push_back(AccessEvent{now, user, id, at});
    now += std::max(kDwellFloorSeconds, rng.normal(config.interaction_mean, config.interaction_std));
  }
}

inline void sort_trace(std::vector<AccessEvent>& trace) {
  std::stable_sort(trace.begin(), trace.end(),
                   [](const AccessEvent& a, const AccessEvent& b) { return a.time < b.time; });
}

}  // namespace detail

// Places objects by rejection sampling: each new object is anchored within
// [min, max] spacing of an already placed one and rejected when it lands in an
// obstacle, outside the region, or closer than the minimum spacing to any
// other object. Sizes are uniform in [10, 15] MB. Deterministic given seed.
inline Catalog generate_environment(const WorkloadConfig& config) {
  config.validate();
  double obstacle_area = 0.0;
  for (const Rect& r : config.obstacle_rects) {
    obstacle_area += std::max(0.0, r.x1 - r.x0) * std::max(0.0, r.y1 - r.y0);
  }
  const double usable = config.region_size * config.region_size - obstacle_area;
  if (usable < static_cast<double>(config.n_objects) * kMinObjectSpacing * kMinObjectSpacing) {
    throw std::invalid_argument("workload.region too small for " +
                                std::to_string(config.n_objects) + " objects at minimum spacing");
  }

  Rng rng(Rng::derive(config.seed, 0xE27));
  std::vector<Point2> positions;
  positions.reserve(static_cast<std::size_t>(config.n_objects));

  const int max_tries = 4000;
  int tries = 0;
  while (positions.empty()) {
    if (++tries > max_tries) {
      throw std::runtime_error("environment placement failed: no valid position for first object");
    }
    Point2 p{rng.uniform(0.0, config.region_size), rng.uniform(0.0, config.region_size)};
    if (!detail::inside_obstacle(config.obstacle_rects, p)) positions.push_back(p);
  }

  while (positions.size() < static_cast<std::size_t>(config.n_objects)) {
    bool placed = false;
    for (tries = 0; tries < max_tries; ++tries) {
      const Point2 anchor =
          positions[static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(positions.size()) - 1))];
      const double angle = rng.uniform(0.0, 2.0 * 3.141592653589793);
      const double radius = rng.uniform(kMinObjectSpacing, kMaxObjectSpacing);
      const Point2 p{anchor.x + radius * std::cos(angle), anchor.y + radius * std::sin(angle)};
      if (p.x < 0.0 || p.x > config.region_size || p.y < 0.0 || p.y > config.region_size) continue;
      if (detail::inside_obstacle(config.obstacle_rects, p)) continue;
      if (detail::min_distance_to(positions, p) < kMinObjectSpacing) continue;
      positions.push_back(p);
      placed = true;
      break;
    }
    if (!placed) {
      throw std::runtime_error("environment placement failed after bounded retries: region "
                               "cannot hold " + std::to_string(config.n_objects) + " objects");
    }
  }

  std::vector<VirtualObject> objects;
  objects.reserve(positions.size());
  for (std::size_t i = 0; i < positions.size(); ++i) {
    objects.push_back(VirtualObject{static_cast<ObjectId>(i),
                                    rng.uniform(kMinObjectSizeMb, kMaxObjectSizeMb), positions[i]});
  }
  return Catalog(std::move(objects));
}

namespace detail {

// Splits the planted item pool into disjoint itemsets of size 2-4. Members of
// one itemset are chosen by spatial proximity: a random anchor plus its
// nearest remaining pool items, mirroring how co-accessed objects share an
// aisle or exhibit.
inline std::vector<Itemset> partition_into_itemsets(std::vector<ObjectId> pool,
                                                    const Catalog& catalog, Rng& rng) {
  std::vector<Itemset> sets;
  std::sort(pool.begin(), pool.end());
  while (pool.size() >= 2) {
    auto size = static_cast<std::size_t>(rng.uniform_int(2, 4));
    size = std::min(size, pool.size());
    if (pool.size() - size == 1) {
      // Avoid stranding a single leftover item.
      if (size < 4) {
        ++size;
      } else {
        --size;
      }
    }
    const auto anchor_at = static_cast<std::size_t>(
        rng.uniform_int(0, static_cast<std::int64_t>(pool.size()) - 1));
    const ObjectId anchor = pool[anchor_at];
    pool.erase(pool.begin() + static_cast<std::ptrdiff_t>(anchor_at));
    Itemset set{anchor};
    const Point2 center = catalog.at(anchor).position;
    while (set.size() < size && !pool.empty()) {
      std::size_t best = 0;
      double best_dist = std::numeric_limits<double>::infinity();
      for (std::size_t i = 0; i < pool.size(); ++i) {
        const double d = distance(center, catalog.at(pool[i]).position);
        if (d < best_dist) {
          best_dist = d;
          best = i;
        }
      }
      set.push_back(pool[best]);
      pool.erase(pool.begin() + static_cast<std::ptrdiff_t>(best));
    }
    std::sort(set.begin(), set.end());
    sets.push_back(std::move(set));
  }
  return sets;
}

}  // namespace detail

// Generates the multi-user trace: Poisson session arrivals, per-session item
// lists that include each planted itemset with probability planted_support,
// and spatially coherent walks between the chosen objects.
inline GeneratedWorkload generate_trace(const WorkloadConfig& config, const Catalog& catalog) {
  config.validate();
  if (catalog.empty()) throw std::invalid_argument("generate_trace: empty catalog");

  std::vector<ObjectId> all_ids;
  all_ids.reserve(catalog.size());
  for (const VirtualObject& obj : catalog.objects()) all_ids.push_back(obj.id);

  Rng plant_rng(Rng::derive(config.seed, 0x91A));
  std::vector<ObjectId> pool = all_ids;
  plant_rng.shuffle(pool);
  const auto planted_count = static_cast<std::size_t>(
      std::floor(config.planted_itemset_fraction * static_cast<double>(all_ids.size())));
  pool.resize(planted_count);

  std::vector<Itemset> group_a, group_b;
  if (config.pattern_shift_at > 0.0) {
    std::vector<ObjectId> first_half(pool.begin(),
                                     pool.begin() + static_cast<std::ptrdiff_t>(pool.size() / 2));
    std::vector<ObjectId> second_half(pool.begin() + static_cast<std::ptrdiff_t>(pool.size() / 2),
                                      pool.end());
    group_a = detail::partition_into_itemsets(std::move(first_half), catalog, plant_rng);
    group_b = detail::partition_into_itemsets(std::move(second_half), catalog, plant_rng);
  } else {
    group_a = detail::partition_into_itemsets(std::move(pool), catalog, plant_rng);
  }

  // Filler items come from outside every planted itemset, so the empirical
  // support of a planted set equals its coin probability up to sampling noise.
  Itemset planted_members;
  for (const auto* group : {&group_a, &group_b}) {
    for (const Itemset& set : *group) {
      planted_members.insert(planted_members.end(), set.begin(), set.end());
    }
  }
  planted_members = make_itemset(std::move(planted_members));
  std::vector<ObjectId> fill_pool;
  for (ObjectId id : all_ids) {
    if (!itemset_contains(planted_members, id)) fill_pool.push_back(id);
  }

  Rng arrival_rng(Rng::derive(config.seed, 0xA55));
  const auto shift_user = static_cast<std::int64_t>(
      config.pattern_shift_at * static_cast<double>(config.n_users));

  GeneratedWorkload out;
  double start = 0.0;
  for (std::int64_t user = 0; user < config.n_users; ++user) {
    start += arrival_rng.exponential(config.arrival_rate);
    Rng user_rng(Rng::derive(config.seed, 0x5E55 + static_cast<std::uint64_t>(user)));

    const std::vector<Itemset>& group =
        (config.pattern_shift_at > 0.0 && user >= shift_user) ? group_b : group_a;
    std::vector<ObjectId> items;
    for (const Itemset& set : group) {
      if (user_rng.uniform01() < config.planted_support) {
        items.insert(items.end(), set.begin(), set.end());
      }
    }
    const auto target =
        static_cast<std::size_t>(user_rng.uniform_int(config.session_min_items,
                                                      config.session_max_items));
    Itemset have = make_itemset(items);
    const std::size_t fill_limit = have.size() + fill_pool.size();
    while (have.size() < target && have.size() < fill_limit) {
      const ObjectId pick = fill_pool[static_cast<std::size_t>(
          user_rng.uniform_int(0, static_cast<std::int64_t>(fill_pool.size()) - 1))];
      if (!itemset_contains(have, pick)) {
        have.insert(std::lower_bound(have.begin(), have.end(), pick), pick);
      }
    }
    detail::emit_session(out.trace, catalog, config, user_rng, user, start,
                         {have.begin(), have.end()});
  }

  detail::sort_trace(out.trace);
  out.catalog = catalog;
  out.planted_itemsets = std::move(group_a);
  out.planted_itemsets.insert(out.planted_itemsets.end(), group_b.begin(), group_b.end());
  return out;
}

inline GeneratedWorkload generate_workload(const WorkloadConfig& config) {
  return generate_trace(config, generate_environment(config));
}

// Turns SPMF transactions into a replayable workload: objects are placed for
// the distinct item universe, and each transaction becomes one user session
// visiting its items in nearest-neighbour order.
inline GeneratedWorkload spmf_to_trace(const std::vector<Transaction>& transactions,
                                       const WorkloadConfig& config) {
  config.validate();
  if (transactions.empty()) throw std::invalid_argument("spmf_to_trace: no transactions");

  std::vector<ObjectId> ids;
  for (const Transaction& tx : transactions) {
    ids.insert(ids.end(), tx.items.begin(), tx.items.end());
  }
  ids = make_itemset(std::move(ids));

  WorkloadConfig env_config = config;
  env_config.n_objects = static_cast<int>(ids.size());
  const Catalog placed = generate_environment(env_config);

  // Re-key placements to the dataset's item ids.
  std::vector<VirtualObject> objects;
  objects.reserve(ids.size());
  for (std::size_t i = 0; i < ids.size(); ++i) {
    VirtualObject obj = placed.objects()[i];
    obj.id = ids[i];
    objects.push_back(obj);
  }

  GeneratedWorkload out;
  out.catalog = Catalog(std::move(objects));

  Rng arrival_rng(Rng::derive(config.seed, 0xA55));
  double start = 0.0;
  for (std::size_t i = 0; i < transactions.size(); ++i) {
    start += arrival_rng.exponential(config.arrival_rate);
    Rng user_rng(Rng::derive(config.seed, 0x5E55 + i));
    detail::emit_session(out.trace, out.catalog, config, user_rng,
                         static_cast<UserId>(i), start,
                         {transactions[i].items.begin(), transactions[i].items.end()});
  }
  detail::sort_trace(out.trace);
  return out;
}

}  // namespace spaarc
