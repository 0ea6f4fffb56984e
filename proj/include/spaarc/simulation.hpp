#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <limits>
#include <memory>
#include <optional>
#include <queue>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include "spaarc/cache.hpp"
#include "spaarc/domain.hpp"
#include "spaarc/prefetcher.hpp"
#include "spaarc/trace_io.hpp"
#include "spaarc/tuner.hpp"

namespace spaarc {

enum class RunMode { Baseline, AssociationOnly, Spaarc, SpaarcTune };

inline std::string_view to_string(RunMode mode) {
  switch (mode) {
    case RunMode::Baseline: return "baseline";
    case RunMode::AssociationOnly: return "association";
    case RunMode::Spaarc: return "spaarc";
    case RunMode::SpaarcTune: return "spaarc-tune";
  }
  return "?";
}

inline RunMode parse_mode(std::string_view name) {
  if (name == "baseline") return RunMode::Baseline;
  if (name == "association" || name == "association-only") return RunMode::AssociationOnly;
  if (name == "spaarc") return RunMode::Spaarc;
  if (name == "spaarc-tune" || name == "tune") return RunMode::SpaarcTune;
  throw std::invalid_argument("unknown run mode '" + std::string(name) +
                              "' (expected baseline, association, spaarc or spaarc-tune)");
}

struct LatencyModel {
  double cloud_rtt_ms = 60.0;
  double edge_hit_ms = 5.0;
  double immersion_budget_ms = 20.0;

  // cloud_rtt_ms of zero models an instantaneous fetch; anything between zero
  // and the edge latency makes no physical sense.
  void validate() const {
    if (!(edge_hit_ms > 0.0) || cloud_rtt_ms < 0.0 ||
        (cloud_rtt_ms != 0.0 && cloud_rtt_ms <= edge_hit_ms)) {
      throw std::invalid_argument("latency model requires cloud_rtt_ms > edge_hit_ms > 0");
    }
  }
};

struct RunConfig {
  RunMode mode = RunMode::Baseline;
  CacheConfig cache;
  SpaarcParams spaarc;
  TunerConfig tuner;
  LatencyModel latency;
  ArmOptions arm;                   // itemset-size bound for static-mode mining
  double session_gap = 60.0;
  std::size_t viewpoint_size = 10;  // lookups per hit-rate sample
  std::uint64_t seed = 1;           // recorded for provenance; replay is deterministic
  std::string decision_log_path;    // optional prefetch audit CSV
  std::string tuner_log_path;       // optional tuner event CSV

  void validate() const {
    cache.validate();
    latency.validate();
    if (mode != RunMode::Baseline) spaarc.validate();
    if (mode == RunMode::SpaarcTune) tuner.validate();
    if (viewpoint_size == 0) throw std::invalid_argument("run.viewpoint_size must be >= 1");
    if (!(session_gap > 0.0)) throw std::invalid_argument("run.session_gap must be > 0");
  }
};

struct ViewpointRow {
  std::size_t viewpoint = 0;
  std::uint64_t hits = 0;    // within this viewpoint
  std::uint64_t misses = 0;  // within this viewpoint
  double hit_rate = 0.0;     // of this viewpoint's window; drives degradation checks
  std::uint64_t on_demand = 0;
  std::uint64_t prefetches = 0;
};

struct RunReport {
  RunMode mode = RunMode::Baseline;
  EvictionPolicy policy = EvictionPolicy::Lru;
  std::uint64_t seed = 0;
  double overall_hit_rate = 0.0;
  std::vector<ViewpointRow> viewpoints;
  std::uint64_t on_demand_fetches = 0;
  std::uint64_t prefetch_count = 0;
  double mean_access_latency_ms = 0.0;
  CacheStats cache_stats;
  // Identity fields; compare() refuses reports from different experiments.
  std::uint64_t trace_fingerprint = 0;
  std::uint64_t catalog_fingerprint = 0;
  std::string setup_fingerprint;
};

namespace detail {

inline std::uint64_t fnv1a(const void* data, std::size_t len, std::uint64_t h = 1469598103934665603ULL) {
  const auto* bytes = static_cast<const unsigned char*>(data);
  for (std::size_t i = 0; i < len; ++i) {
    h ^= bytes[i];
    h *= 1099511628211ULL;
  }
  return h;
}

inline std::uint64_t fingerprint_trace(std::span<const AccessEvent> trace) {
  std::uint64_t h = 1469598103934665603ULL;
  for (const AccessEvent& e : trace) {
    h = fnv1a(&e.time, sizeof(e.time), h);
    h = fnv1a(&e.user_id, sizeof(e.user_id), h);
    h = fnv1a(&e.object_id, sizeof(e.object_id), h);
    h = fnv1a(&e.user_position.x, sizeof(double), h);
    h = fnv1a(&e.user_position.y, sizeof(double), h);
  }
  return h;
}

inline std::uint64_t fingerprint_catalog(const Catalog& catalog) {
  std::uint64_t h = 1469598103934665603ULL;
  for (const VirtualObject& obj : catalog.objects()) {
    h = fnv1a(&obj.id, sizeof(obj.id), h);
    h = fnv1a(&obj.size_mb, sizeof(obj.size_mb), h);
    h = fnv1a(&obj.position.x, sizeof(double), h);
    h = fnv1a(&obj.position.y, sizeof(double), h);
  }
  return h;
}

// What must match for two runs to be comparable: same cache, latency and
// replay framing. Mode and prefetch parameters are allowed to differ.
inline std::string setup_fingerprint(const RunConfig& config) {
  std::ostringstream out;
  out << to_string(config.cache.policy) << ':' << format_double(config.cache.capacity_mb) << ':'
      << format_double(config.latency.cloud_rtt_ms) << ':'
      << format_double(config.latency.edge_hit_ms) << ':' << format_double(config.session_gap)
      << ':' << config.viewpoint_size << ':' << config.seed;
  return out.str();
}

}  // namespace detail

// Replays a trace against a cache, optionally with SPAARC prefetching and the
// minimum-support tuner. Misses are synchronous (the user waits one cloud
// round trip); fetched objects become resident cloud_rtt_ms later, and lookups
// before arrival still miss but coalesce onto the in-flight fetch.
inline RunReport run(std::span<const AccessEvent> trace, const Catalog& catalog,
                     const RunConfig& config) {
  config.validate();
  for (std::size_t i = 0; i < trace.size(); ++i) {
    if (!catalog.contains(trace[i].object_id)) {
      throw std::invalid_argument("trace/catalog mismatch: event " + std::to_string(i) +
                                  " references unknown object " +
                                  std::to_string(trace[i].object_id));
    }
  }
  if (catalog.max_object_size_mb() > config.cache.capacity_mb) {
    throw std::invalid_argument("cache capacity " + std::to_string(config.cache.capacity_mb) +
                                " MB cannot fit the largest catalog object");
  }

  const bool prefetching = config.mode != RunMode::Baseline;
  const bool tuning = config.mode == RunMode::SpaarcTune;

  Cache cache(config.cache, catalog);

  SpaarcParams params = config.spaarc;
  if (config.mode == RunMode::AssociationOnly) {
    // Raw rule-match prefetching: no factor gate, no proximity gate.
    params.association_factor_threshold = 0.0;
    params.proximity_threshold = std::numeric_limits<double>::infinity();
  }
  std::optional<Prefetcher> prefetcher;
  if (prefetching) prefetcher.emplace(params, catalog, config.session_gap);

  // Static modes mine the whole trace up front; the tuner mode starts with no
  // rules and generates them online.
  if (prefetching && !tuning) {
    auto transactions = sessionize(trace, config.session_gap);
    if (!transactions.empty()) {
      prefetcher->set_ruleset(std::make_shared<const RuleSet>(
          build_ruleset(transactions, params.min_support, params.min_confidence, config.arm)));
    }
  }

  std::optional<Tuner> tuner;
  if (tuning) {
    tuner.emplace(config.tuner, [&prefetcher](std::shared_ptr<const RuleSet> ruleset) {
      prefetcher->set_ruleset(std::move(ruleset));
    });
  }
  StreamSessionizer sessions(config.session_gap);

  struct PendingArrival {
    double time;
    std::uint64_t seq;
    ObjectId object;
    bool operator>(const PendingArrival& other) const {
      return time != other.time ? time > other.time : seq > other.seq;
    }
  };
  std::priority_queue<PendingArrival, std::vector<PendingArrival>, std::greater<>> arrivals;
  std::unordered_map<ObjectId, FetchOrigin> in_flight;
  std::uint64_t fetch_seq = 0;

  RunReport report;
  report.mode = config.mode;
  report.policy = config.cache.policy;
  report.seed = config.seed;
  report.trace_fingerprint = detail::fingerprint_trace(trace);
  report.catalog_fingerprint = detail::fingerprint_catalog(catalog);
  report.setup_fingerprint = detail::setup_fingerprint(config);

  std::ofstream decision_log;
  if (!config.decision_log_path.empty() && prefetching) {
    decision_log.open(config.decision_log_path, std::ios::binary);
    if (!decision_log) {
      throw std::runtime_error("cannot write decision log: " + config.decision_log_path);
    }
    decision_log << "time,user_id,missed,fetched_ids,deferred_ids\n";
  }

  const double rtt_seconds = config.latency.cloud_rtt_ms / 1000.0;
  double latency_sum_ms = 0.0;
  std::uint64_t prev_hits = 0, prev_misses = 0, prev_od = 0, prev_prefetch = 0;

  const auto issue_fetch = [&](ObjectId object, FetchOrigin origin, double now) {
    if (cache.contains(object) || in_flight.count(object) != 0) return false;
    in_flight.emplace(object, now + rtt_seconds);
    arrivals.push(PendingArrival{now + rtt_seconds, ++fetch_seq, object, origin});
    if (origin == FetchOrigin::OnDemand) {
      ++report.on_demand_fetches;
    } else {
      ++report.prefetch_count;
    }
    return true;
  };

  const auto process_arrivals = [&](double now) {
    while (!arrivals.empty() && arrivals.top().time <= now) {
      const PendingArrival arrival = arrivals.top();
      arrivals.pop();
      in_flight.erase(arrival.object);
      cache.insert(arrival.object, arrival.origin);
    }
  };

  const auto snapshot_viewpoint = [&]() {
    const CacheStats& s = cache.stats();
    ViewpointRow row;
    row.viewpoint = report.viewpoints.size() + 1;
    row.hits = s.hits - prev_hits;
    row.misses = s.misses - prev_misses;
    row.hit_rate = row.hits + row.misses == 0
                       ? 0.0
                       : static_cast<double>(row.hits) / static_cast<double>(row.hits + row.misses);
    row.on_demand = report.on_demand_fetches - prev_od;
    row.prefetches = report.prefetch_count - prev_prefetch;
    report.viewpoints.push_back(row);
    prev_hits = s.hits;
    prev_misses = s.misses;
    prev_od = report.on_demand_fetches;
    prev_prefetch = report.prefetch_count;
  };

  std::size_t views_in_viewpoint = 0;
  for (const AccessEvent& event : trace) {
    process_arrivals(event.time);

    if (prefetching) {
      for (ObjectId object :
           prefetcher->poll_lazy_queue(event.user_id, event.user_position, event.time, cache)) {
        issue_fetch(object, FetchOrigin::Prefetch, event.time);
      }
    }

    const LookupResult result = cache.lookup(event.object_id);
    latency_sum_ms += config.latency.edge_hit_ms;
    if (result == LookupResult::Miss) {
      latency_sum_ms += config.latency.cloud_rtt_ms;
      if (prefetching) {
        const PrefetchDecision decision =
            prefetcher->on_miss(event.object_id, event.user_id, event.user_position, cache);
        for (ObjectId object : decision.fetch_now) {
          issue_fetch(object,
                      object == event.object_id ? FetchOrigin::OnDemand : FetchOrigin::Prefetch,
                      event.time);
        }
        if (decision_log.is_open()) {
          const auto join = [](const std::vector<ObjectId>& ids) {
            std::string out;
            for (std::size_t i = 0; i < ids.size(); ++i) {
              if (i > 0) out += ';';
              out += std::to_string(ids[i]);
            }
            return out;
          };
          decision_log << format_double(event.time) << ',' << event.user_id << ','
                       << event.object_id << ',' << join(decision.fetch_now) << ','
                       << join(decision.deferred) << '\n';
        }
      } else {
        issue_fetch(event.object_id, FetchOrigin::OnDemand, event.time);
      }
    }

    if (prefetching) prefetcher->record_event(event);
    if (tuning) sessions.add(event);

    if (++views_in_viewpoint == config.viewpoint_size) {
      views_in_viewpoint = 0;
      snapshot_viewpoint();
      if (tuning) {
        tuner->on_viewpoint(report.viewpoints.back().hit_rate, sessions.snapshot());
      }
    }
  }
  if (views_in_viewpoint > 0) snapshot_viewpoint();

  // Drain outstanding fetches so insertion accounting balances.
  process_arrivals(std::numeric_limits<double>::infinity());

  const CacheStats& stats = cache.stats();
  report.cache_stats = stats;
  report.overall_hit_rate = stats.hit_rate();
  report.mean_access_latency_ms =
      stats.lookups() == 0 ? 0.0 : latency_sum_ms / static_cast<double>(stats.lookups());

  if (!config.tuner_log_path.empty() && tuning) {
    std::ofstream out(config.tuner_log_path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write tuner log: " + config.tuner_log_path);
    out << "viewpoint,hit_rate,hrd,action,active_min_support\n";
    for (const TunerEvent& e : tuner->events()) {
      out << e.viewpoint << ',' << format_double(e.hit_rate) << ',' << format_double(e.hrd) << ','
          << e.action << ',' << format_double(e.active_min_support) << '\n';
    }
  }
  return report;
}

inline void write_report_csv(std::ostream& out, const RunReport& report) {
  out << "viewpoint,hits,misses,hit_rate,on_demand,prefetches\n";
  for (const ViewpointRow& row : report.viewpoints) {
    out << row.viewpoint << ',' << row.hits << ',' << row.misses << ','
        << format_double(row.hit_rate) << ',' << row.on_demand << ',' << row.prefetches << '\n';
  }
  out << "summary," << report.cache_stats.hits << ',' << report.cache_stats.misses << ','
      << format_double(report.overall_hit_rate) << ',' << report.on_demand_fetches << ','
      << report.prefetch_count << '\n';
}

struct CompareResult {
  double hit_rate_gain_pct = 0.0;
  double on_demand_reduction_pct = 0.0;
  double prefetch_overhead_x = 0.0;  // treatment prefetches per baseline on-demand fetch
};

// Deltas between two runs of the same experiment cell family. Both reports
// must come from the same trace, catalog, cache setup and seed.
inline CompareResult compare(const RunReport& baseline, const RunReport& treatment) {
  if (baseline.trace_fingerprint != treatment.trace_fingerprint ||
      baseline.catalog_fingerprint != treatment.catalog_fingerprint ||
      baseline.setup_fingerprint != treatment.setup_fingerprint) {
    throw std::invalid_argument("compare: reports come from different traces or setups");
  }
  CompareResult out;
  const double hr_b = baseline.overall_hit_rate;
  const double hr_t = treatment.overall_hit_rate;
  out.hit_rate_gain_pct = hr_b == 0.0 ? 0.0 : (hr_t - hr_b) / hr_b * 100.0;
  const double od_b = static_cast<double>(baseline.on_demand_fetches);
  const double od_t = static_cast<double>(treatment.on_demand_fetches);
  out.on_demand_reduction_pct = od_b == 0.0 ? 0.0 : (od_b - od_t) / od_b * 100.0;
  out.prefetch_overhead_x =
      od_b == 0.0 ? 0.0 : static_cast<double>(treatment.prefetch_count) / od_b;
  return out;
}

}  // namespace spaarc
