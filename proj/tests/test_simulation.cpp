#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <vector>

#include "spaarc/simulation.hpp"
#include "spaarc/workload.hpp"

#include "support/oracles.hpp"

namespace {

using namespace spaarc;
using spaarc_test::unit_catalog;

RunConfig base_config(RunMode mode, double capacity_mb, EvictionPolicy policy) {
  RunConfig config;
  config.mode = mode;
  config.cache = {capacity_mb, policy};
  config.spaarc.association_factor_threshold = 0.0;
  config.spaarc.min_support = 0.4;
  config.spaarc.min_confidence = 0.5;
  return config;
}

// Alternating-pair workload: sessions {0,1} and {2,3}, cache fits one pair.
// Baseline FIFO misses every access; prefetching recovers the second object
// of each pair.
std::vector<AccessEvent> alternating_pairs(int sessions) {
  std::vector<AccessEvent> trace;
  for (int s = 0; s < sessions; ++s) {
    const double t = 10.0 * s;
    const ObjectId first = (s % 2 == 0) ? 0 : 2;
    const Point2 p0 = {first == 0 ? 0.0 : 100.0, 0.0};
    const Point2 p1 = {first == 0 ? 10.0 : 110.0, 0.0};
    trace.push_back({t, s + 1, first, p0});
    trace.push_back({t + 1.0, s + 1, first + 1, p1});
  }
  return trace;
}

Catalog pairs_catalog() {
  return Catalog({{0, 10.0, {0, 0}},
                  {1, 10.0, {10, 0}},
                  {2, 10.0, {100, 0}},
                  {3, 10.0, {110, 0}}});
}

TEST(Simulation, BaselineNeverPrefetches) {
  const auto catalog = pairs_catalog();
  const auto trace = alternating_pairs(10);
  const auto report = run(trace, catalog, base_config(RunMode::Baseline, 20.0,
                                                      EvictionPolicy::Fifo));
  EXPECT_EQ(report.prefetch_count, 0u);
  EXPECT_EQ(report.cache_stats.prefetch_insertions, 0u);
}

TEST(Simulation, ColdMissFloorOnUniqueObjects) {
  const auto catalog = unit_catalog(30);
  std::vector<AccessEvent> trace;
  for (int i = 0; i < 30; ++i) {
    trace.push_back({static_cast<double>(i), 1, i, {0, 0}});
  }
  const auto report =
      run(trace, catalog, base_config(RunMode::Baseline, 100.0, EvictionPolicy::Lru));
  EXPECT_DOUBLE_EQ(report.overall_hit_rate, 0.0);
}

TEST(Simulation, SpaarcBeatsBaselineOnPlantedPairs) {
  const auto catalog = pairs_catalog();
  const auto trace = alternating_pairs(10);  // 20 events
  const auto baseline =
      run(trace, catalog, base_config(RunMode::Baseline, 20.0, EvictionPolicy::Fifo));
  const auto spaarc_mode =
      run(trace, catalog, base_config(RunMode::Spaarc, 20.0, EvictionPolicy::Fifo));
  // Hand replay: baseline evicts each pair before it returns, so every access
  // misses; SPAARC prefetches the partner object, hitting on the second
  // access of every session.
  EXPECT_DOUBLE_EQ(baseline.overall_hit_rate, 0.0);
  EXPECT_DOUBLE_EQ(spaarc_mode.overall_hit_rate, 0.5);
  EXPECT_GT(spaarc_mode.overall_hit_rate, baseline.overall_hit_rate);
  EXPECT_LT(spaarc_mode.on_demand_fetches, baseline.on_demand_fetches);
}

TEST(Simulation, InstantFetchHitsOnNextAccess) {
  const auto catalog = pairs_catalog();
  RunConfig config = base_config(RunMode::Spaarc, 40.0, EvictionPolicy::Lru);
  config.latency.cloud_rtt_ms = 0.0;  // instantaneous cloud
  const std::vector<AccessEvent> trace = {
      {0.0, 1, 0, {0, 0}}, {0.0, 1, 1, {10, 0}},  // same timestamp
      {5.0, 2, 0, {0, 0}}, {5.0, 2, 1, {10, 0}},
  };
  const auto report = run(trace, catalog, config);
  // First access misses, everything afterwards is resident immediately.
  EXPECT_EQ(report.cache_stats.misses, 1u);
  EXPECT_EQ(report.cache_stats.hits, 3u);
}

TEST(Simulation, InFlightMissesCoalesce) {
  const auto catalog = pairs_catalog();
  const std::vector<AccessEvent> trace = {
      {0.0, 1, 0, {0, 0}},
      {0.03, 2, 0, {0, 0}},  // within the 60 ms flight window
      {1.0, 3, 0, {0, 0}},
  };
  const auto report =
      run(trace, catalog, base_config(RunMode::Baseline, 20.0, EvictionPolicy::Lru));
  EXPECT_EQ(report.cache_stats.misses, 2u);
  EXPECT_EQ(report.on_demand_fetches, 1u);  // coalesced
  EXPECT_EQ(report.cache_stats.hits, 1u);   // third access lands after arrival
}

TEST(Simulation, ConservationOfInsertions) {
  WorkloadConfig wconfig;
  wconfig.n_objects = 20;
  wconfig.n_users = 60;
  wconfig.seed = 9;
  const auto workload = generate_workload(wconfig);
  for (RunMode mode : {RunMode::Baseline, RunMode::AssociationOnly, RunMode::Spaarc}) {
    const auto report =
        run(workload.trace, workload.catalog,
            base_config(mode, 0.25 * workload.catalog.total_size_mb(), EvictionPolicy::Lru));
    EXPECT_EQ(report.cache_stats.insertions,
              report.on_demand_fetches + report.cache_stats.prefetch_insertions);
    EXPECT_EQ(report.cache_stats.prefetch_insertions, report.prefetch_count);
  }
}

TEST(Simulation, MeanLatencyIdentity) {
  WorkloadConfig wconfig;
  wconfig.n_objects = 15;
  wconfig.n_users = 40;
  wconfig.seed = 3;
  const auto workload = generate_workload(wconfig);
  const auto config =
      base_config(RunMode::Baseline, 0.3 * workload.catalog.total_size_mb(), EvictionPolicy::Lfu);
  const auto report = run(workload.trace, workload.catalog, config);
  const double expected =
      report.overall_hit_rate * config.latency.edge_hit_ms +
      (1.0 - report.overall_hit_rate) * (config.latency.edge_hit_ms + config.latency.cloud_rtt_ms);
  EXPECT_NEAR(report.mean_access_latency_ms, expected, 1e-9);
}

TEST(Simulation, DeterministicReports) {
  WorkloadConfig wconfig;
  wconfig.n_objects = 20;
  wconfig.n_users = 50;
  wconfig.seed = 21;
  const auto workload = generate_workload(wconfig);
  const auto config =
      base_config(RunMode::Spaarc, 0.2 * workload.catalog.total_size_mb(), EvictionPolicy::Fifo);
  const auto a = run(workload.trace, workload.catalog, config);
  const auto b = run(workload.trace, workload.catalog, config);
  EXPECT_EQ(a.overall_hit_rate, b.overall_hit_rate);
  EXPECT_EQ(a.on_demand_fetches, b.on_demand_fetches);
  EXPECT_EQ(a.prefetch_count, b.prefetch_count);
  ASSERT_EQ(a.viewpoints.size(), b.viewpoints.size());
  for (std::size_t i = 0; i < a.viewpoints.size(); ++i) {
    EXPECT_EQ(a.viewpoints[i].hits, b.viewpoints[i].hits);
    EXPECT_EQ(a.viewpoints[i].hit_rate, b.viewpoints[i].hit_rate);
  }
}

TEST(Simulation, ViewpointRowsSumToTotals) {
  WorkloadConfig wconfig;
  wconfig.n_objects = 12;
  wconfig.n_users = 33;
  wconfig.seed = 4;
  const auto workload = generate_workload(wconfig);
  const auto report = run(
      workload.trace, workload.catalog,
      base_config(RunMode::Baseline, 0.3 * workload.catalog.total_size_mb(), EvictionPolicy::Pop));
  std::uint64_t hits = 0, misses = 0;
  for (const auto& row : report.viewpoints) {
    hits += row.hits;
    misses += row.misses;
  }
  EXPECT_EQ(hits, report.cache_stats.hits);
  EXPECT_EQ(misses, report.cache_stats.misses);
  EXPECT_EQ(hits + misses, workload.trace.size());
}

TEST(Simulation, RejectsTraceCatalogMismatch) {
  const auto catalog = unit_catalog(2);
  const std::vector<AccessEvent> trace = {{0.0, 1, 9, {0, 0}}};
  EXPECT_THROW(run(trace, catalog, base_config(RunMode::Baseline, 30.0, EvictionPolicy::Lru)),
               std::invalid_argument);
}

TEST(Simulation, RejectsCapacityBelowLargestObject) {
  const auto catalog = unit_catalog(2);  // 10 MB objects
  const std::vector<AccessEvent> trace = {{0.0, 1, 0, {0, 0}}};
  EXPECT_THROW(run(trace, catalog, base_config(RunMode::Baseline, 5.0, EvictionPolicy::Lru)),
               std::invalid_argument);
}

TEST(Simulation, TunerModeRunsAndLogs) {
  WorkloadConfig wconfig;
  wconfig.n_objects = 20;
  wconfig.n_users = 80;
  wconfig.seed = 31;
  const auto workload = generate_workload(wconfig);
  RunConfig config =
      base_config(RunMode::SpaarcTune, 0.2 * workload.catalog.total_size_mb(),
                  EvictionPolicy::Fifo);
  config.tuner.bootstrap_min_transactions = 10;
  const auto log_path = std::filesystem::temp_directory_path() / "spaarc_tuner_log_test.csv";
  config.tuner_log_path = log_path.string();
  const auto report = run(workload.trace, workload.catalog, config);
  EXPECT_GT(report.viewpoints.size(), 0u);
  std::ifstream log(log_path);
  ASSERT_TRUE(log.good());
  std::string header;
  std::getline(log, header);
  EXPECT_EQ(header, "viewpoint,hit_rate,hrd,action,active_min_support");
  std::filesystem::remove(log_path);
}

TEST(Compare, HandArithmetic) {
  RunReport baseline, treatment;
  baseline.overall_hit_rate = 0.40;
  treatment.overall_hit_rate = 0.50;
  baseline.on_demand_fetches = 100;
  treatment.on_demand_fetches = 80;
  treatment.prefetch_count = 30;
  const auto delta = compare(baseline, treatment);
  EXPECT_DOUBLE_EQ(delta.hit_rate_gain_pct, 25.0);
  EXPECT_DOUBLE_EQ(delta.on_demand_reduction_pct, 20.0);
  EXPECT_DOUBLE_EQ(delta.prefetch_overhead_x, 0.30);
}

TEST(Compare, IdenticalReportsGiveZeroDeltas) {
  RunReport report;
  report.overall_hit_rate = 0.42;
  report.on_demand_fetches = 50;
  const auto delta = compare(report, report);
  EXPECT_DOUBLE_EQ(delta.hit_rate_gain_pct, 0.0);
  EXPECT_DOUBLE_EQ(delta.on_demand_reduction_pct, 0.0);
}

TEST(Compare, RefusesMismatchedSetups) {
  RunReport a, b;
  a.setup_fingerprint = "FIFO:100";
  b.setup_fingerprint = "LRU:100";
  EXPECT_THROW(compare(a, b), std::invalid_argument);
}

TEST(Simulation, ReportCsvShape) {
  const auto catalog = pairs_catalog();
  const auto trace = alternating_pairs(6);
  const auto report =
      run(trace, catalog, base_config(RunMode::Baseline, 20.0, EvictionPolicy::Fifo));
  std::ostringstream out;
  write_report_csv(out, report);
  const std::string text = out.str();
  EXPECT_EQ(text.rfind("viewpoint,hits,misses,hit_rate,on_demand,prefetches\n", 0), 0u);
  EXPECT_NE(text.find("\nsummary,"), std::string::npos);
}

}  // namespace
