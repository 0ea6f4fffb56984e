#pragma once

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <tuple>
#include <vector>

#include "spaarc/simulation.hpp"
#include "spaarc/trace_io.hpp"
#include "spaarc/workload.hpp"

namespace spaarc {

// Flat `key = value` configuration with `#` comments and dotted section keys.
// Values are plain scalars or comma-separated lists. Every key must be
// consumed by the experiment builder; leftovers are reported as errors so a
// typo cannot silently fall back to a default.
class Config {
 public:
  static Config parse(std::string_view text, const std::string& name = "config") {
    Config config;
    config.name_ = name;
    std::size_t line_no = 0;
    std::size_t start = 0;
    while (start <= text.size()) {
      const std::size_t end = text.find('\n', start);
      std::string_view line =
          text.substr(start, end == std::string_view::npos ? std::string_view::npos : end - start);
      start = end == std::string_view::npos ? text.size() + 1 : end + 1;
      ++line_no;
      if (const std::size_t hash = line.find('#'); hash != std::string_view::npos) {
        line = line.substr(0, hash);
      }
      line = detail::trim(line);
      if (line.empty()) continue;
      const std::size_t eq = line.find('=');
      if (eq == std::string_view::npos) {
        throw std::invalid_argument(name + " line " + std::to_string(line_no) +
                                    ": expected 'key = value'");
      }
      const std::string key{detail::trim(line.substr(0, eq))};
      const std::string value{detail::trim(line.substr(eq + 1))};
      if (key.empty()) {
        throw std::invalid_argument(name + " line " + std::to_string(line_no) + ": empty key");
      }
      if (!config.values_.emplace(key, value).second) {
        throw std::invalid_argument(name + ": duplicate key '" + key + "'");
      }
    }
    return config;
  }

  static Config parse_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open config: " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse(buf.str(), path.filename().string());
  }

  bool has(const std::string& key) const { return values_.count(key) != 0; }

  std::string get_string(const std::string& key, std::string fallback) const {
    auto it = values_.find(key);
    if (it == values_.end()) return fallback;
    consumed_.insert(key);
    return it->second;
  }

  std::string require_string(const std::string& key) const {
    auto it = values_.find(key);
    if (it == values_.end()) {
      throw std::invalid_argument(name_ + ": missing required key '" + key + "'");
    }
    consumed_.insert(key);
    return it->second;
  }

  double get_double(const std::string& key, double fallback) const {
    auto it = values_.find(key);
    if (it == values_.end()) return fallback;
    consumed_.insert(key);
    return detail::parse_double(it->second, name_ + " key '" + key + "'");
  }

  std::int64_t get_int(const std::string& key, std::int64_t fallback) const {
    auto it = values_.find(key);
    if (it == values_.end()) return fallback;
    consumed_.insert(key);
    return detail::parse_int(it->second, name_ + " key '" + key + "'");
  }

  std::vector<double> get_double_list(const std::string& key,
                                      std::vector<double> fallback) const {
    auto it = values_.find(key);
    if (it == values_.end()) return fallback;
    consumed_.insert(key);
    std::vector<double> out;
    for (std::string_view token : detail::split(it->second, ',')) {
      token = detail::trim(token);
      if (token.empty()) continue;
      out.push_back(detail::parse_double(token, name_ + " key '" + key + "'"));
    }
    return out;
  }

  std::vector<std::string> get_string_list(const std::string& key,
                                           std::vector<std::string> fallback) const {
    auto it = values_.find(key);
    if (it == values_.end()) return fallback;
    consumed_.insert(key);
    std::vector<std::string> out;
    for (std::string_view token : detail::split(it->second, ',')) {
      token = detail::trim(token);
      if (!token.empty()) out.emplace_back(token);
    }
    return out;
  }

  // Keys never consumed by any accessor; used to reject typos.
  std::vector<std::string> unconsumed() const {
    std::vector<std::string> out;
    for (const auto& [key, value] : values_) {
      if (consumed_.count(key) == 0) out.push_back(key);
    }
    return out;
  }

  void reject_unconsumed() const {
    const auto leftovers = unconsumed();
    if (!leftovers.empty()) {
      throw std::invalid_argument(name_ + ": unknown key '" + leftovers.front() + "'");
    }
  }

  // Canonical sorted key=value text; the experiment hash is taken over this.
  std::string normalized() const {
    std::ostringstream out;
    for (const auto& [key, value] : values_) out << key << " = " << value << '\n';
    return out.str();
  }

 private:
  std::string name_;
  std::map<std::string, std::string> values_;
  mutable std::set<std::string> consumed_;
};

enum class WorkloadSource { Generate, TraceFiles, Spmf };

struct ExperimentSpec {
  WorkloadSource source = WorkloadSource::Generate;
  WorkloadConfig workload;
  std::string trace_file;
  std::string catalog_file;
  std::string spmf_file;

  std::vector<RunMode> modes;
  std::vector<EvictionPolicy> policies;
  std::vector<double> min_supports;
  std::vector<double> min_confidences;
  std::vector<double> association_factors;
  std::vector<double> proximities;
  std::vector<int> users_axis;
  std::vector<int> objects_axis;
  std::vector<std::uint64_t> seeds;

  double capacity_fraction = 0.20;  // of catalog total size
  double capacity_mb = 0.0;         // wins over the fraction when set
  RunConfig base_run;               // mode/policy/sweep point filled per cell
  std::string out_dir = "results";
  std::string normalized_config;

  static ExperimentSpec from_config(const Config& config);
};

inline ExperimentSpec ExperimentSpec::from_config(const Config& config) {
  ExperimentSpec spec;

  const std::string source = config.get_string("workload.source", "generate");
  if (source == "generate") {
    spec.source = WorkloadSource::Generate;
  } else if (source == "trace") {
    spec.source = WorkloadSource::TraceFiles;
    spec.trace_file = config.require_string("workload.trace_file");
    spec.catalog_file = config.require_string("workload.catalog_file");
  } else if (source == "spmf") {
    spec.source = WorkloadSource::Spmf;
    spec.spmf_file = config.require_string("workload.spmf_file");
  } else {
    throw std::invalid_argument("config key 'workload.source': unknown source '" + source + "'");
  }

  WorkloadConfig& w = spec.workload;
  w.n_objects = static_cast<int>(config.get_int("workload.objects", w.n_objects));
  w.n_users = static_cast<int>(config.get_int("workload.users", w.n_users));
  w.planted_support = config.get_double("workload.planted_support", w.planted_support);
  w.planted_itemset_fraction =
      config.get_double("workload.planted_fraction", w.planted_itemset_fraction);
  w.region_size = config.get_double("workload.region", w.region_size);
  w.arrival_rate = config.get_double("workload.arrival_rate", w.arrival_rate);
  w.interaction_mean = config.get_double("workload.interaction_mean", w.interaction_mean);
  w.interaction_std = config.get_double("workload.interaction_std", w.interaction_std);
  w.walk_speed = config.get_double("workload.walk_speed", w.walk_speed);
  w.session_min_items = static_cast<int>(config.get_int("workload.session_min_items", w.session_min_items));
  w.session_max_items = static_cast<int>(config.get_int("workload.session_max_items", w.session_max_items));
  w.pattern_shift_at = config.get_double("workload.shift_at", w.pattern_shift_at);
  w.seed = static_cast<std::uint64_t>(config.get_int("workload.seed", 1));
  for (std::string_view rect_text :
       detail::split(config.get_string("workload.obstacles", ""), ';')) {
    rect_text = detail::trim(rect_text);
    if (rect_text.empty()) continue;
    const auto parts = detail::split(rect_text, ',');
    if (parts.size() != 4) {
      throw std::invalid_argument(
          "config key 'workload.obstacles': each rectangle needs x0,y0,x1,y1");
    }
    Rect r;
    r.x0 = detail::parse_double(parts[0], "workload.obstacles");
    r.y0 = detail::parse_double(parts[1], "workload.obstacles");
    r.x1 = detail::parse_double(parts[2], "workload.obstacles");
    r.y1 = detail::parse_double(parts[3], "workload.obstacles");
    w.obstacle_rects.push_back(r);
  }

  RunConfig& run = spec.base_run;
  spec.capacity_fraction = config.get_double("cache.capacity_fraction", spec.capacity_fraction);
  spec.capacity_mb = config.get_double("cache.capacity_mb", 0.0);
  run.cache.policy = parse_policy(config.get_string("cache.policy", "FIFO"));
  run.mode = parse_mode(config.get_string("run.mode", "baseline"));
  run.session_gap = config.get_double("run.session_gap", run.session_gap);
  run.viewpoint_size =
      static_cast<std::size_t>(config.get_int("run.viewpoint_size", static_cast<std::int64_t>(run.viewpoint_size)));
  run.seed = static_cast<std::uint64_t>(config.get_int("run.seed", 1));

  SpaarcParams& sp = run.spaarc;
  sp.min_support = config.get_double("spaarc.min_support", sp.min_support);
  sp.min_confidence = config.get_double("spaarc.min_confidence", sp.min_confidence);
  sp.association_factor_threshold =
      config.get_double("spaarc.association_factor", sp.association_factor_threshold);
  sp.proximity_threshold = config.get_double("spaarc.proximity", sp.proximity_threshold);
  sp.window = static_cast<int>(config.get_int("spaarc.window", sp.window));
  sp.history_window = static_cast<int>(config.get_int("spaarc.history_window", sp.history_window));
  sp.lazy_queue_capacity = static_cast<std::size_t>(
      config.get_int("spaarc.lazy_queue_capacity", static_cast<std::int64_t>(sp.lazy_queue_capacity)));
  sp.per_user_factors = config.get_int("spaarc.per_user_factors", 0) != 0;

  run.arm.max_itemset_size =
      static_cast<std::size_t>(config.get_int("arm.max_itemset_size", 4));

  TunerConfig& t = run.tuner;
  t.degradation_threshold = config.get_double("tuner.delta", t.degradation_threshold);
  t.min_confidence = config.get_double("tuner.gamma", t.min_confidence);
  t.grid_size = static_cast<int>(config.get_int("tuner.grid", t.grid_size));
  t.rule_itemset_ratio = config.get_double("tuner.eta", t.rule_itemset_ratio);
  t.kurtosis_jump = config.get_double("tuner.theta", t.kurtosis_jump);
  t.n_rulesets = static_cast<int>(config.get_int("tuner.rulesets", t.n_rulesets));
  t.history = static_cast<std::size_t>(config.get_int("tuner.history", static_cast<std::int64_t>(t.history)));
  t.bootstrap_min_transactions = static_cast<std::size_t>(config.get_int(
      "tuner.bootstrap_min", static_cast<std::int64_t>(t.bootstrap_min_transactions)));
  t.generation_latency_viewpoints = static_cast<int>(
      config.get_int("tuner.generation_latency", t.generation_latency_viewpoints));
  t.arm = run.arm;

  run.latency.cloud_rtt_ms = config.get_double("latency.cloud_rtt_ms", run.latency.cloud_rtt_ms);
  run.latency.edge_hit_ms = config.get_double("latency.edge_hit_ms", run.latency.edge_hit_ms);
  run.latency.immersion_budget_ms =
      config.get_double("latency.immersion_budget_ms", run.latency.immersion_budget_ms);

  // Sweep axes default to the single configured point.
  std::vector<std::string> mode_names =
      config.get_string_list("sweep.modes", {std::string(to_string(run.mode))});
  for (const std::string& name : mode_names) spec.modes.push_back(parse_mode(name));
  std::vector<std::string> policy_names =
      config.get_string_list("sweep.policies", {std::string(to_string(run.cache.policy))});
  for (const std::string& name : policy_names) spec.policies.push_back(parse_policy(name));
  spec.min_supports = config.get_double_list("sweep.min_support", {sp.min_support});
  spec.min_confidences = config.get_double_list("sweep.min_confidence", {sp.min_confidence});
  spec.association_factors =
      config.get_double_list("sweep.association_factor", {sp.association_factor_threshold});
  spec.proximities = config.get_double_list("sweep.proximity", {sp.proximity_threshold});
  for (double u : config.get_double_list("sweep.users", {static_cast<double>(w.n_users)})) {
    spec.users_axis.push_back(static_cast<int>(u));
  }
  for (double o : config.get_double_list("sweep.objects", {static_cast<double>(w.n_objects)})) {
    spec.objects_axis.push_back(static_cast<int>(o));
  }
  for (double s : config.get_double_list("sweep.seeds", {static_cast<double>(run.seed)})) {
    spec.seeds.push_back(static_cast<std::uint64_t>(s));
  }
  if (spec.modes.empty() || spec.policies.empty() || spec.min_supports.empty() ||
      spec.min_confidences.empty() || spec.association_factors.empty() ||
      spec.proximities.empty() || spec.users_axis.empty() || spec.objects_axis.empty() ||
      spec.seeds.empty()) {
    throw std::invalid_argument("config: sweep lists must be nonempty");
  }
  if (spec.source != WorkloadSource::Generate &&
      (spec.users_axis.size() > 1 || spec.objects_axis.size() > 1)) {
    throw std::invalid_argument(
        "config: sweep.users / sweep.objects apply only to generated workloads");
  }

  spec.out_dir = config.get_string("out.dir", spec.out_dir);
  config.reject_unconsumed();
  spec.normalized_config = config.normalized();
  return spec;
}

// One run of the matrix: workload variant × mode × policy × parameter point.
struct ExperimentCell {
  std::string id;
  RunMode mode;
  EvictionPolicy policy;
  int users = 0;
  int objects = 0;
  std::uint64_t seed = 0;
  double min_support = 0.0;
  double min_confidence = 0.0;
  double association_factor = 0.0;
  double proximity = 0.0;
  RunReport report;
};

struct ExperimentResult {
  std::vector<ExperimentCell> cells;
  std::uint64_t config_hash = 0;
};

namespace detail {

inline std::string number_slug(double v) {
  std::string s = format_double(v);
  for (char& c : s) {
    if (c == '.') c = 'p';
    if (c == '-') c = 'm';
    if (c == '+') c = 'P';
  }
  return s;
}

inline std::string cell_id(const ExperimentCell& cell) {
  std::ostringstream out;
  out << to_string(cell.mode) << '_' << to_string(cell.policy) << "_u" << cell.users << "_o"
      << cell.objects << "_s" << cell.seed;
  if (cell.mode != RunMode::Baseline) {
    out << "_ms" << number_slug(cell.min_support) << "_mc" << number_slug(cell.min_confidence)
        << "_af" << number_slug(cell.association_factor) << "_px" << number_slug(cell.proximity);
  }
  return out.str();
}

// Atomic per-file publish: write a sibling temp file, then rename.
template <typename WriteFn>
inline void write_file_atomic(const std::filesystem::path& path, WriteFn&& write) {
  const std::filesystem::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write file: " + tmp.string());
    write(out);
  }
  std::filesystem::rename(tmp, path);
}

}  // namespace detail

// Arg-max over the sweep axes per (workload variant, policy, mode); ties go to
// the lower minimum support, then lower minimum confidence.
inline std::vector<const ExperimentCell*> best_over_sweep(
    const std::vector<ExperimentCell>& cells) {
  std::map<std::string, const ExperimentCell*> best;
  for (const ExperimentCell& cell : cells) {
    std::ostringstream key;
    key << cell.users << '/' << cell.objects << '/' << cell.seed << '/'
        << to_string(cell.policy) << '/' << to_string(cell.mode);
    auto [it, inserted] = best.emplace(key.str(), &cell);
    if (inserted) continue;
    const ExperimentCell* incumbent = it->second;
    const bool better =
        cell.report.overall_hit_rate > incumbent->report.overall_hit_rate ||
        (cell.report.overall_hit_rate == incumbent->report.overall_hit_rate &&
         (cell.min_support < incumbent->min_support ||
          (cell.min_support == incumbent->min_support &&
           cell.min_confidence < incumbent->min_confidence)));
    if (better) it->second = &cell;
  }
  std::vector<const ExperimentCell*> out;
  out.reserve(best.size());
  for (const auto& [key, cell] : best) out.push_back(cell);
  return out;
}

inline void write_best_csv(std::ostream& out, const std::vector<const ExperimentCell*>& best) {
  out << "users,objects,seed,policy,mode,cell,hit_rate,min_support,min_confidence\n";
  for (const ExperimentCell* cell : best) {
    out << cell->users << ',' << cell->objects << ',' << cell->seed << ','
        << to_string(cell->policy) << ',' << to_string(cell->mode) << ',' << cell->id << ','
        << format_double(cell->report.overall_hit_rate) << ',' << format_double(cell->min_support)
        << ',' << format_double(cell->min_confidence) << '\n';
  }
}

// Runs every cell of the experiment matrix against cached workloads, writes
// one report CSV per cell plus manifest, comparison and best-over-sweep CSVs.
// Reports are also returned in-memory for tests and the CLI.
inline ExperimentResult run_experiment(const ExperimentSpec& spec) {
  const std::filesystem::path out_dir(spec.out_dir);
  std::filesystem::create_directories(out_dir / "reports");

  ExperimentResult result;
  result.config_hash =
      detail::fnv1a(spec.normalized_config.data(), spec.normalized_config.size());

  struct WorkloadVariant {
    Catalog catalog;
    std::vector<AccessEvent> trace;
  };
  std::map<std::tuple<int, int, std::uint64_t>, WorkloadVariant> workloads;
  const auto workload_for = [&](int users, int objects, std::uint64_t seed) -> WorkloadVariant& {
    const auto key = std::make_tuple(users, objects, seed);
    auto it = workloads.find(key);
    if (it != workloads.end()) return it->second;
    WorkloadVariant variant;
    switch (spec.source) {
      case WorkloadSource::Generate: {
        WorkloadConfig config = spec.workload;
        config.n_users = users;
        config.n_objects = objects;
        config.seed = seed;
        GeneratedWorkload generated = generate_workload(config);
        variant.catalog = std::move(generated.catalog);
        variant.trace = std::move(generated.trace);
        break;
      }
      case WorkloadSource::TraceFiles:
        variant.catalog = read_catalog_csv(spec.catalog_file);
        variant.trace = read_trace_csv(spec.trace_file);
        break;
      case WorkloadSource::Spmf: {
        WorkloadConfig config = spec.workload;
        config.seed = seed;
        GeneratedWorkload generated = spmf_to_trace(load_spmf(spec.spmf_file), config);
        variant.catalog = std::move(generated.catalog);
        variant.trace = std::move(generated.trace);
        break;
      }
    }
    return workloads.emplace(key, std::move(variant)).first->second;
  };

  for (int users : spec.users_axis) {
    for (int objects : spec.objects_axis) {
      for (std::uint64_t seed : spec.seeds) {
        WorkloadVariant& workload = workload_for(users, objects, seed);
        const double capacity = spec.capacity_mb > 0.0
                                    ? spec.capacity_mb
                                    : spec.capacity_fraction * workload.catalog.total_size_mb();
        for (RunMode mode : spec.modes) {
          for (EvictionPolicy policy : spec.policies) {
            // Baseline ignores the prefetch axes; emit it at one point only.
            const bool prefetch_axes = mode != RunMode::Baseline;
            const std::vector<double> point{0.0};
            const std::vector<double>& ms_axis = prefetch_axes ? spec.min_supports : point;
            const std::vector<double>& mc_axis = prefetch_axes ? spec.min_confidences : point;
            const std::vector<double>& af_axis = prefetch_axes ? spec.association_factors : point;
            const std::vector<double>& px_axis = prefetch_axes ? spec.proximities : point;
            for (double ms : ms_axis) {
              for (double mc : mc_axis) {
                for (double af : af_axis) {
                  for (double px : px_axis) {
                    ExperimentCell cell;
                    cell.mode = mode;
                    cell.policy = policy;
                    cell.users = users;
                    cell.objects = objects;
                    cell.seed = seed;
                    cell.min_support = ms;
                    cell.min_confidence = mc;
                    cell.association_factor = af;
                    cell.proximity = px;
                    cell.id = detail::cell_id(cell);

                    RunConfig run_config = spec.base_run;
                    run_config.mode = mode;
                    run_config.cache.policy = policy;
                    run_config.cache.capacity_mb = capacity;
                    run_config.seed = seed;
                    if (prefetch_axes) {
                      run_config.spaarc.min_support = ms;
                      run_config.spaarc.min_confidence = mc;
                      run_config.spaarc.association_factor_threshold = af;
                      run_config.spaarc.proximity_threshold = px;
                    }
                    cell.report = run(workload.trace, workload.catalog, run_config);

                    detail::write_file_atomic(
                        out_dir / "reports" / (cell.id + ".csv"),
                        [&](std::ostream& out) { write_report_csv(out, cell.report); });
                    result.cells.push_back(std::move(cell));
                  }
                }
              }
            }
          }
        }
      }
    }
  }

  // Manifest: enough to reproduce and to compare without reloading reports.
  detail::write_file_atomic(out_dir / "manifest.csv", [&](std::ostream& out) {
    out << "cell,mode,policy,users,objects,seed,min_support,min_confidence,association_factor,"
           "proximity,config_hash,trace_hash,setup,hit_rate,on_demand,prefetches,mean_latency_ms,"
           "report_file\n";
    for (const ExperimentCell& cell : result.cells) {
      out << cell.id << ',' << to_string(cell.mode) << ',' << to_string(cell.policy) << ','
          << cell.users << ',' << cell.objects << ',' << cell.seed << ','
          << format_double(cell.min_support) << ',' << format_double(cell.min_confidence) << ','
          << format_double(cell.association_factor) << ',' << format_double(cell.proximity) << ','
          << result.config_hash << ',' << cell.report.trace_fingerprint << ','
          << cell.report.setup_fingerprint << ',' << format_double(cell.report.overall_hit_rate)
          << ',' << cell.report.on_demand_fetches << ',' << cell.report.prefetch_count << ','
          << format_double(cell.report.mean_access_latency_ms) << ",reports/" << cell.id
          << ".csv\n";
    }
  });
  detail::write_file_atomic(out_dir / "resolved.cfg",
                            [&](std::ostream& out) { out << spec.normalized_config; });

  // One comparison CSV per (baseline, treatment) pair sharing a workload,
  // policy and seed.
  for (const ExperimentCell& treatment : result.cells) {
    if (treatment.mode == RunMode::Baseline) continue;
    for (const ExperimentCell& baseline : result.cells) {
      if (baseline.mode != RunMode::Baseline || baseline.policy != treatment.policy ||
          baseline.users != treatment.users || baseline.objects != treatment.objects ||
          baseline.seed != treatment.seed) {
        continue;
      }
      const CompareResult delta = compare(baseline.report, treatment.report);
      detail::write_file_atomic(
          out_dir / ("compare_" + treatment.id + ".csv"), [&](std::ostream& out) {
            out << "baseline,treatment,hit_rate_baseline,hit_rate_treatment,hit_rate_gain_pct,"
                   "on_demand_baseline,on_demand_treatment,on_demand_reduction_pct,"
                   "prefetches,prefetch_overhead_x\n";
            out << baseline.id << ',' << treatment.id << ','
                << format_double(baseline.report.overall_hit_rate) << ','
                << format_double(treatment.report.overall_hit_rate) << ','
                << format_double(delta.hit_rate_gain_pct) << ','
                << baseline.report.on_demand_fetches << ',' << treatment.report.on_demand_fetches
                << ',' << format_double(delta.on_demand_reduction_pct) << ','
                << treatment.report.prefetch_count << ','
                << format_double(delta.prefetch_overhead_x) << '\n';
          });
      break;
    }
  }

  const auto best = best_over_sweep(result.cells);
  detail::write_file_atomic(out_dir / "best.csv",
                            [&](std::ostream& out) { write_best_csv(out, best); });
  return result;
}

}  // namespace spaarc
