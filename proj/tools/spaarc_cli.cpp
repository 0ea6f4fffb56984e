// Experiment driver for the SPAARC edge-cache simulator.
//
//   spaarc generate --config exp.cfg --out dir    write catalog/trace CSVs
//   spaarc run      --config exp.cfg --out dir    execute one configured run
//   spaarc sweep    --config exp.cfg --out dir    execute the full run matrix
//   spaarc compare  --dir dir                     rebuild comparison CSVs

#include <exception>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "spaarc/spaarc.hpp"

namespace {

struct CommonArgs {
  std::string config_path;
  std::string out_dir;
  std::optional<std::uint64_t> seed;
};

spaarc::ExperimentSpec load_spec(const CommonArgs& args) {
  auto config = spaarc::Config::parse_file(args.config_path);
  auto spec = spaarc::ExperimentSpec::from_config(config);
  if (!args.out_dir.empty()) spec.out_dir = args.out_dir;
  if (args.seed) {
    spec.base_run.seed = *args.seed;
    spec.workload.seed = *args.seed;
    spec.seeds = {*args.seed};
  }
  return spec;
}

int cmd_generate(const CommonArgs& args) {
  auto spec = load_spec(args);
  const std::filesystem::path out(spec.out_dir);
  std::filesystem::create_directories(out);

  spaarc::GeneratedWorkload workload;
  switch (spec.source) {
    case spaarc::WorkloadSource::Generate: {
      spaarc::WorkloadConfig config = spec.workload;
      config.seed = spec.seeds.front();
      workload = spaarc::generate_workload(config);
      break;
    }
    case spaarc::WorkloadSource::Spmf: {
      spaarc::WorkloadConfig config = spec.workload;
      config.seed = spec.seeds.front();
      workload = spaarc::spmf_to_trace(spaarc::load_spmf(spec.spmf_file), config);
      break;
    }
    case spaarc::WorkloadSource::TraceFiles:
      throw std::invalid_argument("generate: workload.source=trace has nothing to generate");
  }

  spaarc::write_catalog_csv(out / "catalog.csv", workload.catalog);
  spaarc::write_trace_csv(out / "trace.csv", workload.trace);
  spaarc::write_planted_itemsets(out / "planted_itemsets.txt", workload.planted_itemsets);
  std::ofstream resolved(out / "resolved.cfg", std::ios::binary);
  resolved << spec.normalized_config;
  std::cout << "wrote " << workload.trace.size() << " events over " << workload.catalog.size()
            << " objects to " << out.string() << "\n";
  return 0;
}

int cmd_run(const CommonArgs& args, bool full_matrix) {
  auto spec = load_spec(args);
  if (!full_matrix) {
    // Collapse the matrix to the configured point.
    spec.modes = {spec.base_run.mode};
    spec.policies = {spec.base_run.cache.policy};
    spec.min_supports = {spec.base_run.spaarc.min_support};
    spec.min_confidences = {spec.base_run.spaarc.min_confidence};
    spec.association_factors = {spec.base_run.spaarc.association_factor_threshold};
    spec.proximities = {spec.base_run.spaarc.proximity_threshold};
    spec.users_axis = {spec.workload.n_users};
    spec.objects_axis = {spec.workload.n_objects};
    spec.seeds = {spec.base_run.seed};
  }
  const auto result = spaarc::run_experiment(spec);
  std::cout << result.cells.size() << " run(s) written to " << spec.out_dir << "\n";
  for (const auto& cell : result.cells) {
    std::cout << "  " << cell.id << ": hit_rate=" << spaarc::format_double(cell.report.overall_hit_rate)
              << " on_demand=" << cell.report.on_demand_fetches
              << " prefetches=" << cell.report.prefetch_count << "\n";
  }
  return 0;
}

// Rebuilds comparison CSVs from a previously written manifest.
int cmd_compare(const std::string& dir) {
  const std::filesystem::path base(dir);
  std::ifstream manifest(base / "manifest.csv");
  if (!manifest) throw std::runtime_error("cannot open " + (base / "manifest.csv").string());

  struct Row {
    std::string cell, mode, policy, setup, trace_hash;
    std::string users, objects, seed;
    double hit_rate = 0.0;
    std::uint64_t on_demand = 0, prefetches = 0;
  };
  std::vector<Row> rows;
  std::string line;
  std::getline(manifest, line);  // header
  while (std::getline(manifest, line)) {
    if (line.empty()) continue;
    const auto f = spaarc::detail::split(line, ',');
    if (f.size() < 18) throw std::runtime_error("manifest.csv: malformed row");
    Row row;
    row.cell = std::string(f[0]);
    row.mode = std::string(f[1]);
    row.policy = std::string(f[2]);
    row.users = std::string(f[3]);
    row.objects = std::string(f[4]);
    row.seed = std::string(f[5]);
    row.trace_hash = std::string(f[11]);
    row.setup = std::string(f[12]);
    row.hit_rate = spaarc::detail::parse_double(f[13], "manifest");
    row.on_demand = static_cast<std::uint64_t>(spaarc::detail::parse_int(f[14], "manifest"));
    row.prefetches = static_cast<std::uint64_t>(spaarc::detail::parse_int(f[15], "manifest"));
    rows.push_back(std::move(row));
  }

  int written = 0;
  for (const Row& treatment : rows) {
    if (treatment.mode == "baseline") continue;
    for (const Row& baseline : rows) {
      if (baseline.mode != "baseline" || baseline.policy != treatment.policy ||
          baseline.users != treatment.users || baseline.objects != treatment.objects ||
          baseline.seed != treatment.seed) {
        continue;
      }
      if (baseline.trace_hash != treatment.trace_hash || baseline.setup != treatment.setup) {
        throw std::runtime_error("compare: cells " + baseline.cell + " and " + treatment.cell +
                                 " come from different traces or setups");
      }
      const double gain = baseline.hit_rate == 0.0
                              ? 0.0
                              : (treatment.hit_rate - baseline.hit_rate) / baseline.hit_rate * 100.0;
      const double od_b = static_cast<double>(baseline.on_demand);
      const double reduction =
          od_b == 0.0 ? 0.0 : (od_b - static_cast<double>(treatment.on_demand)) / od_b * 100.0;
      const double overhead = od_b == 0.0 ? 0.0 : static_cast<double>(treatment.prefetches) / od_b;
      spaarc::detail::write_file_atomic(
          base / ("compare_" + treatment.cell + ".csv"), [&](std::ostream& out) {
            out << "baseline,treatment,hit_rate_baseline,hit_rate_treatment,hit_rate_gain_pct,"
                   "on_demand_baseline,on_demand_treatment,on_demand_reduction_pct,"
                   "prefetches,prefetch_overhead_x\n";
            out << baseline.cell << ',' << treatment.cell << ','
                << spaarc::format_double(baseline.hit_rate) << ','
                << spaarc::format_double(treatment.hit_rate) << ',' << spaarc::format_double(gain)
                << ',' << baseline.on_demand << ',' << treatment.on_demand << ','
                << spaarc::format_double(reduction) << ',' << treatment.prefetches << ','
                << spaarc::format_double(overhead) << '\n';
          });
      ++written;
      break;
    }
  }
  std::cout << written << " comparison file(s) written to " << dir << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"SPAARC edge-cache prefetching simulator"};
  app.require_subcommand(1);

  CommonArgs args;
  std::string compare_dir;

  auto add_common = [&args](CLI::App* cmd, bool need_config) {
    if (need_config) {
      cmd->add_option("--config", args.config_path, "experiment config file")->required();
    }
    cmd->add_option("--out", args.out_dir, "output directory");
    cmd->add_option("--seed", args.seed, "override all seeds");
  };

  auto* generate = app.add_subcommand("generate", "generate a workload and write its CSV files");
  add_common(generate, true);
  auto* run = app.add_subcommand("run", "execute the configured run");
  add_common(run, true);
  auto* sweep = app.add_subcommand("sweep", "execute the full sweep matrix");
  add_common(sweep, true);
  auto* compare = app.add_subcommand("compare", "rebuild comparison CSVs from a manifest");
  compare->add_option("--dir", compare_dir, "experiment output directory")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (generate->parsed()) return cmd_generate(args);
    if (run->parsed()) return cmd_run(args, false);
    if (sweep->parsed()) return cmd_run(args, true);
    if (compare->parsed()) return cmd_compare(compare_dir);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
