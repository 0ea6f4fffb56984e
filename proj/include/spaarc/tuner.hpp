#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <future>
#include <limits>
#include <map>
#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "spaarc/arm.hpp"
#include "spaarc/domain.hpp"

namespace spaarc {

struct TunerConfig {
  double degradation_threshold = 0.05;  // δ
  double min_confidence = 0.10;         // γ used for generated rulesets
  int grid_size = 8;                    // D: evenly spaced min-support probes
  double rule_itemset_ratio = 20.0;     // η: stop when rules/itemsets exceeds this
  double kurtosis_jump = 2.0;           // θ: stop on a lift-distribution shape jump
  int n_rulesets = 5;                   // N
  std::size_t history = 100;            // n: transactions fed to generation
  std::size_t bootstrap_min_transactions = 20;
  int generation_latency_viewpoints = 1;  // background work lands this many viewpoints later
  ArmOptions arm{};

  void validate() const {
    if (!(degradation_threshold > 0.0 && degradation_threshold < 1.0)) {
      throw std::invalid_argument("tuner.delta must be in (0, 1)");
    }
    if (!(min_confidence > 0.0 && min_confidence <= 1.0)) {
      throw std::invalid_argument("tuner.gamma must be in (0, 1]");
    }
    if (grid_size < 2) throw std::invalid_argument("tuner.grid must be >= 2");
    if (n_rulesets < 1) throw std::invalid_argument("tuner.rulesets must be >= 1");
    if (!(rule_itemset_ratio > 0.0)) throw std::invalid_argument("tuner.eta must be > 0");
    if (!(kurtosis_jump > 0.0)) throw std::invalid_argument("tuner.theta must be > 0");
    if (history == 0) throw std::invalid_argument("tuner.history must be >= 1");
    if (generation_latency_viewpoints < 0) {
      throw std::invalid_argument("tuner.generation_latency must be >= 0");
    }
  }
};

// Relative hit-rate drop between consecutive viewpoints, clamped at zero when
// the rate improved.
inline double get_degradation(double prev_hit_rate, double curr_hit_rate) {
  const double base = std::max(prev_hit_rate, 1e-9);
  return std::max(0.0, (prev_hit_rate - curr_hit_rate) / base);
}

// Mean and max of single-item supports: the search range for minimum support.
inline std::pair<double, double> get_min_sup_bound(const std::vector<Transaction>& transactions) {
  if (transactions.empty()) {
    throw std::invalid_argument("get_min_sup_bound: transactions must be nonempty");
  }
  std::map<ObjectId, std::size_t> counts;
  for (const Transaction& tx : transactions) {
    for (ObjectId item : tx.items) ++counts[item];
  }
  if (counts.empty()) throw std::invalid_argument("get_min_sup_bound: no items");
  const double total = static_cast<double>(transactions.size());
  double sum = 0.0;
  double max_support = 0.0;
  for (const auto& [item, count] : counts) {
    const double support = static_cast<double>(count) / total;
    sum += support;
    max_support = std::max(max_support, support);
  }
  return {sum / static_cast<double>(counts.size()), max_support};
}

// Sample excess kurtosis, m4/m2² − 3 over central moments. Fewer than two
// samples, or a degenerate (constant) sample, yields 0.
inline double excess_kurtosis(std::span<const double> values) {
  if (values.size() < 2) return 0.0;
  const double n = static_cast<double>(values.size());
  double mean = 0.0;
  for (double v : values) mean += v;
  mean /= n;
  double m2 = 0.0, m4 = 0.0;
  for (double v : values) {
    const double d = v - mean;
    m2 += d * d;
    m4 += d * d * d * d;
  }
  m2 /= n;
  m4 /= n;
  if (m2 == 0.0) return 0.0;
  return m4 / (m2 * m2) - 3.0;
}

namespace detail {

inline std::vector<double> linspace(double lo, double hi, int count) {
  std::vector<double> out;
  out.reserve(static_cast<std::size_t>(count));
  if (count == 1) {
    out.push_back(lo);
    return out;
  }
  for (int i = 0; i < count; ++i) {
    out.push_back(lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(count - 1));
  }
  return out;
}

}  // namespace detail

struct TunerEvent {
  std::size_t viewpoint = 0;
  double hit_rate = 0.0;
  double hrd = 0.0;
  std::string action;
  double active_min_support = 0.0;
};

// Minimum-support tuner. Watches per-viewpoint hit-rate degradation; on a
// severe drop it regenerates N candidate rulesets over a support range probed
// with the ratio and kurtosis stopping rules, then steps between stored
// rulesets on milder drops. Generation runs in the background and is
// installed at a later viewpoint, so the replay path never waits on it.
class Tuner {
 public:
  using InstallFn = std::function<void(std::shared_ptr<const RuleSet>)>;

  Tuner(TunerConfig config, InstallFn install)
      : config_(config), install_(std::move(install)) {
    config_.validate();
  }

  ~Tuner() {
    if (pending_.valid()) pending_.wait();
  }

  // Pure ruleset generation: probes D grid points from largest to smallest
  // support, narrows the bounds with the stopping rules, then builds N
  // rulesets at evenly spaced supports, ascending. Empty result means the
  // caller should keep whatever it has.
  static std::vector<std::shared_ptr<const RuleSet>> generate_rulesets(
      const std::vector<Transaction>& transactions, const TunerConfig& config) {
    if (transactions.empty()) return {};
    const auto [lo, hi] = get_min_sup_bound(transactions);
    const std::vector<double> grid = detail::linspace(lo, hi, config.grid_size);

    double new_lo = std::numeric_limits<double>::infinity();
    double new_hi = -std::numeric_limits<double>::infinity();
    double prev_kurtosis = 0.0;
    bool have_kurtosis = false;
    double largest_with_rules = -1.0;

    for (auto it = grid.rbegin(); it != grid.rend(); ++it) {
      const double beta = *it;
      const auto itemsets = gen_frequent_itemsets(transactions, beta, config.arm);
      if (itemsets.empty()) continue;
      const auto rules = filter_lift(gen_rules(itemsets, config.min_confidence));
      if (!rules.empty() && largest_with_rules < 0.0) largest_with_rules = beta;
      const double ratio =
          static_cast<double>(rules.size()) / static_cast<double>(itemsets.size());
      if (ratio > config.rule_itemset_ratio) break;
      // Fewer than two lifts carry no distribution shape; such points widen
      // the bounds but neither anchor nor trip the kurtosis chain.
      if (rules.size() >= 2) {
        std::vector<double> lifts;
        lifts.reserve(rules.size());
        for (const AssociationRule& rule : rules) lifts.push_back(rule.lift);
        const double kurtosis = excess_kurtosis(lifts);
        if (have_kurtosis && std::abs(prev_kurtosis - kurtosis) > config.kurtosis_jump) break;
        prev_kurtosis = kurtosis;
        have_kurtosis = true;
      }
      new_lo = std::min(new_lo, beta);
      new_hi = std::max(new_hi, beta);
    }

    if (largest_with_rules < 0.0) return {};  // no grid point yielded rules: keep previous
    if (!std::isfinite(new_lo)) new_lo = new_hi = largest_with_rules;

    std::vector<double> supports = detail::linspace(new_lo, new_hi, config.n_rulesets);
    supports.erase(std::unique(supports.begin(), supports.end()), supports.end());

    std::vector<std::shared_ptr<const RuleSet>> out;
    out.reserve(supports.size());
    for (double beta : supports) {
      out.push_back(std::make_shared<const RuleSet>(
          build_ruleset(transactions, beta, config.min_confidence, config.arm)));
    }
    return out;
  }

  // Called once per viewpoint with the cumulative hit rate and the
  // sessionized transactions of the replayed prefix.
  void on_viewpoint(double cumulative_hit_rate, const std::vector<Transaction>& transactions) {
    ++viewpoint_;
    bool installed = false;
    if (pending_.valid() && viewpoint_ >= pending_ready_at_) {
      installed = install_pending();
    }

    const double hrd = get_degradation(last_hit_rate_, cumulative_hit_rate);
    last_hit_rate_ = cumulative_hit_rate;
    const double delta = config_.degradation_threshold;

    std::string action = installed ? "install" : "keep";
    if (rulesets_.empty() && !pending_.valid() &&
        transactions.size() >= config_.bootstrap_min_transactions) {
      trigger_generation(transactions);
      action = "bootstrap";
    } else if (hrd > 2.0 * delta) {
      if (pending_.valid()) {
        action = "regen-coalesced";  // one generation in flight at a time
      } else {
        trigger_generation(transactions);
        action = "regen";
      }
    } else if (!installed && !rulesets_.empty()) {
      if (hrd > delta) {
        // Mild-to-moderate degradation: widen the rule supply.
        if (active_ > 0) {
          --active_;
          install_active();
          action = "lower";
        }
      } else if (hrd > 0.0) {
        // Slight degradation: prune marginal rules.
        if (active_ + 1 < rulesets_.size()) {
          ++active_;
          install_active();
          action = "higher";
        }
      }
    }

    events_.push_back(TunerEvent{viewpoint_, cumulative_hit_rate, hrd, action,
                                 rulesets_.empty() ? 0.0 : rulesets_[active_]->min_support()});
  }

  const std::vector<TunerEvent>& events() const { return events_; }
  const std::vector<std::shared_ptr<const RuleSet>>& rulesets() const { return rulesets_; }
  std::size_t active_index() const { return active_; }
  bool generation_in_progress() const { return pending_.valid(); }

 private:
  void trigger_generation(const std::vector<Transaction>& transactions) {
    std::vector<Transaction> recent;
    const std::size_t n = std::min(config_.history, transactions.size());
    recent.assign(transactions.end() - static_cast<std::ptrdiff_t>(n), transactions.end());
    const TunerConfig config = config_;
    pending_ = std::async(std::launch::async, [recent = std::move(recent), config]() {
      return generate_rulesets(recent, config);
    });
    pending_ready_at_ = viewpoint_ + static_cast<std::size_t>(config_.generation_latency_viewpoints);
    if (config_.generation_latency_viewpoints == 0) install_pending();
  }

  bool install_pending() {
    auto fresh = pending_.get();
    pending_ = {};
    if (fresh.empty()) return false;  // keep previous rulesets
    rulesets_ = std::move(fresh);
    active_ = rulesets_.size() / 2;
    install_active();
    return true;
  }

  void install_active() {
    if (install_) install_(rulesets_[active_]);
  }

  TunerConfig config_;
  InstallFn install_;
  std::vector<std::shared_ptr<const RuleSet>> rulesets_;  // ascending min_support
  std::size_t active_ = 0;
  double last_hit_rate_ = 0.0;
  std::size_t viewpoint_ = 0;
  std::vector<TunerEvent> events_;
  std::future<std::vector<std::shared_ptr<const RuleSet>>> pending_;
  std::size_t pending_ready_at_ = 0;
};

}  // namespace spaarc
