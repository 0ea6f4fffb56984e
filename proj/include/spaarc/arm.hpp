#pragma once

#include <algorithm>
#include <cstddef>
#include <map>
#include <memory>
#include <ostream>
#include <stdexcept>
#include <vector>

#include "spaarc/domain.hpp"

namespace spaarc {

struct FrequentItemset {
  Itemset items;
  double support = 0.0;  // fraction of transactions containing the itemset
};

struct AssociationRule {
  Itemset antecedent;
  Itemset consequent;
  double support = 0.0;     // support of antecedent ∪ consequent
  double confidence = 0.0;  // support / S(antecedent)
  double lift = 0.0;        // support / (S(antecedent) · S(consequent))
};

struct ArmOptions {
  std::size_t max_itemset_size = 4;
};

namespace detail {

// Classic Apriori join: merge pairs of k-itemsets sharing their first k-1
// items. `level` must be sorted lexicographically, which keeps the candidate
// order (and therefore all downstream output) deterministic.
inline std::vector<Itemset> apriori_join(const std::vector<Itemset>& level) {
  std::vector<Itemset> candidates;
  for (std::size_t i = 0; i < level.size(); ++i) {
    for (std::size_t j = i + 1; j < level.size(); ++j) {
      const Itemset& a = level[i];
      const Itemset& b = level[j];
      if (!std::equal(a.begin(), a.end() - 1, b.begin(), b.end() - 1)) break;
      Itemset candidate = a;
      candidate.push_back(b.back());
      candidates.push_back(std::move(candidate));
    }
  }
  return candidates;
}

inline bool all_subsets_frequent(const Itemset& candidate, const std::vector<Itemset>& level) {
  Itemset subset(candidate.size() - 1);
  for (std::size_t skip = 0; skip < candidate.size(); ++skip) {
    subset.clear();
    for (std::size_t i = 0; i < candidate.size(); ++i) {
      if (i != skip) subset.push_back(candidate[i]);
    }
    if (!std::binary_search(level.begin(), level.end(), subset)) return false;
  }
  return true;
}

}  // namespace detail

// Level-wise Apriori. Emits exactly the itemsets whose support meets
// min_support, ordered by size then lexicographically by item ids.
inline std::vector<FrequentItemset> gen_frequent_itemsets(
    const std::vector<Transaction>& transactions, double min_support, ArmOptions options = {}) {
  if (!(min_support > 0.0 && min_support <= 1.0)) {
    throw std::invalid_argument("min_support must be in (0, 1]");
  }
  if (transactions.empty()) {
    throw std::invalid_argument("gen_frequent_itemsets: transactions must be nonempty");
  }
  const double total = static_cast<double>(transactions.size());

  std::vector<FrequentItemset> out;
  std::map<ObjectId, std::size_t> item_counts;
  for (const Transaction& tx : transactions) {
    for (ObjectId item : tx.items) ++item_counts[item];
  }
  std::vector<Itemset> level;
  for (const auto& [item, count] : item_counts) {
    const double support = static_cast<double>(count) / total;
    if (support >= min_support) {
      level.push_back({item});
      out.push_back({{item}, support});
    }
  }

  for (std::size_t size = 2; size <= options.max_itemset_size && !level.empty(); ++size) {
    std::vector<Itemset> candidates = detail::apriori_join(level);
    std::vector<Itemset> next;
    for (Itemset& candidate : candidates) {
      if (!detail::all_subsets_frequent(candidate, level)) continue;
      std::size_t count = 0;
      for (const Transaction& tx : transactions) {
        if (itemset_includes(tx.items, candidate)) ++count;
      }
      const double support = static_cast<double>(count) / total;
      if (support >= min_support) {
        out.push_back({candidate, support});
        next.push_back(std::move(candidate));
      }
    }
    level = std::move(next);
  }
  return out;
}

// All rules A ⇒ B over each frequent itemset (every nonempty proper subset as
// antecedent) whose confidence meets min_confidence. Requires the itemset
// collection to be closed under subsets, which Apriori output is.
inline std::vector<AssociationRule> gen_rules(const std::vector<FrequentItemset>& itemsets,
                                              double min_confidence) {
  if (!(min_confidence > 0.0 && min_confidence <= 1.0)) {
    throw std::invalid_argument("min_confidence must be in (0, 1]");
  }
  std::map<Itemset, double> support;
  for (const FrequentItemset& fi : itemsets) support[fi.items] = fi.support;

  const auto support_of = [&support](const Itemset& items) {
    auto it = support.find(items);
    if (it == support.end()) {
      throw std::invalid_argument("gen_rules: itemset collection is not subset-closed");
    }
    return it->second;
  };

  std::vector<AssociationRule> rules;
  for (const FrequentItemset& fi : itemsets) {
    const std::size_t n = fi.items.size();
    if (n < 2) continue;
    for (std::size_t mask = 1; mask + 1 < (std::size_t{1} << n); ++mask) {
      AssociationRule rule;
      for (std::size_t i = 0; i < n; ++i) {
        if (mask & (std::size_t{1} << i)) {
          rule.antecedent.push_back(fi.items[i]);
        } else {
          rule.consequent.push_back(fi.items[i]);
        }
      }
      rule.support = fi.support;
      rule.confidence = fi.support / support_of(rule.antecedent);
      if (rule.confidence < min_confidence) continue;
      rule.lift = fi.support / (support_of(rule.antecedent) * support_of(rule.consequent));
      rules.push_back(std::move(rule));
    }
  }
  return rules;
}

// Keeps rules whose antecedent and consequent co-occur at least as often as
// independence predicts. Order-preserving.
inline std::vector<AssociationRule> filter_lift(std::vector<AssociationRule> rules) {
  std::vector<AssociationRule> out;
  out.reserve(rules.size());
  for (AssociationRule& rule : rules) {
    if (rule.lift >= 1.0) out.push_back(std::move(rule));
  }
  return out;
}

struct RuleMatch {
  ObjectId object = 0;
  const AssociationRule* rule = nullptr;  // max-lift rule producing the object
};

// An immutable bundle of rules generated at one (min_support, min_confidence)
// point, indexed by antecedent for context matching. Safe to share across
// threads once built.
class RuleSet {
 public:
  RuleSet() = default;

  RuleSet(std::vector<AssociationRule> rules, double min_support, double min_confidence,
          std::size_t transaction_count)
      : rules_(std::move(rules)),
        min_support_(min_support),
        min_confidence_(min_confidence),
        generated_from_(transaction_count) {
    for (std::size_t i = 0; i < rules_.size(); ++i) {
      by_antecedent_[rules_[i].antecedent].push_back(i);
      max_antecedent_size_ = std::max(max_antecedent_size_, rules_[i].antecedent.size());
    }
  }

  const std::vector<AssociationRule>& rules() const { return rules_; }
  double min_support() const { return min_support_; }
  double min_confidence() const { return min_confidence_; }
  std::size_t generated_from() const { return generated_from_; }
  bool empty() const { return rules_.empty(); }

  // Consequent objects of every rule whose antecedent is contained in the
  // context, excluding objects already in the context. Each object carries the
  // highest-lift rule that produced it; results are ordered by object id.
  std::vector<RuleMatch> match(const Itemset& context) const {
    std::map<ObjectId, std::size_t> best;  // object → rule index
    Itemset subset;
    match_subsets(context, 0, subset, best);
    std::vector<RuleMatch> out;
    out.reserve(best.size());
    for (const auto& [object, rule_idx] : best) {
      out.push_back(RuleMatch{object, &rules_[rule_idx]});
    }
    return out;
  }

 private:
  void match_subsets(const Itemset& context, std::size_t start, Itemset& subset,
                     std::map<ObjectId, std::size_t>& best) const {
    if (!subset.empty()) {
      auto it = by_antecedent_.find(subset);
      if (it != by_antecedent_.end()) {
        for (std::size_t rule_idx : it->second) {
          const AssociationRule& rule = rules_[rule_idx];
          for (ObjectId object : rule.consequent) {
            if (itemset_contains(context, object)) continue;
            auto [slot, inserted] = best.emplace(object, rule_idx);
            if (!inserted && rule.lift > rules_[slot->second].lift) slot->second = rule_idx;
          }
        }
      }
    }
    if (subset.size() >= max_antecedent_size_) return;
    for (std::size_t i = start; i < context.size(); ++i) {
      subset.push_back(context[i]);
      match_subsets(context, i + 1, subset, best);
      subset.pop_back();
    }
  }

  std::vector<AssociationRule> rules_;
  double min_support_ = 0.0;
  double min_confidence_ = 0.0;
  std::size_t generated_from_ = 0;
  std::size_t max_antecedent_size_ = 0;
  std::map<Itemset, std::vector<std::size_t>> by_antecedent_;
};

inline RuleSet build_ruleset(const std::vector<Transaction>& transactions, double min_support,
                             double min_confidence, ArmOptions options = {}) {
  auto itemsets = gen_frequent_itemsets(transactions, min_support, options);
  auto rules = filter_lift(gen_rules(itemsets, min_confidence));
  return RuleSet(std::move(rules), min_support, min_confidence, transactions.size());
}

// Debug dump: antecedent,consequent,support,confidence,lift with itemset
// cells ;-joined.
inline void dump_ruleset_csv(const RuleSet& ruleset, std::ostream& out) {
  out << "antecedent,consequent,support,confidence,lift\n";
  const auto join = [&out](const Itemset& items) {
    for (std::size_t i = 0; i < items.size(); ++i) {
      if (i > 0) out << ';';
      out << items[i];
    }
  };
  for (const AssociationRule& rule : ruleset.rules()) {
    join(rule.antecedent);
    out << ',';
    join(rule.consequent);
    out << ',' << rule.support << ',' << rule.confidence << ',' << rule.lift << '\n';
  }
}

}  // namespace spaarc
