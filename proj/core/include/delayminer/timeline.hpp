#pragma once

#include <cstddef>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "delayminer/log_io.hpp"

namespace delayminer {

/// Symmetric relation over activity labels declaring which activities are
/// concurrent. An activity is never concurrent with itself.
class ConcurrencyRelation {
 public:
  ConcurrencyRelation() = default;
  explicit ConcurrencyRelation(double threshold) : threshold_(threshold) {}

  /// Adds (a, b) and (b, a). Self-pairs are ignored.
  void add(const std::string& a, const std::string& b);
  bool concurrent(const std::string& a, const std::string& b) const;

  double threshold() const noexcept { return threshold_; }
  /// Each unordered pair once, as (smaller label, larger label).
  std::vector<std::pair<std::string, std::string>> unordered_pairs() const;
  std::size_t size() const noexcept { return pairs_.size() / 2; }
  bool empty() const noexcept { return pairs_.empty(); }

 private:
  double threshold_ = 0.0;
  std::set<std::pair<std::string, std::string>> pairs_;
};

/// Two activities are concurrent when, over the traces in which both occur,
/// the fraction of traces where some instance of one overlaps some instance of
/// the other is at least `zeta`.
ConcurrencyRelation discover_concurrency(const ActivityInstanceLog& log, double zeta);

/// Indices into the log of a causally consecutive (source, target) pair.
struct CausalPair {
  std::size_t source = 0;
  std::size_t target = 0;

  friend bool operator==(const CausalPair&, const CausalPair&) = default;
};

struct CausalPairSet {
  std::vector<CausalPair> pairs;     // in target log order
  std::vector<std::size_t> orphans;  // instances without a causal predecessor, in log order
};

/// For every instance, its causal predecessor is the latest-ending instance of
/// the same trace that ends no later than the instance starts and whose
/// activity is not concurrent with it. Ties on the end time go to the
/// lexicographically smallest activity label, then to the earliest log index.
CausalPairSet causal_pairs(const ActivityInstanceLog& log, const ConcurrencyRelation& relation);

/// Debug dump of the relation and the pair set as a JSON document.
std::string timeline_to_json(const ActivityInstanceLog& log, const ConcurrencyRelation& relation,
                             const CausalPairSet& pairs);

}  // namespace delayminer
