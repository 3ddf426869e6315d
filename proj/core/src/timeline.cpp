#include "delayminer/timeline.hpp"

#include <algorithm>
#include <map>
#include <nlohmann/json.hpp>

#include "delayminer/error.hpp"

namespace delayminer {

void ConcurrencyRelation::add(const std::string& a, const std::string& b) {
  if (a == b) return;
  pairs_.emplace(a, b);
  pairs_.emplace(b, a);
}

bool ConcurrencyRelation::concurrent(const std::string& a, const std::string& b) const {
  return pairs_.contains({a, b});
}

std::vector<std::pair<std::string, std::string>> ConcurrencyRelation::unordered_pairs() const {
  std::vector<std::pair<std::string, std::string>> out;
  for (const auto& p : pairs_) {
    if (p.first < p.second) out.push_back(p);
  }
  return out;
}

ConcurrencyRelation discover_concurrency(const ActivityInstanceLog& log, double zeta) {
  if (!(zeta >= 0.0 && zeta <= 1.0)) throw ArgumentError("zeta must lie in [0, 1]");

  struct Counts {
    std::size_t co_occurrences = 0;
    std::size_t overlaps = 0;
  };
  std::map<std::pair<std::string, std::string>, Counts> counts;

  for (const auto& [trace, indices] : log.traces()) {
    std::map<std::string, std::vector<Interval>> by_activity;
    for (std::size_t i : indices) by_activity[log[i].activity].push_back(log[i].interval());

    for (auto a = by_activity.begin(); a != by_activity.end(); ++a) {
      for (auto b = std::next(a); b != by_activity.end(); ++b) {
        Counts& c = counts[{a->first, b->first}];
        ++c.co_occurrences;
        const bool overlap = std::any_of(a->second.begin(), a->second.end(), [&](const Interval& x) {
          return std::any_of(b->second.begin(), b->second.end(), [&](const Interval& y) { return x.overlaps(y); });
        });
        if (overlap) ++c.overlaps;
      }
    }
  }

  ConcurrencyRelation relation(zeta);
  for (const auto& [pair, c] : counts) {
    const double ratio = static_cast<double>(c.overlaps) / static_cast<double>(c.co_occurrences);
    if (ratio >= zeta) relation.add(pair.first, pair.second);
  }
  return relation;
}

CausalPairSet causal_pairs(const ActivityInstanceLog& log, const ConcurrencyRelation& relation) {
  std::vector<std::ptrdiff_t> predecessor(log.size(), -1);

  for (const auto& [trace, indices] : log.traces()) {
    // Candidates ordered by descending end; the first admissible one wins.
    std::vector<std::size_t> by_end = indices;
    std::sort(by_end.begin(), by_end.end(), [&](std::size_t a, std::size_t b) {
      if (log[a].end != log[b].end) return log[a].end > log[b].end;
      if (log[a].activity != log[b].activity) return log[a].activity < log[b].activity;
      return a < b;
    });
    for (std::size_t target : indices) {
      const auto& t = log[target];
      for (std::size_t candidate : by_end) {
        const auto& c = log[candidate];
        if (candidate == target || c.end > t.start) continue;
        if (relation.concurrent(c.activity, t.activity)) continue;
        predecessor[target] = static_cast<std::ptrdiff_t>(candidate);
        break;
      }
    }
  }

  CausalPairSet out;
  for (std::size_t i = 0; i < log.size(); ++i) {
    if (predecessor[i] < 0) {
      out.orphans.push_back(i);
    } else {
      out.pairs.push_back({static_cast<std::size_t>(predecessor[i]), i});
    }
  }
  return out;
}

std::string timeline_to_json(const ActivityInstanceLog& log, const ConcurrencyRelation& relation,
                             const CausalPairSet& pairs) {
  nlohmann::ordered_json doc;
  doc["zeta"] = relation.threshold();
  auto& concurrent = doc["concurrent"] = nlohmann::ordered_json::array();
  for (const auto& [a, b] : relation.unordered_pairs()) concurrent.push_back({a, b});

  auto describe = [&](std::size_t i) {
    const auto& inst = log[i];
    return nlohmann::ordered_json{{"index", i},
                                  {"trace_id", inst.trace_id},
                                  {"activity", inst.activity},
                                  {"start", format_timestamp(inst.start)},
                                  {"end", format_timestamp(inst.end)}};
  };
  auto& out_pairs = doc["pairs"] = nlohmann::ordered_json::array();
  for (const auto& p : pairs.pairs) out_pairs.push_back({{"source", describe(p.source)}, {"target", describe(p.target)}});
  auto& orphans = doc["orphans"] = nlohmann::ordered_json::array();
  for (std::size_t i : pairs.orphans) orphans.push_back(describe(i));
  return doc.dump(2);
}

}  // namespace delayminer
