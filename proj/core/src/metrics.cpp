#include "delayminer/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

#include "delayminer/error.hpp"

namespace delayminer {

double smape(std::span<const double> forecast, std::span<const double> actual) {
  if (forecast.empty() || forecast.size() != actual.size()) {
    throw ArgumentError("smape needs two non-empty sequences of equal length");
  }
  double sum = 0.0;
  for (std::size_t i = 0; i < forecast.size(); ++i) {
    const double denom = std::abs(forecast[i]) + std::abs(actual[i]);
    if (denom > 0.0) sum += 2.0 * std::abs(forecast[i] - actual[i]) / denom;
  }
  return sum / static_cast<double>(forecast.size());
}

double EventHistogram::mass() const { return std::accumulate(bins.begin(), bins.end(), 0.0); }

double emd_1d(const EventHistogram& h1, const EventHistogram& h2) {
  if (h1.bin_width != h2.bin_width) throw ArgumentError("histograms have different bin widths");
  auto check = [](const EventHistogram& h) {
    for (double b : h.bins) {
      if (!(b >= 0.0) || !std::isfinite(b)) throw ArgumentError("histogram bins must be finite and non-negative");
    }
    const double mass = h.mass();
    if (!(mass > 0.0)) throw ArgumentError("histogram has zero mass");
    return mass;
  };
  const double m1 = check(h1);
  const double m2 = check(h2);
  const std::size_t n = std::max(h1.bins.size(), h2.bins.size());
  double c1 = 0.0, c2 = 0.0, distance = 0.0;
  for (std::size_t k = 0; k + 1 < n; ++k) {
    if (k < h1.bins.size()) c1 += h1.bins[k] / m1;
    if (k < h2.bins.size()) c2 += h2.bins[k] / m2;
    distance += std::abs(c1 - c2);
  }
  return distance;
}

EventHistogram event_histogram(const ActivityInstanceLog& log, Seconds bin_width) {
  if (bin_width <= 0) throw ArgumentError("bin width must be positive");
  EventHistogram h;
  h.bin_width = bin_width;
  for (const auto& [trace, indices] : log.traces()) {
    Timestamp first = log[indices.front()].start;
    for (std::size_t i : indices) first = std::min(first, log[i].start);
    for (std::size_t i : indices) {
      for (const Timestamp t : {log[i].start, log[i].end}) {
        const auto bin = static_cast<std::size_t>((t - first) / bin_width);
        if (bin >= h.bins.size()) h.bins.resize(bin + 1, 0.0);
        h.bins[bin] += 1.0;
      }
    }
  }
  return h;
}

double red_distance(const ActivityInstanceLog& sim, const ActivityInstanceLog& ref) {
  if (sim.empty() || ref.empty()) throw ArgumentError("RED distance needs two non-empty logs");
  return emd_1d(event_histogram(sim), event_histogram(ref));
}

std::vector<double> cycle_times(const ActivityInstanceLog& log) {
  std::vector<double> out;
  for (const auto& [trace, indices] : log.traces()) {
    Timestamp first = log[indices.front()].start;
    Timestamp last = log[indices.front()].end;
    for (std::size_t i : indices) {
      first = std::min(first, log[i].start);
      last = std::max(last, log[i].end);
    }
    out.push_back(static_cast<double>(last - first));
  }
  return out;
}

SummaryStats cycle_time_stats(const ActivityInstanceLog& log) {
  if (log.empty()) throw ArgumentError("cycle time statistics need a non-empty log");
  const auto values = cycle_times(log);
  return summarize(values);
}

RediscoveryScore timer_rediscovery_score(const std::map<std::string, double>& injected,
                                         const std::map<std::string, double>& discovered) {
  std::size_t tp = 0;
  for (const auto& [activity, mean] : discovered) tp += injected.contains(activity) ? 1 : 0;
  RediscoveryScore score;
  if (!discovered.empty()) score.precision = static_cast<double>(tp) / static_cast<double>(discovered.size());
  if (!injected.empty()) score.recall = static_cast<double>(tp) / static_cast<double>(injected.size());

  std::set<std::string> keys;
  for (const auto& [k, v] : injected) keys.insert(k);
  for (const auto& [k, v] : discovered) keys.insert(k);
  if (keys.empty()) return score;
  std::vector<double> forecast, actual;
  for (const auto& k : keys) {
    const auto d = discovered.find(k);
    const auto i = injected.find(k);
    forecast.push_back(d == discovered.end() ? 0.0 : d->second);
    actual.push_back(i == injected.end() ? 0.0 : i->second);
  }
  score.smape = smape(forecast, actual);
  return score;
}

MeanInterval confidence_interval(std::span<const double> values) {
  if (values.empty()) throw ArgumentError("confidence interval of an empty sample");
  const double n = static_cast<double>(values.size());
  const double mean = std::accumulate(values.begin(), values.end(), 0.0) / n;
  if (values.size() == 1) return {mean, 0.0};
  double ss = 0.0;
  for (double v : values) ss += (v - mean) * (v - mean);
  return {mean, 1.959963984540054 * std::sqrt(ss / (n - 1.0)) / std::sqrt(n)};
}

}  // namespace delayminer
