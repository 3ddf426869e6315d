#include "delayminer/delay_discovery.hpp"

#include <algorithm>
#include <array>
#include <cmath>

#include "delayminer/error.hpp"
#include "delayminer/stats.hpp"
#include "json_codec.hpp"

namespace delayminer {
namespace {

constexpr std::array<std::string_view, 3> kEstimatorNames = {"naive", "eclipse_aware", "eclipse_aware_extrapolated"};

}  // namespace

std::string_view estimator_name(Estimator e) { return kEstimatorNames[static_cast<std::size_t>(e)]; }

Estimator parse_estimator(std::string_view name) {
  if (name == "naive") return Estimator::kNaive;
  if (name == "eclipse" || name == "eclipse_aware" || name == "eclipse-aware") return Estimator::kEclipseAware;
  if (name == "eclipse-extrapolated" || name == "eclipse_aware_extrapolated" ||
      name == "eclipse-aware-extrapolated") {
    return Estimator::kEclipseAwareExtrapolated;
  }
  throw ArgumentError("unknown estimator '" + std::string(name) + "'");
}

std::string_view attribution_name(Attribution a) { return a == Attribution::kExPost ? "ex_post" : "ex_ante"; }

Attribution parse_attribution(std::string_view name) {
  if (name == "ex_post" || name == "ex-post") return Attribution::kExPost;
  if (name == "ex_ante" || name == "ex-ante") return Attribution::kExAnte;
  throw ArgumentError("unknown attribution '" + std::string(name) + "'");
}

void DelayConfig::validate() const {
  if (lambda < 0) throw ArgumentError("lambda must be non-negative");
  if (!(delta >= 0.0 && delta <= 1.0)) throw ArgumentError("delta must lie in [0, 1]");
}

AvailabilityIndex::AvailabilityIndex(const ActivityInstanceLog& log,
                                     const std::map<std::string, NonWorkingIntervals>& off_duty)
    : log_(&log) {
  for (std::size_t i = 0; i < log.size(); ++i) timelines_[log[i].resource].by_start.push_back(i);
  for (auto& [resource, tl] : timelines_) {
    std::stable_sort(tl.by_start.begin(), tl.by_start.end(),
                     [&](std::size_t a, std::size_t b) { return log[a].start < log[b].start; });
    Timestamp running = log[tl.by_start.front()].end;
    for (std::size_t i : tl.by_start) {
      running = std::max(running, log[i].end);
      tl.max_end_prefix.push_back(running);
    }
    tl.by_end = tl.by_start;
    std::stable_sort(tl.by_end.begin(), tl.by_end.end(),
                     [&](std::size_t a, std::size_t b) { return log[a].end < log[b].end; });
    if (const auto it = off_duty.find(resource); it != off_duty.end()) tl.off_duty = it->second.intervals;
  }
}

AvailabilityIndex AvailabilityIndex::from_calendars(const ActivityInstanceLog& log,
                                                    const std::map<std::string, ResourceCalendar>& calendars) {
  std::map<std::string, NonWorkingIntervals> off_duty;
  const Interval span = log.span();
  for (const auto& [resource, calendar] : calendars) off_duty.emplace(resource, non_working_intervals(calendar, span));
  return AvailabilityIndex(log, off_duty);
}

const AvailabilityIndex::ResourceTimeline& AvailabilityIndex::timeline_of(const std::string& resource) const {
  return timelines_.at(resource);
}

Timestamp AvailabilityIndex::resource_availability_time(std::size_t target) const {
  const ActivityInstance& t = (*log_)[target];
  const ResourceTimeline& tl = timeline_of(t.resource);
  std::optional<Timestamp> best;

  auto it = std::upper_bound(tl.by_end.begin(), tl.by_end.end(), t.start,
                             [&](Timestamp value, std::size_t i) { return value < (*log_)[i].end; });
  while (it != tl.by_end.begin()) {
    --it;
    if (*it != target) {
      best = (*log_)[*it].end;
      break;
    }
  }
  auto nw = std::upper_bound(tl.off_duty.begin(), tl.off_duty.end(), t.start,
                             [](Timestamp value, const Interval& iv) { return value < iv.end; });
  if (nw != tl.off_duty.begin()) best = std::max(best.value_or(std::prev(nw)->end), std::prev(nw)->end);

  return best.value_or(log_->span().start);
}

std::vector<Interval> AvailabilityIndex::availability_intervals(CausalPair pair, Seconds lambda) const {
  const ActivityInstance& source = (*log_)[pair.source];
  const ActivityInstance& target = (*log_)[pair.target];
  const Interval window{source.end, target.start};
  std::vector<Interval> out;
  if (window.empty()) return out;

  const ResourceTimeline& tl = timeline_of(target.resource);
  std::vector<Interval> blockers;
  auto nw = std::upper_bound(tl.off_duty.begin(), tl.off_duty.end(), window.start,
                             [](Timestamp value, const Interval& iv) { return value < iv.end; });
  for (; nw != tl.off_duty.end() && nw->start < window.end; ++nw) blockers.push_back(*nw);

  // Instances starting before the window ends; walk back while some earlier
  // instance could still reach into the window.
  const auto past = std::lower_bound(tl.by_start.begin(), tl.by_start.end(), window.end,
                                     [&](std::size_t i, Timestamp value) { return (*log_)[i].start < value; });
  for (auto k = static_cast<std::ptrdiff_t>(past - tl.by_start.begin()) - 1; k >= 0; --k) {
    if (tl.max_end_prefix[static_cast<std::size_t>(k)] <= window.start) break;
    const ActivityInstance& inst = (*log_)[tl.by_start[static_cast<std::size_t>(k)]];
    if (inst.interval().overlaps(window)) blockers.push_back(inst.interval());
  }
  std::sort(blockers.begin(), blockers.end(),
            [](const Interval& a, const Interval& b) { return a.start < b.start; });

  Timestamp cursor = window.start;
  auto emit = [&](Timestamp until) {
    const Interval gap{cursor, std::min(until, window.end)};
    if (!gap.empty() && gap.length() >= lambda) out.push_back(gap);
  };
  for (const auto& b : blockers) {
    if (b.empty()) continue;
    if (b.start > cursor) emit(b.start);
    cursor = std::max(cursor, b.end);
    if (cursor >= window.end) break;
  }
  if (cursor < window.end) emit(window.end);
  return out;
}

PairDelay naive_delay(const AvailabilityIndex& index, CausalPair pair) {
  const auto& log = index.log();
  const Timestamp enabled = log[pair.source].end;
  const Timestamp start = log[pair.target].start;
  const Timestamp earliest = std::max(index.resource_availability_time(pair.target), enabled);
  PairDelay d{pair, start - enabled, 0.0, std::nullopt, std::nullopt};
  d.extraneous = static_cast<double>(std::max<Seconds>(0, start - earliest));
  return d;
}

PairDelay eclipse_delay(const AvailabilityIndex& index, CausalPair pair, Seconds lambda) {
  const auto& log = index.log();
  PairDelay d{pair, log[pair.target].start - log[pair.source].end, 0.0, std::nullopt, std::nullopt};
  const auto intervals = index.availability_intervals(pair, lambda);
  if (intervals.empty()) return d;
  d.fat = intervals.front().start;
  d.lat = intervals.back().end;
  d.extraneous = static_cast<double>(*d.lat - *d.fat);
  return d;
}

PairDelay extrapolated_delay(const AvailabilityIndex& index, CausalPair pair, Seconds lambda) {
  PairDelay d = eclipse_delay(index, pair, lambda);
  if (!d.fat) return d;
  const auto& log = index.log();
  const double enabled = static_cast<double>(log[pair.source].end);
  const double start = static_cast<double>(log[pair.target].start);
  const double fat = static_cast<double>(*d.fat);
  const double lat = static_cast<double>(*d.lat);
  const double fat_extrapolated = fat - (fat - enabled) / 2.0;
  const double lat_extrapolated = lat + (start - lat) / 2.0;
  d.extraneous = lat_extrapolated - fat_extrapolated;
  return d;
}

PairDelay estimate_delay(const AvailabilityIndex& index, CausalPair pair, const DelayConfig& config) {
  switch (config.estimator) {
    case Estimator::kNaive:
      return naive_delay(index, pair);
    case Estimator::kEclipseAware:
      return eclipse_delay(index, pair, config.lambda);
    case Estimator::kEclipseAwareExtrapolated:
      return extrapolated_delay(index, pair, config.lambda);
  }
  return naive_delay(index, pair);
}

std::vector<PairDelay> estimate_delays(const AvailabilityIndex& index, std::span<const CausalPair> pairs,
                                       const DelayConfig& config) {
  config.validate();
  std::vector<PairDelay> out;
  out.reserve(pairs.size());
  for (const auto& p : pairs) out.push_back(estimate_delay(index, p, config));
  return out;
}

double positive_ratio(std::span<const double> delays) {
  if (delays.empty()) return 0.0;
  const auto positive = std::count_if(delays.begin(), delays.end(), [](double d) { return d > 0; });
  return static_cast<double>(positive) / static_cast<double>(delays.size());
}

std::vector<DelayMultiset> group_delays(const ActivityInstanceLog& log, std::span<const PairDelay> delays,
                                        Attribution attribution, double delta) {
  std::map<std::string, std::vector<double>> grouped;
  for (const auto& d : delays) {
    const std::size_t owner = attribution == Attribution::kExAnte ? d.pair.target : d.pair.source;
    grouped[log[owner].activity].push_back(d.extraneous);
  }
  std::vector<DelayMultiset> out;
  for (auto& [activity, values] : grouped) {
    const double ratio = positive_ratio(values);
    if (ratio > delta) out.push_back({activity, std::move(values), ratio});
  }
  return out;
}

const ActivityDelays* DelayReport::find(std::string_view activity) const {
  const auto it = std::find_if(activities.begin(), activities.end(),
                               [&](const ActivityDelays& a) { return a.activity == activity; });
  return it == activities.end() ? nullptr : &*it;
}

DelayReport build_report(std::vector<DelayMultiset> multisets, const DelayConfig& config) {
  DelayReport report{config.estimator, config.attribution, config.lambda, config.delta, {}};
  for (auto& m : multisets) {
    ActivityDelays a;
    a.activity = std::move(m.activity);
    a.count = m.delays.size();
    a.positive_ratio = m.positive_ratio;
    a.distribution = fit_distribution(m.delays);
    a.delays = std::move(m.delays);
    report.activities.push_back(std::move(a));
  }
  return report;
}

std::string report_to_json(const DelayReport& report, bool emit_raw) {
  detail::Json doc;
  doc["estimator"] = estimator_name(report.estimator);
  doc["attribution"] = attribution_name(report.attribution);
  doc["lambda"] = report.lambda;
  doc["delta"] = report.delta;
  auto& activities = doc["activities"] = detail::Json::array();
  for (const auto& a : report.activities) {
    detail::Json entry;
    entry["activity"] = a.activity;
    entry["count"] = a.count;
    entry["positive_ratio"] = a.positive_ratio;
    if (!a.delays.empty()) {
      const SummaryStats s = summarize(a.delays);
      entry["summary"] = {{"min", s.min}, {"q1", s.q1},   {"median", s.median},
                          {"mean", s.mean}, {"q3", s.q3}, {"max", s.max}};
    }
    entry["distribution"] = detail::to_json(a.distribution);
    if (emit_raw) entry["delays"] = a.delays;
    activities.push_back(std::move(entry));
  }
  return doc.dump(2);
}

DelayReport parse_report(std::string_view json_text) {
  const auto doc = detail::parse_document(json_text, "delay report");
  DelayReport report;
  report.estimator = parse_estimator(detail::require_string(doc, "estimator", "$"));
  report.attribution = parse_attribution(detail::require_string(doc, "attribution", "$"));
  report.lambda = static_cast<Seconds>(detail::require_number(doc, "lambda", "$"));
  report.delta = detail::require_number(doc, "delta", "$");
  const auto& activities = detail::require(doc, "activities", "$");
  if (!activities.is_array()) throw SchemaError("$.activities: expected an array");
  for (std::size_t i = 0; i < activities.size(); ++i) {
    const std::string path = "$.activities[" + std::to_string(i) + "]";
    const auto& entry = activities[i];
    ActivityDelays a;
    a.activity = detail::require_string(entry, "activity", path);
    a.count = static_cast<std::size_t>(detail::require_number(entry, "count", path));
    a.positive_ratio = detail::require_number(entry, "positive_ratio", path);
    a.distribution = detail::distribution_from_json(detail::require(entry, "distribution", path), path + ".distribution");
    if (entry.contains("delays")) {
      const auto& raw = entry["delays"];
      if (!raw.is_array()) throw SchemaError(path + ".delays: expected an array");
      for (const auto& v : raw) {
        if (!v.is_number()) throw SchemaError(path + ".delays: expected numbers");
        a.delays.push_back(v.get<double>());
      }
    }
    report.activities.push_back(std::move(a));
  }
  return report;
}

void save_report(const DelayReport& report, const std::filesystem::path& path, bool emit_raw) {
  detail::write_text_file(path, report_to_json(report, emit_raw) + "\n");
}

DelayReport load_report(const std::filesystem::path& path) { return parse_report(detail::read_text_file(path)); }

DiscoveryResult discover_delays(const ActivityInstanceLog& log,
                                const std::map<std::string, ResourceCalendar>& calendars,
                                const DiscoveryOptions& options) {
  options.delay.validate();
  DiscoveryResult result;
  result.relation = discover_concurrency(log, options.zeta);
  result.pairs = causal_pairs(log, result.relation);
  const auto index = AvailabilityIndex::from_calendars(log, calendars);
  result.delays = estimate_delays(index, result.pairs.pairs, options.delay);
  result.report = build_report(group_delays(log, result.delays, options.delay.attribution, options.delay.delta),
                               options.delay);
  return result;
}

std::map<std::string, ResourceCalendar> resolve_calendars(const ActivityInstanceLog& log,
                                                          const std::map<std::string, ResourceCalendar>& given,
                                                          const CalendarDiscoveryParams& params) {
  std::map<std::string, ResourceCalendar> out;
  bool missing = false;
  for (const auto& inst : log) {
    if (const auto it = given.find(inst.resource); it != given.end()) {
      out.emplace(inst.resource, it->second);
    } else {
      missing = true;
    }
  }
  if (!missing) return out;
  const auto discovered = discover_calendars(log, params);
  for (const auto& inst : log) {
    if (out.contains(inst.resource)) continue;
    if (const auto it = discovered.find(inst.resource); it != discovered.end()) {
      out.emplace(inst.resource, it->second);
    } else {
      out.emplace(inst.resource, ResourceCalendar::always_available(inst.resource));
    }
  }
  return out;
}

}  // namespace delayminer
