#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "delayminer/calendars.hpp"
#include "delayminer/distribution.hpp"
#include "delayminer/log_io.hpp"
#include "delayminer/timeline.hpp"

namespace delayminer {

enum class Estimator { kNaive, kEclipseAware, kEclipseAwareExtrapolated };
enum class Attribution { kExPost, kExAnte };

/// "naive", "eclipse_aware", "eclipse_aware_extrapolated".
std::string_view estimator_name(Estimator e);
/// Also accepts the CLI spellings "eclipse" and "eclipse-extrapolated".
Estimator parse_estimator(std::string_view name);
/// "ex_post" / "ex_ante".
std::string_view attribution_name(Attribution a);
/// Also accepts "ex-post" / "ex-ante".
Attribution parse_attribution(std::string_view name);

struct DelayConfig {
  Estimator estimator = Estimator::kEclipseAwareExtrapolated;
  /// Minimum duration of an availability interval, seconds.
  Seconds lambda = 300;
  /// Activities keep their delays only if the fraction of positive delays
  /// exceeds delta.
  double delta = 0.05;
  Attribution attribution = Attribution::kExAnte;

  void validate() const;
};

/// Extraneous-delay estimate for one causally consecutive pair.
struct PairDelay {
  CausalPair pair;
  /// target start - source end
  Seconds waiting = 0;
  double extraneous = 0.0;
  /// First/last available time; set by the eclipse-aware estimators when at
  /// least one availability interval exists.
  std::optional<Timestamp> fat;
  std::optional<Timestamp> lat;
};

/// Per-resource index of busy and off-duty intervals, built once per log and
/// shared read-only by the estimators.
class AvailabilityIndex {
 public:
  /// Resources without an entry in `off_duty` are treated as always on duty.
  /// The log must outlive the index.
  AvailabilityIndex(const ActivityInstanceLog& log, const std::map<std::string, NonWorkingIntervals>& off_duty);

  /// Builds off-duty intervals from calendars over the log span.
  static AvailabilityIndex from_calendars(const ActivityInstanceLog& log,
                                          const std::map<std::string, ResourceCalendar>& calendars);

  const ActivityInstanceLog& log() const noexcept { return *log_; }

  /// Latest of (a) the ends of other instances of the same resource that end
  /// no later than the target starts and (b) the ends of the resource's
  /// off-duty intervals no later than that start. Falls back to the log span
  /// start when neither exists.
  Timestamp resource_availability_time(std::size_t target) const;

  /// Maximal sub-intervals of <source end, target start> in which the target's
  /// resource is on duty and not processing any logged instance, keeping those
  /// of length >= lambda (and > 0). Short intervals are dropped, not merged.
  std::vector<Interval> availability_intervals(CausalPair pair, Seconds lambda) const;

 private:
  struct ResourceTimeline {
    std::vector<std::size_t> by_start;      // instance indices sorted by start
    std::vector<Timestamp> max_end_prefix;  // running max of end along by_start
    std::vector<std::size_t> by_end;        // instance indices sorted by end
    std::vector<Interval> off_duty;         // sorted, disjoint
  };

  const ResourceTimeline& timeline_of(const std::string& resource) const;

  const ActivityInstanceLog* log_;
  std::map<std::string, ResourceTimeline> timelines_;
};

PairDelay naive_delay(const AvailabilityIndex& index, CausalPair pair);
PairDelay eclipse_delay(const AvailabilityIndex& index, CausalPair pair, Seconds lambda);
PairDelay extrapolated_delay(const AvailabilityIndex& index, CausalPair pair, Seconds lambda);

PairDelay estimate_delay(const AvailabilityIndex& index, CausalPair pair, const DelayConfig& config);
std::vector<PairDelay> estimate_delays(const AvailabilityIndex& index, std::span<const CausalPair> pairs,
                                       const DelayConfig& config);

/// Multiset of extraneous delays attributed to one activity.
struct DelayMultiset {
  std::string activity;
  std::vector<double> delays;
  double positive_ratio = 0.0;
};

double positive_ratio(std::span<const double> delays);

/// Groups delays under the target activity (ex-ante) or the source activity
/// (ex-post) and keeps activities whose positive ratio exceeds delta. Zero
/// delays stay in surviving multisets. Sorted by activity label.
std::vector<DelayMultiset> group_delays(const ActivityInstanceLog& log, std::span<const PairDelay> delays,
                                        Attribution attribution, double delta);

struct ActivityDelays {
  std::string activity;
  std::vector<double> delays;  // may be empty when loaded without raw delays
  std::size_t count = 0;
  double positive_ratio = 0.0;
  DurationDistribution distribution;
};

/// Discovered extraneous delays per activity with fitted distributions.
struct DelayReport {
  Estimator estimator = Estimator::kEclipseAwareExtrapolated;
  Attribution attribution = Attribution::kExAnte;
  Seconds lambda = 0;
  double delta = 0.0;
  std::vector<ActivityDelays> activities;

  const ActivityDelays* find(std::string_view activity) const;
  bool empty() const noexcept { return activities.empty(); }
};

DelayReport build_report(std::vector<DelayMultiset> multisets, const DelayConfig& config);

/// JSON with per-activity summary statistics and fitted distribution; raw
/// delays are included when `emit_raw` is set.
std::string report_to_json(const DelayReport& report, bool emit_raw);
DelayReport parse_report(std::string_view json_text);
void save_report(const DelayReport& report, const std::filesystem::path& path, bool emit_raw);
DelayReport load_report(const std::filesystem::path& path);

struct DiscoveryOptions {
  DelayConfig delay;
  double zeta = 0.75;
  CalendarDiscoveryParams calendar_params;
};

struct DiscoveryResult {
  ConcurrencyRelation relation;
  CausalPairSet pairs;
  std::vector<PairDelay> delays;
  DelayReport report;
};

/// Concurrency discovery, causal pairs, per-pair estimation, grouping and
/// fitting. `calendars` must cover every resource of the log (see
/// resolve_calendars).
DiscoveryResult discover_delays(const ActivityInstanceLog& log,
                                const std::map<std::string, ResourceCalendar>& calendars,
                                const DiscoveryOptions& options);

/// Model calendars take precedence; remaining resources get a calendar
/// discovered from the log, or an always-available one when discovery finds
/// no evidence.
std::map<std::string, ResourceCalendar> resolve_calendars(const ActivityInstanceLog& log,
                                                          const std::map<std::string, ResourceCalendar>& given,
                                                          const CalendarDiscoveryParams& params);

}  // namespace delayminer
