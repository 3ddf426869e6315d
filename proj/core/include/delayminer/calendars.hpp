#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "delayminer/log_io.hpp"
#include "delayminer/time.hpp"

namespace delayminer {

/// A weekly working slot: [from, to) seconds of the given weekday
/// (Monday = 0). `to` may be 86400 to reach midnight.
struct WeeklySlot {
  int weekday = 0;
  Seconds from = 0;
  Seconds to = 0;

  friend auto operator<=>(const WeeklySlot&, const WeeklySlot&) = default;
};

class ResourceCalendar {
 public:
  ResourceCalendar() = default;
  /// Validates and normalizes: slots sorted, overlapping/adjacent slots of the
  /// same day merged. Throws ValidationError on out-of-range slots.
  ResourceCalendar(std::string resource, std::vector<WeeklySlot> slots);

  static ResourceCalendar always_available(std::string resource);
  /// Same working slot on each of the seven weekdays.
  static ResourceCalendar daily(std::string resource, Seconds from, Seconds to);

  const std::string& resource() const noexcept { return resource_; }
  const std::vector<WeeklySlot>& slots() const noexcept { return slots_; }
  bool empty() const noexcept { return slots_.empty(); }
  Seconds weekly_working_time() const noexcept;

  /// Absolute working intervals intersecting `range`, clipped to it, merged
  /// across midnight boundaries.
  std::vector<Interval> working_intervals(Interval range) const;

  bool is_working(Timestamp t) const;
  /// Earliest instant >= t at which the resource is working. Throws
  /// ValidationError for an empty calendar.
  Timestamp next_working_instant(Timestamp t) const;
  /// Instant at which `work` seconds of on-calendar time, consumed from t
  /// onwards, are complete. Returns t when work == 0.
  Timestamp add_working_time(Timestamp t, Seconds work) const;

  friend bool operator==(const ResourceCalendar&, const ResourceCalendar&) = default;

 private:
  std::string resource_;
  std::vector<WeeklySlot> slots_;
};

/// Ordered, disjoint absolute intervals during which a resource is off duty.
struct NonWorkingIntervals {
  std::string resource;
  std::vector<Interval> intervals;
};

/// Complement of the calendar's working time within `span`.
NonWorkingIntervals non_working_intervals(const ResourceCalendar& calendar, Interval span);

struct CalendarDiscoveryParams {
  Seconds granularity = 3600;
  double support = 0.1;
  double confidence = 0.6;
};

/// Builds a weekly calendar per resource from the instants at which the
/// resource interacted with the process (starts and ends of its instances).
/// A slot of `granularity` seconds is kept when its interaction count is at
/// least `support` times the resource's busiest slot count, and the fraction
/// of observed weeks in which the slot saw an interaction is at least
/// `confidence`.
std::map<std::string, ResourceCalendar> discover_calendars(const ActivityInstanceLog& log,
                                                           const CalendarDiscoveryParams& params = {});

/// Calendar JSON: {"resource": str, "slots": [{"weekday": "MONDAY",
/// "from": "08:00:00", "to": "16:00:00"}]}. A file holds one calendar object
/// or an array of them.
std::vector<ResourceCalendar> load_calendars(const std::filesystem::path& path);
std::vector<ResourceCalendar> parse_calendars(std::string_view json_text);
std::string calendars_to_json(const std::vector<ResourceCalendar>& calendars);

std::string_view weekday_name(int weekday);
/// Accepts full upper/lower-case English names ("MONDAY", "monday").
int parse_weekday(std::string_view name);
/// "HH:MM:SS" (or "HH:MM"); "24:00:00" denotes the end of the day.
Seconds parse_time_of_day(std::string_view text);
std::string format_time_of_day(Seconds seconds);

}  // namespace delayminer
