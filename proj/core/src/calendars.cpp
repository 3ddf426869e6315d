#include "delayminer/calendars.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <cstdio>
#include <set>

#include "delayminer/error.hpp"
#include "json_codec.hpp"

namespace delayminer {
namespace {

constexpr std::array<std::string_view, 7> kWeekdayNames = {"MONDAY", "TUESDAY",  "WEDNESDAY", "THURSDAY",
                                                           "FRIDAY", "SATURDAY", "SUNDAY"};

void append_merged(std::vector<Interval>& out, Interval next) {
  if (next.empty()) return;
  if (!out.empty() && next.start <= out.back().end) {
    out.back().end = std::max(out.back().end, next.end);
  } else {
    out.push_back(next);
  }
}

}  // namespace

ResourceCalendar::ResourceCalendar(std::string resource, std::vector<WeeklySlot> slots)
    : resource_(std::move(resource)) {
  for (const auto& slot : slots) {
    if (slot.weekday < 0 || slot.weekday > 6) {
      throw ValidationError("calendar of '" + resource_ + "': weekday index out of range");
    }
    if (slot.from < 0 || slot.to > kSecondsPerDay || slot.from >= slot.to) {
      throw ValidationError("calendar of '" + resource_ + "': slot " + format_time_of_day(slot.from) + "-" +
                            format_time_of_day(slot.to) + " is empty or outside the day");
    }
  }
  std::sort(slots.begin(), slots.end());
  for (const auto& slot : slots) {
    if (!slots_.empty() && slots_.back().weekday == slot.weekday && slot.from <= slots_.back().to) {
      slots_.back().to = std::max(slots_.back().to, slot.to);
    } else {
      slots_.push_back(slot);
    }
  }
}

ResourceCalendar ResourceCalendar::always_available(std::string resource) {
  return daily(std::move(resource), 0, kSecondsPerDay);
}

ResourceCalendar ResourceCalendar::daily(std::string resource, Seconds from, Seconds to) {
  std::vector<WeeklySlot> slots;
  for (int d = 0; d < 7; ++d) slots.push_back({d, from, to});
  return ResourceCalendar(std::move(resource), std::move(slots));
}

Seconds ResourceCalendar::weekly_working_time() const noexcept {
  Seconds total = 0;
  for (const auto& slot : slots_) total += slot.to - slot.from;
  return total;
}

std::vector<Interval> ResourceCalendar::working_intervals(Interval range) const {
  std::vector<Interval> out;
  if (range.empty() || slots_.empty()) return out;
  for (Timestamp day = floor_to_day(range.start); day < range.end; day += kSecondsPerDay) {
    const int wd = weekday_index(day);
    for (const auto& slot : slots_) {
      if (slot.weekday != wd) continue;
      append_merged(out, {std::max(range.start, day + slot.from), std::min(range.end, day + slot.to)});
    }
  }
  return out;
}

bool ResourceCalendar::is_working(Timestamp t) const {
  const Timestamp day = floor_to_day(t);
  const int wd = weekday_index(t);
  const Seconds sod = t - day;
  return std::any_of(slots_.begin(), slots_.end(),
                     [&](const WeeklySlot& s) { return s.weekday == wd && s.from <= sod && sod < s.to; });
}

Timestamp ResourceCalendar::next_working_instant(Timestamp t) const {
  if (slots_.empty()) throw ValidationError("calendar of '" + resource_ + "' has no working time");
  for (Timestamp day = floor_to_day(t);; day += kSecondsPerDay) {
    const int wd = weekday_index(day);
    for (const auto& slot : slots_) {
      if (slot.weekday == wd && day + slot.to > t) return std::max(t, day + slot.from);
    }
  }
}

Timestamp ResourceCalendar::add_working_time(Timestamp t, Seconds work) const {
  if (work <= 0) return t;
  const Seconds weekly = weekly_working_time();
  if (weekly == 0) throw ValidationError("calendar of '" + resource_ + "' has no working time");
  // A full week of wall time always contains exactly `weekly` working seconds.
  const Seconds full_weeks = (work - 1) / weekly;
  t += full_weeks * kSecondsPerWeek;
  work -= full_weeks * weekly;
  for (Timestamp day = floor_to_day(t);; day += kSecondsPerDay) {
    const int wd = weekday_index(day);
    for (const auto& slot : slots_) {
      if (slot.weekday != wd) continue;
      const Timestamp from = std::max(t, day + slot.from);
      const Timestamp to = day + slot.to;
      if (to <= from) continue;
      if (work <= to - from) return from + work;
      work -= to - from;
    }
  }
}

NonWorkingIntervals non_working_intervals(const ResourceCalendar& calendar, Interval span) {
  NonWorkingIntervals out{calendar.resource(), {}};
  if (span.empty()) return out;
  Timestamp cursor = span.start;
  for (const auto& working : calendar.working_intervals(span)) {
    if (working.start > cursor) out.intervals.push_back({cursor, working.start});
    cursor = std::max(cursor, working.end);
  }
  if (cursor < span.end) out.intervals.push_back({cursor, span.end});
  return out;
}

std::map<std::string, ResourceCalendar> discover_calendars(const ActivityInstanceLog& log,
                                                           const CalendarDiscoveryParams& params) {
  if (params.granularity <= 0 || kSecondsPerDay % params.granularity != 0) {
    throw ArgumentError("calendar granularity must divide 86400");
  }
  if (!(params.support >= 0.0 && params.support <= 1.0) || !(params.confidence >= 0.0 && params.confidence <= 1.0)) {
    throw ArgumentError("calendar support and confidence must lie in [0, 1]");
  }
  const Seconds slots_per_week = kSecondsPerWeek / params.granularity;

  struct Evidence {
    std::vector<std::size_t> count;
    std::vector<std::set<Timestamp>> weeks_per_slot;
    std::set<Timestamp> weeks;
  };
  std::map<std::string, Evidence> evidence;
  for (const auto& inst : log) {
    auto [it, inserted] = evidence.try_emplace(inst.resource);
    Evidence& ev = it->second;
    if (inserted) {
      ev.count.assign(static_cast<std::size_t>(slots_per_week), 0);
      ev.weeks_per_slot.resize(static_cast<std::size_t>(slots_per_week));
    }
    for (Timestamp t : {inst.start, inst.end}) {
      const Timestamp week = floor_to_week(t);
      const auto slot = static_cast<std::size_t>((t - week) / params.granularity);
      ++ev.count[slot];
      ev.weeks_per_slot[slot].insert(week);
      ev.weeks.insert(week);
    }
  }

  std::map<std::string, ResourceCalendar> out;
  for (const auto& [resource, ev] : evidence) {
    const std::size_t max_count = *std::max_element(ev.count.begin(), ev.count.end());
    const double total_weeks = static_cast<double>(ev.weeks.size());
    std::vector<WeeklySlot> slots;
    for (std::size_t s = 0; s < ev.count.size(); ++s) {
      if (ev.count[s] == 0) continue;
      if (static_cast<double>(ev.count[s]) < params.support * static_cast<double>(max_count)) continue;
      if (static_cast<double>(ev.weeks_per_slot[s].size()) / total_weeks < params.confidence) continue;
      const Seconds offset = static_cast<Seconds>(s) * params.granularity;
      slots.push_back({static_cast<int>(offset / kSecondsPerDay), offset % kSecondsPerDay,
                       offset % kSecondsPerDay + params.granularity});
    }
    if (!slots.empty()) out.emplace(resource, ResourceCalendar(resource, std::move(slots)));
  }
  return out;
}

std::string_view weekday_name(int weekday) {
  if (weekday < 0 || weekday > 6) throw ArgumentError("weekday index out of range");
  return kWeekdayNames[static_cast<std::size_t>(weekday)];
}

int parse_weekday(std::string_view name) {
  std::string upper(name);
  std::transform(upper.begin(), upper.end(), upper.begin(),
                 [](unsigned char c) { return static_cast<char>(std::toupper(c)); });
  for (std::size_t i = 0; i < kWeekdayNames.size(); ++i) {
    if (kWeekdayNames[i] == upper) return static_cast<int>(i);
  }
  throw ArgumentError("unknown weekday '" + std::string(name) + "'");
}

Seconds parse_time_of_day(std::string_view text) {
  int h = 0, m = 0, s = 0;
  char tail = 0;
  const std::string str(text);
  const int n = std::sscanf(str.c_str(), "%d:%d:%d%c", &h, &m, &s, &tail);
  if (n < 2 || n > 3 || h < 0 || m < 0 || m > 59 || s < 0 || s > 59) {
    throw ArgumentError("invalid time of day '" + str + "'");
  }
  const Seconds total = h * 3600 + m * 60 + s;
  if (total > kSecondsPerDay) throw ArgumentError("invalid time of day '" + str + "'");
  return total;
}

std::string format_time_of_day(Seconds seconds) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%02lld:%02lld:%02lld", static_cast<long long>(seconds / 3600),
                static_cast<long long>(seconds / 60 % 60), static_cast<long long>(seconds % 60));
  return buf;
}

std::vector<ResourceCalendar> parse_calendars(std::string_view json_text) {
  const auto doc = detail::parse_document(json_text, "calendar document");
  std::vector<ResourceCalendar> out;
  if (doc.is_array()) {
    for (std::size_t i = 0; i < doc.size(); ++i) {
      out.push_back(detail::calendar_from_json(doc[i], "$[" + std::to_string(i) + "]"));
    }
  } else {
    out.push_back(detail::calendar_from_json(doc, "$"));
  }
  return out;
}

std::vector<ResourceCalendar> load_calendars(const std::filesystem::path& path) {
  return parse_calendars(detail::read_text_file(path));
}

std::string calendars_to_json(const std::vector<ResourceCalendar>& calendars) {
  detail::Json doc = detail::Json::array();
  for (const auto& cal : calendars) doc.push_back(detail::to_json(cal));
  return doc.dump(2);
}

}  // namespace delayminer
