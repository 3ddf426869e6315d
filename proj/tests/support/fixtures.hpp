#pragma once

#include <string>

#include "delayminer/calendars.hpp"
#include "delayminer/log_io.hpp"
#include "delayminer/time.hpp"

namespace fixture {

inline std::string path(const std::string& name) { return std::string(DELAYMINER_FIXTURES) + "/" + name; }

inline delayminer::ActivityInstanceLog running_example() { return delayminer::parse_log(path("running_example.csv")); }

/// 08:00-16:00 every day for the four resources of the running example.
inline std::map<std::string, delayminer::ResourceCalendar> office_hours() {
  std::map<std::string, delayminer::ResourceCalendar> out;
  for (const char* r : {"BoJack", "Sarah", "Carolyn", "Todd"}) {
    out.emplace(r, delayminer::ResourceCalendar::daily(r, 8 * 3600, 16 * 3600));
  }
  return out;
}

/// Index of the instance of `activity` in trace `trace`.
inline std::size_t find(const delayminer::ActivityInstanceLog& log, const std::string& trace,
                        const std::string& activity) {
  for (std::size_t i = 0; i < log.size(); ++i) {
    if (log[i].trace_id == trace && log[i].activity == activity) return i;
  }
  throw std::out_of_range(trace + "/" + activity);
}

inline delayminer::Timestamp at(const char* iso) { return delayminer::parse_timestamp(iso); }

}  // namespace fixture
