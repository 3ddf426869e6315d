#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "delayminer/time.hpp"

namespace delayminer {

/// One executed activity: trace, activity label, start/end, resource.
struct ActivityInstance {
  std::string trace_id;
  std::string activity;
  Timestamp start = 0;
  Timestamp end = 0;
  std::string resource;

  Interval interval() const noexcept { return {start, end}; }

  friend bool operator==(const ActivityInstance&, const ActivityInstance&) = default;
};

/// Ordered collection of activity instances. Instances are addressed by their
/// position, which the timeline and delay modules use as a stable identity.
class ActivityInstanceLog {
 public:
  ActivityInstanceLog() = default;
  /// Validates every instance (start <= end, non-empty labels).
  explicit ActivityInstanceLog(std::vector<ActivityInstance> instances);

  const std::vector<ActivityInstance>& instances() const noexcept { return instances_; }
  const ActivityInstance& operator[](std::size_t i) const { return instances_[i]; }
  std::size_t size() const noexcept { return instances_.size(); }
  bool empty() const noexcept { return instances_.empty(); }

  auto begin() const noexcept { return instances_.begin(); }
  auto end() const noexcept { return instances_.end(); }

  /// <min start, max end>; {0, 0} for an empty log.
  Interval span() const noexcept;

  /// Instance indices grouped by trace id, each group in log order.
  std::map<std::string, std::vector<std::size_t>> traces() const;
  std::size_t trace_count() const;

  friend bool operator==(const ActivityInstanceLog&, const ActivityInstanceLog&) = default;

 private:
  std::vector<ActivityInstance> instances_;
};

/// Column names used to read a CSV log. Defaults are the canonical header.
struct ColumnMapping {
  std::string case_id = "case_id";
  std::string activity = "activity";
  std::string start_time = "start_time";
  std::string end_time = "end_time";
  std::string resource = "resource";

  /// Applies "key=value" overrides where key is one of the canonical names.
  /// Throws ArgumentError for malformed pairs or unknown keys.
  static ColumnMapping from_pairs(const std::vector<std::string>& pairs);
};

/// Column names of an event-per-row log (one start or complete event per row).
struct EventColumnMapping {
  std::string case_id = "case_id";
  std::string activity = "activity";
  std::string lifecycle = "lifecycle";
  std::string timestamp = "timestamp";
  std::string resource = "resource";
};

ActivityInstanceLog parse_log(const std::filesystem::path& path, const ColumnMapping& mapping = {});
ActivityInstanceLog parse_log_text(std::string_view csv, const ColumnMapping& mapping = {});

/// Pairs start/complete lifecycle events into activity instances. Events of
/// the same (trace, activity, resource) key are paired FIFO in timestamp
/// order; unmatched events raise a ValidationError listing them.
ActivityInstanceLog collapse_events(const std::filesystem::path& path,
                                    const EventColumnMapping& mapping = {});
ActivityInstanceLog collapse_events_text(std::string_view csv,
                                         const EventColumnMapping& mapping = {});

void write_log(const ActivityInstanceLog& log, const std::filesystem::path& path);
std::string format_log(const ActivityInstanceLog& log);

namespace csv {

struct Row {
  std::size_t line = 0;  // 1-based line where the row starts
  std::vector<std::string> fields;
};

/// Splits RFC 4180 CSV text into rows of fields. Quoted fields may contain
/// commas, doubled quotes and line breaks. Blank lines are skipped.
std::vector<Row> read_rows(std::string_view text);

/// Quotes a field when it contains a delimiter, quote or line break.
std::string escape_field(std::string_view field);

}  // namespace csv

}  // namespace delayminer
