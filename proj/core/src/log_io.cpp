#include "delayminer/log_io.hpp"

#include <algorithm>
#include <deque>
#include <fstream>
#include <numeric>
#include <sstream>
#include <tuple>

#include "delayminer/error.hpp"

namespace delayminer {

ActivityInstanceLog::ActivityInstanceLog(std::vector<ActivityInstance> instances)
    : instances_(std::move(instances)) {
  for (const auto& inst : instances_) {
    if (inst.activity.empty()) {
      throw ValidationError("activity instance of trace '" + inst.trace_id + "' has an empty activity label");
    }
    if (inst.resource.empty()) {
      throw ValidationError("activity instance '" + inst.activity + "' of trace '" + inst.trace_id +
                            "' has an empty resource");
    }
    if (inst.start > inst.end) {
      throw ValidationError("activity instance '" + inst.activity + "' of trace '" + inst.trace_id +
                            "' ends before it starts");
    }
  }
}

Interval ActivityInstanceLog::span() const noexcept {
  if (instances_.empty()) return {};
  Interval span{instances_.front().start, instances_.front().end};
  for (const auto& inst : instances_) {
    span.start = std::min(span.start, inst.start);
    span.end = std::max(span.end, inst.end);
  }
  return span;
}

std::map<std::string, std::vector<std::size_t>> ActivityInstanceLog::traces() const {
  std::map<std::string, std::vector<std::size_t>> out;
  for (std::size_t i = 0; i < instances_.size(); ++i) out[instances_[i].trace_id].push_back(i);
  return out;
}

std::size_t ActivityInstanceLog::trace_count() const { return traces().size(); }

ColumnMapping ColumnMapping::from_pairs(const std::vector<std::string>& pairs) {
  ColumnMapping mapping;
  for (const auto& pair : pairs) {
    const auto eq = pair.find('=');
    if (eq == std::string::npos || eq == 0 || eq + 1 == pair.size()) {
      throw ArgumentError("column mapping '" + pair + "' is not of the form key=value");
    }
    const std::string key = pair.substr(0, eq);
    std::string value = pair.substr(eq + 1);
    if (key == "case_id") {
      mapping.case_id = std::move(value);
    } else if (key == "activity") {
      mapping.activity = std::move(value);
    } else if (key == "start_time") {
      mapping.start_time = std::move(value);
    } else if (key == "end_time") {
      mapping.end_time = std::move(value);
    } else if (key == "resource") {
      mapping.resource = std::move(value);
    } else {
      throw ArgumentError("unknown column mapping key '" + key + "'");
    }
  }
  return mapping;
}

namespace csv {

std::vector<Row> read_rows(std::string_view text) {
  if (text.size() >= 3 && text.substr(0, 3) == "\xEF\xBB\xBF") text.remove_prefix(3);

  std::vector<Row> rows;
  Row row;
  std::string field;
  bool in_quotes = false;
  bool row_has_content = false;
  std::size_t line = 1;
  row.line = 1;

  auto end_field = [&] {
    row.fields.push_back(std::move(field));
    field.clear();
  };
  auto end_row = [&] {
    end_field();
    if (row_has_content) rows.push_back(std::move(row));
    row = Row{};
    row_has_content = false;
  };

  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if (in_quotes) {
      if (c == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') {
          field.push_back('"');
          ++i;
        } else {
          in_quotes = false;
        }
      } else {
        if (c == '\n') ++line;
        field.push_back(c);
      }
      continue;
    }
    switch (c) {
      case '"':
        in_quotes = true;
        row_has_content = true;
        break;
      case ',':
        end_field();
        row_has_content = true;
        break;
      case '\r':
        break;
      case '\n':
        end_row();
        ++line;
        row.line = line;
        break;
      default:
        field.push_back(c);
        row_has_content = true;
    }
  }
  if (in_quotes) throw SchemaError("unterminated quoted field starting on line " + std::to_string(row.line));
  end_row();
  return rows;
}

std::string escape_field(std::string_view field) {
  if (field.find_first_of(",\"\r\n") == std::string_view::npos) return std::string(field);
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out.push_back('"');
    out.push_back(c);
  }
  out.push_back('"');
  return out;
}

}  // namespace csv

namespace {

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "' for reading");
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

std::size_t column_index(const std::vector<std::string>& header, const std::string& name) {
  const auto it = std::find(header.begin(), header.end(), name);
  if (it == header.end()) throw SchemaError("missing column '" + name + "'");
  return static_cast<std::size_t>(it - header.begin());
}

const std::string& field_at(const csv::Row& row, std::size_t index) {
  if (index >= row.fields.size()) {
    throw SchemaError("line " + std::to_string(row.line) + ": expected at least " + std::to_string(index + 1) +
                      " fields, found " + std::to_string(row.fields.size()));
  }
  return row.fields[index];
}

Timestamp timestamp_at(const csv::Row& row, std::size_t index) {
  try {
    return parse_timestamp(field_at(row, index));
  } catch (const ArgumentError& e) {
    throw ValidationError("line " + std::to_string(row.line) + ": " + e.what());
  }
}

}  // namespace

ActivityInstanceLog parse_log_text(std::string_view text, const ColumnMapping& mapping) {
  const auto rows = csv::read_rows(text);
  if (rows.empty()) throw SchemaError("log has no header row");
  const auto& header = rows.front().fields;
  const std::size_t c_case = column_index(header, mapping.case_id);
  const std::size_t c_activity = column_index(header, mapping.activity);
  const std::size_t c_start = column_index(header, mapping.start_time);
  const std::size_t c_end = column_index(header, mapping.end_time);
  const std::size_t c_resource = column_index(header, mapping.resource);

  std::vector<ActivityInstance> instances;
  instances.reserve(rows.size() - 1);
  for (std::size_t r = 1; r < rows.size(); ++r) {
    const auto& row = rows[r];
    ActivityInstance inst{field_at(row, c_case), field_at(row, c_activity), timestamp_at(row, c_start),
                          timestamp_at(row, c_end), field_at(row, c_resource)};
    if (inst.start > inst.end) {
      throw ValidationError("line " + std::to_string(row.line) + ": activity '" + inst.activity + "' of trace '" +
                            inst.trace_id + "' ends before it starts");
    }
    if (inst.activity.empty() || inst.resource.empty()) {
      throw ValidationError("line " + std::to_string(row.line) + ": empty activity or resource");
    }
    instances.push_back(std::move(inst));
  }
  return ActivityInstanceLog(std::move(instances));
}

ActivityInstanceLog parse_log(const std::filesystem::path& path, const ColumnMapping& mapping) {
  return parse_log_text(read_file(path), mapping);
}

ActivityInstanceLog collapse_events_text(std::string_view text, const EventColumnMapping& mapping) {
  const auto rows = csv::read_rows(text);
  if (rows.empty()) throw SchemaError("event log has no header row");
  const auto& header = rows.front().fields;
  const std::size_t c_case = column_index(header, mapping.case_id);
  const std::size_t c_activity = column_index(header, mapping.activity);
  const std::size_t c_lifecycle = column_index(header, mapping.lifecycle);
  const std::size_t c_time = column_index(header, mapping.timestamp);
  const std::size_t c_resource = column_index(header, mapping.resource);

  struct Event {
    std::size_t line;
    std::string trace, activity, resource;
    bool is_start;
    Timestamp time;
  };
  std::vector<Event> events;
  for (std::size_t r = 1; r < rows.size(); ++r) {
    const auto& row = rows[r];
    std::string lifecycle = field_at(row, c_lifecycle);
    std::transform(lifecycle.begin(), lifecycle.end(), lifecycle.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    if (lifecycle != "start" && lifecycle != "complete") {
      throw ValidationError("line " + std::to_string(row.line) + ": unsupported lifecycle '" + lifecycle + "'");
    }
    events.push_back({row.line, field_at(row, c_case), field_at(row, c_activity), field_at(row, c_resource),
                      lifecycle == "start", timestamp_at(row, c_time)});
  }
  // Timestamp order; at equal times starts come first so that zero-length
  // instances pair up, then file order.
  std::vector<std::size_t> order(events.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return std::tuple(events[a].time, !events[a].is_start) < std::tuple(events[b].time, !events[b].is_start);
  });

  using Key = std::tuple<std::string, std::string, std::string>;
  std::map<Key, std::deque<std::size_t>> pending;
  std::vector<std::pair<std::size_t, std::size_t>> matched;  // (start event, complete event)
  std::vector<std::size_t> orphans;
  for (std::size_t idx : order) {
    const Event& ev = events[idx];
    auto& queue = pending[Key{ev.trace, ev.activity, ev.resource}];
    if (ev.is_start) {
      queue.push_back(idx);
    } else if (queue.empty()) {
      orphans.push_back(idx);
    } else {
      matched.emplace_back(queue.front(), idx);
      queue.pop_front();
    }
  }
  for (const auto& [key, queue] : pending) orphans.insert(orphans.end(), queue.begin(), queue.end());

  if (!orphans.empty()) {
    std::sort(orphans.begin(), orphans.end(),
              [&](std::size_t a, std::size_t b) { return events[a].line < events[b].line; });
    std::string msg = "unmatched lifecycle events:";
    for (std::size_t idx : orphans) {
      const Event& ev = events[idx];
      msg += " [line " + std::to_string(ev.line) + ": " + (ev.is_start ? "start" : "complete") + " of '" +
             ev.activity + "' in trace '" + ev.trace + "']";
    }
    throw ValidationError(msg);
  }

  std::sort(matched.begin(), matched.end(), [&](const auto& a, const auto& b) {
    return std::tuple(events[a.first].time, events[a.first].line) <
           std::tuple(events[b.first].time, events[b.first].line);
  });
  std::vector<ActivityInstance> instances;
  instances.reserve(matched.size());
  for (const auto& [s, c] : matched) {
    instances.push_back({events[s].trace, events[s].activity, events[s].time, events[c].time, events[s].resource});
  }
  return ActivityInstanceLog(std::move(instances));
}

ActivityInstanceLog collapse_events(const std::filesystem::path& path, const EventColumnMapping& mapping) {
  return collapse_events_text(read_file(path), mapping);
}

std::string format_log(const ActivityInstanceLog& log) {
  std::string out = "case_id,activity,start_time,end_time,resource\n";
  for (const auto& inst : log) {
    out += csv::escape_field(inst.trace_id);
    out += ',';
    out += csv::escape_field(inst.activity);
    out += ',';
    out += format_timestamp(inst.start);
    out += ',';
    out += format_timestamp(inst.end);
    out += ',';
    out += csv::escape_field(inst.resource);
    out += '\n';
  }
  return out;
}

void write_log(const ActivityInstanceLog& log, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  out << format_log(log);
  if (!out) throw IoError("failed writing '" + path.string() + "'");
}

}  // namespace delayminer
