#include "json_codec.hpp"

#include <fstream>
#include <sstream>

namespace delayminer::detail {

const Json& require(const Json& object, const std::string& key, const std::string& path) {
  if (!object.is_object()) throw SchemaError(path + ": expected an object");
  const auto it = object.find(key);
  if (it == object.end()) throw SchemaError(path + "." + key + ": required member is missing");
  return *it;
}

double require_number(const Json& object, const std::string& key, const std::string& path) {
  const Json& v = require(object, key, path);
  if (!v.is_number()) throw SchemaError(path + "." + key + ": expected a number");
  return v.get<double>();
}

std::string require_string(const Json& object, const std::string& key, const std::string& path) {
  const Json& v = require(object, key, path);
  if (!v.is_string()) throw SchemaError(path + "." + key + ": expected a string");
  return v.get<std::string>();
}

Json to_json(const ResourceCalendar& calendar) {
  Json out;
  out["resource"] = calendar.resource();
  auto& slots = out["slots"] = Json::array();
  for (const auto& s : calendar.slots()) {
    slots.push_back({{"weekday", weekday_name(s.weekday)},
                     {"from", format_time_of_day(s.from)},
                     {"to", format_time_of_day(s.to)}});
  }
  return out;
}

ResourceCalendar calendar_from_json(const Json& value, const std::string& path, std::string resource) {
  if (!value.is_object()) throw SchemaError(path + ": expected a calendar object");
  if (value.contains("resource")) resource = require_string(value, "resource", path);
  const Json& slots = require(value, "slots", path);
  if (!slots.is_array()) throw SchemaError(path + ".slots: expected an array");
  std::vector<WeeklySlot> parsed;
  for (std::size_t i = 0; i < slots.size(); ++i) {
    const std::string slot_path = path + ".slots[" + std::to_string(i) + "]";
    try {
      parsed.push_back({parse_weekday(require_string(slots[i], "weekday", slot_path)),
                        parse_time_of_day(require_string(slots[i], "from", slot_path)),
                        parse_time_of_day(require_string(slots[i], "to", slot_path))});
    } catch (const ArgumentError& e) {
      throw SchemaError(slot_path + ": " + e.what());
    }
  }
  try {
    return ResourceCalendar(std::move(resource), std::move(parsed));
  } catch (const ValidationError& e) {
    throw SchemaError(path + ": " + e.what());
  }
}

Json to_json(const DurationDistribution& dist) {
  Json params = Json::object();
  const auto names = dist.param_names();
  for (std::size_t i = 0; i < names.size(); ++i) params[std::string(names[i])] = dist.param(i);
  return {{"family", family_name(dist.family())}, {"params", params}};
}

DurationDistribution distribution_from_json(const Json& value, const std::string& path) {
  DistributionFamily family;
  try {
    family = parse_family(require_string(value, "family", path));
  } catch (const ArgumentError& e) {
    throw SchemaError(path + ".family: " + e.what());
  }
  const Json& params = require(value, "params", path);
  auto p = [&](const char* name) { return require_number(params, name, path + ".params"); };
  try {
    switch (family) {
      case DistributionFamily::kFixed:
        return DurationDistribution::fixed(p("value"));
      case DistributionFamily::kUniform:
        return DurationDistribution::uniform(p("min"), p("max"));
      case DistributionFamily::kNormal:
        return DurationDistribution::normal(p("mean"), p("std"));
      case DistributionFamily::kExponential:
        return DurationDistribution::exponential(p("mean"));
      case DistributionFamily::kLogNormal:
        return DurationDistribution::log_normal(p("mu"), p("sigma"));
      case DistributionFamily::kGamma:
        return DurationDistribution::gamma(p("shape"), p("scale"));
    }
  } catch (const ArgumentError& e) {
    throw SchemaError(path + ": " + e.what());
  }
  throw SchemaError(path + ": unsupported family");
}

Json parse_document(std::string_view text, const std::string& what) {
  try {
    return Json::parse(text.begin(), text.end());
  } catch (const Json::parse_error& e) {
    throw SchemaError(what + " is not valid JSON: " + e.what());
  }
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "' for reading");
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  out << text;
  if (!out) throw IoError("failed writing '" + path.string() + "'");
}

}  // namespace delayminer::detail
