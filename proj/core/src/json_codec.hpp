#pragma once

// Internal JSON conversions shared by the model, report and calendar codecs.

#include <nlohmann/json.hpp>
#include <string>

#include "delayminer/calendars.hpp"
#include "delayminer/distribution.hpp"
#include "delayminer/error.hpp"

namespace delayminer::detail {

using Json = nlohmann::ordered_json;

/// Looks up a required member, raising a SchemaError that names the path.
const Json& require(const Json& object, const std::string& key, const std::string& path);
double require_number(const Json& object, const std::string& key, const std::string& path);
std::string require_string(const Json& object, const std::string& key, const std::string& path);

Json to_json(const ResourceCalendar& calendar);
/// `path` is the location of `value` inside the enclosing document.
ResourceCalendar calendar_from_json(const Json& value, const std::string& path, std::string resource = {});

Json to_json(const DurationDistribution& dist);
DurationDistribution distribution_from_json(const Json& value, const std::string& path);

Json parse_document(std::string_view text, const std::string& what);
std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, const std::string& text);

}  // namespace delayminer::detail
