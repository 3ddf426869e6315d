#pragma once

#include <cstdint>
#include <string>
#include <string_view>

namespace delayminer {

/// Seconds since 1970-01-01T00:00:00Z. All event times are second-granular.
using Timestamp = std::int64_t;
/// A duration in whole seconds.
using Seconds = std::int64_t;

inline constexpr Seconds kSecondsPerDay = 86400;
inline constexpr Seconds kSecondsPerWeek = 7 * kSecondsPerDay;

/// Half-open absolute interval [start, end). Zero-length intervals are allowed
/// as values but never produced by the interval algorithms.
struct Interval {
  Timestamp start = 0;
  Timestamp end = 0;

  Seconds length() const noexcept { return end - start; }
  bool empty() const noexcept { return end <= start; }
  bool contains(Timestamp t) const noexcept { return start <= t && t < end; }
  /// Open-interior overlap: touching endpoints do not overlap.
  bool overlaps(const Interval& other) const noexcept {
    return start < other.end && other.start < end;
  }

  friend bool operator==(const Interval&, const Interval&) = default;
};

/// Parses ISO-8601 date-times such as "2021-11-03T08:00:00Z",
/// "2021-11-03 08:00:00.123+02:00" or "2021-11-03T08:00:00". Fractional
/// seconds are truncated; a missing offset means UTC. Throws ArgumentError.
Timestamp parse_timestamp(std::string_view text);

/// Formats as "YYYY-MM-DDTHH:MM:SSZ".
std::string format_timestamp(Timestamp t);

/// Day of week with Monday = 0 ... Sunday = 6.
int weekday_index(Timestamp t);

/// Start of the (UTC) day containing t.
Timestamp floor_to_day(Timestamp t);

/// Monday 00:00:00 UTC of the week containing t.
Timestamp floor_to_week(Timestamp t);

}  // namespace delayminer
