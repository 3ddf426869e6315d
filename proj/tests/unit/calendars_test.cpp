#include <doctest.h>

#include <algorithm>
#include <random>

#include "delayminer/calendars.hpp"
#include "delayminer/error.hpp"
#include "fixtures.hpp"

using namespace delayminer;

namespace {

Seconds total(const std::vector<Interval>& intervals) {
  Seconds s = 0;
  for (const auto& i : intervals) s += i.length();
  return s;
}

}  // namespace

TEST_CASE("office hours leave the night off duty") {
  const auto cal = ResourceCalendar::daily("BoJack", 8 * 3600, 16 * 3600);
  const Interval span{fixture::at("2021-11-03T08:00:00Z"), fixture::at("2021-11-04T16:00:00Z")};
  const auto nw = non_working_intervals(cal, span);
  REQUIRE(nw.intervals.size() == 1);
  CHECK(nw.intervals[0].start == fixture::at("2021-11-03T16:00:00Z"));
  CHECK(nw.intervals[0].end == fixture::at("2021-11-04T08:00:00Z"));
  CHECK(non_working_intervals(ResourceCalendar::always_available("x"), span).intervals.empty());
  const auto none = non_working_intervals(ResourceCalendar("x", {}), span);
  REQUIRE(none.intervals.size() == 1);
  CHECK(none.intervals[0] == span);
}

TEST_CASE("working and non-working time partition any span") {
  std::mt19937_64 rng(3);
  for (int round = 0; round < 100; ++round) {
    std::vector<WeeklySlot> slots;
    for (int k = 0; k < 6; ++k) {
      const Seconds from = static_cast<Seconds>(rng() % 24) * 3600;
      const Seconds to = std::min<Seconds>(kSecondsPerDay, from + 1800 + static_cast<Seconds>(rng() % 20000));
      slots.push_back({static_cast<int>(rng() % 7), from, to});
    }
    const ResourceCalendar cal("r", slots);
    const Timestamp start = 1'700'000'000 + static_cast<Timestamp>(rng() % 1'000'000);
    const Interval span{start, start + static_cast<Timestamp>(rng() % 2'000'000)};
    const auto working = cal.working_intervals(span);
    const auto off = non_working_intervals(cal, span).intervals;
    CHECK(total(working) + total(off) == span.length());
    for (const auto& w : working)
      for (const auto& o : off) CHECK_FALSE(w.overlaps(o));
    for (const auto& w : working) {
      CHECK(cal.is_working(w.start));
      if (w.end < span.end) CHECK_FALSE(cal.is_working(w.end));
    }
  }
}

TEST_CASE("working time arithmetic") {
  const auto cal = ResourceCalendar::daily("r", 8 * 3600, 16 * 3600);
  const Timestamp wed_15 = fixture::at("2021-11-03T15:00:00Z");
  CHECK(cal.is_working(wed_15));
  CHECK_FALSE(cal.is_working(fixture::at("2021-11-03T16:00:00Z")));
  CHECK(cal.next_working_instant(fixture::at("2021-11-03T17:00:00Z")) == fixture::at("2021-11-04T08:00:00Z"));
  CHECK(cal.next_working_instant(wed_15) == wed_15);
  CHECK(cal.add_working_time(wed_15, 0) == wed_15);
  CHECK(cal.add_working_time(wed_15, 3600) == fixture::at("2021-11-03T16:00:00Z"));
  CHECK(cal.add_working_time(wed_15, 7200) == fixture::at("2021-11-04T09:00:00Z"));
  CHECK(cal.add_working_time(wed_15, 8 * 3600 * 10) == fixture::at("2021-11-13T15:00:00Z"));
  CHECK(cal.weekly_working_time() == 7 * 8 * 3600);
  CHECK_THROWS_AS(ResourceCalendar("r", {}).next_working_instant(wed_15), ValidationError);
  CHECK_THROWS_AS(ResourceCalendar("r", {{7, 0, 10}}), ValidationError);
  CHECK_THROWS_AS(ResourceCalendar("r", {{1, 500, 100}}), ValidationError);
}

TEST_CASE("add_working_time consumes exactly the requested on-duty seconds") {
  std::mt19937_64 rng(8);
  const ResourceCalendar cal("r", {{0, 9 * 3600, 12 * 3600}, {0, 13 * 3600, 17 * 3600}, {3, 0, 86400}, {4, 22 * 3600, 86400}});
  for (int round = 0; round < 200; ++round) {
    const Timestamp t = 1'700'000'000 + static_cast<Timestamp>(rng() % 3'000'000);
    const Seconds work = static_cast<Seconds>(rng() % 400'000);
    const Timestamp end = cal.add_working_time(t, work);
    CHECK(total(cal.working_intervals({t, end})) == work);
  }
}

TEST_CASE("calendar discovery keeps slots with enough evidence") {
  // Monday 09:00-10:00 every week for ten weeks, plus one stray Friday event.
  std::vector<ActivityInstance> instances;
  const Timestamp monday = fixture::at("2024-01-01T09:00:00Z");
  for (int w = 0; w < 10; ++w) {
    instances.push_back({"t" + std::to_string(w), "A", monday + w * kSecondsPerWeek + 600,
                         monday + w * kSecondsPerWeek + 1800, "ann"});
  }
  instances.push_back({"x", "A", monday + 4 * kSecondsPerDay + 7200, monday + 4 * kSecondsPerDay + 7300, "ann"});
  const ActivityInstanceLog log(instances);

  const auto strict = discover_calendars(log, {3600, 0.1, 0.8});
  REQUIRE(strict.contains("ann"));
  CHECK(strict.at("ann").slots() == std::vector<WeeklySlot>{{0, 9 * 3600, 10 * 3600}});

  const auto loose = discover_calendars(log, {3600, 0.0, 0.0});
  CHECK(loose.at("ann").slots().size() == 2);

  // Raising confidence never adds slots.
  std::size_t previous = loose.at("ann").slots().size();
  for (double c : {0.05, 0.1, 0.5, 0.9, 1.0}) {
    const auto cals = discover_calendars(log, {3600, 0.0, c});
    const std::size_t now = cals.contains("ann") ? cals.at("ann").slots().size() : 0;
    CHECK(now <= previous);
    previous = now;
  }

  const ActivityInstanceLog single({{"1", "A", monday, monday, "solo"}});
  CHECK(discover_calendars(single, {3600, 0.5, 0.5}).at("solo").slots().size() == 1);
  CHECK_THROWS_AS(discover_calendars(log, {7000, 0.1, 0.5}), ArgumentError);
}

TEST_CASE("calendar JSON round-trips") {
  const std::vector<ResourceCalendar> cals = {ResourceCalendar::daily("a", 8 * 3600, 16 * 3600),
                                              ResourceCalendar("b", {{2, 0, 86400}, {5, 3600, 7200}})};
  CHECK(parse_calendars(calendars_to_json(cals)) == cals);
  CHECK(parse_time_of_day("24:00") == 86400);
  CHECK(format_time_of_day(9 * 3600 + 5) == "09:00:05");
  CHECK(parse_weekday(weekday_name(6)) == 6);
  CHECK_THROWS(parse_calendars("{\"resource\": \"a\", \"slots\": [{\"weekday\": \"FUNDAY\", \"from\": \"08:00\", \"to\": \"09:00\"}]}"));
}
