#include <doctest.h>

#include <map>

#include "delayminer/delay_discovery.hpp"
#include "delayminer/error.hpp"
#include "delayminer/metrics.hpp"
#include "delayminer/simulator.hpp"
#include "synthetic.hpp"

using namespace delayminer;
using synth::ModelBuilder;

namespace {

ModelBuilder single_resource() {
  ModelBuilder b;
  b.pool("p", {"r"}, ResourceCalendar::always_available("")).arrivals(DurationDistribution::fixed(1e6));
  return b;
}

SimulationConfig traces(std::size_t n, std::uint64_t seed = 1) {
  SimulationConfig cfg;
  cfg.num_traces = n;
  cfg.seed = seed;
  return cfg;
}

}  // namespace

TEST_CASE("an uncontended task takes exactly its duration") {
  auto b = single_resource();
  b.task("t", "T", "p", DurationDistribution::fixed(100)).chain({"start", "t", "end"});
  const auto log = simulate(b.build(), traces(5));
  CHECK(log.size() == 5);
  for (double c : cycle_times(log)) CHECK(c == 100.0);
  CHECK(log.trace_count() == 5);
  CHECK(log[0].trace_id == "0");
  CHECK(log[4].trace_id == "4");
  CHECK(log[0].start == kDefaultSimulationStart);
  CHECK(log[1].start - log[0].start == 1'000'000);
}

TEST_CASE("a parallel block lasts as long as its longest branch") {
  ModelBuilder b;
  b.pool("p", {"r1"}, ResourceCalendar::always_available(""))
      .pool("q", {"r2"}, ResourceCalendar::always_available(""))
      .arrivals(DurationDistribution::fixed(1e6))
      .task("a", "A", "p", DurationDistribution::fixed(100))
      .task("b", "B", "q", DurationDistribution::fixed(300))
      .gateway("s", GatewayKind::kParallel, GatewayDirection::kSplit)
      .gateway("j", GatewayKind::kParallel, GatewayDirection::kJoin);
  b.chain({"start", "s"}).flow("s", "a").flow("s", "b").chain({"a", "j"}).chain({"b", "j"}).chain({"j", "end"});
  for (double c : cycle_times(simulate(b.build(), traces(4)))) CHECK(c == 300.0);
}

TEST_CASE("timers add wall-clock waiting without a resource") {
  auto b = single_resource();
  b.timer("w", DurationDistribution::fixed(900), "T")
      .task("t", "T", "p", DurationDistribution::fixed(100))
      .chain({"start", "w", "t", "end"});
  const auto traced = simulate_traced(b.build(), traces(3));
  for (const auto& inst : traced.log) CHECK(inst.end - inst.start == 100);
  for (Seconds d : traced.timer_delays) CHECK(d == 900);
  // Cycle time counts from the case arrival, which the log only shows
  // through the start of the first task; arrivals are 10^6 s apart.
  CHECK(traced.log[0].start == kDefaultSimulationStart + 900);
  CHECK(traced.log[0].end - kDefaultSimulationStart == 1000);
}

TEST_CASE("work is served first come first served by the longest idle resource") {
  ModelBuilder b;
  b.pool("p", {"zed", "amy"}, ResourceCalendar::always_available(""))
      .arrivals(DurationDistribution::fixed(10))
      .task("t", "T", "p", DurationDistribution::fixed(100))
      .chain({"start", "t", "end"});
  const auto log = simulate(b.build(), traces(4));
  REQUIRE(log.size() == 4);
  CHECK(log[0].resource == "amy");  // tie on idle time broken by label
  CHECK(log[1].resource == "zed");
  CHECK(log[2].trace_id == "2");
  CHECK(log[2].start == log[0].end);
  CHECK(log[2].resource == "amy");
  CHECK(log[3].start == log[1].end);
}

TEST_CASE("processing pauses outside the calendar") {
  ModelBuilder b;
  b.pool("p", {"r"}, synth::daily(8, 16))
      .arrivals(DurationDistribution::fixed(3 * 3600))
      .task("t", "T", "p", DurationDistribution::fixed(4 * 3600))
      .chain({"start", "t", "end"});
  const auto model = b.build();
  const auto log = simulate(model, traces(12));
  const auto& cal = model.pools[0].calendar;
  for (const auto& inst : log) {
    CHECK(cal.is_working(inst.start));
    Seconds worked = 0;
    for (const auto& w : cal.working_intervals(inst.interval())) worked += w.length();
    CHECK(worked == 4 * 3600);
  }
}

TEST_CASE("resources never work on two instances at once") {
  for (std::uint64_t seed : {1, 2, 3}) {
    const auto log = simulate(synth::branching_model(1200.0), traces(300, seed));
    std::map<std::string, std::vector<Interval>> by_resource;
    for (const auto& inst : log) by_resource[inst.resource].push_back(inst.interval());
    for (auto& [r, intervals] : by_resource) {
      std::sort(intervals.begin(), intervals.end(), [](auto& x, auto& y) { return x.start < y.start; });
      for (std::size_t i = 1; i < intervals.size(); ++i) CHECK(intervals[i - 1].end <= intervals[i].start);
    }
  }
}

TEST_CASE("logs simulated without timers show no extraneous delay") {
  for (std::uint64_t seed : {4, 5}) {
    const auto model = synth::branching_model(1500.0);
    const auto log = simulate(model, traces(250, seed));
    const auto index = AvailabilityIndex::from_calendars(log, model.resource_calendars());
    const auto pairs = causal_pairs(log, discover_concurrency(log, 0.75));
    for (auto estimator : {Estimator::kNaive, Estimator::kEclipseAware, Estimator::kEclipseAwareExtrapolated}) {
      DelayConfig cfg;
      cfg.estimator = estimator;
      cfg.lambda = 1;
      for (const auto& d : estimate_delays(index, pairs.pairs, cfg)) CHECK(d.extraneous == 0.0);
    }
  }
}

TEST_CASE("arrivals respect their calendar") {
  auto b = single_resource();
  b.arrivals(DurationDistribution::exponential(1800)).task("t", "T", "p", DurationDistribution::fixed(1));
  b.chain({"start", "t", "end"});
  auto model = b.build();
  model.arrivals.calendar = synth::weekdays(9, 12);
  for (const auto& inst : simulate(model, traces(200))) CHECK(model.arrivals.calendar->is_working(inst.start));
}

TEST_CASE("simulation is deterministic per seed") {
  const auto model = synth::branching_model(1000.0);
  CHECK(simulate(model, traces(100, 7)) == simulate(model, traces(100, 7)));
  CHECK_FALSE(simulate(model, traces(100, 7)) == simulate(model, traces(100, 8)));
  const auto many = simulate_many(model, traces(100, 7), 4);
  REQUIRE(many.size() == 4);
  for (std::size_t k = 0; k < many.size(); ++k) CHECK(many[k] == simulate(model, traces(100, 7 + k)));
  CHECK(simulate_many(model, traces(100, 7), 4) == many);
  CHECK(simulate_many(model, traces(50, 1), 1).front() == simulate(model, traces(50, 1)));
}

TEST_CASE("bad configurations and runaway models fail cleanly") {
  auto b = single_resource();
  b.task("t", "T", "p", DurationDistribution::fixed(1))
      .gateway("lj", GatewayKind::kExclusive, GatewayDirection::kJoin)
      .gateway("ls", GatewayKind::kExclusive, GatewayDirection::kSplit);
  b.chain({"start", "lj", "t", "ls"}).flow("ls", "lj", 1.0).flow("ls", "end", 0.0);
  const auto endless = b.build();
  SimulationConfig cfg = traces(1);
  cfg.max_events = 10000;
  CHECK_THROWS_AS(simulate(endless, cfg), ResourceLimitError);
  CHECK_THROWS_AS(simulate(endless, traces(0)), ArgumentError);
  CHECK_THROWS_AS(simulate_many(endless, traces(1), 0), ArgumentError);
}
