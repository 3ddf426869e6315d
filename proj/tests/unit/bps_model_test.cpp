#include <doctest.h>

#include <filesystem>
#include <set>

#include "delayminer/bps_model.hpp"
#include "delayminer/error.hpp"
#include "delayminer/simulator.hpp"
#include "fixtures.hpp"
#include "synthetic.hpp"

using namespace delayminer;

namespace {

const std::string kMinimal = R"({
  "schema_version": 1,
  "nodes": [{"id": "s", "type": "start"},
            {"id": "t", "type": "task", "label": "Do", "pool": "p",
             "duration": {"family": "fixed", "params": {"value": 60}}},
            {"id": "e", "type": "end"}],
  "flows": [{"id": "a", "source": "s", "target": "t"}, {"id": "b", "source": "t", "target": "e"}],
  "pools": [{"id": "p", "resources": ["r"]}],
  "arrivals": {"interarrival": {"family": "exponential", "params": {"mean": 600}}}
})";

DelayReport report_for(const std::string& activity, DurationDistribution dist, std::vector<double> delays,
                       Attribution attribution = Attribution::kExAnte) {
  DelayReport r;
  r.attribution = attribution;
  r.delta = 0.05;
  ActivityDelays a;
  a.activity = activity;
  a.delays = std::move(delays);
  a.count = a.delays.size();
  a.positive_ratio = positive_ratio(a.delays);
  a.distribution = dist;
  r.activities.push_back(a);
  return r;
}

std::string predecessor_of(const BpsModel& m, const std::string& node) { return m.incoming(node).front()->source; }
std::string successor_of(const BpsModel& m, const std::string& node) { return m.outgoing(node).front()->target; }

}  // namespace

TEST_CASE("the invoice model round-trips through JSON") {
  const auto model = load_model(fixture::path("invoice_model.json"));
  CHECK(model.task_labels().size() == 4);
  CHECK(model.timer_count() == 1);
  CHECK(parse_model(model_to_json(model)) == model);
  const auto file = std::filesystem::temp_directory_path() / "delayminer_model.json";
  save_model(model, file);
  CHECK(load_model(file) == model);
  std::filesystem::remove(file);
  CHECK(model.resource_calendars().at("Todd").slots().size() == 7);
}

TEST_CASE("a minimal model loads") {
  const auto m = parse_model(kMinimal);
  CHECK(m.find_task("Do") != nullptr);
  CHECK(m.find_pool("p")->calendar.weekly_working_time() == kSecondsPerWeek);
}

TEST_CASE("schema violations name their location") {
  auto expect_schema = [](const std::string& text, const std::string& fragment) {
    try {
      parse_model(text);
      FAIL("expected a schema error");
    } catch (const SchemaError& e) {
      CHECK(std::string(e.what()).find(fragment) != std::string::npos);
    }
  };
  std::string missing_label = kMinimal;
  missing_label.replace(missing_label.find("\"label\": \"Do\", "), 15, "");
  expect_schema(missing_label, "$.nodes[1].label");
  std::string bad_family = kMinimal;
  bad_family.replace(bad_family.find("exponential"), 11, "cauchy");
  expect_schema(bad_family, "$.arrivals.interarrival");
  std::string bad_version = kMinimal;
  bad_version.replace(bad_version.find("\"schema_version\": 1"), 19, "\"schema_version\": 2");
  expect_schema(bad_version, "schema_version");
  expect_schema("[1, 2]", "$");
  CHECK_THROWS_AS(parse_model("{not json"), SchemaError);
}

TEST_CASE("branch probabilities must sum to one") {
  synth::ModelBuilder b;
  b.pool("p", {"r"}, ResourceCalendar::always_available(""))
      .task("a", "A", "p", DurationDistribution::fixed(1))
      .task("b", "B", "p", DurationDistribution::fixed(1))
      .gateway("x", GatewayKind::kExclusive, GatewayDirection::kSplit)
      .gateway("j", GatewayKind::kExclusive, GatewayDirection::kJoin);
  b.chain({"start", "x"}).flow("x", "a", 0.7).flow("x", "b", 0.2).chain({"a", "j"}).chain({"b", "j"}).chain({"j", "end"});
  CHECK_THROWS_AS(b.build(), ValidationError);
}

TEST_CASE("structural problems are rejected") {
  auto base = parse_model(kMinimal);
  auto unknown_pool = base;
  std::get<Task>(unknown_pool.find_node("t")->element).pool = "nope";
  CHECK_THROWS_AS(validate_model(unknown_pool), ValidationError);

  auto shared_resource = base;
  shared_resource.pools.push_back({"q", {"r"}, ResourceCalendar::always_available("q")});
  CHECK_THROWS_AS(validate_model(shared_resource), ValidationError);

  auto dangling = base;
  dangling.flows.push_back({"c", "t", "ghost"});
  CHECK_THROWS_AS(validate_model(dangling), ValidationError);

  // Parallel split closed by an exclusive join never synchronizes.
  synth::ModelBuilder b;
  b.pool("p", {"r"}, ResourceCalendar::always_available(""))
      .task("a", "A", "p", DurationDistribution::fixed(1))
      .task("b", "B", "p", DurationDistribution::fixed(1))
      .gateway("x", GatewayKind::kParallel, GatewayDirection::kSplit)
      .gateway("j", GatewayKind::kExclusive, GatewayDirection::kJoin);
  b.chain({"start", "x"}).flow("x", "a").flow("x", "b").chain({"a", "j"}).chain({"b", "j"}).chain({"j", "end"});
  try {
    b.build();
    FAIL("expected a validation error");
  } catch (const ValidationError& e) {
    CHECK(std::string(e.what()).find("block-structured") != std::string::npos);
  }
}

TEST_CASE("loops and nested blocks are accepted") {
  using K = GatewayKind;
  using D = GatewayDirection;
  synth::ModelBuilder b;
  b.pool("p", {"r"}, ResourceCalendar::always_available(""))
      .task("a", "A", "p", DurationDistribution::fixed(1))
      .task("b", "B", "p", DurationDistribution::fixed(1))
      .task("c", "C", "p", DurationDistribution::fixed(1))
      .gateway("lj", K::kExclusive, D::kJoin)
      .gateway("ls", K::kExclusive, D::kSplit)
      .gateway("ps", K::kParallel, D::kSplit)
      .gateway("pj", K::kParallel, D::kJoin);
  b.chain({"start", "lj", "ps"}).flow("ps", "a").flow("ps", "b").chain({"a", "pj"}).chain({"b", "pj"});
  b.chain({"pj", "c", "ls"}).flow("ls", "lj", 0.3).flow("ls", "end", 0.7);
  CHECK_NOTHROW(b.build());
}

TEST_CASE("timers are spliced next to their task") {
  const auto baseline = load_model(fixture::path("invoice_model_baseline.json"));
  const auto report = report_for("Pay invoice", DurationDistribution::fixed(21600), {21600, 21600});
  const auto enhanced = inject_timers(baseline, report);
  REQUIRE(enhanced.timer_count() == 1);
  const std::string pay = enhanced.find_task("Pay invoice")->id;
  const std::string timer = predecessor_of(enhanced, pay);
  CHECK(enhanced.find_node(timer)->is_timer());
  CHECK(predecessor_of(enhanced, timer) == "join");
  CHECK(std::get<Timer>(enhanced.find_node(timer)->element).duration == DurationDistribution::fixed(21600));
  validate_model(enhanced);

  auto post = report;
  post.attribution = Attribution::kExPost;
  const auto after = inject_timers(baseline, post);
  const std::string t2 = successor_of(after, pay);
  CHECK(after.find_node(t2)->is_timer());
  CHECK(successor_of(after, t2) == "end");

  CHECK(inject_timers(baseline, DelayReport{}) == baseline);
  CHECK(strip_timers(enhanced) == baseline);
  CHECK_THROWS_AS(inject_timers(baseline, report_for("Unknown", DurationDistribution::fixed(1), {1})), ArgumentError);
}

TEST_CASE("re-injection replaces instead of stacking") {
  const auto baseline = load_model(fixture::path("invoice_model_baseline.json"));
  const auto first = inject_timers(baseline, report_for("Pay invoice", DurationDistribution::fixed(100), {100}));
  CHECK(inject_timers(first, report_for("Pay invoice", DurationDistribution::fixed(100), {100})) == first);
  const auto second = inject_timers(first, report_for("Pay invoice", DurationDistribution::exponential(50), {50, 60}));
  CHECK(second.timer_count() == 1);
  const std::string timer = predecessor_of(second, second.find_task("Pay invoice")->id);
  CHECK(std::get<Timer>(second.find_node(timer)->element).duration == DurationDistribution::exponential(50));

  // The existing hand-made timer is recognised by its attachment.
  const auto original = load_model(fixture::path("invoice_model.json"));
  const auto replaced = inject_timers(original, report_for("Pay invoice", DurationDistribution::fixed(5), {5}));
  CHECK(replaced.timer_count() == 1);
  CHECK(replaced.find_node("wait_payment") != nullptr);
}

TEST_CASE("activities under the positive-ratio threshold get no timer") {
  const auto baseline = load_model(fixture::path("invoice_model_baseline.json"));
  auto report = report_for("Pay invoice", DurationDistribution::fixed(0), std::vector<double>(40, 0.0));
  report.activities[0].delays[0] = 10.0;  // ratio 0.025 <= delta
  report.activities[0].positive_ratio = positive_ratio(report.activities[0].delays);
  CHECK(inject_timers(baseline, report).timer_count() == 0);
}

TEST_CASE("injection keeps the producible activity sequences") {
  const auto baseline = synth::branching_model(1800.0);
  DelayReport report;
  for (const auto& label : baseline.task_labels()) {
    report.activities.push_back(report_for(label, DurationDistribution::exponential(900), {900}).activities[0]);
  }
  report.delta = 0.05;
  const auto enhanced = inject_timers(baseline, report);
  CHECK(enhanced.timer_count() == baseline.task_labels().size());
  CHECK(inject_timers(enhanced, report) == enhanced);

  // Parallel branches may interleave either way, so a variant is the sorted
  // list of executed activities.
  auto variants = [](const BpsModel& m) {
    SimulationConfig cfg;
    cfg.num_traces = 400;
    cfg.seed = 3;
    const auto log = simulate(m, cfg);
    std::set<std::vector<std::string>> out;
    for (const auto& [trace, idx] : log.traces()) {
      std::vector<std::string> v;
      for (auto i : idx) v.push_back(log[i].activity);
      std::sort(v.begin(), v.end());
      out.insert(v);
    }
    return out;
  };
  CHECK(variants(baseline) == variants(enhanced));
  CHECK(variants(baseline).size() == 2);
}

TEST_CASE("scaling multiplies delays and refits") {
  const auto report = report_for("Pay invoice", DurationDistribution::uniform(100, 200), {100, 200});
  const auto doubled = scale_report(report, ScaleVector{{{"Pay invoice", 2.0}}});
  CHECK(doubled.activities[0].delays == std::vector<double>{200, 400});
  const auto same = scale_report(report, {});
  CHECK(same.activities[0].delays == report.activities[0].delays);
  CHECK(same.activities[0].distribution == fit_distribution(report.activities[0].delays));
  const auto zero = scale_report(report, ScaleVector{{{"Pay invoice", 0.0}}});
  CHECK(zero.activities[0].positive_ratio == 0.0);
  CHECK(inject_timers(load_model(fixture::path("invoice_model_baseline.json")), zero).timer_count() == 0);
  CHECK_THROWS_AS(scale_report(report, ScaleVector{{{"Pay invoice", -1.0}}}), ArgumentError);
  auto no_raw = report;
  no_raw.activities[0].delays.clear();
  CHECK_THROWS_AS(scale_report(no_raw, {}), ArgumentError);
}
