#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <nlohmann/json.hpp>

#include "delayminer/pipeline.hpp"
#include "fixtures.hpp"
#include "synthetic.hpp"

using namespace delayminer;
namespace fs = std::filesystem;

namespace {

fs::path fresh_dir(const std::string& name) {
  const auto dir = fs::temp_directory_path() / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

}  // namespace

TEST_CASE("rediscovery on a model without timers is perfect") {
  RediscoveryOptions options;
  options.simulation.num_traces = 200;
  options.discovery.delay.lambda = 1;
  const auto report = rediscover(synth::branching_model(1500.0), options);
  CHECK(report.injected.empty());
  REQUIRE(report.scores.size() == 3);
  for (const auto& s : report.scores) {
    CHECK(s.pair_smape == 0.0);
    CHECK(s.pairs_compared == 0);
    CHECK(s.timers.precision == 1.0);
    CHECK(s.timers.recall == 1.0);
    CHECK(s.timers.smape == 0.0);
    CHECK(s.report.empty());
  }
  CHECK(nlohmann::json::parse(rediscovery_to_json(report))["estimators"].size() == 3);
}

TEST_CASE("a single timer under low contention is found by every estimator") {
  synth::SequenceSpec spec;
  spec.tasks = 3;
  spec.resources_per_pool = 3;
  spec.mean_interarrival = 4 * 3600;
  spec.timers[synth::task_label(1)] = DurationDistribution::fixed(3600);
  RediscoveryOptions options;
  options.simulation.num_traces = 300;
  const auto report = rediscover(synth::sequence_model(spec), options);
  REQUIRE(report.injected.size() == 1);
  CHECK(report.injected.at(synth::task_label(1)) == 3600.0);
  for (const auto& s : report.scores) {
    CHECK(s.timers.precision == 1.0);
    CHECK(s.timers.recall == 1.0);
  }
}

TEST_CASE("traced logs stay readable as plain logs") {
  synth::SequenceSpec spec;
  spec.tasks = 2;
  spec.timers[synth::task_label(1)] = DurationDistribution::exponential(600);
  SimulationConfig cfg;
  cfg.num_traces = 20;
  const auto traced = simulate_traced(synth::sequence_model(spec), cfg);
  const auto file = fresh_dir("delayminer_traced") / "run.csv";
  write_traced_log(traced, file);
  CHECK(parse_log(file) == traced.log);
}

TEST_CASE("full pipeline on the running example regains the payment timer") {
  const auto out = fresh_dir("delayminer_full");
  FullPipelineConfig cfg;
  cfg.log = fixture::path("running_example.csv");
  cfg.model = fixture::path("invoice_model_baseline.json");
  cfg.out_dir = out;
  cfg.runs = 3;
  cfg.simulation.seed = 5;
  cfg.simulation.num_traces = 0;
  cfg.trace_timers = true;
  const auto written = run_full_pipeline(cfg);
  CHECK(written.size() == 2 + 3 * 2 + 1);

  const auto enhanced = load_model(out / "enhanced_model.json");
  const std::string pay = enhanced.find_task("Pay invoice")->id;
  const std::string before_pay = enhanced.incoming(pay).front()->source;
  CHECK(enhanced.find_node(before_pay)->is_timer());

  CHECK(load_report(out / "report.json").find("Pay invoice") != nullptr);
  CHECK(parse_log(out / "sim" / "run_00.csv").trace_count() == 3);
  CHECK(parse_log(out / "sim" / "run_02_timers.csv").trace_count() == 3);
  const auto evaluation = nlohmann::json::parse(slurp(out / "evaluation.json"));
  CHECK(evaluation["runs"].size() == 3);
  CHECK(evaluation["reference_cycle_time"]["median"] == 26865.0);
}
