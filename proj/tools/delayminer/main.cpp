#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include "delayminer/bps_model.hpp"
#include "delayminer/calendars.hpp"
#include "delayminer/delay_discovery.hpp"
#include "delayminer/error.hpp"
#include "delayminer/log_io.hpp"
#include "delayminer/metrics.hpp"
#include "delayminer/optimizer.hpp"
#include "delayminer/pipeline.hpp"
#include "delayminer/simulator.hpp"

namespace fs = std::filesystem;
using namespace delayminer;

namespace {

constexpr int kExitUsage = 2;
constexpr int kExitValidation = 3;
constexpr int kExitRuntime = 4;

const std::vector<std::string> kEstimators = {"naive", "eclipse", "eclipse-extrapolated"};
const std::vector<std::string> kAttributions = {"ex-post", "ex-ante"};

struct DiscoveryArgs {
  std::string estimator = "eclipse-extrapolated";
  std::string attribution = "ex-ante";
  Seconds lambda = 300;
  double delta = 0.05;
  double zeta = 0.75;
  Seconds granularity = 3600;
  double support = 0.1;
  double confidence = 0.6;

  DiscoveryOptions options() const {
    DiscoveryOptions o;
    o.delay.estimator = parse_estimator(estimator);
    o.delay.attribution = parse_attribution(attribution);
    o.delay.lambda = lambda;
    o.delay.delta = delta;
    o.zeta = zeta;
    o.calendar_params = {granularity, support, confidence};
    o.delay.validate();
    return o;
  }
};

void add_discovery_options(CLI::App* cmd, DiscoveryArgs& args) {
  cmd->add_option("--estimator", args.estimator, "Delay estimator")
      ->check(CLI::IsMember(kEstimators))
      ->capture_default_str();
  cmd->add_option("--attribution", args.attribution, "Delay attribution")
      ->check(CLI::IsMember(kAttributions))
      ->capture_default_str();
  cmd->add_option("--lambda", args.lambda, "Minimum availability interval (s)")
      ->check(CLI::NonNegativeNumber)
      ->capture_default_str();
  cmd->add_option("--delta", args.delta, "Minimum positive-delay ratio")->check(CLI::Range(0.0, 1.0))->capture_default_str();
  cmd->add_option("--zeta", args.zeta, "Concurrency overlap threshold")->check(CLI::Range(0.0, 1.0))->capture_default_str();
  cmd->add_option("--calendar-granularity", args.granularity, "Calendar slot size (s)")->capture_default_str();
  cmd->add_option("--calendar-support", args.support, "Calendar slot support")->check(CLI::Range(0.0, 1.0))->capture_default_str();
  cmd->add_option("--calendar-confidence", args.confidence, "Calendar slot confidence")
      ->check(CLI::Range(0.0, 1.0))
      ->capture_default_str();
}

void write_file(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write '" + path.string() + "'");
  out << text;
  if (!out) throw IoError("failed writing '" + path.string() + "'");
}

std::string run_name(std::size_t k) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "run_%02zu", k);
  return buf;
}

std::map<std::string, ResourceCalendar> calendars_for(const ActivityInstanceLog& log, const std::string& model_path,
                                                      const std::string& calendars_path,
                                                      const CalendarDiscoveryParams& params) {
  std::map<std::string, ResourceCalendar> given;
  if (!model_path.empty()) given = load_model(model_path).resource_calendars();
  if (!calendars_path.empty()) {
    for (auto& c : load_calendars(calendars_path)) given.insert_or_assign(c.resource(), c);
  }
  return resolve_calendars(log, given, params);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Discovers extraneous activity delays and evaluates them in process simulation", "delayminer"};
  app.require_subcommand(1);
  app.set_config("--config", "", "TOML file with option values; command-line flags take precedence");
  app.set_version_flag("--version", "delayminer 0.1.0");

  std::uint64_t seed = 0;
  auto seed_option = [&](CLI::App* cmd) {
    cmd->add_option("--seed", seed, "Random seed")->envname("DELAYMINER_SEED")->capture_default_str();
  };
  std::vector<std::string> columns;
  auto columns_option = [&](CLI::App* cmd) {
    cmd->add_option("--columns", columns, "Column overrides, e.g. case_id=CaseID");
  };

  // discover
  auto* discover = app.add_subcommand("discover", "Discover extraneous delays from an activity-instance log");
  DiscoveryArgs discover_args;
  std::string log_path, model_path, calendars_path, out_path;
  bool no_raw = false;
  discover->add_option("--log", log_path, "Activity-instance CSV log")->required()->check(CLI::ExistingFile);
  discover->add_option("--model", model_path, "Model whose pool calendars are used")->check(CLI::ExistingFile);
  discover->add_option("--calendars", calendars_path, "Calendar JSON overriding discovery")->check(CLI::ExistingFile);
  discover->add_option("--out", out_path, "Delay report JSON")->required();
  discover->add_flag("--no-raw", no_raw, "Omit raw per-activity delays from the report");
  add_discovery_options(discover, discover_args);
  columns_option(discover);

  // enhance
  auto* enhance = app.add_subcommand("enhance", "Add timers for a delay report to a model");
  std::string report_path;
  enhance->add_option("--model", model_path, "Model JSON")->required()->check(CLI::ExistingFile);
  enhance->add_option("--report", report_path, "Delay report JSON")->required()->check(CLI::ExistingFile);
  enhance->add_option("--out", out_path, "Enhanced model JSON")->required();

  // simulate
  auto* simulate_cmd = app.add_subcommand("simulate", "Simulate a model into CSV logs");
  std::size_t traces = 1000, runs = 1;
  std::string out_dir, start_text;
  bool trace_timers = false;
  simulate_cmd->add_option("--model", model_path, "Model JSON")->required()->check(CLI::ExistingFile);
  simulate_cmd->add_option("--traces", traces, "Traces per run")->check(CLI::PositiveNumber)->capture_default_str();
  simulate_cmd->add_option("--runs", runs, "Number of runs")->check(CLI::PositiveNumber)->capture_default_str();
  simulate_cmd->add_option("--start", start_text, "Start instant (ISO-8601)");
  simulate_cmd->add_option("--out-dir", out_dir, "Output directory")->required();
  simulate_cmd->add_flag("--trace-timers", trace_timers, "Also write run_XX_timers.csv with timer delays");
  seed_option(simulate_cmd);

  // evaluate
  auto* evaluate = app.add_subcommand("evaluate", "Compare simulated logs with a reference log");
  std::string reference_path, simulated_dir;
  evaluate->add_option("--reference", reference_path, "Reference CSV log")->required()->check(CLI::ExistingFile);
  evaluate->add_option("--simulated-dir", simulated_dir, "Directory of simulated CSV logs")
      ->required()
      ->check(CLI::ExistingDirectory);
  evaluate->add_option("--out", out_path, "Evaluation report JSON")->required();
  columns_option(evaluate);

  // optimize
  auto* optimize_cmd = app.add_subcommand("optimize", "Tune delay scale factors against a log");
  DiscoveryArgs optimize_args;
  TpeConfig tpe;
  std::string history_path;
  optimize_cmd->add_option("--model", model_path, "Baseline model JSON")->required()->check(CLI::ExistingFile);
  optimize_cmd->add_option("--log", log_path, "Activity-instance CSV log")->required()->check(CLI::ExistingFile);
  optimize_cmd->add_option("--out", out_path, "Optimized model JSON")->required();
  optimize_cmd->add_option("--history", history_path, "Trial history JSON");
  auto tpe_options = [&](CLI::App* cmd) {
    cmd->add_option("--iterations", tpe.iterations, "Trials")->check(CLI::PositiveNumber)->capture_default_str();
    cmd->add_option("--gamma-max", tpe.gamma_max, "Largest scale factor")->capture_default_str();
    cmd->add_option("--startup-trials", tpe.startup_trials, "Random trials before TPE")->capture_default_str();
    cmd->add_option("--good-quantile", tpe.good_quantile, "Fraction of trials modelled as good")->capture_default_str();
    cmd->add_option("--candidates", tpe.candidates_per_step, "Candidates per TPE step")->capture_default_str();
    cmd->add_option("--runs-per-eval", tpe.runs_per_eval, "Simulations per trial")->capture_default_str();
  };
  tpe_options(optimize_cmd);
  add_discovery_options(optimize_cmd, optimize_args);
  seed_option(optimize_cmd);
  columns_option(optimize_cmd);

  // full
  auto* full = app.add_subcommand("full", "discover, enhance or optimize, simulate and evaluate");
  DiscoveryArgs full_args;
  bool with_optimizer = false;
  std::size_t full_traces = 0, full_runs = 10;
  full->add_option("--log", log_path, "Activity-instance CSV log")->required()->check(CLI::ExistingFile);
  full->add_option("--model", model_path, "Baseline model JSON")->required()->check(CLI::ExistingFile);
  full->add_option("--out-dir", out_dir, "Output directory")->required();
  full->add_flag("--optimize", with_optimizer, "Tune scale factors before simulating");
  full->add_option("--traces", full_traces, "Traces per run (default: as many as the log)");
  full->add_option("--runs", full_runs, "Simulation runs")->check(CLI::PositiveNumber)->capture_default_str();
  full->add_flag("--trace-timers", trace_timers, "Also write run_XX_timers.csv with timer delays");
  tpe_options(full);
  add_discovery_options(full, full_args);
  seed_option(full);
  columns_option(full);

  // rediscover
  auto* rediscover_cmd = app.add_subcommand("rediscover", "Score delay re-discovery on a timer-bearing model");
  DiscoveryArgs rediscover_args;
  rediscover_cmd->add_option("--model", model_path, "Model JSON with timers")->required()->check(CLI::ExistingFile);
  rediscover_cmd->add_option("--traces", traces, "Simulated traces")->check(CLI::PositiveNumber)->capture_default_str();
  rediscover_cmd->add_option("--out", out_path, "Score report JSON")->required();
  rediscover_cmd->add_option("--log-out", log_path, "Also write the simulated log with timer delays");
  add_discovery_options(rediscover_cmd, rediscover_args);
  seed_option(rediscover_cmd);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitUsage;
  }

  try {
    const ColumnMapping mapping = ColumnMapping::from_pairs(columns);
    if (discover->parsed()) {
      const auto options = discover_args.options();
      const auto log = parse_log(log_path, mapping);
      const auto calendars = calendars_for(log, model_path, calendars_path, options.calendar_params);
      const auto report = discover_delays(log, calendars, options).report;
      save_report(report, out_path, !no_raw);
      std::cerr << report.activities.size() << " activities with extraneous delays\n";
    } else if (enhance->parsed()) {
      save_model(inject_timers(load_model(model_path), load_report(report_path)), out_path);
    } else if (simulate_cmd->parsed()) {
      const auto model = load_model(model_path);
      SimulationConfig cfg;
      cfg.num_traces = traces;
      cfg.seed = seed;
      if (!start_text.empty()) cfg.start_instant = parse_timestamp(start_text);
      fs::create_directories(out_dir);
      for (std::size_t k = 0; k < runs; ++k) {
        SimulationConfig local = cfg;
        local.seed = seed + k;
        const auto traced = simulate_traced(model, local);
        write_log(traced.log, fs::path(out_dir) / (run_name(k) + ".csv"));
        if (trace_timers) write_traced_log(traced, fs::path(out_dir) / (run_name(k) + "_timers.csv"));
      }
    } else if (evaluate->parsed()) {
      const auto reference = parse_log(reference_path, mapping);
      std::vector<fs::path> files;
      for (const auto& entry : fs::directory_iterator(simulated_dir)) {
        const auto name = entry.path().filename().string();
        if (entry.is_regular_file() && entry.path().extension() == ".csv" && !name.ends_with("_timers.csv")) {
          files.push_back(entry.path());
        }
      }
      std::sort(files.begin(), files.end());
      if (files.empty()) throw ArgumentError("no CSV logs in '" + simulated_dir + "'");
      std::vector<ActivityInstanceLog> logs;
      std::vector<std::string> names;
      for (const auto& f : files) {
        logs.push_back(parse_log(f));
        names.push_back(f.filename().string());
      }
      write_file(out_path, evaluation_to_json(reference, logs, names) + "\n");
    } else if (optimize_cmd->parsed()) {
      tpe.seed = seed;
      const auto result = optimize(load_model(model_path), parse_log(log_path, mapping), optimize_args.options(), tpe);
      save_model(result.model, out_path);
      if (!history_path.empty()) write_file(history_path, history_to_json(result.history) + "\n");
      std::cerr << "best trial " << result.history.best << " objective "
                << result.history.trials[result.history.best].objective << '\n';
    } else if (full->parsed()) {
      FullPipelineConfig cfg;
      cfg.log = log_path;
      cfg.model = model_path;
      cfg.out_dir = out_dir;
      cfg.columns = mapping;
      cfg.discovery = full_args.options();
      if (with_optimizer) {
        tpe.seed = seed;
        cfg.tpe = tpe;
      }
      cfg.simulation.num_traces = full_traces;
      cfg.simulation.seed = seed;
      cfg.runs = full_runs;
      cfg.trace_timers = trace_timers;
      for (const auto& p : run_full_pipeline(cfg)) std::cout << p.string() << '\n';
    } else if (rediscover_cmd->parsed()) {
      RediscoveryOptions options;
      options.discovery = rediscover_args.options();
      options.simulation.num_traces = traces;
      options.simulation.seed = seed;
      const auto report = rediscover(load_model(model_path), options);
      write_file(out_path, rediscovery_to_json(report) + "\n");
      if (!log_path.empty()) write_traced_log(report.ground_truth, log_path);
    }
  } catch (const Error& e) {
    std::cerr << "delayminer: " << e.what() << '\n';
    return e.is_validation() ? kExitValidation : kExitRuntime;
  } catch (const std::exception& e) {
    std::cerr << "delayminer: " << e.what() << '\n';
    return kExitRuntime;
  }
  return 0;
}
