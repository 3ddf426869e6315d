#include "delayminer/pipeline.hpp"

#include <cstdio>
#include <fstream>

#include "delayminer/error.hpp"
#include "delayminer/timeline.hpp"
#include "json_codec.hpp"

namespace delayminer {

namespace {

using detail::Json;

Json stats_to_json(const SummaryStats& s) {
  return {{"min", s.min}, {"q1", s.q1}, {"median", s.median}, {"mean", s.mean}, {"q3", s.q3}, {"max", s.max}};
}

std::string run_name(std::size_t k) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "run_%02zu", k);
  return buf;
}

}  // namespace

void write_traced_log(const TracedLog& traced, const std::filesystem::path& path) {
  std::string text = "case_id,activity,start_time,end_time,resource,timer_delay\n";
  for (std::size_t i = 0; i < traced.log.size(); ++i) {
    const auto& a = traced.log[i];
    text += csv::escape_field(a.trace_id) + ',' + csv::escape_field(a.activity) + ',' + format_timestamp(a.start) +
            ',' + format_timestamp(a.end) + ',' + csv::escape_field(a.resource) + ',' +
            std::to_string(traced.timer_delays[i]) + '\n';
  }
  detail::write_text_file(path, text);
}

std::string evaluation_to_json(const ActivityInstanceLog& reference, const std::vector<ActivityInstanceLog>& runs,
                               const std::vector<std::string>& names) {
  if (runs.empty() || runs.size() != names.size()) throw ArgumentError("evaluation needs one name per simulated log");
  Json doc;
  doc["reference_cycle_time"] = stats_to_json(cycle_time_stats(reference));
  auto& out = doc["runs"] = Json::array();
  std::vector<double> reds;
  for (std::size_t k = 0; k < runs.size(); ++k) {
    const double red = red_distance(runs[k], reference);
    reds.push_back(red);
    out.push_back({{"name", names[k]}, {"red", red}, {"cycle_time", stats_to_json(cycle_time_stats(runs[k]))}});
  }
  const auto ci = confidence_interval(reds);
  doc["red"] = {{"mean", ci.mean}, {"ci95_half_width", ci.half_width}};
  return doc.dump(2);
}

std::vector<std::filesystem::path> run_full_pipeline(const FullPipelineConfig& cfg) {
  std::vector<std::filesystem::path> written;
  auto stage = [](const char* name, auto&& body) {
    try {
      return body();
    } catch (const Error& e) {
      throw Error(e.kind(), std::string(name) + ": " + e.what());
    }
  };

  const auto log = stage("read log", [&] { return parse_log(cfg.log, cfg.columns); });
  const auto model = stage("read model", [&] { return load_model(cfg.model); });
  std::filesystem::create_directories(cfg.out_dir / "sim");

  const auto calendars = resolve_calendars(log, model.resource_calendars(), cfg.discovery.calendar_params);
  const DelayReport report = stage("discover", [&] { return discover_delays(log, calendars, cfg.discovery).report; });
  save_report(report, cfg.out_dir / "report.json", true);
  written.push_back(cfg.out_dir / "report.json");

  BpsModel enhanced;
  if (cfg.tpe) {
    auto result = stage("optimize", [&] { return optimize(model, log, cfg.discovery, *cfg.tpe); });
    enhanced = std::move(result.model);
    save_model(enhanced, cfg.out_dir / "enhanced_model.json");
    written.push_back(cfg.out_dir / "enhanced_model.json");
    detail::write_text_file(cfg.out_dir / "history.json", history_to_json(result.history) + "\n");
    written.push_back(cfg.out_dir / "history.json");
  } else {
    enhanced = stage("enhance", [&] { return inject_timers(model, report); });
    save_model(enhanced, cfg.out_dir / "enhanced_model.json");
    written.push_back(cfg.out_dir / "enhanced_model.json");
  }

  SimulationConfig sim = cfg.simulation;
  if (sim.num_traces == 0) sim.num_traces = log.trace_count();
  sim.start_instant = log.span().start;
  if (cfg.runs == 0) throw ArgumentError("number of runs must be at least 1");
  std::vector<ActivityInstanceLog> logs;
  std::vector<std::string> names;
  stage("simulate", [&] {
    for (std::size_t k = 0; k < cfg.runs; ++k) {
      SimulationConfig local = sim;
      local.seed = sim.seed + k;
      const TracedLog traced = simulate_traced(enhanced, local);
      names.push_back(run_name(k));
      const auto path = cfg.out_dir / "sim" / (names.back() + ".csv");
      write_log(traced.log, path);
      written.push_back(path);
      if (cfg.trace_timers) {
        const auto timers = cfg.out_dir / "sim" / (names.back() + "_timers.csv");
        write_traced_log(traced, timers);
        written.push_back(timers);
      }
      logs.push_back(traced.log);
    }
    return 0;
  });

  const std::string evaluation = stage("evaluate", [&] { return evaluation_to_json(log, logs, names); });
  detail::write_text_file(cfg.out_dir / "evaluation.json", evaluation + "\n");
  written.push_back(cfg.out_dir / "evaluation.json");
  return written;
}

RediscoveryReport rediscover(const BpsModel& model_with_timers, const RediscoveryOptions& options) {
  RediscoveryReport out;
  out.ground_truth = simulate_traced(model_with_timers, options.simulation);
  const auto& log = out.ground_truth.log;
  const auto& timers = out.ground_truth.timer_delays;

  std::map<std::string, std::pair<double, std::size_t>> sums;
  std::map<std::string, bool> positive;
  for (std::size_t i = 0; i < log.size(); ++i) {
    auto& [sum, n] = sums[log[i].activity];
    sum += static_cast<double>(timers[i]);
    ++n;
    if (timers[i] > 0) positive[log[i].activity] = true;
  }
  for (const auto& [activity, flag] : positive) {
    out.injected[activity] = sums[activity].first / static_cast<double>(sums[activity].second);
  }

  const BpsModel baseline = strip_timers(model_with_timers);
  const auto calendars = resolve_calendars(log, baseline.resource_calendars(), options.discovery.calendar_params);
  for (const Estimator estimator : options.estimators) {
    DiscoveryOptions discovery = options.discovery;
    discovery.delay.estimator = estimator;
    discovery.delay.attribution = Attribution::kExAnte;
    const DiscoveryResult result = discover_delays(log, calendars, discovery);

    EstimatorScore score;
    score.estimator = estimator;
    std::vector<double> forecast, actual;
    for (const auto& d : result.delays) {
      const double truth = static_cast<double>(timers[d.pair.target]);
      if (d.extraneous > 0.0 || truth > 0.0) {
        forecast.push_back(d.extraneous);
        actual.push_back(truth);
      }
    }
    score.pairs_compared = forecast.size();
    score.pair_smape = forecast.empty() ? 0.0 : smape(forecast, actual);

    std::map<std::string, double> discovered;
    for (const auto& a : result.report.activities) {
      double sum = 0.0;
      for (double v : a.delays) sum += v;
      discovered[a.activity] = a.delays.empty() ? a.distribution.mean() : sum / static_cast<double>(a.delays.size());
    }
    score.timers = timer_rediscovery_score(out.injected, discovered);
    score.report = result.report;
    out.scores.push_back(std::move(score));
  }
  return out;
}

std::string rediscovery_to_json(const RediscoveryReport& report) {
  Json doc;
  doc["injected"] = Json::object();
  for (const auto& [activity, mean] : report.injected) doc["injected"][activity] = mean;
  auto& scores = doc["estimators"] = Json::array();
  for (const auto& s : report.scores) {
    Json discovered = Json::object();
    for (const auto& a : s.report.activities) {
      discovered[a.activity] = {{"positive_ratio", a.positive_ratio}, {"distribution", detail::to_json(a.distribution)}};
    }
    scores.push_back({{"estimator", estimator_name(s.estimator)},
                      {"pair_smape", s.pair_smape},
                      {"pairs_compared", s.pairs_compared},
                      {"timer_precision", s.timers.precision},
                      {"timer_recall", s.timers.recall},
                      {"timer_smape", s.timers.smape},
                      {"discovered", discovered}});
  }
  return doc.dump(2);
}

}  // namespace delayminer
