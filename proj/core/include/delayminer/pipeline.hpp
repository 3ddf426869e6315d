#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "delayminer/bps_model.hpp"
#include "delayminer/delay_discovery.hpp"
#include "delayminer/log_io.hpp"
#include "delayminer/metrics.hpp"
#include "delayminer/optimizer.hpp"
#include "delayminer/simulator.hpp"

namespace delayminer {

/// Canonical log columns plus a trailing timer_delay column.
void write_traced_log(const TracedLog& traced, const std::filesystem::path& path);

/// RED per run with a 95% interval and cycle-time summaries of the
/// reference and each simulated log. `names` labels the runs.
std::string evaluation_to_json(const ActivityInstanceLog& reference, const std::vector<ActivityInstanceLog>& runs,
                               const std::vector<std::string>& names);

struct FullPipelineConfig {
  std::filesystem::path log;
  std::filesystem::path model;
  std::filesystem::path out_dir;
  ColumnMapping columns;
  DiscoveryOptions discovery;
  /// Tune scale factors before simulating when set.
  std::optional<TpeConfig> tpe;
  SimulationConfig simulation;  // num_traces 0 means the log's trace count
  std::size_t runs = 10;
  bool trace_timers = false;
};

/// discover -> enhance (or optimize) -> simulate -> evaluate. Writes
/// report.json, enhanced_model.json, [history.json], sim/run_XX.csv,
/// [sim/run_XX_timers.csv] and evaluation.json under out_dir; returns the
/// written paths in that order.
std::vector<std::filesystem::path> run_full_pipeline(const FullPipelineConfig& cfg);

struct RediscoveryOptions {
  SimulationConfig simulation;
  DiscoveryOptions discovery;  // estimator and attribution are overridden
  std::vector<Estimator> estimators = {Estimator::kNaive, Estimator::kEclipseAware,
                                       Estimator::kEclipseAwareExtrapolated};
};

struct EstimatorScore {
  Estimator estimator = Estimator::kNaive;
  /// SMAPE of discovered against recorded timer delay per causal pair, over
  /// pairs where either side is positive (0 when there are none).
  double pair_smape = 0.0;
  std::size_t pairs_compared = 0;
  RediscoveryScore timers;
  DelayReport report;
};

struct RediscoveryReport {
  /// Activity -> mean recorded timer delay over its instances, for every
  /// activity with at least one positive draw.
  std::map<std::string, double> injected;
  std::vector<EstimatorScore> scores;
  TracedLog ground_truth;
};

/// Simulates the model, strips its timers, and scores every estimator
/// (ex-ante attribution) on re-discovering the timer delays. Calendars come
/// from the model.
RediscoveryReport rediscover(const BpsModel& model_with_timers, const RediscoveryOptions& options);

std::string rediscovery_to_json(const RediscoveryReport& report);

}  // namespace delayminer
