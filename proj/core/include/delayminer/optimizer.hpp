#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "delayminer/bps_model.hpp"
#include "delayminer/delay_discovery.hpp"
#include "delayminer/log_io.hpp"

namespace delayminer {

struct TpeConfig {
  std::size_t iterations = 100;
  double gamma_max = kDefaultGammaMax;
  std::size_t startup_trials = 10;
  double good_quantile = 0.25;
  std::size_t candidates_per_step = 24;
  std::uint64_t seed = 0;
  std::size_t runs_per_eval = 1;

  void validate() const;
};

struct Trial {
  ScaleVector gamma;
  /// Mean RED distance against the validation half; +inf when the trial failed.
  double objective = 0.0;
  std::optional<std::string> error;
};

struct TrialHistory {
  std::vector<Trial> trials;
  std::size_t best = 0;
};

std::string history_to_json(const TrialHistory& history);

/// Orders instances by end time (stable) and puts the first floor(n/2) in the
/// train half, the rest in validation. Traces may be cut. Throws
/// ArgumentError for an empty log.
std::pair<ActivityInstanceLog, ActivityInstanceLog> split_log(const ActivityInstanceLog& log);

struct OptimizationResult {
  BpsModel model;
  DelayReport report;  // the scaled report that produced `model`
  TrialHistory history;
};

/// Discovers delays on the train half, then searches per-activity scale
/// factors in [0, gamma_max]. Trial 0 is the identity; the next trials up to
/// `startup_trials` are uniform draws, later ones come from a tree-structured
/// Parzen estimator. Every trial simulates the validation trace count with
/// the same seed and scores mean RED against the validation half. The
/// returned model is the first trial with the minimum objective.
OptimizationResult optimize(const BpsModel& model, const ActivityInstanceLog& log, const DiscoveryOptions& options,
                            const TpeConfig& cfg);

}  // namespace delayminer
