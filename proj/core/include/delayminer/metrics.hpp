#pragma once

#include <map>
#include <span>
#include <string>
#include <vector>

#include "delayminer/log_io.hpp"
#include "delayminer/stats.hpp"

namespace delayminer {

/// Mean of 2|F - A| / (|F| + |A|); a term with F = A = 0 counts as 0.
/// Result lies in [0, 2]. Throws ArgumentError on empty or unequal inputs.
double smape(std::span<const double> forecast, std::span<const double> actual);

inline constexpr Seconds kDefaultBinWidth = 3600;

struct EventHistogram {
  std::vector<double> bins;
  Seconds bin_width = kDefaultBinWidth;

  double mass() const;
};

/// 1-D earth mover's distance in bin units between the two histograms after
/// each is normalized to unit mass: sum over bins of |CDF1 - CDF2|. Throws
/// ArgumentError for zero mass, negative bins or different bin widths.
double emd_1d(const EventHistogram& h1, const EventHistogram& h2);

/// Start and end events binned by their offset from their trace's first start.
EventHistogram event_histogram(const ActivityInstanceLog& log, Seconds bin_width = kDefaultBinWidth);

/// emd_1d between the event histograms of the two logs.
double red_distance(const ActivityInstanceLog& sim, const ActivityInstanceLog& ref);

/// Per-trace cycle time (last end minus first start).
std::vector<double> cycle_times(const ActivityInstanceLog& log);
/// Summary of cycle_times; throws ArgumentError for an empty log.
SummaryStats cycle_time_stats(const ActivityInstanceLog& log);

struct RediscoveryScore {
  double precision = 1.0;
  double recall = 1.0;
  double smape = 0.0;
};

/// Compares activity -> mean delay maps. Precision and recall are over
/// activity keys (1 when their denominator is empty); SMAPE runs over the
/// union of keys with a missing side taken as 0.
RediscoveryScore timer_rediscovery_score(const std::map<std::string, double>& injected,
                                         const std::map<std::string, double>& discovered);

/// Mean with the half-width of a 95% normal-approximation confidence
/// interval (zero for a single value).
struct MeanInterval {
  double mean = 0.0;
  double half_width = 0.0;
};

MeanInterval confidence_interval(std::span<const double> values);

}  // namespace delayminer
