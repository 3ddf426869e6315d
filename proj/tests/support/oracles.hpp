#pragma once

// Deliberately naive reference implementations used to cross-check the
// library. They favour obviousness over speed.

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "delayminer/log_io.hpp"
#include "delayminer/timeline.hpp"

namespace oracle {

/// Minimum-cost transport between two histograms (each scaled to unit mass),
/// ground distance |i - j|, solved as a min-cost flow by successive shortest
/// paths.
double transport_cost(const std::vector<double>& a, const std::vector<double>& b);

/// Second-by-second scan of `window`: a second is free when no busy or
/// off-duty interval covers it. Returns maximal free runs no shorter than
/// `lambda` (and non-empty).
std::vector<delayminer::Interval> free_runs(delayminer::Interval window,
                                            const std::vector<delayminer::Interval>& busy,
                                            const std::vector<delayminer::Interval>& off_duty,
                                            delayminer::Seconds lambda);

/// Causal predecessor of every instance by direct evaluation over all pairs
/// of the same trace (nullopt for orphans).
std::vector<std::optional<std::size_t>> causal_predecessors(const delayminer::ActivityInstanceLog& log,
                                                            const delayminer::ConcurrencyRelation& relation);

}  // namespace oracle
