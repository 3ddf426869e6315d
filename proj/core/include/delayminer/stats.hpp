#pragma once

#include <span>

namespace delayminer {

/// Six-number summary; quartiles interpolate linearly between order
/// statistics (position p * (n - 1)).
struct SummaryStats {
  double min = 0.0;
  double q1 = 0.0;
  double median = 0.0;
  double mean = 0.0;
  double q3 = 0.0;
  double max = 0.0;
};

/// Throws ArgumentError for an empty input.
SummaryStats summarize(std::span<const double> values);

/// Linear-interpolation quantile of already sorted values, p in [0, 1].
double sorted_quantile(std::span<const double> sorted, double p);

}  // namespace delayminer
