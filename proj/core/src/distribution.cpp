#include "delayminer/distribution.hpp"

#include <algorithm>
#include <array>
#include <boost/math/special_functions/gamma.hpp>
#include <cmath>
#include <numbers>
#include <numeric>

#include "delayminer/error.hpp"

namespace delayminer {
namespace {

constexpr std::array<std::string_view, 6> kFamilyNames = {"fixed",       "uniform",    "normal",
                                                          "exponential", "log_normal", "gamma"};

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::numbers::sqrt2); }
double normal_pdf(double z) { return std::exp(-0.5 * z * z) / std::sqrt(2.0 * std::numbers::pi); }

// Moments of max(0, X) for X ~ N(t, 1).
double floored_normal_mean(double t) { return t * normal_cdf(t) + normal_pdf(t); }
double floored_normal_second_moment(double t) { return (t * t + 1.0) * normal_cdf(t) + t * normal_pdf(t); }

double floored_normal_cv(double t) {
  const double m = floored_normal_mean(t);
  const double var = std::max(0.0, floored_normal_second_moment(t) - m * m);
  return std::sqrt(var) / m;
}

// Normal whose zero-floored version matches the sample mean and standard
// deviation. The coefficient of variation of the floored variable decreases
// monotonically in mean/std, so the ratio is found by bisection.
DurationDistribution fit_floored_normal(double mean, double std) {
  constexpr double kLo = -6.0, kHi = 8.0;
  const double cv = std / mean;
  if (cv <= floored_normal_cv(kHi)) return DurationDistribution::normal(mean, std);
  double lo = kLo, hi = kHi;
  if (cv >= floored_normal_cv(kLo)) {
    hi = lo;
  } else {
    for (int i = 0; i < 200; ++i) {
      const double mid = 0.5 * (lo + hi);
      (floored_normal_cv(mid) > cv ? lo : hi) = mid;
    }
  }
  const double t = 0.5 * (lo + hi);
  const double sigma = mean / floored_normal_mean(t);
  return DurationDistribution::normal(t * sigma, sigma);
}

}  // namespace

double uniform01(Rng& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

double standard_normal(Rng& rng) {
  const double u1 = 1.0 - uniform01(rng);  // (0, 1]
  const double u2 = uniform01(rng);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

std::string_view family_name(DistributionFamily family) { return kFamilyNames[static_cast<std::size_t>(family)]; }

DistributionFamily parse_family(std::string_view name) {
  for (std::size_t i = 0; i < kFamilyNames.size(); ++i) {
    if (kFamilyNames[i] == name) return static_cast<DistributionFamily>(i);
  }
  throw ArgumentError("unknown distribution family '" + std::string(name) + "'");
}

DurationDistribution::DurationDistribution(DistributionFamily family, std::vector<double> params)
    : family_(family), params_(std::move(params)) {
  for (double p : params_) {
    if (!std::isfinite(p)) throw ArgumentError(std::string(family_name(family_)) + ": non-finite parameter");
  }
}

DurationDistribution DurationDistribution::fixed(double value) {
  if (value < 0) throw ArgumentError("fixed: value must be non-negative");
  return {DistributionFamily::kFixed, {value}};
}

DurationDistribution DurationDistribution::uniform(double min, double max) {
  if (!(min <= max)) throw ArgumentError("uniform: min must not exceed max");
  return {DistributionFamily::kUniform, {min, max}};
}

DurationDistribution DurationDistribution::normal(double mean, double std) {
  if (!(std > 0)) throw ArgumentError("normal: std must be positive");
  return {DistributionFamily::kNormal, {mean, std}};
}

DurationDistribution DurationDistribution::exponential(double mean) {
  if (!(mean > 0)) throw ArgumentError("exponential: mean must be positive");
  return {DistributionFamily::kExponential, {mean}};
}

DurationDistribution DurationDistribution::log_normal(double mu, double sigma) {
  if (!(sigma > 0)) throw ArgumentError("log_normal: sigma must be positive");
  return {DistributionFamily::kLogNormal, {mu, sigma}};
}

DurationDistribution DurationDistribution::gamma(double shape, double scale) {
  if (!(shape > 0) || !(scale > 0)) throw ArgumentError("gamma: shape and scale must be positive");
  return {DistributionFamily::kGamma, {shape, scale}};
}

std::vector<std::string_view> DurationDistribution::param_names() const {
  switch (family_) {
    case DistributionFamily::kFixed:
      return {"value"};
    case DistributionFamily::kUniform:
      return {"min", "max"};
    case DistributionFamily::kNormal:
      return {"mean", "std"};
    case DistributionFamily::kExponential:
      return {"mean"};
    case DistributionFamily::kLogNormal:
      return {"mu", "sigma"};
    case DistributionFamily::kGamma:
      return {"shape", "scale"};
  }
  return {};
}

double DurationDistribution::mean() const {
  switch (family_) {
    case DistributionFamily::kFixed:
      return params_[0];
    case DistributionFamily::kUniform: {
      const double a = params_[0], b = params_[1];
      if (a >= 0) return 0.5 * (a + b);
      if (b <= 0) return 0.0;
      return b * b / (2.0 * (b - a));
    }
    case DistributionFamily::kNormal: {
      const double sigma = params_[1];
      return sigma * floored_normal_mean(params_[0] / sigma);
    }
    case DistributionFamily::kExponential:
      return params_[0];
    case DistributionFamily::kLogNormal:
      return std::exp(params_[0] + 0.5 * params_[1] * params_[1]);
    case DistributionFamily::kGamma:
      return params_[0] * params_[1];
  }
  return 0.0;
}

double DurationDistribution::cdf(double x) const {
  if (x < 0) return 0.0;
  switch (family_) {
    case DistributionFamily::kFixed:
      return x >= params_[0] ? 1.0 : 0.0;
    case DistributionFamily::kUniform: {
      const double a = params_[0], b = params_[1];
      if (x >= b) return 1.0;
      if (x < a) return 0.0;
      return (x - a) / (b - a);
    }
    case DistributionFamily::kNormal:
      return normal_cdf((x - params_[0]) / params_[1]);
    case DistributionFamily::kExponential:
      return -std::expm1(-x / params_[0]);
    case DistributionFamily::kLogNormal:
      return x <= 0 ? 0.0 : normal_cdf((std::log(x) - params_[0]) / params_[1]);
    case DistributionFamily::kGamma:
      return boost::math::gamma_p(params_[0], x / params_[1]);
  }
  return 0.0;
}

double DurationDistribution::sample(Rng& rng) const {
  double x = 0.0;
  switch (family_) {
    case DistributionFamily::kFixed:
      return params_[0];
    case DistributionFamily::kUniform:
      x = params_[0] + (params_[1] - params_[0]) * uniform01(rng);
      break;
    case DistributionFamily::kNormal:
      x = params_[0] + params_[1] * standard_normal(rng);
      break;
    case DistributionFamily::kExponential:
      x = -params_[0] * std::log1p(-uniform01(rng));
      break;
    case DistributionFamily::kLogNormal:
      x = std::exp(params_[0] + params_[1] * standard_normal(rng));
      break;
    case DistributionFamily::kGamma: {
      // Marsaglia-Tsang; shapes below 1 are boosted by U^(1/shape).
      const double shape = params_[0];
      const double d = (shape < 1.0 ? shape + 1.0 : shape) - 1.0 / 3.0;
      const double c = 1.0 / std::sqrt(9.0 * d);
      double v = 0.0;
      for (;;) {
        const double z = standard_normal(rng);
        v = 1.0 + c * z;
        if (v <= 0) continue;
        v = v * v * v;
        const double u = uniform01(rng);
        if (std::log(u) < 0.5 * z * z + d - d * v + d * std::log(v)) break;
      }
      x = d * v * params_[1];
      if (shape < 1.0) x *= std::pow(1.0 - uniform01(rng), 1.0 / shape);
      break;
    }
  }
  return std::max(0.0, x);
}

double ks_statistic(std::span<const double> data, const DurationDistribution& dist) {
  std::vector<double> sorted(data.begin(), data.end());
  std::sort(sorted.begin(), sorted.end());
  const double n = static_cast<double>(sorted.size());
  double d = 0.0;
  std::size_t i = 0;
  while (i < sorted.size()) {
    const double v = sorted[i];
    std::size_t j = i;
    while (j < sorted.size() && sorted[j] == v) ++j;
    const double below = static_cast<double>(i) / n;     // F_n(v-)
    const double at_or_below = static_cast<double>(j) / n;  // F_n(v)
    const double f = dist.cdf(v);
    // Left limit of F: atoms only exist at 0 (floor) and at a fixed value.
    double f_left = f;
    if (v <= 0) {
      f_left = 0.0;
    } else if (dist.family() == DistributionFamily::kFixed && v == dist.param(0)) {
      f_left = 0.0;
    }
    d = std::max({d, std::abs(f - at_or_below), std::abs(f_left - below)});
    i = j;
  }
  return d;
}

DurationDistribution fit_distribution(std::span<const double> delays) {
  if (delays.empty()) throw ArgumentError("cannot fit a distribution to an empty multiset");
  for (double x : delays) {
    if (!(x >= 0) || !std::isfinite(x)) throw ArgumentError("delays must be finite and non-negative");
  }
  const double n = static_cast<double>(delays.size());
  const double mean = std::accumulate(delays.begin(), delays.end(), 0.0) / n;
  double var = 0.0;
  for (double x : delays) var += (x - mean) * (x - mean);
  var /= n;
  const auto [min_it, max_it] = std::minmax_element(delays.begin(), delays.end());
  if (*min_it == *max_it) return DurationDistribution::fixed(*min_it);

  const double std = std::sqrt(var);
  // Candidates in order of preference when statistics are within the margin.
  std::vector<DurationDistribution> candidates;
  candidates.push_back(DurationDistribution::exponential(mean));
  candidates.push_back(DurationDistribution::uniform(*min_it, *max_it));
  candidates.push_back(fit_floored_normal(mean, std));
  const double sigma2 = std::log1p(var / (mean * mean));
  candidates.push_back(DurationDistribution::log_normal(std::log(mean) - 0.5 * sigma2, std::sqrt(sigma2)));
  candidates.push_back(DurationDistribution::gamma(mean * mean / var, var / mean));

  std::vector<double> stats;
  stats.reserve(candidates.size());
  for (const auto& c : candidates) stats.push_back(ks_statistic(delays, c));
  const double best = *std::min_element(stats.begin(), stats.end());
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    if (stats[i] <= best + kParsimonyMargin) return candidates[i];
  }
  return candidates.front();
}

}  // namespace delayminer
