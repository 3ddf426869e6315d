#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace delayminer {

/// Every stochastic stage draws from an owned 64-bit Mersenne Twister. Its
/// output sequence is fixed by the standard; the variate transforms below are
/// implemented in-repo so that sample streams are identical across platforms.
using Rng = std::mt19937_64;

/// Uniform double in [0, 1) built from the top 53 bits of one engine draw.
double uniform01(Rng& rng);
/// Standard normal variate (Box-Muller, one value per two uniforms).
double standard_normal(Rng& rng);

enum class DistributionFamily { kFixed, kUniform, kNormal, kExponential, kLogNormal, kGamma };

std::string_view family_name(DistributionFamily family);
DistributionFamily parse_family(std::string_view name);

/// A parametric duration distribution in seconds. Samples are floored at 0,
/// so `mean()` and `cdf()` describe the floored variable.
///
/// Parameters by family:
///   fixed: value | uniform: min, max | normal: mean, std |
///   exponential: mean | log_normal: mu, sigma (of log x) | gamma: shape, scale
class DurationDistribution {
 public:
  DurationDistribution() = default;

  static DurationDistribution fixed(double value);
  static DurationDistribution uniform(double min, double max);
  static DurationDistribution normal(double mean, double std);
  static DurationDistribution exponential(double mean);
  static DurationDistribution log_normal(double mu, double sigma);
  static DurationDistribution gamma(double shape, double scale);

  DistributionFamily family() const noexcept { return family_; }
  double param(std::size_t i) const { return params_.at(i); }
  const std::vector<double>& params() const noexcept { return params_; }
  /// Parameter names in the order of params().
  std::vector<std::string_view> param_names() const;

  double mean() const;
  double cdf(double x) const;
  /// Non-negative draw; `fixed` returns its value exactly.
  double sample(Rng& rng) const;

  friend bool operator==(const DurationDistribution&, const DurationDistribution&) = default;

 private:
  DurationDistribution(DistributionFamily family, std::vector<double> params);

  DistributionFamily family_ = DistributionFamily::kFixed;
  std::vector<double> params_ = {0.0};
};

/// Fits every candidate family in closed form (moment matching; uniform uses
/// the observed range) and keeps the one with the smallest one-sample
/// Kolmogorov-Smirnov statistic. A simpler family wins when its statistic is
/// within `kParsimonyMargin` of the best. Zero-variance data gives `fixed`.
/// Throws ArgumentError for empty input or negative values.
DurationDistribution fit_distribution(std::span<const double> delays);

inline constexpr double kParsimonyMargin = 0.01;

/// sup |F_n(x) - F(x)| over the empirical CDF of `data`.
double ks_statistic(std::span<const double> data, const DurationDistribution& dist);

}  // namespace delayminer
