#include <doctest.h>

#include <cmath>
#include <numeric>

#include "delayminer/distribution.hpp"
#include "delayminer/error.hpp"
#include "delayminer/stats.hpp"

using namespace delayminer;

namespace {

std::vector<double> draws(const DurationDistribution& d, std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<double> out(n);
  for (auto& v : out) v = d.sample(rng);
  return out;
}

double mean_of(const std::vector<double>& v) { return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size()); }

}  // namespace

TEST_CASE("constant delays fit a fixed distribution") {
  const std::vector<double> data = {21600.0, 21600.0, 21600.0};
  const auto d = fit_distribution(data);
  CHECK(d.family() == DistributionFamily::kFixed);
  CHECK(d.param(0) == 21600.0);
  Rng rng(1);
  CHECK(d.sample(rng) == 21600.0);
  CHECK(fit_distribution(std::vector<double>{0.0}).param(0) == 0.0);
}

TEST_CASE("fitting recovers the generating family") {
  const auto exp_fit = fit_distribution(draws(DurationDistribution::exponential(3600.0), 4000, 2));
  CHECK(exp_fit.family() == DistributionFamily::kExponential);
  CHECK(exp_fit.mean() == doctest::Approx(3600.0).epsilon(0.05));

  const auto normal_fit = fit_distribution(draws(DurationDistribution::normal(5000.0, 400.0), 4000, 3));
  CHECK(normal_fit.family() == DistributionFamily::kNormal);
  CHECK(normal_fit.param(0) == doctest::Approx(5000.0).epsilon(0.02));

  const auto uniform_fit = fit_distribution(draws(DurationDistribution::uniform(100.0, 900.0), 4000, 4));
  CHECK(uniform_fit.family() == DistributionFamily::kUniform);
  CHECK(uniform_fit.param(0) == doctest::Approx(100.0).epsilon(0.02));
  CHECK(uniform_fit.param(1) == doctest::Approx(900.0).epsilon(0.02));

  const auto gamma_data = draws(DurationDistribution::gamma(9.0, 100.0), 4000, 5);
  const auto gamma_fit = fit_distribution(gamma_data);
  CHECK(ks_statistic(gamma_data, gamma_fit) < 0.03);
}

TEST_CASE("sample means agree with the analytic means") {
  const std::vector<DurationDistribution> dists = {
      DurationDistribution::fixed(12.0),         DurationDistribution::uniform(10.0, 50.0),
      DurationDistribution::normal(100.0, 30.0), DurationDistribution::normal(10.0, 40.0),
      DurationDistribution::exponential(700.0),  DurationDistribution::log_normal(5.0, 0.8),
      DurationDistribution::gamma(0.5, 200.0),   DurationDistribution::gamma(3.0, 50.0)};
  for (const auto& d : dists) {
    const auto v = draws(d, 200000, 42);
    CHECK(*std::min_element(v.begin(), v.end()) >= 0.0);
    CHECK(mean_of(v) == doctest::Approx(d.mean()).epsilon(0.02));
    CHECK(ks_statistic(v, d) < 0.01);
  }
}

TEST_CASE("sampling is deterministic under a seed") {
  const auto d = DurationDistribution::log_normal(7.0, 1.1);
  CHECK(draws(d, 100, 9) == draws(d, 100, 9));
  CHECK(draws(d, 100, 9) != draws(d, 100, 10));
  Rng rng(0);
  for (int i = 0; i < 10000; ++i) {
    const double u = uniform01(rng);
    CHECK((u >= 0.0 && u < 1.0));
  }
}

TEST_CASE("floored normal puts the negative mass at zero") {
  const auto d = DurationDistribution::normal(0.0, 100.0);
  CHECK(d.cdf(-1.0) == 0.0);
  CHECK(d.cdf(0.0) == doctest::Approx(0.5));
  CHECK(d.mean() == doctest::Approx(100.0 / std::sqrt(2.0 * M_PI)));
}

TEST_CASE("invalid input is rejected") {
  CHECK_THROWS_AS(fit_distribution(std::vector<double>{}), ArgumentError);
  CHECK_THROWS_AS(fit_distribution(std::vector<double>{1.0, -2.0}), ArgumentError);
  CHECK_THROWS_AS(DurationDistribution::uniform(5.0, 1.0), ArgumentError);
  CHECK_THROWS_AS(DurationDistribution::exponential(0.0), ArgumentError);
  CHECK_THROWS_AS(DurationDistribution::gamma(-1.0, 1.0), ArgumentError);
  CHECK_THROWS_AS(parse_family("weibull"), ArgumentError);
  CHECK(parse_family(family_name(DistributionFamily::kLogNormal)) == DistributionFamily::kLogNormal);
}

TEST_CASE("summary statistics interpolate quartiles") {
  const std::vector<double> v = {300.0, 100.0};
  const auto s = summarize(v);
  CHECK(s.min == 100.0);
  CHECK(s.q1 == 150.0);
  CHECK(s.median == 200.0);
  CHECK(s.mean == 200.0);
  CHECK(s.q3 == 250.0);
  CHECK(s.max == 300.0);
  CHECK_THROWS_AS(summarize(std::vector<double>{}), ArgumentError);
}
