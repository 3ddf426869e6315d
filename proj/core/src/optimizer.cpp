#include "delayminer/optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <nlohmann/json.hpp>
#include <numeric>

#include "delayminer/error.hpp"
#include "delayminer/metrics.hpp"
#include "delayminer/simulator.hpp"

namespace delayminer {

void TpeConfig::validate() const {
  if (startup_trials < 1 || iterations < startup_trials) {
    throw ArgumentError("TPE needs iterations >= startup trials >= 1");
  }
  if (!(good_quantile > 0.0 && good_quantile < 1.0)) throw ArgumentError("good quantile must lie in (0, 1)");
  if (!(gamma_max > 0.0) || !std::isfinite(gamma_max)) throw ArgumentError("gamma max must be positive");
  if (candidates_per_step < 1) throw ArgumentError("TPE needs at least one candidate per step");
  if (runs_per_eval < 1) throw ArgumentError("runs per evaluation must be at least 1");
}

std::string history_to_json(const TrialHistory& history) {
  nlohmann::ordered_json doc;
  doc["best"] = history.best;
  auto& trials = doc["trials"] = nlohmann::ordered_json::array();
  for (const auto& t : history.trials) {
    nlohmann::ordered_json entry;
    entry["gamma"] = nlohmann::ordered_json::object();
    for (const auto& [activity, g] : t.gamma.gamma) entry["gamma"][activity] = g;
    if (std::isfinite(t.objective)) {
      entry["objective"] = t.objective;
    } else {
      entry["objective"] = nullptr;
    }
    if (t.error) entry["error"] = *t.error;
    trials.push_back(std::move(entry));
  }
  return doc.dump(2);
}

std::pair<ActivityInstanceLog, ActivityInstanceLog> split_log(const ActivityInstanceLog& log) {
  if (log.empty()) throw ArgumentError("cannot split an empty log");
  std::vector<ActivityInstance> sorted = log.instances();
  std::stable_sort(sorted.begin(), sorted.end(),
                   [](const ActivityInstance& a, const ActivityInstance& b) { return a.end < b.end; });
  const auto half = static_cast<std::ptrdiff_t>(sorted.size() / 2);
  std::vector<ActivityInstance> train(sorted.begin(), sorted.begin() + half);
  std::vector<ActivityInstance> validation(sorted.begin() + half, sorted.end());
  return {ActivityInstanceLog(std::move(train)), ActivityInstanceLog(std::move(validation))};
}

namespace {

constexpr double kInvSqrt2 = 0.70710678118654752440;
constexpr double kInvSqrt2Pi = 0.39894228040143267794;

double normal_cdf(double z) { return 0.5 * std::erfc(-z * kInvSqrt2); }

// One-dimensional Parzen estimator on [0, upper]: Gaussian kernels truncated
// to the range plus one uniform prior component.
class Parzen {
 public:
  Parzen(std::vector<double> points, double upper) : upper_(upper) {
    std::sort(points.begin(), points.end());
    means_ = std::move(points);
    const std::size_t n = means_.size();
    const double min_sigma = upper / std::min(100.0, static_cast<double>(n) + 1.0);
    for (std::size_t i = 0; i < n; ++i) {
      const double left = i == 0 ? means_[i] : means_[i] - means_[i - 1];
      const double right = i + 1 == n ? upper - means_[i] : means_[i + 1] - means_[i];
      sigmas_.push_back(std::clamp(std::max(left, right), min_sigma, upper));
    }
    weight_ = 1.0 / (static_cast<double>(n) + 1.0);
  }

  double density(double x) const {
    double sum = weight_ / upper_;
    for (std::size_t i = 0; i < means_.size(); ++i) {
      const double s = sigmas_[i];
      const double z = (x - means_[i]) / s;
      const double norm = normal_cdf((upper_ - means_[i]) / s) - normal_cdf(-means_[i] / s);
      sum += weight_ * kInvSqrt2Pi * std::exp(-0.5 * z * z) / s / std::max(norm, 1e-300);
    }
    return sum;
  }

  double sample(Rng& rng) const {
    const auto k = static_cast<std::size_t>(uniform01(rng) * static_cast<double>(means_.size() + 1));
    if (k >= means_.size()) return uniform01(rng) * upper_;
    for (int attempt = 0; attempt < 64; ++attempt) {
      const double x = means_[k] + sigmas_[k] * standard_normal(rng);
      if (x >= 0.0 && x <= upper_) return x;
    }
    return std::clamp(means_[k], 0.0, upper_);
  }

 private:
  double upper_;
  std::vector<double> means_;
  std::vector<double> sigmas_;
  double weight_;
};

std::vector<double> propose(const std::vector<std::vector<double>>& xs, const std::vector<double>& ys,
                            const TpeConfig& cfg, Rng& rng) {
  const std::size_t dims = xs.front().size();
  std::vector<std::size_t> order(ys.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return ys[a] < ys[b]; });
  const auto n_good = std::max<std::size_t>(
      1, static_cast<std::size_t>(std::ceil(cfg.good_quantile * static_cast<double>(ys.size()))));

  std::vector<Parzen> good, bad;
  for (std::size_t d = 0; d < dims; ++d) {
    std::vector<double> g, b;
    for (std::size_t r = 0; r < order.size(); ++r) (r < n_good ? g : b).push_back(xs[order[r]][d]);
    good.emplace_back(std::move(g), cfg.gamma_max);
    bad.emplace_back(std::move(b), cfg.gamma_max);
  }

  std::vector<double> best;
  double best_score = -std::numeric_limits<double>::infinity();
  for (std::size_t c = 0; c < cfg.candidates_per_step; ++c) {
    std::vector<double> x(dims);
    double score = 0.0;
    for (std::size_t d = 0; d < dims; ++d) {
      x[d] = good[d].sample(rng);
      score += std::log(good[d].density(x[d])) - std::log(bad[d].density(x[d]));
    }
    if (best.empty() || score > best_score) {
      best = std::move(x);
      best_score = score;
    }
  }
  return best;
}

}  // namespace

OptimizationResult optimize(const BpsModel& model, const ActivityInstanceLog& log, const DiscoveryOptions& options,
                            const TpeConfig& cfg) {
  cfg.validate();
  validate_model(model);
  if (log.size() < 2) throw ArgumentError("optimization needs a log with at least two instances");
  const auto [train, validation] = split_log(log);

  const auto calendars = resolve_calendars(train, model.resource_calendars(), options.calendar_params);
  const DelayReport report = discover_delays(train, calendars, options).report;

  std::vector<std::string> activities;
  for (const auto& a : report.activities) activities.push_back(a.activity);

  SimulationConfig sim;
  sim.num_traces = validation.trace_count();
  sim.seed = cfg.seed;
  sim.start_instant = validation.span().start;

  struct Evaluated {
    double objective;
    std::optional<std::string> error;
  };
  auto evaluate = [&](const ScaleVector& gamma) -> Evaluated {
    try {
      const BpsModel enhanced = inject_timers(model, scale_report(report, gamma));
      const auto logs = simulate_many(enhanced, sim, cfg.runs_per_eval);
      double sum = 0.0;
      for (const auto& l : logs) sum += red_distance(l, validation);
      return {sum / static_cast<double>(logs.size()), std::nullopt};
    } catch (const Error& e) {
      return {std::numeric_limits<double>::infinity(), std::string(e.what())};
    }
  };
  auto to_scale = [&](const std::vector<double>& x) {
    ScaleVector s;
    for (std::size_t d = 0; d < activities.size(); ++d) s.gamma[activities[d]] = x[d];
    return s;
  };

  TrialHistory history;
  if (activities.empty()) {
    // Nothing to scale: every trial is the unchanged model.
    const Evaluated e = evaluate({});
    for (std::size_t t = 0; t < cfg.iterations; ++t) history.trials.push_back({{}, e.objective, e.error});
  } else {
    Rng rng(cfg.seed);
    std::vector<std::vector<double>> xs;
    std::vector<double> ys;
    for (std::size_t t = 0; t < cfg.iterations; ++t) {
      std::vector<double> x(activities.size(), 1.0);
      if (t > 0 && t < cfg.startup_trials) {
        for (double& v : x) v = uniform01(rng) * cfg.gamma_max;
      } else if (t > 0) {
        x = propose(xs, ys, cfg, rng);
      }
      const ScaleVector gamma = to_scale(x);
      const Evaluated e = evaluate(gamma);
      history.trials.push_back({gamma, e.objective, e.error});
      xs.push_back(std::move(x));
      ys.push_back(e.objective);
    }
  }

  const auto best = std::min_element(history.trials.begin(), history.trials.end(),
                                     [](const Trial& a, const Trial& b) { return a.objective < b.objective; });
  if (!std::isfinite(best->objective)) {
    throw OptimizationError("every trial failed; first error: " + history.trials.front().error.value_or("unknown"));
  }
  history.best = static_cast<std::size_t>(best - history.trials.begin());

  OptimizationResult result;
  result.report = scale_report(report, best->gamma);
  result.model = inject_timers(model, result.report);
  result.history = std::move(history);
  return result;
}

}  // namespace delayminer
