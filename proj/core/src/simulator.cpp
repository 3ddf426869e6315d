#include "delayminer/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <limits>
#include <queue>
#include <set>
#include <thread>
#include <tuple>
#include <unordered_map>

#include "delayminer/error.hpp"

namespace delayminer {

void SimulationConfig::validate() const {
  if (num_traces == 0) throw ArgumentError("number of traces must be at least 1");
}

namespace {

Seconds draw(const DurationDistribution& dist, Rng& rng) {
  const double value = dist.sample(rng);
  if (!std::isfinite(value) || value > 1e15) throw SimulationError("sampled duration out of range");
  return static_cast<Seconds>(std::llround(value));
}

class Engine {
 public:
  Engine(const BpsModel& model, const SimulationConfig& cfg) : model_(model), cfg_(cfg), rng_(cfg.seed) {
    cfg.validate();
    for (std::size_t i = 0; i < model.nodes.size(); ++i) node_index_.emplace(model.nodes[i].id, i);
    successors_.resize(model.nodes.size());
    in_degree_.assign(model.nodes.size(), 0);
    for (const auto& f : model.flows) {
      successors_[node_index_.at(f.source)].push_back({node_index_.at(f.target), f.id});
      ++in_degree_[node_index_.at(f.target)];
    }
    for (std::size_t i = 0; i < model.nodes.size(); ++i) {
      if (std::holds_alternative<StartEvent>(model.nodes[i].element)) start_node_ = i;
    }
    for (std::size_t p = 0; p < model.pools.size(); ++p) {
      pool_index_.emplace(model.pools[p].id, p);
      for (const auto& r : model.pools[p].resources) {
        resources_.push_back({r, p, true, std::numeric_limits<Timestamp>::min(), false});
      }
    }
    pool_members_.resize(model.pools.size());
    for (std::size_t r = 0; r < resources_.size(); ++r) pool_members_[resources_[r].pool].push_back(r);
    for (auto& members : pool_members_) {
      std::sort(members.begin(), members.end(),
                [&](std::size_t a, std::size_t b) { return resources_[a].label < resources_[b].label; });
    }
    waiting_.resize(model.pools.size());
    budget_ = cfg.max_events != 0 ? cfg.max_events : cfg.num_traces * 10000 + 1000000;
  }

  TracedLog run() {
    push(cfg_.start_instant, Event{EventKind::kArrival, 0, 0, 0});
    while (!queue_.empty()) {
      if (++processed_ > budget_) {
        throw ResourceLimitError("simulation exceeded its budget of " + std::to_string(budget_) + " events");
      }
      const auto [time, seq, event] = queue_.top();
      queue_.pop();
      now_ = time;
      handle(event);
      dispatch();
    }
    for (const auto& [key, count] : join_counts_) {
      if (count != 0) throw SimulationError("parallel join '" + model_.nodes[key.second].id + "' never synchronized");
    }
    if (completed_cases_ != cfg_.num_traces) {
      throw SimulationError(std::to_string(cfg_.num_traces - completed_cases_) + " cases did not reach the end event");
    }
    return finish();
  }

 private:
  enum class EventKind { kArrival, kToken, kComplete, kWake };
  struct Event {
    EventKind kind;
    std::size_t a;  // case (arrival, token) | work item (complete) | resource (wake)
    std::size_t b;  // node (token)
    Seconds timer;  // accumulated timer delay carried by a token
  };
  using Entry = std::tuple<Timestamp, std::uint64_t, Event>;
  struct Later {
    bool operator()(const Entry& x, const Entry& y) const {
      return std::tie(std::get<0>(x), std::get<1>(x)) > std::tie(std::get<0>(y), std::get<1>(y));
    }
  };
  struct Resource {
    std::string label;
    std::size_t pool;
    bool idle;
    Timestamp idle_since;
    bool wake_pending;
  };
  struct WorkItem {
    std::size_t case_id;
    std::size_t node;
    Timestamp enabled;
    Seconds timer;
    Timestamp start = 0;
    std::size_t resource = 0;
  };
  struct QueueKey {
    Timestamp enabled;
    std::size_t case_id;
    std::string label;
    std::size_t item;
    friend auto operator<=>(const QueueKey&, const QueueKey&) = default;
  };
  struct Done {
    ActivityInstance instance;
    std::size_t case_id;
    Seconds timer;
  };

  void push(Timestamp t, Event e) { queue_.emplace(t, seq_++, e); }

  void handle(const Event& e) {
    switch (e.kind) {
      case EventKind::kArrival: {
        const std::size_t next = e.a + 1;
        if (next < cfg_.num_traces) {
          const Seconds gap = draw(model_.arrivals.interarrival, rng_);
          const Timestamp at = model_.arrivals.calendar
                                   ? model_.arrivals.calendar->add_working_time(now_, gap)
                                   : now_ + gap;
          push(at, Event{EventKind::kArrival, next, 0, 0});
        }
        Timestamp begin = now_;
        if (model_.arrivals.calendar) begin = model_.arrivals.calendar->next_working_instant(now_);
        if (begin == now_) {
          enter(e.a, start_node_, 0);
        } else {
          push(begin, Event{EventKind::kToken, e.a, start_node_, 0});
        }
        break;
      }
      case EventKind::kToken:
        enter(e.a, e.b, e.timer);
        break;
      case EventKind::kComplete: {
        const WorkItem& item = items_[e.a];
        Resource& res = resources_[item.resource];
        res.idle = true;
        res.idle_since = now_;
        const auto& task = std::get<Task>(model_.nodes[item.node].element);
        done_.push_back({{std::to_string(item.case_id), task.label, item.start, now_, res.label}, item.case_id, item.timer});
        forward(item.case_id, item.node, 0);
        break;
      }
      case EventKind::kWake:
        resources_[e.a].wake_pending = false;
        break;
    }
  }

  // Moves a token along the single outgoing flow of `node`.
  void forward(std::size_t case_id, std::size_t node, Seconds timer) {
    enter(case_id, successors_[node].front().first, timer);
  }

  void enter(std::size_t case_id, std::size_t node, Seconds timer) {
    const Node& n = model_.nodes[node];
    std::visit(
        [&](const auto& e) {
          using T = std::decay_t<decltype(e)>;
          if constexpr (std::is_same_v<T, StartEvent>) {
            forward(case_id, node, timer);
          } else if constexpr (std::is_same_v<T, EndEvent>) {
            ++completed_cases_;
          } else if constexpr (std::is_same_v<T, Task>) {
            const std::size_t item = items_.size();
            items_.push_back({case_id, node, now_, timer});
            waiting_[pool_index_.at(e.pool)].insert({now_, case_id, e.label, item});
          } else if constexpr (std::is_same_v<T, Timer>) {
            const Seconds d = draw(e.duration, rng_);
            push(now_ + d, Event{EventKind::kToken, case_id, successors_[node].front().first, timer + d});
          } else if constexpr (std::is_same_v<T, Gateway>) {
            route(case_id, node, e, timer);
          }
        },
        n.element);
  }

  void route(std::size_t case_id, std::size_t node, const Gateway& g, Seconds timer) {
    const auto& outs = successors_[node];
    if (g.direction == GatewayDirection::kJoin) {
      if (g.kind == GatewayKind::kParallel) {
        auto& count = join_counts_[{case_id, node}];
        if (++count < in_degree_[node]) return;
        count = 0;
      }
      forward(case_id, node, timer);
      return;
    }
    if (g.kind == GatewayKind::kParallel) {
      for (const auto& [target, flow] : outs) enter(case_id, target, timer);
      return;
    }
    const double u = uniform01(rng_);
    double cumulative = 0.0;
    for (const auto& [target, flow] : outs) {
      cumulative += g.branch_probs.at(flow);
      if (u < cumulative) {
        enter(case_id, target, timer);
        return;
      }
    }
    // Rounding left u above the last cumulative sum: take the last branch
    // with positive probability.
    for (auto it = outs.rbegin(); it != outs.rend(); ++it) {
      if (g.branch_probs.at(it->second) > 0.0) {
        enter(case_id, it->first, timer);
        return;
      }
    }
  }

  void dispatch() {
    for (std::size_t p = 0; p < waiting_.size(); ++p) {
      auto& queue = waiting_[p];
      const ResourceCalendar& calendar = model_.pools[p].calendar;
      if (queue.empty()) continue;
      const bool on_duty = calendar.is_working(now_);
      while (!queue.empty() && on_duty) {
        std::size_t chosen = resources_.size();
        for (std::size_t r : pool_members_[p]) {
          if (!resources_[r].idle) continue;
          if (chosen == resources_.size() || resources_[r].idle_since < resources_[chosen].idle_since) chosen = r;
        }
        if (chosen == resources_.size()) break;
        const auto key = *queue.begin();
        queue.erase(queue.begin());
        WorkItem& item = items_[key.item];
        item.start = now_;
        item.resource = chosen;
        resources_[chosen].idle = false;
        const auto& task = std::get<Task>(model_.nodes[item.node].element);
        const Timestamp end = calendar.add_working_time(now_, draw(task.duration, rng_));
        push(end, Event{EventKind::kComplete, key.item, 0, 0});
      }
      if (queue.empty() || on_duty) continue;
      // Idle resources are off duty: come back at the next shift start.
      for (std::size_t r : pool_members_[p]) {
        Resource& res = resources_[r];
        if (res.idle && !res.wake_pending) {
          res.wake_pending = true;
          push(calendar.next_working_instant(now_), Event{EventKind::kWake, r, 0, 0});
        }
      }
    }
  }

  TracedLog finish() {
    std::sort(done_.begin(), done_.end(), [](const Done& x, const Done& y) {
      return std::tie(x.instance.start, x.case_id, x.instance.activity, x.instance.end) <
             std::tie(y.instance.start, y.case_id, y.instance.activity, y.instance.end);
    });
    std::vector<ActivityInstance> instances;
    std::vector<Seconds> timers;
    instances.reserve(done_.size());
    timers.reserve(done_.size());
    for (auto& d : done_) {
      instances.push_back(std::move(d.instance));
      timers.push_back(d.timer);
    }
    return {ActivityInstanceLog(std::move(instances)), std::move(timers)};
  }

  const BpsModel& model_;
  const SimulationConfig& cfg_;
  Rng rng_;
  std::unordered_map<std::string, std::size_t> node_index_;
  std::unordered_map<std::string, std::size_t> pool_index_;
  std::vector<std::vector<std::pair<std::size_t, std::string>>> successors_;
  std::vector<std::size_t> in_degree_;
  std::size_t start_node_ = 0;
  std::vector<Resource> resources_;
  std::vector<std::vector<std::size_t>> pool_members_;
  std::vector<std::set<QueueKey>> waiting_;
  std::vector<WorkItem> items_;
  std::map<std::pair<std::size_t, std::size_t>, std::size_t> join_counts_;
  std::vector<Done> done_;
  std::priority_queue<Entry, std::vector<Entry>, Later> queue_;
  std::uint64_t seq_ = 0;
  std::size_t processed_ = 0;
  std::size_t budget_ = 0;
  std::size_t completed_cases_ = 0;
  Timestamp now_ = 0;
};

}  // namespace

TracedLog simulate_traced(const BpsModel& model, const SimulationConfig& cfg) {
  validate_model(model);
  return Engine(model, cfg).run();
}

ActivityInstanceLog simulate(const BpsModel& model, const SimulationConfig& cfg) {
  return simulate_traced(model, cfg).log;
}

std::vector<ActivityInstanceLog> simulate_many(const BpsModel& model, const SimulationConfig& cfg, std::size_t runs) {
  if (runs == 0) throw ArgumentError("number of runs must be at least 1");
  validate_model(model);
  cfg.validate();
  auto run_one = [&](std::size_t k) {
    SimulationConfig local = cfg;
    local.seed = cfg.seed + k;
    return Engine(model, local).run().log;
  };
  std::vector<ActivityInstanceLog> out(runs);
  const std::size_t workers = std::max<std::size_t>(1, std::min<std::size_t>(runs, std::thread::hardware_concurrency()));
  if (workers == 1) {
    for (std::size_t k = 0; k < runs; ++k) out[k] = run_one(k);
    return out;
  }
  for (std::size_t first = 0; first < runs; first += workers) {
    std::vector<std::future<ActivityInstanceLog>> batch;
    for (std::size_t k = first; k < std::min(runs, first + workers); ++k) {
      batch.push_back(std::async(std::launch::async, run_one, k));
    }
    for (std::size_t i = 0; i < batch.size(); ++i) out[first + i] = batch[i].get();
  }
  return out;
}

}  // namespace delayminer
