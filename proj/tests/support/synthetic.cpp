#include "synthetic.hpp"

namespace synth {

using namespace delayminer;

ModelBuilder::ModelBuilder() {
  model_.nodes.push_back({"start", StartEvent{}});
  model_.nodes.push_back({"end", EndEvent{}});
  model_.arrivals.interarrival = DurationDistribution::exponential(600.0);
}

ModelBuilder& ModelBuilder::task(const std::string& id, const std::string& label, const std::string& pool,
                                 DurationDistribution duration) {
  model_.nodes.push_back({id, Task{label, duration, pool}});
  return *this;
}

ModelBuilder& ModelBuilder::gateway(const std::string& id, GatewayKind kind, GatewayDirection direction) {
  model_.nodes.push_back({id, Gateway{kind, direction, {}}});
  return *this;
}

ModelBuilder& ModelBuilder::timer(const std::string& id, DurationDistribution duration, const std::string& activity) {
  Timer t{duration, std::nullopt};
  if (!activity.empty()) t.attached_to = TimerAttachment{activity, Attribution::kExAnte};
  model_.nodes.push_back({id, t});
  return *this;
}

ModelBuilder& ModelBuilder::flow(const std::string& source, const std::string& target, double probability) {
  const std::string id = "f" + std::to_string(next_flow_++);
  model_.flows.push_back({id, source, target});
  if (probability >= 0.0) {
    std::get<Gateway>(model_.find_node(source)->element).branch_probs[id] = probability;
  }
  return *this;
}

ModelBuilder& ModelBuilder::chain(const std::vector<std::string>& ids) {
  for (std::size_t i = 0; i + 1 < ids.size(); ++i) flow(ids[i], ids[i + 1]);
  return *this;
}

ModelBuilder& ModelBuilder::pool(const std::string& id, std::vector<std::string> resources, ResourceCalendar calendar) {
  model_.pools.push_back({id, std::move(resources), ResourceCalendar(id, calendar.slots())});
  return *this;
}

ModelBuilder& ModelBuilder::arrivals(DurationDistribution interarrival) {
  model_.arrivals.interarrival = interarrival;
  return *this;
}

BpsModel ModelBuilder::build() const {
  validate_model(model_);
  return model_;
}

ResourceCalendar daily(int from_hour, int to_hour) { return ResourceCalendar::daily("", from_hour * 3600, to_hour * 3600); }

ResourceCalendar weekdays(int from_hour, int to_hour) {
  std::vector<WeeklySlot> slots;
  for (int d = 0; d < 5; ++d) slots.push_back({d, from_hour * 3600, to_hour * 3600});
  return ResourceCalendar("", slots);
}

std::string task_label(std::size_t i) { return "Task " + std::string(1, static_cast<char>('A' + i)); }

BpsModel sequence_model(const SequenceSpec& spec) {
  ModelBuilder b;
  b.arrivals(DurationDistribution::exponential(spec.mean_interarrival));
  for (std::size_t p = 0; p < spec.pools; ++p) {
    const std::string id = "p" + std::to_string(p);
    std::vector<std::string> resources;
    for (std::size_t k = 0; k < spec.resources_per_pool; ++k) resources.push_back(id + "_r" + std::to_string(k));
    b.pool(id, resources, spec.calendar);
  }
  std::vector<std::string> path = {"start"};
  for (std::size_t i = 0; i < spec.tasks; ++i) {
    const std::string label = task_label(i);
    const std::string id = "t" + std::to_string(i);
    if (const auto it = spec.timers.find(label); it != spec.timers.end()) {
      b.timer("timer_" + id, it->second, label);
      path.push_back("timer_" + id);
    }
    b.task(id, label, "p" + std::to_string(i % spec.pools), DurationDistribution::exponential(spec.mean_duration));
    path.push_back(id);
  }
  path.push_back("end");
  b.chain(path);
  BpsModel m = b.build();
  m.arrivals.calendar = spec.arrival_calendar;
  validate_model(m);
  return m;
}

BpsModel branching_model(double mean_interarrival) {
  using K = GatewayKind;
  using D = GatewayDirection;
  ModelBuilder b;
  b.arrivals(DurationDistribution::exponential(mean_interarrival))
      .pool("front", {"Ana", "Ben"}, weekdays(8, 16))
      .pool("back", {"Cleo"}, weekdays(9, 17))
      .pool("audit", {"Dev", "Eve"}, daily(7, 19))
      .task("receive", "Receive order", "front", DurationDistribution::exponential(900.0))
      .task("check", "Check credit", "back", DurationDistribution::gamma(4.0, 300.0))
      .task("fast", "Fast approval", "front", DurationDistribution::uniform(300.0, 900.0))
      .task("ship", "Ship goods", "audit", DurationDistribution::exponential(1500.0))
      .task("invoice", "Send invoice", "back", DurationDistribution::normal(1200.0, 300.0))
      .gateway("xs", K::kExclusive, D::kSplit)
      .gateway("xj", K::kExclusive, D::kJoin)
      .gateway("as", K::kParallel, D::kSplit)
      .gateway("aj", K::kParallel, D::kJoin);
  b.chain({"start", "receive", "xs"});
  b.flow("xs", "check", 0.6).flow("xs", "fast", 0.4);
  b.chain({"check", "xj"}).chain({"fast", "xj"}).chain({"xj", "as"});
  b.flow("as", "ship").flow("as", "invoice");
  b.chain({"ship", "aj"}).chain({"invoice", "aj"}).chain({"aj", "end"});
  return b.build();
}

}  // namespace synth
