#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "delayminer/calendars.hpp"
#include "delayminer/delay_discovery.hpp"
#include "delayminer/distribution.hpp"

namespace delayminer {

inline constexpr int kModelSchemaVersion = 1;

struct StartEvent {
  friend bool operator==(const StartEvent&, const StartEvent&) = default;
};

struct EndEvent {
  friend bool operator==(const EndEvent&, const EndEvent&) = default;
};

struct Task {
  std::string label;
  DurationDistribution duration;
  std::string pool;

  friend bool operator==(const Task&, const Task&) = default;
};

enum class GatewayKind { kExclusive, kParallel };
enum class GatewayDirection { kSplit, kJoin };

struct Gateway {
  GatewayKind kind = GatewayKind::kExclusive;
  GatewayDirection direction = GatewayDirection::kSplit;
  /// Outgoing flow id -> probability; exclusive splits only.
  std::map<std::string, double> branch_probs;

  friend bool operator==(const Gateway&, const Gateway&) = default;
};

struct TimerAttachment {
  std::string activity;
  Attribution attribution = Attribution::kExAnte;

  friend bool operator==(const TimerAttachment&, const TimerAttachment&) = default;
};

/// Holds a token for a sampled wall-clock duration without using a resource.
struct Timer {
  DurationDistribution duration;
  std::optional<TimerAttachment> attached_to;

  friend bool operator==(const Timer&, const Timer&) = default;
};

using NodeElement = std::variant<StartEvent, EndEvent, Task, Gateway, Timer>;

struct Node {
  std::string id;
  NodeElement element;

  bool is_task() const { return std::holds_alternative<Task>(element); }
  bool is_timer() const { return std::holds_alternative<Timer>(element); }

  friend bool operator==(const Node&, const Node&) = default;
};

struct Flow {
  std::string id;
  std::string source;
  std::string target;

  friend bool operator==(const Flow&, const Flow&) = default;
};

struct ResourcePool {
  std::string id;
  std::vector<std::string> resources;
  ResourceCalendar calendar;  // shared by every resource of the pool

  friend bool operator==(const ResourcePool&, const ResourcePool&) = default;
};

struct ArrivalModel {
  DurationDistribution interarrival;
  /// When set, inter-arrival times elapse in this calendar's working time.
  std::optional<ResourceCalendar> calendar;

  friend bool operator==(const ArrivalModel&, const ArrivalModel&) = default;
};

/// Block-structured process model annotated with simulation parameters.
struct BpsModel {
  std::vector<Node> nodes;
  std::vector<Flow> flows;
  std::vector<ResourcePool> pools;
  ArrivalModel arrivals;

  const Node* find_node(std::string_view id) const;
  Node* find_node(std::string_view id);
  /// Node id of the task with the given label, or nullptr.
  const Node* find_task(std::string_view label) const;
  const ResourcePool* find_pool(std::string_view id) const;
  std::vector<const Flow*> incoming(std::string_view node) const;
  std::vector<const Flow*> outgoing(std::string_view node) const;

  /// Resource label -> calendar of its pool.
  std::map<std::string, ResourceCalendar> resource_calendars() const;
  std::vector<std::string> task_labels() const;
  std::size_t timer_count() const;

  friend bool operator==(const BpsModel&, const BpsModel&) = default;
};

/// Checks references, degrees, exclusive-split probabilities (sum 1 +- 1e-9),
/// pools, reachability, and that the graph reduces to a single start-to-end
/// flow by collapsing sequences, split/join blocks of matching kind, and
/// exclusive loops. Throws ValidationError naming the offending element.
void validate_model(const BpsModel& model);

/// JSON codec; loading validates. SchemaError messages carry a JSON path.
BpsModel parse_model(std::string_view json_text);
std::string model_to_json(const BpsModel& model);
BpsModel load_model(const std::filesystem::path& path);
void save_model(const BpsModel& model, const std::filesystem::path& path);

/// Adds one timer per reported activity whose positive ratio exceeds the
/// report's delta: on the task's incoming flow (ex-ante) or outgoing flow
/// (ex-post). A timer already attached to the same (activity, attribution)
/// is replaced. Throws ArgumentError for activities missing from the model.
BpsModel inject_timers(const BpsModel& model, const DelayReport& report);

/// Removes every timer node, reconnecting its neighbours.
BpsModel strip_timers(const BpsModel& model);

inline constexpr double kDefaultGammaMax = 10.0;

/// Activity label -> scale factor. Missing activities scale by 1.
struct ScaleVector {
  std::map<std::string, double> gamma;

  double factor(const std::string& activity) const;
};

/// Multiplies every delay of each activity by its factor, recomputes the
/// positive ratio and refits the distribution. Needs raw delays in the
/// report; throws ArgumentError on negative factors or missing raw delays.
DelayReport scale_report(const DelayReport& report, const ScaleVector& gamma);

}  // namespace delayminer
