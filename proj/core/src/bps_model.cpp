#include "delayminer/bps_model.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "delayminer/error.hpp"
#include "json_codec.hpp"

namespace delayminer {

namespace {

std::string_view node_type(const NodeElement& element) {
  return std::visit(
      [](const auto& e) -> std::string_view {
        using T = std::decay_t<decltype(e)>;
        if constexpr (std::is_same_v<T, StartEvent>) return "start";
        if constexpr (std::is_same_v<T, EndEvent>) return "end";
        if constexpr (std::is_same_v<T, Task>) return "task";
        if constexpr (std::is_same_v<T, Gateway>) return "gateway";
        if constexpr (std::is_same_v<T, Timer>) return "timer";
      },
      element);
}

// Collapses the flow graph until only start -> end remains. Returns the ids
// of the nodes left over when the graph is not block-structured.
std::vector<std::string> irreducible_nodes(const BpsModel& model) {
  struct Edge {
    std::string from, to;
  };
  std::vector<Edge> edges;
  for (const auto& f : model.flows) edges.push_back({f.source, f.target});
  std::map<std::string, const Node*> alive;
  for (const auto& n : model.nodes) alive.emplace(n.id, &n);

  auto in_edges = [&](const std::string& id) {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < edges.size(); ++i)
      if (edges[i].to == id) out.push_back(i);
    return out;
  };
  auto out_edges = [&](const std::string& id) {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < edges.size(); ++i)
      if (edges[i].from == id) out.push_back(i);
    return out;
  };
  auto erase_edges = [&](std::vector<std::size_t> idx) {
    std::sort(idx.rbegin(), idx.rend());
    idx.erase(std::unique(idx.begin(), idx.end()), idx.end());
    for (std::size_t i : idx) edges.erase(edges.begin() + static_cast<std::ptrdiff_t>(i));
  };

  for (bool changed = true; changed;) {
    changed = false;
    for (auto it = alive.begin(); it != alive.end() && !changed; ++it) {
      const auto& [id, node] = *it;
      const auto ins = in_edges(id);
      const auto outs = out_edges(id);

      if ((node->is_task() || node->is_timer()) && ins.size() == 1 && outs.size() == 1) {
        const Edge bridged{edges[ins[0]].from, edges[outs[0]].to};
        erase_edges({ins[0], outs[0]});
        edges.push_back(bridged);
        alive.erase(it);
        changed = true;
        break;
      }

      const auto* gw = std::get_if<Gateway>(&node->element);
      if (gw == nullptr || gw->direction != GatewayDirection::kSplit || ins.size() != 1 || outs.size() < 2) continue;

      // Block: every branch of the split goes straight to one join of the
      // same kind, and that join has no other inputs.
      const std::string join_id = edges[outs[0]].to;
      const bool same_target = std::all_of(outs.begin(), outs.end(), [&](std::size_t e) { return edges[e].to == join_id; });
      if (same_target && join_id != id) {
        const auto join_it = alive.find(join_id);
        const auto* join = std::get_if<Gateway>(&join_it->second->element);
        const auto join_ins = in_edges(join_id);
        const auto join_outs = out_edges(join_id);
        if (join != nullptr && join->direction == GatewayDirection::kJoin && join->kind == gw->kind &&
            join_ins.size() == outs.size() && join_outs.size() == 1) {
          const Edge bridged{edges[ins[0]].from, edges[join_outs[0]].to};
          std::vector<std::size_t> drop = outs;
          drop.push_back(ins[0]);
          drop.push_back(join_outs[0]);
          erase_edges(drop);
          edges.push_back(bridged);
          alive.erase(join_id);
          alive.erase(id);
          changed = true;
          break;
        }
      }

      // Exclusive loop: join J -> split S (single edge), S -> J (one or more
      // back edges), one entry into J and one exit out of S.
      if (gw->kind != GatewayKind::kExclusive) continue;
      const std::string loop_join = edges[ins[0]].from;
      const auto join_it = alive.find(loop_join);
      if (join_it == alive.end()) continue;
      const auto* join = std::get_if<Gateway>(&join_it->second->element);
      if (join == nullptr || join->kind != GatewayKind::kExclusive || join->direction != GatewayDirection::kJoin) continue;
      const auto join_outs = out_edges(loop_join);
      if (join_outs.size() != 1) continue;
      std::vector<std::size_t> back, exits;
      for (std::size_t e : outs) (edges[e].to == loop_join ? back : exits).push_back(e);
      std::vector<std::size_t> entries;
      for (std::size_t e : in_edges(loop_join))
        if (edges[e].from != id) entries.push_back(e);
      if (back.empty() || exits.size() != 1 || entries.size() != 1) continue;
      const Edge bridged{edges[entries[0]].from, edges[exits[0]].to};
      std::vector<std::size_t> drop = outs;
      drop.push_back(ins[0]);
      drop.push_back(entries[0]);
      erase_edges(drop);
      edges.push_back(bridged);
      alive.erase(loop_join);
      alive.erase(id);
      changed = true;
      break;
    }
  }

  std::vector<std::string> left;
  for (const auto& [id, node] : alive) {
    if (!std::holds_alternative<StartEvent>(node->element) && !std::holds_alternative<EndEvent>(node->element)) {
      left.push_back(id);
    }
  }
  if (left.empty() && edges.size() != 1) left.push_back("<start/end>");
  return left;
}

}  // namespace

const Node* BpsModel::find_node(std::string_view id) const {
  const auto it = std::find_if(nodes.begin(), nodes.end(), [&](const Node& n) { return n.id == id; });
  return it == nodes.end() ? nullptr : &*it;
}

Node* BpsModel::find_node(std::string_view id) {
  const auto it = std::find_if(nodes.begin(), nodes.end(), [&](const Node& n) { return n.id == id; });
  return it == nodes.end() ? nullptr : &*it;
}

const Node* BpsModel::find_task(std::string_view label) const {
  const auto it = std::find_if(nodes.begin(), nodes.end(), [&](const Node& n) {
    const auto* task = std::get_if<Task>(&n.element);
    return task != nullptr && task->label == label;
  });
  return it == nodes.end() ? nullptr : &*it;
}

const ResourcePool* BpsModel::find_pool(std::string_view id) const {
  const auto it = std::find_if(pools.begin(), pools.end(), [&](const ResourcePool& p) { return p.id == id; });
  return it == pools.end() ? nullptr : &*it;
}

std::vector<const Flow*> BpsModel::incoming(std::string_view node) const {
  std::vector<const Flow*> out;
  for (const auto& f : flows)
    if (f.target == node) out.push_back(&f);
  return out;
}

std::vector<const Flow*> BpsModel::outgoing(std::string_view node) const {
  std::vector<const Flow*> out;
  for (const auto& f : flows)
    if (f.source == node) out.push_back(&f);
  return out;
}

std::map<std::string, ResourceCalendar> BpsModel::resource_calendars() const {
  std::map<std::string, ResourceCalendar> out;
  for (const auto& pool : pools) {
    for (const auto& r : pool.resources) out.emplace(r, ResourceCalendar(r, pool.calendar.slots()));
  }
  return out;
}

std::vector<std::string> BpsModel::task_labels() const {
  std::vector<std::string> out;
  for (const auto& n : nodes)
    if (const auto* t = std::get_if<Task>(&n.element)) out.push_back(t->label);
  return out;
}

std::size_t BpsModel::timer_count() const {
  return static_cast<std::size_t>(std::count_if(nodes.begin(), nodes.end(), [](const Node& n) { return n.is_timer(); }));
}

void validate_model(const BpsModel& model) {
  std::set<std::string> node_ids, flow_ids, labels, pool_ids, resources;
  std::size_t starts = 0, ends = 0;
  for (const auto& n : model.nodes) {
    if (n.id.empty()) throw ValidationError("node with an empty id");
    if (!node_ids.insert(n.id).second) throw ValidationError("duplicate node id '" + n.id + "'");
    if (std::holds_alternative<StartEvent>(n.element)) ++starts;
    if (std::holds_alternative<EndEvent>(n.element)) ++ends;
  }
  if (starts != 1 || ends != 1) throw ValidationError("model needs exactly one start and one end event");

  for (const auto& p : model.pools) {
    if (!pool_ids.insert(p.id).second) throw ValidationError("duplicate pool id '" + p.id + "'");
    if (p.resources.empty()) throw ValidationError("pool '" + p.id + "' has no resources");
    if (p.calendar.empty()) throw ValidationError("pool '" + p.id + "' has a calendar without working time");
    for (const auto& r : p.resources) {
      if (!resources.insert(r).second) throw ValidationError("resource '" + r + "' belongs to more than one pool");
    }
  }

  for (const auto& f : model.flows) {
    if (!flow_ids.insert(f.id).second) throw ValidationError("duplicate flow id '" + f.id + "'");
    if (!node_ids.contains(f.source) || !node_ids.contains(f.target)) {
      throw ValidationError("flow '" + f.id + "' references an unknown node");
    }
  }

  for (const auto& n : model.nodes) {
    const auto ins = model.incoming(n.id);
    const auto outs = model.outgoing(n.id);
    auto degree_error = [&](const std::string& expectation) {
      throw ValidationError(std::string(node_type(n.element)) + " '" + n.id + "' must have " + expectation);
    };
    std::visit(
        [&](const auto& e) {
          using T = std::decay_t<decltype(e)>;
          if constexpr (std::is_same_v<T, StartEvent>) {
            if (!ins.empty() || outs.size() != 1) degree_error("no incoming and one outgoing flow");
          } else if constexpr (std::is_same_v<T, EndEvent>) {
            if (ins.size() != 1 || !outs.empty()) degree_error("one incoming and no outgoing flow");
          } else if constexpr (std::is_same_v<T, Task>) {
            if (ins.size() != 1 || outs.size() != 1) degree_error("one incoming and one outgoing flow");
            if (e.label.empty()) throw ValidationError("task '" + n.id + "' has an empty label");
            if (!labels.insert(e.label).second) throw ValidationError("duplicate task label '" + e.label + "'");
            if (!pool_ids.contains(e.pool)) {
              throw ValidationError("task '" + e.label + "' references unknown pool '" + e.pool + "'");
            }
          } else if constexpr (std::is_same_v<T, Timer>) {
            if (ins.size() != 1 || outs.size() != 1) degree_error("one incoming and one outgoing flow");
          } else if constexpr (std::is_same_v<T, Gateway>) {
            if (e.direction == GatewayDirection::kSplit) {
              if (ins.size() != 1 || outs.size() < 2) degree_error("one incoming and at least two outgoing flows");
            } else if (ins.size() < 2 || outs.size() != 1) {
              degree_error("at least two incoming and one outgoing flow");
            }
            const bool needs_probs = e.kind == GatewayKind::kExclusive && e.direction == GatewayDirection::kSplit;
            if (!needs_probs && !e.branch_probs.empty()) {
              throw ValidationError("gateway '" + n.id + "' only exclusive splits carry branch probabilities");
            }
            if (needs_probs) {
              double sum = 0.0;
              for (const auto* f : outs) {
                const auto it = e.branch_probs.find(f->id);
                if (it == e.branch_probs.end()) {
                  throw ValidationError("gateway '" + n.id + "' has no probability for flow '" + f->id + "'");
                }
                if (!(it->second >= 0.0 && it->second <= 1.0)) {
                  throw ValidationError("gateway '" + n.id + "' has a probability outside [0, 1]");
                }
                sum += it->second;
              }
              if (e.branch_probs.size() != outs.size()) {
                throw ValidationError("gateway '" + n.id + "' has probabilities for flows it does not own");
              }
              if (std::abs(sum - 1.0) > 1e-9) {
                throw ValidationError("gateway '" + n.id + "' branch probabilities sum to " + std::to_string(sum));
              }
            }
          }
        },
        n.element);
  }

  for (const auto& n : model.nodes) {
    if (const auto* timer = std::get_if<Timer>(&n.element); timer && timer->attached_to) {
      if (!labels.contains(timer->attached_to->activity)) {
        throw ValidationError("timer '" + n.id + "' is attached to unknown activity '" + timer->attached_to->activity + "'");
      }
    }
  }
  if (model.arrivals.calendar && model.arrivals.calendar->empty()) {
    throw ValidationError("arrival calendar has no working time");
  }

  const auto left = irreducible_nodes(model);
  if (!left.empty()) {
    std::string names;
    for (const auto& id : left) names += (names.empty() ? "" : ", ") + id;
    throw ValidationError("model is not block-structured (unbalanced or unstructured around: " + names + ")");
  }
}

namespace {

using detail::Json;

Json node_to_json(const Node& n) {
  Json out;
  out["id"] = n.id;
  out["type"] = node_type(n.element);
  std::visit(
      [&](const auto& e) {
        using T = std::decay_t<decltype(e)>;
        if constexpr (std::is_same_v<T, Task>) {
          out["label"] = e.label;
          out["pool"] = e.pool;
          out["duration"] = detail::to_json(e.duration);
        } else if constexpr (std::is_same_v<T, Gateway>) {
          out["kind"] = e.kind == GatewayKind::kExclusive ? "exclusive" : "parallel";
          out["direction"] = e.direction == GatewayDirection::kSplit ? "split" : "join";
          if (!e.branch_probs.empty()) {
            Json probs = Json::object();
            for (const auto& [flow, p] : e.branch_probs) probs[flow] = p;
            out["branch_probs"] = probs;
          }
        } else if constexpr (std::is_same_v<T, Timer>) {
          out["duration"] = detail::to_json(e.duration);
          if (e.attached_to) {
            out["attached_to"] = {{"activity", e.attached_to->activity},
                                  {"attribution", attribution_name(e.attached_to->attribution)}};
          }
        }
      },
      n.element);
  return out;
}

Node node_from_json(const Json& value, const std::string& path) {
  Node n;
  n.id = detail::require_string(value, "id", path);
  const std::string type = detail::require_string(value, "type", path);
  if (type == "start") {
    n.element = StartEvent{};
  } else if (type == "end") {
    n.element = EndEvent{};
  } else if (type == "task") {
    n.element = Task{detail::require_string(value, "label", path),
                     detail::distribution_from_json(detail::require(value, "duration", path), path + ".duration"),
                     detail::require_string(value, "pool", path)};
  } else if (type == "gateway") {
    Gateway g;
    const std::string kind = detail::require_string(value, "kind", path);
    const std::string direction = detail::require_string(value, "direction", path);
    if (kind != "exclusive" && kind != "parallel") throw SchemaError(path + ".kind: expected exclusive|parallel");
    if (direction != "split" && direction != "join") throw SchemaError(path + ".direction: expected split|join");
    g.kind = kind == "exclusive" ? GatewayKind::kExclusive : GatewayKind::kParallel;
    g.direction = direction == "split" ? GatewayDirection::kSplit : GatewayDirection::kJoin;
    if (value.contains("branch_probs")) {
      const auto& probs = value["branch_probs"];
      if (!probs.is_object()) throw SchemaError(path + ".branch_probs: expected an object");
      for (const auto& [flow, p] : probs.items()) {
        if (!p.is_number()) throw SchemaError(path + ".branch_probs." + flow + ": expected a number");
        g.branch_probs[flow] = p.get<double>();
      }
    }
    n.element = std::move(g);
  } else if (type == "timer") {
    Timer t;
    t.duration = detail::distribution_from_json(detail::require(value, "duration", path), path + ".duration");
    if (value.contains("attached_to")) {
      const auto& a = value["attached_to"];
      const std::string apath = path + ".attached_to";
      try {
        t.attached_to = TimerAttachment{detail::require_string(a, "activity", apath),
                                        parse_attribution(detail::require_string(a, "attribution", apath))};
      } catch (const ArgumentError& e) {
        throw SchemaError(apath + ": " + e.what());
      }
    }
    n.element = std::move(t);
  } else {
    throw SchemaError(path + ".type: unknown node type '" + type + "'");
  }
  return n;
}

}  // namespace

BpsModel parse_model(std::string_view json_text) {
  const Json doc = detail::parse_document(json_text, "model");
  const double version = detail::require_number(doc, "schema_version", "$");
  if (version != kModelSchemaVersion) {
    throw SchemaError("$.schema_version: unsupported version " + std::to_string(static_cast<int>(version)));
  }
  BpsModel model;
  const auto& nodes = detail::require(doc, "nodes", "$");
  if (!nodes.is_array()) throw SchemaError("$.nodes: expected an array");
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    model.nodes.push_back(node_from_json(nodes[i], "$.nodes[" + std::to_string(i) + "]"));
  }
  const auto& flows = detail::require(doc, "flows", "$");
  if (!flows.is_array()) throw SchemaError("$.flows: expected an array");
  for (std::size_t i = 0; i < flows.size(); ++i) {
    const std::string path = "$.flows[" + std::to_string(i) + "]";
    model.flows.push_back({detail::require_string(flows[i], "id", path), detail::require_string(flows[i], "source", path),
                           detail::require_string(flows[i], "target", path)});
  }
  const auto& pools = detail::require(doc, "pools", "$");
  if (!pools.is_array()) throw SchemaError("$.pools: expected an array");
  for (std::size_t i = 0; i < pools.size(); ++i) {
    const std::string path = "$.pools[" + std::to_string(i) + "]";
    ResourcePool pool;
    pool.id = detail::require_string(pools[i], "id", path);
    const auto& resources = detail::require(pools[i], "resources", path);
    if (!resources.is_array()) throw SchemaError(path + ".resources: expected an array");
    for (const auto& r : resources) {
      if (!r.is_string()) throw SchemaError(path + ".resources: expected strings");
      pool.resources.push_back(r.get<std::string>());
    }
    pool.calendar = pools[i].contains("calendar")
                        ? detail::calendar_from_json(pools[i]["calendar"], path + ".calendar", pool.id)
                        : ResourceCalendar::always_available(pool.id);
    model.pools.push_back(std::move(pool));
  }
  const auto& arrivals = detail::require(doc, "arrivals", "$");
  model.arrivals.interarrival =
      detail::distribution_from_json(detail::require(arrivals, "interarrival", "$.arrivals"), "$.arrivals.interarrival");
  if (arrivals.contains("calendar")) {
    model.arrivals.calendar = detail::calendar_from_json(arrivals["calendar"], "$.arrivals.calendar", "arrivals");
  }
  validate_model(model);
  return model;
}

std::string model_to_json(const BpsModel& model) {
  Json doc;
  doc["schema_version"] = kModelSchemaVersion;
  auto& nodes = doc["nodes"] = Json::array();
  for (const auto& n : model.nodes) nodes.push_back(node_to_json(n));
  auto& flows = doc["flows"] = Json::array();
  for (const auto& f : model.flows) flows.push_back({{"id", f.id}, {"source", f.source}, {"target", f.target}});
  auto& pools = doc["pools"] = Json::array();
  for (const auto& p : model.pools) {
    Json calendar = detail::to_json(p.calendar);
    calendar.erase("resource");
    pools.push_back({{"id", p.id}, {"resources", p.resources}, {"calendar", calendar}});
  }
  Json arrivals;
  arrivals["interarrival"] = detail::to_json(model.arrivals.interarrival);
  if (model.arrivals.calendar) {
    Json calendar = detail::to_json(*model.arrivals.calendar);
    calendar.erase("resource");
    arrivals["calendar"] = calendar;
  }
  doc["arrivals"] = arrivals;
  return doc.dump(2);
}

BpsModel load_model(const std::filesystem::path& path) { return parse_model(detail::read_text_file(path)); }

void save_model(const BpsModel& model, const std::filesystem::path& path) {
  detail::write_text_file(path, model_to_json(model) + "\n");
}

namespace {

std::string unique_id(const BpsModel& model, const std::string& base) {
  auto taken = [&](const std::string& id) {
    return model.find_node(id) != nullptr ||
           std::any_of(model.flows.begin(), model.flows.end(), [&](const Flow& f) { return f.id == id; });
  };
  if (!taken(base)) return base;
  for (int i = 2;; ++i) {
    const std::string candidate = base + "_" + std::to_string(i);
    if (!taken(candidate)) return candidate;
  }
}

Flow* only_flow(BpsModel& model, const std::string& node, bool incoming) {
  Flow* found = nullptr;
  for (auto& f : model.flows) {
    if ((incoming ? f.target : f.source) != node) continue;
    if (found != nullptr) {
      throw ValidationError("node '" + node + "' has more than one " + (incoming ? "incoming" : "outgoing") + " flow");
    }
    found = &f;
  }
  if (found == nullptr) throw ValidationError("node '" + node + "' has no " + std::string(incoming ? "incoming" : "outgoing") + " flow");
  return found;
}

void remove_timer(BpsModel& model, const std::string& timer_id) {
  Flow* in = only_flow(model, timer_id, true);
  const Flow* out = only_flow(model, timer_id, false);
  in->target = out->target;
  const std::string out_id = out->id;
  std::erase_if(model.flows, [&](const Flow& f) { return f.id == out_id; });
  std::erase_if(model.nodes, [&](const Node& n) { return n.id == timer_id; });
}

}  // namespace

BpsModel inject_timers(const BpsModel& model, const DelayReport& report) {
  BpsModel out = model;
  for (const auto& activity : report.activities) {
    const Node* task_node = out.find_task(activity.activity);
    if (task_node == nullptr) throw ArgumentError("activity '" + activity.activity + "' is not a task of the model");
    if (!(activity.positive_ratio > report.delta)) continue;
    const std::string task_id = task_node->id;
    const TimerAttachment attachment{activity.activity, report.attribution};
    const bool ex_ante = report.attribution == Attribution::kExAnte;

    // Replace in place when a timer for this attachment already sits next to the task.
    std::string existing;
    for (const auto& n : out.nodes) {
      const auto* timer = std::get_if<Timer>(&n.element);
      if (timer != nullptr && timer->attached_to == attachment) existing = n.id;
    }
    if (!existing.empty()) {
      const Flow* link = only_flow(out, task_id, ex_ante);
      if ((ex_ante ? link->source : link->target) == existing) {
        std::get<Timer>(out.find_node(existing)->element).duration = activity.distribution;
        continue;
      }
      remove_timer(out, existing);
    }

    const std::string timer_id = unique_id(out, std::string(ex_ante ? "timer_ex_ante_" : "timer_ex_post_") + task_id);
    const std::string flow_id = unique_id(out, timer_id + "_flow");
    // The task-adjacent flow now ends at the timer; a new flow carries on.
    Flow* link = only_flow(out, task_id, ex_ante);
    const std::string target = link->target;
    link->target = timer_id;
    out.flows.push_back({flow_id, timer_id, target});
    out.nodes.push_back({timer_id, Timer{activity.distribution, attachment}});
  }
  return out;
}

BpsModel strip_timers(const BpsModel& model) {
  BpsModel out = model;
  std::vector<std::string> timers;
  for (const auto& n : out.nodes)
    if (n.is_timer()) timers.push_back(n.id);
  for (const auto& id : timers) remove_timer(out, id);
  return out;
}

double ScaleVector::factor(const std::string& activity) const {
  const auto it = gamma.find(activity);
  return it == gamma.end() ? 1.0 : it->second;
}

DelayReport scale_report(const DelayReport& report, const ScaleVector& gamma) {
  for (const auto& [activity, g] : gamma.gamma) {
    if (!(g >= 0.0) || !std::isfinite(g)) throw ArgumentError("scale factor of '" + activity + "' must be non-negative");
  }
  DelayReport out = report;
  for (auto& a : out.activities) {
    if (a.delays.empty()) throw ArgumentError("report entry '" + a.activity + "' has no raw delays to scale");
    const double g = gamma.factor(a.activity);
    for (double& d : a.delays) d *= g;
    a.positive_ratio = positive_ratio(a.delays);
    a.distribution = fit_distribution(a.delays);
  }
  return out;
}

}  // namespace delayminer
