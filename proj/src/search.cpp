#include "qvp/search.hpp"

#include <algorithm>
#include <queue>
#include <tuple>
#include <unordered_map>

namespace qvp {

namespace {

struct Node {
  State state;
  std::int64_t g = 0;
  std::int64_t h = 0;
  std::size_t parent = 0;
  ActionId via = 0;
};

// (f, g, insertion counter, node index)
using OpenEntry = std::tuple<std::int64_t, std::int64_t, std::uint64_t, std::size_t>;

}  // namespace

std::optional<Plan> astar_optimal(const GroundTask& task, HeuristicKind kind,
                                  std::size_t max_expansions, SearchStats* stats) {
  Heuristic heuristic(task, kind);
  std::vector<Node> nodes;
  std::unordered_map<State, std::size_t, StateHash> index;
  std::priority_queue<OpenEntry, std::vector<OpenEntry>, std::greater<>> open;
  std::uint64_t counter = 0;
  SearchStats local;

  const HeuristicValue h0 = heuristic(task.init);
  if (h0.is_infinite()) return std::nullopt;
  nodes.push_back(Node{task.init, 0, h0.value(), 0, 0});
  index.emplace(task.init, 0);
  open.emplace(h0.value(), 0, counter++, 0);

  std::optional<std::size_t> goal_node;
  while (!open.empty()) {
    const auto [f, g, order, id] = open.top();
    open.pop();
    if (g != nodes[id].g) continue;  // superseded by a cheaper path
    if (is_goal(task, nodes[id].state)) {
      goal_node = id;
      break;
    }
    if (++local.expanded > max_expansions) {
      if (stats) *stats = local;
      throw BudgetExceeded("A* exceeded " + std::to_string(max_expansions) + " expansions on " +
                           task.instance_name);
    }
    const State cur = nodes[id].state;
    for (ActionId a : applicable_actions(task, cur)) {
      State next = apply(cur, task.actions[a]);
      const std::int64_t ng = g + task.actions[a].cost;
      ++local.generated;
      auto it = index.find(next);
      if (it != index.end()) {
        Node& n = nodes[it->second];
        if (ng >= n.g) continue;
        n.g = ng;
        n.parent = id;
        n.via = a;
        open.emplace(ng + n.h, ng, counter++, it->second);
        continue;
      }
      const HeuristicValue h = heuristic(next);
      if (h.is_infinite()) continue;
      const std::size_t nid = nodes.size();
      index.emplace(next, nid);
      nodes.push_back(Node{std::move(next), ng, h.value(), id, a});
      open.emplace(ng + h.value(), ng, counter++, nid);
    }
  }
  if (stats) *stats = local;
  if (!goal_node) return std::nullopt;

  Plan plan;
  plan.cost = nodes[*goal_node].g;
  for (std::size_t n = *goal_node; n != 0; n = nodes[n].parent) {
    plan.actions.push_back(nodes[n].via);
  }
  std::reverse(plan.actions.begin(), plan.actions.end());
  plan.trajectory.push_back(task.init);
  for (ActionId a : plan.actions) plan.trajectory.push_back(apply(plan.trajectory.back(), task.actions[a]));
  return plan;
}

bool validate_plan(const GroundTask& task, const std::vector<ActionId>& actions, std::int64_t* cost) {
  State s = task.init;
  std::int64_t total = 0;
  for (ActionId a : actions) {
    if (a >= task.num_actions()) return false;
    const auto& pre = task.actions[a].pre;
    if (!std::all_of(pre.begin(), pre.end(), [&](AtomId p) { return s.contains(p); })) return false;
    s = apply(s, task.actions[a]);
    total += task.actions[a].cost;
  }
  if (cost) *cost = total;
  return is_goal(task, s);
}

}  // namespace qvp
