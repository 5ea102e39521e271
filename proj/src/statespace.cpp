#include "qvp/statespace.hpp"

#include <algorithm>
#include <functional>
#include <queue>
#include <unordered_map>

namespace qvp {

namespace {

constexpr std::int64_t kInf = std::numeric_limits<std::int64_t>::max();

std::vector<std::uint64_t> to_bits(const State& s, std::size_t n) {
  std::vector<std::uint64_t> bits((n + 63) / 64, 0);
  for (AtomId a : s.atoms()) bits[a >> 6] |= std::uint64_t{1} << (a & 63);
  return bits;
}

bool test(const std::vector<std::uint64_t>& bits, AtomId a) { return (bits[a >> 6] >> (a & 63)) & 1; }

using QueueEntry = std::pair<std::int64_t, std::uint32_t>;
using MinQueue = std::priority_queue<QueueEntry, std::vector<QueueEntry>, std::greater<>>;

}  // namespace

std::vector<ActionId> applicable_actions(const GroundTask& task, const State& s) {
  const auto bits = to_bits(s, task.num_atoms());
  std::vector<ActionId> out;
  for (ActionId a = 0; a < task.actions.size(); ++a) {
    const auto& pre = task.actions[a].pre;
    if (std::all_of(pre.begin(), pre.end(), [&](AtomId p) { return test(bits, p); })) out.push_back(a);
  }
  return out;
}

State apply(const State& s, const GroundAction& a) {
  std::vector<AtomId> next;
  next.reserve(s.size() + a.add.size());
  for (AtomId p : s.atoms()) {
    if (!std::binary_search(a.del.begin(), a.del.end(), p)) next.push_back(p);
  }
  next.insert(next.end(), a.add.begin(), a.add.end());
  return State(std::move(next));
}

State apply(const GroundTask& task, const State& s, ActionId a) {
  const GroundAction& act = task.actions.at(a);
  for (AtomId p : act.pre) {
    if (!s.contains(p)) throw InapplicableAction("action " + task.action_name(a) + " is not applicable");
  }
  return apply(s, act);
}

bool is_goal(const GroundTask& task, const State& s) {
  return std::includes(s.atoms().begin(), s.atoms().end(), task.goal.begin(), task.goal.end());
}

// ---------------------------------------------------------------------------
// h^max

HMax::HMax(const GroundTask& task)
    : task_(task),
      precondition_of_(task.num_atoms()),
      atom_cost_(task.num_atoms()),
      unsatisfied_(task.num_actions()),
      action_cost_(task.num_actions()) {
  for (ActionId a = 0; a < task.num_actions(); ++a) {
    for (AtomId p : task.actions[a].pre) precondition_of_[p].push_back(a);
  }
}

HeuristicValue HMax::operator()(const State& s) {
  if (is_goal(task_, s)) return HeuristicValue(0);
  std::fill(atom_cost_.begin(), atom_cost_.end(), kInf);
  MinQueue queue;
  for (AtomId p : s.atoms()) {
    atom_cost_[p] = 0;
    queue.emplace(0, p);
  }
  auto fire = [&](ActionId a, std::int64_t value) {
    for (AtomId e : task_.actions[a].add) {
      if (value < atom_cost_[e]) {
        atom_cost_[e] = value;
        queue.emplace(value, e);
      }
    }
  };
  for (ActionId a = 0; a < task_.num_actions(); ++a) {
    unsatisfied_[a] = static_cast<int>(task_.actions[a].pre.size());
    if (unsatisfied_[a] == 0) fire(a, task_.actions[a].cost);
  }
  while (!queue.empty()) {
    const auto [c, p] = queue.top();
    queue.pop();
    if (c != atom_cost_[p]) continue;
    for (ActionId a : precondition_of_[p]) {
      // Atoms leave the queue in non-decreasing cost, so the last precondition
      // to be satisfied carries the maximum.
      if (--unsatisfied_[a] == 0) fire(a, c + task_.actions[a].cost);
    }
  }
  std::int64_t h = 0;
  for (AtomId g : task_.goal) {
    if (atom_cost_[g] == kInf) return HeuristicValue::infinity();
    h = std::max(h, atom_cost_[g]);
  }
  return HeuristicValue(h);
}

// ---------------------------------------------------------------------------
// LM-cut

LmCut::LmCut(const GroundTask& task) {
  const auto n = static_cast<std::uint32_t>(task.num_atoms());
  true_atom_ = n;
  goal_atom_ = n + 1;
  for (const auto& a : task.actions) {
    RelaxedAction r;
    r.pre.assign(a.pre.begin(), a.pre.end());
    if (r.pre.empty()) r.pre.push_back(true_atom_);
    r.eff.assign(a.add.begin(), a.add.end());
    r.base_cost = a.cost;
    actions_.push_back(std::move(r));
  }
  RelaxedAction goal;
  goal.pre.assign(task.goal.begin(), task.goal.end());
  if (goal.pre.empty()) goal.pre.push_back(true_atom_);
  goal.eff.push_back(goal_atom_);
  actions_.push_back(std::move(goal));

  precondition_of_.resize(n + 2);
  for (std::uint32_t a = 0; a < actions_.size(); ++a) {
    for (auto p : actions_[a].pre) precondition_of_[p].push_back(a);
  }
  cost_.resize(actions_.size());
  hmax_.resize(n + 2);
  unsatisfied_.resize(actions_.size());
  supporter_.resize(actions_.size());
  goal_zone_.resize(n + 2);
  reached_.resize(n + 2);
}

bool LmCut::compute_hmax(const State& s) {
  std::fill(hmax_.begin(), hmax_.end(), kInf);
  MinQueue queue;
  hmax_[true_atom_] = 0;
  queue.emplace(0, true_atom_);
  for (AtomId p : s.atoms()) {
    hmax_[p] = 0;
    queue.emplace(0, p);
  }
  for (std::size_t a = 0; a < actions_.size(); ++a) {
    unsatisfied_[a] = static_cast<int>(actions_[a].pre.size());
  }
  while (!queue.empty()) {
    const auto [c, p] = queue.top();
    queue.pop();
    if (c != hmax_[p]) continue;
    for (auto a : precondition_of_[p]) {
      if (--unsatisfied_[a] != 0) continue;
      const std::int64_t value = c + cost_[a];
      for (auto e : actions_[a].eff) {
        if (value < hmax_[e]) {
          hmax_[e] = value;
          queue.emplace(value, e);
        }
      }
    }
  }
  for (std::size_t a = 0; a < actions_.size(); ++a) {
    if (unsatisfied_[a] != 0) continue;
    std::uint32_t best = actions_[a].pre.front();
    for (auto p : actions_[a].pre) {
      if (hmax_[p] > hmax_[best] || (hmax_[p] == hmax_[best] && p < best)) best = p;
    }
    supporter_[a] = best;
  }
  return hmax_[goal_atom_] != kInf;
}

HeuristicValue LmCut::operator()(const State& s) {
  for (std::size_t a = 0; a < actions_.size(); ++a) cost_[a] = actions_[a].base_cost;
  if (!compute_hmax(s)) return HeuristicValue::infinity();

  std::vector<std::vector<std::uint32_t>> achievers(hmax_.size());
  for (std::uint32_t a = 0; a < actions_.size(); ++a) {
    for (auto e : actions_[a].eff) achievers[e].push_back(a);
  }

  std::int64_t h = 0;
  std::vector<std::uint32_t> stack;
  std::vector<std::uint32_t> cut;
  std::vector<char> in_cut(actions_.size());
  while (hmax_[goal_atom_] != 0) {
    // Atoms with a zero-cost justification path to the goal.
    std::fill(goal_zone_.begin(), goal_zone_.end(), 0);
    goal_zone_[goal_atom_] = 1;
    stack.assign(1, goal_atom_);
    while (!stack.empty()) {
      const auto e = stack.back();
      stack.pop_back();
      for (auto a : achievers[e]) {
        if (unsatisfied_[a] != 0 || cost_[a] != 0) continue;
        const auto p = supporter_[a];
        if (!goal_zone_[p]) {
          goal_zone_[p] = 1;
          stack.push_back(p);
        }
      }
    }
    // Forward from the state without entering the goal zone; edges into the
    // zone form the cut.
    std::fill(reached_.begin(), reached_.end(), 0);
    std::fill(in_cut.begin(), in_cut.end(), 0);
    cut.clear();
    stack.clear();
    reached_[true_atom_] = 1;
    stack.push_back(true_atom_);
    for (AtomId p : s.atoms()) {
      if (!reached_[p]) {
        reached_[p] = 1;
        stack.push_back(p);
      }
    }
    while (!stack.empty()) {
      const auto p = stack.back();
      stack.pop_back();
      for (auto a : precondition_of_[p]) {
        if (unsatisfied_[a] != 0 || supporter_[a] != p) continue;
        for (auto e : actions_[a].eff) {
          if (goal_zone_[e]) {
            if (!in_cut[a]) {
              in_cut[a] = 1;
              cut.push_back(a);
            }
          } else if (!reached_[e]) {
            reached_[e] = 1;
            stack.push_back(e);
          }
        }
      }
    }
    std::int64_t m = kInf;
    for (auto a : cut) m = std::min(m, cost_[a]);
    if (cut.empty() || m <= 0) break;  // unreachable for well-formed inputs
    h += m;
    for (auto a : cut) cost_[a] -= m;
    compute_hmax(s);
  }
  return HeuristicValue(h);
}

// ---------------------------------------------------------------------------

Heuristic::Heuristic(const GroundTask& task, HeuristicKind kind)
    : task_(task), kind_(kind), hmax_(task), lmcut_(task) {}

HeuristicValue Heuristic::operator()(const State& s) {
  switch (kind_) {
    case HeuristicKind::HMax:
      return hmax_(s);
    case HeuristicKind::LmCut:
      return lmcut_(s);
    case HeuristicKind::Blind:
      break;
  }
  return HeuristicValue(0);
}

const char* to_string(HeuristicKind k) {
  switch (k) {
    case HeuristicKind::Blind:
      return "blind";
    case HeuristicKind::HMax:
      return "hmax";
    case HeuristicKind::LmCut:
      return "lmcut";
  }
  return "?";
}

HeuristicKind parse_heuristic_kind(std::string_view s) {
  if (s == "blind") return HeuristicKind::Blind;
  if (s == "hmax") return HeuristicKind::HMax;
  if (s == "lmcut") return HeuristicKind::LmCut;
  throw ConfigError("unknown heuristic '" + std::string(s) + "'");
}

HeuristicValue optimal_cost_oracle(const GroundTask& task, const State& s, std::size_t max_expansions) {
  std::unordered_map<State, std::int64_t, StateHash> best;
  std::vector<State> states;
  using Entry = std::pair<std::int64_t, std::size_t>;
  std::priority_queue<Entry, std::vector<Entry>, std::greater<>> open;
  best.emplace(s, 0);
  states.push_back(s);
  open.emplace(0, 0);
  std::size_t expanded = 0;
  while (!open.empty()) {
    const auto [g, idx] = open.top();
    open.pop();
    const State cur = states[idx];
    if (best.at(cur) != g) continue;
    if (is_goal(task, cur)) return HeuristicValue(g);
    if (++expanded > max_expansions) {
      throw BudgetExceeded("optimal-cost oracle exceeded " + std::to_string(max_expansions) + " expansions");
    }
    for (ActionId a : applicable_actions(task, cur)) {
      State next = apply(cur, task.actions[a]);
      const std::int64_t ng = g + task.actions[a].cost;
      auto it = best.find(next);
      if (it == best.end() || ng < it->second) {
        best[next] = ng;
        states.push_back(std::move(next));
        open.emplace(ng, states.size() - 1);
      }
    }
  }
  return HeuristicValue::infinity();
}

}  // namespace qvp
