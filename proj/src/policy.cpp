#include "qvp/policy.hpp"

#include <algorithm>
#include <cctype>
#include <istream>
#include <ostream>
#include <sstream>
#include <unordered_set>

namespace qvp {

std::vector<double> ModelEstimator::state_values(const GroundTask& task, const std::vector<State>& states,
                                                 ForwardStats& stats) const {
  std::vector<EncodedState> encoded;
  encoded.reserve(states.size());
  for (const auto& s : states) encoded.push_back(encode_state(model_.config().arch, Head::V, model_.table(), task, s));
  std::vector<const EncodedState*> ptrs;
  for (const auto& e : encoded) ptrs.push_back(&e);
  return model_.predict(ptrs, &stats);
}

std::vector<double> ModelEstimator::action_values(const GroundTask& task, const State& s,
                                                  const std::vector<ActionId>& actions, ForwardStats& stats) const {
  const EncodedState e = encode_state(model_.config().arch, Head::Q, model_.table(), task, s, actions);
  return model_.predict({&e}, &stats);
}

const char* to_string(Outcome o) {
  switch (o) {
    case Outcome::Solved:
      return "solved";
    case Outcome::StepLimit:
      return "step-limit";
    case Outcome::DeadEnd:
      return "dead-end";
    case Outcome::AllSuccessorsVisited:
      return "all-successors-visited";
  }
  return "?";
}

int default_step_limit(int size) { return 100 + size; }

ActionId select_action_v(const Estimator& est, const GroundTask& task, const std::vector<ActionId>& candidates,
                         const std::vector<State>& successors, ForwardStats& stats) {
  if (candidates.empty()) throw Error("select_action_v: no candidate actions");
  const auto values = est.state_values(task, successors, stats);
  std::size_t best = 0;
  double best_value = 0.0;
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    const double v = static_cast<double>(task.actions[candidates[i]].cost) + values[i];
    if (i == 0 || v < best_value) {
      best = i;
      best_value = v;
    }
  }
  return candidates[best];
}

ActionId select_action_q(const Estimator& est, const GroundTask& task, const State& s,
                         const std::vector<ActionId>& applicable, const std::vector<ActionId>& candidates,
                         ForwardStats& stats) {
  if (candidates.empty()) throw Error("select_action_q: no candidate actions");
  const auto q = est.action_values(task, s, applicable, stats);
  std::optional<ActionId> best;
  double best_value = 0.0;
  std::size_t c = 0;
  // Both lists are in task order, so one merge pass finds each candidate's row.
  for (std::size_t i = 0; i < applicable.size() && c < candidates.size(); ++i) {
    if (applicable[i] != candidates[c]) continue;
    if (!best || q[i] < best_value) {
      best = applicable[i];
      best_value = q[i];
    }
    ++c;
  }
  if (c != candidates.size()) throw Error("select_action_q: candidate not applicable");
  return *best;
}

RunResult run_policy(const Estimator& est, const GroundTask& task, const PolicyConfig& cfg) {
  if (cfg.step_limit < 1) throw ConfigError("step limit must be at least 1");
  RunResult r;
  std::unordered_set<State, StateHash> visited;
  State s = task.init;
  r.trajectory.push_back(s);
  visited.insert(s);
  while (true) {
    if (is_goal(task, s)) {
      r.outcome = Outcome::Solved;
      break;
    }
    if (static_cast<int>(r.actions.size()) >= cfg.step_limit) {
      r.outcome = Outcome::StepLimit;
      break;
    }
    const auto applicable = applicable_actions(task, s);
    if (applicable.empty()) {
      r.outcome = Outcome::DeadEnd;
      break;
    }
    std::vector<ActionId> candidates;
    std::vector<State> successors;
    for (ActionId a : applicable) {
      State t = apply(s, task.actions[a]);
      if (cfg.forbid_revisit && visited.count(t)) continue;
      candidates.push_back(a);
      successors.push_back(std::move(t));
    }
    if (candidates.empty()) {
      r.outcome = Outcome::AllSuccessorsVisited;
      break;
    }
    const ActionId a = est.head() == Head::V ? select_action_v(est, task, candidates, successors, r.stats)
                                             : select_action_q(est, task, s, applicable, candidates, r.stats);
    const auto pos = std::find(candidates.begin(), candidates.end(), a) - candidates.begin();
    s = std::move(successors[pos]);
    r.actions.push_back(a);
    r.cost += task.actions[a].cost;
    r.trajectory.push_back(s);
    visited.insert(s);
  }
  return r;
}

void write_plan(const GroundTask& task, const std::vector<ActionId>& actions, std::ostream& out) {
  std::int64_t cost = 0;
  for (ActionId a : actions) {
    out << task.action_pddl(a) << '\n';
    cost += task.actions[a].cost;
  }
  out << "; cost = " << cost << '\n';
}

std::vector<ActionId> read_plan(const GroundTask& task, std::istream& in) {
  std::vector<ActionId> plan;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (auto c = line.find(';'); c != std::string::npos) line.erase(c);
    std::string lowered;
    for (char ch : line) lowered += static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
    const auto open = lowered.find('(');
    if (open == std::string::npos) continue;
    const auto close = lowered.find(')', open);
    if (close == std::string::npos) throw Error("plan line " + std::to_string(line_no) + ": missing ')'");
    std::istringstream words(lowered.substr(open + 1, close - open - 1));
    std::string name, arg;
    words >> name;
    std::string canonical = name + "(";
    bool first = true;
    while (words >> arg) {
      if (!first) canonical += ',';
      canonical += arg;
      first = false;
    }
    canonical += ')';
    auto id = task.find_action(canonical);
    if (!id) throw Error("plan line " + std::to_string(line_no) + ": unknown action " + canonical);
    plan.push_back(*id);
  }
  return plan;
}

}  // namespace qvp
