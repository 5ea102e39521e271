#pragma once

#include <cstdint>
#include <vector>

#include "qvp/common.hpp"
#include "qvp/task.hpp"

namespace qvp {

/// Raised by apply() when the action's precondition does not hold.
class InapplicableAction : public Error {
 public:
  using Error::Error;
};

/// Actions whose preconditions hold in `s`, in the task's action order.
std::vector<ActionId> applicable_actions(const GroundTask& task, const State& s);

/// (s \ del) ∪ add.
State apply(const GroundTask& task, const State& s, ActionId a);
State apply(const State& s, const GroundAction& a);

bool is_goal(const GroundTask& task, const State& s);

/// Delete-relaxation h^max. One instance per thread; the task must outlive it.
class HMax {
 public:
  explicit HMax(const GroundTask& task);
  HeuristicValue operator()(const State& s);

 private:
  const GroundTask& task_;
  std::vector<std::vector<ActionId>> precondition_of_;
  std::vector<std::int64_t> atom_cost_;
  std::vector<int> unsatisfied_;
  std::vector<std::int64_t> action_cost_;
};

/// Landmark-cut heuristic. Supporter ties go to the lowest atom index.
class LmCut {
 public:
  explicit LmCut(const GroundTask& task);
  HeuristicValue operator()(const State& s);

 private:
  struct RelaxedAction {
    std::vector<std::uint32_t> pre;  // never empty; the artificial "true" atom stands in
    std::vector<std::uint32_t> eff;
    std::int64_t base_cost = 0;
  };

  bool compute_hmax(const State& s);

  std::uint32_t true_atom_ = 0;
  std::uint32_t goal_atom_ = 0;
  std::vector<RelaxedAction> actions_;
  std::vector<std::vector<std::uint32_t>> precondition_of_;
  // Per-call scratch.
  std::vector<std::int64_t> cost_;
  std::vector<std::int64_t> hmax_;
  std::vector<int> unsatisfied_;
  std::vector<std::uint32_t> supporter_;
  std::vector<char> goal_zone_;
  std::vector<char> reached_;
};

enum class HeuristicKind { Blind, HMax, LmCut };

/// Uniform dispatch over the admissible estimators used by the teacher.
class Heuristic {
 public:
  Heuristic(const GroundTask& task, HeuristicKind kind);
  HeuristicValue operator()(const State& s);
  HeuristicKind kind() const { return kind_; }

 private:
  const GroundTask& task_;
  HeuristicKind kind_;
  HMax hmax_;
  LmCut lmcut_;
};

const char* to_string(HeuristicKind k);
HeuristicKind parse_heuristic_kind(std::string_view s);

/// Exact h*(s) by uniform-cost search. Throws BudgetExceeded once more than
/// `max_expansions` states have been expanded.
HeuristicValue optimal_cost_oracle(const GroundTask& task, const State& s,
                                   std::size_t max_expansions = 1'000'000);

}  // namespace qvp
