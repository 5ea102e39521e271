#pragma once

#include <optional>
#include <vector>

#include "qvp/statespace.hpp"

namespace qvp {

struct Plan {
  std::vector<ActionId> actions;
  std::vector<State> trajectory;  // s0 .. sT, one more than actions
  std::int64_t cost = 0;
};

struct SearchStats {
  std::size_t expanded = 0;
  std::size_t generated = 0;
};

/// A* with re-opening; optimal for any admissible heuristic. Ties on f go to
/// lower g, then insertion order. Returns nullopt if no plan exists.
/// Throws BudgetExceeded after `max_expansions` expansions.
std::optional<Plan> astar_optimal(const GroundTask& task, HeuristicKind heuristic,
                                  std::size_t max_expansions = 1'000'000,
                                  SearchStats* stats = nullptr);

/// Re-executes the plan from the task's initial state; true iff every action is
/// applicable, the final state satisfies the goal and the costs add up.
bool validate_plan(const GroundTask& task, const std::vector<ActionId>& actions,
                   std::int64_t* cost = nullptr);

}  // namespace qvp
