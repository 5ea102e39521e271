#pragma once

// Greedy execution of learned value functions:
//   V: argmin_a cost(a) + V(s'),   Q: argmin_a Q(s, a).

#include <iosfwd>
#include <vector>

#include "qvp/model.hpp"
#include "qvp/statespace.hpp"

namespace qvp {

/// What a policy needs from a value function. Implemented by trained models
/// and by test stand-ins.
class Estimator {
 public:
  virtual ~Estimator() = default;
  virtual Head head() const = 0;
  /// V head: one value per state.
  virtual std::vector<double> state_values(const GroundTask& task, const std::vector<State>& states,
                                           ForwardStats& stats) const = 0;
  /// Q head: one value per action, all evaluated in state s.
  virtual std::vector<double> action_values(const GroundTask& task, const State& s,
                                            const std::vector<ActionId>& actions, ForwardStats& stats) const = 0;
};

class ModelEstimator : public Estimator {
 public:
  /// The model must have been built for the task's domain.
  explicit ModelEstimator(const Model& model) : model_(model) {}
  Head head() const override { return model_.config().head; }
  std::vector<double> state_values(const GroundTask& task, const std::vector<State>& states,
                                   ForwardStats& stats) const override;
  std::vector<double> action_values(const GroundTask& task, const State& s, const std::vector<ActionId>& actions,
                                    ForwardStats& stats) const override;

 private:
  const Model& model_;
};

enum class Outcome { Solved, StepLimit, DeadEnd, AllSuccessorsVisited };

const char* to_string(Outcome o);

struct PolicyConfig {
  int step_limit = 100;
  bool forbid_revisit = true;
};

/// 100 + n, n the instance size (object count).
int default_step_limit(int size);

struct RunResult {
  Outcome outcome = Outcome::StepLimit;
  std::vector<State> trajectory;  // s0 .. sT
  std::vector<ActionId> actions;
  std::int64_t cost = 0;
  ForwardStats stats;

  std::size_t length() const { return actions.size(); }
  bool solved() const { return outcome == Outcome::Solved; }
};

/// Lowest-index candidate minimizing cost(a) + V(s'). `successors` aligned with
/// `candidates`. Candidates must be non-empty.
ActionId select_action_v(const Estimator& est, const GroundTask& task, const std::vector<ActionId>& candidates,
                         const std::vector<State>& successors, ForwardStats& stats);
/// Lowest-index candidate minimizing Q(s, a). The state is encoded once with
/// all of `applicable`; `candidates` must be a subset.
ActionId select_action_q(const Estimator& est, const GroundTask& task, const State& s,
                         const std::vector<ActionId>& applicable, const std::vector<ActionId>& candidates,
                         ForwardStats& stats);

RunResult run_policy(const Estimator& est, const GroundTask& task, const PolicyConfig& cfg);

/// One `(name arg ...)` line per action followed by a cost comment.
void write_plan(const GroundTask& task, const std::vector<ActionId>& actions, std::ostream& out);
/// Reads a plan file back into action ids; throws on unknown actions.
std::vector<ActionId> read_plan(const GroundTask& task, std::istream& in);

}  // namespace qvp
