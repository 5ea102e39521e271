#pragma once

// Graph views of planning states: object encoding (OE), object-atom encoding
// (OAE) and the raw relational structure consumed by the R-GNN.

#include <cstdint>
#include <string>
#include <vector>

#include "qvp/task.hpp"

namespace qvp {

enum class Architecture { RGNN, OE, OAE };
enum class Head { V, Q };

const char* to_string(Architecture a);
const char* to_string(Head h);
Architecture parse_architecture(std::string_view s);
Head parse_head(std::string_view s);

/// Base predicates, their goal versions, then one action predicate per schema.
/// Identifiers are positions in this order.
struct PredicateTable {
  std::vector<std::string> names;
  std::vector<int> arities;
  int num_base = 0;
  int num_schemas = 0;
  std::uint64_t fingerprint = 0;  // of the domain the table was built from

  int size() const { return static_cast<int>(names.size()); }
  int goal_id(int base) const { return num_base + base; }
  int action_id(int schema) const { return 2 * num_base + schema; }
  bool is_action(int id) const { return id >= 2 * num_base; }
  /// Largest argument count of any table entry (at least 1).
  int max_arity() const;

  friend bool operator==(const PredicateTable&, const PredicateTable&) = default;
};

PredicateTable make_predicate_table(const Domain& domain);

struct RelationalAtom {
  int predicate = 0;
  std::vector<int> args;  // node indices

  friend bool operator==(const RelationalAtom&, const RelationalAtom&) = default;
};

/// A state as atoms over nodes. Nodes [0, num_task_objects) are the task's
/// objects; action objects, if any, follow.
struct RelationalState {
  int num_task_objects = 0;
  std::vector<RelationalAtom> atoms;
  std::vector<ActionId> actions;  // action object i is node num_task_objects + i

  int num_objects() const { return num_task_objects + static_cast<int>(actions.size()); }
};

RelationalState relational_state(const GroundTask& task, const State& s);
/// Adds P_G(args) for every goal atom P(args).
void extend_with_goal(const GroundTask& task, const PredicateTable& table, RelationalState& rs);
/// Adds an object o_a and the atom P_A(o_a, args...) per action.
void extend_with_actions(const GroundTask& task, const PredicateTable& table, RelationalState& rs,
                         const std::vector<ActionId>& actions);
/// Nullary atoms become unary atoms over every task object.
void expand_nullary(RelationalState& rs);

struct Edge {
  int u = 0;
  int v = 0;
  int label = 0;

  friend bool operator==(const Edge&, const Edge&) = default;
};

struct EncodedState {
  Architecture variant = Architecture::RGNN;
  int num_nodes = 0;
  int num_objects = 0;            // object nodes are [0, num_objects)
  std::vector<int> action_nodes;  // aligned with `actions`
  std::vector<ActionId> actions;
  // OE / OAE
  int feature_dim = 0;
  std::vector<std::pair<int, int>> features;  // (node, feature) pairs that are 1
  std::vector<Edge> edges;                    // undirected, stored once
  // RGNN
  std::vector<RelationalAtom> atoms;

  /// Stable text form used by fixtures and --debug output.
  std::string dump() const;
};

EncodedState encode_oe(const PredicateTable& table, const RelationalState& rs);
EncodedState encode_oae(const PredicateTable& table, const RelationalState& rs);
EncodedState encode_rgnn(const PredicateTable& table, const RelationalState& rs);
EncodedState encode(Architecture arch, const PredicateTable& table, const RelationalState& rs);

/// Goal-extended state, with all applicable actions as objects for the Q head.
EncodedState encode_state(Architecture arch, Head head, const PredicateTable& table, const GroundTask& task,
                          const State& s);
/// Same, with an explicit action list (used when the caller already knows Act(s)).
EncodedState encode_state(Architecture arch, Head head, const PredicateTable& table, const GroundTask& task,
                          const State& s, const std::vector<ActionId>& actions);

}  // namespace qvp
