#pragma once

// Grounded state model: atom universe, ground actions, initial state, goal.

#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "qvp/pddl.hpp"

namespace qvp {

using AtomId = std::uint32_t;
using ActionId = std::uint32_t;

/// Set of true atoms, stored sorted. Equal states compare and hash equal.
class State {
 public:
  State() = default;
  /// Sorts and deduplicates.
  explicit State(std::vector<AtomId> atoms);

  std::span<const AtomId> atoms() const { return atoms_; }
  std::size_t size() const { return atoms_.size(); }
  bool contains(AtomId a) const;
  std::size_t hash() const { return hash_; }

  friend bool operator==(const State& a, const State& b) {
    return a.hash_ == b.hash_ && a.atoms_ == b.atoms_;
  }

 private:
  std::vector<AtomId> atoms_;
  std::size_t hash_ = 0;
};

struct StateHash {
  std::size_t operator()(const State& s) const { return s.hash(); }
};

struct GroundAtom {
  int predicate = 0;
  std::vector<int> args;  // object indices
};

struct GroundAction {
  int schema = 0;
  std::vector<int> binding;  // object indices, one per schema parameter
  std::vector<AtomId> pre;
  std::vector<AtomId> add;
  std::vector<AtomId> del;
  int cost = 1;
};

struct GroundTask {
  std::string domain_name;
  std::string instance_name;
  std::vector<std::string> predicate_names;
  std::vector<int> predicate_arities;
  std::vector<std::string> schema_names;
  std::vector<int> schema_arities;

  std::vector<std::string> objects;  // domain constants first, then instance objects
  std::vector<std::string> object_types;

  std::vector<GroundAtom> atoms;
  std::vector<GroundAction> actions;
  State init;
  std::vector<AtomId> goal;  // sorted

  std::size_t num_atoms() const { return atoms.size(); }
  std::size_t num_actions() const { return actions.size(); }

  /// `name(a,b)` forms used in datasets.
  std::string atom_name(AtomId a) const;
  std::string action_name(ActionId a) const;
  /// `(name a b)` form used in plan files.
  std::string action_pddl(ActionId a) const;

  std::optional<AtomId> find_atom(std::string_view canonical_name) const;
  std::optional<ActionId> find_action(std::string_view canonical_name) const;

  /// Builds the name lookup tables; called by ground().
  void index_names();

 private:
  std::unordered_map<std::string, AtomId> atom_index_;
  std::unordered_map<std::string, ActionId> action_index_;
};

/// Naive type-consistent instantiation with static-precondition pruning.
/// Ground actions that can never change a state (every deleted atom is re-added
/// and every added atom is already required) are dropped.
GroundTask ground(const Domain& domain, const Instance& instance);

}  // namespace qvp
