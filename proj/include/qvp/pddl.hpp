#pragma once

// STRIPS subset of PDDL: :strips, :typing and :action-costs.

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "qvp/common.hpp"

namespace qvp {

/// Parse or type-check failure. what() carries a `file:line:col: ` prefix.
class PddlError : public Error {
 public:
  PddlError(std::string source, int line, int column, const std::string& message);

  const std::string& source() const { return source_; }
  int line() const { return line_; }
  int column() const { return column_; }
  const std::string& message() const { return message_; }

 private:
  std::string source_;
  int line_;
  int column_;
  std::string message_;
};

/// Construct outside the supported subset (ADL, quantifiers, numeric fluents, ...).
class UnsupportedFeature : public PddlError {
 public:
  using PddlError::PddlError;
};

struct TypedName {
  std::string name;
  std::string type = "object";

  friend bool operator==(const TypedName&, const TypedName&) = default;
};

struct Predicate {
  std::string name;
  std::vector<TypedName> parameters;
  /// Declaration order; stable identifier used by the graph encodings.
  int id = 0;

  int arity() const { return static_cast<int>(parameters.size()); }
  friend bool operator==(const Predicate&, const Predicate&) = default;
};

/// Argument of a lifted atom: either a schema parameter or a domain constant.
struct Term {
  enum class Kind { Parameter, Constant };
  Kind kind = Kind::Parameter;
  int index = 0;

  friend bool operator==(const Term&, const Term&) = default;
};

struct LiftedAtom {
  int predicate = 0;
  std::vector<Term> args;

  friend bool operator==(const LiftedAtom&, const LiftedAtom&) = default;
};

struct ActionSchema {
  std::string name;
  std::vector<TypedName> parameters;
  std::vector<LiftedAtom> precondition;
  std::vector<LiftedAtom> add;
  std::vector<LiftedAtom> del;
  int cost = 1;

  int arity() const { return static_cast<int>(parameters.size()); }
  friend bool operator==(const ActionSchema&, const ActionSchema&) = default;
};

struct Domain {
  std::string name;
  std::vector<std::string> requirements;
  /// type -> parent type, in declaration order. "object" is the implicit root.
  std::vector<std::pair<std::string, std::string>> types;
  std::vector<TypedName> constants;
  std::vector<Predicate> predicates;
  std::vector<ActionSchema> schemas;
  bool action_costs = false;

  std::optional<int> find_predicate(std::string_view name) const;
  std::optional<int> find_constant(std::string_view name) const;
  std::optional<int> find_schema(std::string_view name) const;
  /// True if `type` equals `ancestor` or derives from it.
  bool is_subtype(std::string_view type, std::string_view ancestor) const;
  bool has_type(std::string_view type) const;

  friend bool operator==(const Domain&, const Domain&) = default;
};

/// Ground atom referencing objects by name (constants or instance objects).
struct NamedAtom {
  int predicate = 0;
  std::vector<std::string> args;

  friend bool operator==(const NamedAtom&, const NamedAtom&) = default;
  friend auto operator<=>(const NamedAtom&, const NamedAtom&) = default;
};

struct Instance {
  std::string name;
  std::string domain_name;
  std::vector<TypedName> objects;
  std::vector<NamedAtom> init;
  std::vector<NamedAtom> goal;

  friend bool operator==(const Instance&, const Instance&) = default;
};

Domain parse_domain(std::string_view text, const std::string& source = "<domain>");
Instance parse_instance(std::string_view text, const Domain& domain,
                        const std::string& source = "<problem>");

/// Canonical PDDL text; parse(to_pddl(x)) == x.
std::string to_pddl(const Domain& domain);
std::string to_pddl(const Instance& instance, const Domain& domain);

/// `name(a,b,...)` form used in datasets and reports.
std::string atom_string(const Domain& domain, const NamedAtom& atom);

/// FNV-1a over the canonical domain text.
std::uint64_t domain_fingerprint(const Domain& domain);

std::string read_file(const std::string& path);

}  // namespace qvp
