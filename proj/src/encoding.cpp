#include "qvp/encoding.hpp"

#include <algorithm>
#include <set>
#include <sstream>

#include "qvp/statespace.hpp"

namespace qvp {

const char* to_string(Architecture a) {
  switch (a) {
    case Architecture::RGNN:
      return "rgnn";
    case Architecture::OE:
      return "oe";
    case Architecture::OAE:
      return "oae";
  }
  return "?";
}

const char* to_string(Head h) { return h == Head::V ? "v" : "q"; }

Architecture parse_architecture(std::string_view s) {
  if (s == "rgnn") return Architecture::RGNN;
  if (s == "oe") return Architecture::OE;
  if (s == "oae") return Architecture::OAE;
  throw ConfigError("unknown architecture '" + std::string(s) + "' (expected rgnn, oe or oae)");
}

Head parse_head(std::string_view s) {
  if (s == "v") return Head::V;
  if (s == "q") return Head::Q;
  throw ConfigError("unknown head '" + std::string(s) + "' (expected v or q)");
}

int PredicateTable::max_arity() const {
  int m = 1;
  for (int a : arities) m = std::max(m, a);
  return m;
}

PredicateTable make_predicate_table(const Domain& domain) {
  PredicateTable t;
  t.num_base = static_cast<int>(domain.predicates.size());
  t.num_schemas = static_cast<int>(domain.schemas.size());
  for (const auto& p : domain.predicates) {
    t.names.push_back(p.name);
    t.arities.push_back(static_cast<int>(p.parameters.size()));
  }
  for (const auto& p : domain.predicates) {
    t.names.push_back(p.name + "_G");
    t.arities.push_back(static_cast<int>(p.parameters.size()));
  }
  for (const auto& s : domain.schemas) {
    t.names.push_back(s.name + "_A");
    t.arities.push_back(1 + s.arity());
  }
  t.fingerprint = domain_fingerprint(domain);
  return t;
}

RelationalState relational_state(const GroundTask& task, const State& s) {
  RelationalState rs;
  rs.num_task_objects = static_cast<int>(task.objects.size());
  rs.atoms.reserve(s.size() + task.goal.size());
  for (AtomId a : s.atoms()) rs.atoms.push_back({task.atoms[a].predicate, task.atoms[a].args});
  return rs;
}

void extend_with_goal(const GroundTask& task, const PredicateTable& table, RelationalState& rs) {
  for (AtomId g : task.goal) rs.atoms.push_back({table.goal_id(task.atoms[g].predicate), task.atoms[g].args});
}

void extend_with_actions(const GroundTask& task, const PredicateTable& table, RelationalState& rs,
                         const std::vector<ActionId>& actions) {
  for (ActionId a : actions) {
    const auto& ga = task.actions[a];
    RelationalAtom atom;
    atom.predicate = table.action_id(ga.schema);
    atom.args.push_back(rs.num_objects());
    atom.args.insert(atom.args.end(), ga.binding.begin(), ga.binding.end());
    rs.actions.push_back(a);
    rs.atoms.push_back(std::move(atom));
  }
}

void expand_nullary(RelationalState& rs) {
  std::vector<RelationalAtom> out;
  out.reserve(rs.atoms.size());
  for (auto& atom : rs.atoms) {
    if (!atom.args.empty()) {
      out.push_back(std::move(atom));
      continue;
    }
    for (int o = 0; o < rs.num_task_objects; ++o) out.push_back({atom.predicate, {o}});
  }
  rs.atoms = std::move(out);
}

namespace {

void check_atoms(const PredicateTable& table, const RelationalState& rs) {
  for (const auto& atom : rs.atoms) {
    if (atom.predicate < 0 || atom.predicate >= table.size()) throw Error("encoding: predicate id out of range");
    if (atom.args.empty()) throw Error("encoding: nullary atoms must be expanded first");
    if (static_cast<int>(atom.args.size()) != std::max(1, table.arities[atom.predicate])) {
      throw Error("encoding: arity mismatch for " + table.names[atom.predicate]);
    }
  }
}

EncodedState skeleton(Architecture variant, const PredicateTable& table, const RelationalState& rs) {
  check_atoms(table, rs);
  EncodedState e;
  e.variant = variant;
  e.num_objects = rs.num_objects();
  e.num_nodes = e.num_objects;
  e.actions = rs.actions;
  for (std::size_t i = 0; i < rs.actions.size(); ++i) e.action_nodes.push_back(rs.num_task_objects + static_cast<int>(i));
  e.feature_dim = table.size();
  return e;
}

void unary_features(const RelationalState& rs, EncodedState& e) {
  std::set<std::pair<int, int>> f;
  for (const auto& atom : rs.atoms) {
    if (atom.args.size() == 1) f.emplace(atom.args[0], atom.predicate);
  }
  e.features.assign(f.begin(), f.end());
}

}  // namespace

EncodedState encode_oe(const PredicateTable& table, const RelationalState& rs) {
  EncodedState e = skeleton(Architecture::OE, table, rs);
  unary_features(rs, e);
  std::set<std::tuple<int, int, int>> edges;
  for (const auto& atom : rs.atoms) {
    for (std::size_t i = 0; i < atom.args.size(); ++i) {
      for (std::size_t j = i + 1; j < atom.args.size(); ++j) {
        int u = atom.args[i], v = atom.args[j];
        if (u == v) continue;
        if (u > v) std::swap(u, v);
        edges.emplace(u, v, atom.predicate);
      }
    }
  }
  for (const auto& [u, v, label] : edges) e.edges.push_back({u, v, label});
  return e;
}

EncodedState encode_oae(const PredicateTable& table, const RelationalState& rs) {
  EncodedState e = skeleton(Architecture::OAE, table, rs);
  unary_features(rs, e);
  for (const auto& atom : rs.atoms) {
    const int node = e.num_nodes++;
    e.features.emplace_back(node, atom.predicate);
    for (std::size_t i = 0; i < atom.args.size(); ++i) e.edges.push_back({atom.args[i], node, static_cast<int>(i)});
  }
  return e;
}

EncodedState encode_rgnn(const PredicateTable& table, const RelationalState& rs) {
  EncodedState e = skeleton(Architecture::RGNN, table, rs);
  e.atoms = rs.atoms;
  return e;
}

EncodedState encode(Architecture arch, const PredicateTable& table, const RelationalState& rs) {
  switch (arch) {
    case Architecture::OE:
      return encode_oe(table, rs);
    case Architecture::OAE:
      return encode_oae(table, rs);
    case Architecture::RGNN:
      break;
  }
  return encode_rgnn(table, rs);
}

EncodedState encode_state(Architecture arch, Head head, const PredicateTable& table, const GroundTask& task,
                          const State& s, const std::vector<ActionId>& actions) {
  RelationalState rs = relational_state(task, s);
  extend_with_goal(task, table, rs);
  if (head == Head::Q) extend_with_actions(task, table, rs, actions);
  expand_nullary(rs);
  return encode(arch, table, rs);
}

EncodedState encode_state(Architecture arch, Head head, const PredicateTable& table, const GroundTask& task,
                          const State& s) {
  if (head == Head::V) return encode_state(arch, head, table, task, s, {});
  return encode_state(arch, head, table, task, s, applicable_actions(task, s));
}

std::string EncodedState::dump() const {
  std::ostringstream os;
  os << to_string(variant) << " nodes=" << num_nodes << " objects=" << num_objects << '\n';
  for (std::size_t i = 0; i < actions.size(); ++i) os << "action " << actions[i] << " -> " << action_nodes[i] << '\n';
  for (const auto& [n, f] : features) os << "feature " << n << ' ' << f << '\n';
  for (const auto& ed : edges) os << "edge " << ed.u << ' ' << ed.v << ' ' << ed.label << '\n';
  for (const auto& a : atoms) {
    os << "atom " << a.predicate;
    for (int x : a.args) os << ' ' << x;
    os << '\n';
  }
  return os.str();
}

}  // namespace qvp
