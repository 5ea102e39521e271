#include "qvp/task.hpp"

#include <algorithm>
#include <map>
#include <set>

namespace qvp {

State::State(std::vector<AtomId> atoms) : atoms_(std::move(atoms)) {
  std::sort(atoms_.begin(), atoms_.end());
  atoms_.erase(std::unique(atoms_.begin(), atoms_.end()), atoms_.end());
  std::uint64_t h = 0x9e3779b97f4a7c15ULL ^ atoms_.size();
  for (AtomId a : atoms_) h = mix_seed(h ^ a);
  hash_ = static_cast<std::size_t>(h);
}

bool State::contains(AtomId a) const { return std::binary_search(atoms_.begin(), atoms_.end(), a); }

namespace {

std::string canonical(const std::string& name, const std::vector<int>& args,
                      const std::vector<std::string>& objects) {
  std::string s = name + "(";
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (i) s += ',';
    s += objects[args[i]];
  }
  return s + ")";
}

using AtomKey = std::vector<int>;  // predicate followed by argument object indices

AtomKey key_of(int predicate, const std::vector<int>& args) {
  AtomKey k;
  k.reserve(args.size() + 1);
  k.push_back(predicate);
  k.insert(k.end(), args.begin(), args.end());
  return k;
}

struct LiftedAction {
  std::vector<std::vector<AtomKey>> pre_add_del;
  int schema = 0;
  std::vector<int> binding;
};

void sort_unique(std::vector<AtomId>& v) {
  std::sort(v.begin(), v.end());
  v.erase(std::unique(v.begin(), v.end()), v.end());
}

}  // namespace

std::string GroundTask::atom_name(AtomId a) const {
  return canonical(predicate_names[atoms[a].predicate], atoms[a].args, objects);
}

std::string GroundTask::action_name(ActionId a) const {
  return canonical(schema_names[actions[a].schema], actions[a].binding, objects);
}

std::string GroundTask::action_pddl(ActionId a) const {
  std::string s = "(" + schema_names[actions[a].schema];
  for (int o : actions[a].binding) s += " " + objects[o];
  return s + ")";
}

std::optional<AtomId> GroundTask::find_atom(std::string_view n) const {
  auto it = atom_index_.find(std::string(n));
  if (it == atom_index_.end()) return std::nullopt;
  return it->second;
}

std::optional<ActionId> GroundTask::find_action(std::string_view n) const {
  auto it = action_index_.find(std::string(n));
  if (it == action_index_.end()) return std::nullopt;
  return it->second;
}

void GroundTask::index_names() {
  atom_index_.clear();
  action_index_.clear();
  for (AtomId a = 0; a < atoms.size(); ++a) atom_index_.emplace(atom_name(a), a);
  for (ActionId a = 0; a < actions.size(); ++a) action_index_.emplace(action_name(a), a);
}

GroundTask ground(const Domain& domain, const Instance& instance) {
  GroundTask task;
  task.domain_name = domain.name;
  task.instance_name = instance.name;
  for (const auto& p : domain.predicates) {
    task.predicate_names.push_back(p.name);
    task.predicate_arities.push_back(p.arity());
  }
  for (const auto& s : domain.schemas) {
    task.schema_names.push_back(s.name);
    task.schema_arities.push_back(s.arity());
  }
  for (const auto& c : domain.constants) {
    task.objects.push_back(c.name);
    task.object_types.push_back(c.type);
  }
  for (const auto& o : instance.objects) {
    task.objects.push_back(o.name);
    task.object_types.push_back(o.type);
  }
  std::map<std::string, int, std::less<>> object_index;
  for (std::size_t i = 0; i < task.objects.size(); ++i) object_index[task.objects[i]] = static_cast<int>(i);

  auto resolve = [&](const NamedAtom& a) {
    std::vector<int> args;
    for (const auto& n : a.args) args.push_back(object_index.at(n));
    return key_of(a.predicate, args);
  };

  std::vector<bool> fluent(domain.predicates.size(), false);
  for (const auto& s : domain.schemas) {
    for (const auto& a : s.add) fluent[a.predicate] = true;
    for (const auto& a : s.del) fluent[a.predicate] = true;
  }
  std::set<AtomKey> init_keys;
  for (const auto& a : instance.init) init_keys.insert(resolve(a));

  std::vector<LiftedAction> lifted;
  for (std::size_t si = 0; si < domain.schemas.size(); ++si) {
    const ActionSchema& schema = domain.schemas[si];
    const int arity = schema.arity();
    std::vector<std::vector<int>> candidates(arity);
    for (int p = 0; p < arity; ++p) {
      for (std::size_t o = 0; o < task.objects.size(); ++o) {
        if (domain.is_subtype(task.object_types[o], schema.parameters[p].type)) {
          candidates[p].push_back(static_cast<int>(o));
        }
      }
    }
    // Static preconditions are checked as soon as their last parameter is bound.
    std::vector<std::vector<const LiftedAtom*>> static_at(arity + 1);
    for (const auto& pre : schema.precondition) {
      if (fluent[pre.predicate]) continue;
      int last = 0;
      for (const Term& t : pre.args) {
        if (t.kind == Term::Kind::Parameter) last = std::max(last, t.index + 1);
      }
      static_at[last].push_back(&pre);
    }
    std::vector<int> binding(arity, -1);
    auto instantiate = [&](const LiftedAtom& a) {
      std::vector<int> args;
      args.reserve(a.args.size());
      for (const Term& t : a.args) {
        args.push_back(t.kind == Term::Kind::Parameter ? binding[t.index] : t.index);
      }
      return key_of(a.predicate, args);
    };
    auto statics_hold = [&](int depth) {
      for (const LiftedAtom* a : static_at[depth]) {
        if (!init_keys.count(instantiate(*a))) return false;
      }
      return true;
    };
    if (!statics_hold(0)) continue;

    auto emit = [&]() {
      LiftedAction la;
      la.schema = static_cast<int>(si);
      la.binding = binding;
      la.pre_add_del.resize(3);
      for (const auto& a : schema.precondition) la.pre_add_del[0].push_back(instantiate(a));
      for (const auto& a : schema.add) la.pre_add_del[1].push_back(instantiate(a));
      for (const auto& a : schema.del) la.pre_add_del[2].push_back(instantiate(a));
      lifted.push_back(std::move(la));
    };

    if (arity == 0) {
      emit();
      continue;
    }
    std::vector<std::size_t> cursor(arity, 0);
    int depth = 0;
    while (depth >= 0) {
      if (cursor[depth] >= candidates[depth].size()) {
        cursor[depth] = 0;
        binding[depth] = -1;
        --depth;
        if (depth >= 0) ++cursor[depth];
        continue;
      }
      binding[depth] = candidates[depth][cursor[depth]];
      if (!statics_hold(depth + 1)) {
        ++cursor[depth];
        continue;
      }
      if (depth + 1 == arity) {
        emit();
        ++cursor[depth];
      } else {
        ++depth;
      }
    }
  }

  std::set<AtomKey> universe = init_keys;
  for (const auto& a : instance.goal) universe.insert(resolve(a));
  for (const auto& la : lifted) {
    for (const auto& part : la.pre_add_del) universe.insert(part.begin(), part.end());
  }
  std::map<AtomKey, AtomId> ids;
  for (const auto& k : universe) {
    const AtomId id = static_cast<AtomId>(task.atoms.size());
    ids.emplace(k, id);
    task.atoms.push_back(GroundAtom{k[0], std::vector<int>(k.begin() + 1, k.end())});
  }

  for (auto& la : lifted) {
    GroundAction ga;
    ga.schema = la.schema;
    ga.binding = std::move(la.binding);
    ga.cost = domain.schemas[la.schema].cost;
    for (const auto& k : la.pre_add_del[0]) ga.pre.push_back(ids.at(k));
    for (const auto& k : la.pre_add_del[1]) ga.add.push_back(ids.at(k));
    for (const auto& k : la.pre_add_del[2]) ga.del.push_back(ids.at(k));
    sort_unique(ga.pre);
    sort_unique(ga.add);
    sort_unique(ga.del);
    const bool deletes_nothing = std::includes(ga.add.begin(), ga.add.end(), ga.del.begin(), ga.del.end());
    const bool adds_nothing = std::includes(ga.pre.begin(), ga.pre.end(), ga.add.begin(), ga.add.end());
    if (deletes_nothing && adds_nothing) continue;
    task.actions.push_back(std::move(ga));
  }

  std::vector<AtomId> init;
  for (const auto& k : init_keys) init.push_back(ids.at(k));
  task.init = State(std::move(init));
  for (const auto& a : instance.goal) task.goal.push_back(ids.at(resolve(a)));
  sort_unique(task.goal);
  task.index_names();
  return task;
}

}  // namespace qvp
