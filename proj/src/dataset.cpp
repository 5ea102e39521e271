#include "qvp/dataset.hpp"

#include <atomic>
#include <fstream>
#include <functional>
#include <iomanip>
#include <mutex>
#include <sstream>
#include <thread>

namespace qvp {

std::size_t Dataset::num_tuples() const {
  std::size_t n = 0;
  for (const auto& inst : instances) n += inst.tuples.size();
  return n;
}

std::vector<NamedInstance> sample_instances(DomainTag tag, const std::vector<int>& sizes, int per_size,
                                            std::uint64_t seed) {
  std::vector<NamedInstance> out;
  InstanceBatch batch(tag);
  for (int size : sizes) {
    if (!is_feasible_size(tag, size)) continue;
    for (int i = 0; i < per_size; ++i) {
      auto inst = batch.next(size, derive_seed(seed, 0x67656eULL, static_cast<std::uint64_t>(size),
                                               static_cast<std::uint64_t>(i)));
      if (!inst) break;
      out.push_back({std::string(to_string(tag)) + "-" + std::to_string(size) + "-" + std::to_string(i), *inst});
    }
  }
  return out;
}

void parallel_for(std::size_t n, int workers, const std::function<void(std::size_t)>& fn) {
  if (workers <= 1 || n <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  const auto count = std::min<std::size_t>(static_cast<std::size_t>(workers), n);
  for (std::size_t t = 0; t < count; ++t) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < n; i = next++) {
        try {
          fn(i);
        } catch (...) {
          std::lock_guard lock(error_mutex);
          if (!error) error = std::current_exception();
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

std::vector<TrainingTuple> tuples_from_plan(const GroundTask& task, const Plan& plan, HeuristicKind sibling) {
  Heuristic h(task, sibling);
  std::vector<TrainingTuple> out;
  std::int64_t remaining = plan.cost;
  for (std::size_t t = 0; t < plan.actions.size(); ++t) {
    TrainingTuple tuple;
    tuple.state = plan.trajectory[t];
    tuple.hstar = remaining;
    tuple.teacher = plan.actions[t];
    for (ActionId a : applicable_actions(task, tuple.state)) {
      if (a == tuple.teacher) continue;
      tuple.others.push_back(a);
      tuple.sibling_h.push_back(h(apply(tuple.state, task.actions[a])));
    }
    remaining -= task.actions[plan.actions[t]].cost;
    out.push_back(std::move(tuple));
  }
  return out;
}

Dataset build_dataset(const Domain& domain, const std::vector<NamedInstance>& instances,
                      const TeacherOptions& options, std::vector<std::string>* skipped) {
  Dataset ds;
  ds.domain = domain;
  ds.domain_pddl = to_pddl(domain);
  ds.fingerprint = domain_fingerprint(domain);
  ds.provenance["teacher"] = to_string(options.teacher);
  ds.provenance["sibling_heuristic"] = to_string(options.sibling);
  ds.provenance["max_expansions"] = options.max_expansions;

  std::vector<std::optional<DatasetInstance>> slots(instances.size());
  std::vector<std::string> reasons(instances.size());
  parallel_for(instances.size(), options.workers, [&](std::size_t i) {
    const auto& named = instances[i];
    auto task = std::make_shared<GroundTask>(ground(domain, named.instance));
    std::optional<Plan> plan;
    try {
      plan = astar_optimal(*task, options.teacher, options.max_expansions);
    } catch (const BudgetExceeded& e) {
      reasons[i] = e.what();
      return;
    }
    if (!plan) {
      reasons[i] = "unsolvable";
      return;
    }
    DatasetInstance di;
    di.id = named.id;
    di.problem_pddl = to_pddl(named.instance, domain);
    di.tuples = tuples_from_plan(*task, *plan, options.sibling);
    di.task = std::move(task);
    slots[i] = std::move(di);
  });
  for (std::size_t i = 0; i < slots.size(); ++i) {
    if (slots[i]) {
      ds.instances.push_back(std::move(*slots[i]));
    } else if (skipped) {
      skipped->push_back(instances[i].id + ": " + reasons[i]);
    }
  }
  return ds;
}

namespace {

std::string hex64(std::uint64_t v) {
  std::ostringstream os;
  os << std::hex << std::setw(16) << std::setfill('0') << v;
  return os.str();
}

}  // namespace

void write_dataset(const Dataset& ds, std::ostream& out) {
  nlohmann::ordered_json header;
  header["format"] = "qvp-dataset";
  header["version"] = 1;
  header["domain"] = ds.domain.name;
  header["fingerprint"] = hex64(ds.fingerprint);
  header["provenance"] = ds.provenance;
  header["domain_pddl"] = ds.domain_pddl;
  header["instances"] = nlohmann::ordered_json::array();
  for (const auto& inst : ds.instances) {
    header["instances"].push_back({{"id", inst.id}, {"problem_pddl", inst.problem_pddl}});
  }
  out << header.dump() << '\n';
  for (const auto& inst : ds.instances) {
    const GroundTask& task = *inst.task;
    for (const auto& t : inst.tuples) {
      nlohmann::ordered_json line;
      line["instance"] = inst.id;
      auto& state = line["state"] = nlohmann::ordered_json::array();
      for (AtomId a : t.state.atoms()) state.push_back(task.atom_name(a));
      line["hstar"] = t.hstar;
      line["teacher"] = task.action_name(t.teacher);
      auto& others = line["others"] = nlohmann::ordered_json::array();
      for (ActionId a : t.others) others.push_back(task.action_name(a));
      auto& sib = line["sib_h"] = nlohmann::ordered_json::array();
      for (const auto& h : t.sibling_h) {
        if (h.is_infinite()) {
          sib.push_back("inf");
        } else {
          sib.push_back(h.value());
        }
      }
      out << line.dump() << '\n';
    }
  }
}

Dataset read_dataset(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw Error("dataset: missing header line");
  const auto header = nlohmann::json::parse(line);
  if (header.value("format", "") != "qvp-dataset") throw Error("dataset: not a qvp dataset");
  if (header.value("version", 0) != 1) throw Error("dataset: unsupported version");
  Dataset ds;
  ds.domain_pddl = header.at("domain_pddl").get<std::string>();
  ds.domain = parse_domain(ds.domain_pddl, "<dataset domain>");
  ds.fingerprint = domain_fingerprint(ds.domain);
  if (hex64(ds.fingerprint) != header.at("fingerprint").get<std::string>()) {
    throw Error("dataset: domain fingerprint does not match embedded domain");
  }
  ds.provenance = header.value("provenance", nlohmann::json::object());
  std::map<std::string, std::size_t> by_id;
  for (const auto& entry : header.at("instances")) {
    DatasetInstance di;
    di.id = entry.at("id").get<std::string>();
    di.problem_pddl = entry.at("problem_pddl").get<std::string>();
    const Instance inst = parse_instance(di.problem_pddl, ds.domain, "<dataset " + di.id + ">");
    di.task = std::make_shared<GroundTask>(ground(ds.domain, inst));
    by_id[di.id] = ds.instances.size();
    ds.instances.push_back(std::move(di));
  }
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto j = nlohmann::json::parse(line);
    const auto where = "dataset line " + std::to_string(line_no) + ": ";
    auto it = by_id.find(j.at("instance").get<std::string>());
    if (it == by_id.end()) throw Error(where + "unknown instance id");
    DatasetInstance& di = ds.instances[it->second];
    const GroundTask& task = *di.task;
    auto atom = [&](const std::string& n) {
      auto a = task.find_atom(n);
      if (!a) throw Error(where + "unknown atom " + n);
      return *a;
    };
    auto action = [&](const std::string& n) {
      auto a = task.find_action(n);
      if (!a) throw Error(where + "unknown action " + n);
      return *a;
    };
    TrainingTuple t;
    std::vector<AtomId> atoms;
    for (const auto& s : j.at("state")) atoms.push_back(atom(s.get<std::string>()));
    t.state = State(std::move(atoms));
    t.hstar = j.at("hstar").get<std::int64_t>();
    t.teacher = action(j.at("teacher").get<std::string>());
    for (const auto& s : j.at("others")) t.others.push_back(action(s.get<std::string>()));
    for (const auto& h : j.at("sib_h")) {
      t.sibling_h.push_back(h.is_string() ? HeuristicValue::infinity() : HeuristicValue(h.get<std::int64_t>()));
    }
    if (t.sibling_h.size() != t.others.size()) throw Error(where + "sib_h and others differ in length");
    di.tuples.push_back(std::move(t));
  }
  return ds;
}

void save_dataset(const Dataset& dataset, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path);
  write_dataset(dataset, out);
}

Dataset load_dataset(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path);
  return read_dataset(in);
}

}  // namespace qvp
