#pragma once

// Supervised data from optimal teacher plans.

#include <functional>
#include <iosfwd>
#include <map>
#include <optional>
#include <memory>
#include <string>
#include <vector>

#include "qvp/generators.hpp"
#include "qvp/search.hpp"

#include "json.hpp"

namespace qvp {

/// One sample <s, h*(s), a*, a_1..a_m, h(s'_1)..h(s'_m)>.
struct TrainingTuple {
  State state;
  std::int64_t hstar = 0;
  ActionId teacher = 0;
  std::vector<ActionId> others;             // Act(s) \ {a*}, in task order
  std::vector<HeuristicValue> sibling_h;    // aligned with `others`
};

struct DatasetInstance {
  std::string id;
  std::string problem_pddl;
  std::shared_ptr<const GroundTask> task;
  std::vector<TrainingTuple> tuples;
};

struct Dataset {
  std::string domain_pddl;
  Domain domain;
  std::uint64_t fingerprint = 0;
  nlohmann::json provenance = nlohmann::json::object();
  std::vector<DatasetInstance> instances;

  std::size_t num_tuples() const;
};

struct TeacherOptions {
  HeuristicKind teacher = HeuristicKind::LmCut;
  HeuristicKind sibling = HeuristicKind::LmCut;
  std::size_t max_expansions = 1'000'000;
  int workers = 1;
};

struct NamedInstance {
  std::string id;
  Instance instance;
};

/// Up to `per_size` distinct generated instances for each feasible size in
/// `sizes`, with ids "<domain>-<size>-<i>". Small sizes may yield fewer.
std::vector<NamedInstance> sample_instances(DomainTag tag, const std::vector<int>& sizes, int per_size,
                                            std::uint64_t seed);

/// Tuples for one solved task: one per non-goal state of the plan trajectory.
std::vector<TrainingTuple> tuples_from_plan(const GroundTask& task, const Plan& plan,
                                            HeuristicKind sibling);

/// Solves every instance with the optimal teacher; unsolved or over-budget
/// instances are dropped and reported in `skipped` ("id: reason").
/// Results are merged in input order regardless of `workers`.
Dataset build_dataset(const Domain& domain, const std::vector<NamedInstance>& instances,
                      const TeacherOptions& options, std::vector<std::string>* skipped = nullptr);

/// JSON Lines: a header line, then one line per tuple.
void write_dataset(const Dataset& dataset, std::ostream& out);
Dataset read_dataset(std::istream& in);
void save_dataset(const Dataset& dataset, const std::string& path);
Dataset load_dataset(const std::string& path);

/// Runs `fn(i)` for i in [0, n) on up to `workers` threads.
void parallel_for(std::size_t n, int workers, const std::function<void(std::size_t)>& fn);

}  // namespace qvp
