#pragma once

// Built-in parametric instance generators. Instance size is the object count.

#include <cstdint>
#include <set>
#include <string>
#include <vector>

#include "qvp/pddl.hpp"

namespace qvp {

enum class DomainTag { Gripper, Blocksworld, Ferry, Visitall };

struct GeneratorSpec {
  DomainTag domain = DomainTag::Gripper;
  int size = 0;
  std::uint64_t seed = 0;
};

class InfeasibleSize : public Error {
 public:
  using Error::Error;
};

const char* to_string(DomainTag tag);
/// Throws ConfigError for unknown tags.
DomainTag parse_domain_tag(std::string_view name);

const std::string& builtin_domain_text(DomainTag tag);
const Domain& builtin_domain(DomainTag tag);

bool is_feasible_size(DomainTag tag, int size);
int min_size(DomainTag tag);
/// Largest size used by scaling evaluation (100; 1000 for Visitall).
int max_size(DomainTag tag);
/// Smallest feasible size strictly larger than `size`.
int next_size(DomainTag tag, int size);
/// Feasible sizes within [lo, hi], ascending.
std::vector<int> feasible_sizes(DomainTag tag, int lo, int hi);
/// Training size range shipped as default (solved ranges of the reference data sets).
std::pair<int, int> default_training_range(DomainTag tag);

/// Deterministic in (domain, size, seed). Internally resamples while the goal
/// already holds initially. Throws InfeasibleSize.
Instance generate_instance(const GeneratorSpec& spec);

/// Emits instances that are unique within the batch.
class InstanceBatch {
 public:
  explicit InstanceBatch(DomainTag tag, int max_attempts = 200) : tag_(tag), max_attempts_(max_attempts) {}

  /// Next unseen instance of the given size; nullopt once the generator keeps
  /// producing duplicates (small sizes have few distinct instances).
  std::optional<Instance> next(int size, std::uint64_t seed);

 private:
  DomainTag tag_;
  int max_attempts_;
  std::set<std::string> seen_;
};

}  // namespace qvp
