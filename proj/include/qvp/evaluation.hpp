#pragma once

// Coverage estimation, scaling evaluation, Q-value diagnostics and the
// V-versus-Q efficiency benchmark.

#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "qvp/dataset.hpp"
#include "qvp/generators.hpp"
#include "qvp/policy.hpp"

namespace qvp {

enum class IntervalMethod { Wald, Wilson };

const char* to_string(IntervalMethod m);
IntervalMethod parse_interval_method(std::string_view s);

struct CoverageConfig {
  double z = 1.645;
  int min_runs = 10;
  int max_runs = 200;
  double half_width = 0.10;
  IntervalMethod method = IntervalMethod::Wald;
  int workers = 1;
};

double interval_half_width(IntervalMethod method, int successes, int runs, double z);

struct CoverageEstimate {
  int size = 0;
  int runs = 0;
  int successes = 0;
  double c_hat = 0.0;
  double half_width = 0.0;
};

/// One policy run on the `run`-th sampled instance of a size; true if solved.
using CoverageProbe = std::function<bool(int size, int run)>;

/// Sequential sampling until the interval is narrow enough or max_runs is
/// reached. Runs may execute in parallel, but the stopping rule sees results
/// in run-index order.
CoverageEstimate estimate_coverage(const CoverageProbe& probe, int size, const CoverageConfig& cfg);

struct ScalingReport {
  std::vector<CoverageEstimate> sizes;
  int scale = 0;
  double scov = 0.0;
  std::string termination;  // "below-threshold" or "max-size"
};

/// Walks `sizes` in order, stopping after the first size whose coverage is
/// below `threshold`. The terminating size counts towards Scale and SCov.
ScalingReport scaling_evaluation(const std::function<CoverageEstimate(int)>& estimate, const std::vector<int>& sizes,
                                 double threshold = 0.3);

struct ScalingConfig {
  CoverageConfig coverage;
  double threshold = 0.3;
  int min_size = 0;  // 0: the domain's smallest feasible size
  int max_size = 0;  // 0: the domain's cap
  std::uint64_t seed = 0;
  bool forbid_revisit = true;
};

/// Instance for (size, run): deterministic in the seed.
Instance evaluation_instance(DomainTag domain, int size, int run, std::uint64_t seed);

/// Probe running the estimator's greedy policy with step limit 100 + size.
CoverageProbe policy_probe(const Estimator& est, DomainTag domain, std::uint64_t seed, bool forbid_revisit = true);

ScalingReport scaling_evaluation(const Estimator& est, DomainTag domain, const ScalingConfig& cfg);

void write_scaling_csv(const ScalingReport& r, std::ostream& out);
void write_scaling_json(const ScalingReport& r, std::ostream& out);
/// Two columns (size, c_hat) for plotting coverage against size.
void write_scaling_gnuplot(const ScalingReport& r, std::ostream& out);

struct ValidationConfig {
  int min_size = 0;  // 0: the domain's smallest feasible size
  int max_size = 0;  // 0: the domain's cap
  int stride = 1;    // every stride-th feasible size
  int per_size = 5;
  double threshold = 0.3;
  std::uint64_t seed = 0;
  int workers = 1;
};

/// Sum of per-size coverage over an increasing size schedule, stopping after
/// the first size below the threshold.
double dynamic_validation(const Estimator& est, DomainTag domain, const ValidationConfig& cfg);
/// Fraction of a fixed instance pool solved (domains without a generator).
double pool_validation(const Estimator& est, const std::vector<GroundTask>& pool);

struct ErrDiff {
  double err = 0.0;
  double diff = 0.0;
  std::size_t tuples = 0;
  std::size_t pairs = 0;
};

/// err = mean |h* - Q(s,a*)|; diff = mean |Q(s,a*) - Q(s,a_i)| over non-teacher actions.
ErrDiff err_diff(const Estimator& est, const Dataset& ds);

struct BenchConfig {
  int instances = 25;
  int walk_length = 25;
  int hidden = 32;
  int layers = 30;
  std::uint64_t seed = 0;
};

struct EfficiencyRow {
  std::string arch;
  int size = 0;
  int states = 0;
  double mean_branching = 0.0;
  ForwardStats v;
  ForwardStats q;
  bool counts_exact = true;  // per state: V calls = |Act(s)| and Q calls = 1
};

struct EfficiencyReport {
  std::vector<EfficiencyRow> rows;
};

/// Randomly initialized V and Q models per architecture; one greedy selection
/// of each kind on the end state of every random walk.
EfficiencyReport efficiency_bench(DomainTag domain, const std::vector<Architecture>& archs,
                                  const std::vector<int>& sizes, const BenchConfig& cfg);

/// Counts only, so identical seeds give identical files.
void write_efficiency_csv(const EfficiencyReport& r, std::ostream& out);
/// Counts plus wall time.
void write_efficiency_json(const EfficiencyReport& r, std::ostream& out);

}  // namespace qvp
