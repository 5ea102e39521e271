#include "qvp/evaluation.hpp"

#include <cmath>
#include <iomanip>
#include <ostream>

#include "json.hpp"
#include "qvp/encoding.hpp"

namespace qvp {

const char* to_string(IntervalMethod m) { return m == IntervalMethod::Wald ? "wald" : "wilson"; }

IntervalMethod parse_interval_method(std::string_view s) {
  if (s == "wald") return IntervalMethod::Wald;
  if (s == "wilson") return IntervalMethod::Wilson;
  throw ConfigError("unknown interval method '" + std::string(s) + "' (expected wald or wilson)");
}

double interval_half_width(IntervalMethod method, int successes, int runs, double z) {
  if (runs <= 0) return 1.0;
  const double n = runs;
  const double p = successes / n;
  if (method == IntervalMethod::Wald) return z * std::sqrt(p * (1.0 - p) / n);
  const double z2 = z * z;
  return z / (1.0 + z2 / n) * std::sqrt(p * (1.0 - p) / n + z2 / (4.0 * n * n));
}

CoverageEstimate estimate_coverage(const CoverageProbe& probe, int size, const CoverageConfig& cfg) {
  if (cfg.min_runs < 1 || cfg.max_runs < cfg.min_runs) throw ConfigError("invalid coverage run bounds");
  CoverageEstimate est;
  est.size = size;
  const int chunk = std::max(1, cfg.workers);
  std::vector<char> results;
  while (true) {
    // Evaluate the next chunk of run indices, then consume them in order.
    const int first = static_cast<int>(results.size());
    const int count = std::min(chunk, cfg.max_runs - first);
    std::vector<char> outcome(static_cast<std::size_t>(count));
    parallel_for(static_cast<std::size_t>(count), cfg.workers,
                 [&](std::size_t i) { outcome[i] = probe(size, first + static_cast<int>(i)) ? 1 : 0; });
    for (char o : outcome) {
      results.push_back(o);
      est.runs += 1;
      est.successes += o;
      est.half_width = interval_half_width(cfg.method, est.successes, est.runs, cfg.z);
      if ((est.runs >= cfg.min_runs && est.half_width <= cfg.half_width) || est.runs >= cfg.max_runs) {
        est.c_hat = static_cast<double>(est.successes) / est.runs;
        return est;
      }
    }
  }
}

ScalingReport scaling_evaluation(const std::function<CoverageEstimate(int)>& estimate, const std::vector<int>& sizes,
                                 double threshold) {
  ScalingReport r;
  r.termination = "max-size";
  for (int n : sizes) {
    CoverageEstimate e = estimate(n);
    e.size = n;
    r.sizes.push_back(e);
    r.scale = n;
    r.scov += e.c_hat;
    if (e.c_hat < threshold) {
      r.termination = "below-threshold";
      break;
    }
  }
  return r;
}

Instance evaluation_instance(DomainTag domain, int size, int run, std::uint64_t seed) {
  return generate_instance({domain, size, derive_seed(seed, 0x6576616cULL, static_cast<std::uint64_t>(size),
                                                      static_cast<std::uint64_t>(run))});
}

CoverageProbe policy_probe(const Estimator& est, DomainTag domain, std::uint64_t seed, bool forbid_revisit) {
  return [&est, domain, seed, forbid_revisit](int size, int run) {
    const GroundTask task = ground(builtin_domain(domain), evaluation_instance(domain, size, run, seed));
    PolicyConfig cfg;
    cfg.step_limit = default_step_limit(size);
    cfg.forbid_revisit = forbid_revisit;
    return run_policy(est, task, cfg).solved();
  };
}

ScalingReport scaling_evaluation(const Estimator& est, DomainTag domain, const ScalingConfig& cfg) {
  const int lo = cfg.min_size > 0 ? cfg.min_size : min_size(domain);
  const int hi = cfg.max_size > 0 ? cfg.max_size : max_size(domain);
  const auto probe = policy_probe(est, domain, cfg.seed, cfg.forbid_revisit);
  return scaling_evaluation([&](int n) { return estimate_coverage(probe, n, cfg.coverage); },
                            feasible_sizes(domain, lo, hi), cfg.threshold);
}

double dynamic_validation(const Estimator& est, DomainTag domain, const ValidationConfig& cfg) {
  const int lo = cfg.min_size > 0 ? cfg.min_size : min_size(domain);
  const int hi = cfg.max_size > 0 ? cfg.max_size : max_size(domain);
  const auto all = feasible_sizes(domain, lo, hi);
  std::vector<int> sizes;
  for (std::size_t i = 0; i < all.size(); i += static_cast<std::size_t>(std::max(1, cfg.stride))) sizes.push_back(all[i]);
  const auto probe = policy_probe(est, domain, derive_seed(cfg.seed, 0x76616cULL));
  const auto report = scaling_evaluation(
      [&](int n) {
        std::vector<char> ok(static_cast<std::size_t>(cfg.per_size));
        parallel_for(ok.size(), cfg.workers, [&](std::size_t i) { ok[i] = probe(n, static_cast<int>(i)) ? 1 : 0; });
        CoverageEstimate e;
        e.runs = cfg.per_size;
        for (char o : ok) e.successes += o;
        e.c_hat = cfg.per_size ? static_cast<double>(e.successes) / cfg.per_size : 0.0;
        return e;
      },
      sizes, cfg.threshold);
  return report.scov;
}

double pool_validation(const Estimator& est, const std::vector<GroundTask>& pool) {
  if (pool.empty()) return 0.0;
  int solved = 0;
  for (const auto& task : pool) {
    PolicyConfig pc;
    pc.step_limit = default_step_limit(static_cast<int>(task.objects.size()));
    solved += run_policy(est, task, pc).solved();
  }
  return static_cast<double>(solved) / static_cast<double>(pool.size());
}

void write_scaling_csv(const ScalingReport& r, std::ostream& out) {
  out << std::setprecision(10);
  out << "size,runs,successes,c_hat,half_width\n";
  for (const auto& e : r.sizes) {
    out << e.size << ',' << e.runs << ',' << e.successes << ',' << e.c_hat << ',' << e.half_width << '\n';
  }
}

void write_scaling_json(const ScalingReport& r, std::ostream& out) {
  nlohmann::ordered_json j;
  j["scale"] = r.scale;
  j["scov"] = r.scov;
  j["termination"] = r.termination;
  auto& sizes = j["sizes"] = nlohmann::ordered_json::array();
  for (const auto& e : r.sizes) {
    sizes.push_back({{"size", e.size},
                     {"runs", e.runs},
                     {"successes", e.successes},
                     {"c_hat", e.c_hat},
                     {"half_width", e.half_width}});
  }
  out << j.dump(2) << '\n';
}

void write_scaling_gnuplot(const ScalingReport& r, std::ostream& out) {
  out << "# size c_hat\n";
  for (const auto& e : r.sizes) out << e.size << ' ' << e.c_hat << '\n';
}

ErrDiff err_diff(const Estimator& est, const Dataset& ds) {
  if (est.head() != Head::Q) throw ConfigError("err/diff needs a q-head model");
  ErrDiff r;
  double err_sum = 0.0, diff_sum = 0.0;
  ForwardStats stats;
  for (const auto& inst : ds.instances) {
    const GroundTask& task = *inst.task;
    for (const auto& t : inst.tuples) {
      std::vector<ActionId> actions{t.teacher};
      actions.insert(actions.end(), t.others.begin(), t.others.end());
      std::sort(actions.begin(), actions.end());
      const auto q = est.action_values(task, t.state, actions, stats);
      const auto row = [&](ActionId a) { return std::lower_bound(actions.begin(), actions.end(), a) - actions.begin(); };
      const double qt = q[row(t.teacher)];
      err_sum += std::fabs(static_cast<double>(t.hstar) - qt);
      ++r.tuples;
      for (ActionId o : t.others) {
        diff_sum += std::fabs(qt - q[row(o)]);
        ++r.pairs;
      }
    }
  }
  r.err = r.tuples ? err_sum / static_cast<double>(r.tuples) : 0.0;
  r.diff = r.pairs ? diff_sum / static_cast<double>(r.pairs) : 0.0;
  return r;
}

EfficiencyReport efficiency_bench(DomainTag domain, const std::vector<Architecture>& archs,
                                  const std::vector<int>& sizes, const BenchConfig& cfg) {
  const Domain& d = builtin_domain(domain);
  const PredicateTable table = make_predicate_table(d);
  EfficiencyReport report;
  for (Architecture arch : archs) {
    ModelConfig mc;
    mc.arch = arch;
    mc.hidden = cfg.hidden;
    mc.layers = cfg.layers;
    mc.seed = derive_seed(cfg.seed, static_cast<std::uint64_t>(arch));
    mc.head = Head::V;
    const Model v_model(mc, table);
    mc.head = Head::Q;
    const Model q_model(mc, table);
    const ModelEstimator v_est(v_model);
    const ModelEstimator q_est(q_model);
    for (int size : sizes) {
      if (!is_feasible_size(domain, size)) continue;
      EfficiencyRow row;
      row.arch = to_string(arch);
      row.size = size;
      std::uint64_t branching = 0;
      for (int i = 0; i < cfg.instances; ++i) {
        const std::uint64_t seed = derive_seed(cfg.seed, 0x62656e6368ULL, static_cast<std::uint64_t>(size),
                                               static_cast<std::uint64_t>(i));
        const GroundTask task = ground(d, generate_instance({domain, size, seed}));
        Rng rng(derive_seed(seed, 1));
        State s = task.init;
        for (int step = 0; step < cfg.walk_length; ++step) {
          const auto app = applicable_actions(task, s);
          if (app.empty()) break;
          s = apply(task, s, app[rng.below(app.size())]);
        }
        const auto app = applicable_actions(task, s);
        if (app.empty()) continue;
        std::vector<State> successors;
        for (ActionId a : app) successors.push_back(apply(task, s, a));
        const ForwardStats v_before = row.v;
        const ForwardStats q_before = row.q;
        select_action_v(v_est, task, app, successors, row.v);
        select_action_q(q_est, task, s, app, app, row.q);
        row.counts_exact = row.counts_exact && row.v.encoder_calls - v_before.encoder_calls == app.size() &&
                           row.q.encoder_calls - q_before.encoder_calls == 1;
        branching += app.size();
        ++row.states;
      }
      row.mean_branching = row.states ? static_cast<double>(branching) / row.states : 0.0;
      report.rows.push_back(row);
    }
  }
  return report;
}

void write_efficiency_csv(const EfficiencyReport& r, std::ostream& out) {
  out << std::setprecision(10);
  out << "arch,size,states,mean_branching,v_encoder_calls,q_encoder_calls,v_work_units,q_work_units,work_ratio,"
         "counts_exact\n";
  for (const auto& row : r.rows) {
    const double ratio = row.q.work_units ? static_cast<double>(row.v.work_units) / row.q.work_units : 0.0;
    out << row.arch << ',' << row.size << ',' << row.states << ',' << row.mean_branching << ','
        << row.v.encoder_calls << ',' << row.q.encoder_calls << ',' << row.v.work_units << ',' << row.q.work_units
        << ',' << ratio << ',' << (row.counts_exact ? 1 : 0) << '\n';
  }
}

void write_efficiency_json(const EfficiencyReport& r, std::ostream& out) {
  nlohmann::ordered_json j = nlohmann::ordered_json::array();
  for (const auto& row : r.rows) {
    j.push_back({{"arch", row.arch},
                 {"size", row.size},
                 {"states", row.states},
                 {"mean_branching", row.mean_branching},
                 {"v", {{"encoder_calls", row.v.encoder_calls}, {"work_units", row.v.work_units}, {"seconds", row.v.seconds}}},
                 {"q", {{"encoder_calls", row.q.encoder_calls}, {"work_units", row.q.work_units}, {"seconds", row.q.seconds}}},
                 {"counts_exact", row.counts_exact}});
  }
  out << j.dump(2) << '\n';
}

}  // namespace qvp
