// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fails.
//
//   acceptance [--only 1,4,7] [--workers N] [--artifacts DIR]

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <queue>
#include <random>
#include <set>
#include <sstream>
#include <unordered_map>

#include "CLI11.hpp"
#include "qvp/evaluation.hpp"
#include "qvp/search.hpp"
#include "qvp/training.hpp"
#include "support.hpp"

using namespace qvp;
namespace fs = std::filesystem;

namespace {

struct Verdict {
  bool pass = false;
  std::string detail;
};

std::string fmt(double x) {
  std::ostringstream o;
  o << std::setprecision(4) << x;
  return o.str();
}

const std::vector<DomainTag> kDomains{DomainTag::Gripper, DomainTag::Blocksworld, DomainTag::Ferry,
                                      DomainTag::Visitall};

// ------------------------------------------------------------ criterion 1

struct StateSpace {
  std::vector<State> states;
  std::vector<std::vector<std::pair<std::size_t, std::int64_t>>> predecessors;  // (from, cost)
  std::vector<bool> goal;
};

// Breadth-first enumeration; nullopt beyond `limit` states.
std::optional<StateSpace> enumerate(const GroundTask& task, std::size_t limit) {
  StateSpace sp;
  std::unordered_map<State, std::size_t, StateHash> index{{task.init, 0}};
  sp.states.push_back(task.init);
  std::vector<std::vector<std::pair<std::size_t, std::int64_t>>> succ;
  for (std::size_t i = 0; i < sp.states.size(); ++i) {
    succ.emplace_back();
    for (ActionId a : applicable_actions(task, sp.states[i])) {
      State t = apply(task, sp.states[i], a);
      auto [it, fresh] = index.emplace(t, sp.states.size());
      if (fresh) {
        if (sp.states.size() >= limit) return std::nullopt;
        sp.states.push_back(std::move(t));
      }
      succ[i].push_back({it->second, task.actions[a].cost});
    }
  }
  sp.predecessors.resize(sp.states.size());
  for (std::size_t i = 0; i < succ.size(); ++i) {
    for (auto [j, c] : succ[i]) sp.predecessors[j].push_back({i, c});
  }
  for (const auto& s : sp.states) sp.goal.push_back(is_goal(task, s));
  return sp;
}

// Exact goal distances by Dijkstra on the reversed transition graph; -1 if none.
std::vector<std::int64_t> backward_distances(const StateSpace& sp) {
  std::vector<std::int64_t> d(sp.states.size(), -1);
  using Item = std::pair<std::int64_t, std::size_t>;
  std::priority_queue<Item, std::vector<Item>, std::greater<>> open;
  for (std::size_t i = 0; i < sp.states.size(); ++i) {
    if (sp.goal[i]) open.push({0, i});
  }
  while (!open.empty()) {
    auto [g, i] = open.top();
    open.pop();
    if (d[i] != -1) continue;
    d[i] = g;
    for (auto [j, c] : sp.predecessors[i]) {
      if (d[j] == -1) open.push({g + c, j});
    }
  }
  return d;
}

Verdict oracle_equivalence() {
  const std::map<DomainTag, std::vector<int>> sizes{{DomainTag::Gripper, {5, 6, 7, 8}},
                                                    {DomainTag::Blocksworld, {2, 3, 4, 5}},
                                                    {DomainTag::Ferry, {3, 4, 5, 6}},
                                                    {DomainTag::Visitall, {4, 9}}};
  int instances = 0, cost_mismatches = 0, violations = 0;
  std::size_t states_checked = 0;
  std::ostringstream per_domain;
  for (DomainTag tag : kDomains) {
    const auto& ns = sizes.at(tag);
    InstanceBatch batch(tag);
    int found = 0;
    for (int i = 0; found < 20 && i < 400; ++i) {
      const int n = ns[static_cast<std::size_t>(i) % ns.size()];
      if (!is_feasible_size(tag, n)) continue;
      const auto inst = batch.next(n, derive_seed(31, static_cast<std::uint64_t>(i)));
      if (!inst) continue;
      const GroundTask task = ground(builtin_domain(tag), *inst);
      const auto sp = enumerate(task, 10'000);
      if (!sp) continue;
      ++found;
      const auto dist = backward_distances(*sp);
      const HeuristicValue ucs = optimal_cost_oracle(task, task.init);
      if (ucs.is_infinite() != (dist[0] < 0) || (dist[0] >= 0 && ucs.value() != dist[0])) ++cost_mismatches;
      for (HeuristicKind h : {HeuristicKind::LmCut, HeuristicKind::HMax, HeuristicKind::Blind}) {
        const auto plan = astar_optimal(task, h);
        std::int64_t cost = -1;
        if (plan.has_value() != (dist[0] >= 0)) {
          ++cost_mismatches;
        } else if (plan && (!validate_plan(task, plan->actions, &cost) || cost != dist[0] ||
                            plan->cost != dist[0])) {
          ++cost_mismatches;
        }
      }
      HMax hmax(task);
      LmCut lmcut(task);
      for (std::size_t s = 0; s < sp->states.size(); ++s) {
        for (HeuristicValue h : {hmax(sp->states[s]), lmcut(sp->states[s])}) {
          if (h.is_infinite() ? dist[s] >= 0 : (dist[s] >= 0 && h.value() > dist[s])) ++violations;
        }
        ++states_checked;
      }
    }
    instances += found;
    per_domain << to_string(tag) << '=' << found << ' ';
    if (found < 20) ++cost_mismatches;  // not enough small instances counts as a failure
  }
  return {cost_mismatches == 0 && violations == 0,
          per_domain.str() + "instances=" + std::to_string(instances) + " states=" +
              std::to_string(states_checked) + " cost_mismatches=" + std::to_string(cost_mismatches) +
              " admissibility_violations=" + std::to_string(violations)};
}

// ------------------------------------------------------------ criterion 2

Verdict gradient_correctness() {
  std::vector<Dataset> pools;
  for (auto [tag, n] : std::vector<std::pair<DomainTag, int>>{
           {DomainTag::Gripper, 5}, {DomainTag::Blocksworld, 3}, {DomainTag::Ferry, 4}, {DomainTag::Visitall, 4}}) {
    pools.push_back(build_dataset(builtin_domain(tag), sample_instances(tag, {n}, 2, 5), TeacherOptions{}));
  }
  std::mt19937_64 rng(2718);
  const std::vector<std::pair<Head, Regularizer>> losses{{Head::V, Regularizer::None},
                                                         {Head::Q, Regularizer::None},
                                                         {Head::Q, Regularizer::Explicit},
                                                         {Head::Q, Regularizer::Heuristic}};
  std::size_t checked = 0, violations = 0, with_penalty = 0, kinks = 0;
  double worst = 0.0;
  std::string worst_at;
  for (int i = 0; i < 50; ++i) {
    const Dataset& ds = pools[static_cast<std::size_t>(i) % pools.size()];
    ModelConfig mc;
    mc.arch = static_cast<Architecture>(i % 3);
    mc.head = losses[static_cast<std::size_t>(i / 3) % losses.size()].first;
    mc.hidden = 2 + static_cast<int>(rng() % 7);
    mc.layers = 1 + static_cast<int>(rng() % 3);
    mc.aggregation = rng() % 2 ? Aggregation::SmoothMax : Aggregation::Max;
    mc.seed = rng();
    LossConfig lc;
    lc.head = mc.head;
    lc.regularizer = losses[static_cast<std::size_t>(i / 3) % losses.size()].second;
    lc.lambda = 0.25 + static_cast<double>(rng() % 8) * 0.25;
    Model model(mc, make_predicate_table(ds.domain));
    const auto& inst = ds.instances[rng() % ds.instances.size()];
    const auto& tuple = inst.tuples[rng() % inst.tuples.size()];
    const EncodedTuple enc = encode_tuple(model, lc, *inst.task, tuple);
    if (sample_loss(model, *inst.task, tuple, lc).penalty > 0) ++with_penalty;
    const auto g = qvp::testing::check_gradients(model, {enc}, lc, 1e-5, 1e-4, 1e-7, true);
    checked += g.checked;
    violations += g.violations;
    kinks += g.kinks;
    if (g.worst_relative > worst) {
      worst = g.worst_relative;
      worst_at = std::string(to_string(mc.arch)) + "/" + to_string(mc.head) + "/" + to_string(lc.regularizer) +
                 " " + g.worst_parameter;
    }
  }
  return {violations == 0 && with_penalty > 0,
          "configs=50 entries=" + std::to_string(checked) + " violations=" + std::to_string(violations) +
              " kink_rechecked=" + std::to_string(kinks) + " active_penalties=" + std::to_string(with_penalty) + " worst_rel=" + fmt(worst) +
              (worst_at.empty() ? "" : " at " + worst_at)};
}

// ------------------------------------------------------------ criterion 3

Verdict regularizer_exactness() {
  int wrong = 0;
  auto expect = [&](double got, double want) { wrong += got != want; };
  expect(bound_explicit(0), 1.0);
  expect(bound_explicit(3), 4.0);
  expect(bound_explicit(1119), 1120.0);
  expect(bound_heuristic(3, 1, HeuristicValue(5), 1120.0), 6.0);
  expect(bound_heuristic(3, 1, HeuristicValue(2), 1120.0), 4.0);
  expect(bound_heuristic(3, 1, HeuristicValue::infinity(), 1120.0), 1121.0);
  expect(bound_heuristic(3, 1, HeuristicValue::infinity(), LossConfig{}.dead_end_value), 1121.0);
  expect(omega({5.0, 3.5, 4.0}, {4, 4, 4}), 0.5);
  expect(omega({4.0, 9.0, 4.5}, {4, 4, 4}), 0.0);
  expect(omega({}, {}), 0.0);
  expect(mae(3, 3), 0.0);
  expect(mae(3, 2.5), 0.5);
  expect(mae(3, 4), mae(4, 3));
  bool mismatch_throws = false;
  try {
    omega({1.0}, {});
  } catch (const Error&) {
    mismatch_throws = true;
  }
  return {wrong == 0 && mismatch_throws, "examples=13 wrong=" + std::to_string(wrong) +
                                             " length_mismatch_throws=" + (mismatch_throws ? "yes" : "no")};
}

// ------------------------------------------------------------ criterion 4

Verdict permutation_invariance() {
  std::ostringstream detail;
  bool pass = true;
  const std::map<DomainTag, std::vector<int>> sizes{{DomainTag::Gripper, {5, 6, 8}},
                                                    {DomainTag::Blocksworld, {3, 4, 6}},
                                                    {DomainTag::Ferry, {4, 5, 7}},
                                                    {DomainTag::Visitall, {4, 9}}};
  for (Architecture arch : {Architecture::RGNN, Architecture::OE, Architecture::OAE}) {
    double worst_v = 0.0, worst_q = 0.0;
    int pairs = 0, actions = 0;
    for (int i = 0; i < 100; ++i) {
      const DomainTag tag = kDomains[static_cast<std::size_t>(i) % kDomains.size()];
      const auto& ns = sizes.at(tag);
      const int n = ns[static_cast<std::size_t>(i / 4) % ns.size()];
      const Domain& d = builtin_domain(tag);
      const PredicateTable table = make_predicate_table(d);
      ModelConfig mc;
      mc.arch = arch;
      mc.hidden = 8;
      mc.layers = 3;
      mc.seed = static_cast<std::uint64_t>(1000 + i);
      mc.head = Head::V;
      const Model v(mc, table);
      mc.head = Head::Q;
      const Model q(mc, table);
      const Instance inst = generate_instance({tag, n, static_cast<std::uint64_t>(i)});
      const GroundTask a = ground(d, inst);
      const GroundTask b = ground(d, qvp::testing::permute_objects(inst, static_cast<std::uint64_t>(7 * i + 1)));
      const auto walk = qvp::testing::random_walk(a, 1 + i % 12, static_cast<std::uint64_t>(i));
      const State& s = walk.back();
      const State t = qvp::testing::map_state(a, b, s);
      ForwardStats stats;
      worst_v = std::max(worst_v, std::fabs(ModelEstimator(v).state_values(a, {s}, stats)[0] -
                                            ModelEstimator(v).state_values(b, {t}, stats)[0]));
      const auto app_a = applicable_actions(a, s);
      const auto app_b = applicable_actions(b, t);
      const auto qa = ModelEstimator(q).action_values(a, s, app_a, stats);
      const auto qb = ModelEstimator(q).action_values(b, t, app_b, stats);
      std::map<std::string, double> mb;
      for (std::size_t j = 0; j < app_b.size(); ++j) mb[b.action_name(app_b[j])] = qb[j];
      if (mb.size() != app_a.size()) worst_q = INFINITY;
      for (std::size_t j = 0; j < app_a.size(); ++j) {
        auto it = mb.find(a.action_name(app_a[j]));
        worst_q = std::max(worst_q, it == mb.end() ? INFINITY : std::fabs(qa[j] - it->second));
        ++actions;
      }
      ++pairs;
    }
    pass = pass && worst_v < 1e-9 && worst_q < 1e-9;
    detail << to_string(arch) << ": pairs=" << pairs << " q_actions=" << actions << " max|dV|=" << fmt(worst_v)
           << " max|dQ|=" << fmt(worst_q) << "; ";
  }
  return {pass, detail.str()};
}

// ------------------------------------------------------- criteria 5, 6, 9

struct Reproduction {
  std::string err_diff_csv;
  std::map<std::string, std::string> scaling_csv;
  std::map<std::string, std::vector<ErrDiff>> per_seed;  // variant -> by seed index
  std::map<std::string, ScalingReport> scaling;
  std::map<std::string, int> seeds_finished;
  double seconds = 0.0;
};

constexpr int kSeeds = 3;
constexpr int kTrainMin = 2;  // sizes below the generator's minimum are skipped
constexpr int kTrainMax = 10;
constexpr int kScalingCap = 45;

Reproduction reproduce(int workers, const fs::path& artifacts, const std::string& tag) {
  const auto t0 = std::chrono::steady_clock::now();
  Reproduction out;
  TeacherOptions teacher;
  teacher.workers = workers;
  const auto sizes = feasible_sizes(DomainTag::Gripper, kTrainMin, kTrainMax);
  const Dataset ds = build_dataset(builtin_domain(DomainTag::Gripper),
                                   sample_instances(DomainTag::Gripper, sizes, 20, 1234), teacher);
  std::ostringstream ed;
  ed << std::setprecision(10) << "variant,seed,err,diff,tuples,pairs\n";
  for (Regularizer reg : {Regularizer::None, Regularizer::Explicit}) {
    const std::string variant = reg == Regularizer::None ? "vanilla" : "explicit";
    ModelConfig mc;
    mc.arch = Architecture::RGNN;
    mc.head = Head::Q;
    mc.hidden = 16;
    mc.layers = 8;
    LossConfig lc;
    lc.head = Head::Q;
    lc.regularizer = reg;
    TrainConfig tc;
    tc.epochs = 60;
    tc.batch_size = 16;
    tc.seeds = kSeeds;
    tc.seed = 99;
    const TrainResult r = train(ds, mc, lc, tc);
    out.seeds_finished[variant] = static_cast<int>(r.seed_models.size());
    auto& seeds = out.per_seed[variant];
    for (const auto& [index, model] : r.seed_models) {
      const ErrDiff e = err_diff(ModelEstimator(model), ds);
      seeds.push_back(e);
      ed << variant << ',' << index << ',' << e.err << ',' << e.diff << ',' << e.tuples << ',' << e.pairs << '\n';
    }
    ScalingConfig sc;
    sc.max_size = kScalingCap;
    sc.seed = 4242;
    sc.coverage.workers = workers;
    const ScalingReport rep = scaling_evaluation(ModelEstimator(r.model), DomainTag::Gripper, sc);
    std::ostringstream csv;
    write_scaling_csv(rep, csv);
    out.scaling_csv[variant] = csv.str();
    out.scaling[variant] = rep;
    std::ofstream(artifacts / ("scaling-" + variant + "-" + tag + ".csv")) << csv.str();
  }
  out.err_diff_csv = ed.str();
  std::ofstream(artifacts / ("err-diff-" + tag + ".csv")) << out.err_diff_csv;
  out.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return out;
}

Verdict err_diff_ordering(const Reproduction& r) {
  const auto& van = r.per_seed.at("vanilla");
  const auto& exp = r.per_seed.at("explicit");
  bool pass = van.size() == kSeeds && exp.size() == kSeeds;
  std::ostringstream d;
  for (std::size_t i = 0; i < std::min(van.size(), exp.size()); ++i) {
    pass = pass && exp[i].diff > van[i].diff && exp[i].err <= 2.0;
    d << "seed" << i << ": diff " << fmt(exp[i].diff) << " vs " << fmt(van[i].diff) << ", err " << fmt(exp[i].err)
      << "; ";
  }
  d << "finished seeds " << van.size() << '+' << exp.size() << " (" << fmt(r.seconds) << "s incl. scaling)";
  return {pass, d.str()};
}

Verdict scaling_ordering(const Reproduction& r) {
  const ScalingReport& exp = r.scaling.at("explicit");
  const ScalingReport& van = r.scaling.at("vanilla");
  const int required = 3 * kTrainMax;
  bool covered = exp.scale >= required;
  int weakest_size = 0;
  double weakest = 1.0;
  for (const auto& e : exp.sizes) {
    if (e.size > required) break;
    if (e.c_hat < weakest) {
      weakest = e.c_hat;
      weakest_size = e.size;
    }
  }
  covered = covered && weakest >= 0.9;
  return {exp.scov > van.scov && covered,
          "SCov explicit=" + fmt(exp.scov) + " (scale " + std::to_string(exp.scale) + ") vanilla=" + fmt(van.scov) +
              " (scale " + std::to_string(van.scale) + "); min c_hat up to size " + std::to_string(required) + " = " +
              fmt(weakest) + (weakest_size ? " at " + std::to_string(weakest_size) : "")};
}

// ------------------------------------------------------------ criterion 7

std::string bench_csv(const EfficiencyReport& rep) {
  std::ostringstream o;
  write_efficiency_csv(rep, o);
  return o.str();
}

EfficiencyReport run_bench() {
  std::vector<int> sizes;
  for (int n = 4; n <= 20; ++n) sizes.push_back(n);
  BenchConfig cfg;
  cfg.seed = 17;
  return efficiency_bench(DomainTag::Gripper, {Architecture::RGNN, Architecture::OE, Architecture::OAE}, sizes, cfg);
}

Verdict efficiency_counts(const EfficiencyReport& rep) {
  bool pass = !rep.rows.empty();
  std::map<std::string, std::pair<double, double>> work;  // arch -> (v, q)
  int rows = 0;
  for (const auto& row : rep.rows) {
    const auto expected_v = static_cast<std::uint64_t>(std::llround(row.mean_branching * row.states));
    pass = pass && row.counts_exact && row.q.encoder_calls == static_cast<std::uint64_t>(row.states) &&
           row.v.encoder_calls == expected_v;
    work[row.arch].first += static_cast<double>(row.v.work_units);
    work[row.arch].second += static_cast<double>(row.q.work_units);
    ++rows;
  }
  std::ostringstream d;
  d << "rows=" << rows << " per-state counts " << (pass ? "exact" : "NOT exact") << "; V/Q work";
  for (const auto& [arch, w] : work) {
    const double ratio = w.first / w.second;
    pass = pass && ratio > 2.0;
    d << ' ' << arch << '=' << fmt(ratio);
  }
  return {pass, d.str()};
}

// ------------------------------------------------------------ criterion 8

Verdict scaling_arithmetic() {
  auto stub = [](std::vector<double> cov, int first) {
    return [cov, first](int n) {
      CoverageEstimate e;
      e.size = n;
      e.c_hat = cov[static_cast<std::size_t>(n - first)];
      return e;
    };
  };
  auto range = [](int lo, int hi) {
    std::vector<int> v;
    for (int n = lo; n <= hi; ++n) v.push_back(n);
    return v;
  };
  const auto a = scaling_evaluation(stub({1.0, 1.0, 0.8, 0.2}, 2), range(2, 5));
  const auto b = scaling_evaluation(stub(std::vector<double>(93, 0.0), 8), range(8, 100));
  const auto c = scaling_evaluation(stub(std::vector<double>(101, 1.0), 0), feasible_sizes(DomainTag::Gripper, 5, 100));
  const bool pass = a.scale == 5 && a.scov == 3.0 && a.termination == "below-threshold" && b.scale == 8 &&
                    b.scov == 0.0 && b.sizes.size() == 1 && c.scale == 100 && c.termination == "max-size";
  return {pass, "stub(1,1,.8,.2): Scale " + std::to_string(a.scale) + " SCov " + fmt(a.scov) +
                    "; min-size failure: Scale " + std::to_string(b.scale) + " SCov " + fmt(b.scov) +
                    "; always-success: Scale " + std::to_string(c.scale) + " " + c.termination};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Acceptance checks"};
  std::vector<int> only;
  int workers = 4;
  std::string artifacts = "acceptance-artifacts";
  app.add_option("--only", only, "Criteria to run (default: all)")->delimiter(',');
  app.add_option("--workers", workers)->capture_default_str();
  app.add_option("--artifacts", artifacts, "Directory for CSV reports")->capture_default_str();
  CLI11_PARSE(app, argc, argv);
  fs::create_directories(artifacts);
  auto wanted = [&](int c) { return only.empty() || std::count(only.begin(), only.end(), c); };

  int failures = 0;
  auto report = [&](int c, const std::string& name, const std::function<Verdict()>& fn) {
    if (!wanted(c)) return;
    const auto t0 = std::chrono::steady_clock::now();
    Verdict v;
    try {
      v = fn();
    } catch (const std::exception& e) {
      v = {false, std::string("exception: ") + e.what()};
    }
    const double s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    failures += !v.pass;
    std::cout << "criterion " << c << ' ' << (v.pass ? "PASS" : "FAIL") << ' ' << name << " [" << fmt(s) << "s] "
              << v.detail << std::endl;
  };

  report(1, "oracle-equivalence", oracle_equivalence);
  report(2, "gradient-correctness", gradient_correctness);
  report(3, "regularizer-exactness", regularizer_exactness);
  report(4, "permutation-invariance", permutation_invariance);

  std::optional<Reproduction> first;
  std::optional<EfficiencyReport> bench;
  auto reproduction = [&]() -> const Reproduction& {
    if (!first) first = reproduce(workers, artifacts, "a");
    return *first;
  };
  report(5, "err-diff-ordering", [&] { return err_diff_ordering(reproduction()); });
  report(6, "scaling-ordering", [&] { return scaling_ordering(reproduction()); });
  report(7, "efficiency-counts", [&] {
    bench = run_bench();
    std::ofstream(fs::path(artifacts) / "efficiency-a.csv") << bench_csv(*bench);
    return efficiency_counts(*bench);
  });
  report(8, "scaling-arithmetic", scaling_arithmetic);
  report(9, "determinism", [&] {
    const Reproduction& a = reproduction();
    const Reproduction b = reproduce(workers, artifacts, "b");
    const std::string bench_a = bench ? bench_csv(*bench) : bench_csv(run_bench());
    const std::string bench_b = bench_csv(run_bench());
    std::ofstream(fs::path(artifacts) / "efficiency-b.csv") << bench_b;
    const bool ed = a.err_diff_csv == b.err_diff_csv;
    const bool sc = a.scaling_csv == b.scaling_csv;
    const bool ef = bench_a == bench_b;
    return Verdict{ed && sc && ef, std::string("err-diff csv ") + (ed ? "identical" : "DIFFERS") + ", scaling csv " +
                                       (sc ? "identical" : "DIFFERS") + ", efficiency csv " +
                                       (ef ? "identical" : "DIFFERS")};
  });
  std::cout << (failures ? "acceptance: " + std::to_string(failures) + " criteria failed" : "acceptance: all passed")
            << std::endl;
  return failures ? 1 : 0;
}
