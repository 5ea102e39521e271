#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "qvp/evaluation.hpp"
#include "support.hpp"

using namespace qvp;
using qvp::testing::OracleEstimator;

namespace {

// Independent closed forms of the two interval half-widths.
double wald(int k, int n, double z) {
  const double p = static_cast<double>(k) / n;
  return z * std::sqrt(p * (1 - p) / n);
}

double wilson(int k, int n, double z) {
  const double p = static_cast<double>(k) / n;
  const double denom = 1 + z * z / n;
  return (z / denom) * std::sqrt(p * (1 - p) / n + z * z / (4.0 * n * n));
}

CoverageEstimate fixed(int size, double c) {
  CoverageEstimate e;
  e.size = size;
  e.c_hat = c;
  return e;
}

std::vector<int> range(int lo, int hi) {
  std::vector<int> out;
  for (int n = lo; n <= hi; ++n) out.push_back(n);
  return out;
}

Dataset one_ball_dataset() {
  const Domain d = qvp::testing::fixture_domain("gripper-domain.pddl");
  std::vector<NamedInstance> named{{"one", parse_instance(qvp::testing::fixture("gripper-1ball.pddl"), d)}};
  return build_dataset(d, named, {});
}

class ConstantQ : public Estimator {
 public:
  explicit ConstantQ(double c) : c_(c) {}
  Head head() const override { return Head::Q; }
  std::vector<double> state_values(const GroundTask&, const std::vector<State>& states, ForwardStats&) const override {
    return std::vector<double>(states.size(), c_);
  }
  std::vector<double> action_values(const GroundTask&, const State&, const std::vector<ActionId>& actions,
                                    ForwardStats&) const override {
    return std::vector<double>(actions.size(), c_);
  }

 private:
  double c_;
};

}  // namespace

TEST(Coverage, AlwaysSuccessStopsAtMinimumRuns) {
  const auto e = estimate_coverage([](int, int) { return true; }, 7, {});
  EXPECT_EQ(e.runs, 10);
  EXPECT_EQ(e.c_hat, 1.0);
  EXPECT_EQ(e.half_width, 0.0);
  EXPECT_EQ(e.size, 7);
}

TEST(Coverage, AlwaysFailStopsAtMinimumRuns) {
  const auto e = estimate_coverage([](int, int) { return false; }, 7, {});
  EXPECT_EQ(e.runs, 10);
  EXPECT_EQ(e.c_hat, 0.0);
}

TEST(Coverage, AlternatingStubStopsAtClosedFormRunCount) {
  const auto alternating = [](int, int run) { return run % 2 == 0; };
  for (IntervalMethod method : {IntervalMethod::Wald, IntervalMethod::Wilson}) {
    CoverageConfig cfg;
    cfg.method = method;
    int expected = 0;
    for (int n = cfg.min_runs; n <= cfg.max_runs; ++n) {
      const int k = (n + 1) / 2;
      const double hw = method == IntervalMethod::Wald ? wald(k, n, 1.645) : wilson(k, n, 1.645);
      if (hw <= 0.1) {
        expected = n;
        break;
      }
    }
    const auto e = estimate_coverage(alternating, 5, cfg);
    EXPECT_EQ(e.runs, expected) << to_string(method);
    EXPECT_EQ(e.successes, (expected + 1) / 2);
    EXPECT_LE(e.half_width, 0.1);
  }
  // (1.645 * 0.5 / 0.1)^2 = 67.65, and odd counts are slightly off 1/2.
  EXPECT_EQ(estimate_coverage(alternating, 5, {}).runs, 68);
}

TEST(Coverage, RunCapIsRespected) {
  CoverageConfig cfg;
  cfg.half_width = 0.01;
  cfg.max_runs = 40;
  const auto e = estimate_coverage([](int, int run) { return run % 3 == 0; }, 5, cfg);
  EXPECT_EQ(e.runs, 40);
  EXPECT_EQ(e.successes, 14);
  EXPECT_DOUBLE_EQ(e.c_hat, 14.0 / 40.0);
}

TEST(Coverage, WorkersDoNotChangeTheStoppingPoint) {
  const auto probe = [](int size, int run) { return (run * 7 + size) % 5 != 0; };
  CoverageConfig one;
  CoverageConfig many;
  many.workers = 4;
  const auto a = estimate_coverage(probe, 9, one);
  const auto b = estimate_coverage(probe, 9, many);
  EXPECT_EQ(a.runs, b.runs);
  EXPECT_EQ(a.successes, b.successes);
}

TEST(Coverage, InvalidBoundsRejected) {
  CoverageConfig cfg;
  cfg.max_runs = 5;
  EXPECT_THROW(estimate_coverage([](int, int) { return true; }, 1, cfg), ConfigError);
  EXPECT_THROW(parse_interval_method("clopper"), ConfigError);
}

TEST(Scaling, StopsAfterFirstSizeBelowThreshold) {
  const std::vector<double> cov{1.0, 1.0, 0.8, 0.2, 1.0};
  const auto r = scaling_evaluation([&](int n) { return fixed(n, cov[n - 2]); }, range(2, 6));
  EXPECT_EQ(r.scale, 5);
  EXPECT_EQ(r.scov, 3.0);
  EXPECT_EQ(r.sizes.size(), 4u);
  EXPECT_EQ(r.termination, "below-threshold");
}

TEST(Scaling, FailureAtMinimumSize) {
  const auto r = scaling_evaluation([](int n) { return fixed(n, 0.0); }, range(8, 100));
  EXPECT_EQ(r.scale, 8);
  EXPECT_EQ(r.scov, 0.0);
  EXPECT_EQ(r.sizes.size(), 1u);
}

TEST(Scaling, AlwaysSuccessReachesTheCap) {
  const auto r = scaling_evaluation([](int n) { return fixed(n, 1.0); }, feasible_sizes(DomainTag::Gripper, 5, 100));
  EXPECT_EQ(r.scale, 100);
  EXPECT_EQ(r.scov, 96.0);
  EXPECT_EQ(r.termination, "max-size");
  EXPECT_EQ(max_size(DomainTag::Gripper), 100);
  EXPECT_EQ(max_size(DomainTag::Visitall), 1000);
}

TEST(Scaling, ThresholdIsStrict) {
  const auto r = scaling_evaluation([](int n) { return fixed(n, n == 3 ? 0.3 : 1.0); }, range(2, 4));
  EXPECT_EQ(r.scale, 4);
  EXPECT_EQ(r.termination, "max-size");
}

TEST(Scaling, ReportInvariantsAndWriters) {
  const std::vector<double> cov{1.0, 0.5, 0.1};
  const auto r = scaling_evaluation([&](int n) { return fixed(n, cov[n - 2]); }, range(2, 4));
  double sum = 0;
  for (const auto& e : r.sizes) sum += e.c_hat;
  EXPECT_EQ(r.scov, sum);
  EXPECT_EQ(r.scale, r.sizes.back().size);
  std::ostringstream csv, plot, json;
  write_scaling_csv(r, csv);
  write_scaling_gnuplot(r, plot);
  write_scaling_json(r, json);
  EXPECT_EQ(csv.str(), "size,runs,successes,c_hat,half_width\n2,0,0,1,0\n3,0,0,0.5,0\n4,0,0,0.1,0\n");
  EXPECT_EQ(plot.str(), "# size c_hat\n2 1\n3 0.5\n4 0.1\n");
  const auto j = nlohmann::json::parse(json.str());
  EXPECT_EQ(j.at("scale"), 4);
  EXPECT_EQ(j.at("termination"), "below-threshold");
  EXPECT_EQ(j.at("sizes").size(), 3u);
}

TEST(Scaling, OraclePolicyOnGripper) {
  ScalingConfig cfg;
  cfg.min_size = 5;
  cfg.max_size = 7;
  cfg.seed = 2;
  const auto r = scaling_evaluation(OracleEstimator(Head::Q), DomainTag::Gripper, cfg);
  EXPECT_EQ(r.scale, 7);
  EXPECT_EQ(r.scov, 3.0);
  for (const auto& e : r.sizes) EXPECT_EQ(e.runs, 10);
}

TEST(Validation, PerfectPolicyScoresNumberOfSizes) {
  ValidationConfig cfg;
  cfg.min_size = 5;
  cfg.max_size = 8;
  cfg.per_size = 2;
  EXPECT_EQ(dynamic_validation(OracleEstimator(Head::V), DomainTag::Gripper, cfg), 4.0);
  cfg.stride = 2;
  EXPECT_EQ(dynamic_validation(OracleEstimator(Head::V), DomainTag::Gripper, cfg), 2.0);
}

TEST(Validation, RandomModelOnBlocksworldIsImperfectAndDeterministic) {
  const Domain& d = builtin_domain(DomainTag::Blocksworld);
  ModelConfig mc;
  mc.head = Head::Q;
  mc.hidden = 8;
  mc.layers = 2;
  mc.seed = 3;
  const Model m(mc, make_predicate_table(d));
  const ModelEstimator est(m);
  ValidationConfig cfg;
  cfg.min_size = 8;
  cfg.max_size = 10;
  cfg.per_size = 3;
  cfg.seed = 11;
  const double a = dynamic_validation(est, DomainTag::Blocksworld, cfg);
  cfg.workers = 3;
  const double b = dynamic_validation(est, DomainTag::Blocksworld, cfg);
  EXPECT_LT(a, 3.0);
  EXPECT_EQ(a, b);
}

TEST(Validation, InstancePool) {
  const Dataset ds = one_ball_dataset();
  std::vector<GroundTask> pool{*ds.instances[0].task, *ds.instances[0].task};
  EXPECT_EQ(pool_validation(OracleEstimator(Head::Q), pool), 1.0);
  EXPECT_EQ(pool_validation(OracleEstimator(Head::Q), {}), 0.0);
}

TEST(ErrDiff, OracleQOnOneBallTuples) {
  // Tuples (h* = 3, 2, 1). Non-teacher Q*: pick-right 3 and move 5; drop 4; move back 3.
  const auto r = err_diff(OracleEstimator(Head::Q), one_ball_dataset());
  EXPECT_EQ(r.tuples, 3u);
  EXPECT_EQ(r.pairs, 4u);
  EXPECT_EQ(r.err, 0.0);
  EXPECT_EQ(r.diff, (0.0 + 2.0 + 2.0 + 2.0) / 4.0);
}

TEST(ErrDiff, ConstantModelHasNoDiff) {
  const auto r = err_diff(ConstantQ(0.5), one_ball_dataset());
  EXPECT_EQ(r.diff, 0.0);
  EXPECT_EQ(r.err, (2.5 + 1.5 + 0.5) / 3.0);
  EXPECT_THROW(err_diff(OracleEstimator(Head::V), one_ball_dataset()), ConfigError);
}

TEST(ErrDiff, SingleTupleReducesToTwoDifferences) {
  Dataset ds = one_ball_dataset();
  auto& tuples = ds.instances[0].tuples;
  tuples.erase(tuples.begin());
  tuples.resize(1);  // h* = 2 with one non-teacher action (drop, Q* = 4)
  ASSERT_EQ(tuples[0].others.size(), 1u);
  const auto r = err_diff(ConstantQ(3.25), ds);
  EXPECT_EQ(r.err, 1.25);
  EXPECT_EQ(r.diff, 0.0);
  const auto o = err_diff(OracleEstimator(Head::Q), ds);
  EXPECT_EQ(o.err, 0.0);
  EXPECT_EQ(o.diff, 2.0);
}

TEST(Efficiency, CountsPerState) {
  BenchConfig cfg;
  cfg.instances = 4;
  cfg.walk_length = 6;
  cfg.hidden = 4;
  cfg.layers = 2;
  cfg.seed = 9;
  const auto report = efficiency_bench(DomainTag::Gripper, {Architecture::RGNN, Architecture::OAE}, {5, 7}, cfg);
  ASSERT_EQ(report.rows.size(), 4u);
  for (const auto& row : report.rows) {
    EXPECT_TRUE(row.counts_exact);
    EXPECT_EQ(row.states, 4);
    EXPECT_EQ(row.q.encoder_calls, 4u);
    EXPECT_DOUBLE_EQ(static_cast<double>(row.v.encoder_calls), row.states * row.mean_branching);
    EXPECT_GT(row.v.work_units, row.q.work_units);
  }
  std::ostringstream a, b;
  write_efficiency_csv(report, a);
  write_efficiency_csv(efficiency_bench(DomainTag::Gripper, {Architecture::RGNN, Architecture::OAE}, {5, 7}, cfg), b);
  EXPECT_EQ(a.str(), b.str());
  EXPECT_EQ(a.str().substr(0, a.str().find('\n')),
            "arch,size,states,mean_branching,v_encoder_calls,q_encoder_calls,v_work_units,q_work_units,work_ratio,"
            "counts_exact");
}
