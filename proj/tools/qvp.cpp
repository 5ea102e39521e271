// qvp: dataset generation, training, policy execution and evaluation reports.

#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"
#include "qvp/evaluation.hpp"
#include "qvp/training.hpp"

using namespace qvp;
using ordered_json = nlohmann::ordered_json;

namespace {

struct SizeRange {
  int lo = 0;
  int hi = -1;
};

// "A..B" or a single size.
SizeRange parse_sizes(const std::string& text) {
  SizeRange r;
  try {
    std::size_t used = 0;
    if (auto dots = text.find(".."); dots != std::string::npos) {
      r.lo = std::stoi(text.substr(0, dots), &used);
      if (used != dots) throw std::invalid_argument(text);
      const std::string rest = text.substr(dots + 2);
      r.hi = std::stoi(rest, &used);
      if (used != rest.size()) throw std::invalid_argument(text);
    } else {
      r.lo = r.hi = std::stoi(text, &used);
      if (used != text.size()) throw std::invalid_argument(text);
    }
  } catch (const std::logic_error&) {
    throw ConfigError("invalid size range '" + text + "' (expected A..B)");
  }
  return r;
}

std::ofstream open_output(const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path);
  return out;
}

// Writes through `fn` to `path`, or to stdout when the path is empty or "-".
template <typename F>
void emit(const std::string& path, F&& fn) {
  if (path.empty() || path == "-") {
    fn(std::cout);
    return;
  }
  auto out = open_output(path);
  fn(out);
}

std::string stem(const std::string& path) {
  const auto slash = path.find_last_of('/');
  std::string name = slash == std::string::npos ? path : path.substr(slash + 1);
  if (auto dot = name.rfind('.'); dot != std::string::npos && dot > 0) name.erase(dot);
  return name;
}

void check_model_domain(const Model& model, const Domain& domain) {
  if (model.table().fingerprint != domain_fingerprint(domain)) {
    throw Error("model was trained on a different domain (predicate table fingerprint mismatch)");
  }
}

ordered_json stats_json(const ForwardStats& s) {
  return {{"encoder_calls", s.encoder_calls},
          {"forward_calls", s.forward_calls},
          {"work_units", s.work_units},
          {"seconds", s.seconds}};
}

struct Global {
  std::uint64_t seed = 0;
  int workers = 1;
};

// ---------------------------------------------------------------- gen-data

struct GenDataOptions {
  std::string builtin;
  std::string domain;
  std::vector<std::string> problems;
  std::string sizes;
  int per_size = 100;
  std::string teacher = "lmcut";
  std::string sibling = "lmcut";
  std::size_t max_expansions = 1'000'000;
  std::string out;
};

void add_gen_data(CLI::App& app, GenDataOptions& o) {
  auto* cmd = app.add_subcommand("gen-data", "Solve instances optimally and write a JSONL training dataset");
  auto* b = cmd->add_option("--builtin", o.builtin, "Generator domain (gripper, blocksworld, ferry, visitall)");
  auto* d = cmd->add_option("--domain", o.domain, "PDDL domain file (with --problems)");
  b->excludes(d);
  cmd->add_option("--problems", o.problems, "PDDL problem files used with --domain");
  cmd->add_option("--sizes", o.sizes, "Size range A..B (default: the domain's training range)");
  cmd->add_option("--per-size", o.per_size, "Unique instances per size")->capture_default_str();
  cmd->add_option("--teacher", o.teacher, "Admissible heuristic for the optimal teacher")->capture_default_str();
  cmd->add_option("--sibling", o.sibling, "Heuristic for successor states of non-teacher actions")
      ->capture_default_str();
  cmd->add_option("--max-expansions", o.max_expansions, "Teacher search budget per instance")->capture_default_str();
  cmd->add_option("--out", o.out, "Dataset path")->required();
}

int run_gen_data(const Global& g, const GenDataOptions& o) {
  TeacherOptions teacher;
  teacher.teacher = parse_heuristic_kind(o.teacher);
  teacher.sibling = parse_heuristic_kind(o.sibling);
  teacher.max_expansions = o.max_expansions;
  teacher.workers = g.workers;
  if (o.per_size < 0) throw ConfigError("--per-size must be non-negative");

  Domain domain;
  std::vector<NamedInstance> named;
  nlohmann::json provenance;
  if (!o.builtin.empty()) {
    const DomainTag tag = parse_domain_tag(o.builtin);
    domain = builtin_domain(tag);
    SizeRange range;
    std::tie(range.lo, range.hi) = default_training_range(tag);
    if (!o.sizes.empty()) range = parse_sizes(o.sizes);
    const auto sizes = range.lo <= range.hi ? feasible_sizes(tag, range.lo, range.hi) : std::vector<int>{};
    named = sample_instances(tag, sizes, o.per_size, g.seed);
    provenance["generator"] = to_string(tag);
    provenance["sizes"] = std::to_string(range.lo) + ".." + std::to_string(range.hi);
    provenance["per_size"] = o.per_size;
    provenance["seed"] = g.seed;
  } else if (!o.domain.empty()) {
    domain = parse_domain(read_file(o.domain), o.domain);
    for (const auto& p : o.problems) named.push_back({stem(p), parse_instance(read_file(p), domain, p)});
    provenance["domain_file"] = o.domain;
  } else {
    throw ConfigError("gen-data needs --builtin or --domain");
  }

  std::vector<std::string> skipped;
  Dataset ds = build_dataset(domain, named, teacher, &skipped);
  for (const auto& [k, v] : provenance.items()) ds.provenance[k] = v;
  for (const auto& s : skipped) std::cerr << "skipped " << s << '\n';
  save_dataset(ds, o.out);
  std::cerr << "wrote " << ds.instances.size() << " instances, " << ds.num_tuples() << " tuples to " << o.out << '\n';
  return 0;
}

// ------------------------------------------------------------------- train

struct TrainOptions {
  std::string data;
  std::string arch = "rgnn";
  std::string head = "q";
  std::string reg = "none";
  std::string aggregation = "smoothmax";
  double lambda = 1.0;
  int epochs = 100;
  int batch = 256;
  double lr = 0.0;
  double clip = 0.1;
  std::string clip_mode = "value";
  int seeds = 3;
  int hidden = 32;
  int layers = 30;
  std::string builtin;
  std::string val_sizes;
  int val_per_size = 5;
  int val_stride = 1;
  int val_every = 1;
  std::vector<std::string> val_problems;
  std::string log;
  bool quiet = false;
  std::string out;
};

void add_train(CLI::App& app, TrainOptions& o) {
  auto* cmd = app.add_subcommand("train", "Train value networks over several seeds and keep the best checkpoint");
  cmd->add_option("--data", o.data, "Dataset from gen-data")->required();
  cmd->add_option("--arch", o.arch, "rgnn, oe or oae")->capture_default_str();
  cmd->add_option("--head", o.head, "v or q")->capture_default_str();
  cmd->add_option("--reg", o.reg, "none, explicit or heuristic")->capture_default_str();
  cmd->add_option("--lambda", o.lambda, "Penalty weight")->capture_default_str();
  cmd->add_option("--aggregation", o.aggregation, "R-GNN message aggregation: smoothmax or max")
      ->capture_default_str();
  cmd->add_option("--epochs", o.epochs)->capture_default_str();
  cmd->add_option("--batch", o.batch)->capture_default_str();
  cmd->add_option("--lr", o.lr, "Learning rate (0: 0.0002, or 0.002 with a regularizer)")->capture_default_str();
  cmd->add_option("--clip", o.clip, "Gradient clip value")->capture_default_str();
  cmd->add_option("--clip-mode", o.clip_mode, "value or norm")->capture_default_str();
  cmd->add_option("--seeds", o.seeds, "Independent training runs")->capture_default_str();
  cmd->add_option("--hidden", o.hidden, "Embedding size k")->capture_default_str();
  cmd->add_option("--layers", o.layers, "Message-passing layers L")->capture_default_str();
  cmd->add_option("--builtin", o.builtin, "Validate on this generator's instances after each epoch");
  cmd->add_option("--val-sizes", o.val_sizes, "Validation size range A..B (default: minimum size to the cap)");
  cmd->add_option("--val-per-size", o.val_per_size)->capture_default_str();
  cmd->add_option("--val-stride", o.val_stride, "Use every n-th feasible size")->capture_default_str();
  cmd->add_option("--val-every", o.val_every, "Validation interval in epochs")->capture_default_str();
  cmd->add_option("--val-problems", o.val_problems, "Fixed validation instances (PDDL problem files)");
  cmd->add_option("--log", o.log, "Training log CSV (default: <out>.log.csv)");
  cmd->add_flag("--quiet", o.quiet, "No per-epoch progress");
  cmd->add_option("--out", o.out, "Checkpoint path")->required();
}

int run_train(const Global& g, const TrainOptions& o) {
  ModelConfig mc;
  mc.arch = parse_architecture(o.arch);
  mc.head = parse_head(o.head);
  mc.hidden = o.hidden;
  mc.layers = o.layers;
  mc.aggregation = parse_aggregation(o.aggregation);
  LossConfig lc;
  lc.head = mc.head;
  lc.regularizer = parse_regularizer(o.reg);
  lc.lambda = o.lambda;
  lc.validate();
  TrainConfig tc;
  tc.epochs = o.epochs;
  tc.batch_size = o.batch;
  tc.learning_rate = o.lr;
  tc.clip = o.clip;
  if (o.clip_mode != "value" && o.clip_mode != "norm") throw ConfigError("--clip-mode must be value or norm");
  tc.clip_mode = o.clip_mode == "value" ? ClipMode::Value : ClipMode::GlobalNorm;
  tc.seeds = o.seeds;
  tc.seed = g.seed;
  tc.validate_every = o.val_every;
  tc.progress = o.quiet ? nullptr : &std::cerr;
  tc.validate();
  if (mc.hidden <= 0 || mc.layers <= 0) throw ConfigError("--hidden and --layers must be positive");
  if (!o.builtin.empty() && !o.val_problems.empty()) throw ConfigError("use either --builtin or --val-problems");

  const Dataset ds = load_dataset(o.data);
  ValidationHook hook;
  std::vector<GroundTask> pool;
  ValidationConfig vc;
  DomainTag tag{};
  if (!o.builtin.empty()) {
    tag = parse_domain_tag(o.builtin);
    if (domain_fingerprint(builtin_domain(tag)) != ds.fingerprint) {
      throw ConfigError("dataset domain is not the builtin " + o.builtin + " domain");
    }
    if (!o.val_sizes.empty()) {
      const SizeRange r = parse_sizes(o.val_sizes);
      vc.min_size = r.lo;
      vc.max_size = r.hi;
    }
    vc.per_size = o.val_per_size;
    vc.stride = o.val_stride;
    vc.seed = derive_seed(g.seed, 0x76616c69ULL);
    vc.workers = g.workers;
    hook = [&](const Model& m) { return dynamic_validation(ModelEstimator(m), tag, vc); };
  } else if (!o.val_problems.empty()) {
    for (const auto& p : o.val_problems) pool.push_back(ground(ds.domain, parse_instance(read_file(p), ds.domain, p)));
    hook = [&](const Model& m) { return pool_validation(ModelEstimator(m), pool); };
  }

  const TrainResult r = train(ds, mc, lc, tc, hook);
  for (const auto& f : r.failed_seeds) std::cerr << "warning: " << f << '\n';
  nlohmann::json extra;
  extra["best_seed"] = r.best_seed;
  extra["best_epoch"] = r.best_epoch;
  extra["best_score"] = r.best_score;
  extra["selection"] = hook ? "validation" : "objective";
  extra["regularizer"] = to_string(lc.regularizer);
  extra["lambda"] = lc.lambda;
  extra["learning_rate"] = tc.resolved_learning_rate(lc);
  extra["dataset_tuples"] = ds.num_tuples();
  r.model.save(o.out, extra);
  emit(o.log.empty() ? o.out + ".log.csv" : o.log, [&](std::ostream& out) { write_training_log(r.log, out); });
  std::cerr << "best checkpoint: seed " << r.best_seed << " epoch " << r.best_epoch << " score " << r.best_score
            << " -> " << o.out << '\n';
  return 0;
}

// --------------------------------------------------------------------- run

struct RunOptions {
  std::string model;
  std::string builtin;
  std::string domain;
  std::string problem;
  int size = 0;
  int step_limit = 0;
  bool allow_revisit = false;
  std::string plan;
  std::string out;
};

void add_run(CLI::App& app, RunOptions& o) {
  auto* cmd = app.add_subcommand("run", "Execute the greedy policy of a checkpoint on one instance");
  cmd->add_option("--model", o.model, "Checkpoint")->required();
  cmd->add_option("--builtin", o.builtin, "Builtin domain (with --size, or with --problem)");
  cmd->add_option("--domain", o.domain, "PDDL domain file");
  cmd->add_option("--problem", o.problem, "PDDL problem file");
  cmd->add_option("--size", o.size, "Generate an instance of this size (uses --seed)");
  cmd->add_option("--step-limit", o.step_limit, "Step limit (default: 100 + number of objects)");
  cmd->add_flag("--allow-revisit", o.allow_revisit, "Do not exclude actions leading to visited states");
  cmd->add_option("--plan", o.plan, "Write the executed actions as a plan file");
  cmd->add_option("--out", o.out, "Run summary JSON (default: stdout)");
}

int run_run(const Global& g, const RunOptions& o) {
  Domain domain;
  Instance instance;
  if (!o.builtin.empty()) {
    const DomainTag tag = parse_domain_tag(o.builtin);
    domain = builtin_domain(tag);
    if (!o.problem.empty()) {
      instance = parse_instance(read_file(o.problem), domain, o.problem);
    } else if (o.size > 0) {
      instance = generate_instance({tag, o.size, g.seed});
    } else {
      throw ConfigError("run needs --problem or --size with --builtin");
    }
  } else if (!o.domain.empty() && !o.problem.empty()) {
    domain = parse_domain(read_file(o.domain), o.domain);
    instance = parse_instance(read_file(o.problem), domain, o.problem);
  } else {
    throw ConfigError("run needs --builtin, or --domain with --problem");
  }
  if (o.step_limit < 0) throw ConfigError("--step-limit must be at least 1");

  const Model model = Model::load(o.model);
  check_model_domain(model, domain);
  const GroundTask task = ground(domain, instance);
  PolicyConfig pc;
  pc.step_limit = o.step_limit > 0 ? o.step_limit : default_step_limit(static_cast<int>(instance.objects.size()));
  pc.forbid_revisit = !o.allow_revisit;
  const RunResult r = run_policy(ModelEstimator(model), task, pc);

  if (!o.plan.empty()) emit(o.plan, [&](std::ostream& out) { write_plan(task, r.actions, out); });
  ordered_json j;
  j["instance"] = instance.name;
  j["head"] = to_string(model.config().head);
  j["outcome"] = to_string(r.outcome);
  j["solved"] = r.solved();
  j["valid_plan"] = r.solved() && validate_plan(task, r.actions);
  j["length"] = r.length();
  j["cost"] = r.cost;
  j["step_limit"] = pc.step_limit;
  j["stats"] = stats_json(r.stats);
  emit(o.out, [&](std::ostream& out) { out << j.dump(2) << '\n'; });
  return 0;
}

// ------------------------------------------------------------ eval-scaling

struct ScalingOptions {
  std::string model;
  std::string builtin = "gripper";
  int min_size = 0;
  int max_size = 0;
  double threshold = 0.3;
  std::string interval = "wald";
  double z = 1.645;
  double half_width = 0.10;
  int min_runs = 10;
  int max_runs = 200;
  bool allow_revisit = false;
  std::vector<double> stub;
  std::string json;
  std::string plot;
  std::string out;
};

void add_eval_scaling(CLI::App& app, ScalingOptions& o) {
  auto* cmd = app.add_subcommand("eval-scaling", "Coverage on increasing instance sizes (Scale and SCov)");
  auto* m = cmd->add_option("--model", o.model, "Checkpoint");
  cmd->add_option("--builtin", o.builtin, "Generator domain")->capture_default_str();
  cmd->add_option("--min-size", o.min_size, "First size (default: domain minimum)");
  cmd->add_option("--max-size", o.max_size, "Last size (default: 100, 1000 for visitall)");
  cmd->add_option("--threshold", o.threshold, "Stop after the first size below this coverage")->capture_default_str();
  cmd->add_option("--interval", o.interval, "wald or wilson")->capture_default_str();
  cmd->add_option("--z", o.z)->capture_default_str();
  cmd->add_option("--half-width", o.half_width)->capture_default_str();
  cmd->add_option("--min-runs", o.min_runs)->capture_default_str();
  cmd->add_option("--max-runs", o.max_runs)->capture_default_str();
  cmd->add_flag("--allow-revisit", o.allow_revisit);
  auto* s = cmd->add_option("--stub-coverage", o.stub, "Replace the policy by fixed coverages for consecutive sizes")
                ->delimiter(',');
  m->excludes(s);
  cmd->add_option("--json", o.json, "Also write the JSON summary here");
  cmd->add_option("--plot", o.plot, "Also write (size, coverage) columns for plotting");
  cmd->add_option("--out", o.out, "CSV report (default: stdout)");
}

int run_eval_scaling(const Global& g, const ScalingOptions& o) {
  ScalingReport report;
  if (!o.stub.empty()) {
    const int lo = o.min_size > 0 ? o.min_size : 1;
    std::vector<int> sizes;
    for (std::size_t i = 0; i < o.stub.size(); ++i) sizes.push_back(lo + static_cast<int>(i));
    report = scaling_evaluation(
        [&](int n) {
          CoverageEstimate e;
          e.c_hat = o.stub[static_cast<std::size_t>(n - lo)];
          return e;
        },
        sizes, o.threshold);
  } else {
    if (o.model.empty()) throw ConfigError("eval-scaling needs --model (or --stub-coverage)");
    const DomainTag tag = parse_domain_tag(o.builtin);
    ScalingConfig sc;
    sc.coverage.z = o.z;
    sc.coverage.half_width = o.half_width;
    sc.coverage.min_runs = o.min_runs;
    sc.coverage.max_runs = o.max_runs;
    sc.coverage.method = parse_interval_method(o.interval);
    sc.coverage.workers = g.workers;
    sc.threshold = o.threshold;
    sc.min_size = o.min_size;
    sc.max_size = o.max_size;
    sc.seed = g.seed;
    sc.forbid_revisit = !o.allow_revisit;
    if (sc.coverage.min_runs < 1 || sc.coverage.max_runs < sc.coverage.min_runs) {
      throw ConfigError("need 1 <= --min-runs <= --max-runs");
    }
    const Model model = Model::load(o.model);
    check_model_domain(model, builtin_domain(tag));
    const ModelEstimator est(model);
    report = scaling_evaluation(est, tag, sc);
  }
  emit(o.out, [&](std::ostream& out) { write_scaling_csv(report, out); });
  if (!o.json.empty()) emit(o.json, [&](std::ostream& out) { write_scaling_json(report, out); });
  if (!o.plot.empty()) emit(o.plot, [&](std::ostream& out) { write_scaling_gnuplot(report, out); });
  std::cerr << "scale " << report.scale << " scov " << report.scov << " (" << report.termination << ")\n";
  return 0;
}

// ---------------------------------------------------------------- err-diff

struct ErrDiffOptions {
  std::string model;
  std::string data;
  std::string out;
};

void add_err_diff(CLI::App& app, ErrDiffOptions& o) {
  auto* cmd = app.add_subcommand("err-diff", "Teacher Q-value error and teacher/non-teacher Q-value gap");
  cmd->add_option("--model", o.model, "Q-head checkpoint")->required();
  cmd->add_option("--data", o.data, "Dataset")->required();
  cmd->add_option("--out", o.out, "CSV report (default: stdout)");
}

int run_err_diff(const Global&, const ErrDiffOptions& o) {
  const Model model = Model::load(o.model);
  const Dataset ds = load_dataset(o.data);
  check_model_domain(model, ds.domain);
  const ErrDiff r = err_diff(ModelEstimator(model), ds);
  emit(o.out, [&](std::ostream& out) {
    out << std::setprecision(10) << "err,diff,tuples,pairs\n" << r.err << ',' << r.diff << ',' << r.tuples << ','
        << r.pairs << '\n';
  });
  return 0;
}

// ------------------------------------------------------------------- bench

struct BenchOptions {
  std::string builtin = "gripper";
  std::string sizes = "4..20";
  std::vector<std::string> archs{"rgnn", "oe", "oae"};
  int instances = 25;
  int walk_length = 25;
  int hidden = 32;
  int layers = 30;
  std::string json;
  std::string out;
};

void add_bench(CLI::App& app, BenchOptions& o) {
  auto* cmd = app.add_subcommand("bench", "Encoder calls and work units of V- versus Q-based action selection");
  cmd->add_option("--builtin", o.builtin)->capture_default_str();
  cmd->add_option("--sizes", o.sizes)->capture_default_str();
  cmd->add_option("--archs", o.archs)->delimiter(',')->capture_default_str();
  cmd->add_option("--instances", o.instances, "Random walks per size")->capture_default_str();
  cmd->add_option("--walk-length", o.walk_length)->capture_default_str();
  cmd->add_option("--hidden", o.hidden)->capture_default_str();
  cmd->add_option("--layers", o.layers)->capture_default_str();
  cmd->add_option("--json", o.json, "Also write the JSON report (with wall time) here");
  cmd->add_option("--out", o.out, "CSV report (default: stdout)");
}

int run_bench(const Global& g, const BenchOptions& o) {
  const DomainTag tag = parse_domain_tag(o.builtin);
  std::vector<Architecture> archs;
  for (const auto& a : o.archs) archs.push_back(parse_architecture(a));
  const SizeRange r = parse_sizes(o.sizes);
  std::vector<int> sizes;
  for (int n = r.lo; n <= r.hi; ++n) sizes.push_back(n);
  if (o.instances < 1 || o.walk_length < 0 || o.hidden < 1 || o.layers < 1) {
    throw ConfigError("bench needs positive --instances, --hidden, --layers");
  }
  BenchConfig bc;
  bc.instances = o.instances;
  bc.walk_length = o.walk_length;
  bc.hidden = o.hidden;
  bc.layers = o.layers;
  bc.seed = g.seed;
  const EfficiencyReport report = efficiency_bench(tag, archs, sizes, bc);
  emit(o.out, [&](std::ostream& out) { write_efficiency_csv(report, out); });
  if (!o.json.empty()) emit(o.json, [&](std::ostream& out) { write_efficiency_json(report, out); });
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Learned state- and action-value policies for classical planning"};
  app.set_config("--config", "", "TOML file with one [command] section per subcommand");
  app.fallthrough();
  app.require_subcommand(1);
  Global g;
  app.add_option("--seed", g.seed, "Root seed")->capture_default_str();
  app.add_option("--workers", g.workers, "Worker threads")->capture_default_str();

  GenDataOptions gen;
  TrainOptions tr;
  RunOptions run;
  ScalingOptions sc;
  ErrDiffOptions ed;
  BenchOptions bench;
  add_gen_data(app, gen);
  add_train(app, tr);
  add_run(app, run);
  add_eval_scaling(app, sc);
  add_err_diff(app, ed);
  add_bench(app, bench);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 2;
  }

  CLI::App* cmd = app.get_subcommands().front();
  std::cerr << "# resolved configuration\nseed=" << g.seed << "\nworkers=" << g.workers << "\n[" << cmd->get_name()
            << "]\n"
            << cmd->config_to_str(true, false);

  try {
    if (g.workers < 1) throw ConfigError("--workers must be at least 1");
    const std::string& name = cmd->get_name();
    if (name == "gen-data") return run_gen_data(g, gen);
    if (name == "train") return run_train(g, tr);
    if (name == "run") return run_run(g, run);
    if (name == "eval-scaling") return run_eval_scaling(g, sc);
    if (name == "err-diff") return run_err_diff(g, ed);
    if (name == "bench") return run_bench(g, bench);
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 2;
}
