#include "qvp/training.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <numeric>
#include <ostream>

namespace qvp {

const char* to_string(Regularizer r) {
  switch (r) {
    case Regularizer::None:
      return "none";
    case Regularizer::Explicit:
      return "explicit";
    case Regularizer::Heuristic:
      return "heuristic";
  }
  return "?";
}

Regularizer parse_regularizer(std::string_view s) {
  if (s == "none") return Regularizer::None;
  if (s == "explicit") return Regularizer::Explicit;
  if (s == "heuristic") return Regularizer::Heuristic;
  throw ConfigError("unknown regularizer '" + std::string(s) + "' (expected none, explicit or heuristic)");
}

void LossConfig::validate() const {
  if (!(lambda >= 0.0)) throw ConfigError("lambda must be non-negative");
  if (regularizer != Regularizer::None && head != Head::Q) {
    throw ConfigError("regularizers constrain Q-values and require the q head");
  }
}

double mae(double target, double prediction) { return std::fabs(target - prediction); }

double bound_explicit(std::int64_t hstar) { return static_cast<double>(hstar) + 1.0; }

double bound_heuristic(std::int64_t hstar, std::int64_t cost, HeuristicValue successor_h, double dead_end_value) {
  const double h = successor_h.is_infinite() ? dead_end_value : static_cast<double>(successor_h.value());
  return std::max(static_cast<double>(hstar) + 1.0, static_cast<double>(cost) + h);
}

double omega(const std::vector<double>& q, const std::vector<double>& bounds) {
  if (q.size() != bounds.size()) throw Error("omega: q-values and bounds differ in length");
  double sum = 0.0;
  for (std::size_t i = 0; i < q.size(); ++i) sum += std::max(0.0, bounds[i] - q[i]);
  return sum;
}

EncodedTuple encode_tuple(const Model& model, const LossConfig& cfg, const GroundTask& task, const TrainingTuple& t) {
  const Head head = model.config().head;
  EncodedTuple out;
  out.hstar = static_cast<double>(t.hstar);
  out.encoding = encode_state(model.config().arch, head, model.table(), task, t.state);
  if (head == Head::V) return out;
  const auto& actions = out.encoding.actions;
  auto row_of = [&](ActionId a) {
    auto it = std::find(actions.begin(), actions.end(), a);
    if (it == actions.end()) {
      throw Error("training tuple action " + task.action_name(a) + " is not applicable in its state");
    }
    return static_cast<int>(it - actions.begin());
  };
  out.teacher_row = row_of(t.teacher);
  if (cfg.regularizer == Regularizer::None) return out;
  for (std::size_t i = 0; i < t.others.size(); ++i) {
    out.other_rows.push_back(row_of(t.others[i]));
    out.bounds.push_back(cfg.regularizer == Regularizer::Explicit
                             ? bound_explicit(t.hstar)
                             : bound_heuristic(t.hstar, task.actions[t.others[i]].cost, t.sibling_h[i],
                                               cfg.dead_end_value));
  }
  return out;
}

std::vector<EncodedTuple> encode_dataset(const Model& model, const LossConfig& cfg, const Dataset& ds) {
  std::vector<EncodedTuple> out;
  out.reserve(ds.num_tuples());
  for (const auto& inst : ds.instances) {
    for (const auto& t : inst.tuples) out.push_back(encode_tuple(model, cfg, *inst.task, t));
  }
  return out;
}

BatchLoss batch_loss(Model& model, Tape& tape, const std::vector<const EncodedTuple*>& tuples, const LossConfig& cfg) {
  if (tuples.empty()) throw Error("batch_loss: empty batch");
  std::vector<const EncodedState*> states;
  states.reserve(tuples.size());
  for (const auto* t : tuples) states.push_back(&t->encoding);
  const GraphBatch batch = model.make_batch(states);
  Var out = model.forward(tape, batch);
  const int n = static_cast<int>(tuples.size());
  BatchLoss result;
  Matrix targets(n, 1);
  for (int i = 0; i < n; ++i) targets.data[i] = tuples[i]->hstar;

  if (model.config().head == Head::V) {
    Var errors = abs(sub_const(out, targets));
    for (double e : errors.value().data) result.loss += e;
    result.err = result.loss;
    result.objective = scale(sum_all(errors), 1.0 / n);
    return result;
  }

  const Matrix& q = out.value();
  std::vector<int> teacher_idx;
  std::vector<int> other_idx;
  std::vector<double> bounds;
  for (int i = 0; i < n; ++i) {
    const int base = batch.action_offset[i];
    const int count = batch.action_offset[i + 1] - base;
    const auto* t = tuples[i];
    if (t->teacher_row < 0 || t->teacher_row >= count) throw Error("batch_loss: teacher action missing from encoding");
    teacher_idx.push_back(base + t->teacher_row);
    const double qt = q.data[base + t->teacher_row];
    for (int r = 0; r < count; ++r) {
      if (r == t->teacher_row) continue;
      result.diff += std::fabs(qt - q.data[base + r]);
      ++result.diff_pairs;
    }
    for (std::size_t j = 0; j < t->other_rows.size(); ++j) {
      other_idx.push_back(base + t->other_rows[j]);
      bounds.push_back(t->bounds[j]);
    }
  }
  Var errors = abs(sub_const(gather_rows(out, teacher_idx), targets));
  for (double e : errors.value().data) result.loss += e;
  result.err = result.loss;
  Var objective = sum_all(errors);
  if (cfg.regularizer != Regularizer::None && !other_idx.empty()) {
    Matrix b(static_cast<int>(bounds.size()), 1);
    b.data = bounds;
    Var hinge = relu(const_sub(b, gather_rows(out, other_idx)));
    for (double h : hinge.value().data) result.penalty += h;
    if (cfg.lambda != 0.0) objective = add(objective, scale(sum_all(hinge), cfg.lambda));
  }
  result.objective = scale(objective, 1.0 / n);
  return result;
}

SampleLoss sample_loss(Model& model, const GroundTask& task, const TrainingTuple& tuple, const LossConfig& cfg) {
  cfg.validate();
  if (cfg.head != model.config().head) throw ConfigError("loss head does not match the model head");
  const EncodedTuple et = encode_tuple(model, cfg, task, tuple);
  Tape tape(false);
  const BatchLoss bl = batch_loss(model, tape, {&et}, cfg);
  SampleLoss s;
  s.loss = bl.loss;
  s.penalty = bl.penalty;
  s.total = bl.objective.value().data[0];
  if (model.config().head == Head::Q) {
    const GraphBatch batch = model.make_batch({&et.encoding});
    s.q = model.forward(tape, batch).value().data;
  }
  return s;
}

double TrainConfig::resolved_learning_rate(const LossConfig& loss) const {
  if (learning_rate > 0.0) return learning_rate;
  return loss.regularizer == Regularizer::None ? 0.0002 : 0.002;
}

void TrainConfig::validate() const {
  if (epochs <= 0 || epochs > 100000) throw ConfigError("epochs must be positive");
  if (batch_size <= 0) throw ConfigError("batch size must be positive");
  if (learning_rate < 0.0) throw ConfigError("learning rate must be positive");
  if (!(clip > 0.0)) throw ConfigError("clip value must be positive");
  if (seeds <= 0) throw ConfigError("seed count must be positive");
  if (validate_every <= 0) throw ConfigError("validation interval must be positive");
}

Adam::Adam(std::vector<Parameter>& params, double lr, double beta1, double beta2, double epsilon, double clip,
           ClipMode mode)
    : params_(params), lr_(lr), beta1_(beta1), beta2_(beta2), eps_(epsilon), clip_(clip), mode_(mode) {
  for (const auto& p : params_) {
    m_.emplace_back(p.value.size(), 0.0);
    v_.emplace_back(p.value.size(), 0.0);
  }
}

void Adam::step() {
  ++step_count_;
  double scale_all = 1.0;
  if (mode_ == ClipMode::GlobalNorm) {
    double sq = 0.0;
    for (const auto& p : params_) {
      for (double g : p.grad.data) sq += g * g;
    }
    const double norm = std::sqrt(sq);
    if (norm > clip_) scale_all = clip_ / norm;
  }
  const double c1 = 1.0 - std::pow(beta1_, static_cast<double>(step_count_));
  const double c2 = 1.0 - std::pow(beta2_, static_cast<double>(step_count_));
  for (std::size_t i = 0; i < params_.size(); ++i) {
    auto& p = params_[i];
    if (p.grad.size() != p.value.size()) continue;
    for (std::size_t j = 0; j < p.value.size(); ++j) {
      double g = p.grad.data[j];
      g = mode_ == ClipMode::Value ? std::clamp(g, -clip_, clip_) : g * scale_all;
      m_[i][j] = beta1_ * m_[i][j] + (1.0 - beta1_) * g;
      v_[i][j] = beta2_ * v_[i][j] + (1.0 - beta2_) * g * g;
      p.value.data[j] -= lr_ * (m_[i][j] / c1) / (std::sqrt(v_[i][j] / c2) + eps_);
    }
  }
}

TrainResult train(const Dataset& dataset, const ModelConfig& model_config, const LossConfig& loss,
                  const TrainConfig& config, const ValidationHook& validation) {
  loss.validate();
  config.validate();
  if (loss.head != model_config.head) throw ConfigError("loss head does not match the model head");
  if (dataset.num_tuples() == 0) throw Error("training needs a non-empty dataset");
  const PredicateTable table = make_predicate_table(dataset.domain);
  const double lr = config.resolved_learning_rate(loss);

  std::optional<Model> best;
  double best_key = 0.0;
  TrainResult result{Model(model_config, table), {}, 0, 0, std::numeric_limits<double>::quiet_NaN(), {}, {}};

  std::vector<EncodedTuple> encoded;
  for (int seed_index = 0; seed_index < config.seeds; ++seed_index) {
    ModelConfig mc = model_config;
    mc.seed = derive_seed(config.seed, static_cast<std::uint64_t>(seed_index));
    Model model(mc, table);
    if (encoded.empty()) encoded = encode_dataset(model, loss, dataset);
    Adam adam(model.parameters(), lr, config.beta1, config.beta2, config.epsilon, config.clip, config.clip_mode);
    Rng rng(derive_seed(config.seed, static_cast<std::uint64_t>(seed_index), 0x5348554646ULL));
    std::vector<std::size_t> order(encoded.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    bool aborted = false;
    std::optional<Model> seed_best;
    double seed_key = 0.0;
    for (int epoch = 1; epoch <= config.epochs && !aborted; ++epoch) {
      rng.shuffle(order);
      double loss_sum = 0.0, penalty_sum = 0.0, err_sum = 0.0, diff_sum = 0.0;
      std::size_t diff_pairs = 0;
      for (std::size_t start = 0; start < order.size(); start += static_cast<std::size_t>(config.batch_size)) {
        const std::size_t end = std::min(order.size(), start + static_cast<std::size_t>(config.batch_size));
        std::vector<const EncodedTuple*> batch;
        for (std::size_t i = start; i < end; ++i) batch.push_back(&encoded[order[i]]);
        model.zero_grad();
        Tape tape;
        const BatchLoss bl = batch_loss(model, tape, batch, loss);
        const double objective = bl.objective.value().data[0];
        if (!std::isfinite(objective)) {
          result.failed_seeds.push_back("seed " + std::to_string(seed_index) + " epoch " + std::to_string(epoch) +
                                        ": non-finite loss " + std::to_string(objective));
          aborted = true;
          break;
        }
        tape.backward(bl.objective);
        adam.step();
        loss_sum += bl.loss;
        penalty_sum += bl.penalty;
        err_sum += bl.err;
        diff_sum += bl.diff;
        diff_pairs += bl.diff_pairs;
      }
      if (aborted) break;
      EpochLog entry;
      entry.seed_index = seed_index;
      entry.epoch = epoch;
      const double n = static_cast<double>(encoded.size());
      entry.mean_loss = loss_sum / n;
      entry.mean_penalty = penalty_sum / n;
      entry.err = err_sum / n;
      if (loss.head == Head::Q) entry.diff = diff_pairs ? diff_sum / static_cast<double>(diff_pairs) : 0.0;
      const bool validate_now = validation && (epoch % config.validate_every == 0 || epoch == config.epochs);
      if (validate_now) entry.val_score = validation(model);
      result.log.push_back(entry);
      if (config.progress) {
        *config.progress << "seed " << seed_index << " epoch " << epoch << " loss " << entry.mean_loss << " penalty "
                         << entry.mean_penalty;
        if (loss.head == Head::Q) *config.progress << " diff " << entry.diff;
        if (validate_now) *config.progress << " val " << entry.val_score;
        *config.progress << '\n';
      }
      // Higher key is better; strict comparison keeps the earliest on ties.
      if (validation && !validate_now) continue;
      const double key = validation ? entry.val_score : -(entry.mean_loss + loss.lambda * entry.mean_penalty);
      if (!seed_best || key > seed_key) {
        seed_best = model;
        seed_key = key;
      }
      if (!best || key > best_key) {
        best = model;
        best_key = key;
        result.best_seed = seed_index;
        result.best_epoch = epoch;
        result.best_score = validation ? key : -key;
      }
    }
    if (!aborted && seed_best) result.seed_models.emplace_back(seed_index, std::move(*seed_best));
  }
  if (!best) {
    std::string why = "training failed for every seed";
    for (const auto& f : result.failed_seeds) why += "; " + f;
    throw Error(why);
  }
  result.model = std::move(*best);
  return result;
}

namespace {

void put_number(std::ostream& out, double v) {
  if (std::isnan(v)) return;
  out << v;
}

}  // namespace

void write_training_log(const std::vector<EpochLog>& log, std::ostream& out) {
  const auto flags = out.flags();
  const auto precision = out.precision();
  out << std::setprecision(10);
  out << "epoch,seed,mean_loss,mean_penalty,err,diff,val_score\n";
  for (const auto& e : log) {
    out << e.epoch << ',' << e.seed_index << ',';
    put_number(out, e.mean_loss);
    out << ',';
    put_number(out, e.mean_penalty);
    out << ',';
    put_number(out, e.err);
    out << ',';
    put_number(out, e.diff);
    out << ',';
    put_number(out, e.val_score);
    out << '\n';
  }
  out.flags(flags);
  out.precision(precision);
}

}  // namespace qvp
