#pragma once

// Supervised objective (MAE plus optional Q-value lower-bound penalty) and the
// multi-seed Adam training loop.

#include <functional>
#include <iosfwd>
#include <limits>
#include <optional>
#include <vector>

#include "qvp/dataset.hpp"
#include "qvp/model.hpp"

namespace qvp {

enum class Regularizer { None, Explicit, Heuristic };

const char* to_string(Regularizer r);
Regularizer parse_regularizer(std::string_view s);

struct LossConfig {
  Head head = Head::Q;
  Regularizer regularizer = Regularizer::None;
  double lambda = 1.0;
  double dead_end_value = 1120.0;  // stands in for h(s') = inf

  /// Throws ConfigError on lambda < 0 or a regularizer without the Q head.
  void validate() const;
};

double mae(double target, double prediction);
/// h*(s) + 1.
double bound_explicit(std::int64_t hstar);
/// max{h*(s) + 1, cost(a) + h(s')}, with dead_end_value for h(s') = inf.
double bound_heuristic(std::int64_t hstar, std::int64_t cost, HeuristicValue successor_h, double dead_end_value);
/// Sum of max{0, B_i - q_i}.
double omega(const std::vector<double>& q, const std::vector<double>& bounds);

/// One tuple prepared for the network.
struct EncodedTuple {
  EncodedState encoding;
  double hstar = 0.0;
  int teacher_row = -1;          // Q head: row of a* in the encoding's action list
  std::vector<int> other_rows;   // Q head: rows of the non-teacher actions
  std::vector<double> bounds;    // aligned with other_rows; empty without regularizer
};

EncodedTuple encode_tuple(const Model& model, const LossConfig& cfg, const GroundTask& task, const TrainingTuple& t);
std::vector<EncodedTuple> encode_dataset(const Model& model, const LossConfig& cfg, const Dataset& ds);

struct BatchLoss {
  Var objective;  // mean over tuples of loss + lambda * penalty
  double loss = 0.0;     // summed over tuples
  double penalty = 0.0;  // summed over tuples
  double err = 0.0;      // summed |h* - prediction| over tuples
  double diff = 0.0;     // summed |Q(a*) - Q(a_i)| over (tuple, other) pairs
  std::size_t diff_pairs = 0;
};

BatchLoss batch_loss(Model& model, Tape& tape, const std::vector<const EncodedTuple*>& tuples, const LossConfig& cfg);

struct SampleLoss {
  double loss = 0.0;
  double penalty = 0.0;
  double total = 0.0;
  std::vector<double> q;  // Q head: values in the encoding's action order
};

SampleLoss sample_loss(Model& model, const GroundTask& task, const TrainingTuple& tuple, const LossConfig& cfg);

enum class ClipMode { Value, GlobalNorm };

struct TrainConfig {
  int epochs = 100;
  int batch_size = 256;
  /// 0 selects the default: 0.0002 for V and vanilla Q, 0.002 with a regularizer.
  double learning_rate = 0.0;
  double clip = 0.1;
  ClipMode clip_mode = ClipMode::Value;
  int seeds = 3;
  std::uint64_t seed = 0;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  /// Validation hook cadence in epochs; the last epoch is always validated.
  int validate_every = 1;
  std::ostream* progress = nullptr;

  double resolved_learning_rate(const LossConfig& loss) const;
  void validate() const;
};

struct EpochLog {
  int seed_index = 0;
  int epoch = 0;  // 1-based
  double mean_loss = 0.0;
  double mean_penalty = 0.0;
  double err = 0.0;
  double diff = std::numeric_limits<double>::quiet_NaN();
  double val_score = std::numeric_limits<double>::quiet_NaN();
};

struct TrainResult {
  Model model;
  std::vector<EpochLog> log;
  int best_seed = 0;
  int best_epoch = 0;
  double best_score = std::numeric_limits<double>::quiet_NaN();
  std::vector<std::string> failed_seeds;  // diagnostics for seeds aborted on non-finite loss
  /// Best checkpoint of each seed that finished, by seed index.
  std::vector<std::pair<int, Model>> seed_models;
};

/// Higher is better.
using ValidationHook = std::function<double(const Model&)>;

/// Trains `seeds` models and returns the best checkpoint: highest validation
/// score (earliest seed, then epoch, on ties) or, without a hook, the lowest
/// mean epoch objective.
TrainResult train(const Dataset& dataset, const ModelConfig& model_config, const LossConfig& loss,
                  const TrainConfig& config, const ValidationHook& validation = {});

/// CSV columns: epoch, seed, mean_loss, mean_penalty, err, diff, val_score.
void write_training_log(const std::vector<EpochLog>& log, std::ostream& out);

/// Elementwise Adam with gradient clipping; state is per parameter tensor.
class Adam {
 public:
  Adam(std::vector<Parameter>& params, double lr, double beta1, double beta2, double epsilon, double clip,
       ClipMode mode);
  void step();

 private:
  std::vector<Parameter>& params_;
  double lr_, beta1_, beta2_, eps_, clip_;
  ClipMode mode_;
  long step_count_ = 0;
  std::vector<std::vector<double>> m_;
  std::vector<std::vector<double>> v_;
};

}  // namespace qvp
