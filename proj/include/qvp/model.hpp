#pragma once

// Value networks over encoded states: the R-GNN and RGCNs over OE/OAE, each
// with a state-value (V) or action-value (Q) readout.

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "qvp/autodiff.hpp"
#include "qvp/encoding.hpp"

#include "json.hpp"

namespace qvp {

enum class Aggregation { SmoothMax, Max };

const char* to_string(Aggregation a);
Aggregation parse_aggregation(std::string_view s);

struct ModelConfig {
  Architecture arch = Architecture::RGNN;
  Head head = Head::V;
  int hidden = 32;
  int layers = 30;
  Aggregation aggregation = Aggregation::SmoothMax;  // R-GNN message aggregation
  std::uint64_t seed = 0;
};

struct ForwardStats {
  std::uint64_t encoder_calls = 0;  // encoded graphs pushed through the network
  std::uint64_t forward_calls = 0;  // batched network invocations
  std::uint64_t work_units = 0;     // sum of nodes x layers
  double seconds = 0.0;

  ForwardStats& operator+=(const ForwardStats& o);
};

/// Affine layers with Mish between them; sizes = {in, hidden..., out}.
struct Mlp {
  std::vector<int> weights;  // parameter indices
  std::vector<int> biases;
};

/// Several encoded states as one disjoint-union graph.
struct GraphBatch {
  Architecture arch = Architecture::RGNN;
  int num_graphs = 0;
  int num_nodes = 0;
  std::vector<int> nodes_per_graph;
  std::vector<int> object_nodes;  // readout rows
  std::vector<int> object_graph;
  std::vector<int> action_nodes;  // Q rows, graph by graph
  std::vector<int> action_graph;
  std::vector<int> action_offset;  // num_graphs + 1 entries into action_nodes
  // R-GNN: flattened argument node lists per predicate id.
  std::vector<std::vector<int>> predicate_args;
  // RGCN: dense node features and directed messages between (node, label) slots.
  Matrix features;
  std::vector<int> message_src;
  std::vector<int> message_dst;
};

class Model {
 public:
  Model(const ModelConfig& config, PredicateTable table);

  const ModelConfig& config() const { return config_; }
  const PredicateTable& table() const { return table_; }
  std::vector<Parameter>& parameters() { return params_; }
  const std::vector<Parameter>& parameters() const { return params_; }
  std::size_t num_weights() const;
  /// Edge label count of the RGCN relation table (0 for the R-GNN).
  int num_labels() const;

  GraphBatch make_batch(const std::vector<const EncodedState*>& states) const;

  /// Node embeddings after the last layer (num_nodes x hidden).
  Var embed(Tape& tape, const GraphBatch& batch);
  /// h_s per graph (num_graphs x hidden).
  Var state_readout(Tape& tape, const GraphBatch& batch, Var embeddings);
  /// V head: num_graphs x 1. Q head: one row per action node, graph by graph.
  Var forward(Tape& tape, const GraphBatch& batch);

  /// Inference without gradient bookkeeping. Returns one value per graph (V)
  /// or per action, concatenated over graphs (Q).
  std::vector<double> predict(const std::vector<const EncodedState*>& states, ForwardStats* stats = nullptr) const;

  void zero_grad();

  /// JSON header line followed by little-endian float64 parameter data.
  void write(std::ostream& out, const nlohmann::json& extra = nlohmann::json::object()) const;
  static Model read(std::istream& in, nlohmann::json* extra = nullptr);
  void save(const std::string& path, const nlohmann::json& extra = nlohmann::json::object()) const;
  static Model load(const std::string& path, nlohmann::json* extra = nullptr);

 private:
  int add_parameter(std::string name, int rows, int cols, int fan_in = 0);
  Mlp make_mlp(const std::string& name, const std::vector<int>& sizes);
  void initialize();
  Var apply_mlp(Tape& tape, const Mlp& mlp, Var x);
  Var embed_rgnn(Tape& tape, const GraphBatch& batch);
  Var embed_rgcn(Tape& tape, const GraphBatch& batch);
  bool uses_predicate(int id) const;

  ModelConfig config_;
  PredicateTable table_;
  std::vector<Parameter> params_;
  std::vector<int> fan_in_;
  // R-GNN
  std::vector<Mlp> predicate_mlps_;  // per predicate id; empty if unused
  Mlp update_mlp_;
  // RGCN
  int projection_w_ = -1;
  int projection_b_ = -1;
  std::vector<int> self_w_;
  std::vector<int> relation_w_;
  Mlp readout_;
};

/// Input to `mlp` must be (rows x sizes.front()).
Var mlp_forward(Tape& tape, std::vector<Parameter>& params, const Mlp& mlp, Var x);

}  // namespace qvp
