#include "qvp/model.hpp"

#include <bit>
#include <chrono>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "qvp/common.hpp"

namespace qvp {

const char* to_string(Aggregation a) { return a == Aggregation::SmoothMax ? "smoothmax" : "max"; }

Aggregation parse_aggregation(std::string_view s) {
  if (s == "smoothmax") return Aggregation::SmoothMax;
  if (s == "max") return Aggregation::Max;
  throw ConfigError("unknown aggregation '" + std::string(s) + "' (expected smoothmax or max)");
}

ForwardStats& ForwardStats::operator+=(const ForwardStats& o) {
  encoder_calls += o.encoder_calls;
  forward_calls += o.forward_calls;
  work_units += o.work_units;
  seconds += o.seconds;
  return *this;
}

Var mlp_forward(Tape& tape, std::vector<Parameter>& params, const Mlp& mlp, Var x) {
  for (std::size_t i = 0; i < mlp.weights.size(); ++i) {
    if (i > 0) x = mish(x);
    x = linear(x, tape.param(params[mlp.weights[i]]), tape.param(params[mlp.biases[i]]));
  }
  return x;
}

Model::Model(const ModelConfig& config, PredicateTable table) : config_(config), table_(std::move(table)) {
  if (config_.hidden <= 0 || config_.layers <= 0) throw ConfigError("hidden size and layer count must be positive");
  const int k = config_.hidden;
  if (config_.arch == Architecture::RGNN) {
    predicate_mlps_.resize(table_.size());
    for (int p = 0; p < table_.size(); ++p) {
      if (!uses_predicate(p)) continue;
      const int width = std::max(1, table_.arities[p]) * k;
      predicate_mlps_[p] = make_mlp("rgnn.pred." + table_.names[p], {width, width, width});
    }
    update_mlp_ = make_mlp("rgnn.update", {2 * k, 2 * k, k});
  } else {
    projection_w_ = add_parameter("rgcn.proj.w", table_.size(), k);
    projection_b_ = add_parameter("rgcn.proj.b", 1, k, table_.size());
    for (int l = 0; l < config_.layers; ++l) {
      self_w_.push_back(add_parameter("rgcn.layer" + std::to_string(l) + ".self", k, k));
      relation_w_.push_back(add_parameter("rgcn.layer" + std::to_string(l) + ".rel", k, num_labels() * k));
    }
  }
  if (config_.head == Head::V) {
    readout_ = make_mlp("readout.v", {k, k, 1});
  } else {
    readout_ = make_mlp("readout.q", {2 * k, 2 * k, 1});
  }
  initialize();
}

bool Model::uses_predicate(int id) const { return config_.head == Head::Q || !table_.is_action(id); }

int Model::num_labels() const {
  switch (config_.arch) {
    case Architecture::OE:
      return table_.size();
    case Architecture::OAE:
      return table_.max_arity();
    case Architecture::RGNN:
      break;
  }
  return 0;
}

std::size_t Model::num_weights() const {
  std::size_t n = 0;
  for (const auto& p : params_) n += p.value.size();
  return n;
}

int Model::add_parameter(std::string name, int rows, int cols, int fan_in) {
  fan_in_.push_back(fan_in > 0 ? fan_in : rows);
  params_.push_back(Parameter{std::move(name), Matrix(rows, cols), Matrix(rows, cols)});
  return static_cast<int>(params_.size()) - 1;
}

Mlp Model::make_mlp(const std::string& name, const std::vector<int>& sizes) {
  Mlp mlp;
  for (std::size_t i = 0; i + 1 < sizes.size(); ++i) {
    mlp.weights.push_back(add_parameter(name + "." + std::to_string(i) + ".w", sizes[i], sizes[i + 1]));
    mlp.biases.push_back(add_parameter(name + "." + std::to_string(i) + ".b", 1, sizes[i + 1], sizes[i]));
  }
  return mlp;
}

void Model::initialize() {
  for (std::size_t i = 0; i < params_.size(); ++i) {
    Parameter& p = params_[i];
    const double bound = std::sqrt(1.0 / fan_in_[i]);
    Rng rng(derive_seed(config_.seed, hash_string(p.name)));
    for (double& v : p.value.data) v = (2.0 * rng.uniform() - 1.0) * bound;
  }
}

void Model::zero_grad() {
  for (auto& p : params_) std::fill(p.grad.data.begin(), p.grad.data.end(), 0.0);
}

GraphBatch Model::make_batch(const std::vector<const EncodedState*>& states) const {
  GraphBatch b;
  b.arch = config_.arch;
  b.num_graphs = static_cast<int>(states.size());
  const int labels = num_labels();
  if (config_.arch == Architecture::RGNN) b.predicate_args.resize(table_.size());
  int total_nodes = 0;
  for (const auto* e : states) total_nodes += e->num_nodes;
  if (config_.arch != Architecture::RGNN) b.features = Matrix(total_nodes, table_.size());
  b.action_offset.push_back(0);
  int offset = 0;
  for (int g = 0; g < b.num_graphs; ++g) {
    const EncodedState& e = *states[g];
    if (e.variant != config_.arch) throw Error("encoded state does not match the model architecture");
    b.nodes_per_graph.push_back(e.num_nodes);
    for (int o = 0; o < e.num_objects; ++o) {
      b.object_nodes.push_back(offset + o);
      b.object_graph.push_back(g);
    }
    for (int n : e.action_nodes) {
      b.action_nodes.push_back(offset + n);
      b.action_graph.push_back(g);
    }
    b.action_offset.push_back(static_cast<int>(b.action_nodes.size()));
    if (config_.arch == Architecture::RGNN) {
      for (const auto& atom : e.atoms) {
        if (atom.predicate < 0 || atom.predicate >= table_.size() || !uses_predicate(atom.predicate)) {
          throw Error("no message network for predicate id " + std::to_string(atom.predicate));
        }
        auto& args = b.predicate_args[atom.predicate];
        for (int x : atom.args) args.push_back(offset + x);
      }
    } else {
      if (e.feature_dim != table_.size()) throw Error("encoded feature dimension does not match the model");
      for (const auto& [n, f] : e.features) b.features(offset + n, f) = 1.0;
      for (const auto& ed : e.edges) {
        if (ed.label < 0 || ed.label >= labels) throw Error("edge label " + std::to_string(ed.label) + " outside relation table");
        const int u = offset + ed.u, v = offset + ed.v;
        b.message_src.push_back(u * labels + ed.label);
        b.message_dst.push_back(v * labels + ed.label);
        b.message_src.push_back(v * labels + ed.label);
        b.message_dst.push_back(u * labels + ed.label);
      }
    }
    offset += e.num_nodes;
  }
  b.num_nodes = total_nodes;
  return b;
}

Var Model::apply_mlp(Tape& tape, const Mlp& mlp, Var x) { return mlp_forward(tape, params_, mlp, x); }

Var Model::embed_rgnn(Tape& tape, const GraphBatch& batch) {
  const int k = config_.hidden;
  Var h = tape.constant(Matrix(batch.num_nodes, k));
  for (int l = 0; l < config_.layers; ++l) {
    std::vector<Var> parts;
    std::vector<int> targets;
    for (int p = 0; p < table_.size(); ++p) {
      const auto& args = batch.predicate_args[p];
      if (args.empty()) continue;
      const int arity = std::max(1, table_.arities[p]);
      const int n = static_cast<int>(args.size()) / arity;
      Var x = reshape(gather_rows(h, args), n, arity * k);
      Var y = apply_mlp(tape, predicate_mlps_[p], x);
      parts.push_back(reshape(y, n * arity, k));
      targets.insert(targets.end(), args.begin(), args.end());
    }
    Var messages = parts.empty() ? tape.constant(Matrix(batch.num_nodes, k))
                   : config_.aggregation == Aggregation::SmoothMax
                       ? segment_logsumexp(concat_rows(parts), targets, batch.num_nodes)
                       : segment_max(concat_rows(parts), targets, batch.num_nodes);
    h = add(h, apply_mlp(tape, update_mlp_, concat_cols(h, messages)));
  }
  return h;
}

Var Model::embed_rgcn(Tape& tape, const GraphBatch& batch) {
  const int k = config_.hidden;
  const int labels = num_labels();
  Var h = linear(tape.constant(batch.features), tape.param(params_[projection_w_]), tape.param(params_[projection_b_]));
  std::vector<int> slot_owner;
  if (!batch.message_src.empty()) {
    slot_owner.resize(static_cast<std::size_t>(batch.num_nodes) * labels);
    for (std::size_t i = 0; i < slot_owner.size(); ++i) slot_owner[i] = static_cast<int>(i) / labels;
  }
  for (int l = 0; l < config_.layers; ++l) {
    Var pre = linear(h, tape.param(params_[self_w_[l]]));
    if (!batch.message_src.empty()) {
      Var transformed = reshape(linear(h, tape.param(params_[relation_w_[l]])), batch.num_nodes * labels, k);
      Var per_label = segment_max(gather_rows(transformed, batch.message_src), batch.message_dst,
                                  batch.num_nodes * labels);
      pre = add(pre, segment_sum(per_label, slot_owner, batch.num_nodes));
    }
    h = mish(pre);
  }
  return h;
}

Var Model::embed(Tape& tape, const GraphBatch& batch) {
  return config_.arch == Architecture::RGNN ? embed_rgnn(tape, batch) : embed_rgcn(tape, batch);
}

Var Model::state_readout(Tape&, const GraphBatch& batch, Var embeddings) {
  return segment_sum(gather_rows(embeddings, batch.object_nodes), batch.object_graph, batch.num_graphs);
}

Var Model::forward(Tape& tape, const GraphBatch& batch) {
  Var h = embed(tape, batch);
  Var hs = state_readout(tape, batch, h);
  if (config_.head == Head::V) return apply_mlp(tape, readout_, hs);
  if (batch.action_nodes.empty()) return tape.constant(Matrix(0, 1));
  Var pairs = concat_cols(gather_rows(h, batch.action_nodes), gather_rows(hs, batch.action_graph));
  return apply_mlp(tape, readout_, pairs);
}

std::vector<double> Model::predict(const std::vector<const EncodedState*>& states, ForwardStats* stats) const {
  if (states.empty()) return {};
  const auto start = std::chrono::steady_clock::now();
  const GraphBatch batch = make_batch(states);
  Tape tape(false);
  // forward() only reads parameters on a non-recording tape.
  Var out = const_cast<Model*>(this)->forward(tape, batch);
  std::vector<double> values = out.value().data;
  if (stats) {
    stats->encoder_calls += states.size();
    stats->forward_calls += 1;
    stats->work_units += static_cast<std::uint64_t>(batch.num_nodes) * config_.layers;
    stats->seconds += std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  }
  return values;
}

namespace {

std::string hex64(std::uint64_t v) {
  std::ostringstream os;
  os << std::hex << std::setw(16) << std::setfill('0') << v;
  return os.str();
}

void put_le(std::ostream& out, double v) {
  std::uint64_t bits = std::bit_cast<std::uint64_t>(v);
  char bytes[8];
  for (int i = 0; i < 8; ++i) bytes[i] = static_cast<char>((bits >> (8 * i)) & 0xff);
  out.write(bytes, 8);
}

double get_le(std::istream& in) {
  unsigned char bytes[8];
  if (!in.read(reinterpret_cast<char*>(bytes), 8)) throw Error("checkpoint: truncated parameter data");
  std::uint64_t bits = 0;
  for (int i = 0; i < 8; ++i) bits |= static_cast<std::uint64_t>(bytes[i]) << (8 * i);
  return std::bit_cast<double>(bits);
}

constexpr int kCheckpointVersion = 1;

}  // namespace

void Model::write(std::ostream& out, const nlohmann::json& extra) const {
  nlohmann::ordered_json h;
  h["format"] = "qvp-checkpoint";
  h["version"] = kCheckpointVersion;
  h["architecture"] = to_string(config_.arch);
  h["head"] = to_string(config_.head);
  h["hidden"] = config_.hidden;
  h["layers"] = config_.layers;
  h["aggregation"] = to_string(config_.aggregation);
  h["seed"] = config_.seed;
  h["predicates"] = {{"names", table_.names},
                     {"arities", table_.arities},
                     {"num_base", table_.num_base},
                     {"num_schemas", table_.num_schemas},
                     {"fingerprint", hex64(table_.fingerprint)}};
  auto& manifest = h["parameters"] = nlohmann::ordered_json::array();
  std::size_t offset = 0;
  for (const auto& p : params_) {
    manifest.push_back({{"name", p.name}, {"shape", {p.value.rows, p.value.cols}}, {"offset", offset}});
    offset += p.value.size() * 8;
  }
  h["extra"] = nlohmann::ordered_json(extra);
  out << h.dump() << '\n';
  for (const auto& p : params_) {
    for (double v : p.value.data) put_le(out, v);
  }
  if (!out) throw Error("checkpoint: write failed");
}

Model Model::read(std::istream& in, nlohmann::json* extra) {
  std::string line;
  if (!std::getline(in, line)) throw Error("checkpoint: missing header");
  nlohmann::json h;
  try {
    h = nlohmann::json::parse(line);
  } catch (const nlohmann::json::exception& e) {
    throw Error(std::string("checkpoint: bad header: ") + e.what());
  }
  if (h.value("format", "") != "qvp-checkpoint") throw Error("checkpoint: not a qvp checkpoint");
  if (h.value("version", 0) != kCheckpointVersion) throw Error("checkpoint: unsupported version");
  ModelConfig cfg;
  cfg.arch = parse_architecture(h.at("architecture").get<std::string>());
  cfg.head = parse_head(h.at("head").get<std::string>());
  cfg.hidden = h.at("hidden").get<int>();
  cfg.layers = h.at("layers").get<int>();
  cfg.aggregation = parse_aggregation(h.at("aggregation").get<std::string>());
  cfg.seed = h.at("seed").get<std::uint64_t>();
  PredicateTable table;
  const auto& pt = h.at("predicates");
  table.names = pt.at("names").get<std::vector<std::string>>();
  table.arities = pt.at("arities").get<std::vector<int>>();
  table.num_base = pt.at("num_base").get<int>();
  table.num_schemas = pt.at("num_schemas").get<int>();
  table.fingerprint = std::stoull(pt.at("fingerprint").get<std::string>(), nullptr, 16);
  Model model(cfg, std::move(table));
  const auto& manifest = h.at("parameters");
  if (manifest.size() != model.params_.size()) throw Error("checkpoint: parameter manifest does not match model");
  for (std::size_t i = 0; i < manifest.size(); ++i) {
    auto& p = model.params_[i];
    const auto shape = manifest[i].at("shape").get<std::vector<int>>();
    if (manifest[i].at("name").get<std::string>() != p.name || shape.size() != 2 || shape[0] != p.value.rows ||
        shape[1] != p.value.cols) {
      throw Error("checkpoint: parameter " + p.name + " does not match the manifest");
    }
  }
  for (auto& p : model.params_) {
    for (double& v : p.value.data) {
      v = get_le(in);
      if (!std::isfinite(v)) throw Error("checkpoint: non-finite parameter in " + p.name);
    }
  }
  if (extra) *extra = h.value("extra", nlohmann::json::object());
  return model;
}

void Model::save(const std::string& path, const nlohmann::json& extra) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path);
  write(out, extra);
}

Model Model::load(const std::string& path, nlohmann::json* extra) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open checkpoint " + path);
  return read(in, extra);
}

}  // namespace qvp
