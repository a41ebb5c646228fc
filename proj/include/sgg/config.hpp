#pragma once

#include <cstddef>
#include <cstdint>
#include <string>

#include "json.hpp"
#include "sgg/adjacency.hpp"
#include "sgg/dataset.hpp"
#include "sgg/synthetic.hpp"

namespace sgg {

struct ModelConfig {
  std::size_t feature_dim = 0;  // appearance width D; 0 = take it from the data
  std::size_t embed_dim = 300;
  std::size_t embed_hidden = 300;
  std::size_t embed_layers = 3;
  std::size_t visual_dim = 500;    // projected visual width D'
  std::size_t relation_dim = 500;  // common relation space S
  std::size_t heads = 8;
  std::size_t graph_width = 500;  // per-head width is graph_width / heads
  std::size_t head_hidden = 500;  // width of the classifier MLP layers

  double leaky_slope = 0.2;   // attention scores and hidden layers
  double output_slope = 0.2;  // nonlinearity on aggregated attention features

  double lambda_entity = 4.0;
  double lambda_relation = 1.0;
  double lambda_semantic = 1.0;
  double weight_decay = 1e-5;
  bool decay_attention_vectors = true;

  bool use_semantic_transform = true;
  bool use_graph_attention = true;  // off: every node attends only to itself

  AdjacencyThresholds adjacency;
  double union_margin = kDefaultUnionMargin;

  std::string embeddings_path;  // empty = random Gaussian rows
  bool freeze_loaded_embeddings = true;
  double embedding_init_std = 0.1;
  std::uint64_t init_seed = 1;

  std::size_t head_dim() const { return graph_width / heads; }
  std::size_t attention_input_dim() const {
    return visual_dim + (use_semantic_transform ? 3 * relation_dim : 0);
  }
  void validate() const;
};

struct TrainConfig {
  double learning_rate = 1e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  std::size_t batch_size = 20;
  std::size_t epochs = 10;
  std::size_t max_steps = 0;  // 0 = no cap
  std::uint64_t seed = 1;
  // bg pairs sampled per image = ratio × max(1, annotated pairs)
  double bg_ratio = 3.0;
  std::size_t checkpoint_every = 0;  // epochs; 0 = only the final checkpoint
  void validate() const;
};

struct EvalConfig {
  std::size_t predicate_k = 5;
  // Unconstrained mode keeps at most this many predicates per pair; 0 = all.
  std::size_t unconstrained_cap = 0;
  std::size_t batch_size = 20;
};

struct Config {
  Vocab vocab = Vocab::with_sizes(150, 51);
  ModelConfig model;
  TrainConfig train;
  EvalConfig eval;
  SyntheticConfig synthetic;
  LoadOptions load;
};

// Missing keys keep their defaults. Unknown keys raise InvalidConfig. The
// vocabulary comes from "vocab" ({"entities":[...], "predicates":[...]} or
// {"num_entities":C, "num_predicates":R}); without it a "synthetic" section
// implies the generator's vocabulary.
Config config_from_json(const nlohmann::json& j);
Config load_config(const std::string& path);
nlohmann::json to_json(const Config& config);
nlohmann::json to_json(const ModelConfig& config);
ModelConfig model_config_from_json(const nlohmann::json& j);
nlohmann::json to_json(const Vocab& vocab);
Vocab vocab_from_json(const nlohmann::json& j);
nlohmann::json to_json(const SyntheticConfig& config);
SyntheticConfig synthetic_config_from_json(const nlohmann::json& j);

}  // namespace sgg
