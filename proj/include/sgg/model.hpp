#pragma once

#include <cstddef>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "sgg/attention.hpp"
#include "sgg/config.hpp"
#include "sgg/dataset.hpp"
#include "sgg/grad_check.hpp"
#include "sgg/graph.hpp"
#include "sgg/layers.hpp"
#include "sgg/semantic.hpp"
#include "sgg/tensor.hpp"

namespace sgg {

// Every learnable weight of the network. Semantic-transform parts are left
// empty when the config disables that module.
struct ModelParams {
  ModelConfig config;
  Vocab vocab;

  Linear visual;                      // D -> D', shared by entity and pair features
  std::vector<Linear> embedding_path; // label embeddings -> semantic projection
  EmbeddingTable embeddings;
  SemanticWeights semantic;
  std::vector<AttentionHead> heads;
  Linear adapter;                     // K·M' -> graph_width
  std::vector<Linear> entity_head;    // [D' + graph_width] -> hidden -> hidden -> |C|
  std::vector<Linear> relation_head;  // [D' + graph_width] -> hidden -> hidden -> |R|

  // Stable, named list of every tensor, frozen ones included.
  std::vector<NamedParam> named() const;
  std::vector<NamedParam> trainable() const;
  // Matrices covered by the weight-decay term.
  std::vector<Tensor> decayed() const;
  void zero_grad() const;
};

// Fresh parameters from config.init_seed. config.feature_dim must be set.
ModelParams init_model(const ModelConfig& config, const Vocab& vocab);

// Images stacked into one computation: entity rows, ordered-pair rows and a
// block-diagonal neighbor mask.
struct Batch {
  std::size_t num_images = 0;
  std::vector<std::string> image_ids;
  std::vector<std::size_t> image_offset;  // first entity row of each image, plus end
  std::vector<std::size_t> entity_image;
  std::vector<std::size_t> entity_labels;
  std::vector<Box> boxes;
  Tensor entity_features;  // N×D
  Tensor entity_scores;    // N×|C|

  std::vector<std::size_t> pair_subject;  // entity rows
  std::vector<std::size_t> pair_object;
  std::vector<std::size_t> pair_image;
  std::vector<std::size_t> pair_labels;   // ground truth, bg when unannotated
  Tensor pair_features;  // P×D, undefined when P == 0
  Tensor pair_scores;    // P×|R|

  std::vector<unsigned char> adjacency;  // N×N

  std::vector<std::size_t> relation_rows;  // pairs entering the relation loss
  std::vector<std::size_t> annotated_rows; // pairs with a non-bg ground truth

  std::size_t num_entities() const { return entity_image.size(); }
  std::size_t num_pairs() const { return pair_subject.size(); }
};

struct BatchOptions {
  // When set, bg pairs entering the relation loss are subsampled with it;
  // otherwise every pair is a relation target.
  std::mt19937_64* bg_sampler = nullptr;
  double bg_ratio = 3.0;
};

Batch make_batch(std::span<const SceneInstance* const> scenes, const ModelParams& params,
                 const BatchOptions& options = {});
Batch make_batch(std::span<const SceneInstance> scenes, const ModelParams& params,
                 const BatchOptions& options = {});

struct ForwardResult {
  Tensor projected_entities;  // N×D'
  Tensor projected_pairs;     // P×D'
  Tensor subject_terms;       // N×S, W1·[f_i, v_s]
  Tensor object_terms;        // N×S, W3·[f_j, v_o]
  Tensor predicate_terms;     // P×S, W2·[f_ij, v_p]
  Tensor theta;               // P×3S
  Tensor node_context;        // N×M, f'_i
  Tensor node_embedding;      // N×K·M', Φ(f'_i)
  Tensor omega;               // images × graph_width
  std::vector<Tensor> alphas; // per head, N×N
  Tensor entity_probs;        // N×|C|
  Tensor relation_probs;      // P×|R|
};

ForwardResult forward(Tape& tape, const ModelParams& params, const Batch& batch);

Tensor entity_loss(Tape& tape, const Tensor& entity_probs, std::span<const std::size_t> labels);
Tensor relation_loss(Tape& tape, const Tensor& relation_probs, std::span<const std::size_t> rows,
                     std::span<const std::size_t> labels);
Tensor weight_decay_term(Tape& tape, const ModelParams& params);

struct LossBreakdown {
  Tensor total;
  double entity = 0.0;    // summed over the batch
  double relation = 0.0;
  double semantic = 0.0;
  double decay = 0.0;
};

// (λ1·L_entity + λ2·L_relation + λ3·L_semantic) averaged over images, plus
// weight_decay·Σ‖W‖².
LossBreakdown joint_loss(Tape& tape, const ModelParams& params, const Batch& batch,
                         const ForwardResult& result);
LossBreakdown joint_loss(Tape& tape, const ModelParams& params, const Batch& batch);

// Label distributions for every entity and ordered pair, with constrained
// triplet ranking. Throws EmptyScene for scenes without entities.
std::vector<PredictedGraph> predict(const ModelParams& params, std::span<const SceneInstance> scenes,
                                    std::size_t batch_size = 20);
PredictedGraph predict(const ModelParams& params, const SceneInstance& scene);

}  // namespace sgg
