#pragma once

#include <cstddef>
#include <random>
#include <span>

#include "sgg/dataset.hpp"
#include "sgg/embeddings.hpp"
#include "sgg/tensor.hpp"

namespace sgg {

// Label word vectors: |C|×E for entities, |R|×E for predicates.
struct EmbeddingTable {
  Tensor entities;
  Tensor predicates;

  std::size_t dim() const { return entities.cols(); }
  bool trainable() const { return entities.requires_grad(); }
};

// Gaussian(0, stddev) rows; trainable.
EmbeddingTable random_embeddings(const Vocab& vocab, std::size_t dim, double stddev,
                                 std::mt19937_64& rng);
// Rows looked up by vocabulary name; names missing from the file get random
// rows. `missing` receives their count when non-null.
EmbeddingTable embeddings_from_vectors(const Vocab& vocab, const WordVectors& vectors,
                                       double stddev, bool trainable, std::mt19937_64& rng,
                                       std::size_t* missing = nullptr);

// W1, W2, W3, each [S × (visual + embedding)], no bias.
struct SemanticWeights {
  Tensor subject;    // W1
  Tensor predicate;  // W2
  Tensor object;     // W3

  std::size_t out_dim() const { return subject.rows(); }
  std::size_t in_dim() const { return subject.cols(); }
};

SemanticWeights make_semantic_weights(std::size_t in_dim, std::size_t out_dim,
                                      std::mt19937_64& rng);

// Score-weighted mixture of label embeddings: scores[m×L] · table[L×E].
// A rank-1 score vector yields a single row.
Tensor expected_embedding(Tape& tape, const Tensor& scores, const Tensor& table);

// W·[visual ‖ embedded], row-wise.
Tensor semantic_project(Tape& tape, const Tensor& weight, const Tensor& visual,
                        const Tensor& embedded);

// ‖W3·[f_j,v_o] − (W1·[f_i,v_s] + W2·[f_ij,v_p])‖², summed over rows.
Tensor semantic_loss(Tape& tape, const Tensor& f_i, const Tensor& v_s, const Tensor& f_ij,
                     const Tensor& v_p, const Tensor& f_j, const Tensor& v_o,
                     const SemanticWeights& weights);
// Same loss from already projected terms.
Tensor translation_loss(Tape& tape, const Tensor& subject_term, const Tensor& predicate_term,
                        const Tensor& object_term);

// Θ(f_ij) = [W1·[f_i,v_s] ‖ W2·[f_ij,v_p] ‖ W3·[f_j,v_o]], width 3S per row.
Tensor transform_relation(Tape& tape, const Tensor& f_i, const Tensor& v_s, const Tensor& f_ij,
                          const Tensor& v_p, const Tensor& f_j, const Tensor& v_o,
                          const SemanticWeights& weights);

// Element-wise sum of the Θ rows of one entity's partners; a zero vector of
// the given width when there are none.
Tensor relation_summary(Tape& tape, std::span<const Tensor> thetas, std::size_t width);
// Batched form: row i of the result sums the rows of `theta` whose subject is i.
Tensor relation_summaries(Tape& tape, const Tensor& theta, std::span<const std::size_t> subject,
                          std::size_t num_entities);

}  // namespace sgg
