#include "sgg/semantic.hpp"

#include "sgg/error.hpp"
#include "sgg/layers.hpp"
#include "sgg/ops.hpp"

namespace sgg {

namespace {

Tensor gaussian_rows(std::size_t rows, std::size_t dim, double stddev, std::mt19937_64& rng) {
  std::normal_distribution<double> normal(0.0, stddev);
  Tensor t({rows, dim});
  for (auto& v : t.mutable_data()) v = normal(rng);
  return t;
}

Tensor lookup_rows(const std::vector<std::string>& names, const WordVectors& vectors,
                   double stddev, std::mt19937_64& rng, std::size_t& missing) {
  Tensor t = gaussian_rows(names.size(), vectors.dim, stddev, rng);
  auto data = t.mutable_data();
  for (std::size_t r = 0; r < names.size(); ++r) {
    auto it = vectors.vectors.find(names[r]);
    if (it == vectors.vectors.end()) {
      ++missing;
      continue;
    }
    std::copy(it->second.begin(), it->second.end(), data.begin() + r * vectors.dim);
  }
  return t;
}

}  // namespace

EmbeddingTable random_embeddings(const Vocab& vocab, std::size_t dim, double stddev,
                                 std::mt19937_64& rng) {
  EmbeddingTable table{gaussian_rows(vocab.num_entities(), dim, stddev, rng),
                       gaussian_rows(vocab.num_predicates(), dim, stddev, rng)};
  table.entities.set_requires_grad(true);
  table.predicates.set_requires_grad(true);
  return table;
}

EmbeddingTable embeddings_from_vectors(const Vocab& vocab, const WordVectors& vectors,
                                       double stddev, bool trainable, std::mt19937_64& rng,
                                       std::size_t* missing) {
  if (vectors.dim == 0) throw SizeMismatch("embedding file holds no vectors");
  std::size_t miss = 0;
  EmbeddingTable table{lookup_rows(vocab.entities, vectors, stddev, rng, miss),
                       lookup_rows(vocab.predicates, vectors, stddev, rng, miss)};
  table.entities.set_requires_grad(trainable);
  table.predicates.set_requires_grad(trainable);
  if (missing) *missing = miss;
  return table;
}

SemanticWeights make_semantic_weights(std::size_t in_dim, std::size_t out_dim,
                                      std::mt19937_64& rng) {
  return {uniform_fan_in({out_dim, in_dim}, in_dim, rng),
          uniform_fan_in({out_dim, in_dim}, in_dim, rng),
          uniform_fan_in({out_dim, in_dim}, in_dim, rng)};
}

Tensor expected_embedding(Tape& tape, const Tensor& scores, const Tensor& table) {
  if (scores.cols() != table.rows())
    throw SizeMismatch("scores over " + std::to_string(scores.cols()) + " labels for a table of " +
                       std::to_string(table.rows()) + " rows");
  Tensor out = matmul(tape, scores, table);
  return out;
}

Tensor semantic_project(Tape& tape, const Tensor& weight, const Tensor& visual,
                        const Tensor& embedded) {
  if (visual.rank() != embedded.rank() || visual.rows() != embedded.rows())
    throw SizeMismatch("visual " + shape_string(visual.shape()) + " and embedded " +
                       shape_string(embedded.shape()) + " rows differ");
  if (visual.cols() + embedded.cols() != weight.cols())
    throw SizeMismatch("concatenated width " + std::to_string(visual.cols() + embedded.cols()) +
                       " does not match weight input " + std::to_string(weight.cols()));
  Tensor joined = concat(tape, {visual, embedded}, visual.rank() - 1);
  Tensor out = matmul_nt(tape, joined, weight);
  return visual.rank() == 1 ? reshape(tape, out, {out.cols()}) : out;
}

Tensor semantic_loss(Tape& tape, const Tensor& f_i, const Tensor& v_s, const Tensor& f_ij,
                     const Tensor& v_p, const Tensor& f_j, const Tensor& v_o,
                     const SemanticWeights& weights) {
  return translation_loss(tape, semantic_project(tape, weights.subject, f_i, v_s),
                          semantic_project(tape, weights.predicate, f_ij, v_p),
                          semantic_project(tape, weights.object, f_j, v_o));
}

Tensor translation_loss(Tape& tape, const Tensor& subject_term, const Tensor& predicate_term,
                        const Tensor& object_term) {
  Tensor translated = add(tape, subject_term, predicate_term);
  return l2_sq(tape, sub(tape, object_term, translated));
}

Tensor transform_relation(Tape& tape, const Tensor& f_i, const Tensor& v_s, const Tensor& f_ij,
                          const Tensor& v_p, const Tensor& f_j, const Tensor& v_o,
                          const SemanticWeights& weights) {
  std::vector<Tensor> parts{semantic_project(tape, weights.subject, f_i, v_s),
                            semantic_project(tape, weights.predicate, f_ij, v_p),
                            semantic_project(tape, weights.object, f_j, v_o)};
  const std::size_t axis = parts.front().rank() - 1;
  return concat(tape, parts, axis);
}

Tensor relation_summary(Tape& tape, std::span<const Tensor> thetas, std::size_t width) {
  if (thetas.empty()) return Tensor({width});
  Tensor total = thetas.front();
  for (std::size_t k = 1; k < thetas.size(); ++k) total = add(tape, total, thetas[k]);
  if (total.size() != width)
    throw SizeMismatch("relation summary width " + std::to_string(total.size()) + ", expected " +
                       std::to_string(width));
  return total;
}

Tensor relation_summaries(Tape& tape, const Tensor& theta, std::span<const std::size_t> subject,
                          std::size_t num_entities) {
  return segment_sum(tape, theta, subject, num_entities);
}

}  // namespace sgg
