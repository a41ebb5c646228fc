#pragma once

#include <cstddef>
#include <string>
#include <vector>

namespace sgg {

// ⟨subject, predicate, object⟩ with the entity labels it asserts and its
// ranking confidence.
struct Triplet {
  std::size_t subject = 0;
  std::size_t object = 0;
  std::size_t predicate = 0;
  std::size_t subject_label = 0;
  std::size_t object_label = 0;
  double score = 0.0;

  friend bool operator==(const Triplet&, const Triplet&) = default;
};

struct PairPrediction {
  std::size_t subject = 0;
  std::size_t object = 0;
  std::vector<double> probs;  // over predicates, bg at index 0
};

// Model output for one image.
struct PredictedGraph {
  std::string image_id;
  std::vector<std::vector<double>> entity_probs;  // per entity, over categories
  std::vector<PairPrediction> pairs;              // every ordered pair i != j
  std::vector<double> omega;                      // global graph representation
  std::vector<Triplet> triplets;                  // constrained ranking

  std::size_t num_entities() const { return entity_probs.size(); }
};

}  // namespace sgg
