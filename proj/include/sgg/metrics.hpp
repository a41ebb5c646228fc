#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <vector>

#include "sgg/dataset.hpp"
#include "sgg/graph.hpp"

namespace sgg {

enum class Task { SGCls, PredCls };
enum class RankMode { Constrained, Unconstrained };

// Scores every ordered pair's non-bg predicates by P(subject)·P(predicate)·P(object)
// using each entity's most likely label. Constrained mode keeps the best
// predicate per pair; unconstrained keeps `cap` of them (0 = all). Sorted by
// score, ties broken by (subject, object, predicate).
std::vector<Triplet> rank_triplets(const PredictedGraph& pred, RankMode mode, std::size_t cap = 0);

// Fraction of ground-truth triplets found among the first k ranked ones, or
// nullopt when the image has no ground-truth relations. SGCls also requires
// both predicted entity labels to be right.
std::optional<double> recall_at_k(std::span<const Triplet> ranked,
                                  std::span<const Relation> gt_relations,
                                  std::span<const std::size_t> gt_labels, std::size_t k, Task task);

// Per predicate: ground-truth pairs whose predicate is among the k most
// probable for that ordered pair (bg included in the ranking).
struct PredicateRecall {
  std::size_t hits = 0;
  std::size_t total = 0;
  double recall() const { return total ? static_cast<double>(hits) / static_cast<double>(total) : 0.0; }
};
using PredicateRecallTable = std::map<std::size_t, PredicateRecall>;

void accumulate_predicate_recall(PredicateRecallTable& table, const PredictedGraph& pred,
                                 std::span<const Relation> gt_relations, std::size_t k = 5);
PredicateRecallTable per_predicate_recall(std::span<const PredictedGraph> preds,
                                          std::span<const SceneInstance> gt, std::size_t k = 5);

}  // namespace sgg
