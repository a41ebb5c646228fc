#include "sgg/metrics.hpp"

#include <algorithm>
#include <numeric>

#include "sgg/error.hpp"

namespace sgg {

namespace {

std::size_t argmax(std::span<const double> v) {
  return static_cast<std::size_t>(std::max_element(v.begin(), v.end()) - v.begin());
}

bool ranks_before(const Triplet& a, const Triplet& b) {
  if (a.score != b.score) return a.score > b.score;
  if (a.subject != b.subject) return a.subject < b.subject;
  if (a.object != b.object) return a.object < b.object;
  return a.predicate < b.predicate;
}

}  // namespace

std::vector<Triplet> rank_triplets(const PredictedGraph& pred, RankMode mode, std::size_t cap) {
  const std::size_t n = pred.num_entities();
  std::vector<std::size_t> label(n);
  std::vector<double> conf(n);
  for (std::size_t i = 0; i < n; ++i) {
    label[i] = argmax(pred.entity_probs[i]);
    conf[i] = pred.entity_probs[i][label[i]];
  }

  std::vector<Triplet> out;
  std::vector<Triplet> candidates;
  for (const auto& pair : pred.pairs) {
    if (pair.subject >= n || pair.object >= n)
      throw IndexOutOfRange("pair (" + std::to_string(pair.subject) + "," +
                            std::to_string(pair.object) + ") outside the scene");
    if (pair.subject == pair.object) continue;
    candidates.clear();
    const double pair_conf = conf[pair.subject] * conf[pair.object];
    for (std::size_t p = 1; p < pair.probs.size(); ++p)
      candidates.push_back({pair.subject, pair.object, p, label[pair.subject], label[pair.object],
                            pair_conf * pair.probs[p]});
    std::sort(candidates.begin(), candidates.end(), ranks_before);
    std::size_t keep = candidates.size();
    if (mode == RankMode::Constrained) keep = std::min<std::size_t>(1, keep);
    else if (cap > 0) keep = std::min(cap, keep);
    out.insert(out.end(), candidates.begin(), candidates.begin() + static_cast<std::ptrdiff_t>(keep));
  }
  std::sort(out.begin(), out.end(), ranks_before);
  return out;
}

std::optional<double> recall_at_k(std::span<const Triplet> ranked,
                                  std::span<const Relation> gt_relations,
                                  std::span<const std::size_t> gt_labels, std::size_t k, Task task) {
  if (gt_relations.empty()) return std::nullopt;
  const std::size_t top = std::min(k, ranked.size());
  std::size_t matched = 0;
  for (const auto& gt : gt_relations) {
    for (std::size_t r = 0; r < top; ++r) {
      const Triplet& t = ranked[r];
      if (t.subject != gt.subject || t.object != gt.object || t.predicate != gt.predicate) continue;
      if (task == Task::SGCls &&
          (t.subject_label != gt_labels[gt.subject] || t.object_label != gt_labels[gt.object]))
        continue;
      ++matched;
      break;
    }
  }
  return static_cast<double>(matched) / static_cast<double>(gt_relations.size());
}

void accumulate_predicate_recall(PredicateRecallTable& table, const PredictedGraph& pred,
                                 std::span<const Relation> gt_relations, std::size_t k) {
  for (const auto& gt : gt_relations) {
    auto it = std::find_if(pred.pairs.begin(), pred.pairs.end(), [&](const PairPrediction& p) {
      return p.subject == gt.subject && p.object == gt.object;
    });
    PredicateRecall& entry = table[gt.predicate];
    ++entry.total;
    if (it == pred.pairs.end()) continue;
    const auto& probs = it->probs;
    // Rank of the true predicate: count predicates ranked ahead of it, ties
    // broken by index.
    std::size_t ahead = 0;
    for (std::size_t p = 0; p < probs.size(); ++p)
      if (probs[p] > probs[gt.predicate] || (probs[p] == probs[gt.predicate] && p < gt.predicate)) ++ahead;
    if (ahead < k) ++entry.hits;
  }
}

PredicateRecallTable per_predicate_recall(std::span<const PredictedGraph> preds,
                                          std::span<const SceneInstance> gt, std::size_t k) {
  if (preds.size() != gt.size()) throw SizeMismatch("predictions and ground truth differ in length");
  PredicateRecallTable table;
  for (std::size_t i = 0; i < preds.size(); ++i)
    accumulate_predicate_recall(table, preds[i], gt[i].relations, k);
  return table;
}

}  // namespace sgg
