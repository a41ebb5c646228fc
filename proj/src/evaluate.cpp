#include "sgg/evaluate.hpp"

#include "sgg/error.hpp"

namespace sgg {

bool operator==(const EvalResult& a, const EvalResult& b) {
  if (a.task != b.task || a.constrained != b.constrained || a.unconstrained != b.unconstrained ||
      a.predicate_k != b.predicate_k || a.images != b.images || a.skipped_images != b.skipped_images)
    return false;
  if (a.per_predicate.size() != b.per_predicate.size()) return false;
  for (auto ia = a.per_predicate.begin(), ib = b.per_predicate.begin(); ia != a.per_predicate.end();
       ++ia, ++ib)
    if (ia->first != ib->first || ia->second.hits != ib->second.hits || ia->second.total != ib->second.total)
      return false;
  return true;
}

const char* task_name(Task task) { return task == Task::SGCls ? "sgcls" : "predcls"; }

Task parse_task(const std::string& name) {
  if (name == "sgcls") return Task::SGCls;
  if (name == "predcls") return Task::PredCls;
  throw InvalidConfig("unknown task '" + name + "' (expected sgcls or predcls)");
}

void apply_task(PredictedGraph& pred, const SceneInstance& gt, Task task) {
  if (task != Task::PredCls) return;
  if (pred.num_entities() != gt.size())
    throw SizeMismatch("prediction for '" + gt.id + "' has a different entity count");
  for (std::size_t i = 0; i < gt.size(); ++i) {
    auto& row = pred.entity_probs[i];
    std::fill(row.begin(), row.end(), 0.0);
    row.at(gt.entities[i].label) = 1.0;
  }
}

EvalResult evaluate_predictions(std::span<const PredictedGraph> preds,
                                std::span<const SceneInstance> gt, Task task,
                                const EvalConfig& config) {
  if (preds.size() != gt.size()) throw SizeMismatch("predictions and ground truth differ in length");
  EvalResult r;
  r.task = task;
  r.predicate_k = config.predicate_k;
  for (std::size_t i = 0; i < preds.size(); ++i) {
    PredictedGraph pred = preds[i];
    apply_task(pred, gt[i], task);
    std::vector<std::size_t> labels;
    for (const auto& e : gt[i].entities) labels.push_back(e.label);
    const auto constrained = rank_triplets(pred, RankMode::Constrained);
    const auto unconstrained = rank_triplets(pred, RankMode::Unconstrained, config.unconstrained_cap);
    const auto c50 = recall_at_k(constrained, gt[i].relations, labels, 50, task);
    if (!c50) {
      r.skipped_images.push_back(gt[i].id);
      continue;
    }
    ++r.images;
    r.constrained.at50 += *c50;
    r.constrained.at100 += *recall_at_k(constrained, gt[i].relations, labels, 100, task);
    r.unconstrained.at50 += *recall_at_k(unconstrained, gt[i].relations, labels, 50, task);
    r.unconstrained.at100 += *recall_at_k(unconstrained, gt[i].relations, labels, 100, task);
    accumulate_predicate_recall(r.per_predicate, pred, gt[i].relations, config.predicate_k);
  }
  if (r.images > 0) {
    const double n = static_cast<double>(r.images);
    for (double* v : {&r.constrained.at50, &r.constrained.at100, &r.unconstrained.at50,
                      &r.unconstrained.at100})
      *v /= n;
  }
  return r;
}

EvalResult evaluate(std::span<const SceneInstance> dataset, const ModelParams& params, Task task,
                    const EvalConfig& config) {
  const auto preds = predict(params, dataset, config.batch_size);
  return evaluate_predictions(preds, dataset, task, config);
}

nlohmann::json to_json(const EvalResult& r, const Vocab& vocab) {
  nlohmann::json per = nlohmann::json::object();
  for (const auto& [p, entry] : r.per_predicate) {
    const std::string name = p < vocab.predicates.size() ? vocab.predicates[p] : std::to_string(p);
    per[name] = {{"recall", entry.recall()}, {"hits", entry.hits}, {"total", entry.total}};
  }
  return {{"task", task_name(r.task)},
          {"images", r.images},
          {"skipped_images", r.skipped_images},
          {"constrained", {{"recall@50", r.constrained.at50}, {"recall@100", r.constrained.at100}}},
          {"unconstrained", {{"recall@50", r.unconstrained.at50}, {"recall@100", r.unconstrained.at100}}},
          {"per_predicate_k", r.predicate_k},
          {"per_predicate", per}};
}

}  // namespace sgg
