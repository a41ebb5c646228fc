#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "sgg/config.hpp"
#include "sgg/metrics.hpp"
#include "sgg/model.hpp"

namespace sgg {

struct RecallPair {
  double at50 = 0.0;
  double at100 = 0.0;
  friend bool operator==(const RecallPair&, const RecallPair&) = default;
};

struct EvalResult {
  Task task = Task::SGCls;
  RecallPair constrained;
  RecallPair unconstrained;
  PredicateRecallTable per_predicate;  // Recall@k per predicate index
  std::size_t predicate_k = 5;
  std::size_t images = 0;                  // images entering the averages
  std::vector<std::string> skipped_images; // no ground-truth relations
};

bool operator==(const EvalResult& a, const EvalResult& b);

const char* task_name(Task task);
Task parse_task(const std::string& name);  // "sgcls" | "predcls"

// PredCls replaces each entity distribution with the ground-truth one-hot.
void apply_task(PredictedGraph& pred, const SceneInstance& gt, Task task);

EvalResult evaluate_predictions(std::span<const PredictedGraph> preds,
                                std::span<const SceneInstance> gt, Task task,
                                const EvalConfig& config = {});
EvalResult evaluate(std::span<const SceneInstance> dataset, const ModelParams& params, Task task,
                    const EvalConfig& config = {});

nlohmann::json to_json(const EvalResult& result, const Vocab& vocab);

}  // namespace sgg
