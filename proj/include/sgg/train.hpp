#pragma once

#include <cstddef>
#include <functional>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "sgg/config.hpp"
#include "sgg/model.hpp"

namespace sgg {

struct StepLog {
  std::size_t epoch = 0;
  std::size_t step = 0;  // 1-based optimizer step
  std::size_t images = 0;
  double total = 0.0;
  double entity = 0.0;
  double relation = 0.0;
  double semantic = 0.0;
  double decay = 0.0;
};

struct TrainOptions {
  std::ostream* log = nullptr;  // one JSON line per step when set
  // Periodic checkpoints go to <checkpoint_prefix>.epoch<k>.ckpt.
  std::string checkpoint_prefix;
  std::function<void(const StepLog&, const ModelParams&)> on_step;
};

struct TrainResult {
  ModelParams params;
  std::vector<StepLog> steps;
  std::vector<double> epoch_loss;  // mean per-image data+decay loss of each epoch

  std::vector<double> loss_curve() const;
};

// Adam over shuffled mini-batches. model.feature_dim is taken from the data
// when zero. Throws NonFiniteLoss if a loss stops being finite.
TrainResult train(std::span<const SceneInstance> dataset, const Vocab& vocab, const ModelConfig& model,
                  const TrainConfig& config, const TrainOptions& options = {});
// Continues from existing parameters.
TrainResult train(std::span<const SceneInstance> dataset, ModelParams params, const TrainConfig& config,
                  const TrainOptions& options = {});

}  // namespace sgg
