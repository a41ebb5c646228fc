#include "sgg/train.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>
#include <random>

#include "json.hpp"
#include "sgg/adam.hpp"
#include "sgg/checkpoint.hpp"
#include "sgg/error.hpp"

namespace sgg {

std::vector<double> TrainResult::loss_curve() const {
  std::vector<double> out;
  out.reserve(steps.size());
  for (const auto& s : steps) out.push_back(s.total);
  return out;
}

TrainResult train(std::span<const SceneInstance> dataset, const Vocab& vocab, const ModelConfig& model,
                  const TrainConfig& config, const TrainOptions& options) {
  if (dataset.empty()) throw EmptyInput("training set is empty");
  ModelConfig m = model;
  if (m.feature_dim == 0) m.feature_dim = dataset.front().feature_dim();
  return train(dataset, init_model(m, vocab), config, options);
}

TrainResult train(std::span<const SceneInstance> dataset, ModelParams params, const TrainConfig& config,
                  const TrainOptions& options) {
  config.validate();
  if (dataset.empty()) throw EmptyInput("training set is empty");
  TrainResult result;
  const auto trainable = params.trainable();
  OptimizerState opt = make_optimizer(
      {config.learning_rate, config.beta1, config.beta2, config.epsilon}, trainable);

  std::mt19937_64 order_rng(config.seed);
  std::mt19937_64 bg_rng(config.seed ^ 0x9e3779b97f4a7c15ULL);
  std::vector<std::size_t> order(dataset.size());
  std::iota(order.begin(), order.end(), 0);

  std::size_t step = 0;
  bool done = false;
  for (std::size_t epoch = 1; epoch <= config.epochs && !done; ++epoch) {
    std::shuffle(order.begin(), order.end(), order_rng);
    double epoch_sum = 0.0;
    std::size_t epoch_images = 0;
    for (std::size_t start = 0; start < order.size(); start += config.batch_size) {
      const std::size_t end = std::min(order.size(), start + config.batch_size);
      std::vector<const SceneInstance*> scenes;
      for (std::size_t k = start; k < end; ++k) scenes.push_back(&dataset[order[k]]);
      Batch batch = make_batch(std::span<const SceneInstance* const>(scenes), params,
                               BatchOptions{&bg_rng, config.bg_ratio});
      Tape tape;
      LossBreakdown loss = joint_loss(tape, params, batch);
      const double total = loss.total.item();
      ++step;
      if (!std::isfinite(total))
        throw NonFiniteLoss("loss became " + std::to_string(total) + " at step " + std::to_string(step) +
                            " (entity " + std::to_string(loss.entity) + ", relation " +
                            std::to_string(loss.relation) + ", semantic " + std::to_string(loss.semantic) +
                            ")");
      params.zero_grad();
      tape.backward(loss.total);
      adam_step(trainable, opt);

      StepLog log{epoch, step, scenes.size(), total, loss.entity, loss.relation, loss.semantic, loss.decay};
      result.steps.push_back(log);
      epoch_sum += total * static_cast<double>(scenes.size());
      epoch_images += scenes.size();
      if (options.log)
        *options.log << nlohmann::json{{"epoch", epoch},       {"step", step},
                                       {"loss", total},        {"entity", loss.entity},
                                       {"relation", loss.relation}, {"semantic", loss.semantic},
                                       {"decay", loss.decay}}
                            .dump()
                     << '\n';
      if (options.on_step) options.on_step(log, params);
      if (config.max_steps > 0 && step >= config.max_steps) {
        done = true;
        break;
      }
    }
    result.epoch_loss.push_back(epoch_sum / static_cast<double>(std::max<std::size_t>(1, epoch_images)));
    if (!options.checkpoint_prefix.empty() && config.checkpoint_every > 0 &&
        epoch % config.checkpoint_every == 0)
      save_checkpoint(options.checkpoint_prefix + ".epoch" + std::to_string(epoch) + ".ckpt", params);
  }
  params.zero_grad();
  result.params = std::move(params);
  return result;
}

}  // namespace sgg
