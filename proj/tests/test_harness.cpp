#include <cmath>
#include <cstring>
#include <filesystem>
#include <sstream>

#include "doctest.h"
#include "sgg/adam.hpp"
#include "sgg/checkpoint.hpp"
#include "sgg/config.hpp"
#include "sgg/error.hpp"
#include "sgg/evaluate.hpp"
#include "sgg/synthetic.hpp"
#include "sgg/train.hpp"
#include "support.hpp"

using namespace sgg;
using nlohmann::json;

namespace {

bool same_bits(std::span<const double> a, std::span<const double> b) {
  return a.size() == b.size() && std::memcmp(a.data(), b.data(), a.size() * sizeof(double)) == 0;
}

std::filesystem::path temp_path(const std::string& name) {
  return std::filesystem::temp_directory_path() / ("sgg_test_" + name);
}

}  // namespace

TEST_CASE("Adam defaults") {
  AdamConfig c;
  CHECK(c.learning_rate == 1e-4);
  CHECK(c.beta1 == 0.9);
  CHECK(c.beta2 == 0.999);
  CHECK(c.epsilon == 1e-8);
  CHECK(TrainConfig{}.batch_size == 20);
}

TEST_CASE("zero gradient leaves parameters unchanged") {
  Tensor w = Tensor::vector({0.5, -1.25, 3.0}, true);
  std::vector<NamedParam> params{{"w", w}};
  auto state = make_optimizer({}, params);
  w.zero_grad();
  for (int k = 0; k < 3; ++k) adam_step(params, state);
  CHECK(w[0] == 0.5);
  CHECK(w[1] == -1.25);
  CHECK(w[2] == 3.0);
  for (double m : state.m[0]) CHECK(m == 0.0);
  for (double v : state.v[0]) CHECK(v == 0.0);
  CHECK(state.step == 3);
}

TEST_CASE("Adam steps match the update rule evaluated by hand") {
  Tensor w = Tensor::vector({2.0}, true);
  std::vector<NamedParam> params{{"w", w}};
  AdamConfig c{0.01, 0.9, 0.999, 1e-8};
  auto state = make_optimizer(c, params);
  w.grad()[0] = 0.3;
  adam_step(params, state);
  // m = 0.03, v = 9e-5; m̂ = 0.3, v̂ = 0.09; step = 0.01·0.3/(0.3+1e-8).
  const double first = 2.0 - 0.01 * 0.3 / (0.3 + 1e-8);
  CHECK(w[0] == doctest::Approx(first).epsilon(1e-14));
  CHECK(std::abs(2.0 - w[0] - 0.01) < 1e-9);
  w.grad()[0] = -0.1;
  adam_step(params, state);
  const double m = 0.9 * 0.03 + 0.1 * -0.1, v = 0.999 * 9e-5 + 0.001 * 0.01;
  const double mh = m / (1 - 0.81), vh = v / (1 - 0.999 * 0.999);
  CHECK(w[0] == doctest::Approx(first - 0.01 * mh / (std::sqrt(vh) + 1e-8)).epsilon(1e-14));
}

TEST_CASE("Adam rejects mismatched state") {
  Tensor w = Tensor::vector({1.0, 2.0}, true);
  std::vector<NamedParam> params{{"w", w}};
  auto state = make_optimizer({}, params);
  state.m[0].resize(3);
  w.grad()[0] = 1.0;
  CHECK_THROWS_AS(adam_step(params, state), ShapeMismatch);
}

TEST_CASE("checkpoint round trip is bit exact") {
  auto syn = test::tiny_synthetic(3, 3);
  ModelConfig cfg = test::tiny_model();
  cfg.use_graph_attention = false;
  cfg.weight_decay = 3e-4;
  ModelParams p = init_model(cfg, synthetic_vocab(syn));
  std::stringstream buf;
  write_checkpoint(buf, p);
  ModelParams q = read_checkpoint(buf);
  CHECK(q.vocab == p.vocab);
  CHECK(to_json(q.config) == to_json(p.config));
  auto a = p.named(), b = q.named();
  REQUIRE(a.size() == b.size());
  for (std::size_t k = 0; k < a.size(); ++k) {
    CAPTURE(a[k].name);
    CHECK(a[k].name == b[k].name);
    CHECK(a[k].tensor.shape() == b[k].tensor.shape());
    CHECK(a[k].tensor.requires_grad() == b[k].tensor.requires_grad());
    CHECK(same_bits(a[k].tensor.data(), b[k].tensor.data()));
  }
  auto scenes = gen_synthetic(syn);
  auto pa = predict(p, scenes), pb = predict(q, scenes);
  for (std::size_t k = 0; k < pa.size(); ++k) CHECK(pa[k].omega == pb[k].omega);

  const auto path = temp_path("roundtrip.ckpt");
  save_checkpoint(path.string(), p);
  ModelParams r = load_checkpoint(path.string(), p.vocab);
  CHECK(same_bits(r.named().back().tensor.data(), a.back().tensor.data()));
  CHECK_THROWS_AS(load_checkpoint(path.string(), Vocab::with_sizes(3, 2)), IncompatibleCheckpoint);
  std::filesystem::remove(path);
}

TEST_CASE("damaged checkpoints are rejected") {
  ModelParams p = init_model(test::tiny_model(), Vocab::with_sizes(4, 3));
  std::stringstream buf;
  write_checkpoint(buf, p);
  const std::string bytes = buf.str();

  std::stringstream bad_magic("NOTACKPT" + bytes.substr(8));
  CHECK_THROWS_AS(read_checkpoint(bad_magic), IncompatibleCheckpoint);
  std::string version = bytes;
  version[8] = 9;
  std::stringstream bad_version(version);
  CHECK_THROWS_AS(read_checkpoint(bad_version), IncompatibleCheckpoint);
  std::stringstream truncated(bytes.substr(0, bytes.size() - 16));
  CHECK_THROWS_AS(read_checkpoint(truncated), IncompatibleCheckpoint);
  CHECK_THROWS_AS(load_checkpoint(temp_path("missing.ckpt").string()), IoError);
}

TEST_CASE("training is deterministic under a seed") {
  auto syn = test::tiny_synthetic(30, 4, 2);
  auto scenes = gen_synthetic(syn);
  TrainConfig tc;
  tc.batch_size = 7;
  tc.epochs = 2;
  tc.seed = 5;
  auto a = train(scenes, synthetic_vocab(syn), test::tiny_model(), tc);
  auto b = train(scenes, synthetic_vocab(syn), test::tiny_model(), tc);
  CHECK(a.steps.size() == 10);
  const auto ca = a.loss_curve(), cb = b.loss_curve();
  CHECK(same_bits(ca, cb));
  CHECK(evaluate(scenes, a.params, Task::SGCls) == evaluate(scenes, b.params, Task::SGCls));
  tc.seed = 6;
  auto c = train(scenes, synthetic_vocab(syn), test::tiny_model(), tc);
  CHECK_FALSE(same_bits(ca, c.loss_curve()));
}

TEST_CASE("training honours the step cap and writes periodic checkpoints") {
  auto syn = test::tiny_synthetic(10, 3, 4);
  auto scenes = gen_synthetic(syn);
  TrainConfig tc;
  tc.batch_size = 5;
  tc.epochs = 3;
  tc.checkpoint_every = 1;
  const auto prefix = temp_path("periodic").string();
  std::ostringstream log;
  std::size_t callbacks = 0;
  TrainOptions opts{&log, prefix, [&](const StepLog&, const ModelParams&) { ++callbacks; }};
  auto r = train(scenes, synthetic_vocab(syn), test::tiny_model(), tc, opts);
  CHECK(r.steps.size() == 6);
  CHECK(callbacks == 6);
  CHECK(r.epoch_loss.size() == 3);
  for (int e = 1; e <= 3; ++e) {
    const std::string path = prefix + ".epoch" + std::to_string(e) + ".ckpt";
    CHECK(std::filesystem::exists(path));
    std::filesystem::remove(path);
  }
  std::istringstream lines(log.str());
  std::string line;
  std::size_t n = 0;
  while (std::getline(lines, line)) {
    auto j = json::parse(line);
    CHECK(j.contains("loss"));
    ++n;
  }
  CHECK(n == 6);

  tc.max_steps = 4;
  tc.checkpoint_every = 0;
  CHECK(train(scenes, synthetic_vocab(syn), test::tiny_model(), tc).steps.size() == 4);
}

TEST_CASE("non-finite loss aborts training") {
  auto syn = test::tiny_synthetic(4, 3, 4);
  auto scenes = gen_synthetic(syn);
  ModelConfig cfg = test::tiny_model();
  cfg.init_seed = 3;
  ModelParams p = init_model(cfg, synthetic_vocab(syn));
  p.entity_head.back().bias.mutable_data()[0] = INFINITY;
  CHECK_THROWS_AS(train(scenes, p, TrainConfig{}), NonFiniteLoss);
}

TEST_CASE("training on 200 synthetic images cuts the loss fivefold") {
  SyntheticConfig syn;
  syn.n_images = 200;
  syn.seed = 17;
  auto scenes = gen_synthetic(syn);
  auto r = train(scenes, synthetic_vocab(syn), ModelConfig{}, TrainConfig{});
  const double initial = r.steps.front().total;
  CAPTURE(initial);
  CAPTURE(r.epoch_loss.back());
  CHECK(r.epoch_loss.size() == 10);
  CHECK(r.epoch_loss.back() < 0.2 * initial);
}

TEST_CASE("config parsing") {
  auto c = config_from_json(json::parse(R"({
    "synthetic": {"n_images": 12, "num_classes": 4},
    "model": {"heads": 4, "graph_width": 40, "use_semantic_transform": false},
    "train": {"learning_rate": 0.001, "epochs": 2},
    "eval": {"unconstrained_cap": 3}
  })"));
  CHECK(c.synthetic.n_images == 12);
  CHECK(c.vocab.num_entities() == 4);
  CHECK(c.vocab.num_predicates() == 6);
  CHECK(c.model.heads == 4);
  CHECK(c.model.head_dim() == 10);
  CHECK_FALSE(c.model.use_semantic_transform);
  CHECK(c.model.visual_dim == 500);
  CHECK(c.train.learning_rate == 0.001);
  CHECK(c.train.batch_size == 20);
  CHECK(c.eval.unconstrained_cap == 3);

  auto d = config_from_json(json::object());
  CHECK(d.vocab.num_entities() == 150);
  CHECK(d.vocab.num_predicates() == 51);
  CHECK(d.model.lambda_entity == 4.0);

  auto back = config_from_json(to_json(c));
  CHECK(to_json(back) == to_json(c));

  CHECK_THROWS_AS(config_from_json(json::parse(R"({"model": {"hedas": 4}})")), InvalidConfig);
  CHECK_THROWS_AS(config_from_json(json::parse(R"({"extra": 1})")), InvalidConfig);
  CHECK_THROWS_AS(config_from_json(json::parse(R"({"train": {"batch_size": 0}})")), InvalidConfig);
  CHECK_THROWS_AS(config_from_json(json::parse(R"({"model": {"heads": "eight"}})")), InvalidConfig);
  CHECK_THROWS_AS(load_config(temp_path("absent.json").string()), IoError);
}
