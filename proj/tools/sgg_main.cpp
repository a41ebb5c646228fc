// Command-line entry point: training, evaluation, inference and diagnostics.
#include <fstream>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"
#include "sgg/adjacency.hpp"
#include "sgg/checkpoint.hpp"
#include "sgg/config.hpp"
#include "sgg/error.hpp"
#include "sgg/evaluate.hpp"
#include "sgg/synthetic.hpp"
#include "sgg/train.hpp"

namespace {

using nlohmann::json;

struct ErrorExit {
  int code;
};

sgg::Config config_or_default(const std::string& path) {
  return path.empty() ? sgg::Config{} : sgg::load_config(path);
}

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw sgg::IoError("cannot write '" + path + "'");
  return out;
}

void run_train(const std::string& data, const std::string& config_path, const std::string& out,
               const std::string& log_path) {
  const sgg::Config cfg = config_or_default(config_path);
  const auto dataset = sgg::load_dataset(data, cfg.vocab, cfg.load);
  std::ofstream log_file;
  sgg::TrainOptions options;
  if (!log_path.empty()) {
    log_file = open_out(log_path);
    options.log = &log_file;
  }
  options.checkpoint_prefix = out;
  const auto result = sgg::train(dataset, cfg.vocab, cfg.model, cfg.train, options);
  sgg::save_checkpoint(out, result.params);
  std::cout << json{{"checkpoint", out},
                    {"steps", result.steps.size()},
                    {"epoch_loss", result.epoch_loss}}
                   .dump()
            << '\n';
}

void run_eval(const std::string& data, const std::string& ckpt, const std::string& config_path,
              const std::string& task, bool unconstrained) {
  const sgg::Config cfg = config_or_default(config_path);
  const auto params = sgg::load_checkpoint(ckpt);
  const auto dataset = sgg::load_dataset(data, params.vocab, cfg.load);
  const auto result = sgg::evaluate(dataset, params, sgg::parse_task(task), cfg.eval);
  json report = sgg::to_json(result, params.vocab);
  const auto& picked = unconstrained ? result.unconstrained : result.constrained;
  report["mode"] = unconstrained ? "unconstrained" : "constrained";
  report["recall@50"] = picked.at50;
  report["recall@100"] = picked.at100;
  std::cout << report.dump(2) << '\n';
}

void run_infer(const std::string& data, const std::string& ckpt, const std::string& config_path,
               const std::string& out) {
  const sgg::Config cfg = config_or_default(config_path);
  const auto params = sgg::load_checkpoint(ckpt);
  const auto dataset = sgg::load_dataset(data, params.vocab, cfg.load);
  const auto graphs = sgg::predict(params, dataset, cfg.eval.batch_size);
  std::ofstream file = open_out(out);
  for (const auto& g : graphs) {
    json entities = json::array();
    for (const auto& probs : g.entity_probs) {
      const auto best = static_cast<std::size_t>(std::max_element(probs.begin(), probs.end()) - probs.begin());
      entities.push_back({{"label", params.vocab.entities[best]}, {"score", probs[best]}});
    }
    json triplets = json::array();
    for (const auto& t : g.triplets)
      triplets.push_back({{"subject", t.subject},
                          {"object", t.object},
                          {"subject_label", params.vocab.entities[t.subject_label]},
                          {"predicate", params.vocab.predicates[t.predicate]},
                          {"object_label", params.vocab.entities[t.object_label]},
                          {"score", t.score}});
    file << json{{"id", g.image_id}, {"entities", entities}, {"triplets", triplets}}.dump() << '\n';
  }
}

void run_gen_synthetic(const std::string& config_path, const std::string& out) {
  const sgg::Config cfg = config_or_default(config_path);
  const auto scenes = sgg::gen_synthetic(cfg.synthetic);
  sgg::save_dataset(out, scenes);
  std::cout << json{{"images", scenes.size()}, {"vocab", sgg::to_json(sgg::synthetic_vocab(cfg.synthetic))}}
                   .dump()
            << '\n';
}

void run_grad_check(const std::string& config_path, std::size_t entries) {
  sgg::Config cfg = config_or_default(config_path);
  sgg::SyntheticConfig syn = cfg.synthetic;
  syn.n_images = 1;
  syn.entities_per_image = 3;
  const auto scenes = sgg::gen_synthetic(syn);
  sgg::ModelConfig model = cfg.model;
  model.feature_dim = syn.feature_dim;
  const auto params = sgg::init_model(model, sgg::synthetic_vocab(syn));
  const sgg::Batch batch = sgg::make_batch(std::span<const sgg::SceneInstance>(scenes), params);
  sgg::GradCheckOptions options;
  options.max_entries_per_param = entries;
  const auto report = sgg::grad_check(
      [&](sgg::Tape& tape) { return sgg::joint_loss(tape, params, batch).total; }, params.trainable(),
      options);
  std::cout << json{{"passed", report.passed},
                    {"max_rel_error", report.max_rel_error},
                    {"checked", report.checked},
                    {"kink_entries", report.kink_entries},
                    {"worst", {{"param", report.worst.param},
                               {"index", report.worst.index},
                               {"analytic", report.worst.analytic},
                               {"numeric", report.worst.numeric}}}}
                   .dump(2)
            << '\n';
  if (!report.passed) throw ErrorExit{2};
}

void run_dump_attention(const std::string& data, const std::string& ckpt, const std::string& config_path,
                        const std::string& out) {
  const sgg::Config cfg = config_or_default(config_path);
  const auto params = sgg::load_checkpoint(ckpt);
  const auto dataset = sgg::load_dataset(data, params.vocab, cfg.load);
  std::ofstream file = open_out(out);
  for (const auto& scene : dataset) {
    const sgg::Batch batch = sgg::make_batch(std::span<const sgg::SceneInstance>(&scene, 1), params);
    sgg::Tape tape;
    const auto r = sgg::forward(tape, params, batch);
    const std::size_t n = scene.size();
    std::vector<sgg::Box> boxes;
    for (const auto& e : scene.entities) boxes.push_back(e.box);
    const auto adj = sgg::build_adjacency(boxes, params.config.adjacency);
    json adjacency = json::array(), rules = json::array(), heads = json::array();
    for (std::size_t i = 0; i < n; ++i) {
      json row = json::array(), tag_row = json::array();
      for (std::size_t j = 0; j < n; ++j) {
        row.push_back(batch.adjacency[i * n + j] != 0);
        json tags = json::array();
        if (adj.has(i, j, sgg::kInsideRule)) tags.push_back("inside");
        if (adj.has(i, j, sgg::kCoverRule)) tags.push_back("cover");
        if (adj.has(i, j, sgg::kOverlapRule)) tags.push_back("overlap");
        if (adj.has(i, j, sgg::kRelativeRule)) tags.push_back("relative");
        if (adj.has(i, j, sgg::kSelfLoop)) tags.push_back("self");
        tag_row.push_back(tags);
      }
      adjacency.push_back(row);
      rules.push_back(tag_row);
    }
    for (const auto& alpha : r.alphas) {
      json m = json::array();
      for (std::size_t i = 0; i < n; ++i) {
        auto row = alpha.data().subspan(i * n, n);
        m.push_back(std::vector<double>(row.begin(), row.end()));
      }
      heads.push_back(m);
    }
    file << json{{"id", scene.id}, {"adjacency", adjacency}, {"rules", rules}, {"alpha", heads}}.dump()
         << '\n';
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Scene graph generation with semantic transformation and graph self-attention"};
  app.require_subcommand(1);

  std::string data, config, out, ckpt, task = "sgcls", log;
  bool unconstrained = false;
  std::size_t entries = 20;

  auto* train = app.add_subcommand("train", "Train a model and write a checkpoint");
  train->add_option("--data", data, "Training scenes (JSONL)")->required();
  train->add_option("--config", config, "Config JSON");
  train->add_option("--out", out, "Checkpoint path")->required();
  train->add_option("--log", log, "Per-step loss log (JSONL)");

  auto* eval = app.add_subcommand("eval", "Recall@K of a checkpoint on a dataset");
  eval->add_option("--data", data)->required();
  eval->add_option("--ckpt", ckpt)->required();
  eval->add_option("--config", config);
  eval->add_option("--task", task)->check(CLI::IsMember({"sgcls", "predcls"}));
  eval->add_flag("--unconstrained", unconstrained);

  auto* infer = app.add_subcommand("infer", "Write predicted scene graphs");
  infer->add_option("--data", data)->required();
  infer->add_option("--ckpt", ckpt)->required();
  infer->add_option("--config", config);
  infer->add_option("--out-graphs", out)->required();

  auto* gen = app.add_subcommand("gen-synthetic", "Generate a synthetic dataset");
  gen->add_option("--config", config);
  gen->add_option("--out", out)->required();

  auto* gc = app.add_subcommand("grad-check", "Finite-difference check of the joint loss");
  gc->add_option("--config", config);
  gc->add_option("--entries", entries, "Entries checked per parameter (0 = all)");

  auto* dump = app.add_subcommand("dump-attention", "Write adjacency and attention per image");
  dump->add_option("--data", data)->required();
  dump->add_option("--ckpt", ckpt)->required();
  dump->add_option("--config", config);
  dump->add_option("--out", out)->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << json{{"error", "UsageError"}, {"message", e.what()}}.dump() << '\n';
    return 64;
  }

  try {
    if (*train) run_train(data, config, out, log);
    else if (*eval) run_eval(data, ckpt, config, task, unconstrained);
    else if (*infer) run_infer(data, ckpt, config, out);
    else if (*gen) run_gen_synthetic(config, out);
    else if (*gc) run_grad_check(config, entries);
    else if (*dump) run_dump_attention(data, ckpt, config, out);
  } catch (const ErrorExit& e) {
    return e.code;
  } catch (const sgg::ParseError& e) {
    std::cerr << json{{"error", e.kind()}, {"message", e.what()}, {"line", e.line()}}.dump() << '\n';
    return 1;
  } catch (const sgg::ValidationError& e) {
    std::cerr << json{{"error", e.kind()}, {"message", e.what()}, {"instance", e.instance_id()}}.dump()
              << '\n';
    return 1;
  } catch (const sgg::Error& e) {
    std::cerr << json{{"error", e.kind()}, {"message", e.what()}}.dump() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << json{{"error", "InternalError"}, {"message", e.what()}}.dump() << '\n';
    return 1;
  }
  return 0;
}
