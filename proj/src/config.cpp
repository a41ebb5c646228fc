#include "sgg/config.hpp"

#include <fstream>
#include <set>

#include "sgg/error.hpp"

namespace sgg {

using nlohmann::json;

namespace {

// Reads optional fields from a JSON object and rejects keys nobody asked for.
class Reader {
 public:
  Reader(const json& j, std::string section) : j_(j), section_(std::move(section)) {
    if (!j_.is_object()) throw InvalidConfig("\"" + section_ + "\" must be a JSON object");
  }

  template <typename T>
  void get(const char* key, T& out) {
    seen_.insert(key);
    if (!j_.contains(key)) return;
    try {
      out = j_.at(key).get<T>();
    } catch (const json::exception& e) {
      throw InvalidConfig(section_ + "." + key + ": " + e.what());
    }
  }

  const json* section(const char* key) {
    seen_.insert(key);
    return j_.contains(key) ? &j_.at(key) : nullptr;
  }

  void finish() const {
    for (auto it = j_.begin(); it != j_.end(); ++it)
      if (!seen_.count(it.key())) throw InvalidConfig("unknown key \"" + section_ + "." + it.key() + "\"");
  }

 private:
  const json& j_;
  std::string section_;
  std::set<std::string> seen_;
};

}  // namespace

void ModelConfig::validate() const {
  auto positive = [](std::size_t v, const char* name) {
    if (v == 0) throw InvalidConfig(std::string("model.") + name + " must be positive");
  };
  positive(embed_dim, "embed_dim");
  positive(embed_hidden, "embed_hidden");
  positive(visual_dim, "visual_dim");
  positive(relation_dim, "relation_dim");
  positive(heads, "heads");
  positive(graph_width, "graph_width");
  positive(head_hidden, "head_hidden");
  if (graph_width < heads) throw InvalidConfig("model.graph_width must be at least model.heads");
  for (double s : {leaky_slope, output_slope})
    if (!(s > 0.0 && s < 1.0)) throw InvalidConfig("LeakyReLU slopes must lie in (0,1)");
  if (lambda_entity < 0 || lambda_relation < 0 || lambda_semantic < 0 || weight_decay < 0)
    throw InvalidConfig("loss weights must be non-negative");
  if (union_margin < 0) throw InvalidConfig("model.union_margin must be non-negative");
}

void TrainConfig::validate() const {
  if (!(learning_rate > 0)) throw InvalidConfig("train.learning_rate must be positive");
  if (!(beta1 >= 0 && beta1 < 1 && beta2 >= 0 && beta2 < 1))
    throw InvalidConfig("Adam betas must lie in [0,1)");
  if (!(epsilon > 0)) throw InvalidConfig("train.epsilon must be positive");
  if (batch_size == 0) throw InvalidConfig("train.batch_size must be positive");
  if (bg_ratio < 0) throw InvalidConfig("train.bg_ratio must be non-negative");
}

json to_json(const ModelConfig& c) {
  return {{"feature_dim", c.feature_dim},
          {"embed_dim", c.embed_dim},
          {"embed_hidden", c.embed_hidden},
          {"embed_layers", c.embed_layers},
          {"visual_dim", c.visual_dim},
          {"relation_dim", c.relation_dim},
          {"heads", c.heads},
          {"graph_width", c.graph_width},
          {"head_hidden", c.head_hidden},
          {"leaky_slope", c.leaky_slope},
          {"output_slope", c.output_slope},
          {"lambda_entity", c.lambda_entity},
          {"lambda_relation", c.lambda_relation},
          {"lambda_semantic", c.lambda_semantic},
          {"weight_decay", c.weight_decay},
          {"decay_attention_vectors", c.decay_attention_vectors},
          {"use_semantic_transform", c.use_semantic_transform},
          {"use_graph_attention", c.use_graph_attention},
          {"iou_threshold", c.adjacency.iou},
          {"distance_ratio", c.adjacency.distance_ratio},
          {"self_loops", c.adjacency.self_loops},
          {"union_margin", c.union_margin},
          {"embeddings_path", c.embeddings_path},
          {"freeze_loaded_embeddings", c.freeze_loaded_embeddings},
          {"embedding_init_std", c.embedding_init_std},
          {"init_seed", c.init_seed}};
}

ModelConfig model_config_from_json(const json& j) {
  ModelConfig c;
  Reader r(j, "model");
  r.get("feature_dim", c.feature_dim);
  r.get("embed_dim", c.embed_dim);
  r.get("embed_hidden", c.embed_hidden);
  r.get("embed_layers", c.embed_layers);
  r.get("visual_dim", c.visual_dim);
  r.get("relation_dim", c.relation_dim);
  r.get("heads", c.heads);
  r.get("graph_width", c.graph_width);
  r.get("head_hidden", c.head_hidden);
  r.get("leaky_slope", c.leaky_slope);
  r.get("output_slope", c.output_slope);
  r.get("lambda_entity", c.lambda_entity);
  r.get("lambda_relation", c.lambda_relation);
  r.get("lambda_semantic", c.lambda_semantic);
  r.get("weight_decay", c.weight_decay);
  r.get("decay_attention_vectors", c.decay_attention_vectors);
  r.get("use_semantic_transform", c.use_semantic_transform);
  r.get("use_graph_attention", c.use_graph_attention);
  r.get("iou_threshold", c.adjacency.iou);
  r.get("distance_ratio", c.adjacency.distance_ratio);
  r.get("self_loops", c.adjacency.self_loops);
  r.get("union_margin", c.union_margin);
  r.get("embeddings_path", c.embeddings_path);
  r.get("freeze_loaded_embeddings", c.freeze_loaded_embeddings);
  r.get("embedding_init_std", c.embedding_init_std);
  r.get("init_seed", c.init_seed);
  r.finish();
  c.validate();
  return c;
}

json to_json(const Vocab& v) { return {{"entities", v.entities}, {"predicates", v.predicates}}; }

Vocab vocab_from_json(const json& j) {
  Reader r(j, "vocab");
  Vocab v;
  std::size_t ne = 0, np = 0;
  r.get("num_entities", ne);
  r.get("num_predicates", np);
  if (ne || np) v = Vocab::with_sizes(ne, np);
  r.get("entities", v.entities);
  r.get("predicates", v.predicates);
  r.finish();
  v.validate();
  return v;
}

json to_json(const SyntheticConfig& c) {
  return {{"n_images", c.n_images},
          {"entities_per_image", c.entities_per_image},
          {"num_classes", c.num_classes},
          {"num_predicates", c.num_predicates},
          {"feature_dim", c.feature_dim},
          {"seed", c.seed},
          {"prototype_scale", c.prototype_scale},
          {"feature_noise", c.feature_noise},
          {"classifier_accuracy", c.classifier_accuracy},
          {"score_confidence", c.score_confidence},
          {"nested_probability", c.nested_probability},
          {"separation_margin", c.separation_margin}};
}

SyntheticConfig synthetic_config_from_json(const json& j) {
  SyntheticConfig c;
  Reader r(j, "synthetic");
  r.get("n_images", c.n_images);
  r.get("entities_per_image", c.entities_per_image);
  r.get("num_classes", c.num_classes);
  r.get("num_predicates", c.num_predicates);
  r.get("feature_dim", c.feature_dim);
  r.get("seed", c.seed);
  r.get("prototype_scale", c.prototype_scale);
  r.get("feature_noise", c.feature_noise);
  r.get("classifier_accuracy", c.classifier_accuracy);
  r.get("score_confidence", c.score_confidence);
  r.get("nested_probability", c.nested_probability);
  r.get("separation_margin", c.separation_margin);
  r.finish();
  return c;
}

Config config_from_json(const json& j) {
  Config c;
  Reader r(j, "config");
  bool have_synthetic = false;
  if (const json* s = r.section("synthetic")) {
    c.synthetic = synthetic_config_from_json(*s);
    have_synthetic = true;
  }
  if (const json* v = r.section("vocab")) c.vocab = vocab_from_json(*v);
  else if (have_synthetic) c.vocab = synthetic_vocab(c.synthetic);
  if (const json* m = r.section("model")) c.model = model_config_from_json(*m);
  if (const json* t = r.section("train")) {
    Reader tr(*t, "train");
    tr.get("learning_rate", c.train.learning_rate);
    tr.get("beta1", c.train.beta1);
    tr.get("beta2", c.train.beta2);
    tr.get("epsilon", c.train.epsilon);
    tr.get("batch_size", c.train.batch_size);
    tr.get("epochs", c.train.epochs);
    tr.get("max_steps", c.train.max_steps);
    tr.get("seed", c.train.seed);
    tr.get("bg_ratio", c.train.bg_ratio);
    tr.get("checkpoint_every", c.train.checkpoint_every);
    tr.finish();
  }
  c.train.validate();
  if (const json* e = r.section("eval")) {
    Reader er(*e, "eval");
    er.get("predicate_k", c.eval.predicate_k);
    er.get("unconstrained_cap", c.eval.unconstrained_cap);
    er.get("batch_size", c.eval.batch_size);
    er.finish();
  }
  if (const json* l = r.section("load")) {
    Reader lr(*l, "load");
    lr.get("scores_are_logits", c.load.scores_are_logits);
    lr.finish();
  }
  r.finish();
  return c;
}

Config load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config '" + path + "'");
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw InvalidConfig("config '" + path + "': " + e.what());
  }
  return config_from_json(j);
}

json to_json(const Config& c) {
  return {{"vocab", to_json(c.vocab)},
          {"model", to_json(c.model)},
          {"train",
           {{"learning_rate", c.train.learning_rate},
            {"beta1", c.train.beta1},
            {"beta2", c.train.beta2},
            {"epsilon", c.train.epsilon},
            {"batch_size", c.train.batch_size},
            {"epochs", c.train.epochs},
            {"max_steps", c.train.max_steps},
            {"seed", c.train.seed},
            {"bg_ratio", c.train.bg_ratio},
            {"checkpoint_every", c.train.checkpoint_every}}},
          {"eval",
           {{"predicate_k", c.eval.predicate_k},
            {"unconstrained_cap", c.eval.unconstrained_cap},
            {"batch_size", c.eval.batch_size}}},
          {"synthetic", to_json(c.synthetic)},
          {"load", {{"scores_are_logits", c.load.scores_are_logits}}}};
}

}  // namespace sgg
