#include "sgg/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iostream>
#include <set>
#include <unordered_set>

#include "json.hpp"
#include "sgg/error.hpp"

namespace sgg {

using nlohmann::json;

Vocab Vocab::with_sizes(std::size_t num_entities, std::size_t num_predicates) {
  Vocab v;
  for (std::size_t i = 0; i < num_entities; ++i) v.entities.push_back("entity_" + std::to_string(i));
  v.predicates.push_back("bg");
  for (std::size_t i = 1; i < num_predicates; ++i)
    v.predicates.push_back("predicate_" + std::to_string(i));
  return v;
}

void Vocab::validate() const {
  if (entities.empty()) throw InvalidConfig("vocabulary has no entity categories");
  if (predicates.empty() || predicates.front() != "bg")
    throw InvalidConfig("predicate vocabulary must start with \"bg\"");
  auto unique = [](const std::vector<std::string>& names, const char* what) {
    std::unordered_set<std::string> seen;
    for (const auto& n : names)
      if (!seen.insert(n).second) throw InvalidConfig(std::string("duplicate ") + what + " name '" + n + "'");
  };
  unique(entities, "entity");
  unique(predicates, "predicate");
}

std::size_t SceneInstance::predicate_of(std::size_t subject, std::size_t object) const {
  for (const auto& r : relations)
    if (r.subject == subject && r.object == object) return r.predicate;
  return kBackgroundPredicate;
}

std::vector<double> relation_feature(const SceneInstance& scene, std::size_t subject,
                                     std::size_t object, double margin) {
  const auto& a = scene.entities.at(subject);
  const auto& b = scene.entities.at(object);
  const std::size_t dim = a.feature.size();
  if (dim < kRelationGeometryWidth || b.feature.size() != dim)
    throw SizeMismatch("relation features need entity features of equal width >= " +
                       std::to_string(kRelationGeometryWidth));
  std::vector<double> f(dim);
  for (std::size_t k = kRelationGeometryWidth; k < dim; ++k)
    f[k] = 0.5 * (a.feature[k] + b.feature[k]);
  const auto sa = spatial_feature(a.box);
  const auto sb = spatial_feature(b.box);
  const auto su = spatial_feature(union_box(a.box, b.box, margin));
  std::copy(sa.begin(), sa.end(), f.begin());
  std::copy(sb.begin(), sb.end(), f.begin() + kSpatialFeatureWidth);
  std::copy(su.begin(), su.end(), f.begin() + 2 * kSpatialFeatureWidth);
  const auto sr = relative_feature(a.box, b.box);
  std::copy(sr.begin(), sr.end(), f.begin() + 3 * kSpatialFeatureWidth);
  return f;
}

RelationContext relation_context(const SceneInstance& scene, std::size_t subject,
                                 std::size_t object, std::size_t num_predicates, double margin) {
  RelationContext ctx;
  ctx.union_box = union_box(scene.entities.at(subject).box, scene.entities.at(object).box, margin);
  ctx.scores.assign(num_predicates, 1.0 / static_cast<double>(num_predicates));
  ctx.feature = relation_feature(scene, subject, object, margin);
  return ctx;
}

std::vector<double> initial_scores(std::span<const double> logits) {
  std::vector<double> p(logits.begin(), logits.end());
  if (p.empty()) return p;
  const double mx = *std::max_element(p.begin(), p.end());
  double z = 0.0;
  for (auto& v : p) z += (v = std::exp(v - mx));
  for (auto& v : p) v /= z;
  return p;
}

void validate_instance(const SceneInstance& scene, const Vocab& vocab) {
  auto fail = [&](const std::string& reason) { throw ValidationError(scene.id, reason); };
  if (scene.entities.empty()) fail("scene has no entities");
  const std::size_t dim = scene.feature_dim();
  if (dim < kRelationGeometryWidth)
    fail("feature width " + std::to_string(dim) + " is below the minimum of " +
         std::to_string(kRelationGeometryWidth));
  for (std::size_t i = 0; i < scene.entities.size(); ++i) {
    const auto& e = scene.entities[i];
    const std::string where = "entity " + std::to_string(i) + ": ";
    if (!e.box.valid()) fail(where + "box must satisfy x1<x2, y1<y2 inside [0,1]");
    if (e.feature.size() != dim) fail(where + "feature width differs from entity 0");
    for (double v : e.feature)
      if (!std::isfinite(v)) fail(where + "non-finite feature value");
    if (e.scores.size() != vocab.num_entities())
      fail(where + "score vector has " + std::to_string(e.scores.size()) + " entries, expected " +
           std::to_string(vocab.num_entities()));
    double s = 0.0;
    for (double v : e.scores) {
      if (!(v >= 0.0)) fail(where + "negative or non-finite score");
      s += v;
    }
    if (std::abs(s - 1.0) > 1e-6) fail(where + "scores sum to " + std::to_string(s) + ", not 1");
    if (e.label >= vocab.num_entities()) fail(where + "gt_label out of range");
  }
  std::set<std::pair<std::size_t, std::size_t>> pairs;
  for (const auto& r : scene.relations) {
    const std::string where = "relation [" + std::to_string(r.subject) + "," +
                              std::to_string(r.object) + "," + std::to_string(r.predicate) + "]: ";
    if (r.subject >= scene.size() || r.object >= scene.size()) fail(where + "entity index out of range");
    if (r.subject == r.object) fail(where + "self-pair");
    if (r.predicate >= vocab.num_predicates()) fail(where + "predicate out of range");
    if (r.predicate == kBackgroundPredicate) fail(where + "bg cannot be annotated explicitly");
    if (!pairs.emplace(r.subject, r.object).second) fail(where + "pair annotated twice");
  }
}

namespace {

const std::set<std::string> kSceneKeys = {"id", "entities", "relations"};
const std::set<std::string> kEntityKeys = {"box", "feat", "scores", "gt_label"};

void require_keys(const json& obj, const std::set<std::string>& keys, std::size_t line,
                  const char* what) {
  if (!obj.is_object()) throw ParseError(line, std::string(what) + " must be an object");
  for (const auto& k : keys)
    if (!obj.contains(k)) throw ParseError(line, std::string(what) + " is missing \"" + k + "\"");
  for (auto it = obj.begin(); it != obj.end(); ++it)
    if (!keys.count(it.key()))
      throw ParseError(line, std::string(what) + " has unexpected field \"" + it.key() + "\"");
}

std::vector<double> number_array(const json& j, std::size_t line, const char* what) {
  if (!j.is_array()) throw ParseError(line, std::string(what) + " must be an array");
  std::vector<double> out;
  out.reserve(j.size());
  for (const auto& v : j) {
    if (!v.is_number()) throw ParseError(line, std::string(what) + " must hold numbers");
    out.push_back(v.get<double>());
  }
  return out;
}

std::size_t index_value(const json& j, std::size_t line, const char* what) {
  if (!j.is_number_integer() || j.get<long long>() < 0)
    throw ParseError(line, std::string(what) + " must be a non-negative integer");
  return j.get<std::size_t>();
}

SceneInstance parse_scene(const json& doc, std::size_t line, const LoadOptions& options) {
  require_keys(doc, kSceneKeys, line, "scene");
  SceneInstance scene;
  if (doc["id"].is_string()) scene.id = doc["id"].get<std::string>();
  else if (doc["id"].is_number_integer()) scene.id = std::to_string(doc["id"].get<long long>());
  else throw ParseError(line, "\"id\" must be a string or integer");

  if (!doc["entities"].is_array()) throw ParseError(line, "\"entities\" must be an array");
  for (const auto& ej : doc["entities"]) {
    require_keys(ej, kEntityKeys, line, "entity");
    auto box = number_array(ej["box"], line, "\"box\"");
    if (box.size() != 4) throw ParseError(line, "\"box\" must have 4 coordinates");
    Entity e;
    e.box = Box{box[0], box[1], box[2], box[3]};
    e.feature = number_array(ej["feat"], line, "\"feat\"");
    e.scores = number_array(ej["scores"], line, "\"scores\"");
    if (options.scores_are_logits) e.scores = initial_scores(e.scores);
    e.label = index_value(ej["gt_label"], line, "\"gt_label\"");
    scene.entities.push_back(std::move(e));
  }

  if (!doc["relations"].is_array()) throw ParseError(line, "\"relations\" must be an array");
  std::set<Relation> seen;
  for (const auto& rj : doc["relations"]) {
    if (!rj.is_array() || rj.size() != 3)
      throw ParseError(line, "each relation must be [subject, object, predicate]");
    Relation r{index_value(rj[0], line, "relation subject"), index_value(rj[1], line, "relation object"),
               index_value(rj[2], line, "relation predicate")};
    if (seen.insert(r).second) scene.relations.push_back(r);
  }
  return scene;
}

}  // namespace

std::vector<SceneInstance> read_dataset(std::istream& in, const Vocab& vocab,
                                        const LoadOptions& options) {
  vocab.validate();
  std::vector<SceneInstance> scenes;
  std::string text;
  std::size_t line = 0;
  std::size_t dim = 0;
  while (std::getline(in, text)) {
    ++line;
    if (text.find_first_not_of(" \t\r") == std::string::npos) continue;
    json doc;
    try {
      doc = json::parse(text);
    } catch (const json::parse_error& e) {
      throw ParseError(line, e.what());
    }
    SceneInstance scene = parse_scene(doc, line, options);
    validate_instance(scene, vocab);
    if (dim == 0) dim = scene.feature_dim();
    if (scene.feature_dim() != dim)
      throw ValidationError(scene.id, "feature width " + std::to_string(scene.feature_dim()) +
                                          " differs from earlier scenes (" + std::to_string(dim) + ")");
    scenes.push_back(std::move(scene));
  }
  return scenes;
}

std::vector<SceneInstance> load_dataset(const std::string& path, const Vocab& vocab,
                                        const LoadOptions& options) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open dataset '" + path + "'");
  return read_dataset(in, vocab, options);
}

void write_dataset(std::ostream& out, std::span<const SceneInstance> scenes) {
  for (const auto& scene : scenes) {
    json doc;
    doc["id"] = scene.id;
    json entities = json::array();
    for (const auto& e : scene.entities) {
      entities.push_back({{"box", {e.box.x1, e.box.y1, e.box.x2, e.box.y2}},
                          {"feat", e.feature},
                          {"scores", e.scores},
                          {"gt_label", e.label}});
    }
    doc["entities"] = std::move(entities);
    json relations = json::array();
    for (const auto& r : scene.relations) relations.push_back({r.subject, r.object, r.predicate});
    doc["relations"] = std::move(relations);
    out << doc.dump() << '\n';
  }
}

void save_dataset(const std::string& path, std::span<const SceneInstance> scenes) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write dataset '" + path + "'");
  write_dataset(out, scenes);
}

}  // namespace sgg
