#pragma once

#include <cstddef>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "sgg/box.hpp"

namespace sgg {

// Entity categories and predicates. Predicate 0 is always "bg", the class of
// pairs with no relationship.
struct Vocab {
  std::vector<std::string> entities;
  std::vector<std::string> predicates;

  // Names "entity_<k>" and "bg", "predicate_<k>".
  static Vocab with_sizes(std::size_t num_entities, std::size_t num_predicates);
  std::size_t num_entities() const { return entities.size(); }
  std::size_t num_predicates() const { return predicates.size(); }
  // Throws InvalidConfig on duplicate names or a missing "bg".
  void validate() const;

  friend bool operator==(const Vocab&, const Vocab&) = default;
};

inline constexpr std::size_t kBackgroundPredicate = 0;

struct Entity {
  Box box;
  std::vector<double> feature;
  std::vector<double> scores;  // distribution over entity categories
  std::size_t label = 0;

  friend bool operator==(const Entity&, const Entity&) = default;
};

struct Relation {
  std::size_t subject = 0;
  std::size_t object = 0;
  std::size_t predicate = 0;

  friend auto operator<=>(const Relation&, const Relation&) = default;
};

// One image: proposals with features and detector scores plus ground truth.
// Ordered pairs absent from `relations` are implicitly bg.
struct SceneInstance {
  std::string id;
  std::vector<Entity> entities;
  std::vector<Relation> relations;

  std::size_t size() const { return entities.size(); }
  std::size_t feature_dim() const { return entities.empty() ? 0 : entities.front().feature.size(); }
  // Ground-truth predicate of the ordered pair, bg when unannotated.
  std::size_t predicate_of(std::size_t subject, std::size_t object) const;

  friend bool operator==(const SceneInstance&, const SceneInstance&) = default;
};

// Context of an ordered pair: union region, relation scores, appearance.
struct RelationContext {
  Box union_box;
  std::vector<double> scores;
  std::vector<double> feature;
};

// Leading coordinates of a relation feature hold the subject, object and union
// spatial features and the object's geometry relative to the subject; the rest
// is the mean of the two entity features.
inline constexpr std::size_t kRelationGeometryWidth = 4 * kSpatialFeatureWidth;

std::vector<double> relation_feature(const SceneInstance& scene, std::size_t subject,
                                     std::size_t object, double margin = kDefaultUnionMargin);
// Relation scores are uniform: no relation detector sits in front of the model.
RelationContext relation_context(const SceneInstance& scene, std::size_t subject,
                                 std::size_t object, std::size_t num_predicates,
                                 double margin = kDefaultUnionMargin);

// Softmax of raw detector logits.
std::vector<double> initial_scores(std::span<const double> logits);

struct LoadOptions {
  // Entity "scores" hold raw logits; normalize them with initial_scores.
  bool scores_are_logits = false;
};

// Checks every invariant of a SceneInstance against the vocabulary; throws
// ValidationError. Exact duplicate relations must already be removed.
void validate_instance(const SceneInstance& scene, const Vocab& vocab);

// Line-delimited JSON, one image per line:
//   {"id", "entities":[{"box":[x1,y1,x2,y2], "feat":[...], "scores":[...], "gt_label":k}],
//    "relations":[[subject, object, predicate], ...]}
// Blank lines are skipped. Duplicate relation triplets are dropped.
std::vector<SceneInstance> read_dataset(std::istream& in, const Vocab& vocab,
                                        const LoadOptions& options = {});
std::vector<SceneInstance> load_dataset(const std::string& path, const Vocab& vocab,
                                        const LoadOptions& options = {});
void write_dataset(std::ostream& out, std::span<const SceneInstance> scenes);
void save_dataset(const std::string& path, std::span<const SceneInstance> scenes);

}  // namespace sgg
