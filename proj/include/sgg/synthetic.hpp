#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "sgg/box.hpp"
#include "sgg/dataset.hpp"

namespace sgg {

// Desk-scale scene generator. Entity features are class prototypes plus
// Gaussian noise, detector scores come from a noisy classifier, and
// predicates follow fixed spatial rules (see spatial_predicate).
struct SyntheticConfig {
  std::size_t n_images = 200;
  std::size_t entities_per_image = 5;
  std::size_t num_classes = 10;
  std::size_t num_predicates = 6;
  std::size_t feature_dim = 64;
  std::uint64_t seed = 7;

  double prototype_scale = 1.0;
  double feature_noise = 0.5;
  double classifier_accuracy = 0.8;
  // Probability mass the softened one-hot puts on the classifier's guess.
  double score_confidence = 0.7;
  // Chance that a new box is placed inside an earlier one.
  double nested_probability = 0.25;
  // Minimum distance of every rule quantity from its threshold; keeps the
  // predicate classes separable.
  double separation_margin = 0.02;
};

enum SyntheticPredicate : std::size_t {
  kAbove = 1,
  kBelow = 2,
  kInside = 3,
  kContains = 4,
  kNear = 5,
};

inline constexpr double kAboveOffset = 0.2;
inline constexpr double kNearDistance = 0.3;

// Rules, first match wins: subject inside object -> inside; object inside
// subject -> contains; subject cy < object cy - 0.2 -> above; subject cy >
// object cy + 0.2 -> below; center distance < 0.3 -> near; otherwise bg.
// Rules whose predicate index is not below num_predicates yield bg.
std::size_t spatial_predicate(const Box& subject, const Box& object, std::size_t num_predicates);

Vocab synthetic_vocab(const SyntheticConfig& config);

// Deterministic under config.seed. Throws InvalidConfig for non-positive sizes.
std::vector<SceneInstance> gen_synthetic(const SyntheticConfig& config);

}  // namespace sgg
