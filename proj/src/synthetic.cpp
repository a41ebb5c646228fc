#include "sgg/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "sgg/error.hpp"

namespace sgg {

std::size_t spatial_predicate(const Box& subject, const Box& object, std::size_t num_predicates) {
  std::size_t p = kBackgroundPredicate;
  if (object.contains(subject)) p = kInside;
  else if (subject.contains(object)) p = kContains;
  else if (subject.cy() < object.cy() - kAboveOffset) p = kAbove;
  else if (subject.cy() > object.cy() + kAboveOffset) p = kBelow;
  else if (std::hypot(subject.cx() - object.cx(), subject.cy() - object.cy()) < kNearDistance) p = kNear;
  return p < num_predicates ? p : kBackgroundPredicate;
}

Vocab synthetic_vocab(const SyntheticConfig& config) {
  Vocab v;
  for (std::size_t c = 0; c < config.num_classes; ++c) v.entities.push_back("class_" + std::to_string(c));
  const char* names[] = {"bg", "above", "below", "inside", "contains", "near"};
  for (std::size_t p = 0; p < config.num_predicates; ++p)
    v.predicates.push_back(p < std::size(names) ? names[p] : "predicate_" + std::to_string(p));
  return v;
}

namespace {

// Signed slack of `inner` inside `outer`: >= 0 iff contained.
double containment_slack(const Box& inner, const Box& outer) {
  return std::min({inner.x1 - outer.x1, inner.y1 - outer.y1, outer.x2 - inner.x2, outer.y2 - inner.y2});
}

bool separable(const Box& a, const Box& b, double margin) {
  auto clear = [margin](double value, double threshold) { return std::abs(value - threshold) >= margin; };
  const double dy = std::abs(a.cy() - b.cy());
  const double d = std::hypot(a.cx() - b.cx(), a.cy() - b.cy());
  return clear(containment_slack(a, b), 0.0) && clear(containment_slack(b, a), 0.0) &&
         clear(dy, kAboveOffset) && clear(d, kNearDistance);
}

class Generator {
 public:
  explicit Generator(const SyntheticConfig& c) : config_(c), rng_(c.seed) {
    std::normal_distribution<double> normal(0.0, config_.prototype_scale);
    prototypes_.resize(c.num_classes);
    for (auto& p : prototypes_) {
      p.resize(c.feature_dim);
      for (auto& v : p) v = normal(rng_);
    }
  }

  SceneInstance scene(std::size_t index) {
    SceneInstance s;
    s.id = "synthetic_" + std::to_string(index);
    const auto boxes = place_boxes();
    std::uniform_int_distribution<std::size_t> cls(0, config_.num_classes - 1);
    for (const auto& b : boxes) {
      Entity e;
      e.box = b;
      e.label = cls(rng_);
      e.feature = appearance(e.label);
      e.scores = detector_scores(e.label);
      s.entities.push_back(std::move(e));
    }
    for (std::size_t i = 0; i < boxes.size(); ++i)
      for (std::size_t j = 0; j < boxes.size(); ++j) {
        if (i == j) continue;
        const std::size_t p = spatial_predicate(boxes[i], boxes[j], config_.num_predicates);
        if (p != kBackgroundPredicate) s.relations.push_back({i, j, p});
      }
    return s;
  }

 private:
  Box random_box() {
    std::uniform_real_distribution<double> size(0.1, 0.35);
    const double w = size(rng_), h = size(rng_);
    std::uniform_real_distribution<double> ux(0.0, 1.0 - w), uy(0.0, 1.0 - h);
    const double x = ux(rng_), y = uy(rng_);
    return {x, y, x + w, y + h};
  }

  Box nested_box(const Box& outer) {
    const double pad = 2.0 * config_.separation_margin;
    const double avail_w = outer.width() - 2.0 * pad, avail_h = outer.height() - 2.0 * pad;
    std::uniform_real_distribution<double> frac(0.3, 0.8);
    const double w = avail_w * frac(rng_), h = avail_h * frac(rng_);
    std::uniform_real_distribution<double> ux(0.0, avail_w - w), uy(0.0, avail_h - h);
    const double x = outer.x1 + pad + ux(rng_), y = outer.y1 + pad + uy(rng_);
    return {x, y, x + w, y + h};
  }

  std::vector<Box> place_boxes() {
    std::bernoulli_distribution nest(config_.nested_probability);
    for (int restart = 0; restart < 1000; ++restart) {
      std::vector<Box> boxes;
      int tries = 0;
      while (boxes.size() < config_.entities_per_image && tries < 500) {
        ++tries;
        Box b;
        if (!boxes.empty() && nest(rng_)) {
          std::uniform_int_distribution<std::size_t> pick(0, boxes.size() - 1);
          const Box& outer = boxes[pick(rng_)];
          if (outer.width() < 0.15 || outer.height() < 0.15) continue;
          b = nested_box(outer);
        } else {
          b = random_box();
        }
        const bool ok = std::all_of(boxes.begin(), boxes.end(), [&](const Box& other) {
          return separable(b, other, config_.separation_margin);
        });
        if (ok) boxes.push_back(b);
      }
      if (boxes.size() == config_.entities_per_image) return boxes;
    }
    throw InvalidConfig("could not place " + std::to_string(config_.entities_per_image) +
                        " separable boxes; lower entities_per_image or separation_margin");
  }

  std::vector<double> appearance(std::size_t label) {
    std::normal_distribution<double> noise(0.0, config_.feature_noise);
    std::vector<double> f = prototypes_[label];
    for (auto& v : f) v += noise(rng_);
    return f;
  }

  std::vector<double> detector_scores(std::size_t label) {
    const std::size_t n = config_.num_classes;
    std::size_t guess = label;
    std::bernoulli_distribution correct(config_.classifier_accuracy);
    if (n > 1 && !correct(rng_)) {
      std::uniform_int_distribution<std::size_t> other(0, n - 2);
      guess = other(rng_);
      if (guess >= label) ++guess;
    }
    if (n == 1) return {1.0};
    std::vector<double> s(n, (1.0 - config_.score_confidence) / static_cast<double>(n - 1));
    s[guess] = config_.score_confidence;
    return s;
  }

  const SyntheticConfig& config_;
  std::mt19937_64 rng_;
  std::vector<std::vector<double>> prototypes_;
};

}  // namespace

std::vector<SceneInstance> gen_synthetic(const SyntheticConfig& config) {
  if (config.n_images == 0 || config.entities_per_image == 0 || config.num_classes == 0 ||
      config.num_predicates == 0 || config.feature_dim == 0)
    throw InvalidConfig("synthetic sizes must all be positive");
  if (config.num_predicates < 2) throw InvalidConfig("need bg plus at least one predicate");
  if (config.feature_dim < kRelationGeometryWidth)
    throw InvalidConfig("feature_dim must be at least " + std::to_string(kRelationGeometryWidth));
  if (!(config.classifier_accuracy >= 0.0 && config.classifier_accuracy <= 1.0) ||
      !(config.score_confidence > 0.0 && config.score_confidence <= 1.0) ||
      !(config.nested_probability >= 0.0 && config.nested_probability <= 1.0) ||
      config.separation_margin < 0.0 || config.feature_noise < 0.0)
    throw InvalidConfig("synthetic probabilities must lie in [0,1] and scales be non-negative");
  Generator gen(config);
  std::vector<SceneInstance> out;
  out.reserve(config.n_images);
  for (std::size_t i = 0; i < config.n_images; ++i) out.push_back(gen.scene(i));
  return out;
}

}  // namespace sgg
