#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <optional>
#include <random>
#include <tuple>
#include <vector>

#include "sgg/adjacency.hpp"
#include "sgg/attention.hpp"
#include "sgg/grad_check.hpp"
#include "sgg/graph.hpp"
#include "sgg/metrics.hpp"
#include "sgg/ops.hpp"
#include "support.hpp"

// Independent reference implementations shared by the unit tests and the
// acceptance runner.
namespace sgg::test {

// Direct evaluation of e_ij = LeakyReLU(Λᵀ[U f_i ‖ U f_j]) and the neighbor
// softmax, written without any library op.
inline std::vector<double> brute_alpha(const AttentionHead& h, const Tensor& f, const std::vector<unsigned char>& mask,
                                double slope) {
  const std::size_t n = f.rows(), m = h.out_dim(), d = h.in_dim();
  std::vector<std::vector<double>> uf(n, std::vector<double>(m, 0.0));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t r = 0; r < m; ++r)
      for (std::size_t c = 0; c < d; ++c) uf[i][r] += h.u.at(r, c) * f.at(i, c);
  std::vector<double> alpha(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<double> e(n, 0.0);
    double mx = -1e300;
    for (std::size_t j = 0; j < n; ++j) {
      if (!mask[i * n + j]) continue;
      double s = 0.0;
      for (std::size_t r = 0; r < m; ++r) s += h.lambda[r] * uf[i][r] + h.lambda[m + r] * uf[j][r];
      e[j] = s >= 0 ? s : slope * s;
      mx = std::max(mx, e[j]);
    }
    double z = 0.0;
    for (std::size_t j = 0; j < n; ++j)
      if (mask[i * n + j]) z += std::exp(e[j] - mx);
    for (std::size_t j = 0; j < n; ++j)
      if (mask[i * n + j]) alpha[i * n + j] = std::exp(e[j] - mx) / z;
  }
  return alpha;
}

inline std::vector<unsigned char> random_mask(std::size_t n, std::mt19937_64& rng) {
  std::bernoulli_distribution edge(0.4);
  std::vector<unsigned char> m(n * n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) m[i * n + j] = (i == j || edge(rng)) ? 1 : 0;
  return m;
}

// Reference rule evaluator over raw coordinates.
inline std::uint8_t brute_rules(const Box& a, const Box& b, const AdjacencyThresholds& th) {
  std::uint8_t t = 0;
  if (a.x1 <= b.x1 && a.y1 <= b.y1 && a.x2 >= b.x2 && a.y2 >= b.y2) t |= kInsideRule;
  if (b.x1 <= a.x1 && b.y1 <= a.y1 && b.x2 >= a.x2 && b.y2 >= a.y2) t |= kCoverRule;
  const double ix = std::max(0.0, std::min(a.x2, b.x2) - std::max(a.x1, b.x1));
  const double iy = std::max(0.0, std::min(a.y2, b.y2) - std::max(a.y1, b.y1));
  const double inter = ix * iy;
  const double uni = (a.x2 - a.x1) * (a.y2 - a.y1) + (b.x2 - b.x1) * (b.y2 - b.y1) - inter;
  if (inter / uni > th.iou) t |= kOverlapRule;
  const double dx = (a.x1 + a.x2) / 2 - (b.x1 + b.x2) / 2, dy = (a.y1 + a.y2) / 2 - (b.y1 + b.y2) / 2;
  if (std::sqrt(dx * dx + dy * dy) / std::sqrt(2.0) < th.distance_ratio) t |= kRelativeRule;
  return t;
}

// Reduces any op output to a scalar through a fixed random weighting, so every
// output entry contributes a distinct gradient.
inline Tensor weighted_sum(Tape& tape, const Tensor& y, std::mt19937_64& rng) {
  Tensor w = random_tensor(y.shape(), rng, -1.0, 1.0, false);
  return sum(tape, mul(tape, y, w));
}

using Builder = std::function<Tensor(Tape&, std::vector<Tensor>&, std::mt19937_64&)>;

// One primitive under test: input shapes and how to apply it.
struct PrimitiveCase {
  const char* name;
  std::vector<Shape> inputs;
  Builder build;
};

inline std::vector<PrimitiveCase> primitive_cases() {
  return {
      {"matmul", {{3, 4}, {4, 2}}, [](Tape& t, auto& in, auto&) { return matmul(t, in[0], in[1]); }},
      {"matmul_nt", {{3, 4}, {2, 4}}, [](Tape& t, auto& in, auto&) { return matmul_nt(t, in[0], in[1]); }},
      {"add", {{2, 3}, {2, 3}}, [](Tape& t, auto& in, auto&) { return add(t, in[0], in[1]); }},
      {"sub", {{2, 3}, {2, 3}}, [](Tape& t, auto& in, auto&) { return sub(t, in[0], in[1]); }},
      {"mul", {{2, 3}, {2, 3}}, [](Tape& t, auto& in, auto&) { return mul(t, in[0], in[1]); }},
      {"scale", {{2, 3}}, [](Tape& t, auto& in, auto&) { return scale(t, in[0], -1.7); }},
      {"add_bias", {{3, 2}, {2}}, [](Tape& t, auto& in, auto&) { return add_bias(t, in[0], in[1]); }},
      {"reshape", {{2, 3}}, [](Tape& t, auto& in, auto&) { return reshape(t, in[0], {3, 2}); }},
      {"concat0", {{1, 3}, {2, 3}}, [](Tape& t, auto& in, auto&) { return concat(t, {in[0], in[1]}, 0); }},
      {"concat1", {{2, 1}, {2, 3}}, [](Tape& t, auto& in, auto&) { return concat(t, {in[0], in[1]}, 1); }},
      {"slice_cols", {{3, 5}}, [](Tape& t, auto& in, auto&) { return slice_cols(t, in[0], 1, 3); }},
      {"gather_rows", {{4, 2}},
       [](Tape& t, auto& in, auto&) {
         std::vector<std::size_t> idx{3, 0, 3, 1};
         return gather_rows(t, in[0], idx);
       }},
      {"segment_sum", {{5, 2}},
       [](Tape& t, auto& in, auto&) {
         std::vector<std::size_t> seg{0, 2, 2, 1, 0};
         return segment_sum(t, in[0], seg, 3);
       }},
      {"outer_sum", {{3}, {4}}, [](Tape& t, auto& in, auto&) { return outer_sum(t, in[0], in[1]); }},
      {"leaky_relu", {{3, 4}}, [](Tape& t, auto& in, auto&) { return leaky_relu(t, in[0], 0.2); }},
      {"softmax_rows", {{3, 4}}, [](Tape& t, auto& in, auto&) { return softmax_rows(t, in[0]); }},
      {"masked_softmax_rows", {{3, 3}},
       [](Tape& t, auto& in, auto&) {
         std::vector<unsigned char> mask{1, 1, 0, 0, 1, 1, 1, 0, 1};
         return masked_softmax_rows(t, in[0], mask);
       }},
      {"cross_entropy", {{3, 4}},
       [](Tape& t, auto& in, auto&) {
         std::vector<std::size_t> labels{1, 3, 0};
         return cross_entropy(t, softmax_rows(t, in[0]), labels);
       }},
      {"l2_sq", {{2, 3}}, [](Tape& t, auto& in, auto&) { return l2_sq(t, in[0]); }},
      {"sum", {{2, 3}}, [](Tape& t, auto& in, auto&) { return sum(t, in[0]); }},
  };
}

// Largest relative gradient error of one primitive over `seeds` random inputs.
inline double primitive_worst_error(const PrimitiveCase& c, std::uint64_t seeds) {
  double worst = 0.0;
  for (std::uint64_t seed = 0; seed < seeds; ++seed) {
    std::mt19937_64 rng(seed);
    std::vector<Tensor> inputs;
    std::vector<NamedParam> params;
    for (std::size_t k = 0; k < c.inputs.size(); ++k) {
      inputs.push_back(random_tensor(c.inputs[k], rng));
      // Keep leaky_relu inputs away from the kink where differences straddle it.
      for (double& v : inputs.back().mutable_data())
        if (std::abs(v) < 1e-3) v = 0.5;
      params.push_back({"in" + std::to_string(k), inputs.back()});
    }
    const std::uint64_t weight_seed = seed * 7919 + 1;
    auto loss = [&](Tape& t) {
      std::mt19937_64 wrng(weight_seed);
      Tensor y = c.build(t, inputs, wrng);
      return y.size() == 1 ? y : weighted_sum(t, y, wrng);
    };
    worst = std::max(worst, grad_check(loss, params).max_rel_error);
  }
  return worst;
}

// Random small scene: coarse probabilities so that ties are common.
struct RandomCase {
  PredictedGraph pred;
  std::vector<Relation> gt;
  std::vector<std::size_t> labels;
};

inline RandomCase random_case(std::mt19937_64& rng, std::size_t max_entities, std::size_t classes,
                       std::size_t predicates) {
  RandomCase c;
  std::uniform_int_distribution<std::size_t> count(1, max_entities), cls(0, classes - 1),
      pred(1, predicates - 1), level(1, 4);
  const std::size_t n = count(rng);
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<double> row(classes);
    double z = 0;
    for (auto& v : row) z += (v = static_cast<double>(level(rng)));
    for (auto& v : row) v /= z;
    c.pred.entity_probs.push_back(row);
    c.labels.push_back(cls(rng));
  }
  std::bernoulli_distribution coin(0.5);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      if (i == j) continue;
      std::vector<double> row(predicates);
      double z = 0;
      for (auto& v : row) z += (v = static_cast<double>(level(rng)));
      for (auto& v : row) v /= z;
      c.pred.pairs.push_back({i, j, row});
      if (coin(rng)) c.gt.push_back({i, j, pred(rng)});
    }
  return c;
}

// Exhaustive matcher: every candidate triplet is scored independently and
// its rank is the number of candidates that order before it.
inline std::optional<double> brute_force_recall(const RandomCase& c, std::size_t k, Task task, bool constrained) {
  if (c.gt.empty()) return std::nullopt;
  const auto& pred = c.pred;
  const std::size_t n = pred.entity_probs.size();
  std::vector<std::size_t> label(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto& row = pred.entity_probs[i];
    std::size_t best = 0;
    for (std::size_t q = 1; q < row.size(); ++q)
      if (row[q] > row[best]) best = q;
    label[i] = best;
  }
  using Cand = std::tuple<double, std::size_t, std::size_t, std::size_t>;
  std::vector<Cand> cands;
  for (const auto& pair : pred.pairs) {
    const double conf = pred.entity_probs[pair.subject][label[pair.subject]] *
                        pred.entity_probs[pair.object][label[pair.object]];
    std::size_t best = 1;
    for (std::size_t p = 1; p < pair.probs.size(); ++p) {
      if (pair.probs[p] > pair.probs[best]) best = p;
      if (!constrained) cands.emplace_back(conf * pair.probs[p], pair.subject, pair.object, p);
    }
    if (constrained) cands.emplace_back(conf * pair.probs[best], pair.subject, pair.object, best);
  }
  auto before = [](const Cand& a, const Cand& b) {
    if (std::get<0>(a) != std::get<0>(b)) return std::get<0>(a) > std::get<0>(b);
    return std::make_tuple(std::get<1>(a), std::get<2>(a), std::get<3>(a)) <
           std::make_tuple(std::get<1>(b), std::get<2>(b), std::get<3>(b));
  };
  std::size_t hit = 0;
  for (const auto& g : c.gt) {
    if (task == Task::SGCls && (label[g.subject] != c.labels[g.subject] || label[g.object] != c.labels[g.object]))
      continue;
    for (const auto& cand : cands) {
      if (std::get<1>(cand) != g.subject || std::get<2>(cand) != g.object || std::get<3>(cand) != g.predicate)
        continue;
      std::size_t rank = 0;
      for (const auto& other : cands) rank += before(other, cand);
      if (rank < k) ++hit;
    }
  }
  return static_cast<double>(hit) / static_cast<double>(c.gt.size());
}

}  // namespace sgg::test
