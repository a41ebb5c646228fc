#include <algorithm>
#include <cmath>
#include <numeric>

#include "doctest.h"
#include "sgg/adjacency.hpp"
#include "sgg/attention.hpp"
#include "sgg/error.hpp"
#include "sgg/grad_check.hpp"
#include "sgg/ops.hpp"
#include "oracles.hpp"
#include "support.hpp"

using namespace sgg;
using namespace sgg::test;

TEST_CASE("iou examples") {
  Box a{0.1, 0.2, 0.4, 0.6};
  CHECK(iou(a, a) == doctest::Approx(1.0));
  CHECK(iou({0, 0, 0.1, 0.1}, {0.5, 0.5, 0.6, 0.6}) == 0.0);
  CHECK(iou({0, 0, 0.5, 0.5}, {0.25, 0.25, 0.75, 0.75}) == doctest::Approx(1.0 / 7.0));
}

TEST_CASE("adjacency rule examples") {
  std::vector<Box> boxes{{0, 0, 1, 1}, {0.2, 0.2, 0.4, 0.4}};
  auto adj = build_adjacency(boxes);
  CHECK(adj.has(0, 1, kInsideRule));
  CHECK(adj.has(1, 0, kCoverRule));
  CHECK_FALSE(adj.has(1, 0, kInsideRule));

  std::vector<Box> close{{0.05, 0.05, 0.15, 0.15}, {0.15, 0.15, 0.25, 0.25}};
  CHECK(build_adjacency(close).has(0, 1, kRelativeRule));
  std::vector<Box> far{{0.0, 0.0, 0.1, 0.1}, {0.9, 0.9, 1.0, 1.0}};
  auto far_adj = build_adjacency(far);
  CHECK_FALSE(far_adj.has(0, 1, kRelativeRule));
  CHECK_FALSE(far_adj.connected(0, 1));
  CHECK(far_adj.connected(0, 0));

  AdjacencyThresholds no_self;
  no_self.self_loops = false;
  CHECK_FALSE(build_adjacency(far, no_self).connected(1, 1));
  CHECK_THROWS_AS(build_adjacency(std::vector<Box>{}), EmptyInput);
}

TEST_CASE("adjacency matches a brute-force rule evaluator on 200 box sets") {
  std::mt19937_64 rng(2024);
  std::uniform_int_distribution<std::size_t> count(1, 9);
  AdjacencyThresholds th;
  std::size_t fired[4] = {0, 0, 0, 0};
  for (int set = 0; set < 200; ++set) {
    std::vector<Box> boxes;
    const std::size_t n = count(rng);
    for (std::size_t k = 0; k < n; ++k) {
      Box b = test::random_box(rng);
      if (k > 0 && k % 3 == 0) {
        // Nested boxes so containment rules fire.
        const Box& o = boxes[k - 1];
        b = {o.x1 + 0.25 * o.width(), o.y1 + 0.25 * o.height(), o.x2 - 0.25 * o.width(), o.y2 - 0.25 * o.height()};
      }
      boxes.push_back(b);
    }
    auto adj = build_adjacency(boxes, th);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) {
        if (i == j) {
          CHECK(adj.tags[i * n + j] == kSelfLoop);
          CHECK(adj.connected(i, j));
          continue;
        }
        const std::uint8_t want = brute_rules(boxes[i], boxes[j], th);
        CHECK(adj.tags[i * n + j] == want);
        CHECK(adj.connected(i, j) == (want != 0));
        CHECK(adj.has(i, j, kInsideRule) == adj.has(j, i, kCoverRule));
        for (int r = 0; r < 4; ++r) fired[r] += (want >> r) & 1;
      }
  }
  for (int r = 0; r < 4; ++r) CHECK(fired[r] > 0);
}

TEST_CASE("attention coefficient examples") {
  std::mt19937_64 rng(3);
  AttentionHead head = make_attention_head(4, 3, rng);
  Tensor f = test::random_tensor({3, 4}, rng);
  Tape tape;
  std::vector<unsigned char> single{1, 0, 0, 0, 1, 0, 1, 0, 0};
  Tensor a = attention_coefficients(tape, head, f, single);
  CHECK(a.at(0, 0) == 1.0);
  CHECK(a.at(2, 0) == 1.0);
  CHECK(a.at(2, 2) == 0.0);

  // Nodes 1 and 2 share features, so node 0 splits its attention evenly.
  Tensor g = f.detach();
  for (std::size_t c = 0; c < 4; ++c) g.mutable_data()[2 * 4 + c] = g.at(1, c);
  std::vector<unsigned char> two{0, 1, 1, 0, 1, 0, 0, 0, 1};
  Tensor b = attention_coefficients(tape, head, g, two);
  CHECK(b.at(0, 1) == doctest::Approx(0.5));
  CHECK(b.at(0, 2) == doctest::Approx(0.5));

  std::vector<unsigned char> wrong(4, 1);
  CHECK_THROWS_AS(attention_coefficients(tape, head, f, wrong), SizeMismatch);
  CHECK_THROWS_AS(attention_coefficients(tape, head, test::random_tensor({3, 5}, rng), single), SizeMismatch);
}

TEST_CASE("attention rows are distributions matching direct evaluation") {
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    std::mt19937_64 rng(seed);
    const std::size_t n = 2 + seed % 6;
    AttentionHead head = make_attention_head(5, 4, rng);
    Tensor f = test::random_tensor({n, 5}, rng, -2, 2);
    auto mask = random_mask(n, rng);
    Tape tape;
    Tensor a = attention_coefficients(tape, head, f, mask, 0.2);
    auto want = brute_alpha(head, f, mask, 0.2);
    for (std::size_t i = 0; i < n; ++i) {
      double s = 0.0;
      for (std::size_t j = 0; j < n; ++j) {
        if (!mask[i * n + j]) CHECK(a.at(i, j) == 0.0);
        s += a.at(i, j);
        CHECK(std::abs(a.at(i, j) - want[i * n + j]) <= 1e-12);
      }
      CHECK(std::abs(s - 1.0) <= 1e-9);
    }
  }
}

TEST_CASE("constant shift of a row of scores leaves coefficients unchanged") {
  std::mt19937_64 rng(77);
  Tensor e = test::random_tensor({4, 4}, rng, -3, 3, false);
  auto mask = random_mask(4, rng);
  Tensor shifted = e.detach();
  for (std::size_t j = 0; j < 4; ++j) shifted.mutable_data()[2 * 4 + j] += 17.5;
  Tape tape;
  Tensor a = masked_softmax_rows(tape, e, mask);
  Tensor b = masked_softmax_rows(tape, shifted, mask);
  for (std::size_t k = 0; k < 16; ++k) CHECK(std::abs(a[k] - b[k]) <= 1e-9);
}

TEST_CASE("gat layer widths and single self loop") {
  std::mt19937_64 rng(1);
  std::vector<AttentionHead> heads;
  for (int k = 0; k < 8; ++k) heads.push_back(make_attention_head(10, 64, rng));
  Tensor f = test::random_tensor({3, 10}, rng);
  std::vector<unsigned char> full(9, 1);
  Tape tape;
  CHECK(gat_layer(tape, heads, f, full).output.cols() == 512);

  std::vector<AttentionHead> one{make_attention_head(4, 3, rng)};
  Tensor x = test::random_tensor({1, 4}, rng);
  std::vector<unsigned char> self{1};
  Tensor phi = gat_layer(tape, one, x, self, 0.2, 0.2).output;
  Tensor direct = leaky_relu(tape, matmul_nt(tape, x, one[0].u), 0.2);
  for (std::size_t k = 0; k < 3; ++k) CHECK(phi[k] == doctest::Approx(direct[k]).epsilon(1e-14));

  std::vector<AttentionHead> mixed{make_attention_head(4, 3, rng), make_attention_head(4, 2, rng)};
  CHECK_THROWS_AS(gat_layer(tape, mixed, x, self), SizeMismatch);
}

TEST_CASE("gat layer is permutation equivariant") {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    std::mt19937_64 rng(seed + 500);
    const std::size_t n = 6;
    std::vector<AttentionHead> heads;
    for (int k = 0; k < 3; ++k) heads.push_back(make_attention_head(5, 4, rng));
    Tensor f = test::random_tensor({n, 5}, rng);
    auto mask = random_mask(n, rng);
    std::vector<std::size_t> perm(n);
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), rng);
    Tensor pf({n, 5});
    std::vector<unsigned char> pmask(n * n);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t c = 0; c < 5; ++c) pf.mutable_data()[i * 5 + c] = f.at(perm[i], c);
      for (std::size_t j = 0; j < n; ++j) pmask[i * n + j] = mask[perm[i] * n + perm[j]];
    }
    Tape tape;
    Tensor a = gat_layer(tape, heads, f, mask).output;
    Tensor b = gat_layer(tape, heads, pf, pmask).output;
    const std::size_t w = a.cols();
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t c = 0; c < w; ++c) CHECK(std::abs(b.at(i, c) - a.at(perm[i], c)) <= 1e-10);
  }
}

TEST_CASE("gradients flow through graph attention") {
  std::mt19937_64 rng(12);
  std::vector<AttentionHead> heads{make_attention_head(4, 3, rng), make_attention_head(4, 3, rng)};
  Tensor f = test::random_tensor({4, 4}, rng);
  auto mask = random_mask(4, rng);
  Tensor w = test::random_tensor({4, 6}, rng, -1, 1, false);
  std::vector<NamedParam> params{{"f", f}};
  for (std::size_t k = 0; k < heads.size(); ++k) {
    params.push_back({"u" + std::to_string(k), heads[k].u});
    params.push_back({"lambda" + std::to_string(k), heads[k].lambda});
  }
  auto report = grad_check(
      [&](Tape& t) { return sum(t, mul(t, gat_layer(t, heads, f, mask).output, w)); }, params);
  CHECK(report.passed);
  CHECK(report.max_rel_error < 1e-4);
}
