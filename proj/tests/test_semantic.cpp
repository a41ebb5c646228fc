#include <algorithm>
#include <sstream>

#include "doctest.h"
#include "sgg/embeddings.hpp"
#include "sgg/error.hpp"
#include "sgg/grad_check.hpp"
#include "sgg/ops.hpp"
#include "sgg/semantic.hpp"
#include "support.hpp"

using namespace sgg;

TEST_CASE("expected embedding examples") {
  Tape tape;
  Tensor table = Tensor::matrix({{1, 0, 0}, {0, 1, 0}, {0, 0, 1}, {2, 3, 4}});
  Tensor row3 = expected_embedding(tape, Tensor::vector({0, 0, 0, 1}), table);
  CHECK(std::vector<double>(row3.data().begin(), row3.data().end()) == std::vector<double>{2, 3, 4});
  Tensor two = Tensor::matrix({{1, 0}, {0, 1}});
  Tensor mix = expected_embedding(tape, Tensor::vector({0.5, 0.5}), two);
  CHECK(mix[0] == 0.5);
  CHECK(mix[1] == 0.5);
  Tensor hand = expected_embedding(tape, Tensor::vector({0.9, 0.1}), two);
  CHECK(hand[0] == doctest::Approx(0.9));
  CHECK(hand[1] == doctest::Approx(0.1));
  CHECK_THROWS_AS(expected_embedding(tape, Tensor::vector({0.5, 0.5}), table), SizeMismatch);
}

TEST_CASE("semantic loss is zero on aligned inputs") {
  // W1 = W2 = W3 = I with [f_j, v_o] the sum of the other two concatenations.
  Tensor eye = Tensor::matrix({{1, 0, 0, 0}, {0, 1, 0, 0}, {0, 0, 1, 0}, {0, 0, 0, 1}});
  SemanticWeights w{eye, eye, eye};
  Tensor fi = Tensor::vector({1, 2}), vs = Tensor::vector({0.5, -1});
  Tensor fij = Tensor::vector({3, -4}), vp = Tensor::vector({0.25, 2});
  Tensor fj = Tensor::vector({4, -2}), vo = Tensor::vector({0.75, 1});
  Tape tape;
  CHECK(semantic_loss(tape, fi, vs, fij, vp, fj, vo, w).item() == 0.0);
}

TEST_CASE("semantic loss hand example") {
  Tape tape;
  CHECK(translation_loss(tape, Tensor::vector({0, 0}), Tensor::vector({0, 1}), Tensor::vector({1, 0})).item() ==
        doctest::Approx(2.0));
}

TEST_CASE("semantic loss symmetry and non-negativity") {
  std::mt19937_64 rng(21);
  for (int t = 0; t < 50; ++t) {
    auto w = make_semantic_weights(5, 3, rng);
    Tensor fi = test::random_tensor({2, 3}, rng), vs = test::random_tensor({2, 2}, rng);
    Tensor fij = test::random_tensor({2, 3}, rng), vp = test::random_tensor({2, 2}, rng);
    Tensor fj = test::random_tensor({2, 3}, rng), vo = test::random_tensor({2, 2}, rng);
    Tape tape;
    const double a = semantic_loss(tape, fi, vs, fij, vp, fj, vo, w).item();
    SemanticWeights swapped{w.predicate, w.subject, w.object};
    const double b = semantic_loss(tape, fij, vp, fi, vs, fj, vo, swapped).item();
    CHECK(a >= 0.0);
    CHECK(a == doctest::Approx(b).epsilon(1e-12));
  }
}

TEST_CASE("semantic loss gradients") {
  std::mt19937_64 rng(4);
  auto w = make_semantic_weights(5, 3, rng);
  Tensor fi = test::random_tensor({2, 3}, rng), vs = test::random_tensor({2, 2}, rng);
  Tensor fij = test::random_tensor({2, 3}, rng), vp = test::random_tensor({2, 2}, rng);
  Tensor fj = test::random_tensor({2, 3}, rng), vo = test::random_tensor({2, 2}, rng);
  auto report = grad_check([&](Tape& t) { return semantic_loss(t, fi, vs, fij, vp, fj, vo, w); },
                           {{"w1", w.subject}, {"w2", w.predicate}, {"w3", w.object}, {"fi", fi},
                            {"vs", vs}, {"fij", fij}, {"vp", vp}, {"fj", fj}, {"vo", vo}});
  CHECK(report.passed);
  CHECK(report.max_rel_error < 1e-4);
}

TEST_CASE("transform_relation layout") {
  std::mt19937_64 rng(2);
  auto w = make_semantic_weights(7, 500, rng);
  Tensor f = test::random_tensor({4}, rng), v = test::random_tensor({3}, rng);
  Tape tape;
  Tensor theta = transform_relation(tape, f, v, f, v, f, v, w);
  CHECK(theta.size() == 1500);
  Tensor middle = semantic_project(tape, w.predicate, f, v);
  for (std::size_t k = 0; k < 500; ++k) CHECK(theta[500 + k] == middle[k]);

  auto zero = make_semantic_weights(7, 4, rng);
  Tensor z4(Shape{4}), z3(Shape{3});
  Tensor zt = transform_relation(tape, z4, z3, z4, z3, z4, z3, zero);
  for (double x : zt.data()) CHECK(x == 0.0);
  CHECK_THROWS_AS(semantic_project(tape, w.subject, test::random_tensor({5}, rng), v), SizeMismatch);
}

TEST_CASE("relation summary") {
  Tape tape;
  Tensor none = relation_summary(tape, {}, 6);
  CHECK(none.size() == 6);
  for (double x : none.data()) CHECK(x == 0.0);
  Tensor a = Tensor::vector({1, 2, 3});
  std::vector<Tensor> one{a}, two{a, a};
  CHECK(relation_summary(tape, one, 3)[2] == 3.0);
  CHECK(relation_summary(tape, two, 3)[1] == 4.0);

  std::mt19937_64 rng(8);
  std::vector<Tensor> parts;
  for (int k = 0; k < 5; ++k) parts.push_back(test::random_tensor({6}, rng));
  Tensor forward_order = relation_summary(tape, parts, 6);
  std::reverse(parts.begin(), parts.end());
  std::swap(parts[0], parts[3]);
  Tensor shuffled = relation_summary(tape, parts, 6);
  for (std::size_t k = 0; k < 6; ++k) CHECK(std::abs(forward_order[k] - shuffled[k]) <= 1e-12);
}

TEST_CASE("batched relation summaries") {
  Tape tape;
  Tensor theta = Tensor::matrix({{1, 1}, {2, 2}, {4, 4}});
  std::vector<std::size_t> subject{0, 2, 0};
  Tensor s = relation_summaries(tape, theta, subject, 3);
  CHECK(std::vector<double>(s.data().begin(), s.data().end()) == std::vector<double>{5, 5, 0, 0, 2, 2});
}

TEST_CASE("embedding tables") {
  std::mt19937_64 rng(1);
  Vocab vocab{{"cat", "dog"}, {"bg", "on"}};
  auto table = random_embeddings(vocab, 4, 0.1, rng);
  CHECK(table.entities.shape() == Shape{2, 4});
  CHECK(table.predicates.shape() == Shape{2, 4});
  CHECK(table.trainable());

  std::istringstream in("cat 1 2 3 4\non 5 6 7 8\n");
  auto vectors = read_word_vectors(in);
  std::size_t missing = 0;
  auto loaded = embeddings_from_vectors(vocab, vectors, 0.1, false, rng, &missing);
  CHECK(missing == 2);
  CHECK_FALSE(loaded.trainable());
  CHECK(loaded.entities.at(0, 2) == 3.0);
  CHECK(loaded.predicates.at(1, 3) == 8.0);
}
