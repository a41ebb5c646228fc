#include "sgg/model.hpp"

#include <algorithm>

#include "sgg/adjacency.hpp"
#include "sgg/embeddings.hpp"
#include "sgg/error.hpp"
#include "sgg/metrics.hpp"
#include "sgg/ops.hpp"

namespace sgg {

namespace {

void push_linear(std::vector<NamedParam>& out, const std::string& name, const Linear& l) {
  if (l.weight.defined()) out.push_back({name + ".weight", l.weight});
  if (l.bias.defined()) out.push_back({name + ".bias", l.bias});
}

}  // namespace

std::vector<NamedParam> ModelParams::named() const {
  std::vector<NamedParam> out;
  push_linear(out, "visual", visual);
  for (std::size_t k = 0; k < embedding_path.size(); ++k)
    push_linear(out, "embedding_path." + std::to_string(k), embedding_path[k]);
  if (embeddings.entities.defined()) {
    out.push_back({"embeddings.entities", embeddings.entities});
    out.push_back({"embeddings.predicates", embeddings.predicates});
  }
  if (semantic.subject.defined()) {
    out.push_back({"semantic.w1", semantic.subject});
    out.push_back({"semantic.w2", semantic.predicate});
    out.push_back({"semantic.w3", semantic.object});
  }
  for (std::size_t k = 0; k < heads.size(); ++k) {
    out.push_back({"attention." + std::to_string(k) + ".u", heads[k].u});
    out.push_back({"attention." + std::to_string(k) + ".lambda", heads[k].lambda});
  }
  push_linear(out, "adapter", adapter);
  for (std::size_t k = 0; k < entity_head.size(); ++k)
    push_linear(out, "entity_head." + std::to_string(k), entity_head[k]);
  for (std::size_t k = 0; k < relation_head.size(); ++k)
    push_linear(out, "relation_head." + std::to_string(k), relation_head[k]);
  return out;
}

std::vector<NamedParam> ModelParams::trainable() const {
  auto all = named();
  std::erase_if(all, [](const NamedParam& p) { return !p.tensor.requires_grad(); });
  return all;
}

std::vector<Tensor> ModelParams::decayed() const {
  std::vector<Tensor> out;
  for (const auto& p : named()) {
    if (!p.tensor.requires_grad()) continue;
    if (p.name.ends_with(".bias")) continue;
    if (p.name.ends_with(".lambda") && !config.decay_attention_vectors) continue;
    out.push_back(p.tensor);
  }
  return out;
}

void ModelParams::zero_grad() const {
  for (const auto& p : named()) p.tensor.zero_grad();
}

ModelParams init_model(const ModelConfig& config, const Vocab& vocab) {
  config.validate();
  vocab.validate();
  if (config.feature_dim == 0) throw InvalidConfig("model.feature_dim must be known before init");
  std::mt19937_64 rng(config.init_seed);
  ModelParams p;
  p.config = config;
  p.vocab = vocab;
  p.visual = make_linear(config.feature_dim, config.visual_dim, true, rng);

  if (config.use_semantic_transform) {
    if (config.embeddings_path.empty()) {
      p.embeddings = random_embeddings(vocab, config.embed_dim, config.embedding_init_std, rng);
    } else {
      const auto vectors = load_word_vectors(config.embeddings_path);
      if (vectors.dim != config.embed_dim)
        throw SizeMismatch("embedding file width " + std::to_string(vectors.dim) +
                           " differs from model.embed_dim " + std::to_string(config.embed_dim));
      p.embeddings = embeddings_from_vectors(vocab, vectors, config.embedding_init_std,
                                             !config.freeze_loaded_embeddings, rng);
    }
    std::size_t width = config.embed_dim;
    for (std::size_t k = 0; k < config.embed_layers; ++k) {
      p.embedding_path.push_back(make_linear(width, config.embed_hidden, true, rng));
      width = config.embed_hidden;
    }
    p.semantic = make_semantic_weights(config.visual_dim + width, config.relation_dim, rng);
  }

  for (std::size_t k = 0; k < config.heads; ++k)
    p.heads.push_back(make_attention_head(config.attention_input_dim(), config.head_dim(), rng));
  p.adapter = make_linear(config.heads * config.head_dim(), config.graph_width, true, rng);

  auto mlp = [&](std::size_t out) {
    std::vector<Linear> layers;
    layers.push_back(make_linear(config.visual_dim + config.graph_width, config.head_hidden, true, rng));
    layers.push_back(make_linear(config.head_hidden, config.head_hidden, true, rng));
    layers.push_back(make_linear(config.head_hidden, out, true, rng));
    return layers;
  };
  p.entity_head = mlp(vocab.num_entities());
  p.relation_head = mlp(vocab.num_predicates());
  return p;
}

Batch make_batch(std::span<const SceneInstance* const> scenes, const ModelParams& params,
                 const BatchOptions& options) {
  const ModelConfig& cfg = params.config;
  const std::size_t num_classes = params.vocab.num_entities();
  const std::size_t num_predicates = params.vocab.num_predicates();
  Batch b;
  b.num_images = scenes.size();
  std::size_t n_total = 0, p_total = 0;
  for (const auto* s : scenes) {
    if (s->entities.empty()) throw EmptyScene("scene '" + s->id + "' has no entities");
    if (s->feature_dim() != cfg.feature_dim)
      throw SizeMismatch("scene '" + s->id + "' has feature width " + std::to_string(s->feature_dim()) +
                         ", model expects " + std::to_string(cfg.feature_dim));
    n_total += s->size();
    p_total += s->size() * (s->size() - 1);
  }
  if (n_total == 0) throw EmptyScene("batch has no entities");

  std::vector<double> ef, es, pf, ps;
  ef.reserve(n_total * cfg.feature_dim);
  es.reserve(n_total * num_classes);
  pf.reserve(p_total * cfg.feature_dim);
  b.adjacency.assign(n_total * n_total, 0);

  for (std::size_t img = 0; img < scenes.size(); ++img) {
    const SceneInstance& s = *scenes[img];
    const std::size_t base = b.entity_image.size();
    b.image_ids.push_back(s.id);
    b.image_offset.push_back(base);
    std::vector<Box> boxes;
    for (const auto& e : s.entities) {
      if (e.scores.size() != num_classes)
        throw SizeMismatch("scene '" + s.id + "' scores do not match the entity vocabulary");
      b.entity_image.push_back(img);
      b.entity_labels.push_back(e.label);
      b.boxes.push_back(e.box);
      boxes.push_back(e.box);
      ef.insert(ef.end(), e.feature.begin(), e.feature.end());
      es.insert(es.end(), e.scores.begin(), e.scores.end());
    }

    const std::size_t n = s.size();
    if (cfg.use_graph_attention) {
      const auto adj = build_adjacency(boxes, cfg.adjacency);
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
          b.adjacency[(base + i) * n_total + base + j] = adj.connected(i, j) ? 1 : 0;
    } else {
      for (std::size_t i = 0; i < n; ++i) b.adjacency[(base + i) * n_total + base + i] = 1;
    }

    std::vector<std::size_t> positives, negatives;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) {
        if (i == j) continue;
        const std::size_t row = b.pair_subject.size();
        const std::size_t label = s.predicate_of(i, j);
        b.pair_subject.push_back(base + i);
        b.pair_object.push_back(base + j);
        b.pair_image.push_back(img);
        b.pair_labels.push_back(label);
        const auto f = relation_feature(s, i, j, cfg.union_margin);
        pf.insert(pf.end(), f.begin(), f.end());
        (label == kBackgroundPredicate ? negatives : positives).push_back(row);
      }
    b.annotated_rows.insert(b.annotated_rows.end(), positives.begin(), positives.end());
    if (options.bg_sampler == nullptr) {
      std::vector<std::size_t> rows(positives);
      rows.insert(rows.end(), negatives.begin(), negatives.end());
      std::sort(rows.begin(), rows.end());
      b.relation_rows.insert(b.relation_rows.end(), rows.begin(), rows.end());
    } else {
      const auto want = static_cast<std::size_t>(
          options.bg_ratio * static_cast<double>(std::max<std::size_t>(1, positives.size())));
      std::shuffle(negatives.begin(), negatives.end(), *options.bg_sampler);
      negatives.resize(std::min(want, negatives.size()));
      std::vector<std::size_t> rows(positives);
      rows.insert(rows.end(), negatives.begin(), negatives.end());
      std::sort(rows.begin(), rows.end());
      b.relation_rows.insert(b.relation_rows.end(), rows.begin(), rows.end());
    }
  }
  b.image_offset.push_back(n_total);

  b.entity_features = Tensor({n_total, cfg.feature_dim}, std::move(ef));
  b.entity_scores = Tensor({n_total, num_classes}, std::move(es));
  if (p_total > 0) {
    b.pair_features = Tensor({p_total, cfg.feature_dim}, std::move(pf));
    b.pair_scores = Tensor({p_total, num_predicates},
                           std::vector<double>(p_total * num_predicates,
                                               1.0 / static_cast<double>(num_predicates)));
  }
  for (std::size_t r : b.relation_rows) b.pair_labels.at(r);
  return b;
}

Batch make_batch(std::span<const SceneInstance> scenes, const ModelParams& params,
                 const BatchOptions& options) {
  std::vector<const SceneInstance*> ptrs;
  for (const auto& s : scenes) ptrs.push_back(&s);
  return make_batch(std::span<const SceneInstance* const>(ptrs), params, options);
}

namespace {

Tensor activate(Tape& tape, const Tensor& x, const ModelConfig& cfg) {
  return leaky_relu(tape, x, cfg.leaky_slope);
}

// Three-layer classifier over [features ‖ Ω(image)]. The first layer is applied
// to the two halves separately so Ω is transformed once per image.
Tensor classify(Tape& tape, const std::vector<Linear>& layers, const Tensor& features,
                const Tensor& omega, std::span<const std::size_t> image_of_row,
                const ModelConfig& cfg) {
  const Linear& first = layers.front();
  const std::size_t feat_w = features.cols();
  const std::size_t ctx_w = omega.cols();
  Tensor w_feat = slice_cols(tape, first.weight, 0, feat_w);
  Tensor w_ctx = slice_cols(tape, first.weight, feat_w, ctx_w);
  Tensor ctx = gather_rows(tape, matmul_nt(tape, omega, w_ctx), image_of_row);
  Tensor h = add(tape, matmul_nt(tape, features, w_feat), ctx);
  h = activate(tape, add_bias(tape, h, first.bias), cfg);
  for (std::size_t k = 1; k + 1 < layers.size(); ++k) h = activate(tape, layers[k](tape, h), cfg);
  return softmax_rows(tape, layers.back()(tape, h));
}

Tensor embed_labels(Tape& tape, const ModelParams& params, const Tensor& table) {
  Tensor h = table;
  for (const auto& layer : params.embedding_path) h = activate(tape, layer(tape, h), params.config);
  return h;
}

}  // namespace

ForwardResult forward(Tape& tape, const ModelParams& params, const Batch& batch) {
  const ModelConfig& cfg = params.config;
  const std::size_t n = batch.num_entities();
  const std::size_t p = batch.num_pairs();
  ForwardResult r;

  r.projected_entities = activate(tape, params.visual(tape, batch.entity_features), cfg);
  if (p > 0) r.projected_pairs = activate(tape, params.visual(tape, batch.pair_features), cfg);

  if (cfg.use_semantic_transform) {
    Tensor entity_words = embed_labels(tape, params, params.embeddings.entities);
    Tensor v_entity = expected_embedding(tape, batch.entity_scores, entity_words);
    r.subject_terms = semantic_project(tape, params.semantic.subject, r.projected_entities, v_entity);
    r.object_terms = semantic_project(tape, params.semantic.object, r.projected_entities, v_entity);
    Tensor summary;
    if (p > 0) {
      Tensor predicate_words = embed_labels(tape, params, params.embeddings.predicates);
      Tensor v_pair = expected_embedding(tape, batch.pair_scores, predicate_words);
      r.predicate_terms = semantic_project(tape, params.semantic.predicate, r.projected_pairs, v_pair);
      r.theta = concat(tape,
                       {gather_rows(tape, r.subject_terms, batch.pair_subject), r.predicate_terms,
                        gather_rows(tape, r.object_terms, batch.pair_object)},
                       1);
      summary = relation_summaries(tape, r.theta, batch.pair_subject, n);
    } else {
      summary = Tensor({n, 3 * cfg.relation_dim});
    }
    r.node_context = concat(tape, {r.projected_entities, summary}, 1);
  } else {
    r.node_context = r.projected_entities;
  }

  GatOutput gat = gat_layer(tape, params.heads, r.node_context, batch.adjacency, cfg.leaky_slope,
                            cfg.output_slope);
  r.node_embedding = gat.output;
  r.alphas = std::move(gat.alphas);
  r.omega = segment_sum(tape, params.adapter(tape, r.node_embedding), batch.entity_image,
                        batch.num_images);

  r.entity_probs = classify(tape, params.entity_head, r.projected_entities, r.omega,
                            batch.entity_image, cfg);
  if (p > 0)
    r.relation_probs = classify(tape, params.relation_head, r.projected_pairs, r.omega,
                                batch.pair_image, cfg);
  return r;
}

Tensor entity_loss(Tape& tape, const Tensor& entity_probs, std::span<const std::size_t> labels) {
  return cross_entropy(tape, entity_probs, labels);
}

Tensor relation_loss(Tape& tape, const Tensor& relation_probs, std::span<const std::size_t> rows,
                     std::span<const std::size_t> labels) {
  return cross_entropy(tape, gather_rows(tape, relation_probs, rows), labels);
}

Tensor weight_decay_term(Tape& tape, const ModelParams& params) {
  Tensor total;
  for (const auto& w : params.decayed()) {
    Tensor t = l2_sq(tape, w);
    total = total.defined() ? add(tape, total, t) : t;
  }
  return total.defined() ? total : Tensor::scalar(0.0);
}

LossBreakdown joint_loss(Tape& tape, const ModelParams& params, const Batch& batch,
                         const ForwardResult& result) {
  const ModelConfig& cfg = params.config;
  LossBreakdown out;
  std::vector<Tensor> terms;

  Tensor le = entity_loss(tape, result.entity_probs, batch.entity_labels);
  out.entity = le.item();
  terms.push_back(scale(tape, le, cfg.lambda_entity));

  if (!batch.relation_rows.empty()) {
    std::vector<std::size_t> labels;
    for (auto r : batch.relation_rows) labels.push_back(batch.pair_labels[r]);
    Tensor lr = relation_loss(tape, result.relation_probs, batch.relation_rows, labels);
    out.relation = lr.item();
    terms.push_back(scale(tape, lr, cfg.lambda_relation));
  }

  if (cfg.use_semantic_transform && !batch.annotated_rows.empty()) {
    std::vector<std::size_t> subj, obj;
    for (auto r : batch.annotated_rows) {
      subj.push_back(batch.pair_subject[r]);
      obj.push_back(batch.pair_object[r]);
    }
    Tensor ls = translation_loss(tape, gather_rows(tape, result.subject_terms, subj),
                                 gather_rows(tape, result.predicate_terms, batch.annotated_rows),
                                 gather_rows(tape, result.object_terms, obj));
    out.semantic = ls.item();
    terms.push_back(scale(tape, ls, cfg.lambda_semantic));
  }

  Tensor data = terms.front();
  for (std::size_t k = 1; k < terms.size(); ++k) data = add(tape, data, terms[k]);
  Tensor total = scale(tape, data, 1.0 / static_cast<double>(batch.num_images));
  if (cfg.weight_decay > 0.0) {
    Tensor decay = weight_decay_term(tape, params);
    out.decay = cfg.weight_decay * decay.item();
    total = add(tape, total, scale(tape, decay, cfg.weight_decay));
  }
  out.total = total;
  return out;
}

LossBreakdown joint_loss(Tape& tape, const ModelParams& params, const Batch& batch) {
  return joint_loss(tape, params, batch, forward(tape, params, batch));
}

std::vector<PredictedGraph> predict(const ModelParams& params, std::span<const SceneInstance> scenes,
                                    std::size_t batch_size) {
  if (batch_size == 0) batch_size = 1;
  std::vector<PredictedGraph> out;
  out.reserve(scenes.size());
  for (std::size_t start = 0; start < scenes.size(); start += batch_size) {
    auto chunk = scenes.subspan(start, std::min(batch_size, scenes.size() - start));
    Batch batch = make_batch(chunk, params);
    Tape tape;
    ForwardResult r = forward(tape, params, batch);
    const std::size_t nc = params.vocab.num_entities();
    const std::size_t np = params.vocab.num_predicates();
    const std::size_t gw = r.omega.cols();
    for (std::size_t img = 0; img < chunk.size(); ++img) {
      PredictedGraph g;
      g.image_id = chunk[img].id;
      const std::size_t lo = batch.image_offset[img], hi = batch.image_offset[img + 1];
      for (std::size_t e = lo; e < hi; ++e) {
        auto row = r.entity_probs.data().subspan(e * nc, nc);
        g.entity_probs.emplace_back(row.begin(), row.end());
      }
      auto om = r.omega.data().subspan(img * gw, gw);
      g.omega.assign(om.begin(), om.end());
      out.push_back(std::move(g));
    }
    for (std::size_t row = 0; row < batch.num_pairs(); ++row) {
      const std::size_t img = batch.pair_image[row];
      const std::size_t base = batch.image_offset[img];
      auto probs = r.relation_probs.data().subspan(row * np, np);
      out[start + img].pairs.push_back({batch.pair_subject[row] - base, batch.pair_object[row] - base,
                                        std::vector<double>(probs.begin(), probs.end())});
    }
  }
  for (auto& g : out) g.triplets = rank_triplets(g, RankMode::Constrained);
  return out;
}

PredictedGraph predict(const ModelParams& params, const SceneInstance& scene) {
  return predict(params, std::span<const SceneInstance>(&scene, 1), 1).front();
}

}  // namespace sgg
