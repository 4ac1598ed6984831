#include "ucrs/model/train.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "ucrs/data/prepare.hpp"
#include "ucrs/random.hpp"

namespace ucrs::model {

Gradients::Gradients(const ModelParams& shape)
    : linear(shape.linear.size(), 0.0),
      embeddings(shape.embeddings.size(), 0.0),
      w1(shape.w1.size(), 0.0),
      b1(shape.b1.size(), 0.0),
      w2(shape.w2.size(), 0.0),
      dim_(shape.dim),
      seen_(shape.linear.size(), 0) {}

void Gradients::touch(FeatureIndex f) {
  if (!seen_[f]) {
    seen_[f] = 1;
    touched.push_back(f);
  }
}

void Gradients::clear() {
  bias = 0.0;
  for (auto f : touched) {
    linear[f] = 0.0;
    std::fill_n(embeddings.begin() + static_cast<std::ptrdiff_t>(f * dim_), dim_, 0.0);
    seen_[f] = 0;
  }
  touched.clear();
  std::fill(w1.begin(), w1.end(), 0.0);
  std::fill(b1.begin(), b1.end(), 0.0);
  std::fill(w2.begin(), w2.end(), 0.0);
}

namespace {

double softplus(double x) { return std::max(x, 0.0) + std::log1p(std::exp(-std::abs(x))); }

// Forward pass for one example, keeping what the backward pass needs.
struct Forward {
  std::vector<double> s, q, bi, pre;
  double raw = 0.0;

  explicit Forward(const ModelParams& p)
      : s(p.dim), q(p.dim), bi(p.dim), pre(p.hidden) {}

  void run(const ModelParams& p, std::span<const FeatureIndex> features) {
    std::fill(s.begin(), s.end(), 0.0);
    std::fill(q.begin(), q.end(), 0.0);
    double lin = 0.0;
    for (auto f : features) {
      lin += p.linear[f];
      const double* v = p.embedding(f);
      for (std::size_t k = 0; k < p.dim; ++k) {
        s[k] += v[k];
        q[k] += v[k] * v[k];
      }
    }
    for (std::size_t k = 0; k < p.dim; ++k) bi[k] = 0.5 * (s[k] * s[k] - q[k]);
    double inter = 0.0;
    if (p.kind == ModelKind::FM) {
      for (std::size_t k = 0; k < p.dim; ++k) inter += bi[k];
    } else {
      for (std::size_t h = 0; h < p.hidden; ++h) {
        const double* row = p.w1.data() + h * p.dim;
        double a = p.b1[h];
        for (std::size_t k = 0; k < p.dim; ++k) a += row[k] * bi[k];
        pre[h] = a;
        if (a > 0) inter += p.w2[h] * a;
      }
    }
    raw = p.bias + lin + inter;
  }
};

double embedding_norm(const ModelParams& p, std::span<const FeatureIndex> features) {
  double n = 0.0;
  for (auto f : features) {
    const double* v = p.embedding(f);
    for (std::size_t k = 0; k < p.dim; ++k) n += v[k] * v[k];
  }
  return n;
}

}  // namespace

double batch_loss(const ModelParams& p, std::span<const Example> batch, double l2) {
  if (batch.empty()) return 0.0;
  Forward fw(p);
  double total = 0.0;
  for (const auto& ex : batch) {
    fw.run(p, ex.features);
    total += softplus(fw.raw) - ex.label * fw.raw;
    if (l2 != 0.0) total += l2 * embedding_norm(p, ex.features);
  }
  return total / static_cast<double>(batch.size());
}

double loss_and_gradient(const ModelParams& p, std::span<const Example> batch, double l2,
                         Gradients& grad) {
  grad.clear();
  if (batch.empty()) return 0.0;
  const double inv_b = 1.0 / static_cast<double>(batch.size());
  const auto d = p.dim;
  Forward fw(p);
  std::vector<double> dbi(d);
  double total = 0.0;
  for (const auto& ex : batch) {
    fw.run(p, ex.features);
    total += softplus(fw.raw) - ex.label * fw.raw;
    if (l2 != 0.0) total += l2 * embedding_norm(p, ex.features);
    const double g = (sigmoid(fw.raw) - ex.label) * inv_b;

    grad.bias += g;
    // d raw / d bi_k: 1 for FM, sum_h delta_h W1[h,k] for NFM.
    if (p.kind == ModelKind::FM) {
      std::fill(dbi.begin(), dbi.end(), g);
    } else {
      std::fill(dbi.begin(), dbi.end(), 0.0);
      for (std::size_t h = 0; h < p.hidden; ++h) {
        if (fw.pre[h] <= 0) continue;
        grad.w2[h] += g * fw.pre[h];
        const double delta = g * p.w2[h];
        grad.b1[h] += delta;
        const double* row = p.w1.data() + h * d;
        double* grow = grad.w1.data() + h * d;
        for (std::size_t k = 0; k < d; ++k) {
          grow[k] += delta * fw.bi[k];
          dbi[k] += delta * row[k];
        }
      }
    }
    for (auto f : ex.features) {
      grad.touch(f);
      grad.linear[f] += g;
      const double* v = p.embedding(f);
      double* gv = grad.embeddings.data() + static_cast<std::size_t>(f) * d;
      for (std::size_t k = 0; k < d; ++k) {
        gv[k] += dbi[k] * (fw.s[k] - v[k]) + 2.0 * l2 * inv_b * v[k];
      }
    }
  }
  return total * inv_b;
}

double validation_recall(const Scorer& scorer, std::size_t k) {
  const auto& ds = scorer.dataset();
  CompensatedSum recall;
  std::vector<ItemIndex> candidates;
  for (UserIndex u = 0; u < ds.num_users(); ++u) {
    const auto& valid = ds.histories[u].valid;
    if (valid.empty()) continue;
    candidates = candidate_items(ds, u, false);
    const auto side = scorer.user_side(u);
    const auto scores = scorer.score_all_items(side, candidates);
    std::size_t hits = 0;
    for (auto idx : top_k(scores, k)) {
      if (std::find(valid.begin(), valid.end(), candidates[idx]) != valid.end()) ++hits;
    }
    recall.add(static_cast<double>(hits) / static_cast<double>(valid.size()));
  }
  return recall.mean();
}

namespace {

// Adagrad step on every parameter the gradient touches.
class Adagrad {
 public:
  Adagrad(const ModelParams& p, double lr)
      : lr_(lr), linear_(p.linear.size(), 0.0), emb_(p.embeddings.size(), 0.0),
        w1_(p.w1.size(), 0.0), b1_(p.b1.size(), 0.0), w2_(p.w2.size(), 0.0) {}

  void step(ModelParams& p, const Gradients& g) {
    update(p.bias, bias_, g.bias);
    for (auto f : g.touched) {
      update(p.linear[f], linear_[f], g.linear[f]);
      const auto base = static_cast<std::size_t>(f) * p.dim;
      for (std::size_t k = 0; k < p.dim; ++k) {
        update(p.embeddings[base + k], emb_[base + k], g.embeddings[base + k]);
      }
    }
    for (std::size_t i = 0; i < p.w1.size(); ++i) update(p.w1[i], w1_[i], g.w1[i]);
    for (std::size_t i = 0; i < p.b1.size(); ++i) update(p.b1[i], b1_[i], g.b1[i]);
    for (std::size_t i = 0; i < p.w2.size(); ++i) update(p.w2[i], w2_[i], g.w2[i]);
  }

 private:
  void update(double& x, double& acc, double g) const {
    acc += g * g;
    x -= lr_ * g / std::sqrt(acc + 1e-8);
  }

  double lr_;
  double bias_ = 0.0;
  std::vector<double> linear_, emb_, w1_, b1_, w2_;
};

// Flat feature storage for a list of (user, item) rows.
struct ExampleStore {
  std::vector<FeatureIndex> features;
  std::vector<std::size_t> offsets{0};
  std::vector<double> labels;

  void add(const data::Dataset& ds, const FeatureLayout& layout, UserIndex u, ItemIndex i,
           double label) {
    const auto uf = user_features(ds, layout, u, {}, {});
    const auto itf = item_features(ds, layout, i);
    features.insert(features.end(), uf.begin(), uf.end());
    features.insert(features.end(), itf.begin(), itf.end());
    offsets.push_back(features.size());
    labels.push_back(label);
  }
  std::size_t size() const { return labels.size(); }
  Example at(std::size_t n) const {
    return {std::span<const FeatureIndex>(features.data() + offsets[n], offsets[n + 1] - offsets[n]),
            labels[n]};
  }
};

}  // namespace

TrainResult train(const data::Dataset& ds, const TrainConfig& cfg,
                  const std::function<void(const EpochLog&)>& on_epoch) {
  if (cfg.learning_rate <= 0 || cfg.batch_size == 0 || cfg.max_epochs < 1 || cfg.patience < 1 ||
      cfg.eval_every < 1 || cfg.l2 < 0) {
    throw InvalidArgument("train: learning rate, batch size, epochs, patience must be positive");
  }
  if (ds.train.empty()) throw InvalidArgument("train: dataset has no training positives");
  const auto layout = FeatureLayout::for_dataset(ds, cfg.with_user_features, cfg.with_item_categories);
  TrainResult result;
  result.params = init_params(layout, cfg.kind, cfg.dim, cfg.hidden, cfg.init_scale, cfg.seed);
  ModelParams& p = result.params;

  ExampleStore positives;
  for (const auto& r : ds.train) positives.add(ds, layout, r.user, r.item, 1.0);

  Adagrad opt(p, cfg.learning_rate);
  Gradients grad(p);
  ModelParams best = p;
  const bool has_valid = !ds.valid.empty();
  double best_recall = -1.0;
  int since_best = 0;
  ExampleStore negatives;
  std::vector<Example> batch;
  batch.reserve(cfg.batch_size);

  for (int epoch = 1; epoch <= cfg.max_epochs; ++epoch) {
    if (epoch == 1 || cfg.resample_negatives) {
      negatives = ExampleStore{};
      const auto neg_seed = Rng(cfg.seed, 2000 + static_cast<std::uint64_t>(epoch)).next();
      for (const auto& r : data::sample_negatives(ds, neg_seed)) {
        negatives.add(ds, layout, r.user, r.item, 0.0);
      }
    }
    const std::size_t n = positives.size() + negatives.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    Rng(cfg.seed, 1000 + static_cast<std::uint64_t>(epoch)).shuffle(order.begin(), order.end());

    double epoch_loss = 0.0;
    for (std::size_t start = 0, b = 0; start < n; start += cfg.batch_size, ++b) {
      const auto end = std::min(n, start + cfg.batch_size);
      batch.clear();
      for (std::size_t j = start; j < end; ++j) {
        const auto id = order[j];
        batch.push_back(id < positives.size() ? positives.at(id)
                                              : negatives.at(id - positives.size()));
      }
      const double loss = loss_and_gradient(p, batch, cfg.l2, grad);
      if (!std::isfinite(loss)) {
        throw Error("non-finite training loss at epoch " + std::to_string(epoch) + ", batch " +
                    std::to_string(b) + " (lr " + std::to_string(cfg.learning_rate) + ", l2 " +
                    std::to_string(cfg.l2) + ")");
      }
      epoch_loss += loss * static_cast<double>(end - start);
      opt.step(p, grad);
    }
    EpochLog entry{epoch, epoch_loss / static_cast<double>(n), -1.0};

    const bool evaluate = has_valid && (epoch % cfg.eval_every == 0 || epoch == cfg.max_epochs);
    if (evaluate) {
      entry.valid_recall = validation_recall(Scorer(p, ds), cfg.eval_k);
      if (entry.valid_recall > best_recall) {
        best_recall = entry.valid_recall;
        best = p;
        result.best_epoch = epoch;
        since_best = 0;
      } else {
        ++since_best;
      }
    }
    result.log.push_back(entry);
    if (on_epoch) on_epoch(entry);
    if (evaluate && since_best >= cfg.patience) break;
  }

  if (has_valid) {
    p = std::move(best);
    result.best_valid_recall = best_recall;
  } else {
    result.best_epoch = result.log.back().epoch;
  }
  return result;
}

}  // namespace ucrs::model
