#include "ucrs/control/predictor.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "ucrs/random.hpp"
#include "util/binfile.hpp"

namespace ucrs::control {

namespace {

constexpr char kMagic[9] = "UCRSPRD1";

struct Activations {
  std::vector<double> h;         // tanh hidden
  std::vector<double> log_prob;  // log softmax
};

Activations forward(const CategoryPredictor& p, std::span<const double> x) {
  const auto M = p.categories;
  const auto H = p.hidden;
  Activations a{std::vector<double>(H), std::vector<double>(M)};
  for (std::size_t j = 0; j < H; ++j) {
    double z = p.b1[j];
    for (std::size_t c = 0; c < M; ++c) z += p.w1[j * M + c] * x[c];
    a.h[j] = std::tanh(z);
  }
  double top = -INFINITY;
  for (std::size_t c = 0; c < M; ++c) {
    double z = p.b2[c];
    for (std::size_t j = 0; j < H; ++j) z += p.w2[c * H + j] * a.h[j];
    a.log_prob[c] = z;
    top = std::max(top, z);
  }
  double norm = 0.0;
  for (double z : a.log_prob) norm += std::exp(z - top);
  const double log_norm = top + std::log(norm);
  for (double& z : a.log_prob) z -= log_norm;
  return a;
}

void check_pairs(std::span<const HalfPair> pairs, std::size_t M) {
  for (const auto& pr : pairs) {
    if (pr.first.size() != M || pr.second.size() != M) {
      throw InvalidArgument("half distribution has the wrong number of categories");
    }
  }
}

CategoryPredictor zeros_like(const CategoryPredictor& p) {
  CategoryPredictor z = p;
  for (auto* v : {&z.w1, &z.b1, &z.w2, &z.b2}) std::fill(v->begin(), v->end(), 0.0);
  return z;
}

}  // namespace

std::vector<double> CategoryPredictor::predict(std::span<const double> input) const {
  if (input.size() != categories) throw InvalidArgument("predictor input has the wrong size");
  auto out = forward(*this, input).log_prob;
  for (double& x : out) x = std::exp(x);
  return out;
}

CategoryPredictor init_predictor(std::size_t categories, std::size_t hidden, std::uint64_t seed) {
  if (categories < 2 || hidden == 0) throw InvalidArgument("predictor needs M >= 2 and H >= 1");
  CategoryPredictor p;
  p.categories = categories;
  p.hidden = hidden;
  Rng rng(seed, 7);
  const double limit = std::sqrt(6.0 / static_cast<double>(categories + hidden));
  p.w1.resize(hidden * categories);
  for (auto& x : p.w1) x = (2.0 * rng.uniform() - 1.0) * limit;
  p.b1.assign(hidden, 0.0);
  p.w2.resize(categories * hidden);
  for (auto& x : p.w2) x = (2.0 * rng.uniform() - 1.0) * limit;
  p.b2.assign(categories, 0.0);
  return p;
}

std::vector<HalfPair> history_halves(const data::Dataset& ds) {
  std::vector<HalfPair> out;
  for (UserIndex u = 0; u < ds.num_users(); ++u) {
    const auto& seq = ds.histories[u].train;
    if (seq.size() < 2) continue;
    const auto cut = (seq.size() + 1) / 2;
    const std::span<const ItemIndex> all(seq);
    out.push_back({u, data::category_distribution(ds, all.first(cut)),
                   data::category_distribution(ds, all.subspan(cut))});
  }
  return out;
}

double predictor_loss(const CategoryPredictor& p, std::span<const HalfPair> pairs) {
  if (pairs.empty()) return 0.0;
  double total = 0.0;
  for (const auto& pr : pairs) {
    const auto a = forward(p, pr.first.probs);
    for (std::size_t c = 0; c < p.categories; ++c) total -= pr.second.probs[c] * a.log_prob[c];
  }
  return total / static_cast<double>(pairs.size());
}

double predictor_loss_and_gradient(const CategoryPredictor& p, std::span<const HalfPair> pairs,
                                   CategoryPredictor& grad) {
  grad = zeros_like(p);
  if (pairs.empty()) return 0.0;
  const auto M = p.categories;
  const auto H = p.hidden;
  const double inv = 1.0 / static_cast<double>(pairs.size());
  std::vector<double> dz2(M), dz1(H);
  double total = 0.0;
  for (const auto& pr : pairs) {
    const auto& x = pr.first.probs;
    const auto& t = pr.second.probs;
    const auto a = forward(p, x);
    double mass = 0.0;
    for (std::size_t c = 0; c < M; ++c) {
      total -= t[c] * a.log_prob[c];
      mass += t[c];
    }
    for (std::size_t c = 0; c < M; ++c) dz2[c] = (std::exp(a.log_prob[c]) * mass - t[c]) * inv;
    std::fill(dz1.begin(), dz1.end(), 0.0);
    for (std::size_t c = 0; c < M; ++c) {
      grad.b2[c] += dz2[c];
      for (std::size_t j = 0; j < H; ++j) {
        grad.w2[c * H + j] += dz2[c] * a.h[j];
        dz1[j] += dz2[c] * p.w2[c * H + j];
      }
    }
    for (std::size_t j = 0; j < H; ++j) {
      dz1[j] *= 1.0 - a.h[j] * a.h[j];
      grad.b1[j] += dz1[j];
      for (std::size_t c = 0; c < M; ++c) grad.w1[j * M + c] += dz1[j] * x[c];
    }
  }
  return total * inv;
}

CategoryPredictor train_category_predictor(std::span<const HalfPair> pairs, std::size_t categories,
                                           const PredictorConfig& cfg) {
  if (pairs.empty()) throw InvalidArgument("no users with at least two train interactions");
  if (cfg.epochs < 1 || cfg.batch_size == 0 || cfg.learning_rate <= 0) {
    throw InvalidArgument("predictor epochs, batch size and learning rate must be positive");
  }
  check_pairs(pairs, categories);
  auto p = init_predictor(categories, cfg.hidden, cfg.seed);
  auto m = zeros_like(p), v = zeros_like(p), grad = zeros_like(p);
  const double b1 = 0.9, b2 = 0.999, eps = 1e-8;
  std::vector<std::size_t> order(pairs.size());
  std::iota(order.begin(), order.end(), 0);
  std::vector<HalfPair> batch;
  Rng rng(cfg.seed, 8);
  long step = 0;
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    rng.shuffle(order.begin(), order.end());
    for (std::size_t start = 0; start < order.size(); start += cfg.batch_size) {
      batch.clear();
      for (std::size_t n = start; n < std::min(order.size(), start + cfg.batch_size); ++n) {
        batch.push_back(pairs[order[n]]);
      }
      const double loss = predictor_loss_and_gradient(p, batch, grad);
      if (!std::isfinite(loss)) throw Error("non-finite predictor loss at epoch " + std::to_string(epoch));
      ++step;
      const double c1 = 1.0 - std::pow(b1, static_cast<double>(step));
      const double c2 = 1.0 - std::pow(b2, static_cast<double>(step));
      auto update = [&](std::vector<double>& w, std::vector<double>& mw, std::vector<double>& vw,
                        const std::vector<double>& g) {
        for (std::size_t i = 0; i < w.size(); ++i) {
          mw[i] = b1 * mw[i] + (1 - b1) * g[i];
          vw[i] = b2 * vw[i] + (1 - b2) * g[i] * g[i];
          w[i] -= cfg.learning_rate * (mw[i] / c1) / (std::sqrt(vw[i] / c2) + eps);
        }
      };
      update(p.w1, m.w1, v.w1, grad.w1);
      update(p.b1, m.b1, v.b1, grad.b1);
      update(p.w2, m.w2, v.w2, grad.w2);
      update(p.b2, m.b2, v.b2, grad.b2);
    }
  }
  return p;
}

CategoryPredictor train_category_predictor(const data::Dataset& ds, const PredictorConfig& cfg) {
  const auto pairs = history_halves(ds);
  return train_category_predictor(pairs, ds.num_categories(), cfg);
}

TargetPrediction predict_target_categories(const CategoryPredictor& predictor,
                                           const data::CategoryDistribution& history,
                                           CategoryIndex majority, std::size_t k) {
  const auto M = predictor.categories;
  if (history.size() != M) throw InvalidArgument("history distribution has the wrong size");
  if (majority >= M) throw InvalidArgument("h-bar outside the category range");
  if (k < 1 || k > 5) throw InvalidArgument("K must be in 1..5");
  std::vector<double> input = history.probs;
  input[majority] = 0.0;
  const double rest = std::accumulate(input.begin(), input.end(), 0.0);
  for (std::size_t c = 0; c < M; ++c) {
    if (c == majority) continue;
    input[c] = rest > 0 ? input[c] / rest : 1.0 / static_cast<double>(M - 1);
  }
  auto scores = predictor.predict(input);
  scores[majority] = -INFINITY;
  TargetPrediction out;
  const auto take = std::min(k, M - 1);
  for (auto c : top_k(scores, take)) out.categories.push_back(static_cast<CategoryIndex>(c));
  out.short_list = take < k;
  return out;
}

void save_predictor(const CategoryPredictor& p, const std::filesystem::path& path) {
  const nlohmann::json header = {{"format", "ucrs-predictor"}, {"version", 1},
                                 {"M", p.categories}, {"H", p.hidden}};
  detail::write_checkpoint(path, kMagic, header,
                           {{"w1", p.w1}, {"b1", p.b1}, {"w2", p.w2}, {"b2", p.b2}});
}

CategoryPredictor load_predictor(const std::filesystem::path& path) {
  const auto cp = detail::read_checkpoint(path, kMagic);
  CategoryPredictor p;
  try {
    p.categories = cp.header.at("M").get<std::size_t>();
    p.hidden = cp.header.at("H").get<std::size_t>();
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(path.string(), 0, std::string("bad predictor header: ") + e.what());
  }
  p.w1 = cp.array("w1");
  p.b1 = cp.array("b1");
  p.w2 = cp.array("w2");
  p.b2 = cp.array("b2");
  const auto M = p.categories, H = p.hidden;
  if (p.w1.size() != H * M || p.b1.size() != H || p.w2.size() != M * H || p.b2.size() != M) {
    throw ParseError(path.string(), 0, "predictor array shapes disagree with header");
  }
  return p;
}

}  // namespace ucrs::control
