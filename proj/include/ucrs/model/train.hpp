#pragma once

#include <functional>
#include <span>
#include <vector>

#include "ucrs/data/dataset.hpp"
#include "ucrs/model/params.hpp"
#include "ucrs/model/score.hpp"

namespace ucrs::model {

/// One labelled row: its active features and a 0/1 target.
struct Example {
  std::span<const FeatureIndex> features;
  double label = 0.0;
};

/// Gradient buffers shaped like ModelParams. Only rows listed in `touched`
/// may be non-zero in linear and embeddings.
struct Gradients {
  double bias = 0.0;
  std::vector<double> linear;
  std::vector<double> embeddings;
  std::vector<double> w1;
  std::vector<double> b1;
  std::vector<double> w2;
  std::vector<FeatureIndex> touched;

  explicit Gradients(const ModelParams& shape);
  void clear();
  /// Records f in `touched` once.
  void touch(FeatureIndex f);

 private:
  std::size_t dim_;
  std::vector<std::uint8_t> seen_;
};

/// Mean binary cross-entropy of sigmoid(score) over the batch, plus
/// l2 * (1/B) sum over examples of sum_{active j} |v_j|^2.
double batch_loss(const ModelParams& params, std::span<const Example> batch, double l2);

/// batch_loss and its gradient, written into `grad` (which is cleared first).
double loss_and_gradient(const ModelParams& params, std::span<const Example> batch, double l2,
                         Gradients& grad);

struct TrainConfig {
  ModelKind kind = ModelKind::FM;
  std::size_t dim = 64;
  std::size_t hidden = 16;
  double learning_rate = 0.05;
  double l2 = 0.0;
  std::size_t batch_size = 1024;
  int max_epochs = 100;
  int patience = 10;
  double init_scale = 0.01;
  std::uint64_t seed = 1;
  bool resample_negatives = true;
  bool with_user_features = true;
  bool with_item_categories = true;
  int eval_every = 1;
  std::size_t eval_k = 10;
};

struct EpochLog {
  int epoch = 0;
  double loss = 0.0;
  double valid_recall = -1.0;  // -1 when not evaluated
};

struct TrainResult {
  ModelParams params;
  std::vector<EpochLog> log;
  int best_epoch = 0;
  double best_valid_recall = 0.0;
};

/// Adagrad on BCE with one sampled negative per train positive. The returned
/// params are those of the epoch with the best validation Recall@k (the last
/// epoch if the dataset has no validation positives). Stops after `patience`
/// evaluations without improvement. Throws Error on a non-finite loss.
TrainResult train(const data::Dataset& ds, const TrainConfig& config,
                  const std::function<void(const EpochLog&)>& on_epoch = {});

/// Macro-averaged Recall@k on the validation split; candidates exclude only
/// train positives. Users without validation positives are skipped.
double validation_recall(const Scorer& scorer, std::size_t k);

}  // namespace ucrs::model
