#pragma once

#include <filesystem>
#include <span>
#include <vector>

#include "ucrs/data/dataset.hpp"
#include "ucrs/data/distribution.hpp"

namespace ucrs::control {

/// M -> H (tanh) -> M (softmax) network from an earlier category distribution
/// to a later one.
struct CategoryPredictor {
  std::size_t categories = 0;
  std::size_t hidden = 0;
  std::vector<double> w1;  // hidden x categories
  std::vector<double> b1;  // hidden
  std::vector<double> w2;  // categories x hidden
  std::vector<double> b2;  // categories

  /// Softmax output for one input distribution.
  std::vector<double> predict(std::span<const double> input) const;

  bool operator==(const CategoryPredictor&) const = default;
};

/// One training pair: first and second half of a user's time-ordered train
/// sequence. Odd lengths put the extra item in the first half.
struct HalfPair {
  UserIndex user = 0;
  data::CategoryDistribution first;
  data::CategoryDistribution second;
};

/// Pairs for every user with at least two train interactions.
std::vector<HalfPair> history_halves(const data::Dataset& ds);

struct PredictorConfig {
  std::size_t hidden = 16;
  int epochs = 400;
  double learning_rate = 0.02;
  std::size_t batch_size = 256;
  std::uint64_t seed = 1;
};

/// Mean cross-entropy -sum_c second_c log p_c over the pairs.
double predictor_loss(const CategoryPredictor& p, std::span<const HalfPair> pairs);

/// Loss and gradient, written into `grad` (same shape as p).
double predictor_loss_and_gradient(const CategoryPredictor& p, std::span<const HalfPair> pairs,
                                   CategoryPredictor& grad);

/// Adam on mini-batches of the pairs. Throws InvalidArgument when empty.
CategoryPredictor train_category_predictor(std::span<const HalfPair> pairs, std::size_t categories,
                                           const PredictorConfig& config);
CategoryPredictor train_category_predictor(const data::Dataset& ds, const PredictorConfig& config);

CategoryPredictor init_predictor(std::size_t categories, std::size_t hidden, std::uint64_t seed);

struct TargetPrediction {
  std::vector<CategoryIndex> categories;
  /// Fewer than K categories remained once h-bar was excluded.
  bool short_list = false;
};

/// Zeroes h-bar in the input and renormalizes (uniform over the remaining
/// categories if nothing is left), runs the predictor, and returns the K
/// categories with the highest predicted mass other than h-bar; ties go to the
/// lower index.
TargetPrediction predict_target_categories(const CategoryPredictor& predictor,
                                           const data::CategoryDistribution& history,
                                           CategoryIndex majority, std::size_t k);

void save_predictor(const CategoryPredictor& p, const std::filesystem::path& path);
CategoryPredictor load_predictor(const std::filesystem::path& path);

}  // namespace ucrs::control
