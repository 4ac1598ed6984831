#pragma once

#include <span>
#include <vector>

#include "ucrs/model/score.hpp"

namespace ucrs::control {

/// Change to the user's features that forms u'.
struct FeatureEdit {
  enum class Kind { None, Override, Mask };
  Kind kind = Kind::None;
  /// Override: the new feature x-hat (replaces its group's bit).
  /// Mask: the owned feature x-bar (its whole group is dropped).
  FeatureIndex feature = 0;

  static FeatureEdit none() { return {}; }
  static FeatureEdit override_with(FeatureIndex f) { return {Kind::Override, f}; }
  static FeatureEdit mask(FeatureIndex f) { return {Kind::Mask, f}; }
};

/// The model-level edit realizing `edit` for this user.
model::UserFeatureEdit to_model_edit(const data::Dataset& ds, UserIndex user, const FeatureEdit& edit);

/// (1 - alpha) f(u', i) + alpha f(u-hat', i), f = sigmoid of the raw score,
/// u-hat' = u' without the user-ID feature.
double counterfactual_score(const model::Scorer& scorer, UserIndex user, ItemIndex item,
                            double alpha, const FeatureEdit& edit);

/// counterfactual_score over many candidates, in candidate order.
std::vector<double> counterfactual_scores(const model::Scorer& scorer, UserIndex user,
                                          std::span<const ItemIndex> candidates, double alpha,
                                          const FeatureEdit& edit);

/// What the ranking policy rewards or penalizes.
struct PolicyContext {
  enum class Mode { Fine, Coarse, Combined };
  Mode mode = Mode::Fine;
  std::vector<CategoryIndex> targets;  // Fine, Combined
  CategoryIndex majority = 0;          // Coarse, Combined
};

/// r(i): Fine 2 if any target else 1; Coarse 0 if h-bar else 1; Combined 2 if
/// any target, else 0 if h-bar, else 1.
int regularizer(const data::ItemProfile& item, const PolicyContext& context);

struct RankedList {
  std::vector<ItemIndex> items;
  std::vector<double> adjusted;  // Y'
  std::vector<double> base;      // Y
  std::vector<int> r;
  bool short_list = false;
};

/// Top-k by Y' = Y + beta r; ties by higher Y, then lower item index.
/// Returns every candidate, flagged short, when fewer than k exist.
RankedList rank_with_policy(std::span<const ItemIndex> items, std::span<const double> y,
                            std::span<const int> r, double beta, std::size_t k);

}  // namespace ucrs::control
