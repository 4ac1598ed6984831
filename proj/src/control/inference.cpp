#include "ucrs/control/inference.hpp"

#include <algorithm>
#include <numeric>

namespace ucrs::control {

model::UserFeatureEdit to_model_edit(const data::Dataset& ds, UserIndex user, const FeatureEdit& edit) {
  model::UserFeatureEdit out;
  switch (edit.kind) {
    case FeatureEdit::Kind::None:
      break;
    case FeatureEdit::Kind::Override: {
      const auto& group = ds.attribute_groups.at(ds.group_of(edit.feature));
      auto bits = model::user_feature_vector(ds, user);
      for (std::size_t v = 0; v < group.values.size(); ++v) bits[group.first_feature + v] = 0;
      bits[edit.feature] = 1;
      out.override_features = std::move(bits);
      break;
    }
    case FeatureEdit::Kind::Mask:
      out.masked_groups = {ds.group_of(edit.feature)};
      break;
  }
  return out;
}

double counterfactual_score(const model::Scorer& scorer, UserIndex user, ItemIndex item,
                            double alpha, const FeatureEdit& edit) {
  const ItemIndex one[1] = {item};
  return counterfactual_scores(scorer, user, one, alpha, edit).front();
}

std::vector<double> counterfactual_scores(const model::Scorer& scorer, UserIndex user,
                                          std::span<const ItemIndex> candidates, double alpha,
                                          const FeatureEdit& edit) {
  const auto e = to_model_edit(scorer.dataset(), user, edit);
  const auto edited = scorer.user_side(user, {}, e);
  const auto without_id = scorer.user_side(user, {model::Role::UserId}, e);
  std::vector<double> out(candidates.size());
  for (std::size_t n = 0; n < candidates.size(); ++n) {
    const double factual = scorer.probability(edited, candidates[n]);
    const double counterfactual = scorer.probability(without_id, candidates[n]);
    out[n] = (1.0 - alpha) * factual + alpha * counterfactual;
  }
  return out;
}

int regularizer(const data::ItemProfile& item, const PolicyContext& context) {
  const auto has_target = [&] {
    return std::any_of(context.targets.begin(), context.targets.end(),
                       [&](CategoryIndex c) { return item.has_category(c); });
  };
  switch (context.mode) {
    case PolicyContext::Mode::Fine:
      return has_target() ? 2 : 1;
    case PolicyContext::Mode::Coarse:
      return item.has_category(context.majority) ? 0 : 1;
    case PolicyContext::Mode::Combined:
      if (has_target()) return 2;
      return item.has_category(context.majority) ? 0 : 1;
  }
  return 1;
}

RankedList rank_with_policy(std::span<const ItemIndex> items, std::span<const double> y,
                            std::span<const int> r, double beta, std::size_t k) {
  if (items.size() != y.size() || items.size() != r.size()) {
    throw InvalidArgument("rank_with_policy: items, scores and r differ in length");
  }
  std::vector<double> adjusted(items.size());
  for (std::size_t n = 0; n < items.size(); ++n) adjusted[n] = y[n] + beta * r[n];
  std::vector<std::size_t> order(items.size());
  std::iota(order.begin(), order.end(), 0);
  const auto better = [&](std::size_t a, std::size_t b) {
    if (adjusted[a] != adjusted[b]) return adjusted[a] > adjusted[b];
    if (y[a] != y[b]) return y[a] > y[b];
    return items[a] < items[b];
  };
  RankedList out;
  out.short_list = items.size() < k;
  const auto take = std::min(k, items.size());
  std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(take), order.end(), better);
  for (std::size_t n = 0; n < take; ++n) {
    const auto at = order[n];
    out.items.push_back(items[at]);
    out.adjusted.push_back(adjusted[at]);
    out.base.push_back(y[at]);
    out.r.push_back(r[at]);
  }
  return out;
}

}  // namespace ucrs::control
