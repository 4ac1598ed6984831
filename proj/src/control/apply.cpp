#include "ucrs/control/apply.hpp"

#include <sstream>

#include "ucrs/data/distribution.hpp"

namespace ucrs::control {

namespace {

ControlResult rank(const model::Scorer& scorer, UserIndex user, double alpha, const FeatureEdit& edit,
                   const std::optional<PolicyContext>& policy, double beta,
                   const ControlOptions& options) {
  const auto& ds = scorer.dataset();
  const auto candidates = candidates_for(ds, user, options.candidates);
  const auto y = counterfactual_scores(scorer, user, candidates, alpha, edit);
  std::vector<int> r(candidates.size(), 1);
  if (policy) {
    for (std::size_t n = 0; n < candidates.size(); ++n) r[n] = regularizer(ds.items[candidates[n]], *policy);
  }
  ControlResult out;
  out.user = user;
  out.alpha = alpha;
  out.beta = policy ? beta : 0.0;
  out.edit = edit;
  out.ranked = rank_with_policy(candidates, y, r, out.beta, options.k);
  return out;
}

}  // namespace

std::string ControlResult::provenance() const {
  std::ostringstream s;
  s << command;
  if (command == "baseline") return s.str();
  s << "(alpha=" << alpha << ",beta=" << beta;
  if (!targets.empty()) {
    s << ",targets=[";
    for (std::size_t n = 0; n < targets.size(); ++n) s << (n ? "," : "") << targets[n];
    s << "]";
  }
  if (majority) s << ",majority=" << *majority;
  if (edit.kind == FeatureEdit::Kind::Override) s << ",override=" << edit.feature;
  if (edit.kind == FeatureEdit::Kind::Mask) s << ",mask=" << edit.feature;
  s << ")";
  return s.str();
}

std::vector<ItemIndex> candidates_for(const data::Dataset& ds, UserIndex user, CandidateMode mode) {
  return model::candidate_items(ds, user, mode == CandidateMode::Test);
}

ControlResult apply_control(const model::Scorer& scorer, const CategoryPredictor* predictor,
                            UserIndex user, const ControlCommand& command,
                            const ControlOptions& options) {
  const auto& ds = scorer.dataset();
  if (user >= ds.num_users()) throw InvalidArgument("unknown user index");
  if (const auto* c = std::get_if<UserFeatureFine>(&command)) {
    auto out = rank(scorer, user, c->alpha, FeatureEdit::override_with(c->target), std::nullopt, 0, options);
    out.command = type_name(CommandType::UserFine);
    return out;
  }
  if (const auto* c = std::get_if<UserFeatureCoarse>(&command)) {
    auto out = rank(scorer, user, c->alpha, FeatureEdit::mask(c->own), std::nullopt, 0, options);
    out.command = type_name(CommandType::UserCoarse);
    return out;
  }
  if (const auto* c = std::get_if<ItemFeatureFine>(&command)) {
    PolicyContext policy{PolicyContext::Mode::Fine, {c->target}, 0};
    auto out = rank(scorer, user, c->alpha, FeatureEdit::none(), policy, c->beta, options);
    out.command = type_name(CommandType::ItemFine);
    out.targets = policy.targets;
    return out;
  }
  const auto& c = std::get<ItemFeatureCoarse>(command);
  PolicyContext policy{PolicyContext::Mode::Coarse, {}, c.majority};
  bool prediction_short = false;
  if (c.use_prediction) {
    if (!predictor) throw InvalidCommand("target prediction requested but no predictor is loaded");
    if (predictor->categories != ds.num_categories()) {
      throw InvalidArgument("predictor category count does not match the dataset");
    }
    const auto history = data::category_distribution(ds, ds.histories[user].train);
    const auto pred = predict_target_categories(*predictor, history, c.majority,
                                                static_cast<std::size_t>(c.k_targets));
    policy.mode = PolicyContext::Mode::Combined;
    policy.targets = pred.categories;
    prediction_short = pred.short_list;
  }
  auto out = rank(scorer, user, c.alpha, FeatureEdit::none(), policy, c.beta, options);
  out.command = type_name(CommandType::ItemCoarse);
  out.targets = policy.targets;
  out.majority = c.majority;
  out.predicted = c.use_prediction;
  out.prediction_short = prediction_short;
  return out;
}

ControlResult baseline(const model::Scorer& scorer, UserIndex user, const ControlOptions& options) {
  if (user >= scorer.dataset().num_users()) throw InvalidArgument("unknown user index");
  auto out = rank(scorer, user, 0.0, FeatureEdit::none(), std::nullopt, 0.0, options);
  out.command = "baseline";
  return out;
}

}  // namespace ucrs::control
