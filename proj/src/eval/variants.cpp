#include "ucrs/eval/variants.hpp"

#include <cmath>

#include "ucrs/random.hpp"
#include "util/parallel.hpp"

namespace ucrs::eval {

namespace {

struct VariantInfo {
  Variant variant;
  const char* key;
  const char* suffix;
};

constexpr VariantInfo kVariants[] = {
    {Variant::Base, "base", ""},
    {Variant::Random, "random", "Random"},
    {Variant::Diversity, "diversity", "Diversity"},
    {Variant::WoUF, "wouf", "woUF"},
    {Variant::ChangeUF, "changeuf", "changeUF"},
    {Variant::MaskUF, "maskuf", "maskUF"},
    {Variant::WoIF, "woif", "woIF"},
    {Variant::Reranking, "reranking", "Reranking"},
    {Variant::UCI, "uci", "UCI"},
    {Variant::CUCI, "c-uci", "C-UCI"},
    {Variant::FUCI, "f-uci", "F-UCI"},
    {Variant::Fairco, "fairco", "Fairco"},
};

const VariantInfo& info(Variant v) {
  for (const auto& i : kVariants) {
    if (i.variant == v) return i;
  }
  throw InvalidArgument("unknown variant");
}

double cosine(const data::ItemProfile& a, const data::ItemProfile& b) {
  std::size_t shared = 0;
  for (auto c : a.categories) shared += b.has_category(c) ? 1 : 0;
  return static_cast<double>(shared) /
         std::sqrt(static_cast<double>(a.categories.size() * b.categories.size()));
}

const model::Scorer& require(const model::Scorer* s, const char* what) {
  if (!s) throw InvalidArgument(std::string("variant needs the ") + what + " model");
  return *s;
}

detect::Slate to_slate(const control::ControlResult& r) {
  return {r.user, r.ranked.items, r.command == "baseline" ? "baseline" : r.provenance(), r.ranked.short_list};
}

detect::Slate run_one(Variant v, const Models& models, Scenario scenario, const CohortMember& m,
                      const Coefficients& c, const RunOptions& options) {
  using namespace control;
  const ControlOptions copts{options.k, options.candidates};
  const auto& base = require(models.base, "base");
  const auto& ds = base.dataset();
  switch (v) {
    case Variant::Base:
      return to_slate(baseline(base, m.user, copts));
    case Variant::Random: {
      auto cands = candidates_for(ds, m.user, options.candidates);
      Rng rng(options.seed, m.user);
      const auto k = std::min(options.k, cands.size());
      for (std::size_t j = 0; j < k; ++j) {
        std::swap(cands[j], cands[j + rng.below(cands.size() - j)]);
      }
      cands.resize(k);
      return {m.user, cands, "random(seed=" + std::to_string(options.seed) + ")", k < options.k};
    }
    case Variant::Diversity: {
      const auto pool = baseline(base, m.user, {kDiversityPool, options.candidates});
      auto items = diversify(ds, pool.ranked.items, pool.ranked.base, options.k);
      const bool short_list = items.size() < options.k;
      return {m.user, std::move(items), "diversity(pool=100,weight=0.5)", short_list};
    }
    case Variant::WoUF:
      return to_slate(baseline(require(models.without_user_features, "without-user-features"), m.user, copts));
    case Variant::WoIF:
      return to_slate(baseline(require(models.without_item_features, "without-item-features"), m.user, copts));
    case Variant::ChangeUF:
      return to_slate(apply_control(base, nullptr, m.user, UserFeatureFine{*m.target_feature, 0.0}, copts));
    case Variant::MaskUF:
      return to_slate(apply_control(base, nullptr, m.user, UserFeatureCoarse{*m.own_feature, 0.0}, copts));
    case Variant::UCI:
      if (scenario == Scenario::UserFine) {
        return to_slate(apply_control(base, nullptr, m.user, UserFeatureFine{*m.target_feature, c.alpha}, copts));
      }
      return to_slate(apply_control(base, nullptr, m.user, UserFeatureCoarse{*m.own_feature, c.alpha}, copts));
    case Variant::Reranking:
      return to_slate(apply_control(base, nullptr, m.user,
                                    ItemFeatureCoarse{*m.majority, c.beta, 0.0, 1, false}, copts));
    case Variant::CUCI:
      return to_slate(apply_control(base, models.predictor, m.user,
                                    ItemFeatureCoarse{*m.majority, c.beta, c.alpha,
                                                      static_cast<int>(c.k_targets), true},
                                    copts));
    case Variant::FUCI:
      return to_slate(apply_control(base, nullptr, m.user,
                                    ItemFeatureFine{*m.target_category, c.beta, c.alpha}, copts));
    case Variant::Fairco:
      break;
  }
  throw Unsupported("Fairco is an external ranking algorithm and is not bundled; "
                    "plug an implementation into eval::run_variant");
}

}  // namespace

std::string variant_key(Variant v) { return info(v).key; }

Variant parse_variant(const std::string& key) {
  for (const auto& i : kVariants) {
    if (key == i.key) return i.variant;
  }
  throw InvalidArgument("unknown variant '" + key + "'");
}

std::string variant_label(Variant v, model::ModelKind kind) {
  if (v == Variant::Random) return "Random";
  std::string label = model::kind_name(kind);
  for (auto& ch : label) ch = static_cast<char>(std::toupper(static_cast<unsigned char>(ch)));
  const std::string suffix = info(v).suffix;
  return suffix.empty() ? label : label + "-" + suffix;
}

bool applicable(Variant v, Scenario s) {
  switch (v) {
    case Variant::Base:
    case Variant::Random:
    case Variant::Diversity:
    case Variant::Fairco:
      return true;
    case Variant::WoUF:
    case Variant::UCI:
      return is_user_scenario(s);
    case Variant::ChangeUF:
      return s == Scenario::UserFine;
    case Variant::MaskUF:
      return s == Scenario::UserCoarse;
    case Variant::WoIF:
    case Variant::Reranking:
    case Variant::CUCI:
    case Variant::FUCI:
      return !is_user_scenario(s);
  }
  return false;
}

bool uses_alpha(Variant v) { return v == Variant::UCI || v == Variant::CUCI || v == Variant::FUCI; }
bool uses_beta(Variant v) { return v == Variant::Reranking || v == Variant::CUCI || v == Variant::FUCI; }
bool uses_k_targets(Variant v) { return v == Variant::CUCI; }

std::vector<ItemIndex> diversify(const data::Dataset& ds, std::span<const ItemIndex> pool,
                                 std::span<const double> pool_scores, std::size_t k) {
  if (pool.size() != pool_scores.size()) throw InvalidArgument("pool and score sizes differ");
  std::vector<ItemIndex> chosen;
  std::vector<bool> used(pool.size(), false);
  // similarity_sum[j]: summed cosine of pool item j to the chosen items
  std::vector<double> similarity_sum(pool.size(), 0.0);
  while (chosen.size() < std::min(k, pool.size())) {
    std::size_t best = pool.size();
    double best_value = 0.0;
    for (std::size_t j = 0; j < pool.size(); ++j) {
      if (used[j]) continue;
      const double dissimilarity =
          chosen.empty() ? 1.0 : 1.0 - similarity_sum[j] / static_cast<double>(chosen.size());
      const double value = kDiversityWeight * pool_scores[j] + (1.0 - kDiversityWeight) * dissimilarity;
      if (best == pool.size() || value > best_value) {
        best = j;
        best_value = value;
      }
    }
    used[best] = true;
    chosen.push_back(pool[best]);
    for (std::size_t j = 0; j < pool.size(); ++j) {
      if (!used[j]) similarity_sum[j] += cosine(ds.items[pool[j]], ds.items[pool[best]]);
    }
  }
  return chosen;
}

std::vector<detect::Slate> run_variant(Variant v, const Models& models, const Cohort& cohort,
                                       const Coefficients& coefficients, const RunOptions& options) {
  if (!applicable(v, cohort.scenario)) {
    throw InvalidArgument("variant " + variant_key(v) + " does not apply to scenario " +
                          scenario_name(cohort.scenario));
  }
  if (v == Variant::Fairco) run_one(v, models, cohort.scenario, {}, coefficients, options);
  require(models.base, "base");
  std::vector<detect::Slate> out(cohort.members.size());
  detail::parallel_for(cohort.members.size(), [&](std::size_t j) {
    out[j] = run_one(v, models, cohort.scenario, cohort.members[j], coefficients, options);
  });
  return out;
}

}  // namespace ucrs::eval
