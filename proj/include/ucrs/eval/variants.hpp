#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ucrs/control/apply.hpp"
#include "ucrs/detect/metrics.hpp"
#include "ucrs/eval/cohort.hpp"

namespace ucrs::eval {

enum class Variant {
  Base,
  Random,
  Diversity,
  WoUF,
  ChangeUF,
  MaskUF,
  WoIF,
  Reranking,
  UCI,
  CUCI,
  FUCI,
  Fairco,
};

/// Config spelling: "base", "random", "diversity", "wouf", "changeuf", "maskuf",
/// "woif", "reranking", "uci", "c-uci", "f-uci", "fairco".
std::string variant_key(Variant v);
Variant parse_variant(const std::string& key);
/// Table label, e.g. "FM", "FM-woUF", "NFM-C-UCI", "Random".
std::string variant_label(Variant v, model::ModelKind kind);

bool applicable(Variant v, Scenario s);
/// Whether alpha / beta / K influence the variant's slates.
bool uses_alpha(Variant v);
bool uses_beta(Variant v);
bool uses_k_targets(Variant v);

/// Greedy re-ranking pool size and base-score weight of the Diversity variant.
inline constexpr std::size_t kDiversityPool = 100;
inline constexpr double kDiversityWeight = 0.5;

/// Trained models a variant may draw on. Only `base` is always required.
struct Models {
  const model::Scorer* base = nullptr;
  const model::Scorer* without_user_features = nullptr;
  const model::Scorer* without_item_features = nullptr;
  const control::CategoryPredictor* predictor = nullptr;
};

struct Coefficients {
  double alpha = 0.1;
  double beta = 0.05;
  std::size_t k_targets = 3;
};

struct RunOptions {
  std::size_t k = 10;
  control::CandidateMode candidates = control::CandidateMode::Test;
  std::uint64_t seed = 1;
};

/// One slate per cohort member, in cohort order. Throws InvalidArgument when the
/// variant does not apply to the scenario or a needed model is missing, and
/// Unsupported for Fairco.
std::vector<detect::Slate> run_variant(Variant v, const Models& models, const Cohort& cohort,
                                       const Coefficients& coefficients, const RunOptions& options = {});

/// Diversity re-ranking of one user's slate.
std::vector<ItemIndex> diversify(const data::Dataset& ds, std::span<const ItemIndex> pool,
                                 std::span<const double> pool_scores, std::size_t k);

}  // namespace ucrs::eval
