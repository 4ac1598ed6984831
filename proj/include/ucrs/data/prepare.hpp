#pragma once

#include <cstdint>
#include <vector>

#include "ucrs/data/dataset.hpp"
#include "ucrs/data/io.hpp"

namespace ucrs::data {

/// Maximal subset in which every user and every item has at least k
/// interactions. Removal is iterated to a fixpoint; relative row order is kept.
std::vector<RawInteraction> kcore_filter(const std::vector<RawInteraction>& interactions,
                                         int k);

struct SplitFractions {
  double train = 0.8;
  double valid = 0.1;
};

struct RawSplit {
  std::vector<RawInteraction> train;
  std::vector<RawInteraction> valid;
  std::vector<RawInteraction> test;
};

/// Keeps ratings >= positive_threshold, sorts globally by (timestamp, user_id,
/// item_id) and cuts floor(0.8n) / floor(0.1n) / remainder.
RawSplit binarize_and_split(const std::vector<RawInteraction>& interactions,
                            int positive_threshold = 4, SplitFractions fractions = {});

/// Assigns dense indices (lexical order of raw ids over the positives) and
/// attaches profiles. Throws Error if a user lacks features while a feature
/// table is given, or an item lacks categories.
Dataset build_dataset(const RawSplit& split, const std::vector<UserFeatureRow>& user_features,
                      const std::vector<ItemCategoryRow>& item_categories);

/// Drops interactions whose user (when features are provided) or item has no
/// profile row. Returns the number of rows removed.
std::size_t restrict_to_profiles(std::vector<RawInteraction>& interactions,
                                 const std::vector<UserFeatureRow>& user_features,
                                 const std::vector<ItemCategoryRow>& item_categories);

/// One uniformly drawn unobserved item per training positive. "Unobserved"
/// excludes the user's positives in every split. Deterministic in (dataset,
/// seed). Throws Error naming the user if their positives cover the catalog.
std::vector<Interaction> sample_negatives(const Dataset& dataset, std::uint64_t seed);

struct PrepareOptions {
  int kcore = 10;
  int positive_threshold = 4;
  SplitFractions fractions;
  SingleLabel single_label = SingleLabel::Off;
};

struct PrepareStats {
  std::size_t raw_rows = 0;
  std::size_t dropped_missing_profile = 0;
  std::size_t after_kcore = 0;
  std::size_t positives = 0;
};

/// restrict_to_profiles -> kcore_filter -> binarize_and_split -> build_dataset.
Dataset prepare(RawCorpus corpus, const PrepareOptions& options, PrepareStats* stats = nullptr);

}  // namespace ucrs::data
