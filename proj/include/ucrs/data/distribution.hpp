#pragma once

#include <optional>
#include <span>
#include <vector>

#include "ucrs/data/dataset.hpp"

namespace ucrs::data {

/// Distribution over the M item categories. All-zero for an empty item set.
struct CategoryDistribution {
  std::vector<double> probs;

  bool empty() const;
  std::size_t size() const { return probs.size(); }
  /// Largest category, ties to the lowest index. nullopt when empty.
  std::optional<CategoryIndex> majority() const;
};

/// Each item's multi-hot category vector is L1-normalized, then the vectors are
/// averaged over the items.
CategoryDistribution category_distribution(const Dataset& dataset,
                                           std::span<const ItemIndex> items);

/// Element-wise mean of several distributions (empty ones skipped).
CategoryDistribution average_distribution(std::span<const CategoryDistribution> dists,
                                          std::size_t num_categories);

/// Users whose train-majority category differs from their test-majority category.
/// Users with an empty train or test split are excluded.
std::vector<UserIndex> select_preference_shift_users(const Dataset& dataset);

}  // namespace ucrs::data
