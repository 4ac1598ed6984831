#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ucrs/data/dataset.hpp"
#include "ucrs/data/distribution.hpp"

namespace ucrs::detect {

/// A user's ranked recommendation list.
struct Slate {
  UserIndex user = 0;
  std::vector<ItemIndex> items;
  /// "baseline" or the command and coefficients that produced the list.
  std::string provenance = "baseline";
  /// Fewer candidates than requested were available.
  bool short_list = false;
};

/// Number of distinct categories among the slate's items.
std::size_t coverage(const data::Dataset& ds, std::span<const ItemIndex> slate);

/// Fraction of slate items carrying category c. Throws InvalidArgument on an
/// empty slate.
double category_share(const data::Dataset& ds, std::span<const ItemIndex> slate, CategoryIndex c);

/// Share of the user's largest train category in the slate. Throws
/// InvalidArgument when the history is empty.
double mcd(const data::Dataset& ds, std::span<const ItemIndex> slate,
           std::span<const ItemIndex> train_history);

/// Share of the target category in the slate.
double tcd(const data::Dataset& ds, std::span<const ItemIndex> slate, CategoryIndex target);

/// Per-item exposure counts of one user group: counts[i] is the number of the
/// group's slates containing item i.
struct GroupExposure {
  std::vector<std::uint64_t> counts;
  std::uint64_t total = 0;

  explicit GroupExposure(std::size_t num_items = 0) : counts(num_items, 0) {}
  void add(std::span<const ItemIndex> slate);
};

/// s = sum_i (a_i/a_n - b_i/b_n) * a_i/(a_i + b_i) over items with a_i + b_i > 0.
/// Throws InvalidArgument if either group has no exposure or sizes differ.
double isolation_index(const GroupExposure& a, const GroupExposure& b);

/// Mean isolation index over all unordered pairs of at least two groups.
double pairwise_isolation(std::span<const GroupExposure> groups);

/// |d - target|_2 - |d - original|_2.
double dis_euc(const data::CategoryDistribution& user, const data::CategoryDistribution& original,
               const data::CategoryDistribution& target);

/// |hits| / |positives|; nullopt when there are no positives.
std::optional<double> recall_at_k(std::span<const ItemIndex> slate,
                                  std::span<const ItemIndex> positives);

/// Binary-gain NDCG with log2(rank + 1) discount; the ideal list holds
/// min(k, |positives|) hits. nullopt when there are no positives.
std::optional<double> ndcg_at_k(std::span<const ItemIndex> slate,
                                std::span<const ItemIndex> positives);

/// NDCG with gain 2 for positives in the target category, 1 for other
/// positives, 0 otherwise. nullopt when there are no positives.
std::optional<double> w_ndcg_at_k(const data::Dataset& ds, std::span<const ItemIndex> slate,
                                  std::span<const ItemIndex> positives, CategoryIndex target);

}  // namespace ucrs::detect
