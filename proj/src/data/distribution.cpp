#include "ucrs/data/distribution.hpp"

#include <algorithm>

namespace ucrs::data {

bool CategoryDistribution::empty() const {
  return std::all_of(probs.begin(), probs.end(), [](double p) { return p == 0.0; });
}

std::optional<CategoryIndex> CategoryDistribution::majority() const {
  if (empty()) return std::nullopt;
  return static_cast<CategoryIndex>(argmax_lowest(probs));
}

CategoryDistribution category_distribution(const Dataset& dataset,
                                           std::span<const ItemIndex> items) {
  CategoryDistribution dist{std::vector<double>(dataset.num_categories(), 0.0)};
  if (items.empty()) return dist;
  for (auto i : items) {
    const auto& cats = dataset.items.at(i).categories;
    const double share = 1.0 / static_cast<double>(cats.size());
    for (auto c : cats) dist.probs[c] += share;
  }
  const double n = static_cast<double>(items.size());
  for (auto& p : dist.probs) p /= n;
  return dist;
}

CategoryDistribution average_distribution(std::span<const CategoryDistribution> dists,
                                          std::size_t num_categories) {
  std::vector<CompensatedSum> sums(num_categories);
  std::size_t n = 0;
  for (const auto& d : dists) {
    if (d.empty()) continue;
    ++n;
    for (std::size_t c = 0; c < num_categories; ++c) sums[c].add(d.probs.at(c));
  }
  CategoryDistribution out{std::vector<double>(num_categories, 0.0)};
  if (n == 0) return out;
  for (std::size_t c = 0; c < num_categories; ++c) out.probs[c] = sums[c].sum() / static_cast<double>(n);
  return out;
}

std::vector<UserIndex> select_preference_shift_users(const Dataset& dataset) {
  std::vector<UserIndex> out;
  for (UserIndex u = 0; u < dataset.num_users(); ++u) {
    const auto& h = dataset.histories.at(u);
    if (h.train.empty() || h.test.empty()) continue;
    const auto before = category_distribution(dataset, h.train).majority();
    const auto after = category_distribution(dataset, h.test).majority();
    if (before != after) out.push_back(u);
  }
  return out;
}

}  // namespace ucrs::data
