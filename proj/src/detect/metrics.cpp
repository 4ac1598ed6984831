#include "ucrs/detect/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <functional>

namespace ucrs::detect {

namespace {

bool contains(std::span<const ItemIndex> items, ItemIndex i) {
  return std::find(items.begin(), items.end(), i) != items.end();
}

double discount(std::size_t rank) { return 1.0 / std::log2(static_cast<double>(rank) + 2.0); }

std::optional<double> graded_ndcg(std::span<const double> gains, std::vector<double> ideal_pool) {
  std::sort(ideal_pool.begin(), ideal_pool.end(), std::greater<>());
  double idcg = 0.0;
  for (std::size_t r = 0; r < std::min(gains.size(), ideal_pool.size()); ++r) {
    idcg += ideal_pool[r] * discount(r);
  }
  if (idcg == 0.0) return std::nullopt;
  double dcg = 0.0;
  for (std::size_t r = 0; r < gains.size(); ++r) dcg += gains[r] * discount(r);
  return dcg / idcg;
}

}  // namespace

std::size_t coverage(const data::Dataset& ds, std::span<const ItemIndex> slate) {
  std::vector<std::uint8_t> seen(ds.num_categories(), 0);
  std::size_t n = 0;
  for (auto i : slate) {
    for (auto c : ds.items.at(i).categories) {
      if (!seen[c]) {
        seen[c] = 1;
        ++n;
      }
    }
  }
  return n;
}

double category_share(const data::Dataset& ds, std::span<const ItemIndex> slate, CategoryIndex c) {
  if (slate.empty()) throw InvalidArgument("category share of an empty slate");
  std::size_t hits = 0;
  for (auto i : slate) hits += ds.items.at(i).has_category(c) ? 1 : 0;
  return static_cast<double>(hits) / static_cast<double>(slate.size());
}

double mcd(const data::Dataset& ds, std::span<const ItemIndex> slate,
           std::span<const ItemIndex> train_history) {
  const auto majority = data::category_distribution(ds, train_history).majority();
  if (!majority) throw InvalidArgument("MCD needs a non-empty train history");
  return category_share(ds, slate, *majority);
}

double tcd(const data::Dataset& ds, std::span<const ItemIndex> slate, CategoryIndex target) {
  return category_share(ds, slate, target);
}

void GroupExposure::add(std::span<const ItemIndex> slate) {
  for (auto i : slate) {
    ++counts.at(i);
    ++total;
  }
}

double isolation_index(const GroupExposure& a, const GroupExposure& b) {
  if (a.counts.size() != b.counts.size()) throw InvalidArgument("exposure vectors differ in size");
  if (a.total == 0 || b.total == 0) throw InvalidArgument("isolation index undefined for a group with no exposure");
  const double an = static_cast<double>(a.total);
  const double bn = static_cast<double>(b.total);
  CompensatedSum s;
  for (std::size_t i = 0; i < a.counts.size(); ++i) {
    const double ai = static_cast<double>(a.counts[i]);
    const double bi = static_cast<double>(b.counts[i]);
    if (ai + bi == 0) continue;
    s.add((ai / an - bi / bn) * (ai / (ai + bi)));
  }
  return s.sum();
}

double pairwise_isolation(std::span<const GroupExposure> groups) {
  if (groups.size() < 2) throw InvalidArgument("pairwise isolation needs at least two groups");
  CompensatedSum s;
  for (std::size_t x = 0; x < groups.size(); ++x) {
    for (std::size_t y = x + 1; y < groups.size(); ++y) s.add(isolation_index(groups[x], groups[y]));
  }
  return s.mean();
}

double dis_euc(const data::CategoryDistribution& user, const data::CategoryDistribution& original,
               const data::CategoryDistribution& target) {
  if (user.size() != original.size() || user.size() != target.size()) {
    throw InvalidArgument("DIS-EUC distributions differ in dimension");
  }
  double to_target = 0.0, to_original = 0.0;
  for (std::size_t c = 0; c < user.size(); ++c) {
    to_target += (user.probs[c] - target.probs[c]) * (user.probs[c] - target.probs[c]);
    to_original += (user.probs[c] - original.probs[c]) * (user.probs[c] - original.probs[c]);
  }
  return std::sqrt(to_target) - std::sqrt(to_original);
}

std::optional<double> recall_at_k(std::span<const ItemIndex> slate,
                                  std::span<const ItemIndex> positives) {
  if (positives.empty()) return std::nullopt;
  std::size_t hits = 0;
  for (auto i : slate) hits += contains(positives, i) ? 1 : 0;
  return static_cast<double>(hits) / static_cast<double>(positives.size());
}

std::optional<double> ndcg_at_k(std::span<const ItemIndex> slate,
                                std::span<const ItemIndex> positives) {
  std::vector<double> gains;
  for (auto i : slate) gains.push_back(contains(positives, i) ? 1.0 : 0.0);
  return graded_ndcg(gains, std::vector<double>(positives.size(), 1.0));
}

std::optional<double> w_ndcg_at_k(const data::Dataset& ds, std::span<const ItemIndex> slate,
                                  std::span<const ItemIndex> positives, CategoryIndex target) {
  const auto gain = [&](ItemIndex i) { return ds.items.at(i).has_category(target) ? 2.0 : 1.0; };
  std::vector<double> gains;
  for (auto i : slate) gains.push_back(contains(positives, i) ? gain(i) : 0.0);
  std::vector<double> pool;
  for (auto i : positives) pool.push_back(gain(i));
  return graded_ndcg(gains, pool);
}

}  // namespace ucrs::detect
