#include "ucrs/detect/bubble.hpp"

#include <algorithm>

namespace ucrs::detect {

double severity_score(double coverage, double iso_index, double mcd) {
  const double narrow = std::clamp(1.0 - coverage / kReferenceCategories, 0.0, 1.0);
  return (narrow + iso_index + mcd) / 3.0;
}

int severity_level(double score) {
  static constexpr double kThresholds[] = {0.2, 0.4, 0.6, 0.8};
  int level = 1;
  for (double t : kThresholds) {
    if (score >= t) ++level;
  }
  return level;
}

int severity(std::span<const BubbleReport> history) {
  if (history.empty()) throw InvalidArgument("severity needs at least one report");
  const auto& last = history.back();
  int level = severity_level(severity_score(last.coverage, last.iso_index, last.mcd));
  if (history.size() >= 2 && last.mcd > history[history.size() - 2].mcd) ++level;
  return std::min(level, 5);
}

Grouping group_users(const data::Dataset& ds, const std::string& by) {
  Grouping g;
  g.group.assign(ds.num_users(), Grouping::kNoGroup);
  if (by == "majority-category") {
    g.names = ds.category_names;
    for (UserIndex u = 0; u < ds.num_users(); ++u) {
      const auto m = data::category_distribution(ds, ds.histories[u].train).majority();
      if (m) g.group[u] = *m;
    }
    return g;
  }
  const auto gi = ds.find_group(by);
  if (!gi) throw Unsupported("dataset has no user attribute '" + by + "'");
  const auto& attr = ds.attribute_groups[*gi];
  g.names = attr.values;
  for (UserIndex u = 0; u < ds.num_users(); ++u) {
    g.group[u] = ds.users[u].features.at(*gi) - attr.first_feature;
  }
  return g;
}

std::vector<GroupExposure> group_exposures(const data::Dataset& ds, std::span<const Slate> slates,
                                           const Grouping& grouping) {
  std::vector<GroupExposure> groups(grouping.names.size(), GroupExposure(ds.num_items()));
  for (const auto& s : slates) {
    const auto g = grouping.group.at(s.user);
    if (g != Grouping::kNoGroup) groups[g].add(s.items);
  }
  std::erase_if(groups, [](const GroupExposure& e) { return e.total == 0; });
  return groups;
}

std::vector<GroupAmplification> bias_amplification_report(
    std::span<const data::CategoryDistribution> history,
    std::span<const data::CategoryDistribution> slates, const Grouping& grouping,
    std::size_t num_categories) {
  if (history.size() != slates.size() || history.size() != grouping.group.size()) {
    throw InvalidArgument("history, slate and grouping sizes differ");
  }
  std::vector<std::vector<data::CategoryDistribution>> hist(grouping.names.size());
  std::vector<std::vector<data::CategoryDistribution>> recs(grouping.names.size());
  std::vector<GroupAmplification> out(grouping.names.size());
  for (std::size_t u = 0; u < history.size(); ++u) {
    const auto g = grouping.group[u];
    if (g == Grouping::kNoGroup || history[u].empty() || slates[u].empty()) continue;
    hist[g].push_back(history[u]);
    recs[g].push_back(slates[u]);
    const auto m = *history[u].majority();
    if (slates[u].probs[m] > history[u].probs[m]) ++out[g].amplified_users;
  }
  for (std::size_t g = 0; g < out.size(); ++g) {
    auto& row = out[g];
    row.group = grouping.names[g];
    row.users = hist[g].size();
    row.history_share = data::average_distribution(hist[g], num_categories).probs;
    row.recommendation_share = data::average_distribution(recs[g], num_categories).probs;
    row.majority = static_cast<CategoryIndex>(argmax_lowest(row.history_share));
    row.majority_delta = row.recommendation_share[row.majority] - row.history_share[row.majority];
  }
  return out;
}

}  // namespace ucrs::detect
