#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "ucrs/data/dataset.hpp"
#include "ucrs/data/distribution.hpp"
#include "ucrs/detect/metrics.hpp"

namespace ucrs::detect {

/// Severity rule version reported alongside every level.
inline constexpr int kSeverityRuleVersion = 1;
/// Coverage at which the coverage signal reaches zero.
inline constexpr double kReferenceCategories = 10.0;

struct BubbleReport {
  double coverage = 0.0;
  double iso_index = 0.0;
  double mcd = 0.0;
  int severity = 1;
  std::int64_t window_start = 0;
  std::int64_t window_end = 0;
};

/// mean(clamp(1 - coverage / 10, 0, 1), iso, mcd)
double severity_score(double coverage, double iso_index, double mcd);

/// Thresholds 0.2 / 0.4 / 0.6 / 0.8 on severity_score map to levels 1..5.
int severity_level(double score);

/// Level of the latest report, raised by one (capped at 5) when its MCD is
/// above the previous report's. Throws InvalidArgument on an empty history.
int severity(std::span<const BubbleReport> history);

/// Assignment of users to named groups. group[u] == kNoGroup leaves u out.
struct Grouping {
  static constexpr std::size_t kNoGroup = static_cast<std::size_t>(-1);
  std::vector<std::string> names;
  std::vector<std::size_t> group;
};

/// Groups users by an attribute group name (e.g. "gender") or by
/// "majority-category" (largest train category; users without train history
/// are left out). Throws Unsupported for an unknown attribute.
Grouping group_users(const data::Dataset& ds, const std::string& by);

/// Per-group exposure built from the given slates (users outside every group
/// are skipped). Groups without any exposure are dropped.
std::vector<GroupExposure> group_exposures(const data::Dataset& ds, std::span<const Slate> slates,
                                           const Grouping& grouping);

struct GroupAmplification {
  std::string group;
  std::size_t users = 0;
  std::vector<double> history_share;
  std::vector<double> recommendation_share;
  CategoryIndex majority = 0;
  /// recommendation_share[majority] - history_share[majority]
  double majority_delta = 0.0;
  /// Users whose slate over-represents their own largest history category.
  std::size_t amplified_users = 0;
};

/// Per group, the average history and recommendation category distributions
/// and the change on the group's largest history category. Users with an
/// empty history or slate distribution are skipped.
std::vector<GroupAmplification> bias_amplification_report(
    std::span<const data::CategoryDistribution> history,
    std::span<const data::CategoryDistribution> slates, const Grouping& grouping,
    std::size_t num_categories);

}  // namespace ucrs::detect
