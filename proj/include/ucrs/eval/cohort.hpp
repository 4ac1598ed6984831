#pragma once

#include <optional>
#include <string>
#include <vector>

#include "ucrs/data/dataset.hpp"

namespace ucrs::eval {

enum class Scenario { UserFine, UserCoarse, ItemFine, ItemCoarse };

std::string scenario_name(Scenario s);
/// "user_fine", "user_coarse", "item_fine", "item_coarse"; InvalidArgument otherwise.
Scenario parse_scenario(const std::string& name);

bool is_user_scenario(Scenario s);

/// One evaluated user and the command parameters the scenario assigns to them.
struct CohortMember {
  UserIndex user = 0;
  /// User scenarios: the user's own value of the scenario attribute.
  std::optional<FeatureIndex> own_feature;
  /// user_fine: the next value of the attribute (the opposite one for binary groups).
  std::optional<FeatureIndex> target_feature;
  /// Largest train category.
  std::optional<CategoryIndex> majority;
  /// Item scenarios: largest test category.
  std::optional<CategoryIndex> target_category;

  bool operator==(const CohortMember&) const = default;
};

struct Cohort {
  Scenario scenario = Scenario::ItemFine;
  /// Attribute group of user scenarios, empty for item scenarios.
  std::string attribute;
  std::vector<CohortMember> members;
};

/// User scenarios take every user with a train history and pair them with the
/// named attribute. Item scenarios take the preference-shift users. Throws
/// Unsupported when a user scenario names an attribute the dataset lacks.
Cohort select_cohort(const data::Dataset& ds, Scenario scenario, const std::string& attribute = "");

}  // namespace ucrs::eval
