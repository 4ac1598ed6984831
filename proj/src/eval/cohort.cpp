#include "ucrs/eval/cohort.hpp"

#include "ucrs/data/distribution.hpp"

namespace ucrs::eval {

std::string scenario_name(Scenario s) {
  switch (s) {
    case Scenario::UserFine: return "user_fine";
    case Scenario::UserCoarse: return "user_coarse";
    case Scenario::ItemFine: return "item_fine";
    case Scenario::ItemCoarse: return "item_coarse";
  }
  return "?";
}

Scenario parse_scenario(const std::string& name) {
  for (auto s : {Scenario::UserFine, Scenario::UserCoarse, Scenario::ItemFine, Scenario::ItemCoarse}) {
    if (scenario_name(s) == name) return s;
  }
  throw InvalidArgument("unknown scenario '" + name + "'");
}

bool is_user_scenario(Scenario s) { return s == Scenario::UserFine || s == Scenario::UserCoarse; }

Cohort select_cohort(const data::Dataset& ds, Scenario scenario, const std::string& attribute) {
  Cohort cohort;
  cohort.scenario = scenario;
  if (is_user_scenario(scenario)) {
    const auto group = ds.find_group(attribute);
    if (!group) {
      throw Unsupported("scenario " + scenario_name(scenario) + " needs user attribute '" + attribute +
                        "', which the dataset does not have");
    }
    const auto& g = ds.attribute_groups[*group];
    if (g.values.size() < 2) throw Unsupported("attribute '" + attribute + "' has a single value");
    cohort.attribute = attribute;
    for (UserIndex u = 0; u < ds.num_users(); ++u) {
      if (ds.histories[u].train.empty()) continue;
      CohortMember m;
      m.user = u;
      m.own_feature = ds.users[u].features[*group];
      const auto offset = *m.own_feature - g.first_feature;
      m.target_feature = static_cast<FeatureIndex>(g.first_feature + (offset + 1) % g.values.size());
      m.majority = data::category_distribution(ds, ds.histories[u].train).majority();
      cohort.members.push_back(m);
    }
    return cohort;
  }
  for (auto u : data::select_preference_shift_users(ds)) {
    CohortMember m;
    m.user = u;
    m.majority = data::category_distribution(ds, ds.histories[u].train).majority();
    m.target_category = data::category_distribution(ds, ds.histories[u].test).majority();
    cohort.members.push_back(m);
  }
  return cohort;
}

}  // namespace ucrs::eval
