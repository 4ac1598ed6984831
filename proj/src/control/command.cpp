#include "ucrs/control/command.hpp"

#include <cmath>
#include <set>

#include "ucrs/data/distribution.hpp"

namespace ucrs::control {

namespace {

void check_unit(const char* name, double v) {
  if (!std::isfinite(v) || v < 0.0 || v > 1.0) {
    throw InvalidCommand(std::string(name) + " must lie in [0, 1], got " + std::to_string(v));
  }
}

}  // namespace

const char* type_name(CommandType type) {
  switch (type) {
    case CommandType::UserFine: return "user_fine";
    case CommandType::UserCoarse: return "user_coarse";
    case CommandType::ItemFine: return "item_fine";
    case CommandType::ItemCoarse: return "item_coarse";
  }
  return "?";
}

CommandSpec parse_command(const nlohmann::json& j) {
  static const std::set<std::string> kKeys{"type", "target", "alpha", "beta", "k_targets",
                                           "use_prediction"};
  if (!j.is_object()) throw InvalidCommand("command must be a JSON object");
  for (const auto& [key, _] : j.items()) {
    if (!kKeys.contains(key)) throw InvalidCommand("unknown command field '" + key + "'");
  }
  CommandSpec spec;
  try {
    const auto type = j.at("type").get<std::string>();
    if (type == "user_fine") spec.type = CommandType::UserFine;
    else if (type == "user_coarse") spec.type = CommandType::UserCoarse;
    else if (type == "item_fine") spec.type = CommandType::ItemFine;
    else if (type == "item_coarse") spec.type = CommandType::ItemCoarse;
    else throw InvalidCommand("unknown command type '" + type + "'");
    if (j.contains("target")) spec.target = j.at("target").get<std::string>();
    if (j.contains("alpha") && !j.at("alpha").is_null()) spec.alpha = j.at("alpha").get<double>();
    if (j.contains("beta")) spec.beta = j.at("beta").get<double>();
    if (j.contains("k_targets")) spec.k_targets = j.at("k_targets").get<int>();
    if (j.contains("use_prediction")) spec.use_prediction = j.at("use_prediction").get<bool>();
  } catch (const nlohmann::json::out_of_range&) {
    throw InvalidCommand("command needs a 'type' field");
  } catch (const nlohmann::json::type_error& e) {
    throw InvalidCommand(std::string("command field has the wrong type: ") + e.what());
  }
  const bool needs_target = spec.type != CommandType::ItemCoarse;
  if (needs_target && spec.target.empty()) {
    throw InvalidCommand(std::string(type_name(spec.type)) + " needs a 'target'");
  }
  return spec;
}

nlohmann::json to_json(const CommandSpec& spec) {
  nlohmann::json j = {{"type", type_name(spec.type)}};
  if (!spec.target.empty()) j["target"] = spec.target;
  if (spec.alpha) j["alpha"] = *spec.alpha;
  if (spec.type == CommandType::ItemFine || spec.type == CommandType::ItemCoarse) j["beta"] = spec.beta;
  if (spec.type == CommandType::ItemCoarse) {
    j["k_targets"] = spec.k_targets;
    j["use_prediction"] = spec.use_prediction;
  }
  return j;
}

ControlCommand resolve(const data::Dataset& ds, UserIndex user, const CommandSpec& spec,
                       const CommandDefaults& defaults) {
  if (user >= ds.num_users()) throw InvalidArgument("unknown user index");
  const bool user_command = spec.type == CommandType::UserFine || spec.type == CommandType::UserCoarse;
  const double alpha = spec.alpha.value_or(user_command ? defaults.user_alpha : defaults.item_alpha);
  check_unit("alpha", alpha);
  check_unit("beta", spec.beta);

  if (user_command) {
    if (ds.attribute_groups.empty()) throw InvalidCommand("dataset has no user features");
    const auto f = ds.find_feature(spec.target);
    if (!f) throw InvalidCommand("unknown user feature '" + spec.target + "'");
    const bool owns = ds.user_has_feature(user, *f);
    if (spec.type == CommandType::UserFine) {
      if (owns) throw InvalidCommand("user already has feature '" + spec.target + "'");
      return UserFeatureFine{*f, alpha};
    }
    if (!owns) throw InvalidCommand("user does not have feature '" + spec.target + "'");
    return UserFeatureCoarse{*f, alpha};
  }

  if (spec.type == CommandType::ItemFine) {
    const auto c = ds.find_category(spec.target);
    if (!c) throw InvalidCommand("unknown category '" + spec.target + "'");
    return ItemFeatureFine{*c, spec.beta, alpha};
  }

  if (spec.k_targets < 1 || spec.k_targets > 5) throw InvalidCommand("k_targets must be in 1..5");
  const auto majority = data::category_distribution(ds, ds.histories[user].train).majority();
  if (!majority) throw InvalidCommand("user has no history to escape from");
  if (!spec.target.empty() && spec.target != ds.category_names[*majority]) {
    throw InvalidCommand("'" + spec.target + "' is not the user's largest category");
  }
  return ItemFeatureCoarse{*majority, spec.beta, alpha, spec.k_targets, spec.use_prediction};
}

}  // namespace ucrs::control
