#pragma once

#include <optional>
#include <string>
#include <variant>

#include "json.hpp"
#include "ucrs/data/dataset.hpp"

namespace ucrs::control {

/// A command that cannot be applied for this user (bad shape, out-of-range
/// coefficient, or a failed precondition such as already owning x-hat).
class InvalidCommand : public InvalidArgument {
 public:
  using InvalidArgument::InvalidArgument;
};

enum class CommandType { UserFine, UserCoarse, ItemFine, ItemCoarse };

const char* type_name(CommandType type);

/// Command as submitted, with names rather than indices.
struct CommandSpec {
  CommandType type = CommandType::ItemFine;
  /// Feature ("gender=F") for user commands, category name for item_fine.
  std::string target;
  std::optional<double> alpha;
  double beta = 0.0;
  int k_targets = 3;
  bool use_prediction = false;

  bool operator==(const CommandSpec&) const = default;
};

/// Throws InvalidCommand on unknown keys, wrong types or missing fields.
CommandSpec parse_command(const nlohmann::json& j);
nlohmann::json to_json(const CommandSpec& spec);

/// More items liked by users with feature x-hat, which the user lacks.
struct UserFeatureFine {
  FeatureIndex target = 0;
  double alpha = 0.0;
};

/// Fewer items driven by the user's own feature x-bar.
struct UserFeatureCoarse {
  FeatureIndex own = 0;
  double alpha = 0.0;
};

/// More items of category h-hat.
struct ItemFeatureFine {
  CategoryIndex target = 0;
  double beta = 0.0;
  double alpha = 0.0;
};

/// Fewer items of the user's largest history category h-bar, optionally
/// steering towards K predicted target categories.
struct ItemFeatureCoarse {
  CategoryIndex majority = 0;
  double beta = 0.0;
  double alpha = 0.0;
  int k_targets = 3;
  bool use_prediction = false;
};

using ControlCommand = std::variant<UserFeatureFine, UserFeatureCoarse, ItemFeatureFine, ItemFeatureCoarse>;

struct CommandDefaults {
  double user_alpha = 0.1;
  double item_alpha = 0.1;
};

/// Resolves names against the dataset and checks the command's preconditions
/// for this user. Throws InvalidCommand.
ControlCommand resolve(const data::Dataset& ds, UserIndex user, const CommandSpec& spec,
                       const CommandDefaults& defaults = {});

}  // namespace ucrs::control
