#pragma once

#include <optional>
#include <string>
#include <vector>

#include "ucrs/control/command.hpp"
#include "ucrs/control/inference.hpp"
#include "ucrs/control/predictor.hpp"
#include "ucrs/model/score.hpp"

namespace ucrs::control {

enum class CandidateMode {
  /// All items minus train and validation positives.
  Test,
  /// All items minus train positives.
  Validation,
};

struct ControlOptions {
  std::size_t k = 10;
  CandidateMode candidates = CandidateMode::Test;
};

struct ControlResult {
  UserIndex user = 0;
  RankedList ranked;
  std::string command;  // type name, or "baseline"
  double alpha = 0.0;
  double beta = 0.0;
  FeatureEdit edit;
  /// Categories rewarded by the policy (h-hat or predicted targets).
  std::vector<CategoryIndex> targets;
  /// h-bar for coarse item commands.
  std::optional<CategoryIndex> majority;
  bool predicted = false;
  bool prediction_short = false;

  /// Compact description, e.g. "item_fine(alpha=0.1,beta=0.05,targets=[3])".
  std::string provenance() const;
};

std::vector<ItemIndex> candidates_for(const data::Dataset& ds, UserIndex user, CandidateMode mode);

/// User-feature commands rank the counterfactual scores with the command's
/// feature edit and alpha. Item-feature commands rank counterfactual scores
/// (no edit) through the policy Y + beta r(i); coarse commands with prediction
/// first predict K target categories. `predictor` may be null unless a command
/// asks for prediction (InvalidCommand otherwise).
ControlResult apply_control(const model::Scorer& scorer, const CategoryPredictor* predictor,
                            UserIndex user, const ControlCommand& command,
                            const ControlOptions& options = {});

/// Uncontrolled top-k of f(u, i).
ControlResult baseline(const model::Scorer& scorer, UserIndex user, const ControlOptions& options = {});

}  // namespace ucrs::control
