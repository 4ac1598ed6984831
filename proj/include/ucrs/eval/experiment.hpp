#pragma once

#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "ucrs/control/predictor.hpp"
#include "ucrs/eval/table.hpp"
#include "ucrs/eval/variants.hpp"
#include "ucrs/model/train.hpp"

namespace ucrs::eval {

struct ExperimentConfig {
  std::filesystem::path dataset;
  Scenario scenario = Scenario::ItemFine;
  /// Attribute group of user scenarios ("gender", "age", ...).
  std::string attribute;
  model::ModelKind kind = model::ModelKind::FM;
  std::vector<Variant> variants;

  std::vector<double> alpha_grid{0.0, 0.1, 0.2, 0.3, 0.4, 0.5};
  std::vector<double> beta_grid{0.0, 0.01, 0.02, 0.03, 0.04, 0.05, 0.06, 0.07, 0.08, 0.09, 0.1};
  std::vector<std::size_t> k_grid{1, 2, 3, 4, 5};
  std::vector<double> learning_rate_grid{0.05};
  /// NFM hidden size; ignored for FM.
  std::vector<std::size_t> hidden_grid{16};
  std::vector<double> l2_grid{0.0};
  std::vector<std::size_t> predictor_hidden_grid{16};
  std::vector<std::uint64_t> seeds{1};
  std::size_t k = 10;

  /// Template for every training run; grid values and seeds override it.
  model::TrainConfig train;
  control::PredictorConfig predictor;

  /// Parameters to sweep on the selected models ("alpha", "beta").
  std::vector<std::string> sweeps;
};

/// Throws InvalidArgument on empty grids or values outside alpha in [0, 0.5],
/// beta in [0, 0.1], K in 1..5, and on variants that do not fit the scenario.
void validate(const ExperimentConfig& config);

/// Reads exp.yaml. A relative dataset path resolves against the file's directory.
ExperimentConfig load_experiment_config(const std::filesystem::path& path);

/// One evaluated grid point.
struct GridPoint {
  nlohmann::json params;
  double valid_recall = 0.0;
};

struct Selection {
  std::size_t index = 0;
  /// Another point reached a validation Recall within the seed noise of the best.
  bool tie = false;
};

/// Highest mean validation Recall; the earliest point wins exact ties. `noise`
/// widens the tie band (standard error across seeds). Throws on an empty grid.
Selection select_best(std::span<const GridPoint> points, double noise = 0.0);

/// Appends JSON lines of grid evaluations.
using GridLog = std::function<void(const nlohmann::json&)>;

struct ModelChoice {
  model::TrainConfig config;
  /// Parameters trained with the first seed at `config`.
  model::ModelParams params;
  double valid_recall = 0.0;
  bool tie = false;
};

/// Trains every (learning rate, hidden, l2) point for every seed and keeps the
/// best by mean validation Recall.
ModelChoice select_model(const data::Dataset& ds, const ExperimentConfig& config, const GridLog& log);

struct ControlChoice {
  Coefficients coefficients;
  std::size_t predictor_hidden = 0;
  double valid_recall = 0.0;
  bool tie = false;
};

/// Mean validation Recall@k of a variant's slates over the cohort when
/// candidates keep validation items; users without validation positives are
/// skipped. NaN when no user qualifies.
double cohort_validation_recall(const data::Dataset& ds, std::span<const detect::Slate> slates);

/// Exhausts the alpha / beta / K / predictor-hidden grids the variant uses.
/// `predictors` runs parallel to config.predictor_hidden_grid (may be empty
/// unless the variant is C-UCI).
ControlChoice select_coefficients(Variant v, const Models& models, const Cohort& cohort,
                                  const ExperimentConfig& config,
                                  std::span<const control::CategoryPredictor> predictors, const GridLog& log);

/// Cohort-mean metrics of one variant along a coefficient grid on fixed models.
struct SweepPoint {
  double value = 0.0;
  ResultRow row;
};

std::vector<SweepPoint> sweep(Variant v, const Models& models, const Cohort& cohort, Coefficients fixed,
                              const std::string& parameter, std::span<const double> grid,
                              std::size_t k, const GroupReference* reference);

struct ExperimentResult {
  ResultTable table;
  std::vector<std::pair<Variant, std::vector<detect::Slate>>> slates;
  std::vector<std::pair<std::string, std::vector<SweepPoint>>> sweeps;
};

/// Full pipeline: cohort, model grid, control grids, test slates, table.
/// Writes table.json, table.txt, grid_log.jsonl, slates/<variant>.tsv and
/// sweep_<parameter>.json under `out_dir` when it is non-empty.
ExperimentResult run_experiment(const data::Dataset& ds, const ExperimentConfig& config,
                                const std::filesystem::path& out_dir = {});

}  // namespace ucrs::eval
