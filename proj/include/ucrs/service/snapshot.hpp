#pragma once

#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "ucrs/control/apply.hpp"
#include "ucrs/control/command.hpp"
#include "ucrs/detect/bubble.hpp"

namespace ucrs::service {

struct SnapshotOptions {
  /// Length of the precomputed baseline slates.
  std::size_t baseline_depth = 10;
  /// User grouping behind the Isolation Index of bubble reports: an attribute
  /// name or "majority-category". Empty picks the first attribute group, or
  /// "majority-category" for ID-only datasets.
  std::string report_grouping;
  control::CommandDefaults defaults;
};

/// A user's precomputed bubble report. `mcd` is empty for users without a
/// train history (the severity then treats MCD as 0).
struct UserReport {
  detect::BubbleReport report;
  std::optional<double> mcd;
  double severity_score = 0.0;
  std::size_t group = detect::Grouping::kNoGroup;
};

/// Frozen serving state. Immutable once built; shared between request threads.
class ServingSnapshot {
 public:
  /// Directory layout: snapshot.json, model.bin, optional predictor.bin and
  /// dataset/ (the prepared dataset format).
  static std::shared_ptr<const ServingSnapshot> load(const std::filesystem::path& dir);

  static std::shared_ptr<const ServingSnapshot> create(data::Dataset dataset, model::ModelParams params,
                                                       std::optional<control::CategoryPredictor> predictor,
                                                       SnapshotOptions options, std::string version);

  ServingSnapshot(const ServingSnapshot&) = delete;
  ServingSnapshot& operator=(const ServingSnapshot&) = delete;

  const data::Dataset& dataset() const { return dataset_; }
  const model::ModelParams& params() const { return params_; }
  const model::Scorer& scorer() const { return *scorer_; }
  /// Null when the snapshot carries no predictor.
  const control::CategoryPredictor* predictor() const { return predictor_ ? &*predictor_ : nullptr; }
  const SnapshotOptions& options() const { return options_; }
  const std::string& version() const { return version_; }
  const detect::Grouping& grouping() const { return grouping_; }
  const std::string& grouping_name() const { return grouping_name_; }

  std::optional<UserIndex> find_user(std::string_view id) const { return dataset_.user_ids.find(id); }
  const control::ControlResult& baseline(UserIndex u) const { return baselines_.at(u); }
  const UserReport& report(UserIndex u) const { return reports_.at(u); }

  /// Baseline top-k, served from the precomputed slate when k fits.
  control::ControlResult baseline_top(UserIndex u, std::size_t k) const;

 private:
  ServingSnapshot(data::Dataset dataset, model::ModelParams params,
                  std::optional<control::CategoryPredictor> predictor, SnapshotOptions options, std::string version);

  data::Dataset dataset_;
  model::ModelParams params_;
  std::optional<control::CategoryPredictor> predictor_;
  SnapshotOptions options_;
  std::string version_;
  std::unique_ptr<model::Scorer> scorer_;
  detect::Grouping grouping_;
  std::string grouping_name_;
  std::vector<control::ControlResult> baselines_;
  std::vector<UserReport> reports_;
};

/// Writes a snapshot directory readable by ServingSnapshot::load.
void write_snapshot(const std::filesystem::path& dir, const data::Dataset& dataset, const model::ModelParams& params,
                    const control::CategoryPredictor* predictor, const SnapshotOptions& options = {});

/// 16 hex digits of FNV-1a over every snapshot file (relative path and bytes).
std::string snapshot_version(const std::filesystem::path& dir);

}  // namespace ucrs::service
