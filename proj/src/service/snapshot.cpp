#include "ucrs/service/snapshot.hpp"

#include <algorithm>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "ucrs/data/snapshot.hpp"
#include "util/parallel.hpp"

namespace ucrs::service {

namespace {

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

}  // namespace

std::string snapshot_version(const std::filesystem::path& dir) {
  std::vector<std::filesystem::path> files;
  for (const auto& e : std::filesystem::recursive_directory_iterator(dir)) {
    if (e.is_regular_file()) files.push_back(std::filesystem::relative(e.path(), dir));
  }
  std::sort(files.begin(), files.end());
  std::uint64_t h = fnv1a({});
  for (const auto& f : files) {
    const auto name = f.generic_string();
    h = fnv1a(std::span<const char>(name.data(), name.size() + 1), h);
    const auto bytes = read_file(dir / f);
    h = fnv1a(bytes, h);
  }
  std::ostringstream out;
  out << std::hex << std::setw(16) << std::setfill('0') << h;
  return out.str();
}

void write_snapshot(const std::filesystem::path& dir, const data::Dataset& dataset, const model::ModelParams& params,
                    const control::CategoryPredictor* predictor, const SnapshotOptions& options) {
  std::filesystem::create_directories(dir);
  data::write_dataset(dir / "dataset", dataset);
  model::save_params(params, dir / "model.bin");
  std::filesystem::remove(dir / "predictor.bin");
  if (predictor) control::save_predictor(*predictor, dir / "predictor.bin");
  const nlohmann::json manifest{{"format", "ucrs-snapshot"},
                                {"version", 1},
                                {"baseline_depth", options.baseline_depth},
                                {"report_grouping", options.report_grouping},
                                {"user_alpha", options.defaults.user_alpha},
                                {"item_alpha", options.defaults.item_alpha}};
  std::ofstream out(dir / "snapshot.json");
  if (!out) throw IoError("cannot write " + (dir / "snapshot.json").string());
  out << manifest.dump(2) << '\n';
}

std::shared_ptr<const ServingSnapshot> ServingSnapshot::load(const std::filesystem::path& dir) {
  nlohmann::json manifest;
  try {
    manifest = nlohmann::json::parse(read_file(dir / "snapshot.json"));
  } catch (const nlohmann::json::exception& e) {
    throw ParseError((dir / "snapshot.json").string(), 1, e.what());
  }
  if (manifest.value("format", "") != "ucrs-snapshot" || manifest.value("version", 0) != 1) {
    throw ParseError((dir / "snapshot.json").string(), 1, "not a version 1 snapshot manifest");
  }
  SnapshotOptions options;
  options.baseline_depth = manifest.value("baseline_depth", options.baseline_depth);
  options.report_grouping = manifest.value("report_grouping", options.report_grouping);
  options.defaults.user_alpha = manifest.value("user_alpha", options.defaults.user_alpha);
  options.defaults.item_alpha = manifest.value("item_alpha", options.defaults.item_alpha);
  std::optional<control::CategoryPredictor> predictor;
  if (std::filesystem::exists(dir / "predictor.bin")) predictor = control::load_predictor(dir / "predictor.bin");
  return create(data::read_dataset(dir / "dataset"), model::load_params(dir / "model.bin"), std::move(predictor),
                options, snapshot_version(dir));
}

std::shared_ptr<const ServingSnapshot> ServingSnapshot::create(data::Dataset dataset, model::ModelParams params,
                                                               std::optional<control::CategoryPredictor> predictor,
                                                               SnapshotOptions options, std::string version) {
  return std::shared_ptr<const ServingSnapshot>(new ServingSnapshot(
      std::move(dataset), std::move(params), std::move(predictor), std::move(options), std::move(version)));
}

ServingSnapshot::ServingSnapshot(data::Dataset dataset, model::ModelParams params,
                                 std::optional<control::CategoryPredictor> predictor, SnapshotOptions options,
                                 std::string version)
    : dataset_(std::move(dataset)),
      params_(std::move(params)),
      predictor_(std::move(predictor)),
      options_(std::move(options)),
      version_(std::move(version)) {
  dataset_.validate();
  scorer_ = std::make_unique<model::Scorer>(params_, dataset_);
  if (predictor_ && predictor_->categories != dataset_.num_categories()) {
    throw InvalidArgument("predictor category count does not match the dataset");
  }
  grouping_name_ = options_.report_grouping;
  if (grouping_name_.empty()) {
    grouping_name_ = dataset_.attribute_groups.empty() ? "majority-category" : dataset_.attribute_groups[0].name;
  }
  grouping_ = detect::group_users(dataset_, grouping_name_);

  const auto n = dataset_.num_users();
  baselines_.resize(n);
  detail::parallel_for(n, [&](std::size_t u) {
    baselines_[u] = control::baseline(*scorer_, static_cast<UserIndex>(u), {options_.baseline_depth});
  });

  // Exposure of every group, then each group's mean isolation against the others.
  std::vector<detect::GroupExposure> exposure(grouping_.names.size(), detect::GroupExposure(dataset_.num_items()));
  for (UserIndex u = 0; u < n; ++u) {
    if (grouping_.group[u] != detect::Grouping::kNoGroup) exposure[grouping_.group[u]].add(baselines_[u].ranked.items);
  }
  std::vector<double> group_iso(exposure.size(), 0.0);
  for (std::size_t g = 0; g < exposure.size(); ++g) {
    if (exposure[g].total == 0) continue;
    CompensatedSum s;
    for (std::size_t o = 0; o < exposure.size(); ++o) {
      if (o != g && exposure[o].total > 0) s.add(detect::isolation_index(exposure[g], exposure[o]));
    }
    group_iso[g] = s.mean();
  }

  reports_.resize(n);
  for (UserIndex u = 0; u < n; ++u) {
    auto& r = reports_[u];
    const auto& items = baselines_[u].ranked.items;
    const auto& history = dataset_.histories[u];
    r.group = grouping_.group[u];
    r.report.coverage = static_cast<double>(detect::coverage(dataset_, items));
    r.report.iso_index = r.group == detect::Grouping::kNoGroup ? 0.0 : group_iso[r.group];
    if (!history.train.empty() && !items.empty()) r.mcd = detect::mcd(dataset_, items, history.train);
    r.report.mcd = r.mcd.value_or(0.0);
    if (!history.train_timestamps.empty()) {
      r.report.window_start = history.train_timestamps.front();
      r.report.window_end = history.train_timestamps.back();
    }
    r.severity_score = detect::severity_score(r.report.coverage, r.report.iso_index, r.report.mcd);
    const std::vector<detect::BubbleReport> single{r.report};
    r.report.severity = detect::severity(single);
  }
}

control::ControlResult ServingSnapshot::baseline_top(UserIndex u, std::size_t k) const {
  const auto& full = baselines_.at(u);
  if (k > options_.baseline_depth) return control::baseline(*scorer_, u, {k});
  auto out = full;
  const auto keep = std::min(k, out.ranked.items.size());
  out.ranked.items.resize(keep);
  out.ranked.adjusted.resize(keep);
  out.ranked.base.resize(keep);
  out.ranked.r.resize(keep);
  out.ranked.short_list = keep < k;
  return out;
}

}  // namespace ucrs::service
