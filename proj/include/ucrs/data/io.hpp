#pragma once

#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "ucrs/data/dataset.hpp"

namespace ucrs::data {

/// `user_id \t item_id \t rating \t timestamp`, UTF-8, no header. Empty lines
/// are skipped. Throws IoError if the file cannot be opened and ParseError on
/// malformed rows or ratings outside [1,5].
std::vector<RawInteraction> load_interactions(const std::filesystem::path& path);

struct UserFeatureRow {
  std::string user_id;
  std::vector<std::pair<std::string, std::string>> attributes;  // (name, value)
};

/// `user_id \t attr=value \t attr=value ...`
std::vector<UserFeatureRow> load_user_features(const std::filesystem::path& path);

struct ItemCategoryRow {
  std::string item_id;
  std::vector<std::string> categories;
  std::string name;  // optional third column
};

/// `item_id \t cat1|cat2|... [\t display name]`
std::vector<ItemCategoryRow> load_item_categories(const std::filesystem::path& path);

enum class SingleLabel {
  Off,             ///< keep every listed category
  KeepFirstListed  ///< collapse multi-label items to their first listed category
};

struct RawCorpus {
  std::vector<RawInteraction> interactions;
  std::vector<UserFeatureRow> user_features;  // empty: ID-only users
  std::vector<ItemCategoryRow> item_categories;
};

/// The MovieLens-1M distribution (`ratings.dat`, `users.dat`, `movies.dat`,
/// `::`-separated). User attributes: gender, age, occupation.
RawCorpus load_movielens_1m(const std::filesystem::path& dir);

void apply_single_label(std::vector<ItemCategoryRow>& rows, SingleLabel mode);

void write_interactions(const std::filesystem::path& path,
                        const std::vector<RawInteraction>& rows);
void write_user_features(const std::filesystem::path& path,
                         const std::vector<UserFeatureRow>& rows);
void write_item_categories(const std::filesystem::path& path,
                           const std::vector<ItemCategoryRow>& rows);

}  // namespace ucrs::data
