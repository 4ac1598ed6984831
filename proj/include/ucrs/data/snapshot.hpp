#pragma once

#include <filesystem>

#include "json.hpp"

#include "ucrs/data/dataset.hpp"

namespace ucrs::data {

/// Writes a prepared dataset as a columnar directory:
///   manifest.json  counts (users, items, N, M, split sizes), attribute groups,
///                  category names, plus any `extra` keys
///   users.tsv      user_id \t feature,feature,...        (row = dense index)
///   items.tsv      item_id \t cat|cat|... \t name
///   train.tsv / valid.tsv / test.tsv   user \t item \t timestamp
void write_dataset(const std::filesystem::path& dir, const Dataset& dataset,
                   const nlohmann::json& extra = nlohmann::json::object());

Dataset read_dataset(const std::filesystem::path& dir);

nlohmann::json read_manifest(const std::filesystem::path& dir);

}  // namespace ucrs::data
