#pragma once

#include <filesystem>
#include <vector>

#include "ucrs/detect/metrics.hpp"

namespace ucrs::detect {

/// `user_id \t item_id,item_id,... \t provenance [\t short]`, one slate per
/// line, raw ids. An empty slate leaves the item column empty.
void write_slates(const std::filesystem::path& path, const data::Dataset& ds,
                  std::span<const Slate> slates);

/// Throws IoError if unreadable and ParseError on unknown ids or bad rows.
std::vector<Slate> read_slates(const std::filesystem::path& path, const data::Dataset& ds);

}  // namespace ucrs::detect
