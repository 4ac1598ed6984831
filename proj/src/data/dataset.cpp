#include "ucrs/data/dataset.hpp"

#include <algorithm>

namespace ucrs::data {

Vocabulary::Vocabulary(std::vector<std::string> names) : names_(std::move(names)) {
  index_.reserve(names_.size());
  for (std::uint32_t i = 0; i < names_.size(); ++i) {
    if (!index_.emplace(names_[i], i).second) {
      throw Error("duplicate vocabulary entry '" + names_[i] + "'");
    }
  }
}

std::optional<std::uint32_t> Vocabulary::find(std::string_view name) const {
  const auto it = index_.find(std::string(name));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

std::uint32_t Vocabulary::at(std::string_view name) const {
  if (auto i = find(name)) return *i;
  throw InvalidArgument("unknown id '" + std::string(name) + "'");
}

bool ItemProfile::has_category(CategoryIndex c) const {
  return std::binary_search(categories.begin(), categories.end(), c);
}

std::size_t Dataset::num_user_features() const {
  std::size_t n = 0;
  for (const auto& g : attribute_groups) n += g.values.size();
  return n;
}

std::string Dataset::feature_name(FeatureIndex f) const {
  const auto& g = attribute_groups.at(group_of(f));
  return g.name + "=" + g.values[f - g.first_feature];
}

std::optional<FeatureIndex> Dataset::find_feature(std::string_view name) const {
  const auto eq = name.find('=');
  if (eq == std::string_view::npos) return std::nullopt;
  const auto group = name.substr(0, eq);
  const auto value = name.substr(eq + 1);
  for (const auto& g : attribute_groups) {
    if (g.name != group) continue;
    for (std::size_t v = 0; v < g.values.size(); ++v) {
      if (g.values[v] == value) return g.first_feature + static_cast<FeatureIndex>(v);
    }
  }
  return std::nullopt;
}

std::optional<CategoryIndex> Dataset::find_category(std::string_view name) const {
  for (std::size_t c = 0; c < category_names.size(); ++c) {
    if (category_names[c] == name) return static_cast<CategoryIndex>(c);
  }
  return std::nullopt;
}

std::size_t Dataset::group_of(FeatureIndex f) const {
  for (std::size_t g = 0; g < attribute_groups.size(); ++g) {
    if (attribute_groups[g].contains(f)) return g;
  }
  throw InvalidArgument("user feature " + std::to_string(f) + " out of range");
}

std::optional<std::size_t> Dataset::find_group(std::string_view name) const {
  for (std::size_t g = 0; g < attribute_groups.size(); ++g) {
    if (attribute_groups[g].name == name) return g;
  }
  return std::nullopt;
}

bool Dataset::user_has_feature(UserIndex u, FeatureIndex f) const {
  const auto& fs = users.at(u).features;
  return std::find(fs.begin(), fs.end(), f) != fs.end();
}

std::vector<ItemIndex> Dataset::all_positives(UserIndex u) const {
  const auto& h = histories.at(u);
  std::vector<ItemIndex> out;
  out.reserve(h.train.size() + h.valid.size() + h.test.size());
  out.insert(out.end(), h.train.begin(), h.train.end());
  out.insert(out.end(), h.valid.begin(), h.valid.end());
  out.insert(out.end(), h.test.begin(), h.test.end());
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

std::vector<ItemIndex> Dataset::known_positives(UserIndex u, bool include_valid) const {
  const auto& h = histories.at(u);
  std::vector<ItemIndex> out(h.train.begin(), h.train.end());
  if (include_valid) out.insert(out.end(), h.valid.begin(), h.valid.end());
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

void Dataset::index_histories() {
  histories.assign(users.size(), {});
  for (const auto& x : train) {
    histories[x.user].train.push_back(x.item);
    histories[x.user].train_timestamps.push_back(x.timestamp);
  }
  for (const auto& x : valid) histories[x.user].valid.push_back(x.item);
  for (const auto& x : test) histories[x.user].test.push_back(x.item);
}

void Dataset::validate() const {
  const std::size_t n_features = num_user_features();
  for (std::size_t u = 0; u < users.size(); ++u) {
    const auto& fs = users[u].features;
    if (fs.size() != attribute_groups.size()) {
      throw Error("user " + user_ids.name(static_cast<std::uint32_t>(u)) +
                  " does not have exactly one value per attribute group");
    }
    for (std::size_t g = 0; g < fs.size(); ++g) {
      if (fs[g] >= n_features || !attribute_groups[g].contains(fs[g])) {
        throw Error("user " + user_ids.name(static_cast<std::uint32_t>(u)) +
                    " has an invalid feature slot");
      }
    }
  }
  for (std::size_t i = 0; i < items.size(); ++i) {
    const auto& cs = items[i].categories;
    if (cs.empty()) {
      throw Error("item " + item_ids.name(static_cast<std::uint32_t>(i)) + " has no category");
    }
    if (!std::is_sorted(cs.begin(), cs.end()) || cs.back() >= num_categories()) {
      throw Error("item " + item_ids.name(static_cast<std::uint32_t>(i)) +
                  " has invalid category slots");
    }
  }
  for (const auto* split : {&train, &valid, &test}) {
    for (const auto& x : *split) {
      if (x.user >= users.size() || x.item >= items.size()) {
        throw Error("interaction references an unknown user or item");
      }
    }
  }
}

}  // namespace ucrs::data
