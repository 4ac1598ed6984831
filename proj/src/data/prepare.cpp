#include "ucrs/data/prepare.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <unordered_map>
#include <unordered_set>

#include "ucrs/random.hpp"

namespace ucrs::data {

std::vector<RawInteraction> kcore_filter(const std::vector<RawInteraction>& interactions,
                                         int k) {
  if (k < 1) throw InvalidArgument("kcore requires k >= 1");
  std::vector<RawInteraction> current = interactions;
  while (true) {
    std::unordered_map<std::string, int> user_degree;
    std::unordered_map<std::string, int> item_degree;
    for (const auto& r : current) {
      ++user_degree[r.user_id];
      ++item_degree[r.item_id];
    }
    std::vector<RawInteraction> kept;
    kept.reserve(current.size());
    for (auto& r : current) {
      if (user_degree[r.user_id] >= k && item_degree[r.item_id] >= k) kept.push_back(std::move(r));
    }
    if (kept.size() == current.size()) return kept;
    current = std::move(kept);
  }
}

RawSplit binarize_and_split(const std::vector<RawInteraction>& interactions,
                            int positive_threshold, SplitFractions fractions) {
  if (fractions.train < 0 || fractions.valid < 0 || fractions.train + fractions.valid > 1) {
    throw InvalidArgument("split fractions must be non-negative and sum to at most 1");
  }
  std::vector<RawInteraction> positives;
  for (const auto& r : interactions) {
    if (r.rating >= positive_threshold) positives.push_back(r);
  }
  std::stable_sort(positives.begin(), positives.end(),
                   [](const RawInteraction& a, const RawInteraction& b) {
                     if (a.timestamp != b.timestamp) return a.timestamp < b.timestamp;
                     if (a.user_id != b.user_id) return a.user_id < b.user_id;
                     return a.item_id < b.item_id;
                   });
  const auto n = static_cast<double>(positives.size());
  const auto n_train = static_cast<std::size_t>(std::floor(n * fractions.train + 1e-9));
  const auto n_valid = static_cast<std::size_t>(std::floor(n * fractions.valid + 1e-9));

  RawSplit split;
  const auto begin = positives.begin();
  split.train.assign(begin, begin + static_cast<std::ptrdiff_t>(n_train));
  split.valid.assign(begin + static_cast<std::ptrdiff_t>(n_train),
                     begin + static_cast<std::ptrdiff_t>(n_train + n_valid));
  split.test.assign(begin + static_cast<std::ptrdiff_t>(n_train + n_valid), positives.end());
  return split;
}

std::size_t restrict_to_profiles(std::vector<RawInteraction>& interactions,
                                 const std::vector<UserFeatureRow>& user_features,
                                 const std::vector<ItemCategoryRow>& item_categories) {
  std::unordered_set<std::string> users;
  for (const auto& u : user_features) users.insert(u.user_id);
  std::unordered_set<std::string> items;
  for (const auto& i : item_categories) {
    if (!i.categories.empty()) items.insert(i.item_id);
  }
  const bool check_users = !user_features.empty();
  const auto before = interactions.size();
  std::erase_if(interactions, [&](const RawInteraction& r) {
    return (check_users && !users.contains(r.user_id)) || !items.contains(r.item_id);
  });
  return before - interactions.size();
}

Dataset build_dataset(const RawSplit& split, const std::vector<UserFeatureRow>& user_features,
                      const std::vector<ItemCategoryRow>& item_categories) {
  std::set<std::string> user_set;
  std::set<std::string> item_set;
  for (const auto* part : {&split.train, &split.valid, &split.test}) {
    for (const auto& r : *part) {
      user_set.insert(r.user_id);
      item_set.insert(r.item_id);
    }
  }

  Dataset ds;
  ds.user_ids = Vocabulary({user_set.begin(), user_set.end()});
  ds.item_ids = Vocabulary({item_set.begin(), item_set.end()});

  // Attribute groups and their value sets, restricted to retained users.
  std::unordered_map<std::string, const UserFeatureRow*> feature_rows;
  for (const auto& row : user_features) {
    if (!user_set.contains(row.user_id)) continue;
    if (!feature_rows.emplace(row.user_id, &row).second) {
      throw Error("duplicate user feature row for " + row.user_id);
    }
  }
  std::map<std::string, std::set<std::string>> group_values;
  for (const auto& [id, row] : feature_rows) {
    for (const auto& [name, value] : row->attributes) group_values[name].insert(value);
  }
  FeatureIndex next_feature = 0;
  for (const auto& [name, values] : group_values) {
    ds.attribute_groups.push_back({name, {values.begin(), values.end()}, next_feature});
    next_feature += static_cast<FeatureIndex>(values.size());
  }

  ds.users.resize(ds.user_ids.size());
  if (!user_features.empty()) {
    for (std::uint32_t u = 0; u < ds.user_ids.size(); ++u) {
      const auto& id = ds.user_ids.name(u);
      const auto it = feature_rows.find(id);
      if (it == feature_rows.end()) throw Error("user " + id + " has no feature row");
      auto& profile = ds.users[u].features;
      for (const auto& group : ds.attribute_groups) {
        std::optional<FeatureIndex> slot;
        for (const auto& [name, value] : it->second->attributes) {
          if (name != group.name) continue;
          if (slot) throw Error("user " + id + " lists attribute " + name + " twice");
          const auto pos = std::find(group.values.begin(), group.values.end(), value);
          slot = group.first_feature + static_cast<FeatureIndex>(pos - group.values.begin());
        }
        if (!slot) throw Error("user " + id + " lacks attribute " + group.name);
        profile.push_back(*slot);
      }
    }
  }

  std::unordered_map<std::string, const ItemCategoryRow*> category_rows;
  std::set<std::string> category_set;
  for (const auto& row : item_categories) {
    if (!item_set.contains(row.item_id)) continue;
    category_rows[row.item_id] = &row;
    category_set.insert(row.categories.begin(), row.categories.end());
  }
  ds.category_names.assign(category_set.begin(), category_set.end());
  const Vocabulary category_vocab(ds.category_names);
  ds.items.resize(ds.item_ids.size());
  for (std::uint32_t i = 0; i < ds.item_ids.size(); ++i) {
    const auto& id = ds.item_ids.name(i);
    const auto it = category_rows.find(id);
    if (it == category_rows.end() || it->second->categories.empty()) {
      throw Error("item " + id + " has no categories");
    }
    auto& profile = ds.items[i];
    for (const auto& c : it->second->categories) profile.categories.push_back(category_vocab.at(c));
    std::sort(profile.categories.begin(), profile.categories.end());
    profile.categories.erase(std::unique(profile.categories.begin(), profile.categories.end()),
                             profile.categories.end());
    profile.name = it->second->name.empty() ? id : it->second->name;
  }

  auto convert = [&](const std::vector<RawInteraction>& rows) {
    std::vector<Interaction> out;
    out.reserve(rows.size());
    for (const auto& r : rows) {
      out.push_back({ds.user_ids.at(r.user_id), ds.item_ids.at(r.item_id), r.timestamp, 1});
    }
    return out;
  };
  ds.train = convert(split.train);
  ds.valid = convert(split.valid);
  ds.test = convert(split.test);
  ds.index_histories();
  ds.validate();
  return ds;
}

std::vector<Interaction> sample_negatives(const Dataset& dataset, std::uint64_t seed) {
  const auto n_items = dataset.num_items();
  std::vector<std::vector<ItemIndex>> positives(dataset.num_users());
  std::vector<bool> ready(dataset.num_users(), false);
  Rng rng(seed);
  std::vector<Interaction> negatives;
  negatives.reserve(dataset.train.size());
  for (const auto& x : dataset.train) {
    if (!ready[x.user]) {
      positives[x.user] = dataset.all_positives(x.user);
      ready[x.user] = true;
      if (positives[x.user].size() >= n_items) {
        throw Error("user " + dataset.user_ids.name(x.user) +
                    " has positives covering the whole item universe");
      }
    }
    const auto& pos = positives[x.user];
    ItemIndex item;
    do {
      item = static_cast<ItemIndex>(rng.below(n_items));
    } while (std::binary_search(pos.begin(), pos.end(), item));
    negatives.push_back({x.user, item, x.timestamp, 0});
  }
  return negatives;
}

Dataset prepare(RawCorpus corpus, const PrepareOptions& options, PrepareStats* stats) {
  PrepareStats local;
  local.raw_rows = corpus.interactions.size();
  apply_single_label(corpus.item_categories, options.single_label);
  local.dropped_missing_profile =
      restrict_to_profiles(corpus.interactions, corpus.user_features, corpus.item_categories);
  auto filtered = kcore_filter(corpus.interactions, options.kcore);
  local.after_kcore = filtered.size();
  auto split = binarize_and_split(filtered, options.positive_threshold, options.fractions);
  local.positives = split.train.size() + split.valid.size() + split.test.size();
  if (local.positives == 0) throw Error("no positive interactions remain after filtering");
  auto ds = build_dataset(split, corpus.user_features, corpus.item_categories);
  if (stats) *stats = local;
  return ds;
}

}  // namespace ucrs::data
