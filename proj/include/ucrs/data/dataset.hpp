#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "ucrs/common.hpp"

namespace ucrs::data {

/// One row of an interaction log before binarization.
struct RawInteraction {
  std::string user_id;
  std::string item_id;
  int rating = 0;
  std::int64_t timestamp = 0;

  bool operator==(const RawInteraction&) const = default;
};

/// A (user, item) pair in dense index space. Positives carry label 1.
struct Interaction {
  UserIndex user = 0;
  ItemIndex item = 0;
  std::int64_t timestamp = 0;
  std::uint8_t label = 1;

  bool operator==(const Interaction&) const = default;
};

/// Bidirectional raw id <-> dense index map.
class Vocabulary {
 public:
  Vocabulary() = default;
  explicit Vocabulary(std::vector<std::string> names);

  std::size_t size() const { return names_.size(); }
  const std::string& name(std::uint32_t index) const { return names_.at(index); }
  std::optional<std::uint32_t> find(std::string_view name) const;
  std::uint32_t at(std::string_view name) const;
  const std::vector<std::string>& names() const { return names_; }

 private:
  std::vector<std::string> names_;
  std::unordered_map<std::string, std::uint32_t> index_;
};

/// A categorical user attribute (e.g. gender). Its one-hot slots occupy the
/// user-feature range [first_feature, first_feature + values.size()).
struct AttributeGroup {
  std::string name;
  std::vector<std::string> values;
  FeatureIndex first_feature = 0;

  bool contains(FeatureIndex f) const {
    return f >= first_feature && f < first_feature + values.size();
  }
};

/// Active user-feature slots, one per attribute group, ordered by group.
struct UserProfile {
  std::vector<FeatureIndex> features;
};

/// Active category slots (multi-hot allowed, at least one), sorted ascending.
struct ItemProfile {
  std::vector<CategoryIndex> categories;
  std::string name;

  bool has_category(CategoryIndex c) const;
};

/// Per-user positives of each split, time-ordered.
struct UserHistory {
  std::vector<ItemIndex> train;
  std::vector<ItemIndex> valid;
  std::vector<ItemIndex> test;
  std::vector<std::int64_t> train_timestamps;
};

struct Dataset {
  std::vector<Interaction> train;
  std::vector<Interaction> valid;
  std::vector<Interaction> test;

  std::vector<UserProfile> users;
  std::vector<ItemProfile> items;
  Vocabulary user_ids;
  Vocabulary item_ids;

  std::vector<AttributeGroup> attribute_groups;
  std::vector<std::string> category_names;

  std::vector<UserHistory> histories;

  std::size_t num_users() const { return users.size(); }
  std::size_t num_items() const { return items.size(); }
  /// N: total user-feature slots.
  std::size_t num_user_features() const;
  /// M: number of item categories.
  std::size_t num_categories() const { return category_names.size(); }

  /// "group=value" display name of a user-feature slot.
  std::string feature_name(FeatureIndex f) const;
  std::optional<FeatureIndex> find_feature(std::string_view name) const;
  std::optional<CategoryIndex> find_category(std::string_view name) const;
  /// Attribute group owning a feature slot; throws InvalidArgument if none.
  std::size_t group_of(FeatureIndex f) const;
  std::optional<std::size_t> find_group(std::string_view name) const;

  bool user_has_feature(UserIndex u, FeatureIndex f) const;

  /// Sorted train+valid+test positives of a user.
  std::vector<ItemIndex> all_positives(UserIndex u) const;
  /// Sorted positives of the splits preceding evaluation: train (+ valid).
  std::vector<ItemIndex> known_positives(UserIndex u, bool include_valid) const;

  /// Rebuilds `histories` from the three splits. Split vectors must already be
  /// in global time order.
  void index_histories();

  /// Throws Error when an invariant is violated (profile references, one-hot
  /// groups, non-empty category sets).
  void validate() const;
};

}  // namespace ucrs::data
