#pragma once

#include <cstdint>
#include <initializer_list>
#include <string>

#include "ucrs/common.hpp"
#include "ucrs/data/dataset.hpp"

namespace ucrs::model {

/// Feature fields, in layout order.
enum class Role : std::uint8_t { UserId = 0, UserAttr = 1, ItemId = 2, ItemCat = 3 };

inline constexpr int kNumRoles = 4;

const char* role_name(Role role);

/// Small bitset over roles.
class RoleSet {
 public:
  constexpr RoleSet() = default;
  constexpr RoleSet(std::initializer_list<Role> roles) {
    for (auto r : roles) bits_ |= bit(r);
  }
  constexpr bool contains(Role r) const { return (bits_ & bit(r)) != 0; }
  constexpr RoleSet with(Role r) const {
    RoleSet s = *this;
    s.bits_ |= bit(r);
    return s;
  }
  constexpr bool empty() const { return bits_ == 0; }
  constexpr bool operator==(const RoleSet&) const = default;

 private:
  static constexpr std::uint8_t bit(Role r) { return static_cast<std::uint8_t>(1u << static_cast<int>(r)); }
  std::uint8_t bits_ = 0;
};

/// Contiguous feature ranges for UserId | UserAttr(N) | ItemId | ItemCat(M).
/// A role with size 0 is absent from the model (woUF drops UserAttr, woIF
/// drops ItemCat).
class FeatureLayout {
 public:
  FeatureLayout() = default;
  FeatureLayout(std::size_t users, std::size_t user_features, std::size_t items,
                std::size_t categories);

  static FeatureLayout for_dataset(const data::Dataset& ds, bool with_user_features = true,
                                   bool with_item_categories = true);

  FeatureIndex offset(Role r) const { return offsets_[static_cast<int>(r)]; }
  std::size_t size(Role r) const { return sizes_[static_cast<int>(r)]; }
  std::size_t total() const { return total_; }

  FeatureIndex user_id(UserIndex u) const { return offset(Role::UserId) + u; }
  FeatureIndex user_attr(FeatureIndex f) const { return offset(Role::UserAttr) + f; }
  FeatureIndex item_id(ItemIndex i) const { return offset(Role::ItemId) + i; }
  FeatureIndex item_cat(CategoryIndex c) const { return offset(Role::ItemCat) + c; }

  Role role_of(FeatureIndex f) const;

  bool operator==(const FeatureLayout&) const = default;

 private:
  std::size_t sizes_[kNumRoles] = {0, 0, 0, 0};
  FeatureIndex offsets_[kNumRoles] = {0, 0, 0, 0};
  std::size_t total_ = 0;
};

}  // namespace ucrs::model
