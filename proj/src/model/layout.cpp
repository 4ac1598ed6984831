#include "ucrs/model/layout.hpp"

namespace ucrs::model {

const char* role_name(Role role) {
  switch (role) {
    case Role::UserId: return "user_id";
    case Role::UserAttr: return "user_attr";
    case Role::ItemId: return "item_id";
    case Role::ItemCat: return "item_cat";
  }
  return "?";
}

FeatureLayout::FeatureLayout(std::size_t users, std::size_t user_features, std::size_t items,
                             std::size_t categories) {
  sizes_[0] = users;
  sizes_[1] = user_features;
  sizes_[2] = items;
  sizes_[3] = categories;
  std::size_t at = 0;
  for (int r = 0; r < kNumRoles; ++r) {
    offsets_[r] = static_cast<FeatureIndex>(at);
    at += sizes_[r];
  }
  if (at > UINT32_MAX) throw InvalidArgument("feature layout exceeds 32-bit index space");
  total_ = at;
}

FeatureLayout FeatureLayout::for_dataset(const data::Dataset& ds, bool with_user_features,
                                         bool with_item_categories) {
  return FeatureLayout(ds.num_users(), with_user_features ? ds.num_user_features() : 0,
                       ds.num_items(), with_item_categories ? ds.num_categories() : 0);
}

Role FeatureLayout::role_of(FeatureIndex f) const {
  if (f >= total_) throw InvalidArgument("feature " + std::to_string(f) + " outside layout");
  for (int r = kNumRoles - 1; r >= 0; --r) {
    if (sizes_[r] > 0 && f >= offsets_[r]) return static_cast<Role>(r);
  }
  return Role::UserId;
}

}  // namespace ucrs::model
