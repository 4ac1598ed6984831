#include "ucrs/model/score.hpp"

#include <algorithm>

namespace ucrs::model {

namespace {

void check_override(const data::Dataset& ds, const std::vector<std::uint8_t>& bits) {
  if (bits.size() != ds.num_user_features()) {
    throw InvalidArgument("override has " + std::to_string(bits.size()) +
                          " slots, expected " + std::to_string(ds.num_user_features()));
  }
  for (const auto& g : ds.attribute_groups) {
    std::size_t on = 0;
    for (std::size_t v = 0; v < g.values.size(); ++v) {
      const auto b = bits[g.first_feature + v];
      if (b > 1) throw InvalidArgument("override must be binary");
      on += b;
    }
    if (on != 1) {
      throw InvalidArgument("override sets " + std::to_string(on) + " bits in group '" +
                            g.name + "', expected exactly one");
    }
  }
}

// Accumulates the shared FM quantities over a feature set:
// linear sum, S = sum v, and Q = sum v^2.
struct Sums {
  double linear = 0.0;
  std::vector<double> s;
  std::vector<double> q;
};

Sums accumulate(const ModelParams& p, std::span<const FeatureIndex> features) {
  Sums out{0.0, std::vector<double>(p.dim, 0.0), std::vector<double>(p.dim, 0.0)};
  for (auto f : features) {
    if (f >= p.layout.total()) throw InvalidArgument("feature outside layout");
    out.linear += p.linear[f];
    const double* v = p.embedding(f);
    for (std::size_t k = 0; k < p.dim; ++k) {
      out.s[k] += v[k];
      out.q[k] += v[k] * v[k];
    }
  }
  return out;
}

}  // namespace

std::vector<std::uint8_t> user_feature_vector(const data::Dataset& ds, UserIndex user) {
  std::vector<std::uint8_t> bits(ds.num_user_features(), 0);
  for (auto f : ds.users.at(user).features) bits[f] = 1;
  return bits;
}

std::vector<FeatureIndex> user_features(const data::Dataset& ds, const FeatureLayout& layout,
                                        UserIndex user, RoleSet mask,
                                        const UserFeatureEdit& edit) {
  if (user >= ds.num_users()) throw InvalidArgument("user index out of range");
  if (edit.override_features) check_override(ds, *edit.override_features);
  for (auto g : edit.masked_groups) {
    if (g >= ds.attribute_groups.size()) throw InvalidArgument("unknown attribute group");
  }
  std::vector<FeatureIndex> out;
  if (!mask.contains(Role::UserId) && layout.size(Role::UserId) > 0) {
    out.push_back(layout.user_id(user));
  }
  if (mask.contains(Role::UserAttr) || layout.size(Role::UserAttr) == 0) return out;
  const auto bits = edit.override_features ? *edit.override_features
                                           : user_feature_vector(ds, user);
  for (std::size_t g = 0; g < ds.attribute_groups.size(); ++g) {
    if (std::find(edit.masked_groups.begin(), edit.masked_groups.end(), g) !=
        edit.masked_groups.end()) {
      continue;
    }
    const auto& group = ds.attribute_groups[g];
    for (std::size_t v = 0; v < group.values.size(); ++v) {
      const auto f = static_cast<FeatureIndex>(group.first_feature + v);
      if (bits[f]) out.push_back(layout.user_attr(f));
    }
  }
  return out;
}

std::vector<FeatureIndex> item_features(const data::Dataset& ds, const FeatureLayout& layout,
                                        ItemIndex item, RoleSet mask) {
  if (item >= ds.num_items()) throw InvalidArgument("item index out of range");
  std::vector<FeatureIndex> out;
  if (!mask.contains(Role::ItemId) && layout.size(Role::ItemId) > 0) {
    out.push_back(layout.item_id(item));
  }
  if (!mask.contains(Role::ItemCat) && layout.size(Role::ItemCat) > 0) {
    for (auto c : ds.items[item].categories) out.push_back(layout.item_cat(c));
  }
  return out;
}

std::vector<ItemIndex> candidate_items(const data::Dataset& ds, UserIndex user, bool exclude_valid) {
  const auto known = ds.known_positives(user, exclude_valid);
  std::vector<ItemIndex> out;
  out.reserve(ds.num_items() - known.size());
  auto it = known.begin();
  for (ItemIndex i = 0; i < ds.num_items(); ++i) {
    while (it != known.end() && *it < i) ++it;
    if (it == known.end() || *it != i) out.push_back(i);
  }
  return out;
}

std::vector<FeatureIndex> assemble_features(const ScoringRequest& request,
                                            const FeatureLayout& layout,
                                            const data::Dataset& ds) {
  auto out = user_features(ds, layout, request.user, request.mask_roles, request.edit);
  const auto items = item_features(ds, layout, request.item, request.mask_roles);
  out.insert(out.end(), items.begin(), items.end());
  return out;
}

double fm_score(const ModelParams& p, std::span<const FeatureIndex> features) {
  const auto sums = accumulate(p, features);
  double pair = 0.0;
  for (std::size_t k = 0; k < p.dim; ++k) pair += sums.s[k] * sums.s[k] - sums.q[k];
  return p.bias + sums.linear + 0.5 * pair;
}

double nfm_score(const ModelParams& p, std::span<const FeatureIndex> features) {
  const auto sums = accumulate(p, features);
  std::vector<double> bi(p.dim);
  for (std::size_t k = 0; k < p.dim; ++k) bi[k] = 0.5 * (sums.s[k] * sums.s[k] - sums.q[k]);
  double out = 0.0;
  for (std::size_t h = 0; h < p.hidden; ++h) {
    double a = p.b1[h];
    const double* row = p.w1.data() + h * p.dim;
    for (std::size_t k = 0; k < p.dim; ++k) a += row[k] * bi[k];
    if (a > 0) out += p.w2[h] * a;
  }
  return p.bias + sums.linear + out;
}

double raw_score(const ModelParams& p, std::span<const FeatureIndex> features) {
  return p.kind == ModelKind::FM ? fm_score(p, features) : nfm_score(p, features);
}

// --- Scorer ---------------------------------------------------------------
//
// With S = S_U + S_I and Q = Q_U + Q_I, the pairwise term splits as
//   1/2 (S^2 - Q) = bi_U + bi_I + S_U * S_I   (element-wise),
// so FM needs only <S_U, S_I> per pair and NFM needs W1 (S_U * S_I).

Scorer::Scorer(const ModelParams& params, const data::Dataset& ds) : params_(&params), ds_(&ds) {
  const auto& L = params.layout;
  const bool attrs_ok = L.size(Role::UserAttr) == 0 || L.size(Role::UserAttr) == ds.num_user_features();
  const bool cats_ok = L.size(Role::ItemCat) == 0 || L.size(Role::ItemCat) == ds.num_categories();
  if (L.size(Role::UserId) != ds.num_users() || L.size(Role::ItemId) != ds.num_items() ||
      !attrs_ok || !cats_ok) {
    throw InvalidArgument("model layout does not match the dataset");
  }
  const auto d = params.dim;
  const auto H = params.hidden;
  const auto n = ds.num_items();
  item_constant_.resize(n);
  item_sum_.resize(n * d);
  if (params.kind == ModelKind::NFM) item_hidden_.assign(n * H, 0.0);
  std::vector<double> bi(d);
  for (ItemIndex i = 0; i < n; ++i) {
    const auto feats = item_features(ds, L, i);
    const auto sums = accumulate(params, feats);
    std::copy(sums.s.begin(), sums.s.end(), item_sum_.begin() + static_cast<std::ptrdiff_t>(i * d));
    for (std::size_t k = 0; k < d; ++k) bi[k] = 0.5 * (sums.s[k] * sums.s[k] - sums.q[k]);
    if (params.kind == ModelKind::FM) {
      double pair = 0.0;
      for (std::size_t k = 0; k < d; ++k) pair += bi[k];
      item_constant_[i] = sums.linear + pair;
    } else {
      item_constant_[i] = sums.linear;
      for (std::size_t h = 0; h < H; ++h) {
        const double* row = params.w1.data() + h * d;
        double a = 0.0;
        for (std::size_t k = 0; k < d; ++k) a += row[k] * bi[k];
        item_hidden_[i * H + h] = a;
      }
    }
  }
}

Scorer::UserSide Scorer::user_side(std::span<const FeatureIndex> features) const {
  const auto& p = *params_;
  const auto d = p.dim;
  const auto sums = accumulate(p, features);
  UserSide u;
  u.sum = sums.s;
  std::vector<double> bi(d);
  for (std::size_t k = 0; k < d; ++k) bi[k] = 0.5 * (sums.s[k] * sums.s[k] - sums.q[k]);
  if (p.kind == ModelKind::FM) {
    double pair = 0.0;
    for (std::size_t k = 0; k < d; ++k) pair += bi[k];
    u.constant = p.bias + sums.linear + pair;
    return u;
  }
  u.constant = p.bias + sums.linear;
  u.hidden.resize(p.hidden);
  u.mixed.resize(p.hidden * d);
  for (std::size_t h = 0; h < p.hidden; ++h) {
    const double* row = p.w1.data() + h * d;
    double a = p.b1[h];
    for (std::size_t k = 0; k < d; ++k) {
      a += row[k] * bi[k];
      u.mixed[h * d + k] = row[k] * sums.s[k];
    }
    u.hidden[h] = a;
  }
  return u;
}

Scorer::UserSide Scorer::user_side(UserIndex user, RoleSet mask, const UserFeatureEdit& edit) const {
  return user_side(user_features(*ds_, layout(), user, mask, edit));
}

double Scorer::raw(const UserSide& u, ItemIndex item) const {
  const auto& p = *params_;
  const auto d = p.dim;
  const double* s = item_sum_.data() + static_cast<std::size_t>(item) * d;
  if (p.kind == ModelKind::FM) {
    double dot = 0.0;
    for (std::size_t k = 0; k < d; ++k) dot += u.sum[k] * s[k];
    return u.constant + item_constant_[item] + dot;
  }
  const double* ih = item_hidden_.data() + static_cast<std::size_t>(item) * p.hidden;
  double out = 0.0;
  for (std::size_t h = 0; h < p.hidden; ++h) {
    const double* m = u.mixed.data() + h * d;
    double a = u.hidden[h] + ih[h];
    for (std::size_t k = 0; k < d; ++k) a += m[k] * s[k];
    if (a > 0) out += p.w2[h] * a;
  }
  return u.constant + item_constant_[item] + out;
}

std::vector<double> Scorer::score_all_items(const UserSide& user,
                                            std::span<const ItemIndex> candidates) const {
  std::vector<double> out;
  out.reserve(candidates.size());
  for (auto i : candidates) {
    if (i >= ds_->num_items()) throw InvalidArgument("candidate item out of range");
    out.push_back(probability(user, i));
  }
  return out;
}

}  // namespace ucrs::model
