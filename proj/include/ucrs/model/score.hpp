#pragma once

#include <optional>
#include <span>
#include <vector>

#include "ucrs/data/dataset.hpp"
#include "ucrs/model/params.hpp"

namespace ucrs::model {

/// Change to a user's attribute bits before scoring.
struct UserFeatureEdit {
  /// Replacement N-slot attribute vector; exactly one bit per attribute group.
  std::optional<std::vector<std::uint8_t>> override_features;
  /// Attribute groups left with no active bit.
  std::vector<std::size_t> masked_groups;

  bool empty() const { return !override_features && masked_groups.empty(); }
};

struct ScoringRequest {
  UserIndex user = 0;
  ItemIndex item = 0;
  RoleSet mask_roles;
  UserFeatureEdit edit;
};

/// The user's N-slot binary attribute vector.
std::vector<std::uint8_t> user_feature_vector(const data::Dataset& ds, UserIndex user);

/// Active user-side features (id, then attributes) in ascending order.
/// Throws InvalidArgument on a malformed override or unknown group.
std::vector<FeatureIndex> user_features(const data::Dataset& ds, const FeatureLayout& layout,
                                        UserIndex user, RoleSet mask,
                                        const UserFeatureEdit& edit);

/// Active item-side features (id, then categories) in ascending order.
std::vector<FeatureIndex> item_features(const data::Dataset& ds, const FeatureLayout& layout,
                                        ItemIndex item, RoleSet mask = {});

/// All items minus the user's train positives, and minus valid positives too
/// when `exclude_valid` (the test-time candidate set). Ascending.
std::vector<ItemIndex> candidate_items(const data::Dataset& ds, UserIndex user, bool exclude_valid);

std::vector<FeatureIndex> assemble_features(const ScoringRequest& request,
                                            const FeatureLayout& layout,
                                            const data::Dataset& ds);

/// bias + sum w_j + 1/2 sum_k [(sum_j v_jk)^2 - sum_j v_jk^2]
double fm_score(const ModelParams& params, std::span<const FeatureIndex> features);

/// bias + sum w_j + w2 . ReLU(W1 bi + b1), bi = 1/2 [(sum_j v_j)^2 - sum_j v_j^2]
double nfm_score(const ModelParams& params, std::span<const FeatureIndex> features);

/// Dispatches on params.kind.
double raw_score(const ModelParams& params, std::span<const FeatureIndex> features);

/// Scoring against a frozen model with per-item terms precomputed, so one
/// user-item pair costs O(d) for FM and O(H d) for NFM. The params and dataset
/// must outlive the scorer.
class Scorer {
 public:
  /// User-side sums for a fixed set of active user features.
  struct UserSide {
    double constant = 0.0;       // bias + linear + pairwise terms within the user side
    std::vector<double> sum;     // d
    std::vector<double> hidden;  // NFM: W1 bi_U + b1
    std::vector<double> mixed;   // NFM: W1 row h scaled element-wise by sum (H x d)
  };

  Scorer(const ModelParams& params, const data::Dataset& ds);

  const ModelParams& params() const { return *params_; }
  const data::Dataset& dataset() const { return *ds_; }
  const FeatureLayout& layout() const { return params_->layout; }

  UserSide user_side(std::span<const FeatureIndex> user_features) const;
  UserSide user_side(UserIndex user, RoleSet mask = {}, const UserFeatureEdit& edit = {}) const;

  double raw(const UserSide& user, ItemIndex item) const;
  double probability(const UserSide& user, ItemIndex item) const { return sigmoid(raw(user, item)); }

  /// sigmoid(raw) for every candidate, in candidate order.
  std::vector<double> score_all_items(const UserSide& user,
                                      std::span<const ItemIndex> candidates) const;

 private:
  const ModelParams* params_;
  const data::Dataset* ds_;
  std::vector<double> item_constant_;  // linear + within-item pairwise (FM) or linear only (NFM)
  std::vector<double> item_sum_;       // items x d
  std::vector<double> item_hidden_;    // NFM: items x H, W1 bi_I
};

}  // namespace ucrs::model
