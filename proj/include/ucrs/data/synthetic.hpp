#pragma once

#include <cstdint>

#include "ucrs/data/io.hpp"

namespace ucrs::data {

/// Parameters of a small MovieLens-shaped corpus with planted structure:
/// group-dependent category tastes (gender, age), popularity skew, multi-label
/// items and a late-timeline preference shift for a fraction of users.
struct SyntheticConfig {
  int users = 300;
  int items = 400;
  int categories = 8;
  int min_interactions = 20;
  int max_interactions = 60;
  double multi_label_rate = 0.3;
  double shift_fraction = 0.5;
  /// Fraction of each user's timeline after which shifted users switch taste.
  double shift_point = 0.7;
  /// Share of ratings below the positive threshold.
  double negative_rating_rate = 0.15;
  std::uint64_t seed = 7;
};

RawCorpus generate_synthetic(const SyntheticConfig& config);

}  // namespace ucrs::data
