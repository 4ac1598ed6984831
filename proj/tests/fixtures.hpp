#pragma once

// Synthetic datasets with known structure, shared by unit and acceptance tests.

#include <string>
#include <vector>

#include "ucrs/data/prepare.hpp"
#include "ucrs/data/synthetic.hpp"
#include "ucrs/random.hpp"

namespace ucrs::testing {

/// Users whose train sequences move from a home category to transition[home].
/// Homes are drawn from `homes`; the first half mixes home (weight in
/// [0.5, 0.7]), companion[home] (the rest but 0.1) and uniform noise (0.1);
/// the second half is transition[home] with probability 0.8, else noise.
struct PlantedConfig {
  std::size_t users = 400;
  std::size_t categories = 8;
  std::size_t items_per_category = 40;
  std::size_t half_length = 20;
  std::vector<std::size_t> homes;
  std::vector<std::size_t> companion;   // indexed by category; empty = no companion
  std::vector<std::size_t> transition;  // indexed by category
  std::uint64_t seed = 1;
};

struct PlantedUser {
  std::string id;
  std::size_t home = 0;
};

inline data::Dataset planted_dataset(const PlantedConfig& cfg, std::vector<PlantedUser>* users = nullptr) {
  Rng rng(cfg.seed);
  std::vector<data::ItemCategoryRow> items;
  for (std::size_t c = 0; c < cfg.categories; ++c) {
    for (std::size_t n = 0; n < cfg.items_per_category; ++n) {
      items.push_back({"c" + std::to_string(c) + "_" + std::to_string(n), {"C" + std::to_string(c)}, ""});
    }
  }
  auto draw_item = [&](std::size_t c) {
    return "c" + std::to_string(c) + "_" + std::to_string(rng.below(cfg.items_per_category));
  };
  data::RawSplit split;
  std::int64_t t = 0;
  for (std::size_t u = 0; u < cfg.users; ++u) {
    const std::string id = "u" + std::to_string(u);
    const auto home = cfg.homes[rng.below(cfg.homes.size())];
    if (users) users->push_back({id, home});
    const double w_home = 0.5 + 0.2 * rng.uniform();
    const bool has_companion = !cfg.companion.empty();
    for (std::size_t n = 0; n < cfg.half_length; ++n) {
      const double x = rng.uniform();
      std::size_t c;
      if (x < w_home) c = home;
      else if (x < 0.9 && has_companion) c = cfg.companion[home];
      else if (x < 0.9) c = home;
      else c = rng.below(cfg.categories);
      split.train.push_back({id, draw_item(c), 5, t++});
    }
    for (std::size_t n = 0; n < cfg.half_length; ++n) {
      const auto c = rng.uniform() < 0.8 ? cfg.transition[home] : rng.below(cfg.categories);
      split.train.push_back({id, draw_item(c), 5, t++});
    }
  }
  return data::build_dataset(split, {}, items);
}

/// A small ML-1M-shaped corpus (gender/age/occupation, multi-label genres,
/// planted preference shifts) after the standard preparation.
inline data::Dataset small_corpus(std::uint64_t seed = 7, int users = 150, int items = 160) {
  data::SyntheticConfig sc;
  sc.users = users;
  sc.items = items;
  sc.categories = 8;
  sc.min_interactions = 25;
  sc.max_interactions = 60;
  sc.seed = seed;
  data::PrepareOptions opt;
  opt.kcore = 5;
  return data::prepare(data::generate_synthetic(sc), opt);
}

}  // namespace ucrs::testing
