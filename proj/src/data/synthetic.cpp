#include "ucrs/data/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

#include "ucrs/random.hpp"

namespace ucrs::data {

namespace {

std::size_t draw(Rng& rng, const std::vector<double>& weights) {
  const double total = std::accumulate(weights.begin(), weights.end(), 0.0);
  double x = rng.uniform() * total;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    x -= weights[i];
    if (x < 0) return i;
  }
  return weights.size() - 1;
}

void normalize(std::vector<double>& v) {
  const double s = std::accumulate(v.begin(), v.end(), 0.0);
  for (auto& x : v) x /= s;
}

}  // namespace

RawCorpus generate_synthetic(const SyntheticConfig& config) {
  if (config.users < 1 || config.items < config.categories || config.categories < 2) {
    throw InvalidArgument("synthetic corpus needs users >= 1, categories >= 2, items >= categories");
  }
  Rng rng(config.seed);
  const auto n_cat = static_cast<std::size_t>(config.categories);
  RawCorpus corpus;

  // Category sizes are skewed so a few categories dominate, as in movie catalogs.
  std::vector<double> category_mass(n_cat);
  for (std::size_t c = 0; c < n_cat; ++c) category_mass[c] = 1.0 / std::sqrt(1.0 + c);

  std::vector<std::vector<std::size_t>> items_in(n_cat);
  std::vector<double> popularity(static_cast<std::size_t>(config.items));
  for (int i = 0; i < config.items; ++i) {
    const auto idx = static_cast<std::size_t>(i);
    std::set<std::size_t> cats;
    // every category gets at least one primary item
    cats.insert(idx < n_cat ? idx : draw(rng, category_mass));
    if (rng.uniform() < config.multi_label_rate) {
      cats.insert(rng.below(n_cat));
      if (rng.uniform() < 0.3) cats.insert(rng.below(n_cat));
    }
    ItemCategoryRow row{"i" + std::to_string(i), {}, "Item " + std::to_string(i)};
    for (auto c : cats) {
      row.categories.push_back("C" + std::to_string(c));
      items_in[c].push_back(idx);
    }
    corpus.item_categories.push_back(std::move(row));
    popularity[idx] = 1.0 / std::pow(1.0 + static_cast<double>(rng.below(config.items)), 0.7);
  }

  // Planted transition for users whose taste shifts late in their timeline.
  std::vector<std::size_t> transition(n_cat);
  for (std::size_t c = 0; c < n_cat; ++c) transition[c] = (c + 1 + c % 2) % n_cat;

  static const char* kAges[] = {"1", "18", "25", "35", "45", "50", "56"};
  const std::int64_t horizon = 100'000'000;

  for (int u = 0; u < config.users; ++u) {
    const std::string user_id = "u" + std::to_string(u);
    const bool male = rng.uniform() < 0.7;
    const auto age = rng.below(7);
    const auto occupation = rng.below(5);
    corpus.user_features.push_back(
        {user_id,
         {{"gender", male ? "M" : "F"},
          {"age", kAges[age]},
          {"occupation", std::to_string(occupation)}}});

    std::vector<double> taste(category_mass);
    for (std::size_t c = 0; c < n_cat; ++c) {
      if ((c % 2 == 0) == male) taste[c] *= 2.0;
      if (c == age % n_cat) taste[c] *= 2.0;
    }
    const auto favourite = draw(rng, taste);
    taste[favourite] += 3.0;
    taste[rng.below(n_cat)] += 1.0;
    normalize(taste);

    std::vector<double> shifted = taste;
    const bool shifts = rng.uniform() < config.shift_fraction;
    if (shifts) {
      const auto fav = argmax_lowest(taste);
      for (auto& x : shifted) x *= 0.2;
      shifted[transition[fav]] += 0.8;
    }

    const auto span = static_cast<std::uint64_t>(config.max_interactions - config.min_interactions + 1);
    const auto n = config.min_interactions + static_cast<int>(rng.below(span));
    std::vector<std::int64_t> times(static_cast<std::size_t>(n));
    for (auto& t : times) t = static_cast<std::int64_t>(rng.below(horizon));
    std::sort(times.begin(), times.end());

    std::set<std::size_t> seen;
    for (auto t : times) {
      const bool after = shifts && t >= static_cast<std::int64_t>(config.shift_point * horizon);
      const auto& current = after ? shifted : taste;
      std::size_t item = 0;
      bool found = false;
      for (int attempt = 0; attempt < 20 && !found; ++attempt) {
        const auto c = draw(rng, current);
        std::vector<double> w;
        w.reserve(items_in[c].size());
        for (auto i : items_in[c]) w.push_back(popularity[i]);
        item = items_in[c][draw(rng, w)];
        found = !seen.contains(item);
      }
      if (!found) continue;
      seen.insert(item);
      int rating = rng.uniform() < config.negative_rating_rate
                       ? 1 + static_cast<int>(rng.below(3))
                       : 4 + static_cast<int>(rng.below(2));
      corpus.interactions.push_back({user_id, "i" + std::to_string(item), rating, t});
    }
  }
  return corpus;
}

}  // namespace ucrs::data
