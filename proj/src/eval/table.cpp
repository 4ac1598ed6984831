#include "ucrs/eval/table.hpp"

#include <cmath>
#include <iomanip>
#include <limits>
#include <sstream>

#include "ucrs/detect/bubble.hpp"

namespace ucrs::eval {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::size_t display_width(const std::string& s) {
  std::size_t w = 0;
  for (unsigned char c : s) w += (c & 0xC0) != 0x80 ? 1 : 0;
  return w;
}

std::string pad(const std::string& s, std::size_t width, bool left) {
  const auto w = display_width(s);
  const std::string fill(width > w ? width - w : 0, ' ');
  return left ? s + fill : fill + s;
}

std::string fixed4(double v) {
  if (std::isnan(v)) return "-";
  std::ostringstream out;
  out << std::fixed << std::setprecision(4) << v;
  return out.str();
}

}  // namespace

std::string metric_name(Metric m) {
  switch (m) {
    case Metric::Recall: return "Recall";
    case Metric::NDCG: return "NDCG";
    case Metric::WNDCG: return "W-NDCG";
    case Metric::IsoIndex: return "Iso-Index";
    case Metric::DisEuc: return "DIS-EUC";
    case Metric::MCD: return "MCD";
    case Metric::TCD: return "TCD";
    case Metric::Coverage: return "Coverage";
  }
  return "?";
}

bool higher_is_better(Metric m) {
  return !(m == Metric::IsoIndex || m == Metric::DisEuc || m == Metric::MCD);
}

std::vector<Metric> columns_for(Scenario s) {
  switch (s) {
    case Scenario::UserFine:
      return {Metric::Recall, Metric::NDCG, Metric::IsoIndex, Metric::DisEuc, Metric::Coverage};
    case Scenario::UserCoarse:
      return {Metric::Recall, Metric::NDCG, Metric::IsoIndex, Metric::Coverage};
    default:
      return {Metric::Recall, Metric::NDCG, Metric::WNDCG, Metric::MCD, Metric::TCD, Metric::Coverage};
  }
}

GroupReference group_reference(const data::Dataset& ds, const Cohort& cohort,
                               std::span<const detect::Slate> slates) {
  const auto group = ds.find_group(cohort.attribute);
  if (!group) throw InvalidArgument("cohort has no attribute group");
  const auto& g = ds.attribute_groups[*group];
  std::vector<std::vector<data::CategoryDistribution>> per_value(g.values.size());
  for (std::size_t j = 0; j < slates.size(); ++j) {
    const auto own = *cohort.members.at(j).own_feature;
    per_value[own - g.first_feature].push_back(data::category_distribution(ds, slates[j].items));
  }
  GroupReference ref;
  for (const auto& dists : per_value) {
    ref.by_value.push_back(data::average_distribution(dists, ds.num_categories()));
  }
  return ref;
}

ResultRow evaluate_row(const data::Dataset& ds, const Cohort& cohort, std::span<const detect::Slate> slates,
                       const GroupReference* reference) {
  if (slates.size() != cohort.members.size()) {
    throw InvalidArgument("slate count " + std::to_string(slates.size()) + " does not match cohort size " +
                          std::to_string(cohort.members.size()));
  }
  for (std::size_t j = 0; j < slates.size(); ++j) {
    if (slates[j].user != cohort.members[j].user) throw InvalidArgument("slates are not in cohort order");
  }
  const auto columns = columns_for(cohort.scenario);
  ResultRow row;
  for (auto metric : columns) {
    CompensatedSum sum;
    if (metric == Metric::IsoIndex) {
      const auto grouping = detect::group_users(ds, cohort.attribute);
      const auto groups = detect::group_exposures(ds, slates, grouping);
      std::size_t users = 0;
      for (const auto& s : slates) users += grouping.group[s.user] != detect::Grouping::kNoGroup ? 1 : 0;
      row.values.push_back(groups.size() < 2 ? kNaN : detect::pairwise_isolation(groups));
      row.counts.push_back(groups.size() < 2 ? 0 : users);
      continue;
    }
    for (std::size_t j = 0; j < slates.size(); ++j) {
      const auto& m = cohort.members[j];
      const auto& items = slates[j].items;
      const auto& test = ds.histories[m.user].test;
      std::vector<ItemIndex> positives(test.begin(), test.end());
      std::sort(positives.begin(), positives.end());
      std::optional<double> v;
      switch (metric) {
        case Metric::Recall: v = detect::recall_at_k(items, positives); break;
        case Metric::NDCG: v = detect::ndcg_at_k(items, positives); break;
        case Metric::WNDCG: v = detect::w_ndcg_at_k(ds, items, positives, *m.target_category); break;
        case Metric::MCD:
          if (!items.empty()) v = detect::mcd(ds, items, ds.histories[m.user].train);
          break;
        case Metric::TCD:
          if (!items.empty()) v = detect::tcd(ds, items, *m.target_category);
          break;
        case Metric::Coverage: v = static_cast<double>(detect::coverage(ds, items)); break;
        case Metric::DisEuc: {
          if (!reference) throw InvalidArgument("DIS-EUC needs group reference distributions");
          const auto g = ds.attribute_groups[ds.group_of(*m.own_feature)].first_feature;
          v = detect::dis_euc(data::category_distribution(ds, items),
                              reference->by_value.at(*m.own_feature - g),
                              reference->by_value.at(*m.target_feature - g));
          break;
        }
        case Metric::IsoIndex: break;
      }
      if (v) sum.add(*v);
    }
    row.values.push_back(sum.count() == 0 ? kNaN : sum.mean());
    row.counts.push_back(sum.count());
  }
  return row;
}

std::vector<std::pair<int, int>> best_rows(const ResultTable& table) {
  std::vector<std::pair<int, int>> out;
  for (std::size_t c = 0; c < table.columns.size(); ++c) {
    const bool up = higher_is_better(table.columns[c]);
    int best = -1, second = -1;
    const auto better = [&](int a, int b) {
      if (b < 0) return true;
      const double va = table.rows[a].values[c], vb = table.rows[b].values[c];
      return up ? va > vb : va < vb;
    };
    for (std::size_t r = 0; r < table.rows.size(); ++r) {
      if (table.rows[r].label == "Random" || std::isnan(table.rows[r].values[c])) continue;
      const int i = static_cast<int>(r);
      if (better(i, best)) {
        second = best;
        best = i;
      } else if (better(i, second)) {
        second = i;
      }
    }
    out.emplace_back(best, second);
  }
  return out;
}

nlohmann::json to_json(const ResultTable& table) {
  nlohmann::json j;
  j["scenario"] = scenario_name(table.scenario);
  j["dataset"] = table.dataset;
  j["cohort_size"] = table.cohort_size;
  j["columns"] = nlohmann::json::array();
  for (auto m : table.columns) {
    j["columns"].push_back({{"name", metric_name(m)}, {"higher_is_better", higher_is_better(m)}});
  }
  const auto best = best_rows(table);
  j["rows"] = nlohmann::json::array();
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    const auto& row = table.rows[r];
    nlohmann::json values = nlohmann::json::object(), counts = nlohmann::json::object();
    for (std::size_t c = 0; c < table.columns.size(); ++c) {
      const auto name = metric_name(table.columns[c]);
      values[name] = std::isnan(row.values[c]) ? nlohmann::json(nullptr) : nlohmann::json(row.values[c]);
      counts[name] = row.counts[c];
    }
    j["rows"].push_back({{"label", row.label}, {"values", values}, {"users", counts}, {"settings", row.settings}});
  }
  nlohmann::json best_json = nlohmann::json::object();
  for (std::size_t c = 0; c < table.columns.size(); ++c) {
    const auto [b, s] = best[c];
    best_json[metric_name(table.columns[c])] = {
        {"best", b < 0 ? nlohmann::json(nullptr) : nlohmann::json(table.rows[b].label)},
        {"second", s < 0 ? nlohmann::json(nullptr) : nlohmann::json(table.rows[s].label)}};
  }
  j["best"] = best_json;
  return j;
}

std::string render_text(const ResultTable& table) {
  const auto best = best_rows(table);
  std::vector<std::vector<std::string>> cells;
  std::vector<std::string> header{"Method"};
  for (auto m : table.columns) header.push_back(metric_name(m) + (higher_is_better(m) ? " ↑" : " ↓"));
  cells.push_back(header);
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    std::vector<std::string> line{table.rows[r].label};
    for (std::size_t c = 0; c < table.columns.size(); ++c) {
      std::string v = fixed4(table.rows[r].values[c]);
      if (best[c].first == static_cast<int>(r)) {
        v += "*";
      } else if (best[c].second == static_cast<int>(r)) {
        v += "_";
      } else {
        v += " ";
      }
      line.push_back(v);
    }
    cells.push_back(line);
  }
  std::vector<std::size_t> width(header.size(), 0);
  for (const auto& line : cells) {
    for (std::size_t c = 0; c < line.size(); ++c) width[c] = std::max(width[c], display_width(line[c]));
  }
  std::ostringstream out;
  out << "scenario: " << scenario_name(table.scenario) << "  dataset: " << table.dataset
      << "  cohort: " << table.cohort_size << " users\n";
  for (std::size_t r = 0; r < cells.size(); ++r) {
    for (std::size_t c = 0; c < cells[r].size(); ++c) {
      out << (c == 0 ? "" : "  ") << pad(cells[r][c], width[c], c == 0);
    }
    out << '\n';
    if (r == 0) {
      std::size_t total = 0;
      for (auto w : width) total += w + 2;
      out << std::string(total - 2, '-') << '\n';
    }
  }
  out << "* best, _ second best (Random excluded)\n";
  return out.str();
}

}  // namespace ucrs::eval
