#pragma once

#include <string>
#include <vector>

#include "json.hpp"

#include "ucrs/data/distribution.hpp"
#include "ucrs/detect/metrics.hpp"
#include "ucrs/eval/cohort.hpp"

namespace ucrs::eval {

enum class Metric { Recall, NDCG, WNDCG, IsoIndex, DisEuc, MCD, TCD, Coverage };

std::string metric_name(Metric m);
bool higher_is_better(Metric m);

/// Recall, NDCG, Iso-Index, DIS-EUC, Coverage for user_fine; user_coarse drops
/// DIS-EUC; item scenarios report Recall, NDCG, W-NDCG, MCD, TCD, Coverage.
std::vector<Metric> columns_for(Scenario s);

/// Average slate category distribution of each value of the cohort attribute,
/// indexed by the value's offset inside the attribute group.
struct GroupReference {
  std::vector<data::CategoryDistribution> by_value;
};

GroupReference group_reference(const data::Dataset& ds, const Cohort& cohort,
                               std::span<const detect::Slate> slates);

struct ResultRow {
  std::string label;
  /// One entry per table column; NaN when no cohort user defines the metric.
  std::vector<double> values;
  /// Per-column number of users averaged (Iso-Index: users in the exposure groups).
  std::vector<std::size_t> counts;
  nlohmann::json settings = nlohmann::json::object();
};

/// Macro averages over the cohort. Recall, NDCG and W-NDCG skip users without
/// test positives; Iso-Index is the mean pairwise index between the attribute
/// groups (user scenarios); DIS-EUC measures against `reference`. Throws
/// InvalidArgument when the slates are not one per cohort member in order.
ResultRow evaluate_row(const data::Dataset& ds, const Cohort& cohort, std::span<const detect::Slate> slates,
                       const GroupReference* reference = nullptr);

struct ResultTable {
  Scenario scenario = Scenario::ItemFine;
  std::string dataset;
  std::size_t cohort_size = 0;
  std::vector<Metric> columns;
  std::vector<ResultRow> rows;
};

/// Row index of the best and second-best value per column, skipping rows
/// labelled "Random". -1 when fewer rows qualify.
std::vector<std::pair<int, int>> best_rows(const ResultTable& table);

nlohmann::json to_json(const ResultTable& table);
/// Aligned text rendering with direction arrows, '*' on the best and '_' on the
/// second-best value of each column.
std::string render_text(const ResultTable& table);

}  // namespace ucrs::eval
