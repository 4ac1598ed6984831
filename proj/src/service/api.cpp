#include "ucrs/service/api.hpp"

#include <set>

#include "util/text.hpp"

namespace ucrs::service {

namespace {

UserIndex require_user(const ServingSnapshot& snap, const std::string& id) {
  const auto u = snap.find_user(id);
  if (!u) throw ApiError(404, "unknown_user", "no user with id '" + id + "'");
  return *u;
}

nlohmann::json category_names(const data::Dataset& ds, std::span<const CategoryIndex> cats) {
  auto out = nlohmann::json::array();
  for (auto c : cats) out.push_back(ds.category_names[c]);
  return out;
}

nlohmann::json item_json(const data::Dataset& ds, ItemIndex i) {
  const auto& item = ds.items[i];
  return {{"id", ds.item_ids.name(i)}, {"name", item.name}, {"categories", category_names(ds, item.categories)}};
}

nlohmann::json slate_json(const data::Dataset& ds, const control::RankedList& ranked) {
  auto items = nlohmann::json::array();
  for (std::size_t j = 0; j < ranked.items.size(); ++j) {
    auto it = item_json(ds, ranked.items[j]);
    it["rank"] = j + 1;
    it["score"] = ranked.adjusted[j];
    it["base_score"] = ranked.base[j];
    items.push_back(std::move(it));
  }
  return {{"items", items}, {"short_list", ranked.short_list}};
}

nlohmann::json distribution_json(const data::Dataset& ds, const data::CategoryDistribution& d) {
  auto out = nlohmann::json::array();
  for (std::size_t c = 0; c < d.size(); ++c) out.push_back({{"category", ds.category_names[c]}, {"share", d.probs[c]}});
  return out;
}

nlohmann::json optional_number(std::optional<double> v) { return v ? nlohmann::json(*v) : nlohmann::json(nullptr); }

std::size_t parse_k(const std::map<std::string, std::string>& query, std::size_t fallback) {
  const auto it = query.find("k");
  if (it == query.end()) return fallback;
  const auto k = detail::parse_number<std::size_t>(it->second);
  if (!k || *k > kMaxK) {
    throw ApiError(422, "invalid_parameter", "k must be an integer in [0, " + std::to_string(kMaxK) + "]");
  }
  return *k;
}

nlohmann::json error_body(const std::string& code, const std::string& message) {
  return {{"code", code}, {"message", message}};
}

}  // namespace

nlohmann::json health_json(const ServingSnapshot& snap) {
  const auto& ds = snap.dataset();
  return {{"status", "ok"},
          {"version", snap.version()},
          {"users", ds.num_users()},
          {"items", ds.num_items()},
          {"categories", ds.num_categories()},
          {"model", model::kind_name(snap.params().kind)},
          {"predictor", snap.predictor() != nullptr}};
}

nlohmann::json recommendations_json(const ServingSnapshot& snap, const std::string& user_id, std::size_t k) {
  const auto u = require_user(snap, user_id);
  const auto result = snap.baseline_top(u, k);
  auto out = slate_json(snap.dataset(), result.ranked);
  out["user"] = user_id;
  out["k"] = k;
  out["provenance"] = "baseline";
  out["version"] = snap.version();
  return out;
}

nlohmann::json control_json(const ServingSnapshot& snap, const std::string& user_id, const nlohmann::json& command,
                            std::size_t k) {
  const auto u = require_user(snap, user_id);
  const auto& ds = snap.dataset();
  control::ControlCommand resolved;
  control::CommandSpec spec;
  control::ControlResult adjusted;
  try {
    spec = control::parse_command(command);
    resolved = control::resolve(ds, u, spec, snap.options().defaults);
    adjusted = control::apply_control(snap.scorer(), snap.predictor(), u, resolved, {k});
  } catch (const InvalidArgument& e) {
    throw ApiError(422, "invalid_command", e.what());
  }
  const auto base = snap.baseline_top(u, k);

  std::set<ItemIndex> before(base.ranked.items.begin(), base.ranked.items.end());
  std::set<ItemIndex> after(adjusted.ranked.items.begin(), adjusted.ranked.items.end());
  auto entering = nlohmann::json::array(), leaving = nlohmann::json::array();
  for (auto i : adjusted.ranked.items) {
    if (!before.contains(i)) entering.push_back(ds.item_ids.name(i));
  }
  for (auto i : base.ranked.items) {
    if (!after.contains(i)) leaving.push_back(ds.item_ids.name(i));
  }
  const auto& history = ds.histories[u].train;
  const auto mcd_of = [&](const control::RankedList& r) -> std::optional<double> {
    if (history.empty() || r.items.empty()) return std::nullopt;
    return detect::mcd(ds, r.items, history);
  };
  auto tcd = nlohmann::json::array();
  for (auto c : adjusted.targets) {
    const auto share = [&](const control::RankedList& r) {
      return r.items.empty() ? nlohmann::json(nullptr) : nlohmann::json(detect::tcd(ds, r.items, c));
    };
    tcd.push_back({{"category", ds.category_names[c]}, {"before", share(base.ranked)}, {"after", share(adjusted.ranked)}});
  }

  nlohmann::json edit = nullptr;
  if (adjusted.edit.kind != control::FeatureEdit::Kind::None) {
    edit = {{"kind", adjusted.edit.kind == control::FeatureEdit::Kind::Override ? "override" : "mask"},
            {"feature", ds.feature_name(adjusted.edit.feature)}};
  }
  auto applied = control::to_json(spec);
  applied["alpha"] = adjusted.alpha;

  return {{"user", user_id},
          {"k", k},
          {"command", applied},
          {"provenance",
           {{"summary", adjusted.provenance()},
            {"type", adjusted.command},
            {"alpha", adjusted.alpha},
            {"beta", adjusted.beta},
            {"edit", edit},
            {"targets", category_names(ds, adjusted.targets)},
            {"majority", adjusted.majority ? nlohmann::json(ds.category_names[*adjusted.majority])
                                           : nlohmann::json(nullptr)},
            {"predicted", adjusted.predicted},
            {"prediction_short", adjusted.prediction_short}}},
          {"adjusted", slate_json(ds, adjusted.ranked)},
          {"baseline", slate_json(ds, base.ranked)},
          {"delta",
           {{"entering", entering},
            {"leaving", leaving},
            {"mcd", {{"before", optional_number(mcd_of(base.ranked))}, {"after", optional_number(mcd_of(adjusted.ranked))}}},
            {"tcd", tcd},
            {"coverage",
             {{"before", detect::coverage(ds, base.ranked.items)}, {"after", detect::coverage(ds, adjusted.ranked.items)}}}}},
          {"version", snap.version()}};
}

nlohmann::json bubble_report_json(const ServingSnapshot& snap, const std::string& user_id) {
  const auto u = require_user(snap, user_id);
  const auto& ds = snap.dataset();
  const auto& r = snap.report(u);
  const auto& g = snap.grouping();
  return {{"user", user_id},
          {"report",
           {{"coverage", r.report.coverage},
            {"iso_index", r.report.iso_index},
            {"mcd", optional_number(r.mcd)},
            {"severity", r.report.severity},
            {"severity_score", r.severity_score},
            {"rule_version", detect::kSeverityRuleVersion},
            {"window", {{"start", r.report.window_start}, {"end", r.report.window_end}}}}},
          {"grouping", snap.grouping_name()},
          {"group", r.group == detect::Grouping::kNoGroup ? nlohmann::json(nullptr) : nlohmann::json(g.names[r.group])},
          {"history_distribution", distribution_json(ds, data::category_distribution(ds, ds.histories[u].train))},
          {"recommendation_distribution",
           distribution_json(ds, data::category_distribution(ds, snap.baseline(u).ranked.items))},
          {"version", snap.version()}};
}

nlohmann::json history_json(const ServingSnapshot& snap, const std::string& user_id) {
  const auto u = require_user(snap, user_id);
  const auto& ds = snap.dataset();
  const auto& h = ds.histories[u];
  auto items = nlohmann::json::array();
  for (std::size_t j = 0; j < h.train.size(); ++j) {
    auto it = item_json(ds, h.train[j]);
    it["timestamp"] = h.train_timestamps[j];
    items.push_back(std::move(it));
  }
  auto features = nlohmann::json::array();
  for (auto f : ds.users[u].features) features.push_back(ds.feature_name(f));
  return {{"user", user_id}, {"features", features}, {"items", items}, {"version", snap.version()}};
}

nlohmann::json categories_json(const ServingSnapshot& snap) {
  const auto& ds = snap.dataset();
  std::vector<std::size_t> counts(ds.num_categories(), 0);
  for (const auto& item : ds.items) {
    for (auto c : item.categories) ++counts[c];
  }
  auto cats = nlohmann::json::array();
  for (std::size_t c = 0; c < ds.num_categories(); ++c) {
    cats.push_back({{"index", c}, {"name", ds.category_names[c]}, {"items", counts[c]}});
  }
  return {{"categories", cats}, {"version", snap.version()}};
}

nlohmann::json user_features_json(const ServingSnapshot& snap) {
  auto groups = nlohmann::json::array();
  for (const auto& g : snap.dataset().attribute_groups) groups.push_back({{"name", g.name}, {"values", g.values}});
  return {{"groups", groups}, {"version", snap.version()}};
}

ApiResponse handle(const ServingSnapshot& snap, const ApiRequest& req) {
  try {
    const auto parts = detail::split(req.path, "/");
    // parts[0] is the empty string before the leading slash
    const auto method_is = [&](const char* m) {
      if (req.method != m) throw ApiError(405, "method_not_allowed", req.method + " is not allowed on " + req.path);
    };
    if (req.path == "/healthz") {
      method_is("GET");
      return {200, health_json(snap)};
    }
    if (req.path == "/catalog/categories") {
      method_is("GET");
      return {200, categories_json(snap)};
    }
    if (req.path == "/catalog/user-features") {
      method_is("GET");
      return {200, user_features_json(snap)};
    }
    if (parts.size() == 4 && parts[0].empty() && parts[1] == "users" && !parts[2].empty()) {
      const std::string user(parts[2]);
      if (parts[3] == "recommendations") {
        method_is("GET");
        return {200, recommendations_json(snap, user, parse_k(req.query, snap.options().baseline_depth))};
      }
      if (parts[3] == "controls") {
        method_is("POST");
        nlohmann::json command;
        try {
          command = nlohmann::json::parse(req.body);
        } catch (const nlohmann::json::exception&) {
          require_user(snap, user);
          throw ApiError(422, "invalid_command", "request body is not valid JSON");
        }
        return {200, control_json(snap, user, command, parse_k(req.query, snap.options().baseline_depth))};
      }
      if (parts[3] == "bubble-report") {
        method_is("GET");
        return {200, bubble_report_json(snap, user)};
      }
      if (parts[3] == "history") {
        method_is("GET");
        return {200, history_json(snap, user)};
      }
    }
    throw ApiError(404, "not_found", "no route for " + req.path);
  } catch (const ApiError& e) {
    return {e.status(), error_body(e.code(), e.what())};
  } catch (const std::exception&) {
    return {500, error_body("internal", "internal error")};
  }
}

}  // namespace ucrs::service
