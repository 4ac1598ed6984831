#include "ucrs/eval/experiment.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <set>

#include <yaml-cpp/yaml.h>

#include "ucrs/detect/slate_io.hpp"

namespace ucrs::eval {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

template <typename T>
std::vector<T> yaml_list(const YAML::Node& node, const std::string& key) {
  if (!node.IsSequence()) throw InvalidArgument("'" + key + "' must be a list");
  std::vector<T> out;
  for (const auto& v : node) out.push_back(v.as<T>());
  return out;
}

void check_keys(const YAML::Node& node, const std::set<std::string>& allowed, const std::string& where) {
  if (!node.IsMap()) throw InvalidArgument(where + " must be a mapping");
  for (const auto& kv : node) {
    const auto key = kv.first.as<std::string>();
    if (!allowed.contains(key)) throw InvalidArgument("unknown key '" + key + "' in " + where);
  }
}

bool contains(const std::vector<Variant>& vs, Variant v) {
  return std::find(vs.begin(), vs.end(), v) != vs.end();
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  out << text;
}

nlohmann::json row_json(const ResultTable& shape, const ResultRow& row) {
  nlohmann::json j = nlohmann::json::object();
  for (std::size_t c = 0; c < shape.columns.size(); ++c) {
    j[metric_name(shape.columns[c])] =
        std::isnan(row.values[c]) ? nlohmann::json(nullptr) : nlohmann::json(row.values[c]);
  }
  return j;
}

double mean_share(const data::Dataset& ds, const Cohort& cohort, std::span<const detect::Slate> slates,
                  bool target) {
  CompensatedSum sum;
  for (std::size_t j = 0; j < slates.size(); ++j) {
    const auto& m = cohort.members[j];
    if (slates[j].items.empty()) continue;
    if (target && m.target_category) {
      sum.add(detect::tcd(ds, slates[j].items, *m.target_category));
    } else if (!target) {
      sum.add(detect::mcd(ds, slates[j].items, ds.histories[m.user].train));
    }
  }
  return sum.count() == 0 ? kNaN : sum.mean();
}

nlohmann::json number_or_null(double v) { return std::isnan(v) ? nlohmann::json(nullptr) : nlohmann::json(v); }

}  // namespace

void validate(const ExperimentConfig& c) {
  if (c.alpha_grid.empty() || c.beta_grid.empty() || c.k_grid.empty() || c.learning_rate_grid.empty() ||
      c.hidden_grid.empty() || c.l2_grid.empty() || c.predictor_hidden_grid.empty() || c.seeds.empty()) {
    throw InvalidArgument("every grid and the seed list must be non-empty");
  }
  for (double a : c.alpha_grid) {
    if (!(a >= 0.0 && a <= 0.5)) throw InvalidArgument("alpha grid values must lie in [0, 0.5]");
  }
  for (double b : c.beta_grid) {
    if (!(b >= 0.0 && b <= 0.1)) throw InvalidArgument("beta grid values must lie in [0, 0.1]");
  }
  for (auto k : c.k_grid) {
    if (k < 1 || k > 5) throw InvalidArgument("K grid values must lie in 1..5");
  }
  for (double lr : c.learning_rate_grid) {
    if (!(lr > 0.0)) throw InvalidArgument("learning rates must be positive");
  }
  for (double l2 : c.l2_grid) {
    if (!(l2 >= 0.0)) throw InvalidArgument("l2 values must be non-negative");
  }
  if (c.k == 0) throw InvalidArgument("k must be positive");
  if (c.variants.empty()) throw InvalidArgument("no variants listed");
  for (auto v : c.variants) {
    if (!applicable(v, c.scenario)) {
      throw InvalidArgument("variant " + variant_key(v) + " does not apply to scenario " +
                            scenario_name(c.scenario));
    }
  }
  if (is_user_scenario(c.scenario) && c.attribute.empty()) {
    throw InvalidArgument("user scenarios need an attribute");
  }
  for (const auto& s : c.sweeps) {
    if (s != "alpha" && s != "beta") throw InvalidArgument("unknown sweep parameter '" + s + "'");
  }
}

ExperimentConfig load_experiment_config(const std::filesystem::path& path) {
  YAML::Node root;
  try {
    root = YAML::LoadFile(path.string());
  } catch (const YAML::BadFile&) {
    throw IoError("cannot open " + path.string());
  } catch (const YAML::Exception& e) {
    throw InvalidArgument(path.string() + ": " + e.what());
  }
  ExperimentConfig c;
  try {
    check_keys(root, {"dataset", "scenario", "attribute", "model", "variants", "grids", "seeds", "k", "train",
                      "predictor", "sweeps"},
               "experiment config");
    if (!root["dataset"] || !root["scenario"] || !root["variants"]) {
      throw InvalidArgument("experiment config needs dataset, scenario and variants");
    }
    c.dataset = root["dataset"].as<std::string>();
    if (c.dataset.is_relative()) c.dataset = path.parent_path() / c.dataset;
    c.scenario = parse_scenario(root["scenario"].as<std::string>());
    if (root["attribute"]) c.attribute = root["attribute"].as<std::string>();
    if (root["model"]) c.kind = model::parse_kind(root["model"].as<std::string>());
    for (const auto& v : yaml_list<std::string>(root["variants"], "variants")) c.variants.push_back(parse_variant(v));
    if (root["seeds"]) c.seeds = yaml_list<std::uint64_t>(root["seeds"], "seeds");
    if (root["k"]) c.k = root["k"].as<std::size_t>();
    if (const auto g = root["grids"]) {
      check_keys(g, {"alpha", "beta", "k_targets", "learning_rate", "hidden", "l2", "predictor_hidden"}, "grids");
      if (g["alpha"]) c.alpha_grid = yaml_list<double>(g["alpha"], "alpha");
      if (g["beta"]) c.beta_grid = yaml_list<double>(g["beta"], "beta");
      if (g["k_targets"]) c.k_grid = yaml_list<std::size_t>(g["k_targets"], "k_targets");
      if (g["learning_rate"]) c.learning_rate_grid = yaml_list<double>(g["learning_rate"], "learning_rate");
      if (g["hidden"]) c.hidden_grid = yaml_list<std::size_t>(g["hidden"], "hidden");
      if (g["l2"]) c.l2_grid = yaml_list<double>(g["l2"], "l2");
      if (g["predictor_hidden"]) {
        c.predictor_hidden_grid = yaml_list<std::size_t>(g["predictor_hidden"], "predictor_hidden");
      }
    }
    if (const auto t = root["train"]) {
      check_keys(t, {"dim", "batch_size", "max_epochs", "patience", "init_scale", "eval_every", "negatives"},
                 "train");
      if (t["dim"]) c.train.dim = t["dim"].as<std::size_t>();
      if (t["batch_size"]) c.train.batch_size = t["batch_size"].as<std::size_t>();
      if (t["max_epochs"]) c.train.max_epochs = t["max_epochs"].as<int>();
      if (t["patience"]) c.train.patience = t["patience"].as<int>();
      if (t["init_scale"]) c.train.init_scale = t["init_scale"].as<double>();
      if (t["eval_every"]) c.train.eval_every = t["eval_every"].as<int>();
      if (t["negatives"]) {
        const auto mode = t["negatives"].as<std::string>();
        if (mode != "per_epoch" && mode != "fixed") throw InvalidArgument("negatives must be per_epoch or fixed");
        c.train.resample_negatives = mode == "per_epoch";
      }
    }
    if (const auto p = root["predictor"]) {
      check_keys(p, {"epochs", "learning_rate", "batch_size"}, "predictor");
      if (p["epochs"]) c.predictor.epochs = p["epochs"].as<int>();
      if (p["learning_rate"]) c.predictor.learning_rate = p["learning_rate"].as<double>();
      if (p["batch_size"]) c.predictor.batch_size = p["batch_size"].as<std::size_t>();
    }
    if (root["sweeps"]) c.sweeps = yaml_list<std::string>(root["sweeps"], "sweeps");
  } catch (const YAML::Exception& e) {
    throw InvalidArgument(path.string() + ": " + e.what());
  }
  c.train.kind = c.kind;
  validate(c);
  return c;
}

Selection select_best(std::span<const GridPoint> points, double noise) {
  if (points.empty()) throw InvalidArgument("empty grid");
  Selection s;
  const auto value = [](double v) { return std::isnan(v) ? -std::numeric_limits<double>::infinity() : v; };
  for (std::size_t j = 1; j < points.size(); ++j) {
    if (value(points[j].valid_recall) > value(points[s.index].valid_recall)) s.index = j;
  }
  const double best = value(points[s.index].valid_recall);
  for (std::size_t j = 0; j < points.size(); ++j) {
    if (j != s.index && value(points[j].valid_recall) >= best - noise) s.tie = true;
  }
  return s;
}

ModelChoice select_model(const data::Dataset& ds, const ExperimentConfig& config, const GridLog& log) {
  std::vector<GridPoint> points;
  std::vector<model::TrainConfig> configs;
  std::vector<model::ModelParams> first_seed;
  std::vector<double> spread;
  const std::vector<std::size_t> hidden =
      config.kind == model::ModelKind::NFM ? config.hidden_grid : std::vector<std::size_t>{config.train.hidden};
  for (double lr : config.learning_rate_grid) {
    for (auto h : hidden) {
      for (double l2 : config.l2_grid) {
        auto cfg = config.train;
        cfg.kind = config.kind;
        cfg.learning_rate = lr;
        cfg.hidden = h;
        cfg.l2 = l2;
        CompensatedSum recall;
        std::vector<double> per_seed;
        for (std::size_t s = 0; s < config.seeds.size(); ++s) {
          cfg.seed = config.seeds[s];
          auto result = model::train(ds, cfg);
          per_seed.push_back(result.best_valid_recall);
          recall.add(result.best_valid_recall);
          if (log) {
            log({{"stage", "model"}, {"model", "base"}, {"kind", model::kind_name(cfg.kind)},
                 {"learning_rate", lr}, {"hidden", h}, {"l2", l2}, {"seed", cfg.seed},
                 {"best_epoch", result.best_epoch}, {"valid_recall", number_or_null(result.best_valid_recall)}});
          }
          if (s == 0) first_seed.push_back(std::move(result.params));
        }
        double se = 0.0;
        if (per_seed.size() > 1) {
          CompensatedSum sq;
          for (double v : per_seed) sq.add((v - recall.mean()) * (v - recall.mean()));
          se = std::sqrt(sq.sum() / static_cast<double>(per_seed.size() - 1) / static_cast<double>(per_seed.size()));
        }
        cfg.seed = config.seeds.front();
        configs.push_back(cfg);
        spread.push_back(se);
        points.push_back({{{"learning_rate", lr}, {"hidden", h}, {"l2", l2}}, recall.mean()});
      }
    }
  }
  const auto first = select_best(points);
  const auto sel = select_best(points, spread[first.index]);
  if (log) {
    log({{"stage", "model_selected"}, {"params", points[sel.index].params},
         {"valid_recall", number_or_null(points[sel.index].valid_recall)}, {"seeds", config.seeds.size()},
         {"tie", sel.tie}});
  }
  return {configs[sel.index], std::move(first_seed[sel.index]), points[sel.index].valid_recall, sel.tie};
}

double cohort_validation_recall(const data::Dataset& ds, std::span<const detect::Slate> slates) {
  CompensatedSum sum;
  for (const auto& s : slates) {
    auto valid = ds.histories[s.user].valid;
    std::sort(valid.begin(), valid.end());
    if (const auto r = detect::recall_at_k(s.items, valid)) sum.add(*r);
  }
  return sum.count() == 0 ? kNaN : sum.mean();
}

ControlChoice select_coefficients(Variant v, const Models& models, const Cohort& cohort,
                                  const ExperimentConfig& config,
                                  std::span<const control::CategoryPredictor> predictors, const GridLog& log) {
  const auto& ds = models.base->dataset();
  const std::vector<double> alphas = uses_alpha(v) ? config.alpha_grid : std::vector<double>{0.0};
  const std::vector<double> betas = uses_beta(v) ? config.beta_grid : std::vector<double>{0.0};
  const std::vector<std::size_t> ks = uses_k_targets(v) ? config.k_grid : std::vector<std::size_t>{1};
  const std::size_t n_pred = v == Variant::CUCI ? predictors.size() : 1;
  if (v == Variant::CUCI && predictors.empty()) throw InvalidArgument("C-UCI needs a trained predictor");

  std::vector<GridPoint> points;
  std::vector<ControlChoice> choices;
  for (std::size_t p = 0; p < n_pred; ++p) {
    Models m = models;
    if (v == Variant::CUCI) m.predictor = &predictors[p];
    for (double a : alphas) {
      for (double b : betas) {
        for (auto kt : ks) {
          const Coefficients coef{a, b, kt};
          const auto slates =
              run_variant(v, m, cohort, coef, {config.k, control::CandidateMode::Validation, config.seeds.front()});
          const double recall = cohort_validation_recall(ds, slates);
          nlohmann::json params{{"alpha", a}, {"beta", b}, {"k_targets", kt}};
          if (v == Variant::CUCI) params["predictor_hidden"] = predictors[p].hidden;
          if (log) {
            nlohmann::json line{{"stage", "control"}, {"variant", variant_key(v)}, {"params", params},
                                {"valid_recall", number_or_null(recall)},
                                {"mcd", number_or_null(mean_share(ds, cohort, slates, false))}};
            if (!is_user_scenario(cohort.scenario)) {
              line["tcd"] = number_or_null(mean_share(ds, cohort, slates, true));
            }
            log(line);
          }
          points.push_back({params, recall});
          choices.push_back({coef, v == Variant::CUCI ? p : 0, recall, false});
        }
      }
    }
  }
  const auto sel = select_best(points);
  auto out = choices[sel.index];
  out.tie = sel.tie && points.size() > 1;
  return out;
}

std::vector<SweepPoint> sweep(Variant v, const Models& models, const Cohort& cohort, Coefficients fixed,
                              const std::string& parameter, std::span<const double> grid, std::size_t k,
                              const GroupReference* reference) {
  if (parameter != "alpha" && parameter != "beta") throw InvalidArgument("sweep parameter must be alpha or beta");
  std::vector<SweepPoint> out;
  for (double value : grid) {
    (parameter == "alpha" ? fixed.alpha : fixed.beta) = value;
    const auto slates = run_variant(v, models, cohort, fixed, {k, control::CandidateMode::Test, 1});
    out.push_back({value, evaluate_row(models.base->dataset(), cohort, slates, reference)});
  }
  return out;
}

ExperimentResult run_experiment(const data::Dataset& ds, const ExperimentConfig& config,
                                const std::filesystem::path& out_dir) {
  validate(config);
  const auto cohort = select_cohort(ds, config.scenario, config.attribute);
  if (cohort.members.empty()) throw Error("scenario " + scenario_name(config.scenario) + " selects no users");

  std::vector<nlohmann::json> log_lines;
  const GridLog log = [&](const nlohmann::json& j) { log_lines.push_back(j); };

  const auto chosen = select_model(ds, config, log);
  const model::Scorer base(chosen.params, ds);
  Models models{&base, nullptr, nullptr, nullptr};

  std::optional<model::ModelParams> wouf_params, woif_params;
  std::optional<model::Scorer> wouf, woif;
  const auto train_ablation = [&](bool user_features, const char* name) {
    auto cfg = chosen.config;
    cfg.with_user_features = user_features;
    cfg.with_item_categories = !user_features;
    auto r = model::train(ds, cfg);
    log({{"stage", "model"}, {"model", name}, {"seed", cfg.seed}, {"best_epoch", r.best_epoch},
         {"valid_recall", number_or_null(r.best_valid_recall)}});
    return std::move(r.params);
  };
  if (contains(config.variants, Variant::WoUF)) {
    wouf_params = train_ablation(false, "wouf");
    wouf.emplace(*wouf_params, ds);
    models.without_user_features = &*wouf;
  }
  if (contains(config.variants, Variant::WoIF)) {
    woif_params = train_ablation(true, "woif");
    woif.emplace(*woif_params, ds);
    models.without_item_features = &*woif;
  }
  std::vector<control::CategoryPredictor> predictors;
  const bool needs_predictor =
      contains(config.variants, Variant::CUCI) ||
      (config.scenario == Scenario::ItemCoarse && !config.sweeps.empty());
  if (needs_predictor) {
    for (auto h : config.predictor_hidden_grid) {
      auto pc = config.predictor;
      pc.hidden = h;
      pc.seed = config.seeds.front();
      predictors.push_back(control::train_category_predictor(ds, pc));
    }
  }

  const RunOptions test_options{config.k, control::CandidateMode::Test, config.seeds.front()};
  const auto base_slates = run_variant(Variant::Base, models, cohort, {}, test_options);
  std::optional<GroupReference> reference;
  if (config.scenario == Scenario::UserFine) reference = group_reference(ds, cohort, base_slates);
  const GroupReference* ref = reference ? &*reference : nullptr;

  ExperimentResult result;
  result.table.scenario = config.scenario;
  result.table.dataset = config.dataset.filename().empty() ? config.dataset.parent_path().filename().string()
                                                          : config.dataset.filename().string();
  result.table.cohort_size = cohort.members.size();
  result.table.columns = columns_for(config.scenario);

  std::vector<std::pair<Variant, ControlChoice>> choices;
  for (auto v : config.variants) {
    auto choice = select_coefficients(v, models, cohort, config, predictors, log);
    Models m = models;
    if (v == Variant::CUCI) m.predictor = &predictors[choice.predictor_hidden];
    auto slates = v == Variant::Base ? base_slates : run_variant(v, m, cohort, choice.coefficients, test_options);
    auto row = evaluate_row(ds, cohort, slates, ref);
    row.label = variant_label(v, config.kind);
    row.settings = {{"variant", variant_key(v)}, {"valid_recall", number_or_null(choice.valid_recall)},
                    {"tie", choice.tie}};
    if (uses_alpha(v)) row.settings["alpha"] = choice.coefficients.alpha;
    if (uses_beta(v)) row.settings["beta"] = choice.coefficients.beta;
    if (uses_k_targets(v)) {
      row.settings["k_targets"] = choice.coefficients.k_targets;
      row.settings["predictor_hidden"] = predictors[choice.predictor_hidden].hidden;
    }
    result.table.rows.push_back(std::move(row));
    result.slates.emplace_back(v, std::move(slates));
    choices.emplace_back(v, choice);
  }

  if (!config.sweeps.empty()) {
    const Variant target = is_user_scenario(config.scenario)   ? Variant::UCI
                           : config.scenario == Scenario::ItemFine ? Variant::FUCI
                                                                   : Variant::CUCI;
    Coefficients fixed;
    std::size_t pred = 0;
    for (const auto& [v, c] : choices) {
      if (v == target) {
        fixed = c.coefficients;
        pred = c.predictor_hidden;
      }
    }
    Models m = models;
    if (target == Variant::CUCI) m.predictor = &predictors[pred];
    for (const auto& parameter : config.sweeps) {
      const auto& grid = parameter == "alpha" ? config.alpha_grid : config.beta_grid;
      result.sweeps.emplace_back(parameter, sweep(target, m, cohort, fixed, parameter, grid, config.k, ref));
    }
  }

  if (!out_dir.empty()) {
    std::filesystem::create_directories(out_dir / "slates");
    write_text(out_dir / "table.json", to_json(result.table).dump(2) + "\n");
    write_text(out_dir / "table.txt", render_text(result.table));
    std::string lines;
    for (const auto& j : log_lines) lines += j.dump() + "\n";
    write_text(out_dir / "grid_log.jsonl", lines);
    for (const auto& [v, slates] : result.slates) {
      detect::write_slates(out_dir / "slates" / (variant_key(v) + ".tsv"), ds, slates);
    }
    for (const auto& [parameter, points] : result.sweeps) {
      nlohmann::json j = nlohmann::json::array();
      for (const auto& p : points) j.push_back({{parameter, p.value}, {"metrics", row_json(result.table, p.row)}});
      write_text(out_dir / ("sweep_" + parameter + ".json"), j.dump(2) + "\n");
    }
  }
  return result;
}

}  // namespace ucrs::eval
