#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <gtest/gtest.h>

#include "fixtures.hpp"
#include "test_support.hpp"
#include "ucrs/detect/bubble.hpp"
#include "ucrs/detect/slate_io.hpp"
#include "ucrs/eval/experiment.hpp"

namespace ucrs::eval {
namespace {

TEST(Names, RoundTrip) {
  for (auto s : {Scenario::UserFine, Scenario::UserCoarse, Scenario::ItemFine, Scenario::ItemCoarse}) {
    EXPECT_EQ(parse_scenario(scenario_name(s)), s);
  }
  for (auto v : {Variant::Base, Variant::Random, Variant::Diversity, Variant::WoUF, Variant::ChangeUF,
                 Variant::MaskUF, Variant::WoIF, Variant::Reranking, Variant::UCI, Variant::CUCI, Variant::FUCI,
                 Variant::Fairco}) {
    EXPECT_EQ(parse_variant(variant_key(v)), v);
  }
  EXPECT_THROW(parse_variant("magic"), InvalidArgument);
  EXPECT_THROW(parse_scenario("user_medium"), InvalidArgument);
  EXPECT_EQ(variant_label(Variant::Base, model::ModelKind::FM), "FM");
  EXPECT_EQ(variant_label(Variant::CUCI, model::ModelKind::NFM), "NFM-C-UCI");
  EXPECT_EQ(variant_label(Variant::Random, model::ModelKind::NFM), "Random");
}

TEST(Applicability, ScenarioMatrix) {
  EXPECT_TRUE(applicable(Variant::ChangeUF, Scenario::UserFine));
  EXPECT_FALSE(applicable(Variant::ChangeUF, Scenario::UserCoarse));
  EXPECT_TRUE(applicable(Variant::MaskUF, Scenario::UserCoarse));
  EXPECT_FALSE(applicable(Variant::WoIF, Scenario::UserFine));
  EXPECT_FALSE(applicable(Variant::Reranking, Scenario::UserCoarse));
  EXPECT_TRUE(applicable(Variant::FUCI, Scenario::ItemCoarse));
  EXPECT_FALSE(applicable(Variant::UCI, Scenario::ItemFine));
}

data::Dataset attribute_toy() {
  testing::ToySpec spec;
  spec.users = {{"a", {{"gender", "F"}, {"age", "1"}}},
                {"b", {{"gender", "M"}, {"age", "18"}}},
                {"c", {{"gender", "M"}, {"age", "25"}}},
                {"d", {{"gender", "F"}, {"age", "25"}}}};
  spec.items = {{"x", {"Action"}, ""}, {"y", {"Drama"}, ""}, {"z", {"Comedy"}, ""}, {"w", {"Action", "Comedy"}, ""}};
  spec.train = {{"a", "x"}, {"a", "w"}, {"b", "y"}, {"c", "z"}, {"c", "y"}};
  spec.test = {{"a", "y"}, {"b", "z"}, {"c", "w"}, {"d", "x"}};
  return testing::make_toy(spec);
}

TEST(SelectCohort, UserScenarioTargets) {
  const auto ds = attribute_toy();
  const auto fine = select_cohort(ds, Scenario::UserFine, "gender");
  ASSERT_EQ(fine.members.size(), 3u);  // d has no train history
  for (const auto& m : fine.members) {
    EXPECT_TRUE(ds.user_has_feature(m.user, *m.own_feature));
    EXPECT_FALSE(ds.user_has_feature(m.user, *m.target_feature));
    EXPECT_EQ(ds.group_of(*m.target_feature), *ds.find_group("gender"));
  }
  const auto coarse = select_cohort(ds, Scenario::UserCoarse, "age");
  const auto& age = ds.attribute_groups[*ds.find_group("age")];
  for (const auto& m : coarse.members) {
    EXPECT_TRUE(ds.user_has_feature(m.user, *m.own_feature));
    EXPECT_EQ(*m.target_feature - age.first_feature, (*m.own_feature - age.first_feature + 1) % age.values.size());
  }
  EXPECT_THROW(select_cohort(ds, Scenario::UserFine, "height"), Unsupported);
}

TEST(SelectCohort, ItemScenarioUsesPreferenceShift) {
  const auto ds = attribute_toy();
  const auto cohort = select_cohort(ds, Scenario::ItemFine);
  const auto shift = data::select_preference_shift_users(ds);
  ASSERT_EQ(cohort.members.size(), shift.size());
  for (std::size_t j = 0; j < shift.size(); ++j) {
    const auto& m = cohort.members[j];
    EXPECT_EQ(m.user, shift[j]);
    EXPECT_EQ(m.majority, data::category_distribution(ds, ds.histories[m.user].train).majority());
    EXPECT_EQ(m.target_category, data::category_distribution(ds, ds.histories[m.user].test).majority());
    EXPECT_NE(m.majority, m.target_category);
  }
}

TEST(SelectCohort, IdOnlyDatasetRejectsUserScenarios) {
  testing::ToySpec spec;
  spec.items = {{"x", {"A"}, ""}};
  spec.train = {{"u", "x"}};
  const auto ds = testing::make_toy(spec);
  EXPECT_THROW(select_cohort(ds, Scenario::UserCoarse, "age"), Unsupported);
}

TEST(Diversify, MatchesDirectGreedyOracle) {
  Rng rng(8);
  for (int trial = 0; trial < 50; ++trial) {
    testing::ToySpec spec;
    const std::size_t n = 5 + rng.below(15);
    for (std::size_t i = 0; i < n; ++i) {
      std::set<std::string> cats{"C" + std::to_string(rng.below(4))};
      if (rng.uniform() < 0.4) cats.insert("C" + std::to_string(rng.below(4)));
      spec.items.push_back({"i" + std::to_string(i), {cats.begin(), cats.end()}, ""});
      spec.train.push_back({"u", "i" + std::to_string(i)});
    }
    const auto ds = testing::make_toy(spec);
    std::vector<ItemIndex> pool(n);
    std::vector<double> scores(n);
    for (std::size_t i = 0; i < n; ++i) {
      pool[i] = static_cast<ItemIndex>(i);
      scores[i] = rng.uniform();
    }
    const std::size_t k = 1 + rng.below(n);
    const auto got = diversify(ds, pool, scores, k);
    // Oracle: recompute every candidate's mean cosine from scratch each step.
    std::vector<ItemIndex> expect;
    std::vector<bool> used(n, false);
    while (expect.size() < k) {
      double best_v = -1;
      std::size_t best = 0;
      for (std::size_t j = 0; j < n; ++j) {
        if (used[j]) continue;
        double sim = 0;
        for (auto c : expect) {
          const auto& a = ds.items[pool[j]].categories;
          const auto& b = ds.items[c].categories;
          std::size_t shared = 0;
          for (auto x : a) shared += std::count(b.begin(), b.end(), x);
          sim += static_cast<double>(shared) / std::sqrt(static_cast<double>(a.size() * b.size()));
        }
        const double dis = expect.empty() ? 1.0 : 1.0 - sim / static_cast<double>(expect.size());
        const double v = 0.5 * scores[j] + 0.5 * dis;
        if (v > best_v + 1e-12) {
          best_v = v;
          best = j;
        }
      }
      used[best] = true;
      expect.push_back(pool[best]);
    }
    EXPECT_EQ(got, expect);
  }
}

// --- variants on a trained model ---------------------------------------------------

class Trained : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    ds_ = new data::Dataset(testing::small_corpus());
    model::TrainConfig cfg;
    cfg.dim = 16;
    cfg.max_epochs = 15;
    cfg.batch_size = 256;
    params_ = new model::ModelParams(model::train(*ds_, cfg).params);
    scorer_ = new model::Scorer(*params_, *ds_);
    control::PredictorConfig pc;
    pc.epochs = 60;
    predictor_ = new control::CategoryPredictor(control::train_category_predictor(*ds_, pc));
  }
  static void TearDownTestSuite() {
    delete predictor_;
    delete scorer_;
    delete params_;
    delete ds_;
  }
  static Models models() { return {scorer_, nullptr, nullptr, predictor_}; }
  static data::Dataset* ds_;
  static model::ModelParams* params_;
  static model::Scorer* scorer_;
  static control::CategoryPredictor* predictor_;
};

data::Dataset* Trained::ds_ = nullptr;
model::ModelParams* Trained::params_ = nullptr;
model::Scorer* Trained::scorer_ = nullptr;
control::CategoryPredictor* Trained::predictor_ = nullptr;

TEST_F(Trained, CohortsAreNonTrivial) {
  EXPECT_GT(select_cohort(*ds_, Scenario::ItemFine).members.size(), 10u);
  EXPECT_GT(select_cohort(*ds_, Scenario::UserFine, "gender").members.size(), 100u);
}

TEST_F(Trained, BaseMatchesControlBaseline) {
  const auto cohort = select_cohort(*ds_, Scenario::ItemFine);
  const auto slates = run_variant(Variant::Base, models(), cohort, {});
  for (std::size_t j = 0; j < slates.size(); ++j) {
    EXPECT_EQ(slates[j].items, control::baseline(*scorer_, cohort.members[j].user).ranked.items);
  }
}

TEST_F(Trained, ChangeUfToOwnFeatureIsBase) {
  auto cohort = select_cohort(*ds_, Scenario::UserFine, "gender");
  for (auto& m : cohort.members) m.target_feature = m.own_feature;
  const auto changed = run_variant(Variant::ChangeUF, models(), cohort, {});
  const auto base = run_variant(Variant::Base, models(), cohort, {});
  for (std::size_t j = 0; j < base.size(); ++j) EXPECT_EQ(changed[j].items, base[j].items);
}

TEST_F(Trained, RerankingEqualsCoarseControlAtAlphaZero) {
  const auto cohort = select_cohort(*ds_, Scenario::ItemCoarse);
  for (double beta : {0.0, 0.03, 0.1}) {
    const auto slates = run_variant(Variant::Reranking, models(), cohort, {0.4, beta, 3});
    for (std::size_t j = 0; j < slates.size(); ++j) {
      const auto& m = cohort.members[j];
      const auto direct = control::apply_control(*scorer_, nullptr, m.user,
                                                 control::ItemFeatureCoarse{*m.majority, beta, 0.0, 1, false});
      EXPECT_EQ(slates[j].items, direct.ranked.items);
    }
  }
}

TEST_F(Trained, ControlsOffReproduceBaseRow) {
  for (auto scenario : {Scenario::ItemFine, Scenario::ItemCoarse}) {
    const auto cohort = select_cohort(*ds_, scenario);
    const auto base = evaluate_row(*ds_, cohort, run_variant(Variant::Base, models(), cohort, {}));
    for (auto v : {Variant::FUCI, Variant::Reranking}) {
      const auto row = evaluate_row(*ds_, cohort, run_variant(v, models(), cohort, {0.0, 0.0, 3}));
      for (std::size_t c = 0; c < base.values.size(); ++c) EXPECT_EQ(row.values[c], base.values[c]);
    }
  }
  const auto cohort = select_cohort(*ds_, Scenario::UserFine, "gender");
  const auto base = run_variant(Variant::Base, models(), cohort, {});
  const auto ref = group_reference(*ds_, cohort, base);
  const auto uci = run_variant(Variant::ChangeUF, models(), cohort, {0.0, 0.0, 1});
  const auto uci0 = run_variant(Variant::UCI, models(), cohort, {0.0, 0.0, 1});
  EXPECT_EQ(evaluate_row(*ds_, cohort, uci, &ref).values, evaluate_row(*ds_, cohort, uci0, &ref).values);
}

TEST_F(Trained, RandomRecallNearChance) {
  const auto cohort = select_cohort(*ds_, Scenario::UserFine, "gender");
  const auto slates = run_variant(Variant::Random, models(), cohort, {}, {10, control::CandidateMode::Test, 3});
  CompensatedSum recall, chance, sq;
  std::vector<double> values;
  for (std::size_t j = 0; j < slates.size(); ++j) {
    const auto u = cohort.members[j].user;
    auto test = ds_->histories[u].test;
    std::sort(test.begin(), test.end());
    const auto r = detect::recall_at_k(slates[j].items, test);
    if (!r) continue;
    const auto cands = control::candidates_for(*ds_, u, control::CandidateMode::Test);
    EXPECT_EQ(std::set<ItemIndex>(slates[j].items.begin(), slates[j].items.end()).size(), slates[j].items.size());
    recall.add(*r);
    values.push_back(*r);
    chance.add(std::min(1.0, 10.0 / static_cast<double>(cands.size())));
  }
  ASSERT_GT(values.size(), 20u);
  for (double v : values) sq.add((v - recall.mean()) * (v - recall.mean()));
  const double se = std::sqrt(sq.sum() / static_cast<double>(values.size() - 1) / static_cast<double>(values.size()));
  EXPECT_LE(std::abs(recall.mean() - chance.mean()), 3 * se) << "recall " << recall.mean() << " chance "
                                                             << chance.mean() << " se " << se;
}

TEST_F(Trained, FaircoIsAnExtensionPoint) {
  const auto cohort = select_cohort(*ds_, Scenario::ItemFine);
  EXPECT_THROW(run_variant(Variant::Fairco, models(), cohort, {}), Unsupported);
  EXPECT_THROW(run_variant(Variant::MaskUF, models(), cohort, {}), InvalidArgument);
  EXPECT_THROW(run_variant(Variant::WoIF, models(), cohort, {}), InvalidArgument);
}

TEST_F(Trained, SlatesAreDistinctAndUnseen) {
  const auto cohort = select_cohort(*ds_, Scenario::ItemCoarse);
  for (auto v : {Variant::Random, Variant::Diversity, Variant::Reranking, Variant::CUCI, Variant::FUCI}) {
    for (const auto& s : run_variant(v, models(), cohort, {0.2, 0.05, 2})) {
      const auto known = ds_->known_positives(s.user, true);
      EXPECT_EQ(s.items.size(), 10u);
      EXPECT_EQ(std::set<ItemIndex>(s.items.begin(), s.items.end()).size(), s.items.size());
      for (auto i : s.items) EXPECT_FALSE(std::binary_search(known.begin(), known.end(), i));
    }
  }
}

// --- tables ----------------------------------------------------------------------

TEST_F(Trained, SingleUserRowIsThatUsersMetrics) {
  auto cohort = select_cohort(*ds_, Scenario::ItemFine);
  cohort.members.resize(1);
  const auto& m = cohort.members[0];
  const auto slates = run_variant(Variant::Base, models(), cohort, {});
  const auto row = evaluate_row(*ds_, cohort, slates);
  auto test = ds_->histories[m.user].test;
  std::sort(test.begin(), test.end());
  const auto& items = slates[0].items;
  EXPECT_EQ(row.values[0], *detect::recall_at_k(items, test));
  EXPECT_EQ(row.values[1], *detect::ndcg_at_k(items, test));
  EXPECT_EQ(row.values[2], *detect::w_ndcg_at_k(*ds_, items, test, *m.target_category));
  EXPECT_EQ(row.values[3], detect::mcd(*ds_, items, ds_->histories[m.user].train));
  EXPECT_EQ(row.values[4], detect::tcd(*ds_, items, *m.target_category));
  EXPECT_EQ(row.values[5], static_cast<double>(detect::coverage(*ds_, items)));
}

TEST_F(Trained, IsoIndexColumnMatchesDetectModule) {
  const auto cohort = select_cohort(*ds_, Scenario::UserCoarse, "age");
  const auto slates = run_variant(Variant::Base, models(), cohort, {});
  const auto row = evaluate_row(*ds_, cohort, slates);
  const auto groups = detect::group_exposures(*ds_, slates, detect::group_users(*ds_, "age"));
  EXPECT_EQ(row.values[2], detect::pairwise_isolation(groups));
  EXPECT_GE(row.values[2], 0.0);
  EXPECT_LE(row.values[2], 1.0);
}

TEST_F(Trained, DisEucUsesGroupAverages) {
  const auto cohort = select_cohort(*ds_, Scenario::UserFine, "gender");
  const auto slates = run_variant(Variant::Base, models(), cohort, {});
  const auto ref = group_reference(*ds_, cohort, slates);
  ASSERT_EQ(ref.by_value.size(), 2u);
  const auto& g = ds_->attribute_groups[*ds_->find_group("gender")];
  std::vector<std::vector<double>> sums(2, std::vector<double>(ds_->num_categories(), 0.0));
  std::vector<int> counts(2, 0);
  for (std::size_t j = 0; j < slates.size(); ++j) {
    const auto v = *cohort.members[j].own_feature - g.first_feature;
    const auto d = data::category_distribution(*ds_, slates[j].items);
    for (std::size_t c = 0; c < d.size(); ++c) sums[v][c] += d.probs[c];
    ++counts[v];
  }
  for (int v = 0; v < 2; ++v) {
    for (std::size_t c = 0; c < ds_->num_categories(); ++c) {
      EXPECT_NEAR(ref.by_value[v].probs[c], sums[v][c] / counts[v], 1e-12);
    }
  }
  const auto row = evaluate_row(*ds_, cohort, slates, &ref);
  CompensatedSum dis;
  for (std::size_t j = 0; j < slates.size(); ++j) {
    const auto& m = cohort.members[j];
    dis.add(detect::dis_euc(data::category_distribution(*ds_, slates[j].items),
                            ref.by_value[*m.own_feature - g.first_feature],
                            ref.by_value[*m.target_feature - g.first_feature]));
  }
  EXPECT_NEAR(row.values[3], dis.mean(), 1e-12);
  EXPECT_THROW(evaluate_row(*ds_, cohort, slates), InvalidArgument);
}

TEST_F(Trained, IdenticalSlatesGiveIdenticalRowsAndMismatchThrows) {
  const auto cohort = select_cohort(*ds_, Scenario::ItemFine);
  const auto a = run_variant(Variant::Base, models(), cohort, {});
  EXPECT_EQ(evaluate_row(*ds_, cohort, a).values, evaluate_row(*ds_, cohort, a).values);
  auto shorter = a;
  shorter.pop_back();
  EXPECT_THROW(evaluate_row(*ds_, cohort, shorter), InvalidArgument);
  auto swapped = a;
  std::swap(swapped[0], swapped[1]);
  EXPECT_THROW(evaluate_row(*ds_, cohort, swapped), InvalidArgument);
}

ResultTable two_row_table() {
  ResultTable t;
  t.scenario = Scenario::ItemFine;
  t.dataset = "toy";
  t.cohort_size = 3;
  t.columns = columns_for(Scenario::ItemFine);
  t.rows.push_back({"Random", {0.9, 0.9, 0.9, 0.0, 1.0, 10.0}, {3, 3, 3, 3, 3, 3}, {}});
  t.rows.push_back({"FM", {0.1, 0.2, 0.3, 0.5, 0.2, 5.0}, {3, 3, 3, 3, 3, 3}, {}});
  t.rows.push_back({"FM-F-UCI", {0.2, 0.1, std::nan(""), 0.4, 0.9, 4.0}, {3, 3, 0, 3, 3, 3}, {}});
  return t;
}

TEST(Table, BestMarksSkipRandomAndRespectDirection) {
  const auto t = two_row_table();
  const auto best = best_rows(t);
  EXPECT_EQ(best[0], std::make_pair(2, 1));  // Recall up
  EXPECT_EQ(best[2], std::make_pair(1, -1));  // NaN skipped
  EXPECT_EQ(best[3], std::make_pair(2, 1));  // MCD down
  const auto j = to_json(t);
  EXPECT_EQ(j["best"]["MCD"]["best"], "FM-F-UCI");
  EXPECT_TRUE(j["rows"][2]["values"]["W-NDCG"].is_null());
  EXPECT_EQ(j["cohort_size"], 3);
}

TEST(Table, TextIsAlignedWithArrows) {
  const auto text = render_text(two_row_table());
  EXPECT_NE(text.find("Recall ↑"), std::string::npos);
  EXPECT_NE(text.find("MCD ↓"), std::string::npos);
  EXPECT_NE(text.find("0.4000*"), std::string::npos);
  std::istringstream in(text);
  std::string line;
  std::getline(in, line);  // caption
  std::vector<std::size_t> widths;
  while (std::getline(in, line) && line.rfind("* best", 0) != 0) {
    std::size_t w = 0;
    for (unsigned char c : line) w += (c & 0xC0) != 0x80 ? 1 : 0;
    widths.push_back(w);
  }
  ASSERT_EQ(widths.size(), 5u);
  for (auto w : widths) EXPECT_EQ(w, widths[0]);
}

// --- grid search ------------------------------------------------------------------

TEST(SelectBest, SingletonAndTies) {
  const std::vector<GridPoint> one{{{{"alpha", 0.1}}, 0.3}};
  EXPECT_EQ(select_best(one).index, 0u);
  EXPECT_FALSE(select_best(one).tie);
  const std::vector<GridPoint> tied{{{}, 0.2}, {{}, 0.4}, {{}, 0.4}};
  EXPECT_EQ(select_best(tied).index, 1u);
  EXPECT_TRUE(select_best(tied).tie);
  const std::vector<GridPoint> close{{{}, 0.39}, {{}, 0.4}};
  EXPECT_FALSE(select_best(close).tie);
  EXPECT_TRUE(select_best(close, 0.02).tie);
  const std::vector<GridPoint> nan{{{}, std::nan("")}, {{}, 0.1}};
  EXPECT_EQ(select_best(nan).index, 1u);
  EXPECT_THROW(select_best(std::vector<GridPoint>{}), InvalidArgument);
}

ExperimentConfig quick_config(Scenario scenario) {
  ExperimentConfig c;
  c.scenario = scenario;
  c.train.dim = 8;
  c.train.max_epochs = 4;
  c.train.batch_size = 256;
  c.predictor.epochs = 30;
  c.alpha_grid = {0.0, 0.2};
  c.beta_grid = {0.0, 0.05, 0.1};
  c.k_grid = {1, 3};
  return c;
}

TEST_F(Trained, BetaGridLogsMonotoneTcd) {
  auto config = quick_config(Scenario::ItemFine);
  config.beta_grid = {0.0, 0.01, 0.02, 0.03, 0.04, 0.05, 0.06, 0.07, 0.08, 0.09, 0.1};
  const auto cohort = select_cohort(*ds_, Scenario::ItemFine);
  std::vector<nlohmann::json> lines;
  select_coefficients(Variant::FUCI, models(), cohort, config, {}, [&](const nlohmann::json& j) { lines.push_back(j); });
  ASSERT_EQ(lines.size(), 22u);
  for (std::size_t j = 1; j < lines.size(); ++j) {
    if (lines[j]["params"]["alpha"] != lines[j - 1]["params"]["alpha"]) continue;
    EXPECT_GE(lines[j]["tcd"].get<double>(), lines[j - 1]["tcd"].get<double>());
  }
}

TEST_F(Trained, CoefficientSelectionMaximizesValidationRecall) {
  const auto config = quick_config(Scenario::ItemCoarse);
  const auto cohort = select_cohort(*ds_, Scenario::ItemCoarse);
  std::vector<nlohmann::json> lines;
  const std::vector<control::CategoryPredictor> preds{*predictor_};
  const auto choice = select_coefficients(Variant::CUCI, models(), cohort, config, preds,
                                          [&](const nlohmann::json& j) { lines.push_back(j); });
  ASSERT_EQ(lines.size(), 12u);
  double best = -1;
  for (const auto& l : lines) best = std::max(best, l["valid_recall"].is_null() ? -1.0 : l["valid_recall"].get<double>());
  EXPECT_EQ(choice.valid_recall, best);
  const auto slates = run_variant(Variant::CUCI, models(), cohort, choice.coefficients,
                                  {10, control::CandidateMode::Validation, 1});
  EXPECT_EQ(cohort_validation_recall(*ds_, slates), best);
}

TEST(SelectModel, DeterministicAcrossRuns) {
  const auto ds = testing::small_corpus(3, 80, 100);
  auto config = quick_config(Scenario::ItemFine);
  config.learning_rate_grid = {0.01, 0.05};
  config.seeds = {1, 2};
  std::vector<nlohmann::json> first, second;
  const auto a = select_model(ds, config, [&](const nlohmann::json& j) { first.push_back(j); });
  const auto b = select_model(ds, config, [&](const nlohmann::json& j) { second.push_back(j); });
  EXPECT_EQ(first, second);
  EXPECT_EQ(a.config.learning_rate, b.config.learning_rate);
  EXPECT_EQ(a.params, b.params);
  EXPECT_EQ(first.size(), 5u);  // 2 points x 2 seeds + selection
}

// --- configuration and the full pipeline ------------------------------------------

TEST(ExperimentConfigFile, LoadsAndValidates) {
  testing::TempDir dir;
  {
    std::ofstream out(dir / "exp.yaml");
    out << "dataset: prepared\n"
           "scenario: user_coarse\n"
           "attribute: age\n"
           "model: nfm\n"
           "variants: [base, random, maskuf, uci]\n"
           "seeds: [3, 4]\n"
           "grids:\n"
           "  alpha: [0, 0.1, 0.5]\n"
           "  hidden: [4, 8]\n"
           "train: {dim: 16, max_epochs: 7, negatives: fixed}\n"
           "sweeps: [alpha]\n";
  }
  const auto c = load_experiment_config(dir / "exp.yaml");
  EXPECT_EQ(c.dataset, dir.path() / "prepared");
  EXPECT_EQ(c.scenario, Scenario::UserCoarse);
  EXPECT_EQ(c.kind, model::ModelKind::NFM);
  EXPECT_EQ(c.train.kind, model::ModelKind::NFM);
  EXPECT_EQ(c.variants, (std::vector<Variant>{Variant::Base, Variant::Random, Variant::MaskUF, Variant::UCI}));
  EXPECT_EQ(c.alpha_grid, (std::vector<double>{0, 0.1, 0.5}));
  EXPECT_EQ(c.hidden_grid, (std::vector<std::size_t>{4, 8}));
  EXPECT_EQ(c.seeds, (std::vector<std::uint64_t>{3, 4}));
  EXPECT_EQ(c.train.max_epochs, 7);
  EXPECT_FALSE(c.train.resample_negatives);
  EXPECT_EQ(c.beta_grid.size(), 11u);

  const auto bad = [&](const std::string& body) {
    std::ofstream out(dir / "bad.yaml");
    out << body;
    out.close();
    return dir / "bad.yaml";
  };
  EXPECT_THROW(load_experiment_config(bad("dataset: x\nscenario: item_fine\nvariants: [base]\ncolour: red\n")),
               InvalidArgument);
  EXPECT_THROW(load_experiment_config(bad("dataset: x\nscenario: item_fine\nvariants: [base]\ngrids: {alpha: [0.7]}\n")),
               InvalidArgument);
  EXPECT_THROW(load_experiment_config(bad("dataset: x\nscenario: item_fine\nvariants: [base]\ngrids: {k_targets: [6]}\n")),
               InvalidArgument);
  EXPECT_THROW(load_experiment_config(bad("dataset: x\nscenario: item_fine\nvariants: [maskuf]\n")), InvalidArgument);
  EXPECT_THROW(load_experiment_config(bad("dataset: x\nscenario: item_fine\nvariants: [base]\ngrids: {beta: []}\n")),
               InvalidArgument);
  EXPECT_THROW(load_experiment_config(dir / "missing.yaml"), IoError);
}

TEST(RunExperiment, ReproducibleOutputs) {
  const auto ds = testing::small_corpus(5, 120, 140);
  auto config = quick_config(Scenario::ItemCoarse);
  config.dataset = "synthetic";
  config.variants = {Variant::Base, Variant::Random, Variant::Diversity, Variant::WoIF, Variant::Reranking,
                     Variant::CUCI, Variant::FUCI};
  config.sweeps = {"beta"};
  testing::TempDir a, b;
  const auto ra = run_experiment(ds, config, a.path());
  const auto rb = run_experiment(ds, config, b.path());
  for (const char* f : {"table.json", "table.txt", "grid_log.jsonl", "sweep_beta.json", "slates/c-uci.tsv"}) {
    std::ifstream fa(a / f), fb(b / f);
    ASSERT_TRUE(fa.good()) << f;
    std::stringstream sa, sb;
    sa << fa.rdbuf();
    sb << fb.rdbuf();
    EXPECT_EQ(sa.str(), sb.str()) << f;
  }
  ASSERT_EQ(ra.table.rows.size(), 7u);
  EXPECT_EQ(ra.table.rows[0].label, "FM");
  EXPECT_EQ(ra.table.rows[5].label, "FM-C-UCI");
  EXPECT_EQ(ra.table.cohort_size, select_cohort(ds, Scenario::ItemCoarse).members.size());
  const auto back = detect::read_slates(a / "slates/f-uci.tsv", ds);
  ASSERT_EQ(back.size(), ra.slates[6].second.size());
  for (std::size_t j = 0; j < back.size(); ++j) {
    EXPECT_EQ(back[j].items, ra.slates[6].second[j].items);
    EXPECT_EQ(back[j].provenance, ra.slates[6].second[j].provenance);
  }
  const auto table = nlohmann::json::parse(std::ifstream(a / "table.json"));
  EXPECT_EQ(table["rows"].size(), 7u);
  EXPECT_EQ(table["columns"][2]["name"], "W-NDCG");
}

TEST(RunExperiment, UserScenarioTable) {
  const auto ds = testing::small_corpus(5, 120, 140);
  auto config = quick_config(Scenario::UserFine);
  config.attribute = "gender";
  config.variants = {Variant::Base, Variant::WoUF, Variant::ChangeUF, Variant::UCI};
  config.sweeps = {"alpha"};
  const auto r = run_experiment(ds, config);
  ASSERT_EQ(r.table.rows.size(), 4u);
  EXPECT_EQ(r.table.columns.size(), 5u);
  for (const auto& row : r.table.rows) {
    EXPECT_FALSE(std::isnan(row.values[3]));  // DIS-EUC
    EXPECT_GE(row.values[2], 0.0);
    EXPECT_LE(row.values[2], 1.0);
  }
  ASSERT_EQ(r.sweeps.size(), 1u);
  EXPECT_EQ(r.sweeps[0].second.size(), 2u);
}

TEST(SlateFile, RejectsUnknownIds) {
  const auto ds = attribute_toy();
  testing::TempDir dir;
  {
    std::ofstream out(dir / "s.tsv");
    out << "a\tx,nope\tbaseline\n";
  }
  EXPECT_THROW(detect::read_slates(dir / "s.tsv", ds), ParseError);
  const std::vector<detect::Slate> slates{{0, {}, "baseline", true}};
  detect::write_slates(dir / "e.tsv", ds, slates);
  const auto back = detect::read_slates(dir / "e.tsv", ds);
  ASSERT_EQ(back.size(), 1u);
  EXPECT_TRUE(back[0].items.empty());
  EXPECT_TRUE(back[0].short_list);
}

}  // namespace
}  // namespace ucrs::eval
