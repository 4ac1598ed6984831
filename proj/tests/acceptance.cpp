// Acceptance runner. Prints one PASS/FAIL/SKIP line per criterion and exits
// 1 on any failure, 77 when every selected criterion was skipped, else 0.
//
//   acceptance --group properties --cli path/to/ucrs   P1-P5, P8, P10
//   acceptance --group ml1m --ml1m DIR                 P6, P7, P9

#include <sys/wait.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <iomanip>
#include <iostream>
#include <map>
#include <numeric>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "fixtures.hpp"
#include "httplib.h"
#include "json.hpp"
#include "oracles.hpp"
#include "test_support.hpp"
#include "ucrs/control/apply.hpp"
#include "ucrs/control/inference.hpp"
#include "ucrs/control/predictor.hpp"
#include "ucrs/data/io.hpp"
#include "ucrs/detect/metrics.hpp"
#include "ucrs/eval/experiment.hpp"
#include "ucrs/model/train.hpp"
#include "ucrs/service/server.hpp"
#include "ucrs/service/snapshot.hpp"

namespace {

using namespace ucrs;
using Clock = std::chrono::steady_clock;

// Tolerances and budgets.
constexpr double kAffineTol = 1e-12;
constexpr double kDirectRouteTol = 1e-12;
constexpr double kPolicyBeta = 1.01;
constexpr double kIsoExactTol = 1e-12;
constexpr double kIsoRangeTol = 1e-12;
constexpr double kMetricTol = 1e-12;
constexpr double kFdStep = 1e-4;
constexpr double kFdRelTol = 1e-4;
constexpr double kPredictorAccuracy = 0.9;
constexpr double kBaselineMcdLow = 0.50;
constexpr double kBaselineMcdHigh = 0.70;
constexpr double kRerankMcdMax = 0.15;
constexpr double kFineRecallRatio = 2.0;
constexpr double kFineTcdMin = 0.95;
constexpr double kMonotoneSlack = 1e-12;
constexpr double kP1Seconds = 10.0;
constexpr double kP2Seconds = 10.0;
constexpr double kP3Seconds = 30.0;
constexpr int kCrossSurfacePairs = 50;

enum class Status { Pass, Fail, Skip };

struct Outcome {
  Status status = Status::Pass;
  std::string detail;
};

Outcome judge(bool ok, std::string detail) { return {ok ? Status::Pass : Status::Fail, std::move(detail)}; }

std::string fmt(double x, int precision = 4) {
  std::ostringstream s;
  s << std::setprecision(precision) << x;
  return s.str();
}

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

double relative_error(double a, double b) {
  const double scale = std::max(std::abs(a), std::abs(b));
  return scale == 0.0 ? 0.0 : std::abs(a - b) / scale;
}

// --- P1 -----------------------------------------------------------------------------

Outcome p1_endpoints() {
  const auto t0 = Clock::now();
  const auto ds = testing::small_corpus(11, 120, 140);
  Rng rng(101);
  std::size_t checked = 0, bitwise_misses = 0, direct_misses = 0, affine_misses = 0;
  double worst_affine = 0.0;
  for (auto kind : {model::ModelKind::FM, model::ModelKind::NFM}) {
    const auto params = model::init_params(model::FeatureLayout::for_dataset(ds), kind, 16, 8, 0.3, 5);
    const model::Scorer scorer(params, ds);
    for (int n = 0; n < 500; ++n) {
      const auto u = static_cast<UserIndex>(rng.below(ds.num_users()));
      const auto i = static_cast<ItemIndex>(rng.below(ds.num_items()));
      const auto& group = ds.attribute_groups[rng.below(ds.attribute_groups.size())];
      FeatureIndex own = 0;
      for (auto f : ds.users[u].features) {
        if (group.contains(f)) own = f;
      }
      control::FeatureEdit edit;
      switch (rng.below(3)) {
        case 0: break;
        case 1: {
          auto other = own;
          while (other == own) other = group.first_feature + static_cast<FeatureIndex>(rng.below(group.values.size()));
          edit = control::FeatureEdit::override_with(other);
          break;
        }
        default: edit = control::FeatureEdit::mask(own);
      }
      const auto me = control::to_model_edit(ds, u, edit);
      const double at0 = control::counterfactual_score(scorer, u, i, 0.0, edit);
      const double at1 = control::counterfactual_score(scorer, u, i, 1.0, edit);
      if (at0 != scorer.probability(scorer.user_side(u, {}, me), i)) ++bitwise_misses;
      if (at1 != scorer.probability(scorer.user_side(u, {model::Role::UserId}, me), i)) ++bitwise_misses;
      const double direct0 = sigmoid(model::raw_score(params, model::assemble_features({u, i, {}, me}, params.layout, ds)));
      const double direct1 =
          sigmoid(model::raw_score(params, model::assemble_features({u, i, {model::Role::UserId}, me}, params.layout, ds)));
      if (std::abs(at0 - direct0) > kDirectRouteTol || std::abs(at1 - direct1) > kDirectRouteTol) ++direct_misses;
      const double a = rng.uniform();
      const double err = std::abs(control::counterfactual_score(scorer, u, i, a, edit) - (at0 + a * (at1 - at0)));
      worst_affine = std::max(worst_affine, err);
      if (err > kAffineTol) ++affine_misses;
      ++checked;
    }
  }
  const double secs = seconds_since(t0);
  return judge(bitwise_misses == 0 && direct_misses == 0 && affine_misses == 0 && secs < kP1Seconds,
               std::to_string(checked) + " triples, bitwise misses " + std::to_string(bitwise_misses) +
                   ", direct-route misses " + std::to_string(direct_misses) + ", worst affine error " +
                   fmt(worst_affine) + ", " + fmt(secs, 3) + " s");
}

// --- P2 -----------------------------------------------------------------------------

Outcome p2_policy() {
  const auto t0 = Clock::now();
  Rng rng(202);
  std::size_t tier_violations = 0, order_violations = 0;
  for (int trial = 0; trial < 500; ++trial) {
    const auto n = 1 + rng.below(40);
    std::vector<ItemIndex> items(n);
    std::iota(items.begin(), items.end(), ItemIndex{0});
    rng.shuffle(items.begin(), items.end());
    std::vector<double> y(n);
    std::vector<int> r(n);
    for (std::size_t j = 0; j < n; ++j) {
      const double x = rng.uniform();
      y[j] = x < 0.05 ? 0.0 : x > 0.95 ? 1.0 : rng.uniform();
      r[j] = static_cast<int>(rng.below(3));
    }
    const auto tiered = control::rank_with_policy(items, y, r, kPolicyBeta, n);
    for (std::size_t j = 1; j < tiered.r.size(); ++j) {
      if (tiered.r[j] > tiered.r[j - 1]) ++tier_violations;
    }
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      return y[a] != y[b] ? y[a] > y[b] : items[a] < items[b];
    });
    const auto plain = control::rank_with_policy(items, y, r, 0.0, n);
    for (std::size_t j = 0; j < n; ++j) {
      if (plain.items[j] != items[order[j]]) ++order_violations;
    }
  }
  const double secs = seconds_since(t0);
  return judge(tier_violations == 0 && order_violations == 0 && secs < kP2Seconds,
               "500 profiles, tier inversions " + std::to_string(tier_violations) + ", beta=0 reorderings " +
                   std::to_string(order_violations) + ", " + fmt(secs, 3) + " s");
}

// --- P3 -----------------------------------------------------------------------------

detect::GroupExposure exposure(const std::vector<std::uint64_t>& counts) {
  detect::GroupExposure g(counts.size());
  g.counts = counts;
  g.total = std::accumulate(counts.begin(), counts.end(), std::uint64_t{0});
  return g;
}

Outcome p3_isolation() {
  const auto t0 = Clock::now();
  Rng rng(303);
  double worst_identical = 0.0, worst_disjoint = 0.0;
  for (int trial = 0; trial < 1000; ++trial) {
    const auto n = 2 + rng.below(30);
    std::vector<std::uint64_t> a(n, 0), b(n, 0);
    for (auto& x : a) x = rng.below(6);
    a[rng.below(n)] += 1;
    worst_identical = std::max(worst_identical, std::abs(detect::isolation_index(exposure(a), exposure(a))));
    std::fill(a.begin(), a.end(), 0);
    const auto split = 1 + rng.below(n - 1);
    for (std::size_t i = 0; i < n; ++i) (i < split ? a[i] : b[i]) = 1 + rng.below(6);
    worst_disjoint = std::max(worst_disjoint, std::abs(detect::isolation_index(exposure(a), exposure(b)) - 1.0));
  }
  std::size_t violations = 0, oracle_misses = 0;
  double lo = 1.0, hi = 0.0;
  for (int trial = 0; trial < 10000; ++trial) {
    const auto n = 1 + rng.below(50);
    std::vector<std::uint64_t> a(n), b(n);
    const double sparsity = rng.uniform();
    for (std::size_t i = 0; i < n; ++i) {
      a[i] = rng.uniform() < sparsity ? 0 : rng.below(1 + rng.below(100));
      b[i] = rng.uniform() < sparsity ? 0 : rng.below(1 + rng.below(100));
    }
    a[rng.below(n)] += 1;
    b[rng.below(n)] += 1;
    const double s = detect::isolation_index(exposure(a), exposure(b));
    lo = std::min(lo, s);
    hi = std::max(hi, s);
    if (s < -kIsoRangeTol || s > 1.0 + kIsoRangeTol) {
      ++violations;
      std::cerr << "isolation outside [0,1]: " << s << " a=" << nlohmann::json(a).dump()
                << " b=" << nlohmann::json(b).dump() << '\n';
    }
    if (std::abs(s - testing::isolation_oracle({a.begin(), a.end()}, {b.begin(), b.end()})) > kIsoExactTol) {
      ++oracle_misses;
    }
  }
  const double secs = seconds_since(t0);
  return judge(worst_identical <= kIsoExactTol && worst_disjoint <= kIsoExactTol && violations == 0 &&
                   oracle_misses == 0 && secs < kP3Seconds,
               "identical max |s| " + fmt(worst_identical) + ", disjoint max |s-1| " + fmt(worst_disjoint) +
                   ", 10000 random in [" + fmt(lo) + ", " + fmt(hi) + "], out of range " +
                   std::to_string(violations) + ", oracle misses " + std::to_string(oracle_misses) + ", " +
                   fmt(secs, 3) + " s");
}

// --- P4 -----------------------------------------------------------------------------

Outcome p4_metrics() {
  Rng rng(404);
  std::size_t cases = 0, misses = 0;
  double worst = 0.0;
  const auto check = [&](double got, double want) {
    const double err = std::abs(got - want);
    worst = std::max(worst, err);
    if (err > kMetricTol) ++misses;
    ++cases;
  };
  for (int trial = 0; trial < 60; ++trial) {
    const auto n = 1 + rng.below(6);
    testing::ToySpec spec;
    for (std::size_t i = 0; i < n; ++i) {
      const std::string id = "i" + std::to_string(i);
      spec.train.push_back({"x", id});
      std::vector<std::string> cats;
      for (const char* c : {"A", "B", "C"}) {
        if (rng.uniform() < 0.5) cats.emplace_back(c);
      }
      if (cats.empty()) cats.emplace_back("A");
      spec.items.push_back({id, cats, ""});
    }
    const auto ds = testing::make_toy(spec);
    std::vector<ItemIndex> positives;
    for (ItemIndex i = 0; i < n; ++i) {
      if (rng.uniform() < 0.5) positives.push_back(i);
    }
    if (positives.empty()) positives.push_back(static_cast<ItemIndex>(rng.below(n)));
    const auto target = static_cast<CategoryIndex>(rng.below(ds.num_categories()));
    const std::set<ItemIndex> pos(positives.begin(), positives.end());
    const auto binary = [&](ItemIndex i) { return pos.contains(i) ? 1.0 : 0.0; };
    const auto weighted = [&](ItemIndex i) {
      return pos.contains(i) ? (ds.items[i].has_category(target) ? 2.0 : 1.0) : 0.0;
    };
    for (std::size_t k = 1; k <= n; ++k) {
      const auto slates = testing::all_slates(n, k);
      double best_binary = 0.0, best_weighted = 0.0;
      for (const auto& s : slates) {
        best_binary = std::max(best_binary, testing::dcg_oracle(s, binary));
        best_weighted = std::max(best_weighted, testing::dcg_oracle(s, weighted));
      }
      for (const auto& s : slates) {
        double hits = 0;
        for (auto i : s) hits += binary(i);
        check(*detect::recall_at_k(s, positives), hits / static_cast<double>(positives.size()));
        check(*detect::ndcg_at_k(s, positives), testing::dcg_oracle(s, binary) / best_binary);
        check(*detect::w_ndcg_at_k(ds, s, positives, target), testing::dcg_oracle(s, weighted) / best_weighted);
      }
    }
  }
  return judge(misses == 0, std::to_string(cases) + " metric values against exhaustive oracles, worst error " +
                                fmt(worst) + ", misses " + std::to_string(misses));
}

// --- P5 -----------------------------------------------------------------------------

double model_gradient_error(model::ModelKind kind, double l2) {
  const model::FeatureLayout layout(2, 3, 2, 2);
  auto p = model::init_params(layout, kind, 4, 3, 0.5, kind == model::ModelKind::FM ? 51 : 52);
  Rng rng(53);
  p.bias = rng.normal(0, 0.5);
  for (auto& x : p.linear) x = rng.normal(0, 0.5);
  for (auto& x : p.b1) x = rng.normal(0, 0.5);
  const std::vector<FeatureIndex> f1{0, 2, 5, 7}, f2{1, 3, 6, 8}, f3{0, 4, 5, 8}, f4{2, 6};
  const std::vector<model::Example> batch{{f1, 1.0}, {f2, 0.0}, {f3, 1.0}, {f4, 0.0}};
  model::Gradients grad(p);
  model::loss_and_gradient(p, batch, l2, grad);
  double worst = 0.0;
  const auto probe = [&](double& x, double analytic) {
    const double keep = x;
    x = keep + kFdStep;
    const double up = model::batch_loss(p, batch, l2);
    x = keep - kFdStep;
    const double down = model::batch_loss(p, batch, l2);
    x = keep;
    worst = std::max(worst, relative_error(analytic, (up - down) / (2 * kFdStep)));
  };
  probe(p.bias, grad.bias);
  for (std::size_t j = 0; j < p.linear.size(); ++j) probe(p.linear[j], grad.linear[j]);
  for (std::size_t j = 0; j < p.embeddings.size(); ++j) probe(p.embeddings[j], grad.embeddings[j]);
  for (std::size_t j = 0; j < p.w1.size(); ++j) probe(p.w1[j], grad.w1[j]);
  for (std::size_t j = 0; j < p.b1.size(); ++j) probe(p.b1[j], grad.b1[j]);
  for (std::size_t j = 0; j < p.w2.size(); ++j) probe(p.w2[j], grad.w2[j]);
  return worst;
}

double predictor_gradient_error() {
  auto p = control::init_predictor(5, 4, 61);
  Rng rng(62);
  for (auto& x : p.b1) x = rng.normal(0, 0.3);
  for (auto& x : p.b2) x = rng.normal(0, 0.3);
  std::vector<control::HalfPair> pairs;
  for (int n = 0; n < 6; ++n) {
    std::vector<double> a(5), b(5);
    for (auto& x : a) x = rng.uniform();
    for (auto& x : b) x = rng.uniform();
    const double sa = std::accumulate(a.begin(), a.end(), 0.0), sb = std::accumulate(b.begin(), b.end(), 0.0);
    for (auto& x : a) x /= sa;
    for (auto& x : b) x /= sb;
    pairs.push_back({0, {a}, {b}});
  }
  control::CategoryPredictor grad;
  control::predictor_loss_and_gradient(p, pairs, grad);
  double worst = 0.0;
  const auto check = [&](std::vector<double>& w, const std::vector<double>& g) {
    for (std::size_t i = 0; i < w.size(); ++i) {
      const double keep = w[i];
      w[i] = keep + kFdStep;
      const double up = control::predictor_loss(p, pairs);
      w[i] = keep - kFdStep;
      const double down = control::predictor_loss(p, pairs);
      w[i] = keep;
      worst = std::max(worst, relative_error(g[i], (up - down) / (2 * kFdStep)));
    }
  };
  check(p.w1, grad.w1);
  check(p.b1, grad.b1);
  check(p.w2, grad.w2);
  check(p.b2, grad.b2);
  return worst;
}

Outcome p5_gradients() {
  const double fm = std::max(model_gradient_error(model::ModelKind::FM, 0.0),
                             model_gradient_error(model::ModelKind::FM, 0.1));
  const double nfm = std::max(model_gradient_error(model::ModelKind::NFM, 0.0),
                              model_gradient_error(model::ModelKind::NFM, 0.1));
  const double pred = predictor_gradient_error();
  return judge(fm < kFdRelTol && nfm < kFdRelTol && pred < kFdRelTol,
               "worst relative error FM " + fmt(fm) + ", NFM " + fmt(nfm) + ", predictor " + fmt(pred));
}

// --- P8 -----------------------------------------------------------------------------

Outcome p8_predictor() {
  // Homes are the even categories, each seen alongside an odd companion, so the
  // first half still identifies A once the A component is zeroed.
  testing::PlantedConfig cfg;
  cfg.homes = {0, 2, 4, 6};
  cfg.companion = {1, 0, 3, 0, 5, 0, 7, 0};
  cfg.transition = {3, 0, 5, 0, 7, 0, 1, 0};
  const auto train_ds = testing::planted_dataset(cfg);
  cfg.seed = 808;
  std::vector<testing::PlantedUser> planted;
  const auto held_out = testing::planted_dataset(cfg, &planted);
  std::map<std::string, std::size_t> home;
  for (const auto& p : planted) home[p.id] = p.home;

  const auto predictor = control::train_category_predictor(train_ds, control::PredictorConfig{});
  const auto pairs = control::history_halves(held_out);
  std::size_t eligible = 0, correct = 0, forward_correct = 0, majority_returned = 0;
  for (const auto& pr : pairs) {
    const auto majority = static_cast<CategoryIndex>(argmax_lowest(pr.first.probs));
    const auto h = home.at(held_out.user_ids.name(pr.user));
    for (std::size_t k = 1; k <= 5; ++k) {
      const auto t = control::predict_target_categories(predictor, pr.first, majority, k);
      if (std::find(t.categories.begin(), t.categories.end(), majority) != t.categories.end()) ++majority_returned;
    }
    if (majority != h) continue;
    ++eligible;
    const auto top = control::predict_target_categories(predictor, pr.first, majority, 1);
    if (!top.categories.empty() && top.categories.front() == cfg.transition[h]) ++correct;
    if (argmax_lowest(predictor.predict(pr.first.probs)) == cfg.transition[h]) ++forward_correct;
  }
  const double accuracy = static_cast<double>(correct) / static_cast<double>(eligible);
  const double forward = static_cast<double>(forward_correct) / static_cast<double>(eligible);
  return judge(accuracy >= kPredictorAccuracy && majority_returned == 0,
               "held-out top-1 accuracy " + fmt(accuracy) + " with do(h=0) over " + std::to_string(eligible) +
                   " users whose first-half majority is A (plain forward pass " + fmt(forward) +
                   "), majority returned " + std::to_string(majority_returned) + " times");
}

// --- P10 ----------------------------------------------------------------------------

struct RunningServer {
  explicit RunningServer(std::shared_ptr<const service::ServingSnapshot> snap) : server(std::move(snap)) {
    port = server.bind("127.0.0.1", 0);
    thread = std::thread([this] { server.listen(); });
    server.wait_until_ready();
  }
  ~RunningServer() {
    server.stop();
    thread.join();
  }
  service::Server server;
  int port = 0;
  std::thread thread;
};

std::string quote(const std::string& s) { return "'" + s + "'"; }

/// Runs a shell command and returns (exit status, stdout).
std::pair<int, std::string> run_capture(const std::string& command) {
  FILE* pipe = ::popen(command.c_str(), "r");
  if (!pipe) throw IoError("cannot run " + command);
  std::string out;
  char buf[4096];
  std::size_t n;
  while ((n = std::fread(buf, 1, sizeof buf, pipe)) > 0) out.append(buf, n);
  const int status = ::pclose(pipe);
  return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, out};
}

nlohmann::json random_command(const data::Dataset& ds, UserIndex u, Rng& rng) {
  const auto pick = [&](const std::vector<double>& v) { return v[rng.below(v.size())]; };
  const std::vector<double> alphas{0.0, 0.1, 0.2, 0.3, 0.4, 0.5};
  const std::vector<double> betas{0.0, 0.01, 0.03, 0.05, 0.08, 0.1};
  const auto& group = ds.attribute_groups[rng.below(ds.attribute_groups.size())];
  FeatureIndex own = 0;
  for (auto f : ds.users[u].features) {
    if (group.contains(f)) own = f;
  }
  switch (rng.below(4)) {
    case 0: {
      auto other = own;
      while (other == own) other = group.first_feature + static_cast<FeatureIndex>(rng.below(group.values.size()));
      return {{"type", "user_fine"}, {"target", ds.feature_name(other)}, {"alpha", pick(alphas)}};
    }
    case 1:
      return {{"type", "user_coarse"}, {"target", ds.feature_name(own)}, {"alpha", pick(alphas)}};
    case 2:
      return {{"type", "item_fine"},
              {"target", ds.category_names[rng.below(ds.num_categories())]},
              {"alpha", pick(alphas)},
              {"beta", pick(betas)}};
    default:
      return {{"type", "item_coarse"},
              {"alpha", pick(alphas)},
              {"beta", pick(betas)},
              {"k_targets", 1 + rng.below(5)},
              {"use_prediction", rng.uniform() < 0.5}};
  }
}

Outcome p10_cross_surface(const std::string& cli) {
  if (cli.empty()) return {Status::Skip, "no --cli binary given"};
  testing::TempDir tmp;
  const auto ds = testing::small_corpus(21, 90, 110);
  model::TrainConfig tc;
  tc.dim = 16;
  tc.max_epochs = 8;
  tc.batch_size = 256;
  const auto trained = model::train(ds, tc);
  control::PredictorConfig pc;
  pc.epochs = 60;
  const auto predictor = control::train_category_predictor(ds, pc);
  const auto dir = tmp / "snapshot";
  service::write_snapshot(dir, ds, trained.params, &predictor, {});
  RunningServer running(service::ServingSnapshot::load(dir));
  httplib::Client client("127.0.0.1", running.port);

  Rng rng(1010);
  int equal = 0, ok_status = 0;
  std::string first_difference;
  for (int n = 0; n < kCrossSurfacePairs; ++n) {
    const auto u = static_cast<UserIndex>(rng.below(ds.num_users()));
    const auto& id = ds.user_ids.name(u);
    const auto command = random_command(ds, u, rng);
    const auto file = tmp / ("command_" + std::to_string(n) + ".json");
    std::ofstream(file) << command.dump();

    const auto [code, out] = run_capture(quote(cli) + " control --snapshot " + quote(dir.string()) + " --user " +
                                         quote(id) + " --k 10 --command-file " + quote(file.string()) +
                                         " 2>/dev/null");
    const auto http = client.Post("/users/" + id + "/controls?k=10", command.dump(), "application/json");
    if (!http) return {Status::Fail, "HTTP request failed for " + id};
    const auto via_cli = nlohmann::json::parse(out, nullptr, false);
    const auto via_http = nlohmann::json::parse(http->body, nullptr, false);
    const bool same_status = (code == 0) == (http->status == 200);
    if (http->status == 200) ++ok_status;
    if (same_status && !via_cli.is_discarded() && via_cli == via_http) {
      ++equal;
    } else if (first_difference.empty()) {
      first_difference = "; first difference: user " + id + " command " + command.dump() + " cli exit " +
                         std::to_string(code) + " http " + std::to_string(http->status);
    }
  }
  return judge(equal == kCrossSurfacePairs, std::to_string(equal) + "/" + std::to_string(kCrossSurfacePairs) +
                                                " identical responses (" + std::to_string(ok_status) +
                                                " applied, the rest rejected identically)" + first_difference);
}

// --- ML-1M criteria (P6, P7, P9) ----------------------------------------------------

std::size_t column(eval::Scenario s, eval::Metric m) {
  const auto cols = eval::columns_for(s);
  return static_cast<std::size_t>(std::find(cols.begin(), cols.end(), m) - cols.begin());
}

double value(const eval::ResultRow& row, eval::Scenario s, eval::Metric m) { return row.values[column(s, m)]; }

struct Ml1mOutcomes {
  Outcome p6, p7, p9;
};

Ml1mOutcomes ml1m_criteria(const std::filesystem::path& dir) {
  using eval::Metric;
  using eval::Scenario;
  using eval::Variant;
  std::cerr << "loading " << dir << '\n';
  const auto ds = data::prepare(data::load_movielens_1m(dir), data::PrepareOptions{});
  std::cerr << ds.num_users() << " users, " << ds.num_items() << " items, " << ds.train.size()
            << " train positives\n";

  eval::ExperimentConfig cfg;
  cfg.kind = model::ModelKind::FM;
  const eval::GridLog log = [](const nlohmann::json& j) { std::cerr << j.dump() << '\n'; };
  const auto chosen = eval::select_model(ds, cfg, log);
  const model::Scorer scorer(chosen.params, ds);
  std::vector<control::CategoryPredictor> predictors;
  for (auto h : cfg.predictor_hidden_grid) {
    auto pc = cfg.predictor;
    pc.hidden = h;
    predictors.push_back(control::train_category_predictor(ds, pc));
  }
  const eval::Models plain{&scorer, nullptr, nullptr, nullptr};
  const eval::RunOptions test{cfg.k, control::CandidateMode::Test, cfg.seeds.front()};

  const auto fine = eval::select_cohort(ds, Scenario::ItemFine);
  const auto coarse = eval::select_cohort(ds, Scenario::ItemCoarse);
  std::cerr << "preference-shift cohort: " << fine.members.size() << " users\n";

  const auto tuned = [&](Variant v, const eval::Cohort& cohort) {
    auto choice = eval::select_coefficients(v, plain, cohort, cfg, predictors, log);
    eval::Models m = plain;
    if (v == Variant::CUCI) m.predictor = &predictors[choice.predictor_hidden];
    return std::pair{choice, m};
  };
  const auto row_of = [&](Variant v, const eval::Models& m, const eval::Cohort& cohort, eval::Coefficients c) {
    return eval::evaluate_row(ds, cohort, eval::run_variant(v, m, cohort, c, test));
  };

  const auto base_fine = row_of(Variant::Base, plain, fine, {});
  const auto base_coarse = row_of(Variant::Base, plain, coarse, {});
  const auto [rerank_choice, rerank_models] = tuned(Variant::Reranking, coarse);
  const auto rerank = row_of(Variant::Reranking, rerank_models, coarse, rerank_choice.coefficients);
  const auto [fuci_choice, fuci_models] = tuned(Variant::FUCI, fine);
  const auto fuci = row_of(Variant::FUCI, fuci_models, fine, fuci_choice.coefficients);
  const auto [cuci_choice, cuci_models] = tuned(Variant::CUCI, coarse);
  const auto cuci = row_of(Variant::CUCI, cuci_models, coarse, cuci_choice.coefficients);

  Ml1mOutcomes out;
  {
    const double base_mcd = value(base_coarse, Scenario::ItemCoarse, Metric::MCD);
    const double rerank_mcd = value(rerank, Scenario::ItemCoarse, Metric::MCD);
    const double base_recall = value(base_fine, Scenario::ItemFine, Metric::Recall);
    const double fuci_recall = value(fuci, Scenario::ItemFine, Metric::Recall);
    const double fuci_tcd = value(fuci, Scenario::ItemFine, Metric::TCD);
    const double cuci_wndcg = value(cuci, Scenario::ItemCoarse, Metric::WNDCG);
    const double rerank_wndcg = value(rerank, Scenario::ItemCoarse, Metric::WNDCG);
    const bool a = base_mcd >= kBaselineMcdLow && base_mcd <= kBaselineMcdHigh;
    const bool b = rerank_mcd <= kRerankMcdMax;
    const bool c = fuci_recall >= kFineRecallRatio * base_recall;
    const bool d = fuci_tcd >= kFineTcdMin;
    const bool e = cuci_wndcg >= rerank_wndcg;
    const auto mark = [](bool ok) { return ok ? "ok" : "FAILED"; };
    out.p6 = judge(a && b && c && d && e,
                   "(a) base MCD " + fmt(base_mcd) + " " + mark(a) + "; (b) Reranking MCD " + fmt(rerank_mcd) +
                       " at beta " + fmt(rerank_choice.coefficients.beta) + " " + mark(b) + "; (c) F-UCI Recall " +
                       fmt(fuci_recall) + " vs base " + fmt(base_recall) + " " + mark(c) + "; (d) F-UCI TCD " +
                       fmt(fuci_tcd) + " " + mark(d) + "; (e) C-UCI W-NDCG " + fmt(cuci_wndcg) +
                       " vs Reranking " + fmt(rerank_wndcg) + " " + mark(e) + "; cohort " +
                       std::to_string(fine.members.size()));
  }
  {
    const auto tcd_sweep = eval::sweep(Variant::FUCI, fuci_models, fine, fuci_choice.coefficients, "beta",
                                       cfg.beta_grid, cfg.k, nullptr);
    const auto mcd_sweep = eval::sweep(Variant::CUCI, cuci_models, coarse, cuci_choice.coefficients, "beta",
                                       cfg.beta_grid, cfg.k, nullptr);
    std::string tcd_trend, mcd_trend;
    bool tcd_ok = true, mcd_ok = true;
    for (std::size_t j = 0; j < tcd_sweep.size(); ++j) {
      const double t = value(tcd_sweep[j].row, Scenario::ItemFine, Metric::TCD);
      const double m = value(mcd_sweep[j].row, Scenario::ItemCoarse, Metric::MCD);
      tcd_trend += (j ? " " : "") + fmt(t, 3);
      mcd_trend += (j ? " " : "") + fmt(m, 3);
      if (j > 0) {
        tcd_ok = tcd_ok && t >= value(tcd_sweep[j - 1].row, Scenario::ItemFine, Metric::TCD) - kMonotoneSlack;
        mcd_ok = mcd_ok && m <= value(mcd_sweep[j - 1].row, Scenario::ItemCoarse, Metric::MCD) + kMonotoneSlack;
      }
    }

    const auto user_coarse = eval::select_cohort(ds, Scenario::UserCoarse, "gender");
    const auto [uci_choice, uci_models] = tuned(Variant::UCI, user_coarse);
    const auto alpha_sweep = eval::sweep(Variant::UCI, uci_models, user_coarse, uci_choice.coefficients, "alpha",
                                         cfg.alpha_grid, cfg.k, nullptr);
    std::string iso_trend, coverage_trend;
    for (std::size_t j = 0; j < alpha_sweep.size(); ++j) {
      iso_trend += (j ? " " : "") + fmt(value(alpha_sweep[j].row, Scenario::UserCoarse, Metric::IsoIndex), 3);
      coverage_trend += (j ? " " : "") + fmt(value(alpha_sweep[j].row, Scenario::UserCoarse, Metric::Coverage), 3);
    }
    const double iso0 = value(alpha_sweep.front().row, Scenario::UserCoarse, Metric::IsoIndex);
    const double iso5 = value(alpha_sweep.back().row, Scenario::UserCoarse, Metric::IsoIndex);
    const bool iso_ok = alpha_sweep.front().value == 0.0 && alpha_sweep.back().value == 0.5 && iso5 < iso0;
    out.p7 = judge(tcd_ok && mcd_ok && iso_ok,
                   "F-UCI TCD along beta [" + tcd_trend + "]; C-UCI MCD along beta [" + mcd_trend +
                       "]; user_coarse(gender) Iso-Index along alpha [" + iso_trend + "], coverage [" +
                       coverage_trend + "]");
  }
  {
    auto ablated = cuci_choice.coefficients;
    ablated.alpha = 0.0;
    const auto without = row_of(Variant::CUCI, cuci_models, coarse, ablated);
    const double with_ci = value(cuci, Scenario::ItemCoarse, Metric::WNDCG);
    const double without_ci = value(without, Scenario::ItemCoarse, Metric::WNDCG);
    out.p9 = judge(with_ci > without_ci, "C-UCI W-NDCG " + fmt(with_ci, 6) + " at alpha " +
                                             fmt(cuci_choice.coefficients.alpha) + " vs " + fmt(without_ci, 6) +
                                             " at alpha 0");
  }
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Acceptance criteria runner"};
  std::string group = "all", cli, ml1m;
  app.add_option("--group", group, "properties, ml1m or all")
      ->check(CLI::IsMember({"properties", "ml1m", "all"}))
      ->capture_default_str();
  app.add_option("--cli", cli, "ucrs binary for the cross-surface check");
  app.add_option("--ml1m", ml1m, "MovieLens-1M directory (default: $UCRS_ML1M_DIR)");
  CLI11_PARSE(app, argc, argv);
  if (ml1m.empty()) {
    if (const char* env = std::getenv("UCRS_ML1M_DIR")) ml1m = env;
  }

  int passed = 0, failed = 0, skipped = 0;
  const auto report = [&](const char* id, const Outcome& o) {
    const char* word = o.status == Status::Pass ? "PASS" : o.status == Status::Fail ? "FAIL" : "SKIP";
    (o.status == Status::Pass ? passed : o.status == Status::Fail ? failed : skipped)++;
    std::cout << id << ' ' << word << "  " << o.detail << std::endl;
  };
  const auto guarded = [&](const char* id, const std::function<Outcome()>& fn) {
    try {
      report(id, fn());
    } catch (const std::exception& e) {
      report(id, {Status::Fail, std::string("threw: ") + e.what()});
    }
  };

  if (group != "ml1m") {
    guarded("P1", p1_endpoints);
    guarded("P2", p2_policy);
    guarded("P3", p3_isolation);
    guarded("P4", p4_metrics);
    guarded("P5", p5_gradients);
  }
  if (group != "properties") {
    if (ml1m.empty() || !std::filesystem::exists(std::filesystem::path(ml1m) / "ratings.dat")) {
      const Outcome skip{Status::Skip, "MovieLens-1M not found (pass --ml1m DIR or set UCRS_ML1M_DIR)"};
      report("P6", skip);
      report("P7", skip);
      report("P9", skip);
    } else {
      try {
        const auto r = ml1m_criteria(ml1m);
        report("P6", r.p6);
        report("P7", r.p7);
        report("P9", r.p9);
      } catch (const std::exception& e) {
        const Outcome fail{Status::Fail, std::string("threw: ") + e.what()};
        report("P6", fail);
        report("P7", fail);
        report("P9", fail);
      }
    }
  }
  if (group != "ml1m") {
    guarded("P8", p8_predictor);
    guarded("P10", [&] { return p10_cross_surface(cli); });
  }

  std::cout << passed << " passed, " << failed << " failed, " << skipped << " skipped" << std::endl;
  if (failed > 0) return 1;
  return passed == 0 && skipped > 0 ? 77 : 0;
}
