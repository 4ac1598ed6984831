// ucrs: command-line front end for data preparation, training, evaluation,
// offline controls and serving.

#include <csignal>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "ucrs/control/predictor.hpp"
#include "ucrs/data/io.hpp"
#include "ucrs/data/prepare.hpp"
#include "ucrs/data/snapshot.hpp"
#include "ucrs/data/synthetic.hpp"
#include "ucrs/eval/experiment.hpp"
#include "ucrs/model/train.hpp"
#include "ucrs/service/api.hpp"
#include "ucrs/service/server.hpp"

namespace {

using namespace ucrs;

struct PrepareArgs {
  std::string ml1m, ratings, users, items, out;
  int kcore = 10;
  int threshold = 4;
  bool single_label = false;
};

struct SynthArgs {
  std::string out;
  data::SyntheticConfig config;
};

struct TrainArgs {
  std::string dataset, out, kind = "fm", log;
  model::TrainConfig config;
  bool no_user_features = false;
  bool no_item_features = false;
  bool fixed_negatives = false;
};

struct PredictorArgs {
  std::string dataset, out;
  control::PredictorConfig config;
};

struct SnapshotArgs {
  std::string dataset, model, predictor, out;
  service::SnapshotOptions options;
};

struct QueryArgs {
  std::string snapshot, user, command, command_file;
  std::size_t k = 10;
  bool k_set = false;
};

struct EvalArgs {
  std::string config, out;
};

struct ServeArgs {
  std::string snapshot, host = "127.0.0.1", cors_origin;
  int port = 8080;
};

int run_prepare(const PrepareArgs& a) {
  data::RawCorpus corpus;
  if (!a.ml1m.empty()) {
    corpus = data::load_movielens_1m(a.ml1m);
  } else {
    if (a.ratings.empty() || a.items.empty()) throw InvalidArgument("give --ml1m DIR or --ratings and --items");
    corpus.interactions = data::load_interactions(a.ratings);
    corpus.item_categories = data::load_item_categories(a.items);
    if (!a.users.empty()) corpus.user_features = data::load_user_features(a.users);
  }
  data::PrepareOptions options;
  options.kcore = a.kcore;
  options.positive_threshold = a.threshold;
  options.single_label = a.single_label ? data::SingleLabel::KeepFirstListed : data::SingleLabel::Off;
  data::PrepareStats stats;
  const auto ds = data::prepare(std::move(corpus), options, &stats);
  const nlohmann::json extra{{"prepare",
                              {{"kcore", a.kcore},
                               {"positive_threshold", a.threshold},
                               {"raw_rows", stats.raw_rows},
                               {"dropped_missing_profile", stats.dropped_missing_profile},
                               {"after_kcore", stats.after_kcore},
                               {"positives", stats.positives}}}};
  data::write_dataset(a.out, ds, extra);
  std::cout << data::read_manifest(a.out).dump(2) << '\n';
  return 0;
}

int run_synth(const SynthArgs& a) {
  const auto corpus = data::generate_synthetic(a.config);
  std::filesystem::create_directories(a.out);
  const std::filesystem::path out(a.out);
  data::write_interactions(out / "ratings.tsv", corpus.interactions);
  data::write_user_features(out / "users.tsv", corpus.user_features);
  data::write_item_categories(out / "items.tsv", corpus.item_categories);
  std::cout << "wrote " << corpus.interactions.size() << " interactions to " << out.string() << '\n';
  return 0;
}

int run_train(TrainArgs a) {
  const auto ds = data::read_dataset(a.dataset);
  a.config.kind = model::parse_kind(a.kind);
  a.config.with_user_features = !a.no_user_features;
  a.config.with_item_categories = !a.no_item_features;
  a.config.resample_negatives = !a.fixed_negatives;
  std::ofstream log;
  if (!a.log.empty()) {
    log.open(a.log);
    if (!log) throw IoError("cannot write " + a.log);
  }
  const auto result = model::train(ds, a.config, [&](const model::EpochLog& e) {
    nlohmann::json j{{"epoch", e.epoch}, {"loss", e.loss}};
    if (e.valid_recall >= 0) j["valid_recall"] = e.valid_recall;
    std::cerr << j.dump() << '\n';
    if (log.is_open()) log << j.dump() << '\n';
  });
  model::save_params(result.params, a.out);
  std::cout << nlohmann::json{{"model", a.out},
                              {"best_epoch", result.best_epoch},
                              {"best_valid_recall", result.best_valid_recall}}
                   .dump(2)
            << '\n';
  return 0;
}

int run_train_predictor(const PredictorArgs& a) {
  const auto ds = data::read_dataset(a.dataset);
  const auto pairs = control::history_halves(ds);
  const auto p = control::train_category_predictor(pairs, ds.num_categories(), a.config);
  control::save_predictor(p, a.out);
  std::cout << nlohmann::json{{"predictor", a.out}, {"users", pairs.size()}, {"loss", control::predictor_loss(p, pairs)}}
                   .dump(2)
            << '\n';
  return 0;
}

int run_snapshot(const SnapshotArgs& a) {
  const auto ds = data::read_dataset(a.dataset);
  const auto params = model::load_params(a.model);
  std::optional<control::CategoryPredictor> predictor;
  if (!a.predictor.empty()) predictor = control::load_predictor(a.predictor);
  service::write_snapshot(a.out, ds, params, predictor ? &*predictor : nullptr, a.options);
  // Loading validates the directory and computes its version.
  const auto snap = service::ServingSnapshot::load(a.out);
  std::cout << service::health_json(*snap).dump(2) << '\n';
  return 0;
}

/// Runs one API request against a snapshot and prints the body exactly as the
/// server would send it. Non-200 answers exit with status 3.
int run_query(const QueryArgs& a, const std::string& method, const std::string& route) {
  const auto snap = service::ServingSnapshot::load(a.snapshot);
  service::ApiRequest req{method, "/users/" + a.user + "/" + route, {}, ""};
  if (a.k_set) req.query["k"] = std::to_string(a.k);
  if (method == "POST") {
    if (!a.command_file.empty()) {
      std::ifstream in(a.command_file);
      if (!in) throw IoError("cannot open " + a.command_file);
      std::ostringstream s;
      s << in.rdbuf();
      req.body = s.str();
    } else {
      req.body = a.command;
    }
  }
  const auto res = service::handle(*snap, req);
  std::cout << res.body.dump(2) << '\n';
  return res.status == 200 ? 0 : 3;
}

int run_eval(const EvalArgs& a) {
  const auto config = eval::load_experiment_config(a.config);
  const auto ds = data::read_dataset(config.dataset);
  const auto result = eval::run_experiment(ds, config, a.out);
  std::cout << eval::render_text(result.table);
  return 0;
}

service::Server* g_server = nullptr;

void on_signal(int) {
  if (g_server) g_server->stop();
}

int run_serve(const ServeArgs& a) {
  service::Server server(service::ServingSnapshot::load(a.snapshot), {a.cors_origin, a.snapshot});
  const int port = server.bind(a.host, a.port);
  g_server = &server;
  std::signal(SIGINT, on_signal);
  std::signal(SIGTERM, on_signal);
  std::cerr << "serving snapshot " << server.snapshot()->version() << " on http://" << a.host << ":" << port << '\n';
  server.listen();
  g_server = nullptr;
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"User-controllable recommendation toolkit"};
  app.require_subcommand(1);

  auto* data_cmd = app.add_subcommand("data", "Prepare or generate datasets");
  data_cmd->require_subcommand(1);

  PrepareArgs prepare;
  auto* prepare_cmd = data_cmd->add_subcommand("prepare", "Filter, binarize and split a raw corpus");
  auto* ml1m = prepare_cmd->add_option("--ml1m", prepare.ml1m, "MovieLens-1M directory (ratings.dat, users.dat, movies.dat)");
  prepare_cmd->add_option("--ratings", prepare.ratings, "user \\t item \\t rating \\t timestamp")->excludes(ml1m);
  prepare_cmd->add_option("--users", prepare.users, "user \\t attr=value ...")->excludes(ml1m);
  prepare_cmd->add_option("--items", prepare.items, "item \\t cat|cat [\\t name]")->excludes(ml1m);
  prepare_cmd->add_option("--kcore", prepare.kcore, "Minimum interactions per user and item")->capture_default_str();
  prepare_cmd->add_option("--threshold", prepare.threshold, "Smallest positive rating")->capture_default_str();
  prepare_cmd->add_flag("--single-label", prepare.single_label, "Keep only the first listed category of each item");
  prepare_cmd->add_option("--out", prepare.out, "Output dataset directory")->required();

  SynthArgs synth;
  auto* synth_cmd = data_cmd->add_subcommand("synth", "Write a synthetic MovieLens-shaped raw corpus");
  synth_cmd->add_option("--out", synth.out, "Output directory")->required();
  synth_cmd->add_option("--users", synth.config.users)->capture_default_str();
  synth_cmd->add_option("--items", synth.config.items)->capture_default_str();
  synth_cmd->add_option("--categories", synth.config.categories)->capture_default_str();
  synth_cmd->add_option("--min-interactions", synth.config.min_interactions)->capture_default_str();
  synth_cmd->add_option("--max-interactions", synth.config.max_interactions)->capture_default_str();
  synth_cmd->add_option("--shift-fraction", synth.config.shift_fraction)->capture_default_str();
  synth_cmd->add_option("--seed", synth.config.seed)->capture_default_str();

  TrainArgs train;
  auto* train_cmd = app.add_subcommand("train", "Train an FM or NFM model");
  train_cmd->add_option("--dataset", train.dataset, "Prepared dataset directory")->required();
  train_cmd->add_option("--out", train.out, "Model checkpoint path")->required();
  train_cmd->add_option("--model", train.kind, "fm or nfm")->capture_default_str();
  train_cmd->add_option("--dim", train.config.dim)->capture_default_str();
  train_cmd->add_option("--hidden", train.config.hidden, "NFM hidden size")->capture_default_str();
  train_cmd->add_option("--lr", train.config.learning_rate)->capture_default_str();
  train_cmd->add_option("--l2", train.config.l2)->capture_default_str();
  train_cmd->add_option("--batch-size", train.config.batch_size)->capture_default_str();
  train_cmd->add_option("--epochs", train.config.max_epochs)->capture_default_str();
  train_cmd->add_option("--patience", train.config.patience)->capture_default_str();
  train_cmd->add_option("--eval-every", train.config.eval_every)->capture_default_str();
  train_cmd->add_option("--init-scale", train.config.init_scale)->capture_default_str();
  train_cmd->add_option("--seed", train.config.seed)->capture_default_str();
  train_cmd->add_flag("--no-user-features", train.no_user_features, "Train on user IDs only");
  train_cmd->add_flag("--no-item-features", train.no_item_features, "Train on item IDs only");
  train_cmd->add_flag("--fixed-negatives", train.fixed_negatives, "Sample negatives once instead of every epoch");
  train_cmd->add_option("--log", train.log, "Per-epoch JSON lines");

  PredictorArgs pred;
  auto* pred_cmd = app.add_subcommand("train-predictor", "Train the target category predictor");
  pred_cmd->add_option("--dataset", pred.dataset)->required();
  pred_cmd->add_option("--out", pred.out)->required();
  pred_cmd->add_option("--hidden", pred.config.hidden)->capture_default_str();
  pred_cmd->add_option("--epochs", pred.config.epochs)->capture_default_str();
  pred_cmd->add_option("--lr", pred.config.learning_rate)->capture_default_str();
  pred_cmd->add_option("--batch-size", pred.config.batch_size)->capture_default_str();
  pred_cmd->add_option("--seed", pred.config.seed)->capture_default_str();

  SnapshotArgs snapshot;
  auto* snapshot_cmd = app.add_subcommand("snapshot", "Bundle dataset, model and predictor for serving");
  snapshot_cmd->add_option("--dataset", snapshot.dataset)->required();
  snapshot_cmd->add_option("--model", snapshot.model)->required();
  snapshot_cmd->add_option("--predictor", snapshot.predictor);
  snapshot_cmd->add_option("--depth", snapshot.options.baseline_depth, "Precomputed slate length")->capture_default_str();
  snapshot_cmd->add_option("--grouping", snapshot.options.report_grouping,
                           "Attribute or majority-category for bubble reports");
  snapshot_cmd->add_option("--user-alpha", snapshot.options.defaults.user_alpha)->capture_default_str();
  snapshot_cmd->add_option("--item-alpha", snapshot.options.defaults.item_alpha)->capture_default_str();
  snapshot_cmd->add_option("--out", snapshot.out)->required();

  QueryArgs query;
  const auto add_query = [&](CLI::App* cmd, bool with_k) {
    cmd->add_option("--snapshot", query.snapshot, "Snapshot directory")->required();
    cmd->add_option("--user", query.user, "Raw user id")->required();
    if (with_k) cmd->add_option("--k", query.k, "Slate length")->each([&](const std::string&) { query.k_set = true; });
  };
  auto* recommend_cmd = app.add_subcommand("recommend", "Print a user's baseline recommendations");
  add_query(recommend_cmd, true);
  auto* control_cmd = app.add_subcommand("control", "Apply a command to a user's recommendations");
  add_query(control_cmd, true);
  auto* inline_cmd = control_cmd->add_option("--command", query.command, "Command JSON");
  control_cmd->add_option("--command-file", query.command_file, "File holding the command JSON")->excludes(inline_cmd);
  auto* report_cmd = app.add_subcommand("report", "Print a user's bubble report");
  add_query(report_cmd, false);
  auto* history_cmd = app.add_subcommand("history", "Print a user's interaction history");
  add_query(history_cmd, false);

  EvalArgs ev;
  auto* eval_cmd = app.add_subcommand("eval", "Run an experiment described by a YAML file");
  eval_cmd->add_option("--config", ev.config)->required()->check(CLI::ExistingFile);
  eval_cmd->add_option("--out", ev.out, "Results directory")->required();

  ServeArgs serve;
  auto* serve_cmd = app.add_subcommand("serve", "Serve a snapshot over HTTP");
  serve_cmd->add_option("--snapshot", serve.snapshot)->required();
  serve_cmd->add_option("--port", serve.port, "0 picks a free port")->capture_default_str();
  serve_cmd->add_option("--host", serve.host)->capture_default_str();
  serve_cmd->add_option("--cors-origin", serve.cors_origin, "Allowed browser origin");

  CLI11_PARSE(app, argc, argv);

  try {
    if (prepare_cmd->parsed()) return run_prepare(prepare);
    if (synth_cmd->parsed()) return run_synth(synth);
    if (train_cmd->parsed()) return run_train(train);
    if (pred_cmd->parsed()) return run_train_predictor(pred);
    if (snapshot_cmd->parsed()) return run_snapshot(snapshot);
    if (recommend_cmd->parsed()) return run_query(query, "GET", "recommendations");
    if (control_cmd->parsed()) {
      if (query.command.empty() && query.command_file.empty()) throw InvalidArgument("give --command or --command-file");
      return run_query(query, "POST", "controls");
    }
    if (report_cmd->parsed()) return run_query(query, "GET", "bubble-report");
    if (history_cmd->parsed()) return run_query(query, "GET", "history");
    if (eval_cmd->parsed()) return run_eval(ev);
    if (serve_cmd->parsed()) return run_serve(serve);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
