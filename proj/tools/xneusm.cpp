// Command-line front end: gen / train / eval / explain / verify.

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "xneusm/dataset.hpp"
#include "xneusm/error.hpp"
#include "xneusm/kernels.hpp"
#include "xneusm/metrics.hpp"
#include "xneusm/model.hpp"
#include "xneusm/rng.hpp"
#include "xneusm/theory.hpp"
#include "xneusm/train.hpp"

using namespace xneusm;

namespace {

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Flat `key = value` run configuration; unknown keys are rejected so typos in
// hyperparameter names cannot silently fall back to defaults.
struct RunConfig {
  ModelConfig model;
  TrainConfig train;

  void apply(const std::string& key, const std::string& value) {
    if (key == "learning_rate") train.learning_rate = std::stod(value);
    else if (key == "epochs") train.epochs = std::stoi(value);
    else if (key == "lambda") { train.lambda = std::stod(value); model.lambda = train.lambda; }
    else if (key == "beta1") train.beta1 = std::stod(value);
    else if (key == "beta2") train.beta2 = std::stod(value);
    else if (key == "adam_eps") train.adam_eps = std::stod(value);
    else if (key == "seed") train.seed = std::stoull(value);
    else if (key == "shuffle") train.shuffle = std::stoi(value) != 0;
    else if (key == "batch_size") train.batch_size = std::stoi(value);
    else if (key == "tv") model.t_v = std::stoi(value);
    else if (key == "hidden_dim") model.hidden_dim = std::stoi(value);
    else if (key == "num_layers") model.num_layers = std::stoi(value);
    else if (key == "num_heads") model.num_heads = std::stoi(value);
    else if (key == "fc_layers") model.fc_layers = std::stoi(value);
    else if (key == "fc_hidden") model.fc_hidden = std::stoi(value);
    else if (key == "leaky_slope") model.leaky_slope = std::stod(value);
    else if (key == "hop_schedule") model.hop_schedule = hop_schedule_from_name(value);
    else if (key == "shared_branches") model.shared_branches = std::stoi(value) != 0;
    else if (key == "epsilon") model.epsilon = std::stod(value);
    else throw UsageError("unknown config key '" + key + "'");
  }

  void load_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) fail(Errc::io_error, "cannot open config " + path);
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
      ++line_no;
      const std::size_t start = line.find_first_not_of(" \t\r");
      if (start == std::string::npos || line[start] == '#') continue;
      std::istringstream ls(line);
      std::string key, eq, value;
      if (!(ls >> key >> eq >> value) || eq != "=")
        throw UsageError("config line " + std::to_string(line_no) + ": expected 'key = value'");
      apply(key, value);
    }
  }

  void echo(std::ostream& out) const {
    out << "learning_rate = " << train.learning_rate << '\n'
        << "epochs = " << train.epochs << '\n'
        << "lambda = " << train.lambda << '\n'
        << "beta1 = " << train.beta1 << '\n'
        << "beta2 = " << train.beta2 << '\n'
        << "adam_eps = " << train.adam_eps << '\n'
        << "seed = " << train.seed << '\n'
        << "shuffle = " << (train.shuffle ? 1 : 0) << '\n'
        << "batch_size = " << train.batch_size << '\n'
        << "tv = " << model.t_v << '\n'
        << "hidden_dim = " << model.hidden_dim << '\n'
        << "num_layers = " << model.num_layers << '\n'
        << "num_heads = " << model.num_heads << '\n'
        << "fc_layers = " << model.fc_layers << '\n'
        << "fc_hidden = " << model.fc_hidden << '\n'
        << "leaky_slope = " << model.leaky_slope << '\n'
        << "hop_schedule = " << hop_schedule_name(model.hop_schedule) << '\n'
        << "shared_branches = " << (model.shared_branches ? 1 : 0) << '\n'
        << "epsilon = " << model.epsilon << '\n';
  }
};

int cmd_gen(const std::string& preset, const std::string& stats_file, int targets, int queries,
            std::uint64_t seed, const std::string& out_dir) {
  DatasetStats stats;
  if (!preset.empty()) {
    auto s = preset_stats(preset);
    if (!s) {
      std::string known;
      for (const auto& n : preset_names()) known += n + " ";
      throw UsageError("unknown preset '" + preset + "' (known: " + known + ")");
    }
    stats = *s;
  } else if (!stats_file.empty()) {
    stats = parse_stats_file(stats_file);
  } else {
    throw UsageError("one of --stats-preset/--stats-file is required");
  }
  const std::string manifest = build_dataset(stats, targets, queries, seed, out_dir);
  std::cout << "manifest " << manifest << "\n";
  return 0;
}

int resolve_t_v(int flag_tv, const std::string& manifest) {
  if (flag_tv > 0) return flag_tv;
  if (auto tv = sidecar_t_v(manifest)) return *tv;
  throw UsageError(
      "label alphabet size unknown: pass --tv or keep dataset.conf next to the manifest");
}

int cmd_train(const std::string& data, const std::string& config_file, const std::string& out,
              const std::string& eval_manifest, int tv_flag, std::string metrics_path) {
  RunConfig cfg;
  if (!config_file.empty()) cfg.load_file(config_file);
  if (tv_flag > 0) cfg.model.t_v = tv_flag;
  if (cfg.model.t_v <= 0) cfg.model.t_v = resolve_t_v(0, data);
  cfg.echo(std::cout);
  std::cout << "backend = " << kern::backend_name(kern::active_backend()) << "\n";

  const LoadedDataset train_data = load_dataset(data);
  LoadedDataset eval_data;
  if (!eval_manifest.empty()) eval_data = load_dataset(eval_manifest);

  if (metrics_path.empty()) metrics_path = out + ".metrics.csv";
  ModelParams params = ModelParams::init(cfg.model, cfg.train.seed);
  const TrainResult result = train_model(params, train_data,
                                         eval_manifest.empty() ? nullptr : &eval_data,
                                         cfg.train, metrics_path);
  save_checkpoint(params, out);
  std::cout << "checkpoint " << out << "\nmetrics " << metrics_path << "\n";
  if (!result.epoch_loss_sm.empty())
    std::cout << "final_train_loss " << result.epoch_loss_sm.back() << "\n";
  if (result.final_eval) {
    const EvalMetrics& m = *result.final_eval;
    std::printf("eval roc_auc %.4f pr_auc %.4f f1 %.4f acc %.4f top1 %.4f mrr %.4f\n",
                m.roc_auc, m.pr_auc, m.f1, m.accuracy, m.top1, m.mrr);
  }
  return 0;
}

int cmd_eval(const std::string& data, const std::string& ckpt, bool threshold_sweep,
             const std::string& sweep_out) {
  const ModelParams params = load_checkpoint(ckpt);
  const LoadedDataset ds = load_dataset(data);
  const EvalMetrics m = evaluate_model(params, ds);
  std::printf("samples %d ranked_positives %d\n", m.samples, m.ranked_positives);
  std::printf("roc_auc %.6f\npr_auc %.6f\nf1 %.6f\naccuracy %.6f\n", m.roc_auc, m.pr_auc, m.f1,
              m.accuracy);
  std::printf("top1 %.6f\ntop5 %.6f\ntop10 %.6f\nmrr %.6f\n", m.top1, m.top5, m.top10, m.mrr);

  if (threshold_sweep) {
    std::vector<double> scores;
    std::vector<int> labels;
    for (const auto& sample : ds.samples) {
      const JointInput ji = encode_pair(sample.query, ds.target_of(sample), params.config.t_v);
      scores.push_back(model_forward(ji, params).y_hat.item());
      labels.push_back(sample.label);
    }
    std::vector<double> grid;
    for (int i = 0; i < 10; ++i) grid.push_back(0.5 + 0.05 * i);
    std::ostringstream csv;
    csv << "threshold,kept,coverage,f1,accuracy\n";
    char buf[128];
    for (const SweepRow& row : confidence_sweep(scores, labels, grid)) {
      std::snprintf(buf, sizeof buf, "%.2f,%d,%.6f,%.6f,%.6f\n", row.threshold, row.kept,
                    row.coverage, row.f1, row.accuracy);
      csv << buf;
    }
    if (sweep_out.empty()) {
      std::cout << csv.str();
    } else {
      std::ofstream sw(sweep_out);
      if (!sw) fail(Errc::io_error, "cannot write " + sweep_out);
      sw << csv.str();
      std::cout << "sweep " << sweep_out << "\n";
    }
  }
  return 0;
}

int cmd_explain(const std::string& target_path, const std::string& query_path,
                const std::string& ckpt, double epsilon_flag, const std::string& format) {
  const ModelParams params = load_checkpoint(ckpt);
  const Graph target = load_graph_file(target_path);
  const Graph query = load_graph_file(query_path);
  const double epsilon = epsilon_flag >= 0.0 ? epsilon_flag : params.config.epsilon;

  const JointInput ji = encode_pair(query, target, params.config.t_v);
  const ForwardResult fwd = model_forward(ji, params);
  const Explanation ex = extract_mapping(fwd.cross_attention, ji.pattern_count, epsilon);

  if (format == "json") {
    nlohmann::json doc;
    doc["prediction"] = fwd.y_hat.item();
    doc["triples"] = nlohmann::json::array();
    for (const auto& t : ex.triples)
      doc["triples"].push_back(
          {{"pattern_node", t.pattern_node}, {"target_node", t.target_node}, {"p", t.p}});
    doc["rankings"] = nlohmann::json::array();
    for (const auto& row : ex.rankings) {
      nlohmann::json entry = nlohmann::json::array();
      for (const auto& [node, p] : row) entry.push_back({{"target_node", node}, {"p", p}});
      doc["rankings"].push_back(entry);
    }
    std::cout << doc.dump(2) << "\n";
  } else if (format == "tsv") {
    std::printf("prediction\t%.9g\n", fwd.y_hat.item());
    for (const auto& t : ex.triples)
      std::printf("triple\t%d\t%d\t%.9g\n", t.pattern_node, t.target_node, t.p);
    for (std::size_t i = 0; i < ex.rankings.size(); ++i) {
      std::printf("ranking\t%zu", i);
      for (const auto& [node, p] : ex.rankings[i]) std::printf("\t%d:%.9g", node, p);
      std::printf("\n");
    }
  } else {
    throw UsageError("unknown format '" + format + "' (tsv|json)");
  }
  return 0;
}

int cmd_verify(const std::string& suite, const std::string& out_csv) {
  if (suite != "all" && suite != "bound" && suite != "fixedpoint" && suite != "reduction")
    throw UsageError("unknown suite '" + suite + "' (bound|fixedpoint|reduction|all)");
  bool all_pass = true;
  const bool run_all = suite == "all";

  if (run_all || suite == "bound") {
    int checked = 0, passed = 0;
    double worst_margin = 1e300;
    for (double alpha : {0.3, 0.5, 0.7, 0.9}) {
      for (int hops = 1; hops <= 10; ++hops) {
        for (std::uint64_t s = 0; s < 10; ++s) {
          const BoundCheck c = check_error_bound(40, alpha, hops, 500, derive_seed(11, s, hops));
          ++checked;
          passed += c.pass;
          worst_margin = std::min(worst_margin, c.bound - c.empirical_err);
        }
      }
    }
    std::printf("bound: %d/%d within (1-alpha)^(K+1), min margin %.3g\n", passed, checked,
                worst_margin);
    all_pass = all_pass && passed == checked;
    if (!out_csv.empty()) {
      std::ofstream out(out_csv);
      if (!out) fail(Errc::io_error, "cannot write " + out_csv);
      std::vector<double> alphas;
      for (double a = 0.3; a < 0.95; a += 0.1) alphas.push_back(a);
      std::vector<int> hop_grid;
      for (int k = 1; k <= 10; ++k) hop_grid.push_back(k);
      emit_bound_curve(alphas, hop_grid, out);
      std::printf("bound curve written to %s\n", out_csv.c_str());
    }
  }

  if (run_all || suite == "fixedpoint") {
    int checked = 0, passed = 0;
    double worst_residual = 0.0;
    for (std::uint64_t s = 0; s < 50; ++s) {
      const FixedPointCheck c = check_fixed_point(30, derive_seed(13, s, 0), 1e-10);
      ++checked;
      passed += c.pass;
      worst_residual = std::max(worst_residual, c.residual);
    }
    std::printf("fixedpoint: %d/%d converged, max residual %.3g\n", passed, checked,
                worst_residual);
    all_pass = all_pass && passed == checked;
  }

  if (run_all || suite == "reduction") {
    int checked = 0, passed = 0;
    double worst_gap = 0.0;
    for (double alpha : {0.01, 0.3, 0.5, 0.7, 0.99}) {
      for (std::uint64_t s = 0; s < 10; ++s) {
        const double gap = uniform_reduction_gap(25, alpha, 7, derive_seed(17, s, 0));
        ++checked;
        passed += gap <= 1e-12;
        worst_gap = std::max(worst_gap, gap);
      }
    }
    std::printf("reduction: %d/%d bit-consistent, max gap %.3g\n", passed, checked, worst_gap);
    all_pass = all_pass && passed == checked;
  }

  std::printf("verify: %s\n", all_pass ? "PASS" : "FAIL");
  return all_pass ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Neural subgraph matching with learnable multi-hop attention"};
  app.require_subcommand(1);

  auto* gen = app.add_subcommand("gen", "Generate a synthetic dataset");
  std::string gen_preset, gen_stats_file, gen_out;
  int gen_targets = 0, gen_queries = 0;
  std::uint64_t gen_seed = 0;
  gen->add_option("--stats-preset", gen_preset,
                  "Preset name (kki, cox2, cox2_md, dhfr, dblp_v1, msrc_21)");
  gen->add_option("--stats-file", gen_stats_file, "Stats file (key = value)");
  gen->add_option("--targets", gen_targets, "Number of target graphs")->required();
  gen->add_option("--queries", gen_queries, "Queries per target")->required();
  gen->add_option("--seed", gen_seed, "Master seed");
  gen->add_option("--out", gen_out, "Output directory")->required();

  auto* train = app.add_subcommand("train", "Train a model");
  std::string train_data, train_config, train_out, train_eval, train_metrics;
  int train_tv = 0;
  train->add_option("--data", train_data, "Training manifest")->required();
  train->add_option("--config", train_config, "Config file (key = value)");
  train->add_option("--out", train_out, "Checkpoint output path")->required();
  train->add_option("--eval", train_eval, "Held-out manifest for per-epoch metrics");
  train->add_option("--tv", train_tv, "Label alphabet size override");
  train->add_option("--metrics", train_metrics, "Metrics CSV path (default <out>.metrics.csv)");

  auto* eval = app.add_subcommand("eval", "Evaluate a checkpoint");
  std::string eval_data, eval_ckpt, eval_sweep_out;
  bool eval_sweep = false;
  eval->add_option("--data", eval_data, "Manifest to evaluate")->required();
  eval->add_option("--ckpt", eval_ckpt, "Checkpoint path")->required();
  eval->add_flag("--threshold-sweep", eval_sweep, "Emit confidence-threshold sweep CSV");
  eval->add_option("--sweep-out", eval_sweep_out, "Sweep CSV path (default stdout)");

  auto* explain = app.add_subcommand("explain", "Predict and explain one pair");
  std::string ex_target, ex_query, ex_ckpt, ex_format = "tsv";
  double ex_epsilon = -1.0;
  explain->add_option("--target", ex_target, "Target graph file")->required();
  explain->add_option("--query", ex_query, "Query graph file")->required();
  explain->add_option("--ckpt", ex_ckpt, "Checkpoint path")->required();
  explain->add_option("--epsilon", ex_epsilon, "Mapping threshold (default: checkpoint value)");
  explain->add_option("--format", ex_format, "Output format: tsv|json");

  auto* verify = app.add_subcommand("verify", "Run the theoretical property checks");
  std::string verify_suite = "all", verify_out;
  verify->add_option("--suite", verify_suite, "bound|fixedpoint|reduction|all");
  verify->add_option("--out", verify_out, "Bound-curve CSV path");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << e.what() << "\n";
    return 2;
  }

  try {
    if (gen->parsed())
      return cmd_gen(gen_preset, gen_stats_file, gen_targets, gen_queries, gen_seed, gen_out);
    if (train->parsed())
      return cmd_train(train_data, train_config, train_out, train_eval, train_tv, train_metrics);
    if (eval->parsed()) return cmd_eval(eval_data, eval_ckpt, eval_sweep, eval_sweep_out);
    if (explain->parsed()) return cmd_explain(ex_target, ex_query, ex_ckpt, ex_epsilon, ex_format);
    if (verify->parsed()) return cmd_verify(verify_suite, verify_out);
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return 2;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
