// mixad: train / score / interpret / evaluate the anomaly-detection pipeline
// on CSV datasets, plus a synthetic benchmark generator.

#include <CLI11.hpp>

#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include "mixad/config.hpp"
#include "mixad/csv.hpp"
#include "mixad/error.hpp"
#include "mixad/log.hpp"
#include "mixad/pipeline.hpp"

namespace fs = std::filesystem;
using namespace mixad;

namespace {

struct GlobalOpts {
  std::optional<std::uint64_t> seed;
  std::string config_path;
  std::string out_dir = ".";
};

RunConfig resolve_config(const GlobalOpts& opts) {
  RunConfig cfg;
  if (!opts.config_path.empty()) cfg = load_run_config(opts.config_path);
  if (opts.seed.has_value()) {
    cfg.train.seed = *opts.seed;
    cfg.synth.seed = *opts.seed;
  }
  return cfg;
}

void write_file(const fs::path& path, const std::string& content) {
  fs::create_directories(path.parent_path().empty() ? "." : path.parent_path());
  csv::atomic_write(path, content);
  log_info("wrote " + path.string());
}

void do_synth(const RunConfig& cfg, const fs::path& out) {
  save_dataset(generate_synthetic(cfg.synth), out);
  log_info("synthetic dataset written to " + out.string());
}

void do_train(const RunConfig& cfg, const fs::path& data, const fs::path& out) {
  const DatasetBundle bundle = load_dataset(data);
  const TrainOutput result = run_train(bundle, cfg.train);
  fs::create_directories(out);
  save_checkpoint(result.checkpoint, out / "best.ckpt");
  log_info("wrote " + (out / "best.ckpt").string());
  write_file(out / "train_log.csv", train_log_csv(result.log));
}

ScoreOutput do_score(const fs::path& ckpt_path, const fs::path& data, const fs::path& out,
                     bool dump_adjacency) {
  const DatasetBundle bundle = load_dataset(data);
  const Checkpoint ckpt = load_checkpoint(ckpt_path);
  ScoreOutput result = run_score(ckpt, bundle);
  fs::create_directories(out);
  write_file(out / "scores.csv", scores_csv(result.scores, result.threshold,
                                            bundle.feature_names));
  write_file(out / "threshold.txt", csv::format(result.threshold.cut) + "\n");
  write_file(out / "attention_trace.csv", attention_trace_csv(result.trace));
  if (dump_adjacency)
    write_file(out / "adjacency.csv", adjacency_csv(result.adjacency, bundle.feature_names));
  return result;
}

void do_interpret(const fs::path& out) {
  const LoadedScores scores = load_scores_csv(out / "scores.csv");
  ScoreSeries series;
  series.s_prime = scores.s_prime;
  series.agg = scores.agg;
  Threshold threshold;
  threshold.cut = load_threshold(out / "threshold.txt");
  threshold.flagged = scores.flagged;
  write_file(out / "segments.json", segments_json(run_interpret(series, threshold)));
}

void do_evaluate(const fs::path& data, const fs::path& out) {
  const DatasetBundle bundle = load_dataset(data);
  const LoadedScores scores = load_scores_csv(out / "scores.csv");
  ScoreSeries series;
  series.s_prime = scores.s_prime;
  series.agg = scores.agg;
  const double cut = load_threshold(out / "threshold.txt");
  const EvalReport report = run_evaluate(series, cut, bundle);
  write_file(out / "report.json", report_json(report));
  std::cout << "f1=" << csv::format(report.f1) << " hitrate100=" << csv::format(report.hitrate100)
            << " hitrate150=" << csv::format(report.hitrate150) << "\n";
}

void do_run_all(const RunConfig& cfg, const fs::path& out, bool dump_adjacency) {
  const fs::path data = out / "data";
  do_synth(cfg, data);
  do_train(cfg, data, out);
  do_score(out / "best.ckpt", data, out, dump_adjacency);
  do_interpret(out);
  do_evaluate(data, out);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"MIXAD: memory-induced explainable time-series anomaly detection"};
  app.require_subcommand(1);
  app.fallthrough();  // global flags may follow the subcommand

  GlobalOpts global;
  app.add_option("--seed", global.seed, "Override the seed for training and synthesis");
  app.add_option("--config", global.config_path, "key=value configuration file");
  app.add_option("--out", global.out_dir, "Output directory (default: .)");

  std::string data_dir;
  std::string ckpt_path;
  bool dump_adjacency = false;

  CLI::App* synth = app.add_subcommand("synth", "Generate a labeled synthetic dataset");
  CLI::App* train_cmd = app.add_subcommand("train", "Train on a dataset directory");
  train_cmd->add_option("--data", data_dir, "Dataset directory")->required();
  CLI::App* score = app.add_subcommand("score", "Score a dataset with a trained checkpoint");
  score->add_option("--data", data_dir, "Dataset directory")->required();
  score->add_option("--ckpt", ckpt_path, "Checkpoint path (default: <out>/best.ckpt)");
  score->add_flag("--dump-adjacency", dump_adjacency, "Also write the eval-mode adjacency");
  CLI::App* interpret_cmd =
      app.add_subcommand("interpret", "Rank causal features for flagged segments");
  CLI::App* evaluate = app.add_subcommand("evaluate", "Point-adjusted metrics + HitRate report");
  evaluate->add_option("--data", data_dir, "Dataset directory")->required();
  CLI::App* run_all = app.add_subcommand("run-all", "synth + train + score + interpret + evaluate");
  run_all->add_flag("--dump-adjacency", dump_adjacency, "Also write the eval-mode adjacency");

  CLI11_PARSE(app, argc, argv);

  try {
    const fs::path out = global.out_dir;
    if (synth->parsed()) {
      do_synth(resolve_config(global), out);
    } else if (train_cmd->parsed()) {
      do_train(resolve_config(global), data_dir, out);
    } else if (score->parsed()) {
      const fs::path ckpt = ckpt_path.empty() ? out / "best.ckpt" : fs::path(ckpt_path);
      do_score(ckpt, data_dir, out, dump_adjacency);
    } else if (interpret_cmd->parsed()) {
      do_interpret(out);
    } else if (evaluate->parsed()) {
      do_evaluate(data_dir, out);
    } else if (run_all->parsed()) {
      do_run_all(resolve_config(global), out, dump_adjacency);
    }
  } catch (const NumericError& e) {
    log_error(e.what());
    return 2;
  } catch (const ValueError& e) {
    log_error(e.what());
    return 1;
  } catch (const std::exception& e) {
    log_error(e.what());
    return 1;
  }
  return 0;
}
