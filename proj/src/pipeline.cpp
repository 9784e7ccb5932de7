#include "mixad/pipeline.hpp"

#include <json.hpp>

#include <sstream>

#include "mixad/csv.hpp"
#include "mixad/error.hpp"
#include "mixad/log.hpp"

namespace mixad {

namespace {

constexpr const char* kNormMin = "norm.min";
constexpr const char* kNormMax = "norm.max";
constexpr const char* kNormDegenerate = "norm.degenerate";

NormalizationStats stats_from_checkpoint(const Checkpoint& ckpt) {
  const Tensor& lo = ckpt.require(kNormMin);
  const Tensor& hi = ckpt.require(kNormMax);
  const Tensor& deg = ckpt.require(kNormDegenerate);
  NormalizationStats stats;
  stats.min.assign(lo.values().begin(), lo.values().end());
  stats.max.assign(hi.values().begin(), hi.values().end());
  for (double v : deg.values()) stats.degenerate.push_back(v != 0.0);
  return stats;
}

}  // namespace

TrainOutput run_train(const DatasetBundle& bundle, const TrainConfig& cfg) {
  cfg.validate();
  const NormalizationStats stats = fit_normalizer(bundle.train);
  const Tensor normalized = apply_normalizer(bundle.train, stats);

  MixadModel model(cfg.model_config(bundle.train.rows()), cfg.seed);
  TrainResult result = train(model, normalized, cfg);
  log_info("training finished: best epoch " + std::to_string(result.best_epoch) + ", val loss " +
           csv::format(result.best_val));

  TrainOutput out;
  out.checkpoint = std::move(result.best);
  out.log = std::move(result.log);
  out.best_epoch = result.best_epoch;

  const std::size_t n = stats.min.size();
  out.checkpoint.tensors.emplace(kNormMin, Tensor::from_data({n}, stats.min));
  out.checkpoint.tensors.emplace(kNormMax, Tensor::from_data({n}, stats.max));
  std::vector<double> deg(n);
  for (std::size_t i = 0; i < n; ++i) deg[i] = stats.degenerate[i] ? 1.0 : 0.0;
  out.checkpoint.tensors.emplace(kNormDegenerate, Tensor::from_data({n}, std::move(deg)));
  return out;
}

std::string train_log_csv(const std::vector<EpochLog>& log) {
  std::ostringstream out;
  out << "epoch,L_MAE,L1,L2,L3,total,val_total\n";
  for (const EpochLog& e : log) {
    out << e.epoch << ',' << csv::format(e.mae) << ',' << csv::format(e.triplet) << ','
        << csv::format(e.compact) << ',' << csv::format(e.uniform) << ','
        << csv::format(e.total) << ',' << csv::format(e.val_total) << '\n';
  }
  return out.str();
}

ScoreOutput run_score(const Checkpoint& ckpt, const DatasetBundle& bundle) {
  MixadModel model = MixadModel::from_checkpoint(ckpt);
  if (model.config().nodes != bundle.test.rows())
    throw ValueError("score: checkpoint expects " + std::to_string(model.config().nodes) +
                     " features, dataset has " + std::to_string(bundle.test.rows()));
  const NormalizationStats stats = stats_from_checkpoint(ckpt);
  const Tensor test_norm = apply_normalizer(bundle.test, stats);

  ScoreOutput out;
  // One eval-mode graph for the whole pass.
  out.adjacency = model.sample_adjacency(GraphMode::eval, nullptr);
  const Tensor a_norm = normalize_adjacency(out.adjacency);

  const std::size_t w = model.config().window;
  const std::vector<Tensor> windows = make_windows(test_norm, w, 1);
  out.trace.window = w;
  out.trace.series_len = test_norm.cols();
  out.trace.snapshots.reserve(windows.size());
  for (const Tensor& window : windows)
    out.trace.snapshots.push_back(model.encode_attention(window, a_norm).snapshot.att);

  out.scores = score_trace(out.trace);
  out.threshold = best_f1_threshold(out.scores.agg, bundle.labels);
  log_info("scoring: threshold " + csv::format(out.threshold.cut) + ", point-adjusted F1 " +
           csv::format(out.threshold.f1));
  return out;
}

std::string scores_csv(const ScoreSeries& scores, const Threshold& threshold,
                       const std::vector<std::string>& feature_names) {
  const std::size_t t = scores.s_prime.rows(), n = scores.s_prime.cols();
  std::ostringstream out;
  out << "t";
  for (std::size_t i = 0; i < n; ++i) out << ',' << feature_names[i];
  out << ",agg,flagged\n";
  for (std::size_t r = 0; r < t; ++r) {
    out << r;
    for (std::size_t i = 0; i < n; ++i) out << ',' << csv::format(scores.s_prime.at(r, i));
    out << ',' << csv::format(scores.agg[r]) << ',' << (threshold.flagged[r] ? '1' : '0') << '\n';
  }
  return out.str();
}

std::string attention_trace_csv(const AttentionTrace& trace) {
  std::ostringstream out;
  const std::size_t m = trace.snapshots.empty() ? 0 : trace.snapshots[0].cols();
  out << "t,node";
  for (std::size_t j = 0; j < m; ++j) out << ",a" << j;
  out << '\n';
  for (std::size_t s = 0; s < trace.snapshots.size(); ++s) {
    const Tensor& att = trace.snapshots[s];
    for (std::size_t i = 0; i < att.rows(); ++i) {
      out << (trace.window - 1 + s) << ',' << i;
      for (std::size_t j = 0; j < m; ++j) out << ',' << csv::format(att.at(i, j));
      out << '\n';
    }
  }
  return out.str();
}

std::string adjacency_csv(const Tensor& adjacency, const std::vector<std::string>& names) {
  std::ostringstream out;
  for (std::size_t i = 0; i < names.size(); ++i) {
    if (i) out << ',';
    out << names[i];
  }
  out << '\n';
  for (std::size_t i = 0; i < adjacency.rows(); ++i) {
    for (std::size_t j = 0; j < adjacency.cols(); ++j) {
      if (j) out << ',';
      out << csv::format(adjacency.at(i, j));
    }
    out << '\n';
  }
  return out.str();
}

std::vector<AnomalySegment> run_interpret(const ScoreSeries& scores, const Threshold& threshold) {
  std::vector<AnomalySegment> out;
  for (const auto& [start, end] : segment_detected(threshold.flagged))
    out.push_back(rank_causes(scores.s_prime, start, end));
  return out;
}

std::string segments_json(const std::vector<AnomalySegment>& segments) {
  nlohmann::ordered_json root = nlohmann::ordered_json::array();
  for (const AnomalySegment& seg : segments) {
    nlohmann::ordered_json ranked = nlohmann::ordered_json::array();
    for (const auto& [feature, weight] : seg.ranking)
      ranked.push_back({{"feature", feature}, {"weight", weight}});
    root.push_back({{"start", seg.start},
                    {"end", seg.end},
                    {"anchor", seg.anchor},
                    {"ranked", std::move(ranked)}});
  }
  return root.dump(2) + "\n";
}

EvalReport run_evaluate(const ScoreSeries& scores, double threshold_cut,
                        const DatasetBundle& bundle) {
  return evaluate_run(scores.s_prime, scores.agg, threshold_cut, bundle.ground_truth());
}

std::string report_json(const EvalReport& report) {
  nlohmann::ordered_json segments = nlohmann::ordered_json::array();
  for (const SegmentReport& seg : report.segments) {
    segments.push_back({{"start", seg.start},
                        {"end", seg.end},
                        {"detected", seg.detected},
                        {"anchor", seg.anchor},
                        {"hitrate100", seg.hit100},
                        {"hitrate150", seg.hit150},
                        {"top_features", seg.top_features}});
  }
  nlohmann::ordered_json root = {{"precision", report.precision},
                                 {"recall", report.recall},
                                 {"f1", report.f1},
                                 {"threshold", report.threshold},
                                 {"hitrate100", report.hitrate100},
                                 {"hitrate150", report.hitrate150},
                                 {"missed_segments", report.missed_segments},
                                 {"per_segment", std::move(segments)}};
  return root.dump(2) + "\n";
}

LoadedScores load_scores_csv(const std::filesystem::path& path) {
  const std::vector<std::string> lines = csv::read_lines(path);
  if (lines.size() < 2) throw IoError(path.string() + ": expected header plus data rows");
  const std::vector<std::string> header = csv::split(lines[0], ',');
  if (header.size() < 4 || header.front() != "t" || header[header.size() - 2] != "agg" ||
      header.back() != "flagged")
    throw IoError(path.string() + ": unexpected scores.csv header");
  const std::size_t n = header.size() - 3;
  const std::size_t t = lines.size() - 1;

  LoadedScores out;
  out.s_prime = Tensor::zeros({t, n});
  out.agg.resize(t);
  out.flagged.resize(t);
  for (std::size_t row = 0; row < t; ++row) {
    const std::string context = path.string() + ":" + std::to_string(row + 2);
    const std::vector<std::string> fields = csv::split(lines[row + 1], ',');
    if (fields.size() != header.size()) throw IoError(context + ": ragged row");
    for (std::size_t i = 0; i < n; ++i)
      out.s_prime.values_mut()[row * n + i] = csv::parse_double(fields[i + 1], context);
    out.agg[row] = csv::parse_double(fields[n + 1], context);
    out.flagged[row] = fields[n + 2] == "1";
  }
  return out;
}

double load_threshold(const std::filesystem::path& path) {
  const std::vector<std::string> lines = csv::read_lines(path);
  if (lines.empty()) throw IoError(path.string() + ": empty threshold file");
  return csv::parse_double(lines[0], path.string() + ":1");
}

}  // namespace mixad
