#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "mixad/checkpoint.hpp"
#include "mixad/dataset.hpp"
#include "mixad/interpret.hpp"
#include "mixad/scoring.hpp"
#include "mixad/training.hpp"

namespace mixad {

// Pipeline stages shared by the CLI subcommands and the acceptance suite.
// Each stage is a pure function of its inputs; file serialization lives in
// the *_csv / *_json helpers so outputs stay byte-reproducible.

struct TrainOutput {
  Checkpoint checkpoint;  // model parameters + normalizer + dimensions
  std::vector<EpochLog> log;
  std::size_t best_epoch = 0;
};

TrainOutput run_train(const DatasetBundle& bundle, const TrainConfig& cfg);
std::string train_log_csv(const std::vector<EpochLog>& log);

struct ScoreOutput {
  AttentionTrace trace;
  ScoreSeries scores;
  Threshold threshold;
  Tensor adjacency;  // eval-mode generated adjacency, before normalization
};

ScoreOutput run_score(const Checkpoint& ckpt, const DatasetBundle& bundle);

std::string scores_csv(const ScoreSeries& scores, const Threshold& threshold,
                       const std::vector<std::string>& feature_names);
std::string attention_trace_csv(const AttentionTrace& trace);
std::string adjacency_csv(const Tensor& adjacency, const std::vector<std::string>& names);

std::vector<AnomalySegment> run_interpret(const ScoreSeries& scores, const Threshold& threshold);
std::string segments_json(const std::vector<AnomalySegment>& segments);

EvalReport run_evaluate(const ScoreSeries& scores, double threshold_cut,
                        const DatasetBundle& bundle);
std::string report_json(const EvalReport& report);

// Round-trip loaders for staged CLI runs.
struct LoadedScores {
  Tensor s_prime;  // T x N
  std::vector<double> agg;
  std::vector<char> flagged;
};
LoadedScores load_scores_csv(const std::filesystem::path& path);
double load_threshold(const std::filesystem::path& path);

}  // namespace mixad
