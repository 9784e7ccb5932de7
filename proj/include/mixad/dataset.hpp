#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "mixad/eval.hpp"
#include "mixad/tensor.hpp"

namespace mixad {

enum class AnomalyKind { spike, level_shift, correlation_break };

const char* anomaly_kind_name(AnomalyKind kind);

struct AnomalySpec {
  AnomalyKind kind = AnomalyKind::spike;
  std::size_t span = 6;    // timestamps
  std::size_t causes = 2;  // causal set size
};

// Synthetic benchmark: per-node sinusoid mixtures, lagged inter-node coupling
// over a random sparse graph, Gaussian noise, and labeled anomalies injected
// into the test span only.
struct SynthConfig {
  std::size_t nodes = 8;
  std::size_t t_train = 4000;
  std::size_t t_test = 2000;
  // Evenly spaced in frequency (1/8 .. 1/48 by 1/144): any two pool entries
  // decorrelate over a few hundred samples, and a pool of 16 lets 8 nodes
  // draw fully disjoint period pairs.
  std::vector<double> period_pool = {8.0,  8.4706, 9.0,     9.6,  10.2857, 11.0769,
                                     12.0, 13.0909, 14.4,   16.0, 18.0,    20.5714,
                                     24.0, 28.8,    36.0,   48.0};
  double coupling_density = 0.35;
  double noise_sigma = 0.05;
  std::vector<AnomalySpec> anomalies = {
      {AnomalyKind::spike, 6, 2},           {AnomalyKind::level_shift, 90, 2},
      {AnomalyKind::correlation_break, 200, 2}, {AnomalyKind::spike, 6, 2},
      {AnomalyKind::level_shift, 90, 2},    {AnomalyKind::correlation_break, 200, 2},
  };
  std::uint64_t seed = 1;
};

struct InterpretationEntry {
  std::size_t start = 0, end = 0;  // inclusive, test-relative
  std::vector<std::size_t> causes;
  // Anomaly subtype, kept in memory only (not serialized); empty when loaded
  // from disk.
  std::string kind;
};

struct DatasetBundle {
  Tensor train;  // N x T_train
  Tensor test;   // N x T_test
  std::vector<char> labels;
  std::vector<InterpretationEntry> interpretation;
  std::vector<std::string> feature_names;
  // In-memory provenance note (sampling convention etc.); not serialized.
  std::string sampling_note;

  GroundTruth ground_truth() const;
  void validate() const;
};

// Directory layout: train.csv / test.csv (rows = timestamps, header = feature
// names), labels.csv (single 0/1 column), interpretation.csv
// (start,end,"i;j;k"). All files carry a header line.
DatasetBundle load_dataset(const std::filesystem::path& dir);
void save_dataset(const DatasetBundle& bundle, const std::filesystem::path& dir);

DatasetBundle generate_synthetic(const SynthConfig& cfg);

}  // namespace mixad
