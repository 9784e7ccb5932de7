#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "mixad/interpret.hpp"
#include "mixad/tensor.hpp"

namespace mixad {

// For every maximal true-run in labels: if any prediction inside the run is
// true, the whole run becomes true. Predictions outside runs are unchanged.
std::vector<char> point_adjust(const std::vector<char>& pred, const std::vector<char>& labels);

struct Prf {
  double precision = 0, recall = 0, f1 = 0;
  std::size_t tp = 0, fp = 0, fn = 0;
};

// Pointwise precision/recall/F1 with 0/0 resolved to 0.
Prf prf1(const std::vector<char>& pred, const std::vector<char>& labels);

// HitRate@P%: |top-k of ranking  -  ground truth| / |GT| with
// k = floor(p_pct/100 * |GT|), capped at the ranking length.
double hitrate(const std::vector<std::pair<std::size_t, double>>& ranking,
               const std::vector<std::size_t>& ground_truth, std::size_t p_pct);

// Labeled segment with its ground-truth causal feature set.
struct CausalSegment {
  std::size_t start = 0, end = 0;  // inclusive
  std::vector<std::size_t> causes;
};

struct GroundTruth {
  std::vector<char> labels;
  std::vector<CausalSegment> segments;
};

struct SegmentReport {
  std::size_t start = 0, end = 0;
  bool detected = false;
  std::size_t anchor = 0;
  double hit100 = 0, hit150 = 0;
  std::vector<std::size_t> top_features;  // |GT|-long prefix of the ranking
};

struct EvalReport {
  double precision = 0, recall = 0, f1 = 0;
  double threshold = 0;
  double hitrate100 = 0, hitrate150 = 0;  // mean over GT segments, missed = 0
  std::size_t missed_segments = 0;
  std::vector<SegmentReport> segments;
};

// Threshold -> point-adjust -> prf1; then per detected GT segment rank causes
// over its span and score HitRate@100/150. Undetected segments contribute 0.
EvalReport evaluate_run(const Tensor& s_prime, std::span<const double> agg, double threshold,
                        const GroundTruth& gt);

// Point-adjusted recall restricted to the given label spans (used to check a
// specific anomaly subtype).
double recall_on_spans(const std::vector<char>& adjusted_pred, const std::vector<char>& labels,
                       const std::vector<std::pair<std::size_t, std::size_t>>& spans);

}  // namespace mixad
